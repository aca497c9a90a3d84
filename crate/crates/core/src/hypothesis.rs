//! Bayes factors for the effect size and for the power parameter, with their
//! limits as the replication standard error goes to zero.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power_prior::{evidence, BetaParams, Study, StudyPair};
use crate::quadrature::{log_integrate_semiinf, LogIntegral, QuadratureSpec};
use crate::special_math::{ln_beta, ln_dnorm, ln_invgamma, ln_sqrt_2pi, ln_sqrt_4pi, log_gamma, log_kummer_m, InvGammaParams};

/// Hypotheses that appear as numerator or denominator of a Bayes factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// `θ = 0`.
    H0,
    /// `θ ≠ 0` with the power prior (or the `α = 1` posterior) as prior.
    H1,
    /// Original and replication are in conflict: `α = 0` or `α < 1`.
    Hd,
    /// Original and replication are compatible: `α = 1`.
    Hc,
    /// A user-defined hypothesis, identified by its label.
    Custom(String),
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::H0 => write!(f, "H0"),
            Hypothesis::H1 => write!(f, "H1"),
            Hypothesis::Hd => write!(f, "Hd"),
            Hypothesis::Hc => write!(f, "Hc"),
            Hypothesis::Custom(s) => write!(f, "{s}"),
        }
    }
}

/// A Bayes factor on the log scale, oriented numerator over denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesFactorResult {
    pub log_bf: f64,
    pub numerator: Hypothesis,
    pub denominator: Hypothesis,
    /// Relative error estimate of the quadrature behind the value; 0 for
    /// closed forms.
    pub quadrature_err: f64,
}

impl BayesFactorResult {
    pub fn bf(&self) -> f64 {
        self.log_bf.exp()
    }

    /// The same comparison with numerator and denominator swapped.
    pub fn inverted(&self) -> Self {
        Self {
            log_bf: -self.log_bf,
            numerator: self.denominator.clone(),
            denominator: self.numerator.clone(),
            quadrature_err: self.quadrature_err,
        }
    }

    pub fn label(&self) -> String {
        format!("BF_{}{}", self.numerator, self.denominator)
    }
}

/// Variance `κ²` of the unit-information prior `θ ~ N(0, κ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitInformation {
    pub kappa2: f64,
}

impl Default for UnitInformation {
    /// `κ² = 2`, suited to standardized mean differences.
    fn default() -> Self {
        Self { kappa2: 2.0 }
    }
}

impl UnitInformation {
    pub fn new(kappa2: f64) -> Result<Self> {
        let u = Self { kappa2 };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa2 > 0.0 && self.kappa2.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!("kappa2 must be positive, got {}", self.kappa2)))
        }
    }

    /// Shrinkage factor `s = κ² / (σ²_o + κ²)`.
    pub fn s(&self, sigma2_o: f64) -> f64 {
        self.kappa2 / (sigma2_o + self.kappa2)
    }
}

/// Outcome of a limit that may be degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LimitClassification {
    Finite(f64),
    PlusInfinity,
    Zero,
}

/// A limit driven by a Dirac delta, together with the finite factor that
/// multiplies (or divides) the delta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracLimit {
    pub classification: LimitClassification,
    pub pre_dirac_factor: f64,
}

/// `BF01` with the power prior under `H1`: `N(θ̂_r | 0, σ²_r) / Z`.
pub fn bf01_power_prior(pair: &StudyPair, prior: &BetaParams, spec: &QuadratureSpec) -> Result<BayesFactorResult> {
    let ev = evidence(pair, prior, spec)?;
    let r = &pair.replication;
    Ok(BayesFactorResult {
        log_bf: ln_dnorm(r.estimate, 0.0, r.variance()) - ev.log_value,
        numerator: Hypothesis::H0,
        denominator: Hypothesis::H1,
        quadrature_err: ev.rel_err,
    })
}

/// Replication Bayes factor: `N(θ̂_r | 0, σ²_r) / N(θ̂_r | θ̂_o, σ²_o + σ²_r)`.
pub fn bf01_replication(pair: &StudyPair) -> Result<BayesFactorResult> {
    pair.validate()?;
    let (o, r) = (&pair.original, &pair.replication);
    Ok(BayesFactorResult {
        log_bf: ln_dnorm(r.estimate, 0.0, r.variance())
            - ln_dnorm(r.estimate, o.estimate, o.variance() + r.variance()),
        numerator: Hypothesis::H0,
        denominator: Hypothesis::H1,
        quadrature_err: 0.0,
    })
}

/// `BFdc` for `Hd: α = 0` against `Hc: α = 1` under the unit-information
/// initial prior.
pub fn bf_dc_point(pair: &StudyPair, ui: &UnitInformation) -> Result<BayesFactorResult> {
    pair.validate()?;
    ui.validate()?;
    let (o, r) = (&pair.original, &pair.replication);
    let s = ui.s(o.variance());
    Ok(BayesFactorResult {
        log_bf: ln_dnorm(r.estimate, 0.0, r.variance() + ui.kappa2)
            - ln_dnorm(r.estimate, s * o.estimate, r.variance() + s * o.variance()),
        numerator: Hypothesis::Hd,
        denominator: Hypothesis::Hc,
        quadrature_err: 0.0,
    })
}

/// `BFdc` for `Hd: α ~ Be(1, y)` against `Hc: α = 1`.
///
/// `y > 1` is required unless `allow_uniform` is set, in which case `y = 1`
/// is accepted with a warning.
pub fn bf_dc_beta(pair: &StudyPair, y: f64, allow_uniform: bool, spec: &QuadratureSpec) -> Result<BayesFactorResult> {
    if !y.is_finite() || y < 1.0 || (y == 1.0 && !allow_uniform) {
        return Err(Error::domain(format!(
            "the Be(1, y) prior under Hd needs y > 1 (y = 1 only with the uniform relaxation), got {y}"
        )));
    }
    if y == 1.0 {
        log::warn!("bf_dc_beta: using the uniform prior y = 1 under Hd");
    }
    let ev = evidence(pair, &BetaParams::new(1.0, y)?, spec)?;
    let (o, r) = (&pair.original, &pair.replication);
    Ok(BayesFactorResult {
        log_bf: ev.log_value - ln_dnorm(r.estimate, o.estimate, r.variance() + o.variance()),
        numerator: Hypothesis::Hd,
        denominator: Hypothesis::Hc,
        quadrature_err: ev.rel_err,
    })
}

/// Limit of [`bf01_power_prior`] as `σ_r → 0` with `θ̂_r → theta_true`.
///
/// The numerator tends to a Dirac delta at zero, so the limit is infinite
/// at `theta_true = 0` and zero elsewhere. The finite factor multiplying the
/// delta, `√(2π) σ_o B(x, y) / {B(x + 1/2, y) M(x + 1/2, x + y + 1/2, −(θ̂_o − θ)² / (2σ²_o))}`,
/// is reported alongside.
pub fn bf01_power_prior_limit(theta_true: f64, original: &Study, prior: &BetaParams) -> Result<DiracLimit> {
    original.validate()?;
    prior.validate()?;
    if !theta_true.is_finite() {
        return Err(Error::domain("theta_true must be finite"));
    }
    let (x, y) = (prior.x, prior.y);
    let z = -(original.estimate - theta_true).powi(2) / (2.0 * original.variance());
    let log_factor = ln_sqrt_2pi() + original.se.ln() + ln_beta(x, y)
        - ln_beta(x + 0.5, y)
        - log_kummer_m(x + 0.5, x + y + 0.5, z)?;
    Ok(DiracLimit {
        classification: if theta_true == 0.0 {
            LimitClassification::PlusInfinity
        } else {
            LimitClassification::Zero
        },
        pre_dirac_factor: log_factor.exp(),
    })
}

/// Limit of [`bf_dc_point`] as `σ_r → 0` with `θ̂_r → theta_true`:
/// `√(1 − s) exp[−½{θ²/κ² − (θ − sθ̂_o)² / (sσ²_o)}]`.
pub fn bf_dc_point_limit(theta_true: f64, original: &Study, ui: &UnitInformation) -> Result<f64> {
    original.validate()?;
    ui.validate()?;
    let s = ui.s(original.variance());
    let e = theta_true * theta_true / ui.kappa2
        - (theta_true - s * original.estimate).powi(2) / (s * original.variance());
    Ok((0.5 * (1.0 - s).ln() - 0.5 * e).exp())
}

/// Limit of [`bf_dc_beta`] as `σ_r → 0` with `θ̂_r → theta_true`:
/// `B(3/2, y) / B(1, y) · M(y, y + 3/2, (θ − θ̂_o)² / (2σ²_o))`.
pub fn bf_dc_beta_limit(theta_true: f64, original: &Study, y: f64) -> Result<f64> {
    original.validate()?;
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::domain(format!("y must be positive, got {y}")));
    }
    if !theta_true.is_finite() {
        return Err(Error::domain("theta_true must be finite"));
    }
    let z = (theta_true - original.estimate).powi(2) / (2.0 * original.variance());
    Ok((ln_beta(1.5, y) - ln_beta(1.0, y) + log_kummer_m(y, y + 1.5, z)?).exp())
}

/// `BFdc` for `Hd: τ² ~ IG(q, r)` against `Hc: τ² = 0` in the hierarchical
/// model.
pub fn bf_dc_invgamma(pair: &StudyPair, ig: &InvGammaParams, spec: &QuadratureSpec) -> Result<BayesFactorResult> {
    pair.validate()?;
    let ig = InvGammaParams::new(ig.q, ig.r)?;
    let (o, r) = (&pair.original, &pair.replication);
    let v0 = o.variance() + r.variance();
    let num = log_evidence_invgamma(r.estimate - o.estimate, v0, &ig, spec)?;
    Ok(BayesFactorResult {
        log_bf: num.log_value - ln_dnorm(r.estimate, o.estimate, v0),
        numerator: Hypothesis::Hd,
        denominator: Hypothesis::Hc,
        quadrature_err: num.rel_err,
    })
}

/// `log ∫ N(d | 0, v0 + 2τ²) IG(τ² | q, r) dτ²`.
pub(crate) fn log_evidence_invgamma(d: f64, v0: f64, ig: &InvGammaParams, spec: &QuadratureSpec) -> Result<LogIntegral> {
    let mode = ig.mode();
    let eb = 0.5 * (d * d - v0).max(0.0);
    let mut breaks = vec![0.1 * mode, mode, 10.0 * mode, 0.5 * v0];
    if eb > 0.0 {
        breaks.push(eb);
    }
    let res = log_integrate_semiinf(
        |t2| {
            if t2 <= 0.0 {
                f64::NEG_INFINITY
            } else {
                ln_dnorm(d, 0.0, v0 + 2.0 * t2) + ln_invgamma(t2, ig)
            }
        },
        mode,
        &breaks,
        spec,
    )?;
    if !res.log_value.is_finite() {
        return Err(Error::domain("marginal likelihood under the inverse-gamma prior vanished"));
    }
    Ok(res)
}

/// Limit of [`bf_dc_invgamma`] as both standard errors go to zero.
///
/// The denominator tends to a Dirac delta at `θ_r − θ_o = 0`, so the limit
/// is zero when the estimates agree and infinite otherwise. The finite
/// numerator `r^q Γ(q + 1/2) / Γ(q) · {r + (θ_r − θ_o)²/4}^{−(q+1/2)} / √(4π)`
/// is reported alongside.
pub fn bf_dc_invgamma_limit(theta_r: f64, theta_o: f64, ig: &InvGammaParams) -> Result<DiracLimit> {
    let ig = InvGammaParams::new(ig.q, ig.r)?;
    if !(theta_r.is_finite() && theta_o.is_finite()) {
        return Err(Error::domain("effect sizes must be finite"));
    }
    let (q, r) = (ig.q, ig.r);
    let d2 = (theta_r - theta_o).powi(2);
    let log_num = q * r.ln() + log_gamma(q + 0.5)? - log_gamma(q)?
        - (q + 0.5) * (r + 0.25 * d2).ln()
        - ln_sqrt_4pi();
    Ok(DiracLimit {
        classification: if theta_r == theta_o {
            LimitClassification::Zero
        } else {
            LimitClassification::PlusInfinity
        },
        pre_dirac_factor: log_num.exp(),
    })
}

/// Density of `α = σ²_o / (2τ² + σ²_o)` implied by `τ² ~ IG(q, r)`:
/// `r^q / Γ(q) · (2/σ²_o)^q · α^{q−1} / (1 − α)^{q+1} · exp{−2rα / (σ²_o (1 − α))}`.
///
/// At `α = 1` the density vanishes. At `α = 0` it vanishes for `q > 1`, is
/// finite for `q = 1` and infinite for `q < 1`.
pub fn implied_alpha_prior_logdensity(alpha: f64, ig: &InvGammaParams, sigma2_o: f64) -> Result<f64> {
    let ig = InvGammaParams::new(ig.q, ig.r)?;
    if !(sigma2_o > 0.0 && sigma2_o.is_finite()) {
        return Err(Error::domain(format!("sigma2_o must be positive, got {sigma2_o}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let (q, r) = (ig.q, ig.r);
    let base = q * r.ln() - log_gamma(q)? + q * (2.0 / sigma2_o).ln();
    if alpha == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if alpha == 0.0 {
        return Ok(if q > 1.0 {
            f64::NEG_INFINITY
        } else if q == 1.0 {
            base
        } else {
            f64::INFINITY
        });
    }
    Ok(base + (q - 1.0) * alpha.ln() - (q + 1.0) * (-alpha).ln_1p()
        - 2.0 * r * alpha / (sigma2_o * (1.0 - alpha)))
}

/// Table-style rendering of a Bayes factor: values below one as `1/x`,
/// two significant digits when within a factor of ten of one and whole
/// numbers otherwise, clamped at `< 1/1000` and `> 1000`.
pub fn format_bf(bf: f64) -> String {
    if bf.is_nan() {
        return "NaN".into();
    }
    if bf < 1e-3 {
        return "< 1/1000".into();
    }
    if bf > 1e3 {
        return "> 1000".into();
    }
    let (v, prefix) = if bf < 1.0 { (1.0 / bf, "1/") } else { (bf, "") };
    let body = if v < 10.0 {
        let rounded = format!("{v:.1}");
        // 9.96 rounds to 10.0, which has three significant digits.
        if rounded == "10.0" { "10".to_string() } else { rounded }
    } else {
        format!("{}", v.round() as i64)
    };
    format!("{prefix}{body}")
}
