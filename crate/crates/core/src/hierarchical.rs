//! The two-study normal hierarchical model and its correspondence with the
//! power prior: maps between `α`, `τ²` and `I²`, the induced priors, and
//! Bayes factors built from hierarchical marginal likelihoods.
//!
//! The flat prior on the overall effect `θ_*` carries a constant `k` that
//! cancels from every posterior; reported evidences use `k = 1` and are
//! meaningful only in ratios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{BayesFactorResult, Hypothesis};
use crate::power_prior::{BetaParams, StudyPair};
use crate::quadrature::{log_integrate_semiinf, LogIntegral, QuadratureSpec};
use crate::special_math::{
    gf_logpdf, ln_beta_density, ln_dnorm, ln_invgamma, GBetaParams, GFParams, InvGammaParams,
};

/// Two-study hierarchical model with a fixed heterogeneity variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalModel {
    pub pair: StudyPair,
    pub tau2: f64,
    /// Constant of the flat prior on `θ_*`; cancels in all posteriors.
    pub flat_prior_scale: f64,
}

impl HierarchicalModel {
    pub fn new(pair: StudyPair, tau2: f64) -> Result<Self> {
        let m = Self {
            pair,
            tau2,
            flat_prior_scale: 1.0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.pair.validate()?;
        check_tau2(self.tau2)?;
        if !(self.flat_prior_scale > 0.0 && self.flat_prior_scale.is_finite()) {
            return Err(Error::domain("flat prior constant must be positive"));
        }
        Ok(())
    }
}

fn check_tau2(tau2: f64) -> Result<()> {
    if tau2 >= 0.0 && tau2.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("tau2 must be nonnegative and finite, got {tau2}")))
    }
}

fn check_sigma2(sigma2_o: f64) -> Result<()> {
    if sigma2_o > 0.0 && sigma2_o.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("sigma2_o must be positive, got {sigma2_o}")))
    }
}

/// Prior on the heterogeneity variance `τ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeterogeneityPrior {
    /// Point mass at `tau2`.
    Fixed { tau2: f64 },
    GeneralizedF(GFParams),
    InvGamma(InvGammaParams),
    /// The pushforward of `α ~ Be(x, y)` through `τ² = (1/α − 1) σ²_o / 2`,
    /// evaluated through the beta density and the Jacobian.
    TransformedFromAlpha { prior: BetaParams, sigma2_o: f64 },
}

impl HeterogeneityPrior {
    pub fn validate(&self) -> Result<()> {
        match self {
            HeterogeneityPrior::Fixed { tau2 } => check_tau2(*tau2),
            HeterogeneityPrior::GeneralizedF(p) => GFParams::new(p.a, p.b, p.lambda).map(|_| ()),
            HeterogeneityPrior::InvGamma(p) => InvGammaParams::new(p.q, p.r).map(|_| ()),
            HeterogeneityPrior::TransformedFromAlpha { prior, sigma2_o } => {
                prior.validate()?;
                check_sigma2(*sigma2_o)
            }
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, HeterogeneityPrior::Fixed { .. })
    }

    /// Log-density at `tau2` for continuous priors.
    pub fn logpdf(&self, tau2: f64) -> Result<f64> {
        if tau2.is_nan() {
            return Err(Error::domain("tau2 is NaN"));
        }
        match self {
            HeterogeneityPrior::Fixed { .. } => Err(Error::State(
                "a fixed heterogeneity has no density".into(),
            )),
            _ => Ok(self.ln_density(tau2)),
        }
    }

    fn ln_density(&self, tau2: f64) -> f64 {
        if tau2 < 0.0 {
            return f64::NEG_INFINITY;
        }
        match self {
            HeterogeneityPrior::Fixed { .. } => f64::NEG_INFINITY,
            HeterogeneityPrior::GeneralizedF(p) => gf_logpdf(tau2, p).unwrap_or(f64::NEG_INFINITY),
            HeterogeneityPrior::InvGamma(p) => ln_invgamma(tau2, p),
            HeterogeneityPrior::TransformedFromAlpha { prior, sigma2_o } => {
                let w = 2.0 * tau2 + sigma2_o;
                ln_beta_density(sigma2_o / w, prior.x, prior.y) + (2.0 * sigma2_o).ln() - 2.0 * w.ln()
            }
        }
    }

    /// A `τ²` scale on which the prior has its bulk; used to map the half
    /// line onto the unit interval.
    fn scale(&self) -> f64 {
        match self {
            HeterogeneityPrior::Fixed { tau2 } => tau2.max(f64::MIN_POSITIVE),
            HeterogeneityPrior::GeneralizedF(p) => 1.0 / p.lambda,
            HeterogeneityPrior::InvGamma(p) => p.mode(),
            HeterogeneityPrior::TransformedFromAlpha { sigma2_o, .. } => 0.5 * sigma2_o,
        }
    }
}

/// `τ² = (1/α − 1) σ²_o / 2`.
pub fn alpha_to_tau2(alpha: f64, sigma2_o: f64) -> Result<f64> {
    check_sigma2(sigma2_o)?;
    if alpha == 0.0 {
        return Err(Error::domain("alpha = 0 corresponds to an infinite heterogeneity tau2"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok((1.0 / alpha - 1.0) * sigma2_o / 2.0)
}

/// `α = σ²_o / (2τ² + σ²_o)`.
pub fn tau2_to_alpha(tau2: f64, sigma2_o: f64) -> Result<f64> {
    check_sigma2(sigma2_o)?;
    check_tau2(tau2)?;
    Ok(sigma2_o / (2.0 * tau2 + sigma2_o))
}

fn mobius(v: f64, name: &str) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::domain(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok((1.0 - v) / (1.0 + v))
}

/// `I² = (1 − α) / (1 + α)`.
pub fn alpha_to_i2(alpha: f64) -> Result<f64> {
    mobius(alpha, "alpha")
}

/// `α = (1 − I²) / (1 + I²)`.
pub fn i2_to_alpha(i2: f64) -> Result<f64> {
    mobius(i2, "I2")
}

/// `I² = τ² / (τ² + σ²_o)`.
pub fn tau2_to_i2(tau2: f64, sigma2_o: f64) -> Result<f64> {
    check_sigma2(sigma2_o)?;
    check_tau2(tau2)?;
    Ok(tau2 / (tau2 + sigma2_o))
}

/// The prior on `τ²` matching `α ~ Be(x, y)`: `GF(y, x, 2/σ²_o)`.
pub fn tau2_prior_from_alpha_prior(prior: &BetaParams, sigma2_o: f64) -> Result<HeterogeneityPrior> {
    prior.validate()?;
    check_sigma2(sigma2_o)?;
    Ok(HeterogeneityPrior::GeneralizedF(GFParams::new(prior.y, prior.x, 2.0 / sigma2_o)?))
}

/// The prior on `I²` matching `α ~ Be(x, y)`: `GBe(y, x, 2)`.
pub fn i2_prior_from_alpha_prior(prior: &BetaParams) -> Result<GBetaParams> {
    prior.validate()?;
    GBetaParams::new(prior.y, prior.x, 2.0)
}

/// Mean and variance of `θ_r` given `τ²`.
pub fn hier_posterior_theta_r(model: &HierarchicalModel) -> Result<(f64, f64)> {
    model.validate()?;
    Ok(theta_r_moments(&model.pair, model.tau2))
}

fn theta_r_moments(pair: &StudyPair, tau2: f64) -> (f64, f64) {
    let (o, r) = (&pair.original, &pair.replication);
    let (vr, w) = (r.variance(), 2.0 * tau2 + o.variance());
    let precision = 1.0 / vr + 1.0 / w;
    ((r.estimate / vr + o.estimate / w) / precision, 1.0 / precision)
}

/// `log N(θ̂_r | θ̂_o, σ²_o + σ²_r + 2τ²)`, the evidence with `k = 1`.
pub fn hier_evidence(pair: &StudyPair, tau2: f64) -> Result<f64> {
    pair.validate()?;
    check_tau2(tau2)?;
    Ok(ln_evidence(pair, tau2))
}

fn ln_evidence(pair: &StudyPair, tau2: f64) -> f64 {
    let (o, r) = (&pair.original, &pair.replication);
    ln_dnorm(r.estimate, o.estimate, o.variance() + r.variance() + 2.0 * tau2)
}

fn tau2_breaks(prior: &HeterogeneityPrior, d2: f64, v0: f64) -> Vec<f64> {
    let scale = prior.scale();
    let mut b: Vec<f64> = [1e-2, 1e-1, 1.0, 1e1, 1e2].iter().map(|k| k * scale).collect();
    b.push(0.5 * v0);
    let eb = 0.5 * (d2 - v0);
    if eb > 0.0 {
        b.push(eb);
    }
    b
}

/// `log ∫ exp(log_f(τ²)) f(τ²) dτ²` for a continuous prior.
fn integrate_over_prior<F>(
    log_f: F,
    prior: &HeterogeneityPrior,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<LogIntegral>
where
    F: Fn(f64) -> f64,
{
    log_integrate_semiinf(
        |t2| {
            let lp = prior.ln_density(t2);
            if lp == f64::NEG_INFINITY {
                lp
            } else {
                log_f(t2) + lp
            }
        },
        prior.scale(),
        breaks,
        spec,
    )
}

/// Posterior of `τ²` and `θ_r` under a prior on the heterogeneity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalPosterior {
    pub pair: StudyPair,
    pub prior: HeterogeneityPrior,
    pub spec: QuadratureSpec,
    /// `log ∫ N(θ̂_r | θ̂_o, σ²_o + σ²_r + 2τ²) f(τ²) dτ²` with `k = 1`.
    pub log_evidence: f64,
    pub evidence_rel_err: f64,
}

impl HierarchicalPosterior {
    pub fn new(pair: StudyPair, prior: HeterogeneityPrior, spec: QuadratureSpec) -> Result<Self> {
        pair.validate()?;
        prior.validate()?;
        let (log_evidence, evidence_rel_err) = match prior {
            HeterogeneityPrior::Fixed { tau2 } => (ln_evidence(&pair, tau2), 0.0),
            _ => {
                let r = integrate_over_prior(|t2| ln_evidence(&pair, t2), &prior, &Self::breaks_for(&pair, &prior), &spec)?;
                if !r.log_value.is_finite() {
                    return Err(Error::domain("hierarchical marginal likelihood vanished"));
                }
                (r.log_value, r.rel_err)
            }
        };
        Ok(Self {
            pair,
            prior,
            spec,
            log_evidence,
            evidence_rel_err,
        })
    }

    fn breaks_for(pair: &StudyPair, prior: &HeterogeneityPrior) -> Vec<f64> {
        let (o, r) = (&pair.original, &pair.replication);
        tau2_breaks(prior, (r.estimate - o.estimate).powi(2), o.variance() + r.variance())
    }

    /// Marginal posterior log-density of `τ²`.
    pub fn tau2_logdensity(&self, tau2: f64) -> Result<f64> {
        let lp = self.prior.logpdf(tau2)?;
        if tau2 < 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(ln_evidence(&self.pair, tau2) + lp - self.log_evidence)
    }

    /// Marginal posterior log-density of `θ_r`, mixing the conditional normal
    /// over the posterior of `τ²`.
    pub fn theta_r_logdensity(&self, theta: f64) -> Result<f64> {
        if !theta.is_finite() {
            return Err(Error::domain(format!("theta must be finite, got {theta}")));
        }
        if let HeterogeneityPrior::Fixed { tau2 } = self.prior {
            let (m, v) = theta_r_moments(&self.pair, tau2);
            return Ok(ln_dnorm(theta, m, v));
        }
        let r = integrate_over_prior(
            |t2| {
                let (m, v) = theta_r_moments(&self.pair, t2);
                ln_dnorm(theta, m, v) + ln_evidence(&self.pair, t2)
            },
            &self.prior,
            &Self::breaks_for(&self.pair, &self.prior),
            &self.spec,
        )?;
        Ok(r.log_value - self.log_evidence)
    }
}

/// Marginal posterior log-density of `τ²`.
pub fn hier_marginal_posterior_tau2(
    tau2: f64,
    pair: &StudyPair,
    prior: &HeterogeneityPrior,
    spec: &QuadratureSpec,
) -> Result<f64> {
    HierarchicalPosterior::new(*pair, *prior, *spec)?.tau2_logdensity(tau2)
}

/// Marginal posterior log-density of `θ_r`.
pub fn hier_marginal_posterior_theta_r(
    theta: f64,
    pair: &StudyPair,
    prior: &HeterogeneityPrior,
    spec: &QuadratureSpec,
) -> Result<f64> {
    HierarchicalPosterior::new(*pair, *prior, *spec)?.theta_r_logdensity(theta)
}

/// Prior on the overall effect `θ_*` under one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaStarPrior {
    Point { value: f64 },
    Normal { mean: f64, variance: f64 },
    /// `N(θ̂_o, σ²_o + τ²)`: the flat prior updated by the original study.
    OriginalPosterior,
    /// The improper flat prior; not allowed in a Bayes factor.
    Flat,
}

/// Joint prior of `(θ_*, τ²)` defining one hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSpec {
    pub label: String,
    pub theta_star: ThetaStarPrior,
    pub tau2: HeterogeneityPrior,
}

/// Mean and variance of `θ̂_r` given `τ²` under `θ_r ~ N(θ_*, τ²)` and the
/// `θ_*` prior.
fn predictive(pair: &StudyPair, theta_star: &ThetaStarPrior, tau2: f64) -> Result<(f64, f64)> {
    let vr = pair.replication.variance() + tau2;
    match *theta_star {
        ThetaStarPrior::Point { value } => Ok((value, vr)),
        ThetaStarPrior::Normal { mean, variance } => Ok((mean, vr + variance)),
        ThetaStarPrior::OriginalPosterior => {
            Ok((pair.original.estimate, vr + pair.original.variance() + tau2))
        }
        ThetaStarPrior::Flat => Err(Error::domain(
            "a flat prior on the overall effect gives an improper marginal likelihood",
        )),
    }
}

impl HypothesisSpec {
    pub fn validate(&self) -> Result<()> {
        if self.label.trim().is_empty() {
            return Err(Error::domain("hypothesis label must not be empty"));
        }
        match self.theta_star {
            ThetaStarPrior::Point { value } if !value.is_finite() => {
                return Err(Error::domain("point value must be finite"))
            }
            ThetaStarPrior::Normal { mean, variance } if !(mean.is_finite() && variance > 0.0 && variance.is_finite()) => {
                return Err(Error::domain("normal prior needs a finite mean and positive variance"))
            }
            ThetaStarPrior::Flat => {
                return Err(Error::domain(
                    "a flat prior on the overall effect gives an improper marginal likelihood",
                ))
            }
            _ => {}
        }
        self.tau2.validate()
    }

    /// `log f(θ̂_r | H)` with its relative error estimate.
    pub fn log_marginal_likelihood(&self, pair: &StudyPair, spec: &QuadratureSpec) -> Result<LogIntegral> {
        pair.validate()?;
        self.validate()?;
        let t = pair.replication.estimate;
        if let HeterogeneityPrior::Fixed { tau2 } = self.tau2 {
            let (m, v) = predictive(pair, &self.theta_star, tau2)?;
            return Ok(LogIntegral {
                log_value: ln_dnorm(t, m, v),
                rel_err: 0.0,
            });
        }
        let (m0, v0) = predictive(pair, &self.theta_star, 0.0)?;
        let breaks = tau2_breaks(&self.tau2, (t - m0).powi(2), v0);
        let r = integrate_over_prior(
            |t2| match predictive(pair, &self.theta_star, t2) {
                Ok((m, v)) => ln_dnorm(t, m, v),
                Err(_) => f64::NEG_INFINITY,
            },
            &self.tau2,
            &breaks,
            spec,
        )?;
        if !r.log_value.is_finite() {
            return Err(Error::domain(format!("marginal likelihood under {} vanished", self.label)));
        }
        Ok(r)
    }
}

/// `f(θ̂_r | numerator) / f(θ̂_r | denominator)`.
pub fn hier_bayes_factor(
    pair: &StudyPair,
    numerator: &HypothesisSpec,
    denominator: &HypothesisSpec,
    spec: &QuadratureSpec,
) -> Result<BayesFactorResult> {
    let n = numerator.log_marginal_likelihood(pair, spec)?;
    let d = denominator.log_marginal_likelihood(pair, spec)?;
    Ok(BayesFactorResult {
        log_bf: n.log_value - d.log_value,
        numerator: Hypothesis::Custom(numerator.label.clone()),
        denominator: Hypothesis::Custom(denominator.label.clone()),
        quadrature_err: n.rel_err + d.rel_err,
    })
}
