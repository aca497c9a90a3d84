//! Posterior inference for the effect size `θ` and the power parameter `α`
//! under the normalized power prior with a flat initial prior on `θ` and a
//! beta prior on `α`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{linspace, refine_mode, summarize, DensityGrid, PosteriorSummary};
use crate::quadrature::{log_integrate_beta_kernel, LogIntegral, QuadratureSpec};
use crate::special_math::{ln_beta, ln_beta_density, ln_dnorm, log_kummer_m};

/// Smallest `α` placed on default grids; `α = 0` gives an improper prior.
pub const ALPHA_GRID_MIN: f64 = 1e-6;
pub const DEFAULT_GRID_POINTS: usize = 401;
/// Half-width, in posterior standard deviations, of the default `θ` range.
pub const THETA_GRID_HALF_WIDTH: f64 = 6.0;
pub const MODE_TOL: f64 = 1e-6;

/// An effect estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub estimate: f64,
    pub se: f64,
}

impl Study {
    pub fn new(estimate: f64, se: f64) -> Result<Self> {
        let s = Self { estimate, se };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.estimate.is_finite() {
            return Err(Error::domain(format!("estimate must be finite, got {}", self.estimate)));
        }
        if !(self.se > 0.0 && self.se.is_finite()) {
            return Err(Error::domain(format!("standard error must be positive, got {}", self.se)));
        }
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        self.se * self.se
    }
}

/// Original study and its replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyPair {
    pub original: Study,
    pub replication: Study,
}

impl StudyPair {
    pub fn new(original: Study, replication: Study) -> Result<Self> {
        let p = Self {
            original,
            replication,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.original.validate()?;
        self.replication.validate()
    }

    fn parts(&self) -> (f64, f64, f64, f64) {
        (
            self.original.estimate,
            self.original.variance(),
            self.replication.estimate,
            self.replication.variance(),
        )
    }
}

/// Shapes of a `Be(x, y)` prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub x: f64,
    pub y: f64,
}

impl Default for BetaParams {
    fn default() -> Self {
        Self { x: 1.0, y: 1.0 }
    }
}

impl BetaParams {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let b = Self { x, y };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x > 0.0 && self.x.is_finite() && self.y > 0.0 && self.y.is_finite()) {
            return Err(Error::domain(format!(
                "beta shapes must be positive and finite, got ({}, {})",
                self.x, self.y
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.x / (self.x + self.y)
    }

    pub fn sd(&self) -> f64 {
        let s = self.x + self.y;
        (self.x * self.y / (s * s * (s + 1.0))).sqrt()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "power parameter must lie in (0, 1], got {alpha}"
        )))
    }
}

/// Log-density of the normalized power prior `N(θ | θ̂_o, σ²_o / α)`.
pub fn power_prior_density(theta: f64, original: &Study, alpha: f64) -> Result<f64> {
    original.validate()?;
    check_alpha(alpha)?;
    Ok(ln_dnorm(theta, original.estimate, original.variance() / alpha))
}

/// Mean and variance of `θ` given `α`.
pub fn posterior_theta_fixed_alpha(pair: &StudyPair, alpha: f64) -> Result<(f64, f64)> {
    pair.validate()?;
    check_alpha(alpha)?;
    let (to, vo, tr, vr) = pair.parts();
    let precision = 1.0 / vr + alpha / vo;
    Ok(((tr / vr + alpha * to / vo) / precision, 1.0 / precision))
}

/// Maximizer over `[0, 1]` of the marginal likelihood
/// `N(θ̂_r | θ̂_o, σ²_r + σ²_o / α)`.
pub fn alpha_empirical_bayes(pair: &StudyPair) -> f64 {
    let (to, vo, tr, vr) = pair.parts();
    let d2 = (tr - to).powi(2);
    if d2 <= vr + vo {
        1.0
    } else {
        (vo / (d2 - vr)).clamp(0.0, 1.0)
    }
}

/// `Be(3/2, 1)` log-density, the reference posterior of `α` for perfectly
/// compatible studies with increasing precision.
pub fn limiting_alpha_posterior_logdensity(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(ln_beta_density(alpha, 1.5, 1.0))
}

fn ln_alpha_likelihood(alpha: f64, to: f64, vo: f64, tr: f64, vr: f64) -> f64 {
    ln_dnorm(tr, to, vr + vo / alpha)
}

fn evidence_breaks(pair: &StudyPair, prior: &BetaParams) -> Vec<f64> {
    let eb = alpha_empirical_bayes(pair);
    let (m, sd) = (prior.mean(), prior.sd());
    let mut b = vec![eb, 0.25 * eb, 4.0 * eb, m, m - 4.0 * sd, m + 4.0 * sd, m - sd, m + sd];
    b.retain(|t| *t > 0.0 && *t < 1.0 && *t != 0.5);
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// Log marginal likelihood `log ∫₀¹ N(θ̂_r | θ̂_o, σ²_r + σ²_o/α) Be(α | x, y) dα`.
pub fn evidence(pair: &StudyPair, prior: &BetaParams, spec: &QuadratureSpec) -> Result<LogIntegral> {
    pair.validate()?;
    prior.validate()?;
    let (to, vo, tr, vr) = pair.parts();
    let r = log_integrate_beta_kernel(
        |a| ln_alpha_likelihood(a, to, vo, tr, vr),
        prior.x,
        prior.y,
        &evidence_breaks(pair, prior),
        spec,
    )?;
    if !r.log_value.is_finite() {
        return Err(Error::domain("marginal likelihood is zero or not finite"));
    }
    Ok(LogIntegral {
        log_value: r.log_value - ln_beta(prior.x, prior.y),
        rel_err: r.rel_err,
    })
}

/// Joint posterior of `(θ, α)` given the evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerPriorPosterior {
    pub pair: StudyPair,
    pub prior: BetaParams,
    pub spec: QuadratureSpec,
    pub log_evidence: f64,
    pub evidence_rel_err: f64,
}

/// Grid and summary of one marginal posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalResult {
    pub grid: DensityGrid,
    pub summary: PosteriorSummary,
}

impl PowerPriorPosterior {
    pub fn new(pair: StudyPair, prior: BetaParams, spec: QuadratureSpec) -> Result<Self> {
        let ev = evidence(&pair, &prior, &spec)?;
        Ok(Self {
            pair,
            prior,
            spec,
            log_evidence: ev.log_value,
            evidence_rel_err: ev.rel_err,
        })
    }

    pub fn joint_logdensity(&self, theta: f64, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let (to, vo, tr, vr) = self.pair.parts();
        Ok(ln_dnorm(tr, theta, vr) + ln_dnorm(theta, to, vo / alpha)
            + ln_beta_density(alpha, self.prior.x, self.prior.y)
            - self.log_evidence)
    }

    pub fn alpha_logdensity(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let (to, vo, tr, vr) = self.pair.parts();
        Ok(ln_alpha_likelihood(alpha, to, vo, tr, vr)
            + ln_beta_density(alpha, self.prior.x, self.prior.y)
            - self.log_evidence)
    }

    pub fn theta_logdensity(&self, theta: f64) -> Result<f64> {
        if !theta.is_finite() {
            return Err(Error::domain(format!("theta must be finite, got {theta}")));
        }
        let (to, vo, tr, vr) = self.pair.parts();
        let (x, y) = (self.prior.x, self.prior.y);
        let z = -(to - theta).powi(2) / (2.0 * vo);
        Ok(ln_dnorm(tr, theta, vr) + ln_beta(x + 0.5, y)
            - self.log_evidence
            - 0.5 * (2.0 * std::f64::consts::PI * vo).ln()
            - ln_beta(x, y)
            + log_kummer_m(x + 0.5, x + y + 0.5, z)?)
    }

    /// Default `α` lattice: `DEFAULT_GRID_POINTS` points on `[1e-6, 1]`.
    pub fn default_alpha_axis(&self) -> Vec<f64> {
        linspace(ALPHA_GRID_MIN, 1.0, DEFAULT_GRID_POINTS)
    }

    /// Default `θ` lattice covering both the `α = 1` pooled posterior and
    /// the replication likelihood, each to six standard deviations.
    pub fn default_theta_axis(&self) -> Vec<f64> {
        self.theta_axis(THETA_GRID_HALF_WIDTH, DEFAULT_GRID_POINTS)
    }

    /// `points` equally spaced values covering both the pooled posterior
    /// and the replication likelihood to `half_width` standard deviations.
    pub fn theta_axis(&self, half_width: f64, points: usize) -> Vec<f64> {
        let (m, v) = posterior_theta_fixed_alpha(&self.pair, 1.0).expect("validated pair");
        let (tr, sr) = (self.pair.replication.estimate, self.pair.replication.se);
        let w = half_width;
        let lo = (m - w * v.sqrt()).min(tr - w * sr);
        let hi = (m + w * v.sqrt()).max(tr + w * sr);
        linspace(lo, hi, points)
    }

    pub fn alpha_grid(&self, axis: Vec<f64>) -> Result<DensityGrid> {
        DensityGrid::from_fn_1d(axis, |a| self.alpha_logdensity(a))?.normalize()
    }

    pub fn theta_grid(&self, axis: Vec<f64>) -> Result<DensityGrid> {
        DensityGrid::from_fn_1d(axis, |t| self.theta_logdensity(t))?.normalize()
    }

    /// Joint grid with `θ` on the first axis and `α` on the second.
    pub fn joint_grid(&self, theta_axis: Vec<f64>, alpha_axis: Vec<f64>) -> Result<DensityGrid> {
        DensityGrid::from_fn_2d(theta_axis, alpha_axis, |t, a| self.joint_logdensity(t, a))?
            .normalize()
    }

    /// Marginal of `α` on `axis`, with the mode refined below grid spacing.
    pub fn alpha_marginal(&self, axis: Vec<f64>, level: f64) -> Result<MarginalResult> {
        let grid = self.alpha_grid(axis)?;
        let mut summary = summarize(&grid, level)?;
        summary.mode = refine_mode(
            |a| self.alpha_logdensity(a).unwrap_or(f64::NEG_INFINITY),
            &grid.axis1,
            &grid.logdens,
            MODE_TOL,
        );
        Ok(MarginalResult { grid, summary })
    }

    /// Marginal of `θ` on `axis`, with the mode refined below grid spacing.
    pub fn theta_marginal(&self, axis: Vec<f64>, level: f64) -> Result<MarginalResult> {
        let grid = self.theta_grid(axis)?;
        let mut summary = summarize(&grid, level)?;
        summary.mode = refine_mode(
            |t| self.theta_logdensity(t).unwrap_or(f64::NEG_INFINITY),
            &grid.axis1,
            &grid.logdens,
            MODE_TOL,
        );
        Ok(MarginalResult { grid, summary })
    }
}

/// Joint posterior log-density of `(θ, α)`.
pub fn joint_posterior_logdensity(
    theta: f64,
    alpha: f64,
    pair: &StudyPair,
    prior: &BetaParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    PowerPriorPosterior::new(*pair, *prior, *spec)?.joint_logdensity(theta, alpha)
}

/// Marginal posterior log-density of `α`.
pub fn marginal_posterior_alpha(
    alpha: f64,
    pair: &StudyPair,
    prior: &BetaParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    PowerPriorPosterior::new(*pair, *prior, *spec)?.alpha_logdensity(alpha)
}

/// Marginal posterior log-density of `θ`, in closed form through the
/// confluent hypergeometric function.
pub fn marginal_posterior_theta(
    theta: f64,
    pair: &StudyPair,
    prior: &BetaParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    PowerPriorPosterior::new(*pair, *prior, *spec)?.theta_logdensity(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn pair(tr: f64, sr: f64) -> StudyPair {
        StudyPair::new(Study::new(0.21, 0.05).unwrap(), Study::new(tr, sr).unwrap()).unwrap()
    }

    fn post(tr: f64, sr: f64) -> PowerPriorPosterior {
        PowerPriorPosterior::new(pair(tr, sr), BetaParams::default(), QuadratureSpec::default())
            .unwrap()
    }

    #[test]
    fn power_prior_at_its_center() {
        let o = Study::new(0.21, 0.05).unwrap();
        let v = power_prior_density(0.21, &o, 0.25).unwrap();
        assert_relative_eq!(v, -(2.0 * PI * 0.01f64).sqrt().ln(), max_relative = 1e-14);
        assert!(power_prior_density(0.21, &o, 0.0).is_err());
        assert!(power_prior_density(0.21, &o, 1.5).is_err());
        // Scale family: density at the center scales like √α.
        let a = power_prior_density(0.21, &o, 1e-4).unwrap();
        let b = power_prior_density(0.21, &o, 1e-2).unwrap();
        assert_relative_eq!(b - a, 0.5 * 100f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn fixed_alpha_limits() {
        let p = pair(0.09, 0.05);
        let (m, v) = posterior_theta_fixed_alpha(&p, 1.0).unwrap();
        assert_relative_eq!(m, 0.15, max_relative = 1e-12);
        assert_relative_eq!(v, 0.0025 / 2.0, max_relative = 1e-12);
        let (m, v) = posterior_theta_fixed_alpha(&p, 1e-12).unwrap();
        assert_relative_eq!(m, 0.09, max_relative = 1e-9);
        assert_relative_eq!(v, 0.0025, max_relative = 1e-9);
        assert!(posterior_theta_fixed_alpha(&p, 0.0).is_err());
    }

    #[test]
    fn empirical_bayes_examples() {
        assert_eq!(alpha_empirical_bayes(&pair(0.21, 0.06)), 1.0);
        assert_relative_eq!(
            alpha_empirical_bayes(&pair(0.44, 0.04)),
            0.0025 / (0.0529 - 0.0016),
            max_relative = 1e-12
        );
    }

    #[test]
    fn limiting_reference_curve() {
        assert_relative_eq!(limiting_alpha_posterior_logdensity(1.0).unwrap().exp(), 1.5, max_relative = 1e-14);
        assert_relative_eq!(limiting_alpha_posterior_logdensity(0.25).unwrap().exp(), 0.75, max_relative = 1e-14);
        assert!(limiting_alpha_posterior_logdensity(0.0).is_err());
    }

    #[test]
    fn theta_at_original_estimate_uses_unit_kummer_term() {
        let p = post(0.09, 0.05);
        let got = p.theta_logdensity(0.21).unwrap();
        let want = ln_dnorm(0.09, 0.21, 0.0025) + ln_beta(1.5, 1.0)
            - p.log_evidence
            - 0.5 * (2.0 * PI * 0.0025f64).ln()
            - ln_beta(1.0, 1.0);
        assert_relative_eq!(got, want, max_relative = 1e-14);
    }

    #[test]
    fn evidence_tends_to_alpha_one_for_concentrated_prior() {
        let p = pair(0.09, 0.05);
        let ev = evidence(&p, &BetaParams::new(1e4, 1.0).unwrap(), &QuadratureSpec::default()).unwrap();
        let closed = ln_dnorm(0.09, 0.21, 0.005);
        assert!((ev.log_value - closed).abs() < 1e-3);
    }

    #[test]
    fn diffuse_original_drives_evidence_down() {
        let tight = evidence(&pair(0.09, 0.05), &BetaParams::default(), &QuadratureSpec::default()).unwrap();
        let diffuse = StudyPair::new(Study::new(0.21, 1e6).unwrap(), Study::new(0.09, 0.05).unwrap()).unwrap();
        let loose = evidence(&diffuse, &BetaParams::default(), &QuadratureSpec::default()).unwrap();
        assert!(loose.log_value < tight.log_value - 10.0);
    }

    #[test]
    fn marginals_integrate_to_one() {
        use crate::quadrature::integrate_with_breaks;
        let spec = QuadratureSpec::default();
        for (tr, sr) in [(0.09, 0.05), (0.21, 0.06), (0.44, 0.04)] {
            let p = post(tr, sr);
            let a = integrate_with_breaks(
                |a| if a > 0.0 { p.alpha_logdensity(a).unwrap().exp() } else { 0.0 },
                &[0.0, 0.01, 0.05, 0.2, 1.0],
                &spec,
            )
            .unwrap();
            assert!((a.value - 1.0).abs() < 1e-6, "alpha {tr}: {}", a.value);
            let t = integrate_with_breaks(
                |t| p.theta_logdensity(t).unwrap().exp(),
                &[-1.0, 0.0, 0.21f64.min(tr), 0.21f64.max(tr), 1.5],
                &spec,
            )
            .unwrap();
            assert!((t.value - 1.0).abs() < 1e-6, "theta {tr}: {}", t.value);
        }
    }

    #[test]
    fn default_grids_are_normalized() {
        let p = post(0.44, 0.04);
        let g = p.alpha_grid(p.default_alpha_axis()).unwrap();
        assert!(g.normalized);
        assert!(g.log_trapezoid_integral().abs() < 1e-12);
        let g = p.theta_grid(p.default_theta_axis()).unwrap();
        assert!(g.log_trapezoid_integral().abs() < 1e-12);
        // The raw density is already close to normalized on the θ lattice.
        assert!(g.log_normalizer.abs() < 1e-6);
    }

    #[test]
    fn invalid_inputs() {
        assert!(Study::new(f64::NAN, 1.0).is_err());
        assert!(Study::new(0.0, 0.0).is_err());
        assert!(BetaParams::new(0.0, 1.0).is_err());
    }
}
