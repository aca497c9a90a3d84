//! Probability of replication success for the `α = 0` versus `α = 1` Bayes
//! factor, and sample size determination on a grid of replication standard
//! errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::logspace;
use crate::hypothesis::UnitInformation;
use crate::power_prior::Study;
use crate::special_math::{noncentral_chisq1_cdf, noncentral_chisq1_sf};

/// Default threshold for strong evidence: `BF_dc ≤ 1/10` for `Hc`, and
/// `BF_dc ≥ 10` for `Hd`.
pub const DEFAULT_GAMMA: f64 = 0.1;
pub const DEFAULT_GRID_POINTS: usize = 60;
pub const DEFAULT_MIN_RELATIVE_SIZE: f64 = 0.2;
pub const DEFAULT_MAX_RELATIVE_SIZE: f64 = 20.0;

/// Hypothesis that the replication is designed to find evidence for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DesignTarget {
    /// `BF_dc ≤ γ`: evidence for compatibility (`α = 1`).
    Hc,
    /// `BF_dc ≥ 1/γ`: evidence for conflict (`α = 0`).
    Hd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub original: Study,
    pub ui: UnitInformation,
    pub gamma: f64,
    pub target_power: f64,
    pub hypothesis: DesignTarget,
}

impl DesignSpec {
    pub fn validate(&self) -> Result<()> {
        self.original.validate()?;
        self.ui.validate()?;
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::domain(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.target_power > 0.0 && self.target_power < 1.0) {
            return Err(Error::domain(format!(
                "target power must lie in (0, 1), got {}",
                self.target_power
            )));
        }
        Ok(())
    }

    /// Threshold on `BF_dc` defining success for the target hypothesis.
    pub fn bf_threshold(&self) -> f64 {
        match self.hypothesis {
            DesignTarget::Hc => self.gamma,
            DesignTarget::Hd => 1.0 / self.gamma,
        }
    }
}

/// Moments of `θ̂_r` under both hypotheses, and the center of the quadratic
/// success condition, for one replication standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignMoments {
    pub center: f64,
    pub mean_hc: f64,
    pub var_hc: f64,
    pub mean_hd: f64,
    pub var_hd: f64,
}

pub fn design_moments(sigma_r: f64, original: &Study, ui: &UnitInformation) -> DesignMoments {
    let vr = sigma_r * sigma_r;
    let s = ui.s(original.variance());
    DesignMoments {
        center: original.estimate * (vr + ui.kappa2) / ui.kappa2,
        mean_hc: s * original.estimate,
        var_hc: vr + s * original.variance(),
        mean_hd: 0.0,
        var_hd: vr + ui.kappa2,
    }
}

fn check_sigma(sigma_r: f64) -> Result<()> {
    // σ_r = 0 is allowed: it gives the asymptote of the curves.
    if sigma_r >= 0.0 && sigma_r.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("sigma_r must be nonnegative and finite, got {sigma_r}")))
    }
}

/// `X` such that `BF_dc ≤ threshold` iff `(θ̂_r − θ̂_o (σ²_r + κ²)/κ²)² ≤ X`.
///
/// A negative value means the success region is empty.
pub fn success_threshold_x(sigma_r: f64, original: &Study, ui: &UnitInformation, threshold: f64) -> Result<f64> {
    check_sigma(sigma_r)?;
    original.validate()?;
    ui.validate()?;
    if !(threshold > 0.0) {
        return Err(Error::domain(format!("threshold must be positive, got {threshold}")));
    }
    let vr = sigma_r * sigma_r;
    let vo = original.variance();
    let (k2, s) = (ui.kappa2, ui.s(vo));
    let a = vr + k2;
    let c = vr + s * vo;
    let denom = k2 - s * vo;
    let x = a * c / denom
        * (2.0 * threshold.ln() - (c / a).ln() + s * s * original.estimate.powi(2) / denom);
    Ok(x)
}

/// `X` for the spec's own success event.
pub fn spec_threshold_x(sigma_r: f64, spec: &DesignSpec) -> Result<f64> {
    success_threshold_x(sigma_r, &spec.original, &spec.ui, spec.bf_threshold())
}

/// Probability that `(θ̂_r − center)² ≤ x` (target `Hc`) or `≥ x` (target
/// `Hd`) when `θ̂_r` has variance `v` and the noncentrality is `lambda`.
pub fn prs_noncentral(x: f64, v: f64, lambda: f64, target: DesignTarget) -> Result<f64> {
    match target {
        DesignTarget::Hc => {
            if x <= 0.0 {
                Ok(0.0)
            } else {
                noncentral_chisq1_cdf(x / v, lambda)
            }
        }
        DesignTarget::Hd => {
            if x <= 0.0 {
                Ok(1.0)
            } else {
                noncentral_chisq1_sf(x / v, lambda)
            }
        }
    }
}

/// Probability of replication success under each hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prs {
    pub under_hc: f64,
    pub under_hd: f64,
}

impl Prs {
    /// Probability under the hypothesis the event provides evidence for.
    pub fn correct(&self, target: DesignTarget) -> f64 {
        match target {
            DesignTarget::Hc => self.under_hc,
            DesignTarget::Hd => self.under_hd,
        }
    }

    /// Probability of misleading evidence: under the other hypothesis.
    pub fn misleading(&self, target: DesignTarget) -> f64 {
        match target {
            DesignTarget::Hc => self.under_hd,
            DesignTarget::Hd => self.under_hc,
        }
    }
}

fn prs_for(sigma_r: f64, original: &Study, ui: &UnitInformation, threshold: f64, target: DesignTarget) -> Result<Prs> {
    let x = success_threshold_x(sigma_r, original, ui, threshold)?;
    let m = design_moments(sigma_r, original, ui);
    let lc = (m.mean_hc - m.center).powi(2) / m.var_hc;
    let ld = (m.mean_hd - m.center).powi(2) / m.var_hd;
    Ok(Prs {
        under_hc: prs_noncentral(x, m.var_hc, lc, target)?,
        under_hd: prs_noncentral(x, m.var_hd, ld, target)?,
    })
}

/// Probability of the spec's success event at replication standard error
/// `sigma_r`, under `Hc` and under `Hd`.
pub fn prob_replication_success(sigma_r: f64, spec: &DesignSpec) -> Result<Prs> {
    spec.validate()?;
    prs_for(sigma_r, &spec.original, &spec.ui, spec.bf_threshold(), spec.hypothesis)
}

/// `n = ceil(4 / σ²)`, at least 2.
pub fn sigma_to_n(sigma_r: f64) -> Result<u64> {
    if !(sigma_r > 0.0 && sigma_r.is_finite()) {
        return Err(Error::domain(format!("sigma_r must be positive, got {sigma_r}")));
    }
    // Guard against 4/σ² landing a rounding error above an integer.
    let n = (4.0 / (sigma_r * sigma_r) * (1.0 - 1e-12)).ceil();
    Ok((n as u64).max(2))
}

/// `σ = √(4 / n)`.
pub fn n_to_sigma(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("n must be at least 2, got {n}")));
    }
    Ok((4.0 / n as f64).sqrt())
}

/// Replication standard errors for relative sizes `σ²_o / σ²_r` on a log
/// grid, ordered from the smallest to the largest relative size.
pub fn sigma_grid(original: &Study, min_rel: f64, max_rel: f64, points: usize) -> Result<Vec<f64>> {
    if !(min_rel > 0.0 && max_rel > min_rel && points >= 2) {
        return Err(Error::domain("relative size grid needs 0 < min < max and at least two points"));
    }
    Ok(logspace(min_rel, max_rel, points)
        .into_iter()
        .map(|r| original.se / r.sqrt())
        .collect())
}

pub fn default_sigma_grid(original: &Study) -> Vec<f64> {
    sigma_grid(original, DEFAULT_MIN_RELATIVE_SIZE, DEFAULT_MAX_RELATIVE_SIZE, DEFAULT_GRID_POINTS)
        .expect("default grid is valid")
}

/// One point of the design curves: success for either hypothesis, each
/// under either hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub sigma_r: f64,
    pub n_r: u64,
    pub relative_size: f64,
    pub relative_n: f64,
    pub evidence_hc: Prs,
    pub evidence_hd: Prs,
}

/// Design curves for strong evidence at level `spec.gamma`, for both
/// hypotheses, on the given standard errors.
pub fn prs_curve(spec: &DesignSpec, sigma_grid: &[f64]) -> Result<Vec<DesignPoint>> {
    spec.validate()?;
    let n_o = sigma_to_n(spec.original.se)? as f64;
    sigma_grid
        .iter()
        .map(|&sr| {
            let n_r = sigma_to_n(sr)?;
            Ok(DesignPoint {
                sigma_r: sr,
                n_r,
                relative_size: spec.original.variance() / (sr * sr),
                relative_n: n_r as f64 / n_o,
                evidence_hc: prs_for(sr, &spec.original, &spec.ui, spec.gamma, DesignTarget::Hc)?,
                evidence_hd: prs_for(sr, &spec.original, &spec.ui, 1.0 / spec.gamma, DesignTarget::Hd)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub sigma_r: f64,
    pub n_r: u64,
    /// `σ²_o / σ²_r`.
    pub relative_size: f64,
    /// `n_r / n_o` with both sample sizes from `n ≈ 4/σ²`.
    pub relative_n: f64,
    pub prs_under_hc: f64,
    pub prs_under_hd: f64,
    pub attained: bool,
    /// Probability under the target hypothesis as `σ_r → 0`.
    pub asymptote: f64,
    /// Whether the probability under the target hypothesis was
    /// nondecreasing in the relative size along the grid.
    pub monotone: bool,
}

/// Smallest relative size on the grid whose probability of success under
/// the target hypothesis reaches `spec.target_power`.
///
/// When no grid point reaches the target, the largest relative size is
/// returned with `attained = false`.
pub fn find_design(spec: &DesignSpec, sigma_grid: &[f64]) -> Result<DesignResult> {
    spec.validate()?;
    if sigma_grid.is_empty() {
        return Err(Error::domain("sigma grid is empty"));
    }
    if sigma_grid.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::domain("sigma grid values must be positive"));
    }
    let mut sigmas = sigma_grid.to_vec();
    // Largest σ_r first, i.e. increasing relative size.
    sigmas.sort_by(|a, b| b.total_cmp(a));
    sigmas.dedup();

    let target = spec.hypothesis;
    let n_o = sigma_to_n(spec.original.se)? as f64;
    let mut monotone = true;
    let mut prev = f64::NEG_INFINITY;
    let mut found: Option<(f64, Prs)> = None;
    let mut last = None;
    for &sr in &sigmas {
        let prs = prob_replication_success(sr, spec)?;
        let p = prs.correct(target);
        if p < prev - 1e-12 {
            monotone = false;
        }
        prev = p;
        if found.is_none() && p >= spec.target_power {
            found = Some((sr, prs));
        }
        last = Some((sr, prs));
    }
    if !monotone {
        log::warn!("probability of replication success is not monotone along the grid");
    }
    let asymptote = prob_replication_success(0.0, spec)?.correct(target);
    let (attained, (sr, prs)) = match found {
        Some(f) => (true, f),
        None => (false, last.expect("grid is nonempty")),
    };
    let n_r = sigma_to_n(sr)?;
    Ok(DesignResult {
        sigma_r: sr,
        n_r,
        relative_size: spec.original.variance() / (sr * sr),
        relative_n: n_r as f64 / n_o,
        prs_under_hc: prs.under_hc,
        prs_under_hd: prs.under_hd,
        attained,
        asymptote,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(to: f64, so: f64, target: DesignTarget) -> DesignSpec {
        DesignSpec {
            original: Study::new(to, so).unwrap(),
            ui: UnitInformation::default(),
            gamma: DEFAULT_GAMMA,
            target_power: 0.8,
            hypothesis: target,
        }
    }

    #[test]
    fn threshold_with_zero_original_and_unit_gamma() {
        // θ̂_o = 0, γ = 1, σ_r = σ_o: X = AC/(κ² − sσ²_o) · log(A/C).
        let o = Study::new(0.0, 0.3).unwrap();
        let ui = UnitInformation::new(1.5).unwrap();
        let (vr, vo, k2): (f64, f64, f64) = (0.09, 0.09, 1.5);
        let s = k2 / (vo + k2);
        let (a, c) = (vr + k2, vr + s * vo);
        let want = a * c / (k2 - s * vo) * (a / c).ln();
        assert_relative_eq!(success_threshold_x(0.3, &o, &ui, 1.0).unwrap(), want, max_relative = 1e-13);
    }

    #[test]
    fn threshold_matches_bayes_factor_boundary() {
        use crate::hypothesis::bf_dc_point;
        use crate::power_prior::StudyPair;
        let sp = spec(0.21, 0.05, DesignTarget::Hc);
        let x = spec_threshold_x(0.05, &sp).unwrap();
        let m = design_moments(0.05, &sp.original, &sp.ui);
        for root in [m.center - x.sqrt(), m.center + x.sqrt()] {
            let p = StudyPair::new(sp.original, Study::new(root, 0.05).unwrap()).unwrap();
            let bf = bf_dc_point(&p, &sp.ui).unwrap().bf();
            assert_relative_eq!(bf, 0.1, max_relative = 1e-9);
        }
    }

    #[test]
    fn tiny_gamma_empties_the_region() {
        let mut sp = spec(0.21, 0.05, DesignTarget::Hc);
        sp.gamma = 1e-300;
        assert!(spec_threshold_x(0.05, &sp).unwrap() < 0.0);
        let p = prob_replication_success(0.05, &sp).unwrap();
        assert_eq!((p.under_hc, p.under_hd), (0.0, 0.0));
    }

    #[test]
    fn sample_size_conversions() {
        assert_eq!(sigma_to_n(0.05).unwrap(), 1600);
        assert_eq!(n_to_sigma(4).unwrap(), 1.0);
        assert!((n_to_sigma(1577).unwrap() - 0.05).abs() < 1e-3);
        assert!(n_to_sigma(1).is_err());
        assert_eq!(sigma_to_n(10.0).unwrap(), 2);
        for n in 2..3000u64 {
            assert!(sigma_to_n(n_to_sigma(n).unwrap()).unwrap() >= n);
        }
    }

    #[test]
    fn unreachable_target_is_flagged() {
        let mut sp = spec(0.21, 0.06, DesignTarget::Hc);
        let grid = default_sigma_grid(&sp.original);
        let asym = prob_replication_success(0.0, &sp).unwrap().under_hc;
        sp.target_power = (asym + 1.0) / 2.0;
        let r = find_design(&sp, &grid).unwrap();
        assert!(!r.attained);
        assert_relative_eq!(r.asymptote, asym);
        assert!(find_design(&sp, &[]).is_err());
    }

    #[test]
    fn found_design_is_first_crossing() {
        let sp = spec(0.21, 0.06, DesignTarget::Hc);
        let grid = default_sigma_grid(&sp.original);
        let r = find_design(&sp, &grid).unwrap();
        assert!(r.attained && r.monotone);
        assert!(r.prs_under_hc >= 0.8);
        let before: Vec<f64> = grid.iter().copied().filter(|s| *s > r.sigma_r).collect();
        for s in before {
            assert!(prob_replication_success(s, &sp).unwrap().under_hc < 0.8);
        }
    }
}
