//! Reference computations that take a different route from the library.

use std::f64::consts::PI;

use pprep::design::DesignTarget;
use pprep::hypothesis::{bf_dc_point, UnitInformation};
use pprep::power_prior::{PowerPriorPosterior, Study, StudyPair};
use pprep::quadrature::{integrate, QuadratureSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

/// Default seed for the Monte Carlo oracle when `PPREP_SEED` is unset.
pub const DEFAULT_SEED: u64 = 20_240_117;

pub fn seed_from_env() -> u64 {
    std::env::var("PPREP_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn tight_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-10, 1e-300, 5000).unwrap()
}

/// `∫₀¹ f(α) dα` through `α = sin²(πt/2)`, whose Jacobian vanishes at both
/// ends and so tames `α^(x−1)` and `(1 − α)^(y−1)` singularities for
/// shapes of at least one half.
pub fn integrate_unit_smoothed<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> pprep::Result<f64> {
    let r = integrate(
        |t| {
            let h = 0.5 * PI * t;
            let (s, c) = h.sin_cos();
            let a = s * s;
            // α rounds to 0 or 1 within a few ulps of the ends, where a
            // singular factor could overflow; the omitted mass is negligible.
            if a <= 0.0 || a >= 1.0 {
                return 0.0;
            }
            f(a) * PI * s * c
        },
        0.0,
        1.0,
        spec,
    )?;
    Ok(r.value)
}

/// Log marginal density of `θ` obtained by integrating the joint posterior
/// over `α` numerically.
pub fn theta_marginal_by_quadrature(post: &PowerPriorPosterior, theta: f64) -> pprep::Result<f64> {
    let joint = |a: f64| post.joint_logdensity(theta, a).unwrap_or(f64::NEG_INFINITY);
    let shift = (0..64)
        .map(|i| joint((i as f64 + 0.5) / 64.0))
        .chain([1e-4, 1.0 - 1e-4].map(joint))
        .fold(f64::NEG_INFINITY, f64::max);
    let v = integrate_unit_smoothed(|a| (joint(a) - shift).exp(), &tight_spec())?;
    Ok(v.ln() + shift)
}

/// Probability mass of the `α` marginal on `(0, 1]`.
pub fn alpha_mass(post: &PowerPriorPosterior) -> pprep::Result<f64> {
    integrate_unit_smoothed(
        |a| post.alpha_logdensity(a).map(f64::exp).unwrap_or(0.0),
        &tight_spec(),
    )
}

/// Probability mass of the `θ` marginal, over twelve standard deviations
/// either side.
pub fn theta_mass(post: &PowerPriorPosterior) -> pprep::Result<f64> {
    let axis = post.theta_axis(12.0, 2);
    let (lo, hi) = (axis[0], axis[1]);
    let breaks: Vec<f64> = (0..=16).map(|i| lo + (hi - lo) * i as f64 / 16.0).collect();
    let r = pprep::quadrature::integrate_with_breaks(
        |t| post.theta_logdensity(t).map(f64::exp).unwrap_or(0.0),
        &breaks,
        &tight_spec(),
    )?;
    Ok(r.value)
}

/// One design setting for the Monte Carlo oracle.
pub struct MonteCarloSpec {
    pub original: Study,
    pub ui: UnitInformation,
    pub sigma_r: f64,
    pub gamma: f64,
    pub truth: DesignTarget,
    pub target: DesignTarget,
}

/// Monte Carlo estimate of the probability that the point-prior `BF_dc`
/// provides strong evidence for `target` when the replication is generated
/// under `truth`.
///
/// The true effect is drawn from the prior under `truth`: `N(sθ̂_o, sσ²_o)`
/// under `Hc` (the unit-information prior updated by the original study)
/// and `N(0, κ²)` under `Hd`. The estimate is then drawn around it.
pub fn monte_carlo_prs(spec: &MonteCarloSpec, draws: u64, seed: u64, stream: u64) -> pprep::Result<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let o = spec.original;
    let s = spec.ui.s(o.variance());
    let effect = match spec.truth {
        DesignTarget::Hc => Normal::new(s * o.estimate, (s * o.variance()).sqrt()),
        DesignTarget::Hd => Normal::new(0.0, spec.ui.kappa2.sqrt()),
    }
    .expect("valid normal");
    let mut hits = 0u64;
    for _ in 0..draws {
        let theta = effect.sample(&mut rng);
        let est = Normal::new(theta, spec.sigma_r).expect("valid normal").sample(&mut rng);
        let pair = StudyPair {
            original: o,
            replication: Study {
                estimate: est,
                se: spec.sigma_r,
            },
        };
        let bf = bf_dc_point(&pair, &spec.ui)?.bf();
        let success = match spec.target {
            DesignTarget::Hc => bf <= spec.gamma,
            DesignTarget::Hd => bf >= 1.0 / spec.gamma,
        };
        hits += success as u64;
    }
    Ok(hits as f64 / draws as f64)
}
