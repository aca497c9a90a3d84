//! Special functions and log-densities.
//!
//! Everything is evaluated on the log scale; callers exponentiate only when
//! reporting.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{log_integrate_unit, QuadratureSpec};

fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Above this argument the confluent hypergeometric series is replaced by the
/// integral representation.
pub const KUMMER_SERIES_LIMIT: f64 = 30.0;

/// `c * ln(x)` with the convention `0 * ln(0) = 0`.
pub(crate) fn xlogy(c: f64, x: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * x.ln()
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    require_positive("gamma argument", x)?;
    Ok(ln_gamma(x))
}

pub(crate) fn ln_beta(z: f64, w: f64) -> f64 {
    ln_gamma(z) + ln_gamma(w) - ln_gamma(z + w)
}

/// `log B(z, w)` where `B(z, w) = Γ(z) Γ(w) / Γ(z + w)`.
pub fn log_beta_fn(z: f64, w: f64) -> Result<f64> {
    require_positive("beta argument z", z)?;
    require_positive("beta argument w", w)?;
    Ok(ln_beta(z, w))
}

pub(crate) fn ln_dnorm(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -LN_SQRT_2PI - 0.5 * variance.ln() - 0.5 * d * d / variance
}

/// Log-density of `N(mean, variance)` at `x`.
pub fn normal_logpdf(x: f64, mean: f64, variance: f64) -> Result<f64> {
    require_positive("variance", variance)?;
    Ok(ln_dnorm(x, mean, variance))
}

/// Standard normal distribution function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn check_chisq_args(x: f64, lambda: f64) -> Result<()> {
    if !(x >= 0.0) || x.is_nan() {
        return Err(Error::domain(format!("chi-squared argument must be nonnegative, got {x}")));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!(
            "noncentrality must be nonnegative and finite, got {lambda}"
        )));
    }
    Ok(())
}

/// `P(χ²₁,λ ≤ x)` for one degree of freedom, using
/// `Φ(√x − √λ) − Φ(−√x − √λ)`.
pub fn noncentral_chisq1_cdf(x: f64, lambda: f64) -> Result<f64> {
    check_chisq_args(x, lambda)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let (rx, rl) = (x.sqrt(), lambda.sqrt());
    let p = std_normal_cdf(rx - rl) - std_normal_cdf(-rx - rl);
    Ok(p.clamp(0.0, 1.0))
}

/// `P(χ²₁,λ > x)`, computed from the two normal tails so that small upper
/// tail probabilities keep their relative accuracy.
pub fn noncentral_chisq1_sf(x: f64, lambda: f64) -> Result<f64> {
    check_chisq_args(x, lambda)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    let (rx, rl) = (x.sqrt(), lambda.sqrt());
    let p = std_normal_cdf(rl - rx) + std_normal_cdf(-rx - rl);
    Ok(p.clamp(0.0, 1.0))
}

/// `log M(a, b, z)` for `b > a > 0`, where
/// `M(a, b, z) = ∫₀¹ e^{zt} t^{a−1} (1 − t)^{b−a−1} dt / B(b − a, a)`.
///
/// Negative arguments go through `M(a, b, z) = e^z M(b − a, b, −z)` first, so
/// the evaluation always sees `z ≥ 0`. Up to [`KUMMER_SERIES_LIMIT`] the power
/// series (all terms positive) is summed; beyond it the integral is evaluated
/// by adaptive quadrature.
pub fn log_kummer_m(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::UnsupportedDomain(format!(
            "M({a}, {b}, {z}): arguments must be finite"
        )));
    }
    if !(a > 0.0 && b > a) {
        return Err(Error::UnsupportedDomain(format!(
            "M({a}, {b}, {z}): requires b > a > 0"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z < 0.0 {
        return Ok(z + log_kummer_nonneg(b - a, b, -z)?);
    }
    log_kummer_nonneg(a, b, z)
}

/// `M(a, b, z)`; see [`log_kummer_m`].
pub fn kummer_m(a: f64, b: f64, z: f64) -> Result<f64> {
    log_kummer_m(a, b, z).map(f64::exp)
}

fn log_kummer_nonneg(a: f64, b: f64, z: f64) -> Result<f64> {
    if z <= KUMMER_SERIES_LIMIT {
        log_kummer_series(a, b, z)
    } else {
        log_kummer_integral(a, b, z)
    }
}

fn log_kummer_series(a: f64, b: f64, z: f64) -> Result<f64> {
    const MAX_TERMS: usize = 10_000;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_TERMS {
        let k = n as f64;
        term *= (a + k) / (b + k) * z / (k + 1.0);
        sum += term;
        // Ratio of the next term; once below one the tail is geometric.
        let ratio = (a + k + 1.0) / (b + k + 1.0) * z / (k + 2.0);
        if ratio < 1.0 && term * ratio / (1.0 - ratio) <= 0.25 * f64::EPSILON * sum {
            return Ok(sum.ln());
        }
    }
    Err(Error::UnsupportedDomain(format!(
        "M({a}, {b}, {z}): series did not converge in {MAX_TERMS} terms"
    )))
}

// z > 0 here. With u = 1 − t,
//   M = e^z / B(c, a) · ∫₀¹ e^{−zu} u^{c−1} (1 − u)^{a−1} du,  c = b − a.
// The unit interval is split at 1/2; a power substitution removes the
// u^{c−1} singularity on the left half when c < 1 and the (1 − u)^{a−1}
// singularity on the right half when a < 1.
fn log_kummer_integral(a: f64, b: f64, z: f64) -> Result<f64> {
    let c = b - a;
    let spec = QuadratureSpec {
        rel_tol: 1e-12,
        abs_tol: f64::MIN_POSITIVE,
        max_subdivisions: 400,
    };
    let width = c.max(1.0) / z;
    let u_breaks: Vec<f64> = [1.0, 4.0, 16.0, 64.0]
        .iter()
        .map(|k| k * width)
        .filter(|u| *u < 0.5)
        .collect();

    let left = if c < 1.0 {
        // u = w^{1/c}, u^{c−1} du = dw / c, w ∈ [0, 2^{−c}].
        let top = 0.5f64.powf(c);
        let breaks: Vec<f64> = u_breaks.iter().map(|u| u.powf(c) / top).collect();
        log_integrate_unit(
            |s| {
                let u = (s * top).powf(1.0 / c);
                -z * u + xlogy(a - 1.0, 1.0 - u) - c.ln() + top.ln()
            },
            &breaks,
            &spec,
        )?
    } else {
        let breaks: Vec<f64> = u_breaks.iter().map(|u| u / 0.5).collect();
        log_integrate_unit(
            |s| {
                let u = 0.5 * s;
                -z * u + xlogy(c - 1.0, u) + xlogy(a - 1.0, 1.0 - u) + 0.5f64.ln()
            },
            &breaks,
            &spec,
        )?
    };

    let right = if a < 1.0 {
        // 1 − u = v^{1/a}, (1 − u)^{a−1} du = dv / a, v ∈ [0, 2^{−a}].
        let top = 0.5f64.powf(a);
        log_integrate_unit(
            |s| {
                let one_minus_u = (s * top).powf(1.0 / a);
                let u = 1.0 - one_minus_u;
                -z * u + xlogy(c - 1.0, u) - a.ln() + top.ln()
            },
            &[],
            &spec,
        )?
    } else {
        log_integrate_unit(
            |s| {
                let u = 0.5 + 0.5 * s;
                -z * u + xlogy(c - 1.0, u) + xlogy(a - 1.0, 1.0 - u) + 0.5f64.ln()
            },
            &[],
            &spec,
        )?
    };

    let log_int = log_add_exp(left.log_value, right.log_value);
    Ok(z - ln_beta(c, a) + log_int)
}

pub(crate) fn log_add_exp(x: f64, y: f64) -> f64 {
    let m = x.max(y);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((x - m).exp() + (y - m).exp()).ln()
}

/// Beta log-density with the support indicator on `[0, 1]`.
pub fn beta_logpdf(x: f64, a: f64, b: f64) -> Result<f64> {
    require_positive("beta shape a", a)?;
    require_positive("beta shape b", b)?;
    if x.is_nan() {
        return Err(Error::domain("beta density argument is NaN"));
    }
    Ok(ln_beta_density(x, a, b))
}

pub(crate) fn ln_beta_density(x: f64, a: f64, b: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return f64::NEG_INFINITY;
    }
    xlogy(a - 1.0, x) + xlogy(b - 1.0, 1.0 - x) - ln_beta(a, b)
}

/// Parameters of the generalized beta distribution `GBe(a, b, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GBetaParams {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
}

impl GBetaParams {
    pub fn new(a: f64, b: f64, lambda: f64) -> Result<Self> {
        require_positive("GBe shape a", a)?;
        require_positive("GBe shape b", b)?;
        require_positive("GBe scale lambda", lambda)?;
        Ok(Self { a, b, lambda })
    }
}

/// Log-density of `GBe(a, b, λ)`:
/// `λ^a x^{a−1} (1−x)^{b−1} / [B(a, b) {1 − (1 − λ) x}^{a+b}]` on `[0, 1]`.
pub fn gbeta_logpdf(x: f64, p: &GBetaParams) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("GBe density argument is NaN"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Ok(f64::NEG_INFINITY);
    }
    let GBetaParams { a, b, lambda } = *p;
    Ok(a * lambda.ln() + xlogy(a - 1.0, x) + xlogy(b - 1.0, 1.0 - x)
        - ln_beta(a, b)
        - (a + b) * (1.0 - (1.0 - lambda) * x).ln())
}

/// Parameters of the generalized F distribution `GF(a, b, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GFParams {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
}

impl GFParams {
    pub fn new(a: f64, b: f64, lambda: f64) -> Result<Self> {
        require_positive("GF shape a", a)?;
        require_positive("GF shape b", b)?;
        require_positive("GF rate lambda", lambda)?;
        Ok(Self { a, b, lambda })
    }
}

/// Log-density of `GF(a, b, λ)`: `λ^a x^{a−1} / [B(a, b) (1 + λx)^{a+b}]` on `[0, ∞)`.
pub fn gf_logpdf(x: f64, p: &GFParams) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("GF density argument is NaN"));
    }
    if x < 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let GFParams { a, b, lambda } = *p;
    Ok(a * lambda.ln() + xlogy(a - 1.0, x) - ln_beta(a, b) - (a + b) * (lambda * x).ln_1p())
}

/// Inverse gamma with shape `q` and scale `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvGammaParams {
    pub q: f64,
    pub r: f64,
}

impl InvGammaParams {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        require_positive("inverse gamma shape q", q)?;
        require_positive("inverse gamma scale r", r)?;
        Ok(Self { q, r })
    }

    pub fn mode(&self) -> f64 {
        self.r / (self.q + 1.0)
    }
}

/// Log-density `q log r − log Γ(q) − (q + 1) log x − r / x`.
pub fn invgamma_logpdf(x: f64, p: &InvGammaParams) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::domain(format!(
            "inverse gamma density needs x > 0, got {x}"
        )));
    }
    Ok(ln_invgamma(x, p))
}

pub(crate) fn ln_invgamma(x: f64, p: &InvGammaParams) -> f64 {
    if x <= 0.0 || x == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    p.q * p.r.ln() - ln_gamma(p.q) - (p.q + 1.0) * x.ln() - p.r / x
}

/// `log(√(2π))`, exposed for callers assembling normal constants.
pub fn ln_sqrt_2pi() -> f64 {
    LN_SQRT_2PI
}

/// `log(4π) / 2`.
pub(crate) fn ln_sqrt_4pi() -> f64 {
    0.5 * (4.0 * PI).ln()
}
