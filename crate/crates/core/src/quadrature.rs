//! Adaptive Gauss–Kronrod integration on finite intervals, the unit interval
//! and the half line.
//!
//! Every panel is integrated with the 21-point Kronrod rule and its embedded
//! 10-point Gauss rule; the difference drives the error estimate. Both rules
//! are open, so integrands with integrable endpoint singularities (such as
//! `t^(x-1)` with `0 < x < 1`) are never evaluated at the singular point.
//!
//! The panel with the largest error estimate is bisected until the summed
//! error meets `max(abs_tol, rel_tol * |value|)`. Panels are merged in order
//! of their left endpoint so the result does not depend on refinement order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_math::xlogy;

/// Tolerances and work limit for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::domain(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::domain(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::domain("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    /// Same tolerances with a purely relative acceptance criterion.
    pub(crate) fn relative_only(&self) -> Self {
        Self {
            abs_tol: f64::MIN_POSITIVE,
            ..*self
        }
    }
}

/// Result of a quadrature: the value and its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub err_estimate: f64,
    pub subdivisions: usize,
}

/// Result of a quadrature carried out on a log-scale integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogIntegral {
    pub log_value: f64,
    /// Relative error estimate of `exp(log_value)`.
    pub rel_err: f64,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208359922212,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn gauss_kronrod_21<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> f64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    check_finite(f_center, center)?;

    let mut res_kronrod = WGK[10] * f_center;
    let mut res_gauss = 0.0;
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..10 {
        let x = half * XGK[j];
        let (lo, hi) = (center - x, center + x);
        let (f1, f2) = (f(lo), f(hi));
        check_finite(f1, lo)?;
        check_finite(f2, hi)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let abs_half = half.abs();
    let value = res_kronrod * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut err = ((res_kronrod - res_gauss) * half).abs();

    // QUADPACK error scaling.
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }

    Ok(Panel { a, b, value, err })
}

fn check_finite(v: f64, at: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("integrand is not finite at {at:e} (value {v})")))
    }
}

/// Adaptive integration of `f` over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    integrate_with_breaks(f, &[a, b], spec)
}

/// Adaptive integration over `[breaks[0], breaks[last]]`, seeding one panel
/// per consecutive pair of break points.
///
/// Break points must be nondecreasing; zero-width segments are dropped.
pub fn integrate_with_breaks<F>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if breaks.len() < 2 {
        return Err(Error::domain("need at least two break points"));
    }
    if breaks.iter().any(|b| !b.is_finite()) {
        return Err(Error::domain("integration limits must be finite"));
    }
    if breaks.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("break points must be nondecreasing"));
    }

    let mut panels = Vec::with_capacity(spec.max_subdivisions + breaks.len());
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            panels.push(gauss_kronrod_21(&f, w[0], w[1])?);
        }
    }
    if panels.is_empty() {
        return Ok(Integral {
            value: 0.0,
            err_estimate: 0.0,
            subdivisions: 0,
        });
    }

    loop {
        let (value, err) = merge(&mut panels);
        let tol = spec.abs_tol.max(spec.rel_tol * value.abs());
        if err <= tol {
            return Ok(Integral {
                value,
                err_estimate: err,
                subdivisions: panels.len(),
            });
        }

        let worst = panels
            .iter()
            .enumerate()
            .fold(0, |best, (i, p)| if p.err > panels[best].err { i } else { best });
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);

        let too_narrow = !(mid > a && mid < b);
        if panels.len() >= spec.max_subdivisions || too_narrow {
            return Err(Error::Convergence {
                estimate: value,
                err_estimate: err,
                subdivisions: panels.len(),
            });
        }

        let left = gauss_kronrod_21(&f, a, mid)?;
        let right = gauss_kronrod_21(&f, mid, b)?;
        panels[worst] = left;
        panels.push(right);
    }
}

// Fixed summation order: by left endpoint.
fn merge(panels: &mut [Panel]) -> (f64, f64) {
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    panels
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err))
}

/// Integral over `[0, 1]`.
pub fn integrate_unit<F>(f: F, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    integrate(f, 0.0, 1.0, spec)
}

/// Integral over `[0, ∞)` via `t = u / (1 - u)`.
pub fn integrate_semiinf<F>(f: F, spec: &QuadratureSpec) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    integrate_semiinf_scaled(f, 1.0, &[], spec)
}

/// Integral over `[0, ∞)` via `t = scale * u / (1 - u)`, with optional
/// interior break points given on the `t` scale.
pub fn integrate_semiinf_scaled<F>(
    f: F,
    scale: f64,
    t_breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain(format!("scale must be positive, got {scale}")));
    }
    let breaks = unit_breaks(t_breaks.iter().map(|&t| t / (t + scale)));
    integrate_with_breaks(
        |u| {
            let one_minus = 1.0 - u;
            let t = scale * u / one_minus;
            let jac = scale / (one_minus * one_minus);
            let v = f(t);
            if v == 0.0 {
                0.0
            } else {
                v * jac
            }
        },
        &breaks,
        spec,
    )
}

fn unit_breaks(interior: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut inner: Vec<f64> = interior.filter(|u| *u > 0.0 && *u < 1.0).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    breaks.extend(inner);
    breaks.push(1.0);
    breaks
}

const PROBES: usize = 96;

// Maximum of `log_f` over a probe lattice plus the neighbourhoods of the
// break points; used as a scale so the exponentiated integrand is O(1).
fn probe_log_max<F>(log_f: &F, breaks: &[f64]) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut best = f64::NEG_INFINITY;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        for k in 0..PROBES {
            let x = a + (b - a) * (k as f64 + 0.5) / PROBES as f64;
            let v = log_f(x);
            if v > best {
                best = v;
            }
        }
    }
    best
}

fn log_integrate_breaks<F>(log_f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<LogIntegral>
where
    F: Fn(f64) -> f64,
{
    let shift = probe_log_max(&log_f, breaks);
    if shift == f64::NEG_INFINITY {
        return Ok(LogIntegral {
            log_value: f64::NEG_INFINITY,
            rel_err: 0.0,
        });
    }
    if !shift.is_finite() {
        return Err(Error::domain("log-integrand is not finite"));
    }
    let inner = spec.relative_only();
    let res = integrate_with_breaks(|x| (log_f(x) - shift).exp(), breaks, &inner)?;
    if res.value <= 0.0 {
        return Ok(LogIntegral {
            log_value: f64::NEG_INFINITY,
            rel_err: 0.0,
        });
    }
    Ok(LogIntegral {
        log_value: shift + res.value.ln(),
        rel_err: res.err_estimate / res.value,
    })
}

/// `log ∫₀¹ exp(log_f(t)) dt`, with interior break points in `(0, 1)`.
///
/// The integrand is rescaled by its probed maximum, and convergence is judged
/// on relative error only.
pub fn log_integrate_unit<F>(log_f: F, interior: &[f64], spec: &QuadratureSpec) -> Result<LogIntegral>
where
    F: Fn(f64) -> f64,
{
    let breaks = unit_breaks(interior.iter().copied());
    log_integrate_breaks(log_f, &breaks, spec)
}

/// `log ∫₀^∞ exp(log_f(t)) dt` via `t = scale * u / (1 - u)`.
pub fn log_integrate_semiinf<F>(
    log_f: F,
    scale: f64,
    t_breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<LogIntegral>
where
    F: Fn(f64) -> f64,
{
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain(format!("scale must be positive, got {scale}")));
    }
    let breaks = unit_breaks(t_breaks.iter().map(|&t| t / (t + scale)));
    log_integrate_breaks(
        |u| {
            let one_minus = 1.0 - u;
            let t = scale * u / one_minus;
            log_f(t) + scale.ln() - 2.0 * one_minus.ln()
        },
        &breaks,
        spec,
    )
}

/// `log ∫₀¹ exp(log_g(t)) t^(x−1) (1 − t)^(y−1) dt` for `x, y > 0`.
///
/// The interval is split at 1/2. On the left half `w = t^x` absorbs the
/// `t^(x−1)` factor when `x < 1`; on the right half `v = (1 − t)^y` does the
/// same for `y < 1`. Interior break points are given on the `t` scale.
pub fn log_integrate_beta_kernel<F>(
    log_g: F,
    x: f64,
    y: f64,
    interior: &[f64],
    spec: &QuadratureSpec,
) -> Result<LogIntegral>
where
    F: Fn(f64) -> f64,
{
    if !(x > 0.0 && x.is_finite() && y > 0.0 && y.is_finite()) {
        return Err(Error::domain(format!("beta kernel shapes must be positive, got ({x}, {y})")));
    }
    let left_breaks: Vec<f64> = interior.iter().copied().filter(|t| *t > 0.0 && *t < 0.5).collect();
    let right_breaks: Vec<f64> = interior.iter().copied().filter(|t| *t > 0.5 && *t < 1.0).collect();

    let left = if x < 1.0 {
        let top = 0.5f64.powf(x);
        let breaks: Vec<f64> = left_breaks.iter().map(|t| t.powf(x) / top).collect();
        log_integrate_unit(
            |s| {
                let t = (s * top).powf(1.0 / x);
                log_g(t) + xlogy(y - 1.0, 1.0 - t) + top.ln() - x.ln()
            },
            &breaks,
            spec,
        )?
    } else {
        let breaks: Vec<f64> = left_breaks.iter().map(|t| 2.0 * t).collect();
        log_integrate_unit(
            |s| {
                let t = 0.5 * s;
                log_g(t) + xlogy(x - 1.0, t) + xlogy(y - 1.0, 1.0 - t) - std::f64::consts::LN_2
            },
            &breaks,
            spec,
        )?
    };

    let right = if y < 1.0 {
        let top = 0.5f64.powf(y);
        let breaks: Vec<f64> = right_breaks.iter().map(|t| (1.0 - t).powf(y) / top).collect();
        log_integrate_unit(
            |s| {
                let one_minus = (s * top).powf(1.0 / y);
                let t = 1.0 - one_minus;
                log_g(t) + xlogy(x - 1.0, t) + top.ln() - y.ln()
            },
            &breaks,
            spec,
        )?
    } else {
        let breaks: Vec<f64> = right_breaks.iter().map(|t| 2.0 * t - 1.0).collect();
        log_integrate_unit(
            |s| {
                let t = 0.5 + 0.5 * s;
                log_g(t) + xlogy(x - 1.0, t) + xlogy(y - 1.0, 1.0 - t) - std::f64::consts::LN_2
            },
            &breaks,
            spec,
        )?
    };

    let m = left.log_value.max(right.log_value);
    if m == f64::NEG_INFINITY {
        return Ok(LogIntegral {
            log_value: m,
            rel_err: 0.0,
        });
    }
    let (wl, wr) = ((left.log_value - m).exp(), (right.log_value - m).exp());
    Ok(LogIntegral {
        log_value: m + (wl + wr).ln(),
        rel_err: (wl * left.rel_err + wr * right.rel_err) / (wl + wr),
    })
}
