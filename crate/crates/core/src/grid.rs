//! Tabulated log-densities on 1-D and 2-D lattices and their summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the trapezoid integral of a grid flagged as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Log-density values on a lattice.
///
/// For 2-D grids `logdens` is stored row-major with `axis1` as the outer
/// index. `log_normalizer` records the log of the trapezoid integral that was
/// divided out by [`DensityGrid::normalize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub axis1: Vec<f64>,
    pub axis2: Option<Vec<f64>>,
    pub logdens: Vec<f64>,
    pub normalized: bool,
    pub log_normalizer: f64,
}

fn check_axis(axis: &[f64]) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::domain("a grid axis needs at least two points"));
    }
    if axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("grid axis values must be finite"));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("grid axis must be strictly increasing"));
    }
    Ok(())
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
            v[n - 1] = hi;
            v
        }
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect();
    if n >= 2 {
        v[0] = lo;
        v[n - 1] = hi;
    }
    v
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = 0.5 * (axis[i + 1] - axis[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

impl DensityGrid {
    pub fn new_1d(axis: Vec<f64>, logdens: Vec<f64>) -> Result<Self> {
        check_axis(&axis)?;
        if logdens.len() != axis.len() {
            return Err(Error::domain("logdens length does not match axis"));
        }
        Ok(Self {
            axis1: axis,
            axis2: None,
            logdens,
            normalized: false,
            log_normalizer: 0.0,
        })
    }

    pub fn new_2d(axis1: Vec<f64>, axis2: Vec<f64>, logdens: Vec<f64>) -> Result<Self> {
        check_axis(&axis1)?;
        check_axis(&axis2)?;
        if logdens.len() != axis1.len() * axis2.len() {
            return Err(Error::domain("logdens length does not match lattice"));
        }
        Ok(Self {
            axis1,
            axis2: Some(axis2),
            logdens,
            normalized: false,
            log_normalizer: 0.0,
        })
    }

    pub fn from_fn_1d<F>(axis: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let logdens = axis.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Self::new_1d(axis, logdens)
    }

    pub fn from_fn_2d<F>(axis1: Vec<f64>, axis2: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64>,
    {
        let mut logdens = Vec::with_capacity(axis1.len() * axis2.len());
        for &a in &axis1 {
            for &b in &axis2 {
                logdens.push(f(a, b)?);
            }
        }
        Self::new_2d(axis1, axis2, logdens)
    }

    pub fn is_2d(&self) -> bool {
        self.axis2.is_some()
    }

    /// Log of the (product) trapezoid integral of the density.
    pub fn log_trapezoid_integral(&self) -> f64 {
        let w1 = trapezoid_weights(&self.axis1);
        let weights: Vec<f64> = match &self.axis2 {
            None => w1,
            Some(axis2) => {
                let w2 = trapezoid_weights(axis2);
                w1.iter()
                    .flat_map(|a| w2.iter().map(move |b| a * b))
                    .collect()
            }
        };
        let m = self.logdens.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return m;
        }
        let s: f64 = self
            .logdens
            .iter()
            .zip(&weights)
            .map(|(l, w)| w * (l - m).exp())
            .sum();
        m + s.ln()
    }

    /// Divide out the trapezoid integral so the grid integrates to one.
    pub fn normalize(mut self) -> Result<Self> {
        let c = self.log_trapezoid_integral();
        if !c.is_finite() {
            return Err(Error::State("grid has no finite mass to normalize".into()));
        }
        for l in &mut self.logdens {
            *l -= c;
        }
        self.log_normalizer += c;
        self.normalized = true;
        Ok(self)
    }

    /// Index into `logdens` of the largest value.
    pub fn argmax(&self) -> usize {
        self.logdens
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if *v > self.logdens[best] { i } else { best })
    }

    /// CSV with one column per axis followed by `logdens`.
    pub fn to_csv(&self, axis1_name: &str, axis2_name: Option<&str>) -> String {
        let mut out = String::new();
        match &self.axis2 {
            None => {
                out.push_str(&format!("{axis1_name},logdens\n"));
                for (x, l) in self.axis1.iter().zip(&self.logdens) {
                    out.push_str(&format!("{x:?},{l:?}\n"));
                }
            }
            Some(axis2) => {
                let name2 = axis2_name.unwrap_or("axis2");
                out.push_str(&format!("{axis1_name},{name2},logdens\n"));
                let mut k = 0;
                for a in &self.axis1 {
                    for b in axis2 {
                        out.push_str(&format!("{a:?},{b:?},{:?}\n", self.logdens[k]));
                        k += 1;
                    }
                }
            }
        }
        out
    }
}

/// Moments, mode and equal-tailed interval of a 1-D posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub mode: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub level: f64,
}

/// Trapezoid-based summary of a normalized 1-D grid.
pub fn summarize(grid: &DensityGrid, level: f64) -> Result<PosteriorSummary> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("level must lie in (0, 1), got {level}")));
    }
    if grid.is_2d() {
        return Err(Error::State("summaries need a 1-D grid".into()));
    }
    if !grid.normalized {
        return Err(Error::State("grid is not normalized".into()));
    }
    let total = grid.log_trapezoid_integral().exp();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::State(format!(
            "grid flagged normalized but integrates to {total}"
        )));
    }

    let x = &grid.axis1;
    let p: Vec<f64> = grid.logdens.iter().map(|l| l.exp()).collect();
    let w = trapezoid_weights(x);
    let mean: f64 = x.iter().zip(&p).zip(&w).map(|((x, p), w)| w * x * p).sum();
    let var: f64 = x
        .iter()
        .zip(&p)
        .zip(&w)
        .map(|((x, p), w)| w * (x - mean).powi(2) * p)
        .sum();

    let mut cdf = vec![0.0; x.len()];
    for i in 1..x.len() {
        cdf[i] = cdf[i - 1] + 0.5 * (x[i] - x[i - 1]) * (p[i] + p[i - 1]);
    }
    // Rescale away the residual (≤ 1e-6) so quantiles are consistent.
    let last = cdf[x.len() - 1];
    for c in &mut cdf {
        *c /= last;
    }
    let quantile = |q: f64| piecewise_linear_quantile(x, &p, &cdf, last, q);
    let tail = 0.5 * (1.0 - level);

    Ok(PosteriorSummary {
        mean,
        sd: var.max(0.0).sqrt(),
        median: quantile(0.5),
        mode: x[grid.argmax()],
        ci_lower: quantile(tail),
        ci_upper: quantile(1.0 - tail),
        level,
    })
}

// Inverts the exact CDF of the piecewise-linear interpolant of the density.
fn piecewise_linear_quantile(x: &[f64], p: &[f64], cdf: &[f64], scale: f64, q: f64) -> f64 {
    let k = match cdf.iter().position(|&c| c >= q) {
        Some(0) => return x[0],
        Some(k) => k - 1,
        None => return x[x.len() - 1],
    };
    let h = x[k + 1] - x[k];
    let (p0, p1) = (p[k] / scale, p[k + 1] / scale);
    let target = q - cdf[k];
    let slope = (p1 - p0) / h;
    // p0 s + slope s²/2 = target
    let s = if slope.abs() < 1e-300 {
        if p0 > 0.0 {
            target / p0
        } else {
            0.0
        }
    } else {
        let disc = (p0 * p0 + 2.0 * slope * target).max(0.0);
        // numerically stable root of the quadratic
        2.0 * target / (p0 + disc.sqrt())
    };
    x[k] + s.clamp(0.0, h)
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // The endpoints are candidates too: the maximum may sit on the boundary.
    [(a, f(a)), (b, f(b)), (c, fc), (d, fd)]
        .into_iter()
        .fold((lo, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Refine the mode of a tabulated function around its grid argmax.
pub fn refine_mode<F>(f: F, axis: &[f64], logdens: &[f64], tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let i = logdens
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > logdens[best] { i } else { best });
    let lo = axis[i.saturating_sub(1)];
    let hi = axis[(i + 1).min(axis.len() - 1)];
    golden_section_max(f, lo, hi, tol).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn std_normal_grid() -> DensityGrid {
        let axis = linspace(-8.0, 8.0, 4001);
        DensityGrid::from_fn_1d(axis, |x| Ok(-0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln()))
            .unwrap()
            .normalize()
            .unwrap()
    }

    #[test]
    fn standard_normal_summary() {
        let s = summarize(&std_normal_grid(), 0.95).unwrap();
        assert!(s.mean.abs() < 1e-3);
        assert!((s.sd - 1.0).abs() < 1e-3);
        assert!((s.ci_lower + 1.959964).abs() < 1e-3, "{}", s.ci_lower);
        assert!((s.ci_upper - 1.959964).abs() < 1e-3, "{}", s.ci_upper);
        assert!(s.median.abs() < 1e-3);
        assert!(s.mode.abs() < 1e-12);
    }

    #[test]
    fn near_delta_grid_collapses() {
        let axis = linspace(0.0, 1.0, 101);
        let atom = 37;
        let logdens: Vec<f64> = (0..101).map(|i| if i == atom { 0.0 } else { -800.0 }).collect();
        let g = DensityGrid::new_1d(axis.clone(), logdens).unwrap().normalize().unwrap();
        let s = summarize(&g, 0.95).unwrap();
        let h = axis[1] - axis[0];
        assert!((s.ci_lower - axis[atom]).abs() <= h);
        assert!((s.ci_upper - axis[atom]).abs() <= h);
        assert!(s.ci_upper - s.ci_lower <= 2.0 * h);
        assert_eq!(s.mode, axis[atom]);
    }

    #[test]
    fn unnormalized_grid_is_a_state_error() {
        let g = DensityGrid::new_1d(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(summarize(&g, 0.9), Err(Error::State(_))));
        let mut g = g.normalize().unwrap();
        g.logdens[0] += 0.1;
        assert!(matches!(summarize(&g, 0.9), Err(Error::State(_))));
    }

    #[test]
    fn axis_validation() {
        assert!(DensityGrid::new_1d(vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(DensityGrid::new_1d(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(DensityGrid::new_2d(vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0; 4]).is_err());
    }

    #[test]
    fn two_d_normalization() {
        let a = linspace(-6.0, 6.0, 121);
        let b = linspace(-6.0, 6.0, 81);
        let g = DensityGrid::from_fn_2d(a, b, |x, y| Ok(-0.5 * (x * x + y * y)))
            .unwrap()
            .normalize()
            .unwrap();
        assert_relative_eq!(g.log_trapezoid_integral(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(g.log_normalizer, (2.0 * std::f64::consts::PI).ln(), epsilon = 1e-6);
    }

    #[test]
    fn golden_section_finds_interior_and_boundary() {
        let (x, _) = golden_section_max(|x| -(x - 0.3f64).powi(2), 0.0, 1.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
        let (x, _) = golden_section_max(|x| x, 0.0, 1.0, 1e-9);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn csv_layout() {
        let g = DensityGrid::new_1d(vec![0.0, 0.5], vec![-1.0, -2.0]).unwrap();
        assert_eq!(g.to_csv("alpha", None), "alpha,logdens\n0.0,-1.0\n0.5,-2.0\n");
    }
}
