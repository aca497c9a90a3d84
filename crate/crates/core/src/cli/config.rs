//! Analysis settings read from an optional JSON file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::{DesignTarget, DEFAULT_GAMMA, DEFAULT_MAX_RELATIVE_SIZE, DEFAULT_MIN_RELATIVE_SIZE};
use crate::error::{Error, Result};
use crate::power_prior::{BetaParams, DEFAULT_GRID_POINTS, THETA_GRID_HALF_WIDTH};
use crate::quadrature::QuadratureSpec;
use crate::special_math::InvGammaParams;

pub const DEFAULT_KAPPA2: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Every field has a default, so `{}` is a complete configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Beta prior on the power parameter.
    pub prior_x: f64,
    pub prior_y: f64,
    /// Unit-information variance; defaults to 2, which is calibrated for
    /// standardized mean differences.
    pub kappa2: Option<f64>,
    /// `y` of the `Be(1, y)` prior under `Hd`.
    pub bf_y: f64,
    pub allow_uniform_bf_y: bool,
    /// Strong-evidence threshold for design; success for `Hd` uses `1/gamma`.
    pub gamma: f64,
    pub target_power: f64,
    pub design_target: DesignTarget,
    pub ci_level: f64,
    pub alpha_grid_points: usize,
    pub theta_grid_points: usize,
    pub theta_grid_half_width: f64,
    pub design_grid_points: usize,
    pub design_min_relative_size: f64,
    pub design_max_relative_size: f64,
    pub quadrature: QuadratureSpec,
    /// Hypothesized true effect for the limits block of `test`.
    pub theta_true: Option<f64>,
    pub bridge_alphas: Vec<f64>,
    /// Optional inverse-gamma prior on `τ²` under `Hd`.
    pub invgamma: Option<InvGammaParams>,
    pub format: Option<OutputFormat>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            prior_x: 1.0,
            prior_y: 1.0,
            kappa2: None,
            bf_y: 2.0,
            allow_uniform_bf_y: false,
            gamma: DEFAULT_GAMMA,
            target_power: 0.8,
            design_target: DesignTarget::Hc,
            ci_level: 0.95,
            alpha_grid_points: DEFAULT_GRID_POINTS,
            theta_grid_points: DEFAULT_GRID_POINTS,
            theta_grid_half_width: THETA_GRID_HALF_WIDTH,
            design_grid_points: crate::design::DEFAULT_GRID_POINTS,
            design_min_relative_size: DEFAULT_MIN_RELATIVE_SIZE,
            design_max_relative_size: DEFAULT_MAX_RELATIVE_SIZE,
            quadrature: QuadratureSpec::default(),
            theta_true: None,
            bridge_alphas: (1..=10).map(|i| i as f64 / 10.0).collect(),
            invgamma: None,
            format: None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("config: {name} must be positive and finite, got {v}")))
    }
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| {
            Error::Parse(format!("config line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa2.unwrap_or(DEFAULT_KAPPA2)
    }

    pub fn beta_prior(&self) -> BetaParams {
        BetaParams {
            x: self.prior_x,
            y: self.prior_y,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("prior_x", self.prior_x)?;
        positive("prior_y", self.prior_y)?;
        positive("kappa2", self.kappa2())?;
        positive("bf_y", self.bf_y)?;
        positive("gamma", self.gamma)?;
        positive("theta_grid_half_width", self.theta_grid_half_width)?;
        positive("design_min_relative_size", self.design_min_relative_size)?;
        positive("design_max_relative_size", self.design_max_relative_size)?;
        if self.design_min_relative_size >= self.design_max_relative_size {
            return Err(Error::Validation(
                "config: design_min_relative_size must be below design_max_relative_size".into(),
            ));
        }
        for (name, v) in [("target_power", self.target_power), ("ci_level", self.ci_level)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Validation(format!("config: {name} must lie in (0, 1), got {v}")));
            }
        }
        for (name, n) in [
            ("alpha_grid_points", self.alpha_grid_points),
            ("theta_grid_points", self.theta_grid_points),
            ("design_grid_points", self.design_grid_points),
        ] {
            if n < 2 {
                return Err(Error::Validation(format!("config: {name} must be at least 2, got {n}")));
            }
        }
        if let Some(t) = self.theta_true {
            if !t.is_finite() {
                return Err(Error::Validation("config: theta_true must be finite".into()));
            }
        }
        if self.bridge_alphas.is_empty() {
            return Err(Error::Validation("config: bridge_alphas must not be empty".into()));
        }
        if let Some(a) = self.bridge_alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return Err(Error::Validation(format!("config: bridge_alphas must lie in (0, 1], got {a}")));
        }
        if let Some(ig) = &self.invgamma {
            InvGammaParams::new(ig.q, ig.r).map_err(|e| Error::Validation(format!("config: invgamma: {e}")))?;
        }
        self.quadrature
            .validate()
            .map_err(|e| Error::Validation(format!("config: quadrature: {e}")))
    }
}
