//! The four analyses behind the subcommands.

use serde::Serialize;

use super::config::AnalysisConfig;
use super::input::{select_original, select_pair, EffectType, Role, StudyRecord};
use crate::design::{find_design, prs_curve, sigma_grid, DesignPoint, DesignResult, DesignSpec, DesignTarget};
use crate::error::{Error, Result};
use crate::grid::{linspace, DensityGrid, PosteriorSummary};
use crate::hierarchical::{
    alpha_to_i2, alpha_to_tau2, hier_bayes_factor, i2_prior_from_alpha_prior, tau2_prior_from_alpha_prior,
    HeterogeneityPrior, HierarchicalPosterior, HypothesisSpec, ThetaStarPrior,
};
use crate::hypothesis::{
    bf01_power_prior, bf01_power_prior_limit, bf01_replication, bf_dc_beta, bf_dc_beta_limit, bf_dc_invgamma,
    bf_dc_invgamma_limit, bf_dc_point, bf_dc_point_limit, format_bf, BayesFactorResult, DiracLimit,
    UnitInformation,
};
use crate::power_prior::{
    alpha_empirical_bayes, limiting_alpha_posterior_logdensity, PowerPriorPosterior, StudyPair, ALPHA_GRID_MIN,
};
use crate::quadrature::QuadratureSpec;
use crate::special_math::{gbeta_logpdf, GBetaParams, GFParams};

/// Maximum pointwise log-density gap accepted between the two sides of the
/// bridge.
pub const OVERLAY_TOL: f64 = 1e-5;

/// A CSV file to write under `--grid-out`.
#[derive(Debug, Clone)]
pub struct GridFile {
    pub name: &'static str,
    pub contents: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Reproducibility {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: AnalysisConfig,
    pub quadrature: QuadratureSpec,
    /// Largest relative error estimate over all quadratures in the run.
    pub max_err_estimate: f64,
}

impl Reproducibility {
    fn new(cfg: &AnalysisConfig, max_err_estimate: f64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config: cfg.clone(),
            quadrature: cfg.quadrature,
            max_err_estimate,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputEcho {
    pub records: Vec<StudyRecord>,
}

/// Output of a command: the JSON report, a flat table for `--format csv`,
/// and grid files.
pub struct CommandOutput {
    pub report: serde_json::Value,
    pub table: String,
    pub grids: Vec<GridFile>,
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::State(format!("cannot serialize report: {e}")))
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn unit_information(cfg: &AnalysisConfig, original: &StudyRecord) -> Result<UnitInformation> {
    if cfg.kappa2.is_none() && original.effect_type != EffectType::Smd {
        log::warn!(
            "kappa2 defaults to 2, which is calibrated for standardized mean differences; \
             set kappa2 for {:?} effects",
            original.effect_type
        );
    }
    UnitInformation::new(cfg.kappa2())
}

fn original_record(records: &[StudyRecord]) -> Result<&StudyRecord> {
    select_original(records).map(|(r, _)| r)
}

// ---------------------------------------------------------------- estimate

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaShape {
    MonotonicallyIncreasing,
    MonotonicallyDecreasing,
    InteriorMode,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub command: &'static str,
    pub input: InputEcho,
    pub pair: StudyPair,
    pub log_evidence: f64,
    pub alpha: PosteriorSummary,
    pub alpha_shape: AlphaShape,
    pub alpha_empirical_bayes: f64,
    pub theta: PosteriorSummary,
    pub reproducibility: Reproducibility,
}

fn alpha_shape(grid: &DensityGrid) -> AlphaShape {
    let d = &grid.logdens;
    if d.windows(2).all(|w| w[1] >= w[0]) {
        AlphaShape::MonotonicallyIncreasing
    } else if d.windows(2).all(|w| w[1] <= w[0]) {
        AlphaShape::MonotonicallyDecreasing
    } else {
        AlphaShape::InteriorMode
    }
}

pub fn cmd_estimate(records: &[StudyRecord], cfg: &AnalysisConfig) -> Result<CommandOutput> {
    let pair = select_pair(records)?;
    let post = PowerPriorPosterior::new(pair, cfg.beta_prior(), cfg.quadrature)?;
    let alpha_axis = linspace(ALPHA_GRID_MIN, 1.0, cfg.alpha_grid_points);
    let theta_axis = post.theta_axis(cfg.theta_grid_half_width, cfg.theta_grid_points);
    let alpha = post.alpha_marginal(alpha_axis.clone(), cfg.ci_level)?;
    let theta = post.theta_marginal(theta_axis.clone(), cfg.ci_level)?;
    let report = EstimateReport {
        command: "estimate",
        input: InputEcho {
            records: records.to_vec(),
        },
        pair,
        log_evidence: post.log_evidence,
        alpha: alpha.summary,
        alpha_shape: alpha_shape(&alpha.grid),
        alpha_empirical_bayes: alpha_empirical_bayes(&pair),
        theta: theta.summary,
        reproducibility: Reproducibility::new(cfg, post.evidence_rel_err),
    };

    let joint = post.joint_grid(theta_axis, alpha_axis.clone())?;
    let limiting = DensityGrid::from_fn_1d(alpha_axis, limiting_alpha_posterior_logdensity)?;
    let grids = vec![
        GridFile {
            name: "joint.csv",
            contents: joint.to_csv("theta", Some("alpha")),
        },
        GridFile {
            name: "theta_marginal.csv",
            contents: theta.grid.to_csv("theta", None),
        },
        GridFile {
            name: "alpha_marginal.csv",
            contents: alpha.grid.to_csv("alpha", None),
        },
        GridFile {
            name: "alpha_limiting.csv",
            contents: limiting.to_csv("alpha", None),
        },
    ];

    let rows: Vec<Vec<String>> = [("alpha", &report.alpha), ("theta", &report.theta)]
        .iter()
        .map(|(name, s)| {
            vec![
                name.to_string(),
                num(s.mean),
                num(s.sd),
                num(s.median),
                num(s.mode),
                num(s.ci_lower),
                num(s.ci_upper),
                num(s.level),
            ]
        })
        .collect();
    let table = csv_table(
        &["parameter", "mean", "sd", "median", "mode", "ci_lower", "ci_upper", "level"],
        &rows,
    )?;
    Ok(CommandOutput {
        report: to_value(&report)?,
        table,
        grids,
    })
}

// -------------------------------------------------------------------- test

#[derive(Debug, Clone, Serialize)]
pub struct BayesFactorRow {
    pub name: &'static str,
    pub label: String,
    pub log_bf: f64,
    pub bf: f64,
    pub display: String,
    pub quadrature_err: f64,
}

impl BayesFactorRow {
    fn new(name: &'static str, r: &BayesFactorResult) -> Self {
        Self {
            name,
            label: r.label(),
            log_bf: r.log_bf,
            bf: r.bf(),
            display: format_bf(r.bf()),
            quadrature_err: r.quadrature_err,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitsBlock {
    pub theta_true: f64,
    pub power_prior_h0_h1: DiracLimit,
    pub dc_point: f64,
    pub dc_point_display: String,
    pub dc_beta: f64,
    pub dc_beta_display: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dc_invgamma: Option<DiracLimit>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub command: &'static str,
    pub input: InputEcho,
    pub pair: StudyPair,
    pub bayes_factors: Vec<BayesFactorRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limits: Option<LimitsBlock>,
    pub reproducibility: Reproducibility,
}

pub fn cmd_test(records: &[StudyRecord], cfg: &AnalysisConfig) -> Result<CommandOutput> {
    let pair = select_pair(records)?;
    let ui = unit_information(cfg, original_record(records)?)?;
    let q = &cfg.quadrature;
    let mut results = vec![
        ("power_prior_h0_h1", bf01_power_prior(&pair, &cfg.beta_prior(), q)?),
        ("replication_h0_h1", bf01_replication(&pair)?),
        ("dc_point", bf_dc_point(&pair, &ui)?),
        ("dc_beta", bf_dc_beta(&pair, cfg.bf_y, cfg.allow_uniform_bf_y, q)?),
    ];
    if let Some(ig) = &cfg.invgamma {
        results.push(("dc_invgamma", bf_dc_invgamma(&pair, ig, q)?));
    }
    let max_err = results.iter().map(|(_, r)| r.quadrature_err).fold(0.0, f64::max);
    let rows: Vec<BayesFactorRow> = results.iter().map(|(n, r)| BayesFactorRow::new(n, r)).collect();

    let limits = match cfg.theta_true {
        None => None,
        Some(t) => {
            let o = &pair.original;
            let point = bf_dc_point_limit(t, o, &ui)?;
            let beta = bf_dc_beta_limit(t, o, cfg.bf_y)?;
            Some(LimitsBlock {
                theta_true: t,
                power_prior_h0_h1: bf01_power_prior_limit(t, o, &cfg.beta_prior())?,
                dc_point: point,
                dc_point_display: format_bf(point),
                dc_beta: beta,
                dc_beta_display: format_bf(beta),
                dc_invgamma: cfg
                    .invgamma
                    .as_ref()
                    .map(|ig| bf_dc_invgamma_limit(t, o.estimate, ig))
                    .transpose()?,
            })
        }
    };

    let table_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.name.to_string(),
                r.label.clone(),
                num(r.log_bf),
                num(r.bf),
                r.display.clone(),
                num(r.quadrature_err),
            ]
        })
        .collect();
    let table = csv_table(&["name", "label", "log_bf", "bf", "display", "quadrature_err"], &table_rows)?;
    let report = TestReport {
        command: "test",
        input: InputEcho {
            records: records.to_vec(),
        },
        pair,
        bayes_factors: rows,
        limits,
        reproducibility: Reproducibility::new(cfg, max_err),
    };
    Ok(CommandOutput {
        report: to_value(&report)?,
        table,
        grids: vec![],
    })
}

// ------------------------------------------------------------------ design

#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub command: &'static str,
    pub input: InputEcho,
    pub gamma: f64,
    pub target_power: f64,
    pub design_target: DesignTarget,
    /// The design for `design_target`.
    pub design: DesignResult,
    pub design_hc: DesignResult,
    pub design_hd: DesignResult,
    /// Largest probability of misleading evidence for `Hc` under `Hd`
    /// along the grid.
    pub max_misleading_hc_under_hd: f64,
    /// Largest probability of misleading evidence for `Hd` under `Hc`.
    pub max_misleading_hd_under_hc: f64,
    pub curve: Vec<DesignPoint>,
    pub reproducibility: Reproducibility,
}

pub fn cmd_design(records: &[StudyRecord], cfg: &AnalysisConfig) -> Result<CommandOutput> {
    let (orec, original) = select_original(records)?;
    let ignored = records.iter().filter(|r| r.role == Role::Replication).count();
    if ignored > 0 {
        log::info!("design uses only the original record; ignoring {ignored} replication record(s)");
    }
    let ui = unit_information(cfg, orec)?;
    let spec_for = |hypothesis| DesignSpec {
        original,
        ui,
        gamma: cfg.gamma,
        target_power: cfg.target_power,
        hypothesis,
    };
    let grid = sigma_grid(
        &original,
        cfg.design_min_relative_size,
        cfg.design_max_relative_size,
        cfg.design_grid_points,
    )?;
    let design_hc = find_design(&spec_for(DesignTarget::Hc), &grid)?;
    let design_hd = find_design(&spec_for(DesignTarget::Hd), &grid)?;
    let design = match cfg.design_target {
        DesignTarget::Hc => design_hc,
        DesignTarget::Hd => design_hd,
    };
    let mut curve = prs_curve(&spec_for(cfg.design_target), &grid)?;
    curve.sort_by(|a, b| a.relative_size.total_cmp(&b.relative_size));

    let header = [
        "sigma_r",
        "n_r",
        "relative_size",
        "relative_n",
        "evidence_hc_under_hc",
        "evidence_hc_under_hd",
        "evidence_hd_under_hc",
        "evidence_hd_under_hd",
    ];
    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|p| {
            vec![
                num(p.sigma_r),
                p.n_r.to_string(),
                num(p.relative_size),
                num(p.relative_n),
                num(p.evidence_hc.under_hc),
                num(p.evidence_hc.under_hd),
                num(p.evidence_hd.under_hc),
                num(p.evidence_hd.under_hd),
            ]
        })
        .collect();
    let table = csv_table(&header, &rows)?;
    let report = DesignReport {
        command: "design",
        input: InputEcho {
            records: records.to_vec(),
        },
        gamma: cfg.gamma,
        target_power: cfg.target_power,
        design_target: cfg.design_target,
        design,
        design_hc,
        design_hd,
        max_misleading_hc_under_hd: curve.iter().map(|p| p.evidence_hc.under_hd).fold(0.0, f64::max),
        max_misleading_hd_under_hc: curve.iter().map(|p| p.evidence_hd.under_hc).fold(0.0, f64::max),
        curve,
        reproducibility: Reproducibility::new(cfg, 0.0),
    };
    Ok(CommandOutput {
        report: to_value(&report)?,
        grids: vec![GridFile {
            name: "prs_curve.csv",
            contents: table.clone(),
        }],
        table,
    })
}

// ------------------------------------------------------------------ bridge

#[derive(Debug, Clone, Serialize)]
pub struct MappingRow {
    pub alpha: f64,
    pub tau2: f64,
    pub i2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlayCheck {
    pub points: usize,
    pub max_abs_log_diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Correspondence {
    pub name: &'static str,
    pub power_prior_log_bf: f64,
    pub hierarchical_log_bf: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BridgeReport {
    pub command: &'static str,
    pub input: InputEcho,
    pub pair: StudyPair,
    pub sigma2_o: f64,
    pub mapping: Vec<MappingRow>,
    pub tau2_prior: GFParams,
    pub i2_prior: GBetaParams,
    pub theta_overlay: OverlayCheck,
    pub correspondences: Vec<Correspondence>,
    pub reproducibility: Reproducibility,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let (ea, eb) = (a.exp(), b.exp());
    (ea - eb).abs() / ea.abs().max(eb.abs())
}

pub fn cmd_bridge(records: &[StudyRecord], cfg: &AnalysisConfig) -> Result<CommandOutput> {
    let pair = select_pair(records)?;
    let ui = unit_information(cfg, original_record(records)?)?;
    let q = &cfg.quadrature;
    let vo = pair.original.variance();
    let beta = cfg.beta_prior();

    let mapping = cfg
        .bridge_alphas
        .iter()
        .map(|&a| {
            Ok(MappingRow {
                alpha: a,
                tau2: alpha_to_tau2(a, vo)?,
                i2: alpha_to_i2(a)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let tau2_prior = tau2_prior_from_alpha_prior(&beta, vo)?;
    let gf = match tau2_prior {
        HeterogeneityPrior::GeneralizedF(p) => p,
        _ => return Err(Error::State("unexpected induced prior family".into())),
    };
    let gb = i2_prior_from_alpha_prior(&beta)?;

    let pp = PowerPriorPosterior::new(pair, beta, *q)?;
    let hp = HierarchicalPosterior::new(pair, tau2_prior, *q)?;
    let theta_axis = pp.theta_axis(cfg.theta_grid_half_width, cfg.theta_grid_points);
    let mut overlay_rows = Vec::with_capacity(theta_axis.len());
    let mut max_diff: f64 = 0.0;
    for &t in &theta_axis {
        let a = pp.theta_logdensity(t)?;
        let b = hp.theta_r_logdensity(t)?;
        if a.is_finite() && b.is_finite() {
            max_diff = max_diff.max((a - b).abs());
        } else if a != b {
            max_diff = f64::INFINITY;
        }
        overlay_rows.push(vec![num(t), num(a), num(b)]);
    }

    let h0 = HypothesisSpec {
        label: "H0".into(),
        theta_star: ThetaStarPrior::Point { value: 0.0 },
        tau2: HeterogeneityPrior::Fixed { tau2: 0.0 },
    };
    let h1 = HypothesisSpec {
        label: "H1".into(),
        theta_star: ThetaStarPrior::OriginalPosterior,
        tau2: tau2_prior,
    };
    let s = ui.s(vo);
    let hd_point = HypothesisSpec {
        label: "Hd".into(),
        theta_star: ThetaStarPrior::Normal {
            mean: 0.0,
            variance: ui.kappa2,
        },
        tau2: HeterogeneityPrior::Fixed { tau2: 0.0 },
    };
    let hc_point = HypothesisSpec {
        label: "Hc".into(),
        theta_star: ThetaStarPrior::Normal {
            mean: s * pair.original.estimate,
            variance: s * vo,
        },
        tau2: HeterogeneityPrior::Fixed { tau2: 0.0 },
    };
    let hd_beta = HypothesisSpec {
        label: "Hd".into(),
        theta_star: ThetaStarPrior::OriginalPosterior,
        tau2: tau2_prior_from_alpha_prior(&crate::power_prior::BetaParams::new(1.0, cfg.bf_y)?, vo)?,
    };
    let hc_beta = HypothesisSpec {
        label: "Hc".into(),
        theta_star: ThetaStarPrior::OriginalPosterior,
        tau2: HeterogeneityPrior::Fixed { tau2: 0.0 },
    };
    let pairs = [
        (
            "power_prior_h0_h1",
            bf01_power_prior(&pair, &beta, q)?,
            hier_bayes_factor(&pair, &h0, &h1, q)?,
        ),
        (
            "dc_point",
            bf_dc_point(&pair, &ui)?,
            hier_bayes_factor(&pair, &hd_point, &hc_point, q)?,
        ),
        (
            "dc_beta",
            bf_dc_beta(&pair, cfg.bf_y, cfg.allow_uniform_bf_y, q)?,
            hier_bayes_factor(&pair, &hd_beta, &hc_beta, q)?,
        ),
    ];
    let mut max_err = pp.evidence_rel_err.max(hp.evidence_rel_err);
    let correspondences = pairs
        .iter()
        .map(|(name, a, b)| {
            max_err = max_err.max(a.quadrature_err).max(b.quadrature_err);
            Correspondence {
                name,
                power_prior_log_bf: a.log_bf,
                hierarchical_log_bf: b.log_bf,
                rel_diff: rel_diff(a.log_bf, b.log_bf),
            }
        })
        .collect();

    let mut grids = vec![
        GridFile {
            name: "mapping.csv",
            contents: csv_table(
                &["alpha", "tau2", "i2"],
                &mapping.iter().map(|m| vec![num(m.alpha), num(m.tau2), num(m.i2)]).collect::<Vec<_>>(),
            )?,
        },
        GridFile {
            name: "overlay.csv",
            contents: csv_table(&["theta", "power_prior_logdens", "hierarchical_logdens"], &overlay_rows)?,
        },
    ];
    // Prior densities on the three scales.
    let alpha_axis = linspace(ALPHA_GRID_MIN, 1.0, cfg.alpha_grid_points);
    let alpha_rows = alpha_axis
        .iter()
        .map(|&a| {
            let t2 = alpha_to_tau2(a, vo)?;
            let i2 = alpha_to_i2(a)?;
            Ok(vec![
                num(a),
                num(crate::special_math::beta_logpdf(a, beta.x, beta.y)?),
                num(t2),
                num(tau2_prior.logpdf(t2)?),
                num(i2),
                num(gbeta_logpdf(i2, &gb)?),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    grids.push(GridFile {
        name: "priors.csv",
        contents: csv_table(
            &["alpha", "alpha_logdens", "tau2", "tau2_logdens", "i2", "i2_logdens"],
            &alpha_rows,
        )?,
    });
    let table = grids[0].contents.clone();

    let report = BridgeReport {
        command: "bridge",
        input: InputEcho {
            records: records.to_vec(),
        },
        pair,
        sigma2_o: vo,
        mapping,
        tau2_prior: gf,
        i2_prior: gb,
        theta_overlay: OverlayCheck {
            points: theta_axis.len(),
            max_abs_log_diff: max_diff,
            tolerance: OVERLAY_TOL,
            pass: max_diff < OVERLAY_TOL,
        },
        correspondences,
        reproducibility: Reproducibility::new(cfg, max_err),
    };
    if max_diff >= OVERLAY_TOL {
        log::warn!("bridge overlay differs by {max_diff:e} in log density");
    }
    Ok(CommandOutput {
        report: to_value(&report)?,
        table,
        grids,
    })
}
