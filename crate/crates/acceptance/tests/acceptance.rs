//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use pprep::cli::commands::cmd_test;
use pprep::cli::config::AnalysisConfig;
use pprep::cli::input::{EffectType, Role, StudyRecord};
use pprep::design::{default_sigma_grid, prob_replication_success, prs_curve, DesignSpec, DesignTarget};
use pprep::grid::linspace;
use pprep::hierarchical::{
    hier_bayes_factor, hier_posterior_theta_r, tau2_prior_from_alpha_prior, tau2_to_alpha, HeterogeneityPrior,
    HierarchicalModel, HierarchicalPosterior, HypothesisSpec, ThetaStarPrior,
};
use pprep::hypothesis::{
    bf01_power_prior, bf_dc_beta, bf_dc_beta_limit, bf_dc_point, bf_dc_point_limit, format_bf, UnitInformation,
};
use pprep::power_prior::{
    posterior_theta_fixed_alpha, BetaParams, PowerPriorPosterior, Study, StudyPair, ALPHA_GRID_MIN,
};
use pprep::quadrature::QuadratureSpec;
use pprep_acceptance::labels::{self, PRINTED};
use pprep_acceptance::oracle::{monte_carlo_prs, seed_from_env, theta_marginal_by_quadrature, MonteCarloSpec};
use pprep_acceptance::props::{suites, ALGEBRAIC_CASES, QUADRATURE_CASES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

fn report(id: &str, title: &str, elapsed: Duration, o: &Outcome) -> bool {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    println!("{id} {verdict} {title}: {} [{:.2} s]", o.summary, elapsed.as_secs_f64());
    for d in &o.details {
        println!("    {d}");
    }
    o.pass
}

fn within_time(o: &mut Outcome, elapsed: Duration, limit_s: f64) {
    if elapsed.as_secs_f64() >= limit_s {
        o.pass = false;
        o.details.push(format!("runtime {:.2} s exceeds {limit_s} s", elapsed.as_secs_f64()));
    }
}

fn record(id: &str, role: Role, (estimate, se): (f64, f64)) -> StudyRecord {
    StudyRecord {
        id: id.into(),
        role,
        effect_type: EffectType::Smd,
        estimate,
        se: Some(se),
        n: None,
    }
}

/// Evidence category on the conventional 1, 3, 10, 30, 100 scale,
/// independent of direction.
fn category(bf: f64) -> usize {
    let m = bf.max(1.0 / bf);
    [3.0, 10.0, 30.0, 100.0].iter().filter(|&&c| m >= c).count()
}

fn c1_table() -> Outcome {
    let cfg = AnalysisConfig::default();
    let columns = ["power_prior_h0_h1", "replication_h0_h1", "dc_point", "dc_beta"];
    let mut details = Vec::new();
    let mut ok_count = 0;
    for (i, printed_row) in PRINTED.iter().enumerate() {
        let records = [
            record("labels", Role::Original, labels::ORIGINAL),
            record(&format!("rep{}", i + 1), Role::Replication, labels::REPLICATIONS[i]),
        ];
        let out = match cmd_test(&records, &cfg) {
            Ok(o) => o,
            Err(e) => {
                details.push(format!("rep{}: {e}", i + 1));
                continue;
            }
        };
        let rows = out.report["bayes_factors"].as_array().cloned().unwrap_or_default();
        for (j, printed) in printed_row.iter().enumerate() {
            let bf = rows
                .iter()
                .find(|r| r["name"] == columns[j])
                .and_then(|r| r["bf"].as_f64())
                .unwrap_or(f64::NAN);
            let (good, note) = match printed {
                None => (bf < 1e-3, "printed < 1/1000".to_string()),
                Some(p) => {
                    let ratio = (bf / p).max(p / bf);
                    let direction = (bf - 1.0).signum() == (p - 1.0).signum();
                    let same_category = category(bf) == category(*p);
                    (
                        direction && same_category && ratio <= 1.5,
                        format!(
                            "printed {}, ratio {ratio:.3}, direction {}, category {}",
                            format_bf(*p),
                            if direction { "ok" } else { "differs" },
                            if same_category { "ok" } else { "differs" }
                        ),
                    )
                }
            };
            ok_count += good as usize;
            details.push(format!(
                "rep{} {:<18} computed {:>9} ({bf:.6e}) {note} {}",
                i + 1,
                columns[j],
                format_bf(bf),
                if good { "ok" } else { "MISMATCH" }
            ));
        }
    }
    Outcome {
        pass: ok_count == 12,
        summary: format!("{ok_count}/12 entries in direction, category and within a factor of 1.5"),
        details,
    }
}

fn c2_limits() -> Outcome {
    let o = labels::original();
    let point = bf_dc_point_limit(0.21, &o, &UnitInformation { kappa2: 2.0 }).unwrap_or(f64::NAN);
    let beta = bf_dc_beta_limit(0.21, &o, 2.0).unwrap_or(f64::NAN);
    let point_ok = (point * 28.0 - 1.0).abs() <= 0.05;
    let beta_ok = (beta - 8.0 / 15.0).abs() <= 1e-10;
    Outcome {
        pass: point_ok && beta_ok,
        summary: format!(
            "point limit {point:.6} = 1/{:.2} (target 1/28 within 5%), beta limit {beta:.15} (target 8/15 within 1e-10)",
            1.0 / point
        ),
        details: vec![],
    }
}

fn random_pair(rng: &mut ChaCha20Rng) -> StudyPair {
    StudyPair {
        original: Study {
            estimate: rng.random_range(-1.0..1.0),
            se: rng.random_range(0.02..0.5),
        },
        replication: Study {
            estimate: rng.random_range(-1.0..1.0),
            se: rng.random_range(0.02..0.5),
        },
    }
}

fn c3_closed_form() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(seed_from_env());
    rng.set_stream(3);
    let mut pairs: Vec<(String, StudyPair)> = (0..3).map(|i| (format!("rep{}", i + 1), labels::pair(i))).collect();
    pairs.extend((0..20).map(|k| (format!("random{k}"), random_pair(&mut rng))));
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    let mut failed = false;
    for (name, pair) in &pairs {
        let post = match PowerPriorPosterior::new(*pair, BetaParams::default(), QuadratureSpec::default()) {
            Ok(p) => p,
            Err(e) => {
                failed = true;
                details.push(format!("{name}: {e}"));
                continue;
            }
        };
        let axis = post.default_theta_axis();
        let mut pair_worst: f64 = 0.0;
        for &t in &axis {
            let rel = match (post.theta_logdensity(t), theta_marginal_by_quadrature(&post, t)) {
                (Ok(a), Ok(b)) => (a - b).exp_m1().abs(),
                _ => f64::INFINITY,
            };
            pair_worst = pair_worst.max(if rel.is_nan() { f64::INFINITY } else { rel });
        }
        if name.starts_with("rep") {
            details.push(format!("{name}: max relative difference {pair_worst:.3e} over {} points", axis.len()));
        }
        worst = worst.max(pair_worst);
    }
    Outcome {
        pass: !failed && worst <= 1e-6,
        summary: format!("max relative difference {worst:.3e} over 23 pairs x 401 points (limit 1e-6)"),
        details,
    }
}

fn c4_bridge() -> Outcome {
    let mut details = Vec::new();
    let spec = QuadratureSpec::default();

    // (a) fixed heterogeneity
    let mut rng = ChaCha20Rng::seed_from_u64(seed_from_env());
    rng.set_stream(4);
    let mut worst_a: f64 = 0.0;
    for k in 0..1000 {
        let pair = labels::pair(k % 3);
        let tau2 = if k == 0 { 0.0 } else { 10f64.powf(rng.random_range(-8.0..2.0)) };
        let (mh, vh) = hier_posterior_theta_r(&HierarchicalModel::new(pair, tau2).unwrap()).unwrap();
        let alpha = tau2_to_alpha(tau2, pair.original.variance()).unwrap();
        let (mp, vp) = posterior_theta_fixed_alpha(&pair, alpha).unwrap();
        let rel = ((mh - mp).abs() / mp.abs()).max((vh - vp).abs() / vp);
        worst_a = worst_a.max(rel);
    }
    let pass_a = worst_a <= 1e-12;
    details.push(format!("(a) 1000 random tau2: max relative difference {worst_a:.3e} (limit 1e-12)"));

    // (b) random heterogeneity on Rep 1
    let pair = labels::pair(0);
    let mut worst_b: f64 = 0.0;
    for (x, y) in [(1.0, 1.0), (2.0, 1.0), (1.0, 2.0)] {
        let beta = BetaParams { x, y };
        let pp = PowerPriorPosterior::new(pair, beta, spec).unwrap();
        let hp = HierarchicalPosterior::new(pair, tau2_prior_from_alpha_prior(&beta, 0.0025).unwrap(), spec).unwrap();
        let mut w: f64 = 0.0;
        for t in pp.default_theta_axis() {
            let d = (pp.theta_logdensity(t).unwrap() - hp.theta_r_logdensity(t).unwrap()).exp_m1().abs();
            w = w.max(if d.is_nan() { f64::INFINITY } else { d });
        }
        details.push(format!("(b) Be({x},{y}) vs GF({y},{x},800): max relative difference {w:.3e}"));
        worst_b = worst_b.max(w);
    }
    let pass_b = worst_b <= 1e-5;

    // (c) Bayes factor correspondences on all three pairs
    let mut worst_c: f64 = 0.0;
    for i in 0..3 {
        let pair = labels::pair(i);
        let vo = pair.original.variance();
        let ui = UnitInformation::default();
        let s = ui.s(vo);
        let beta = BetaParams::default();
        let fixed0 = HeterogeneityPrior::Fixed { tau2: 0.0 };
        let spec_of = |label: &str, theta_star, tau2| HypothesisSpec {
            label: label.into(),
            theta_star,
            tau2,
        };
        let cases = [
            (
                "H0 vs H1",
                bf01_power_prior(&pair, &beta, &spec).unwrap().log_bf,
                hier_bayes_factor(
                    &pair,
                    &spec_of("H0", ThetaStarPrior::Point { value: 0.0 }, fixed0),
                    &spec_of("H1", ThetaStarPrior::OriginalPosterior, tau2_prior_from_alpha_prior(&beta, vo).unwrap()),
                    &spec,
                )
                .unwrap()
                .log_bf,
            ),
            (
                "Hd vs Hc point",
                bf_dc_point(&pair, &ui).unwrap().log_bf,
                hier_bayes_factor(
                    &pair,
                    &spec_of("Hd", ThetaStarPrior::Normal { mean: 0.0, variance: ui.kappa2 }, fixed0),
                    &spec_of(
                        "Hc",
                        ThetaStarPrior::Normal {
                            mean: s * pair.original.estimate,
                            variance: s * vo,
                        },
                        fixed0,
                    ),
                    &spec,
                )
                .unwrap()
                .log_bf,
            ),
            (
                "Hd vs Hc beta",
                bf_dc_beta(&pair, 2.0, false, &spec).unwrap().log_bf,
                hier_bayes_factor(
                    &pair,
                    &spec_of(
                        "Hd",
                        ThetaStarPrior::OriginalPosterior,
                        tau2_prior_from_alpha_prior(&BetaParams { x: 1.0, y: 2.0 }, vo).unwrap(),
                    ),
                    &spec_of("Hc", ThetaStarPrior::OriginalPosterior, fixed0),
                    &spec,
                )
                .unwrap()
                .log_bf,
            ),
        ];
        for (name, a, b) in cases {
            let rel = (a - b).exp_m1().abs();
            worst_c = worst_c.max(rel);
            details.push(format!("(c) rep{} {name}: {} vs {} relative {rel:.3e}", i + 1, a.exp(), b.exp()));
        }
    }
    let pass_c = worst_c <= 1e-6;
    Outcome {
        pass: pass_a && pass_b && pass_c,
        summary: format!(
            "(a) {} (b) {} (c) {} with max relative differences {worst_a:.1e}, {worst_b:.1e}, {worst_c:.1e}",
            if pass_a { "ok" } else { "fail" },
            if pass_b { "ok" } else { "fail" },
            if pass_c { "ok" } else { "fail" }
        ),
        details,
    }
}

fn c5_design() -> Outcome {
    const DRAWS: u64 = 1_000_000;
    let seed = seed_from_env();
    let original = labels::original();
    let ui = UnitInformation::default();
    let gamma = 0.1;
    let mut details = vec![format!("seed {seed}, {DRAWS} draws per spec")];
    let mut mc_ok = 0;
    let mut stream = 0;
    for rel in [0.25, 1.0, 4.0] {
        let sigma_r = original.se / f64::sqrt(rel);
        for target in [DesignTarget::Hc, DesignTarget::Hd] {
            let spec = DesignSpec {
                original,
                ui,
                gamma,
                target_power: 0.8,
                hypothesis: target,
            };
            let analytic = prob_replication_success(sigma_r, &spec).unwrap();
            for truth in [DesignTarget::Hc, DesignTarget::Hd] {
                stream += 1;
                let p = analytic.correct(truth);
                let mc = monte_carlo_prs(
                    &MonteCarloSpec {
                        original,
                        ui,
                        sigma_r,
                        gamma,
                        truth,
                        target,
                    },
                    DRAWS,
                    seed,
                    stream,
                )
                .unwrap();
                let se = (p * (1.0 - p) / DRAWS as f64).sqrt();
                let z = (mc - p) / se;
                let good = z.abs() <= 3.0;
                mc_ok += good as usize;
                details.push(format!(
                    "relative size {rel:<4} evidence for {target:?} under {truth:?}: analytic {p:.6} MC {mc:.6} z {z:+.2} {}",
                    if good { "ok" } else { "MISMATCH" }
                ));
            }
        }
    }

    // Qualitative claims with each replication as the original study.
    let mut misleading_max: f64 = 0.0;
    let mut band_ok = true;
    for i in 0..3 {
        let o = labels::replication(i);
        let spec = DesignSpec {
            original: o,
            ui,
            gamma,
            target_power: 0.8,
            hypothesis: DesignTarget::Hc,
        };
        let curve = prs_curve(&spec, &default_sigma_grid(&o)).unwrap();
        let mis = curve.iter().map(|p| p.evidence_hc.under_hd).fold(0.0, f64::max);
        let (lo, hi) = curve
            .iter()
            .map(|p| p.evidence_hd.under_hd)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        let in_band = lo >= 0.75 && hi <= 0.90;
        band_ok &= in_band;
        misleading_max = misleading_max.max(mis);
        details.push(format!(
            "rep{} as original: evidence for Hc under Hd max {mis:.4}; evidence for Hd under Hd range [{lo:.4}, {hi:.4}] {}",
            i + 1,
            if in_band { "within 0.75-0.90" } else { "OUTSIDE 0.75-0.90" }
        ));
    }
    let misleading_ok = misleading_max < 0.05;
    Outcome {
        pass: mc_ok == 12 && misleading_ok && band_ok,
        summary: format!(
            "{mc_ok}/12 Monte Carlo specs within 3 SE; misleading evidence for Hc under Hd max {misleading_max:.4} ({}); Hd-under-Hd band {}",
            if misleading_ok { "< 0.05" } else { ">= 0.05" },
            if band_ok { "holds" } else { "violated" }
        ),
        details,
    }
}

fn c6_modes() -> Outcome {
    let spec = QuadratureSpec::default();
    let post = |i| PowerPriorPosterior::new(labels::pair(i), BetaParams::default(), spec).unwrap();
    let mode = |i| {
        let p: PowerPriorPosterior = post(i);
        p.alpha_marginal(p.default_alpha_axis(), 0.95).unwrap().summary.mode
    };
    let m1 = mode(0);
    let m3 = mode(2);
    let p2 = post(1);
    let grid = linspace(ALPHA_GRID_MIN, 1.0, 200);
    let dens: Vec<f64> = grid.iter().map(|&a| p2.alpha_logdensity(a).unwrap()).collect();
    let monotone = dens.windows(2).all(|w| w[1] > w[0]);
    let ok1 = (m1 - 0.2).abs() <= 0.05;
    let ok3 = (m3 - 0.05).abs() <= 0.02;
    Outcome {
        pass: ok1 && ok3 && monotone,
        summary: format!(
            "rep1 mode {m1:.4} (0.2 +/- 0.05), rep3 mode {m3:.4} (0.05 +/- 0.02), rep2 {} on 200 points",
            if monotone { "increasing" } else { "not monotone" }
        ),
        details: vec![],
    }
}

fn c7_properties() -> Outcome {
    let all = suites();
    let mut details = Vec::new();
    let mut passed = 0;
    for s in &all {
        let min = if s.cases >= ALGEBRAIC_CASES { ALGEBRAIC_CASES } else { QUADRATURE_CASES };
        let res = s.run();
        let good = res.is_ok() && s.cases >= min;
        passed += good as usize;
        details.push(format!(
            "{}::{} ({} cases) {}",
            s.module,
            s.name,
            s.cases,
            match res {
                Ok(()) => "ok".to_string(),
                Err(e) => format!("FAILED: {e}"),
            }
        ));
    }
    Outcome {
        pass: passed == all.len(),
        summary: format!("{passed}/{} randomized suites pass", all.len()),
        details,
    }
}

/// Identifier, title, check and optional runtime limit in seconds.
type Criterion = (&'static str, &'static str, fn() -> Outcome, Option<f64>);

fn main() {
    let criteria: [Criterion; 7] = [
        ("C1", "published Bayes factors", c1_table, Some(5.0)),
        ("C2", "limiting bounds", c2_limits, None),
        ("C3", "closed form vs quadrature", c3_closed_form, Some(30.0)),
        ("C4", "bridge equivalence", c4_bridge, None),
        ("C5", "design self-consistency", c5_design, Some(120.0)),
        ("C6", "posterior modes", c6_modes, None),
        ("C7", "property suites", c7_properties, None),
    ];
    let mut failures = Vec::new();
    for (id, title, f, limit) in criteria {
        let start = Instant::now();
        let mut o = f();
        let elapsed = start.elapsed();
        if let Some(l) = limit {
            within_time(&mut o, elapsed, l);
        }
        if !report(id, title, elapsed, &o) {
            failures.push(id);
        }
    }
    if failures.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {}", failures.join(", "));
        std::process::exit(1);
    }
}
