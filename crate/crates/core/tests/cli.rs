use std::fs;
use std::path::Path;

use pprep::cli::{run, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION};
use serde_json::Value;

const LABELS: [(&str, f64, f64); 3] = [("rep1", 0.09, 0.05), ("rep2", 0.21, 0.06), ("rep3", 0.44, 0.04)];

fn pair_csv(dir: &Path, rep: usize) -> String {
    let (id, t, s) = LABELS[rep];
    let path = dir.join(format!("{id}.csv"));
    fs::write(
        &path,
        format!("id,role,effect_type,estimate,se,n\nlabels,original,smd,0.21,0.05,\n{id},replication,smd,{t},{s},\n"),
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["pprep"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn error_object(stderr: &str) -> Value {
    let v = json(stderr.lines().last().expect("an error line"));
    assert!(v["error"]["message"].is_string());
    v
}

#[test]
fn test_command_reports_four_bayes_factors() {
    let dir = tempfile::tempdir().unwrap();
    let input = pair_csv(dir.path(), 2);
    let (code, out, _) = invoke(&["test", "--input", &input]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    let rows = v["bayes_factors"].as_array().unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["power_prior_h0_h1", "replication_h0_h1", "dc_point", "dc_beta"]);
    assert_eq!(rows[0]["display"], "< 1/1000");
    assert_eq!(rows[1]["display"], "< 1/1000");
    assert_eq!(rows[0]["label"], "BF_H0H1");
    assert_eq!(rows[2]["label"], "BF_HdHc");
    assert!(rows[2]["bf"].as_f64().unwrap() > 10.0);
    assert!(v.get("limits").is_none());
}

#[test]
fn limits_block_at_original_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("same.json");
    fs::write(
        &input,
        r#"[{"id":"o","role":"original","effect_type":"smd","estimate":0.21,"se":0.05},
            {"id":"r","role":"replication","effect_type":"smd","estimate":0.21,"se":0.05}]"#,
    )
    .unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"theta_true": 0.21}"#).unwrap();
    let (code, out, _) = invoke(&["test", "--input", input.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let lim = &json(&out)["limits"];
    // Point-prior limit recomputed from its closed form.
    let s = 2.0 / (0.0025 + 2.0);
    let e = 0.21f64.powi(2) / 2.0 - (0.21 - s * 0.21f64).powi(2) / (s * 0.0025);
    let want = (1.0f64 - s).sqrt() * (-0.5 * e).exp();
    assert!((lim["dc_point"].as_f64().unwrap() - want).abs() < 1e-12 * want);
    assert!((lim["dc_beta"].as_f64().unwrap() - 8.0 / 15.0).abs() < 1e-12);
    assert_eq!(lim["power_prior_h0_h1"]["classification"], "Zero");
}

#[test]
fn json_output_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let input = pair_csv(dir.path(), 0);
    for cmd in ["test", "estimate", "bridge", "design"] {
        let (code, first, _) = invoke(&[cmd, "--input", &input]);
        assert_eq!(code, EXIT_OK, "{cmd}");
        let saved = dir.path().join(format!("{cmd}_out.json"));
        fs::write(&saved, &first).unwrap();
        let (code, second, _) = invoke(&[cmd, "--input", saved.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK, "{cmd}");
        assert_eq!(first, second, "{cmd}");
    }
}

#[test]
fn estimate_reports_alpha_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out, _) = invoke(&["estimate", "--input", &pair_csv(dir.path(), 1)]);
    let v = json(&out);
    assert_eq!(v["alpha_shape"], "monotonically_increasing");
    assert!((v["alpha"]["mode"].as_f64().unwrap() - 1.0).abs() < 1e-6);

    let (_, out, _) = invoke(&["estimate", "--input", &pair_csv(dir.path(), 2)]);
    let v = json(&out);
    assert_eq!(v["alpha_shape"], "interior_mode");
    assert!((v["alpha"]["mode"].as_f64().unwrap() - 0.05).abs() < 0.02);
}

#[test]
fn identical_studies_center_theta() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("same.csv");
    fs::write(
        &input,
        "id,role,effect_type,estimate,se,n\na,original,logor,0.4,0.2,\nb,replication,logor,0.4,0.2,\n",
    )
    .unwrap();
    let (code, out, _) = invoke(&["estimate", "--input", input.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let mean = json(&out)["theta"]["mean"].as_f64().unwrap();
    assert!((mean - 0.4).abs() < 1e-9, "{mean}");
}

#[test]
fn grid_export_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = pair_csv(dir.path(), 0);
    let grids = dir.path().join("grids");
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"alpha_grid_points": 51, "theta_grid_points": 41}"#).unwrap();
    let g = grids.to_str().unwrap();
    let c = cfg.to_str().unwrap();
    for cmd in ["estimate", "design", "bridge"] {
        let (code, _, err) = invoke(&[cmd, "--input", &input, "--config", c, "--grid-out", g]);
        assert_eq!(code, EXIT_OK, "{err}");
    }
    let joint = fs::read_to_string(grids.join("joint.csv")).unwrap();
    let mut lines = joint.lines();
    assert_eq!(lines.next(), Some("theta,alpha,logdens"));
    assert_eq!(lines.count(), 51 * 41);
    for name in ["theta_marginal.csv", "alpha_marginal.csv", "alpha_limiting.csv", "prs_curve.csv", "mapping.csv", "overlay.csv", "priors.csv"] {
        assert!(grids.join(name).exists(), "{name}");
    }
    let alpha = fs::read_to_string(grids.join("alpha_marginal.csv")).unwrap();
    let rows: Vec<(f64, f64)> = alpha
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',').map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    let area: f64 = rows.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1.exp() + w[1].1.exp())).sum();
    assert!((area - 1.0).abs() < 1e-9);
    let overlay = fs::read_to_string(grids.join("overlay.csv")).unwrap();
    for l in overlay.lines().skip(1) {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - v[2]).abs() < 1e-5);
    }
}

#[test]
fn csv_format_output() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = invoke(&["test", "--input", &pair_csv(dir.path(), 0), "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("name,label,log_bf,bf,display,quadrature_err"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn design_reports_both_targets() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = invoke(&["design", "--input", &pair_csv(dir.path(), 1)]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["gamma"].as_f64(), Some(0.1));
    assert!(v["design_hc"]["attained"].is_boolean());
    assert!(v["max_misleading_hc_under_hd"].as_f64().unwrap() < 0.05);
    assert_eq!(v["curve"].as_array().unwrap().len(), 60);
}

#[test]
fn unattainable_design_reports_asymptote() {
    let dir = tempfile::tempdir().unwrap();
    let input = pair_csv(dir.path(), 0);
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"target_power": 0.99}"#).unwrap();
    let (code, out, _) = invoke(&["design", "--input", &input, "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let d = &json(&out)["design"];
    assert_eq!(d["attained"], false);
    assert!(d["asymptote"].as_f64().unwrap() < 0.99);
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let two = dir.path().join("two.csv");
    fs::write(
        &two,
        "id,role,effect_type,estimate,se,n\na,original,smd,0.2,0.1,\nb,original,smd,0.3,0.1,\nc,replication,smd,0.1,0.1,\n",
    )
    .unwrap();
    let (code, out, err) = invoke(&["test", "--input", two.to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(out.is_empty());
    assert_eq!(error_object(&err)["error"]["kind"], "validation");

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "id,role,effect_type,estimate,se,n\na,original,smd,0.2,0.1,\nb,replication,smd,oops,0.1,\n").unwrap();
    let (code, _, err) = invoke(&["test", "--input", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);
    let e = error_object(&err);
    assert_eq!(e["error"]["kind"], "parse");
    assert!(e["error"]["message"].as_str().unwrap().contains("line 3"));

    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"prior_y": 0}"#).unwrap();
    let (code, _, _) = invoke(&["test", "--input", &pair_csv(dir.path(), 0), "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_VALIDATION);

    let (code, _, err) = invoke(&["frobnicate"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert_eq!(error_object(&err)["error"]["kind"], "usage");
}

#[test]
fn non_convergence_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"quadrature": {"rel_tol": 1e-15, "abs_tol": 1e-300, "max_subdivisions": 1}, "prior_x": 0.3, "prior_y": 7}"#).unwrap();
    let (code, _, err) = invoke(&["test", "--input", &pair_csv(dir.path(), 2), "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_NUMERICAL, "{err}");
    assert_eq!(error_object(&err)["error"]["kind"], "convergence");
}

#[test]
fn help_mentions_default_threshold() {
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("gamma = 1/10"));
}
