use std::collections::HashMap;
use std::process::Command;

type Row = HashMap<String, String>;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_grating-bench")).args(args).output().expect("spawn grating-bench");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn table(text: &str) -> Vec<Row> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# grating-bench v1"));
    let body: String = lines.collect::<Vec<_>>().join("\n");
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().clone();
    r.records().map(|rec| header.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()).collect()
}

fn f(row: &Row, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("{key} = `{}`", row[key]))
}

#[test]
fn flat_dirichlet_single_point_reflects_everything() {
    let (code, out, err) = run(&["solve", "--profile", "flat(0)", "--R", "1", "--k", "1", "--theta_deg", "30"]);
    assert_eq!(code, 0, "{err}");
    let rows = table(&out);
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(r["status"], "ok");
    // α = 1/2: orders -1 and 0 propagate, only the specular one carries energy.
    assert_eq!(r["prop_orders"], "-1;0");
    let at = |key: &str| -> Vec<f64> { r[key].split(';').map(|v| v.parse().unwrap()).collect() };
    let (e, re, im) = (at("e_r"), at("r_re"), at("r_im"));
    assert!((e[1] - 1.0).abs() <= 1e-3 && e[0] <= 1e-3, "{e:?}");
    assert!((re[1] + 1.0).abs() <= 1e-3 && im[1].abs() <= 1e-3);
    assert_eq!(r["certificate"], "certified");
    assert!(f(r, "ratio") <= 1.0);
}

#[test]
fn sweep_emits_the_cartesian_product_in_order() {
    let args = ["sweep", "--k", "0.5,1,1.5", "--theta_deg", "-40,-20,0,20,40", "--mesh_h", "0.4", "--fe_order", "1", "--refinements", "0"];
    let (code, out, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    let rows = table(&out);
    assert_eq!(rows.len(), 15);
    let mut i = 0;
    for k in ["0.5", "1", "1.5"] {
        for t in ["-40", "-20", "0", "20", "40"] {
            assert_eq!((rows[i]["k"].as_str(), rows[i]["theta_deg"].as_str()), (k, t));
            i += 1;
        }
    }
}

#[test]
fn grazing_angle_is_rejected() {
    let (code, out, err) = run(&["solve", "--theta_deg", "90"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("theta_deg"), "{err}");
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.cfg");
    std::fs::write(&p, "# comment\nk = 1.0\n\nmesh_h = fine\n").unwrap();
    let (code, _, err) = run(&["solve", "--config", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("line 4"), "{err}");
    std::fs::write(&p, "colour = blue\n").unwrap();
    let (code, _, err) = run(&["bounds", "--config", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("line 1") && err.contains("unknown key"), "{err}");
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("run.cfg");
    let out_path = dir.path().join("out.csv");
    std::fs::write(&p, format!("k = 2\ntheta_deg = 10, 20\noutput = {}\n", out_path.display())).unwrap();
    let (code, out, err) = run(&["bounds", "--config", p.to_str().unwrap(), "--k", "1.0"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.is_empty());
    let rows = table(&std::fs::read_to_string(&out_path).unwrap());
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["k"] == "1"));
}

#[test]
fn bounds_reproduce_the_hand_case() {
    let (code, out, err) = run(&["bounds", "--k", "1", "--theta_deg", "0", "--R", "0.5", "--f_minus", "-1.5"]);
    assert_eq!(code, 0, "{err}");
    let r = &table(&out)[0];
    assert!((f(r, "M") - 73.0).abs() <= 1e-12 * 73.0, "{}", r["M"]);
    assert!((f(r, "C") - 5361f64.sqrt()).abs() <= 1e-12 * 5361f64.sqrt());
    assert_eq!(r["hypotheses_pass"], "true");
}

#[test]
fn bound_scales_with_cos_theta_times_c() {
    let (code, out, _) = run(&["bounds", "--k", "1", "--theta_deg", "0,30,60"]);
    assert_eq!(code, 0);
    for r in table(&out) {
        let c = f(&r, "C");
        let th = f(&r, "theta_deg").to_radians();
        let want = 2.0 * std::f64::consts::TAU.sqrt() * th.cos() * c;
        assert!((f(&r, "bound") / want - 1.0).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn bounds_report_the_transmission_case() {
    let cases = [(2.0, "transmission(1, 1)", "i"), (1.0, "transmission(2, 1)", "ii")];
    for (k, bc, want) in cases {
        let (code, out, err) = run(&["bounds", "--profile", "flat(0)", "--bc", bc, "--k", &k.to_string(), "--theta_deg", "0"]);
        assert_eq!(code, 0, "{err}");
        let r = &table(&out)[0];
        assert_eq!(r["transmission_case"], want, "{r:?}");
        assert!(f(r, "bound") > 0.0);
    }
    // k₊ = k₋ with λ = 1 falls in neither case.
    let (_, out, _) = run(&["bounds", "--bc", "transmission(1, 1)", "--k", "1", "--theta_deg", "0"]);
    let r = &table(&out)[0];
    assert_eq!(r["transmission_case"], "none");
    assert!(r["bound"].is_empty());
}

#[test]
fn wood_point_is_flagged_without_certificate() {
    let (code, out, err) = run(&["solve", "--k", "1", "--theta_deg", "0", "--mesh_h", "0.2", "--refinements", "1"]);
    assert_eq!(code, 0, "{err}");
    let r = &table(&out)[0];
    assert_eq!(r["wood"], "true");
    assert_eq!(r["wood_orders"], "-1;1");
    assert_eq!(r["certificate"], "none");
}

#[test]
fn output_is_deterministic() {
    let args = ["solve", "--profile", "sine(0.3)", "--k", "1,1.5", "--theta_deg", "10", "--mesh_h", "0.3", "--refinements", "1"];
    let strip = |s: String| -> Vec<Row> {
        table(&s).into_iter().map(|mut r| {
            r.remove("wall_ms");
            r
        }).collect()
    };
    let (_, a, _) = run(&args);
    let (_, b, _) = run(&args);
    let (a, b) = (strip(a), strip(b));
    assert_eq!(a.len(), 2);
    for (x, y) in a.iter().zip(&b) {
        for (k, v) in x {
            let w = &y[k];
            match (v.parse::<f64>(), w.parse::<f64>()) {
                (Ok(p), Ok(q)) => assert!((p - q).abs() <= 1e-9 * p.abs().max(q.abs()).max(1e-300), "{k}: {p} vs {q}"),
                _ => assert_eq!(v, w, "{k}"),
            }
        }
    }
}

#[test]
fn verify_all_passes_on_defaults() {
    let (code, out, err) = run(&["verify", "all"]);
    assert_eq!(code, 0, "{err}\n{out}");
    let rows = table(&out);
    for suite in ["oracles", "identities", "inequalities"] {
        assert!(rows.iter().any(|r| r["suite"] == suite), "no {suite} rows");
    }
    assert!(rows.iter().all(|r| r["pass"] != "false"));
}

#[test]
fn perturbed_oracle_fails_the_run() {
    let (code, out, _) = run(&["verify", "oracles", "--perturb-oracle"]);
    assert_eq!(code, 2);
    assert!(table(&out).iter().any(|r| r["pass"] == "false"));
}

#[test]
fn suite_filter_selects_rows() {
    let (code, out, err) = run(&["verify", "identities"]);
    assert_eq!(code, 0, "{err}");
    let rows = table(&out);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["suite"] == "identities"));
    let (code, out, _) = run(&["verify", "inequalities", "--trials", "50"]);
    assert_eq!(code, 0);
    let rows = table(&out);
    assert!(rows.iter().all(|r| r["suite"] == "inequalities"));
    assert!(rows.iter().any(|r| r["params"].contains("trials=50")));
}

#[test]
fn solver_failures_are_recorded_per_row() {
    // dtn_N = 1 cannot hold the propagating orders of k = 3.
    let (code, out, _) = run(&["solve", "--k", "3", "--theta_deg", "0", "--dtn_N", "1", "--mesh_h", "0.4", "--refinements", "0"]);
    assert_eq!(code, 3);
    let r = &table(&out)[0];
    assert_eq!(r["status"], "error");
    assert!(!r["error"].is_empty());
}

#[test]
fn mesh_dump_lists_tagged_blocks() {
    let (code, out, err) = run(&["mesh-dump", "--profile", "sine(0.3)", "--mesh_h", "0.5", "--refinements", "0"]);
    assert_eq!(code, 0, "{err}");
    for block in ["$Vertices", "$Triangles", "$Pairs", "$Tags"] {
        assert!(out.contains(block), "{block}");
    }
}
