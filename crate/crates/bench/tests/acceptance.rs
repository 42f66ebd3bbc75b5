//! One line per acceptance criterion, `PASS` or `FAIL`, with the measured
//! worst case next to the pinned tolerance.

use grating_bench::config::{BcSpec, ProfileSpec, RunConfig};
use grating_bench::run::{build_domain, solve_point, Geometry};
use grating_bench::verify::{self, CheckRow, Status};
use grating_core::bounds::{c_tilde_sq, dirichlet_bound, impedance_bound, CertificateStatus};
use grating_core::fem::{assemble_model, solve, Solution};
use grating_core::geometry::{validate_hypotheses, BoundaryModel, IncidentWave, TruncatedDomain};
use grating_core::postprocess::{energy_identity, probe_heights, solution_efficiencies};
use grating_core::verify::{
    auxiliary_bound_check, flat_dirichlet_convergence, mode_amplitude_suite, poincare_suite, trace_inequality_suite,
    AuxiliaryStatus,
};
use grating_core::Complex64;
use rayon::prelude::*;

const KS: [f64; 3] = [0.5, 1.0, 2.0];
const THETAS: [f64; 3] = [0.0, 30.0, 60.0];
const SEED: u64 = 20240917;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn wave(k: f64, th: f64) -> IncidentWave {
    IncidentWave::from_degrees(k, th, one()).unwrap()
}

fn report(id: &str, pass: bool, what: &str, detail: String) {
    println!("{id} {} {what}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn oracle_cfg() -> RunConfig {
    RunConfig { mesh_h: 0.1, fe_order: 2, refinements: 0, ..RunConfig::default() }
}

fn worst(rows: &[CheckRow], check: &str) -> f64 {
    rows.iter().filter(|r| r.check == check).map(|r| r.value).fold(0.0, f64::max)
}

fn failures(rows: &[CheckRow]) -> Vec<String> {
    rows.iter().filter(|r| r.pass != Status::Pass).map(|r| format!("{} [{}] = {:e}", r.check, r.params, r.value)).collect()
}

fn c1_flat_dirichlet_oracle() {
    let cfg = oracle_cfg();
    let grid: Vec<(f64, f64)> = KS.iter().flat_map(|&k| THETAS.iter().map(move |&t| (k, t))).collect();
    let rows: Vec<CheckRow> = grid.par_iter().flat_map_iter(|&(k, t)| verify::flat_dirichlet_checks(&cfg, &wave(k, t), 1.0)).collect();
    let bad = failures(&rows);
    let pass = bad.is_empty() && rows.len() == 3 * grid.len();
    report(
        "C1",
        pass,
        "flat Dirichlet oracle, 9 points, P2, h=0.1",
        format!(
            "worst rel L2 {:.2e}, worst |u0/γ + e^(-2iβc)| {:.2e} (tol 1e-3) {bad:?}",
            worst(&rows, "flat_dirichlet_rel_l2"),
            worst(&rows, "flat_dirichlet_u0")
        ),
    );
    assert!(pass);
}

fn c2_flat_impedance_and_transmission_oracles() {
    let cfg = oracle_cfg();
    let mut jobs = Vec::new();
    for k in KS {
        for t in THETAS {
            for lambda in [0.5, 1.0, 2.0] {
                jobs.push((k, t, lambda, None));
                for km in [0.5, 2.0] {
                    jobs.push((k, t, lambda, Some(km)));
                }
            }
        }
    }
    let rows: Vec<CheckRow> = jobs
        .par_iter()
        .flat_map_iter(|&(k, t, lambda, km)| match km {
            None => verify::flat_impedance_checks(&cfg, &wave(k, t), lambda, 1.0),
            Some(km) => verify::flat_transmission_checks(&cfg, &wave(k, t), verify::admissible_k_minus(k, km), lambda, 1.0),
        })
        .collect();
    let bad = failures(&rows);
    let pass = bad.is_empty();
    let shifted = jobs.iter().filter(|j| j.3 == Some(j.0)).count();
    report(
        "C2",
        pass,
        "flat impedance (27) and transmission (54) oracles",
        format!(
            "{shifted} transmission points with k₋ = k run at k₋ = k(1+1e-3); worst |A-A*| {:.2e}, |r-r*| {:.2e}, |t-t*| {:.2e} (tol 1e-3) {bad:?}",
            worst(&rows, "flat_impedance_A"),
            worst(&rows, "flat_transmission_r"),
            worst(&rows, "flat_transmission_t")
        ),
    );
    assert!(pass);
}

fn hierarchy(profile: ProfileSpec, bc: &BoundaryModel, h: f64, levels: usize, w: &IncidentWave) -> (TruncatedDomain, Vec<Solution>) {
    let cfg = RunConfig { profile, bc: spec_of(bc), ..RunConfig::default() };
    let geo = Geometry::from_domain(build_domain(&cfg).unwrap(), h, 2, levels).unwrap();
    let n = cfg.n_max().max(grating_core::dtn::default_truncation(w.k));
    let sols = geo.spaces.iter().map(|s| solve(&assemble_model(s, w, bc, n).unwrap()).unwrap()).collect();
    (geo.domain, sols)
}

fn spec_of(bc: &BoundaryModel) -> BcSpec {
    match *bc {
        BoundaryModel::Dirichlet => BcSpec::Dirichlet,
        BoundaryModel::Impedance { lambda } => BcSpec::Impedance { lambda },
        BoundaryModel::Transmission { k_minus, lambda } => BcSpec::Transmission { k_minus, lambda },
    }
}

fn c3_energy_balance() {
    let w = wave(1.5, 20.0);
    let cases = [
        (ProfileSpec::Flat(0.0), BoundaryModel::Dirichlet),
        (ProfileSpec::Sine(0.3), BoundaryModel::Dirichlet),
        (ProfileSpec::Flat(0.0), BoundaryModel::Transmission { k_minus: 2.0, lambda: 1.0 }),
        (ProfileSpec::Sine(0.3), BoundaryModel::Transmission { k_minus: 2.0, lambda: 1.0 }),
    ];
    let results: Vec<(String, Vec<f64>)> = cases
        .par_iter()
        .map(|(p, bc)| {
            let (d, sols) = hierarchy(p.clone(), bc, 0.1, 2, &w);
            let pr = &d.profile;
            let heights = probe_heights(pr.gamma_min(), pr.gamma_max(), d.r);
            let defects = sols.iter().map(|s| solution_efficiencies(s, heights).unwrap().balance_defect).collect();
            (format!("{} {}", bc.name(), p), defects)
        })
        .collect();
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, d) in &results {
        let ok0 = d[0] <= 1e-2;
        let rates: Vec<f64> = d.windows(2).map(|p| p[0] / p[1]).collect();
        let ok = ok0 && rates.iter().all(|r| *r >= 4.0);
        pass &= ok;
        lines.push(format!("{name}: defects {:.2e}/{:.2e}/{:.2e} rates {:.1}/{:.1}", d[0], d[1], d[2], rates[0], rates[1]));
    }
    // Dissipation identity of the impedance problem.
    let imp: Vec<(f64, f64)> = [ProfileSpec::Flat(0.0), ProfileSpec::Sine(0.3)]
        .par_iter()
        .flat_map_iter(|p| {
            let (_, sols) = hierarchy(p.clone(), &BoundaryModel::Impedance { lambda: 1.0 }, 0.1, 0, &w);
            sols.into_iter().map(|s| (energy_identity(&s).unwrap().imag_residual, s.residual))
        })
        .collect();
    let imp_ok = imp.iter().all(|(e, r)| *e <= 10.0 * r);
    pass &= imp_ok;
    lines.push(format!("impedance identity residual / solver residual {:?}", imp.iter().map(|(e, r)| e / r).collect::<Vec<_>>()));
    report("C3", pass, "energy balance (defect ≤ 1e-2 at h=0.1, ≥ 4x per refinement)", lines.join("; "));
    assert!(pass);
}

fn c4_convergence_orders() {
    let w = wave(1.0, 30.0);
    let p1 = flat_dirichlet_convergence(&w, 0.0, 1.0, 1, 0.2, 4).unwrap();
    let p2 = flat_dirichlet_convergence(&w, 0.0, 1.0, 2, 0.4, 4).unwrap();
    let pass = (1.8..=2.2).contains(&p1.l2_slope) && (2.7..=3.3).contains(&p2.l2_slope) && !p1.non_monotone && !p2.non_monotone;
    let errs = |s: &grating_core::verify::ConvergenceStudy| s.levels.iter().map(|l| format!("{:.2e}", l.l2_error)).collect::<Vec<_>>().join("/");
    report(
        "C4",
        pass,
        "flat Dirichlet L2 slopes over 4 levels",
        format!(
            "P1 {:.3} in [1.8, 2.2] (errors {}), P2 {:.3} in [2.7, 3.3] (errors {}); energy slopes {:.3}, {:.3}",
            p1.l2_slope,
            errs(&p1),
            p2.l2_slope,
            errs(&p2),
            p1.energy_slope,
            p2.energy_slope
        ),
    );
    assert!(pass);
}

fn c5_bound_certification() {
    let thetas = [0.0, 30.0, -30.0, 60.0, -60.0, 80.0, -80.0];
    let mut jobs: Vec<(ProfileSpec, BoundaryModel, f64)> = Vec::new();
    for p in [ProfileSpec::Flat(0.0), ProfileSpec::Sine(0.3)] {
        for k in KS {
            jobs.push((p.clone(), BoundaryModel::Dirichlet, k));
            for lambda in [0.5, 1.0, 2.0] {
                jobs.push((p.clone(), BoundaryModel::Impedance { lambda }, k));
            }
        }
        jobs.push((p.clone(), BoundaryModel::Transmission { k_minus: 1.0, lambda: 1.0 }, 2.0));
        jobs.push((p.clone(), BoundaryModel::Transmission { k_minus: 2.0, lambda: 1.0 }, 1.0));
    }
    let geos: Vec<Geometry> = jobs
        .iter()
        .map(|(p, bc, _)| {
            let cfg = RunConfig { profile: p.clone(), bc: spec_of(bc), mesh_h: 0.2, refinements: 1, ..RunConfig::default() };
            Geometry::new(&cfg).unwrap()
        })
        .collect();
    let points: Vec<(usize, f64)> = (0..jobs.len()).flat_map(|j| thetas.iter().map(move |&t| (j, t))).collect();
    let out: Vec<(usize, f64, Result<CertificateStatus, String>)> = points
        .par_iter()
        .map(|&(j, t)| {
            let (_, bc, k) = &jobs[j];
            let w = wave(*k, t);
            let n = grating_core::dtn::default_truncation(k.max(bc_k_minus(bc)));
            let r = solve_point(&geos[j], bc, &w, n).map(|d| d.report.status).map_err(|e| e.to_string());
            (j, t, r)
        })
        .collect();
    let (mut certified, mut indeterminate, mut none, mut worst, mut violations, mut errors) = (0, 0, 0, 0.0f64, Vec::new(), Vec::new());
    let mut per_model: std::collections::BTreeMap<String, (usize, f64)> = Default::default();
    let mut reasons: std::collections::BTreeMap<String, usize> = Default::default();
    for (j, t, r) in &out {
        let (p, bc, k) = &jobs[*j];
        match r {
            Ok(CertificateStatus::Certified { ratio, pass }) => {
                certified += 1;
                worst = worst.max(*ratio);
                let e = per_model.entry(format!("{} {p}", bc.name())).or_insert((0, 0.0));
                e.0 += 1;
                e.1 = e.1.max(*ratio);
                if !pass {
                    violations.push(format!("{} {p} k={k} θ={t} ratio={ratio}", bc.name()));
                }
            }
            Ok(CertificateStatus::Indeterminate { .. }) => indeterminate += 1,
            Ok(CertificateStatus::NoCertificate { reason }) => {
                none += 1;
                *reasons.entry(reason.clone()).or_insert(0) += 1;
            }
            Err(e) => errors.push(format!("{} {p} k={k} θ={t}: {e}", bc.name())),
        }
    }
    let pass = violations.is_empty() && errors.is_empty() && certified > 0;
    report(
        "C5",
        pass,
        "theorem bounds on converged solves",
        format!(
            "{} points: {certified} certified (worst ratio {worst:.3e}), {indeterminate} unconverged, {none} without certificate {reasons:?}; per model (count, worst) {per_model:?}; violations {violations:?}; errors {errors:?}",
            out.len()
        ),
    );
    assert!(pass);
}

fn bc_k_minus(bc: &BoundaryModel) -> f64 {
    match *bc {
        BoundaryModel::Transmission { k_minus, .. } => k_minus,
        _ => 0.0,
    }
}

fn c6_constant_arithmetic() {
    let d = dirichlet_bound(1.0, 0.0, one(), 0.5, -1.5).unwrap();
    let hand = (d.m - 73.0).abs() / 73.0 <= 1e-12 && (d.c - 5361f64.sqrt()).abs() / 5361f64.sqrt() <= 1e-12;
    let mut worst_c: f64 = 0.0;
    let mut worst_cs: f64 = 0.0;
    for k in [0.3, 0.5, 1.0, 2.0, 3.7] {
        for th in [0.0f64, 0.4, 1.2, -0.9] {
            for (r, fm) in [(1.0, -1.0), (2.5, -0.5), (3.0, -4.0)] {
                let b = dirichlet_bound(k, th, one(), r, fm).unwrap();
                let dd: f64 = r - fm;
                let want = k * b.m * b.m + 4.0 * k.powi(4) * dd.powi(3);
                worst_c = worst_c.max((b.c * b.c - want).abs() / want);
                for lambda in [0.5, 1.0, 2.0] {
                    for l in [0.0, 0.3, 2.0] {
                        let ib = impedance_bound(k, th, one(), lambda, r, fm, l).unwrap();
                        let ct2 = c_tilde_sq(k, r, fm, l).unwrap();
                        let want = k * (1.0 + 4.0 * k * k * ct2 / lambda).powi(2) + 8.0 * k.powi(4) * ct2;
                        worst_cs = worst_cs.max((ib.c_star * ib.c_star - want).abs() / want);
                    }
                }
            }
        }
    }
    let pass = hand && worst_c <= 1e-14 && worst_cs <= 1e-14;
    report(
        "C6",
        pass,
        "constant arithmetic",
        format!("M={} C={} (hand 73, √5361); identity residuals C² {worst_c:.1e}, C*² {worst_cs:.1e} (tol 1e-14)", d.m, d.c),
    );
    assert!(pass);
}

fn c7_identity_and_inequality_suites() {
    let rellich = verify::rellich_checks();
    let rellich_ok = !verify::any_failed(&rellich);
    let worst_rellich = rellich.iter().filter(|r| r.check.starts_with("rellich_") && r.tolerance == 1e-10).map(|r| r.value).fold(0.0, f64::max);
    let suites = [trace_inequality_suite(1000, SEED), poincare_suite(1000, SEED), mode_amplitude_suite(1000, SEED)];
    let suites_ok = suites.iter().all(|s| s.pass() && s.trials == 1000);

    let grid: Vec<(f64, f64)> = [0.5, 1.0, 1.5].iter().flat_map(|&k| [10.0, 30.0, 50.0].map(move |t| (k, t))).collect();
    let aux: Vec<(f64, f64, Result<(f64, AuxiliaryStatus), String>)> = grid
        .par_iter()
        .map(|&(k, t)| {
            let w = wave(k, t);
            let bc = BoundaryModel::Impedance { lambda: 1.0 };
            let (d, sols) = hierarchy(ProfileSpec::Flat(0.0), &bc, 0.2, 1, &w);
            assert!(validate_hypotheses(&d, &bc, k).all_pass());
            (k, t, auxiliary_bound_check(&d, &sols).map(|r| (r.ratio, r.status)).map_err(|e| e.to_string()))
        })
        .collect();
    let aux_ok = aux.iter().all(|(_, _, r)| matches!(r, Ok((ratio, AuxiliaryStatus::Pass)) if *ratio <= 1.0));
    let aux_worst = aux.iter().filter_map(|(_, _, r)| r.as_ref().ok().map(|x| x.0)).fold(0.0, f64::max);
    let pass = rellich_ok && suites_ok && aux_ok;
    report(
        "C7",
        pass,
        "Rellich identity, randomized inequality suites, auxiliary estimate",
        format!(
            "Rellich worst {worst_rellich:.1e} (tol 1e-10); suites {}; auxiliary worst ratio {aux_worst:.3e} over 9 points {}",
            suites.iter().map(|s| format!("{} worst margin {:.3e} failures {}", s.name, s.worst_relative, s.failures)).collect::<Vec<_>>().join(", "),
            if aux_ok { String::new() } else { format!("{aux:?}") }
        ),
    );
    assert!(pass);
}

fn c8_wood_anomaly() {
    let cfg = RunConfig { k: vec![1.0], theta_deg: vec![0.0], mesh_h: 0.2, refinements: 1, ..RunConfig::default() };
    let geo = Geometry::new(&cfg).unwrap();
    let rows = grating_bench::run::sweep(&cfg, &geo);
    let r = &rows[0];
    let (flag, cert) = match &r.outcome {
        Ok(d) => (d.wood && d.wood_orders == vec![-1, 1], matches!(d.report.status, CertificateStatus::NoCertificate { .. })),
        Err(_) => (false, true),
    };
    let pass = flag && cert;
    report(
        "C8",
        pass,
        "Wood anomaly at k=1, θ=0",
        format!("solve {}, wood flag {flag}, certificate withheld {cert}", if r.outcome.is_ok() { "completed" } else { "failed" }),
    );
    assert!(pass);
}

/// Runs without the libtest harness so the criterion lines always reach
/// stdout. A failing criterion panics after printing its line; the others
/// still run.
fn main() {
    let criteria: [(&str, fn()); 8] = [
        ("C1", c1_flat_dirichlet_oracle),
        ("C2", c2_flat_impedance_and_transmission_oracles),
        ("C3", c3_energy_balance),
        ("C4", c4_convergence_orders),
        ("C5", c5_bound_certification),
        ("C6", c6_constant_arithmetic),
        ("C7", c7_identity_and_inequality_suites),
        ("C8", c8_wood_anomaly),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (id, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| id.eq_ignore_ascii_case(x)) {
            continue;
        }
        if std::panic::catch_unwind(f).is_err() {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all selected criteria pass");
}
