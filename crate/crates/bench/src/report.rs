//! CSV emission. Every table starts with a `# grating-bench v1` comment line,
//! complex values are split into `_re`/`_im` columns and per-order lists are
//! `;`-joined inside one column.

use std::io::Write;

use grating_core::geometry::{TransmissionCase, TruncatedDomain};

use crate::config::{BcSpec, RunConfig};
use crate::run::{certificate_label, BoundsRow, PointResult};
use crate::verify::CheckRow;

pub const VERSION_LINE: &str = "# grating-bench v1";

/// Shortest round-trip form, in exponent notation outside `[1e-3, 1e7)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-3..1e7).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn join<T, F: Fn(&T) -> String>(v: &[T], f: F) -> String {
    v.iter().map(f).collect::<Vec<_>>().join(";")
}

fn case_name(c: Option<TransmissionCase>) -> &'static str {
    match c {
        Some(TransmissionCase::I) => "i",
        Some(TransmissionCase::II) => "ii",
        None => "none",
    }
}

const ECHO: &[&str] = &[
    "profile",
    "n_samples",
    "bc",
    "k_minus",
    "lambda",
    "k",
    "theta_deg",
    "gamma_re",
    "gamma_im",
    "R",
    "f_minus",
    "f_plus",
    "lipschitz_L",
    "mesh_h",
    "fe_order",
    "dtn_N",
    "refinements",
];

fn echo(cfg: &RunConfig, domain: &TruncatedDomain, k: f64, theta: f64) -> Vec<String> {
    let (km, lam) = match cfg.bc {
        BcSpec::Dirichlet => (None, None),
        BcSpec::Impedance { lambda } => (None, Some(lambda)),
        BcSpec::Transmission { k_minus, lambda } => (Some(k_minus), Some(lambda)),
    };
    let p = &domain.profile;
    vec![
        cfg.profile.to_string(),
        cfg.n_samples.to_string(),
        match cfg.bc {
            BcSpec::Dirichlet => "dirichlet",
            BcSpec::Impedance { .. } => "impedance",
            BcSpec::Transmission { .. } => "transmission",
        }
        .into(),
        opt(km),
        opt(lam),
        num(k),
        num(theta),
        num(cfg.gamma.re),
        num(cfg.gamma.im),
        num(domain.r),
        num(p.f_minus()),
        num(p.f_plus()),
        num(p.lipschitz_l()),
        num(cfg.mesh_h),
        cfg.fe_order.to_string(),
        cfg.n_max().to_string(),
        cfg.refinements.to_string(),
    ]
}

const CONSTANTS: &[&str] = &["M", "C", "C_tilde", "C_star", "transmission_case", "C_TS", "C_main", "bound_note"];

fn constants(b: &crate::run::BoundBreakdown) -> Vec<String> {
    vec![
        opt(b.m),
        opt(b.c),
        opt(b.c_tilde),
        opt(b.c_star),
        if b.c_main.is_some() || !b.note.is_empty() { case_name(b.case).into() } else { String::new() },
        opt(b.c_ts),
        opt(b.c_main),
        b.note.clone(),
    ]
}

const SOLVE: &[&str] = &[
    "status",
    "error",
    "alpha",
    "beta",
    "n_dofs",
    "residual",
    "wood",
    "wood_orders",
    "prop_orders",
    "r_re",
    "r_im",
    "e_r",
    "t_orders",
    "t_re",
    "t_im",
    "e_t",
    "efficiency_total",
    "balance_defect",
    "balance_defect_R",
    "energy_re_residual",
    "energy_im_residual",
    "norm",
    "norm_change",
    "bound",
    "ratio",
    "certificate",
    "certificate_note",
    "hypotheses_pass",
    "hypothesis_failures",
];

pub fn solve_header() -> Vec<&'static str> {
    let mut h: Vec<&str> = ECHO.to_vec();
    h.extend_from_slice(SOLVE);
    h.extend_from_slice(CONSTANTS);
    h.push("wall_ms");
    h
}

fn solve_row(cfg: &RunConfig, domain: &TruncatedDomain, p: &PointResult) -> Vec<String> {
    let mut row = echo(cfg, domain, p.k, p.theta_deg);
    let hyp_pass = p.hypotheses.all_pass().to_string();
    let hyp_fail = p.hypotheses.failures();
    match &p.outcome {
        Err(e) => {
            row.push("error".into());
            row.push(e.clone());
            row.extend(std::iter::repeat_n(String::new(), SOLVE.len() - 4));
            row.push(hyp_pass);
            row.push(hyp_fail);
        }
        Ok(d) => {
            let refl = &d.probe.reflected;
            let tran = &d.probe.transmitted;
            let (note, change) = match &d.report.status {
                grating_core::bounds::CertificateStatus::NoCertificate { reason } => (reason.clone(), None),
                grating_core::bounds::CertificateStatus::Indeterminate { change } => (String::new(), Some(*change)),
                _ => (String::new(), None),
            };
            let change = change.or_else(|| {
                let n = &d.norms;
                (n.len() >= 2).then(|| (n[n.len() - 1] - n[n.len() - 2]).abs() / n[n.len() - 1])
            });
            let upper = &d.upper;
            let lower = d.lower.as_ref();
            row.extend([
                "ok".into(),
                String::new(),
                num(d.alpha),
                num(d.beta),
                d.n_dofs.to_string(),
                num(d.residual),
                d.wood.to_string(),
                join(&d.wood_orders, |n| n.to_string()),
                join(refl, |o| o.n.to_string()),
                join(refl, |o| num(upper.get(o.n).re)),
                join(refl, |o| num(upper.get(o.n).im)),
                join(refl, |o| num(o.efficiency)),
                join(tran, |o| o.n.to_string()),
                join(tran, |o| num(lower.map(|l| l.get(o.n).re).unwrap_or(f64::NAN))),
                join(tran, |o| num(lower.map(|l| l.get(o.n).im).unwrap_or(f64::NAN))),
                join(tran, |o| num(o.efficiency)),
                num(d.probe.total()),
                num(d.probe.balance_defect),
                num(d.at_r.balance_defect),
                num(d.energy_re),
                num(d.energy_im),
                num(d.report.computed_norm),
                opt(change),
                opt(d.report.bound),
                opt(d.report.ratio),
                certificate_label(&d.report.status).into(),
                note,
                hyp_pass,
                hyp_fail,
            ]);
        }
    }
    row.extend(constants(&p.bounds));
    row.push(format!("{:.1}", p.wall_ms));
    row
}

pub const BOUNDS_COLUMNS: &[&str] = &["bound", "hypotheses_pass", "hypothesis_failures", "error"];

pub fn bounds_header() -> Vec<&'static str> {
    let mut h: Vec<&str> = ECHO.to_vec();
    h.extend_from_slice(BOUNDS_COLUMNS);
    h.extend_from_slice(CONSTANTS);
    h
}

fn bounds_row(cfg: &RunConfig, domain: &TruncatedDomain, b: &BoundsRow) -> Vec<String> {
    let mut row = echo(cfg, domain, b.k, b.theta_deg);
    row.extend([
        opt(b.bounds.bound),
        b.hypotheses.all_pass().to_string(),
        b.hypotheses.failures(),
        b.error.clone().unwrap_or_default(),
    ]);
    row.extend(constants(&b.bounds));
    row
}

pub const CHECK_COLUMNS: &[&str] = &["suite", "check", "params", "value", "tolerance", "pass"];

fn write_table<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> csv::Result<()> {
    let mut out = out;
    writeln!(out, "{VERSION_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_solve<W: Write>(out: W, cfg: &RunConfig, domain: &TruncatedDomain, rows: &[PointResult]) -> csv::Result<()> {
    write_table(out, &solve_header(), rows.iter().map(|p| solve_row(cfg, domain, p)))
}

pub fn write_bounds<W: Write>(out: W, cfg: &RunConfig, domain: &TruncatedDomain, rows: &[BoundsRow]) -> csv::Result<()> {
    write_table(out, &bounds_header(), rows.iter().map(|b| bounds_row(cfg, domain, b)))
}

pub fn write_checks<W: Write>(out: W, rows: &[CheckRow]) -> csv::Result<()> {
    write_table(
        out,
        CHECK_COLUMNS,
        rows.iter().map(|c| {
            vec![c.suite.into(), c.check.clone(), c.params.clone(), num(c.value), num(c.tolerance), c.pass.to_string()]
        }),
    )
}
