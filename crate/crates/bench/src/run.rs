//! Solve, bounds and mesh commands over a parameter sweep.

use std::sync::Arc;
use std::time::Instant;

use grating_core::bounds::{certify, dirichlet_bound, impedance_bound, transmission_bound, CertificateStatus, StabilityReport};
use grating_core::dtn::RayleighSpectrum;
use grating_core::fem::{assemble_model, solve, FeSpace, Solution};
use grating_core::geometry::{
    validate_hypotheses, BoundaryModel, GratingProfile, HypothesisReport, IncidentWave, TransmissionCase, TruncatedDomain,
};
use grating_core::mesh::{generate_mesh, refine, BoundaryTag, PeriodicMesh};
use grating_core::postprocess::{
    efficiencies, energy_identity, norm_weighted, norm_xr, probe_heights, rayleigh_coefficients, solution_efficiencies,
    EfficiencyTable,
};
use rayon::prelude::*;

use crate::config::{BcSpec, ConfigError, RunConfig};

/// Truncated domain and the mesh hierarchy shared by every sweep point.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub domain: TruncatedDomain,
    /// Coarse to fine, `refinements + 1` levels.
    pub spaces: Vec<Arc<FeSpace>>,
}

/// Default `R`: 1.5 above the profile for one-sided problems, 0.5 beyond the
/// farther of `f±` for transmission.
pub fn default_r(profile: &GratingProfile, two_sided: bool) -> f64 {
    if two_sided {
        profile.f_plus().max(-profile.f_minus()) + 0.5
    } else {
        profile.gamma_max() + 1.5
    }
}

pub fn build_domain(cfg: &RunConfig) -> Result<TruncatedDomain, ConfigError> {
    let core = |e: grating_core::Error| ConfigError::Invalid(e.to_string());
    let mut p = GratingProfile::build(cfg.profile.shape()?, cfg.n_samples).map_err(core)?;
    if let Some(f) = cfg.f_minus {
        p = p.with_f_minus(f).map_err(core)?;
    }
    if let Some(f) = cfg.f_plus {
        p = p.with_f_plus(f).map_err(core)?;
    }
    if let Some(l) = cfg.lipschitz {
        p = p.with_lipschitz(l).map_err(core)?;
    }
    let two = matches!(cfg.bc, BcSpec::Transmission { .. });
    let r = cfg.r.unwrap_or_else(|| default_r(&p, two));
    let d = if two { TruncatedDomain::two_sided(p, r) } else { TruncatedDomain::one_sided(p, r) };
    d.map_err(core)
}

impl Geometry {
    pub fn new(cfg: &RunConfig) -> Result<Self, ConfigError> {
        let domain = build_domain(cfg)?;
        Self::from_domain(domain, cfg.mesh_h, cfg.fe_order, cfg.refinements)
    }

    pub fn from_domain(domain: TruncatedDomain, h: f64, order: usize, refinements: usize) -> Result<Self, ConfigError> {
        let core = |e: grating_core::Error| ConfigError::Invalid(e.to_string());
        let mut mesh = generate_mesh(&domain, h).map_err(core)?;
        let mut spaces = Vec::with_capacity(refinements + 1);
        for l in 0..=refinements {
            if l > 0 {
                mesh = refine(&mesh);
            }
            spaces.push(FeSpace::new(Arc::new(mesh.clone()), order).map_err(core)?);
        }
        Ok(Self { domain, spaces })
    }

    pub fn finest(&self) -> &Arc<FeSpace> {
        self.spaces.last().expect("at least one level")
    }
}

/// Constants of the theorem matching the boundary model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundBreakdown {
    pub bound: Option<f64>,
    pub m: Option<f64>,
    pub c: Option<f64>,
    pub c_tilde: Option<f64>,
    pub c_star: Option<f64>,
    pub case: Option<TransmissionCase>,
    pub c_ts: Option<f64>,
    pub c_main: Option<f64>,
    pub note: String,
}

pub fn bound_breakdown(domain: &TruncatedDomain, bc: &BoundaryModel, wave: &IncidentWave) -> BoundBreakdown {
    let p = &domain.profile;
    let (r, fm, l) = (domain.r, p.f_minus(), p.lipschitz_l());
    let mut b = BoundBreakdown::default();
    match *bc {
        BoundaryModel::Dirichlet => match dirichlet_bound(wave.k, wave.theta, wave.gamma, r, fm) {
            Ok(d) => {
                b.bound = Some(d.bound);
                b.m = Some(d.m);
                b.c = Some(d.c);
            }
            Err(e) => b.note = e.to_string(),
        },
        BoundaryModel::Impedance { lambda } => match impedance_bound(wave.k, wave.theta, wave.gamma, lambda, r, fm, l) {
            Ok(d) => {
                b.bound = Some(d.bound);
                b.c_tilde = Some(d.c_tilde());
                b.c_star = Some(d.c_star);
            }
            Err(e) => b.note = e.to_string(),
        },
        BoundaryModel::Transmission { k_minus, lambda } => {
            match transmission_bound(wave.k, k_minus, lambda, wave.theta, wave.gamma, r, fm, p.f_plus(), l) {
                Some(d) => {
                    b.bound = Some(d.bound);
                    b.case = Some(d.case);
                    b.c_ts = Some(d.c_ts);
                    b.c_main = Some(d.c_main);
                }
                None => b.note = "neither transmission case applies".into(),
            }
        }
    }
    b
}

/// Norm bounded by the theorem for `bc`.
pub fn theorem_norm(sol: &Solution, bc: &BoundaryModel) -> f64 {
    match *bc {
        BoundaryModel::Transmission { k_minus, lambda } => norm_weighted(&sol.field, sol.meta.wave.k, k_minus, lambda),
        _ => norm_xr(&sol.field, sol.meta.wave.k),
    }
}

/// Everything reported for one `(k, θ)` point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub k: f64,
    pub theta_deg: f64,
    pub outcome: Result<PointData, String>,
    pub hypotheses: HypothesisReport,
    pub bounds: BoundBreakdown,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct PointData {
    pub alpha: f64,
    pub beta: f64,
    pub n_dofs: usize,
    pub residual: f64,
    pub wood: bool,
    pub wood_orders: Vec<i64>,
    /// Scattered spectra on `Γ_R` (and `Γ_{-R}`).
    pub upper: RayleighSpectrum,
    pub lower: Option<RayleighSpectrum>,
    /// Efficiencies at the probe heights and on `±R`.
    pub probe: EfficiencyTable,
    pub at_r: EfficiencyTable,
    pub energy_re: f64,
    pub energy_im: f64,
    /// Norm the bound controls, per mesh level.
    pub norms: Vec<f64>,
    pub report: StabilityReport,
}

impl PointResult {
    pub fn failed(&self) -> bool {
        self.outcome.is_err()
    }

    pub fn data(&self) -> Option<&PointData> {
        self.outcome.as_ref().ok()
    }
}

pub fn solve_point(geo: &Geometry, bc: &BoundaryModel, wave: &IncidentWave, n_max: usize) -> Result<PointData, grating_core::Error> {
    let mut sols = Vec::with_capacity(geo.spaces.len());
    for s in &geo.spaces {
        sols.push(solve(&assemble_model(s, wave, bc, n_max)?)?);
    }
    let norms: Vec<f64> = sols.iter().map(|s| theorem_norm(s, bc)).collect();
    let sol = sols.pop().expect("at least one level");
    let p = &geo.domain.profile;
    let r = geo.domain.r;
    let probe = solution_efficiencies(&sol, probe_heights(p.gamma_min(), p.gamma_max(), r))?;
    let total_up = rayleigh_coefficients(&sol.field, r, n_max, wave.k)?;
    let (lower_total, lambda) = match *bc {
        BoundaryModel::Transmission { k_minus, lambda } => {
            (Some(rayleigh_coefficients(&sol.field, -r, n_max, k_minus)?), lambda)
        }
        _ => (None, 1.0),
    };
    let at_r = efficiencies(&total_up, lower_total.as_ref().map(|l| (l, lambda)), wave)?;
    let e = energy_identity(&sol)?;
    let upper = grating_core::postprocess::scattered_upper(&total_up, wave);
    let lower = lower_total.as_ref().map(grating_core::postprocess::scattered_lower);
    let mut wood_orders = upper.exponents().wood_orders();
    if let Some(l) = &lower {
        wood_orders.extend(l.exponents().wood_orders().into_iter().filter(|n| !wood_orders.contains(n)).collect::<Vec<_>>());
    }
    let hyp = validate_hypotheses(&geo.domain, bc, wave.k);
    let bound = bound_breakdown(&geo.domain, bc, wave).bound;
    let report = certify(&norms, bound, hyp, sol.meta.wood);
    Ok(PointData {
        alpha: wave.alpha,
        beta: wave.beta,
        n_dofs: sol.field.space.n_dofs,
        residual: sol.residual,
        wood: sol.meta.wood,
        wood_orders,
        upper,
        lower,
        probe,
        at_r,
        energy_re: e.real_residual,
        energy_im: e.imag_residual,
        norms,
        report,
    })
}

fn points(cfg: &RunConfig) -> Vec<(f64, f64)> {
    cfg.k.iter().flat_map(|&k| cfg.theta_deg.iter().map(move |&t| (k, t))).collect()
}

/// One result per `(k, θ)` in input order, solved in parallel.
pub fn sweep(cfg: &RunConfig, geo: &Geometry) -> Vec<PointResult> {
    let bc = cfg.bc.model();
    let n_max = cfg.n_max();
    points(cfg)
        .into_par_iter()
        .map(|(k, th)| {
            let start = Instant::now();
            let wave = IncidentWave::from_degrees(k, th, cfg.gamma);
            let (outcome, hypotheses, bounds) = match wave {
                Ok(w) => {
                    let out = bc.validate(k).and_then(|_| solve_point(geo, &bc, &w, n_max)).map_err(|e| e.to_string());
                    (out, validate_hypotheses(&geo.domain, &bc, k), bound_breakdown(&geo.domain, &bc, &w))
                }
                Err(e) => (Err(e.to_string()), HypothesisReport::default(), BoundBreakdown::default()),
            };
            PointResult { k, theta_deg: th, outcome, hypotheses, bounds, wall_ms: start.elapsed().as_secs_f64() * 1e3 }
        })
        .collect()
}

/// Constants per `(k, θ)` without solving.
#[derive(Debug, Clone)]
pub struct BoundsRow {
    pub k: f64,
    pub theta_deg: f64,
    pub hypotheses: HypothesisReport,
    pub bounds: BoundBreakdown,
    pub error: Option<String>,
}

pub fn bounds_table(cfg: &RunConfig, domain: &TruncatedDomain) -> Vec<BoundsRow> {
    let bc = cfg.bc.model();
    points(cfg)
        .into_iter()
        .map(|(k, th)| match IncidentWave::from_degrees(k, th, cfg.gamma) {
            Ok(w) => BoundsRow {
                k,
                theta_deg: th,
                hypotheses: validate_hypotheses(domain, &bc, k),
                bounds: bound_breakdown(domain, &bc, &w),
                error: bc.validate(k).err().map(|e| e.to_string()),
            },
            Err(e) => BoundsRow {
                k,
                theta_deg: th,
                hypotheses: HypothesisReport::default(),
                bounds: BoundBreakdown::default(),
                error: Some(e.to_string()),
            },
        })
        .collect()
}

pub fn certificate_label(status: &CertificateStatus) -> &'static str {
    match status {
        CertificateStatus::Certified { pass: true, .. } => "certified",
        CertificateStatus::Certified { pass: false, .. } => "violated",
        CertificateStatus::Indeterminate { .. } => "indeterminate",
        CertificateStatus::NoCertificate { .. } => "none",
    }
}

/// Plain-text dump with `$Vertices`, `$Triangles`, `$Pairs` and `$Tags` blocks.
pub fn mesh_dump(mesh: &PeriodicMesh) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(s, "# grating-bench mesh v1");
    let _ = writeln!(s, "$Vertices {}", mesh.vertices.len());
    for (i, v) in mesh.vertices.iter().enumerate() {
        let _ = writeln!(s, "{i} {:.17e} {:.17e}", v[0], v[1]);
    }
    let _ = writeln!(s, "$Triangles {}", mesh.triangles.len());
    for (i, (t, r)) in mesh.triangles.iter().zip(&mesh.regions).enumerate() {
        let reg = match r {
            grating_core::mesh::Region::Upper => "upper",
            grating_core::mesh::Region::Lower => "lower",
        };
        let _ = writeln!(s, "{i} {} {} {} {reg}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "$Pairs {}", mesh.pairs.len());
    for (r, l) in &mesh.pairs {
        let _ = writeln!(s, "{r} {l}");
    }
    let _ = writeln!(s, "$Tags {}", mesh.edges.len());
    for e in &mesh.edges {
        let _ = writeln!(s, "{} {} {}", e.a, e.b, e.tag.name());
    }
    s
}

pub fn tag_counts(mesh: &PeriodicMesh) -> Vec<(BoundaryTag, usize)> {
    [
        BoundaryTag::GammaProfile,
        BoundaryTag::GammaRPlus,
        BoundaryTag::GammaRMinus,
        BoundaryTag::PeriodicLeft,
        BoundaryTag::PeriodicRight,
    ]
    .into_iter()
    .map(|t| (t, mesh.edges_with(t).count()))
    .collect()
}
