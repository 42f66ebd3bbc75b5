use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use super::field::{DiscreteField, ElementGeometry};
use super::solve::CsrMatrix;
use super::space::FeSpace;
use super::trace::TraceModes;
use crate::dtn::{check_truncation, dtn_bilinear_entries, incident_functional_coefficient, DtnVariant, ModeExponents};
use crate::geometry::{BoundaryModel, IncidentWave};
use crate::mesh::{BoundaryTag, Region};
use crate::quadrature::{LineRule, TriangleRule};
use crate::{Error, Result, PERIOD};

/// Which variational problem a system discretises.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    Dirichlet,
    Impedance { lambda: f64 },
    Transmission { k_minus: f64, lambda: f64 },
    /// Adjoint-type problem with source `ū`, quasimomentum `-α`.
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemMeta {
    pub kind: ProblemKind,
    pub wave: IncidentWave,
    pub n_max: usize,
    pub r: f64,
    /// Quasimomentum of the unknown.
    pub alpha: f64,
    /// Some mode sits at cutoff on one of the artificial boundaries.
    pub wood: bool,
}

/// Galerkin system over the free dofs.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub space: Arc<FeSpace>,
    pub matrix: CsrMatrix,
    pub rhs: Vec<Complex64>,
    pub constrained: Vec<bool>,
    /// Row of each dof, `usize::MAX` when constrained.
    pub free: Vec<usize>,
    pub meta: SystemMeta,
    pub top: TraceModes,
    pub bottom: Option<TraceModes>,
}

impl AssembledSystem {
    pub fn n_free(&self) -> usize {
        self.rhs.len()
    }

    /// Expand a free-dof vector into all dofs, constrained ones zero.
    pub fn expand(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.free
            .iter()
            .map(|&r| if r == usize::MAX { Complex64::new(0.0, 0.0) } else { x[r] })
            .collect()
    }

    /// Restrict an all-dof vector to the free dofs.
    pub fn restrict(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); self.n_free()];
        for (d, &r) in self.free.iter().enumerate() {
            if r != usize::MAX {
                out[r] = u[d];
            }
        }
        out
    }
}

struct Dtn<'a> {
    modes: &'a TraceModes,
    /// `E_n`, so that `A_ij += Σ_n E_n c_{nj} conj(c_{ni})`.
    entries: Vec<Complex64>,
}

struct Form<'a> {
    alpha: f64,
    /// `(a, k²)` for Upper and Lower.
    coef: [(f64, f64); 2],
    profile_mass: Option<Complex64>,
    dtn: Vec<Dtn<'a>>,
}

fn free_map(constrained: &[bool]) -> Vec<usize> {
    let mut next = 0;
    constrained
        .iter()
        .map(|&c| {
            if c {
                usize::MAX
            } else {
                next += 1;
                next - 1
            }
        })
        .collect()
}

fn assemble_matrix(space: &FeSpace, form: &Form, free: &[usize], n_free: usize) -> CsrMatrix {
    let mesh = &space.mesh;
    let rule = TriangleRule::assembly();
    let nl = space.local_count();
    let ia = Complex64::new(0.0, form.alpha);
    let mut trip: Vec<(usize, usize, Complex64)> = Vec::with_capacity(mesh.triangles.len() * nl * nl);
    let mut local = [[Complex64::new(0.0, 0.0); 6]; 6];
    for t in 0..mesh.triangles.len() {
        let geo = ElementGeometry::of(mesh, t);
        let (a, kk) = form.coef[match mesh.regions[t] {
            Region::Upper => 0,
            Region::Lower => 1,
        }];
        for row in local.iter_mut() {
            row.fill(Complex64::new(0.0, 0.0));
        }
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let wq = w * 2.0 * geo.area * a;
            let vals = space.basis.values(*l);
            let grads = space.basis.gradients(*l, &geo.grad_l);
            let g: [[Complex64; 2]; 6] = core::array::from_fn(|j| {
                [Complex64::new(grads[j][0], 0.0) + ia * vals[j], Complex64::new(grads[j][1], 0.0)]
            });
            for i in 0..nl {
                for j in 0..nl {
                    let v = g[j][0] * g[i][0].conj() + g[j][1] * g[i][1].conj() - kk * vals[j] * vals[i];
                    local[i][j] += v * wq;
                }
            }
        }
        let dofs = space.dofs(t);
        for i in 0..nl {
            let ri = free[dofs[i]];
            if ri == usize::MAX {
                continue;
            }
            for j in 0..nl {
                let cj = free[dofs[j]];
                if cj != usize::MAX {
                    trip.push((ri, cj, local[i][j]));
                }
            }
        }
    }
    if let Some(c) = form.profile_mass {
        let g = LineRule::gauss(3);
        let polys = space.basis.trace_poly();
        for (t, k, _) in mesh.edge_owners(BoundaryTag::GammaProfile) {
            let tri = mesh.triangles[t];
            let (p, q) = (mesh.vertices[tri[k]], mesh.vertices[tri[(k + 1) % 3]]);
            let len = (q[0] - p[0]).hypot(q[1] - p[1]);
            let (loc, m) = space.basis.edge_locals(k);
            for a in 0..m {
                let ra = free[space.elem_dofs[t][loc[a]]];
                if ra == usize::MAX {
                    continue;
                }
                for b in 0..m {
                    let cb = free[space.elem_dofs[t][loc[b]]];
                    if cb == usize::MAX {
                        continue;
                    }
                    let (pa, pb) = (polys[a], polys[b]);
                    let v: f64 = g.integrate(0.0, 1.0, |s| {
                        (pa[0] + pa[1] * s + pa[2] * s * s) * (pb[0] + pb[1] * s + pb[2] * s * s)
                    });
                    trip.push((ra, cb, c * (v * len)));
                }
            }
        }
    }
    for blk in &form.dtn {
        let dofs = &blk.modes.dofs;
        let nd = dofs.len();
        let mut dense = alloc::vec![Complex64::new(0.0, 0.0); nd * nd];
        for (n, e) in blk.entries.iter().enumerate() {
            let c = &blk.modes.coef[n];
            for i in 0..nd {
                let ci = c[i].conj() * e;
                for j in 0..nd {
                    dense[i * nd + j] += ci * c[j];
                }
            }
        }
        for i in 0..nd {
            let ri = free[dofs[i]];
            if ri == usize::MAX {
                continue;
            }
            for j in 0..nd {
                let cj = free[dofs[j]];
                if cj != usize::MAX {
                    trip.push((ri, cj, dense[i * nd + j]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(n_free, trip)
}

fn wood_any(k: f64, alpha: f64, n_max: usize) -> bool {
    ModeExponents::new(k, alpha, n_max).wood()
}

fn incident_rhs(top: &TraceModes, wave: &IncidentWave, r: f64, free: &[usize], n_free: usize) -> Vec<Complex64> {
    let g = incident_functional_coefficient(wave, r);
    let mut b = alloc::vec![Complex64::new(0.0, 0.0); n_free];
    let row0 = &top.coef[top.n_max];
    for (p, &d) in top.dofs.iter().enumerate() {
        let rr = free[d];
        if rr != usize::MAX {
            b[rr] -= g * row0[p] * PERIOD;
        }
    }
    b
}

fn one_sided_checks(space: &FeSpace) -> Result<()> {
    if space.mesh.is_two_sided() {
        return Err(Error::Mismatch("expected a one-sided mesh".into()));
    }
    Ok(())
}

/// Dirichlet (sound-soft) grating. `n_max` is the DtN truncation order.
pub fn assemble_dirichlet(space: &Arc<FeSpace>, wave: &IncidentWave, n_max: usize) -> Result<AssembledSystem> {
    one_sided_checks(space)?;
    let constrained = space.dofs_on(BoundaryTag::GammaProfile);
    one_sided(space, wave, n_max, constrained, None, ProblemKind::Dirichlet)
}

/// Impedance grating `∂_ν u + iλu = 0` on `Γ`.
pub fn assemble_impedance(space: &Arc<FeSpace>, wave: &IncidentWave, lambda: f64, n_max: usize) -> Result<AssembledSystem> {
    one_sided_checks(space)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("impedance must be positive, got {lambda}")));
    }
    let constrained = alloc::vec![false; space.n_dofs];
    one_sided(
        space,
        wave,
        n_max,
        constrained,
        Some(Complex64::new(0.0, -lambda)),
        ProblemKind::Impedance { lambda },
    )
}

fn one_sided(
    space: &Arc<FeSpace>,
    wave: &IncidentWave,
    n_max: usize,
    constrained: Vec<bool>,
    profile_mass: Option<Complex64>,
    kind: ProblemKind,
) -> Result<AssembledSystem> {
    let (k, alpha) = (wave.k, wave.alpha);
    check_truncation(k, alpha, n_max)?;
    let top = TraceModes::new(space, BoundaryTag::GammaRPlus, n_max)?;
    let r = top.height;
    let free = free_map(&constrained);
    let n_free = free.iter().filter(|r| **r != usize::MAX).count();
    let entries = dtn_bilinear_entries(n_max, k, alpha, DtnVariant::T).into_iter().map(|e| -e).collect();
    let form = Form {
        alpha,
        coef: [(1.0, k * k), (1.0, k * k)],
        profile_mass,
        dtn: alloc::vec![Dtn { modes: &top, entries }],
    };
    let matrix = assemble_matrix(space, &form, &free, n_free);
    let rhs = incident_rhs(&top, wave, r, &free, n_free);
    let meta = SystemMeta { kind, wave: *wave, n_max, r, alpha, wood: wood_any(k, alpha, n_max) };
    Ok(AssembledSystem { space: space.clone(), matrix, rhs, constrained, free, meta, top, bottom: None })
}

/// Penetrable grating: `a = 1`, wavenumber `k` above `Γ`; `a = λ`, `k₋` below.
pub fn assemble_transmission(
    space: &Arc<FeSpace>,
    wave: &IncidentWave,
    k_minus: f64,
    lambda: f64,
    n_max: usize,
) -> Result<AssembledSystem> {
    if !space.mesh.is_two_sided() {
        return Err(Error::Mismatch("transmission needs a two-sided mesh".into()));
    }
    if !(k_minus > 0.0 && lambda > 0.0) {
        return Err(Error::InvalidParameter("k_minus and lambda must be positive".into()));
    }
    let (k, alpha) = (wave.k, wave.alpha);
    check_truncation(k, alpha, n_max)?;
    check_truncation(k_minus, alpha, n_max)?;
    let top = TraceModes::new(space, BoundaryTag::GammaRPlus, n_max)?;
    let bottom = TraceModes::new(space, BoundaryTag::GammaRMinus, n_max)?;
    let r = top.height;
    let constrained = alloc::vec![false; space.n_dofs];
    let free = free_map(&constrained);
    let n_free = space.n_dofs;
    let up = dtn_bilinear_entries(n_max, k, alpha, DtnVariant::TPlus).into_iter().map(|e| -e).collect();
    let down = dtn_bilinear_entries(n_max, k_minus, alpha, DtnVariant::TMinus)
        .into_iter()
        .map(|e| e * lambda)
        .collect();
    let form = Form {
        alpha,
        coef: [(1.0, k * k), (lambda, k_minus * k_minus)],
        profile_mass: None,
        dtn: alloc::vec![Dtn { modes: &top, entries: up }, Dtn { modes: &bottom, entries: down }],
    };
    let matrix = assemble_matrix(space, &form, &free, n_free);
    let rhs = incident_rhs(&top, wave, r, &free, n_free);
    let wood = wood_any(k, alpha, n_max) || wood_any(k_minus, alpha, n_max);
    let meta = SystemMeta { kind: ProblemKind::Transmission { k_minus, lambda }, wave: *wave, n_max, r, alpha, wood };
    Ok(AssembledSystem { space: space.clone(), matrix, rhs, constrained, free, meta, top, bottom: Some(bottom) })
}

/// Auxiliary problem: `Δw + k²w = ū`, `w = 0` on `Γ`, `T̂w = ∂₂w` on `Γ_R`,
/// for `w` with quasimomentum `-α`. `source` is a solved field `u` on the
/// same space.
pub fn assemble_auxiliary(wave: &IncidentWave, source: &DiscreteField, n_max: usize) -> Result<AssembledSystem> {
    let space = &source.space;
    one_sided_checks(space)?;
    if (source.alpha - wave.alpha).abs() > 1e-14 {
        return Err(Error::Mismatch("source quasimomentum differs from the incident wave".into()));
    }
    let (k, alpha) = (wave.k, -wave.alpha);
    check_truncation(k, alpha, n_max)?;
    let top = TraceModes::new(space, BoundaryTag::GammaRPlus, n_max)?;
    let r = top.height;
    let constrained = space.dofs_on(BoundaryTag::GammaProfile);
    let free = free_map(&constrained);
    let n_free = free.iter().filter(|r| **r != usize::MAX).count();
    let entries = dtn_bilinear_entries(n_max, k, alpha, DtnVariant::THat).into_iter().map(|e| -e).collect();
    let form = Form { alpha, coef: [(1.0, k * k), (1.0, k * k)], profile_mass: None, dtn: alloc::vec![Dtn { modes: &top, entries }] };
    let matrix = assemble_matrix(space, &form, &free, n_free);
    let mut rhs = alloc::vec![Complex64::new(0.0, 0.0); n_free];
    let rule = TriangleRule::assembly();
    let mesh = &space.mesh;
    for t in 0..mesh.triangles.len() {
        let geo = ElementGeometry::of(mesh, t);
        let dofs = space.dofs(t);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let (ut, _) = source.local(t, &geo, *l);
            let vals = space.basis.values(*l);
            let s = ut.conj() * (w * 2.0 * geo.area);
            for (i, &d) in dofs.iter().enumerate() {
                let rr = free[d];
                if rr != usize::MAX {
                    rhs[rr] -= s * vals[i];
                }
            }
        }
    }
    let meta = SystemMeta { kind: ProblemKind::Auxiliary, wave: *wave, n_max, r, alpha, wood: wood_any(k, alpha, n_max) };
    Ok(AssembledSystem { space: space.clone(), matrix, rhs, constrained, free, meta, top, bottom: None })
}

/// Assemble the scattering problem selected by `bc`.
pub fn assemble_model(space: &Arc<FeSpace>, wave: &IncidentWave, bc: &BoundaryModel, n_max: usize) -> Result<AssembledSystem> {
    bc.validate(wave.k)?;
    match *bc {
        BoundaryModel::Dirichlet => assemble_dirichlet(space, wave, n_max),
        BoundaryModel::Impedance { lambda } => assemble_impedance(space, wave, lambda, n_max),
        BoundaryModel::Transmission { k_minus, lambda } => assemble_transmission(space, wave, k_minus, lambda, n_max),
    }
}
