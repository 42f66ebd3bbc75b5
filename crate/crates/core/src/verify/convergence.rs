use alloc::sync::Arc;
use alloc::vec::Vec;
use num_traits::Float;

use super::manufactured::ManufacturedField;
use super::oracles::flat_dirichlet_oracle;
use crate::dtn::default_truncation;
use crate::fem::{assemble_model, solve, DiscreteField, ElementGeometry, FeSpace, Solution};
use crate::geometry::{BoundaryModel, GratingProfile, IncidentWave, TruncatedDomain};
use crate::mesh::{generate_mesh, refine, PeriodicMesh};
use crate::quadrature::TriangleRule;
use crate::Result;

const ERROR_RULE: usize = 5;

/// Error of one level of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceLevel {
    pub h: f64,
    pub n_dofs: usize,
    pub l2_error: f64,
    /// `(‖∇e‖² + k²‖e‖²)^{1/2}`.
    pub energy_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub order: usize,
    pub levels: Vec<ConvergenceLevel>,
    pub l2_slope: f64,
    pub energy_slope: f64,
    /// Errors fail to decrease at some refinement.
    pub non_monotone: bool,
}

/// Least-squares slope of `log e` against `log h`.
pub fn least_squares_slope(h: &[f64], e: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = h.iter().zip(e).map(|(h, e)| (h.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn study(order: usize, k: f64, levels: Vec<(f64, usize, f64, f64)>) -> ConvergenceStudy {
    let levels: Vec<ConvergenceLevel> = levels
        .into_iter()
        .map(|(h, n_dofs, l2, grad)| ConvergenceLevel { h, n_dofs, l2_error: l2.sqrt(), energy_error: (grad + k * k * l2).sqrt() })
        .collect();
    let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let l2: Vec<f64> = levels.iter().map(|l| l.l2_error).collect();
    let en: Vec<f64> = levels.iter().map(|l| l.energy_error).collect();
    let non_monotone = levels.windows(2).any(|w| !(w[1].l2_error < w[0].l2_error && w[1].energy_error < w[0].energy_error));
    ConvergenceStudy { order, l2_slope: least_squares_slope(&h, &l2), energy_slope: least_squares_slope(&h, &en), levels, non_monotone }
}

/// `(∫|u_h - u|², ∫|∇u_h - ∇u|²)` against a closed-form field.
pub fn error_against(field: &DiscreteField, exact: &ManufacturedField) -> (f64, f64) {
    let mesh = &field.space.mesh;
    let rule = TriangleRule::of_order(ERROR_RULE);
    let (mut l2, mut grad) = (0.0, 0.0);
    for t in 0..mesh.triangles.len() {
        let geo = ElementGeometry::of(mesh, t);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let [x, y] = geo.point(*l);
            let (v, g) = field.physical(t, &geo, *l);
            let j = exact.jet(x, y);
            let wq = w * 2.0 * geo.area;
            l2 += wq * (v - j.v).norm_sqr();
            grad += wq * ((g[0] - j.grad[0]).norm_sqr() + (g[1] - j.grad[1]).norm_sqr());
        }
    }
    (l2, grad)
}

/// Same as [`error_against`] with a reference field on a nested refinement of
/// `field`'s mesh (`depth` uniform refinements deeper).
pub fn error_against_nested(field: &DiscreteField, reference: &DiscreteField, depth: u32) -> (f64, f64) {
    let fine = &reference.space.mesh;
    let coarse = &field.space.mesh;
    let rule = TriangleRule::of_order(ERROR_RULE);
    let stride = 4usize.pow(depth);
    let (mut l2, mut grad) = (0.0, 0.0);
    for t in 0..fine.triangles.len() {
        let geo = ElementGeometry::of(fine, t);
        let parent = t / stride;
        let pgeo = ElementGeometry::of(coarse, parent);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let [x, y] = geo.point(*l);
            let (v, g) = reference.physical(t, &geo, *l);
            let (vc, gc) = field.physical(parent, &pgeo, pgeo.barycentric(x, y));
            let wq = w * 2.0 * geo.area;
            l2 += wq * (v - vc).norm_sqr();
            grad += wq * ((g[0] - gc[0]).norm_sqr() + (g[1] - gc[1]).norm_sqr());
        }
    }
    (l2, grad)
}

/// Solve on `mesh` and its successive uniform refinements.
pub fn solve_hierarchy(
    mesh: PeriodicMesh,
    order: usize,
    wave: &IncidentWave,
    bc: &BoundaryModel,
    n_max: usize,
    levels: usize,
) -> Result<Vec<Solution>> {
    let mut out = Vec::with_capacity(levels);
    let mut mesh = mesh;
    for l in 0..levels {
        if l > 0 {
            mesh = refine(&mesh);
        }
        let space = FeSpace::new(Arc::new(mesh.clone()), order)?;
        out.push(solve(&assemble_model(&space, wave, bc, n_max)?)?);
    }
    Ok(out)
}

/// Flat Dirichlet profile `x₂ = c` under `R`, errors against the exact field.
pub fn flat_dirichlet_convergence(
    wave: &IncidentWave,
    c: f64,
    r: f64,
    order: usize,
    h0: f64,
    levels: usize,
) -> Result<ConvergenceStudy> {
    let domain = TruncatedDomain::one_sided(GratingProfile::flat(c), r)?;
    let n_max = default_truncation(wave.k);
    let oracle = flat_dirichlet_oracle(wave, c, n_max);
    let sols = solve_hierarchy(generate_mesh(&domain, h0)?, order, wave, &BoundaryModel::Dirichlet, n_max, levels)?;
    let rows = sols
        .iter()
        .map(|s| {
            let (l2, grad) = error_against(&s.field, &oracle.field);
            (s.field.space.mesh.max_edge(), s.field.space.n_dofs, l2, grad)
        })
        .collect();
    Ok(study(order, wave.k, rows))
}

/// Study without an oracle: the finest of `levels + 1` nested solves is the reference.
pub fn reference_convergence(
    domain: &TruncatedDomain,
    wave: &IncidentWave,
    bc: &BoundaryModel,
    order: usize,
    h0: f64,
    levels: usize,
) -> Result<ConvergenceStudy> {
    let n_max = default_truncation(wave.k);
    let sols = solve_hierarchy(generate_mesh(domain, h0)?, order, wave, bc, n_max, levels + 1)?;
    let reference = &sols[levels].field;
    let rows = sols[..levels]
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (l2, grad) = error_against_nested(&s.field, reference, (levels - i) as u32);
            (s.field.space.mesh.max_edge(), s.field.space.n_dofs, l2, grad)
        })
        .collect();
    Ok(study(order, wave.k, rows))
}


#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn slope_of_power_law() {
        let h = [0.4, 0.2, 0.1, 0.05];
        let e: Vec<f64> = h.iter().map(|h: &f64| 3.0 * h.powi(3)).collect();
        assert!((least_squares_slope(&h, &e) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn p1_flat_rate() {
        let wave = IncidentWave::from_degrees(1.0, 30.0, Complex64::new(1.0, 0.0)).unwrap();
        let s = flat_dirichlet_convergence(&wave, 0.0, 1.0, 1, 0.3, 3).unwrap();
        assert!(!s.non_monotone);
        assert!((s.l2_slope - 2.0).abs() < 0.3, "{:?}", s);
    }
}
