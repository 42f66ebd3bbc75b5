use num_complex::Complex64;
use num_traits::Float;

use super::manufactured::ManufacturedField;
use crate::fem::ElementGeometry;
use crate::mesh::{BoundaryTag, PeriodicMesh, Region};
use crate::quadrature::{LineRule, TriangleRule};

/// Both sides of the Rellich identity for a manufactured field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RellichReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / (|lhs| + |rhs| + 1)`.
    pub residual: f64,
}

fn dot(a: [Complex64; 2], b: [f64; 2]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Boundary integrand `(x₂ - c)[-ν₂|∇v|² + ν₂k²|v|² + 2Re(∂₂v̄ ∂_ν v)]`.
fn boundary_density(v: &ManufacturedField, k: f64, c: f64, x: f64, y: f64, nu: [f64; 2]) -> f64 {
    let j = v.jet(x, y);
    let g2 = j.grad[0].norm_sqr() + j.grad[1].norm_sqr();
    (y - c) * (-nu[1] * g2 + nu[1] * k * k * j.v.norm_sqr() + 2.0 * (j.grad[1].conj() * dot(j.grad, nu)).re)
}

/// Evaluate
/// `2Re∫(x₂-c)∂₂v̄(Δv+k²v) - ∫(|∇v|² - k²|v|² - 2|∂₂v|²)`
/// against `(∫_{Γ_R} - ∫_Γ)(x₂-c)[…] ds` with `ν` upward, using `order`-point
/// Gauss rules on every triangle and edge of a one-sided mesh.
pub fn rellich_residual(v: &ManufacturedField, k: f64, c: f64, mesh: &PeriodicMesh, order: usize) -> RellichReport {
    rellich_with(v, k, c, mesh, order, |x, y, nu| boundary_density(v, k, c, x, y, nu))
}

/// Variant for fields vanishing on `Γ`: the profile integrand reduces to
/// `(x₂ - c)ν₂|∂_ν v|²`.
pub fn rellich_residual_vanishing(v: &ManufacturedField, k: f64, c: f64, mesh: &PeriodicMesh, order: usize) -> RellichReport {
    let top = mesh.top;
    rellich_with(v, k, c, mesh, order, |x, y, nu| {
        if (y - top).abs() < 1e-12 {
            boundary_density(v, k, c, x, y, nu)
        } else {
            let j = v.jet(x, y);
            (y - c) * nu[1] * dot(j.grad, nu).norm_sqr()
        }
    })
}

fn rellich_with<B: Fn(f64, f64, [f64; 2]) -> f64>(
    v: &ManufacturedField,
    k: f64,
    c: f64,
    mesh: &PeriodicMesh,
    order: usize,
    density: B,
) -> RellichReport {
    let rule = TriangleRule::of_order(order);
    let mut lhs = 0.0;
    for t in 0..mesh.triangles.len() {
        if mesh.regions[t] != Region::Upper {
            continue;
        }
        let geo = ElementGeometry::of(mesh, t);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let p = geo.point(*l);
            let j = v.jet(p[0], p[1]);
            let defect = j.lap + j.v * (k * k);
            let g2 = j.grad[0].norm_sqr() + j.grad[1].norm_sqr();
            let f = 2.0 * ((p[1] - c) * j.grad[1].conj() * defect).re
                - (g2 - k * k * j.v.norm_sqr() - 2.0 * j.grad[1].norm_sqr());
            lhs += f * w * 2.0 * geo.area;
        }
    }
    let g = LineRule::gauss(order);
    let mut rhs = 0.0;
    for (tag, sign) in [(BoundaryTag::GammaRPlus, 1.0), (BoundaryTag::GammaProfile, -1.0)] {
        for e in mesh.edges_with(tag) {
            let (p, q) = (mesh.vertices[e.a], mesh.vertices[e.b]);
            let len = (q[0] - p[0]).hypot(q[1] - p[1]);
            let mut nu = [-(q[1] - p[1]) / len, (q[0] - p[0]) / len];
            if nu[1] < 0.0 {
                nu = [-nu[0], -nu[1]];
            }
            rhs += sign * len * g.integrate(0.0, 1.0, |s| density(p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1]), nu));
        }
    }
    RellichReport { lhs, rhs, residual: (lhs - rhs).abs() / (lhs.abs() + rhs.abs() + 1.0) }
}
