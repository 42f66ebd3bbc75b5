use alloc::sync::Arc;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::space::FeSpace;
use crate::mesh::PeriodicMesh;

/// Affine data of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub p: [[f64; 2]; 3],
    pub area: f64,
    /// Gradients of the barycentric coordinates.
    pub grad_l: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn of(mesh: &PeriodicMesh, t: usize) -> Self {
        let tri = mesh.triangles[t];
        let p = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
        let two_a = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let grad_l = [
            [(p[1][1] - p[2][1]) / two_a, (p[2][0] - p[1][0]) / two_a],
            [(p[2][1] - p[0][1]) / two_a, (p[0][0] - p[2][0]) / two_a],
            [(p[0][1] - p[1][1]) / two_a, (p[1][0] - p[0][0]) / two_a],
        ];
        Self { p, area: 0.5 * two_a, grad_l }
    }

    pub fn point(&self, l: [f64; 3]) -> [f64; 2] {
        [
            l[0] * self.p[0][0] + l[1] * self.p[1][0] + l[2] * self.p[2][0],
            l[0] * self.p[0][1] + l[1] * self.p[1][1] + l[2] * self.p[2][1],
        ]
    }

    pub fn barycentric(&self, x: f64, y: f64) -> [f64; 3] {
        let d = [x - self.p[0][0], y - self.p[0][1]];
        let l1 = self.grad_l[1][0] * d[0] + self.grad_l[1][1] * d[1];
        let l2 = self.grad_l[2][0] * d[0] + self.grad_l[2][1] * d[1];
        [1.0 - l1 - l2, l1, l2]
    }
}

/// Finite-element coefficients of the periodic factor `ũ`; the physical
/// field is `u = e^{iαx₁}ũ` with `alpha` the quasimomentum.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub space: Arc<FeSpace>,
    pub dofs: Vec<Complex64>,
    pub alpha: f64,
}

impl DiscreteField {
    pub fn zeros(space: Arc<FeSpace>, alpha: f64) -> Self {
        let n = space.n_dofs;
        Self { space, dofs: alloc::vec![Complex64::new(0.0, 0.0); n], alpha }
    }

    /// Nodal interpolant of a physical field `u` (divided by the Bloch phase).
    pub fn interpolate<F: Fn(f64, f64) -> Complex64>(space: Arc<FeSpace>, alpha: f64, u: F) -> Self {
        let dofs = space
            .nodes
            .iter()
            .map(|p| u(p[0], p[1]) * Complex64::new(0.0, -alpha * p[0]).exp())
            .collect();
        Self { space, dofs, alpha }
    }

    pub fn is_finite(&self) -> bool {
        self.dofs.iter().all(|d| d.is_finite())
    }

    /// `ũ` and `∇ũ` at barycentric `l` of triangle `t`.
    pub fn local(&self, t: usize, geo: &ElementGeometry, l: [f64; 3]) -> (Complex64, [Complex64; 2]) {
        let b = &self.space.basis;
        let vals = b.values(l);
        let grads = b.gradients(l, &geo.grad_l);
        let mut v = Complex64::new(0.0, 0.0);
        let mut g = [Complex64::new(0.0, 0.0); 2];
        for (i, &d) in self.space.dofs(t).iter().enumerate() {
            let c = self.dofs[d];
            v += c * vals[i];
            g[0] += c * grads[i][0];
            g[1] += c * grads[i][1];
        }
        (v, g)
    }

    /// Physical `u` and `∇u` at barycentric `l` of triangle `t`.
    pub fn physical(&self, t: usize, geo: &ElementGeometry, l: [f64; 3]) -> (Complex64, [Complex64; 2]) {
        let (v, g) = self.local(t, geo, l);
        let x = geo.point(l)[0];
        let ph = Complex64::new(0.0, self.alpha * x).exp();
        let ia = Complex64::new(0.0, self.alpha);
        (v * ph, [(g[0] + ia * v) * ph, g[1] * ph])
    }

    /// `ũ` at a physical point known to lie in (the closure of) triangle `t`.
    pub fn periodic_value_in(&self, t: usize, x: f64, y: f64) -> Complex64 {
        let geo = ElementGeometry::of(&self.space.mesh, t);
        self.local(t, &geo, geo.barycentric(x, y)).0
    }

    /// Locate the triangle containing `(x₁, x₂)` with `x₁` reduced to `[0, 2π]`.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, [f64; 3])> {
        let mesh = &self.space.mesh;
        for t in 0..mesh.triangles.len() {
            let geo = ElementGeometry::of(mesh, t);
            let l = geo.barycentric(x, y);
            if l.iter().all(|v| *v >= -1e-12) {
                return Some((t, l));
            }
        }
        None
    }

    /// Physical field value at a point; `None` outside the mesh.
    pub fn eval(&self, x: f64, y: f64) -> Option<Complex64> {
        let period = crate::PERIOD;
        let mut xr = x % period;
        if xr < 0.0 {
            xr += period;
        }
        let (t, l) = self.locate(xr, y)?;
        let geo = ElementGeometry::of(&self.space.mesh, t);
        let v = self.local(t, &geo, l).0;
        Some(v * Complex64::new(0.0, self.alpha * x).exp())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { space: self.space.clone(), dofs: self.dofs.iter().map(|d| d * c).collect(), alpha: self.alpha }
    }
}
