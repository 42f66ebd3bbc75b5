use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::mesh::{BoundaryTag, PeriodicMesh};
use crate::{Error, Result};

/// Lagrange basis on one triangle. Local order: the three vertices, then the
/// midpoints of edges `01`, `12`, `20`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalBasis {
    pub order: usize,
}

impl LocalBasis {
    pub fn count(&self) -> usize {
        if self.order == 1 {
            3
        } else {
            6
        }
    }

    /// Basis values at barycentric coordinates `l`.
    pub fn values(&self, l: [f64; 3]) -> [f64; 6] {
        if self.order == 1 {
            [l[0], l[1], l[2], 0.0, 0.0, 0.0]
        } else {
            [
                l[0] * (2.0 * l[0] - 1.0),
                l[1] * (2.0 * l[1] - 1.0),
                l[2] * (2.0 * l[2] - 1.0),
                4.0 * l[0] * l[1],
                4.0 * l[1] * l[2],
                4.0 * l[2] * l[0],
            ]
        }
    }

    /// Basis gradients given the barycentric gradients `gl`.
    pub fn gradients(&self, l: [f64; 3], gl: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
        let mut g = [[0.0; 2]; 6];
        if self.order == 1 {
            g[..3].copy_from_slice(gl);
            return g;
        }
        for i in 0..3 {
            let s = 4.0 * l[i] - 1.0;
            g[i] = [s * gl[i][0], s * gl[i][1]];
        }
        for (e, (i, j)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
            g[3 + e] = [
                4.0 * (l[j] * gl[i][0] + l[i] * gl[j][0]),
                4.0 * (l[j] * gl[i][1] + l[i] * gl[j][1]),
            ];
        }
        g
    }

    /// Local dofs along local edge `k` (from vertex `k` to `k+1`), in the order
    /// matching [`LocalBasis::trace_poly`].
    pub fn edge_locals(&self, k: usize) -> ([usize; 3], usize) {
        if self.order == 1 {
            ([k, (k + 1) % 3, 0], 2)
        } else {
            ([k, (k + 1) % 3, 3 + k], 3)
        }
    }

    /// Monomial coefficients in `s ∈ [0, 1]` of the traces of the edge dofs.
    pub fn trace_poly(&self) -> &'static [[f64; 3]] {
        if self.order == 1 {
            &[[1.0, -1.0, 0.0], [0.0, 1.0, 0.0]]
        } else {
            &[[1.0, -3.0, 2.0], [0.0, -1.0, 2.0], [0.0, 4.0, -4.0]]
        }
    }
}

/// Continuous Lagrange space of order 1 or 2 with periodic identification of
/// the lateral sides.
#[derive(Debug, Clone)]
pub struct FeSpace {
    pub mesh: Arc<PeriodicMesh>,
    pub basis: LocalBasis,
    /// Global dof of each local slot, `count()` used per triangle.
    pub elem_dofs: Vec<[usize; 6]>,
    pub n_dofs: usize,
    /// A representative point of every dof (on `x₁ = 0` for identified dofs).
    pub nodes: Vec<[f64; 2]>,
}

impl FeSpace {
    pub fn new(mesh: Arc<PeriodicMesh>, order: usize) -> Result<Arc<Self>> {
        if order != 1 && order != 2 {
            return Err(Error::InvalidParameter(format!("fe_order must be 1 or 2, got {order}")));
        }
        let nv = mesh.vertices.len();
        let mut canon: Vec<usize> = (0..nv).collect();
        let mut on_right = alloc::vec![false; nv];
        for &(r, l) in &mesh.pairs {
            canon[r] = l;
            on_right[r] = true;
        }
        let mut vdof = alloc::vec![usize::MAX; nv];
        let mut nodes = Vec::new();
        let mut n = 0;
        for v in 0..nv {
            if canon[v] == v {
                vdof[v] = n;
                nodes.push(mesh.vertices[v]);
                n += 1;
            }
        }
        for v in 0..nv {
            vdof[v] = vdof[canon[v]];
        }
        let basis = LocalBasis { order };
        let mut edof: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut elem_dofs = Vec::with_capacity(mesh.triangles.len());
        for t in &mesh.triangles {
            let mut d = [usize::MAX; 6];
            for k in 0..3 {
                d[k] = vdof[t[k]];
            }
            if order == 2 {
                for k in 0..3 {
                    let (mut a, mut b) = (t[k], t[(k + 1) % 3]);
                    if on_right[a] && on_right[b] {
                        a = canon[a];
                        b = canon[b];
                    }
                    let key = if a < b { (a, b) } else { (b, a) };
                    let id = *edof.entry(key).or_insert_with(|| {
                        let (p, q) = (mesh.vertices[key.0], mesh.vertices[key.1]);
                        nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                        n += 1;
                        n - 1
                    });
                    d[3 + k] = id;
                }
            }
            elem_dofs.push(d);
        }
        Ok(Arc::new(Self { mesh, basis, elem_dofs, n_dofs: n, nodes }))
    }

    pub fn local_count(&self) -> usize {
        self.basis.count()
    }

    pub fn dofs(&self, t: usize) -> &[usize] {
        &self.elem_dofs[t][..self.local_count()]
    }

    /// Mask of dofs carried by edges with `tag` (vertices and midpoints).
    pub fn dofs_on(&self, tag: BoundaryTag) -> Vec<bool> {
        let mut mask = alloc::vec![false; self.n_dofs];
        for (t, k, _) in self.mesh.edge_owners(tag) {
            let (loc, m) = self.basis.edge_locals(k);
            for &l in &loc[..m] {
                mask[self.elem_dofs[t][l]] = true;
            }
        }
        mask
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GratingProfile, TruncatedDomain};
    use crate::mesh::generate_mesh;

    fn space(order: usize, two: bool) -> Arc<FeSpace> {
        let p = GratingProfile::flat(0.0);
        let d = if two {
            TruncatedDomain::two_sided(p, 2.0).unwrap()
        } else {
            TruncatedDomain::one_sided(p, 1.0).unwrap()
        };
        FeSpace::new(Arc::new(generate_mesh(&d, 0.5).unwrap()), order).unwrap()
    }

    #[test]
    fn dof_counts_match_periodic_nodes() {
        let s1 = space(1, false);
        let m = &s1.mesh;
        assert_eq!(s1.n_dofs, m.vertices.len() - m.pairs.len());
        let s2 = space(2, false);
        // Euler count on a periodic cylinder: edges = vertices + triangles - boundary loops.
        let nv = s1.n_dofs;
        let nt = m.triangles.len();
        let ne = nv + nt;
        assert_eq!(s2.n_dofs, nv + ne);
    }

    #[test]
    fn basis_is_partition_of_unity() {
        for order in [1, 2] {
            let b = LocalBasis { order };
            let l = [0.2, 0.3, 0.5];
            let s: f64 = b.values(l)[..b.count()].iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
            let gl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
            let g = b.gradients(l, &gl);
            let gx: f64 = g[..b.count()].iter().map(|v| v[0]).sum();
            let gy: f64 = g[..b.count()].iter().map(|v| v[1]).sum();
            assert!(gx.abs() < 1e-14 && gy.abs() < 1e-14);
        }
    }

    #[test]
    fn trace_polynomials_match_basis() {
        let b = LocalBasis { order: 2 };
        for s in [0.0, 0.25, 0.5, 0.9] {
            let v = b.values([1.0 - s, s, 0.0]);
            let (loc, m) = b.edge_locals(0);
            for (i, &l) in loc[..m].iter().enumerate() {
                let p = b.trace_poly()[i];
                assert!((v[l] - (p[0] + p[1] * s + p[2] * s * s)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn profile_dofs_two_sided() {
        let s = space(2, true);
        let mask = s.dofs_on(BoundaryTag::GammaProfile);
        let cols = s.mesh.edges_with(BoundaryTag::GammaProfile).count();
        assert_eq!(mask.iter().filter(|b| **b).count(), 2 * cols);
    }
}
