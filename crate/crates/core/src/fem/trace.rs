use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::field::DiscreteField;
use super::space::FeSpace;
use crate::mesh::BoundaryTag;
use crate::{Error, Result, PERIOD};

/// `I_m(ω) = ∫₀¹ sᵐ e^{-iωs} ds` for `m = 0..=4`.
pub fn edge_moments(omega: f64) -> [Complex64; 5] {
    let mut out = [Complex64::new(0.0, 0.0); 5];
    if omega.abs() < 1.0 {
        // Power series; terms fall like 1/j! so 30 terms reach round-off.
        let z = Complex64::new(0.0, -omega);
        for (m, o) in out.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..30 {
                acc += term / (m + j + 1) as f64;
                term = term * z / (j + 1) as f64;
            }
            *o = acc;
        }
    } else {
        let e = Complex64::new(0.0, -omega).exp();
        let miw = Complex64::new(0.0, -omega);
        out[0] = (e - 1.0) / miw;
        for m in 1..5 {
            out[m] = (e - out[m - 1] * m as f64) / miw;
        }
    }
    out
}

/// `(1/2π)∫ p(x) e^{-inx} dx` over a segment `x = x0 + s·dx`, `s ∈ [0,1]`,
/// where `p(s) = Σ c_m sᵐ`; `len` is the arc length of the segment.
pub(crate) fn segment_mode(n: i64, x0: f64, dx: f64, len: f64, poly: &[Complex64]) -> Complex64 {
    let mom = edge_moments(n as f64 * dx);
    let acc: Complex64 = poly.iter().zip(&mom).map(|(c, i)| c * i).sum();
    Complex64::new(0.0, -(n as f64) * x0).exp() * acc * (len / PERIOD)
}

/// Exact trace-to-mode transform on a horizontal tagged boundary:
/// `c_{nj} = (1/2π)∫ φ_j e^{-inx₁} dx₁` for each dof `j` on the line.
#[derive(Debug, Clone)]
pub struct TraceModes {
    pub n_max: usize,
    /// Global dofs with support on the line, ascending.
    pub dofs: Vec<usize>,
    /// `coef[n + N][p]` pairs with `dofs[p]`.
    pub coef: Vec<Vec<Complex64>>,
    pub height: f64,
}

impl TraceModes {
    pub fn new(space: &FeSpace, tag: BoundaryTag, n_max: usize) -> Result<Self> {
        let owners = space.mesh.edge_owners(tag);
        if owners.is_empty() {
            return Err(Error::EmptyTrace);
        }
        let height = space.mesh.vertices[owners[0].2.a][1];
        let mut index: BTreeMap<usize, usize> = BTreeMap::new();
        for &(t, k, _) in &owners {
            let (loc, m) = space.basis.edge_locals(k);
            for &l in &loc[..m] {
                index.entry(space.elem_dofs[t][l]).or_insert(0);
            }
        }
        let dofs: Vec<usize> = index.keys().copied().collect();
        for (p, d) in dofs.iter().enumerate() {
            index.insert(*d, p);
        }
        let nm = 2 * n_max + 1;
        let mut coef = alloc::vec![alloc::vec![Complex64::new(0.0, 0.0); dofs.len()]; nm];
        let polys = space.basis.trace_poly();
        for &(t, k, _) in &owners {
            let tri = space.mesh.triangles[t];
            let (pa, pb) = (space.mesh.vertices[tri[k]], space.mesh.vertices[tri[(k + 1) % 3]]);
            let dx = pb[0] - pa[0];
            let (loc, m) = space.basis.edge_locals(k);
            for (ni, row) in coef.iter_mut().enumerate() {
                let n = ni as i64 - n_max as i64;
                let mom = edge_moments(n as f64 * dx);
                let phase = Complex64::new(0.0, -(n as f64) * pa[0]).exp() * (dx.abs() / PERIOD);
                for (i, &l) in loc[..m].iter().enumerate() {
                    let p = polys[i];
                    let acc = mom[0] * p[0] + mom[1] * p[1] + mom[2] * p[2];
                    row[index[&space.elem_dofs[t][l]]] += phase * acc;
                }
            }
        }
        Ok(Self { n_max, dofs, coef, height })
    }

    /// Fourier coefficients `ũ_n` of the trace of `dofs`.
    pub fn modes(&self, values: &[Complex64]) -> Vec<Complex64> {
        self.coef
            .iter()
            .map(|row| row.iter().zip(&self.dofs).map(|(c, d)| c * values[*d]).sum())
            .collect()
    }
}

/// Fourier coefficients of the trace of `field` on the horizontal line
/// `x₂ = height`, integrating the polynomial restriction on every crossed
/// triangle exactly.
pub fn line_modes(field: &DiscreteField, height: f64, n_max: usize) -> Result<Vec<Complex64>> {
    let mesh = &field.space.mesh;
    let lo = mesh.bottom.unwrap_or_else(|| {
        mesh.vertices.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min)
    });
    if !(height >= lo - 1e-12 && height <= mesh.top + 1e-12) {
        return Err(Error::HeightOutsideMesh(height));
    }
    let eps = 1e-12 * (1.0 + height.abs());
    let nm = 2 * n_max + 1;
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); nm];
    let mut covered = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
        let side: [i8; 3] = core::array::from_fn(|i| {
            let d = p[i][1] - height;
            if d.abs() <= eps {
                0
            } else if d > 0.0 {
                1
            } else {
                -1
            }
        });
        let on = side.iter().filter(|s| **s == 0).count();
        let mut xs: Vec<f64> = Vec::new();
        if on == 2 {
            // Edge on the line: count it once, from the triangle above
            // (from below on the top boundary).
            let at_top = height >= mesh.top - eps;
            if side.iter().any(|s| *s == if at_top { -1 } else { 1 }) {
                for i in 0..3 {
                    if side[i] == 0 {
                        xs.push(p[i][0]);
                    }
                }
            }
        } else if on < 2 {
            for i in 0..3 {
                if side[i] == 0 {
                    xs.push(p[i][0]);
                }
                let j = (i + 1) % 3;
                if side[i] * side[j] < 0 {
                    let s = (height - p[i][1]) / (p[j][1] - p[i][1]);
                    xs.push(p[i][0] + s * (p[j][0] - p[i][0]));
                }
            }
        }
        if xs.len() < 2 {
            continue;
        }
        let xa = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let xb = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let dx = xb - xa;
        if dx <= eps {
            continue;
        }
        covered += dx;
        let v0 = field.periodic_value_in(t, xa, height);
        let vh = field.periodic_value_in(t, xa + 0.5 * dx, height);
        let v1 = field.periodic_value_in(t, xb, height);
        let poly = if field.space.basis.order == 1 {
            [v0, v1 - v0, Complex64::new(0.0, 0.0)]
        } else {
            [v0, -v0 * 3.0 + vh * 4.0 - v1, v0 * 2.0 - vh * 4.0 + v1 * 2.0]
        };
        for (ni, o) in out.iter_mut().enumerate() {
            let n = ni as i64 - n_max as i64;
            *o += segment_mode(n, xa, dx, dx, &poly);
        }
    }
    if (covered - PERIOD).abs() > 1e-9 {
        return Err(Error::HeightOutsideMesh(height));
    }
    Ok(out)
}
