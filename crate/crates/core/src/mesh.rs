//! Structured periodic triangulations of the truncated cell.
//!
//! Vertices sit on vertical fibres `x₁ = x_j` stretched between the profile
//! and the artificial boundaries. The mesh profile is the interpolant of `f`
//! at the fibres, so every profile knot that must be resolved is a fibre.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;

use crate::geometry::{DomainKind, TruncatedDomain};
use crate::{Error, Result, PERIOD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryTag {
    GammaProfile,
    GammaRPlus,
    GammaRMinus,
    PeriodicLeft,
    PeriodicRight,
}

impl BoundaryTag {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::GammaProfile => "GammaProfile",
            BoundaryTag::GammaRPlus => "GammaR_plus",
            BoundaryTag::GammaRMinus => "GammaR_minus",
            BoundaryTag::PeriodicLeft => "PeriodicLeft",
            BoundaryTag::PeriodicRight => "PeriodicRight",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            BoundaryTag::GammaProfile,
            BoundaryTag::GammaRPlus,
            BoundaryTag::GammaRMinus,
            BoundaryTag::PeriodicLeft,
            BoundaryTag::PeriodicRight,
        ]
        .into_iter()
        .find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Upper,
    Lower,
}

/// A tagged mesh edge `a → b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaggedEdge {
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub regions: Vec<Region>,
    pub edges: Vec<TaggedEdge>,
    /// `(right, left)` vertex pairs across `x₁ = 2π` and `x₁ = 0`.
    pub pairs: Vec<(usize, usize)>,
    /// Longest edge.
    pub h: f64,
    pub top: f64,
    pub bottom: Option<f64>,
}

fn edge_len(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Split `[0, 2π]` through the required breakpoints with spacing at most `dx`.
fn columns(breaks: &[f64], dx: f64) -> Vec<f64> {
    let mut knots = alloc::vec![0.0];
    knots.extend(breaks.iter().copied().filter(|x| *x > 0.0 && *x < PERIOD));
    knots.push(PERIOD);
    let mut xs = alloc::vec![0.0];
    for w in knots.windows(2) {
        let m = ((w[1] - w[0]) / dx).ceil().max(1.0) as usize;
        for i in 1..=m {
            xs.push(if i == m { w[1] } else { w[0] + (w[1] - w[0]) * i as f64 / m as f64 });
        }
    }
    xs
}

/// Build a conforming periodic mesh with target edge length `h_target`.
pub fn generate_mesh(domain: &TruncatedDomain, h_target: f64) -> Result<PeriodicMesh> {
    if !(h_target > 0.0) || !h_target.is_finite() {
        return Err(Error::InvalidParameter(format!("mesh size must be positive, got {h_target}")));
    }
    let p = &domain.profile;
    let breaks = p.breakpoints();
    for w in breaks.windows(2) {
        if (w[1] - w[0]).abs() <= 1e-14 {
            return Err(Error::DuplicateKnot(w[0]));
        }
    }
    // Shrink fibres along steep profiles so profile edges stay below h.
    let dx = h_target / (1.0 + p.lipschitz_l().powi(2)).sqrt();
    let xs = columns(&breaks, dx);
    if xs.len() < 4 {
        return Err(Error::InvalidParameter(format!("mesh size {h_target} too coarse for the period")));
    }
    let r = domain.r;
    let two = domain.kind == DomainKind::TwoSided;
    let fs: Vec<f64> = xs.iter().map(|&x| p.eval(x)).collect();
    let fmin = fs.iter().copied().fold(f64::INFINITY, f64::min);
    let fmax = fs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(fmax < r) {
        return Err(Error::InvalidDomain("profile reaches the artificial boundary".into()));
    }
    let nu = ((r - fmin) / h_target).ceil().max(1.0) as usize;
    let nl = if two { ((fmax + r) / h_target).ceil().max(1.0) as usize } else { 0 };
    let stack = nl + nu + 1;
    let ncol = xs.len();
    let mut vertices = Vec::with_capacity(ncol * stack);
    for (j, &x) in xs.iter().enumerate() {
        let f = fs[j];
        for i in 0..nl {
            vertices.push([x, -r + (f + r) * i as f64 / nl as f64]);
        }
        for i in 0..=nu {
            let y = if i == nu { r } else { f + (r - f) * i as f64 / nu as f64 };
            vertices.push([x, y]);
        }
    }
    let id = |j: usize, i: usize| j * stack + i;
    let mut triangles = Vec::new();
    let mut regions = Vec::new();
    for j in 0..ncol - 1 {
        for i in 0..stack - 1 {
            let (p00, p10, p01, p11) = (id(j, i), id(j + 1, i), id(j, i + 1), id(j + 1, i + 1));
            let d1 = edge_len(vertices[p00], vertices[p11]);
            let d2 = edge_len(vertices[p10], vertices[p01]);
            let reg = if i < nl { Region::Lower } else { Region::Upper };
            if d1 <= d2 {
                triangles.push([p00, p10, p11]);
                triangles.push([p00, p11, p01]);
            } else {
                triangles.push([p00, p10, p01]);
                triangles.push([p10, p11, p01]);
            }
            regions.push(reg);
            regions.push(reg);
        }
    }
    let mut edges = Vec::new();
    for j in 0..ncol - 1 {
        edges.push(TaggedEdge { a: id(j, nl), b: id(j + 1, nl), tag: BoundaryTag::GammaProfile });
        edges.push(TaggedEdge { a: id(j, stack - 1), b: id(j + 1, stack - 1), tag: BoundaryTag::GammaRPlus });
        if two {
            edges.push(TaggedEdge { a: id(j, 0), b: id(j + 1, 0), tag: BoundaryTag::GammaRMinus });
        }
    }
    for i in 0..stack - 1 {
        edges.push(TaggedEdge { a: id(0, i), b: id(0, i + 1), tag: BoundaryTag::PeriodicLeft });
        edges.push(TaggedEdge { a: id(ncol - 1, i), b: id(ncol - 1, i + 1), tag: BoundaryTag::PeriodicRight });
    }
    let pairs = (0..stack).map(|i| (id(ncol - 1, i), id(0, i))).collect();
    let mut mesh = PeriodicMesh {
        vertices,
        triangles,
        regions,
        edges,
        pairs,
        h: 0.0,
        top: r,
        bottom: if two { Some(-r) } else { None },
    };
    mesh.h = mesh.max_edge();
    Ok(mesh)
}

/// Uniform red refinement: every triangle splits into four.
pub fn refine(mesh: &PeriodicMesh) -> PeriodicMesh {
    let mut vertices = mesh.vertices.clone();
    let mut mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 2]>| -> usize {
        let key = if a < b { (a, b) } else { (b, a) };
        *mid.entry(key).or_insert_with(|| {
            let (p, q) = (verts[a], verts[b]);
            verts.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            verts.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    let mut regions = Vec::with_capacity(4 * mesh.triangles.len());
    for (t, reg) in mesh.triangles.iter().zip(&mesh.regions) {
        let [a, b, c] = *t;
        let ab = midpoint(a, b, &mut vertices);
        let bc = midpoint(b, c, &mut vertices);
        let ca = midpoint(c, a, &mut vertices);
        triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        regions.extend([*reg; 4]);
    }
    let mut edges = Vec::with_capacity(2 * mesh.edges.len());
    for e in &mesh.edges {
        let m = midpoint(e.a, e.b, &mut vertices);
        edges.push(TaggedEdge { a: e.a, b: m, tag: e.tag });
        edges.push(TaggedEdge { a: m, b: e.b, tag: e.tag });
    }
    let partner: BTreeMap<usize, usize> = mesh.pairs.iter().copied().collect();
    let mut pairs = mesh.pairs.clone();
    for e in mesh.edges.iter().filter(|e| e.tag == BoundaryTag::PeriodicRight) {
        let (la, lb) = (partner[&e.a], partner[&e.b]);
        let mr = midpoint(e.a, e.b, &mut vertices);
        let ml = midpoint(la, lb, &mut vertices);
        pairs.push((mr, ml));
    }
    pairs.sort_unstable();
    let mut out = PeriodicMesh {
        vertices,
        triangles,
        regions,
        edges,
        pairs,
        h: 0.0,
        top: mesh.top,
        bottom: mesh.bottom,
    };
    out.h = out.max_edge();
    out
}

impl PeriodicMesh {
    pub fn is_two_sided(&self) -> bool {
        self.bottom.is_some()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    }

    pub fn max_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| edge_len(self.vertices[a], self.vertices[b]))
            .fold(0.0, f64::max)
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut worst = 180.0f64;
        for t in &self.triangles {
            for k in 0..3 {
                let p = self.vertices[t[k]];
                let q = self.vertices[t[(k + 1) % 3]];
                let r = self.vertices[t[(k + 2) % 3]];
                let u = [q[0] - p[0], q[1] - p[1]];
                let v = [r[0] - p[0], r[1] - p[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / ((u[0].hypot(u[1])) * v[0].hypot(v[1]));
                worst = worst.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        worst
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    pub fn edges_with(&self, tag: BoundaryTag) -> impl Iterator<Item = &TaggedEdge> {
        self.edges.iter().filter(move |e| e.tag == tag)
    }

    /// Triangles owning each tagged edge, with the local edge index `0..3`
    /// (`k` means the edge from local vertex `k` to `k+1`).
    pub fn edge_owners(&self, tag: BoundaryTag) -> Vec<(usize, usize, TaggedEdge)> {
        let mut map: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                map.entry(if a < b { (a, b) } else { (b, a) }).or_default().push((ti, k));
            }
        }
        let mut out = Vec::new();
        for e in self.edges_with(tag) {
            let key = if e.a < e.b { (e.a, e.b) } else { (e.b, e.a) };
            if let Some(owners) = map.get(&key) {
                for &(ti, k) in owners {
                    out.push((ti, k, *e));
                }
            }
        }
        out
    }

    /// Polygonal area of the cell bounded by the tagged profile and top/bottom lines.
    pub fn polygon_area(&self) -> f64 {
        let mut prof: Vec<(f64, f64, f64, f64)> = self
            .edges_with(BoundaryTag::GammaProfile)
            .map(|e| {
                let (p, q) = (self.vertices[e.a], self.vertices[e.b]);
                (p[0], p[1], q[0], q[1])
            })
            .collect();
        prof.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let under: f64 = prof.iter().map(|s| 0.5 * (s.1 + s.3) * (s.2 - s.0)).sum();
        match self.bottom {
            None => PERIOD * self.top - under,
            Some(b) => PERIOD * (self.top - b),
        }
    }

    /// Check the structural invariants; returns a description of the first violation.
    pub fn check_invariants(&self) -> core::result::Result<(), alloc::string::String> {
        for t in 0..self.triangles.len() {
            if !(self.signed_area(t) > 0.0) {
                return Err(format!("triangle {t} has non-positive area"));
            }
        }
        let mut lefts = Vec::new();
        for &(r, l) in &self.pairs {
            let (pr, pl) = (self.vertices[r], self.vertices[l]);
            if (pr[1] - pl[1]).abs() > 1e-12 || (pr[0] - pl[0] - PERIOD).abs() > 1e-12 {
                return Err(format!("pair ({r}, {l}) mismatched"));
            }
            lefts.push(l);
        }
        lefts.sort_unstable();
        if lefts.windows(2).any(|w| w[0] == w[1]) {
            return Err("periodic pairing is not injective".into());
        }
        let nleft = self.vertices.iter().filter(|v| v[0] == 0.0).count();
        let nright = self.vertices.iter().filter(|v| v[0] == PERIOD).count();
        if nleft != self.pairs.len() || nright != self.pairs.len() {
            return Err(format!("pairing not a bijection: {nleft} left, {nright} right, {} pairs", self.pairs.len()));
        }
        for e in &self.edges {
            let (p, q) = (self.vertices[e.a], self.vertices[e.b]);
            let ok = match e.tag {
                BoundaryTag::GammaRPlus => p[1] == self.top && q[1] == self.top,
                BoundaryTag::GammaRMinus => Some(p[1]) == self.bottom && Some(q[1]) == self.bottom,
                BoundaryTag::PeriodicLeft => p[0] == 0.0 && q[0] == 0.0,
                BoundaryTag::PeriodicRight => p[0] == PERIOD && q[0] == PERIOD,
                BoundaryTag::GammaProfile => true,
            };
            if !ok {
                return Err(format!("edge ({}, {}) violates its {} tag", e.a, e.b, e.tag.name()));
            }
        }
        if self.is_two_sided() {
            let owners = self.edge_owners(BoundaryTag::GammaProfile);
            let mut chunks = BTreeMap::new();
            for (ti, _, e) in owners {
                chunks.entry((e.a, e.b)).or_insert_with(Vec::new).push(self.regions[ti]);
            }
            for (e, regs) in chunks {
                if regs.len() != 2 || regs[0] == regs[1] {
                    return Err(format!("profile edge {e:?} does not separate Upper and Lower"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GratingProfile, ProfileShape};

    fn flat_domain(r: f64) -> TruncatedDomain {
        TruncatedDomain::one_sided(GratingProfile::flat(0.0), r).unwrap()
    }

    #[test]
    fn flat_rectangle() {
        let m = generate_mesh(&flat_domain(1.0), 0.5).unwrap();
        m.check_invariants().unwrap();
        let on_sides = m.vertices.iter().filter(|v| v[0] == 0.0 || v[0] == PERIOD).count();
        assert_eq!(on_sides, 2 * m.pairs.len());
        assert!((m.total_area() - PERIOD).abs() < 1e-12 * PERIOD);
        assert!(m.h <= 0.75);
        assert!(m.min_angle_deg() >= 15.0);
    }

    #[test]
    fn sine_mesh_quality_and_growth() {
        let p = GratingProfile::build(ProfileShape::Sine(0.3), 256).unwrap();
        let d = TruncatedDomain::one_sided(p, 1.8).unwrap();
        let a = generate_mesh(&d, 0.2).unwrap();
        let b = generate_mesh(&d, 0.1).unwrap();
        a.check_invariants().unwrap();
        b.check_invariants().unwrap();
        let ratio = b.vertices.len() as f64 / a.vertices.len() as f64;
        assert!((3.4..4.6).contains(&ratio), "ratio {ratio}");
        for m in [&a, &b] {
            assert!(m.h <= 1.5 * if core::ptr::eq(m, &a) { 0.2 } else { 0.1 });
            assert!(m.min_angle_deg() >= 15.0);
            assert!(((m.total_area() - m.polygon_area()) / m.polygon_area()).abs() < 1e-12);
        }
    }

    #[test]
    fn saw_kink_is_a_vertex() {
        let p = GratingProfile::build(ProfileShape::Saw(1.0), 64).unwrap();
        let d = TruncatedDomain::one_sided(p, 3.0).unwrap();
        let m = generate_mesh(&d, 0.3).unwrap();
        m.check_invariants().unwrap();
        assert!(m.vertices.iter().any(|v| v[0] == core::f64::consts::PI));
        assert!(m.min_angle_deg() >= 15.0, "{}", m.min_angle_deg());
        assert!(m.h <= 0.45);
    }

    #[test]
    fn transmission_symmetry() {
        let d = TruncatedDomain::two_sided(GratingProfile::flat(0.0), 2.0).unwrap();
        let m = generate_mesh(&d, 0.25).unwrap();
        m.check_invariants().unwrap();
        let up = m.regions.iter().filter(|r| **r == Region::Upper).count();
        assert_eq!(2 * up, m.regions.len());
        assert!((m.total_area() - 4.0 * PERIOD).abs() < 1e-12 * PERIOD);
    }

    #[test]
    fn refinement_properties() {
        let p = GratingProfile::build(ProfileShape::Sine(0.3), 64).unwrap();
        let d = TruncatedDomain::two_sided(p, 2.0).unwrap();
        let m0 = generate_mesh(&d, 0.4).unwrap();
        let m1 = refine(&m0);
        let m2 = refine(&m1);
        m1.check_invariants().unwrap();
        m2.check_invariants().unwrap();
        assert_eq!(m1.triangles.len(), 4 * m0.triangles.len());
        assert!((m1.h - 0.5 * m0.h).abs() < 1e-12);
        assert!((m2.h - 0.25 * m0.h).abs() < 1e-12);
        for tag in [BoundaryTag::GammaProfile, BoundaryTag::GammaRPlus, BoundaryTag::GammaRMinus] {
            assert_eq!(m1.edges_with(tag).count(), 2 * m0.edges_with(tag).count());
        }
        assert!(((m2.total_area() - m0.total_area()) / m0.total_area()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_size() {
        assert!(generate_mesh(&flat_domain(1.0), 0.0).is_err());
        assert!(generate_mesh(&flat_domain(1.0), 10.0).is_err());
    }
}
