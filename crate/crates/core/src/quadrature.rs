//! Gauss–Legendre rules on `[0, 1]` and collapsed (Duffy) rules on the
//! reference triangle.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

/// Nodes and weights of a quadrature rule on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct LineRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    /// `n`-point Gauss–Legendre rule, exact for polynomials of degree `2n - 1`.
    pub fn gauss(n: usize) -> Self {
        assert!(n >= 1, "need at least one node");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes.push(0.5 * (1.0 - x));
            weights.push(0.5 * w);
        }
        Self { nodes, weights }
    }

    /// Integrate `g` over `[a, b]`.
    pub fn integrate<T, F>(&self, a: f64, b: f64, mut g: F) -> T
    where
        T: core::ops::Add<Output = T> + core::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let len = b - a;
        let mut acc = T::default();
        for (s, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + g(a + s * len) * (w * len);
        }
        acc
    }

    /// Composite rule: `panels` equal panels on `[a, b]`.
    pub fn integrate_composite<T, F>(&self, a: f64, b: f64, panels: usize, mut g: F) -> T
    where
        T: core::ops::Add<Output = T> + core::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        let step = (b - a) / panels as f64;
        let mut acc = T::default();
        for p in 0..panels {
            let lo = a + step * p as f64;
            acc = acc + self.integrate(lo, lo + step, &mut g);
        }
        acc
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Rule on the reference triangle `{(s, t): s, t ≥ 0, s + t ≤ 1}`; weights sum to 1/2.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    /// Barycentric coordinates `(λ0, λ1, λ2)` with `(s, t) = (λ1, λ2)`.
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed tensor rule from `n`-point Gauss rules; exact to degree `2n - 2`.
    pub fn collapsed(n: usize) -> Self {
        let g = LineRule::gauss(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (u, wu) in g.nodes.iter().zip(&g.weights) {
            for (v, wv) in g.nodes.iter().zip(&g.weights) {
                let s = *u;
                let t = v * (1.0 - u);
                points.push([1.0 - s - t, s, t]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        Self { points, weights }
    }

    /// Rule used for assembly: exact for degree 4 (products of quadratics).
    pub fn assembly() -> Self {
        Self::collapsed(3)
    }

    /// Rule with `order` Gauss points per direction.
    pub fn of_order(order: usize) -> Self {
        Self::collapsed(order.max(1))
    }
}
