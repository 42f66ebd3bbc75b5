use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;

/// Vertical factor of a separable term.
#[derive(Debug, Clone, PartialEq)]
pub enum Vertical {
    /// `e^{b x₂}`.
    Exp(Complex64),
    /// `Σ c_j x₂^j`.
    Poly(Vec<Complex64>),
    /// `sin(b (x₂ - c))`, vanishing at `x₂ = c`.
    SinShift { b: Complex64, c: f64 },
}

impl Vertical {
    /// `(Y, Y', Y'')` at `y`.
    pub fn eval(&self, y: f64) -> (Complex64, Complex64, Complex64) {
        let z = Complex64::new(0.0, 0.0);
        match self {
            Vertical::Exp(b) => {
                let e = (b * y).exp();
                (e, b * e, b * b * e)
            }
            Vertical::Poly(c) => {
                let (mut v, mut d, mut dd) = (z, z, z);
                for cj in c.iter().rev() {
                    dd = dd * y + d * 2.0;
                    d = d * y + v;
                    v = v * y + cj;
                }
                (v, d, dd)
            }
            Vertical::SinShift { b, c } => {
                let t = b * (y - c);
                (t.sin(), b * t.cos(), -(b * b) * t.sin())
            }
        }
    }
}

/// One term `coef · e^{i(n+α)x₁} · Y(x₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: Complex64,
    pub n: i64,
    pub y: Vertical,
}

/// A closed-form α-quasiperiodic field with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedField {
    pub alpha: f64,
    pub terms: Vec<Term>,
    pub tag: String,
}

/// Value, gradient and Laplacian at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: Complex64,
    pub grad: [Complex64; 2],
    pub lap: Complex64,
}

impl ManufacturedField {
    pub fn new(alpha: f64, terms: Vec<Term>, tag: &str) -> Self {
        Self { alpha, terms, tag: tag.into() }
    }

    pub fn jet(&self, x: f64, y: f64) -> Jet {
        let z = Complex64::new(0.0, 0.0);
        let mut j = Jet { v: z, grad: [z, z], lap: z };
        for t in &self.terms {
            let a = t.n as f64 + self.alpha;
            let ph = t.coef * Complex64::new(0.0, a * x).exp();
            let (yv, yd, ydd) = t.y.eval(y);
            j.v += ph * yv;
            j.grad[0] += ph * yv * Complex64::new(0.0, a);
            j.grad[1] += ph * yd;
            j.lap += ph * (ydd - yv * (a * a));
        }
        j
    }

    pub fn value(&self, x: f64, y: f64) -> Complex64 {
        self.jet(x, y).v
    }

    /// `Δv + k²v`.
    pub fn helmholtz_defect(&self, x: f64, y: f64, k: f64) -> Complex64 {
        let j = self.jet(x, y);
        j.lap + j.v * (k * k)
    }

    /// Horizontal orders present, ascending and unique.
    pub fn orders(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.terms.iter().map(|t| t.n).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `(Y_n, Y_n', Y_n'')` summed over the terms of order `n`.
    pub fn vertical_of(&self, n: i64, y: f64) -> (Complex64, Complex64, Complex64) {
        let z = Complex64::new(0.0, 0.0);
        self.terms.iter().filter(|t| t.n == n).fold((z, z, z), |acc, t| {
            let (a, b, c) = t.y.eval(y);
            (acc.0 + t.coef * a, acc.1 + t.coef * b, acc.2 + t.coef * c)
        })
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coef *= c;
        }
        out
    }
}
