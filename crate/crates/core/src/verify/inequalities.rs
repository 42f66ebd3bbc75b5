use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::manufactured::{ManufacturedField, Term, Vertical};
use crate::dtn::{beta_n, RayleighSpectrum};
use super::convergence::error_against;
use crate::fem::{DiscreteField, Solution};
use crate::mesh::BoundaryTag;
use crate::postprocess::{
    boundary_l2_sq, norm_xr, rayleigh_coefficients, region_integrals, scattered_upper, trace_half_norm,
};
use crate::quadrature::LineRule;
use crate::{Error, Result, PERIOD};

/// Relative slack allowed on every inequality margin.
pub const MARGIN_SLACK: f64 = 1e-9;

/// `rhs - lhs` of an inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl Margin {
    fn of(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, margin: rhs - lhs }
    }

    /// Margin relative to the larger side.
    pub fn relative(&self) -> f64 {
        let s = self.lhs.abs().max(self.rhs.abs());
        if s == 0.0 {
            0.0
        } else {
            self.margin / s
        }
    }

    pub fn holds(&self) -> bool {
        self.relative() >= -MARGIN_SLACK
    }
}

/// Integrals of a manufactured field over the flat cell `(0,2π)×(c,R)`,
/// exact in `x₁` by mode orthogonality and composite Gauss in `x₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatIntegrals {
    pub l2: f64,
    pub dx: f64,
    pub dy: f64,
    /// `∫₀^{2π} |v(x₁, c)|² dx₁`.
    pub gamma_sq: f64,
    /// Coefficients of `v(·, R)`.
    pub top: RayleighSpectrum,
}

pub fn flat_integrals(v: &ManufacturedField, k: f64, c: f64, r: f64) -> FlatIntegrals {
    let g = LineRule::gauss(10);
    let orders = v.orders();
    let n_max = orders.iter().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0);
    let mut top = RayleighSpectrum::zeros(n_max, v.alpha, r, k);
    let (mut l2, mut dx, mut dy, mut gamma_sq) = (0.0, 0.0, 0.0, 0.0);
    for &n in &orders {
        let a = n as f64 + v.alpha;
        let (m0, m1): (f64, f64) = (
            g.integrate_composite(c, r, 48, |y| v.vertical_of(n, y).0.norm_sqr()),
            g.integrate_composite(c, r, 48, |y| v.vertical_of(n, y).1.norm_sqr()),
        );
        l2 += PERIOD * m0;
        dx += PERIOD * a * a * m0;
        dy += PERIOD * m1;
        gamma_sq += PERIOD * v.vertical_of(n, c).0.norm_sqr();
        top.set(n, v.vertical_of(n, r).0);
    }
    FlatIntegrals { l2, dx, dy, gamma_sq, top }
}

/// `√(2π)‖v‖_{H^{1/2}(Γ_R)} ≤ ‖v‖_{X_R}` for a manufactured field on the flat cell.
pub fn trace_inequality_check(v: &ManufacturedField, k: f64, c: f64, r: f64) -> Margin {
    let f = flat_integrals(v, k, c, r);
    let xr = (k * k * f.l2 + f.dx + f.dy).sqrt();
    Margin::of(PERIOD.sqrt() * trace_half_norm(&f.top), xr)
}

/// Trace inequality for a discrete field vanishing on `Γ`.
pub fn trace_inequality_check_discrete(field: &DiscreteField, k: f64, n_max: usize) -> Result<Margin> {
    let top = rayleigh_coefficients(field, field.space.mesh.top, n_max, k)?;
    Ok(Margin::of(PERIOD.sqrt() * trace_half_norm(&top), norm_xr(field, k)))
}

/// `‖v‖² ≤ d²‖∂₂v‖² + 2d‖v‖²_{L²(Γ)}` with `d = R - f₋`, flat cell.
pub fn poincare_check(v: &ManufacturedField, c: f64, r: f64, f_minus: f64) -> Margin {
    let f = flat_integrals(v, 1.0, c, r);
    let d = r - f_minus;
    Margin::of(f.l2, d * d * f.dy + 2.0 * d * f.gamma_sq)
}

/// Poincaré-type inequality for a discrete field on its one-sided mesh.
pub fn poincare_check_discrete(field: &DiscreteField, f_minus: f64) -> Margin {
    let reg = region_integrals(field);
    let d = field.space.mesh.top - f_minus;
    let gamma = boundary_l2_sq(field, BoundaryTag::GammaProfile);
    Margin::of(reg[0].l2, d * d * reg[0].dy + 2.0 * d * gamma)
}

/// `|w₀| ≤ ‖w‖_{L²(Ω_R)}/√(2π)` where `w₀ = ŵ₀(R)e^{-iβR}` is the amplitude of
/// the order-0 mode of a field with quasimomentum `-α`.
pub fn mode_amplitude_check(top: &RayleighSpectrum, w_l2: f64, gamma_max: f64) -> Result<Margin> {
    if !(top.height - 1.0 > gamma_max) {
        return Err(Error::Precondition(alloc::format!(
            "R - 1 = {} must exceed max f = {gamma_max}",
            top.height - 1.0
        )));
    }
    let b = beta_n(top.k, top.alpha, 0);
    let w0 = top.get(0) * (Complex64::new(0.0, -1.0) * b * top.height).exp();
    Ok(Margin::of(w0.norm(), w_l2 / PERIOD.sqrt()))
}

/// Mode-amplitude bound for the scattered part `uˢ = u - uⁱ` of a solved
/// one-sided problem. Above `Γ_max` the scattered field is a pure outgoing
/// Rayleigh series, which is what the bound relies on; fields with sources
/// in the strip below `Γ_R` need not satisfy it.
pub fn mode_amplitude_check_scattered(sol: &Solution, gamma_max: f64) -> Result<Margin> {
    let field = &sol.field;
    if field.space.mesh.is_two_sided() {
        return Err(Error::Precondition("scattered-field check needs a one-sided solve".into()));
    }
    let wave = &sol.meta.wave;
    let total = rayleigh_coefficients(field, field.space.mesh.top, sol.meta.n_max, wave.k)?;
    let scat = scattered_upper(&total, wave);
    let incident = ManufacturedField::new(
        wave.alpha,
        alloc::vec![Term { coef: wave.gamma, n: 0, y: Vertical::Exp(Complex64::new(0.0, -wave.beta)) }],
        "incident",
    );
    let (l2, _) = error_against(field, &incident);
    mode_amplitude_check(&scat, l2.sqrt(), gamma_max)
}

/// Outcome of a randomized suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub worst_relative: f64,
    pub failures: usize,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }

    fn record(&mut self, m: &Margin) {
        self.worst_relative = self.worst_relative.min(m.relative());
        if !m.holds() {
            self.failures += 1;
        }
    }

    fn new(name: &str, trials: usize) -> Self {
        Self { name: name.into(), trials, worst_relative: f64::INFINITY, failures: 0 }
    }
}

fn rc(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
}

fn distinct_orders(rng: &mut ChaCha8Rng, count: usize, span: i64) -> Vec<i64> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.random_range(-span..=span);
        if !out.contains(&n) {
            out.push(n);
        }
    }
    out
}

/// Ten random modes, each vanishing on `x₂ = c`.
pub fn random_vanishing_field(rng: &mut ChaCha8Rng, alpha: f64, c: f64) -> ManufacturedField {
    let mut terms = Vec::new();
    for n in distinct_orders(rng, 10, 12) {
        let coef = rc(rng, 1.0);
        match rng.random_range(0..3) {
            0 => terms.push(Term {
                coef,
                n,
                y: Vertical::SinShift { b: Complex64::new(rng.random_range(0.1..4.0), rng.random_range(-2.0..2.0)), c },
            }),
            1 => {
                let (p0, p1) = (rc(rng, 1.0), rc(rng, 1.0));
                terms.push(Term { coef, n, y: Vertical::Poly(alloc::vec![-p0 * c, p0 - p1 * c, p1]) });
            }
            _ => {
                let b = rc(rng, 2.0);
                terms.push(Term { coef: coef * (-b * c).exp(), n, y: Vertical::Exp(b) });
                terms.push(Term { coef: -coef, n, y: Vertical::Poly(alloc::vec![Complex64::new(1.0, 0.0)]) });
            }
        }
    }
    ManufacturedField::new(alpha, terms, "random-vanishing")
}

/// Ten random modes with no boundary condition.
pub fn random_field(rng: &mut ChaCha8Rng, alpha: f64) -> ManufacturedField {
    let mut terms = Vec::new();
    for n in distinct_orders(rng, 10, 12) {
        let coef = rc(rng, 1.0);
        let y = match rng.random_range(0..3) {
            0 => Vertical::Exp(rc(rng, 2.0)),
            1 => Vertical::Poly(alloc::vec![rc(rng, 1.0), rc(rng, 1.0), rc(rng, 1.0)]),
            _ => Vertical::SinShift { b: rc(rng, 3.0), c: rng.random_range(-1.0..1.0) },
        };
        terms.push(Term { coef, n, y });
    }
    ManufacturedField::new(alpha, terms, "random")
}

struct Draw {
    k: f64,
    alpha: f64,
    c: f64,
    r: f64,
}

fn draw(rng: &mut ChaCha8Rng) -> Draw {
    let k = rng.random_range(0.2..3.0);
    let theta: f64 = rng.random_range(-1.4..1.4);
    let c = rng.random_range(-1.0..1.0);
    let r = c + rng.random_range(0.2..3.0);
    Draw { k, alpha: k * theta.sin(), c, r }
}

pub fn trace_inequality_suite(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("trace_inequality", trials);
    for _ in 0..trials {
        let d = draw(&mut rng);
        let v = random_vanishing_field(&mut rng, d.alpha, d.c);
        rep.record(&trace_inequality_check(&v, d.k, d.c, d.r));
    }
    rep
}

pub fn poincare_suite(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("poincare", trials);
    for _ in 0..trials {
        let d = draw(&mut rng);
        let v = random_field(&mut rng, d.alpha);
        let f_minus = d.c - rng.random_range(0.01..2.0);
        rep.record(&poincare_check(&v, d.c, d.r, f_minus));
    }
    rep
}

/// Random outgoing spectra `w = Σ w_n e^{i(α̂_n x₁ + β̂_n x₂)}` over a flat
/// profile, with the `L²` norm over `Ω_R` in closed form.
pub fn mode_amplitude_suite(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("mode_amplitude", trials);
    for _ in 0..trials {
        let d = draw(&mut rng);
        let r = d.c + 1.0 + rng.random_range(0.01..2.0);
        let n_max = 12usize;
        let mut top = RayleighSpectrum::zeros(n_max, -d.alpha, r, d.k);
        let mut l2 = 0.0;
        for n in -(n_max as i64)..=(n_max as i64) {
            if rng.random_range(0.0..1.0) < 0.4 {
                continue;
            }
            let wn = rc(&mut rng, 1.0);
            let b = beta_n(d.k, -d.alpha, n);
            top.set(n, wn * (Complex64::new(0.0, 1.0) * b * r).exp());
            let tau = b.im;
            let depth = if tau == 0.0 {
                r - d.c
            } else {
                ((-2.0 * tau * d.c).exp() - (-2.0 * tau * r).exp()) / (2.0 * tau)
            };
            l2 += PERIOD * wn.norm_sqr() * depth;
        }
        let m = mode_amplitude_check(&top, l2.sqrt(), d.c).expect("R - 1 > c by construction");
        rep.record(&m);
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_margins_vanish() {
        let v = ManufacturedField::new(0.2, Vec::new(), "zero");
        let m = trace_inequality_check(&v, 1.0, 0.0, 1.0);
        assert_eq!(m.margin, 0.0);
        assert!(m.holds());
    }

    #[test]
    fn constant_field_poincare() {
        let v = ManufacturedField::new(
            0.0,
            alloc::vec![Term { coef: Complex64::new(2.0, 0.0), n: 0, y: Vertical::Poly(alloc::vec![Complex64::new(1.0, 0.0)]) }],
            "const",
        );
        let m = poincare_check(&v, 0.0, 1.5, -1.0);
        assert!((m.lhs - 4.0 * PERIOD * 1.5).abs() < 1e-12);
        assert!((m.rhs - 2.0 * 2.5 * 4.0 * PERIOD).abs() < 1e-12);
        assert!(m.holds());
    }

    #[test]
    fn single_mode_equality_over_unit_strip() {
        // Ω_R = D exactly: |w₀| = ‖w‖/√(2π).
        let mut top = RayleighSpectrum::zeros(2, -0.3, 1.0, 1.0);
        let b = beta_n(1.0, -0.3, 0);
        top.set(0, (Complex64::new(0.0, 1.0) * b).exp());
        let m = mode_amplitude_check(&top, PERIOD.sqrt(), -1e-3).unwrap();
        assert!(m.margin.abs() < 1e-14);
        assert!(mode_amplitude_check(&top, 1.0, 0.5).is_err());
    }

    #[test]
    fn vanishing_generator_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_vanishing_field(&mut rng, 0.4, 0.7);
        for x in [0.0, 1.3, 5.9] {
            assert!(v.value(x, 0.7).norm() < 1e-12);
        }
    }

    #[test]
    fn suites_small() {
        assert!(trace_inequality_suite(50, 1).pass());
        assert!(poincare_suite(50, 1).pass());
        assert!(mode_amplitude_suite(50, 1).pass());
    }
}
