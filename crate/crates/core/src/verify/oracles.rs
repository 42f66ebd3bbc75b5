use num_complex::Complex64;

use super::manufactured::{ManufacturedField, Term, Vertical};
use crate::dtn::{beta_of, RayleighSpectrum};
use crate::geometry::IncidentWave;

fn incident_term(wave: &IncidentWave) -> Term {
    Term { coef: wave.gamma, n: 0, y: Vertical::Exp(Complex64::new(0.0, -wave.beta)) }
}

/// Exact field above a flat profile `x₂ = c` with reflected amplitude `a`.
fn reflected(wave: &IncidentWave, a: Complex64, tag: &str) -> ManufacturedField {
    ManufacturedField::new(
        wave.alpha,
        alloc::vec![incident_term(wave), Term { coef: a, n: 0, y: Vertical::Exp(Complex64::new(0.0, wave.beta)) }],
        tag,
    )
}

/// Closed-form solution over a flat profile together with its scattered spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatOracle {
    pub field: ManufacturedField,
    /// Scattered amplitudes `u_n` (only `n = 0` nonzero).
    pub spectrum: RayleighSpectrum,
}

fn spectrum_with(wave: &IncidentWave, a: Complex64, n_max: usize, height: f64) -> RayleighSpectrum {
    let mut s = RayleighSpectrum::zeros(n_max, wave.alpha, height, wave.k);
    s.set(0, a);
    s
}

/// `u = γe^{iαx₁-iβx₂} - γe^{-2iβc}e^{iαx₁+iβx₂}`, vanishing on `x₂ = c`.
pub fn flat_dirichlet_oracle(wave: &IncidentWave, c: f64, n_max: usize) -> FlatOracle {
    let a = -wave.gamma * Complex64::new(0.0, -2.0 * wave.beta * c).exp();
    FlatOracle { field: reflected(wave, a, "flat-dirichlet"), spectrum: spectrum_with(wave, a, n_max, c) }
}

/// Reflected amplitude `γe^{-2iβc}(β-λ)/(β+λ)` for `∂₂u + iλu = 0` on `x₂ = c`.
pub fn flat_impedance_amplitude(wave: &IncidentWave, lambda: f64, c: f64) -> Complex64 {
    wave.gamma * Complex64::new(0.0, -2.0 * wave.beta * c).exp() * ((wave.beta - lambda) / (wave.beta + lambda))
}

pub fn flat_impedance_oracle(wave: &IncidentWave, lambda: f64, c: f64, n_max: usize) -> FlatOracle {
    let a = flat_impedance_amplitude(wave, lambda, c);
    FlatOracle { field: reflected(wave, a, "flat-impedance"), spectrum: spectrum_with(wave, a, n_max, c) }
}

/// Fresnel-type pair for a flat interface at `x₂ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatTransmissionOracle {
    /// Reflection and transmission ratios relative to `γ`.
    pub r: Complex64,
    pub t: Complex64,
    pub beta_minus: Complex64,
    pub upper: ManufacturedField,
    pub lower: ManufacturedField,
}

impl FlatTransmissionOracle {
    pub fn value(&self, x: f64, y: f64) -> Complex64 {
        if y >= 0.0 {
            self.upper.value(x, y)
        } else {
            self.lower.value(x, y)
        }
    }

    /// `|r|²β⁺ + λ|t|² Re β⁻ - β⁺`, zero for every admissible input.
    pub fn flux_residual(&self, beta_plus: f64, lambda: f64) -> f64 {
        self.r.norm_sqr() * beta_plus + lambda * self.t.norm_sqr() * self.beta_minus.re - beta_plus
    }
}

/// `r = (β⁺ - λβ⁻)/(β⁺ + λβ⁻)`, `t = 2β⁺/(β⁺ + λβ⁻)` with `β⁻ = √(k₋² - α²)`.
pub fn flat_transmission_oracle(wave: &IncidentWave, k_minus: f64, lambda: f64) -> FlatTransmissionOracle {
    let bp = Complex64::new(wave.beta, 0.0);
    let bm = beta_of(k_minus, wave.alpha);
    let den = bp + bm * lambda;
    let r = (bp - bm * lambda) / den;
    let t = bp * 2.0 / den;
    let upper = reflected(wave, wave.gamma * r, "flat-transmission-upper");
    let lower = ManufacturedField::new(
        wave.alpha,
        alloc::vec![Term { coef: wave.gamma * t, n: 0, y: Vertical::Exp(Complex64::new(0.0, -1.0) * bm) }],
        "flat-transmission-lower",
    );
    FlatTransmissionOracle { r, t, beta_minus: bm, upper, lower }
}

/// Solution `W` on `[c, R]` of `W'' + (k² - a²)W = s(x₂)`, `W(c) = 0`,
/// `W'(R) = iβ̂ W(R)` by RK4 shooting with `steps` steps; returns `W` at the
/// `steps + 1` grid points.
pub fn mode_ode_oracle<S: Fn(f64) -> Complex64>(
    k: f64,
    a: f64,
    beta_hat: Complex64,
    c: f64,
    r: f64,
    s: S,
    steps: usize,
) -> alloc::vec::Vec<Complex64> {
    let q = k * k - a * a;
    let h = (r - c) / steps as f64;
    let z = Complex64::new(0.0, 0.0);
    let rhs = |y: f64, w: [Complex64; 2], forced: bool| -> [Complex64; 2] {
        let f = if forced { s(y) } else { z };
        [w[1], f - w[0] * q]
    };
    let run = |start: [Complex64; 2], forced: bool| {
        let mut out = alloc::vec::Vec::with_capacity(steps + 1);
        let mut w = start;
        out.push(w);
        for i in 0..steps {
            let y = c + h * i as f64;
            let k1 = rhs(y, w, forced);
            let k2 = rhs(y + 0.5 * h, [w[0] + k1[0] * (0.5 * h), w[1] + k1[1] * (0.5 * h)], forced);
            let k3 = rhs(y + 0.5 * h, [w[0] + k2[0] * (0.5 * h), w[1] + k2[1] * (0.5 * h)], forced);
            let k4 = rhs(y + h, [w[0] + k3[0] * h, w[1] + k3[1] * h], forced);
            for j in 0..2 {
                w[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
            }
            out.push(w);
        }
        out
    };
    let part = run([z, z], true);
    let hom = run([z, Complex64::new(1.0, 0.0)], false);
    let ib = Complex64::new(0.0, 1.0) * beta_hat;
    let (p, hm) = (part[steps], hom[steps]);
    let cst = -(p[1] - ib * p[0]) / (hm[1] - ib * hm[0]);
    part.iter().zip(&hom).map(|(p, h)| p[0] + cst * h[0]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(k: f64, deg: f64) -> IncidentWave {
        IncidentWave::from_degrees(k, deg, Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn dirichlet_oracle_vanishes_and_is_unimodular() {
        for (k, deg, c) in [(1.0, 0.0, 0.0), (2.0, 30.0, 0.4), (0.5, -60.0, -1.0)] {
            let w = wave(k, deg);
            let o = flat_dirichlet_oracle(&w, c, 4);
            for x in [0.0, 1.0, 4.5] {
                assert!(o.field.value(x, c).norm() < 1e-12);
                assert!(o.field.helmholtz_defect(x, c + 0.3, k).norm() < 1e-12);
            }
            assert!((o.spectrum.get(0).norm() - 1.0).abs() < 1e-14);
        }
        let o = flat_dirichlet_oracle(&wave(1.0, 0.0), 0.0, 2);
        assert!((o.spectrum.get(0) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn impedance_oracle_satisfies_bc() {
        let w = wave(1.3, 20.0);
        for lambda in [0.2, 1.0, 5.0] {
            let o = flat_impedance_oracle(&w, lambda, 0.25, 2);
            for x in [0.0, 2.0] {
                let j = o.field.jet(x, 0.25);
                assert!((j.grad[1] + Complex64::new(0.0, lambda) * j.v).norm() < 1e-12);
            }
            assert!(o.spectrum.get(0).norm() < 1.0);
        }
        let a = flat_impedance_amplitude(&w, w.beta, 0.0);
        assert!(a.norm() < 1e-15);
        let a = flat_impedance_amplitude(&w, 1e-12, 0.3);
        assert!((a - Complex64::new(0.0, -0.6 * w.beta).exp()).norm() < 1e-11);
    }

    #[test]
    fn transmission_oracle_examples() {
        let w = wave(1.0, 0.0);
        let o = flat_transmission_oracle(&w, 2.0, 1.0);
        assert!((o.r - Complex64::new(-1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((o.t - Complex64::new(2.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!(o.flux_residual(w.beta, 1.0).abs() < 1e-14);
        // Interface conditions.
        for x in [0.3, 5.0] {
            let (u, l) = (o.upper.jet(x, 0.0), o.lower.jet(x, 0.0));
            assert!((u.v - l.v).norm() < 1e-14);
            assert!((u.grad[1] - l.grad[1]).norm() < 1e-14);
        }
        let w = wave(2.0, 50.0);
        let o = flat_transmission_oracle(&w, 1.0, 1.5);
        assert_eq!(o.beta_minus.re, 0.0);
        assert!((o.r.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ode_oracle_matches_closed_form() {
        // Homogeneous-free check: s = 0 gives W = 0.
        let w = mode_ode_oracle(1.0, 0.3, Complex64::new(0.95, 0.0), 0.0, 1.5, |_| Complex64::new(0.0, 0.0), 200);
        assert!(w.iter().all(|v| v.norm() == 0.0));
        // Source e^{iby}: W = A e^{iby} + B sin(q(y-c)) + ... verify the ODE residual by differences.
        let (k, a) = (1.2f64, 0.4f64);
        let bt = (k * k - a * a).sqrt();
        let s = |y: f64| Complex64::new(0.0, 0.7 * y).exp();
        let n = 4000;
        let w = mode_ode_oracle(k, a, Complex64::new(bt, 0.0), 0.0, 2.0, s, n);
        let h = 2.0 / n as f64;
        for i in [100, 2000, 3900] {
            let y = h * i as f64;
            let dd = (w[i + 1] - w[i] * 2.0 + w[i - 1]) / (h * h);
            assert!((dd + w[i] * (k * k - a * a) - s(y)).norm() < 1e-5);
        }
        assert!(w[0].norm() == 0.0);
        let d = (w[n] - w[n - 1]) / h;
        assert!((d - Complex64::new(0.0, bt) * w[n]).norm() < 1e-2);
    }
}
