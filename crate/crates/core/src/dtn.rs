//! Rayleigh-mode exponents, Dirichlet-to-Neumann maps and the incident
//! boundary functional.

use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use crate::geometry::IncidentWave;
use crate::{Error, Result, PERIOD};

/// Relative threshold `|β_n| < WOOD_TOL·k` for a Wood anomaly.
pub const WOOD_TOL: f64 = 1e-8;

/// `β_n = √(k² - α_n²)` for `|α_n| ≤ k`, else `i√(α_n² - k²)`, with `α_n = n + α`.
pub fn beta_n(k: f64, alpha: f64, n: i64) -> Complex64 {
    beta_of(k, n as f64 + alpha)
}

/// `β` as a function of the horizontal wavenumber `a`.
pub fn beta_of(k: f64, a: f64) -> Complex64 {
    if a.abs() <= k {
        Complex64::new(((k - a.abs()) * (k + a.abs())).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, ((a.abs() - k) * (a.abs() + k)).sqrt())
    }
}

/// Exponent of the hatted family, `β̂_n(k, α) = β_n(k, -α)`.
pub fn beta_hat_n(k: f64, alpha: f64, n: i64) -> Complex64 {
    beta_n(k, -alpha, n)
}

pub fn is_wood(beta: Complex64, k: f64) -> bool {
    beta.norm() < WOOD_TOL * k
}

/// Default truncation order `⌈k⌉ + 10`.
pub fn default_truncation(k: f64) -> usize {
    k.ceil() as usize + 10
}

/// Error unless every propagating order `|n + α| ≤ k` lies in `-N..=N`.
pub fn check_truncation(k: f64, alpha: f64, n_max: usize) -> Result<()> {
    let lo = (-k - alpha).ceil() as i64;
    let hi = (k - alpha).floor() as i64;
    let worst = if lo.abs() > hi.abs() { lo } else { hi };
    if worst.unsigned_abs() as usize > n_max {
        return Err(Error::TruncationTooSmall { n: n_max, needed: worst });
    }
    Ok(())
}

/// The exponents `α_n`, `β_n` for `n = -N..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeExponents {
    pub k: f64,
    pub alpha: f64,
    pub n_max: usize,
    pub alpha_n: Vec<f64>,
    pub beta_n: Vec<Complex64>,
}

impl ModeExponents {
    pub fn new(k: f64, alpha: f64, n_max: usize) -> Self {
        let orders = -(n_max as i64)..=(n_max as i64);
        let alpha_n: Vec<f64> = orders.clone().map(|n| n as f64 + alpha).collect();
        let beta_n = orders.map(|n| beta_n(k, alpha, n)).collect();
        Self { k, alpha, n_max, alpha_n, beta_n }
    }

    /// The hatted family at quasimomentum `-alpha`.
    pub fn hat(k: f64, alpha: f64, n_max: usize) -> Self {
        Self::new(k, -alpha, n_max)
    }

    pub fn len(&self) -> usize {
        self.beta_n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta_n.is_empty()
    }

    pub fn orders(&self) -> impl Iterator<Item = i64> + Clone {
        -(self.n_max as i64)..=(self.n_max as i64)
    }

    pub fn index(&self, n: i64) -> usize {
        (n + self.n_max as i64) as usize
    }

    pub fn beta(&self, n: i64) -> Complex64 {
        self.beta_n[self.index(n)]
    }

    pub fn is_propagating(&self, n: i64) -> bool {
        self.alpha_n[self.index(n)].abs() <= self.k
    }

    /// Orders with `|α_n| ≤ k`.
    pub fn propagating(&self) -> Vec<i64> {
        self.orders().filter(|&n| self.is_propagating(n)).collect()
    }

    /// Orders at cutoff (`|β_n| < 1e-8·k`).
    pub fn wood_orders(&self) -> Vec<i64> {
        self.orders().filter(|&n| is_wood(self.beta(n), self.k)).collect()
    }

    pub fn wood(&self) -> bool {
        self.beta_n.iter().any(|b| is_wood(*b, self.k))
    }
}

/// Truncated Fourier coefficients of a trace at one height.
///
/// `coeffs[n + N]` multiplies `e^{i(n + alpha)x₁}`. `alpha` is the field's own
/// quasimomentum (`-α` for the auxiliary field) and `k` is the wavenumber of
/// the medium at `height`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayleighSpectrum {
    pub coeffs: Vec<Complex64>,
    pub n_max: usize,
    pub alpha: f64,
    pub height: f64,
    pub k: f64,
}

impl RayleighSpectrum {
    pub fn zeros(n_max: usize, alpha: f64, height: f64, k: f64) -> Self {
        Self { coeffs: alloc::vec![Complex64::new(0.0, 0.0); 2 * n_max + 1], n_max, alpha, height, k }
    }

    pub fn get(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.n_max {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(n + self.n_max as i64) as usize]
    }

    pub fn set(&mut self, n: i64, v: Complex64) {
        let i = (n + self.n_max as i64) as usize;
        self.coeffs[i] = v;
    }

    pub fn orders(&self) -> impl Iterator<Item = i64> {
        -(self.n_max as i64)..=(self.n_max as i64)
    }

    pub fn exponents(&self) -> ModeExponents {
        ModeExponents::new(self.k, self.alpha, self.n_max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Evaluate `Σ g_n e^{i(n+α)x₁}`.
    pub fn eval(&self, x1: f64) -> Complex64 {
        self.orders()
            .map(|n| self.get(n) * Complex64::new(0.0, (n as f64 + self.alpha) * x1).exp())
            .sum()
    }
}

/// Which DtN operator to apply.
///
/// `T` and `T̂` share a formula because a spectrum carries its own
/// quasimomentum; `T̂` is `T` acting on `H_{-α}` traces. `T⁺` is `T` with the
/// upper wavenumber and `T⁻` flips the sign for the lower half-space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtnVariant {
    T,
    THat,
    TPlus,
    TMinus,
}

impl DtnVariant {
    fn sign(self) -> f64 {
        match self {
            DtnVariant::TMinus => -1.0,
            _ => 1.0,
        }
    }
}

/// Multiplier of the `n`-th mode.
pub fn dtn_symbol(k: f64, alpha: f64, n: i64, variant: DtnVariant) -> Complex64 {
    Complex64::new(0.0, variant.sign()) * beta_n(k, alpha, n)
}

/// Coefficient-wise application of a DtN map.
pub fn apply_dtn(spec: &RayleighSpectrum, variant: DtnVariant) -> RayleighSpectrum {
    let mut out = spec.clone();
    for n in spec.orders() {
        out.set(n, dtn_symbol(spec.k, spec.alpha, n, variant) * spec.get(n));
    }
    out
}

/// Diagonal modal entries `2π·(±iβ_n)`, `n = -N..=N`, of the boundary pairing
/// `∫_{Γ_R}(Tu)v̄ ds = Σ entries_n ũ_n conj(ṽ_n)`.
pub fn dtn_bilinear_entries(n_max: usize, k: f64, alpha: f64, variant: DtnVariant) -> Vec<Complex64> {
    (-(n_max as i64)..=(n_max as i64))
        .map(|n| dtn_symbol(k, alpha, n, variant) * PERIOD)
        .collect()
}

/// `⟨Tg, g⟩ = ∫_{Γ}(Tg)ḡ ds`.
pub fn dtn_pairing(spec: &RayleighSpectrum, variant: DtnVariant) -> Complex64 {
    dtn_bilinear_entries(spec.n_max, spec.k, spec.alpha, variant)
        .iter()
        .zip(&spec.coeffs)
        .map(|(e, g)| e * g.norm_sqr())
        .sum()
}

/// `2iβ e^{-iβR} γ`: coefficient of `e^{iαx₁}` in `T(uⁱ) - ∂₂uⁱ` on `Γ_R`.
pub fn incident_functional_coefficient(wave: &IncidentWave, r: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 * wave.beta) * Complex64::new(0.0, -wave.beta * r).exp() * wave.gamma
}
