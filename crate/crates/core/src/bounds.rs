//! Explicit stability constants and certification of solved instances.
//!
//! With `d = R - f₋`:
//! * Dirichlet: `‖u‖_{X_R} ≤ 2√(2π) cosθ |γ| C`, `C² = kM² + 4k⁴d³`.
//! * Impedance: `‖u‖_{H¹} ≤ 2√(2π) cosθ |γ| C*`, `C*² = k(1 + 4k²C̃²/λ)² + 8k⁴C̃²`.
//! * Transmission: weighted norm `≤ 2√(2πk) cosθ |γ| C₁₂` (or `C₁₃`).

use alloc::string::String;
use num_complex::Complex64;
use num_traits::Float;

use crate::geometry::{transmission_case, HypothesisReport, TransmissionCase};
use crate::{Error, Result, PERIOD};

fn prefactor(theta: f64, gamma: Complex64) -> f64 {
    2.0 * PERIOD.sqrt() * theta.cos() * gamma.norm()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletBound {
    pub bound: f64,
    pub m: f64,
    pub c: f64,
}

pub fn dirichlet_bound(k: f64, theta: f64, gamma: Complex64, r: f64, f_minus: f64) -> Result<DirichletBound> {
    let d = r - f_minus;
    if !(d > 0.0) {
        return Err(Error::Precondition(alloc::format!("R - f_minus = {d} must be positive")));
    }
    let m = 4.0 * k.powi(3) * d.powi(3) + 2.0 * k * k * d * d + 4.0 * k * k * d.powi(3) * k * theta.cos() + 1.0;
    let c = (k * m * m + 4.0 * k.powi(4) * d.powi(3)).sqrt();
    Ok(DirichletBound { bound: prefactor(theta, gamma) * c, m, c })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceBound {
    pub bound: f64,
    /// `C̃²`, the auxiliary-problem constant squared.
    pub c_tilde_sq: f64,
    pub c_star: f64,
}

impl ImpedanceBound {
    pub fn c_tilde(&self) -> f64 {
        self.c_tilde_sq.sqrt()
    }
}

/// `C̃²` of the auxiliary estimate; needs `R - f₋ > 1`.
pub fn c_tilde_sq(k: f64, r: f64, f_minus: f64, l: f64) -> Result<f64> {
    let d = r - f_minus;
    if !(d > 1.0) {
        return Err(Error::Precondition(alloc::format!("R - f_minus = {d} must exceed 1")));
    }
    let num = 4.0 * d * d + (2.0 * k + 1.0) * d.powi(3) * (2.0 * k * d + 1.0);
    let c8 = (d - 1.0) / ((2.0 * k + 1.0) * d.powi(3));
    let cl = 1.0 / (1.0 + l * l).sqrt();
    Ok(num / (2.0 * c8.min(cl)))
}

pub fn impedance_bound(
    k: f64,
    theta: f64,
    gamma: Complex64,
    lambda: f64,
    r: f64,
    f_minus: f64,
    l: f64,
) -> Result<ImpedanceBound> {
    if !(lambda > 0.0) {
        return Err(Error::Precondition("impedance must be positive".into()));
    }
    let ct2 = c_tilde_sq(k, r, f_minus, l)?;
    let t = 1.0 + 4.0 * k * k * ct2 / lambda;
    let c_star = (k * t * t + 8.0 * k.powi(4) * ct2).sqrt();
    Ok(ImpedanceBound { bound: prefactor(theta, gamma) * c_star, c_tilde_sq: ct2, c_star })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionBound {
    pub bound: f64,
    pub case: TransmissionCase,
    /// `C_T` (case i) or `C_S` (case ii).
    pub c_ts: f64,
    /// `C₁₂` (case i) or `C₁₃` (case ii).
    pub c_main: f64,
}

/// `None` when neither case of the estimate applies.
#[allow(clippy::too_many_arguments)]
pub fn transmission_bound(
    k_plus: f64,
    k_minus: f64,
    lambda: f64,
    theta: f64,
    gamma: Complex64,
    r: f64,
    f_minus: f64,
    f_plus: f64,
    l: f64,
) -> Option<TransmissionBound> {
    let case = transmission_case(k_plus, k_minus, lambda)?;
    let d = r - f_minus;
    let cl = (1.0 + l * l).sqrt();
    let kmax = k_plus.max(lambda * k_minus);
    let gap = k_plus * k_plus - lambda * k_minus * k_minus;
    let (c_ts, c_main) = match case {
        TransmissionCase::I => {
            let ct = (2.0 / (d * d)).min(gap / (2.0 * d * cl));
            (ct, 2.0 * kmax * (2.0 * k_plus * d + 1.0) / ct + 1.0)
        }
        TransmissionCase::II => {
            let cs = (2.0 / (d * d)).min(-gap / (2.0 * d * cl));
            (cs, 2.0 * kmax * (2.0 * k_plus * (r - f_plus) + 1.0) / cs + 1.0)
        }
    };
    let bound = 2.0 * (PERIOD * k_plus).sqrt() * theta.cos() * gamma.norm() * c_main;
    Some(TransmissionBound { bound, case, c_ts, c_main })
}

/// Relative change between the two finest norms below which a norm counts as converged.
pub const CONVERGENCE_TOL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateStatus {
    /// Ratio computed; `pass` iff `ratio ≤ 1`.
    Certified { ratio: f64, pass: bool },
    /// Norm not converged between the two finest meshes.
    Indeterminate { change: f64 },
    /// Hypotheses fail, a Wood anomaly is present, or no bound applies.
    NoCertificate { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub computed_norm: f64,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    pub status: CertificateStatus,
    pub hypotheses: HypothesisReport,
}

impl StabilityReport {
    pub fn is_certified_pass(&self) -> bool {
        matches!(self.status, CertificateStatus::Certified { pass: true, .. })
    }
}

/// Certify a solve from its norms on successive refinements (coarse to fine).
pub fn certify(norms: &[f64], bound: Option<f64>, hypotheses: HypothesisReport, wood: bool) -> StabilityReport {
    let computed_norm = norms.last().copied().unwrap_or(f64::NAN);
    let ratio = bound.filter(|b| *b > 0.0).map(|b| computed_norm / b);
    let status = if !hypotheses.all_pass() {
        CertificateStatus::NoCertificate { reason: alloc::format!("hypotheses fail: {}", hypotheses.failures()) }
    } else if wood {
        CertificateStatus::NoCertificate { reason: "Wood anomaly".into() }
    } else if bound.is_none() || ratio.is_none() {
        CertificateStatus::NoCertificate { reason: "no applicable bound".into() }
    } else if norms.len() < 2 {
        CertificateStatus::Indeterminate { change: f64::NAN }
    } else {
        let (a, b) = (norms[norms.len() - 2], norms[norms.len() - 1]);
        let change = (b - a).abs() / b.abs().max(f64::MIN_POSITIVE);
        let r = ratio.unwrap_or(f64::NAN);
        if !(change < CONVERGENCE_TOL) {
            CertificateStatus::Indeterminate { change }
        } else {
            CertificateStatus::Certified { ratio: r, pass: r <= 1.0 }
        }
    };
    StabilityReport { computed_norm, bound, ratio, status, hypotheses }
}
