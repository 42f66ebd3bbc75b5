use alloc::string::String;
use alloc::vec::Vec;

use crate::bounds::c_tilde_sq;
use crate::fem::{assemble_auxiliary, solve, ProblemKind, Solution};
use crate::geometry::{validate_hypotheses, BoundaryModel, TruncatedDomain};
use crate::postprocess::{norm_l2, profile_flux_l2};
use crate::{Error, Result};
use num_traits::Float;

/// Relative agreement required of the profile flux on the two finest meshes.
pub const FLUX_AGREEMENT: f64 = 0.05;

/// The auxiliary solution on one mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryLevel {
    pub u_l2: f64,
    pub w_l2: f64,
    pub flux: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AuxiliaryStatus {
    Pass,
    Fail,
    Indeterminate(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryReport {
    pub levels: Vec<AuxiliaryLevel>,
    pub c_tilde: f64,
    /// `(‖w‖ + ‖∂_ν w‖_Γ) / (C̃‖u‖)` on the finest mesh.
    pub ratio: f64,
    pub flux_change: f64,
    pub status: AuxiliaryStatus,
}

impl AuxiliaryReport {
    pub fn pass(&self) -> bool {
        self.status == AuxiliaryStatus::Pass
    }
}

/// Solve the auxiliary problem with source `u` on its own mesh.
pub fn auxiliary_level(sol: &Solution) -> Result<AuxiliaryLevel> {
    let sys = assemble_auxiliary(&sol.meta.wave, &sol.field, sol.meta.n_max)?;
    let w = solve(&sys)?;
    Ok(AuxiliaryLevel { u_l2: norm_l2(&sol.field), w_l2: norm_l2(&w.field), flux: profile_flux_l2(&w.field), residual: w.residual })
}

/// Check `‖w‖ + ‖∂_ν w‖_{L²(Γ)} ≤ C̃‖u‖` for impedance solves of the same
/// problem ordered coarse to fine; only the two finest are used.
pub fn auxiliary_bound_check(domain: &TruncatedDomain, solutions: &[Solution]) -> Result<AuxiliaryReport> {
    let Some(last) = solutions.last() else {
        return Err(Error::Precondition("no solutions supplied".into()));
    };
    let ProblemKind::Impedance { lambda } = last.meta.kind else {
        return Err(Error::Precondition("auxiliary check needs impedance solves".into()));
    };
    let k = last.meta.wave.k;
    let hyp = validate_hypotheses(domain, &BoundaryModel::Impedance { lambda }, k);
    if !hyp.all_pass() {
        return Err(Error::Precondition(alloc::format!("hypotheses fail: {}", hyp.failures())));
    }
    let p = &domain.profile;
    let c_tilde = c_tilde_sq(k, domain.r, p.f_minus(), p.lipschitz_l())?.sqrt();
    let start = solutions.len().saturating_sub(2);
    let mut levels = Vec::new();
    for s in &solutions[start..] {
        match auxiliary_level(s) {
            Ok(l) => levels.push(l),
            Err(e) => {
                return Ok(AuxiliaryReport {
                    levels,
                    c_tilde,
                    ratio: f64::NAN,
                    flux_change: f64::NAN,
                    status: AuxiliaryStatus::Indeterminate(alloc::format!("auxiliary solve failed: {e}")),
                })
            }
        }
    }
    let fine = levels[levels.len() - 1];
    let ratio = if fine.u_l2 == 0.0 { 0.0 } else { (fine.w_l2 + fine.flux) / (c_tilde * fine.u_l2) };
    let flux_change = if levels.len() < 2 {
        f64::NAN
    } else if fine.flux == 0.0 && levels[0].flux == 0.0 {
        0.0
    } else {
        (fine.flux - levels[0].flux).abs() / fine.flux.max(f64::MIN_POSITIVE)
    };
    let status = if fine.u_l2 == 0.0 {
        AuxiliaryStatus::Pass
    } else if !(flux_change <= FLUX_AGREEMENT) {
        AuxiliaryStatus::Indeterminate(alloc::format!("flux change {flux_change:.3e} between the two finest meshes"))
    } else if ratio <= 1.0 {
        AuxiliaryStatus::Pass
    } else {
        AuxiliaryStatus::Fail
    };
    Ok(AuxiliaryReport { levels, c_tilde, ratio, flux_change, status })
}
