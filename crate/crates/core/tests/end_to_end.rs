use std::sync::Arc;

use grating_core::dtn::default_truncation;
use grating_core::fem::{assemble_model, solve, FeSpace, Solution};
use grating_core::geometry::{BoundaryModel, GratingProfile, IncidentWave, ProfileShape, TruncatedDomain};
use grating_core::mesh::generate_mesh;
use grating_core::postprocess::{energy_identity, norm_l2, probe_heights, rayleigh_coefficients, solution_efficiencies};
use grating_core::verify::convergence::error_against;
use grating_core::verify::{flat_dirichlet_oracle, flat_impedance_oracle, flat_transmission_oracle};
use grating_core::Complex64;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn run(domain: &TruncatedDomain, wave: &IncidentWave, bc: &BoundaryModel, h: f64, order: usize) -> Solution {
    let mesh = generate_mesh(domain, h).unwrap();
    let space = FeSpace::new(Arc::new(mesh), order).unwrap();
    solve(&assemble_model(&space, wave, bc, default_truncation(wave.k)).unwrap()).unwrap()
}

#[test]
fn flat_dirichlet_matches_oracle() {
    let domain = TruncatedDomain::one_sided(GratingProfile::flat(0.0), 1.0).unwrap();
    for (k, th) in [(0.5, 0.0), (1.0, 30.0), (2.0, 60.0)] {
        let wave = IncidentWave::from_degrees(k, th, one()).unwrap();
        let sol = run(&domain, &wave, &BoundaryModel::Dirichlet, 0.1, 2);
        let oracle = flat_dirichlet_oracle(&wave, 0.0, sol.meta.n_max);
        let (e2, _) = error_against(&sol.field, &oracle.field);
        let rel = e2.sqrt() / norm_l2(&sol.field);
        let spec = rayleigh_coefficients(&sol.field, 1.0, sol.meta.n_max, k).unwrap();
        let u0 = grating_core::postprocess::scattered_upper(&spec, &wave).get(0);
        println!("k={k} th={th} rel_l2={rel:.3e} u0={u0} res={:.1e}", sol.residual);
        assert!(rel < 1e-3);
        assert!((u0 + one()).norm() < 1e-3);
    }
}

#[test]
fn flat_impedance_matches_oracle() {
    let domain = TruncatedDomain::one_sided(GratingProfile::flat(0.0), 1.0).unwrap();
    for (k, th, lambda) in [(1.0, 30.0, 0.5), (2.0, 0.0, 1.0), (0.5, 60.0, 2.0)] {
        let wave = IncidentWave::from_degrees(k, th, one()).unwrap();
        let sol = run(&domain, &wave, &BoundaryModel::Impedance { lambda }, 0.1, 2);
        let oracle = flat_impedance_oracle(&wave, lambda, 0.0, sol.meta.n_max);
        let spec = rayleigh_coefficients(&sol.field, 1.0, sol.meta.n_max, k).unwrap();
        let a = grating_core::postprocess::scattered_upper(&spec, &wave).get(0);
        let e = energy_identity(&sol).unwrap();
        println!("k={k} th={th} lam={lambda} A={a} want={} id={:.1e}/{:.1e}", oracle.spectrum.get(0), e.real_residual, e.imag_residual);
        assert!((a - oracle.spectrum.get(0)).norm() < 1e-3);
        assert!(e.real_residual.max(e.imag_residual) < 10.0 * sol.residual.max(1e-12));
    }
}

#[test]
fn flat_transmission_matches_oracle() {
    let profile = GratingProfile::flat(0.0).with_f_minus(-0.5).unwrap().with_f_plus(0.5).unwrap();
    let domain = TruncatedDomain::two_sided(profile, 1.0).unwrap();
    for (k, th, km, lambda) in [(1.0, 30.0, 2.0, 1.0), (2.0, 30.0, 0.5, 2.0), (1.0, 0.0, 2.0, 0.5)] {
        let wave = IncidentWave::from_degrees(k, th, one()).unwrap();
        let sol = run(&domain, &wave, &BoundaryModel::Transmission { k_minus: km, lambda }, 0.1, 2);
        let o = flat_transmission_oracle(&wave, km, lambda);
        let up = rayleigh_coefficients(&sol.field, 1.0, sol.meta.n_max, k).unwrap();
        let lo = rayleigh_coefficients(&sol.field, -1.0, sol.meta.n_max, km).unwrap();
        let r = grating_core::postprocess::scattered_upper(&up, &wave).get(0);
        let t = lo.get(0) * (Complex64::new(0.0, -1.0) * o.beta_minus).exp();
        let eff = solution_efficiencies(&sol, probe_heights(0.0, 0.0, 1.0)).unwrap();
        println!("k={k} th={th} km={km} lam={lambda} r={r} want {} t={t} want {} defect={:.2e}", o.r, o.t, eff.balance_defect);
        assert!((r - o.r).norm() < 1e-3);
        assert!((t - o.t).norm() < 1e-3);
    }
}

#[test]
fn sine_dirichlet_balance() {
    let p = GratingProfile::build(ProfileShape::Sine(0.3), 256).unwrap();
    let domain = TruncatedDomain::one_sided(p, 1.8).unwrap();
    let wave = IncidentWave::from_degrees(1.5, 20.0, one()).unwrap();
    let mut last = f64::INFINITY;
    for h in [0.2, 0.1, 0.05] {
        let sol = run(&domain, &wave, &BoundaryModel::Dirichlet, h, 2);
        let eff = solution_efficiencies(&sol, probe_heights(-0.3, 0.3, 1.8)).unwrap();
        println!("h={h} defect={:.3e} n={}", eff.balance_defect, sol.field.space.n_dofs);
        assert!(eff.balance_defect < last);
        last = eff.balance_defect;
    }
}
