//! Rayleigh spectra, efficiencies, energy identities and the norms used by
//! the stability estimates.

use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use crate::dtn::{beta_n, dtn_pairing, incident_functional_coefficient, is_wood, DtnVariant, RayleighSpectrum};
use crate::fem::{line_modes, DiscreteField, ElementGeometry, ProblemKind, Solution, TraceModes};
use crate::geometry::IncidentWave;
use crate::mesh::{BoundaryTag, Region};
use crate::quadrature::{LineRule, TriangleRule};
use crate::{Error, Result, PERIOD};

/// `ũ_n = (1/2π)∫ ũ(x₁, height) e^{-inx₁} dx₁` for `n = -N..=N`.
///
/// On `x₂ = ±R` the tagged boundary edges are used; elsewhere the restriction
/// to the line is integrated exactly triangle by triangle. `k` is the
/// wavenumber of the medium at `height`.
pub fn rayleigh_coefficients(field: &DiscreteField, height: f64, n_max: usize, k: f64) -> Result<RayleighSpectrum> {
    let mesh = &field.space.mesh;
    let tol = 1e-12 * (1.0 + height.abs());
    let tag = if (height - mesh.top).abs() <= tol {
        Some(BoundaryTag::GammaRPlus)
    } else if mesh.bottom.is_some_and(|b| (height - b).abs() <= tol) {
        Some(BoundaryTag::GammaRMinus)
    } else {
        None
    };
    let coeffs = match tag {
        Some(t) => TraceModes::new(&field.space, t, n_max)?.modes(&field.dofs),
        None => line_modes(field, height, n_max)?,
    };
    Ok(RayleighSpectrum { coeffs, n_max, alpha: field.alpha, height, k })
}

/// Diagnostic path: DFT of `samples` point values on the line (aliases on
/// coarse meshes, unlike [`rayleigh_coefficients`]).
pub fn rayleigh_coefficients_sampled(
    field: &DiscreteField,
    height: f64,
    n_max: usize,
    k: f64,
    samples: usize,
) -> Result<RayleighSpectrum> {
    let mut vals = Vec::with_capacity(samples);
    for s in 0..samples {
        let x = PERIOD * s as f64 / samples as f64;
        let v = field.eval(x, height).ok_or(Error::HeightOutsideMesh(height))?;
        vals.push(v * Complex64::new(0.0, -field.alpha * x).exp());
    }
    let mut spec = RayleighSpectrum::zeros(n_max, field.alpha, height, k);
    for n in -(n_max as i64)..=(n_max as i64) {
        let c: Complex64 = vals
            .iter()
            .enumerate()
            .map(|(s, v)| v * Complex64::new(0.0, -(n as f64) * PERIOD * s as f64 / samples as f64).exp())
            .sum();
        spec.set(n, c / samples as f64);
    }
    Ok(spec)
}

/// Scattered amplitudes `u_n` of `uˢ = Σ u_n e^{iα_n x₁ + iβ_n x₂}` from the
/// total-field spectrum above the grating.
pub fn scattered_upper(total: &RayleighSpectrum, wave: &IncidentWave) -> RayleighSpectrum {
    let h = total.height;
    let mut out = total.clone();
    for n in total.orders() {
        let b = beta_n(total.k, total.alpha, n);
        let mut v = total.get(n);
        if n == 0 {
            v -= wave.gamma * Complex64::new(0.0, -wave.beta * h).exp();
        }
        out.set(n, v * (Complex64::new(0.0, -1.0) * b * h).exp());
    }
    out
}

/// Amplitudes `u⁻_n` of `u = Σ u⁻_n e^{iα_n x₁ - iβ⁻_n x₂}` below the grating.
pub fn scattered_lower(total: &RayleighSpectrum) -> RayleighSpectrum {
    let h = total.height;
    let mut out = total.clone();
    for n in total.orders() {
        let b = beta_n(total.k, total.alpha, n);
        out.set(n, total.get(n) * (Complex64::new(0.0, 1.0) * b * h).exp());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderEfficiency {
    pub n: i64,
    pub amplitude: Complex64,
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyTable {
    pub reflected: Vec<OrderEfficiency>,
    pub transmitted: Vec<OrderEfficiency>,
    /// `|Σ e_n - 1|`.
    pub balance_defect: f64,
    /// False when a propagating order is at cutoff.
    pub reliable: bool,
}

impl EfficiencyTable {
    pub fn total(&self) -> f64 {
        self.reflected.iter().chain(&self.transmitted).map(|o| o.efficiency).sum()
    }
}

/// Flux-normalised efficiencies of the propagating orders. `lower` is the
/// total-field spectrum below a penetrable grating, weighted by `lambda`.
pub fn efficiencies(
    upper: &RayleighSpectrum,
    lower: Option<(&RayleighSpectrum, f64)>,
    wave: &IncidentWave,
) -> Result<EfficiencyTable> {
    let g2 = wave.gamma.norm_sqr();
    if g2 == 0.0 {
        return Err(Error::Precondition("efficiencies need a nonzero incident amplitude".into()));
    }
    let mut reliable = true;
    let up = scattered_upper(upper, wave);
    let ex = up.exponents();
    let mut reflected = Vec::new();
    for n in ex.propagating() {
        let b = ex.beta(n).re;
        reliable &= !is_wood(ex.beta(n), ex.k);
        let a = up.get(n);
        reflected.push(OrderEfficiency { n, amplitude: a, efficiency: b / wave.beta * a.norm_sqr() / g2 });
    }
    let mut transmitted = Vec::new();
    if let Some((lo, lambda)) = lower {
        let down = scattered_lower(lo);
        let ex = down.exponents();
        for n in ex.propagating() {
            let b = ex.beta(n).re;
            reliable &= !is_wood(ex.beta(n), ex.k);
            let a = down.get(n);
            transmitted.push(OrderEfficiency { n, amplitude: a, efficiency: lambda * b / wave.beta * a.norm_sqr() / g2 });
        }
    }
    let mut t = EfficiencyTable { reflected, transmitted, balance_defect: 0.0, reliable };
    t.balance_defect = (t.total() - 1.0).abs();
    Ok(t)
}

/// Heights midway between the profile extremes and `±R`, where the Rayleigh
/// expansion holds but discretisation error is still visible.
pub fn probe_heights(gamma_min: f64, gamma_max: f64, r: f64) -> (f64, f64) {
    (0.5 * (gamma_max + r), 0.5 * (gamma_min - r))
}

/// Efficiencies of a solved field, extracted at `heights = (upper, lower)`.
pub fn solution_efficiencies(sol: &Solution, heights: (f64, f64)) -> Result<EfficiencyTable> {
    let wave = &sol.meta.wave;
    let n = sol.meta.n_max;
    let up = rayleigh_coefficients(&sol.field, heights.0, n, wave.k)?;
    match sol.meta.kind {
        ProblemKind::Transmission { k_minus, lambda } => {
            let lo = rayleigh_coefficients(&sol.field, heights.1, n, k_minus)?;
            efficiencies(&up, Some((&lo, lambda)), wave)
        }
        ProblemKind::Auxiliary => Err(Error::Precondition("the auxiliary field has no efficiencies".into())),
        _ => efficiencies(&up, None, wave),
    }
}

/// Per-region integrals of `|u|²`, `|∇u|²` and `|∂₂u|²` of the physical field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionIntegrals {
    pub l2: f64,
    pub grad: f64,
    pub dy: f64,
}

pub fn region_integrals(field: &DiscreteField) -> [RegionIntegrals; 2] {
    let mesh = &field.space.mesh;
    let rule = TriangleRule::of_order(4);
    let mut out = [RegionIntegrals::default(); 2];
    for t in 0..mesh.triangles.len() {
        let geo = ElementGeometry::of(mesh, t);
        let slot = match mesh.regions[t] {
            Region::Upper => 0,
            Region::Lower => 1,
        };
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let (v, g) = field.physical(t, &geo, *l);
            let wq = w * 2.0 * geo.area;
            out[slot].l2 += wq * v.norm_sqr();
            out[slot].grad += wq * (g[0].norm_sqr() + g[1].norm_sqr());
            out[slot].dy += wq * g[1].norm_sqr();
        }
    }
    out
}

pub fn norm_l2(field: &DiscreteField) -> f64 {
    let r = region_integrals(field);
    (r[0].l2 + r[1].l2).sqrt()
}

/// `‖u‖²_{X_R} = k²‖u‖² + ‖∇u‖²` over the whole mesh.
pub fn norm_xr(field: &DiscreteField, k: f64) -> f64 {
    let r = region_integrals(field);
    (k * k * (r[0].l2 + r[1].l2) + r[0].grad + r[1].grad).sqrt()
}

/// `∫ a(|∇u|² + k(x)²|u|²)` with `a = 1, k` above and `a = λ, k₋` below.
pub fn norm_weighted(field: &DiscreteField, k: f64, k_minus: f64, lambda: f64) -> f64 {
    let r = region_integrals(field);
    (r[0].grad + k * k * r[0].l2 + lambda * (r[1].grad + k_minus * k_minus * r[1].l2)).sqrt()
}

/// `∫_{edges with tag} |u|² ds`.
pub fn boundary_l2_sq(field: &DiscreteField, tag: BoundaryTag) -> f64 {
    let mesh = &field.space.mesh;
    let g = LineRule::gauss(4);
    let mut seen = alloc::collections::BTreeSet::new();
    let mut acc = 0.0;
    for (t, k, e) in mesh.edge_owners(tag) {
        if !seen.insert((e.a, e.b)) {
            continue;
        }
        let geo = ElementGeometry::of(mesh, t);
        let len = (geo.p[(k + 1) % 3][0] - geo.p[k][0]).hypot(geo.p[(k + 1) % 3][1] - geo.p[k][1]);
        acc += g.integrate(0.0, 1.0, |s| {
            let mut l = [0.0; 3];
            l[k] = 1.0 - s;
            l[(k + 1) % 3] = s;
            field.local(t, &geo, l).0.norm_sqr()
        }) * len;
    }
    acc
}

/// `‖∂_ν u‖_{L²(Γ)}` from the gradient of the triangle above each profile
/// edge, `ν` the upward unit normal.
pub fn profile_flux_l2(field: &DiscreteField) -> f64 {
    let mesh = &field.space.mesh;
    let g = LineRule::gauss(4);
    let mut acc = 0.0;
    for (t, k, _) in mesh.edge_owners(BoundaryTag::GammaProfile) {
        if mesh.regions[t] != Region::Upper {
            continue;
        }
        let geo = ElementGeometry::of(mesh, t);
        let (p, q) = (geo.p[k], geo.p[(k + 1) % 3]);
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        let mut nu = [-(q[1] - p[1]) / len, (q[0] - p[0]) / len];
        if nu[1] < 0.0 {
            nu = [-nu[0], -nu[1]];
        }
        acc += g.integrate(0.0, 1.0, |s| {
            let mut l = [0.0; 3];
            l[k] = 1.0 - s;
            l[(k + 1) % 3] = s;
            let (_, gr) = field.physical(t, &geo, l);
            (gr[0] * nu[0] + gr[1] * nu[1]).norm_sqr()
        }) * len;
    }
    acc.sqrt()
}

/// `(Σ (k² + α_n²)^{1/2} |ũ_n|²)^{1/2}`.
pub fn trace_half_norm(spec: &RayleighSpectrum) -> f64 {
    spec.orders()
        .map(|n| {
            let a = n as f64 + spec.alpha;
            (spec.k * spec.k + a * a).sqrt() * spec.get(n).norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// `(∫₀^{2π} |u(x₁, R)|² dx₁, 2π Σ |ũ_n|²)`.
pub fn parseval_pair(field: &DiscreteField, spec: &RayleighSpectrum) -> (f64, f64) {
    let tag = if spec.height < 0.0 && field.space.mesh.bottom.is_some() {
        BoundaryTag::GammaRMinus
    } else {
        BoundaryTag::GammaRPlus
    };
    let lhs = boundary_l2_sq(field, tag);
    let rhs = PERIOD * spec.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>();
    (lhs, rhs)
}

/// Terms of the variational identity `a(u, u) = F(u)` evaluated
/// independently of the assembled matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyIdentity {
    /// `Σ a∫ |∇u|² - k²|u|²`.
    pub volume: f64,
    /// `⟨T⁺u, u⟩` on the top line.
    pub dtn_top: Complex64,
    /// `⟨T⁻u, u⟩` on the bottom line (transmission).
    pub dtn_bottom: Complex64,
    /// `∫_Γ |u|² ds` (impedance).
    pub profile_mass: f64,
    /// `F(u) = -2π g conj(ũ₀)`.
    pub load: Complex64,
    /// `|Re(a(u,u) - F(u))| / (‖x‖‖b‖)`.
    pub real_residual: f64,
    /// `|Im(a(u,u) - F(u))| / (‖x‖‖b‖)`.
    pub imag_residual: f64,
}

/// Real and imaginary energy identities of a solved primal problem.
pub fn energy_identity(sol: &Solution) -> Result<EnergyIdentity> {
    let wave = &sol.meta.wave;
    let n = sol.meta.n_max;
    let f = &sol.field;
    let reg = region_integrals(f);
    let top = RayleighSpectrum {
        coeffs: TraceModes::new(&f.space, BoundaryTag::GammaRPlus, n)?.modes(&f.dofs),
        n_max: n,
        alpha: f.alpha,
        height: sol.meta.r,
        k: wave.k,
    };
    let dtn_top = dtn_pairing(&top, DtnVariant::T);
    let g = incident_functional_coefficient(wave, sol.meta.r);
    let load = -g * top.get(0).conj() * PERIOD;
    let k2 = wave.k * wave.k;
    let zero = Complex64::new(0.0, 0.0);
    let (volume, dtn_bottom, profile_mass, a) = match sol.meta.kind {
        ProblemKind::Dirichlet => {
            let v = reg[0].grad - k2 * reg[0].l2;
            (v, zero, 0.0, Complex64::new(v, 0.0) - dtn_top)
        }
        ProblemKind::Impedance { lambda } => {
            let v = reg[0].grad - k2 * reg[0].l2;
            let m = boundary_l2_sq(f, BoundaryTag::GammaProfile);
            (v, zero, m, Complex64::new(v, -lambda * m) - dtn_top)
        }
        ProblemKind::Transmission { k_minus, lambda } => {
            let v = reg[0].grad - k2 * reg[0].l2 + lambda * (reg[1].grad - k_minus * k_minus * reg[1].l2);
            let bot = RayleighSpectrum {
                coeffs: TraceModes::new(&f.space, BoundaryTag::GammaRMinus, n)?.modes(&f.dofs),
                n_max: n,
                alpha: f.alpha,
                height: -sol.meta.r,
                k: k_minus,
            };
            let db = dtn_pairing(&bot, DtnVariant::TMinus);
            (v, db, 0.0, Complex64::new(v, 0.0) - dtn_top + db * lambda)
        }
        ProblemKind::Auxiliary => {
            return Err(Error::Precondition("energy identity is defined for the primal problems".into()))
        }
    };
    let scale = (sol.free_norm * sol.rhs_norm).max(f64::MIN_POSITIVE);
    let d = a - load;
    Ok(EnergyIdentity {
        volume,
        dtn_top,
        dtn_bottom,
        profile_mass,
        load,
        real_residual: d.re.abs() / scale,
        imag_residual: d.im.abs() / scale,
    })
}
