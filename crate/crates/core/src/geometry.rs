//! Grating profiles, incident waves, boundary models and truncated domains.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use num_complex::Complex64;
use num_traits::Float;

use crate::{Error, Result, PERIOD};

/// Tolerance on `|f(0) - f(2π)|` for a profile to count as periodic.
pub const PERIODICITY_TOL: f64 = 1e-12;

/// How the profile function is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileShape {
    /// `f ≡ c`.
    Flat(f64),
    /// `f(x₁) = a·sin x₁`.
    Sine(f64),
    /// `f(x₁) = a·(|x₁ - π| - π/2)`, slope `±a` with a kink at `π`.
    Saw(f64),
    /// Explicit piecewise-linear profile through `(x₁, f(x₁))` on `[0, 2π]`.
    Knots(Vec<(f64, f64)>),
}

impl ProfileShape {
    fn eval_closed(&self, x: f64) -> f64 {
        match self {
            ProfileShape::Flat(c) => *c,
            ProfileShape::Sine(a) => a * x.sin(),
            ProfileShape::Saw(a) => a * ((x - PI).abs() - FRAC_PI_2),
            ProfileShape::Knots(k) => interpolate(k, x),
        }
    }
}

fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    let i = knots.partition_point(|p| p.0 <= x);
    if i == 0 {
        return knots[0].1;
    }
    if i >= knots.len() {
        return knots[knots.len() - 1].1;
    }
    let (x0, y0) = knots[i - 1];
    let (x1, y1) = knots[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// A 2π-periodic Lipschitz grating profile, stored as a polyline.
///
/// `lipschitz_l` defaults to the largest chord slope of the knots, which is
/// a lower bound for the Lipschitz constant of a closed-form `f`. It can be
/// raised with [`GratingProfile::with_lipschitz`].
#[derive(Debug, Clone, PartialEq)]
pub struct GratingProfile {
    shape: ProfileShape,
    knots: Vec<(f64, f64)>,
    f_minus: f64,
    f_plus: f64,
    gamma_max: f64,
    gamma_min: f64,
    lipschitz_l: f64,
}

impl GratingProfile {
    /// Sample `shape` on `n_samples` uniform intervals of `[0, 2π]`.
    ///
    /// Explicit knot lists are taken as given and `n_samples` is ignored.
    pub fn build(shape: ProfileShape, n_samples: usize) -> Result<Self> {
        let knots = match &shape {
            ProfileShape::Knots(k) => validate_knots(k)?,
            closed => {
                if n_samples < 4 {
                    return Err(Error::InvalidProfile(format!(
                        "n_samples must be at least 4, got {n_samples}"
                    )));
                }
                if let ProfileShape::Flat(a) | ProfileShape::Sine(a) | ProfileShape::Saw(a) = closed {
                    if !a.is_finite() {
                        return Err(Error::InvalidProfile("non-finite parameter".into()));
                    }
                }
                let mut xs: Vec<f64> =
                    (0..=n_samples).map(|i| PERIOD * i as f64 / n_samples as f64).collect();
                if matches!(closed, ProfileShape::Saw(_)) && n_samples % 2 == 1 {
                    let at = xs.partition_point(|x| *x < PI);
                    xs.insert(at, PI);
                }
                let mut k: Vec<(f64, f64)> = xs.iter().map(|&x| (x, closed.eval_closed(x))).collect();
                let mismatch = (k[0].1 - k[k.len() - 1].1).abs();
                if mismatch > PERIODICITY_TOL {
                    return Err(Error::NonPeriodic(mismatch));
                }
                let last = k.len() - 1;
                k[last].1 = k[0].1;
                k
            }
        };
        let gamma_max = knots.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let gamma_min = knots.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let lipschitz_l = knots
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(0.0, f64::max);
        Ok(Self {
            shape,
            knots,
            f_minus: gamma_min - 1.5,
            f_plus: gamma_max + 1.5,
            gamma_max,
            gamma_min,
            lipschitz_l,
        })
    }

    pub fn flat(c: f64) -> Self {
        Self::build(ProfileShape::Flat(c), 8).expect("flat profile is always valid")
    }

    pub fn with_f_minus(mut self, f_minus: f64) -> Result<Self> {
        if !(f_minus < self.gamma_min) {
            return Err(Error::InvalidProfile(format!(
                "f_minus = {f_minus} must lie below min f = {}",
                self.gamma_min
            )));
        }
        self.f_minus = f_minus;
        Ok(self)
    }

    pub fn with_f_plus(mut self, f_plus: f64) -> Result<Self> {
        if !(f_plus >= self.gamma_max) {
            return Err(Error::InvalidProfile(format!(
                "f_plus = {f_plus} must not lie below max f = {}",
                self.gamma_max
            )));
        }
        self.f_plus = f_plus;
        Ok(self)
    }

    /// Override the Lipschitz constant; must not undercut the chord slopes.
    pub fn with_lipschitz(mut self, l: f64) -> Result<Self> {
        if !(l >= self.lipschitz_l) || !l.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "Lipschitz constant {l} is below the max chord slope {}",
                self.lipschitz_l
            )));
        }
        self.lipschitz_l = l;
        Ok(self)
    }

    pub fn shape(&self) -> &ProfileShape {
        &self.shape
    }
    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }
    pub fn f_minus(&self) -> f64 {
        self.f_minus
    }
    pub fn f_plus(&self) -> f64 {
        self.f_plus
    }
    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }
    pub fn gamma_min(&self) -> f64 {
        self.gamma_min
    }
    pub fn lipschitz_l(&self) -> f64 {
        self.lipschitz_l
    }
    pub fn is_flat(&self) -> bool {
        self.gamma_max == self.gamma_min
    }

    /// `f(x₁)`, extended periodically. Closed forms are evaluated exactly.
    pub fn eval(&self, x: f64) -> f64 {
        let mut t = x % PERIOD;
        if t < 0.0 {
            t += PERIOD;
        }
        if x == PERIOD {
            t = PERIOD;
        }
        match &self.shape {
            ProfileShape::Knots(_) => interpolate(&self.knots, t),
            s => s.eval_closed(t),
        }
    }

    /// Abscissae in `(0, 2π)` that a mesh must resolve (kinks and knots).
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            ProfileShape::Saw(a) if *a != 0.0 => alloc::vec![PI],
            ProfileShape::Knots(_) => {
                self.knots[1..self.knots.len() - 1].iter().map(|p| p.0).collect()
            }
            _ => Vec::new(),
        }
    }
}

fn validate_knots(k: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if k.len() < 3 {
        return Err(Error::InvalidProfile(format!("need at least 3 knots, got {}", k.len())));
    }
    if k.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::InvalidProfile("non-finite knot".into()));
    }
    if k[0].0.abs() > PERIODICITY_TOL || (k[k.len() - 1].0 - PERIOD).abs() > 1e-9 {
        return Err(Error::InvalidProfile(format!(
            "knots must span [0, 2π], got [{}, {}]",
            k[0].0,
            k[k.len() - 1].0
        )));
    }
    for w in k.windows(2) {
        if (w[1].0 - w[0].0).abs() <= 1e-14 {
            return Err(Error::DuplicateKnot(w[0].0));
        }
        if w[1].0 < w[0].0 {
            return Err(Error::InvalidProfile(format!("knots not increasing at x1 = {}", w[0].0)));
        }
    }
    let mismatch = (k[0].1 - k[k.len() - 1].1).abs();
    if mismatch > PERIODICITY_TOL {
        return Err(Error::NonPeriodic(mismatch));
    }
    let mut out = k.to_vec();
    out[0].0 = 0.0;
    let last = out.len() - 1;
    out[last] = (PERIOD, out[0].1);
    Ok(out)
}

/// Plane wave `γ e^{iαx₁ - iβx₂}` impinging from above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave {
    pub k: f64,
    pub theta: f64,
    pub gamma: Complex64,
    pub alpha: f64,
    pub beta: f64,
}

impl IncidentWave {
    pub fn new(k: f64, theta: f64, gamma: Complex64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!("wavenumber must be positive, got {k}")));
        }
        if !(theta.abs() < FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!("angle {theta} outside (-π/2, π/2)")));
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter("non-finite amplitude".into()));
        }
        Ok(Self { k, theta, gamma, alpha: k * theta.sin(), beta: k * theta.cos() })
    }

    pub fn from_degrees(k: f64, theta_deg: f64, gamma: Complex64) -> Result<Self> {
        if !(theta_deg.abs() < 90.0) {
            return Err(Error::InvalidParameter(format!("theta_deg {theta_deg} outside (-90, 90)")));
        }
        Self::new(k, theta_deg.to_radians(), gamma)
    }

    /// The incident field at a point.
    pub fn eval(&self, x1: f64, x2: f64) -> Complex64 {
        self.gamma * Complex64::new(0.0, self.alpha * x1 - self.beta * x2).exp()
    }
}

/// Condition imposed on the profile `Γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryModel {
    Dirichlet,
    Impedance { lambda: f64 },
    Transmission { k_minus: f64, lambda: f64 },
}

impl BoundaryModel {
    pub fn validate(&self, k: f64) -> Result<()> {
        match *self {
            BoundaryModel::Dirichlet => Ok(()),
            BoundaryModel::Impedance { lambda } => {
                if lambda > 0.0 && lambda.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("impedance must be positive, got {lambda}")))
                }
            }
            BoundaryModel::Transmission { k_minus, lambda } => {
                if !(k_minus > 0.0 && k_minus.is_finite()) {
                    return Err(Error::InvalidParameter(format!("k_minus must be positive, got {k_minus}")));
                }
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
                }
                if k_minus == k {
                    return Err(Error::InvalidParameter("k_minus must differ from k".into()));
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryModel::Dirichlet => "dirichlet",
            BoundaryModel::Impedance { .. } => "impedance",
            BoundaryModel::Transmission { .. } => "transmission",
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match *self {
            BoundaryModel::Dirichlet => None,
            BoundaryModel::Impedance { lambda } | BoundaryModel::Transmission { lambda, .. } => Some(lambda),
        }
    }

    pub fn is_two_sided(&self) -> bool {
        matches!(self, BoundaryModel::Transmission { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    /// `Ω_R = {f(x₁) < x₂ < R}`.
    OneSided,
    /// The strip `(0, 2π) × (-R, R)` split by `Γ`.
    TwoSided,
}

/// A one-cell computational domain.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedDomain {
    pub profile: GratingProfile,
    pub r: f64,
    pub kind: DomainKind,
}

impl TruncatedDomain {
    pub fn new(profile: GratingProfile, r: f64, kind: DomainKind) -> Result<Self> {
        if !(r > profile.gamma_max) || !r.is_finite() {
            return Err(Error::InvalidDomain(format!("R = {r} must exceed max f = {}", profile.gamma_max)));
        }
        if kind == DomainKind::TwoSided {
            if !(-r < profile.f_minus) {
                return Err(Error::InvalidDomain(format!("-R = {} must lie below f_minus = {}", -r, profile.f_minus)));
            }
            if !(profile.f_plus < r) {
                return Err(Error::InvalidDomain(format!("f_plus = {} must lie below R = {r}", profile.f_plus)));
            }
        }
        Ok(Self { profile, r, kind })
    }

    pub fn one_sided(profile: GratingProfile, r: f64) -> Result<Self> {
        Self::new(profile, r, DomainKind::OneSided)
    }

    pub fn two_sided(profile: GratingProfile, r: f64) -> Result<Self> {
        Self::new(profile, r, DomainKind::TwoSided)
    }
}

/// One named inequality with its signed margin (positive means satisfied).
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub name: &'static str,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HypothesisReport {
    pub checks: Vec<Hypothesis>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Names of failing hypotheses joined by `;`.
    pub fn failures(&self) -> String {
        let mut s = String::new();
        for c in self.checks.iter().filter(|c| !c.pass) {
            if !s.is_empty() {
                s.push(';');
            }
            s.push_str(c.name);
        }
        s
    }

    fn push(&mut self, name: &'static str, margin: f64) {
        self.checks.push(Hypothesis { name, margin, pass: margin > 0.0 });
    }
}

/// Which case of the transmission estimate applies, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransmissionCase {
    /// `λ ≥ 1` and `k₊² > λk₋²`.
    I,
    /// `λ ≤ 1` and `k₊² < λk₋²`.
    II,
}

pub fn transmission_case(k_plus: f64, k_minus: f64, lambda: f64) -> Option<TransmissionCase> {
    let gap = k_plus * k_plus - lambda * k_minus * k_minus;
    if lambda >= 1.0 && gap > 0.0 {
        Some(TransmissionCase::I)
    } else if lambda <= 1.0 && gap < 0.0 {
        Some(TransmissionCase::II)
    } else {
        None
    }
}

/// Check the geometric and parameter hypotheses of the stability theorem
/// matching `bc`. `k` is the upper wavenumber. Never blocks solving.
pub fn validate_hypotheses(domain: &TruncatedDomain, bc: &BoundaryModel, k: f64) -> HypothesisReport {
    let p = &domain.profile;
    let mut rep = HypothesisReport::default();
    match *bc {
        BoundaryModel::Dirichlet => {
            rep.push("f_minus+1<gamma_min", p.gamma_min - (p.f_minus + 1.0));
        }
        BoundaryModel::Impedance { .. } => {
            rep.push("R-1>gamma_max", domain.r - 1.0 - p.gamma_max);
            rep.push("f_minus+1<gamma_min", p.gamma_min - (p.f_minus + 1.0));
        }
        BoundaryModel::Transmission { k_minus, lambda } => {
            rep.push("min_f-f_minus>1", p.gamma_min - p.f_minus - 1.0);
            rep.push("max_f-f_plus<-1", p.f_plus - p.gamma_max - 1.0);
            let gap = (k * k - lambda * k_minus * k_minus).abs();
            let margin = if transmission_case(k, k_minus, lambda).is_some() { gap } else { -gap.max(f64::MIN_POSITIVE) };
            rep.push("transmission_case", margin);
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_profile_stats() {
        let p = GratingProfile::build(ProfileShape::Flat(0.0), 8).unwrap();
        assert_eq!(p.gamma_max(), 0.0);
        assert_eq!(p.gamma_min(), 0.0);
        assert_eq!(p.lipschitz_l(), 0.0);
        assert_eq!(p.knots().len(), 9);
        assert_eq!(p.f_minus(), -1.5);
        assert_eq!(p.f_plus(), 1.5);
    }

    #[test]
    fn sine_lipschitz_close_to_dense_derivative() {
        let p = GratingProfile::build(ProfileShape::Sine(0.3), 256).unwrap();
        let dense = (0..1_000_000)
            .map(|i| (0.3 * (PERIOD * i as f64 / 1e6).cos()).abs())
            .fold(0.0, f64::max);
        assert!(p.lipschitz_l() <= dense + 1e-12);
        assert!((p.lipschitz_l() - dense).abs() < 1e-4);
        assert!((p.gamma_max() - 0.3).abs() < 1e-12);
        assert!((p.gamma_min() + 0.3).abs() < 1e-12);
    }

    #[test]
    fn saw_has_unit_slope_and_kink_knot() {
        for n in [4, 7, 64] {
            let p = GratingProfile::build(ProfileShape::Saw(1.0), n).unwrap();
            assert!((p.lipschitz_l() - 1.0).abs() < 1e-12);
            assert!(p.knots().iter().any(|k| k.0 == PI));
            assert_eq!(p.breakpoints(), alloc::vec![PI]);
        }
    }

    #[test]
    fn rejects_non_periodic_knots() {
        let k = alloc::vec![(0.0, 0.0), (PI, 1.0), (PERIOD, 1e-6)];
        assert!(matches!(
            GratingProfile::build(ProfileShape::Knots(k), 0),
            Err(Error::NonPeriodic(_))
        ));
    }

    #[test]
    fn rejects_duplicate_knots() {
        let k = alloc::vec![(0.0, 0.0), (1.0, 1.0), (1.0, 2.0), (PERIOD, 0.0)];
        assert!(matches!(GratingProfile::build(ProfileShape::Knots(k), 0), Err(Error::DuplicateKnot(_))));
    }

    #[test]
    fn rejects_too_few_samples() {
        assert!(GratingProfile::build(ProfileShape::Sine(0.1), 3).is_err());
    }

    #[test]
    fn knot_profile_interpolates() {
        let k = alloc::vec![(0.0, 0.0), (PI, 1.0), (PERIOD, 0.0)];
        let p = GratingProfile::build(ProfileShape::Knots(k), 0).unwrap();
        assert!((p.eval(PI / 2.0) - 0.5).abs() < 1e-15);
        assert!((p.eval(PERIOD + PI / 2.0) - 0.5).abs() < 1e-15);
        assert!((p.lipschitz_l() - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn wave_components() {
        let w = IncidentWave::from_degrees(2.0, 30.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!((w.alpha * w.alpha + w.beta * w.beta - 4.0).abs() < 1e-14);
        assert!(w.beta > 0.0);
        assert!(IncidentWave::from_degrees(1.0, 90.0, Complex64::new(1.0, 0.0)).is_err());
        assert!(IncidentWave::from_degrees(1.0, -90.0, Complex64::new(1.0, 0.0)).is_err());
        assert!(IncidentWave::new(0.0, 0.0, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn hypotheses_examples() {
        let p = GratingProfile::flat(0.0).with_f_minus(-2.0).unwrap();
        let d = TruncatedDomain::one_sided(p.clone(), 2.0).unwrap();
        assert!(validate_hypotheses(&d, &BoundaryModel::Dirichlet, 1.0).all_pass());

        let d = TruncatedDomain::one_sided(p, 0.5).unwrap();
        let rep = validate_hypotheses(&d, &BoundaryModel::Impedance { lambda: 1.0 }, 1.0);
        assert!(!rep.all_pass());
        assert_eq!(rep.failures(), "R-1>gamma_max");
        assert!((rep.checks[0].margin + 0.5).abs() < 1e-15);

        let p = GratingProfile::flat(0.0);
        let d = TruncatedDomain::two_sided(p, 2.0).unwrap();
        let bc = BoundaryModel::Transmission { k_minus: 1.0, lambda: 1.0 };
        assert!(validate_hypotheses(&d, &bc, 2.0).all_pass());
        assert_eq!(transmission_case(2.0, 1.0, 1.0), Some(TransmissionCase::I));
        assert_eq!(transmission_case(1.0, 2.0, 1.0), Some(TransmissionCase::II));
        assert_eq!(transmission_case(1.0, 1.0, 1.0), None);
        assert!(!validate_hypotheses(&d, &BoundaryModel::Transmission { k_minus: 2.0, lambda: 2.0 }, 2.0).all_pass());
    }

    #[test]
    fn domain_validation() {
        let p = GratingProfile::build(ProfileShape::Sine(0.3), 32).unwrap();
        assert!(TruncatedDomain::one_sided(p.clone(), 0.2).is_err());
        assert!(TruncatedDomain::two_sided(p.clone(), 1.0).is_err());
        assert!(TruncatedDomain::two_sided(p, 2.0).is_ok());
    }

    #[test]
    fn transmission_requires_distinct_wavenumbers() {
        assert!(BoundaryModel::Transmission { k_minus: 1.0, lambda: 1.0 }.validate(1.0).is_err());
        assert!(BoundaryModel::Transmission { k_minus: 1.001, lambda: 1.0 }.validate(1.0).is_ok());
        assert!(BoundaryModel::Impedance { lambda: 0.0 }.validate(1.0).is_err());
    }
}
