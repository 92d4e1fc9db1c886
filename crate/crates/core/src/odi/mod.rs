//! Ordinary differential inequalities for radial barrier profiles.
//!
//! The lower (subsolution) side is
//! `h'' >= Phi+(t, h, h') / L(t) + (n/r) (Lambda(t)/lambda(t)) h'`, the upper side
//! `h'' <= Phi-(t, h, h') / L(t) - (n/r) (Lambda(t)/lambda(t)) h'`, both with
//! `h(0) = 0` and `h(r)` prescribed.

mod catalog;
mod profile;
mod shoot;

use serde::{Deserialize, Serialize};

pub use catalog::{
    analytic_profile, check_w_gamma, const_rhs_threshold, gradient_power_constants,
    gradient_power_slope_limit, printed_upper_drift_check, w_gamma,
    CatalogProfile, CatalogEntry, DriftFormulaCheck, WGammaCheck,
};
pub use profile::{BarrierProfile, ProfileKind, SampledProfile};
pub use shoot::{shoot_profile, ShootOptions};

use crate::error::OdiError;
use crate::pucci::{EllipticityPair, LowerOrderTerm, SignClass};
use crate::report::VerificationReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// One-dimensional inequality the barrier profile must satisfy on `(0, r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdiSpec {
    pub side: Side,
    pub ellipticity: EllipticityPair,
    pub phi: LowerOrderTerm,
    pub n: u32,
    pub r: f64,
}

impl OdiSpec {
    pub fn new(side: Side, ellipticity: EllipticityPair, phi: LowerOrderTerm, n: u32, r: f64) -> Self {
        Self { side, ellipticity, phi, n, r }
    }

    pub fn validate(&self) -> Result<(), OdiError> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(OdiError::InvalidSpec("r must be positive".into()));
        }
        if self.n < 2 {
            return Err(OdiError::InvalidSpec("dimension n must be at least 2".into()));
        }
        self.ellipticity
            .validate(self.r)
            .map_err(|e| OdiError::InvalidSpec(e.to_string()))?;
        self.phi.validate().map_err(|e| OdiError::InvalidSpec(e.to_string()))
    }

    /// Ellipticity that divides `Phi`: the sign of `Phi` picks `lambda` or `Lambda`.
    pub fn l_at(&self, t: f64) -> f64 {
        if self.l_is_lambda() {
            self.ellipticity.lambda(t)
        } else {
            self.ellipticity.cap_lambda(t)
        }
    }

    /// Whether `L = lambda` (otherwise `L = Lambda`).
    pub fn l_is_lambda(&self) -> bool {
        !matches!(
            (self.side, self.phi.sign_class()),
            (Side::Lower, SignClass::NonPositive) | (Side::Upper, SignClass::NonNegative)
        )
    }

    /// Drift coefficient `(n/r) Lambda(t)/lambda(t)`.
    pub fn drift(&self, t: f64) -> f64 {
        self.n as f64 / self.r * self.ellipticity.cap_lambda(t) / self.ellipticity.lambda(t)
    }

    /// Right-hand side of the inequality at `(t, h, h')`.
    pub fn rhs(&self, t: f64, h: f64, g: f64) -> f64 {
        let phi = match self.phi {
            LowerOrderTerm::Zero => 0.0,
            _ => self.phi.eval(t, h, g) / self.l_at(t),
        };
        match self.side {
            Side::Lower => phi + self.drift(t) * g,
            Side::Upper => phi - self.drift(t) * g,
        }
    }

    /// Signed violation: positive when `h''` is on the wrong side.
    pub fn violation(&self, t: f64, h: f64, g: f64, d2: f64) -> f64 {
        let rhs = self.rhs(t, h, g);
        match self.side {
            Side::Lower => rhs - d2,
            Side::Upper => d2 - rhs,
        }
    }
}

/// Residual summary on a mesh of `(0, r]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    /// Largest signed violation of the inequality (should be `<= 0`).
    pub max_violation: f64,
    /// Largest `|h'' - rhs|` (zero for profiles that solve the equality).
    pub max_abs: f64,
    /// `|h(0)|`.
    pub start_error: f64,
    /// `|h(r) - boundary value|`.
    pub end_error: f64,
    pub points: usize,
}

/// Residual of a profile against its inequality.
///
/// Closed forms are checked at `t_j = j r / 1000`; sampled profiles at their
/// mesh points with `h''` recovered from `h'` by finite differences.
pub fn odi_residual(profile: &BarrierProfile, spec: &OdiSpec) -> ResidualSummary {
    let mut max_violation = f64::NEG_INFINITY;
    let mut max_abs: f64 = 0.0;
    let mut points = 0;
    let mut visit = |t: f64, h: f64, g: f64, d2: f64| {
        let v = spec.violation(t, h, g, d2);
        max_violation = max_violation.max(v);
        max_abs = max_abs.max(v.abs());
        points += 1;
    };
    match &profile.kind {
        ProfileKind::Closed(_) => {
            for j in 1..=1000 {
                let t = spec.r * j as f64 / 1000.0;
                let [h, g, d2] = profile.eval(t);
                visit(t, h, g, d2);
            }
        }
        ProfileKind::Sampled(s) => {
            for j in 1..s.t.len() - 1 {
                let (t0, t1, t2) = (s.t[j - 1], s.t[j], s.t[j + 1]);
                let (g0, g1, g2) = (s.g[j - 1], s.g[j], s.g[j + 1]);
                let (a, b) = (t1 - t0, t2 - t1);
                let d2 = (g2 - g1) * a / (b * (a + b)) + (g1 - g0) * b / (a * (a + b));
                visit(t1, s.h[j], g1, d2);
            }
        }
    }
    ResidualSummary {
        max_violation,
        max_abs,
        start_error: profile.value(0.0).abs(),
        end_error: (profile.value(spec.r) - profile.boundary_value).abs(),
        points,
    }
}

/// Boundary Harnack constant `A = max(sup h_up / h_low, h_up'(0) / h_low'(0))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BhiConstant {
    pub a: f64,
    pub sup_ratio: f64,
    pub slope_ratio: f64,
}

pub fn bhi_constant(lower: &BarrierProfile, upper: &BarrierProfile) -> Result<BhiConstant, OdiError> {
    if (lower.r - upper.r).abs() > 1e-14 * lower.r {
        return Err(OdiError::InvalidSpec("profiles must share the same r".into()));
    }
    let r = lower.r;
    let (l0, u0) = (lower.derivative(0.0), upper.derivative(0.0));
    if !(l0 > 0.0) || !l0.is_finite() {
        return Err(OdiError::UnboundedRatio);
    }
    let slope_ratio = u0 / l0;
    let n = 4096;
    let mut sup_ratio = f64::NEG_INFINITY;
    for j in 1..=n {
        let s = j as f64 / n as f64;
        let t = r * s * s;
        sup_ratio = sup_ratio.max(upper.value(t) / lower.value(t));
    }
    Ok(BhiConstant { a: sup_ratio.max(slope_ratio), sup_ratio, slope_ratio })
}

/// Report wrapper for a residual summary.
pub fn residual_report(
    check_id: &str,
    profile: &BarrierProfile,
    spec: &OdiSpec,
    tol: f64,
) -> VerificationReport {
    let s = odi_residual(profile, spec);
    // Shot profiles only hit the boundary value to the bisection tolerance.
    let rel = if profile.is_closed_form() { 1e-14 } else { ShootOptions::default().rtol };
    let end_tol = rel * profile.boundary_value.abs().max(1.0);
    let pass = s.max_violation <= tol && s.start_error <= end_tol && s.end_error <= end_tol;
    VerificationReport::new(check_id, pass)
        .measure("max_violation", s.max_violation)
        .measure("max_abs_residual", s.max_abs)
        .measure("start_error", s.start_error)
        .measure("end_error", s.end_error)
        .measure("points", s.points as f64)
        .tolerance("violation", tol)
        .tolerance("endpoint", end_tol)
        .fingerprint_of(&(spec, profile.boundary_value))
}
