//! Radial barriers built from ODI profiles.
//!
//! Interior sub-barrier `U(x) = h(2r - |x - y|)`, exterior super-barrier
//! `V(x) = h(|x - y| - r)`, both on the annulus `r <= |x - y| <= 2r`.

use serde::{Deserialize, Serialize};

use crate::error::BarrierError;
use crate::geometry::{DomainSpec, Point, WitnessKind};
use crate::odi::BarrierProfile;
use crate::pucci::{pucci_minus, pucci_plus, DistanceArgument, StructuralEnvelope, SymMatrix};
use crate::report::VerificationReport;
use crate::sampling::Halton;

type P = Point<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    InteriorSub,
    ExteriorSuper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialBarrier {
    pub center: P,
    pub r: f64,
    pub profile: BarrierProfile,
    pub orientation: Orientation,
    /// Boundary point `w` whose distance feeds the upper envelope.
    pub anchor: Option<P>,
}

/// Value and derivatives of a barrier at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierJet {
    pub value: f64,
    pub gradient: P,
    pub hessian: SymMatrix<f64>,
    /// Profile argument (`2r - rho` or `rho - r`).
    pub arg: f64,
    pub rho: f64,
}

impl RadialBarrier {
    pub fn eval_with_derivatives(&self, x: P) -> Result<BarrierJet, BarrierError> {
        let v = x - self.center;
        let rho = v.norm();
        let (lo, hi) = (self.r * (1.0 - 1e-12), 2.0 * self.r * (1.0 + 1e-12));
        if !(rho >= lo && rho <= hi) {
            return Err(BarrierError::OutOfAnnulus { rho, r: self.r, two_r: 2.0 * self.r });
        }
        let e = v * (1.0 / rho);
        let radial = SymMatrix::outer(e);
        let tangential = SymMatrix::identity().add(&radial.scale(-1.0));
        match self.orientation {
            Orientation::InteriorSub => {
                let arg = (2.0 * self.r - rho).clamp(0.0, self.r);
                let [h, g, d2] = self.profile.eval(arg);
                Ok(BarrierJet {
                    value: h,
                    gradient: e * (-g),
                    hessian: radial.scale(d2).add(&tangential.scale(-g / rho)),
                    arg,
                    rho,
                })
            }
            Orientation::ExteriorSuper => {
                let arg = (rho - self.r).clamp(0.0, self.r);
                let [h, g, d2] = self.profile.eval(arg);
                Ok(BarrierJet {
                    value: h,
                    gradient: e * g,
                    hessian: radial.scale(d2).add(&tangential.scale(g / rho)),
                    arg,
                    rho,
                })
            }
        }
    }

    /// Whether `x` satisfies the comparison hypothesis for this barrier.
    pub fn admissible(&self, x: P, domain: &DomainSpec<f64>) -> bool {
        let rho = x.dist(self.center);
        if !(rho > self.r && rho < 2.0 * self.r) {
            return false;
        }
        let d = domain.boundary_distance(x);
        let tol = 1e-12 * (1.0 + self.r);
        match self.orientation {
            Orientation::InteriorSub => 2.0 * self.r - rho <= d + tol,
            Orientation::ExteriorSuper => {
                let zeta = rho - self.r;
                let dw = self.anchor.map_or(f64::INFINITY, |w| x.dist(w));
                domain.contains(x) && d <= zeta + tol && zeta <= dw + tol
            }
        }
    }
}

/// `64 x 128` polar tensor samples plus `quasi` Halton points of the open annulus.
pub fn annulus_samples(center: P, r: f64, quasi: usize, seed: u64) -> Vec<P> {
    let mut out = Vec::with_capacity(64 * 128 + quasi);
    for i in 0..64 {
        let rho = r * (1.0 + (i as f64 + 0.5) / 64.0);
        for j in 0..128 {
            let th = std::f64::consts::TAU * (j as f64 + 0.5) / 128.0;
            out.push(center + P::polar(rho, th));
        }
    }
    let mut h = Halton::new(2, seed);
    for _ in 0..quasi {
        let v = h.next_point();
        // Area-uniform radius on (r, 2r).
        let rho = r * (1.0 + 3.0 * v[0]).sqrt();
        out.push(center + P::polar(rho, std::f64::consts::TAU * v[1]));
    }
    out
}

/// Samples of the annulus that satisfy the comparison hypothesis.
pub fn admissible_samples(b: &RadialBarrier, domain: &DomainSpec<f64>, seed: u64) -> Vec<P> {
    annulus_samples(b.center, b.r, 1000, seed)
        .into_iter()
        .filter(|&x| b.admissible(x, domain))
        .collect()
}

/// Strict sub/super-solution margin of a barrier on the given samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginSummary {
    /// Largest `F[U]` (sub) or largest `-F[V]` (super); must be negative.
    pub worst_value: f64,
    /// Largest excess over the quantitative bound `-Lambda h' (n/r - 1/rho)`.
    pub worst_bound_excess: f64,
    pub samples: usize,
}

/// Evaluates the envelope on the barrier at every sample.
///
/// Interior: `Phi+ + P+ <= -Lambda h'(Xi) (n/r - 1/|x-y|) < 0`.
/// Exterior: `Phi- + P- >=  Lambda h'(zeta) (n/r - 1/|x-y|) > 0`.
pub fn strict_margin(
    b: &RadialBarrier,
    env: &StructuralEnvelope,
    domain: &DomainSpec<f64>,
    samples: &[P],
) -> Result<MarginSummary, BarrierError> {
    let n = env.n as f64;
    let el = &env.ellipticity;
    let mut worst_value = f64::NEG_INFINITY;
    let mut worst_bound_excess = f64::NEG_INFINITY;
    for &x in samples {
        let jet = b.eval_with_derivatives(x)?;
        let d = domain.boundary_distance(x);
        let dw = b.anchor.map(|w| x.dist(w));
        let tol = 1e-12 * (1.0 + b.r);
        let q = jet.gradient.norm();
        let g = b.profile.derivative(jet.arg);
        let shape = n / b.r - 1.0 / jet.rho;
        let (value, bound, scale) = match b.orientation {
            Orientation::InteriorSub => {
                if jet.arg > d + tol {
                    return Err(BarrierError::HypothesisViolated(format!(
                        "2r - |x - y| = {} exceeds d(x) = {d}",
                        jet.arg
                    )));
                }
                let t = match el.argument {
                    DistanceArgument::ToBoundary => d,
                    DistanceArgument::ToAnchor => dw.unwrap_or(d),
                };
                let p = pucci_plus(&jet.hessian, el.lambda(t), el.cap_lambda(t));
                let phi = env.phi_plus.eval(t, jet.value, q);
                let v = phi + p;
                (v, -el.cap_lambda(jet.arg) * g * shape, 1.0 + p.abs() + phi.abs())
            }
            Orientation::ExteriorSuper => {
                let dw = dw.ok_or_else(|| BarrierError::PreconditionViolated("exterior barrier needs an anchor".into()))?;
                if !(d <= jet.arg + tol && jet.arg <= dw + tol) {
                    return Err(BarrierError::HypothesisViolated(format!(
                        "need d(x) = {d} <= |x - y| - r = {} <= d(x, w) = {dw}",
                        jet.arg
                    )));
                }
                let p = pucci_minus(&jet.hessian, el.lambda(dw), el.cap_lambda(dw));
                let phi = env.phi_minus.eval(dw, jet.value, q);
                let v = phi + p;
                // Flip signs so that both orientations are "must be negative".
                (-v, -el.cap_lambda(jet.arg) * g * shape, 1.0 + p.abs() + phi.abs())
            }
        };
        worst_value = worst_value.max(value / scale);
        worst_bound_excess = worst_bound_excess.max((value - bound) / scale);
    }
    Ok(MarginSummary { worst_value, worst_bound_excess, samples: samples.len() })
}

pub fn margin_report(check_id: &str, m: &MarginSummary) -> VerificationReport {
    const STRICT: f64 = -1e-12;
    const SLACK: f64 = 1e-12;
    let pass = m.samples > 0 && m.worst_value < STRICT && m.worst_bound_excess <= SLACK;
    VerificationReport::new(check_id, pass)
        .measure("worst_scaled_value", m.worst_value)
        .measure("worst_bound_excess", m.worst_bound_excess)
        .measure("samples", m.samples as f64)
        .tolerance("strictness", STRICT)
        .tolerance("bound_slack", SLACK)
}

fn same_length(profile: &BarrierProfile, r: f64) -> Result<(), BarrierError> {
    if (profile.r - r).abs() > 1e-14 * r {
        return Err(BarrierError::PreconditionViolated(format!("profile length {} differs from r = {r}", profile.r)));
    }
    Ok(())
}

/// Interior sub-barrier for `x` within distance `r` of the boundary.
///
/// The centre is that of the interior ball of radius `2r` touching at the
/// closest boundary point, so that `2r - |x - y| = d(x)`.
pub fn place_interior_barrier(
    domain: &DomainSpec<f64>,
    x: P,
    r: f64,
    profile: BarrierProfile,
) -> Result<RadialBarrier, BarrierError> {
    same_length(&profile, r)?;
    let d = domain.signed_distance(x);
    if !(d > 0.0 && d <= r) {
        return Err(BarrierError::PreconditionViolated(format!(
            "need 0 < d(x) <= r, got d(x) = {d}, r = {r}"
        )));
    }
    let foot = domain.nearest_boundary_point(x)?;
    let w = domain.sphere_witness(foot, 2.0 * r, WitnessKind::Interior)?;
    let b = RadialBarrier { center: w.center, r, profile, orientation: Orientation::InteriorSub, anchor: Some(foot) };
    let xi = 2.0 * r - x.dist(w.center);
    if (xi - d).abs() > 1e-12 * (1.0 + r) {
        return Err(BarrierError::PreconditionViolated(format!("2r - |x - y| = {xi} differs from d(x) = {d}")));
    }
    Ok(b)
}

/// Exterior placement: super-barrier at the foot of `x`, the witness centre at `w`,
/// and the certificate that `|y - eta_w| <= |y - eta_x|` on the constraint curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExteriorPlacement {
    pub barrier: RadialBarrier,
    pub eta_x: P,
    pub eta_w: P,
    pub gamma_points: usize,
    /// Largest `|y - eta_w| - |y - eta_x|` over sampled constraint points.
    pub gamma_worst: f64,
}

pub fn place_exterior_barrier(
    domain: &DomainSpec<f64>,
    x: P,
    w: P,
    r: f64,
    profile: BarrierProfile,
) -> Result<ExteriorPlacement, BarrierError> {
    same_length(&profile, r)?;
    let foot = domain.nearest_boundary_point(x)?;
    let ex = domain.sphere_witness(foot, r, WitnessKind::Exterior)?.center;
    let ew = domain.sphere_witness(w, r, WitnessKind::Exterior)?.center;
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for j in 0..720 {
        let dir = P::polar(1.0, std::f64::consts::TAU * j as f64 / 720.0);
        // g(rho) = |y - w| - (rho - r) is nonincreasing along the ray.
        let g = |rho: f64| (ex + dir * rho).dist(w) - (rho - r);
        if let Some(rho) = crate::numerics::bisect(g, r, 2.0 * r, 1e-15 * r, 200) {
            let y = ex + dir * rho;
            worst = worst.max(y.dist(ew) - y.dist(ex));
            count += 1;
        }
    }
    let barrier =
        RadialBarrier { center: ex, r, profile, orientation: Orientation::ExteriorSuper, anchor: Some(w) };
    Ok(ExteriorPlacement { barrier, eta_x: ex, eta_w: ew, gamma_points: count, gamma_worst: worst })
}
