//! Shooting on the equality version of the inequality.

use serde::{Deserialize, Serialize};

use super::profile::{BarrierProfile, ProfileKind, SampledProfile};
use super::{OdiSpec, Side};
use crate::error::OdiError;
use crate::numerics::Rk4;
use crate::pucci::{LowerOrderTerm, Sign};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    /// Number of mesh intervals.
    pub intervals: usize,
    /// Relative tolerance on `h(r)`.
    pub rtol: f64,
    pub slope_lo: f64,
    pub slope_hi: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { intervals: 4096, rtol: 1e-9, slope_lo: 1e-12, slope_hi: 1e12 }
    }
}

/// Mesh variable `t = r s^q`; the coefficients of the system in `s` stay finite at `s = 0`.
struct Scaled<'a> {
    spec: &'a OdiSpec,
    q: f64,
    /// `(Lambda/lambda)(t) dt/ds`, constant in `s`.
    ratio_ts: f64,
    /// `dt/ds / L(t) = l_coef s^{l_exp}`.
    l_coef: f64,
    l_exp: f64,
}

impl<'a> Scaled<'a> {
    fn new(spec: &'a OdiSpec) -> Self {
        let el = &spec.ellipticity;
        let e = el.ratio_exponent();
        let q = 1.0 / (1.0 - e);
        let r = spec.r;
        let ratio_ts = el.upper.coef / el.lower.coef * q * r.powf(1.0 - e);
        // L(t) = coef t^p, picked by the sign rule.
        let (l_coefficient, p) = if spec.l_is_lambda() {
            (el.lower.coef, el.lower.exponent)
        } else {
            (el.upper.coef, el.upper.exponent)
        };
        let l_coef = q * r.powf(1.0 - p) / l_coefficient;
        let l_exp = q * (1.0 - p) - 1.0;
        Self { spec, q, ratio_ts, l_coef, l_exp }
    }

    fn t_of(&self, s: f64) -> f64 {
        self.spec.r * s.powf(self.q)
    }

    fn dt_ds(&self, s: f64) -> f64 {
        if self.q == 1.0 {
            self.spec.r
        } else {
            self.spec.r * self.q * s.powf(self.q - 1.0)
        }
    }

    fn rhs(&self, s: f64, y: &[f64; 2]) -> [f64; 2] {
        let (h, g) = (y[0], y[1]);
        let t = self.t_of(s);
        let n_r = self.spec.n as f64 / self.spec.r;
        let phi = match self.spec.phi {
            LowerOrderTerm::Zero => 0.0,
            phi => phi.eval(t, h, g) * self.l_coef * s.powf(self.l_exp),
        };
        let drift = n_r * self.ratio_ts * g;
        let dg = match self.spec.side {
            Side::Lower => phi + drift,
            Side::Upper => phi - drift,
        };
        [g * self.dt_ds(s), dg]
    }
}

enum Shot {
    Done(SampledProfile),
    BlewUp,
}

fn shoot_once(sc: &Scaled, slope: f64, intervals: usize, rk: &Rk4) -> Result<Shot, OdiError> {
    let n = intervals;
    let mut t = Vec::with_capacity(n + 1);
    let mut h = Vec::with_capacity(n + 1);
    let mut g = Vec::with_capacity(n + 1);
    let mut y = [0.0, slope];
    let mut step = 1e-3 / n as f64;
    t.push(0.0);
    h.push(0.0);
    g.push(slope);
    for j in 0..n {
        let (s0, s1) = (j as f64 / n as f64, (j + 1) as f64 / n as f64);
        match rk.integrate(|s, y| sc.rhs(s, y), s0, s1, y, step) {
            Ok((ny, ns)) => {
                y = ny;
                step = ns;
            }
            Err(u) => {
                let growing = y[1].abs() > 1e6 * slope.abs().max(1.0) || !y[1].is_finite();
                let superlinear = matches!(
                    (sc.spec.side, sc.spec.phi),
                    (Side::Lower, LowerOrderTerm::QuadraticDrift { sign: Sign::Plus, .. })
                        | (Side::Lower, LowerOrderTerm::GradientPower { sign: Sign::Plus, .. })
                );
                if superlinear && (growing || u.at > s0) {
                    return Ok(Shot::BlewUp);
                }
                return Err(OdiError::StiffnessFailure { t: sc.t_of(u.at) });
            }
        }
        t.push(sc.t_of(s1));
        h.push(y[0]);
        g.push(y[1]);
    }
    let d2 = t
        .iter()
        .zip(h.iter().zip(&g))
        .map(|(&tt, (&hh, &gg))| {
            if tt == 0.0 && sc.q != 1.0 {
                sc.spec.rhs(1e-300, hh, gg).signum() * f64::INFINITY
            } else {
                sc.spec.rhs(tt, hh, gg)
            }
        })
        .collect();
    Ok(Shot::Done(SampledProfile { grading: sc.q, t, h, g, d2, slope }))
}

fn end_value(shot: &Shot) -> f64 {
    match shot {
        Shot::Done(p) => *p.h.last().expect("nonempty mesh"),
        Shot::BlewUp => f64::INFINITY,
    }
}

/// Solves the equality version of the inequality by shooting on `h'(0)`.
///
/// Log-space bisection over `[slope_lo, slope_hi]`; each shot integrates every
/// mesh interval of `t_j = r (j/N)^q` with adaptive RK4.
pub fn shoot_profile(spec: &OdiSpec, boundary_value: f64, opts: &ShootOptions) -> Result<BarrierProfile, OdiError> {
    spec.validate()?;
    if !(boundary_value > 0.0 && boundary_value.is_finite()) {
        return Err(OdiError::InvalidSpec("boundary value must be positive and finite".into()));
    }
    let sc = Scaled::new(spec);
    let rk = Rk4::default();
    let shoot = |ln_nu: f64| shoot_once(&sc, ln_nu.exp(), opts.intervals, &rk);
    let (mut lo, mut hi) = (opts.slope_lo.ln(), opts.slope_hi.ln());
    let s_lo = shoot(lo)?;
    let v_lo = end_value(&s_lo);
    let s_hi = shoot(hi)?;
    let v_hi = end_value(&s_hi);
    if !(v_lo <= boundary_value && boundary_value <= v_hi) {
        return Err(OdiError::NoBracketingSlope { target: boundary_value, lo_value: v_lo, hi_value: v_hi });
    }
    let mut best = None;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let shot = shoot(mid)?;
        let v = end_value(&shot);
        if (v - boundary_value).abs() <= opts.rtol * boundary_value {
            best = Some(shot);
            break;
        }
        if v < boundary_value {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            best = Some(shot);
            break;
        }
    }
    let prof = match best {
        Some(Shot::Done(p)) => p,
        _ => return Err(OdiError::StiffnessFailure { t: spec.r }),
    };
    if let Some(j) = prof.g.iter().position(|&g| !(g > 0.0)) {
        return Err(OdiError::MonotonicityViolated(format!("h' <= 0 at t = {}", prof.t[j])));
    }
    Ok(BarrierProfile {
        side: spec.side,
        r: spec.r,
        boundary_value,
        kind: ProfileKind::Sampled(prof),
    })
}
