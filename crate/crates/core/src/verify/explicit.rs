//! Explicit solutions: sector exponents and angular profiles, flat exponents,
//! and discrete residuals of closed-form solutions.

use serde::{Deserialize, Serialize};

use crate::error::VerifyError;
use crate::geometry::Point;
use crate::grid::{residual_field, Grid, NodeKind, Region, SchemeId};
use crate::numerics::{bisect, hermite3, Rk4};
use crate::pucci::ModelOperator;
use crate::report::VerificationReport;

type P = Point<f64>;

/// Homogeneity `k(nu, p)` of the positive p-harmonic function in the sector
/// of opening `pi / nu` that vanishes on its sides.
pub fn sector_exponent(nu: f64, p: f64) -> Result<f64, VerifyError> {
    if !(nu > 0.5 && nu.is_finite() && p > 1.0 && p.is_finite()) {
        return Err(VerifyError::InvalidArgument(format!("need nu > 1/2 and p > 1, got nu = {nu}, p = {p}")));
    }
    let rad = (1.0 - 2.0 * nu) * (p - 2.0).powi(2) + nu * nu * p * p;
    if rad < 0.0 {
        return Err(VerifyError::ComplexRadicand);
    }
    let num = (nu - 1.0) * rad.sqrt() + (2.0 - p) * (1.0 - 2.0 * nu) + nu * nu * p;
    Ok(num / (2.0 * (p - 1.0) * (2.0 * nu - 1.0)))
}

/// Right-hand side of the angular equation for `u = r^k f(phi)`.
fn angular_rhs(k: f64, p: f64, f: f64, fp: f64) -> f64 {
    let q = k * k * f * f + fp * fp;
    let num = (p - 2.0) * k * k * f * fp * fp + k * (k * (p - 1.0) - (p - 2.0)) * q * f;
    -num / (k * k * f * f + (p - 1.0) * fp * fp)
}

const RK: Rk4 = Rk4 { atol: 1e-14, rtol: 1e-13, max_steps: 1_000_000 };

fn integrate(k: f64, p: f64, y: [f64; 2], a: f64, b: f64) -> Result<[f64; 2], VerifyError> {
    RK.integrate(|_, y| [y[1], angular_rhs(k, p, y[0], y[1])], a, b, y, (b - a).max(1e-6))
        .map(|(y, _)| y)
        .map_err(|e| VerifyError::ShootingFailed(format!("integrator underflow at phi = {}", e.at)))
}

/// First zero of `f` with `f(0) = 1, f'(0) = 0`, searched on `(0, phi_max]`.
fn first_zero(k: f64, p: f64, phi_max: f64) -> Result<Option<f64>, VerifyError> {
    let steps = 512;
    let dphi = phi_max / steps as f64;
    let mut y = [1.0, 0.0];
    for j in 0..steps {
        let a = j as f64 * dphi;
        let next = integrate(k, p, y, a, a + dphi)?;
        if next[0] <= 0.0 {
            let start = y;
            let z = bisect(
                |b| integrate(k, p, start, a, b).map(|v| v[0]).unwrap_or(f64::NAN),
                a,
                a + dphi,
                1e-15,
                200,
            );
            return Ok(z);
        }
        y = next;
    }
    Ok(None)
}

/// Sampled angular profile `f_{nu,p}` on `[0, extent]` with the certificates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorProfile {
    pub nu: f64,
    pub p: f64,
    /// Closed-form exponent.
    pub k: f64,
    /// Exponent recovered by shooting on the zero location.
    pub k_shot: f64,
    /// Half-opening `pi / (2 nu)`.
    pub half_angle: f64,
    pub zero_angle: f64,
    pub phi: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    /// `|f(half_angle)|`.
    pub end_value: f64,
    pub max_value: f64,
    pub min_value: f64,
    /// `min -f'` on `[half_angle / 4, half_angle]`.
    pub min_slope_away: f64,
}

impl SectorProfile {
    /// `f(phi)` by cubic Hermite interpolation (even in `phi`).
    pub fn eval(&self, phi: f64) -> f64 {
        let a = phi.abs();
        let n = self.phi.len() - 1;
        let step = self.phi[n] / n as f64;
        let j = ((a / step) as usize).min(n - 1);
        hermite3(self.phi[j], self.phi[j + 1], [self.f[j], self.fp[j]], [self.f[j + 1], self.fp[j + 1]], a)[0]
    }

    /// `r^k f(phi)` about `apex`.
    pub fn solution(&self, apex: P, x: P) -> f64 {
        let v = x - apex;
        v.norm().powf(self.k) * self.eval(v.angle())
    }
}

/// Profile extent past the zero, so neighbours outside the sector are available.
const OVERSHOOT: f64 = 1.25;

/// Integrates the angular equation at `k(nu, p)`, recovers `k` independently by
/// shooting on the zero location, and samples `f` on `mesh` intervals of
/// `[0, 1.25 pi / (2 nu)]` (capped at `pi`).
pub fn sector_profile(nu: f64, p: f64, mesh: usize) -> Result<SectorProfile, VerifyError> {
    let k = sector_exponent(nu, p)?;
    if mesh < 8 {
        return Err(VerifyError::InvalidArgument("mesh needs at least 8 intervals".into()));
    }
    let half = std::f64::consts::FRAC_PI_2 / nu;
    let extent = (OVERSHOOT * half).min(std::f64::consts::PI);
    let zero_angle = first_zero(k, p, 2.0 * half)?
        .ok_or_else(|| VerifyError::ShootingFailed(format!("no zero of f before {}", 2.0 * half)))?;

    // Larger k turns faster, so the zero location decreases in k.
    let miss = |kk: f64| -> f64 {
        match first_zero(kk, p, 4.0 * half) {
            Ok(Some(z)) => z - half,
            // No zero in range: turning too slowly.
            _ => 3.0 * half,
        }
    };
    let (mut lo, mut hi) = (0.5 * k, 2.0 * k);
    let mut tries = 0;
    while !(miss(lo) > 0.0 && miss(hi) < 0.0) {
        lo *= 0.5;
        hi *= 2.0;
        tries += 1;
        if tries > 20 {
            return Err(VerifyError::ShootingFailed("exponent not bracketed".into()));
        }
    }
    let k_shot = bisect(miss, lo, hi, 1e-14 * k, 200)
        .ok_or_else(|| VerifyError::ShootingFailed("bisection on the exponent failed".into()))?;

    let mut phi = Vec::with_capacity(mesh + 1);
    let mut f = Vec::with_capacity(mesh + 1);
    let mut fp = Vec::with_capacity(mesh + 1);
    let mut y = [1.0, 0.0];
    let step = extent / mesh as f64;
    for j in 0..=mesh {
        let a = j as f64 * step;
        if j > 0 {
            y = integrate(k, p, y, a - step, a)?;
        }
        phi.push(a);
        f.push(y[0]);
        fp.push(y[1]);
    }
    let end_value = integrate(k, p, [1.0, 0.0], 0.0, half)?[0].abs();
    let (mut max_value, mut min_value, mut min_slope_away) = (f64::NEG_INFINITY, f64::INFINITY, f64::INFINITY);
    for j in 0..=mesh {
        if phi[j] <= half {
            max_value = max_value.max(f[j]);
            min_value = min_value.min(f[j]);
            if phi[j] >= 0.25 * half {
                min_slope_away = min_slope_away.min(-fp[j]);
            }
        }
    }
    Ok(SectorProfile {
        nu,
        p,
        k,
        k_shot,
        half_angle: half,
        zero_angle,
        phi,
        f,
        fp,
        end_value,
        max_value,
        min_value,
        min_slope_away,
    })
}

pub const SECTOR_ZERO_TOL: f64 = 1e-9;

/// Certificates: zero on the sides, `0 <= f <= 1`, `-f' > 0` away from the axis,
/// and agreement of the shot exponent with the closed form.
pub fn sector_report(s: &SectorProfile) -> VerificationReport {
    let pass = s.end_value <= SECTOR_ZERO_TOL
        && (s.zero_angle - s.half_angle).abs() <= SECTOR_ZERO_TOL
        && s.max_value <= 1.0 + 1e-12
        && s.min_value >= -SECTOR_ZERO_TOL
        && s.min_slope_away > 0.0
        && (s.k_shot - s.k).abs() <= SECTOR_ZERO_TOL * s.k.max(1.0);
    VerificationReport::new("sector", pass)
        .measure("k", s.k)
        .measure("k_shot", s.k_shot)
        .measure("zero_angle", s.zero_angle)
        .measure("half_angle", s.half_angle)
        .measure("end_value", s.end_value)
        .measure("max_f", s.max_value)
        .measure("min_slope_away", s.min_slope_away)
        .tolerance("zero", SECTOR_ZERO_TOL)
        .fingerprint_of(&(s.nu, s.p, s.phi.len()))
}

/// `beta = (p - n + m) / (p - 1)`, and `1` for `p = inf`.
pub fn flat_exponent(p: f64, n: u32, m: u32) -> Result<f64, VerifyError> {
    if !(m >= 1 && m < n) {
        return Err(VerifyError::InvalidArgument(format!("need 1 <= m < n, got m = {m}, n = {n}")));
    }
    if !(p > 1.0) {
        return Err(VerifyError::InvalidArgument(format!("need p > 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(1.0);
    }
    let beta = (p - n as f64 + m as f64) / (p - 1.0);
    if beta <= 0.0 {
        return Err(VerifyError::NonpositiveExponent(beta));
    }
    Ok(beta)
}

/// `|x'|^beta` in the two-dimensional chart of the flat complement.
pub fn flat_solution(beta: f64, n: u32, m: u32) -> Result<impl Fn(P) -> f64, VerifyError> {
    let codim = n.checked_sub(m).filter(|c| *c == 1 || *c == 2).ok_or_else(|| {
        VerifyError::InvalidArgument("the planar chart covers codimension 1 or 2 only".into())
    })?;
    Ok(move |x: P| if codim == 1 { x.x.abs().powf(beta) } else { x.norm().powf(beta) })
}

/// Largest `|F_h(u)|` of a closed-form `u` over interior nodes in `window`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitResidual {
    pub h: f64,
    pub max_abs: f64,
    pub nodes: usize,
    /// Second differences of values accurate to `VALUE_ACCURACY` relative:
    /// residuals below this are indistinguishable from zero.
    pub floor: f64,
}

/// Relative accuracy assumed for the values of a supplied solution.
pub const VALUE_ACCURACY: f64 = 1e-13;

pub fn explicit_residual(
    op: &ModelOperator,
    scheme: Option<SchemeId>,
    region: &Region,
    h: f64,
    u: &dyn Fn(P) -> f64,
    window: &dyn Fn(P) -> bool,
) -> Result<ExplicitResidual, VerifyError> {
    let g = Grid::new(region.clone(), h)?;
    let values: Vec<f64> = (0..g.kinds.len())
        .map(|k| if g.kinds[k] == NodeKind::Outside { 0.0 } else { u(g.pos_of(k)) })
        .collect();
    let res = residual_field(&g, op, scheme, &values, None)?;
    let (mut max_abs, mut nodes, mut scale) = (0.0f64, 0usize, 0.0f64);
    for k in g.interior() {
        if window(g.pos_of(k)) {
            max_abs = max_abs.max(res[k].abs());
            scale = scale.max(values[k].abs());
            nodes += 1;
        }
    }
    if nodes == 0 {
        return Err(VerifyError::BandEmpty);
    }
    Ok(ExplicitResidual { h, max_abs, nodes, floor: VALUE_ACCURACY * scale.max(1.0) / (h * h) })
}

/// Growth allowed in `residual / h` from one level to the next.
pub const RESIDUAL_CONSTANT_GROWTH: f64 = 1.25;

/// `residual <= C h` with `C = residual / h` not growing across refinements.
/// A level whose residual is under its floor counts as exact.
pub fn residual_order_report(check_id: &str, levels: &[ExplicitResidual]) -> VerificationReport {
    let cs: Vec<f64> = levels.iter().map(|l| l.max_abs / l.h).collect();
    let exact = |l: &ExplicitResidual| l.max_abs <= l.floor;
    let stable = levels.len() >= 3
        && cs.iter().all(|c| c.is_finite())
        && (1..levels.len()).all(|j| exact(&levels[j]) || cs[j] <= RESIDUAL_CONSTANT_GROWTH * cs[j - 1]);
    let mut rep = VerificationReport::new(check_id, stable).tolerance("constant_growth", RESIDUAL_CONSTANT_GROWTH);
    for (j, (l, c)) in levels.iter().zip(&cs).enumerate() {
        rep = rep
            .measure(&format!("h{j}"), l.h)
            .measure(&format!("residual{j}"), l.max_abs)
            .measure(&format!("c{j}"), *c)
            .measure(&format!("floor{j}"), l.floor);
    }
    rep
}
