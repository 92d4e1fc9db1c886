//! Growth rates and uniqueness on truncations of unbounded domains.

use serde::{Deserialize, Serialize};

use crate::error::VerifyError;
use crate::geometry::{DomainSpec, Point};
use crate::grid::{harmonic_measure, BoundaryArc, Clip, Grid, GridSolution, Region, SolveOptions};
use crate::numerics::linear_fit;
use crate::pucci::ModelOperator;
use crate::report::VerificationReport;

type P = Point<f64>;

pub const GROWTH_EXPONENT_TOL: f64 = 0.1;
pub const GROWTH_RATIO_SPREAD: f64 = 3.0;

/// Fits `M(R) ~ R^e_hat`; passes when `|e_hat - e| <= 0.1` and the spread of
/// `M(R) / R^e` is at most 3.
pub fn measure_growth(samples: &[(f64, f64)], predicted: f64) -> Result<VerificationReport, VerifyError> {
    if samples.len() < 3 {
        return Err(VerifyError::InvalidArgument("growth fit needs at least 3 radii".into()));
    }
    if samples.iter().any(|&(r, m)| !(r > 0.0 && m > 0.0)) {
        return Err(VerifyError::InvalidArgument("radii and maxima must be positive".into()));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or_else(|| VerifyError::InvalidArgument("radii must differ".into()))?;
    let ratios: Vec<f64> = samples.iter().map(|&(r, m)| m / r.powf(predicted)).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let spread = hi / lo;
    let pass = (fit.slope - predicted).abs() <= GROWTH_EXPONENT_TOL && spread <= GROWTH_RATIO_SPREAD;
    let mut rep = VerificationReport::new("growth", pass)
        .measure("exponent", fit.slope)
        .measure("predicted", predicted)
        .measure("ratio_spread", spread)
        .measure("ratio_min", lo)
        .tolerance("exponent", GROWTH_EXPONENT_TOL)
        .tolerance("ratio_spread", GROWTH_RATIO_SPREAD)
        .fingerprint_of(&(samples, predicted));
    for (j, &(r, m)) in samples.iter().enumerate() {
        rep = rep.measure(&format!("R{j}"), r).measure(&format!("M{j}"), m);
    }
    Ok(rep)
}

/// Truncated domains whose harmonic measures give a growth family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthFamily {
    /// Half-disk of radius `R` with data 1 on the arc.
    HalfPlane,
    /// Sector of opening `pi / nu` cut at `|x| = R`, data 1 on the arc.
    Sector { nu: f64 },
}

/// `M(R) = 1 / omega_R(x0)`: the maximum on `|x| = R` of the harmonic measure
/// normalized to 1 at `x0`.
pub fn harmonic_measure_growth(
    family: &GrowthFamily,
    op: &ModelOperator,
    radii: &[f64],
    h: f64,
    x0: P,
    opts: &SolveOptions,
) -> Result<Vec<(f64, f64)>, VerifyError> {
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let (region, arc) = match *family {
            GrowthFamily::HalfPlane => (
                Region::new(DomainSpec::HalfDisk { center: P::zero(), radius: r }),
                BoundaryArc { center: P::zero(), radius: r, from: 0.0, to: std::f64::consts::PI },
            ),
            GrowthFamily::Sector { nu } => {
                let th = DomainSpec::<f64>::sector_half_angle(nu);
                (
                    Region::clipped(DomainSpec::Sector { apex: P::zero(), nu }, Clip::Disk { center: P::zero(), radius: r }),
                    BoundaryArc { center: P::zero(), radius: r, from: -th, to: th },
                )
            }
        };
        let grid = Grid::new(region, h)?;
        let sol = harmonic_measure(&grid, op, &arc, opts)?;
        sol.require_converged()?;
        let w = sol
            .at(x0)
            .ok_or_else(|| VerifyError::PreconditionViolated("x0 is not inside the truncation".into()))?;
        if !(w > 0.0) {
            return Err(VerifyError::PreconditionViolated(format!("harmonic measure {w} at x0 is not positive")));
        }
        out.push((r, 1.0 / w));
    }
    Ok(out)
}

/// Sup over window nodes of `|u / model - C| / C` with `C = u(anchor) / model(anchor)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftLevel {
    pub truncation: f64,
    pub c: f64,
    pub drift: f64,
    /// Noise level of the drift from the solver tolerance.
    pub noise: f64,
    pub nodes: usize,
}

pub fn drift_level(
    sol: &GridSolution,
    truncation: f64,
    model: &dyn Fn(P) -> f64,
    anchor: P,
    window: &dyn Fn(P) -> bool,
) -> Result<DriftLevel, VerifyError> {
    let ua = sol
        .at(anchor)
        .ok_or_else(|| VerifyError::PreconditionViolated("anchor is off the grid".into()))?;
    let c = ua / model(anchor);
    if !(c > 0.0) {
        return Err(VerifyError::PreconditionViolated(format!("matching constant {c} is not positive")));
    }
    let g = &sol.grid;
    let (mut drift, mut min_model, mut nodes) = (0.0f64, f64::INFINITY, 0usize);
    for k in g.interior() {
        let x = g.pos_of(k);
        if !window(x) {
            continue;
        }
        let m = model(x);
        if !(m > 0.0) {
            return Err(VerifyError::PreconditionViolated("model must be positive on the window".into()));
        }
        drift = drift.max((sol.values[k] / m - c).abs() / c);
        min_model = min_model.min(m);
        nodes += 1;
    }
    if nodes == 0 {
        return Err(VerifyError::BandEmpty);
    }
    Ok(DriftLevel { truncation, c, drift, noise: 10.0 * sol.tol / (c * min_model), nodes })
}

/// Drift must be nonincreasing (up to noise) across at least two enlargements;
/// with `exact`, it must also stay at noise level.
pub fn uniqueness_drift(levels: &[DriftLevel], exact: bool) -> Result<VerificationReport, VerifyError> {
    if levels.len() < 3 {
        return Err(VerifyError::InvalidArgument("need at least 3 truncations".into()));
    }
    let noise = levels.iter().map(|l| l.noise).fold(0.0, f64::max);
    let monotone = levels.windows(2).all(|w| w[1].drift <= w[0].drift + noise);
    let small = !exact || levels.iter().all(|l| l.drift <= noise);
    let mut rep = VerificationReport::new("uniqueness", monotone && small)
        .tolerance("noise", noise)
        .measure("exact_data", if exact { 1.0 } else { 0.0 });
    for (j, l) in levels.iter().enumerate() {
        rep = rep
            .measure(&format!("R{j}"), l.truncation)
            .measure(&format!("C{j}"), l.c)
            .measure(&format!("drift{j}"), l.drift);
    }
    Ok(rep)
}
