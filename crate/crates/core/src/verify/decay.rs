//! Decay sandwich, boundary Harnack ratios, barrier comparison and interior Harnack.

use serde::{Deserialize, Serialize};

use crate::barriers::{Orientation, RadialBarrier};
use crate::error::VerifyError;
use crate::geometry::{DomainSpec, Point};
use crate::grid::{GridSolution, NodeKind};
use crate::odi::{bhi_constant, BarrierProfile, Side};
use crate::report::VerificationReport;

type P = Point<f64>;

/// Discrete `m = inf u` over the band `{r < d < 3r} ∩ B(w, 6r)` and
/// `M = sup u` over `B(w, 6r) ∩ Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayBands {
    pub m: f64,
    pub big_m: f64,
    pub band_nodes: usize,
    pub ball_nodes: usize,
}

pub fn decay_bands(sol: &GridSolution, domain: &DomainSpec<f64>, w: P, r: f64) -> Result<DecayBands, VerifyError> {
    if !(r > 0.0) {
        return Err(VerifyError::InvalidArgument("r must be positive".into()));
    }
    // The 6r ball must lie inside the computational region wherever it meets the domain.
    for j in 0..256 {
        for s in [0.5, 1.0] {
            let x = w + P::polar(6.0 * r * s, std::f64::consts::TAU * j as f64 / 256.0);
            if domain.contains(x) && !sol.grid.region.contains(x, 0.0) {
                return Err(VerifyError::BandEmpty);
            }
        }
    }
    let g = &sol.grid;
    let (mut m, mut big_m) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut band_nodes, mut ball_nodes) = (0, 0);
    for k in g.interior() {
        let x = g.pos_of(k);
        if x.dist(w) >= 6.0 * r || !domain.contains(x) {
            continue;
        }
        let u = sol.values[k];
        ball_nodes += 1;
        big_m = big_m.max(u);
        let d = domain.boundary_distance(x);
        if d > r && d < 3.0 * r {
            band_nodes += 1;
            m = m.min(u);
        }
    }
    if band_nodes == 0 {
        return Err(VerifyError::BandEmpty);
    }
    Ok(DecayBands { m, big_m, band_nodes, ball_nodes })
}

/// Default sandwich budget: one grid spacing plus the solver tolerance.
pub fn default_delta(sol: &GridSolution) -> f64 {
    sol.grid.h + sol.tol
}

/// Checks `h_low(d) - delta <= u <= h_up(d) + delta` at every node of `B(w, r) ∩ Ω̄`.
///
/// The profiles must have length `r`, `h_low(r) <= m` and `h_up(r) >= M` for the
/// discrete bands; a broken hypothesis is reported as a failure.
#[allow(clippy::too_many_arguments)]
pub fn check_decay(
    sol: &GridSolution,
    domain: &DomainSpec<f64>,
    w: P,
    r: f64,
    lower: &BarrierProfile,
    upper: &BarrierProfile,
    delta: f64,
) -> Result<VerificationReport, VerifyError> {
    if lower.side != Side::Lower || upper.side != Side::Upper {
        return Err(VerifyError::InvalidArgument("profiles must be (lower, upper)".into()));
    }
    for p in [lower, upper] {
        if (p.r - r).abs() > 1e-12 * r {
            return Err(VerifyError::InvalidArgument(format!("profile length {} differs from r = {r}", p.r)));
        }
    }
    let bands = decay_bands(sol, domain, w, r)?;
    let hyp_low = lower.boundary_value <= bands.m * (1.0 + 1e-12);
    let hyp_up = upper.boundary_value >= bands.big_m * (1.0 - 1e-12);

    let g = &sol.grid;
    let (mut low_margin, mut up_margin) = (f64::INFINITY, f64::INFINITY);
    let (mut nodes, mut violations) = (0usize, 0usize);
    let mut boundary_slack: f64 = 0.0;
    for (k, kind) in g.kinds.iter().enumerate() {
        if *kind == NodeKind::Outside {
            continue;
        }
        let x = g.pos_of(k);
        if x.dist(w) >= r || domain.signed_distance(x) < 0.0 {
            continue;
        }
        let d = domain.boundary_distance(x).min(r);
        let u = sol.values[k];
        let (lo, hi) = (lower.value(d), upper.value(d));
        nodes += 1;
        low_margin = low_margin.min(u - lo);
        up_margin = up_margin.min(hi - u);
        if u < lo - delta || u > hi + delta {
            violations += 1;
        }
        if d == 0.0 {
            boundary_slack = boundary_slack.max((u - lo).abs()).max((hi - u).abs());
        }
    }
    let pass = hyp_low && hyp_up && violations == 0 && nodes > 0;
    let mut rep = VerificationReport::new("decay", pass)
        .measure("band_inf_m", bands.m)
        .measure("ball_sup_M", bands.big_m)
        .measure("profile_m", lower.boundary_value)
        .measure("profile_M", upper.boundary_value)
        .measure("band_nodes", bands.band_nodes as f64)
        .measure("nodes", nodes as f64)
        .measure("violations", violations as f64)
        .measure("worst_lower_margin", low_margin)
        .measure("worst_upper_margin", up_margin)
        .measure("boundary_slack", boundary_slack)
        .measure("h", g.h)
        .tolerance("delta", delta)
        .fingerprint_of(&(sol.meta(), w.x, w.y, r, lower.boundary_value, upper.boundary_value, delta));
    if !hyp_low {
        rep = rep.note("lower profile exceeds the band infimum");
    }
    if !hyp_up {
        rep = rep.note("upper profile is below the ball supremum");
    }
    Ok(rep)
}

/// Band `A` for two solutions sharing the profiles: `sup h_up / h_low` with
/// `m` the smaller band infimum and `M` the larger ball supremum.
pub fn bhi_band(lower: &BarrierProfile, upper: &BarrierProfile) -> Result<f64, VerifyError> {
    Ok(bhi_constant(lower, upper)?.a)
}

/// Checks `A^{-1}(1 - delta_r) <= u1 / u2 <= A (1 + delta_r)` on `B(w, r) ∩ Ω`
/// one grid layer away from the boundary.
pub fn check_bhi(
    u1: &GridSolution,
    u2: &GridSolution,
    domain: &DomainSpec<f64>,
    w: P,
    r: f64,
    a: f64,
) -> Result<VerificationReport, VerifyError> {
    if u1.grid.h != u2.grid.h || u1.grid.kinds.len() != u2.grid.kinds.len() {
        return Err(VerifyError::InvalidArgument("solutions must share the grid".into()));
    }
    if !(a >= 1.0) {
        return Err(VerifyError::InvalidArgument(format!("band A = {a} must be >= 1")));
    }
    let g = &u1.grid;
    let h = g.h;
    let mut idx = Vec::new();
    let mut min_u2 = f64::INFINITY;
    for k in g.interior() {
        let x = g.pos_of(k);
        if x.dist(w) < r && domain.boundary_distance(x) >= h * (1.0 - 1e-9) {
            idx.push(k);
            min_u2 = min_u2.min(u2.values[k]);
        }
    }
    if idx.is_empty() {
        return Err(VerifyError::BandEmpty);
    }
    let floor = 100.0 * (u1.tol + u2.tol);
    if !(min_u2 > floor) {
        return Err(VerifyError::DivisionBand { min: min_u2, floor });
    }
    let delta_r = (u1.tol + u2.tol) / min_u2;
    let (lo, hi) = (a.recip() * (1.0 - delta_r), a * (1.0 + delta_r));
    let (mut rmin, mut rmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut violations = 0usize;
    for &k in &idx {
        let q = u1.values[k] / u2.values[k];
        rmin = rmin.min(q);
        rmax = rmax.max(q);
        if !(q >= lo && q <= hi) {
            violations += 1;
        }
    }
    Ok(VerificationReport::new("bhi", violations == 0)
        .measure("ratio_min", rmin)
        .measure("ratio_max", rmax)
        .measure("band_A", a)
        .measure("nodes", idx.len() as f64)
        .measure("violations", violations as f64)
        .measure("min_u2", min_u2)
        .tolerance("delta_r", delta_r)
        .fingerprint_of(&(u1.meta(), u2.meta(), w.x, w.y, r, a)))
}

/// Discrete comparison with a placed barrier: `U <= u + delta` (sub) or
/// `u <= V + delta` (super) at every admissible node.
pub fn comparison_check(
    sol: &GridSolution,
    barrier: &RadialBarrier,
    domain: &DomainSpec<f64>,
    delta: f64,
) -> Result<VerificationReport, VerifyError> {
    let g = &sol.grid;
    let (mut worst, mut nodes, mut violations) = (f64::INFINITY, 0usize, 0usize);
    for (k, kind) in g.kinds.iter().enumerate() {
        if *kind == NodeKind::Outside {
            continue;
        }
        let x = g.pos_of(k);
        if !barrier.admissible(x, domain) {
            continue;
        }
        let b = barrier
            .eval_with_derivatives(x)
            .map_err(|e| VerifyError::PreconditionViolated(e.to_string()))?
            .value;
        let margin = match barrier.orientation {
            Orientation::InteriorSub => sol.values[k] - b,
            Orientation::ExteriorSuper => b - sol.values[k],
        };
        worst = worst.min(margin);
        nodes += 1;
        if margin < -delta {
            violations += 1;
        }
    }
    Ok(VerificationReport::new("comparison", nodes > 0 && violations == 0)
        .measure("worst_margin", worst)
        .measure("nodes", nodes as f64)
        .measure("violations", violations as f64)
        .tolerance("delta", delta)
        .fingerprint_of(&(sol.meta(), barrier)))
}

/// Interior Harnack sanity: `sup u <= c inf u` on `B(x, rho)` when `B(x, 2 rho)`
/// lies in the domain.
pub fn harnack_ratio(
    sol: &GridSolution,
    domain: &DomainSpec<f64>,
    x: P,
    rho: f64,
    c_max: f64,
) -> Result<VerificationReport, VerifyError> {
    if domain.signed_distance(x) < 2.0 * rho {
        return Err(VerifyError::PreconditionViolated("B(x, 2 rho) leaves the domain".into()));
    }
    let g = &sol.grid;
    let (mut lo, mut hi, mut nodes) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for k in g.interior() {
        if g.pos_of(k).dist(x) < rho {
            lo = lo.min(sol.values[k]);
            hi = hi.max(sol.values[k]);
            nodes += 1;
        }
    }
    if nodes == 0 {
        return Err(VerifyError::BandEmpty);
    }
    let ratio = hi / lo;
    Ok(VerificationReport::new("harnack", lo > 0.0 && ratio <= c_max)
        .measure("sup", hi)
        .measure("inf", lo)
        .measure("ratio", ratio)
        .measure("nodes", nodes as f64)
        .tolerance("c_max", c_max)
        .fingerprint_of(&(sol.meta(), x.x, x.y, rho)))
}
