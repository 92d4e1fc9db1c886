//! Quotient bounds for functions vanishing on the boundary, Hölder fits of
//! solution quotients, and the gradient bound `|Du| ~ u / x_n`.

use serde::{Deserialize, Serialize};

use crate::error::VerifyError;
use crate::geometry::{DomainSpec, Point};
use crate::grid::{GridSolution, NodeKind};
use crate::numerics::linear_fit;
use crate::report::VerificationReport;
use crate::sampling::Halton;

type P = Point<f64>;

/// Second field `g` for the two-field bounds, with `c_L <= g / d` and `f / d <= c_U`.
pub struct SecondField<'a> {
    pub g: &'a dyn Fn(P) -> f64,
    pub c_l: f64,
    pub c_u: f64,
}

pub struct QuotientLemmaInput<'a> {
    pub f: &'a dyn Fn(P) -> f64,
    pub domain: &'a DomainSpec<f64>,
    /// Boundary point and radius of the ball where `Df` has modulus `c_K |x-y|^alpha_K`.
    pub z: P,
    pub r: f64,
    /// Pairs are drawn from `B(z, r / shrink) ∩ Ω`.
    pub shrink: f64,
    pub c_k: f64,
    pub alpha_k: f64,
    pub second: Option<SecondField<'a>>,
    pub pairs: usize,
    pub seed: u64,
}

fn ball_point(z: P, rad: f64, u: f64, v: f64) -> P {
    z + P::polar(rad * u.sqrt(), std::f64::consts::TAU * v)
}

/// `|f/d(x) - f/d(y)| <= 8 c_K |x-y|^alpha_K` on sampled pairs, plus the
/// `c_1 = 8 c_K / c_L^2` and `c_2 = 8 c_K (c_L + c_U) / c_L^2` bounds when a
/// second field is supplied.
pub fn quotient_lemma_check(input: &QuotientLemmaInput) -> Result<VerificationReport, VerifyError> {
    if !(input.c_k >= 0.0 && input.alpha_k > 0.0 && input.alpha_k <= 1.0 && input.shrink >= 1.0) {
        return Err(VerifyError::InvalidArgument("need c_K >= 0, alpha_K in (0, 1], shrink >= 1".into()));
    }
    let rad = input.r / input.shrink;
    let mut hal = Halton::new(4, input.seed);
    let mut pts = Vec::with_capacity(input.pairs);
    let mut attempts = 0usize;
    while pts.len() < input.pairs {
        attempts += 1;
        if attempts > 100 * input.pairs.max(1) {
            return Err(VerifyError::PreconditionViolated("ball barely meets the domain".into()));
        }
        let s = hal.next_point();
        let x = ball_point(input.z, rad, s[0], s[1]);
        let y = ball_point(input.z, rad, s[2], s[3]);
        if input.domain.contains(x) && input.domain.contains(y) && x != y {
            pts.push((x, y));
        }
    }
    let d = |x: P| input.domain.boundary_distance(x);
    let q = |x: P| (input.f)(x) / d(x);
    let bound1 = 8.0 * input.c_k;
    let slack = |a: f64, b: f64| 1e-12 * (1.0 + a.abs() + b.abs());
    let (mut v1, mut obs1) = (0usize, 0.0f64);
    let (mut v2, mut v3, mut obs2, mut obs3, mut hyp) = (0usize, 0usize, 0.0f64, 0.0f64, 0usize);
    let (c1, c2) = match &input.second {
        Some(s) => (8.0 * input.c_k / (s.c_l * s.c_l), 8.0 * input.c_k * (s.c_l + s.c_u) / (s.c_l * s.c_l)),
        None => (f64::NAN, f64::NAN),
    };
    for &(x, y) in &pts {
        let dist = x.dist(y).powf(input.alpha_k);
        let (qx, qy) = (q(x), q(y));
        let inc = (qx - qy).abs();
        obs1 = obs1.max(inc / dist);
        if inc > bound1 * dist + slack(qx, qy) {
            v1 += 1;
        }
        if let Some(s) = &input.second {
            let (gx, gy) = ((s.g)(x), (s.g)(y));
            if gx / d(x) < s.c_l || gy / d(y) < s.c_l || qx > s.c_u || qy > s.c_u {
                hyp += 1;
            }
            let (ax, ay) = (d(x) / gx, d(y) / gy);
            let inc2 = (ax - ay).abs();
            obs2 = obs2.max(inc2 / dist);
            if inc2 > c1 * dist + slack(ax, ay) {
                v2 += 1;
            }
            let (bx, by) = ((input.f)(x) / gx, (input.f)(y) / gy);
            let inc3 = (bx - by).abs();
            obs3 = obs3.max(inc3 / dist);
            if inc3 > c2 * dist + slack(bx, by) {
                v3 += 1;
            }
        }
    }
    let mut rep = VerificationReport::new("quotient_lemma", v1 + v2 + v3 + hyp == 0)
        .measure("pairs", pts.len() as f64)
        .measure("observed_constant", obs1)
        .measure("violations", v1 as f64)
        .tolerance("bound_constant", bound1)
        .tolerance("alpha_k", input.alpha_k)
        .fingerprint_of(&(input.z.x, input.z.y, input.r, input.shrink, input.c_k, input.alpha_k, input.pairs, input.seed));
    if input.second.is_some() {
        rep = rep
            .measure("observed_c1", obs2)
            .measure("observed_c2", obs3)
            .measure("c1_violations", v2 as f64)
            .measure("c2_violations", v3 as f64)
            .measure("hypothesis_violations", hyp as f64)
            .tolerance("c1", c1)
            .tolerance("c2", c2);
    }
    Ok(rep)
}

/// Axis-aligned sampling window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: P,
    pub hi: P,
}

impl Window {
    pub fn contains(&self, x: P) -> bool {
        x.x >= self.lo.x && x.x <= self.hi.x && x.y >= self.lo.y && x.y <= self.hi.y
    }

    fn diameter(&self) -> f64 {
        self.lo.dist(self.hi)
    }
}

/// Result of a log-log fit of quotient increments against distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    /// Fitted exponent; `None` when every increment is below the noise floor.
    pub alpha: Option<f64>,
    pub c: f64,
    /// RMS residual of the fit in decades.
    pub residual_decades: f64,
    pub bins_used: usize,
    pub pairs: usize,
    /// Mean quotient, reported in the degenerate case.
    pub quotient_constant: f64,
    /// `(mean distance, max increment)` per populated bin.
    pub bins: Vec<(f64, f64)>,
}

pub const HOLDER_PAIRS: usize = 10_000;
pub const HOLDER_BINS: usize = 12;
/// Pair distances span this many decades below the window diameter / 2.
pub const HOLDER_DECADES: f64 = 3.0;

/// Fits `max |q(x) - q(y)| ~ c |x-y|^alpha` for `q = u / v` over stratified pairs.
pub fn holder_quotient_estimate(
    u: &dyn Fn(P) -> Option<f64>,
    v: &dyn Fn(P) -> Option<f64>,
    window: Window,
    noise_floor: f64,
    seed: u64,
) -> Result<HolderEstimate, VerifyError> {
    let smax = 0.5 * window.diameter();
    let smin = smax * 10f64.powf(-HOLDER_DECADES);
    let q = |x: P| -> Option<f64> {
        let (a, b) = (u(x)?, v(x)?);
        (b > 0.0).then(|| a / b)
    };
    let mut hal = Halton::new(4, seed);
    let mut maxinc = vec![0.0f64; HOLDER_BINS];
    let mut dsum = vec![0.0f64; HOLDER_BINS];
    let mut cnt = vec![0usize; HOLDER_BINS];
    let (mut pairs, mut attempts) = (0usize, 0usize);
    let (mut qsum, mut qn) = (0.0, 0usize);
    while pairs < HOLDER_PAIRS {
        attempts += 1;
        if attempts > 50 * HOLDER_PAIRS {
            return Err(VerifyError::PreconditionViolated("window rejects most pairs".into()));
        }
        let s = hal.next_point();
        let x = P::new(
            window.lo.x + s[0] * (window.hi.x - window.lo.x),
            window.lo.y + s[1] * (window.hi.y - window.lo.y),
        );
        let dist = smax * 10f64.powf(-HOLDER_DECADES * s[2]);
        let y = x + P::polar(dist, std::f64::consts::TAU * s[3]);
        if !window.contains(y) {
            continue;
        }
        let (Some(qx), Some(qy)) = (q(x), q(y)) else { continue };
        pairs += 1;
        qsum += qx;
        qn += 1;
        let b = (((dist / smin).log10() / HOLDER_DECADES) * HOLDER_BINS as f64) as usize;
        let b = b.min(HOLDER_BINS - 1);
        maxinc[b] = maxinc[b].max((qx - qy).abs());
        dsum[b] += dist;
        cnt[b] += 1;
    }
    let quotient_constant = qsum / qn as f64;
    let (mut xs, mut ys, mut bins) = (Vec::new(), Vec::new(), Vec::new());
    for b in 0..HOLDER_BINS {
        if cnt[b] == 0 {
            continue;
        }
        let md = dsum[b] / cnt[b] as f64;
        bins.push((md, maxinc[b]));
        if maxinc[b] > noise_floor {
            xs.push(md.log10());
            ys.push(maxinc[b].log10());
        }
    }
    if xs.len() < 3 {
        return Ok(HolderEstimate {
            alpha: None,
            c: 0.0,
            residual_decades: 0.0,
            bins_used: xs.len(),
            pairs,
            quotient_constant,
            bins,
        });
    }
    let fit = linear_fit(&xs, &ys).ok_or_else(|| VerifyError::PreconditionViolated("degenerate fit".into()))?;
    Ok(HolderEstimate {
        alpha: Some(fit.slope),
        c: 10f64.powf(fit.intercept),
        residual_decades: fit.rms_residual,
        bins_used: xs.len(),
        pairs,
        quotient_constant,
        bins,
    })
}

pub const HOLDER_MAX_RESIDUAL_DECADES: f64 = 0.1;

pub fn holder_report(est: &HolderEstimate) -> VerificationReport {
    match est.alpha {
        Some(a) => VerificationReport::new(
            "holder_quotient",
            a > 0.0 && est.residual_decades < HOLDER_MAX_RESIDUAL_DECADES,
        )
        .measure("alpha", a)
        .measure("c", est.c)
        .measure("fit_residual_decades", est.residual_decades)
        .measure("bins_used", est.bins_used as f64)
        .measure("pairs", est.pairs as f64)
        .tolerance("fit_residual_decades", HOLDER_MAX_RESIDUAL_DECADES),
        None => VerificationReport::new("holder_quotient", true)
            .measure("quotient_constant", est.quotient_constant)
            .measure("pairs", est.pairs as f64)
            .note("all increments below the noise floor: quotient constant"),
    }
}

/// Relative change `|b - a| / |a|` within `rel`.
pub fn refinement_stable(a: f64, b: f64, rel: f64) -> bool {
    a.is_finite() && b.is_finite() && a != 0.0 && ((b - a) / a).abs() <= rel
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientBound {
    pub c_meas: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub nodes: usize,
}

/// Central-difference `|Du|` against `u / (y - y0)` on window nodes at least one
/// layer above the line `y = y0`, where the solution must vanish.
pub fn gradient_bound_check(sol: &GridSolution, y0: f64, window: Window) -> Result<GradientBound, VerifyError> {
    let g = &sol.grid;
    let h = g.h;
    let scale = sol.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for (k, kind) in g.kinds.iter().enumerate() {
        let x = g.pos_of(k);
        if *kind == NodeKind::Dirichlet && (x.y - y0).abs() < 1e-9 * h && sol.values[k].abs() > 1e-12 * scale {
            return Err(VerifyError::PreconditionViolated(format!(
                "solution does not vanish on y = {y0} (u = {} at x = {})",
                sol.values[k], x.x
            )));
        }
    }
    let (mut lo, mut hi, mut nodes) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for k in g.interior() {
        let x = g.pos_of(k);
        if !window.contains(x) || x.y - y0 < h * (1.0 - 1e-9) {
            continue;
        }
        let nb = g.neighbors(&sol.values, k);
        let gx = (nb[0] - nb[2]) / (2.0 * h);
        let gy = (nb[1] - nb[3]) / (2.0 * h);
        let u = sol.values[k];
        if !(u > 0.0) {
            return Err(VerifyError::PreconditionViolated(format!("u = {u} is not positive at ({}, {})", x.x, x.y)));
        }
        let ratio = gx.hypot(gy) * (x.y - y0) / u;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        nodes += 1;
    }
    if nodes == 0 {
        return Err(VerifyError::BandEmpty);
    }
    Ok(GradientBound { c_meas: hi.max(1.0 / lo), ratio_min: lo, ratio_max: hi, nodes })
}

pub const GRADIENT_STABILITY: f64 = 0.25;

/// Gradient bound at two resolutions; passes when `c` is finite and stable.
pub fn gradient_bound_report(coarse: &GradientBound, fine: &GradientBound) -> VerificationReport {
    let stable = refinement_stable(coarse.c_meas, fine.c_meas, GRADIENT_STABILITY);
    VerificationReport::new("gradient_bound", stable)
        .measure("c_coarse", coarse.c_meas)
        .measure("c_fine", fine.c_meas)
        .measure("ratio_min_fine", fine.ratio_min)
        .measure("ratio_max_fine", fine.ratio_max)
        .measure("nodes_fine", fine.nodes as f64)
        .tolerance("relative_change", GRADIENT_STABILITY)
}
