//! Acceptance suite. Prints one `[PASS]` / `[FAIL]` line per criterion and
//! fails if a criterion outside `KNOWN_RED` is red or one inside it is green.
//!
//! Run with `cargo test -p barrierlab --test acceptance -- --nocapture`.

use std::time::Instant;

use barrierlab::barriers::{
    admissible_samples, margin_report, place_exterior_barrier, place_interior_barrier, strict_margin, Orientation,
    RadialBarrier,
};
use barrierlab::geometry::{Axis, DomainSpec, Point};
use barrierlab::grid::{solve_dirichlet, Clip, Grid, GridSolution, Region, SchemeId, SolveOptions};
use barrierlab::odi::{
    analytic_profile, bhi_constant, const_rhs_threshold, gradient_power_constants, gradient_power_slope_limit, odi_residual, BarrierProfile,
    CatalogEntry, OdiSpec, Side,
};
use barrierlab::pucci::{EllipticityPair, ExponentField, LowerOrderTerm, ModelOperator, StructuralEnvelope};
use barrierlab::verify::*;

type P = Point<f64>;
type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

/// Criteria that are expected to be red; see the decisions ledger.
const KNOWN_RED: &[&str] = &["C8d"];

// Pinned tolerances.
const CATALOG_RESIDUAL: f64 = 1e-10;
const GRADIENT_POWER_RESIDUAL: f64 = 1e-9;
const ENDPOINT_EXACT: f64 = 1e-15;
const CONSTANT_TOL: f64 = 1e-6;
const DERIVATIVE_ORDER: f64 = 1.9;
const DELTA_PER_H: f64 = 5.0;
const EXPONENT_TOL: f64 = 1e-12;
const COSINE_TOL: f64 = 1e-6;
const CONE_TOL: f64 = 1e-12;
const PAIRS: usize = 10_000;
const STABILITY: f64 = 0.25;

const C1_SECONDS: f64 = 1.0;
const C3_SECONDS: f64 = 5.0;
const C5_SECONDS: f64 = 120.0;
const SUITE_SECONDS: f64 = 900.0;

struct Suite {
    lines: Vec<(String, bool)>,
}

impl Suite {
    fn run(&mut self, id: &str, title: &str, f: impl FnOnce() -> Outcome) {
        let (pass, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        println!("[{}] {id} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((id.to_string(), pass));
    }
}

fn spec(entry: CatalogEntry, side: Side, r: f64, lambda: f64, cap: f64) -> OdiSpec {
    entry.spec(side, 2, r, lambda, cap, 0.5, 3.0, 1.0, 1.0)
}

fn solve(domain: DomainSpec<f64>, op: &ModelOperator, h: f64, tol: f64, data: &dyn Fn(P) -> f64) -> Result<GridSolution, Box<dyn std::error::Error>> {
    let grid = Grid::new(Region::new(domain), h)?;
    let sol = solve_dirichlet(&grid, op, data, &SolveOptions::default().with_tol(tol))?;
    sol.require_converged()?;
    Ok(sol)
}

fn pucci(lambda: f64, cap: f64) -> ModelOperator {
    ModelOperator::PucciPlus { ellipticity: EllipticityPair::constant(lambda, cap), lower_order: LowerOrderTerm::Zero }
}

fn c1() -> Outcome {
    let t0 = Instant::now();
    let bv_rhs = 1.5 * const_rhs_threshold(1.0, 2.0, 2);
    let cases = [
        (CatalogEntry::Uniform, Side::Lower, 1.0),
        (CatalogEntry::Uniform, Side::Upper, 1.0),
        (CatalogEntry::Vanishing, Side::Lower, 1.0),
        (CatalogEntry::Vanishing, Side::Upper, 1.0),
        (CatalogEntry::ConstRhs, Side::Lower, bv_rhs),
        (CatalogEntry::ConstRhs, Side::Upper, bv_rhs),
    ];
    let (mut res, mut ends, mut points) = (0.0f64, 0.0f64, usize::MAX);
    for (e, side, bv) in cases {
        let s = spec(e, side, 1.0, 1.0, 2.0);
        let p = analytic_profile(&s, bv)?;
        let r = odi_residual(&p, &s);
        res = res.max(r.max_abs);
        ends = ends.max(r.start_error).max(r.end_error / bv);
        points = points.min(r.points);
    }
    let mut gp: f64 = 0.0;
    for (e, frac) in [(CatalogEntry::GradientPower, 0.9), (CatalogEntry::GradientPower, 0.1), (CatalogEntry::GradientPowerLimit, f64::INFINITY)] {
        for k in [3.0, 4.5] {
            let s = e.spec(Side::Upper, 2, 1.0, 1.0, 2.0, 0.5, k, 1.0, 1.0);
            let p = analytic_profile(&s, frac * gradient_power_slope_limit(&s)?)?;
            gp = gp.max(odi_residual(&p, &s).max_abs);
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = res <= CATALOG_RESIDUAL && ends <= ENDPOINT_EXACT && points >= 1000 && gp <= GRADIENT_POWER_RESIDUAL && secs < C1_SECONDS;
    Ok((
        pass,
        format!("closed-form residual {res:.2e} (<= {CATALOG_RESIDUAL:e}), endpoint error {ends:.1e}, {points} points, gradient-power residual {gp:.2e} (<= {GRADIENT_POWER_RESIDUAL:e}), {secs:.2}s"),
    ))
}

fn c2() -> Outcome {
    let lo = analytic_profile(&spec(CatalogEntry::Uniform, Side::Lower, 1.0, 1.0, 1.0), 1.0)?;
    let up = analytic_profile(&spec(CatalogEntry::Uniform, Side::Upper, 1.0, 1.0, 1.0), 1.0)?;
    let a = bhi_constant(&lo, &up)?.a;
    let e2 = 2f64.exp();
    let alpha = const_rhs_threshold(1.0, 1.0, 2);
    let alpha_ref = (e2 - 1.0) / 4.0 - 0.5;
    let (c_lo, c_up) = gradient_power_constants(3.0, 1.0, 1.0, 2);
    let lim = analytic_profile(&CatalogEntry::GradientPowerLimit.spec(Side::Upper, 2, 1.0, 1.0, 1.0, 0.5, 3.0, 1.0, 1.0), f64::INFINITY)?;
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    for j in 0..=2000 {
        // Log-spaced from 1e-8 to 1.
        let t = 10f64.powf(-8.0 * (1.0 - j as f64 / 2000.0));
        let q = lim.value(t) / t.sqrt();
        rmin = rmin.min(q);
        rmax = rmax.max(q);
    }
    let pass = (a - e2).abs() <= CONSTANT_TOL
        && (alpha - alpha_ref).abs() <= CONSTANT_TOL
        && (alpha - 1.097264).abs() <= CONSTANT_TOL
        && (c_lo - 0.38635).abs() <= 1e-5
        && (c_up - 2f64.sqrt()).abs() <= CONSTANT_TOL
        && c_lo < rmin
        && rmax < c_up;
    Ok((
        pass,
        format!("A = {a:.9} (e^2 = {e2:.9}), alpha = {alpha:.9}, c_low = {c_lo:.6} < {rmin:.6} <= h_inf/t^0.5 <= {rmax:.6} < c_up = {c_up:.6}"),
    ))
}

/// Profiles of the acceptance matrix on length `r`, with the envelope each one is built for.
fn matrix_profiles(r: f64) -> Result<Vec<(String, BarrierProfile, StructuralEnvelope)>, Box<dyn std::error::Error>> {
    let (lambda, cap) = (1.0, 2.0);
    let bv_rhs = 2.0 * const_rhs_threshold(lambda, cap, 2) * r * r;
    let gp_cap = gradient_power_slope_limit(&spec(CatalogEntry::GradientPowerLimit, Side::Upper, r, lambda, cap))?;
    let cases = [
        (CatalogEntry::Uniform, Side::Lower, 1.0),
        (CatalogEntry::Uniform, Side::Upper, 1.0),
        (CatalogEntry::Vanishing, Side::Lower, 1.0),
        (CatalogEntry::Vanishing, Side::Upper, 1.0),
        (CatalogEntry::ConstRhs, Side::Lower, bv_rhs),
        (CatalogEntry::ConstRhs, Side::Upper, bv_rhs),
        (CatalogEntry::GradientPower, Side::Upper, 0.5 * gp_cap),
        (CatalogEntry::GradientPowerLimit, Side::Upper, f64::INFINITY),
        (CatalogEntry::DriftLower, Side::Lower, 0.25),
        (CatalogEntry::DriftUpper, Side::Upper, 0.25),
    ];
    let mut out = Vec::new();
    for (e, side, bv) in cases {
        let s = spec(e, side, r, lambda, cap);
        let p = analytic_profile(&s, bv)?;
        let mut env = StructuralEnvelope::uniform(lambda, cap, 2, r);
        env.ellipticity = s.ellipticity.clone();
        match side {
            Side::Lower => env.phi_plus = s.phi.clone(),
            Side::Upper => env.phi_minus = s.phi.clone(),
        }
        out.push((format!("{}/{side:?}", e.id()), p, env));
    }
    Ok(out)
}

fn matrix_domains() -> Vec<(&'static str, DomainSpec<f64>, P)> {
    vec![
        ("disk", DomainSpec::Disk { center: P::zero(), radius: 1.0 }, P::new(0.95, 0.0)),
        ("half_disk", DomainSpec::HalfDisk { center: P::zero(), radius: 1.0 }, P::new(0.3, 0.05)),
        ("half_plane", DomainSpec::HalfPlane { axis: Axis::Y }, P::new(0.0, 0.05)),
        ("annulus", DomainSpec::Annulus { center: P::zero(), inner: 0.5, outer: 1.5 }, P::new(0.55, 0.0)),
        ("rectangle", DomainSpec::Rectangle { corner: P::new(-1.0, -1.0), width: 2.0, height: 2.0 }, P::new(0.0, -0.95)),
        ("half_square", DomainSpec::HalfRectangle { base: P::zero(), half_width: 1.0 }, P::new(0.2, 0.05)),
        ("sector_2", DomainSpec::Sector { apex: P::zero(), nu: 2.0 }, P::polar(1.0, std::f64::consts::FRAC_PI_4 - 0.05)),
        ("sector_0.75", DomainSpec::Sector { apex: P::zero(), nu: 0.75 }, P::polar(1.0, 2.0 * std::f64::consts::PI / 3.0 - 0.05)),
    ]
}

fn c3() -> Outcome {
    let t0 = Instant::now();
    let r = 0.1;
    let (mut cases, mut failed, mut samples) = (0usize, Vec::new(), 0usize);
    let (mut worst_value, mut worst_excess, mut worst_gamma) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (dname, domain, x) in matrix_domains() {
        for (pname, profile, env) in matrix_profiles(r)? {
            let b = match profile.side {
                Side::Lower => place_interior_barrier(&domain, x, r, profile)?,
                Side::Upper => {
                    let w = domain.nearest_boundary_point(x)?;
                    let pl = place_exterior_barrier(&domain, x, w, r, profile)?;
                    worst_gamma = worst_gamma.max(pl.gamma_worst);
                    pl.barrier
                }
            };
            let pts = admissible_samples(&b, &domain, 7);
            let m = strict_margin(&b, &env, &domain, &pts)?;
            cases += 1;
            samples += m.samples;
            worst_value = worst_value.max(m.worst_value);
            worst_excess = worst_excess.max(m.worst_bound_excess);
            if !margin_report("margin", &m).pass {
                failed.push(format!("{pname}@{dname}"));
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = failed.is_empty() && worst_gamma <= 1e-12 && secs < C3_SECONDS;
    Ok((
        pass,
        format!(
            "{cases} cases, {samples} samples, worst scaled value {worst_value:.2e} (< 0), worst bound excess {worst_excess:.2e} (<= 1e-12), placement certificate {worst_gamma:.1e}, failed {failed:?}, {secs:.2}s"
        ),
    ))
}

fn c4() -> Outcome {
    let r = 0.1;
    let mut barriers: Vec<RadialBarrier> = Vec::new();
    for (_, profile, _) in matrix_profiles(r)? {
        let orientation = if profile.side == Side::Lower { Orientation::InteriorSub } else { Orientation::ExteriorSuper };
        barriers.push(RadialBarrier { center: P::new(0.3, -0.2), r, profile, orientation, anchor: None });
    }
    let mut min_order = f64::INFINITY;
    for b in &barriers {
        let mut errs = Vec::new();
        for step in [1e-3, 5e-4, 2.5e-4] {
            let mut e: f64 = 0.0;
            for i in 0..3 {
                for j in 0..8 {
                    let x = b.center + P::polar(r * (1.3 + 0.2 * i as f64), 0.7 + j as f64 * 0.785);
                    let jet = b.eval_with_derivatives(x)?;
                    for dir in [P::new(1.0, 0.0), P::new(0.0, 1.0)] {
                        let (jp, jm) = (b.eval_with_derivatives(x + dir * step)?, b.eval_with_derivatives(x - dir * step)?);
                        let g_fd = (jp.value - jm.value) / (2.0 * step);
                        e = e.max((g_fd - jet.gradient.dot(dir)).abs() / (1.0 + jet.gradient.norm()));
                        let h_fd = (jp.gradient - jm.gradient) * (1.0 / (2.0 * step));
                        let h_an = jet.hessian.apply(dir);
                        e = e.max((h_fd - h_an).norm() / (1.0 + jet.hessian.norm()));
                    }
                }
            }
            errs.push(e);
        }
        for w in errs.windows(2) {
            min_order = min_order.min((w[0] / w[1]).log2());
        }
    }
    Ok((min_order >= DERIVATIVE_ORDER, format!("{} barriers, minimum observed order {min_order:.3} (>= {DERIVATIVE_ORDER})", barriers.len())))
}

struct SandwichCase {
    name: &'static str,
    sol: GridSolution,
    lambda: f64,
    cap: f64,
}

fn sandwich_solutions() -> Result<Vec<SandwichCase>, Box<dyn std::error::Error>> {
    let domain = DomainSpec::HalfDisk { center: P::zero(), radius: 1.0 };
    let h = 1.0 / 256.0;
    let mut out = Vec::new();
    for (name, op, lambda, cap) in [("pucci", pucci(1.0, 2.0), 1.0, 2.0), ("laplace", ModelOperator::Laplace, 1.0, 1.0)] {
        for (tag, s) in [("a", 0.3), ("b", -0.3)] {
            let data = move |x: P| x.y * (1.0 + s * x.x);
            let sol = solve(domain.clone(), &op, h, 1e-8, &data)?;
            out.push(SandwichCase { name: if tag == "a" { name } else { if name == "pucci" { "pucci_b" } else { "laplace_b" } }, sol, lambda, cap });
        }
    }
    Ok(out)
}

fn profiles_for(lambda: f64, cap: f64, r: f64, m: f64, big_m: f64) -> Result<(BarrierProfile, BarrierProfile), Box<dyn std::error::Error>> {
    Ok((
        analytic_profile(&spec(CatalogEntry::Uniform, Side::Lower, r, lambda, cap), m)?,
        analytic_profile(&spec(CatalogEntry::Uniform, Side::Upper, r, lambda, cap), big_m)?,
    ))
}

fn c5(cases: &[SandwichCase], solve_secs: f64) -> Outcome {
    let t0 = Instant::now();
    let domain = DomainSpec::HalfDisk { center: P::zero(), radius: 1.0 };
    let (w, r) = (P::zero(), 0.125);
    let mut parts = Vec::new();
    let mut pass = true;
    for c in cases {
        let bands = decay_bands(&c.sol, &domain, w, r)?;
        let (lo, up) = profiles_for(c.lambda, c.cap, r, bands.m, bands.big_m)?;
        let delta = default_delta(&c.sol);
        let rep = check_decay(&c.sol, &domain, w, r, &lo, &up, delta)?;
        pass &= rep.pass && delta <= DELTA_PER_H * c.sol.grid.h;
        parts.push(format!("{} violations {} nodes {}", c.name, rep.get("violations"), rep.get("nodes")));
    }
    let secs = solve_secs + t0.elapsed().as_secs_f64();
    pass &= secs < C5_SECONDS;
    Ok((pass, format!("h = 1/256, delta = h + tol; {}; {secs:.1}s", parts.join(", "))))
}

fn c6(cases: &[SandwichCase]) -> Outcome {
    let domain = DomainSpec::HalfDisk { center: P::zero(), radius: 1.0 };
    let (w, r) = (P::zero(), 0.125);
    let mut parts = Vec::new();
    let mut pass = true;
    for pair in cases.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let (ba, bb) = (decay_bands(&a.sol, &domain, w, r)?, decay_bands(&b.sol, &domain, w, r)?);
        let (lo, up) = profiles_for(a.lambda, a.cap, r, ba.m.min(bb.m), ba.big_m.max(bb.big_m))?;
        let band = bhi_band(&lo, &up)?;
        let rep = check_bhi(&a.sol, &b.sol, &domain, w, r, band)?;
        pass &= rep.pass;
        parts.push(format!(
            "{}: ratio in [{:.4}, {:.4}] within A = {band:.2}, violations {}",
            a.name,
            rep.get("ratio_min"),
            rep.get("ratio_max"),
            rep.get("violations")
        ));
    }
    Ok((pass, parts.join("; ")))
}

fn c7() -> Outcome {
    let mut worst_k: f64 = 0.0;
    let mut worst_cos: f64 = 0.0;
    for nu in [0.6, 1.0, 2.0, 5.0] {
        worst_k = worst_k.max((sector_exponent(nu, 2.0)? - nu).abs());
        let s = sector_profile(nu, 2.0, 2048)?;
        for j in 0..=1000 {
            let phi = s.half_angle * j as f64 / 1000.0;
            worst_cos = worst_cos.max((s.eval(phi) - (nu * phi).cos()).abs());
        }
    }
    let b_inf = flat_exponent(f64::INFINITY, 3, 1)?;
    let b4 = flat_exponent(4.0, 3, 1)?;
    let pass = worst_k <= EXPONENT_TOL && b_inf == 1.0 && (b4 - 2.0 / 3.0).abs() <= EXPONENT_TOL && worst_cos <= COSINE_TOL;
    Ok((pass, format!("|k(nu,2) - nu| <= {worst_k:.1e}, beta(inf) = {b_inf}, beta(4,3,1) - 2/3 = {:.1e}, |f - cos| <= {worst_cos:.1e}", b4 - 2.0 / 3.0)))
}

fn levels(op: &ModelOperator, region: &Region, u: &dyn Fn(P) -> f64, window: &dyn Fn(P) -> bool) -> Result<Vec<ExplicitResidual>, Box<dyn std::error::Error>> {
    let mut out = Vec::new();
    for h in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        out.push(explicit_residual(op, None, region, h, u, window)?);
    }
    Ok(out)
}

fn describe(levels: &[ExplicitResidual]) -> String {
    levels.iter().map(|l| format!("h={:.4}: {:.2e} (C={:.3e})", l.h, l.max_abs, l.max_abs / l.h)).collect::<Vec<_>>().join(", ")
}

fn c8a() -> Outcome {
    let beta = flat_exponent(4.0, 3, 1)?;
    let u = flat_solution(beta, 3, 1)?;
    let region = Region::clipped(DomainSpec::FlatComplement { n: 3, m: 1 }, Clip::Box { lo: P::new(-1.25, -1.25), hi: P::new(1.25, 1.25) });
    let lv = levels(&ModelOperator::PLaplace { p: 4.0 }, &region, &u, &|x: P| (0.5..=1.0).contains(&x.norm()))?;
    Ok((residual_order_report("flat", &lv).pass, describe(&lv)))
}

fn c8b() -> Outcome {
    let s = sector_profile(1.0, 3.0, 4096)?;
    let region = Region::clipped(DomainSpec::Sector { apex: P::zero(), nu: 1.0 }, Clip::Disk { center: P::zero(), radius: 1.25 });
    let lv = levels(&ModelOperator::PLaplace { p: 3.0 }, &region, &|x| s.solution(P::zero(), x), &|x: P| (0.5..=1.0).contains(&x.norm()))?;
    Ok((residual_order_report("sector", &lv).pass, describe(&lv)))
}

fn infinity_residual(u: &dyn Fn(P) -> f64, window: &dyn Fn(P) -> bool) -> Result<f64, Box<dyn std::error::Error>> {
    let region = Region::clipped(DomainSpec::HalfPlane { axis: Axis::Y }, Clip::Box { lo: P::new(-1.0, -1.0), hi: P::new(1.0, 1.0) });
    let r = explicit_residual(&ModelOperator::InfinityLaplace, Some(SchemeId::MinMaxPair), &region, 1.0 / 32.0, u, window)?;
    Ok(r.max_abs)
}

fn c8c() -> Outcome {
    let res = infinity_residual(&|x| x.y, &|_| true)?;
    Ok((res <= CONE_TOL, format!("x2: {res:.2e} (<= {CONE_TOL:e})")))
}

fn c8d() -> Outcome {
    let x0 = P::new(0.0, 0.5);
    let cone = |x: P| x.dist(x0);
    let away = |x: P| x.dist(x0) >= 0.25;
    let all = infinity_residual(&cone, &away)?;
    // Nodes on the eight lattice rays through x0, where the stencil contains the ray.
    let on_rays = |x: P| {
        let v = x - x0;
        let h = 1.0 / 32.0;
        let (a, b) = ((v.x / h).round() as i64, (v.y / h).round() as i64);
        away(x) && (a == 0 || b == 0 || a.abs() == b.abs())
    };
    let rays = infinity_residual(&cone, &on_rays)?;
    Ok((all <= CONE_TOL, format!("|x - x0| at |x - x0| >= 1/4: {all:.2e} (<= {CONE_TOL:e}); on lattice rays only: {rays:.2e}")))
}

fn c9() -> Outcome {
    let q = DomainSpec::HalfRectangle { base: P::zero(), half_width: 1.0 };
    let px = ExponentField { quadratic: [0.25, 0.0, 0.0], ..ExponentField::constant(2.0) }
        .certify(P::new(-1.0, -1.0), P::new(1.0, 1.0))?;
    let data = |x: P| x.y * (1.0 + 0.5 * x.x);
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, op) in [("infinity", ModelOperator::InfinityLaplace), ("p(x)", ModelOperator::PxLaplace { exponent: px })] {
        let sol = solve(q.clone(), &op, 1.0 / 64.0, 1e-10, &data)?;
        let ext = schwarz_reflect(&sol)?;
        let rep = reflection_report(&sol, &ext);
        pass &= rep.pass;
        parts.push(format!("{name}: extended residual {:.2e} (<= {:.1e})", ext.residual, 2.0 * sol.tol));
    }
    Ok((pass, parts.join(", ")))
}

fn c10a() -> Outcome {
    let hp = DomainSpec::HalfPlane { axis: Axis::Y };
    let f1 = |x: P| x.y * x.y;
    let f2 = |x: P| x.y * (1.0 + x.norm().powi(2)).sqrt();
    let g2 = |x: P| x.y * (2.0 + x.x);
    let ck = 2f64.sqrt() + 1.0;
    let mut parts = Vec::new();
    let mut pass = true;
    let cases: [(&str, &dyn Fn(P) -> f64, f64, Option<SecondField>); 3] = [
        ("x2^2", &f1, 2.0, None),
        ("x2 sqrt(1+|x|^2)", &f2, ck, None),
        ("pair", &f2, ck, Some(SecondField { g: &g2, c_l: 1.0, c_u: 2f64.sqrt() })),
    ];
    for (name, f, c_k, second) in cases {
        let input = QuotientLemmaInput { f, domain: &hp, z: P::zero(), r: 1.0, shrink: 2.0, c_k, alpha_k: 1.0, second, pairs: PAIRS, seed: 11 };
        let rep = quotient_lemma_check(&input)?;
        pass &= rep.pass;
        parts.push(format!("{name}: violations {} (observed {:.3} vs bound {:.3})", rep.get("violations"), rep.get("observed_constant"), 8.0 * c_k));
    }
    Ok((pass, parts.join(", ")))
}

fn quotient_alpha(u: &GridSolution, v: &GridSolution, window: Window) -> Result<HolderEstimate, Box<dyn std::error::Error>> {
    let fu = |x: P| u.grid.interpolate(&u.values, x);
    let fv = |x: P| v.grid.interpolate(&v.values, x);
    Ok(holder_quotient_estimate(&fu, &fv, window, 1e-7, 5)?)
}

fn c10b() -> Outcome {
    let q = DomainSpec::HalfRectangle { base: P::zero(), half_width: 1.0 };
    let window = Window { lo: P::new(-0.5, 1.0 / 32.0), hi: P::new(0.5, 0.5) };
    let g1 = |x: P| x.y * (1.0 + 0.5 * x.x);
    let g2 = |x: P| x.y * (1.0 - 0.3 * x.x) + 0.2 * x.y * x.y;
    let pairs: [(&str, ModelOperator, &dyn Fn(P) -> f64, ModelOperator, &dyn Fn(P) -> f64); 2] = [
        ("infinity pair", ModelOperator::InfinityLaplace, &g1, ModelOperator::InfinityLaplace, &g2),
        ("pucci/laplace", pucci(1.0, 2.0), &g1, ModelOperator::Laplace, &g1),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, op_u, du, op_v, dv) in pairs {
        let mut alphas = Vec::new();
        for h in [1.0 / 32.0, 1.0 / 64.0] {
            let u = solve(q.clone(), &op_u, h, 1e-10, du)?;
            let v = solve(q.clone(), &op_v, h, 1e-10, dv)?;
            let est = quotient_alpha(&u, &v, window)?;
            pass &= holder_report(&est).pass;
            alphas.push((est.alpha.unwrap_or(f64::NAN), est.residual_decades));
        }
        pass &= refinement_stable(alphas[0].0, alphas[1].0, STABILITY);
        parts.push(format!(
            "{name}: alpha {:.3} -> {:.3}, fit residual {:.3} / {:.3} decades",
            alphas[0].0, alphas[1].0, alphas[0].1, alphas[1].1
        ));
    }
    Ok((pass, parts.join("; ")))
}

fn c11() -> Outcome {
    let q = DomainSpec::HalfRectangle { base: P::zero(), half_width: 1.0 };
    let window = Window { lo: P::new(-0.5, 0.0), hi: P::new(0.5, 0.5) };
    let g1 = |x: P| x.y * (1.0 + 0.5 * x.x);
    let g2 = |x: P| x.y * x.x.exp();
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, g) in [("x2(1+x1/2)", &g1 as &dyn Fn(P) -> f64), ("x2 e^x1", &g2)] {
        let mut b = Vec::new();
        for h in [1.0 / 32.0, 1.0 / 64.0] {
            let sol = solve(q.clone(), &ModelOperator::InfinityLaplace, h, 1e-10, g)?;
            b.push(gradient_bound_check(&sol, 0.0, window)?);
        }
        let rep = gradient_bound_report(&b[0], &b[1]);
        pass &= rep.pass;
        parts.push(format!("{name}: c {:.4} -> {:.4}", b[0].c_meas, b[1].c_meas));
    }
    Ok((pass, parts.join(", ")))
}

fn c12a() -> Outcome {
    let opts = SolveOptions::default().with_tol(1e-9);
    let radii = [2.0, 4.0, 8.0];
    let hp = harmonic_measure_growth(&GrowthFamily::HalfPlane, &ModelOperator::InfinityLaplace, &radii, 1.0 / 16.0, P::new(0.0, 1.0), &opts)?;
    let r1 = measure_growth(&hp, 1.0)?;
    let k = sector_exponent(2.0, 2.0)?;
    let sc = harmonic_measure_growth(&GrowthFamily::Sector { nu: 2.0 }, &ModelOperator::Laplace, &radii, 1.0 / 16.0, P::new(1.0, 0.0), &opts)?;
    let r2 = measure_growth(&sc, k)?;
    Ok((
        r1.pass && r2.pass,
        format!(
            "half-plane infinity exponent {:.3} (1), harmonic sector exponent {:.3} ({k}), spreads {:.2} / {:.2}",
            r1.get("exponent"),
            r2.get("exponent"),
            r1.get("ratio_spread"),
            r2.get("ratio_spread")
        ),
    ))
}

fn c12b() -> Outcome {
    let h = 1.0 / 16.0;
    let window = |x: P| x.x.abs() <= 0.5 && x.y <= 0.5;
    let mut parts = Vec::new();
    let mut pass = true;
    let perturbed = |x: P| x.y * (1.0 + 0.3 * x.x.sin());
    let exact = |x: P| 3.0 * x.y;
    for (name, g, is_exact) in [("perturbed", &perturbed as &dyn Fn(P) -> f64, false), ("3 x2", &exact, true)] {
        let mut lv = Vec::new();
        for big_r in [1.0, 2.0, 4.0] {
            let sol = solve(DomainSpec::HalfRectangle { base: P::zero(), half_width: big_r }, &ModelOperator::InfinityLaplace, h, 1e-11, g)?;
            lv.push(drift_level(&sol, big_r, &|x| x.y, P::new(0.0, 0.25), &window)?);
        }
        let rep = uniqueness_drift(&lv, is_exact)?;
        pass &= rep.pass;
        parts.push(format!(
            "{name}: drift {}",
            lv.iter().map(|l| format!("{:.2e}", l.drift)).collect::<Vec<_>>().join(" -> ")
        ));
    }
    let model = |x: P| x.x * x.x - x.y * x.y;
    let mut lv = Vec::new();
    for big_r in [1.0, 2.0, 4.0] {
        let region = Region::clipped(DomainSpec::Sector { apex: P::zero(), nu: 2.0 }, Clip::Disk { center: P::zero(), radius: big_r });
        let grid = Grid::new(region, h)?;
        let sol = solve_dirichlet(&grid, &ModelOperator::Laplace, &model, &SolveOptions::default().with_tol(1e-11))?;
        sol.require_converged()?;
        lv.push(drift_level(&sol, big_r, &model, P::new(0.5, 0.0), &|x: P| (0.25..=0.75).contains(&x.norm()))?);
    }
    let rep = uniqueness_drift(&lv, true)?;
    pass &= rep.pass;
    parts.push(format!(
        "sector r^2 cos 2phi: drift {} (noise {:.1e})",
        lv.iter().map(|l| format!("{:.2e}", l.drift)).collect::<Vec<_>>().join(" -> "),
        lv.iter().map(|l| l.noise).fold(0.0, f64::max)
    ));
    Ok((pass, parts.join("; ")))
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let mut s = Suite { lines: Vec::new() };
    s.run("C1", "catalog exactness", c1);
    s.run("C2", "reference constants", c2);
    s.run("C3", "barrier strictness", c3);
    s.run("C4", "barrier derivatives", c4);
    let t5 = Instant::now();
    let cases = sandwich_solutions();
    let solve_secs = t5.elapsed().as_secs_f64();
    match &cases {
        Ok(cases) => {
            s.run("C5", "decay sandwich", || c5(cases, solve_secs));
            s.run("C6", "boundary Harnack", || c6(cases));
        }
        Err(e) => {
            let msg = e.to_string();
            s.run("C5", "decay sandwich", || Err(msg.clone().into()));
            s.run("C6", "boundary Harnack", || Err(msg.into()));
        }
    }
    s.run("C7", "exponent identities", c7);
    s.run("C8a", "flat solution residual", c8a);
    s.run("C8b", "sector solution residual", c8b);
    s.run("C8c", "infinity scheme on x2", c8c);
    s.run("C8d", "infinity scheme on a cone", c8d);
    s.run("C9", "reflection", c9);
    s.run("C10a", "quotient lemma bounds", c10a);
    s.run("C10b", "quotient Holder fits", c10b);
    s.run("C11", "gradient bound", c11);
    s.run("C12a", "growth exponents", c12a);
    s.run("C12b", "uniqueness drift", c12b);
    let secs = start.elapsed().as_secs_f64();
    s.run("C12c", "suite runtime", || Ok((secs < SUITE_SECONDS, format!("{secs:.1}s (< {SUITE_SECONDS}s)"))));

    let red: Vec<&str> = s.lines.iter().filter(|l| !l.1).map(|l| l.0.as_str()).collect();
    println!("acceptance: {} green, {} red {red:?}", s.lines.len() - red.len(), red.len());
    let unexpected: Vec<&&str> = red.iter().filter(|id| !KNOWN_RED.contains(id)).collect();
    assert!(unexpected.is_empty(), "unexpected red criteria: {unexpected:?}");
    let healed: Vec<&&str> = KNOWN_RED.iter().filter(|id| !red.contains(id)).collect();
    assert!(healed.is_empty(), "known red criteria now green, update KNOWN_RED: {healed:?}");
}
