use barrierlab::odi::{
    analytic_profile, bhi_constant, check_w_gamma, const_rhs_threshold, gradient_power_constants, gradient_power_slope_limit, odi_residual,
    printed_upper_drift_check, shoot_profile, CatalogEntry, OdiSpec, ShootOptions, Side,
};
use barrierlab::pucci::{EllipticityPair, LowerOrderTerm, Sign};
use barrierlab::OdiError;

fn uniform(side: Side, phi: LowerOrderTerm) -> OdiSpec {
    OdiSpec::new(side, EllipticityPair::constant(1.0, 1.0), phi, 2, 1.0)
}

/// Central difference of `h` as an independent check of the analytic derivatives.
fn fd_check(p: &barrierlab::odi::BarrierProfile, t: f64) {
    let e = 1e-5;
    let [_, g, d2] = p.eval(t);
    let g_fd = (p.value(t + e) - p.value(t - e)) / (2.0 * e);
    let d2_fd = (p.derivative(t + e) - p.derivative(t - e)) / (2.0 * e);
    assert!((g - g_fd).abs() < 1e-7 * (1.0 + g.abs()), "h' at {t}: {g} vs {g_fd}");
    assert!((d2 - d2_fd).abs() < 1e-6 * (1.0 + d2.abs()), "h'' at {t}: {d2} vs {d2_fd}");
}

#[test]
fn uniform_catalog_lower_and_upper() {
    for side in [Side::Lower, Side::Upper] {
        let spec = uniform(side, LowerOrderTerm::Zero);
        let p = analytic_profile(&spec, 1.0).unwrap();
        let s = odi_residual(&p, &spec);
        assert!(s.max_abs <= 1e-10, "{side:?}: {}", s.max_abs);
        assert_eq!(p.value(0.0), 0.0);
        assert_eq!(p.value(1.0), 1.0);
        for t in [0.1, 0.5, 0.9] {
            fd_check(&p, t);
        }
    }
}

#[test]
fn uniform_linear_envelope() {
    // m K t / (e^{Kr} - 1) <= h_low <= h_up <= M K t / (1 - e^{-Kr}) with K = 2.
    let lo = analytic_profile(&uniform(Side::Lower, LowerOrderTerm::Zero), 1.0).unwrap();
    let up = analytic_profile(&uniform(Side::Upper, LowerOrderTerm::Zero), 1.0).unwrap();
    let k: f64 = 2.0;
    for j in 1..=200 {
        let t = j as f64 / 200.0;
        assert!(k * t / (k.exp() - 1.0) <= lo.value(t) * (1.0 + 1e-14));
        assert!(lo.value(t) <= up.value(t) * (1.0 + 1e-14));
        assert!(up.value(t) <= k * t / (1.0 - (-k).exp()) * (1.0 + 1e-14));
    }
}

#[test]
fn bhi_constant_equals_e_squared() {
    let lo = analytic_profile(&uniform(Side::Lower, LowerOrderTerm::Zero), 1.0).unwrap();
    let up = analytic_profile(&uniform(Side::Upper, LowerOrderTerm::Zero), 1.0).unwrap();
    let a = bhi_constant(&lo, &up).unwrap();
    assert!((a.a - 2f64.exp()).abs() < 1e-6, "{a:?}");
}

#[test]
fn vanishing_matches_closed_integral() {
    // For a = 1/2: int_0^t e^{2K sqrt s} ds = [e^{2Ku}(u/K - 1/(2K^2))]_0^{sqrt t}, K = n Lambda / r = 2.
    let k = 2.0f64;
    let i = |t: f64, sg: f64| {
        let kk = sg * k;
        let f = |u: f64| (2.0 * kk * u).exp() * (u / kk - 1.0 / (2.0 * kk * kk));
        f(t.sqrt()) - f(0.0)
    };
    for (side, sg) in [(Side::Lower, 1.0), (Side::Upper, -1.0)] {
        let spec = OdiSpec::new(side, EllipticityPair::vanishing(0.5, 1.0), LowerOrderTerm::Zero, 2, 1.0);
        let p = analytic_profile(&spec, 1.0).unwrap();
        for t in [0.01, 0.2, 0.7, 1.0] {
            let want = i(t, sg) / i(1.0, sg);
            assert!((p.value(t) - want).abs() < 1e-13, "{side:?} t={t}: {} vs {want}", p.value(t));
        }
        assert!(odi_residual(&p, &spec).max_abs <= 1e-10);
        // Bounds e^{-+ Lambda n / ((1-a) r^a)} t / r.
        for j in 1..=100 {
            let t = j as f64 / 100.0;
            match side {
                Side::Lower => assert!(p.value(t) >= (-4f64).exp() * t - 1e-15),
                Side::Upper => assert!(p.value(t) <= 4f64.exp() * t + 1e-15),
            }
        }
    }
}

#[test]
fn vanishing_bhi_bound() {
    let mk = |side| OdiSpec::new(side, EllipticityPair::vanishing(0.5, 1.0), LowerOrderTerm::Zero, 2, 1.0);
    let lo = analytic_profile(&mk(Side::Lower), 1.0).unwrap();
    let up = analytic_profile(&mk(Side::Upper), 1.0).unwrap();
    let a = bhi_constant(&lo, &up).unwrap();
    assert!(a.a <= 8f64.exp(), "{a:?}");
}

#[test]
fn const_rhs_threshold_and_solution() {
    let alpha = (2f64.exp() - 1.0) / 4.0 - 0.5;
    assert!((alpha - 1.097264).abs() < 1e-6);
    let lo = uniform(Side::Lower, LowerOrderTerm::Constant { value: 1.0 });
    let up = uniform(Side::Upper, LowerOrderTerm::Constant { value: -1.0 });
    for spec in [&lo, &up] {
        let p = analytic_profile(spec, 1.2).unwrap();
        assert!(odi_residual(&p, spec).max_abs <= 1e-10);
        assert!((p.value(1.0) - 1.2).abs() < 1e-14);
        fd_check(&p, 0.3);
        assert!(matches!(analytic_profile(spec, 1.0), Err(OdiError::MonotonicityViolated(_))));
    }
}

#[test]
fn gradient_power_solution_and_limit() {
    let spec = uniform(Side::Upper, LowerOrderTerm::GradientPower { sign: Sign::Minus, exponent: 3.0 });
    // arctan closed form of the limiting profile at K = 2: sqrt(2)/2 atan(sqrt(e^4 - 1)).
    let want = 2f64.sqrt() / 2.0 * ((4f64).exp() - 1.0).sqrt().atan();
    let lim = gradient_power_slope_limit(&spec).unwrap();
    assert!((lim - want).abs() < 1e-14);
    assert!((lim - 1.0147).abs() < 1e-4);
    let p = analytic_profile(&spec, 0.8).unwrap();
    let s = odi_residual(&p, &spec);
    assert!(s.max_abs <= 1e-9, "{s:?}");
    assert!(s.end_error < 1e-13);
    assert!(matches!(analytic_profile(&spec, 2.0), Err(OdiError::NoBracketingSlope { .. })));
    assert!(matches!(
        shoot_profile(&spec, 2.0, &ShootOptions::default()),
        Err(OdiError::NoBracketingSlope { .. })
    ));
}

#[test]
fn gradient_power_general_k_quadrature() {
    // k = 4 goes through the substituted quadrature; compare against a plain graded sum.
    let spec = uniform(Side::Upper, LowerOrderTerm::GradientPower { sign: Sign::Minus, exponent: 4.0 });
    let p = analytic_profile(&spec, f64::INFINITY).unwrap();
    let f = |t: f64| (2.0 / ((6.0 * t).exp() - 1.0)).powf(1.0 / 3.0);
    // Midpoint sum on a geometric mesh down to 1e-14 plus the exact head int_0^e (1/3 t^-1/3) dt.
    let mut acc = 0.0;
    let eps = 1e-14f64;
    let head = (2.0f64 / 6.0).powf(1.0 / 3.0) * 1.5 * eps.powf(2.0 / 3.0);
    let n = 200_000;
    let ratio = (1.0 / eps).powf(1.0 / n as f64);
    let mut a = eps;
    for _ in 0..n {
        let b = a * ratio;
        acc += f((a * b).sqrt()) * (b - a);
        a = b;
    }
    let want = acc + head;
    assert!((p.value(1.0) - want).abs() < 1e-6, "{} vs {want}", p.value(1.0));
}

#[test]
fn drift_upper_bernoulli_and_printed_formula() {
    let spec = uniform(Side::Upper, LowerOrderTerm::QuadraticDrift { sign: Sign::Minus, mu: 0.5, modulus: 0.0 });
    let p = analytic_profile(&spec, 1.0).unwrap();
    assert!(odi_residual(&p, &spec).max_abs <= 1e-10);
    fd_check(&p, 0.4);
    let c = printed_upper_drift_check(1.0, 0.5, 2.0, 1.5, 1.0);
    assert!(c.printed_vs_exponential < 1e-12);
    assert!(c.printed_max_violation > 0.1);
    assert!(c.bernoulli_ode_residual < 1e-9);
}

#[test]
fn drift_lower_rate_is_admissible() {
    let spec = uniform(Side::Lower, LowerOrderTerm::QuadraticDrift { sign: Sign::Plus, mu: 0.3, modulus: 0.5 });
    let p = analytic_profile(&spec, 1.0).unwrap();
    let s = odi_residual(&p, &spec);
    assert!(s.max_violation <= 1e-10, "{s:?}");
    assert!(s.max_abs > 1e-6, "inequality, not equality");
    let big = uniform(Side::Lower, LowerOrderTerm::QuadraticDrift { sign: Sign::Plus, mu: 2.0, modulus: 0.0 });
    assert!(matches!(analytic_profile(&big, 1.0), Err(OdiError::NoAdmissibleRate(_))));
}

#[test]
fn shooting_agrees_with_catalog() {
    let opts = ShootOptions::default();
    let cases = [
        (CatalogEntry::Uniform, Side::Lower, 1.0),
        (CatalogEntry::Uniform, Side::Upper, 1.0),
        (CatalogEntry::Vanishing, Side::Lower, 1.0),
        (CatalogEntry::Vanishing, Side::Upper, 1.0),
        (CatalogEntry::ConstRhs, Side::Lower, 1.2),
        (CatalogEntry::ConstRhs, Side::Upper, 1.2),
        (CatalogEntry::GradientPower, Side::Upper, 0.8),
        (CatalogEntry::DriftUpper, Side::Upper, 1.0),
    ];
    for (entry, side, bv) in cases {
        let spec = entry.spec(side, 2, 1.0, 1.0, 1.0, 0.5, 3.0, 0.5, 0.0);
        let exact = analytic_profile(&spec, bv).unwrap();
        let shot = shoot_profile(&spec, bv, &opts).unwrap();
        let d = exact.sup_distance(&shot, 2000);
        assert!(d <= 1e-7, "{entry:?} {side:?}: {d}");
    }
}

#[test]
fn w_gamma_solves_its_equation() {
    for gamma in [0.0, 0.1, 1.0] {
        let c = check_w_gamma(3.0, gamma, 1.0).unwrap();
        assert!(c.max_rel_residual < 1e-12);
        assert!((c.exponent_measured - 0.5).abs() < 1e-12);
    }
}

#[test]
fn gradient_power_constants_bracket_limit() {
    let (lo, up) = gradient_power_constants(3.0, 1.0, 1.0, 2);
    let c_check = 2.0 * (2.0 / (4f64.exp() - 1.0)).sqrt();
    assert!((lo - c_check).abs() < 1e-15 && (lo - 0.38635).abs() < 1e-5);
    assert!((up - 2f64.sqrt()).abs() < 1e-15);
    let spec = uniform(Side::Upper, LowerOrderTerm::GradientPower { sign: Sign::Minus, exponent: 3.0 });
    let p = analytic_profile(&spec, f64::INFINITY).unwrap();
    for j in 1..=1000 {
        let t = j as f64 / 1000.0;
        let q = p.value(t) / t.sqrt();
        assert!(lo < q && q < up, "t = {t}: {q}");
    }
}

#[test]
fn const_rhs_threshold_value() {
    assert!((const_rhs_threshold(1.0, 1.0, 2) - 1.097264).abs() < 1e-6);
}
