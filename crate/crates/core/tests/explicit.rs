use barrierlab::geometry::{DomainSpec, Point};
use barrierlab::grid::{Clip, Region, SchemeId};
use barrierlab::pucci::ModelOperator;
use barrierlab::verify::*;
use barrierlab::VerifyError;

type P = Point<f64>;

#[test]
fn sector_exponent_at_p2_is_nu() {
    for nu in [0.6, 1.0, 2.0, 5.0] {
        assert!((sector_exponent(nu, 2.0).unwrap() - nu).abs() < 1e-12);
    }
    let k = sector_exponent(0.6, 3.0).unwrap();
    assert!(k.is_finite() && k > 0.0);
    assert!(matches!(sector_exponent(0.5, 2.0), Err(VerifyError::InvalidArgument(_))));
}

#[test]
fn sector_exponent_half_plane_is_one() {
    for p in [1.5, 2.0, 3.0, 10.0] {
        assert!((sector_exponent(1.0, p).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sector_profiles_at_p2_are_cosines() {
    for nu in [0.6, 1.0, 2.0, 5.0] {
        let s = sector_profile(nu, 2.0, 2048).unwrap();
        let mut err: f64 = 0.0;
        for j in 0..=500 {
            let phi = s.half_angle * j as f64 / 500.0;
            err = err.max((s.eval(phi) - (nu * phi).cos()).abs());
        }
        assert!(err < 1e-6, "nu = {nu}: {err}");
        assert!(sector_report(&s).pass, "{:?}", sector_report(&s));
    }
}

#[test]
fn sector_profile_p3_certificates() {
    for nu in [1.0, 2.0, 0.75] {
        let s = sector_profile(nu, 3.0, 1024).unwrap();
        let rep = sector_report(&s);
        assert!(rep.pass, "{rep:?}");
    }
}

/// Independent check of the angular equation: the nondivergence p-Laplacian of
/// `r^k f(phi)` by centred differences in Cartesian coordinates.
#[test]
fn sector_solution_is_p_harmonic_pointwise() {
    let (nu, p) = (2.0, 3.0);
    let s = sector_profile(nu, p, 4096).unwrap();
    let u = |x: P| s.solution(P::zero(), x);
    let e = 1e-3;
    for &(r, phi) in &[(0.7, 0.1), (0.9, -0.4), (0.5, 0.6)] {
        let x = P::polar(r, phi);
        let ux = (u(x + P::new(e, 0.0)) - u(x - P::new(e, 0.0))) / (2.0 * e);
        let uy = (u(x + P::new(0.0, e)) - u(x - P::new(0.0, e))) / (2.0 * e);
        let uxx = (u(x + P::new(e, 0.0)) - 2.0 * u(x) + u(x - P::new(e, 0.0))) / (e * e);
        let uyy = (u(x + P::new(0.0, e)) - 2.0 * u(x) + u(x - P::new(0.0, e))) / (e * e);
        let uxy = (u(x + P::new(e, e)) - u(x + P::new(e, -e)) - u(x + P::new(-e, e)) + u(x + P::new(-e, -e)))
            / (4.0 * e * e);
        let g2 = ux * ux + uy * uy;
        let inf = (ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy) / g2;
        let lap = uxx + uyy;
        let scale = uxx.abs() + uyy.abs();
        assert!((lap + (p - 2.0) * inf).abs() < 1e-4 * scale, "at {x:?}: {}", lap + (p - 2.0) * inf);
    }
}

#[test]
fn flat_exponent_values() {
    assert_eq!(flat_exponent(f64::INFINITY, 3, 1).unwrap(), 1.0);
    assert_eq!(flat_exponent(f64::INFINITY, 7, 2).unwrap(), 1.0);
    assert!((flat_exponent(4.0, 3, 1).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!(matches!(flat_exponent(2.0, 3, 1), Err(VerifyError::NonpositiveExponent(b)) if b == 0.0));
    assert!(matches!(flat_exponent(3.0, 2, 2), Err(VerifyError::InvalidArgument(_))));
}

#[test]
fn flat_solution_residual_is_order_h() {
    for p in [3.0, 4.0] {
        let beta = flat_exponent(p, 3, 1).unwrap();
        let u = flat_solution(beta, 3, 1).unwrap();
        let region = Region::clipped(
            DomainSpec::FlatComplement { n: 3, m: 1 },
            Clip::Box { lo: P::new(-1.25, -1.25), hi: P::new(1.25, 1.25) },
        );
        let window = |x: P| (0.5..=1.0).contains(&x.norm());
        let levels: Vec<_> = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
            .iter()
            .map(|&h| explicit_residual(&ModelOperator::PLaplace { p }, None, &region, h, &u, &window).unwrap())
            .collect();
        let rep = residual_order_report("flat", &levels);
        assert!(rep.pass, "{rep:?}");
    }
}

#[test]
fn infinity_scheme_exact_on_linear() {
    let region = Region::clipped(DomainSpec::HalfPlane { axis: barrierlab::geometry::Axis::Y }, Clip::Box {
        lo: P::new(-1.0, -1.0),
        hi: P::new(1.0, 1.0),
    });
    let r = explicit_residual(&ModelOperator::InfinityLaplace, Some(SchemeId::MinMaxPair), &region, 1.0 / 32.0, &|x| x.y, &|_| true)
        .unwrap();
    assert!(r.max_abs <= 1e-12, "{r:?}");
}
