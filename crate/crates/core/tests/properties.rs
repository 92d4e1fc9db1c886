use barrierlab::geometry::{DomainSpec, Point};
use barrierlab::grid::{discretize, solve_dirichlet, Grid, NodeCtx, Region, SchemeId, SolveOptions};
use barrierlab::odi::{analytic_profile, gradient_power_slope_limit, CatalogEntry, Side};
use barrierlab::pucci::{pucci_minus, pucci_plus, EllipticityPair, LowerOrderTerm, ModelOperator, SymMatrix};
use barrierlab::verify::sector_exponent;
use barrierlab::GeometryError;
use proptest::prelude::*;

type P = Point<f64>;

fn sym() -> impl Strategy<Value = SymMatrix<f64>> {
    (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b, c)| SymMatrix::new(a, b, c))
}

fn psd() -> impl Strategy<Value = SymMatrix<f64>> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
        .prop_map(|(a, b, c, d)| SymMatrix::outer(P::new(a, b)).add(&SymMatrix::outer(P::new(c, d))))
}

fn ellipticity() -> impl Strategy<Value = (f64, f64)> {
    (0.2..3.0f64, 1.0..4.0f64).prop_map(|(l, f)| (l, l * f))
}

fn domain() -> impl Strategy<Value = DomainSpec<f64>> {
    prop_oneof![
        Just(DomainSpec::Disk { center: P::new(0.1, -0.2), radius: 1.0 }),
        Just(DomainSpec::HalfDisk { center: P::zero(), radius: 1.2 }),
        Just(DomainSpec::Annulus { center: P::zero(), inner: 0.4, outer: 1.3 }),
        Just(DomainSpec::Rectangle { corner: P::new(-1.0, -0.5), width: 2.0, height: 1.0 }),
        Just(DomainSpec::HalfRectangle { base: P::zero(), half_width: 1.0 }),
        (0.6..3.0f64).prop_map(|nu| DomainSpec::Sector { apex: P::zero(), nu }),
    ]
}

fn point() -> impl Strategy<Value = P> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y)| P::new(x, y))
}

proptest! {
    #[test]
    fn pucci_is_monotone_and_homogeneous(x in sym(), y in psd(), (l, cap) in ellipticity(), t in 0.0..10.0f64) {
        let scale = 1.0 + x.norm() + y.norm();
        prop_assert!(pucci_plus(&x.add(&y), l, cap) <= pucci_plus(&x, l, cap) + 1e-12 * scale);
        prop_assert!(pucci_minus(&x.add(&y), l, cap) <= pucci_minus(&x, l, cap) + 1e-12 * scale);
        prop_assert!((pucci_plus(&x.scale(t), l, cap) - t * pucci_plus(&x, l, cap)).abs() <= 1e-12 * scale * (1.0 + t));
        prop_assert!(pucci_minus(&x, l, cap) <= pucci_plus(&x, l, cap) + 1e-12 * scale);
        prop_assert!((pucci_minus(&x, l, cap) + pucci_plus(&x.scale(-1.0), l, cap)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn signed_distance_is_consistent(d in domain(), x in point(), y in point()) {
        let (dx, dy) = (d.signed_distance(x), d.signed_distance(y));
        prop_assert!((dx - dy).abs() <= x.dist(y) + 1e-12);
        if dx > 1e-12 {
            prop_assert!(d.contains(x));
        }
        if dx < -1e-12 {
            prop_assert!(!d.contains(x));
        }
        let foot = match d.nearest_boundary_point(x) {
            Err(GeometryError::AmbiguousProjection) => return Ok(()),
            Err(GeometryError::NotInterior) if !d.contains(x) => return Ok(()),
            other => other.unwrap(),
        };
        prop_assert!((x.dist(foot) - dx.abs()).abs() <= 1e-12);
        prop_assert!(d.signed_distance(foot).abs() <= 1e-12);
    }

    #[test]
    fn monotone_schemes_in_neighbours(
        nb in prop::array::uniform8(-1.0..1.0f64),
        u in -1.0..1.0f64,
        j in 0usize..8,
        bump in 1e-6..0.5f64,
        (l, cap) in ellipticity(),
        plus in any::<bool>(),
    ) {
        let ell = EllipticityPair::constant(l, cap);
        let pucci = if plus {
            ModelOperator::PucciPlus { ellipticity: ell, lower_order: LowerOrderTerm::Zero }
        } else {
            ModelOperator::PucciMinus { ellipticity: ell, lower_order: LowerOrderTerm::Zero }
        };
        let ctx = NodeCtx { x: P::new(0.3, 0.4), h: 0.1, t: 0.4 };
        for (op, scheme) in [
            (ModelOperator::Laplace, SchemeId::FivePoint),
            (pucci, SchemeId::FrameExtremal),
            (ModelOperator::InfinityLaplace, SchemeId::MinMaxPair),
        ] {
            let d = discretize(&op, Some(scheme)).unwrap();
            let f0 = d.residual(&ctx, u, &nb);
            let mut up = nb;
            up[j] += bump;
            prop_assert!(d.residual(&ctx, u, &up) <= f0 + 1e-9 * (1.0 + f0.abs()));
            prop_assert!(d.residual(&ctx, u + bump, &nb) >= f0 - 1e-9 * (1.0 + f0.abs()));
        }
    }

    #[test]
    fn frozen_p_laplace_rows_are_monotone(nb in prop::array::uniform8(-1.0..1.0f64), u in -1.0..1.0f64, p in 1.2..6.5f64) {
        let d = discretize(&ModelOperator::PLaplace { p }, None).unwrap();
        let ctx = NodeCtx { x: P::new(0.3, 0.4), h: 0.05, t: 0.4 };
        let row = d.policy_row(&ctx, u, &nb).unwrap();
        prop_assert!(row.a.iter().all(|&a| a >= 0.0));
        let sum: f64 = row.a.iter().sum();
        prop_assert!(row.diag >= sum * (1.0 - 1e-12));
    }

    #[test]
    fn profile_comparison(
        (l, cap) in ellipticity(),
        r in 0.1..2.0f64,
        m in 0.1..2.0f64,
        extra in 0.0..2.0f64,
        vanishing in any::<bool>(),
    ) {
        let entry = if vanishing { CatalogEntry::Vanishing } else { CatalogEntry::Uniform };
        // lambda(t) = l t^a must stay below Lambda on (0, r].
        let cap = if vanishing { cap.max(1.01 * l * r.sqrt()) } else { cap };
        let spec = |side| entry.spec(side, 2, r, l, cap, 0.5, 3.0, 1.0, 1.0);
        let lo = analytic_profile(&spec(Side::Lower), m).unwrap();
        let up = analytic_profile(&spec(Side::Upper), m + extra).unwrap();
        for j in 0..=200 {
            let t = r * j as f64 / 200.0;
            prop_assert!(lo.value(t) <= up.value(t) + 1e-12 * (1.0 + m + extra));
        }
    }

    #[test]
    fn gradient_power_profiles_ordered_by_slope((l, cap) in ellipticity(), r in 0.2..2.0f64, k in 2.5..5.0f64) {
        let spec = CatalogEntry::GradientPower.spec(Side::Upper, 2, r, l, cap, 0.5, k, 1.0, 1.0);
        let cap_value = gradient_power_slope_limit(&spec).unwrap();
        let mut last = (0.0, 0.0);
        // Log-spaced boundary values; the initial slope must increase with them.
        for j in 0..12 {
            let bv = cap_value * 10f64.powf(-4.0 + 4.0 * j as f64 / 12.0);
            let p = analytic_profile(&spec, bv).unwrap();
            let slope = p.derivative(0.0);
            prop_assert!(slope > last.0 && bv > last.1);
            last = (slope, bv);
        }
    }

    #[test]
    fn sector_radicand_is_nonnegative(nu in 0.5001..50.0f64, p in 1.0001..200.0f64) {
        let k = sector_exponent(nu, p).unwrap();
        prop_assert!(k.is_finite() && k > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn discrete_comparison(a in -1.0..1.0f64, b in -1.0..1.0f64, c in 0.0..1.0f64, bump in 0.0..0.5f64, which in 0usize..3) {
        let op = match which {
            0 => ModelOperator::Laplace,
            1 => ModelOperator::PucciPlus { ellipticity: EllipticityPair::constant(1.0, 2.0), lower_order: LowerOrderTerm::Zero },
            _ => ModelOperator::InfinityLaplace,
        };
        let grid = Grid::new(Region::new(DomainSpec::Disk { center: P::zero(), radius: 1.0 }), 1.0 / 8.0).unwrap();
        let opts = SolveOptions::default().with_tol(1e-11);
        let g1 = move |x: P| a * x.x + b * x.y + c * x.x * x.y;
        let g2 = move |x: P| g1(x) + bump * (1.0 + x.x).powi(2);
        let u1 = solve_dirichlet(&grid, &op, &g1, &opts).unwrap();
        let u2 = solve_dirichlet(&grid, &op, &g2, &opts).unwrap();
        prop_assert!(u1.converged && u2.converged);
        for k in grid.interior() {
            prop_assert!(u1.values[k] <= u2.values[k] + 1e-9);
        }
    }
}
