//! Domains, exact distance functions, boundary projections and touching spheres.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::scalar::Scalar;

/// Point (or vector) in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn from_f64(x: f64, y: f64) -> Self {
        Self::new(T::c(x), T::c(y))
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn unit(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() {
            Some(self * (T::one() / n))
        } else {
            None
        }
    }

    /// Rotation by a quarter turn clockwise.
    pub fn perp_cw(self) -> Self {
        Self::new(self.y, -self.x)
    }

    pub fn polar(r: T, angle: T) -> Self {
        Self::new(r * angle.cos(), r * angle.sin())
    }

    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<T: Scalar> Add for Point<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Point<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Point<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Scalar> Neg for Point<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Coordinate axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Open planar domain.
///
/// Unbounded variants (`HalfPlane`, `Sector`, `FlatComplement`) are truncated
/// by the grid builder, not here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec<T> {
    /// `{x : x[axis] > 0}`.
    HalfPlane { axis: Axis },
    Disk { center: Point<T>, radius: T },
    /// Upper half of a disk, `{|x - c| < R, x.y > c.y}`.
    HalfDisk { center: Point<T>, radius: T },
    Annulus { center: Point<T>, inner: T, outer: T },
    /// Axis-aligned box with lower-left `corner`.
    Rectangle { corner: Point<T>, width: T, height: T },
    /// `{|x.x - base.x| < r, 0 < x.y - base.y < r}` with `r = half_width`.
    HalfRectangle { base: Point<T>, half_width: T },
    /// Cone `{|arg(x - apex)| < pi / (2 nu)}` opening along the positive x axis.
    Sector { apex: Point<T>, nu: T },
    /// Complement of an `m`-dimensional flat in `R^n`, shown in a 2-D chart.
    ///
    /// With `n - m = 1` the flat is the line `x = 0`; with `n - m = 2` the chart
    /// is the normal plane and the flat is the origin.
    FlatComplement { n: u32, m: u32 },
}

/// Which side of the boundary a touching ball lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    Interior,
    Exterior,
}

/// Ball `B(center, radius)` touching the boundary at `contact`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereWitness<T> {
    pub center: Point<T>,
    pub radius: T,
    pub contact: Point<T>,
    pub kind: WitnessKind,
}

#[derive(Clone, Copy, Debug)]
enum Piece<T> {
    Segment { a: Point<T>, b: Point<T>, normal: Point<T> },
    Ray { origin: Point<T>, dir: Point<T>, normal: Point<T> },
    Line { point: Point<T>, dir: Point<T>, normal: Point<T> },
    /// Arc of the circle through angles `[from, to]` (full circle when `full`).
    Arc { center: Point<T>, radius: T, from: T, to: T, full: bool, inward: bool },
    Dot { p: Point<T>, normal: Point<T> },
}

impl<T: Scalar> Piece<T> {
    /// Closest point on the piece, `None` when it is not unique.
    fn closest(&self, x: Point<T>) -> Option<Point<T>> {
        match *self {
            Piece::Segment { a, b, .. } => {
                let d = b - a;
                let t = ((x - a).dot(d) / d.dot(d)).max(T::zero()).min(T::one());
                Some(a + d * t)
            }
            Piece::Ray { origin, dir, .. } => {
                let t = (x - origin).dot(dir).max(T::zero());
                Some(origin + dir * t)
            }
            Piece::Line { point, dir, .. } => Some(point + dir * (x - point).dot(dir)),
            Piece::Arc { center, radius, from, to, full, .. } => {
                let v = x - center;
                let u = v.unit()?;
                let on_circle = center + u * radius;
                if full {
                    return Some(on_circle);
                }
                let ang = v.angle();
                if ang >= from && ang <= to {
                    Some(on_circle)
                } else {
                    let pa = center + Point::polar(radius, from);
                    let pb = center + Point::polar(radius, to);
                    let (da, db) = (x.dist(pa), x.dist(pb));
                    if da < db {
                        Some(pa)
                    } else {
                        Some(pb)
                    }
                }
            }
            Piece::Dot { p, .. } => Some(p),
        }
    }

    fn distance(&self, x: Point<T>) -> T {
        match (self, self.closest(x)) {
            (_, Some(p)) => x.dist(p),
            (Piece::Arc { radius, .. }, None) => *radius,
            _ => unreachable!("only arcs lack a unique projection"),
        }
    }

    fn inward_normal(&self, w: Point<T>) -> Point<T> {
        match *self {
            Piece::Segment { normal, .. } | Piece::Ray { normal, .. } | Piece::Line { normal, .. } => {
                normal
            }
            Piece::Dot { normal, .. } => normal,
            Piece::Arc { center, inward, .. } => {
                let u = (w - center).unit().unwrap_or(Point::new(T::one(), T::zero()));
                if inward {
                    -u
                } else {
                    u
                }
            }
        }
    }
}

fn box_pieces<T: Scalar>(a: Point<T>, b: Point<T>) -> Vec<Piece<T>> {
    let (o, l) = (T::zero(), T::one());
    let p = |x, y| Point::new(x, y);
    vec![
        Piece::Segment { a: p(a.x, a.y), b: p(b.x, a.y), normal: p(o, l) },
        Piece::Segment { a: p(b.x, a.y), b: p(b.x, b.y), normal: p(-l, o) },
        Piece::Segment { a: p(b.x, b.y), b: p(a.x, b.y), normal: p(o, -l) },
        Piece::Segment { a: p(a.x, b.y), b: p(a.x, a.y), normal: p(l, o) },
    ]
}

fn box_contains<T: Scalar>(a: Point<T>, b: Point<T>, x: Point<T>) -> bool {
    x.x > a.x && x.x < b.x && x.y > a.y && x.y < b.y
}

impl<T: Scalar> DomainSpec<T> {
    /// Checks the parameter invariants of the variant.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let pos = |v: T, what: &str| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(GeometryError::InvalidDomain(format!("{what} must be positive and finite")))
            }
        };
        match self {
            DomainSpec::HalfPlane { .. } => Ok(()),
            DomainSpec::Disk { radius, .. } | DomainSpec::HalfDisk { radius, .. } => {
                pos(*radius, "radius")
            }
            DomainSpec::Annulus { inner, outer, .. } => {
                pos(*inner, "inner radius")?;
                pos(*outer - *inner, "outer minus inner radius")
            }
            DomainSpec::Rectangle { width, height, .. } => {
                pos(*width, "width")?;
                pos(*height, "height")
            }
            DomainSpec::HalfRectangle { half_width, .. } => pos(*half_width, "half width"),
            DomainSpec::Sector { nu, .. } => {
                if *nu >= T::c(0.5) && nu.is_finite() {
                    Ok(())
                } else {
                    Err(GeometryError::InvalidDomain("sector opening nu must be >= 1/2".into()))
                }
            }
            DomainSpec::FlatComplement { n, m } => {
                if *m < *n && (n - m == 1 || n - m == 2) {
                    Ok(())
                } else {
                    Err(GeometryError::InvalidDomain(
                        "flat complement needs codimension n - m in {1, 2}".into(),
                    ))
                }
            }
        }
    }

    /// Half opening angle of a sector.
    pub fn sector_half_angle(nu: T) -> T {
        T::FRAC_PI_2() / nu
    }

    fn pieces(&self) -> Vec<Piece<T>> {
        let (o, l) = (T::zero(), T::one());
        match *self {
            DomainSpec::HalfPlane { axis } => {
                let (dir, normal) = match axis {
                    Axis::X => (Point::new(o, l), Point::new(l, o)),
                    Axis::Y => (Point::new(l, o), Point::new(o, l)),
                };
                vec![Piece::Line { point: Point::zero(), dir, normal }]
            }
            DomainSpec::Disk { center, radius } => vec![Piece::Arc {
                center,
                radius,
                from: -T::PI(),
                to: T::PI(),
                full: true,
                inward: true,
            }],
            DomainSpec::HalfDisk { center, radius } => vec![
                Piece::Arc { center, radius, from: o, to: T::PI(), full: false, inward: true },
                Piece::Segment {
                    a: center - Point::new(radius, o),
                    b: center + Point::new(radius, o),
                    normal: Point::new(o, l),
                },
            ],
            DomainSpec::Annulus { center, inner, outer } => vec![
                Piece::Arc { center, radius: outer, from: -T::PI(), to: T::PI(), full: true, inward: true },
                Piece::Arc { center, radius: inner, from: -T::PI(), to: T::PI(), full: true, inward: false },
            ],
            DomainSpec::Rectangle { corner, width, height } => {
                box_pieces(corner, corner + Point::new(width, height))
            }
            DomainSpec::HalfRectangle { base, half_width } => box_pieces(
                base - Point::new(half_width, o),
                base + Point::new(half_width, half_width),
            ),
            DomainSpec::Sector { apex, nu } => {
                let th = Self::sector_half_angle(nu);
                let up = Point::polar(l, th);
                let down = Point::polar(l, -th);
                vec![
                    Piece::Ray { origin: apex, dir: up, normal: up.perp_cw() },
                    Piece::Ray { origin: apex, dir: down, normal: -down.perp_cw() },
                ]
            }
            DomainSpec::FlatComplement { n, m } => {
                if n - m == 1 {
                    vec![Piece::Line { point: Point::zero(), dir: Point::new(o, l), normal: Point::new(l, o) }]
                } else {
                    vec![Piece::Dot { p: Point::zero(), normal: Point::new(l, o) }]
                }
            }
        }
    }

    /// Open-set membership.
    pub fn contains(&self, x: Point<T>) -> bool {
        match *self {
            DomainSpec::HalfPlane { axis: Axis::X } => x.x > T::zero(),
            DomainSpec::HalfPlane { axis: Axis::Y } => x.y > T::zero(),
            DomainSpec::Disk { center, radius } => x.dist(center) < radius,
            DomainSpec::HalfDisk { center, radius } => x.dist(center) < radius && x.y > center.y,
            DomainSpec::Annulus { center, inner, outer } => {
                let r = x.dist(center);
                r > inner && r < outer
            }
            DomainSpec::Rectangle { corner, width, height } => {
                box_contains(corner, corner + Point::new(width, height), x)
            }
            DomainSpec::HalfRectangle { base, half_width } => box_contains(
                base - Point::new(half_width, T::zero()),
                base + Point::new(half_width, half_width),
                x,
            ),
            DomainSpec::Sector { apex, nu } => {
                let v = x - apex;
                v.norm() > T::zero() && v.angle().abs() < Self::sector_half_angle(nu)
            }
            DomainSpec::FlatComplement { n, m } => {
                if n - m == 1 {
                    x.x != T::zero()
                } else {
                    x.norm() > T::zero()
                }
            }
        }
    }

    /// Exact signed distance, positive inside.
    pub fn signed_distance(&self, x: Point<T>) -> T {
        let d = self
            .pieces()
            .iter()
            .map(|p| p.distance(x))
            .fold(T::infinity(), T::min);
        if self.contains(x) {
            d
        } else {
            -d
        }
    }

    /// Unsigned distance to the boundary.
    pub fn boundary_distance(&self, x: Point<T>) -> T {
        self.signed_distance(x).abs()
    }

    /// Unique closest boundary point of an interior point.
    pub fn nearest_boundary_point(&self, x: Point<T>) -> Result<Point<T>, GeometryError> {
        if !self.contains(x) {
            return Err(GeometryError::NotInterior);
        }
        let cands: Vec<(T, Option<Point<T>>)> = self
            .pieces()
            .iter()
            .map(|p| (p.distance(x), p.closest(x)))
            .collect();
        let dmin = cands.iter().map(|c| c.0).fold(T::infinity(), T::min);
        let tol = T::tie_tol() * (T::one() + dmin);
        let mut best: Option<Point<T>> = None;
        for (d, p) in cands {
            if d > dmin + tol {
                continue;
            }
            let p = p.ok_or(GeometryError::AmbiguousProjection)?;
            match best {
                None => best = Some(p),
                Some(b) if b.dist(p) <= tol => {}
                Some(_) => return Err(GeometryError::AmbiguousProjection),
            }
        }
        best.ok_or(GeometryError::AmbiguousProjection)
    }

    /// Inward normals of every boundary piece passing through `w`.
    fn normals_at(&self, w: Point<T>, tol: T) -> Vec<Point<T>> {
        self.pieces()
            .iter()
            .filter(|p| p.distance(w) <= tol)
            .map(|p| p.inward_normal(w))
            .collect()
    }

    /// Touching ball of the given radius at the boundary point `w`.
    ///
    /// The candidate centre is placed along the (bisected) normal and then
    /// certified with the exact signed distance.
    pub fn sphere_witness(
        &self,
        w: Point<T>,
        radius: T,
        kind: WitnessKind,
    ) -> Result<SphereWitness<T>, GeometryError> {
        if !(radius > T::zero()) {
            return Err(GeometryError::InvalidDomain("witness radius must be positive".into()));
        }
        let scale = T::one() + w.norm() + radius;
        let tol = T::tie_tol() * scale;
        if self.boundary_distance(w) > tol {
            return Err(GeometryError::NotOnBoundary);
        }
        let normals = self.normals_at(w, tol);
        let sum = normals.iter().fold(Point::zero(), |a, &n| a + n);
        let dir = sum.unit().unwrap_or(Point::new(T::one(), T::zero()));
        let (center, sd_target) = match kind {
            WitnessKind::Interior => (w + dir * radius, radius),
            WitnessKind::Exterior => (w - dir * radius, -radius),
        };
        let sd = self.signed_distance(center);
        if (sd - sd_target).abs() <= tol {
            Ok(SphereWitness { center, radius, contact: w, kind })
        } else {
            Err(GeometryError::NotSatisfied)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    type P = Point<f64>;

    #[test]
    fn disk_distance_and_projection() {
        let d = DomainSpec::Disk { center: P::zero(), radius: 1.0 };
        assert_abs_diff_eq!(d.signed_distance(P::new(0.5, 0.0)), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.signed_distance(P::new(2.0, 0.0)), -1.0, epsilon = 1e-15);
        assert_eq!(d.nearest_boundary_point(P::new(0.5, 0.0)).unwrap(), P::new(1.0, 0.0));
        assert_eq!(d.nearest_boundary_point(P::zero()), Err(GeometryError::AmbiguousProjection));
    }

    #[test]
    fn half_disk_distance_uses_flat_and_arc() {
        let d = DomainSpec::HalfDisk { center: P::zero(), radius: 1.0 };
        assert_abs_diff_eq!(d.signed_distance(P::new(0.0, 0.3)), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(d.signed_distance(P::new(0.0, 0.8)), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(d.signed_distance(P::new(2.0, -1.0)), -2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(
            d.nearest_boundary_point(P::new(0.0, 0.5)),
            Err(GeometryError::AmbiguousProjection)
        );
    }

    #[test]
    fn half_plane_witnesses() {
        let d = DomainSpec::HalfPlane { axis: Axis::Y };
        let w = P::new(0.3, 0.0);
        let i = d.sphere_witness(w, 0.5, WitnessKind::Interior).unwrap();
        assert_eq!(i.center, P::new(0.3, 0.5));
        let e = d.sphere_witness(w, 0.5, WitnessKind::Exterior).unwrap();
        assert_eq!(e.center, P::new(0.3, -0.5));
    }

    #[test]
    fn sector_apex_interior_witness_fails_for_convex_corner() {
        let d = DomainSpec::Sector { apex: P::zero(), nu: 2.0 };
        assert_eq!(
            d.sphere_witness(P::zero(), 0.1, WitnessKind::Interior),
            Err(GeometryError::NotSatisfied)
        );
        assert!(d.sphere_witness(P::zero(), 0.1, WitnessKind::Exterior).is_ok());
        let wide = DomainSpec::Sector { apex: P::zero(), nu: 0.75 };
        assert!(wide.sphere_witness(P::zero(), 0.1, WitnessKind::Interior).is_ok());
        assert_eq!(
            wide.sphere_witness(P::zero(), 0.1, WitnessKind::Exterior),
            Err(GeometryError::NotSatisfied)
        );
    }

    #[test]
    fn sector_distance() {
        let d = DomainSpec::Sector { apex: P::zero(), nu: 2.0 };
        // Boundary rays are the diagonals; (1, 0) is at distance sin(pi/4).
        assert_abs_diff_eq!(d.signed_distance(P::new(1.0, 0.0)), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.signed_distance(P::new(-1.0, 0.0)), -1.0, epsilon = 1e-15);
        assert!(d.nearest_boundary_point(P::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn flat_complement_has_no_exterior_ball() {
        let d = DomainSpec::<f64>::FlatComplement { n: 2, m: 1 };
        assert!(d.sphere_witness(P::new(0.0, 0.4), 0.2, WitnessKind::Interior).is_ok());
        assert_eq!(
            d.sphere_witness(P::new(0.0, 0.4), 0.2, WitnessKind::Exterior),
            Err(GeometryError::NotSatisfied)
        );
        assert!(DomainSpec::<f64>::FlatComplement { n: 5, m: 1 }.validate().is_err());
    }

    #[test]
    fn box_corner_exterior_only() {
        let d = DomainSpec::Rectangle { corner: P::zero(), width: 1.0, height: 2.0 };
        assert_eq!(
            d.sphere_witness(P::zero(), 0.1, WitnessKind::Interior),
            Err(GeometryError::NotSatisfied)
        );
        let e = d.sphere_witness(P::zero(), 0.1, WitnessKind::Exterior).unwrap();
        assert_abs_diff_eq!(d.signed_distance(e.center), -0.1, epsilon = 1e-15);
        let i = d.sphere_witness(P::new(0.5, 0.0), 0.4, WitnessKind::Interior).unwrap();
        assert_eq!(i.center, P::new(0.5, 0.4));
        assert!(d.sphere_witness(P::new(0.5, 0.0), 0.6, WitnessKind::Interior).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let d = DomainSpec::Disk { center: Point::<f32>::zero(), radius: 2.0 };
        assert!((d.signed_distance(Point::new(0.5f32, 0.0)) - 1.5).abs() < 1e-6);
    }
}
