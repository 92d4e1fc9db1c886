//! Pucci extremal operators, ellipticity families, lower-order terms and the
//! model operators with their structural envelopes.

use serde::{Deserialize, Serialize};

use crate::error::OperatorError;
use crate::geometry::{DomainSpec, Point};
use crate::report::VerificationReport;
use crate::sampling::Halton;
use crate::scalar::Scalar;

/// Symmetric 2x2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SymMatrix<T> {
    pub a11: T,
    pub a12: T,
    pub a22: T,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn new(a11: T, a12: T, a22: T) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn diag(a: T, b: T) -> Self {
        Self::new(a, T::zero(), b)
    }

    /// One-dimensional matrix embedded as `diag(a, 0)`; Pucci values agree.
    pub fn scalar(a: T) -> Self {
        Self::diag(a, T::zero())
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one())
    }

    /// `v v^T`.
    pub fn outer(v: Point<T>) -> Self {
        Self::new(v.x * v.x, v.x * v.y, v.y * v.y)
    }

    pub fn trace(&self) -> T {
        self.a11 + self.a22
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.a11 + o.a11, self.a12 + o.a12, self.a22 + o.a22)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a22 * s)
    }

    /// `v^T X v`.
    pub fn quad(&self, v: Point<T>) -> T {
        self.a11 * v.x * v.x + T::c(2.0) * self.a12 * v.x * v.y + self.a22 * v.y * v.y
    }

    /// `X v`.
    pub fn apply(&self, v: Point<T>) -> Point<T> {
        Point::new(self.a11 * v.x + self.a12 * v.y, self.a12 * v.x + self.a22 * v.y)
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> (T, T) {
        let half = T::c(0.5);
        let mean = half * (self.a11 + self.a22);
        let rad = (half * (self.a11 - self.a22)).hypot(self.a12);
        (mean + rad, mean - rad)
    }

    /// `(Tr X^+, Tr X^-)`, both nonnegative.
    pub fn trace_parts(&self) -> (T, T) {
        let (l1, l2) = self.eigenvalues();
        let z = T::zero();
        (l1.max(z) + l2.max(z), (-l1).max(z) + (-l2).max(z))
    }

    /// Spectral norm.
    pub fn norm(&self) -> T {
        let (l1, l2) = self.eigenvalues();
        l1.abs().max(l2.abs())
    }
}

/// `P^+(X) = -lambda Tr X^+ + Lambda Tr X^-`.
pub fn pucci_plus<T: Scalar>(x: &SymMatrix<T>, lambda: T, cap_lambda: T) -> T {
    let (p, n) = x.trace_parts();
    -lambda * p + cap_lambda * n
}

/// `P^-(X) = -Lambda Tr X^+ + lambda Tr X^-`.
pub fn pucci_minus<T: Scalar>(x: &SymMatrix<T>, lambda: T, cap_lambda: T) -> T {
    let (p, n) = x.trace_parts();
    -cap_lambda * p + lambda * n
}

/// `coef * t^exponent`; a zero exponent is a constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub coef: f64,
    #[serde(default)]
    pub exponent: f64,
}

impl PowerLaw {
    pub fn constant(v: f64) -> Self {
        Self { coef: v, exponent: 0.0 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.exponent == 0.0 {
            self.coef
        } else {
            self.coef * t.powf(self.exponent)
        }
    }
}

/// Which distance feeds the ellipticity argument of the lower envelope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DistanceArgument {
    #[default]
    ToBoundary,
    ToAnchor,
}

/// Ellipticity pair `lambda(t) = c t^a`, `Lambda(t) = C t^(-b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticityPair {
    pub lower: PowerLaw,
    pub upper: PowerLaw,
    #[serde(default)]
    pub argument: DistanceArgument,
}

impl EllipticityPair {
    pub fn constant(lambda: f64, cap_lambda: f64) -> Self {
        Self {
            lower: PowerLaw::constant(lambda),
            upper: PowerLaw::constant(cap_lambda),
            argument: DistanceArgument::ToBoundary,
        }
    }

    /// `lambda(t) = t^a`, `Lambda = cap_lambda`.
    pub fn vanishing(a: f64, cap_lambda: f64) -> Self {
        Self {
            lower: PowerLaw { coef: 1.0, exponent: a },
            upper: PowerLaw::constant(cap_lambda),
            argument: DistanceArgument::ToBoundary,
        }
    }

    pub fn lambda(&self, t: f64) -> f64 {
        self.lower.eval(t)
    }

    pub fn cap_lambda(&self, t: f64) -> f64 {
        self.upper.eval(t)
    }

    pub fn is_constant(&self) -> bool {
        self.lower.exponent == 0.0 && self.upper.exponent == 0.0
    }

    /// Blow-up exponent `e` of `Lambda / lambda ~ t^(-e)`.
    pub fn ratio_exponent(&self) -> f64 {
        self.lower.exponent - self.upper.exponent
    }

    /// Checks positivity, monotonicity directions, `e < 1` and `lambda <= Lambda` on `(0, r]`.
    pub fn validate(&self, r: f64) -> Result<(), OperatorError> {
        let bad = |m: &str| Err(OperatorError::InvalidParameter(m.to_string()));
        if !(self.lower.coef > 0.0 && self.upper.coef > 0.0) {
            return bad("ellipticity coefficients must be positive");
        }
        if self.lower.exponent < 0.0 || self.upper.exponent > 0.0 {
            return bad("lambda must be nondecreasing and Lambda nonincreasing");
        }
        if self.ratio_exponent() >= 1.0 {
            return bad("Lambda/lambda must blow up slower than 1/t");
        }
        // lambda/Lambda = (c/C) t^e is increasing, so checking t = r suffices.
        if self.lambda(r) > self.cap_lambda(r) * (1.0 + 1e-15) {
            return bad("lambda must not exceed Lambda on (0, r]");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Sign class of a lower-order term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignClass {
    Zero,
    NonNegative,
    NonPositive,
}

/// Lower-order term `Phi(t, s, q)` with `q = |p|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowerOrderTerm {
    Zero,
    Constant { value: f64 },
    /// `sign * q^exponent`.
    GradientPower { sign: Sign, exponent: f64 },
    /// `sign * (mu (q + q^2) + modulus * s)`.
    QuadraticDrift { sign: Sign, mu: f64, modulus: f64 },
}

impl LowerOrderTerm {
    pub fn eval(&self, _t: f64, s: f64, q: f64) -> f64 {
        match *self {
            LowerOrderTerm::Zero => 0.0,
            LowerOrderTerm::Constant { value } => value,
            LowerOrderTerm::GradientPower { sign, exponent } => sign.value() * q.powf(exponent),
            LowerOrderTerm::QuadraticDrift { sign, mu, modulus } => {
                sign.value() * (mu * (q + q * q) + modulus * s)
            }
        }
    }

    /// Declared sign for nonnegative `s`.
    pub fn sign_class(&self) -> SignClass {
        match *self {
            LowerOrderTerm::Zero => SignClass::Zero,
            LowerOrderTerm::Constant { value } if value == 0.0 => SignClass::Zero,
            LowerOrderTerm::Constant { value } if value > 0.0 => SignClass::NonNegative,
            LowerOrderTerm::Constant { .. } => SignClass::NonPositive,
            LowerOrderTerm::GradientPower { sign: Sign::Plus, .. }
            | LowerOrderTerm::QuadraticDrift { sign: Sign::Plus, .. } => SignClass::NonNegative,
            LowerOrderTerm::GradientPower { sign: Sign::Minus, .. }
            | LowerOrderTerm::QuadraticDrift { sign: Sign::Minus, .. } => SignClass::NonPositive,
        }
    }

    /// All families here are independent of `t`, hence monotone in both directions.
    pub fn is_t_independent(&self) -> bool {
        true
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        let bad = |m: &str| Err(OperatorError::InvalidParameter(m.to_string()));
        match *self {
            LowerOrderTerm::Constant { value } if !value.is_finite() => bad("constant must be finite"),
            LowerOrderTerm::GradientPower { exponent, .. } if !(exponent >= 1.0) => {
                bad("gradient power must be >= 1")
            }
            LowerOrderTerm::QuadraticDrift { mu, modulus, .. } if !(mu >= 0.0 && modulus >= 0.0) => {
                bad("drift coefficients must be nonnegative")
            }
            _ => Ok(()),
        }
    }
}

/// Variable exponent `p(x) = base + l.x + x^T Q x`, optionally even in `y - y0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentField {
    pub base: f64,
    #[serde(default)]
    pub linear: [f64; 2],
    /// Coefficients of `x^2`, `x y`, `y^2`.
    #[serde(default)]
    pub quadratic: [f64; 3],
    /// Reflection line `y = y0` about which the field is made even.
    #[serde(default)]
    pub even_about: Option<f64>,
    /// Bounds and Lipschitz constant over the declared box, filled by [`ExponentField::certify`].
    #[serde(default)]
    pub p_min: f64,
    #[serde(default)]
    pub p_max: f64,
    #[serde(default)]
    pub lipschitz: f64,
}

impl ExponentField {
    pub fn constant(p: f64) -> Self {
        Self {
            base: p,
            linear: [0.0; 2],
            quadratic: [0.0; 3],
            even_about: None,
            p_min: p,
            p_max: p,
            lipschitz: 0.0,
        }
    }

    fn fold(&self, x: Point<f64>) -> (Point<f64>, f64) {
        match self.even_about {
            Some(y0) if x.y < y0 => (Point::new(x.x, 2.0 * y0 - x.y), -1.0),
            _ => (x, 1.0),
        }
    }

    pub fn eval(&self, x: Point<f64>) -> f64 {
        let (z, _) = self.fold(x);
        let [qa, qb, qc] = self.quadratic;
        self.base + self.linear[0] * z.x + self.linear[1] * z.y + qa * z.x * z.x + qb * z.x * z.y + qc * z.y * z.y
    }

    pub fn gradient(&self, x: Point<f64>) -> Point<f64> {
        let (z, s) = self.fold(x);
        let [qa, qb, qc] = self.quadratic;
        let gx = self.linear[0] + 2.0 * qa * z.x + qb * z.y;
        let gy = self.linear[1] + qb * z.x + 2.0 * qc * z.y;
        Point::new(gx, s * gy)
    }

    /// Computes `p_min`, `p_max` (dense sampling) and the Lipschitz constant
    /// (exact: `|grad p|` is convex so the corners bound it) over the box.
    pub fn certify(mut self, lo: Point<f64>, hi: Point<f64>) -> Result<Self, OperatorError> {
        let n = 256;
        let (mut pmin, mut pmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=n {
            for j in 0..=n {
                let x = Point::new(
                    lo.x + (hi.x - lo.x) * i as f64 / n as f64,
                    lo.y + (hi.y - lo.y) * j as f64 / n as f64,
                );
                let p = self.eval(x);
                pmin = pmin.min(p);
                pmax = pmax.max(p);
            }
        }
        let mut lip: f64 = 0.0;
        for x in [lo, hi, Point::new(lo.x, hi.y), Point::new(hi.x, lo.y)] {
            lip = lip.max(self.gradient(x).norm());
            if let Some(y0) = self.even_about {
                lip = lip.max(self.gradient(Point::new(x.x, y0)).norm());
            }
        }
        if !(pmin > 1.0) {
            return Err(OperatorError::InvalidParameter("p(x) must exceed 1".into()));
        }
        self.p_min = pmin;
        self.p_max = pmax;
        self.lipschitz = lip;
        Ok(self)
    }
}

/// Model operator `F(x, s, p, X)`, sign convention: subsolutions have `F <= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelOperator {
    /// `Phi(t, s, |p|) + P^+_{lambda(t), Lambda(t)}(X)`.
    PucciPlus { ellipticity: EllipticityPair, lower_order: LowerOrderTerm },
    /// `Phi(t, s, |p|) + P^-_{lambda(t), Lambda(t)}(X)`.
    PucciMinus { ellipticity: EllipticityPair, lower_order: LowerOrderTerm },
    /// `-tr X`.
    Laplace,
    /// Normalized `-(tr X + (p - 2) <X p_hat, p_hat>)`.
    PLaplace { p: f64 },
    /// Normalized variable exponent with the `log|p|` drift.
    PxLaplace { exponent: ExponentField },
    /// `-<X p, p>`.
    InfinityLaplace,
    /// `c + P^+_{lambda, Lambda}(X)` with `c = +-1`.
    PucciConstRhs { lambda: f64, cap_lambda: f64, constant: f64 },
}

impl ModelOperator {
    pub fn validate(&self) -> Result<(), OperatorError> {
        let bad = |m: &str| Err(OperatorError::InvalidParameter(m.to_string()));
        match self {
            ModelOperator::PucciPlus { ellipticity, lower_order }
            | ModelOperator::PucciMinus { ellipticity, lower_order } => {
                ellipticity.validate(1.0)?;
                lower_order.validate()
            }
            ModelOperator::PLaplace { p } if !(*p > 1.0) => bad("p must exceed 1"),
            ModelOperator::PxLaplace { exponent } if !(exponent.p_min > 1.0) => {
                bad("p(x) must exceed 1 (certify the exponent field)")
            }
            ModelOperator::PucciConstRhs { lambda, cap_lambda, constant } => {
                if !(*lambda > 0.0 && lambda <= cap_lambda) {
                    bad("need 0 < lambda <= Lambda")
                } else if constant.abs() != 1.0 {
                    bad("constant right-hand side must be +1 or -1")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Whether the grid solver needs the distance to the boundary at each node.
    pub fn needs_boundary_distance(&self) -> bool {
        matches!(self,
            ModelOperator::PucciPlus { ellipticity, .. } | ModelOperator::PucciMinus { ellipticity, .. }
                if !ellipticity.is_constant())
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelOperator::PucciPlus { .. } => "pucci_plus",
            ModelOperator::PucciMinus { .. } => "pucci_minus",
            ModelOperator::Laplace => "laplace",
            ModelOperator::PLaplace { .. } => "p_laplace",
            ModelOperator::PxLaplace { .. } => "px_laplace",
            ModelOperator::InfinityLaplace => "infinity_laplace",
            ModelOperator::PucciConstRhs { .. } => "pucci_const_rhs",
        }
    }
}

/// Evaluation point with the distances an operator may depend on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Site<T> {
    pub x: Point<T>,
    pub boundary_distance: Option<T>,
    pub anchor_distance: Option<T>,
}

impl<T: Scalar> Site<T> {
    pub fn at(x: Point<T>) -> Self {
        Self { x, boundary_distance: None, anchor_distance: None }
    }

    pub fn with_distances(x: Point<T>, boundary: T, anchor: T) -> Self {
        Self { x, boundary_distance: Some(boundary), anchor_distance: Some(anchor) }
    }

    fn t_for(&self, pair: &EllipticityPair, arg: DistanceArgument) -> Result<f64, OperatorError> {
        if pair.is_constant() {
            return Ok(1.0);
        }
        let d = match arg {
            DistanceArgument::ToBoundary => self.boundary_distance,
            DistanceArgument::ToAnchor => self.anchor_distance,
        };
        d.map(|v| v.to_f64().unwrap_or(f64::NAN)).ok_or(OperatorError::MissingDistance)
    }
}

fn ellipticity_at<T: Scalar>(pair: &EllipticityPair, t: f64) -> (T, T) {
    (T::c(pair.lambda(t)), T::c(pair.cap_lambda(t)))
}

/// Evaluates `F(x, s, p, X)`.
pub fn eval_operator<T: Scalar>(
    op: &ModelOperator,
    site: &Site<T>,
    s: T,
    p: Point<T>,
    x: &SymMatrix<T>,
) -> Result<T, OperatorError> {
    let q = p.norm();
    let phi = |term: &LowerOrderTerm, t: f64| {
        T::c(term.eval(t, s.to_f64().unwrap_or(f64::NAN), q.to_f64().unwrap_or(f64::NAN)))
    };
    match op {
        ModelOperator::PucciPlus { ellipticity, lower_order } => {
            let t = site.t_for(ellipticity, ellipticity.argument)?;
            let (l, cl) = ellipticity_at::<T>(ellipticity, t);
            Ok(phi(lower_order, t) + pucci_plus(x, l, cl))
        }
        ModelOperator::PucciMinus { ellipticity, lower_order } => {
            let t = site.t_for(ellipticity, ellipticity.argument)?;
            let (l, cl) = ellipticity_at::<T>(ellipticity, t);
            Ok(phi(lower_order, t) + pucci_minus(x, l, cl))
        }
        ModelOperator::Laplace => Ok(-x.trace()),
        ModelOperator::PLaplace { p: pe } => {
            let e = p.unit().ok_or(OperatorError::DegenerateGradient)?;
            Ok(-(x.trace() + (T::c(*pe) - T::c(2.0)) * x.quad(e)))
        }
        ModelOperator::PxLaplace { exponent } => {
            let e = p.unit().ok_or(OperatorError::DegenerateGradient)?;
            let xf = Point::new(site.x.x.to_f64().unwrap_or(f64::NAN), site.x.y.to_f64().unwrap_or(f64::NAN));
            let pv = T::c(exponent.eval(xf));
            let g = exponent.gradient(xf);
            let drift = (p.x * T::c(g.x) + p.y * T::c(g.y)) * q.ln();
            Ok(-(x.trace() + (pv - T::c(2.0)) * x.quad(e) + drift))
        }
        ModelOperator::InfinityLaplace => {
            if q == T::zero() {
                return Err(OperatorError::DegenerateGradient);
            }
            Ok(-x.quad(p))
        }
        ModelOperator::PucciConstRhs { lambda, cap_lambda, constant } => {
            Ok(T::c(*constant) + pucci_plus(x, T::c(*lambda), T::c(*cap_lambda)))
        }
    }
}

/// Structural envelope: lower bound `Phi^+ + P^+` and upper bound `Phi^- + P^-`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuralEnvelope {
    pub ellipticity: EllipticityPair,
    pub phi_plus: LowerOrderTerm,
    pub phi_minus: LowerOrderTerm,
    pub n: u32,
    pub r: f64,
    pub anchor: Point<f64>,
}

impl StructuralEnvelope {
    pub fn uniform(lambda: f64, cap_lambda: f64, n: u32, r: f64) -> Self {
        Self {
            ellipticity: EllipticityPair::constant(lambda, cap_lambda),
            phi_plus: LowerOrderTerm::Zero,
            phi_minus: LowerOrderTerm::Zero,
            n,
            r,
            anchor: Point::zero(),
        }
    }

    /// `Phi^+(t, s, |p|) + P^+_{lambda(t), Lambda(t)}(X)`; `F` must not exceed it.
    pub fn upper_envelope_value(&self, t: f64, s: f64, p: Point<f64>, x: &SymMatrix<f64>) -> f64 {
        let e = &self.ellipticity;
        self.phi_plus.eval(t, s, p.norm()) + pucci_plus(x, e.lambda(t), e.cap_lambda(t))
    }

    /// `Phi^-(t, s, |p|) + P^-_{lambda(t), Lambda(t)}(X)`; `F` must not fall below it.
    pub fn lower_envelope_value(&self, t: f64, s: f64, p: Point<f64>, x: &SymMatrix<f64>) -> f64 {
        let e = &self.ellipticity;
        self.phi_minus.eval(t, s, p.norm()) + pucci_minus(x, e.lambda(t), e.cap_lambda(t))
    }
}

/// Sample `(x, s, p, X)` for envelope checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeSample {
    pub x: Point<f64>,
    pub s: f64,
    pub p: Point<f64>,
    pub hessian: SymMatrix<f64>,
}

/// Quasi-random samples with `x` in `domain` intersected with the box, `s in [0, 2]`,
/// `p in [-2, 2]^2`, entries of `X` in `[-3, 3]`.
pub fn envelope_samples(
    domain: &DomainSpec<f64>,
    lo: Point<f64>,
    hi: Point<f64>,
    count: usize,
    seed: u64,
) -> Vec<EnvelopeSample> {
    let mut h = Halton::new(8, seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count && tries < 100 * count {
        tries += 1;
        let v = h.next_point();
        let x = Point::new(lo.x + (hi.x - lo.x) * v[0], lo.y + (hi.y - lo.y) * v[1]);
        if !domain.contains(x) {
            continue;
        }
        out.push(EnvelopeSample {
            x,
            s: 2.0 * v[2],
            p: Point::new(4.0 * v[3] - 2.0, 4.0 * v[4] - 2.0),
            hessian: SymMatrix::new(6.0 * v[5] - 3.0, 6.0 * v[6] - 3.0, 6.0 * v[7] - 3.0),
        });
    }
    out
}

/// Checks `Phi^- + P^- <= F <= Phi^+ + P^+` on the samples.
///
/// Samples where the operator is undefined (zero gradient) are skipped and counted.
pub fn envelope_check(
    env: &StructuralEnvelope,
    op: &ModelOperator,
    domain: &DomainSpec<f64>,
    samples: &[EnvelopeSample],
) -> VerificationReport {
    const TOL: f64 = 1e-12;
    let mut worst_upper = f64::NEG_INFINITY;
    let mut worst_lower = f64::NEG_INFINITY;
    let mut checked = 0usize;
    let mut skipped = 0usize;
    for smp in samples {
        let d = domain.boundary_distance(smp.x);
        let dw = smp.x.dist(env.anchor);
        let site = Site::with_distances(smp.x, d, dw);
        let f = match eval_operator(op, &site, smp.s, smp.p, &smp.hessian) {
            Ok(v) => v,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        checked += 1;
        let t_low = match env.ellipticity.argument {
            DistanceArgument::ToBoundary => d,
            DistanceArgument::ToAnchor => dw,
        };
        let up = env.upper_envelope_value(t_low, smp.s, smp.p, &smp.hessian);
        let lo = env.lower_envelope_value(dw, smp.s, smp.p, &smp.hessian);
        let scale = 1.0 + f.abs() + up.abs() + lo.abs();
        worst_upper = worst_upper.max((f - up) / scale);
        worst_lower = worst_lower.max((lo - f) / scale);
    }
    let pass = checked > 0 && worst_upper <= TOL && worst_lower <= TOL;
    VerificationReport::new("envelope", pass)
        .measure("max_upper_violation", worst_upper)
        .measure("max_lower_violation", worst_lower)
        .measure("checked", checked as f64)
        .measure("skipped_degenerate", skipped as f64)
        .tolerance("relative_violation", TOL)
        .fingerprint_of(&(env, op, domain, samples.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pucci_examples() {
        let x = SymMatrix::diag(2.0, -1.0);
        assert_abs_diff_eq!(pucci_plus(&x, 1.0, 3.0), -2.0 + 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pucci_minus(&x, 1.0, 3.0), -6.0 + 1.0, epsilon = 1e-15);
        let z = SymMatrix::<f64>::default();
        assert_eq!(pucci_plus(&z, 1.0, 2.0), 0.0);
        assert_eq!(pucci_minus(&z, 1.0, 2.0), 0.0);
    }

    #[test]
    fn eigenvalues_of_off_diagonal() {
        let (a, b) = SymMatrix::new(0.0, 1.0, 0.0).eigenvalues();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn infinity_laplace_is_outside_uniform_envelope() {
        let env = StructuralEnvelope::uniform(1.0, 1.0, 2, 1.0);
        let dom = DomainSpec::Disk { center: Point::zero(), radius: 1.0 };
        let s = vec![EnvelopeSample {
            x: Point::new(0.1, 0.1),
            s: 0.0,
            p: Point::new(1.0, 0.0),
            hessian: SymMatrix::diag(0.0, -1.0),
        }];
        let rep = envelope_check(&env, &ModelOperator::InfinityLaplace, &dom, &s);
        assert!(!rep.pass);
    }

    #[test]
    fn const_rhs_operator_inside_its_envelope() {
        let mut env = StructuralEnvelope::uniform(1.0, 2.0, 2, 1.0);
        env.phi_plus = LowerOrderTerm::Constant { value: 1.0 };
        env.phi_minus = LowerOrderTerm::Constant { value: -1.0 };
        let dom = DomainSpec::Disk { center: Point::zero(), radius: 1.0 };
        let samples = envelope_samples(&dom, Point::new(-1.0, -1.0), Point::new(1.0, 1.0), 500, 3);
        let op = ModelOperator::PucciConstRhs { lambda: 1.0, cap_lambda: 2.0, constant: 1.0 };
        assert!(envelope_check(&env, &op, &dom, &samples).pass);
    }

    #[test]
    fn p_laplace_degenerate_gradient() {
        let r = eval_operator(
            &ModelOperator::PLaplace { p: 3.0 },
            &Site::at(Point::new(0.0, 0.0)),
            0.0,
            Point::zero(),
            &SymMatrix::identity(),
        );
        assert_eq!(r, Err(OperatorError::DegenerateGradient));
    }

    #[test]
    fn exponent_field_even_reflection() {
        let f = ExponentField {
            base: 2.0,
            linear: [0.0, 0.5],
            quadratic: [0.25, 0.0, 0.0],
            even_about: Some(0.0),
            ..ExponentField::constant(2.0)
        }
        .certify(Point::new(-1.0, -1.0), Point::new(1.0, 1.0))
        .unwrap();
        let a = Point::new(0.3, 0.4);
        let b = Point::new(0.3, -0.4);
        assert_eq!(f.eval(a), f.eval(b));
        assert_eq!(f.gradient(a).y, -f.gradient(b).y);
        assert!(f.lipschitz > 0.0 && f.p_min >= 2.0);
    }
}
