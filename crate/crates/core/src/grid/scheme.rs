//! Node-local monotone discretizations and their exact local solves.

use serde::{Deserialize, Serialize};

use crate::error::GridError;
use crate::geometry::Point;
use crate::pucci::{EllipticityPair, ExponentField, LowerOrderTerm, ModelOperator, Sign};

type P = Point<f64>;

/// Neighbour offsets: E, N, W, S, NE, NW, SW, SE.
pub const NEIGHBORS: [(i64, i64); 8] = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)];

const E: usize = 0;
const N: usize = 1;
const W: usize = 2;
const S: usize = 3;
const NE: usize = 4;
const NW: usize = 5;
const SW: usize = 6;
const SE: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeId {
    /// 5-point Laplacian.
    FivePoint,
    /// Extremal combination of directional differences over the axis and diagonal frames.
    FrameExtremal,
    /// Best-pair slope balance over the 8 neighbours.
    MinMaxPair,
    /// Frozen-coefficient 9-point nondivergence form with upwinded drift.
    NinePointNondivergence,
}

impl SchemeId {
    pub fn default_for(op: &ModelOperator) -> Self {
        match op {
            ModelOperator::Laplace => SchemeId::FivePoint,
            ModelOperator::PucciPlus { .. } | ModelOperator::PucciMinus { .. } | ModelOperator::PucciConstRhs { .. } => {
                SchemeId::FrameExtremal
            }
            ModelOperator::InfinityLaplace => SchemeId::MinMaxPair,
            ModelOperator::PLaplace { .. } | ModelOperator::PxLaplace { .. } => SchemeId::NinePointNondivergence,
        }
    }
}

/// What a node-local evaluation needs besides the values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeCtx {
    pub x: P,
    pub h: f64,
    /// Argument of the ellipticity functions (distance to the boundary or the anchor).
    pub t: f64,
}

/// A model operator bound to a scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteOperator {
    pub op: ModelOperator,
    pub scheme: SchemeId,
    /// Gradient regularization `eps_g = eps_factor * h^2`.
    pub eps_factor: f64,
}

pub fn discretize(op: &ModelOperator, scheme: Option<SchemeId>) -> Result<DiscreteOperator, GridError> {
    op.validate()?;
    let scheme = scheme.unwrap_or_else(|| SchemeId::default_for(op));
    let ok = match (op, scheme) {
        (ModelOperator::Laplace, SchemeId::FivePoint | SchemeId::NinePointNondivergence | SchemeId::FrameExtremal) => true,
        (ModelOperator::PucciPlus { .. } | ModelOperator::PucciMinus { .. } | ModelOperator::PucciConstRhs { .. }, s) => {
            s == SchemeId::FrameExtremal
        }
        (ModelOperator::InfinityLaplace, s) => s == SchemeId::MinMaxPair,
        (ModelOperator::PLaplace { .. } | ModelOperator::PxLaplace { .. }, s) => s == SchemeId::NinePointNondivergence,
        _ => false,
    };
    if !ok {
        return Err(GridError::UnsupportedScheme(format!("{} with {scheme:?}", op.name())));
    }
    Ok(DiscreteOperator { op: op.clone(), scheme, eps_factor: 1.0 })
}

/// Frozen row `F(v) = diag v_0 - sum_j a_j v_j + c0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearRow {
    pub a: [f64; 8],
    pub diag: f64,
    pub c0: f64,
}

enum Extremal {
    Max,
    Min,
}

/// Pucci-type operator in normalized form: `c0 + Phi + ext over frames`.
struct PucciParts<'a> {
    lambda: f64,
    cap_lambda: f64,
    plus: bool,
    phi: &'a LowerOrderTerm,
    c0: f64,
}

fn pucci_parts<'a>(op: &'a ModelOperator, t: f64) -> Option<PucciParts<'a>> {
    const ZERO: LowerOrderTerm = LowerOrderTerm::Zero;
    let from_pair = |e: &EllipticityPair| (e.lambda(t), e.cap_lambda(t));
    match op {
        ModelOperator::PucciPlus { ellipticity, lower_order } => {
            let (lambda, cap_lambda) = from_pair(ellipticity);
            Some(PucciParts { lambda, cap_lambda, plus: true, phi: lower_order, c0: 0.0 })
        }
        ModelOperator::PucciMinus { ellipticity, lower_order } => {
            let (lambda, cap_lambda) = from_pair(ellipticity);
            Some(PucciParts { lambda, cap_lambda, plus: false, phi: lower_order, c0: 0.0 })
        }
        ModelOperator::PucciConstRhs { lambda, cap_lambda, constant } => Some(PucciParts {
            lambda: *lambda,
            cap_lambda: *cap_lambda,
            plus: true,
            phi: &ZERO,
            c0: *constant,
        }),
        ModelOperator::Laplace => Some(PucciParts { lambda: 1.0, cap_lambda: 1.0, plus: true, phi: &ZERO, c0: 0.0 }),
        _ => None,
    }
}

impl PucciParts<'_> {
    fn extremal(&self) -> Extremal {
        if self.plus {
            Extremal::Max
        } else {
            Extremal::Min
        }
    }

    /// Coefficient of a pair; `below` means the value sits under the pair midpoint.
    #[inline]
    fn weight(&self, below: bool) -> f64 {
        if self.plus == below {
            self.lambda
        } else {
            self.cap_lambda
        }
    }

    /// `sum_k w_k (2u - s_k) / c` over the two pairs of a frame.
    #[inline]
    fn frame(&self, u: f64, s: [f64; 2], c: f64) -> f64 {
        s.iter().map(|&sk| self.weight(u < 0.5 * sk) * (2.0 * u - sk) / c).sum()
    }

    /// Root of `c0 + frame(u) = 0`, exact for the piecewise linear frame.
    fn frame_root(&self, s: [f64; 2], c: f64, c0: f64) -> f64 {
        let (b1, b2) = (0.5 * s[0].min(s[1]), 0.5 * s[0].max(s[1]));
        let below = |bk: f64| {
            if c0 + self.frame(b1, s, c) >= 0.0 {
                true
            } else if c0 + self.frame(b2, s, c) >= 0.0 {
                bk > b1
            } else {
                false
            }
        };
        let (mut num, mut den) = (-c0, 0.0);
        for &sk in &s {
            let w = self.weight(below(0.5 * sk));
            num += w * sk / c;
            den += 2.0 * w / c;
        }
        num / den
    }
}

/// Godunov gradient magnitude, increasing (`up`) or decreasing in the centre value.
#[inline]
fn godunov(u: f64, nb: &[f64; 8], h: f64, up: bool) -> f64 {
    let axis = |a: f64, b: f64| {
        if up {
            (u - a.min(b)).max(0.0)
        } else {
            (a.max(b) - u).max(0.0)
        }
    };
    (axis(nb[E], nb[W]).powi(2) + axis(nb[N], nb[S]).powi(2)).sqrt() / h
}

fn phi_value(phi: &LowerOrderTerm, t: f64, u: f64, nb: &[f64; 8], h: f64) -> f64 {
    match *phi {
        LowerOrderTerm::Zero => 0.0,
        LowerOrderTerm::Constant { value } => value,
        LowerOrderTerm::GradientPower { sign, .. } | LowerOrderTerm::QuadraticDrift { sign, .. } => {
            let q = godunov(u, nb, h, sign == Sign::Plus);
            phi.eval(t, u, q)
        }
    }
}

/// Frozen coefficients of the 9-point nondivergence scheme.
struct NineCoef {
    /// Weights of (E, W), (N, S), diagonal pair, and the upwind neighbours.
    alpha: f64,
    beta: f64,
    gamma: f64,
    diag: (usize, usize),
    bx: f64,
    by: f64,
    ux: usize,
    uy: usize,
}

fn nine_coef(p: f64, grad_p: Option<P>, nb: &[f64; 8], h: f64, eps: f64) -> NineCoef {
    let g = P::new((nb[E] - nb[W]) / (2.0 * h), (nb[N] - nb[S]) / (2.0 * h));
    let den = g.dot(g) + eps;
    let k = (p - 2.0) / den;
    let (a11, a12, a22) = (1.0 + k * g.x * g.x, k * g.x * g.y, 1.0 + k * g.y * g.y);
    let gamma = a12.abs();
    let diag = if a12 >= 0.0 { (NE, SW) } else { (NW, SE) };
    let (bx, by) = match grad_p {
        Some(gp) => {
            let l = 0.5 * den.ln();
            (gp.x * l, gp.y * l)
        }
        None => (0.0, 0.0),
    };
    NineCoef {
        alpha: (a11 - gamma).max(0.0),
        beta: (a22 - gamma).max(0.0),
        gamma,
        diag,
        bx: bx.abs(),
        by: by.abs(),
        ux: if bx > 0.0 { E } else { W },
        uy: if by > 0.0 { N } else { S },
    }
}

fn exponent_at(e: &ExponentField, x: P) -> (f64, P) {
    (e.eval(x), e.gradient(x))
}

impl DiscreteOperator {
    pub fn with_eps_factor(mut self, eps_factor: f64) -> Self {
        self.eps_factor = eps_factor;
        self
    }

    fn nine(&self, ctx: &NodeCtx, nb: &[f64; 8]) -> NineCoef {
        let eps = self.eps_factor * ctx.h * ctx.h;
        match &self.op {
            ModelOperator::PLaplace { p } => nine_coef(*p, None, nb, ctx.h, eps),
            ModelOperator::PxLaplace { exponent } => {
                let (p, gp) = exponent_at(exponent, ctx.x);
                nine_coef(p, Some(gp), nb, ctx.h, eps)
            }
            _ => nine_coef(2.0, None, nb, ctx.h, eps),
        }
    }

    /// Discrete operator value `F_h(u; neighbours)`; nondecreasing in `u`,
    /// nonincreasing in every neighbour.
    pub fn residual(&self, ctx: &NodeCtx, u: f64, nb: &[f64; 8]) -> f64 {
        let h = ctx.h;
        let h2 = h * h;
        match self.scheme {
            SchemeId::FivePoint => -(nb[E] + nb[W] + nb[N] + nb[S] - 4.0 * u) / h2,
            SchemeId::FrameExtremal => {
                let parts = pucci_parts(&self.op, ctx.t).expect("scheme checked at discretize");
                let axis = parts.frame(u, [nb[E] + nb[W], nb[N] + nb[S]], h2);
                let diag = parts.frame(u, [nb[NE] + nb[SW], nb[NW] + nb[SE]], 2.0 * h2);
                let ext = match parts.extremal() {
                    Extremal::Max => axis.max(diag),
                    Extremal::Min => axis.min(diag),
                };
                parts.c0 + phi_value(parts.phi, ctx.t, u, nb, h) + ext
            }
            SchemeId::MinMaxPair => {
                let (mut sp, mut sm) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for (j, &v) in nb.iter().enumerate() {
                    let d = if j < 4 { h } else { std::f64::consts::SQRT_2 * h };
                    sp = sp.max((v - u) / d);
                    sm = sm.max((u - v) / d);
                }
                -(sp - sm) / h
            }
            SchemeId::NinePointNondivergence => {
                let c = self.nine(ctx, nb);
                let (d1, d2) = c.diag;
                let second = c.alpha * (nb[E] + nb[W] - 2.0 * u)
                    + c.beta * (nb[N] + nb[S] - 2.0 * u)
                    + c.gamma * (nb[d1] + nb[d2] - 2.0 * u);
                let drift = c.bx * (nb[c.ux] - u) + c.by * (nb[c.uy] - u);
                -(second / h2 + drift / h)
            }
        }
    }

    /// The value `u` at which `F_h(u; neighbours) = 0`.
    pub fn local_solve(&self, ctx: &NodeCtx, nb: &[f64; 8]) -> f64 {
        let h = ctx.h;
        let h2 = h * h;
        match self.scheme {
            SchemeId::FivePoint => 0.25 * (nb[E] + nb[W] + nb[N] + nb[S]),
            SchemeId::FrameExtremal => {
                let parts = pucci_parts(&self.op, ctx.t).expect("scheme checked at discretize");
                match parts.phi {
                    LowerOrderTerm::Zero | LowerOrderTerm::Constant { .. } => {
                        let c0 = parts.c0 + phi_value(parts.phi, ctx.t, 0.0, nb, h);
                        let ra = parts.frame_root([nb[E] + nb[W], nb[N] + nb[S]], h2, c0);
                        let rd = parts.frame_root([nb[NE] + nb[SW], nb[NW] + nb[SE]], 2.0 * h2, c0);
                        match parts.extremal() {
                            Extremal::Max => ra.min(rd),
                            Extremal::Min => ra.max(rd),
                        }
                    }
                    _ => self.bracketed_root(ctx, nb),
                }
            }
            SchemeId::MinMaxPair => {
                let mut best = (f64::NEG_INFINITY, nb[0]);
                for j in 0..8 {
                    let dj = if j < 4 { h } else { std::f64::consts::SQRT_2 * h };
                    for k in 0..8 {
                        if k == j {
                            continue;
                        }
                        let dk = if k < 4 { h } else { std::f64::consts::SQRT_2 * h };
                        let slope = (nb[j] - nb[k]) / (dj + dk);
                        if slope > best.0 {
                            best = (slope, (dk * nb[j] + dj * nb[k]) / (dj + dk));
                        }
                    }
                }
                best.1
            }
            SchemeId::NinePointNondivergence => {
                let c = self.nine(ctx, nb);
                let (d1, d2) = c.diag;
                let num = (c.alpha * (nb[E] + nb[W]) + c.beta * (nb[N] + nb[S]) + c.gamma * (nb[d1] + nb[d2]))
                    + h * (c.bx * nb[c.ux] + c.by * nb[c.uy]);
                let den = 2.0 * (c.alpha + c.beta + c.gamma) + h * (c.bx + c.by);
                num / den
            }
        }
    }

    /// Linearization with the active frame, weights, pair or frozen
    /// coefficients at the current values; `None` when the scheme has no such form.
    pub fn policy_row(&self, ctx: &NodeCtx, u: f64, nb: &[f64; 8]) -> Option<LinearRow> {
        let h = ctx.h;
        let h2 = h * h;
        let mut row = LinearRow { a: [0.0; 8], diag: 0.0, c0: 0.0 };
        match self.scheme {
            SchemeId::FivePoint => {
                for j in [E, N, W, S] {
                    row.a[j] = 1.0 / h2;
                }
            }
            SchemeId::FrameExtremal => {
                let parts = pucci_parts(&self.op, ctx.t).expect("scheme checked at discretize");
                if !matches!(parts.phi, LowerOrderTerm::Zero | LowerOrderTerm::Constant { .. }) {
                    return None;
                }
                row.c0 = parts.c0 + phi_value(parts.phi, ctx.t, u, nb, h);
                let axis = parts.frame(u, [nb[E] + nb[W], nb[N] + nb[S]], h2);
                let diag = parts.frame(u, [nb[NE] + nb[SW], nb[NW] + nb[SE]], 2.0 * h2);
                let use_axis = match parts.extremal() {
                    Extremal::Max => axis >= diag,
                    Extremal::Min => axis <= diag,
                };
                let (pairs, c) = if use_axis { ([(E, W), (N, S)], h2) } else { ([(NE, SW), (NW, SE)], 2.0 * h2) };
                for (j, k) in pairs {
                    let w = parts.weight(u < 0.5 * (nb[j] + nb[k])) / c;
                    row.a[j] += w;
                    row.a[k] += w;
                }
            }
            SchemeId::MinMaxPair => {
                let dist = |j: usize| if j < 4 { h } else { std::f64::consts::SQRT_2 * h };
                let mut best = (f64::NEG_INFINITY, 0, 2);
                for j in 0..8 {
                    for k in 0..8 {
                        if k != j {
                            let slope = (nb[j] - nb[k]) / (dist(j) + dist(k));
                            if slope > best.0 {
                                best = (slope, j, k);
                            }
                        }
                    }
                }
                row.a[best.1] = 1.0 / (dist(best.1) * h);
                row.a[best.2] = 1.0 / (dist(best.2) * h);
            }
            SchemeId::NinePointNondivergence => {
                let c = self.nine(ctx, nb);
                let (d1, d2) = c.diag;
                row.a[E] += c.alpha / h2;
                row.a[W] += c.alpha / h2;
                row.a[N] += c.beta / h2;
                row.a[S] += c.beta / h2;
                row.a[d1] += c.gamma / h2;
                row.a[d2] += c.gamma / h2;
                row.a[c.ux] += c.bx / h;
                row.a[c.uy] += c.by / h;
            }
        }
        row.diag = row.a.iter().sum();
        Some(row)
    }

    /// Upper bound of `dF_h/du` at the node, for explicit pseudo-time stepping.
    pub fn diag_bound(&self, ctx: &NodeCtx, nb: &[f64; 8]) -> Result<f64, GridError> {
        let h2 = ctx.h * ctx.h;
        match self.scheme {
            SchemeId::FivePoint => Ok(4.0 / h2),
            SchemeId::FrameExtremal => {
                let parts = pucci_parts(&self.op, ctx.t).expect("scheme checked at discretize");
                match parts.phi {
                    LowerOrderTerm::Zero | LowerOrderTerm::Constant { .. } => Ok(4.0 * parts.cap_lambda / h2),
                    _ => Err(GridError::UnsupportedScheme(
                        "pseudo-time stepping with gradient-dependent lower-order terms".into(),
                    )),
                }
            }
            SchemeId::MinMaxPair => Ok(2.0 / h2),
            SchemeId::NinePointNondivergence => {
                let c = self.nine(ctx, nb);
                Ok(2.0 * (c.alpha + c.beta + c.gamma) / h2 + (c.bx + c.by) / ctx.h)
            }
        }
    }

    /// Safeguarded secant on the monotone scalar equation.
    fn bracketed_root(&self, ctx: &NodeCtx, nb: &[f64; 8]) -> f64 {
        let f = |u: f64| self.residual(ctx, u, nb);
        let lo0 = nb.iter().copied().fold(f64::INFINITY, f64::min);
        let hi0 = nb.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut width = (hi0 - lo0).max(ctx.h * ctx.h).max(1e-12);
        let (mut a, mut b) = (lo0, hi0);
        let mut fa = f(a);
        let mut grow = 0;
        while fa > 0.0 && grow < 200 {
            a -= width;
            width *= 2.0;
            fa = f(a);
            grow += 1;
        }
        let mut fb = f(b);
        while fb < 0.0 && grow < 400 {
            b += width;
            width *= 2.0;
            fb = f(b);
            grow += 1;
        }
        if fa == 0.0 {
            return a;
        }
        if fb == 0.0 {
            return b;
        }
        // Illinois variant of regula falsi.
        let mut side = 0;
        for _ in 0..200 {
            let c = (a * fb - b * fa) / (fb - fa);
            let c = if c.is_finite() && c > a && c < b { c } else { 0.5 * (a + b) };
            let fc = f(c);
            if fc == 0.0 || (b - a) <= 4.0 * f64::EPSILON * (1.0 + c.abs()) {
                return c;
            }
            if (fc > 0.0) == (fb > 0.0) {
                b = c;
                fb = fc;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            } else {
                a = c;
                fa = fc;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            }
        }
        0.5 * (a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pucci::EllipticityPair;

    fn ctx(h: f64) -> NodeCtx {
        NodeCtx { x: P::new(0.3, 0.4), h, t: 1.0 }
    }

    fn stencil(f: impl Fn(f64, f64) -> f64, c: &NodeCtx) -> (f64, [f64; 8]) {
        let mut nb = [0.0; 8];
        for (slot, (di, dj)) in nb.iter_mut().zip(NEIGHBORS) {
            *slot = f(c.x.x + di as f64 * c.h, c.x.y + dj as f64 * c.h);
        }
        (f(c.x.x, c.x.y), nb)
    }

    #[test]
    fn pucci_quadratic_saddle() {
        let op = ModelOperator::PucciPlus {
            ellipticity: EllipticityPair::constant(1.0, 2.0),
            lower_order: LowerOrderTerm::Zero,
        };
        let d = discretize(&op, None).unwrap();
        let c = ctx(0.01);
        let (u, nb) = stencil(|x, y| x * x - y * y, &c);
        assert!((d.residual(&c, u, &nb) - 2.0).abs() < 1e-9);
        let root = d.local_solve(&c, &nb);
        assert!(d.residual(&c, root, &nb).abs() < 1e-6);
    }

    #[test]
    fn local_solves_zero_the_residual() {
        let ops = [
            ModelOperator::Laplace,
            ModelOperator::PucciMinus {
                ellipticity: EllipticityPair::constant(1.0, 3.0),
                lower_order: LowerOrderTerm::Constant { value: 0.5 },
            },
            ModelOperator::PucciPlus {
                ellipticity: EllipticityPair::constant(1.0, 2.0),
                lower_order: LowerOrderTerm::GradientPower { sign: Sign::Minus, exponent: 2.0 },
            },
            ModelOperator::InfinityLaplace,
            ModelOperator::PLaplace { p: 4.0 },
        ];
        let c = ctx(0.05);
        let (_, nb) = stencil(|x, y| (3.0 * x).sin() + y * y * x + 0.2 * y, &c);
        for op in &ops {
            let d = discretize(op, None).unwrap();
            let u = d.local_solve(&c, &nb);
            let scale = 1.0 / (c.h * c.h);
            assert!(d.residual(&c, u, &nb).abs() < 1e-9 * scale, "{}", op.name());
        }
    }

    #[test]
    fn infinity_scheme_exact_on_linear() {
        let d = discretize(&ModelOperator::InfinityLaplace, None).unwrap();
        let c = ctx(0.1);
        let (u, nb) = stencil(|_, y| y, &c);
        assert_eq!(d.residual(&c, u, &nb), 0.0);
    }
}
