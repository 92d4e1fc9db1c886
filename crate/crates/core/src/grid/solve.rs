//! Nonlinear Gauss-Seidel / SOR and explicit pseudo-time iteration.

use serde::{Deserialize, Serialize};

use super::linear::{bicgstab, Csr, Ilu0};
use super::scheme::{discretize, DiscreteOperator, NodeCtx, SchemeId};
use super::{Grid, GridSolution, NodeKind};
use crate::error::GridError;
use crate::geometry::Point;
use crate::pucci::{DistanceArgument, ModelOperator};

type P = Point<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Policy iteration on the frozen linearization (sparse solve per policy),
    /// finishing with Gauss-Seidel when the policy does not settle.
    Policy,
    /// Four-colour nonlinear Gauss-Seidel with over-relaxation.
    GaussSeidel,
    /// Explicit `u <- u - tau F_h(u)` with the local monotonicity bound for `tau`.
    PseudoTime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Stop when `max |S(u) - u| <= tol` over interior nodes.
    pub tol: f64,
    pub max_iter: usize,
    pub method: Method,
    /// Relaxation factor; `None` picks the Laplace-optimal value for the grid.
    pub omega: Option<f64>,
    /// Start from the interpolated solution on the grid with spacing `2h`.
    pub nested: bool,
    pub scheme: Option<SchemeId>,
    /// Anchor point for ellipticity measured from a boundary point.
    pub anchor: Option<P>,
    /// Gradient regularization factor, `eps_g = eps_factor h^2`.
    pub eps_factor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200_000,
            method: Method::Policy,
            omega: None,
            nested: true,
            scheme: None,
            anchor: None,
            eps_factor: 1.0,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Interior nodes with their evaluation contexts, in four-colour order.
pub(crate) struct Layout {
    pub nodes: Vec<(usize, NodeCtx)>,
}

impl Layout {
    pub(crate) fn new(grid: &Grid, op: &ModelOperator, anchor: Option<P>) -> Result<Self, GridError> {
        let arg = match op {
            ModelOperator::PucciPlus { ellipticity, .. } | ModelOperator::PucciMinus { ellipticity, .. }
                if !ellipticity.is_constant() =>
            {
                Some(ellipticity.argument)
            }
            _ => None,
        };
        if arg == Some(DistanceArgument::ToAnchor) && anchor.is_none() {
            return Err(GridError::InvalidParameter("ellipticity measured from w needs an anchor".into()));
        }
        let mut nodes = Vec::with_capacity(grid.kinds.len() / 2);
        for colour in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            for j in (colour.1..grid.ny).step_by(2) {
                for i in (colour.0..grid.nx).step_by(2) {
                    let k = grid.idx(i, j);
                    if grid.kinds[k] != NodeKind::Interior {
                        continue;
                    }
                    let x = grid.pos(i, j);
                    let t = match arg {
                        None => 1.0,
                        Some(DistanceArgument::ToBoundary) => grid.region.domain.boundary_distance(x),
                        Some(DistanceArgument::ToAnchor) => x.dist(anchor.expect("checked above")),
                    };
                    nodes.push((k, NodeCtx { x, h: grid.h, t }));
                }
            }
        }
        if nodes.is_empty() {
            return Err(GridError::EmptyGrid);
        }
        Ok(Self { nodes })
    }
}

/// `(max |S(u) - u|, max |F_h(u)|)` over interior nodes.
pub(crate) fn static_residual(grid: &Grid, d: &DiscreteOperator, layout: &Layout, values: &[f64]) -> (f64, f64) {
    let (mut corr, mut opr): (f64, f64) = (0.0, 0.0);
    for (k, ctx) in &layout.nodes {
        let nb = grid.neighbors(values, *k);
        let u = values[*k];
        corr = corr.max((d.local_solve(ctx, &nb) - u).abs());
        opr = opr.max(d.residual(ctx, u, &nb).abs());
    }
    (corr, opr)
}

fn initial_guess(
    grid: &Grid,
    op: &ModelOperator,
    data: &dyn Fn(P) -> f64,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, usize), GridError> {
    let mut values = grid.with_boundary(data)?;
    let (mut sum, mut cnt) = (0.0, 0usize);
    for (k, kind) in grid.kinds.iter().enumerate() {
        if *kind == NodeKind::Dirichlet {
            sum += values[k];
            cnt += 1;
        }
    }
    let mean = if cnt > 0 { sum / cnt as f64 } else { 0.0 };
    let mut coarse_iters = 0;
    let coarse = if opts.nested && grid.interior_count() > 4096 {
        Grid::new(grid.region.clone(), 2.0 * grid.h).ok().filter(|g| g.interior_count() >= 64)
    } else {
        None
    };
    match coarse {
        Some(cg) => {
            let csol = solve_dirichlet(&cg, op, data, opts)?;
            coarse_iters = csol.iterations;
            for (k, kind) in grid.kinds.iter().enumerate() {
                if *kind == NodeKind::Interior {
                    values[k] = cg.interpolate(&csol.values, grid.pos_of(k)).unwrap_or(mean);
                }
            }
        }
        None => {
            for (k, kind) in grid.kinds.iter().enumerate() {
                if *kind == NodeKind::Interior {
                    values[k] = mean;
                }
            }
        }
    }
    Ok((values, coarse_iters))
}

/// Solves `F_h(u) = 0` at interior nodes with Dirichlet data at boundary nodes.
///
/// Non-convergence is reported through `converged = false` on the returned
/// best iterate; see [`GridSolution::require_converged`].
pub fn solve_dirichlet(
    grid: &Grid,
    op: &ModelOperator,
    data: &dyn Fn(P) -> f64,
    opts: &SolveOptions,
) -> Result<GridSolution, GridError> {
    if !(opts.tol > 0.0) {
        return Err(GridError::InvalidParameter("tolerance must be positive".into()));
    }
    let d = discretize(op, opts.scheme)?.with_eps_factor(opts.eps_factor);
    let layout = Layout::new(grid, op, opts.anchor)?;
    let (mut values, _) = initial_guess(grid, op, data, opts)?;
    let (iterations, converged) = match opts.method {
        Method::GaussSeidel => gauss_seidel(grid, &d, &layout, &mut values, opts),
        Method::Policy => match policy_iteration(grid, &d, &layout, &mut values, opts) {
            (it, true) => (it, true),
            (it, false) => {
                let rest = SolveOptions { max_iter: opts.max_iter.saturating_sub(it), ..opts.clone() };
                let (gs, ok) = gauss_seidel(grid, &d, &layout, &mut values, &rest);
                (it + gs, ok)
            }
        },
        Method::PseudoTime => pseudo_time(grid, &d, &layout, &mut values, opts)?,
    };
    let (residual, operator_residual) = static_residual(grid, &d, &layout, &values);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(GridError::InvalidParameter("iteration produced non-finite values".into()));
    }
    Ok(GridSolution {
        grid: grid.clone(),
        values,
        operator: op.clone(),
        scheme: d.scheme,
        iterations,
        residual,
        operator_residual,
        tol: opts.tol,
        converged: converged && residual <= opts.tol,
    })
}

fn default_omega(grid: &Grid) -> f64 {
    let (lo, hi) = grid.region.bbox().expect("grid built from a bounded region");
    let l = (hi.x - lo.x).max(hi.y - lo.y);
    let s = (std::f64::consts::PI * grid.h / l).sin();
    2.0 / (1.0 + s)
}

fn gauss_seidel(grid: &Grid, d: &DiscreteOperator, layout: &Layout, values: &mut [f64], opts: &SolveOptions) -> (usize, bool) {
    let mut omega = opts.omega.unwrap_or_else(|| default_omega(grid));
    let window = 200;
    let mut window_max: f64 = 0.0;
    let mut prev_window = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let mut sweep: f64 = 0.0;
        for (k, ctx) in &layout.nodes {
            let nb = grid.neighbors(values, *k);
            let s = d.local_solve(ctx, &nb);
            let delta = s - values[*k];
            sweep = sweep.max(delta.abs());
            values[*k] += omega * delta;
        }
        if !sweep.is_finite() {
            return (it, false);
        }
        if sweep <= opts.tol {
            let (corr, _) = static_residual(grid, d, layout, values);
            if corr <= opts.tol {
                return (it, true);
            }
        }
        window_max = window_max.max(sweep);
        if it % window == 0 {
            // Back off towards plain Gauss-Seidel when a window makes no progress.
            if window_max > 0.99 * prev_window && omega > 1.0 {
                omega = 1.0 + 0.5 * (omega - 1.0);
            }
            prev_window = window_max;
            window_max = 0.0;
        }
    }
    (opts.max_iter, false)
}

/// Howard-type iteration in Newton form: freeze the policy at `u`, solve
/// `(J + eta L) delta = -F(u)` and update.
///
/// `eta` is a Levenberg-style shift by the 5-point Laplacian, zero unless a
/// frozen matrix is singular (closed chains in the pair scheme) or a step is
/// rejected for increasing the residual.
fn policy_iteration(
    grid: &Grid,
    d: &DiscreteOperator,
    layout: &Layout,
    values: &mut [f64],
    opts: &SolveOptions,
) -> (usize, bool) {
    let n = layout.nodes.len();
    let mut row_of = vec![usize::MAX; grid.kinds.len()];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for (k, kind) in grid.kinds.iter().enumerate() {
        if *kind == NodeKind::Interior {
            row_of[k] = order.len();
            order.push(k);
        }
    }
    let mut ctx_of = vec![None; grid.kinds.len()];
    for (k, ctx) in &layout.nodes {
        ctx_of[*k] = Some(*ctx);
    }
    // Neighbour slots sorted by linear index: SW, S, SE, W, (centre), E, NW, N, NE.
    const SORTED: [usize; 8] = [6, 3, 7, 2, 0, 5, 1, 4];
    let nx = grid.nx as isize;
    let offset = |slot: usize| {
        let (di, dj) = super::NEIGHBORS[slot];
        di as isize + dj as isize * nx
    };
    let max_policy = 200.min(opts.max_iter);
    let mut eta: f64 = 0.0;
    let mut x = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut saved = values.to_vec();
    let (mut corr, _) = static_residual(grid, d, layout, values);
    let mut stalls = 0;
    for it in 1..=max_policy {
        let mut ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::with_capacity(9 * n);
        let mut val = Vec::with_capacity(9 * n);
        ptr.push(0);
        for (i, &k) in order.iter().enumerate() {
            let ctx = ctx_of[k].expect("interior node has a context");
            let nb = grid.neighbors(values, k);
            let mut row = match d.policy_row(&ctx, values[k], &nb) {
                Some(r) => r,
                None => return (it - 1, false),
            };
            let f = row.diag * values[k] - row.a.iter().zip(&nb).map(|(a, v)| a * v).sum::<f64>() + row.c0;
            if eta > 0.0 {
                let l = eta * row.diag / 4.0;
                for slot in 0..4 {
                    row.a[slot] += l;
                }
            }
            let inv = 1.0 / row.a.iter().sum::<f64>();
            let mut centre_done = false;
            for slot in SORTED {
                let kk = (k as isize + offset(slot)) as usize;
                if !centre_done && kk > k {
                    col.push(i);
                    val.push(1.0);
                    centre_done = true;
                }
                let a = row.a[slot] * inv;
                if a != 0.0 && grid.kinds[kk] == NodeKind::Interior {
                    col.push(row_of[kk]);
                    val.push(-a);
                }
            }
            if !centre_done {
                col.push(i);
                val.push(1.0);
            }
            ptr.push(col.len());
            b[i] = -f * inv;
            x[i] = 0.0;
        }
        let a = Csr { n, ptr, col, val };
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let solved = Ilu0::new(&a)
            .map(|ilu| bicgstab(&a, &ilu, &b, &mut x, (0.05 * opts.tol).max(1e-3 * scale), 5_000))
            .unwrap_or(false);
        if !solved {
            eta = (eta * 10.0).max(1e-4);
            if eta > 1.0 {
                return (it, false);
            }
            continue;
        }
        saved.copy_from_slice(values);
        for (i, &k) in order.iter().enumerate() {
            values[k] += x[i];
        }
        let (new_corr, _) = static_residual(grid, d, layout, values);
        if new_corr <= opts.tol {
            return (it, true);
        }
        if !(new_corr < corr) {
            values.copy_from_slice(&saved);
            eta = (eta * 10.0).max(1e-4);
            stalls += 1;
            if eta > 1.0 || stalls > 40 {
                return (it, false);
            }
            continue;
        }
        corr = new_corr;
        eta = if eta <= 1e-4 { 0.0 } else { eta / 10.0 };
    }
    (max_policy, false)
}

fn pseudo_time(
    grid: &Grid,
    d: &DiscreteOperator,
    layout: &Layout,
    values: &mut [f64],
    opts: &SolveOptions,
) -> Result<(usize, bool), GridError> {
    let mut next = values.to_vec();
    for it in 1..=opts.max_iter {
        let mut step: f64 = 0.0;
        for (k, ctx) in &layout.nodes {
            let nb = grid.neighbors(values, *k);
            let tau = 1.0 / d.diag_bound(ctx, &nb)?;
            let du = tau * d.residual(ctx, values[*k], &nb);
            step = step.max(du.abs());
            next[*k] = values[*k] - du;
        }
        values.copy_from_slice(&next);
        if step <= opts.tol {
            let (corr, _) = static_residual(grid, d, layout, values);
            if corr <= opts.tol {
                return Ok((it, true));
            }
        }
    }
    Ok((opts.max_iter, false))
}

/// Residual fields of arbitrary node values under a solution's operator.
pub fn residual_of(
    grid: &Grid,
    op: &ModelOperator,
    scheme: Option<SchemeId>,
    values: &[f64],
    anchor: Option<P>,
) -> Result<(f64, f64), GridError> {
    let d = discretize(op, scheme)?;
    let layout = Layout::new(grid, op, anchor)?;
    Ok(static_residual(grid, &d, &layout, values))
}

/// Operator residual `F_h(u)` at every node (zero off the interior).
pub fn residual_field(
    grid: &Grid,
    op: &ModelOperator,
    scheme: Option<SchemeId>,
    values: &[f64],
    anchor: Option<P>,
) -> Result<Vec<f64>, GridError> {
    let d = discretize(op, scheme)?;
    let layout = Layout::new(grid, op, anchor)?;
    let mut out = vec![0.0; grid.kinds.len()];
    for (k, ctx) in &layout.nodes {
        let nb = grid.neighbors(values, *k);
        out[*k] = d.residual(ctx, values[*k], &nb);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::grid::Region;

    fn square() -> Region {
        Region::new(DomainSpec::Rectangle { corner: P::zero(), width: 1.0, height: 1.0 })
    }

    #[test]
    fn laplace_linear_data_exact() {
        let g = Grid::new(square(), 1.0 / 32.0).unwrap();
        let sol = solve_dirichlet(&g, &ModelOperator::Laplace, &|x| x.y, &SolveOptions::default().with_tol(1e-13)).unwrap();
        assert!(sol.converged);
        for k in g.interior() {
            assert!((sol.values[k] - g.pos_of(k).y).abs() < 1e-10);
        }
    }

    #[test]
    fn pseudo_time_matches_gauss_seidel() {
        let g = Grid::new(square(), 1.0 / 8.0).unwrap();
        let data = |x: P| x.x * x.x + x.y;
        let gs = solve_dirichlet(&g, &ModelOperator::InfinityLaplace, &data, &SolveOptions::default().with_tol(1e-12)).unwrap();
        let opts = SolveOptions { method: Method::PseudoTime, ..SolveOptions::default().with_tol(1e-13) };
        let pt = solve_dirichlet(&g, &ModelOperator::InfinityLaplace, &data, &opts).unwrap();
        assert!(gs.converged && pt.converged);
        for k in g.interior() {
            assert!((gs.values[k] - pt.values[k]).abs() < 1e-9);
        }
    }
}
