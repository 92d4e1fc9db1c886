//! Harmonic measure and refinement studies.

use serde::{Deserialize, Serialize};

use super::solve::{solve_dirichlet, SolveOptions};
use super::{Grid, GridSolution, Region};
use crate::error::GridError;
use crate::geometry::Point;
use crate::pucci::ModelOperator;

type P = Point<f64>;

/// Boundary nodes at distance `>= radius` from `center` with polar angle in `[from, to]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArc {
    pub center: P,
    pub radius: f64,
    pub from: f64,
    pub to: f64,
}

impl BoundaryArc {
    pub fn full(center: P, radius: f64) -> Self {
        Self { center, radius, from: -std::f64::consts::PI, to: std::f64::consts::PI }
    }

    pub fn contains(&self, x: P) -> bool {
        let v = x - self.center;
        let a = v.angle();
        v.norm() >= self.radius * (1.0 - 1e-12) && a >= self.from && a <= self.to
    }
}

/// Solution with data 1 on the arc and 0 on the rest of the boundary.
pub fn harmonic_measure(
    grid: &Grid,
    op: &ModelOperator,
    arc: &BoundaryArc,
    opts: &SolveOptions,
) -> Result<GridSolution, GridError> {
    let data = |x: P| if arc.contains(x) { 1.0 } else { 0.0 };
    solve_dirichlet(grid, op, &data, opts)
}

pub struct RefinementProblem<'a> {
    pub region: Region,
    pub op: ModelOperator,
    pub data: &'a dyn Fn(P) -> f64,
    /// Exact solution; without it the finest level is the reference.
    pub exact: Option<&'a dyn Fn(P) -> f64>,
    pub opts: SolveOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub error: f64,
    pub order: Option<f64>,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn min_order(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.order).reduce(f64::min)
    }

    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(|r| r.error).fold(0.0, f64::max)
    }
}

/// Sup-norm errors and observed orders over a sequence of spacings (coarse to fine).
pub fn grid_refinement_study(problem: &RefinementProblem, hs: &[f64]) -> Result<ConvergenceTable, GridError> {
    let need = if problem.exact.is_some() { 3 } else { 4 };
    if hs.len() < need {
        return Err(GridError::InvalidParameter(format!("refinement study needs at least {need} levels")));
    }
    let mut sols = Vec::with_capacity(hs.len());
    for &h in hs {
        let grid = Grid::new(problem.region.clone(), h)?;
        sols.push(solve_dirichlet(&grid, &problem.op, problem.data, &problem.opts)?);
    }
    let mut rows = Vec::new();
    let levels = if problem.exact.is_some() { sols.len() } else { sols.len() - 1 };
    for sol in sols.iter().take(levels) {
        let g = &sol.grid;
        let mut err: f64 = 0.0;
        for k in g.interior() {
            let x = g.pos_of(k);
            let want = match problem.exact {
                Some(f) => f(x),
                None => {
                    let fine = sols.last().expect("nonempty");
                    match fine.grid.nearest_node(x) {
                        Some(kf) => fine.values[kf],
                        None => continue,
                    }
                }
            };
            err = err.max((sol.values[k] - want).abs());
        }
        rows.push(ConvergenceRow { h: g.h, error: err, order: None, iterations: sol.iterations, residual: sol.residual });
    }
    for j in 1..rows.len() {
        let (a, b) = (&rows[j - 1], &rows[j]);
        let o = (a.error / b.error).ln() / (a.h / b.h).ln();
        rows[j].order = o.is_finite().then_some(o);
    }
    Ok(ConvergenceTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;

    #[test]
    fn disk_full_boundary_measure_is_one() {
        let region = Region::new(DomainSpec::Disk { center: P::zero(), radius: 1.0 });
        let g = Grid::new(region, 1.0 / 16.0).unwrap();
        let arc = BoundaryArc::full(P::zero(), 1.0);
        let sol = harmonic_measure(&g, &ModelOperator::Laplace, &arc, &SolveOptions::default()).unwrap();
        for k in g.interior() {
            assert!((sol.values[k] - 1.0).abs() < 1e-9);
        }
    }
}
