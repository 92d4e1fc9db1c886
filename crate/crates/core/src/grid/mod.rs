//! Monotone finite-difference solvers on masked uniform grids.
//!
//! Nodes sit at integer multiples of `h`. A node is interior when it lies
//! strictly inside the region; every other node with an interior 8-neighbour
//! carries Dirichlet data evaluated at its own position.

mod linear;
mod scheme;
mod solve;
mod study;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use scheme::{discretize, DiscreteOperator, LinearRow, NodeCtx, SchemeId, NEIGHBORS};
pub use solve::{residual_field, residual_of, solve_dirichlet, Method, SolveOptions};
pub use study::{grid_refinement_study, harmonic_measure, BoundaryArc, ConvergenceRow, ConvergenceTable, RefinementProblem};

use crate::error::GridError;
use crate::geometry::{Axis, DomainSpec, Point};

type P = Point<f64>;

/// Truncation applied to the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Clip {
    Box { lo: P, hi: P },
    Disk { center: P, radius: f64 },
}

impl Clip {
    fn contains(&self, x: P) -> bool {
        match *self {
            Clip::Box { lo, hi } => x.x > lo.x && x.x < hi.x && x.y > lo.y && x.y < hi.y,
            Clip::Disk { center, radius } => x.dist(center) < radius,
        }
    }

    fn distance(&self, x: P) -> f64 {
        match *self {
            Clip::Box { lo, hi } => (x.x - lo.x).min(hi.x - x.x).min(x.y - lo.y).min(hi.y - x.y),
            Clip::Disk { center, radius } => radius - x.dist(center),
        }
    }

    fn bbox(&self) -> (P, P) {
        match *self {
            Clip::Box { lo, hi } => (lo, hi),
            Clip::Disk { center, radius } => {
                (center - P::new(radius, radius), center + P::new(radius, radius))
            }
        }
    }
}

/// Computational region: a domain, optionally truncated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub domain: DomainSpec<f64>,
    #[serde(default)]
    pub clip: Option<Clip>,
}

impl Region {
    pub fn new(domain: DomainSpec<f64>) -> Self {
        Self { domain, clip: None }
    }

    pub fn clipped(domain: DomainSpec<f64>, clip: Clip) -> Self {
        Self { domain, clip: Some(clip) }
    }

    /// Strict membership with a margin of `eps` from both the domain boundary and the clip.
    pub fn contains(&self, x: P, eps: f64) -> bool {
        if !self.domain.contains(x) || self.domain.boundary_distance(x) <= eps {
            return false;
        }
        match &self.clip {
            Some(c) => c.contains(x) && c.distance(x) > eps,
            None => true,
        }
    }

    fn domain_bbox(&self) -> Option<(P, P)> {
        match self.domain {
            DomainSpec::Disk { center, radius } | DomainSpec::Annulus { center, outer: radius, .. } => {
                Some((center - P::new(radius, radius), center + P::new(radius, radius)))
            }
            DomainSpec::HalfDisk { center, radius } => {
                Some((center - P::new(radius, 0.0), center + P::new(radius, radius)))
            }
            DomainSpec::Rectangle { corner, width, height } => Some((corner, corner + P::new(width, height))),
            DomainSpec::HalfRectangle { base, half_width } => Some((
                base - P::new(half_width, 0.0),
                base + P::new(half_width, half_width),
            )),
            DomainSpec::HalfPlane { axis: Axis::X } => Some((
                P::new(0.0, f64::NEG_INFINITY),
                P::new(f64::INFINITY, f64::INFINITY),
            )),
            DomainSpec::HalfPlane { axis: Axis::Y } => Some((
                P::new(f64::NEG_INFINITY, 0.0),
                P::new(f64::INFINITY, f64::INFINITY),
            )),
            DomainSpec::Sector { .. } | DomainSpec::FlatComplement { .. } => None,
        }
    }

    /// Bounding box of the region; `None` when it is unbounded.
    pub fn bbox(&self) -> Option<(P, P)> {
        let full = (P::new(f64::NEG_INFINITY, f64::NEG_INFINITY), P::new(f64::INFINITY, f64::INFINITY));
        let (a, b) = self.domain_bbox().unwrap_or(full);
        let (c, d) = self.clip.as_ref().map_or(full, Clip::bbox);
        let lo = P::new(a.x.max(c.x), a.y.max(c.y));
        let hi = P::new(b.x.min(d.x), b.y.min(d.y));
        (lo.is_finite() && hi.is_finite() && lo.x < hi.x && lo.y < hi.y).then_some((lo, hi))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Interior,
    Dirichlet,
    Outside,
}

/// Uniform grid with spacing `h`; node `(i, j)` sits at `((i0 + i) h, (j0 + j) h)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub h: f64,
    pub i0: i64,
    pub j0: i64,
    pub nx: usize,
    pub ny: usize,
    pub kinds: Vec<NodeKind>,
    pub region: Region,
}

impl Grid {
    pub fn new(region: Region, h: f64) -> Result<Self, GridError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(GridError::InvalidParameter("spacing h must be positive".into()));
        }
        region.domain.validate()?;
        let (lo, hi) = region
            .bbox()
            .ok_or_else(|| GridError::InvalidParameter("unbounded region needs a clip".into()))?;
        let i0 = (lo.x / h).floor() as i64 - 1;
        let j0 = (lo.y / h).floor() as i64 - 1;
        let nx = ((hi.x / h).ceil() as i64 + 1 - i0 + 1) as usize;
        let ny = ((hi.y / h).ceil() as i64 + 1 - j0 + 1) as usize;
        if nx.saturating_mul(ny) > 50_000_000 {
            return Err(GridError::InvalidParameter(format!("grid of {nx} x {ny} nodes is too large")));
        }
        let eps = 1e-9 * h;
        let mut kinds = vec![NodeKind::Outside; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let x = P::new((i0 + i as i64) as f64 * h, (j0 + j as i64) as f64 * h);
                if region.contains(x, eps) {
                    kinds[j * nx + i] = NodeKind::Interior;
                }
            }
        }
        let mut grid = Self { h, i0, j0, nx, ny, kinds, region };
        let mut any = false;
        for j in 0..ny {
            for i in 0..nx {
                if grid.kinds[j * nx + i] != NodeKind::Interior {
                    continue;
                }
                any = true;
                if i == 0 || j == 0 || i + 1 == nx || j + 1 == ny {
                    return Err(GridError::InvalidParameter("interior node on the grid edge".into()));
                }
                for (di, dj) in NEIGHBORS {
                    let k = grid.idx((i as i64 + di) as usize, (j as i64 + dj) as usize);
                    if grid.kinds[k] == NodeKind::Outside {
                        grid.kinds[k] = NodeKind::Dirichlet;
                    }
                }
            }
        }
        if !any {
            return Err(GridError::EmptyGrid);
        }
        Ok(grid)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn pos(&self, i: usize, j: usize) -> P {
        P::new((self.i0 + i as i64) as f64 * self.h, (self.j0 + j as i64) as f64 * self.h)
    }

    pub fn pos_of(&self, k: usize) -> P {
        self.pos(k % self.nx, k / self.nx)
    }

    pub fn kind(&self, k: usize) -> NodeKind {
        self.kinds[k]
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.kinds.len()).filter(move |&k| self.kinds[k] == NodeKind::Interior)
    }

    pub fn interior_count(&self) -> usize {
        self.interior().count()
    }

    /// Node nearest to `x`, if it lies on the grid.
    pub fn nearest_node(&self, x: P) -> Option<usize> {
        let i = (x.x / self.h).round() as i64 - self.i0;
        let j = (x.y / self.h).round() as i64 - self.j0;
        (i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny)
            .then(|| self.idx(i as usize, j as usize))
    }

    /// Values of the 8 neighbours in [`NEIGHBORS`] order.
    #[inline]
    pub fn neighbors(&self, values: &[f64], k: usize) -> [f64; 8] {
        let nx = self.nx as isize;
        let off = |di: i64, dj: i64| (k as isize + di as isize + dj as isize * nx) as usize;
        let mut out = [0.0; 8];
        for (slot, (di, dj)) in out.iter_mut().zip(NEIGHBORS) {
            *slot = values[off(di, dj)];
        }
        out
    }

    /// Fresh value vector holding the Dirichlet data and zero inside.
    pub fn with_boundary(&self, data: &dyn Fn(P) -> f64) -> Result<Vec<f64>, GridError> {
        let mut v = vec![0.0; self.kinds.len()];
        for (k, kind) in self.kinds.iter().enumerate() {
            if *kind == NodeKind::Dirichlet {
                let g = data(self.pos_of(k));
                if !g.is_finite() {
                    return Err(GridError::InvalidParameter(format!(
                        "boundary data not finite at {:?}",
                        self.pos_of(k)
                    )));
                }
                v[k] = g;
            }
        }
        Ok(v)
    }

    /// Bilinear interpolation from the non-outside corners of the cell containing `x`.
    pub fn interpolate(&self, values: &[f64], x: P) -> Option<f64> {
        let fx = x.x / self.h - self.i0 as f64;
        let fy = x.y / self.h - self.j0 as f64;
        let (ci, cj) = (fx.floor(), fy.floor());
        let (tx, ty) = (fx - ci, fy - cj);
        let (mut acc, mut wsum) = (0.0, 0.0);
        for (di, dj, w) in [
            (0, 0, (1.0 - tx) * (1.0 - ty)),
            (1, 0, tx * (1.0 - ty)),
            (0, 1, (1.0 - tx) * ty),
            (1, 1, tx * ty),
        ] {
            let (i, j) = (ci as i64 + di, cj as i64 + dj);
            if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny || w == 0.0 {
                continue;
            }
            let k = self.idx(i as usize, j as usize);
            if self.kinds[k] != NodeKind::Outside {
                acc += w * values[k];
                wsum += w;
            }
        }
        (wsum > 0.0).then(|| acc / wsum)
    }
}

/// Converged (or best) discrete solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub operator: crate::pucci::ModelOperator,
    pub scheme: SchemeId,
    pub iterations: usize,
    /// Sup over interior nodes of `|S(u) - u|`, the local-solve correction.
    pub residual: f64,
    /// Sup over interior nodes of `|F_h(u)|`.
    pub operator_residual: f64,
    pub tol: f64,
    pub converged: bool,
}

/// Metadata written next to the node values.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionMeta<'a> {
    pub operator: &'a str,
    pub scheme: SchemeId,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub interior_nodes: usize,
    pub iterations: usize,
    pub residual: f64,
    pub operator_residual: f64,
    pub tol: f64,
    pub converged: bool,
}

impl GridSolution {
    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn at(&self, x: P) -> Option<f64> {
        self.grid.interpolate(&self.values, x)
    }

    pub fn require_converged(&self) -> Result<&Self, GridError> {
        if self.converged {
            Ok(self)
        } else {
            Err(GridError::NotConverged { residual: self.residual, iterations: self.iterations })
        }
    }

    pub fn meta(&self) -> SolutionMeta<'_> {
        SolutionMeta {
            operator: self.operator.name(),
            scheme: self.scheme,
            h: self.grid.h,
            nx: self.grid.nx,
            ny: self.grid.ny,
            interior_nodes: self.grid.interior_count(),
            iterations: self.iterations,
            residual: self.residual,
            operator_residual: self.operator_residual,
            tol: self.tol,
            converged: self.converged,
        }
    }

    /// CSV with columns `x,y,kind,u` for every non-outside node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,kind,u")?;
        for (k, kind) in self.grid.kinds.iter().enumerate() {
            let tag = match kind {
                NodeKind::Interior => "interior",
                NodeKind::Dirichlet => "dirichlet",
                NodeKind::Outside => continue,
            };
            let x = self.grid.pos_of(k);
            writeln!(w, "{},{},{},{}", x.x, x.y, tag, self.values[k])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_disk_mask_has_dirichlet_ring() {
        let region = Region::new(DomainSpec::HalfDisk { center: P::zero(), radius: 1.0 });
        let g = Grid::new(region, 1.0 / 16.0).unwrap();
        for k in g.interior() {
            let (i, j) = (k % g.nx, k / g.nx);
            for (di, dj) in NEIGHBORS {
                let n = g.idx((i as i64 + di) as usize, (j as i64 + dj) as usize);
                assert_ne!(g.kind(n), NodeKind::Outside);
            }
        }
        // The flat side is resolved exactly: nodes on y = 0 are boundary nodes.
        let k = g.nearest_node(P::new(0.25, 0.0)).unwrap();
        assert_eq!(g.kind(k), NodeKind::Dirichlet);
        let k = g.nearest_node(P::new(0.25, 1.0 / 16.0)).unwrap();
        assert_eq!(g.kind(k), NodeKind::Interior);
    }

    #[test]
    fn unbounded_region_needs_clip() {
        let hp = DomainSpec::HalfPlane { axis: Axis::Y };
        assert!(Grid::new(Region::new(hp.clone()), 0.1).is_err());
        let g = Grid::new(Region::clipped(hp, Clip::Box { lo: P::new(-1.0, -1.0), hi: P::new(1.0, 1.0) }), 0.125)
            .unwrap();
        assert_eq!(g.interior_count(), 15 * 7);
    }
}
