//! Odd reflection of solutions on `Q+` across its bottom edge.

use crate::error::VerifyError;
use crate::geometry::{DomainSpec, Point};
use crate::grid::{residual_of, Grid, GridSolution, NodeKind, Region};
use crate::pucci::ModelOperator;
use crate::report::VerificationReport;

type P = Point<f64>;

/// Odd extension `u(x, y0 - t) = -u(x, y0 + t)` onto the full square, with a
/// variable exponent extended evenly. The returned solution carries the
/// residuals of the extension on the whole square; `converged` records
/// whether the correction is within twice the original tolerance.
pub fn schwarz_reflect(sol: &GridSolution) -> Result<GridSolution, VerifyError> {
    let (base, r) = match (&sol.grid.region.domain, &sol.grid.region.clip) {
        (DomainSpec::HalfRectangle { base, half_width }, None) => (*base, *half_width),
        _ => return Err(VerifyError::PreconditionViolated("reflection needs an unclipped half square".into())),
    };
    let op = match &sol.operator {
        ModelOperator::PxLaplace { exponent } => {
            let mut e = exponent.clone();
            e.even_about = Some(base.y);
            ModelOperator::PxLaplace { exponent: e }
        }
        op @ (ModelOperator::InfinityLaplace | ModelOperator::Laplace | ModelOperator::PLaplace { .. }) => op.clone(),
        other => {
            return Err(VerifyError::PreconditionViolated(format!(
                "{} is not odd under reflection",
                other.name()
            )))
        }
    };
    let g = &sol.grid;
    let h = g.h;
    let scale = sol.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut trace: f64 = 0.0;
    for (k, kind) in g.kinds.iter().enumerate() {
        let x = g.pos_of(k);
        if *kind != NodeKind::Outside && (x.y - base.y).abs() < 1e-9 * h && (x.x - base.x).abs() <= r + 1e-9 * h {
            trace = trace.max(sol.values[k].abs());
        }
    }
    if trace > 1e-14 * scale {
        return Err(VerifyError::NonzeroTrace(trace));
    }
    let square = DomainSpec::Rectangle { corner: base - P::new(r, r), width: 2.0 * r, height: 2.0 * r };
    let qg = Grid::new(Region::new(square), h)?;
    let mut values = vec![0.0; qg.kinds.len()];
    for (k, kind) in qg.kinds.iter().enumerate() {
        if *kind == NodeKind::Outside {
            continue;
        }
        let x = qg.pos_of(k);
        let (src, sign) = if x.y < base.y { (P::new(x.x, 2.0 * base.y - x.y), -1.0) } else { (x, 1.0) };
        let ks = g
            .nearest_node(src)
            .filter(|&ks| g.kind(ks) != NodeKind::Outside && g.pos_of(ks).dist(src) < 1e-9 * h)
            .ok_or_else(|| VerifyError::PreconditionViolated(format!("no source node for ({}, {})", x.x, x.y)))?;
        values[k] = sign * sol.values[ks];
    }
    let (corr, opr) = residual_of(&qg, &op, Some(sol.scheme), &values, None)?;
    Ok(GridSolution {
        grid: qg,
        values,
        operator: op,
        scheme: sol.scheme,
        iterations: 0,
        residual: corr,
        operator_residual: opr,
        tol: sol.tol,
        converged: corr <= 2.0 * sol.tol,
    })
}

pub fn reflection_report(original: &GridSolution, extended: &GridSolution) -> VerificationReport {
    VerificationReport::new("reflect", original.converged && extended.residual <= 2.0 * original.tol)
        .measure("original_residual", original.residual)
        .measure("extended_residual", extended.residual)
        .measure("extended_operator_residual", extended.operator_residual)
        .measure("nodes", extended.grid.interior_count() as f64)
        .tolerance("residual", 2.0 * original.tol)
        .fingerprint_of(&original.meta())
}
