//! Check specifications read from the experiment config and their runners.
//!
//! Every check struct has a default that reproduces the corresponding entry
//! of the committed acceptance matrix, so `verify <kind>` runs without a config.

use barrierlab::barriers::{admissible_samples, margin_report, place_exterior_barrier, place_interior_barrier, strict_margin};
use barrierlab::geometry::{Axis, DomainSpec};
use barrierlab::grid::{solve_dirichlet, Clip, Grid, GridSolution, Region, SchemeId, SolveOptions};
use barrierlab::odi::{
    analytic_profile, bhi_constant, const_rhs_threshold, gradient_power_constants, gradient_power_slope_limit, odi_residual,
    residual_report, shoot_profile, BarrierProfile, CatalogEntry, OdiSpec, ShootOptions, Side,
};
use barrierlab::pucci::{envelope_check, envelope_samples, EllipticityPair, LowerOrderTerm, ModelOperator, StructuralEnvelope};
use barrierlab::verify::*;
use barrierlab::{Point2, VerificationReport};
use serde::{Deserialize, Serialize};

use crate::expr::Expr;

type P = Point2;

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad parameters detected before any numerical work.
    Config(String),
    /// Errors raised while running a check.
    Runtime(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

fn rt<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

fn cfg<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

/// Reports plus named CSV payloads of one check.
#[derive(Debug, Default)]
pub struct Outcome {
    pub reports: Vec<VerificationReport>,
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn push(&mut self, r: VerificationReport) {
        self.reports.push(r);
    }

    fn file(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }
}

/// Topics of the coverage table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Topic {
    StructuralEnvelope,
    PucciOperators,
    DecayProfiles,
    RadialBarriers,
    Comparison,
    BoundaryHarnack,
    ClosedForms,
    QuotientLemmas,
    DriftInequalities,
    Reflection,
    HolderAndGradient,
    MeasuresAndExplicitSolutions,
}

impl Topic {
    pub const ALL: [Topic; 12] = [
        Topic::StructuralEnvelope,
        Topic::PucciOperators,
        Topic::DecayProfiles,
        Topic::RadialBarriers,
        Topic::Comparison,
        Topic::BoundaryHarnack,
        Topic::ClosedForms,
        Topic::QuotientLemmas,
        Topic::DriftInequalities,
        Topic::Reflection,
        Topic::HolderAndGradient,
        Topic::MeasuresAndExplicitSolutions,
    ];

    pub fn title(self) -> &'static str {
        match self {
            Topic::StructuralEnvelope => "structural envelope of F",
            Topic::PucciOperators => "Pucci extremal operators",
            Topic::DecayProfiles => "ODI profiles and decay bounds",
            Topic::RadialBarriers => "interior and exterior radial barriers",
            Topic::Comparison => "comparison with a placed barrier",
            Topic::BoundaryHarnack => "boundary Harnack constant and ratio band",
            Topic::ClosedForms => "closed-form catalog and constants",
            Topic::QuotientLemmas => "quotient lemmas for f/d",
            Topic::DriftInequalities => "drift inequalities (Lipschitz case)",
            Topic::Reflection => "Schwarz reflection",
            Topic::HolderAndGradient => "quotient Holder fits and gradient bound",
            Topic::MeasuresAndExplicitSolutions => "p-harmonic measure, sector and flat solutions",
        }
    }
}

// ---------------------------------------------------------------------------
// Shared parameter blocks

/// Boundary value of a profile: a number, `"infinite"`, a fraction of the
/// gradient-power slope limit, or a multiple of `threshold * r^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundaryValue {
    Value(f64),
    Rule(BoundaryRule),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryRule {
    Infinite,
    SlopeLimitFraction(f64),
    ThresholdMultiple(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileParams {
    /// Catalog id: ex221, ex222, ex223, ex224, ex224-inf, drift-lower, drift-upper.
    pub catalog: String,
    pub side: Option<Side>,
    pub n: u32,
    pub r: f64,
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub cap_lambda: f64,
    pub a: f64,
    pub k: f64,
    pub mu: f64,
    pub c_omega: f64,
    pub m: Option<BoundaryValue>,
    /// Shoot on the inequality instead of using the closed form.
    pub shoot: bool,
}

impl Default for ProfileParams {
    fn default() -> Self {
        Self {
            catalog: "ex221".into(),
            side: None,
            n: 2,
            r: 1.0,
            lambda: 1.0,
            cap_lambda: 1.0,
            a: 0.5,
            k: 3.0,
            mu: 1.0,
            c_omega: 1.0,
            m: None,
            shoot: false,
        }
    }
}

impl ProfileParams {
    fn entry(&self) -> Result<CatalogEntry, Failure> {
        CatalogEntry::parse(&self.catalog).ok_or_else(|| {
            let ids: Vec<_> = CatalogEntry::ALL.iter().map(|e| e.id()).collect();
            Failure::Config(format!("unknown catalog id `{}` (expected one of {ids:?})", self.catalog))
        })
    }

    fn spec(&self) -> Result<OdiSpec, Failure> {
        let e = self.entry()?;
        let side = self.side.unwrap_or(match e {
            CatalogEntry::GradientPower | CatalogEntry::GradientPowerLimit | CatalogEntry::DriftUpper => Side::Upper,
            _ => Side::Lower,
        });
        let s = e.spec(side, self.n, self.r, self.lambda, self.cap_lambda, self.a, self.k, self.mu, self.c_omega);
        s.validate().map_err(cfg)?;
        Ok(s)
    }

    fn boundary_value(&self, spec: &OdiSpec) -> Result<f64, Failure> {
        let e = self.entry()?;
        let default = if e == CatalogEntry::GradientPowerLimit { f64::INFINITY } else { 1.0 };
        Ok(match &self.m {
            None => default,
            Some(BoundaryValue::Value(v)) => *v,
            Some(BoundaryValue::Rule(BoundaryRule::Infinite)) => f64::INFINITY,
            Some(BoundaryValue::Rule(BoundaryRule::SlopeLimitFraction(f))) => f * gradient_power_slope_limit(spec).map_err(cfg)?,
            Some(BoundaryValue::Rule(BoundaryRule::ThresholdMultiple(c))) => {
                c * const_rhs_threshold(self.lambda, self.cap_lambda, self.n) * self.r * self.r
            }
        })
    }

    fn validate(&self) -> Result<(), Failure> {
        let s = self.spec()?;
        self.boundary_value(&s).map(|_| ())
    }

    /// Spec, profile and the closed form when shooting was requested.
    fn build(&self) -> Result<(OdiSpec, BarrierProfile, Option<BarrierProfile>), Failure> {
        let spec = self.spec()?;
        let bv = self.boundary_value(&spec)?;
        if self.shoot {
            let p = shoot_profile(&spec, bv, &ShootOptions::default()).map_err(rt)?;
            let closed = analytic_profile(&spec, bv).ok();
            Ok((spec, p, closed))
        } else {
            let p = analytic_profile(&spec, bv).map_err(rt)?;
            Ok((spec, p, None))
        }
    }
}

/// Node filter for residual and drift windows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NodeWindow {
    All,
    Box { lo: P, hi: P },
    Annulus { center: P, inner: f64, outer: f64 },
    Outside { center: P, radius: f64 },
}

impl NodeWindow {
    fn contains(&self, x: P) -> bool {
        match *self {
            NodeWindow::All => true,
            NodeWindow::Box { lo, hi } => x.x >= lo.x && x.x <= hi.x && x.y >= lo.y && x.y <= hi.y,
            NodeWindow::Annulus { center, inner, outer } => (inner..=outer).contains(&x.dist(center)),
            NodeWindow::Outside { center, radius } => x.dist(center) >= radius,
        }
    }
}

fn half_square(half_width: f64) -> DomainSpec<f64> {
    DomainSpec::HalfRectangle { base: P::zero(), half_width }
}

fn pucci_plus(lambda: f64, cap: f64) -> ModelOperator {
    ModelOperator::PucciPlus { ellipticity: EllipticityPair::constant(lambda, cap), lower_order: LowerOrderTerm::Zero }
}

fn expr(s: &str) -> Expr {
    Expr::parse(s).expect("built-in expression")
}

/// Certifies variable exponents over `[lo, hi]` when the config left the bounds empty.
fn prepare(op: &ModelOperator, lo: P, hi: P) -> Result<ModelOperator, Failure> {
    match op {
        ModelOperator::PxLaplace { exponent } if exponent.p_min == 0.0 && exponent.p_max == 0.0 => {
            Ok(ModelOperator::PxLaplace { exponent: exponent.clone().certify(lo, hi).map_err(cfg)? })
        }
        other => Ok(other.clone()),
    }
}

fn validate_op(op: &ModelOperator) -> Result<(), Failure> {
    let op = prepare(op, P::new(-1.0, -1.0), P::new(1.0, 1.0))?;
    op.validate().map_err(cfg)
}

fn validate_domain(d: &DomainSpec<f64>) -> Result<(), Failure> {
    d.validate().map_err(cfg)
}

fn validate_hs(hs: &[f64], min_len: usize) -> Result<(), Failure> {
    if hs.len() < min_len || hs.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(Failure::Config(format!("need at least {min_len} positive grid spacings, got {hs:?}")));
    }
    Ok(())
}

fn solve(region: Region, op: &ModelOperator, h: f64, tol: f64, data: &dyn Fn(P) -> f64) -> Result<GridSolution, Failure> {
    let grid = Grid::new(region, h).map_err(rt)?;
    let (lo, hi) = grid.region.bbox().unwrap_or((P::new(-1.0, -1.0), P::new(1.0, 1.0)));
    let op = prepare(op, lo, hi)?;
    let sol = solve_dirichlet(&grid, &op, data, &SolveOptions::default().with_tol(tol)).map_err(rt)?;
    sol.require_converged().map_err(rt)?;
    Ok(sol)
}

fn solution_csv(sol: &GridSolution) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    sol.write_csv(&mut buf).map_err(rt)?;
    Ok(buf)
}

fn rows_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(rt)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string())).map_err(rt)?;
    }
    w.into_inner().map_err(rt)
}

/// `(lambda, Lambda)` of an operator with constant ellipticity and no lower-order term.
fn constant_ellipticity(op: &ModelOperator) -> Option<(f64, f64)> {
    match op {
        ModelOperator::Laplace => Some((1.0, 1.0)),
        ModelOperator::PucciPlus { ellipticity, lower_order: LowerOrderTerm::Zero }
        | ModelOperator::PucciMinus { ellipticity, lower_order: LowerOrderTerm::Zero }
            if ellipticity.is_constant() =>
        {
            Some((ellipticity.lower.coef, ellipticity.upper.coef))
        }
        _ => None,
    }
}

fn ellipticity_for(op: &ModelOperator, given: Option<(f64, f64)>) -> Result<(f64, f64), Failure> {
    given
        .or_else(|| constant_ellipticity(op))
        .ok_or_else(|| Failure::Config(format!("{}: give `lambda` and `Lambda` for the profiles", op.name())))
}

fn uniform_pair(lambda: f64, cap: f64, r: f64, m: f64, big_m: f64) -> Result<(BarrierProfile, BarrierProfile), Failure> {
    let spec = |side| CatalogEntry::Uniform.spec(side, 2, r, lambda, cap, 0.5, 3.0, 1.0, 1.0);
    Ok((analytic_profile(&spec(Side::Lower), m).map_err(rt)?, analytic_profile(&spec(Side::Upper), big_m).map_err(rt)?))
}

// ---------------------------------------------------------------------------
// Profiles and constants

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogCheck {
    pub profile: ProfileParams,
    /// Tolerance on the largest violation (and on `|h'' - rhs|` for equalities).
    pub tol: f64,
    /// Require the equality; defaults to the entry's own flag for closed forms.
    pub equality: Option<bool>,
    /// Rows of the profile CSV minus one.
    pub csv_intervals: usize,
}

impl Default for CatalogCheck {
    fn default() -> Self {
        Self { profile: ProfileParams::default(), tol: 1e-10, equality: None, csv_intervals: 1000 }
    }
}

impl CatalogCheck {
    fn run(&self) -> Result<Outcome, Failure> {
        let (spec, p, closed) = self.profile.build()?;
        let entry = self.profile.entry()?;
        let equality = self.equality.unwrap_or(p.is_closed_form() && entry.solves_equality());
        let s = odi_residual(&p, &spec);
        let mut rep = residual_report("catalog", &p, &spec, self.tol);
        if equality {
            let pass = rep.pass && s.max_abs <= self.tol;
            rep = rep.with_pass(pass).tolerance("equality", self.tol);
        }
        rep = rep
            .measure("boundary_value", p.boundary_value)
            .measure("h_at_r", p.value(spec.r))
            .measure("slope_at_0", p.derivative(0.0))
            .note(format!("{} {:?}", entry.id(), spec.side));
        if let Some(c) = closed {
            rep = rep.measure("closed_form_distance", p.sup_distance(&c, 1000));
        }
        let mut out = Outcome::default();
        out.push(rep);
        let rows = p.table(self.csv_intervals.max(1)).into_iter().map(|r| r.to_vec());
        out.file("profile", rows_csv(&["t", "h", "dh", "d2h"], rows)?);
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdiBhiCheck {
    /// `ex221` or `ex222`; the lower and upper profiles share the parameters.
    pub profile: ProfileParams,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub expected: Option<f64>,
    pub tol: f64,
}

impl Default for OdiBhiCheck {
    fn default() -> Self {
        Self { profile: ProfileParams { m: Some(BoundaryValue::Value(1.0)), ..ProfileParams::default() }, big_m: 1.0, expected: None, tol: 1e-6 }
    }
}

impl OdiBhiCheck {
    fn sides(&self) -> Result<(ProfileParams, ProfileParams), Failure> {
        let e = self.profile.entry()?;
        if !matches!(e, CatalogEntry::Uniform | CatalogEntry::Vanishing) {
            return Err(Failure::Config(format!("odi bhi needs ex221 or ex222, got {}", e.id())));
        }
        let lo = ProfileParams { side: Some(Side::Lower), ..self.profile.clone() };
        let up = ProfileParams { side: Some(Side::Upper), m: Some(BoundaryValue::Value(self.big_m)), ..self.profile.clone() };
        Ok((lo, up))
    }

    fn validate(&self) -> Result<(), Failure> {
        let (lo, up) = self.sides()?;
        lo.validate()?;
        up.validate()
    }

    fn run(&self) -> Result<Outcome, Failure> {
        let (lo, up) = self.sides()?;
        let (_, pl, _) = lo.build()?;
        let (_, pu, _) = up.build()?;
        let c = bhi_constant(&pl, &pu).map_err(rt)?;
        let mut pass = c.a.is_finite() && c.a >= 1.0;
        let mut rep = VerificationReport::new("odi_bhi", true)
            .measure("A", c.a)
            .measure("sup_ratio", c.sup_ratio)
            .measure("slope_ratio", c.slope_ratio)
            .fingerprint_of(&(lo.spec()?, up.spec()?));
        if let Some(e) = self.expected {
            pass &= (c.a - e).abs() <= self.tol;
            rep = rep.measure("expected", e).tolerance("A", self.tol);
        }
        let mut out = Outcome::default();
        out.push(rep.with_pass(pass));
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdCheck {
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub cap_lambda: f64,
    pub n: u32,
    pub expected: Option<f64>,
    pub tol: f64,
}

impl Default for ThresholdCheck {
    fn default() -> Self {
        Self { lambda: 1.0, cap_lambda: 1.0, n: 2, expected: None, tol: 1e-6 }
    }
}

impl ThresholdCheck {
    fn run(&self) -> Result<Outcome, Failure> {
        let alpha = const_rhs_threshold(self.lambda, self.cap_lambda, self.n);
        let mut rep = VerificationReport::new("threshold", alpha.is_finite() && alpha > 0.0).measure("alpha", alpha);
        if let Some(e) = self.expected {
            let pass = rep.pass && (alpha - e).abs() <= self.tol;
            rep = rep.with_pass(pass).measure("expected", e).tolerance("alpha", self.tol);
        }
        let mut out = Outcome::default();
        out.push(rep.fingerprint_of(self));
        Ok(out)
    }
}

/// Strict bracketing `c_low < h_inf(t) / t^e < c_up` of the limiting gradient-power profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerBracketCheck {
    pub k: f64,
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub cap_lambda: f64,
    pub n: u32,
    pub expected_low: Option<f64>,
    pub expected_up: Option<f64>,
    pub tol: f64,
    /// Log-spaced samples on `[10^-decades, 1]`.
    pub samples: usize,
    pub decades: f64,
}

impl Default for PowerBracketCheck {
    fn default() -> Self {
        Self { k: 3.0, lambda: 1.0, cap_lambda: 1.0, n: 2, expected_low: None, expected_up: None, tol: 1e-6, samples: 2000, decades: 8.0 }
    }
}

impl PowerBracketCheck {
    fn run(&self) -> Result<Outcome, Failure> {
        let (c_lo, c_up) = gradient_power_constants(self.k, self.lambda, self.cap_lambda, self.n);
        let spec = CatalogEntry::GradientPowerLimit.spec(Side::Upper, self.n, 1.0, self.lambda, self.cap_lambda, 0.5, self.k, 1.0, 1.0);
        spec.validate().map_err(cfg)?;
        let lim = analytic_profile(&spec, f64::INFINITY).map_err(rt)?;
        let e = (self.k - 2.0) / (self.k - 1.0);
        let (mut qmin, mut qmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let n = self.samples.max(1);
        let mut rows = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let t = 10f64.powf(-self.decades * (1.0 - j as f64 / n as f64));
            let q = lim.value(t) / t.powf(e);
            qmin = qmin.min(q);
            qmax = qmax.max(q);
            rows.push(vec![t, lim.value(t), q]);
        }
        let mut pass = c_lo < qmin && qmax < c_up;
        let mut rep = VerificationReport::new("power_bracket", true)
            .measure("exponent", e)
            .measure("c_low", c_lo)
            .measure("c_up", c_up)
            .measure("ratio_min", qmin)
            .measure("ratio_max", qmax);
        for (name, got, want) in [("c_low", c_lo, self.expected_low), ("c_up", c_up, self.expected_up)] {
            if let Some(w) = want {
                pass &= (got - w).abs() <= self.tol;
                rep = rep.measure(&format!("expected_{name}"), w).tolerance(name, self.tol);
            }
        }
        let mut out = Outcome::default();
        out.push(rep.with_pass(pass).fingerprint_of(self));
        out.file("ratio", rows_csv(&["t", "h", "ratio"], rows)?);
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Barriers and envelopes

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub name: String,
    pub domain: DomainSpec<f64>,
    pub x: P,
    /// Exterior centre anchor; defaults to the foot of `x`.
    #[serde(default)]
    pub w: Option<P>,
}

/// Strict margins of placed barriers over the product placements x profiles.
/// Each profile is checked against the uniform envelope with its own
/// ellipticity and lower-order term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierCheck {
    pub placements: Vec<Placement>,
    pub profiles: Vec<ProfileParams>,
    /// Largest admissible placement certificate for exterior barriers.
    pub gamma_tol: f64,
}

impl Default for BarrierCheck {
    fn default() -> Self {
        let profile = |catalog: &str, side| ProfileParams {
            catalog: catalog.into(),
            side: Some(side),
            r: 0.1,
            cap_lambda: 2.0,
            ..ProfileParams::default()
        };
        Self {
            placements: vec![Placement {
                name: "disk".into(),
                domain: DomainSpec::Disk { center: P::zero(), radius: 1.0 },
                x: P::new(0.95, 0.0),
                w: None,
            }],
            profiles: vec![profile("ex221", Side::Lower), profile("ex221", Side::Upper)],
            gamma_tol: 1e-12,
        }
    }
}

impl BarrierCheck {
    fn validate(&self) -> Result<(), Failure> {
        for p in &self.placements {
            validate_domain(&p.domain)?;
        }
        for p in &self.profiles {
            p.validate()?;
        }
        if self.placements.is_empty() || self.profiles.is_empty() {
            return Err(Failure::Config("barrier check needs placements and profiles".into()));
        }
        Ok(())
    }

    fn run(&self, seed: u64) -> Result<Outcome, Failure> {
        let mut out = Outcome::default();
        let mut rows = Vec::new();
        for pl in &self.placements {
            for (j, pp) in self.profiles.iter().enumerate() {
                let (spec, profile, _) = pp.build()?;
                let mut env = StructuralEnvelope::uniform(pp.lambda, pp.cap_lambda, spec.n, spec.r);
                env.ellipticity = spec.ellipticity;
                match spec.side {
                    Side::Lower => env.phi_plus = spec.phi,
                    Side::Upper => env.phi_minus = spec.phi,
                }
                let mut gamma = f64::NEG_INFINITY;
                let b = match spec.side {
                    Side::Lower => place_interior_barrier(&pl.domain, pl.x, spec.r, profile).map_err(rt)?,
                    Side::Upper => {
                        let w = match pl.w {
                            Some(w) => w,
                            None => pl.domain.nearest_boundary_point(pl.x).map_err(rt)?,
                        };
                        let e = place_exterior_barrier(&pl.domain, pl.x, w, spec.r, profile).map_err(rt)?;
                        gamma = e.gamma_worst;
                        e.barrier
                    }
                };
                let pts = admissible_samples(&b, &pl.domain, seed);
                let m = strict_margin(&b, &env, &pl.domain, &pts).map_err(rt)?;
                let mut rep = margin_report(&format!("{}/{}#{j}", pl.name, pp.catalog), &m);
                if spec.side == Side::Upper {
                    let pass = rep.pass && gamma <= self.gamma_tol;
                    rep = rep
                        .measure("placement_certificate", gamma)
                        .tolerance("placement_certificate", self.gamma_tol)
                        .with_pass(pass);
                }
                rows.push(vec![j as f64, if spec.side == Side::Lower { 0.0 } else { 1.0 }, m.worst_value, m.worst_bound_excess, m.samples as f64]);
                out.push(rep.note(format!("{} {:?} at {}", pp.catalog, spec.side, pl.name)));
            }
        }
        out.file("margins", rows_csv(&["profile", "exterior", "worst_value", "worst_bound_excess", "samples"], rows)?);
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvelopeCheck {
    pub operator: ModelOperator,
    pub envelope: StructuralEnvelope,
    pub domain: DomainSpec<f64>,
    pub lo: P,
    pub hi: P,
    pub count: usize,
}

impl Default for EnvelopeCheck {
    fn default() -> Self {
        Self {
            operator: pucci_plus(1.0, 2.0),
            envelope: StructuralEnvelope::uniform(1.0, 2.0, 2, 1.0),
            domain: DomainSpec::Disk { center: P::zero(), radius: 1.0 },
            lo: P::new(-1.0, -1.0),
            hi: P::new(1.0, 1.0),
            count: 2000,
        }
    }
}

impl EnvelopeCheck {
    fn run(&self, seed: u64) -> Result<Outcome, Failure> {
        let op = prepare(&self.operator, self.lo, self.hi)?;
        let samples = envelope_samples(&self.domain, self.lo, self.hi, self.count, seed);
        let mut out = Outcome::default();
        out.push(envelope_check(&self.envelope, &op, &self.domain, &samples));
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonCheck {
    pub domain: DomainSpec<f64>,
    pub operator: ModelOperator,
    pub h: f64,
    pub tol: f64,
    pub data: Expr,
    pub x: P,
    /// Lower profile placed as an interior barrier at `x`.
    pub profile: ProfileParams,
    pub delta: Option<f64>,
}

impl Default for ComparisonCheck {
    fn default() -> Self {
        Self {
            domain: DomainSpec::HalfDisk { center: P::zero(), radius: 1.0 },
            operator: pucci_plus(1.0, 2.0),
            h: 1.0 / 64.0,
            tol: 1e-9,
            data: expr("x2"),
            x: P::new(0.1, 0.1),
            profile: ProfileParams { r: 0.2, cap_lambda: 2.0, m: Some(BoundaryValue::Value(0.05)), ..ProfileParams::default() },
            delta: None,
        }
    }
}

impl ComparisonCheck {
    fn run(&self) -> Result<Outcome, Failure> {
        let (spec, profile, _) = self.profile.build()?;
        if spec.side != Side::Lower {
            return Err(Failure::Config("comparison places a lower (interior) profile".into()));
        }
        let sol = solve(Region::new(self.domain.clone()), &self.operator, self.h, self.tol, &self.data.func())?;
        let b = place_interior_barrier(&self.domain, self.x, spec.r, profile).map_err(rt)?;
        let delta = self.delta.unwrap_or_else(|| default_delta(&sol));
        let mut out = Outcome::default();
        out.push(comparison_check(&sol, &b, &self.domain, delta).map_err(rt)?);
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Decay and boundary Harnack on grid solutions

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayCheck {
    pub domain: DomainSpec<f64>,
    pub operator: ModelOperator,
    pub h: f64,
    pub tol: f64,
    pub data: Expr,
    pub w: P,
    pub r: f64,
    /// Profile ellipticity; inferred from constant-coefficient operators.
    pub lambda: Option<f64>,
    #[serde(rename = "Lambda")]
    pub cap_lambda: Option<f64>,
    pub delta: Option<f64>,
    /// Largest admissible `delta / h`.
    pub delta_per_h: f64,
    pub write_solution: bool,
}

impl Default for DecayCheck {
    fn default() -> Self {
        Self {
            domain: DomainSpec::HalfDisk { center: P::zero(), radius: 1.0 },
            operator: pucci_plus(1.0, 2.0),
            h: 1.0 / 256.0,
            tol: 1e-8,
            data: expr("x2 * (1 + 0.3 * x1)"),
            w: P::zero(),
            r: 0.125,
            lambda: None,
            cap_lambda: None,
            delta: None,
            delta_per_h: 5.0,
            write_solution: false,
        }
    }
}

fn pair_opt(a: Option<f64>, b: Option<f64>) -> Result<Option<(f64, f64)>, Failure> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        (None, None) => Ok(None),
        _ => Err(Failure::Config("give both `lambda` and `Lambda` or neither".into())),
    }
}

impl DecayCheck {
    fn validate(&self) -> Result<(), Failure> {
        validate_domain(&self.domain)?;
        validate_op(&self.operator)?;
        ellipticity_for(&self.operator, pair_opt(self.lambda, self.cap_lambda)?).map(|_| ())
    }

    fn run(&self) -> Result<Outcome, Failure> {
        let (lambda, cap) = ellipticity_for(&self.operator, pair_opt(self.lambda, self.cap_lambda)?)?;
        let sol = solve(Region::new(self.domain.clone()), &self.operator, self.h, self.tol, &self.data.func())?;
        let bands = decay_bands(&sol, &self.domain, self.w, self.r).map_err(rt)?;
        let (lo, up) = uniform_pair(lambda, cap, self.r, bands.m, bands.big_m)?;
        let delta = self.delta.unwrap_or_else(|| default_delta(&sol));
        let rep = check_decay(&sol, &self.domain, self.w, self.r, &lo, &up, delta).map_err(rt)?;
        let budget = self.delta_per_h * sol.grid.h;
        let pass = rep.pass && delta <= budget;
        let rep = rep
            .measure("band_m", bands.m)
            .measure("band_M", bands.big_m)
            .measure("solver_residual", sol.residual)
            .tolerance("delta_budget", budget)
            .with_pass(pass);
        let mut out = Outcome::default();
        out.push(rep);
        if self.write_solution {
            out.file("solution", solution_csv(&sol)?);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BhiCheck {
    pub domain: DomainSpec<f64>,
    pub operator: ModelOperator,
    pub h: f64,
    pub tol: f64,
    pub data_a: Expr,
    pub data_b: Expr,
    pub w: P,
    pub r: f64,
    pub lambda: Option<f64>,
    #[serde(rename = "Lambda")]
    pub cap_lambda: Option<f64>,
}

impl Default for BhiCheck {
    fn default() -> Self {
        let d = DecayCheck::default();
        Self {
            domain: d.domain,
            operator: d.operator,
            h: d.h,
            tol: d.tol,
            data_a: expr("x2 * (1 + 0.3 * x1)"),
            data_b: expr("x2 * (1 - 0.3 * x1)"),
            w: d.w,
            r: d.r,
            lambda: None,
            cap_lambda: None,
        }
    }
}

impl BhiCheck {
    fn validate(&self) -> Result<(), Failure> {
        validate_domain(&self.domain)?;
        validate_op(&self.operator)?;
        ellipticity_for(&self.operator, pair_opt(self.lambda, self.cap_lambda)?).map(|_| ())
    }

    fn run(&self) -> Result<Outcome, Failure> {
        let (lambda, cap) = ellipticity_for(&self.operator, pair_opt(self.lambda, self.cap_lambda)?)?;
        let region = Region::new(self.domain.clone());
        let a = solve(region.clone(), &self.operator, self.h, self.tol, &self.data_a.func())?;
        let b = solve(region, &self.operator, self.h, self.tol, &self.data_b.func())?;
        let (ba, bb) = (decay_bands(&a, &self.domain, self.w, self.r).map_err(rt)?, decay_bands(&b, &self.domain, self.w, self.r).map_err(rt)?);
        let (lo, up) = uniform_pair(lambda, cap, self.r, ba.m.min(bb.m), ba.big_m.max(bb.big_m))?;
        let band = bhi_band(&lo, &up).map_err(rt)?;
        let mut out = Outcome::default();
        out.push(check_bhi(&a, &b, &self.domain, self.w, self.r, band).map_err(rt)?);
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Quotients, reflection, gradient bound

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondFieldSpec {
    pub g: Expr,
    pub c_l: f64,
    pub c_u: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuotientLemmaCheck {
    pub f: Expr,
    pub second: Option<SecondFieldSpec>,
    pub domain: DomainSpec<f64>,
    pub z: P,
    pub r: f64,
    pub shrink: f64,
    pub c_k: f64,
    pub alpha_k: f64,
    pub pairs: usize,
}

impl Default for QuotientLemmaCheck {
    fn default() -> Self {
        Self {
            f: expr("x2 * x2"),
            second: None,
            domain: DomainSpec::HalfPlane { axis: Axis::Y },
            z: P::zero(),
            r: 1.0,
            shrink: 2.0,
            c_k: 2.0,
            alpha_k: 1.0,
            pairs: HOLDER_PAIRS,
        }
    }
}

impl QuotientLemmaCheck {
    fn run(&self, seed: u64) -> Result<Outcome, Failure> {
        let f = self.f.func();
        let g = self.second.as_ref().map(|s| (s.g.func(), s.c_l, s.c_u));
        let second = g.as_ref().map(|(g, c_l, c_u)| SecondField { g, c_l: *c_l, c_u: *c_u });
        let input = QuotientLemmaInput {
            f: &f,
            domain: &self.domain,
            z: self.z,
            r: self.r,
            shrink: self.shrink,
            c_k: self.c_k,
            alpha_k: self.alpha_k,
            second,
            pairs: self.pairs,
            seed,
        };
        let mut out = Outcome::default();
        out.push(quotient_lemma_check(&input).map_err(rt)?);
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderCheck {
    pub half_width: f64,
    pub op_u: ModelOperator,
    pub data_u: Expr,
    pub op_v: ModelOperator,
    pub data_v: Expr,
    pub hs: Vec<f64>,
    pub tol: f64,
    pub window: Window,
    pub noise_floor: f64,
    /// Relative change of the exponent allowed between the last two levels.
    pub stability: f64,
}

impl Default for HolderCheck {
    fn default() -> Self {
        Self {
            half_width: 1.0,
            op_u: ModelOperator::InfinityLaplace,
            data_u: expr("x2 * (1 + 0.5 * x1)"),
            op_v: ModelOperator::InfinityLaplace,
            data_v: expr("x2 * (1 - 0.3 * x1) + 0.2 * x2 * x2"),
            hs: vec![1.0 / 32.0, 1.0 / 64.0],
            tol: 1e-10,
            window: Window { lo: P::new(-0.5, 1.0 / 32.0), hi: P::new(0.5, 0.5) },
            noise_floor: 1e-7,
            stability: 0.25,
        }
    }
}

impl HolderCheck {
    fn validate(&self) -> Result<(), Failure> {
        validate_op(&self.op_u)?;
        validate_op(&self.op_v)?;
        validate_hs(&self.hs, 2)
    }

    fn run(&self, seed: u64) -> Result<Outcome, Failure> {
        let region = Region::new(half_square(self.half_width));
        let mut out = Outcome::default();
        let mut alphas = Vec::new();
        let mut rows = Vec::new();
        for &h in &self.hs {
            let u = solve(region.clone(), &self.op_u, h, self.tol, &self.data_u.func())?;
            let v = solve(region.clone(), &self.op_v, h, self.tol, &self.data_v.func())?;
            let fu = |x: P| u.at(x);
            let fv = |x: P| v.at(x);
            let est = holder_quotient_estimate(&fu, &fv, self.window, self.noise_floor, seed).map_err(rt)?;
            for (d, inc) in &est.bins {
                rows.push(vec![h, *d, *inc]);
            }
            alphas.push(est.alpha.unwrap_or(f64::NAN));
            out.push(holder_report(&est).measure("h", h));
        }
        let (a, b) = (alphas[alphas.len() - 2], alphas[alphas.len() - 1]);
        out.push(
            VerificationReport::new("holder_refinement", refinement_stable(a, b, self.stability))
                .measure("alpha_coarse", a)
                .measure("alpha_fine", b)
                .tolerance("relative_change", self.stability),
        );
        out.file("bins", rows_csv(&["h", "distance", "max_increment"], rows)?);
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReflectCheck {
    pub operator: ModelOperator,
    pub half_width: f64,
    pub h: f64,
    pub tol: f64,
    pub data: Expr,
    pub write_solution: bool,
}

impl Default for ReflectCheck {
    fn default() -> Self {
        Self {
            operator: ModelOperator::InfinityLaplace,
            half_width: 1.0,
            h: 1.0 / 64.0,
            tol: 1e-10,
            data: expr("x2 * (1 + 0.5 * x1)"),
            write_solution: false,
        }
    }
}

impl ReflectCheck {
    fn run(&self) -> Result<Outcome, Failure> {
        let hw = self.half_width;
        // Certify variable exponents over the reflected square.
        let op = prepare(&self.operator, P::new(-hw, -hw), P::new(hw, hw))?;
        let sol = solve(Region::new(half_square(hw)), &op, self.h, self.tol, &self.data.func())?;
        let ext = schwarz_reflect(&sol).map_err(rt)?;
        let mut out = Outcome::default();
        out.push(reflection_report(&sol, &ext));
        if self.write_solution {
            out.file("extended", solution_csv(&ext)?);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradBoundCheck {
    pub operator: ModelOperator,
    pub half_width: f64,
    pub data: Expr,
    pub hs: Vec<f64>,
    pub tol: f64,
    pub window: Window,
}

impl Default for GradBoundCheck {
    fn default() -> Self {
        Self {
            operator: ModelOperator::InfinityLaplace,
            half_width: 1.0,
            data: expr("x2 * (1 + 0.5 * x1)"),
            hs: vec![1.0 / 32.0, 1.0 / 64.0],
            tol: 1e-10,
            window: Window { lo: P::new(-0.5, 0.0), hi: P::new(0.5, 0.5) },
        }
    }
}

impl GradBoundCheck {
    fn run(&self) -> Result<Outcome, Failure> {
        let region = Region::new(half_square(self.half_width));
        let mut bounds = Vec::new();
        for &h in &self.hs {
            let sol = solve(region.clone(), &self.operator, h, self.tol, &self.data.func())?;
            bounds.push(gradient_bound_check(&sol, 0.0, self.window).map_err(rt)?);
        }
        let n = bounds.len();
        let mut out = Outcome::default();
        out.push(gradient_bound_report(&bounds[n - 2], &bounds[n - 1]));
        let rows = self.hs.iter().zip(&bounds).map(|(h, b)| vec![*h, b.c_meas, b.ratio_min, b.ratio_max, b.nodes as f64]);
        out.file("levels", rows_csv(&["h", "c", "ratio_min", "ratio_max", "nodes"], rows)?);
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Explicit solutions, growth and uniqueness

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResidualLevels {
    pub hs: Vec<f64>,
    pub clip_radius: f64,
    pub inner: f64,
    pub outer: f64,
}

impl Default for ResidualLevels {
    fn default() -> Self {
        Self { hs: vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0], clip_radius: 1.25, inner: 0.5, outer: 1.0 }
    }
}

impl ResidualLevels {
    fn run(&self, id: &str, op: &ModelOperator, region: &Region, u: &dyn Fn(P) -> f64) -> Result<VerificationReport, Failure> {
        let window = |x: P| (self.inner..=self.outer).contains(&x.norm());
        let mut lv = Vec::new();
        for &h in &self.hs {
            lv.push(explicit_residual(op, None, region, h, u, &window).map_err(rt)?);
        }
        Ok(residual_order_report(id, &lv))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectorCheck {
    pub nu: f64,
    pub p: f64,
    pub mesh: usize,
    /// Largest deviation from `cos(nu phi)` allowed when `p = 2`.
    pub cosine_tol: f64,
    /// Discrete residual of `r^k f` on refining grids.
    pub residual: Option<ResidualLevels>,
}

impl Default for SectorCheck {
    fn default() -> Self {
        Self { nu: 2.0, p: 2.0, mesh: 2048, cosine_tol: 1e-6, residual: None }
    }
}

impl SectorCheck {
    fn validate(&self) -> Result<(), Failure> {
        sector_exponent(self.nu, self.p).map_err(cfg)?;
        if self.mesh < 16 {
            return Err(Failure::Config("mesh must be at least 16".into()));
        }
        if let Some(r) = &self.residual {
            validate_hs(&r.hs, 3)?;
        }
        Ok(())
    }

    fn run(&self) -> Result<Outcome, Failure> {
        let s = sector_profile(self.nu, self.p, self.mesh).map_err(rt)?;
        let mut rep = sector_report(&s);
        if self.p == 2.0 {
            let mut dev: f64 = 0.0;
            for j in 0..=1000 {
                let phi = s.half_angle * j as f64 / 1000.0;
                dev = dev.max((s.eval(phi) - (self.nu * phi).cos()).abs());
            }
            let pass = rep.pass && dev <= self.cosine_tol;
            rep = rep.measure("cosine_deviation", dev).tolerance("cosine", self.cosine_tol).with_pass(pass);
        }
        let mut out = Outcome::default();
        out.push(rep);
        if let Some(levels) = &self.residual {
            let region = Region::clipped(
                DomainSpec::Sector { apex: P::zero(), nu: self.nu },
                Clip::Disk { center: P::zero(), radius: levels.clip_radius },
            );
            let u = |x: P| s.solution(P::zero(), x);
            out.push(levels.run("sector_residual", &ModelOperator::PLaplace { p: self.p }, &region, &u)?);
        }
        let rows = (0..s.phi.len()).map(|j| vec![s.phi[j], s.f[j], s.fp[j]]);
        out.file("profile", rows_csv(&["phi", "f", "df"], rows)?);
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlatCheck {
    pub p: f64,
    pub n: u32,
    pub m: u32,
    pub expected: Option<f64>,
    pub tol: f64,
    pub residual: Option<ResidualLevels>,
}

impl Default for FlatCheck {
    fn default() -> Self {
        Self { p: 4.0, n: 3, m: 1, expected: None, tol: 1e-12, residual: Some(ResidualLevels::default()) }
    }
}

impl FlatCheck {
    fn validate(&self) -> Result<(), Failure> {
        flat_exponent(self.p, self.n, self.m).map_err(cfg)?;
        if let Some(r) = &self.residual {
            validate_hs(&r.hs, 3)?;
        }
        Ok(())
    }

    fn run(&self) -> Result<Outcome, Failure> {
        let beta = flat_exponent(self.p, self.n, self.m).map_err(rt)?;
        let mut rep = VerificationReport::new("flat_exponent", beta > 0.0).measure("beta", beta);
        if let Some(e) = self.expected {
            let pass = rep.pass && (beta - e).abs() <= self.tol;
            rep = rep.with_pass(pass).measure("expected", e).tolerance("beta", self.tol);
        }
        let mut out = Outcome::default();
        out.push(rep.fingerprint_of(&(self.p, self.n, self.m)));
        if let Some(levels) = &self.residual {
            let u = flat_solution(beta, self.n, self.m).map_err(rt)?;
            let c = levels.clip_radius;
            let region = Region::clipped(DomainSpec::FlatComplement { n: self.n, m: self.m }, Clip::Box { lo: P::new(-c, -c), hi: P::new(c, c) });
            out.push(levels.run("flat_residual", &ModelOperator::PLaplace { p: self.p }, &region, &u)?);
        }
        Ok(out)
    }
}

/// Residual of a closed-form function under the min-max infinity scheme on the
/// upper half of `[-w, w]^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InfinityResidualCheck {
    pub data: Expr,
    pub h: f64,
    pub half_width: f64,
    pub window: NodeWindow,
    pub tol: f64,
}

impl Default for InfinityResidualCheck {
    fn default() -> Self {
        Self { data: expr("x2"), h: 1.0 / 32.0, half_width: 1.0, window: NodeWindow::All, tol: 1e-12 }
    }
}

impl InfinityResidualCheck {
    fn run(&self) -> Result<Outcome, Failure> {
        let w = self.half_width;
        let region = Region::clipped(DomainSpec::HalfPlane { axis: Axis::Y }, Clip::Box { lo: P::new(-w, -w), hi: P::new(w, w) });
        let u = self.data.func();
        let win = |x: P| self.window.contains(x);
        let r = explicit_residual(&ModelOperator::InfinityLaplace, Some(SchemeId::MinMaxPair), &region, self.h, &u, &win).map_err(rt)?;
        let mut out = Outcome::default();
        out.push(
            VerificationReport::new("infinity_residual", r.max_abs <= self.tol)
                .measure("max_abs", r.max_abs)
                .measure("nodes", r.nodes as f64)
                .measure("h", r.h)
                .tolerance("residual", self.tol)
                .fingerprint_of(&(self.data.source(), self.h, w, &self.window)),
        );
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthCheck {
    pub family: GrowthFamily,
    pub operator: ModelOperator,
    pub radii: Vec<f64>,
    pub h: f64,
    pub x0: P,
    pub tol: f64,
    pub predicted: Option<f64>,
    /// `[nu, p]`: predict `k(nu, p)` instead of giving a number.
    pub predicted_sector: Option<[f64; 2]>,
}

impl Default for GrowthCheck {
    fn default() -> Self {
        Self {
            family: GrowthFamily::HalfPlane,
            operator: ModelOperator::InfinityLaplace,
            radii: vec![2.0, 4.0, 8.0],
            h: 1.0 / 16.0,
            x0: P::new(0.0, 1.0),
            tol: 1e-9,
            predicted: None,
            predicted_sector: None,
        }
    }
}

impl GrowthCheck {
    /// Explicit prediction, else `1` for the half-plane and `k(nu, p)` for a
    /// sector under the Laplace or a constant-p operator.
    fn prediction(&self) -> Result<f64, Failure> {
        match (self.predicted, self.predicted_sector) {
            (Some(v), None) => Ok(v),
            (None, Some([nu, p])) => sector_exponent(nu, p).map_err(cfg),
            (None, None) => match (&self.family, &self.operator) {
                (GrowthFamily::HalfPlane, _) => Ok(1.0),
                (GrowthFamily::Sector { nu }, ModelOperator::Laplace) => sector_exponent(*nu, 2.0).map_err(cfg),
                (GrowthFamily::Sector { nu }, ModelOperator::PLaplace { p }) => sector_exponent(*nu, *p).map_err(cfg),
                _ => Err(Failure::Config("give `predicted` for this family and operator".into())),
            },
            _ => Err(Failure::Config("give at most one of `predicted` and `predicted_sector`".into())),
        }
    }

    fn run(&self) -> Result<Outcome, Failure> {
        let e = self.prediction()?;
        let opts = SolveOptions::default().with_tol(self.tol);
        let samples = harmonic_measure_growth(&self.family, &self.operator, &self.radii, self.h, self.x0, &opts).map_err(rt)?;
        let mut out = Outcome::default();
        out.push(measure_growth(&samples, e).map_err(rt)?);
        out.file("growth", rows_csv(&["R", "M"], samples.iter().map(|(r, m)| vec![*r, *m]))?);
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Truncation {
    /// `Q+_R`.
    HalfSquare,
    /// Sector cut by the disk of radius `R`.
    Sector { nu: f64 },
}

impl Truncation {
    fn region(&self, big_r: f64) -> Region {
        match *self {
            Truncation::HalfSquare => Region::new(half_square(big_r)),
            Truncation::Sector { nu } => {
                Region::clipped(DomainSpec::Sector { apex: P::zero(), nu }, Clip::Disk { center: P::zero(), radius: big_r })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniqueCheck {
    pub truncation: Truncation,
    pub operator: ModelOperator,
    pub radii: Vec<f64>,
    pub h: f64,
    pub tol: f64,
    pub data: Expr,
    pub model: Expr,
    pub anchor: P,
    pub window: NodeWindow,
    /// The data equal a multiple of the model, so the drift must stay at noise level.
    pub exact: bool,
}

impl Default for UniqueCheck {
    fn default() -> Self {
        Self {
            truncation: Truncation::HalfSquare,
            operator: ModelOperator::InfinityLaplace,
            radii: vec![1.0, 2.0, 4.0],
            h: 1.0 / 16.0,
            tol: 1e-11,
            data: expr("3 * x2"),
            model: expr("x2"),
            anchor: P::new(0.0, 0.25),
            window: NodeWindow::Box { lo: P::new(-0.5, 0.0), hi: P::new(0.5, 0.5) },
            exact: true,
        }
    }
}

impl UniqueCheck {
    fn run(&self) -> Result<Outcome, Failure> {
        let model = self.model.func();
        let win = |x: P| self.window.contains(x);
        let mut lv = Vec::new();
        for &big_r in &self.radii {
            let sol = solve(self.truncation.region(big_r), &self.operator, self.h, self.tol, &self.data.func())?;
            lv.push(drift_level(&sol, big_r, &model, self.anchor, &win).map_err(rt)?);
        }
        let mut out = Outcome::default();
        out.push(uniqueness_drift(&lv, self.exact).map_err(rt)?);
        let rows = lv.iter().map(|l| vec![l.truncation, l.c, l.drift, l.noise, l.nodes as f64]);
        out.file("drift", rows_csv(&["R", "c", "drift", "noise", "nodes"], rows)?);
        Ok(out)
    }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckSpec {
    Catalog(CatalogCheck),
    OdiBhi(OdiBhiCheck),
    Threshold(ThresholdCheck),
    PowerBracket(PowerBracketCheck),
    Barrier(BarrierCheck),
    Envelope(EnvelopeCheck),
    Comparison(ComparisonCheck),
    Decay(DecayCheck),
    Bhi(BhiCheck),
    QuotientLemma(QuotientLemmaCheck),
    Holder(HolderCheck),
    Reflect(ReflectCheck),
    Gradbound(GradBoundCheck),
    Sector(SectorCheck),
    Flat(FlatCheck),
    InfinityResidual(InfinityResidualCheck),
    Growth(GrowthCheck),
    Unique(UniqueCheck),
}

impl CheckSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            CheckSpec::Catalog(_) => "catalog",
            CheckSpec::OdiBhi(_) => "odi_bhi",
            CheckSpec::Threshold(_) => "threshold",
            CheckSpec::PowerBracket(_) => "power_bracket",
            CheckSpec::Barrier(_) => "barrier",
            CheckSpec::Envelope(_) => "envelope",
            CheckSpec::Comparison(_) => "comparison",
            CheckSpec::Decay(_) => "decay",
            CheckSpec::Bhi(_) => "bhi",
            CheckSpec::QuotientLemma(_) => "quotient_lemma",
            CheckSpec::Holder(_) => "holder",
            CheckSpec::Reflect(_) => "reflect",
            CheckSpec::Gradbound(_) => "gradbound",
            CheckSpec::Sector(_) => "sector",
            CheckSpec::Flat(_) => "flat",
            CheckSpec::InfinityResidual(_) => "infinity_residual",
            CheckSpec::Growth(_) => "growth",
            CheckSpec::Unique(_) => "unique",
        }
    }

    pub fn topics(&self) -> Vec<Topic> {
        use Topic::*;
        match self {
            CheckSpec::Catalog(c) => {
                let mut t = vec![DecayProfiles, ClosedForms];
                if c.profile.catalog.starts_with("drift") {
                    t.push(DriftInequalities);
                }
                t
            }
            CheckSpec::OdiBhi(_) => vec![BoundaryHarnack, ClosedForms],
            CheckSpec::Threshold(_) | CheckSpec::PowerBracket(_) => vec![ClosedForms],
            CheckSpec::Barrier(b) => {
                let mut t = vec![RadialBarriers, StructuralEnvelope, PucciOperators];
                if b.profiles.iter().any(|p| p.catalog.starts_with("drift")) {
                    t.push(DriftInequalities);
                }
                t
            }
            CheckSpec::Envelope(_) => vec![StructuralEnvelope, PucciOperators],
            CheckSpec::Comparison(_) => vec![Comparison],
            CheckSpec::Decay(_) => vec![DecayProfiles, PucciOperators],
            CheckSpec::Bhi(_) => vec![BoundaryHarnack],
            CheckSpec::QuotientLemma(_) => vec![QuotientLemmas],
            CheckSpec::Holder(_) | CheckSpec::Gradbound(_) => vec![HolderAndGradient],
            CheckSpec::Reflect(_) => vec![Reflection],
            CheckSpec::Sector(_) | CheckSpec::Flat(_) | CheckSpec::InfinityResidual(_) | CheckSpec::Growth(_) | CheckSpec::Unique(_) => {
                vec![MeasuresAndExplicitSolutions]
            }
        }
    }

    /// Cheap consistency checks; failures map to exit code 2.
    pub fn validate(&self) -> Result<(), Failure> {
        match self {
            CheckSpec::Catalog(c) => c.profile.validate(),
            CheckSpec::OdiBhi(c) => c.validate(),
            CheckSpec::Threshold(_) | CheckSpec::PowerBracket(_) | CheckSpec::QuotientLemma(_) | CheckSpec::InfinityResidual(_) => Ok(()),
            CheckSpec::Barrier(c) => c.validate(),
            CheckSpec::Envelope(c) => {
                validate_domain(&c.domain)?;
                validate_op(&c.operator)
            }
            CheckSpec::Comparison(c) => {
                validate_domain(&c.domain)?;
                validate_op(&c.operator)?;
                c.profile.validate()
            }
            CheckSpec::Decay(c) => c.validate(),
            CheckSpec::Bhi(c) => c.validate(),
            CheckSpec::Holder(c) => c.validate(),
            CheckSpec::Reflect(c) => validate_op(&c.operator),
            CheckSpec::Gradbound(c) => {
                validate_op(&c.operator)?;
                validate_hs(&c.hs, 2)
            }
            CheckSpec::Sector(c) => c.validate(),
            CheckSpec::Flat(c) => c.validate(),
            CheckSpec::Growth(c) => {
                validate_op(&c.operator)?;
                c.prediction().map(|_| ())
            }
            CheckSpec::Unique(c) => validate_op(&c.operator),
        }
    }

    pub fn run(&self, seed: u64) -> Result<Outcome, Failure> {
        match self {
            CheckSpec::Catalog(c) => c.run(),
            CheckSpec::OdiBhi(c) => c.run(),
            CheckSpec::Threshold(c) => c.run(),
            CheckSpec::PowerBracket(c) => c.run(),
            CheckSpec::Barrier(c) => c.run(seed),
            CheckSpec::Envelope(c) => c.run(seed),
            CheckSpec::Comparison(c) => c.run(),
            CheckSpec::Decay(c) => c.run(),
            CheckSpec::Bhi(c) => c.run(),
            CheckSpec::QuotientLemma(c) => c.run(seed),
            CheckSpec::Holder(c) => c.run(seed),
            CheckSpec::Reflect(c) => c.run(),
            CheckSpec::Gradbound(c) => c.run(),
            CheckSpec::Sector(c) => c.run(),
            CheckSpec::Flat(c) => c.run(),
            CheckSpec::InfinityResidual(c) => c.run(),
            CheckSpec::Growth(c) => c.run(),
            CheckSpec::Unique(c) => c.run(),
        }
    }
}
