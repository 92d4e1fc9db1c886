//! `barrierlab` command line.
//!
//! Exit codes: 0 all requested checks pass, 1 a check failed, 2 config or
//! schema error, 3 runtime failure.

mod checks;
mod expr;
mod runner;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use checks::*;
use runner::ExperimentConfig;

#[derive(Parser)]
#[command(name = "barrierlab", version, about = "Barrier profiles, grid solvers and boundary-decay checks")]
struct Cli {
    /// Output directory for report.json, report.md and CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for quasi-random sampling (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Barrier profiles of the ODI catalog.
    #[command(subcommand)]
    Odi(OdiCmd),
    /// Barrier placement and strict margins.
    #[command(subcommand)]
    Barrier(BarrierCmd),
    /// Grid solutions of Dirichlet problems.
    #[command(subcommand)]
    Pde(PdeCmd),
    /// Single verification checks; without --config the built-in defaults run.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Run every check of an experiment config.
    Suite {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args, Clone)]
struct ProfileFlags {
    /// Catalog id: ex221, ex222, ex223, ex224, ex224-inf, drift-lower, drift-upper.
    #[arg(long)]
    catalog: String,
    #[arg(long, value_parser = ["lower", "upper"])]
    side: Option<String>,
    /// Boundary value h(r); "inf" for the limiting profile.
    #[arg(long)]
    m: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 2)]
    n: u32,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long = "Lambda", default_value_t = 1.0)]
    cap_lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    a: f64,
    #[arg(long, default_value_t = 3.0)]
    k: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    c_omega: f64,
}

impl ProfileFlags {
    fn params(&self) -> Result<ProfileParams, Failure> {
        let side = match self.side.as_deref() {
            Some("upper") => Some(barrierlab::odi::Side::Upper),
            Some(_) => Some(barrierlab::odi::Side::Lower),
            None => None,
        };
        let m = match self.m.as_deref() {
            None => None,
            Some("inf") => Some(BoundaryValue::Rule(BoundaryRule::Infinite)),
            Some(s) => Some(BoundaryValue::Value(s.parse().map_err(|_| Failure::Config(format!("--m: bad number `{s}`")))?)),
        };
        Ok(ProfileParams {
            catalog: self.catalog.clone(),
            side,
            n: self.n,
            r: self.r,
            lambda: self.lambda,
            cap_lambda: self.cap_lambda,
            a: self.a,
            k: self.k,
            mu: self.mu,
            c_omega: self.c_omega,
            m,
            shoot: false,
        })
    }
}

#[derive(Subcommand)]
enum OdiCmd {
    /// Profile, ODI residual and a CSV of (t, h, h', h'').
    Solve {
        #[command(flatten)]
        profile: ProfileFlags,
        /// Shoot on the equality instead of using the closed form.
        #[arg(long)]
        shoot: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Boundary Harnack constant A of the lower/upper pair.
    Bhi {
        #[command(flatten)]
        profile: ProfileFlags,
        #[arg(long = "M", default_value_t = 1.0)]
        big_m: f64,
        #[arg(long)]
        expected: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum BarrierCmd {
    /// Strict margins over placements x profiles.
    Check {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PdeCmd {
    /// Solve and write the node values.
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Lower/upper profile sandwich of a grid solution near a boundary point.
    Decay {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Nodal ratio of two solutions against the profile-pair band.
    Bhi {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Hoelder exponent of the quotient of two solutions vanishing on a flat piece.
    Holder {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Odd reflection of a solution across the flat boundary.
    Reflect {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Exponent k(nu, p) and angular profile of the sector solution.
    Sector {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        mesh: Option<usize>,
    },
    /// Exponent of the solution vanishing on a flat subspace.
    Flat {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        m: Option<u32>,
    },
    /// Growth exponent of the measure of truncated unbounded domains.
    Growth {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Gradient bound |grad u| <= c u / x2 near the flat boundary.
    Gradbound {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Drift of the quotient against a model solution across truncations.
    Unique {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_or_default<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn config_for(cmd: &Cmd) -> Result<ExperimentConfig, Failure> {
    let single = |id: &str, spec: CheckSpec| -> Result<ExperimentConfig, Failure> {
        let cfg = ExperimentConfig::single(id, spec);
        cfg.validate()?;
        Ok(cfg)
    };
    match cmd {
        Cmd::Suite { config } => ExperimentConfig::load(config),
        Cmd::Odi(OdiCmd::Solve { profile, shoot, tol }) => {
            let profile = ProfileParams { shoot: *shoot, ..profile.params()? };
            single("odi-solve", CheckSpec::Catalog(CatalogCheck { profile, tol: *tol, ..CatalogCheck::default() }))
        }
        Cmd::Odi(OdiCmd::Bhi { profile, big_m, expected, tol }) => {
            single("odi-bhi", CheckSpec::OdiBhi(OdiBhiCheck { profile: profile.params()?, big_m: *big_m, expected: *expected, tol: *tol }))
        }
        Cmd::Barrier(BarrierCmd::Check { config }) => single("barrier-check", CheckSpec::Barrier(load_or_default(config.as_deref())?)),
        Cmd::Pde(PdeCmd::Solve { .. }) => unreachable!("handled separately"),
        Cmd::Verify(v) => match v {
            VerifyCmd::Decay { config } => single("decay", CheckSpec::Decay(load_or_default(config.as_deref())?)),
            VerifyCmd::Bhi { config } => single("bhi", CheckSpec::Bhi(load_or_default(config.as_deref())?)),
            VerifyCmd::Holder { config } => single("holder", CheckSpec::Holder(load_or_default(config.as_deref())?)),
            VerifyCmd::Reflect { config } => single("reflect", CheckSpec::Reflect(load_or_default(config.as_deref())?)),
            VerifyCmd::Sector { config, nu, p, mesh } => {
                let mut c: SectorCheck = load_or_default(config.as_deref())?;
                c.nu = nu.unwrap_or(c.nu);
                c.p = p.unwrap_or(c.p);
                c.mesh = mesh.unwrap_or(c.mesh);
                single("sector", CheckSpec::Sector(c))
            }
            VerifyCmd::Flat { config, p, n, m } => {
                let mut c: FlatCheck = load_or_default(config.as_deref())?;
                c.p = p.unwrap_or(c.p);
                c.n = n.unwrap_or(c.n);
                c.m = m.unwrap_or(c.m);
                single("flat", CheckSpec::Flat(c))
            }
            VerifyCmd::Growth { config } => single("growth", CheckSpec::Growth(load_or_default(config.as_deref())?)),
            VerifyCmd::Gradbound { config } => single("gradbound", CheckSpec::Gradbound(load_or_default(config.as_deref())?)),
            VerifyCmd::Unique { config } => single("unique", CheckSpec::Unique(load_or_default(config.as_deref())?)),
        },
    }
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn fail(e: &Failure) -> ExitCode {
    eprintln!("barrierlab: {e}");
    exit(match e {
        Failure::Config(_) => 2,
        Failure::Runtime(_) => 3,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Cmd::Pde(PdeCmd::Solve { config }) = &cli.cmd {
        let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        return match pde::solve(config.as_deref(), &out) {
            Ok(code) => exit(code),
            Err(e) => fail(&e),
        };
    }
    let mut cfg = match config_for(&cli.cmd) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let rep = match runner::run(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if let Err(e) = runner::write_outputs(&rep, &out, cfg.description.as_deref()) {
        return fail(&e);
    }
    for c in &rep.checks {
        let label = match c.status {
            runner::Status::Pass => "PASS",
            runner::Status::Fail => "FAIL",
            runner::Status::KnownRed => "FAIL (known)",
            runner::Status::Error => "ERROR",
        };
        let first = c.reports.first().map(|r| {
            let m: Vec<String> = r.measured.iter().take(4).map(|(k, v)| format!("{k}={v:.6e}")).collect();
            m.join(" ")
        });
        println!("[{label}] {} ({}) {}", c.id, c.kind, c.error.clone().or(first).unwrap_or_default());
    }
    let m = &rep.summary;
    println!("{} pass, {} fail, {} known red, {} error; reports in {}", m.pass, m.fail, m.known_red, m.error, out.display());
    exit(rep.exit_code())
}

mod pde {
    use std::path::Path;

    use barrierlab::grid::{solve_dirichlet, Grid, Method, Region, SchemeId, SolveOptions};
    use barrierlab::pucci::ModelOperator;
    use serde::{Deserialize, Serialize};

    use crate::checks::Failure;
    use crate::expr::Expr;

    #[derive(Clone, Debug, Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    pub struct PdeConfig {
        pub region: Region,
        pub operator: ModelOperator,
        pub h: f64,
        pub tol: f64,
        pub data: Expr,
        pub scheme: Option<SchemeId>,
        pub method: Option<Method>,
        pub max_iter: Option<usize>,
    }

    impl Default for PdeConfig {
        fn default() -> Self {
            Self {
                region: Region::new(barrierlab::geometry::DomainSpec::HalfDisk { center: barrierlab::Point2::zero(), radius: 1.0 }),
                operator: ModelOperator::Laplace,
                h: 1.0 / 64.0,
                tol: 1e-10,
                data: Expr::parse("x2 * (1 + 0.3 * x1)").expect("built-in expression"),
                scheme: None,
                method: None,
                max_iter: None,
            }
        }
    }

    /// Writes `solution.csv` and `solution.json`; exit 0 when converged.
    pub fn solve(config: Option<&Path>, out: &Path) -> Result<i32, Failure> {
        let cfg: PdeConfig = super::load_or_default(config)?;
        cfg.region.domain.validate().map_err(|e| Failure::Config(e.to_string()))?;
        cfg.operator.validate().map_err(|e| Failure::Config(e.to_string()))?;
        let rt = |e: &dyn std::fmt::Display| Failure::Runtime(e.to_string());
        let grid = Grid::new(cfg.region.clone(), cfg.h).map_err(|e| rt(&e))?;
        let mut opts = SolveOptions::default().with_tol(cfg.tol);
        opts.scheme = cfg.scheme;
        if let Some(m) = cfg.method {
            opts.method = m;
        }
        if let Some(n) = cfg.max_iter {
            opts.max_iter = n;
        }
        let f = cfg.data.func();
        let sol = solve_dirichlet(&grid, &cfg.operator, &f, &opts).map_err(|e| rt(&e))?;
        std::fs::create_dir_all(out).map_err(|e| rt(&e))?;
        let mut csv = Vec::new();
        sol.write_csv(&mut csv).map_err(|e| rt(&e))?;
        std::fs::write(out.join("solution.csv"), csv).map_err(|e| rt(&e))?;
        let mut meta = serde_json::to_vec_pretty(&sol.meta()).map_err(|e| rt(&e))?;
        meta.push(b'\n');
        std::fs::write(out.join("solution.json"), meta).map_err(|e| rt(&e))?;
        let m = sol.meta();
        println!(
            "{} on {}x{} nodes: {} iterations, residual {:.3e} (tol {:.1e}), converged {}",
            m.operator, m.nx, m.ny, m.iterations, m.residual, m.tol, m.converged
        );
        Ok(if sol.converged { 0 } else { 1 })
    }
}
