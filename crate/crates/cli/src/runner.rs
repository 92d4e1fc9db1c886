//! Experiment configs, parallel execution and report files.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use barrierlab::report::fingerprint;
use barrierlab::VerificationReport;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::{CheckSpec, Failure, Topic};

pub const DEFAULT_SEED: u64 = 7;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub description: Option<String>,
    /// Seed of the quasi-random sampling in every check.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory; the `--out` flag takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub checks: Vec<CheckEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckEntry {
    pub id: String,
    /// Documented limitation: reported red, but does not fail the run.
    #[serde(default)]
    pub known_red: bool,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub spec: CheckSpec,
}

impl ExperimentConfig {
    pub fn single(id: &str, spec: CheckSpec) -> Self {
        Self {
            description: None,
            seed: DEFAULT_SEED,
            output: None,
            checks: vec![CheckEntry { id: id.to_string(), known_red: false, seed: None, spec }],
        }
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let mut ids = BTreeSet::new();
        for c in &self.checks {
            if c.id.is_empty() || !c.id.chars().all(|ch| ch.is_ascii_alphanumeric() || "-_.".contains(ch)) {
                return Err(Failure::Config(format!("check id `{}` must be non-empty [A-Za-z0-9._-]", c.id)));
            }
            if !ids.insert(c.id.as_str()) {
                return Err(Failure::Config(format!("duplicate check id `{}`", c.id)));
            }
            c.spec.validate().map_err(|e| match e {
                Failure::Config(m) | Failure::Runtime(m) => Failure::Config(format!("{}: {m}", c.id)),
            })?;
        }
        if self.checks.is_empty() {
            return Err(Failure::Config("no checks".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    KnownRed,
    Error,
}

#[derive(Debug, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub kind: &'static str,
    pub seed: u64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub topics: Vec<Topic>,
    pub files: Vec<String>,
    pub reports: Vec<VerificationReport>,
    #[serde(skip)]
    payloads: Vec<(String, Vec<u8>)>,
}

#[derive(Debug, Serialize)]
pub struct CoverageRow {
    pub topic: Topic,
    pub title: &'static str,
    pub checks: Vec<String>,
    pub covered: bool,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub known_red: usize,
    pub error: usize,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_fingerprint: String,
    pub seed: u64,
    pub summary: Summary,
    pub coverage: Vec<CoverageRow>,
    pub checks: Vec<CheckRecord>,
}

impl RunReport {
    /// 0 all green (known reds allowed), 1 failed checks, 3 runtime errors.
    pub fn exit_code(&self) -> i32 {
        if self.summary.error > 0 {
            3
        } else if self.summary.fail > 0 {
            1
        } else {
            0
        }
    }
}

fn run_entry(entry: &CheckEntry, global_seed: u64) -> CheckRecord {
    let seed = entry.seed.unwrap_or(global_seed);
    let (status, error, reports, payloads) = match entry.spec.run(seed) {
        Ok(out) => {
            let pass = !out.reports.is_empty() && out.reports.iter().all(|r| r.pass);
            let status = match (pass, entry.known_red) {
                (true, _) => Status::Pass,
                (false, true) => Status::KnownRed,
                (false, false) => Status::Fail,
            };
            (status, None, out.reports, out.files)
        }
        Err(e) => (Status::Error, Some(e.to_string()), Vec::new(), Vec::new()),
    };
    let files = payloads.iter().map(|(name, _)| format!("{}-{name}.csv", entry.id)).collect();
    CheckRecord { id: entry.id.clone(), kind: entry.spec.kind(), seed, status, error, topics: entry.spec.topics(), files, reports, payloads }
}

/// Threads from `BARRIERLAB_THREADS`, if set.
pub fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var("BARRIERLAB_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Config(format!("BARRIERLAB_THREADS must be a positive integer, got `{s}`"))),
        },
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Failure::Runtime(e.to_string()))?;
    let mut checks: Vec<CheckRecord> = pool.install(|| cfg.checks.par_iter().map(|c| run_entry(c, cfg.seed)).collect());
    // Merged by id, so reordering a config does not change the report.
    checks.sort_by(|a, b| a.id.cmp(&b.id));
    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    let summary = Summary { pass: count(Status::Pass), fail: count(Status::Fail), known_red: count(Status::KnownRed), error: count(Status::Error) };
    let coverage = Topic::ALL
        .iter()
        .map(|&t| {
            let ids: Vec<String> = checks.iter().filter(|c| c.topics.contains(&t)).map(|c| c.id.clone()).collect();
            CoverageRow { topic: t, title: t.title(), covered: !ids.is_empty(), checks: ids }
        })
        .collect();
    Ok(RunReport {
        tool: "barrierlab",
        version: env!("CARGO_PKG_VERSION"),
        config_fingerprint: fingerprint(&serde_json::to_string(cfg).unwrap_or_default()),
        seed: cfg.seed,
        summary,
        coverage,
        checks,
    })
}

fn status_label(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::KnownRed => "FAIL (known)",
        Status::Error => "ERROR",
    }
}

fn fmt_value(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-3 && v.abs() < 1e6) {
        format!("{v:.6}")
    } else {
        format!("{v:.3e}")
    }
}

pub fn markdown(rep: &RunReport, description: Option<&str>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# barrierlab report\n");
    if let Some(d) = description {
        let _ = writeln!(s, "{d}\n");
    }
    let _ = writeln!(s, "seed {}, config {}, version {}\n", rep.seed, rep.config_fingerprint, rep.version);
    let m = &rep.summary;
    let _ = writeln!(s, "{} pass, {} fail, {} known red, {} error\n", m.pass, m.fail, m.known_red, m.error);
    let _ = writeln!(s, "## Checks\n\n| id | kind | status | reports |\n|---|---|---|---|");
    for c in &rep.checks {
        let green = c.reports.iter().filter(|r| r.pass).count();
        let _ = writeln!(s, "| {} | {} | {} | {}/{} |", c.id, c.kind, status_label(c.status), green, c.reports.len());
    }
    let _ = writeln!(s, "\n## Coverage\n\n| topic | checks |\n|---|---|");
    for row in &rep.coverage {
        let checks = if row.checks.is_empty() { "not covered".to_string() } else { row.checks.join(", ") };
        let _ = writeln!(s, "| {} | {} |", row.title, checks);
    }
    let _ = writeln!(s, "\n## Details");
    for c in &rep.checks {
        let _ = writeln!(s, "\n### {} ({})\n", c.id, status_label(c.status));
        if let Some(e) = &c.error {
            let _ = writeln!(s, "error: {e}");
        }
        for r in &c.reports {
            let measured: Vec<String> = r.measured.iter().map(|(k, v)| format!("{k} {}", fmt_value(*v))).collect();
            let tol: Vec<String> = r.tolerances.iter().map(|(k, v)| format!("{k} {}", fmt_value(*v))).collect();
            let _ = write!(s, "- `{}` {}: {}", r.check_id, if r.pass { "pass" } else { "fail" }, measured.join(", "));
            if !tol.is_empty() {
                let _ = write!(s, "; tolerances {}", tol.join(", "));
            }
            for n in &r.notes {
                let _ = write!(s, "; {n}");
            }
            let _ = writeln!(s);
        }
        for f in &c.files {
            let _ = writeln!(s, "- file `{f}`");
        }
    }
    s
}

/// Writes through a temporary file and a rename, so readers never see partial output.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

pub fn write_outputs(rep: &RunReport, dir: &Path, description: Option<&str>) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Runtime(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for c in &rep.checks {
        for ((_, bytes), name) in c.payloads.iter().zip(&c.files) {
            write_atomic(&dir.join(name), bytes).map_err(io)?;
        }
    }
    let mut json = serde_json::to_vec_pretty(rep).map_err(|e| Failure::Runtime(e.to_string()))?;
    json.push(b'\n');
    write_atomic(&dir.join("report.json"), &json).map_err(io)?;
    write_atomic(&dir.join("report.md"), markdown(rep, description).as_bytes()).map_err(io)?;
    Ok(())
}
