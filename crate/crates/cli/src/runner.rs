//! Batch execution of an experiment config.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use psido_core::gohberg::{sandwich, SandwichReport, Verdict};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig};

pub const WORKERS_ENV: &str = "PSIDO_WORKERS";
pub const DEFAULT_OUT_DIR: &str = "psido-out";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("worker pool: {0}")]
    Pool(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// One row of the run summary.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub symbol: String,
    pub filter: String,
    pub window: i64,
    /// `PASS`, `FAIL`, `SKIP`, or `ERROR` when the computation itself failed.
    pub verdict: String,
    pub d_estimate: Option<f64>,
    pub lower_final: Option<f64>,
    pub upper_final: Option<f64>,
    pub detail: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub outcomes: Vec<Outcome>,
}

impl RunSummary {
    /// 0 iff every verdict is PASS or SKIP.
    pub fn exit_code(&self) -> i32 {
        if self.outcomes.iter().all(|o| o.verdict == "PASS" || o.verdict == "SKIP") {
            0
        } else {
            1
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("symbol,filter,window,verdict,d_estimate,lower_final,upper_final\n");
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
        for o in &self.outcomes {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                o.symbol,
                o.filter,
                o.window,
                o.verdict,
                cell(o.d_estimate),
                cell(o.lower_final),
                cell(o.upper_final)
            );
        }
        out
    }
}

/// Stem of the per-experiment artifacts.
pub fn artifact_stem(symbol: &str, filter: &str, window: i64) -> String {
    format!("{symbol}__{filter}__M{window}")
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), RunError> {
    let io = |source| RunError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Worker cap from the option or the environment; `None` leaves rayon's default.
pub fn worker_count(explicit: Option<usize>) -> Result<Option<usize>, RunError> {
    if let Some(n) = explicit {
        return Ok(Some(n.max(1)));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map(|n| Some(n.max(1)))
            .map_err(|_| RunError::Pool(format!("{WORKERS_ENV}={v} is not a positive integer"))),
        _ => Ok(None),
    }
}

struct Job {
    symbol: usize,
    filter: usize,
    window: i64,
}

fn run_job(cfg: &ExperimentConfig, job: &Job, seed: u64) -> Result<SandwichReport, String> {
    let group = cfg.group_at(job.window).map_err(|e| e.to_string())?;
    let f = cfg.symbols[job.symbol].build(&group).map_err(|e| e.to_string())?;
    let filter = cfg.filters[job.filter].build(&group).map_err(|e| e.to_string())?;
    sandwich(&group, &f, &filter, &cfg.sandwich_config(seed)).map_err(|e| e.to_string())
}

/// Runs every (symbol, filter, window) triple and writes one JSON and one CSV
/// per triple plus `summary.csv`.
pub fn run_config(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary, RunError> {
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    std::fs::create_dir_all(&out_dir).map_err(|source| RunError::Io { path: out_dir.clone(), source })?;
    let seed = opts.seed.unwrap_or(cfg.seed);

    let mut jobs = Vec::new();
    for symbol in 0..cfg.symbols.len() {
        for filter in 0..cfg.filters.len() {
            for &window in &cfg.schedule {
                jobs.push(Job { symbol, filter, window });
            }
        }
    }

    let execute = || -> Vec<Result<Outcome, RunError>> {
        jobs.par_iter()
            .map(|job| {
                let symbol = cfg.symbols[job.symbol].label();
                let filter = cfg.filters[job.filter].label();
                let stem = artifact_stem(&symbol, &filter, job.window);
                match run_job(cfg, job, seed) {
                    Ok(report) => {
                        write_atomic(&out_dir.join(format!("{stem}.json")), report.to_json().as_bytes())?;
                        write_atomic(&out_dir.join(format!("{stem}.csv")), report.to_csv().as_bytes())?;
                        let detail = (report.verdict != Verdict::Pass).then(|| report.notes.join("; "));
                        Ok(Outcome {
                            symbol,
                            filter,
                            window: job.window,
                            verdict: report.verdict.as_str().to_string(),
                            d_estimate: report.d_estimate,
                            lower_final: report.lower_final,
                            upper_final: report.upper_final,
                            detail,
                        })
                    }
                    Err(msg) => Ok(Outcome {
                        symbol,
                        filter,
                        window: job.window,
                        verdict: "ERROR".into(),
                        d_estimate: None,
                        lower_final: None,
                        upper_final: None,
                        detail: Some(msg),
                    }),
                }
            })
            .collect()
    };

    let results = match worker_count(opts.workers)? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Pool(e.to_string()))?
            .install(execute),
        None => execute(),
    };
    let outcomes = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let summary = RunSummary { out_dir: out_dir.clone(), outcomes };
    write_atomic(&out_dir.join("summary.csv"), summary.to_csv().as_bytes())?;
    Ok(summary)
}

/// Loads, validates and runs the config at `path`.
pub fn run_path(path: &Path, opts: &RunOptions) -> Result<RunSummary, RunError> {
    let cfg = ExperimentConfig::load(path)?;
    run_config(&cfg, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(schedule: &str) -> ExperimentConfig {
        let text = format!(
            r#"{{"group": {{"factors": [{{"torus": {{"grid": 3, "window": 1}}}}]}},
                "symbols": [{{"name": "sign"}}, {{"name": "alternating"}}],
                "filters": [{{"kind": "full_corona"}}],
                "schedule": {schedule}}}"#
        );
        ExperimentConfig::parse(&text, Path::new("t.json")).unwrap()
    }

    #[test]
    fn writes_artifacts_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions { out_dir: Some(dir.path().to_path_buf()), workers: Some(2), ..Default::default() };
        let summary = run_config(&config("[8, 12]"), &opts).unwrap();
        assert_eq!(summary.outcomes.len(), 4);
        assert_eq!(summary.exit_code(), 0);
        let verdicts: Vec<&str> = summary.outcomes.iter().map(|o| o.verdict.as_str()).collect();
        assert_eq!(verdicts, ["PASS", "PASS", "SKIP", "SKIP"]);
        for stem in ["sign__full_corona__M8", "alternating__full_corona__M12"] {
            assert!(dir.path().join(format!("{stem}.csv")).is_file());
            assert!(dir.path().join(format!("{stem}.json")).is_file());
        }
        let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().nth(1).unwrap().starts_with("sign,full_corona,8,PASS,"));
    }

    #[test]
    fn failing_outcome_sets_exit_code() {
        let mut s = RunSummary { out_dir: PathBuf::new(), outcomes: vec![] };
        assert_eq!(s.exit_code(), 0);
        s.outcomes.push(Outcome {
            symbol: "a".into(),
            filter: "b".into(),
            window: 1,
            verdict: "ERROR".into(),
            d_estimate: None,
            lower_final: None,
            upper_final: None,
            detail: None,
        });
        assert_eq!(s.exit_code(), 1);
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
