//! Lower and upper distance bounds side by side, with a verdict.

use std::fmt::Write as _;

use serde::Serialize;

use super::approximants::{cutoff, svd_ranks, Approximant};
use super::bounds::{lower_bound_estimate, ErrorBudget, LowerBoundConfig};
use crate::error::Result;
use crate::group::{DualPoint, Group};
use crate::linop::{operator_norm_seeded, NORM_SEED};
use crate::quantize::op_quantize;
use crate::symbols::{upper_d_omega, vo_diagnostic, CoronaFilter, OscillationReport, Symbol};

#[derive(Debug, Clone, Serialize)]
pub struct SandwichConfig {
    /// Deepest level; defaults to `level_fraction` times the smallest torus window radius.
    pub k_max: Option<usize>,
    pub level_fraction: f64,
    pub tol_lower: f64,
    pub tol_num: f64,
    pub vo_tol: f64,
    pub norm_tol: f64,
    pub svd_ranks: Vec<usize>,
    pub svd_max_dim: usize,
    pub lower: LowerBoundConfig,
    /// Start-vector seed for power iteration.
    pub seed: u64,
}

impl Default for SandwichConfig {
    fn default() -> Self {
        Self {
            k_max: None,
            level_fraction: 0.5,
            tol_lower: 0.05,
            tol_num: 1e-8,
            vo_tol: 1e-2,
            norm_tol: 1e-12,
            svd_ranks: vec![0, 1, 2, 4, 8, 16],
            svd_max_dim: 1200,
            lower: LowerBoundConfig::default(),
            seed: NORM_SEED,
        }
    }
}

impl SandwichConfig {
    pub fn levels(&self, group: &Group) -> usize {
        self.k_max
            .unwrap_or_else(|| ((self.level_fraction * group.min_window_radius() as f64).floor() as usize).max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// The vanishing-oscillation hypothesis is not met at this window.
    Skip,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproximantNorm {
    pub label: String,
    pub value: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichLevel {
    pub level: usize,
    pub d_value: Option<f64>,
    pub d_witness: Option<DualPoint>,
    pub lower: Option<f64>,
    pub lower_candidate: Option<String>,
    pub upper: Option<f64>,
    pub upper_candidate: Option<String>,
    pub approximants: Vec<ApproximantNorm>,
    pub test_points: usize,
    pub leak: f64,
    pub budget: ErrorBudget,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub symbol: String,
    pub filter: String,
    pub window_radius: i64,
    pub k_max: usize,
    pub x0: Option<usize>,
    pub d_estimate: Option<f64>,
    pub lower_final: Option<f64>,
    pub upper_final: Option<f64>,
    pub levels: Vec<SandwichLevel>,
    pub vo: OscillationReport,
    pub verdict: Verdict,
    /// `lower_final - (d_estimate - tol_lower)`.
    pub lower_margin: Option<f64>,
    /// `min_k (upper_k + tol_num - lower_k)`.
    pub sandwich_margin: Option<f64>,
    pub notes: Vec<String>,
}

impl SandwichReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `level,d_est,lower,upper`, empty fields for absent values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,d_est,lower,upper\n");
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
        for l in &self.levels {
            let _ = writeln!(out, "{},{},{},{}", l.level, cell(l.d_value), cell(l.lower), cell(l.upper));
        }
        out
    }
}

/// Runs the diagnostics and both bounds for `f` toward the filter.
pub fn sandwich(group: &Group, f: &Symbol, filter: &CoronaFilter, config: &SandwichConfig) -> Result<SandwichReport> {
    let k_max = config.levels(group);
    let generators: Vec<DualPoint> =
        if filter.generators().is_empty() { group.default_generators() } else { filter.generators().to_vec() };
    let vo = vo_diagnostic(group, f, filter, &generators, config.vo_tol, k_max);
    let sampled = f.sample(group);
    let d = upper_d_omega(group, &sampled, filter, k_max);
    let mut notes = vec![
        "upper bounds minimize over the constructed approximants only and may exceed the true distance".to_string(),
    ];

    let mut report = SandwichReport {
        symbol: f.label().to_string(),
        filter: filter.name().to_string(),
        window_radius: group.min_window_radius(),
        k_max,
        x0: d.x0,
        d_estimate: d.estimate(),
        lower_final: None,
        upper_final: None,
        levels: Vec::new(),
        vo,
        verdict: Verdict::Skip,
        lower_margin: None,
        sandwich_margin: None,
        notes: Vec::new(),
    };
    if !report.vo.consistent {
        notes.push(format!(
            "vanishing oscillation not observed at this window (worst final {:?} > tol {}); no verdict",
            report.vo.worst_final(),
            config.vo_tol
        ));
        report.notes = notes;
        return Ok(report);
    }
    if d.sequence.deepest_level().is_none() {
        notes.push("no filter level meets the window; no verdict".into());
        report.notes = notes;
        return Ok(report);
    }

    let a = op_quantize(group, &sampled)?;
    let mut candidates: Vec<Approximant> = Vec::new();
    if filter.is_full_corona() {
        // A rank at least the count of window points outside the deepest
        // level could reproduce the operator on every probed level.
        let room = a.dim() - filter.level_indices(group, k_max).len();
        let ranks: Vec<usize> = config.svd_ranks.iter().copied().filter(|&r| r < room).collect();
        if ranks.len() < config.svd_ranks.len() {
            notes.push(format!("svd ranks >= {room} dropped: they would cover the deepest level"));
        }
        if a.is_diagonal() || a.dim() <= config.svd_max_dim {
            candidates.extend(svd_ranks(&a, &ranks));
        } else {
            notes.push(format!("window dimension {} above svd_max_dim; cutoff approximants only", a.dim()));
        }
    }
    for k in 1..=k_max {
        candidates.push(cutoff(group, &a, filter, k));
    }
    let lower = lower_bound_estimate(group, &sampled, &a, filter, &d, &candidates, &config.lower)?;

    let mut levels = Vec::with_capacity(k_max);
    for (k, lb) in (1..=k_max).zip(lower) {
        let d_value = d.sequence.value(k);
        let mut approximants = Vec::new();
        let mut upper: Option<(f64, String)> = None;
        if d_value.is_some() {
            for cand in candidates.iter().filter(|c| c.level().is_none_or(|l| l == k)) {
                let est = operator_norm_seeded(&a.sub(&cand.op)?, config.norm_tol, config.seed);
                if upper.as_ref().is_none_or(|(u, _)| est.value < *u) {
                    upper = Some((est.value, cand.kind.label()));
                }
                approximants.push(ApproximantNorm { label: cand.kind.label(), value: est.value, converged: est.converged });
            }
        }
        levels.push(SandwichLevel {
            level: k,
            d_value,
            d_witness: d.sequence.witnesses[k - 1].clone(),
            lower: lb.value,
            lower_candidate: lb.best_candidate,
            upper: upper.as_ref().map(|u| u.0),
            upper_candidate: upper.map(|u| u.1),
            approximants,
            test_points: lb.test_points,
            leak: lb.leak,
            budget: lb.budget,
        });
    }

    let deepest = d.sequence.deepest_level().expect("checked above");
    let last = &levels[deepest - 1];
    report.lower_final = last.lower;
    report.upper_final = last.upper;
    report.lower_margin = match (last.lower, report.d_estimate) {
        (Some(l), Some(dv)) => Some(l - (dv - config.tol_lower)),
        _ => None,
    };
    report.sandwich_margin = levels
        .iter()
        .filter_map(|l| Some(l.upper? + config.tol_num - l.lower?))
        .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.min(m))));
    let lower_ok = report.lower_margin.is_some_and(|m| m >= 0.0);
    let ordered = report.sandwich_margin.is_some_and(|m| m >= 0.0);
    report.verdict = if lower_ok && ordered { Verdict::Pass } else { Verdict::Fail };
    if !lower_ok {
        notes.push("final lower bound falls short of the D estimate minus tol_lower".into());
    }
    if !ordered {
        notes.push("a lower bound exceeds its upper bound".into());
    }
    if levels.iter().flat_map(|l| &l.approximants).any(|n| !n.converged) {
        notes.push("some operator norms did not converge; best estimates reported".into());
    }
    report.levels = levels;
    report.notes = notes;
    Ok(report)
}
