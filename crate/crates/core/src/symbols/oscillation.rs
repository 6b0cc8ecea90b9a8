//! Finite differences in the dual variable and the limsup functionals along
//! a corona filter.
//!
//! A limsup toward `Omega` is probed at finite scale: level `k` of a sequence
//! is the sup over `V_k ∩ Window`, the last nonempty level is the estimate,
//! and the whole sequence is kept so the trend stays visible.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{dual_add, CoronaFilter, DualFunction, SampledSymbol, Symbol};
use crate::group::{DualPoint, Group};

/// `osc^zeta_psi(xi) = psi(xi zeta) - psi(xi)`.
pub fn dual_osc(group: &Group, psi: &DualFunction, zeta: &DualPoint) -> DualFunction {
    let factors = group.factors().to_vec();
    let zeta = zeta.clone();
    let rule = psi.rule();
    DualFunction::new(format!("osc[{zeta}]{}", psi.label()), move |xi| {
        rule(&dual_add(&factors, xi, &zeta)) - rule(xi)
    })
}

/// `OSC^zeta_f(x, xi) = f(x, xi zeta) - f(x, xi)`.
pub fn symbol_osc(group: &Group, f: &Symbol, zeta: &DualPoint) -> Symbol {
    let factors = group.factors().to_vec();
    let zeta2 = zeta.clone();
    let rule = f.rule();
    Symbol::from_parts(
        format!("OSC[{zeta}]{}", f.label()),
        Arc::new(move |x, xi| rule(x, &dual_add(&factors, xi, &zeta2)) - rule(x, xi)),
        f.is_x_independent(),
    )
}

/// Per-level sups `k -> sup_{V_k ∩ Window} |.|`, `k = 1..=k_max`. Levels
/// whose window intersection is empty are `None`.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSequence {
    pub values: Vec<Option<f64>>,
    /// First maximizing window point per level (enumeration order breaks ties).
    pub witnesses: Vec<Option<DualPoint>>,
}

impl LevelSequence {
    pub fn k_max(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, level: usize) -> Option<f64> {
        self.values.get(level.checked_sub(1)?).copied().flatten()
    }

    /// Deepest nonempty level.
    pub fn deepest_level(&self) -> Option<usize> {
        self.values.iter().rposition(Option::is_some).map(|i| i + 1)
    }

    /// Window estimate of the limsup: the value at the deepest nonempty level.
    pub fn estimate(&self) -> Option<f64> {
        self.deepest_level().and_then(|k| self.value(k))
    }

    pub fn is_nonincreasing(&self) -> bool {
        let present: Vec<f64> = self.values.iter().flatten().copied().collect();
        present.windows(2).all(|w| w[1] <= w[0])
    }
}

fn level_sups(group: &Group, filter: &CoronaFilter, k_max: usize, row: &[(f64, usize)]) -> Vec<Option<(f64, usize)>> {
    (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let mut best: Option<(f64, usize)> = None;
            for (i, r) in row.iter().enumerate() {
                if !filter.contains(group, k, &group.window_point(i)) {
                    continue;
                }
                if best.is_none_or(|(b, _)| r.0 > b) {
                    best = Some((r.0, i));
                }
            }
            best
        })
        .collect()
}

/// `d^Omega(psi)` probed level by level.
pub fn d_omega(group: &Group, psi: &DualFunction, filter: &CoronaFilter, k_max: usize) -> LevelSequence {
    let row: Vec<(f64, usize)> = psi.sample(group).iter().map(|z| (z.norm(), 0)).collect();
    let sups = level_sups(group, filter, k_max, &row);
    LevelSequence {
        values: sups.iter().map(|s| s.map(|(v, _)| v)).collect(),
        witnesses: sups.iter().map(|s| s.map(|(_, i)| group.window_point(i))).collect(),
    }
}

/// `D^Omega(f)` per level, with the witness `(x0, xi_k)`.
#[derive(Debug, Clone, Serialize)]
pub struct DOmegaReport {
    pub sequence: LevelSequence,
    /// Argmax grid index at the deepest level.
    pub x0: Option<usize>,
}

impl DOmegaReport {
    pub fn estimate(&self) -> Option<f64> {
        self.sequence.estimate()
    }
}

/// `D^Omega(f) = limsup_{(x, xi) -> X x Omega} |f(x, xi)|` probed level by level.
pub fn upper_d_omega(group: &Group, f: &SampledSymbol, filter: &CoronaFilter, k_max: usize) -> DOmegaReport {
    let row: Vec<(f64, usize)> = (0..f.window_len()).into_par_iter().map(|i| f.row_sup(i)).collect();
    let sups = level_sups(group, filter, k_max, &row);
    let x0 = sups.iter().rev().flatten().next().map(|&(_, i)| row[i].1);
    DOmegaReport {
        sequence: LevelSequence {
            values: sups.iter().map(|s| s.map(|(v, _)| v)).collect(),
            witnesses: sups.iter().map(|s| s.map(|(_, i)| group.window_point(i))).collect(),
        },
        x0,
    }
}

/// Per-generator decay of `D^Omega(OSC^zeta_f)`.
#[derive(Debug, Clone, Serialize)]
pub struct OscillationReport {
    pub generators: Vec<DualPoint>,
    pub sequences: Vec<LevelSequence>,
    pub tol: f64,
    /// Every generator's final level value is `<= tol`.
    pub consistent: bool,
}

impl OscillationReport {
    pub fn finals(&self) -> Vec<Option<f64>> {
        self.sequences.iter().map(LevelSequence::estimate).collect()
    }

    pub fn worst_final(&self) -> Option<f64> {
        self.finals().into_iter().try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))
    }
}

/// Vanishing-oscillation diagnostic at the current window: the symbol is
/// reported consistent with `VO^Omega` iff every `OSC^zeta_f` has final level
/// value at most `tol`. Levels without window points give no evidence and
/// make the verdict negative.
pub fn vo_diagnostic(
    group: &Group,
    f: &Symbol,
    filter: &CoronaFilter,
    generators: &[DualPoint],
    tol: f64,
    k_max: usize,
) -> OscillationReport {
    let sequences: Vec<LevelSequence> = generators
        .iter()
        .map(|zeta| {
            let osc = symbol_osc(group, f, zeta).sample(group);
            upper_d_omega(group, &osc, filter, k_max).sequence
        })
        .collect();
    let consistent =
        !sequences.is_empty() && sequences.iter().all(|s| s.estimate().is_some_and(|v| v <= tol));
    OscillationReport { generators: generators.to_vec(), sequences, tol, consistent }
}

/// Membership test for the ideal `D^Omega`: `D^Omega(f)` estimate `<= tol`.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipVerdict {
    pub report: DOmegaReport,
    pub tol: f64,
    pub member: bool,
}

pub fn ideal_membership(
    group: &Group,
    f: &SampledSymbol,
    filter: &CoronaFilter,
    k_max: usize,
    tol: f64,
) -> MembershipVerdict {
    let report = upper_d_omega(group, f, filter, k_max);
    let member = report.estimate().is_some_and(|v| v <= tol);
    MembershipVerdict { report, tol, member }
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<Symbol>();
    check::<DualFunction>();
    check::<Complex64>();
}
