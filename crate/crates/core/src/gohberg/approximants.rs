//! Members of the represented ideal used as approximants of `op(f)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::group::Group;
use crate::linop::{svd_truncations, LinOp, Side};
use crate::symbols::CoronaFilter;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ApproximantKind {
    /// `op(f 1_{W \ V_k})`: finite symbol support.
    Cutoff { level: usize },
    /// Best rank-`r` approximation of the window matrix.
    SvdRank { rank: usize },
}

impl ApproximantKind {
    pub fn label(&self) -> String {
        match self {
            Self::Cutoff { level } => format!("cutoff@{level}"),
            Self::SvdRank { rank } => format!("svd_rank{rank}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Approximant {
    pub kind: ApproximantKind,
    pub op: LinOp,
}

impl Approximant {
    /// Level the approximant belongs to; `None` for level-independent ones.
    pub fn level(&self) -> Option<usize> {
        match self.kind {
            ApproximantKind::Cutoff { level } => Some(level),
            ApproximantKind::SvdRank { .. } => None,
        }
    }
}

/// `op(f 1_{W \ V_k})` from the assembled `op(f)`: the columns `eta in V_k` are zeroed.
pub fn cutoff(group: &Group, a: &LinOp, filter: &CoronaFilter, level: usize) -> Approximant {
    let mask: Vec<Complex64> = (0..group.window_len())
        .map(|j| Complex64::new(if filter.contains(group, level, &group.window_point(j)) { 0.0 } else { 1.0 }, 0.0))
        .collect();
    let op = a.mul(&LinOp::diagonal(mask, Side::Dual)).expect("matching window operator");
    Approximant { kind: ApproximantKind::Cutoff { level }, op }
}

/// Cutoff at `level`, plus rank-`r` SVD truncations for the full corona when
/// the matrix is diagonal or has dimension at most `svd_max_dim`.
pub fn ideal_approximants(
    group: &Group,
    a: &LinOp,
    filter: &CoronaFilter,
    level: usize,
    ranks: &[usize],
    svd_max_dim: usize,
) -> Vec<Approximant> {
    let mut out = vec![cutoff(group, a, filter, level)];
    if filter.is_full_corona() && (a.is_diagonal() || a.dim() <= svd_max_dim) {
        out.extend(svd_ranks(a, ranks));
    }
    out
}

pub fn svd_ranks(a: &LinOp, ranks: &[usize]) -> Vec<Approximant> {
    svd_truncations(a, ranks)
        .into_iter()
        .map(|(rank, op)| Approximant { kind: ApproximantKind::SvdRank { rank }, op })
        .collect()
}
