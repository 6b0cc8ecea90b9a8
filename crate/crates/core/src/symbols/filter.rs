//! Corona filters: closed invariant subsets `Omega` of the corona of the
//! dual, presented by a nested family of neighborhood predicates
//! `V_1 ⊇ V_2 ⊇ ...` restricted to the finite part of the dual.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{DualPoint, Group};

/// Built-in neighborhood families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterKind {
    /// `V_k = { |xi|_inf >= k }`: the whole corona, whose ideal is the compacts.
    FullCorona,
    /// `V_k = { |xi| >= k, angle(xi, d) <= half_angle + 1/k for some d }`.
    Cone { directions: Vec<Vec<f64>>, half_angle: f64 },
    Union { parts: Vec<FilterKind> },
    Intersection { parts: Vec<FilterKind> },
}

impl FilterKind {
    fn contains(&self, group: &Group, level: usize, xi: &DualPoint) -> bool {
        match self {
            FilterKind::FullCorona => level >= 1 && group.sup_norm(xi) >= level as i64,
            FilterKind::Cone { directions, half_angle } => {
                if level == 0 {
                    return false;
                }
                let v = group.torus_part(xi);
                let r = group.euclid_norm(xi);
                if r < level as f64 || r == 0.0 {
                    return false;
                }
                let slack = half_angle + 1.0 / level as f64;
                directions.iter().any(|d| {
                    let dn = d.iter().map(|c| c * c).sum::<f64>().sqrt();
                    let dot: f64 = v.iter().zip(d).map(|(&a, b)| a as f64 * b).sum();
                    let cos = (dot / (r * dn)).clamp(-1.0, 1.0);
                    cos.acos() <= slack + 1e-12
                })
            }
            FilterKind::Union { parts } => parts.iter().any(|p| p.contains(group, level, xi)),
            FilterKind::Intersection { parts } => parts.iter().all(|p| p.contains(group, level, xi)),
        }
    }

    fn validate(&self, group: &Group) -> Result<()> {
        match self {
            FilterKind::FullCorona => Ok(()),
            FilterKind::Cone { directions, half_angle } => {
                if directions.is_empty() {
                    return Err(Error::InvalidSpec("cone filter needs at least one direction".into()));
                }
                if half_angle.is_nan() || *half_angle < 0.0 {
                    return Err(Error::InvalidSpec("cone half angle must be nonnegative".into()));
                }
                for d in directions {
                    if d.len() != group.torus_rank() {
                        return Err(Error::DimensionMismatch { expected: group.torus_rank(), got: d.len() });
                    }
                    if d.iter().all(|c| *c == 0.0) {
                        return Err(Error::InvalidSpec("cone direction must be nonzero".into()));
                    }
                }
                Ok(())
            }
            FilterKind::Union { parts } | FilterKind::Intersection { parts } => {
                parts.iter().try_for_each(|p| p.validate(group))
            }
        }
    }
}

type LevelPredicate = Arc<dyn Fn(usize, &DualPoint) -> bool + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Builtin(FilterKind),
    Custom(LevelPredicate),
}

/// An operational model of `Omega`: level predicates plus the generators used
/// to test translation compatibility.
#[derive(Clone)]
pub struct CoronaFilter {
    name: String,
    shape: Shape,
    generators: Vec<DualPoint>,
}

impl fmt::Debug for CoronaFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("CoronaFilter");
        d.field("name", &self.name);
        if let Shape::Builtin(k) = &self.shape {
            d.field("kind", k);
        }
        d.field("generators", &self.generators).finish()
    }
}

impl CoronaFilter {
    pub fn builtin(name: impl Into<String>, kind: FilterKind, generators: Vec<DualPoint>) -> Self {
        Self { name: name.into(), shape: Shape::Builtin(kind), generators }
    }

    /// Full corona with the default unit generators of the group.
    pub fn full_corona(group: &Group) -> Self {
        Self::builtin("full_corona", FilterKind::FullCorona, group.default_generators())
    }

    pub fn cone(group: &Group, directions: Vec<Vec<f64>>, half_angle: f64) -> Self {
        Self::builtin("cone", FilterKind::Cone { directions, half_angle }, group.default_generators())
    }

    /// A user-supplied predicate family. Nesting and invariance are not
    /// assumed; see [`CoronaFilter::check_nesting`] and
    /// [`CoronaFilter::check_invariance`].
    pub fn custom(
        name: impl Into<String>,
        predicate: impl Fn(usize, &DualPoint) -> bool + Send + Sync + 'static,
        generators: Vec<DualPoint>,
    ) -> Self {
        Self { name: name.into(), shape: Shape::Custom(Arc::new(predicate)), generators }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> Option<&FilterKind> {
        match &self.shape {
            Shape::Builtin(k) => Some(k),
            Shape::Custom(_) => None,
        }
    }

    pub fn is_full_corona(&self) -> bool {
        matches!(self.shape, Shape::Builtin(FilterKind::FullCorona))
    }

    pub fn generators(&self) -> &[DualPoint] {
        &self.generators
    }

    pub fn with_generators(mut self, generators: Vec<DualPoint>) -> Self {
        self.generators = generators;
        self
    }

    pub fn validate(&self, group: &Group) -> Result<()> {
        if let Shape::Builtin(k) = &self.shape {
            k.validate(group)?;
        }
        for g in &self.generators {
            if g.0.len() != group.rank() {
                return Err(Error::DimensionMismatch { expected: group.rank(), got: g.0.len() });
            }
        }
        Ok(())
    }

    /// Whether `xi` belongs to `V_level`.
    pub fn contains(&self, group: &Group, level: usize, xi: &DualPoint) -> bool {
        match &self.shape {
            Shape::Builtin(k) => k.contains(group, level, xi),
            Shape::Custom(p) => p(level, xi),
        }
    }

    /// Window indices of `V_level ∩ Window`, in enumeration order.
    pub fn level_indices(&self, group: &Group, level: usize) -> Vec<usize> {
        (0..group.window_len()).filter(|&i| self.contains(group, level, &group.window_point(i))).collect()
    }

    /// `V_{k+1} ⊆ V_k` on the window for `k < k_max`.
    pub fn check_nesting(&self, group: &Group, k_max: usize) -> bool {
        (0..group.window_len()).all(|i| {
            let xi = group.window_point(i);
            (1..k_max).all(|k| !self.contains(group, k + 1, &xi) || self.contains(group, k, &xi))
        })
    }

    /// For each generator `zeta` and level `k`, the smallest `k' >= k` (up to
    /// `search_max`) such that `V_{k'} ∩ Window` is nonempty and every `xi` in
    /// it has `xi zeta ∈ V_k`.
    pub fn check_invariance(&self, group: &Group, levels: usize, search_max: usize) -> InvarianceReport {
        let members: Vec<Vec<usize>> = (0..=search_max).map(|k| self.level_indices(group, k)).collect();
        let witnesses = self
            .generators
            .iter()
            .map(|zeta| {
                (1..=levels)
                    .map(|k| {
                        (k..=search_max).find(|&kp| {
                            !members[kp].is_empty()
                                && members[kp].iter().all(|&i| {
                                    let moved = group.translate_unchecked(&group.window_point(i), zeta);
                                    self.contains(group, k, &moved)
                                })
                        })
                    })
                    .collect()
            })
            .collect();
        InvarianceReport { generators: self.generators.clone(), witnesses }
    }
}

/// Result of the empirical translation-compatibility check.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub generators: Vec<DualPoint>,
    /// `witnesses[g][k-1]`: the level `k'` found for generator `g` and level `k`.
    pub witnesses: Vec<Vec<Option<usize>>>,
}

impl InvarianceReport {
    pub fn is_compatible(&self) -> bool {
        self.witnesses.iter().all(|w| w.iter().all(Option::is_some))
    }
}
