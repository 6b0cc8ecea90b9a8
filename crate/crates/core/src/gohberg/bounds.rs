//! Lower bounds for `||op(f) - L||` over ideal approximants `L`, following the
//! test-vector argument: localize near `x0`, modulate into the filter level,
//! and measure what `op(f) - L` does to the result.

use num_complex::Complex64;
use serde::Serialize;

use super::approximants::Approximant;
use super::vectors::{bump, grid_distance, modulated_translate};
use crate::error::Result;
use crate::fourier::{fourier, SpaceVec};
use crate::group::{dual_norm, DualPoint, Group};
use crate::linop::LinOp;
use crate::symbols::{CoronaFilter, DOmegaReport, SampledSymbol};

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundConfig {
    /// Fixed bump radius; adaptive when `None`.
    pub bump_radius: Option<f64>,
    /// Allowed variation of `|f|` over the bump, relative to the `D` estimate.
    /// Also the relative width of the near-maximizer band.
    pub continuity_fraction: f64,
    pub max_test_vectors: usize,
}

impl Default for LowerBoundConfig {
    fn default() -> Self {
        Self { bump_radius: None, continuity_fraction: 0.05, max_test_vectors: 48 }
    }
}

/// The slack terms of the argument, measured at one level.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ErrorBudget {
    /// `max_t ||op(f) w_t - P_W(f(., xi_t) u_t)|| / ||w_t||`.
    pub freeze: f64,
    /// `max_t max_{y in bump} ||f(y, xi_t)| - |f(x0, xi_t)||`.
    pub continuity: f64,
    /// `min_L max_t ||L w_t|| / ||w_t||` over the candidates.
    pub ideal: f64,
}

impl ErrorBudget {
    pub fn total(&self) -> f64 {
        self.freeze + self.continuity + self.ideal
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelLowerBound {
    pub level: usize,
    /// Certified: `||op(f) - L|| >= value` for every candidate `L` of this level.
    pub value: Option<f64>,
    pub best_candidate: Option<String>,
    pub witness: Option<DualPoint>,
    pub witness_modulus: Option<f64>,
    pub test_points: usize,
    /// Largest share of `||u_t||^2` lost to the window projection.
    pub leak: f64,
    pub budget: ErrorBudget,
}

/// Largest radius such that `|f|` varies by at most `threshold` over the
/// bump, measured against `|f(x0, .)|` on the window points in `levels`.
pub fn adaptive_radius(group: &Group, f: &SampledSymbol, x0: usize, points: &[usize], threshold: f64) -> f64 {
    if f.is_x_independent() {
        return 0.5;
    }
    let mut by_distance: Vec<(f64, usize)> = (0..group.grid_len()).map(|y| (grid_distance(group, y, x0), y)).collect();
    by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut radius = 0.0;
    let mut i = 0;
    while i < by_distance.len() {
        let d = by_distance[i].0;
        let mut j = i;
        let mut ok = true;
        while j < by_distance.len() && by_distance[j].0 == d {
            let y = by_distance[j].1;
            ok &= points.iter().all(|&xi| (f.value(xi, y).norm() - f.value(xi, x0).norm()).abs() <= threshold);
            j += 1;
        }
        if !ok {
            break;
        }
        radius = d;
        i = j;
    }
    if i == by_distance.len() {
        0.5
    } else {
        radius
    }
}

/// Window points of level `k` whose modulus at `x0` is within `band` of the
/// level maximum, in enumeration order, at most `cap` of them.
pub fn near_maximizers(
    group: &Group,
    f: &SampledSymbol,
    filter: &CoronaFilter,
    level: usize,
    x0: usize,
    band: f64,
    cap: usize,
) -> Vec<usize> {
    let pts = filter.level_indices(group, level);
    let top = pts.iter().map(|&i| f.value(i, x0).norm()).fold(f64::NEG_INFINITY, f64::max);
    let mut ranked: Vec<usize> = pts.into_iter().filter(|&i| f.value(i, x0).norm() >= top - band).collect();
    ranked.sort_by(|&a, &b| f.value(b, x0).norm().total_cmp(&f.value(a, x0).norm()).then(a.cmp(&b)));
    ranked.truncate(cap);
    ranked.sort_unstable();
    ranked
}

/// Per-level lower bounds. Approximants tagged with a level are used only at
/// that level; untagged ones at every level. With no candidates the bound is
/// `max_t ||op(f) w_t|| / ||w_t||`.
pub fn lower_bound_estimate(
    group: &Group,
    f: &SampledSymbol,
    a: &LinOp,
    filter: &CoronaFilter,
    d_report: &DOmegaReport,
    candidates: &[Approximant],
    config: &LowerBoundConfig,
) -> Result<Vec<LevelLowerBound>> {
    let k_max = d_report.sequence.k_max();
    let d_hat = d_report.estimate().unwrap_or(0.0);
    let threshold = config.continuity_fraction * d_hat;
    let Some(x0) = d_report.x0 else {
        return Ok((1..=k_max).map(empty_level).collect());
    };

    let mut union: Vec<usize> = Vec::new();
    let mut test_sets = Vec::with_capacity(k_max);
    for level in 1..=k_max {
        let t = near_maximizers(group, f, filter, level, x0, threshold, config.max_test_vectors);
        union.extend(&t);
        test_sets.push(t);
    }
    union.sort_unstable();
    union.dedup();
    let radius = config.bump_radius.unwrap_or_else(|| adaptive_radius(group, f, x0, &union, threshold));
    let base = bump(group, 0, radius);
    let support: Vec<usize> = (0..group.grid_len()).filter(|&y| grid_distance(group, y, x0) <= radius).collect();

    test_sets
        .into_iter()
        .enumerate()
        .map(|(idx, tset)| {
            let level = idx + 1;
            if tset.is_empty() {
                return Ok(empty_level(level));
            }
            let mut leak = 0.0f64;
            let mut budget = ErrorBudget::default();
            // normalized window vectors w_t and op(f) w_t
            let mut probes: Vec<(Vec<Complex64>, Vec<Complex64>)> = Vec::with_capacity(tset.len());
            for &t in &tset {
                let xi = group.window_point(t);
                let u = modulated_translate(group, &base, x0, &xi)?;
                let w = fourier(group, &u)?;
                let nw = dual_norm(&w.0);
                leak = leak.max((1.0 - nw * nw / u.norm().powi(2)).max(0.0));
                let w: Vec<Complex64> = w.0.iter().map(|z| z / nw).collect();
                let aw = a.apply(&w)?;
                let frozen = SpaceVec(f.column(t).iter().zip(&u.0).map(|(p, q)| p * q / nw).collect());
                let fw = fourier(group, &frozen)?;
                let gap = dual_norm(&aw.iter().zip(&fw.0).map(|(p, q)| p - q).collect::<Vec<_>>());
                budget.freeze = budget.freeze.max(gap);
                let m0 = f.value(t, x0).norm();
                for &y in &support {
                    budget.continuity = budget.continuity.max((f.value(t, y).norm() - m0).abs());
                }
                probes.push((w, aw));
            }

            let level_candidates: Vec<&Approximant> =
                candidates.iter().filter(|c| c.level().is_none_or(|l| l == level)).collect();
            let (value, best) = if level_candidates.is_empty() {
                (probes.iter().map(|(_, aw)| dual_norm(aw)).fold(0.0, f64::max), None)
            } else {
                let mut best: Option<(f64, String)> = None;
                let mut ideal = f64::INFINITY;
                for cand in level_candidates {
                    let mut worst = 0.0f64;
                    let mut seen = 0.0f64;
                    for (w, aw) in &probes {
                        let lw = cand.op.apply(w)?;
                        seen = seen.max(dual_norm(&lw));
                        worst = worst.max(dual_norm(&aw.iter().zip(&lw).map(|(p, q)| p - q).collect::<Vec<_>>()));
                    }
                    ideal = ideal.min(seen);
                    if best.as_ref().is_none_or(|(b, _)| worst < *b) {
                        best = Some((worst, cand.kind.label()));
                    }
                }
                budget.ideal = ideal;
                let (v, label) = best.expect("at least one candidate");
                (v, Some(label))
            };
            let witness = *tset.iter().max_by(|&&p, &&q| f.value(p, x0).norm().total_cmp(&f.value(q, x0).norm()).then(q.cmp(&p))).expect("nonempty");
            Ok(LevelLowerBound {
                level,
                value: Some(value),
                best_candidate: best,
                witness: Some(group.window_point(witness)),
                witness_modulus: Some(f.value(witness, x0).norm()),
                test_points: tset.len(),
                leak,
                budget,
            })
        })
        .collect()
}

fn empty_level(level: usize) -> LevelLowerBound {
    LevelLowerBound {
        level,
        value: None,
        best_candidate: None,
        witness: None,
        witness_modulus: None,
        test_points: 0,
        leak: 0.0,
        budget: ErrorBudget::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gohberg::approximants::{cutoff, ideal_approximants, svd_ranks, ApproximantKind};
    use crate::group::GroupSpec;
    use crate::linop::operator_norm;
    use crate::quantize::op_quantize;
    use crate::symbols::{gallery, upper_d_omega, Symbol};

    fn setup(name: &str, m: i64) -> (Group, SampledSymbol, LinOp, CoronaFilter, DOmegaReport) {
        let g = Group::new(GroupSpec::torus(1, m)).unwrap();
        let f = gallery::by_name(name, &g).unwrap().sample(&g);
        let a = op_quantize(&g, &f).unwrap();
        let filter = CoronaFilter::full_corona(&g);
        let d = upper_d_omega(&g, &f, &filter, (m / 2) as usize);
        (g, f, a, filter, d)
    }

    #[test]
    fn sign_multiplier_bounds_reach_one() {
        let (g, f, a, filter, d) = setup("sign", 32);
        let mut cands = svd_ranks(&a, &[0, 1, 4, 16]);
        for k in 1..=16 {
            cands.push(cutoff(&g, &a, &filter, k));
        }
        let lb = lower_bound_estimate(&g, &f, &a, &filter, &d, &cands, &LowerBoundConfig::default()).unwrap();
        for l in &lb {
            assert!((l.value.unwrap() - 1.0).abs() < 1e-12, "{l:?}");
            assert_eq!(l.leak, 0.0);
        }
    }

    #[test]
    fn self_candidate_gives_zero() {
        let (g, f, a, filter, d) = setup("decay", 20);
        let me = Approximant { kind: ApproximantKind::SvdRank { rank: 41 }, op: a.clone() };
        let lb = lower_bound_estimate(&g, &f, &a, &filter, &d, &[me], &LowerBoundConfig::default()).unwrap();
        assert!(lb.iter().all(|l| l.value.unwrap() == 0.0));
    }

    #[test]
    fn no_candidates_gives_plain_norms() {
        let (g, f, a, filter, d) = setup("decay", 20);
        let lb = lower_bound_estimate(&g, &f, &a, &filter, &d, &[], &LowerBoundConfig::default()).unwrap();
        for l in &lb {
            assert!((l.value.unwrap() - 1.0 / (1.0 + l.level as f64)).abs() < 1e-12);
            assert!(l.best_candidate.is_none());
        }
    }

    #[test]
    fn adding_candidates_never_raises_the_bound() {
        let (g, f, a, filter, d) = setup("homogeneous_plus_decay", 24);
        let mut cands = Vec::new();
        let mut prev = [f64::INFINITY; 12];
        for k in 1..=12 {
            cands.extend(ideal_approximants(&g, &a, &filter, k, &[k], 1000));
            let lb = lower_bound_estimate(&g, &f, &a, &filter, &d, &cands, &LowerBoundConfig::default()).unwrap();
            for (p, l) in prev.iter_mut().zip(&lb) {
                assert!(l.value.unwrap() <= *p + 1e-15);
                *p = l.value.unwrap();
            }
        }
    }

    #[test]
    fn bounds_never_exceed_candidate_distances() {
        let g = Group::new(GroupSpec::torus(1, 12)).unwrap();
        let f = gallery::by_name("phase_sign", &g).unwrap().sample(&g);
        let a = op_quantize(&g, &f).unwrap();
        let filter = CoronaFilter::full_corona(&g);
        let d = upper_d_omega(&g, &f, &filter, 6);
        let cands = ideal_approximants(&g, &a, &filter, 3, &[1, 2, 4], 1000);
        let lb = lower_bound_estimate(&g, &f, &a, &filter, &d, &cands, &LowerBoundConfig::default()).unwrap();
        let dist = cands
            .iter()
            .filter(|c| c.level().is_none_or(|l| l == 3))
            .map(|c| operator_norm(&a.sub(&c.op).unwrap(), 1e-13).value)
            .fold(f64::INFINITY, f64::min);
        assert!(lb[2].value.unwrap() <= dist + 1e-8);
    }

    #[test]
    fn adaptive_radius_shrinks_for_x_dependent_modulus() {
        let g = Group::new(GroupSpec::torus(1, 10)).unwrap();
        let f = Symbol::new("bump in x", |x, _| {
            let t = x.coord(0);
            Complex64::new(1.0 + (std::f64::consts::TAU * t).cos(), 0.0)
        })
        .sample(&g);
        let pts: Vec<usize> = (0..g.window_len()).collect();
        let r = adaptive_radius(&g, &f, 0, &pts, 0.1);
        // |f| = 1 + cos(2 pi t) stays within 0.1 of 2 for |t| <= 0.0718
        assert!(r > 0.0 && r < 0.0718 + 1e-12);
        assert!(r >= 1.0 / 21.0 - 1e-12);
        assert_eq!(adaptive_radius(&g, &gallery::by_name("sign", &g).unwrap().sample(&g), 0, &pts, 0.0), 0.5);
    }
}
