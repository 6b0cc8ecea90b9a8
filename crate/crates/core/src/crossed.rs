//! The crossed product `Xi x| l^inf(Xi)` cut down to the window.
//!
//! An element is a finite family of fibers `zeta -> Psi(xi, zeta)`. Fibers are
//! compressed to the window: `Psi(xi, zeta)` is kept only when both `zeta`
//! and `xi zeta` lie in the window and is zero elsewhere. On such elements
//! `sch` is a bijection onto window matrices and composition, involution and
//! the bridge to symbols hold exactly.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{frequency_slot, grid_coefficients};
use crate::group::{DualPoint, Group};
use crate::linop::{LinOp, Side};
use crate::symbols::{DualFunction, SampledSymbol, Symbol};

#[derive(Debug, Clone, PartialEq)]
pub struct CrossedElement {
    window_len: usize,
    fibers: BTreeMap<DualPoint, Vec<Complex64>>,
}

impl CrossedElement {
    /// Builds an element from fiber tables on the window. Repeated support
    /// points are summed.
    pub fn from_fibers(group: &Group, entries: Vec<(DualPoint, Vec<Complex64>)>) -> Result<Self> {
        let mut fibers: BTreeMap<DualPoint, Vec<Complex64>> = BTreeMap::new();
        for (a, values) in entries {
            if values.len() != group.window_len() {
                return Err(Error::ShapeMismatch { expected: group.window_len(), got: values.len() });
            }
            let a = group.dual_point(&a.0)?;
            if group.window_index(&a).is_none() || group.window_index(&group.negate_unchecked(&a)).is_none() {
                return Err(Error::OutsideWindow(format!("support point {a}")));
            }
            let slot = fibers.entry(a.clone()).or_insert_with(|| vec![Complex64::new(0.0, 0.0); values.len()]);
            for (i, (s, v)) in slot.iter_mut().zip(values).enumerate() {
                if group.window_index(&group.translate_unchecked(&a, &group.window_point(i))).is_some() {
                    *s += v;
                }
            }
        }
        Ok(Self { window_len: group.window_len(), fibers })
    }

    pub fn new(group: &Group, entries: &[(DualPoint, DualFunction)]) -> Result<Self> {
        Self::from_fibers(group, entries.iter().map(|(a, psi)| (a.clone(), psi.sample(group))).collect())
    }

    /// `delta_a (x) psi`.
    pub fn delta(group: &Group, a: &DualPoint, psi: &DualFunction) -> Result<Self> {
        Self::new(group, &[(a.clone(), psi.clone())])
    }

    pub fn zero(group: &Group) -> Self {
        Self { window_len: group.window_len(), fibers: BTreeMap::new() }
    }

    /// Random fibers on `points` support points drawn from the box of the given radius.
    pub fn random(group: &Group, radius: i64, points: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rank = group.rank();
        let entries = (0..points)
            .map(|_| {
                let coords: Vec<i64> = (0..rank).map(|_| rng.random_range(-radius..=radius)).collect();
                let fiber = (0..group.window_len())
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                (DualPoint(coords), fiber)
            })
            .collect();
        Self::from_fibers(group, entries)
    }

    pub fn support(&self) -> Vec<DualPoint> {
        self.fibers.keys().cloned().collect()
    }

    pub fn fiber(&self, a: &DualPoint) -> Option<&[Complex64]> {
        self.fibers.get(a).map(Vec::as_slice)
    }

    /// `Psi(a, zeta)`, zero off the support or outside the window.
    pub fn value(&self, group: &Group, a: &DualPoint, zeta: &DualPoint) -> Complex64 {
        match (self.fibers.get(a), group.window_index(zeta)) {
            (Some(f), Some(i)) => f[i],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// `sum_{xi, zeta} |Psi(xi, zeta)|^2`.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.fibers.values().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            window_len: self.window_len,
            fibers: self.fibers.iter().map(|(a, f)| (a.clone(), f.iter().map(|z| z * c).collect())).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut fibers = self.fibers.clone();
        for (a, f) in &other.fibers {
            let slot = fibers.entry(a.clone()).or_insert_with(|| vec![Complex64::new(0.0, 0.0); f.len()]);
            slot.iter_mut().zip(f).for_each(|(s, v)| *s += v);
        }
        Self { window_len: self.window_len, fibers }
    }

    /// Largest pointwise gap, treating missing fibers as zero.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let zero = vec![Complex64::new(0.0, 0.0); self.window_len.max(other.window_len)];
        let keys: std::collections::BTreeSet<&DualPoint> = self.fibers.keys().chain(other.fibers.keys()).collect();
        keys.into_iter()
            .map(|a| {
                let (f, g) = (self.fibers.get(a).unwrap_or(&zero), other.fibers.get(a).unwrap_or(&zero));
                f.iter().zip(g).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// `(Phi <> Psi)(xi, zeta) = sum_eta Phi(xi eta^{-1}, zeta eta) Psi(eta, zeta)`.
///
/// Fails with [`Error::WindowEscape`] when a product support point leaves the window.
pub fn compose(group: &Group, phi: &CrossedElement, psi: &CrossedElement) -> Result<CrossedElement> {
    let mut pairs: BTreeMap<DualPoint, Vec<(&DualPoint, &DualPoint)>> = BTreeMap::new();
    for a in phi.fibers.keys() {
        for b in psi.fibers.keys() {
            let c = group.translate_unchecked(a, b);
            if group.window_index(&c).is_none() || group.window_index(&group.negate_unchecked(&c)).is_none() {
                return Err(Error::WindowEscape(format!("{a} + {b} = {c}")));
            }
            pairs.entry(c).or_default().push((a, b));
        }
    }
    let w = group.window_len();
    let points = group.window_points();
    let fibers = pairs
        .into_par_iter()
        .map(|(c, terms)| {
            let mut out = vec![Complex64::new(0.0, 0.0); w];
            for (a, b) in terms {
                let (fa, fb) = (&phi.fibers[a], &psi.fibers[b]);
                for (i, zeta) in points.iter().enumerate() {
                    if let Some(j) = group.window_index(&group.translate_unchecked(zeta, b)) {
                        out[i] += fa[j] * fb[i];
                    }
                }
            }
            (c, out)
        })
        .collect();
    Ok(CrossedElement { window_len: w, fibers })
}

/// `Psi^<>(xi, zeta) = conj Psi(xi^{-1}, zeta xi)`.
pub fn involution(group: &Group, psi: &CrossedElement) -> CrossedElement {
    let points = group.window_points();
    let fibers = psi
        .fibers
        .iter()
        .map(|(a, f)| {
            let xi = group.negate_unchecked(a);
            let out = points
                .iter()
                .map(|zeta| match group.window_index(&group.translate_unchecked(zeta, &xi)) {
                    Some(j) => f[j].conj(),
                    None => Complex64::new(0.0, 0.0),
                })
                .collect();
            (xi, out)
        })
        .collect();
    CrossedElement { window_len: psi.window_len, fibers }
}

/// `sch(Psi)(xi, eta) = Psi(xi eta^{-1}, eta)` on the window.
pub fn sch(group: &Group, psi: &CrossedElement) -> LinOp {
    let unit = group.unit();
    if psi.fibers.keys().all(|a| *a == unit) {
        let d = psi.fibers.get(&unit).cloned().unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); group.window_len()]);
        return LinOp::diagonal(d, Side::Dual);
    }
    let w = group.window_len();
    let mut m = DMatrix::<Complex64>::zeros(w, w);
    for (a, f) in &psi.fibers {
        for (j, eta) in group.window_points().iter().enumerate() {
            if let Some(i) = group.window_index(&group.translate_unchecked(a, eta)) {
                m[(i, j)] += f[j];
            }
        }
    }
    LinOp::dense(m, Side::Dual).expect("square by construction")
}

/// The symbol `f(x, eta) = sum_a a(x) Psi(a, eta)`, so that `op(f) = sch(Psi)`.
pub fn partial_fourier(group: &Group, psi: &CrossedElement) -> Symbol {
    let unit = group.unit();
    let fibers: Arc<Vec<(DualPoint, Vec<Complex64>)>> =
        Arc::new(psi.fibers.iter().map(|(a, f)| (a.clone(), f.clone())).collect());
    let g = group.clone();
    if psi.fibers.keys().all(|a| *a == unit) {
        return Symbol::multiplier(&DualFunction::new("partial_fourier", move |eta| {
            match (fibers.first(), g.window_index(eta)) {
                (Some((_, f)), Some(i)) => f[i],
                _ => Complex64::new(0.0, 0.0),
            }
        }));
    }
    Symbol::new("partial_fourier", move |x, eta| {
        let Some(i) = g.window_index(eta) else { return Complex64::new(0.0, 0.0) };
        fibers.iter().map(|(a, f)| g.character(a, x).unwrap_or_default() * f[i]).sum()
    })
}

/// Recovers fibers on `support` by Fourier analysis in `x`. Returns the
/// element and the largest sample gap between `f` and the symbol rebuilt
/// from it; a positive gap means `f` has `x`-spectrum off the support.
pub fn partial_fourier_inv(
    group: &Group,
    f: &SampledSymbol,
    support: &[DualPoint],
) -> Result<(CrossedElement, f64)> {
    if f.grid_len() != group.grid_len() || f.window_len() != group.window_len() {
        return Err(Error::ShapeMismatch { expected: group.grid_len(), got: f.grid_len() });
    }
    let mut slots = BTreeMap::new();
    for a in support {
        let slot = frequency_slot(group, a);
        if let Some(prev) = slots.insert(slot, a.clone()) {
            if prev != *a {
                return Err(Error::Aliasing {
                    support: group.sup_norm(a).max(group.sup_norm(&prev)),
                    grid: group.grid_shape().iter().copied().min().unwrap_or(0),
                    window: group.min_window_radius(),
                });
            }
        }
    }
    let columns: Vec<Vec<Complex64>> =
        (0..group.window_len()).into_par_iter().map(|j| grid_coefficients(group, &f.column(j))).collect();
    let entries = slots
        .iter()
        .map(|(&slot, a)| (a.clone(), columns.iter().map(|c| c[slot]).collect()))
        .collect();
    let psi = CrossedElement::from_fibers(group, entries)?;
    let rebuilt = partial_fourier(group, &psi).sample(group);
    let mut gap = 0.0f64;
    for j in 0..group.window_len() {
        for x in 0..group.grid_len() {
            gap = gap.max((f.value(j, x) - rebuilt.value(j, x)).norm());
        }
    }
    Ok((psi, gap))
}
