//! Symbols on phase space `X x Xi`, functions on the dual, corona filters,
//! oscillation functionals and the symbol gallery.

mod filter;
pub mod gallery;
mod oscillation;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::group::{DualPoint, Factor, Group, GroupPoint};

pub use filter::{CoronaFilter, FilterKind, InvarianceReport};
pub use oscillation::{
    d_omega, dual_osc, ideal_membership, symbol_osc, upper_d_omega, vo_diagnostic, DOmegaReport, LevelSequence,
    MembershipVerdict, OscillationReport,
};

pub type DualRule = Arc<dyn Fn(&DualPoint) -> Complex64 + Send + Sync>;
pub type SpaceRule = Arc<dyn Fn(&GroupPoint) -> Complex64 + Send + Sync>;
pub type SymbolRule = Arc<dyn Fn(&GroupPoint, &DualPoint) -> Complex64 + Send + Sync>;

/// Group law on raw dual coordinates, for use inside rule closures.
pub(crate) fn dual_add(factors: &[Factor], a: &DualPoint, b: &DualPoint) -> DualPoint {
    DualPoint(
        a.0.iter()
            .zip(&b.0)
            .zip(factors)
            .map(|((&x, &y), f)| match *f {
                Factor::Torus { .. } => x + y,
                Factor::Cyclic(m) => (x + y).rem_euclid(m as i64),
            })
            .collect(),
    )
}

/// A bounded function `psi` on the dual group, given by a rule.
#[derive(Clone)]
pub struct DualFunction {
    label: String,
    rule: DualRule,
}

impl fmt::Debug for DualFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DualFunction").field("label", &self.label).finish_non_exhaustive()
    }
}

impl DualFunction {
    pub fn new(label: impl Into<String>, rule: impl Fn(&DualPoint) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), rule: Arc::new(rule) }
    }

    pub fn constant(value: Complex64) -> Self {
        Self::new(format!("const({value})"), move |_| value)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, xi: &DualPoint) -> Complex64 {
        (self.rule)(xi)
    }

    /// Values on the window, in window order.
    pub fn sample(&self, group: &Group) -> Vec<Complex64> {
        (0..group.window_len()).map(|i| self.eval(&group.window_point(i))).collect()
    }

    pub fn sup_on_window(&self, group: &Group) -> f64 {
        self.sample(group).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `theta_eta psi : xi -> psi(eta xi)`.
    pub fn translated(&self, group: &Group, eta: &DualPoint) -> Self {
        let factors = group.factors().to_vec();
        let eta = eta.clone();
        let inner = self.rule.clone();
        Self::new(format!("{}(. + {eta})", self.label), move |xi| inner(&dual_add(&factors, xi, &eta)))
    }

    pub fn conj(&self) -> Self {
        let inner = self.rule.clone();
        Self::new(format!("conj {}", self.label), move |xi| inner(xi).conj())
    }

    pub fn product(&self, other: &DualFunction) -> Self {
        let (a, b) = (self.rule.clone(), other.rule.clone());
        Self::new(format!("{}*{}", self.label, other.label), move |xi| a(xi) * b(xi))
    }

    pub(crate) fn rule(&self) -> DualRule {
        self.rule.clone()
    }
}

/// A continuous function `phi` on the group.
#[derive(Clone)]
pub struct SpaceFunction {
    label: String,
    rule: SpaceRule,
}

impl fmt::Debug for SpaceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceFunction").field("label", &self.label).finish_non_exhaustive()
    }
}

impl SpaceFunction {
    pub fn new(label: impl Into<String>, rule: impl Fn(&GroupPoint) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), rule: Arc::new(rule) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &GroupPoint) -> Complex64 {
        (self.rule)(x)
    }

    pub fn sample(&self, group: &Group) -> Vec<Complex64> {
        (0..group.grid_len()).map(|i| self.eval(&group.grid_point(i))).collect()
    }

    /// The character `xi` as a function on the group.
    pub fn character(group: &Group, xi: &DualPoint) -> Self {
        let g = group.clone();
        let xi = xi.clone();
        Self::new(format!("chi{xi}"), move |x| g.character(&xi, x).unwrap_or_default())
    }
}

/// A symbol `f(x, xi)` on phase space.
///
/// `x_independent` marks Fourier multipliers `f(x, xi) = psi(xi)`; their
/// samples and quantizations are stored without the redundant grid axis.
#[derive(Clone)]
pub struct Symbol {
    label: String,
    rule: SymbolRule,
    x_independent: bool,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("label", &self.label)
            .field("x_independent", &self.x_independent)
            .finish_non_exhaustive()
    }
}

impl Symbol {
    pub fn new(
        label: impl Into<String>,
        rule: impl Fn(&GroupPoint, &DualPoint) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), rule: Arc::new(rule), x_independent: false }
    }

    /// `f = 1 (x) psi`.
    pub fn multiplier(psi: &DualFunction) -> Self {
        let rule = psi.rule();
        Self { label: psi.label().to_string(), rule: Arc::new(move |_, xi| rule(xi)), x_independent: true }
    }

    /// `f = phi (x) psi`.
    pub fn separable(phi: &SpaceFunction, psi: &DualFunction) -> Self {
        let (a, b) = (phi.rule.clone(), psi.rule());
        Self::new(format!("{}(x){}", phi.label, psi.label()), move |x, xi| a(x) * b(xi))
    }

    /// `f = phi (x) 1`.
    pub fn multiplication(phi: &SpaceFunction) -> Self {
        let a = phi.rule.clone();
        Self::new(phi.label.clone(), move |x, _| a(x))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_x_independent(&self) -> bool {
        self.x_independent
    }

    pub fn eval(&self, x: &GroupPoint, xi: &DualPoint) -> Complex64 {
        (self.rule)(x, xi)
    }

    /// `(x, xi) -> f(x, eta xi)`.
    pub fn dual_translated(&self, group: &Group, eta: &DualPoint) -> Self {
        let factors = group.factors().to_vec();
        let eta = eta.clone();
        let inner = self.rule.clone();
        Self {
            label: format!("{}(x, . + {eta})", self.label),
            rule: Arc::new(move |x, xi| inner(x, &dual_add(&factors, xi, &eta))),
            x_independent: self.x_independent,
        }
    }

    /// `(x, xi) -> f(x, xi) 1_keep(xi)`.
    pub fn restricted(&self, keep: impl Fn(&DualPoint) -> bool + Send + Sync + 'static) -> Self {
        let inner = self.rule.clone();
        Self {
            label: format!("{}|restricted", self.label),
            rule: Arc::new(move |x, xi| if keep(xi) { inner(x, xi) } else { Complex64::new(0.0, 0.0) }),
            x_independent: self.x_independent,
        }
    }

    /// `(x, xi) -> f(x^{-1}, xi)`.
    pub fn x_inverted(&self, group: &Group) -> Self {
        let g = group.clone();
        let inner = self.rule.clone();
        Self {
            label: format!("{}(x^-1, .)", self.label),
            rule: Arc::new(move |x, xi| inner(&g.invert_point(x), xi)),
            x_independent: self.x_independent,
        }
    }

    pub fn sample(&self, group: &Group) -> SampledSymbol {
        let w = group.window_len();
        let values = if self.x_independent {
            let x0 = group.identity_point();
            Samples::DualOnly((0..w).into_par_iter().map(|i| self.eval(&x0, &group.window_point(i))).collect())
        } else {
            let grid = group.grid_points();
            let cols: Vec<Vec<Complex64>> = (0..w)
                .into_par_iter()
                .map(|i| {
                    let xi = group.window_point(i);
                    grid.iter().map(|x| self.eval(x, &xi)).collect()
                })
                .collect();
            Samples::Full(cols.concat())
        };
        SampledSymbol { symbol: self.clone(), grid_len: group.grid_len(), window_len: w, values }
    }

    pub(crate) fn rule(&self) -> SymbolRule {
        self.rule.clone()
    }

    pub(crate) fn from_parts(label: String, rule: SymbolRule, x_independent: bool) -> Self {
        Self { label, rule, x_independent }
    }
}

#[derive(Debug, Clone)]
enum Samples {
    /// One value per window point.
    DualOnly(Vec<Complex64>),
    /// Window-major: `values[xi * grid_len + x]`.
    Full(Vec<Complex64>),
}

/// A symbol together with its samples on `grid x window`.
#[derive(Debug, Clone)]
pub struct SampledSymbol {
    symbol: Symbol,
    grid_len: usize,
    window_len: usize,
    values: Samples,
}

impl SampledSymbol {
    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn grid_len(&self) -> usize {
        self.grid_len
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn is_x_independent(&self) -> bool {
        matches!(self.values, Samples::DualOnly(_))
    }

    pub fn value(&self, xi: usize, x: usize) -> Complex64 {
        match &self.values {
            Samples::DualOnly(v) => v[xi],
            Samples::Full(v) => v[xi * self.grid_len + x],
        }
    }

    /// `x -> f(x, xi)` on the grid.
    pub fn column(&self, xi: usize) -> Vec<Complex64> {
        match &self.values {
            Samples::DualOnly(v) => vec![v[xi]; self.grid_len],
            Samples::Full(v) => v[xi * self.grid_len..(xi + 1) * self.grid_len].to_vec(),
        }
    }

    /// Multiplier values when the symbol does not depend on `x`.
    pub fn multiplier_values(&self) -> Option<&[Complex64]> {
        match &self.values {
            Samples::DualOnly(v) => Some(v),
            Samples::Full(_) => None,
        }
    }

    /// `(max_x |f(x, xi)|, first argmax x)`.
    pub fn row_sup(&self, xi: usize) -> (f64, usize) {
        match &self.values {
            Samples::DualOnly(v) => (v[xi].norm(), 0),
            Samples::Full(v) => {
                let col = &v[xi * self.grid_len..(xi + 1) * self.grid_len];
                let mut best = (f64::NEG_INFINITY, 0);
                for (x, z) in col.iter().enumerate() {
                    if z.norm() > best.0 {
                        best = (z.norm(), x);
                    }
                }
                best
            }
        }
    }

    /// Sup of `|f|` over all samples.
    pub fn sup_norm(&self) -> f64 {
        (0..self.window_len).map(|i| self.row_sup(i).0).fold(0.0, f64::max)
    }

    /// `sqrt(mean_x sum_xi |f(x, xi)|^2)`, the norm of `L^2(X x Xi)` on the truncation.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = match &self.values {
            Samples::DualOnly(v) => v.iter().map(|z| z.norm_sqr()).sum(),
            Samples::Full(v) => v.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.grid_len as f64,
        };
        sum.sqrt()
    }
}
