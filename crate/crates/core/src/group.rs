//! Compact abelian groups of the form `T^a x Z_m1 x ... x Z_mb`, their
//! duals `Z^a x Z_m1 x ... x Z_mb`, characters, normalized Haar measure and
//! the finite truncations (sampling grid on the group, box window on the dual)
//! that every other module works with.
//!
//! Both the grid and the window are enumerated lexicographically with the
//! first factor varying slowest. Torus coordinates of the window run over
//! `-M..=M`, cyclic coordinates over `0..m`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One factor of the group: a sampled circle with a dual truncation radius,
/// or a finite cyclic group (sampled and dualized exactly).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Torus { grid: usize, window: i64 },
    Cyclic(u64),
}

impl Factor {
    pub fn is_torus(&self) -> bool {
        matches!(self, Factor::Torus { .. })
    }

    fn grid_len(&self) -> usize {
        match *self {
            Factor::Torus { grid, .. } => grid,
            Factor::Cyclic(m) => m as usize,
        }
    }

    fn window_range(&self) -> (i64, i64) {
        match *self {
            Factor::Torus { window, .. } => (-window, window),
            Factor::Cyclic(m) => (0, m as i64 - 1),
        }
    }
}

/// Serializable description of a group, e.g.
/// `{"factors":[{"torus":{"grid":64,"window":31}},{"cyclic":8}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub factors: Vec<Factor>,
}

impl GroupSpec {
    pub fn new(factors: Vec<Factor>) -> Self {
        Self { factors }
    }

    /// `T^dim` with the minimal Nyquist grid `2M+1` on every axis.
    pub fn torus(dim: usize, window: i64) -> Self {
        Self::torus_with_grid(dim, window, (2 * window + 1) as usize)
    }

    pub fn torus_with_grid(dim: usize, window: i64, grid: usize) -> Self {
        Self { factors: vec![Factor::Torus { grid, window }; dim] }
    }

    pub fn cyclic(order: u64) -> Self {
        Self { factors: vec![Factor::Cyclic(order)] }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("group spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(Error::InvalidSpec("at least one factor is required".into()));
        }
        for (j, f) in self.factors.iter().enumerate() {
            match *f {
                Factor::Torus { grid, window } => {
                    if window < 1 {
                        return Err(Error::InvalidSpec(format!(
                            "factor {j}: window radius must be positive, got {window}"
                        )));
                    }
                    if (grid as i64) < 2 * window + 1 {
                        return Err(Error::InvalidSpec(format!(
                            "factor {j}: grid size {grid} cannot resolve window radius {window} (need >= {})",
                            2 * window + 1
                        )));
                    }
                }
                Factor::Cyclic(m) => {
                    if m == 0 {
                        return Err(Error::InvalidSpec(format!("factor {j}: cyclic order must be positive")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A coordinate of a point of the group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coord {
    /// `t` in `[0,1)`, standing for `exp(2 pi i t)`.
    Angle(f64),
    Residue(u64),
}

impl Coord {
    /// Angle for torus factors, residue (as a float) for cyclic ones.
    pub fn value(&self) -> f64 {
        match *self {
            Coord::Angle(t) => t,
            Coord::Residue(r) => r as f64,
        }
    }
}

/// A point `x` of the group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint(pub Vec<Coord>);

impl GroupPoint {
    pub fn coords(&self) -> &[Coord] {
        &self.0
    }

    /// Coordinate `j` as a float; see [`Coord::value`].
    pub fn coord(&self, j: usize) -> f64 {
        self.0[j].value()
    }
}

/// A point `xi` of the dual group. Cyclic coordinates are kept reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualPoint(pub Vec<i64>);

impl DualPoint {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for DualPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, c) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A validated group together with its sampling grid, dual window and
/// lookup tables. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Group {
    spec: GroupSpec,
    grid_shape: Vec<usize>,
    window_lo: Vec<i64>,
    window_shape: Vec<usize>,
    grid_len: usize,
    window_len: usize,
    /// `roots[j][e] = exp(2 pi i e / n_j)`.
    roots: Vec<Vec<Complex64>>,
}

impl Group {
    pub fn new(spec: GroupSpec) -> Result<Self> {
        spec.validate()?;
        let grid_shape: Vec<usize> = spec.factors.iter().map(Factor::grid_len).collect();
        let ranges: Vec<(i64, i64)> = spec.factors.iter().map(Factor::window_range).collect();
        let window_lo = ranges.iter().map(|r| r.0).collect();
        let window_shape: Vec<usize> = ranges.iter().map(|r| (r.1 - r.0 + 1) as usize).collect();
        let grid_len = grid_shape.iter().product();
        let window_len = window_shape.iter().product();
        let roots = grid_shape
            .iter()
            .map(|&n| (0..n).map(|e| Complex64::from_polar(1.0, TAU * e as f64 / n as f64)).collect())
            .collect();
        Ok(Self { spec, grid_shape, window_lo, window_shape, grid_len, window_len, roots })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn factors(&self) -> &[Factor] {
        &self.spec.factors
    }

    pub fn rank(&self) -> usize {
        self.spec.factors.len()
    }

    /// Number of torus factors (the rank of the free part of the dual).
    pub fn torus_rank(&self) -> usize {
        self.spec.factors.iter().filter(|f| f.is_torus()).count()
    }

    pub fn grid_shape(&self) -> &[usize] {
        &self.grid_shape
    }

    pub fn grid_len(&self) -> usize {
        self.grid_len
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    /// Smallest window radius over the torus factors; `0` if there are none.
    pub fn min_window_radius(&self) -> i64 {
        self.spec
            .factors
            .iter()
            .filter_map(|f| match *f {
                Factor::Torus { window, .. } => Some(window),
                Factor::Cyclic(_) => None,
            })
            .min()
            .unwrap_or(0)
    }

    fn check_rank(&self, got: usize) -> Result<()> {
        if got != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), got });
        }
        Ok(())
    }

    // ---- dual points ----------------------------------------------------

    pub fn unit(&self) -> DualPoint {
        DualPoint(vec![0; self.rank()])
    }

    /// Builds a dual point, reducing cyclic coordinates.
    pub fn dual_point(&self, coords: &[i64]) -> Result<DualPoint> {
        self.check_rank(coords.len())?;
        Ok(DualPoint(
            coords
                .iter()
                .zip(&self.spec.factors)
                .map(|(&k, f)| match *f {
                    Factor::Torus { .. } => k,
                    Factor::Cyclic(m) => k.rem_euclid(m as i64),
                })
                .collect(),
        ))
    }

    fn check_dual(&self, xi: &DualPoint) -> Result<()> {
        self.check_rank(xi.0.len())?;
        for (j, (&k, f)) in xi.0.iter().zip(&self.spec.factors).enumerate() {
            if let Factor::Cyclic(m) = *f {
                if k < 0 || k >= m as i64 {
                    return Err(Error::OutOfRange { factor: j, detail: format!("residue {k} not reduced mod {m}") });
                }
            }
        }
        Ok(())
    }

    /// Group law of the dual: `xi * eta`.
    pub fn translate(&self, xi: &DualPoint, eta: &DualPoint) -> Result<DualPoint> {
        self.check_dual(xi)?;
        self.check_dual(eta)?;
        Ok(self.translate_unchecked(xi, eta))
    }

    pub(crate) fn translate_unchecked(&self, xi: &DualPoint, eta: &DualPoint) -> DualPoint {
        DualPoint(
            xi.0.iter()
                .zip(&eta.0)
                .zip(&self.spec.factors)
                .map(|((&a, &b), f)| match *f {
                    Factor::Torus { .. } => a + b,
                    Factor::Cyclic(m) => (a + b).rem_euclid(m as i64),
                })
                .collect(),
        )
    }

    pub fn negate(&self, xi: &DualPoint) -> Result<DualPoint> {
        self.check_dual(xi)?;
        Ok(self.negate_unchecked(xi))
    }

    pub(crate) fn negate_unchecked(&self, xi: &DualPoint) -> DualPoint {
        DualPoint(
            xi.0.iter()
                .zip(&self.spec.factors)
                .map(|(&a, f)| match *f {
                    Factor::Torus { .. } => -a,
                    Factor::Cyclic(m) => (-a).rem_euclid(m as i64),
                })
                .collect(),
        )
    }

    /// `xi * eta^{-1}`.
    pub(crate) fn difference(&self, xi: &DualPoint, eta: &DualPoint) -> DualPoint {
        self.translate_unchecked(xi, &self.negate_unchecked(eta))
    }

    /// Torus coordinates of a dual point (the `Z^a` part).
    pub fn torus_part(&self, xi: &DualPoint) -> Vec<i64> {
        xi.0.iter().zip(&self.spec.factors).filter(|(_, f)| f.is_torus()).map(|(&k, _)| k).collect()
    }

    /// Sup norm of the torus part.
    pub fn sup_norm(&self, xi: &DualPoint) -> i64 {
        self.torus_part(xi).iter().map(|k| k.abs()).max().unwrap_or(0)
    }

    /// Euclidean norm of the torus part.
    pub fn euclid_norm(&self, xi: &DualPoint) -> f64 {
        self.torus_part(xi).iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt()
    }

    // ---- window ---------------------------------------------------------

    pub fn window_point(&self, index: usize) -> DualPoint {
        let mut rest = index;
        let mut coords = vec![0i64; self.rank()];
        for j in (0..self.rank()).rev() {
            let s = self.window_shape[j];
            coords[j] = self.window_lo[j] + (rest % s) as i64;
            rest /= s;
        }
        DualPoint(coords)
    }

    /// Window index of `xi`, or `None` if `xi` lies outside the window.
    pub fn window_index(&self, xi: &DualPoint) -> Option<usize> {
        if xi.0.len() != self.rank() {
            return None;
        }
        let mut idx = 0usize;
        for j in 0..self.rank() {
            let off = xi.0[j] - self.window_lo[j];
            if off < 0 || off as usize >= self.window_shape[j] {
                return None;
            }
            idx = idx * self.window_shape[j] + off as usize;
        }
        Some(idx)
    }

    pub fn window_points(&self) -> Vec<DualPoint> {
        (0..self.window_len).map(|i| self.window_point(i)).collect()
    }

    // ---- grid -----------------------------------------------------------

    /// Multi-index of grid point `index`.
    pub fn grid_multi_index(&self, index: usize) -> Vec<usize> {
        let mut rest = index;
        let mut out = vec![0usize; self.rank()];
        for j in (0..self.rank()).rev() {
            out[j] = rest % self.grid_shape[j];
            rest /= self.grid_shape[j];
        }
        out
    }

    pub fn grid_flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.grid_shape).fold(0, |acc, (&i, &n)| acc * n + (i % n))
    }

    pub fn grid_point(&self, index: usize) -> GroupPoint {
        let multi = self.grid_multi_index(index);
        GroupPoint(
            multi
                .iter()
                .zip(&self.spec.factors)
                .map(|(&i, f)| match *f {
                    Factor::Torus { grid, .. } => Coord::Angle(i as f64 / grid as f64),
                    Factor::Cyclic(_) => Coord::Residue(i as u64),
                })
                .collect(),
        )
    }

    pub fn grid_points(&self) -> Vec<GroupPoint> {
        (0..self.grid_len).map(|i| self.grid_point(i)).collect()
    }

    /// Grid index of `x`, failing if `x` is not a grid point.
    pub fn grid_index(&self, x: &GroupPoint) -> Result<usize> {
        self.check_point(x)?;
        let mut multi = Vec::with_capacity(self.rank());
        for (c, f) in x.0.iter().zip(&self.spec.factors) {
            match (*c, *f) {
                (Coord::Angle(t), Factor::Torus { grid, .. }) => {
                    let s = t * grid as f64;
                    let r = s.round();
                    if (s - r).abs() > 1e-9 {
                        return Err(Error::OffGrid(format!("angle {t} is not a multiple of 1/{grid}")));
                    }
                    multi.push((r as i64).rem_euclid(grid as i64) as usize);
                }
                (Coord::Residue(r), Factor::Cyclic(_)) => multi.push(r as usize),
                _ => unreachable!("checked by check_point"),
            }
        }
        Ok(self.grid_flat_index(&multi))
    }

    pub fn check_point(&self, x: &GroupPoint) -> Result<()> {
        self.check_rank(x.0.len())?;
        for (j, (c, f)) in x.0.iter().zip(&self.spec.factors).enumerate() {
            match (*c, *f) {
                (Coord::Angle(t), Factor::Torus { .. }) => {
                    if !(0.0..1.0).contains(&t) {
                        return Err(Error::OutOfRange { factor: j, detail: format!("angle {t} outside [0,1)") });
                    }
                }
                (Coord::Residue(r), Factor::Cyclic(m)) => {
                    if r >= m {
                        return Err(Error::OutOfRange { factor: j, detail: format!("residue {r} >= {m}") });
                    }
                }
                _ => {
                    return Err(Error::OutOfRange { factor: j, detail: "coordinate kind does not match factor".into() })
                }
            }
        }
        Ok(())
    }

    pub fn identity_point(&self) -> GroupPoint {
        self.grid_point(0)
    }

    /// Group inverse `x^{-1}`.
    pub fn invert_point(&self, x: &GroupPoint) -> GroupPoint {
        GroupPoint(
            x.0.iter()
                .zip(&self.spec.factors)
                .map(|(c, f)| match (*c, *f) {
                    (Coord::Angle(t), _) => Coord::Angle(if t == 0.0 { 0.0 } else { 1.0 - t }),
                    (Coord::Residue(r), Factor::Cyclic(m)) => Coord::Residue((m - r) % m),
                    (Coord::Residue(r), _) => Coord::Residue(r),
                })
                .collect(),
        )
    }

    /// Grid index of `x_a * x_b^{-1}`.
    pub fn grid_difference(&self, a: usize, b: usize) -> usize {
        let ma = self.grid_multi_index(a);
        let mb = self.grid_multi_index(b);
        let multi: Vec<usize> =
            ma.iter().zip(&mb).zip(&self.grid_shape).map(|((&i, &k), &n)| (i + n - k) % n).collect();
        self.grid_flat_index(&multi)
    }

    pub fn grid_inverse(&self, a: usize) -> usize {
        let multi: Vec<usize> =
            self.grid_multi_index(a).iter().zip(&self.grid_shape).map(|(&i, &n)| (n - i) % n).collect();
        self.grid_flat_index(&multi)
    }

    // ---- characters -----------------------------------------------------

    /// `xi(x)`: product of `exp(2 pi i k t)` over torus factors and
    /// `exp(2 pi i k r / m)` over cyclic factors.
    pub fn character(&self, xi: &DualPoint, x: &GroupPoint) -> Result<Complex64> {
        self.check_dual(xi)?;
        self.check_point(x)?;
        let mut phase = 0.0;
        for ((&k, c), f) in xi.0.iter().zip(&x.0).zip(&self.spec.factors) {
            phase += match (*c, *f) {
                (Coord::Angle(t), _) => (k as f64 * t).rem_euclid(1.0),
                (Coord::Residue(r), Factor::Cyclic(m)) => {
                    ((k as i128 * r as i128).rem_euclid(m as i128)) as f64 / m as f64
                }
                _ => unreachable!("checked by check_point"),
            };
        }
        Ok(Complex64::from_polar(1.0, TAU * phase))
    }

    /// `xi(x)` for a grid point, using exact root-of-unity tables.
    pub fn character_on_grid(&self, xi: &DualPoint, grid_index: usize) -> Complex64 {
        let multi = self.grid_multi_index(grid_index);
        let mut out = Complex64::new(1.0, 0.0);
        for (j, &m) in multi.iter().enumerate() {
            let n = self.grid_shape[j] as i64;
            let e = (xi.0[j].rem_euclid(n) as i128 * m as i128).rem_euclid(n as i128) as usize;
            out *= self.roots[j][e];
        }
        out
    }

    /// The character `xi` sampled on the whole grid.
    pub fn character_row(&self, xi: &DualPoint) -> Vec<Complex64> {
        let per_axis: Vec<Vec<Complex64>> = (0..self.rank())
            .map(|j| {
                let n = self.grid_shape[j] as i64;
                let k = xi.0[j].rem_euclid(n) as usize;
                (0..n as usize).map(|i| self.roots[j][(k * i) % n as usize]).collect()
            })
            .collect();
        let mut out = vec![Complex64::new(1.0, 0.0)];
        for axis in &per_axis {
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for &a in &out {
                for &b in axis {
                    next.push(a * b);
                }
            }
            out = next;
        }
        out
    }

    /// Normalized Haar integral of grid samples: their mean.
    pub fn haar_integrate(&self, samples: &[Complex64]) -> Result<Complex64> {
        if samples.len() != self.grid_len {
            return Err(Error::ShapeMismatch { expected: self.grid_len, got: samples.len() });
        }
        Ok(samples.iter().sum::<Complex64>() / self.grid_len as f64)
    }

    /// Unit generators of the dual: `+-e_j` on torus factors, `+1` on cyclic ones.
    pub fn default_generators(&self) -> Vec<DualPoint> {
        let mut out = Vec::new();
        for (j, f) in self.spec.factors.iter().enumerate() {
            let mut e = vec![0i64; self.rank()];
            e[j] = 1;
            match f {
                Factor::Torus { .. } => {
                    out.push(DualPoint(e.clone()));
                    e[j] = -1;
                    out.push(DualPoint(e));
                }
                Factor::Cyclic(m) => {
                    if *m > 1 {
                        out.push(DualPoint(e));
                    }
                }
            }
        }
        out
    }

    /// Same group with every torus window radius replaced by `radius` and
    /// the grid enlarged if needed to keep it Nyquist.
    pub fn with_window(&self, radius: i64) -> Result<Group> {
        let factors = self
            .spec
            .factors
            .iter()
            .map(|f| match *f {
                Factor::Torus { grid, .. } => {
                    Factor::Torus { grid: grid.max((2 * radius + 1) as usize), window: radius }
                }
                c => c,
            })
            .collect();
        Group::new(GroupSpec::new(factors))
    }
}

/// `sqrt(mean |u|^2)`: the `L^2` norm for the normalized Haar measure.
pub fn space_norm(u: &[Complex64]) -> f64 {
    if u.is_empty() {
        return 0.0;
    }
    (u.iter().map(|z| z.norm_sqr()).sum::<f64>() / u.len() as f64).sqrt()
}

/// Counting-measure `l^2` norm on the dual side.
pub fn dual_norm(w: &[Complex64]) -> f64 {
    w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
