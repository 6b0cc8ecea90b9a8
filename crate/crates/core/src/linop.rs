//! Finite operators on the window, their norms and low-rank truncations.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub type ApplyFn = Arc<dyn Fn(&[Complex64]) -> Vec<Complex64> + Send + Sync>;

/// Which Hilbert space the matrix acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Coordinates are grid samples of `L^2(X)`.
    Space,
    /// Coordinates are window coefficients of `l^2(Xi)`.
    Dual,
}

#[derive(Clone)]
enum Repr {
    Dense(DMatrix<Complex64>),
    /// Diagonal matrix, stored without its zeros.
    Diagonal(Vec<Complex64>),
}

/// A square matrix with an optional matrix-free apply path.
#[derive(Clone)]
pub struct LinOp {
    repr: Repr,
    side: Side,
    matrix_free: Option<ApplyFn>,
}

impl fmt::Debug for LinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinOp")
            .field("dim", &self.dim())
            .field("diagonal", &self.is_diagonal())
            .field("side", &self.side)
            .finish_non_exhaustive()
    }
}

impl LinOp {
    pub fn dense(matrix: DMatrix<Complex64>, side: Side) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::OperatorShape(format!("{}x{} is not square", matrix.nrows(), matrix.ncols())));
        }
        Ok(Self { repr: Repr::Dense(matrix), side, matrix_free: None })
    }

    pub fn diagonal(values: Vec<Complex64>, side: Side) -> Self {
        Self { repr: Repr::Diagonal(values), side, matrix_free: None }
    }

    pub fn identity(n: usize, side: Side) -> Self {
        Self::diagonal(vec![Complex64::new(1.0, 0.0); n], side)
    }

    pub fn zeros(n: usize, side: Side) -> Self {
        Self::diagonal(vec![Complex64::new(0.0, 0.0); n], side)
    }

    pub fn with_matrix_free(mut self, apply: ApplyFn) -> Self {
        self.matrix_free = Some(apply);
        self
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Dense(m) => m.nrows(),
            Repr::Diagonal(d) => d.len(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.repr, Repr::Diagonal(_))
    }

    pub fn diagonal_values(&self) -> Option<&[Complex64]> {
        match &self.repr {
            Repr::Diagonal(d) => Some(d),
            Repr::Dense(_) => None,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.repr {
            Repr::Dense(m) => m[(i, j)],
            Repr::Diagonal(d) if i == j => d[i],
            Repr::Diagonal(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Diagonal(d) => DMatrix::from_diagonal(&DVector::from_column_slice(d)),
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::ShapeMismatch { expected: self.dim(), got: n });
        }
        Ok(())
    }

    fn check_same(&self, other: &LinOp) -> Result<()> {
        if self.side != other.side {
            return Err(Error::OperatorShape(format!("{:?} operator combined with {:?} operator", self.side, other.side)));
        }
        self.check_len(other.dim())
    }

    /// Matrix-vector product from the stored matrix.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(v.len())?;
        Ok(match &self.repr {
            Repr::Dense(m) => (m * DVector::from_column_slice(v)).data.into(),
            Repr::Diagonal(d) => d.iter().zip(v).map(|(a, b)| a * b).collect(),
        })
    }

    /// The matrix-free path when present, otherwise `apply`.
    pub fn apply_fast(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.matrix_free {
            Some(f) => {
                self.check_len(v.len())?;
                Ok(f(v))
            }
            None => self.apply(v),
        }
    }

    /// Largest entrywise gap between the matrix-free path and the matrix on
    /// seeded random probes. Zero when there is no matrix-free path.
    pub fn matrix_free_residual(&self, probes: usize, seed: u64) -> f64 {
        let Some(f) = &self.matrix_free else { return 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..probes {
            let v = random_vector(&mut rng, self.dim());
            let a = self.apply(&v).expect("probe has matching length");
            let b = f(&v);
            worst = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(worst, f64::max);
        }
        worst
    }

    pub fn adjoint(&self) -> LinOp {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m.adjoint()),
            Repr::Diagonal(d) => Repr::Diagonal(d.iter().map(|z| z.conj()).collect()),
        };
        LinOp { repr, side: self.side, matrix_free: None }
    }

    pub fn scale(&self, c: Complex64) -> LinOp {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m * c),
            Repr::Diagonal(d) => Repr::Diagonal(d.iter().map(|z| z * c).collect()),
        };
        LinOp { repr, side: self.side, matrix_free: None }
    }

    fn zip_with(&self, other: &LinOp, sign: f64) -> Result<LinOp> {
        self.check_same(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                Repr::Diagonal(a.iter().zip(b).map(|(x, y)| x + y * sign).collect())
            }
            _ => Repr::Dense(self.to_dense() + other.to_dense() * Complex64::new(sign, 0.0)),
        };
        Ok(LinOp { repr, side: self.side, matrix_free: None })
    }

    pub fn add(&self, other: &LinOp) -> Result<LinOp> {
        self.zip_with(other, 1.0)
    }

    pub fn sub(&self, other: &LinOp) -> Result<LinOp> {
        self.zip_with(other, -1.0)
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &LinOp) -> Result<LinOp> {
        self.check_same(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => Repr::Diagonal(a.iter().zip(b).map(|(x, y)| x * y).collect()),
            (Repr::Diagonal(a), Repr::Dense(m)) => {
                let mut out = m.clone();
                for (i, mut row) in out.row_iter_mut().enumerate() {
                    row *= a[i];
                }
                Repr::Dense(out)
            }
            (Repr::Dense(m), Repr::Diagonal(b)) => {
                let mut out = m.clone();
                for (j, mut col) in out.column_iter_mut().enumerate() {
                    col *= b[j];
                }
                Repr::Dense(out)
            }
            (Repr::Dense(a), Repr::Dense(b)) => Repr::Dense(a * b),
        };
        Ok(LinOp { repr, side: self.side, matrix_free: None })
    }

    pub fn frobenius_norm(&self) -> f64 {
        match &self.repr {
            Repr::Dense(m) => m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            Repr::Diagonal(d) => d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &LinOp) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn max_abs(&self) -> f64 {
        match &self.repr {
            Repr::Dense(m) => m.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Repr::Diagonal(d) => d.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }

    /// Row-major CSV, one matrix row per line, each entry written as `re,im`.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut out = String::new();
        for i in 0..n {
            for j in 0..n {
                let z = self.entry(i, j);
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{:.17e},{:.17e}", z.re, z.im);
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Power-iteration estimate of the largest singular value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const NORM_SEED: u64 = 0x0005_eed0_fa11;
pub const NORM_MAX_ITER: usize = 10_000;

/// Largest singular value by power iteration on `A* A`, stopping once the
/// relative change of the estimate drops below `tol`. Diagonal operators are
/// read off exactly.
pub fn operator_norm(a: &LinOp, tol: f64) -> NormEstimate {
    operator_norm_seeded(a, tol, NORM_SEED)
}

/// [`operator_norm`] with an explicit seed for the start vector.
pub fn operator_norm_seeded(a: &LinOp, tol: f64, seed: u64) -> NormEstimate {
    if let Some(d) = a.diagonal_values() {
        return NormEstimate { value: d.iter().map(|z| z.norm()).fold(0.0, f64::max), iterations: 0, converged: true };
    }
    let m = a.to_dense();
    let mh = m.adjoint();
    let n = a.dim();
    if n == 0 {
        return NormEstimate { value: 0.0, iterations: 0, converged: true };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DVector::from_vec(random_vector(&mut rng, n));
    v /= Complex64::new(l2(v.as_slice()), 0.0);
    let mut sigma = 0.0f64;
    for it in 1..=NORM_MAX_ITER {
        let w = &m * &v;
        let s = l2(w.as_slice());
        if s == 0.0 {
            return NormEstimate { value: 0.0, iterations: it, converged: true };
        }
        let y = &mh * w;
        let ny = l2(y.as_slice());
        if ny == 0.0 {
            return NormEstimate { value: s, iterations: it, converged: true };
        }
        v = y / Complex64::new(ny, 0.0);
        if it > 1 && (s - sigma).abs() <= tol * s {
            return NormEstimate { value: s.max(sigma), iterations: it, converged: true };
        }
        sigma = s;
    }
    NormEstimate { value: sigma, iterations: NORM_MAX_ITER, converged: false }
}

/// Singular values in nonincreasing order, from a dense SVD.
pub fn singular_values(a: &LinOp) -> Vec<f64> {
    let mut s: Vec<f64> = match a.diagonal_values() {
        Some(d) => d.iter().map(|z| z.norm()).collect(),
        None => a.to_dense().singular_values().iter().copied().collect(),
    };
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Best rank-`r` approximations for each requested rank.
///
/// Diagonal operators keep their `r` largest entries (ties go to the earlier
/// index); dense operators use a full SVD.
pub fn svd_truncations(a: &LinOp, ranks: &[usize]) -> Vec<(usize, LinOp)> {
    if let Some(d) = a.diagonal_values() {
        let mut order: Vec<usize> = (0..d.len()).collect();
        order.sort_by(|&i, &j| d[j].norm().total_cmp(&d[i].norm()));
        return ranks
            .iter()
            .map(|&r| {
                let mut kept = vec![Complex64::new(0.0, 0.0); d.len()];
                for &i in order.iter().take(r) {
                    kept[i] = d[i];
                }
                (r, LinOp::diagonal(kept, a.side))
            })
            .collect();
    }
    let svd = a.to_dense().svd(true, true);
    let (u, vt) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    ranks
        .iter()
        .map(|&r| {
            let n = a.dim();
            let mut out = DMatrix::<Complex64>::zeros(n, n);
            for &i in order.iter().take(r) {
                let s = Complex64::new(svd.singular_values[i], 0.0);
                out += (u.column(i) * s) * vt.row(i);
            }
            (r, LinOp { repr: Repr::Dense(out), side: a.side, matrix_free: None })
        })
        .collect()
}
