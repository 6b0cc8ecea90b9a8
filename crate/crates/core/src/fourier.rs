//! Fourier transformation between grid samples on the group and
//! coefficients on the dual window.
//!
//! `fourier(u)(xi) = mean_x conj(xi(x)) u(x)` and
//! `inv_fourier(w)(x) = sum_{xi in window} xi(x) w(xi)`.
//! With a Nyquist grid both are exact inverses on band-limited data (spectrum
//! inside the window); spectra wider than the window alias.
//!
//! The `_direct` variants sum the definitions literally and serve as the
//! reference for the FFT-backed paths.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::group::{dual_norm, space_norm, DualPoint, Group};

/// Samples of a function on the group grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceVec(pub Vec<Complex64>);

/// Coefficients on the dual window, in window enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVec(pub Vec<Complex64>);

impl SpaceVec {
    pub fn zeros(group: &Group) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); group.grid_len()])
    }

    pub fn constant(group: &Group, value: Complex64) -> Self {
        Self(vec![value; group.grid_len()])
    }

    /// The character `xi` sampled on the grid.
    pub fn character(group: &Group, xi: &DualPoint) -> Self {
        Self(group.character_row(xi))
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    /// `L^2` norm for the normalized Haar measure.
    pub fn norm(&self) -> f64 {
        space_norm(&self.0)
    }

    pub fn check(&self, group: &Group) -> Result<()> {
        if self.0.len() != group.grid_len() {
            return Err(Error::ShapeMismatch { expected: group.grid_len(), got: self.0.len() });
        }
        Ok(())
    }
}

impl DualVec {
    pub fn zeros(group: &Group) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); group.window_len()])
    }

    /// Indicator of a single window point.
    pub fn delta(group: &Group, xi: &DualPoint) -> Result<Self> {
        let idx = group.window_index(xi).ok_or_else(|| Error::OutsideWindow(xi.to_string()))?;
        let mut out = Self::zeros(group);
        out.0[idx] = Complex64::new(1.0, 0.0);
        Ok(out)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        dual_norm(&self.0)
    }

    pub fn check(&self, group: &Group) -> Result<()> {
        if self.0.len() != group.window_len() {
            return Err(Error::ShapeMismatch { expected: group.window_len(), got: self.0.len() });
        }
        Ok(())
    }
}

/// In-place multidimensional DFT over the grid shape (unnormalized).
pub(crate) fn fft_grid(shape: &[usize], data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let total: usize = shape.iter().product();
    debug_assert_eq!(total, data.len());
    for (axis, &n) in shape.iter().enumerate() {
        if n <= 1 {
            continue;
        }
        let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
        let stride: usize = shape[axis + 1..].iter().product();
        let outer = total / (n * stride);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

/// Grid location of the frequency of window point `index` (`k mod n` per axis).
pub(crate) fn frequency_slot(group: &Group, xi: &DualPoint) -> usize {
    let multi: Vec<usize> =
        xi.0.iter().zip(group.grid_shape()).map(|(&k, &n)| k.rem_euclid(n as i64) as usize).collect();
    group.grid_flat_index(&multi)
}

/// Normalized forward transform of raw grid samples, as a full grid of
/// coefficients indexed by `k mod n`.
pub(crate) fn grid_coefficients(group: &Group, samples: &[Complex64]) -> Vec<Complex64> {
    let mut data = samples.to_vec();
    fft_grid(group.grid_shape(), &mut data, false);
    let scale = 1.0 / group.grid_len() as f64;
    data.iter_mut().for_each(|z| *z *= scale);
    data
}

pub fn fourier(group: &Group, u: &SpaceVec) -> Result<DualVec> {
    u.check(group)?;
    let coeffs = grid_coefficients(group, &u.0);
    Ok(DualVec((0..group.window_len()).map(|i| coeffs[frequency_slot(group, &group.window_point(i))]).collect()))
}

pub fn inv_fourier(group: &Group, w: &DualVec) -> Result<SpaceVec> {
    w.check(group)?;
    let mut data = vec![Complex64::new(0.0, 0.0); group.grid_len()];
    for (i, &c) in w.0.iter().enumerate() {
        data[frequency_slot(group, &group.window_point(i))] += c;
    }
    fft_grid(group.grid_shape(), &mut data, true);
    Ok(SpaceVec(data))
}

pub fn fourier_direct(group: &Group, u: &SpaceVec) -> Result<DualVec> {
    u.check(group)?;
    let out = (0..group.window_len())
        .into_par_iter()
        .map(|i| {
            let xi = group.window_point(i);
            let row = group.character_row(&xi);
            row.iter().zip(&u.0).map(|(c, v)| c.conj() * v).sum::<Complex64>() / group.grid_len() as f64
        })
        .collect();
    Ok(DualVec(out))
}

pub fn inv_fourier_direct(group: &Group, w: &DualVec) -> Result<SpaceVec> {
    w.check(group)?;
    let window = group.window_points();
    let out = (0..group.grid_len())
        .into_par_iter()
        .map(|x| window.iter().zip(&w.0).map(|(xi, c)| group.character_on_grid(xi, x) * c).sum())
        .collect();
    Ok(SpaceVec(out))
}

/// `v(x) = u(x x0^{-1})` for a grid point `x0` given by its grid index.
pub fn translate_space(group: &Group, u: &SpaceVec, x0: usize) -> Result<SpaceVec> {
    u.check(group)?;
    Ok(SpaceVec((0..group.grid_len()).map(|x| u.0[group.grid_difference(x, x0)]).collect()))
}
