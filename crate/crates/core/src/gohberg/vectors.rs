//! Modulated translates `u_i(x) = xi_i(x) u(x x0^{-1})` and the bump vectors
//! they are built from.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{translate_space, SpaceVec};
use crate::group::{DualPoint, Group, GroupPoint};

#[derive(Debug, Clone)]
pub struct TestVectorFamily {
    pub base: SpaceVec,
    /// Grid index of the anchor `x0`.
    pub x0: usize,
    pub xi_seq: Vec<DualPoint>,
    pub vectors: Vec<SpaceVec>,
}

impl TestVectorFamily {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// `u_i = E(x0, xi_i) u` for an anchor given by its grid index.
pub fn modulated_translate(group: &Group, u: &SpaceVec, x0: usize, xi: &DualPoint) -> Result<SpaceVec> {
    let shifted = translate_space(group, u, x0)?;
    let chi = group.character_row(xi);
    Ok(SpaceVec(shifted.0.iter().zip(&chi).map(|(a, b)| a * b).collect()))
}

pub fn make_test_vectors(
    group: &Group,
    u: &SpaceVec,
    x0: &GroupPoint,
    xi_seq: &[DualPoint],
) -> Result<TestVectorFamily> {
    u.check(group)?;
    let x0 = group.grid_index(x0)?;
    let vectors = xi_seq
        .iter()
        .map(|xi| {
            if group.window_index(xi).is_none() {
                return Err(Error::OutsideWindow(xi.to_string()));
            }
            modulated_translate(group, u, x0, xi)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TestVectorFamily { base: u.clone(), x0, xi_seq: xi_seq.to_vec(), vectors })
}

/// Distance on the grid: the largest circular gap over torus axes, with a
/// differing cyclic coordinate counting as the maximal gap `1/2`.
pub fn grid_distance(group: &Group, a: usize, b: usize) -> f64 {
    let (ma, mb) = (group.grid_multi_index(a), group.grid_multi_index(b));
    let mut d = 0.0f64;
    for (j, f) in group.factors().iter().enumerate() {
        let n = group.grid_shape()[j];
        let gap = if f.is_torus() {
            let k = (ma[j] + n - mb[j]) % n;
            k.min(n - k) as f64 / n as f64
        } else if ma[j] == mb[j] {
            0.0
        } else {
            0.5
        };
        d = d.max(gap);
    }
    d
}

/// Normalized indicator of the grid points within `radius` of `x0`.
/// A radius of `1/2` or more covers the whole group.
pub fn bump(group: &Group, x0: usize, radius: f64) -> SpaceVec {
    let mask: Vec<bool> = (0..group.grid_len()).map(|y| grid_distance(group, y, x0) <= radius).collect();
    let count = mask.iter().filter(|&&m| m).count().max(1);
    let height = (group.grid_len() as f64 / count as f64).sqrt();
    SpaceVec(mask.iter().map(|&m| Complex64::new(if m { height } else { 0.0 }, 0.0)).collect())
}
