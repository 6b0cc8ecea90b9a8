//! Decay of `L u_i` for ideal members and of the frozen-symbol error
//! `Op(f) u_i - f(., xi_i) u_i` along a test family.

use num_complex::Complex64;
use serde::Serialize;

use super::vectors::TestVectorFamily;
use crate::error::{Error, Result};
use crate::fourier::{fourier, inv_fourier, SpaceVec};
use crate::group::{space_norm, DualPoint, Group};
use crate::linop::{LinOp, Side};
use crate::quantize::op_apply;
use crate::symbols::{symbol_osc, SampledSymbol, Symbol};

#[derive(Debug, Clone, Serialize)]
pub struct DecaySequence {
    pub values: Vec<f64>,
    pub tol: f64,
}

impl DecaySequence {
    pub fn final_value(&self) -> Option<f64> {
        self.values.last().copied()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] < w[0])
    }

    /// The last value is at most `tol`.
    pub fn decays(&self) -> bool {
        self.final_value().is_some_and(|v| v <= self.tol)
    }
}

/// `i -> ||L u_i||` for a window operator `L`, applied to the window part of `u_i`.
pub fn ideal_decay_check(group: &Group, l: &LinOp, family: &TestVectorFamily, tol: f64) -> Result<DecaySequence> {
    if l.side() != Side::Dual {
        return Err(Error::OperatorShape("expected a window operator".into()));
    }
    let values = family
        .vectors
        .iter()
        .map(|u| {
            let w = fourier(group, u)?;
            Ok(inv_fourier(group, &crate::fourier::DualVec(l.apply(&w.0)?))?.norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DecaySequence { values, tol })
}

/// `i -> ||Op(f) u_i - f(., xi_i) u_i||`.
pub fn symbol_freeze_check(
    group: &Group,
    f: &SampledSymbol,
    family: &TestVectorFamily,
    tol: f64,
) -> Result<DecaySequence> {
    let values = family
        .vectors
        .iter()
        .zip(&family.xi_seq)
        .map(|(u, xi)| {
            let j = group.window_index(xi).ok_or_else(|| Error::OutsideWindow(xi.to_string()))?;
            let op = op_apply(group, f, u)?;
            let frozen: Vec<Complex64> = f.column(j).iter().zip(&u.0).map(|(a, b)| a * b).collect();
            Ok(space_norm(&op.0.iter().zip(&frozen).map(|(a, b)| a - b).collect::<Vec<_>>()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DecaySequence { values, tol })
}

/// `i -> (mean_x |OSC^zeta_f(x, xi_i)|^2)^{1/2}`, evaluated from the symbol rule.
pub fn osc_l2_oracle(group: &Group, f: &Symbol, zeta: &DualPoint, xi_seq: &[DualPoint]) -> Vec<f64> {
    let osc = symbol_osc(group, f, zeta);
    let grid = group.grid_points();
    xi_seq.iter().map(|xi| space_norm(&grid.iter().map(|x| osc.eval(x, xi)).collect::<Vec<_>>())).collect()
}

/// Relative spectral leak of `u`: the share of `||u||^2` outside the window.
pub fn window_leak(group: &Group, u: &SpaceVec) -> Result<f64> {
    let w = fourier(group, u)?;
    let total = u.norm().powi(2);
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - w.norm().powi(2) / total).max(0.0))
}
