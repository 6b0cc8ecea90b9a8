//! Pseudodifferential operators on compact abelian groups `T^a x Z_m` at
//! finite resolution, and a harness for Gohberg-type lower bounds toward
//! anisotropic parts of the corona.

pub mod crossed;
pub mod error;
pub mod fourier;
pub mod gohberg;
pub mod group;
pub mod linop;
pub mod quantize;
pub mod symbols;

pub use crossed::{compose, involution, partial_fourier, partial_fourier_inv, sch, CrossedElement};
pub use error::{Error, Result};
pub use fourier::{fourier, fourier_direct, inv_fourier, inv_fourier_direct, translate_space, DualVec, SpaceVec};
pub use group::{Coord, DualPoint, Factor, Group, GroupPoint, GroupSpec};
pub use linop::{operator_norm, operator_norm_seeded, singular_values, svd_truncations, LinOp, NormEstimate, Side};
pub use quantize::{apply_kernel, hs_norm, kernel_of, op_apply, op_quantize, op_quantize_direct, right_quantize};
pub use symbols::{
    d_omega, dual_osc, ideal_membership, symbol_osc, upper_d_omega, vo_diagnostic, CoronaFilter, DOmegaReport,
    DualFunction, FilterKind, LevelSequence, OscillationReport, SampledSymbol, SpaceFunction, Symbol,
};

pub use num_complex::Complex64;
