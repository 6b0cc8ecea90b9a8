//! Lower and upper bounds for the distance from `Op(f)` to the ideal
//! generated by symbols vanishing toward a corona filter.

mod approximants;
mod bounds;
mod decay;
mod sandwich;
mod vectors;

pub use approximants::{cutoff, ideal_approximants, svd_ranks, Approximant, ApproximantKind};
pub use bounds::{
    adaptive_radius, lower_bound_estimate, near_maximizers, ErrorBudget, LevelLowerBound, LowerBoundConfig,
};
pub use decay::{ideal_decay_check, osc_l2_oracle, symbol_freeze_check, window_leak, DecaySequence};
pub use sandwich::{sandwich, ApproximantNorm, SandwichConfig, SandwichLevel, SandwichReport, Verdict};
pub use vectors::{bump, grid_distance, make_test_vectors, modulated_translate, TestVectorFamily};
