//! Fixtures shared by the benchmarks.

use psido_core::symbols::gallery;
use psido_core::{Complex64, Group, GroupSpec, SpaceVec, Symbol};

pub fn torus(dim: usize, radius: i64) -> Group {
    Group::new(GroupSpec::torus(dim, radius)).expect("valid torus")
}

/// Deterministic non-smooth grid function.
pub fn sample_vector(group: &Group) -> SpaceVec {
    SpaceVec((0..group.grid_len()).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect())
}

pub fn gallery_symbol(name: &str, group: &Group) -> Symbol {
    gallery::by_name(name, group).expect("gallery entry")
}
