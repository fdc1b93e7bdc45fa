//! Builders for every process object: complete and deleting-item partial-sum
//! paths (step and polygonal), empirical distribution paths, and sequential
//! empirical fields.
//!
//! All builders are pure functions of their inputs. Paths live on the uniform
//! grid `t_g = g / grid_size`.

mod empirical;
mod partial_sum;
mod sequential;

pub use empirical::{build_empirical, empirical_sup_exact, EmpiricalFlavor, EmpiricalPath};
pub use partial_sum::{
    build_deleted_partial_sum, build_partial_sum, raw_deleted_sums, Interpolation, PathOnGrid,
};
pub use sequential::{build_sequential_field, SequentialField, TestFunction};

pub(crate) fn grid_times(grid_size: usize) -> Vec<f64> {
    (0..=grid_size).map(|g| g as f64 / grid_size as f64).collect()
}

pub(crate) fn running_sums(weights: &[f64]) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(weights.len() + 1);
    let mut acc = 0.0;
    prefix.push(acc);
    for &w in weights {
        acc += w;
        prefix.push(acc);
    }
    prefix
}
