//! Exponent functions, densities and likelihoods of max-stable laws with
//! Bernstein-polynomial angular measures.

pub mod density;
pub mod exponent;
pub mod margins;
pub mod partition;

pub use density::{
    log_density, log_density_simple, log_likelihood, partition_probability, LinearDesign, LogLikelihood, ModelSpec,
};
pub use exponent::{design_row2, exponent_v, neg_v_coefficients, neg_v_i, neg_v_table};
pub use margins::{margin_transform, MarginFamily, MarginSpec};
pub use partition::{bell_number, enumerate_partitions, subset_mask, Partition, D_MAX};
