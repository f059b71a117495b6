//! Applications built on the decomposition algorithm.

pub mod datagen;
pub mod densest;
pub mod fista;
pub mod prox;
pub mod ratio;

pub use datagen::{gen_fused_data, gen_group_data, gen_group_data_with, DataError, FusedData, GroupData, GroupDataOptions};
pub use densest::{densest_levels, DensityLevel, DensityReport};
pub use fista::{fista_regress, DenseMatrix, FistaError, FistaOptions, RegressionRun};
pub use prox::{prox, prox_with_spec, ProxError, ProxProblem, ProxSolution, Regularizer};
pub use ratio::{min_ratio, MinRatio};
