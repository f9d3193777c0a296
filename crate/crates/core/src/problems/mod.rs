//! Seeded instance generators, a Matrix Market reader and an on-disk cache.

mod cache;
mod defaults;
mod generate;
mod mtx;

pub use cache::{cache_root, InstanceCache, CACHE_ENV};
pub use defaults::{default_config, default_scheme, scheme_problem, FamilyDefaults};
pub use generate::{generate, Family, GeneratedInstance, GeneratorCase, InstanceSpec, Provenance, DEFAULT_LASSO_MU};
pub use mtx::read_matrix_market;
