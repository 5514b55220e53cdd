//! Deterministic numeric foundation shared by every other module.

mod error;
mod matrix;
mod objective;
mod rng;
mod vector;

pub use error::NumError;
pub use matrix::{spd_max_eigenvalue, SymmetricMatrix, POWER_ITERATION_CAP};
pub use objective::{Batch, Objective};
pub use rng::SeededRng;
pub use vector::{axpy, norm2, ParamVector};
