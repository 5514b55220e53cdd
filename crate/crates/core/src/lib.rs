//! Averaged-gradient ("Grad-Avg") descent and the machinery used to study it.
//!
//! - [`numcore`]: parameter vectors, symmetric matrices, seeded RNG and the
//!   [`Objective`](numcore::Objective) contract.
//! - [`optim`]: Grad-Avg, SGD, heavy-ball momentum and Nesterov step rules.
//! - [`testbed`]: analytic objectives with closed-form iterate oracles.
//! - [`nn`]: a dense feed-forward network with exact backpropagation.
//! - [`data`]: CSV / IDX ingestion, splitting, standardization, batching.

pub mod data;
pub mod nn;
pub mod numcore;
pub mod optim;
pub mod testbed;

pub use numcore::{Batch, NumError, Objective, ParamVector, SeededRng, SymmetricMatrix};
pub use optim::{Hyperparams, OptimError, OptimizerKind, OptimizerState};
