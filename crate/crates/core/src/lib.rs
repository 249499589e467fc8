//! Tied-weight autoencoders with contractive and denoising objectives,
//! greedy layer-wise stacking, and a native SMO support vector machine for
//! classifying the learned features.
//!
//! The four layer objectives share one code path:
//!
//! | variant | encoder input | penalty |
//! |---------|---------------|---------|
//! | AE      | `x`           | none    |
//! | DAE     | `x̃`           | none    |
//! | CAE     | `x`           | `λ‖J_h(x)‖²_F` |
//! | CDAE    | `x̃`           | `λ‖J_h(x̃)‖²_F` |
//!
//! Every variant reconstructs the clean `x`. See the `examples/` directory
//! of this crate for one runnable program per capability.

pub mod autoencoder;
pub mod corruption;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod math;
pub mod stack;
pub mod svm;

pub use error::{Error, Result};
