//! Exact solution and stochastic simulation of coagulation with the
//! multiplicative kernel `K(x, y) = x y` and fragmentation at rate `k x`
//! into uniformly distributed pieces.
//!
//! The state is the mass-weighted measure `ν(t, dx) = x μ(t, dx)` with unit
//! total mass, tracked through its Laplace transform
//! `L(t, s) = ∫ e^{-s x} ν(t, dx)`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod config;
pub mod error;
pub mod laplace;
pub mod massflow;
pub mod measure;
pub mod monotone;
pub mod output;
pub mod quad;
pub mod roots;
pub mod selfsimilar;
pub mod special;
pub mod validation;

pub use characteristics::Characteristics;
pub use error::{CoreError, Result};
pub use laplace::{moment_asymptote, LaplaceEvaluator, TimeSlice};
pub use measure::{MeasureSpec, TransformValue};
pub use selfsimilar::SelfSimilarProfile;
