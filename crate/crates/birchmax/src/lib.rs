//! Numerical laboratory for partial-sum maxima of complete exponential sums
//! over prime fields (Birch sums, Kloosterman sums, odd polynomial phases),
//! together with the independent Sato-Tate random model that predicts their
//! distribution and the analytic constants appearing in the tail laws.
//!
//! The crate is organized in layers:
//!
//! * [`field`]: prime-field contexts, additive characters, phase evaluation.
//! * [`dft`]: prime-length transforms (naive and FFT-backed) and cyclic convolution.
//! * [`engine`]: complete-sum tables, checkpointed partial sums, max profiles,
//!   empirical distributions, Fourier cutoff coefficients, Plancherel reconstruction.
//! * [`model`]: Sato-Tate sampling, moments and MGF, the random Fourier series
//!   simulation, model-side Laplace transforms and moment oracles.
//! * [`analytic`]: the envelope function g, its Fourier coefficients, the
//!   sup-norm functional over extreme sequences, and the tail-law constants.
//! * [`moments`]: arithmetic-vs-model cross-checks (mixed moments, weighted
//!   moments, Laplace transforms, KS equidistribution, extreme search).
//! * [`cache`] / [`csvout`]: binary result caching and stable CSV emission.

pub mod analytic;
pub mod cache;
pub mod csvout;
pub mod dft;
pub mod engine;
pub mod error;
pub mod field;
pub mod model;
pub mod moments;
pub mod par;
pub mod quad;

pub use error::{Error, Result};
pub use field::{FieldContext, TraceFamily};
