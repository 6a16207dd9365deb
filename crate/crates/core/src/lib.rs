//! Out-of-time-ordered correlators for a chaotic many-body system modelled by a
//! locally-GOE banded random-matrix ensemble.
//!
//! The crate has three independent routes to the same quantities:
//!
//! * [`otoc`] samples ensemble members ([`ensemble`]), builds the complex
//!   propagators `Y(χ) = O diag(exp{χE}) Oᵀ` ([`propagator`]) and averages
//!   `C(t)` and `F(t)` by Monte Carlo.
//! * [`analytic`] evaluates the leading-order large-`N` closed forms.
//! * [`wick`] enumerates Gaussian pair contractions and integrates the shared
//!   eigenvalue of each contraction block exactly; it is the authority the
//!   closed forms are checked against.
//!
//! [`cli`] wires all three into the `otoc-rmt` binary. Units: `ħ = 1`; the
//! command-line layer measures energies in mean spacings and times in `1/Δ`.

pub mod analytic;
pub mod cli;
pub mod ensemble;
mod error;
pub mod linalg;
pub mod observables;
pub mod otoc;
pub mod propagator;
pub mod stats;
pub mod wick;

pub use error::{Error, Result};

pub use num_complex::Complex64;
