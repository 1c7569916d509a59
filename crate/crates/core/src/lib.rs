//! Exact computation in the diffeomorphism group of the p-adic unit ball.
//!
//! Everything is built on fixed-precision exact arithmetic in `Q_p`
//! ([`padic::PadicNumber`]); no norm or distance is ever a float
//! ([`padic::Val`] carries the exponent `w` of a value `p^(-w)`).
//!
//! The layers, bottom up:
//!
//! * [`padic`] -- scalars, valuations, factorial valuations, `exp`/`log`.
//! * [`mahler`] -- truncated expansions in the binomial-coefficient basis,
//!   difference quotients, grid `C(t)` norms, analyticity, antiderivatives.
//! * [`diffeo`] -- near-identity maps `Z_p -> Z_p`: composition, inversion,
//!   the ultrametric distance, the clopen ball `W`, weighted norms.
//! * [`flows`] -- vector fields, brackets, operator exponentials, logarithms
//!   of near-identity maps, monomial flows, BCH discrepancies.
//! * [`profinite`] -- truncation to permutations of `Z/p^l`, tower
//!   consistency, closure of finite permutation groups, ball swaps.
//! * [`symplectic`] -- polynomial maps of `Q_p^n`, 1-/2-forms, potential and
//!   symplectic invariance, Lie-derivative kernels.
//! * [`reps`] -- exact character tables, Frobenius induction, Mackey
//!   restriction and internal tensor products for finite quotients.

// index loops are the natural idiom in the elimination and table code
#![allow(clippy::needless_range_loop)]

pub mod diffeo;
pub mod error;
pub mod flows;
pub mod mahler;
pub mod padic;
pub mod profinite;
pub mod reps;
pub mod sample;
pub mod symplectic;

pub use error::{Error, Result};
