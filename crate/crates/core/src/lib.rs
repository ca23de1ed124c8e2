//! Deciding whether an H-polytope `P = {x | a - A x >= 0}` is contained in a
//! V-polytope `Q = conv(B)`.
//!
//! Two independent routes are provided:
//!
//! * [`oracle`]: exact rational evaluation of `mu* = max x^T z` over
//!   `P x Q°`, which is `<= 1` exactly when `P` is contained in `Q`;
//! * [`sos`]: the truncated quadratic-module relaxation of the same bilinear
//!   program, solved with the embedded interior-point method in [`sdp`] and
//!   checked independently by [`certify`].

pub mod certify;
pub mod error;
pub mod io;
pub mod lp;
pub mod oracle;
pub mod poly;
pub mod polytope;
pub mod rational;
pub mod sdp;
pub mod sos;

pub use error::{Error, Result};
pub use polytope::{HPolytope, NormalizedPair, VPolytope};
pub use rational::Rational;
