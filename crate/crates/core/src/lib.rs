//! k-fold semi-monotone invariant sets of degree-one bimodal circle maps.
//!
//! The modules build on each other bottom-up: exact arithmetic ([`exactnum`]),
//! symbol sequences ([`subshift`]), the Hedlund-Morse construction ([`hm`]),
//! piecewise-linear bimodal maps ([`circlemap`]) and the interpolated flat-spot
//! family with its rotation-number diagram ([`interp`]).

pub mod circlemap;
pub mod error;
pub mod exactnum;
pub mod hm;
pub mod interp;
pub mod subshift;

pub use error::{Error, Result};
pub use exactnum::{CirclePoint, Rational};
