//! Residual combinatorics of the essentially tame local Jacquet–Langlands
//! transfer.
//!
//! Inertial classes of discrete series representations with a fixed
//! endo-class are parametrized by Frobenius orbits of characters of a finite
//! field `k^×`. This crate models those characters as exponents modulo the
//! group order, and on top of that builds
//!
//! * orbit enumeration, parametric degrees and ℓ-regular parts
//!   ([`characters`]),
//! * ℓ-linking chains and semi-simple endo-classes ([`linking`]),
//! * Zsigmondy primes and the regularizing lift to a blown-up level, with the
//!   transfer descent rule ([`regularize`]),
//! * the rectifier character and the transfer permutation on orbits and on
//!   residual admissible pairs ([`tame_transfer`]),
//! * regular-elliptic traces of Green's supercuspidal representations as
//!   exact sums of roots of unity ([`green_traces`]).
//!
//! Group orders are arbitrary-precision integers. Sweeps over all orbits of a
//! level run on rayon when the `parallel` feature is enabled (the default).

pub mod characters;
pub mod error;
pub mod factor;
pub mod green_traces;
pub mod limits;
pub mod linking;
pub mod par;
pub mod regularize;
pub mod serde_big;
pub mod tame_transfer;
pub mod tower;

pub use characters::{CharExp, GaloisOrbit};
pub use error::{Error, Result};
pub use green_traces::CyclotomicSum;
pub use linking::{LinkChain, SemiSimpleEndoClass, SimpleParam, ThetaId};
pub use par::Execution;
pub use regularize::{RegularizationLift, ZsigmondyCertificate};
pub use tame_transfer::{RectifierSpec, TamePairClass};
pub use tower::{FieldLevel, TowerParams};
