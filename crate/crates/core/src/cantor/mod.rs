//! Symbolic minimal Cantor systems: odometers and primitive substitution
//! subshifts, their clopen sets, finitely coded points and invariant measure.

mod clopen;
mod function;
mod measure;
mod point;
mod system;

pub use clopen::{ClopenJson, ClopenSet, Window};
pub use function::{Coefficient, IntFunction, LocallyConstant};
pub use measure::{InvariantMeasure, Weight, EPS_MU};
pub use point::PointCode;
pub use system::{Family, Substitution, SymbolicSystem, DEFAULT_APERIODICITY_BOUND};

/// A finite word over the symbol indices of a system.
pub type Word = Vec<u8>;
