//! A laboratory for finite presheaf toposes.
//!
//! Sites are finite categories given by explicit composition tables. Over a
//! site we compute presheaves, their finite limits and colimits, exponentials,
//! the subobject classifier of sieves, the double-negation topology with
//! sheafification, decidable objects with their coreflection, and geometric
//! morphisms together with every adjoint that exists. The [`theorems`] module
//! runs a catalogue of statements about these constructions over a fixed
//! corpus of example toposes and reports a verdict with a replayable witness
//! for each.

pub mod cli;
pub mod decidable;
pub mod enumerate;
pub mod error;
pub mod fincat;
pub mod geom;
pub mod io;
pub mod presheaf;
pub mod sublattice;
pub mod theorems;

pub use error::{Error, Result};
pub use fincat::{FinCategory, FinFunctor};
pub use presheaf::{Presheaf, PresheafMap, PresheafTopos};
pub use sublattice::{LTTopology, Subobject};
