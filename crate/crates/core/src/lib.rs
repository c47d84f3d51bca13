//! Moduli of families of measures on discretized metric measure spaces.
//!
//! The crate computes the `M_p` modulus of a finite family of measures (with
//! optional restrictions on the admissible densities), estimates the
//! approximation modulus `AM` along increasing families, and computes the
//! dual quantity, the `p`-plan content, through atomic plans over the family.
//! The [`counterexamples`] module builds the explicit families (interval
//! paths, radial paths, spiky spaces) whose finite truncations exhibit the
//! gaps between these quantities.
//!
//! All optimization is done by the in-crate [`solver`]: a revised simplex
//! method with duality and Farkas certificates for `p = 1`, and dual
//! coordinate ascent / projected gradient methods for `p > 1`.

pub mod content;
pub mod counterexamples;
mod error;
pub mod measures;
pub mod modulus;
pub mod random;
pub mod solver;
pub mod space;

pub use error::{Error, Result};
pub use space::ExtendedValue;
