//! Finite truncations of the explicit counterexamples.
//!
//! Every generator takes its truncation (k, grid, M, I, cells) explicitly,
//! since the statements being illustrated are asymptotic.

mod paths;
mod spiky;
mod witness;

pub use paths::{
    interval_family, interval_sequence, nonouter_experiment, radial_family, radial_sequence, NonouterReport, RadialGrid,
};
pub use spiky::{
    construction_families, nonincr_measures_family, prime_g_system, spiky_radii, spiky_space, GSystem, SpikySpace,
    DEFAULT_CELLS_PER_SEGMENT,
};
pub use witness::{construction_witness, random_candidate, Verdict, WitnessReport, WITNESS_TOL};
