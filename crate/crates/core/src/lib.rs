//! Weighted modular density ideals `Z_g(f)`: exact counting on structured
//! subsets of the naturals, ratio traces, decompositions and constructions.

pub mod constructions;
pub mod decomposition;
pub mod density;
pub mod functions;
pub mod natural;
pub mod omega_sets;
pub mod schedule;
pub mod specs;
pub mod verify;

pub use natural::Natural;
pub use schedule::Schedule;
