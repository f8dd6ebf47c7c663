//! Tropical Landau-Ginzburg potentials of the projective plane with marked
//! points, and the tropical descendent invariants read off from them.
//!
//! The pipeline is: sample points in general position, build the
//! scattering diagram ([`scatter`]), sum broken lines into the potential
//! ([`broken`]), expand and pair against the period coefficients
//! ([`descend`]).

pub mod broken;
pub mod coeff;
pub mod descend;
pub mod error;
pub mod lattice;
pub mod sample;
pub mod scatter;

pub use broken::{enumerate_broken_lines, potential, transport, BendEvent, BrokenLine, Potential};
pub use coeff::{Monomial, Series, Term, USet};
pub use descend::{extract_invariants, DescendentTable, Family};
pub use error::{Error, Result};
pub use lattice::{DegreeVec, LatticeVec, RatPoint, Rational};
pub use sample::{invariants_for, sample_generic, SampleConfig, Sampled};
pub use scatter::{build_diagram, check_consistency, path_product, Diagram, Ray};
