//! Symbolic moment brackets, effective Hamiltonians and equations of motion
//! for semiclassical moment truncations, plus the integrators and scenario
//! drivers built on them.

pub mod bracket;
pub mod combinatorics;
pub mod eom;
pub mod error;
pub mod expr;
pub mod hamiltonian;
pub mod integrator;
pub mod moment;
pub mod parse;
mod reference;
pub mod scenarios;
pub mod weyl;

pub use bracket::{bracket_functions, bracket_moments, bracket_moments_with, BracketEngine, BracketRule};
pub use eom::{compare_systems, generate, reference_system, EffectiveSystem, HamiltonianCut};
pub use error::{Error, Result};
pub use expr::{Expr, Rational, Symbol};
pub use hamiltonian::ClassicalModel;
pub use integrator::{integrate, IntegratorConfig, Method, Termination, Trajectory};
pub use moment::{enumerate_moments, uncertainty_ok, MomentIndex, SystemState, UncertaintyCheck};
pub use scenarios::Scenario;
pub use weyl::{oracle_bracket, WeylOracle};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
