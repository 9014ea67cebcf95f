//! Variational two-soliton bosonic Josephson junction.
//!
//! The state of two weakly linked bright solitons is reduced to the
//! population imbalance `z` and the relative phase `Θ`. The crate evaluates
//! the overlap functionals that couple them, integrates the resulting
//! Hamiltonian flow, locates steady states and their bifurcation, and
//! evaluates the closed-form metrology estimators built on those states.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod approx;
pub mod dynamics;
mod error;
pub mod functionals;
pub mod metrology;
pub mod model;
mod scalar;
pub mod steady;

pub use error::{Error, Result};
pub use functionals::{EvalKind, Evaluator, FunctionalMode};
pub use model::{derive_params, Side, ThetaBranch};
pub use scalar::Real;

pub type Params = model::ModelParams<f64>;
pub type State = model::PhaseState<f64>;
pub type Profile = model::SolitonProfile<f64>;
pub type Values = functionals::FunctionalValues<f64>;
pub type Steady = steady::SteadyState<f64>;
pub type Bifurcation = steady::BifurcationResult<f64>;
pub type Orbit = dynamics::Trajectory<f64>;
pub type Label = dynamics::RegimeLabel<f64>;
pub type Oscillation = dynamics::LinearOscillation<f64>;
pub type Cat = metrology::CatPair<f64>;
pub type Report = metrology::MetrologyReport<f64>;
