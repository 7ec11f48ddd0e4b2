//! Swimmers learning to ascend through Taylor–Green cellular flows.
//!
//! * [`flow`]: closed-form stationary and decaying Taylor–Green fields.
//! * [`spectral`]: pseudo-spectral 2D Navier–Stokes solver used to check
//!   that those fields are exact solutions.
//! * [`swimmer`]: kinematics of a steered point swimmer.
//! * [`env`] / [`mdp`]: discrete episodic environments.
//! * [`qlearning`]: tabular Q-learning and baseline policies.
//! * [`ensemble`]: parallel evaluation of frozen policies.
//! * [`pipe`]: Poiseuille profile and disturbance norm.
//!
//! Numerical types are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision instantiation.

// `!(x > 0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod env;
pub mod flow;
pub mod mdp;
pub mod pipe;
pub mod qlearning;
pub mod scalar;
pub mod seed;
pub mod spectral;
pub mod swimmer;

pub use env::{Action, EnvConfig, EnvError, Environment, InitRegion, Observation, SwimmerEnv, Transition};
pub use flow::{FlowError, FlowSample, TaylorGreenField};
pub use qlearning::{greedy_policy, naive_policy, train, Hyperparams, QTable, TabularPolicy};
pub use scalar::Real;
pub use spectral::{SolverConfig, SolverError, SpectralSolver, SpectralState};
pub use swimmer::{SwimmerParams, SwimmerState};

pub type TaylorGreenField64 = TaylorGreenField<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SpectralSolver64 = SpectralSolver<f64>;
pub type SpectralState64 = SpectralState<f64>;
pub type SwimmerParams64 = SwimmerParams<f64>;
pub type SwimmerState64 = SwimmerState<f64>;
pub type EnvConfig64 = EnvConfig<f64>;
pub type SwimmerEnv64 = SwimmerEnv<f64>;
pub type Hyperparams64 = Hyperparams<f64>;
pub type QTable64 = QTable<f64>;
pub type PipeProfile64 = pipe::PipeProfile<f64>;

pub type TaylorGreenField32 = TaylorGreenField<f32>;
pub type SpectralSolver32 = SpectralSolver<f32>;
pub type SwimmerEnv32 = SwimmerEnv<f32>;
