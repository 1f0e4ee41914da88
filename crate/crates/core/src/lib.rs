//! Multilinear games, their tensor complementarity formulation and a
//! smoothing Newton solver.
//!
//! Everything is generic over the scalar type; the aliases below fix it to
//! `f64`.

// `!(a > b)` is deliberate wherever NaN must fail the test
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bridge;
pub mod driver;
pub mod error;
pub mod game;
pub mod linalg;
pub mod scalar;
pub mod solver;
pub mod tcp;
pub mod tensor;

pub use error::{Error, Result};

pub type Tensor = tensor::DenseTensor<f64>;
pub type Game = game::MultilinearGame<f64>;
pub type Profile = game::MixedProfile<f64>;
pub type Tcp = tcp::TcpInstance<f64>;
pub type Config = solver::SolverConfig<f64>;
pub type Report = solver::SolveReport<f64>;
pub type Options = driver::DriverOptions<f64>;
pub type Solution = driver::Solution<f64>;
