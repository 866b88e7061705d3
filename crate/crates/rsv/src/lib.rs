//! Numerical solver for regular singular Volterra integral equations on rays
//! in the complex plane, with a ray Laplace transform for producing analytic
//! solutions of level-1 linear ODEs with prescribed exponential asymptotics.

pub mod error;
pub mod grid;
pub mod kernels;
pub mod laplace;
pub mod level1;
pub mod poly;
pub mod proto;
pub mod quad;
pub mod solver;
pub mod volterra;

pub use error::{Error, Result};
