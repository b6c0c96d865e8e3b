//! Numerical plumbing shared by the geometric modules: adaptive explicit
//! Runge–Kutta integration with dense output, adaptive quadrature and root
//! finding. Everything here is a pure function of its arguments.

mod ode;
mod quadrature;
mod roots;

pub use ode::{integrate, integrate_with, IntegratorOptions, OdeProblem, Trajectory};
pub use quadrature::{quadrature, trapezoid};
pub use roots::{find_root, find_root_bracketed, RootProblem};
