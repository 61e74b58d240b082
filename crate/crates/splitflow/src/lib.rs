//! Inertial first-order optimization methods with Hessian-driven damping.
//!
//! The crate has four layers:
//!
//! * [`objective`]: smooth convex test functions with gradients, Hessian actions
//!   and Lipschitz constants.
//! * [`schedule`]: coefficient schedules for the generalized inertial method and
//!   their admissibility thresholds.
//! * [`discrete`] and [`continuous`]: the iterative algorithms, and the
//!   continuous-time systems whose splittings reproduce them.
//! * [`analysis`] and [`harness`]: energy functionals, rate fits, lemma checks,
//!   and the experiment driver behind the `splitflow` binary.

pub mod analysis;
pub mod continuous;
pub mod discrete;
pub mod harness;
pub mod objective;
pub mod schedule;
pub mod vector;

pub use objective::Objective;
pub use schedule::Schedule;
