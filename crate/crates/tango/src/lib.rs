//! Tensor-train compressed configuration-space modeling and motion planning.
//!
//! The pipeline implemented here approximates a task-metric-induced density
//! over a manipulator's configuration space in tensor-train (TT) form,
//! samples feasible and infeasible configurations from it, grows safe convex
//! regions around the good samples, and plans shortest paths through the
//! graph induced by pairwise region intersections. An RRT baseline and a
//! benchmark harness are included for comparison studies.
//!
//! Entry points:
//! - [`tt`] — TT data structure, algebra, rounding, cross approximation and
//!   conditional sampling.
//! - [`grid`] — discretization of the joint space, including virtual-dimension
//!   reshapes.
//! - [`kinematics`] — manipulator models, Jacobians, manipulability metrics
//!   and the density construction.
//! - [`geom`] — polytopes, ellipsoids and the small dense LP/QP/ellipsoid
//!   solvers they need.
//! - [`regions`] — clustering, convex obstacle construction, IRIS region
//!   inflation and pruning.
//! - [`planner`] — region graph construction and shortest-path queries.
//! - [`rrt`] / [`bench`] — baseline planner and the comparison harness.
//! - [`pipeline`] — persistent pipeline stages behind the `tango` binary.

pub mod bench;
pub mod geom;
pub mod grid;
pub mod kinematics;
pub mod pipeline;
pub mod planner;
pub mod regions;
pub mod rrt;
pub mod tt;

pub use grid::Grid;
pub use tt::TensorTrain;
