//! Geometric attitude control and gradient-free source seeking for swarms of
//! constant-speed 3D unicycles.
//!
//! - [`so3`]: rotation group kernel (hat/vee, exp/log, metrics, adjoint).
//! - [`attitude`]: attitude error, controllers and gain selection.
//! - [`deployment`]: swarm statistics, ascending-direction estimate, deployment gains.
//! - [`fields`]: analytic scalar fields.
//! - [`sim`]: deterministic closed-loop simulator.

// `!(x <= tol)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attitude;
pub mod deployment;
pub mod error;
pub mod fields;
pub mod linalg;
pub mod sim;
pub mod so3;

pub use nalgebra::{Matrix3, Vector3};

pub use attitude::{AttitudeError, ControllerConfig, DesiredAttitudeRate};
pub use deployment::{DeploymentStats, GainPlan};
pub use error::{Error, Result};
pub use fields::{Field, FieldSpec};
pub use sim::{SimConfig, Simulation, StepRecord};
pub use so3::{Rotation, RotationVector, SkewMatrix, UnitVector3};
