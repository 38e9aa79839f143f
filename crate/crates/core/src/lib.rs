//! Capacity bounds for the state-dependent relay channel whose source knows
//! the state noncausally.
//!
//! The crate is generic over the scalar type through [`Real`]; the `*F64`
//! and `*F32` aliases below fix the common choices.

// Negated comparisons deliberately treat NaN as failing a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dm;
pub mod gauss_bounds;
pub mod gauss_mi;
mod linalg;
pub mod optimize;
pub mod oracle;
pub mod scalar;

pub use scalar::{lit, Real};

pub type GaussianSystemF64 = gauss_mi::GaussianSystem<f64>;
pub type GaussianSystemF32 = gauss_mi::GaussianSystem<f32>;
pub type GaussianRelayParamsF64 = gauss_bounds::GaussianRelayParams<f64>;
pub type GaussianRelayParamsF32 = gauss_bounds::GaussianRelayParams<f32>;
pub type HyperSourceParamsF64 = gauss_bounds::HyperSourceParams<f64>;
pub type HyperSourceParamsF32 = gauss_bounds::HyperSourceParams<f32>;
pub type StateDescParamPointF64 = gauss_bounds::StateDescParamPoint<f64>;
pub type BoundResultF64 = gauss_bounds::BoundResult<f64>;
pub type SearchBoxF64 = optimize::SearchBox<f64>;
pub type DmChannelF64 = dm::DmChannel<f64>;
pub type DmJointF64 = dm::DmJoint<f64>;
