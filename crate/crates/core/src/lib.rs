// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod densities;
pub mod error;
pub mod model;
pub mod scalar;
pub mod simulate;
pub mod specialfn;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ModelParamsF64 = model::ModelParams<f64>;
pub type ModelParamsF32 = model::ModelParams<f32>;
pub type SkewSpecF64 = model::SkewSpec<f64>;
pub type SkewSpecF32 = model::SkewSpec<f32>;
pub type SimConfigF64 = simulate::SimConfig<f64>;
pub type SimConfigF32 = simulate::SimConfig<f32>;
pub type PathGridF64 = simulate::PathGrid<f64>;
pub type PathGridF32 = simulate::PathGrid<f32>;
pub type DensityQueryF64 = densities::DensityQuery<f64>;
pub type DensityQueryF32 = densities::DensityQuery<f32>;
