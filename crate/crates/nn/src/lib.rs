//! Dense tensors, a tape-based reverse-mode autodiff and Adam, generic over
//! [`Scalar`] (`f32` / `f64`).

pub mod graph;
pub mod optim;
pub mod params;
pub mod tensor;

pub use graph::{Graph, Mask, Var};
pub use locavqg_core::Scalar;
pub use optim::{Adam, AdamConfig};
pub use params::{GradBuffer, ParamId, ParamStore};
pub use tensor::{log_softmax, softmax, Tensor};

pub type Tensor32 = Tensor<f32>;
pub type Tensor64 = Tensor<f64>;
pub type ParamStore32 = ParamStore<f32>;
pub type ParamStore64 = ParamStore<f64>;
