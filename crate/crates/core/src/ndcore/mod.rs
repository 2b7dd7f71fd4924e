//! Dense numeric core: matrices, flat parameter vectors, a ReLU MLP with
//! analytic gradients, softmax cross-entropy and Adam.

mod adam;
pub mod blob;
mod mlp;
mod params;
mod tensor;

pub use adam::AdamState;
pub use mlp::{
    accuracy, backprop, backward, ce_logit_grad, ce_loss, forward, forward_cached, grad_check,
    loss_and_grad, softmax, ForwardCache,
};
pub use params::{ModelSpec, ParamVector, Segment};
pub use tensor::Tensor2;

pub(crate) use params::dot;

/// Model parameters bundled with the shape they were built for.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Model {
    pub spec: ModelSpec,
    pub params: ParamVector,
}

impl Model {
    pub fn init(spec: ModelSpec, seed: u64) -> Self {
        let params = spec.init(seed);
        Self { spec, params }
    }

    pub fn forward(&self, batch: &Tensor2) -> crate::Result<Tensor2> {
        forward(&self.params, &self.spec, batch)
    }

    pub fn accuracy(&self, features: &Tensor2, labels: &[usize]) -> crate::Result<f64> {
        accuracy(&self.params, &self.spec, features, labels)
    }
}
