//! Layer building blocks shared by the policy and intrinsic networks.

use rand::Rng;

use super::graph::{Graph, NodeId};
use super::init;
use super::param::Param;
use super::tensor::Tensor;
use super::NnError;

/// Fully connected layer `y = x W + b`.
pub struct Linear {
    pub w: Param,
    pub b: Param,
}

impl Linear {
    /// Uniform `±1/sqrt(fan_in)` weights and biases.
    pub fn uniform<R: Rng>(name: &str, fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (fan_in as f64).sqrt();
        Linear {
            w: Param::new(format!("{name}.w"), init::uniform_fan_in(fan_in, fan_out, rng)),
            b: Param::new(format!("{name}.b"), Tensor::uniform(&[fan_out], -bound, bound, rng)),
        }
    }

    /// Orthogonal weights with the given gain, zero biases.
    pub fn orthogonal<R: Rng>(name: &str, fan_in: usize, fan_out: usize, gain: f64, rng: &mut R) -> Self {
        Linear {
            w: Param::new(format!("{name}.w"), init::orthogonal(fan_in, fan_out, gain, rng)),
            b: Param::new(format!("{name}.b"), Tensor::zeros(&[fan_out])),
        }
    }

    pub fn forward(&self, g: &mut Graph, x: NodeId) -> Result<NodeId, NnError> {
        let w = g.param(&self.w)?;
        let b = g.param(&self.b)?;
        g.linear(x, w, b)
    }

    pub fn params(&self) -> Vec<Param> {
        vec![self.w.clone(), self.b.clone()]
    }
}

/// One-hot encode a batch of action indices into `[B, n]`.
pub fn one_hot_batch(indices: &[usize], n: usize) -> Tensor {
    let mut t = Tensor::zeros(&[indices.len(), n]);
    for (r, &idx) in indices.iter().enumerate() {
        assert!(idx < n, "one_hot index {idx} out of range {n}");
        t.data_mut()[r * n + idx] = 1.0;
    }
    t
}
