//! Adam optimizer with bias correction.

use super::param::Param;
use super::tensor::Tensor;
use super::NnError;

/// Adam state over a fixed set of parameters.
pub struct Adam {
    params: Vec<Param>,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    /// Standard defaults: beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
    pub fn new(params: Vec<Param>, lr: f64) -> Self {
        let m = params.iter().map(|p| Tensor::zeros(&p.shape())).collect();
        let v = params.iter().map(|p| Tensor::zeros(&p.shape())).collect();
        Adam { params, m, v, step: 0, lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn zero_grad(&self) {
        for p in &self.params {
            p.zero_grad();
        }
    }

    /// One bias-corrected update from the accumulated gradients.
    ///
    /// All gradients are validated before any parameter moves, so a
    /// non-finite gradient leaves the state untouched.
    pub fn step(&mut self) -> Result<(), NnError> {
        for p in &self.params {
            if !p.grad().all_finite() {
                return Err(NnError::NonFinite { op: "adam_step" });
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (i, p) in self.params.iter().enumerate() {
            let m = self.m[i].data_mut();
            let v = self.v[i].data_mut();
            p.with_value_and_grad(|value, grad| {
                for j in 0..value.len() {
                    let g = grad[j];
                    m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g;
                    v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g * g;
                    let mhat = m[j] / bc1;
                    let vhat = v[j] / bc2;
                    value[j] -= self.lr * mhat / (vhat.sqrt() + self.eps);
                }
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr() {
        let p = Param::new("w", Tensor::scalar(0.0));
        p.accumulate_grad(&Tensor::scalar(1.0));
        let mut opt = Adam::new(vec![p.clone()], 1e-3);
        opt.step().unwrap();
        assert!((p.value().scalar_value() + 1e-3).abs() < 1e-8);
    }

    #[test]
    fn zero_grad_leaves_params_but_counts_step() {
        let p = Param::new("w", Tensor::scalar(0.25));
        let mut opt = Adam::new(vec![p.clone()], 1e-3);
        opt.step().unwrap();
        assert_eq!(p.value().scalar_value(), 0.25);
        assert_eq!(opt.step_count(), 1);
    }

    #[test]
    fn matches_scalar_reference_trace() {
        // Hand-rolled scalar Adam with constant gradient, two steps.
        let (lr, b1, b2, eps) = (0.01, 0.9, 0.999, 1e-8);
        let g = 0.5;
        let mut w_ref = 1.0;
        let (mut m, mut v) = (0.0, 0.0);
        for t in 1..=2 {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mhat = m / (1.0 - b1_pow(b1, t));
            let vhat = v / (1.0 - b1_pow(b2, t));
            w_ref -= lr * mhat / (vhat.sqrt() + eps);
        }

        let p = Param::new("w", Tensor::scalar(1.0));
        let mut opt = Adam::new(vec![p.clone()], lr);
        for _ in 0..2 {
            p.zero_grad();
            p.accumulate_grad(&Tensor::scalar(g));
            opt.step().unwrap();
        }
        assert!((p.value().scalar_value() - w_ref).abs() < 1e-12);
    }

    fn b1_pow(b: f64, t: u32) -> f64 {
        b.powi(t as i32)
    }

    #[test]
    fn non_finite_grad_is_an_error() {
        let p = Param::new("w", Tensor::scalar(0.0));
        p.accumulate_grad(&Tensor::scalar(f64::NAN));
        let mut opt = Adam::new(vec![p], 1e-3);
        assert!(matches!(opt.step(), Err(NnError::NonFinite { .. })));
    }
}
