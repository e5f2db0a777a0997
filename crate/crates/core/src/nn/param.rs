//! Trainable parameters.

use std::cell::RefCell;
use std::rc::Rc;

use super::tensor::Tensor;

/// A named, trainable tensor with an accumulated gradient buffer.
///
/// Cloning a `Param` clones the handle, not the storage: the graph, the
/// optimizer and the owning module all see the same values. Single
/// module instances are single-threaded by contract, so `Rc<RefCell>`
/// is the right amount of machinery.
#[derive(Clone)]
pub struct Param {
    inner: Rc<RefCell<ParamInner>>,
}

struct ParamInner {
    name: String,
    value: Tensor,
    grad: Tensor,
}

impl Param {
    pub fn new(name: impl Into<String>, value: Tensor) -> Self {
        let grad = Tensor::zeros(value.shape());
        Param { inner: Rc::new(RefCell::new(ParamInner { name: name.into(), value, grad })) }
    }

    pub fn name(&self) -> String {
        self.inner.borrow().name.clone()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.inner.borrow().value.shape().to_vec()
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Copy of the current value.
    pub fn value(&self) -> Tensor {
        self.inner.borrow().value.clone()
    }

    /// Copy of the accumulated gradient.
    pub fn grad(&self) -> Tensor {
        self.inner.borrow().grad.clone()
    }

    pub fn set_value(&self, t: Tensor) {
        let mut inner = self.inner.borrow_mut();
        assert_eq!(inner.value.shape(), t.shape(), "set_value shape mismatch on {}", inner.name);
        inner.value = t;
    }

    pub fn accumulate_grad(&self, g: &Tensor) {
        let mut inner = self.inner.borrow_mut();
        inner.grad.add_assign(g);
    }

    pub fn zero_grad(&self) {
        self.inner.borrow_mut().grad.fill(0.0);
    }

    /// Mutate value and grad together (used by the optimizer).
    pub fn with_value_and_grad<R>(&self, f: impl FnOnce(&mut [f64], &[f64]) -> R) -> R {
        let mut inner = self.inner.borrow_mut();
        let ParamInner { value, grad, .. } = &mut *inner;
        f(value.data_mut(), grad.data())
    }

    /// Perturb one element in place; returns the previous value.
    pub fn nudge(&self, idx: usize, delta: f64) -> f64 {
        let mut inner = self.inner.borrow_mut();
        let old = inner.value.data()[idx];
        inner.value.data_mut()[idx] = old + delta;
        old
    }

    pub fn set_element(&self, idx: usize, v: f64) {
        self.inner.borrow_mut().value.data_mut()[idx] = v;
    }

    /// Two handles referring to the same storage.
    pub fn same_storage(&self, other: &Param) -> bool {
        Rc::ptr_eq(&self.inner, &other.inner)
    }
}

impl std::fmt::Debug for Param {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let inner = self.inner.borrow();
        write!(f, "Param({}, shape {:?})", inner.name, inner.value.shape())
    }
}
