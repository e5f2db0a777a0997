//! Tape-based reverse-mode automatic differentiation.
//!
//! A `Graph` records one forward computation as a flat list of nodes;
//! `backward` walks the tape in reverse and accumulates gradients into
//! the `Param`s that fed it. Graphs are cheap and rebuilt per step.
//!
//! Every op validates its output for NaN/Inf immediately, so a
//! non-finite value surfaces as an error naming the op that produced it
//! instead of propagating silently.

use super::param::Param;
use super::tensor::{matmul, matmul_nt, matmul_tn, Tensor};
use super::NnError;

pub type NodeId = usize;

/// Clamp bound applied inside the binary cross-entropy op.
pub const BCE_CLAMP: f64 = 1e-7;

enum Op {
    Leaf,
    Param(Param),
    Detach,
    Linear { x: NodeId, w: NodeId, b: NodeId },
    Relu { x: NodeId },
    Sigmoid { x: NodeId },
    Tanh { x: NodeId },
    Softmax { x: NodeId },
    Exp { x: NodeId },
    Add { a: NodeId, b: NodeId },
    Sub { a: NodeId, b: NodeId },
    Mul { a: NodeId, b: NodeId },
    Scale { x: NodeId, c: f64 },
    Clamp { x: NodeId, lo: f64, hi: f64 },
    MinElem { a: NodeId, b: NodeId },
    ConcatCols { a: NodeId, b: NodeId },
    MeanAll { x: NodeId },
    SqNormRowsMean { x: NodeId },
    CrossEntropyMean { logits: NodeId, targets: Vec<usize> },
    GatherLogSoftmax { logits: NodeId, targets: Vec<usize> },
    EntropyMean { logits: NodeId },
    BceMean { pred: NodeId, target: NodeId },
    GaussianKlMean { mu: NodeId, log_var: NodeId },
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::Param(_) => "param",
            Op::Detach => "detach",
            Op::Linear { .. } => "linear",
            Op::Relu { .. } => "relu",
            Op::Sigmoid { .. } => "sigmoid",
            Op::Tanh { .. } => "tanh",
            Op::Softmax { .. } => "softmax",
            Op::Exp { .. } => "exp",
            Op::Add { .. } => "add",
            Op::Sub { .. } => "sub",
            Op::Mul { .. } => "mul",
            Op::Scale { .. } => "scale",
            Op::Clamp { .. } => "clamp",
            Op::MinElem { .. } => "min_elem",
            Op::ConcatCols { .. } => "concat_cols",
            Op::MeanAll { .. } => "mean_all",
            Op::SqNormRowsMean { .. } => "sq_norm_rows_mean",
            Op::CrossEntropyMean { .. } => "cross_entropy",
            Op::GatherLogSoftmax { .. } => "gather_log_softmax",
            Op::EntropyMean { .. } => "entropy",
            Op::BceMean { .. } => "bce",
            Op::GaussianKlMean { .. } => "gaussian_kl",
        }
    }
}

/// One recorded forward computation.
#[derive(Default)]
pub struct Graph {
    values: Vec<Tensor>,
    ops: Vec<Op>,
    requires: Vec<bool>,
    grads: Vec<Option<Tensor>>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    fn push(&mut self, op: Op, value: Tensor, requires: bool) -> Result<NodeId, NnError> {
        if !value.all_finite() {
            return Err(NnError::NonFinite { op: op.name() });
        }
        self.values.push(value);
        self.ops.push(op);
        self.requires.push(requires);
        self.grads.push(None);
        Ok(self.values.len() - 1)
    }

    fn requires_any(&self, ids: &[NodeId]) -> bool {
        ids.iter().any(|&i| self.requires[i])
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.values[id]
    }

    /// Gradient of the last `backward` root w.r.t. this node, if any flowed.
    pub fn grad(&self, id: NodeId) -> Option<&Tensor> {
        self.grads[id].as_ref()
    }

    /// Constant input; no gradient flows into it.
    pub fn leaf(&mut self, t: Tensor) -> Result<NodeId, NnError> {
        self.push(Op::Leaf, t, false)
    }

    /// Trainable input; `backward` accumulates into the param's grad buffer.
    pub fn param(&mut self, p: &Param) -> Result<NodeId, NnError> {
        let v = p.value();
        self.push(Op::Param(p.clone()), v, true)
    }

    /// Value copy that blocks gradient flow.
    pub fn detach(&mut self, x: NodeId) -> Result<NodeId, NnError> {
        let v = self.values[x].clone();
        self.push(Op::Detach, v, false)
    }

    /// `y = x W + b` with `x [B,in]`, `w [in,out]`, `b [out]`.
    pub fn linear(&mut self, x: NodeId, w: NodeId, b: NodeId) -> Result<NodeId, NnError> {
        let (xv, wv, bv) = (&self.values[x], &self.values[w], &self.values[b]);
        if xv.cols() != wv.rows() || wv.cols() != bv.len() {
            return Err(NnError::ShapeMismatch {
                op: "linear",
                detail: format!("x {:?} w {:?} b {:?}", xv.shape(), wv.shape(), bv.shape()),
            });
        }
        let mut y = matmul(xv, wv);
        let (rows, cols) = (y.rows(), y.cols());
        {
            let bd = bv.data().to_vec();
            let yd = y.data_mut();
            for r in 0..rows {
                for c in 0..cols {
                    yd[r * cols + c] += bd[c];
                }
            }
        }
        let req = self.requires_any(&[x, w, b]);
        self.push(Op::Linear { x, w, b }, y, req)
    }

    pub fn relu(&mut self, x: NodeId) -> Result<NodeId, NnError> {
        let v = self.values[x].clone();
        let mut out = v;
        out.data_mut().iter_mut().for_each(|a| *a = a.max(0.0));
        let req = self.requires[x];
        self.push(Op::Relu { x }, out, req)
    }

    pub fn sigmoid(&mut self, x: NodeId) -> Result<NodeId, NnError> {
        let mut out = self.values[x].clone();
        out.data_mut().iter_mut().for_each(|a| *a = sigmoid(*a));
        let req = self.requires[x];
        self.push(Op::Sigmoid { x }, out, req)
    }

    pub fn tanh(&mut self, x: NodeId) -> Result<NodeId, NnError> {
        let mut out = self.values[x].clone();
        out.data_mut().iter_mut().for_each(|a| *a = a.tanh());
        let req = self.requires[x];
        self.push(Op::Tanh { x }, out, req)
    }

    /// Row-wise softmax, numerically stabilized; rows sum to 1.
    pub fn softmax(&mut self, x: NodeId) -> Result<NodeId, NnError> {
        let v = &self.values[x];
        let (rows, cols) = (v.rows(), v.cols());
        let mut out = v.clone();
        for r in 0..rows {
            softmax_row_inplace(&mut out.data_mut()[r * cols..(r + 1) * cols]);
        }
        let req = self.requires[x];
        self.push(Op::Softmax { x }, out, req)
    }

    pub fn exp(&mut self, x: NodeId) -> Result<NodeId, NnError> {
        let mut out = self.values[x].clone();
        out.data_mut().iter_mut().for_each(|a| *a = a.exp());
        let req = self.requires[x];
        self.push(Op::Exp { x }, out, req)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NnError> {
        self.binary_same_shape(a, b, "add")
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NnError> {
        self.binary_same_shape(a, b, "sub")
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NnError> {
        self.binary_same_shape(a, b, "mul")
    }

    pub fn min_elem(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NnError> {
        self.binary_same_shape(a, b, "min_elem")
    }

    fn binary_same_shape(&mut self, a: NodeId, b: NodeId, which: &'static str) -> Result<NodeId, NnError> {
        let (av, bv) = (&self.values[a], &self.values[b]);
        if av.shape() != bv.shape() {
            return Err(NnError::ShapeMismatch {
                op: which,
                detail: format!("{:?} vs {:?}", av.shape(), bv.shape()),
            });
        }
        let mut out = av.clone();
        match which {
            "add" => out.data_mut().iter_mut().zip(bv.data()).for_each(|(x, y)| *x += y),
            "sub" => out.data_mut().iter_mut().zip(bv.data()).for_each(|(x, y)| *x -= y),
            "mul" => out.data_mut().iter_mut().zip(bv.data()).for_each(|(x, y)| *x *= y),
            "min_elem" => out.data_mut().iter_mut().zip(bv.data()).for_each(|(x, y)| *x = x.min(*y)),
            _ => unreachable!(),
        }
        let op = match which {
            "add" => Op::Add { a, b },
            "sub" => Op::Sub { a, b },
            "mul" => Op::Mul { a, b },
            "min_elem" => Op::MinElem { a, b },
            _ => unreachable!(),
        };
        let req = self.requires_any(&[a, b]);
        self.push(op, out, req)
    }

    pub fn scale(&mut self, x: NodeId, c: f64) -> Result<NodeId, NnError> {
        let mut out = self.values[x].clone();
        out.data_mut().iter_mut().for_each(|a| *a *= c);
        let req = self.requires[x];
        self.push(Op::Scale { x, c }, out, req)
    }

    pub fn clamp(&mut self, x: NodeId, lo: f64, hi: f64) -> Result<NodeId, NnError> {
        let mut out = self.values[x].clone();
        out.data_mut().iter_mut().for_each(|a| *a = a.clamp(lo, hi));
        let req = self.requires[x];
        self.push(Op::Clamp { x, lo, hi }, out, req)
    }

    /// Column-wise concatenation of two `[B, *]` tensors.
    pub fn concat_cols(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NnError> {
        let (av, bv) = (&self.values[a], &self.values[b]);
        if av.rows() != bv.rows() {
            return Err(NnError::ShapeMismatch {
                op: "concat_cols",
                detail: format!("{:?} vs {:?}", av.shape(), bv.shape()),
            });
        }
        let (rows, ca, cb) = (av.rows(), av.cols(), bv.cols());
        let mut out = Vec::with_capacity(rows * (ca + cb));
        for r in 0..rows {
            out.extend_from_slice(av.row(r));
            out.extend_from_slice(bv.row(r));
        }
        let req = self.requires_any(&[a, b]);
        self.push(Op::ConcatCols { a, b }, Tensor::new(vec![rows, ca + cb], out), req)
    }

    /// Mean over every element; scalar output.
    pub fn mean_all(&mut self, x: NodeId) -> Result<NodeId, NnError> {
        let v = &self.values[x];
        let m = v.data().iter().sum::<f64>() / v.len() as f64;
        let req = self.requires[x];
        self.push(Op::MeanAll { x }, Tensor::scalar(m), req)
    }

    /// `(1/B) * sum_b ||x_b||^2` over the rows of `x`.
    pub fn sq_norm_rows_mean(&mut self, x: NodeId) -> Result<NodeId, NnError> {
        let v = &self.values[x];
        let rows = v.rows();
        let s = v.data().iter().map(|a| a * a).sum::<f64>() / rows as f64;
        let req = self.requires[x];
        self.push(Op::SqNormRowsMean { x }, Tensor::scalar(s), req)
    }

    /// Mean of `-log softmax(logits)[b, target_b]`; log-sum-exp stabilized.
    pub fn cross_entropy(&mut self, logits: NodeId, targets: &[usize]) -> Result<NodeId, NnError> {
        let v = &self.values[logits];
        let (rows, cols) = (v.rows(), v.cols());
        if targets.is_empty() || rows == 0 {
            return Err(NnError::EmptyBatch { op: "cross_entropy" });
        }
        if targets.len() != rows {
            return Err(NnError::ShapeMismatch {
                op: "cross_entropy",
                detail: format!("{} logit rows vs {} targets", rows, targets.len()),
            });
        }
        let mut loss = 0.0;
        for (r, &t) in targets.iter().enumerate() {
            if t >= cols {
                return Err(NnError::IndexOutOfRange { op: "cross_entropy", index: t, bound: cols });
            }
            let row = v.row(r);
            loss -= log_softmax_at(row, t);
        }
        loss /= rows as f64;
        let req = self.requires[logits];
        self.push(Op::CrossEntropyMean { logits, targets: targets.to_vec() }, Tensor::scalar(loss), req)
    }

    /// Per-row `log softmax(logits)[b, target_b]`, shape `[B]`.
    pub fn gather_log_softmax(&mut self, logits: NodeId, targets: &[usize]) -> Result<NodeId, NnError> {
        let v = &self.values[logits];
        let (rows, cols) = (v.rows(), v.cols());
        if targets.is_empty() || rows == 0 {
            return Err(NnError::EmptyBatch { op: "gather_log_softmax" });
        }
        if targets.len() != rows {
            return Err(NnError::ShapeMismatch {
                op: "gather_log_softmax",
                detail: format!("{} logit rows vs {} targets", rows, targets.len()),
            });
        }
        let mut out = Vec::with_capacity(rows);
        for (r, &t) in targets.iter().enumerate() {
            if t >= cols {
                return Err(NnError::IndexOutOfRange { op: "gather_log_softmax", index: t, bound: cols });
            }
            out.push(log_softmax_at(v.row(r), t));
        }
        let req = self.requires[logits];
        self.push(Op::GatherLogSoftmax { logits, targets: targets.to_vec() }, Tensor::new(vec![rows], out), req)
    }

    /// Mean over rows of the softmax entropy `-sum_j p_j log p_j`.
    pub fn entropy_mean(&mut self, logits: NodeId) -> Result<NodeId, NnError> {
        let v = &self.values[logits];
        let (rows, cols) = (v.rows(), v.cols());
        if rows == 0 {
            return Err(NnError::EmptyBatch { op: "entropy" });
        }
        let mut total = 0.0;
        for r in 0..rows {
            let mut p = v.row(r).to_vec();
            softmax_row_inplace(&mut p);
            total -= p.iter().map(|&q| if q > 0.0 { q * q.ln() } else { 0.0 }).sum::<f64>();
        }
        let _ = cols;
        let req = self.requires[logits];
        self.push(Op::EntropyMean { logits }, Tensor::scalar(total / rows as f64), req)
    }

    /// Mean binary cross-entropy; predictions clamped to `[1e-7, 1-1e-7]`.
    pub fn bce_mean(&mut self, pred: NodeId, target: NodeId) -> Result<NodeId, NnError> {
        let (pv, tv) = (&self.values[pred], &self.values[target]);
        if pv.shape() != tv.shape() {
            return Err(NnError::ShapeMismatch {
                op: "bce",
                detail: format!("{:?} vs {:?}", pv.shape(), tv.shape()),
            });
        }
        let n = pv.len() as f64;
        let mut loss = 0.0;
        for (&p, &t) in pv.data().iter().zip(tv.data()) {
            let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
            loss -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
        }
        let req = self.requires_any(&[pred, target]);
        self.push(Op::BceMean { pred, target }, Tensor::scalar(loss / n), req)
    }

    /// Batch mean of the closed-form `KL(N(mu, e^{log_var}) || N(0, I))`.
    pub fn gaussian_kl_mean(&mut self, mu: NodeId, log_var: NodeId) -> Result<NodeId, NnError> {
        let (mv, lv) = (&self.values[mu], &self.values[log_var]);
        if mv.shape() != lv.shape() {
            return Err(NnError::ShapeMismatch {
                op: "gaussian_kl",
                detail: format!("{:?} vs {:?}", mv.shape(), lv.shape()),
            });
        }
        let rows = mv.rows() as f64;
        let mut total = 0.0;
        for (&m, &l) in mv.data().iter().zip(lv.data()) {
            total += 0.5 * (m * m + l.exp() - l - 1.0);
        }
        let req = self.requires_any(&[mu, log_var]);
        self.push(Op::GaussianKlMean { mu, log_var }, Tensor::scalar(total / rows), req)
    }

    /// Backpropagate from a scalar node, accumulating into every `Param`
    /// that fed the graph.
    pub fn backward(&mut self, root: NodeId) -> Result<(), NnError> {
        if self.values[root].len() != 1 {
            return Err(NnError::ShapeMismatch {
                op: "backward",
                detail: format!("root must be scalar, got {:?}", self.values[root].shape()),
            });
        }
        let mut seed = Tensor::zeros(self.values[root].shape());
        seed.data_mut()[0] = 1.0;
        self.grads[root] = Some(seed);

        for id in (0..=root).rev() {
            let Some(g) = self.grads[id].take() else { continue };
            if !g.all_finite() {
                return Err(NnError::NonFinite { op: "backward" });
            }
            self.propagate(id, &g);
            self.grads[id] = Some(g);
        }
        Ok(())
    }

    fn acc(&mut self, id: NodeId, delta: Tensor) {
        if !self.requires[id] {
            return;
        }
        match &mut self.grads[id] {
            Some(t) => t.add_assign(&delta),
            slot @ None => *slot = Some(delta),
        }
    }

    fn propagate(&mut self, id: NodeId, g: &Tensor) {
        // Ops below a node that needs no gradient never receive one.
        match &self.ops[id] {
            Op::Leaf | Op::Detach => {}
            Op::Param(p) => p.accumulate_grad(g),
            Op::Linear { x, w, b } => {
                let (x, w, b) = (*x, *w, *b);
                if self.requires[x] {
                    let dx = matmul_nt(g, &self.values[w]);
                    self.acc(x, dx);
                }
                if self.requires[w] {
                    let dw = matmul_tn(&self.values[x], g);
                    self.acc(w, dw);
                }
                if self.requires[b] {
                    let cols = g.cols();
                    let mut db = vec![0.0; cols];
                    for r in 0..g.rows() {
                        for (acc, &gv) in db.iter_mut().zip(g.row(r)) {
                            *acc += gv;
                        }
                    }
                    self.acc(b, Tensor::new(vec![cols], db));
                }
            }
            Op::Relu { x } => {
                let x = *x;
                let mut d = g.clone();
                for (dv, &xv) in d.data_mut().iter_mut().zip(self.values[x].data()) {
                    if xv <= 0.0 {
                        *dv = 0.0;
                    }
                }
                self.acc(x, d);
            }
            Op::Sigmoid { x } => {
                let x = *x;
                let mut d = g.clone();
                for (dv, &y) in d.data_mut().iter_mut().zip(self.values[id].data()) {
                    *dv *= y * (1.0 - y);
                }
                self.acc(x, d);
            }
            Op::Tanh { x } => {
                let x = *x;
                let mut d = g.clone();
                for (dv, &y) in d.data_mut().iter_mut().zip(self.values[id].data()) {
                    *dv *= 1.0 - y * y;
                }
                self.acc(x, d);
            }
            Op::Softmax { x } => {
                let x = *x;
                let p = &self.values[id];
                let (rows, cols) = (p.rows(), p.cols());
                let mut d = Tensor::zeros(p.shape());
                for r in 0..rows {
                    let prow = p.row(r);
                    let grow = g.row(r);
                    let dot: f64 = prow.iter().zip(grow).map(|(&a, &b)| a * b).sum();
                    let drow = &mut d.data_mut()[r * cols..(r + 1) * cols];
                    for ((dv, &pv), &gv) in drow.iter_mut().zip(prow).zip(grow) {
                        *dv = pv * (gv - dot);
                    }
                }
                self.acc(x, d);
            }
            Op::Exp { x } => {
                let x = *x;
                let mut d = g.clone();
                for (dv, &y) in d.data_mut().iter_mut().zip(self.values[id].data()) {
                    *dv *= y;
                }
                self.acc(x, d);
            }
            Op::Add { a, b } => {
                let (a, b) = (*a, *b);
                self.acc(a, g.clone());
                self.acc(b, g.clone());
            }
            Op::Sub { a, b } => {
                let (a, b) = (*a, *b);
                self.acc(a, g.clone());
                let mut d = g.clone();
                d.data_mut().iter_mut().for_each(|v| *v = -*v);
                self.acc(b, d);
            }
            Op::Mul { a, b } => {
                let (a, b) = (*a, *b);
                if self.requires[a] {
                    let mut d = g.clone();
                    for (dv, &bv) in d.data_mut().iter_mut().zip(self.values[b].data()) {
                        *dv *= bv;
                    }
                    self.acc(a, d);
                }
                if self.requires[b] {
                    let mut d = g.clone();
                    for (dv, &av) in d.data_mut().iter_mut().zip(self.values[a].data()) {
                        *dv *= av;
                    }
                    self.acc(b, d);
                }
            }
            Op::Scale { x, c } => {
                let (x, c) = (*x, *c);
                let mut d = g.clone();
                d.data_mut().iter_mut().for_each(|v| *v *= c);
                self.acc(x, d);
            }
            Op::Clamp { x, lo, hi } => {
                let (x, lo, hi) = (*x, *lo, *hi);
                let mut d = g.clone();
                for (dv, &xv) in d.data_mut().iter_mut().zip(self.values[x].data()) {
                    if xv <= lo || xv >= hi {
                        *dv = 0.0;
                    }
                }
                self.acc(x, d);
            }
            Op::MinElem { a, b } => {
                let (a, b) = (*a, *b);
                let av = self.values[a].clone();
                let bv = self.values[b].clone();
                if self.requires[a] {
                    let mut d = g.clone();
                    for ((dv, &x), &y) in d.data_mut().iter_mut().zip(av.data()).zip(bv.data()) {
                        if x > y {
                            *dv = 0.0;
                        }
                    }
                    self.acc(a, d);
                }
                if self.requires[b] {
                    let mut d = g.clone();
                    for ((dv, &x), &y) in d.data_mut().iter_mut().zip(av.data()).zip(bv.data()) {
                        if x <= y {
                            *dv = 0.0;
                        }
                    }
                    self.acc(b, d);
                }
            }
            Op::ConcatCols { a, b } => {
                let (a, b) = (*a, *b);
                let (rows, ca) = (self.values[a].rows(), self.values[a].cols());
                let cb = self.values[b].cols();
                if self.requires[a] {
                    let mut da = Tensor::zeros(self.values[a].shape());
                    for r in 0..rows {
                        da.data_mut()[r * ca..(r + 1) * ca].copy_from_slice(&g.row(r)[..ca]);
                    }
                    self.acc(a, da);
                }
                if self.requires[b] {
                    let mut db = Tensor::zeros(self.values[b].shape());
                    for r in 0..rows {
                        db.data_mut()[r * cb..(r + 1) * cb].copy_from_slice(&g.row(r)[ca..]);
                    }
                    self.acc(b, db);
                }
            }
            Op::MeanAll { x } => {
                let x = *x;
                let n = self.values[x].len() as f64;
                let gv = g.scalar_value() / n;
                self.acc(x, Tensor::full(self.values[x].shape(), gv));
            }
            Op::SqNormRowsMean { x } => {
                let x = *x;
                let rows = self.values[x].rows() as f64;
                let gv = g.scalar_value();
                let mut d = self.values[x].clone();
                d.data_mut().iter_mut().for_each(|v| *v *= 2.0 * gv / rows);
                self.acc(x, d);
            }
            Op::CrossEntropyMean { logits, targets } => {
                let logits = *logits;
                let targets = targets.clone();
                let v = &self.values[logits];
                let (rows, cols) = (v.rows(), v.cols());
                let gv = g.scalar_value() / rows as f64;
                let mut d = Tensor::zeros(v.shape());
                for (r, &t) in targets.iter().enumerate() {
                    let mut p = v.row(r).to_vec();
                    softmax_row_inplace(&mut p);
                    let drow = &mut d.data_mut()[r * cols..(r + 1) * cols];
                    for (j, dv) in drow.iter_mut().enumerate() {
                        *dv = gv * (p[j] - if j == t { 1.0 } else { 0.0 });
                    }
                }
                self.acc(logits, d);
            }
            Op::GatherLogSoftmax { logits, targets } => {
                let logits = *logits;
                let targets = targets.clone();
                let v = &self.values[logits];
                let cols = v.cols();
                let mut d = Tensor::zeros(v.shape());
                for (r, &t) in targets.iter().enumerate() {
                    let mut p = v.row(r).to_vec();
                    softmax_row_inplace(&mut p);
                    let gr = g.data()[r];
                    let drow = &mut d.data_mut()[r * cols..(r + 1) * cols];
                    for (j, dv) in drow.iter_mut().enumerate() {
                        *dv = gr * ((if j == t { 1.0 } else { 0.0 }) - p[j]);
                    }
                }
                self.acc(logits, d);
            }
            Op::EntropyMean { logits } => {
                let logits = *logits;
                let v = &self.values[logits];
                let (rows, cols) = (v.rows(), v.cols());
                let gv = g.scalar_value() / rows as f64;
                let mut d = Tensor::zeros(v.shape());
                for r in 0..rows {
                    let mut p = v.row(r).to_vec();
                    softmax_row_inplace(&mut p);
                    let h: f64 = -p.iter().map(|&q| if q > 0.0 { q * q.ln() } else { 0.0 }).sum::<f64>();
                    let drow = &mut d.data_mut()[r * cols..(r + 1) * cols];
                    for (dv, &q) in drow.iter_mut().zip(&p) {
                        let lq = if q > 0.0 { q.ln() } else { 0.0 };
                        *dv = gv * (-q * (lq + h));
                    }
                }
                self.acc(logits, d);
            }
            Op::BceMean { pred, target } => {
                let (pred, target) = (*pred, *target);
                let n = self.values[pred].len() as f64;
                let gv = g.scalar_value() / n;
                if self.requires[pred] {
                    let mut d = Tensor::zeros(self.values[pred].shape());
                    let pv = self.values[pred].data();
                    let tv = self.values[target].data();
                    for ((dv, &p), &t) in d.data_mut().iter_mut().zip(pv).zip(tv) {
                        if p > BCE_CLAMP && p < 1.0 - BCE_CLAMP {
                            *dv = gv * (p - t) / (p * (1.0 - p));
                        }
                    }
                    self.acc(pred, d);
                }
                if self.requires[target] {
                    let mut d = Tensor::zeros(self.values[target].shape());
                    let pv = self.values[pred].data();
                    for (dv, &p) in d.data_mut().iter_mut().zip(pv) {
                        let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
                        *dv = gv * ((1.0 - p).ln() - p.ln());
                    }
                    self.acc(target, d);
                }
            }
            Op::GaussianKlMean { mu, log_var } => {
                let (mu, log_var) = (*mu, *log_var);
                let rows = self.values[mu].rows() as f64;
                let gv = g.scalar_value() / rows;
                if self.requires[mu] {
                    let mut d = self.values[mu].clone();
                    d.data_mut().iter_mut().for_each(|v| *v *= gv);
                    self.acc(mu, d);
                }
                if self.requires[log_var] {
                    let mut d = self.values[log_var].clone();
                    d.data_mut().iter_mut().for_each(|v| *v = gv * 0.5 * (v.exp() - 1.0));
                    self.acc(log_var, d);
                }
            }
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softmax_row_inplace(row: &mut [f64]) {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - m).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

fn log_softmax_at(row: &[f64], idx: usize) -> f64 {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = row.iter().map(|&v| (v - m).exp()).sum::<f64>().ln() + m;
    row[idx] - lse
}
