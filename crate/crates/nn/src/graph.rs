//! Reverse-mode automatic differentiation over [`Tensor`]s.
//!
//! A [`Graph`] records operations as they are applied. Parameters are read
//! from a borrowed [`ParamStore`] without copying; [`Graph::backward`]
//! returns their gradients in a [`GradBuffer`].

use locavqg_core::Scalar;

use crate::params::{GradBuffer, ParamId, ParamStore};
use crate::tensor::Tensor;

/// Handle to a node of a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mask {
    None,
    /// Query `i` may only attend to keys `j <= i`.
    Causal,
}

#[derive(Debug, Clone)]
enum Op<T> {
    Constant,
    Param(ParamId),
    MatMul(Var, Var),
    MatMulT(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Scale(Var, T),
    Relu(Var),
    Tanh(Var),
    SoftmaxRows(Var),
    RmsNorm { x: Var, gain: Var, inv_rms: Vec<T> },
    Gather(Var, Vec<usize>),
    MeanRows(Var),
}

struct Node<T> {
    op: Op<T>,
    /// `None` for parameter nodes, whose value lives in the store.
    value: Option<Tensor<T>>,
}

pub struct Graph<'p, T: Scalar> {
    params: &'p ParamStore<T>,
    nodes: Vec<Node<T>>,
}

const RMS_EPS: f64 = 1e-6;

impl<'p, T: Scalar> Graph<'p, T> {
    pub fn new(params: &'p ParamStore<T>) -> Self {
        Self {
            params,
            nodes: Vec::new(),
        }
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        let node = &self.nodes[v.0];
        match (&node.op, &node.value) {
            (_, Some(t)) => t,
            (Op::Param(id), None) => self.params.get(*id),
            _ => unreachable!("non-parameter node without a value"),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op<T>, value: Tensor<T>) -> Var {
        self.nodes.push(Node {
            op,
            value: Some(value),
        });
        Var(self.nodes.len() - 1)
    }

    /// A value that receives no gradient.
    pub fn constant(&mut self, t: Tensor<T>) -> Var {
        self.push(Op::Constant, t)
    }

    pub fn param(&mut self, id: ParamId) -> Var {
        self.nodes.push(Node {
            op: Op::Param(id),
            value: None,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).matmul(self.value(b));
        self.push(Op::MatMul(a, b), out)
    }

    /// `a · bᵀ`
    pub fn matmul_t(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).matmul_t(self.value(b));
        self.push(Op::MatMulT(a, b), out)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).zip_map(self.value(b), |x, y| x + y);
        self.push(Op::Add(a, b), out)
    }

    /// Adds the `1 × n` row `b` to every row of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Var {
        let bv = self.value(b);
        assert_eq!(bv.rows(), 1, "add_row expects a row vector");
        let mut out = self.value(a).clone();
        assert_eq!(out.cols(), bv.cols(), "add_row width mismatch");
        for r in 0..out.rows() {
            for (o, &x) in out.row_mut(r).iter_mut().zip(bv.row(0)) {
                *o += x;
            }
        }
        self.push(Op::AddRow(a, b), out)
    }

    pub fn scale(&mut self, a: Var, s: T) -> Var {
        let out = self.value(a).map(|x| x * s);
        self.push(Op::Scale(a, s), out)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|x| x.max(T::zero()));
        self.push(Op::Relu(a), out)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|x| x.tanh());
        self.push(Op::Tanh(a), out)
    }

    /// Row-wise softmax; with [`Mask::Causal`] entries above the diagonal are zero.
    pub fn softmax_rows(&mut self, a: Var, mask: Mask) -> Var {
        let x = self.value(a);
        let mut out = Tensor::zeros(x.rows(), x.cols());
        for r in 0..x.rows() {
            let limit = match mask {
                Mask::None => x.cols(),
                Mask::Causal => (r + 1).min(x.cols()),
            };
            let p = crate::tensor::softmax(&x.row(r)[..limit]);
            out.row_mut(r)[..limit].copy_from_slice(&p);
        }
        self.push(Op::SoftmaxRows(a), out)
    }

    /// Root-mean-square normalization of each row, times a learned `1 × n` gain.
    pub fn rms_norm(&mut self, x: Var, gain: Var) -> Var {
        let xv = self.value(x);
        let g = self.value(gain);
        let n = T::of_usize(xv.cols());
        let mut out = xv.clone();
        let mut inv_rms = Vec::with_capacity(xv.rows());
        for r in 0..xv.rows() {
            let ms = xv.row(r).iter().map(|&v| v * v).sum::<T>() / n;
            let inv = T::one() / (ms + T::of(RMS_EPS)).sqrt();
            inv_rms.push(inv);
            for (o, &gg) in out.row_mut(r).iter_mut().zip(g.row(0)) {
                *o = *o * inv * gg;
            }
        }
        self.push(Op::RmsNorm { x, gain, inv_rms }, out)
    }

    /// Selects rows `ids` of `table` (embedding lookup).
    pub fn gather(&mut self, table: Var, ids: &[usize]) -> Var {
        let t = self.value(table);
        let mut out = Tensor::zeros(ids.len(), t.cols());
        for (i, &id) in ids.iter().enumerate() {
            out.row_mut(i).copy_from_slice(t.row(id));
        }
        self.push(Op::Gather(table, ids.to_vec()), out)
    }

    /// Mean over rows, giving a `1 × n` row.
    pub fn mean_rows(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let mut out = Tensor::zeros(1, x.cols());
        let inv = T::one() / T::of_usize(x.rows().max(1));
        for r in 0..x.rows() {
            for (o, &v) in out.row_mut(0).iter_mut().zip(x.row(r)) {
                *o += v * inv;
            }
        }
        self.push(Op::MeanRows(a), out)
    }

    /// Back-propagates `seed` (the gradient of the loss w.r.t. `output`) and
    /// returns the parameter gradients.
    pub fn backward(&self, output: Var, seed: Tensor<T>) -> GradBuffer<T> {
        assert_eq!(self.value(output).shape(), seed.shape(), "seed shape mismatch");
        let mut grads: Vec<Option<Tensor<T>>> = vec![None; self.nodes.len()];
        grads[output.0] = Some(seed);
        let mut out = GradBuffer::zeros_like(self.params);

        fn acc<T: Scalar>(grads: &mut [Option<Tensor<T>>], v: Var, g: Tensor<T>) {
            match &mut grads[v.0] {
                Some(existing) => existing.add_assign(&g),
                slot @ None => *slot = Some(g),
            }
        }

        for i in (0..=output.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            match &self.nodes[i].op {
                Op::Constant => {}
                Op::Param(id) => out.accumulate(*id, &g),
                Op::MatMul(a, b) => {
                    let ga = g.matmul_t(self.value(*b));
                    let gb = self.value(*a).t_matmul(&g);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::MatMulT(a, b) => {
                    let ga = g.matmul(self.value(*b));
                    let gb = g.t_matmul(self.value(*a));
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *b, g.clone());
                    acc(&mut grads, *a, g);
                }
                Op::AddRow(a, b) => {
                    let mut gb = Tensor::zeros(1, g.cols());
                    for r in 0..g.rows() {
                        for (o, &v) in gb.row_mut(0).iter_mut().zip(g.row(r)) {
                            *o += v;
                        }
                    }
                    acc(&mut grads, *b, gb);
                    acc(&mut grads, *a, g);
                }
                Op::Scale(a, s) => {
                    let s = *s;
                    acc(&mut grads, *a, g.map(|x| x * s));
                }
                Op::Relu(a) => {
                    let ga = g.zip_map(self.value(*a), |gg, x| {
                        if x > T::zero() {
                            gg
                        } else {
                            T::zero()
                        }
                    });
                    acc(&mut grads, *a, ga);
                }
                Op::Tanh(a) => {
                    let y = self.nodes[i].value.as_ref().expect("tanh value");
                    let ga = g.zip_map(y, |gg, yy| gg * (T::one() - yy * yy));
                    acc(&mut grads, *a, ga);
                }
                Op::SoftmaxRows(a) => {
                    let y = self.nodes[i].value.as_ref().expect("softmax value");
                    let mut ga = Tensor::zeros(y.rows(), y.cols());
                    for r in 0..y.rows() {
                        let dot: T = g.row(r).iter().zip(y.row(r)).map(|(&a, &b)| a * b).sum();
                        for ((o, &gg), &yy) in ga.row_mut(r).iter_mut().zip(g.row(r)).zip(y.row(r))
                        {
                            *o = yy * (gg - dot);
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::RmsNorm { x, gain, inv_rms } => {
                    let xv = self.value(*x);
                    let gv = self.value(*gain);
                    let n = T::of_usize(xv.cols());
                    let mut gx = Tensor::zeros(xv.rows(), xv.cols());
                    let mut gg = Tensor::zeros(1, xv.cols());
                    for r in 0..xv.rows() {
                        let inv = inv_rms[r];
                        let xr = xv.row(r);
                        let gr = g.row(r);
                        // d/dx of x * inv * gain: inv * (g*gain) - x * inv^3 * <g*gain, x> / n
                        let dot: T = gr
                            .iter()
                            .zip(gv.row(0))
                            .zip(xr)
                            .map(|((&a, &b), &c)| a * b * c)
                            .sum();
                        let coef = inv * inv * inv * dot / n;
                        for j in 0..xv.cols() {
                            gx.row_mut(r)[j] = inv * gr[j] * gv.row(0)[j] - xr[j] * coef;
                            gg.row_mut(0)[j] += gr[j] * xr[j] * inv;
                        }
                    }
                    acc(&mut grads, *x, gx);
                    acc(&mut grads, *gain, gg);
                }
                Op::Gather(table, ids) => {
                    let t = self.value(*table);
                    let mut gt = Tensor::zeros(t.rows(), t.cols());
                    for (r, &id) in ids.iter().enumerate() {
                        for (o, &v) in gt.row_mut(id).iter_mut().zip(g.row(r)) {
                            *o += v;
                        }
                    }
                    acc(&mut grads, *table, gt);
                }
                Op::MeanRows(a) => {
                    let x = self.value(*a);
                    let inv = T::one() / T::of_usize(x.rows().max(1));
                    let mut ga = Tensor::zeros(x.rows(), x.cols());
                    for r in 0..x.rows() {
                        for (o, &v) in ga.row_mut(r).iter_mut().zip(g.row(0)) {
                            *o = v * inv;
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_tensor(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Tensor<f64> {
        Tensor::from_vec(r, c, (0..r * c).map(|_| rng.gen_range(-1.0..1.0)).collect())
    }

    /// Scalar objective `sum(out ⊙ w)` for a fixed random `w`; returns the
    /// objective and the parameter gradients.
    fn objective(
        store: &ParamStore<f64>,
        w: &Tensor<f64>,
        build: &dyn Fn(&mut Graph<'_, f64>) -> Var,
    ) -> (f64, GradBuffer<f64>) {
        let mut g = Graph::new(store);
        let out = build(&mut g);
        let val = g.value(out).zip_map(w, |a, b| a * b).sum();
        let grads = g.backward(out, w.clone());
        (val, grads)
    }

    /// Compares analytic parameter gradients with central differences.
    fn check(store: ParamStore<f64>, out_shape: (usize, usize), build: &dyn Fn(&mut Graph<'_, f64>) -> Var) {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let w = rand_tensor(&mut rng, out_shape.0, out_shape.1);
        let (_, grads) = objective(&store, &w, build);
        let h = 1e-6;
        for id in store.ids() {
            for k in 0..store.get(id).len() {
                let mut plus = store.clone();
                plus.get_mut(id).data_mut()[k] += h;
                let mut minus = store.clone();
                minus.get_mut(id).data_mut()[k] -= h;
                let fd = (objective(&plus, &w, build).0 - objective(&minus, &w, build).0) / (2.0 * h);
                let an = grads.get(id).data()[k];
                let err = (fd - an).abs() / (1e-6 + fd.abs().max(an.abs()));
                assert!(err < 1e-5, "{} [{k}]: analytic {an} vs numeric {fd}", store.name(id));
            }
        }
    }

    fn store_with(shapes: &[(&str, usize, usize)], seed: u64) -> (ParamStore<f64>, Vec<ParamId>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = ParamStore::new();
        let ids = shapes
            .iter()
            .map(|&(n, r, c)| s.add(n, rand_tensor(&mut rng, r, c)))
            .collect();
        (s, ids)
    }

    #[test]
    fn matmul_and_bias_gradients() {
        let (s, ids) = store_with(&[("a", 3, 4), ("b", 4, 2), ("bias", 1, 2)], 1);
        check(s, (3, 2), &|g| {
            let a = g.param(ids[0]);
            let b = g.param(ids[1]);
            let c = g.param(ids[2]);
            let m = g.matmul(a, b);
            g.add_row(m, c)
        });
    }

    #[test]
    fn matmul_t_softmax_gradients() {
        let (s, ids) = store_with(&[("q", 4, 3), ("k", 4, 3), ("v", 4, 2)], 2);
        for mask in [Mask::None, Mask::Causal] {
            check(s.clone(), (4, 2), &|g| {
                let q = g.param(ids[0]);
                let k = g.param(ids[1]);
                let v = g.param(ids[2]);
                let sc = g.matmul_t(q, k);
                let sc = g.scale(sc, 0.7);
                let p = g.softmax_rows(sc, mask);
                g.matmul(p, v)
            });
        }
    }

    #[test]
    fn norm_activation_gather_mean_gradients() {
        let (s, ids) = store_with(&[("emb", 5, 4), ("gain", 1, 4), ("w", 4, 4)], 3);
        check(s, (1, 4), &|g| {
            let e = g.param(ids[0]);
            let x = g.gather(e, &[0, 3, 3, 1]);
            let gn = g.param(ids[1]);
            let n = g.rms_norm(x, gn);
            let w = g.param(ids[2]);
            let h = g.matmul(n, w);
            let r = g.relu(h);
            let t = g.tanh(h);
            let s = g.add(r, t);
            g.mean_rows(s)
        });
    }

    #[test]
    fn causal_softmax_zeroes_future() {
        let s = ParamStore::<f64>::new();
        let mut g = Graph::new(&s);
        let x = g.constant(Tensor::from_vec(2, 2, vec![1.0, 5.0, 1.0, 5.0]));
        let p = g.softmax_rows(x, Mask::Causal);
        assert_eq!(g.value(p).row(0), &[1.0, 0.0]);
        assert!((g.value(p).row(1).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
