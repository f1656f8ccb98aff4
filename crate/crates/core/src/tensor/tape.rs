use super::{Tensor, TensorError};

/// Handle to a node recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Add(Var, Var),
    Mul(Var, Var),
    Square(Var),
    Sum(Var),
    Relu(Var),
    Softmax(Var),
    Linear { x: Var, w: Var, b: Option<Var> },
    Conv2d { x: Var, w: Var, b: Option<Var> },
    AvgPool2(Var),
    GlobalAvgPool(Var),
    Flatten(Var),
    CrossEntropy { logits: Var, labels: Vec<usize> },
    StraightThrough(Var),
}

#[derive(Clone, Debug)]
struct Node {
    value: Tensor,
    op: Op,
}

/// Eagerly evaluated computation record. Every operation computes its value
/// immediately and appends a node; nodes are therefore stored in topological
/// order and [`Tape::backward`] is a single reverse sweep.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Adjoints for every node reachable from the loss.
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    /// Gradient of `v`, or zeros shaped like `like` when `v` does not
    /// influence the loss.
    pub fn get_or_zeros(&self, v: Var, like: &Tensor) -> Tensor {
        self.get(v).cloned().unwrap_or_else(|| Tensor::zeros(like.shape()))
    }
}

fn mismatch(node: &'static str, detail: String) -> TensorError {
    TensorError::ShapeMismatch { node, detail }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let v = self
            .value(a)
            .zip_map(self.value(b), |x, y| x + y)
            .map_err(|_| mismatch("add", format!("{:?} vs {:?}", self.value(a).shape(), self.value(b).shape())))?;
        Ok(self.push(v, Op::Add(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let v = self
            .value(a)
            .zip_map(self.value(b), |x, y| x * y)
            .map_err(|_| mismatch("mul", format!("{:?} vs {:?}", self.value(a).shape(), self.value(b).shape())))?;
        Ok(self.push(v, Op::Mul(a, b)))
    }

    pub fn square(&mut self, a: Var) -> Var {
        let v = self.value(a).map(|x| x * x);
        self.push(v, Op::Square(a))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let v = Tensor::scalar(self.value(a).sum());
        self.push(v, Op::Sum(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let v = self.value(a).map(|x| x.max(0.0));
        self.push(v, Op::Relu(a))
    }

    /// Softmax over the last axis.
    pub fn softmax(&mut self, a: Var) -> Var {
        let t = self.value(a);
        let k = *t.shape().last().unwrap_or(&1);
        let mut out = t.data().to_vec();
        for row in out.chunks_mut(k) {
            let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for x in row.iter_mut() {
                *x = (*x - m).exp();
                z += *x;
            }
            for x in row.iter_mut() {
                *x /= z;
            }
        }
        let v = Tensor { shape: t.shape().to_vec(), data: out };
        self.push(v, Op::Softmax(a))
    }

    /// `x @ w^T + b` with `x: [N, in]`, `w: [out, in]`, `b: [out]`.
    pub fn linear(&mut self, x: Var, w: Var, b: Option<Var>) -> Result<Var, TensorError> {
        let (xs, ws) = (self.value(x).shape(), self.value(w).shape());
        if xs.len() != 2 || ws.len() != 2 || xs[1] != ws[1] {
            return Err(mismatch("linear", format!("input {xs:?}, weight {ws:?}")));
        }
        let (n, inp, out) = (xs[0], xs[1], ws[0]);
        if let Some(b) = b {
            if self.value(b).shape() != [out] {
                return Err(mismatch("linear", format!("bias {:?}, expected [{out}]", self.value(b).shape())));
            }
        }
        let xd = self.value(x).data();
        let wd = self.value(w).data();
        let mut y = vec![0.0; n * out];
        for i in 0..n {
            let xr = &xd[i * inp..(i + 1) * inp];
            for o in 0..out {
                let wr = &wd[o * inp..(o + 1) * inp];
                y[i * out + o] = xr.iter().zip(wr).map(|(a, b)| a * b).sum();
            }
        }
        if let Some(b) = b {
            let bd = self.value(b).data();
            for row in y.chunks_mut(out) {
                for (v, bb) in row.iter_mut().zip(bd) {
                    *v += bb;
                }
            }
        }
        let v = Tensor { shape: vec![n, out], data: y };
        Ok(self.push(v, Op::Linear { x, w, b }))
    }

    /// Stride-1 "same" convolution with an odd square kernel:
    /// `x: [N, C, H, W]`, `w: [O, C, K, K]`, `b: [O]`.
    pub fn conv2d(&mut self, x: Var, w: Var, b: Option<Var>) -> Result<Var, TensorError> {
        let (xs, ws) = (self.value(x).shape().to_vec(), self.value(w).shape().to_vec());
        if xs.len() != 4 || ws.len() != 4 || xs[1] != ws[1] || ws[2] != ws[3] || ws[2] % 2 == 0 {
            return Err(mismatch("conv2d", format!("input {xs:?}, weight {ws:?}")));
        }
        if let Some(b) = b {
            if self.value(b).shape() != [ws[0]] {
                return Err(mismatch("conv2d", format!("bias {:?}, expected [{}]", self.value(b).shape(), ws[0])));
            }
        }
        let geo = ConvGeometry::new(&xs, &ws);
        let mut y = vec![0.0; geo.n * geo.o * geo.h * geo.w];
        geo.forward(self.value(x).data(), self.value(w).data(), &mut y);
        if let Some(b) = b {
            let bd = self.value(b).data();
            let plane = geo.h * geo.w;
            for (chunk_idx, chunk) in y.chunks_mut(plane).enumerate() {
                let bias = bd[chunk_idx % geo.o];
                chunk.iter_mut().for_each(|v| *v += bias);
            }
        }
        let v = Tensor { shape: vec![geo.n, geo.o, geo.h, geo.w], data: y };
        Ok(self.push(v, Op::Conv2d { x, w, b }))
    }

    /// 2x2 average pooling with stride 2 over `[N, C, H, W]`.
    pub fn avg_pool2(&mut self, x: Var) -> Result<Var, TensorError> {
        let s = self.value(x).shape().to_vec();
        if s.len() != 4 || !s[2].is_multiple_of(2) || !s[3].is_multiple_of(2) {
            return Err(mismatch("avg_pool2", format!("input {s:?}")));
        }
        let (n, c, h, w) = (s[0], s[1], s[2], s[3]);
        let (oh, ow) = (h / 2, w / 2);
        let xd = self.value(x).data();
        let mut y = vec![0.0; n * c * oh * ow];
        for p in 0..n * c {
            let src = &xd[p * h * w..(p + 1) * h * w];
            let dst = &mut y[p * oh * ow..(p + 1) * oh * ow];
            for i in 0..oh {
                for j in 0..ow {
                    let a = src[2 * i * w + 2 * j] + src[2 * i * w + 2 * j + 1];
                    let b = src[(2 * i + 1) * w + 2 * j] + src[(2 * i + 1) * w + 2 * j + 1];
                    dst[i * ow + j] = 0.25 * (a + b);
                }
            }
        }
        let v = Tensor { shape: vec![n, c, oh, ow], data: y };
        Ok(self.push(v, Op::AvgPool2(x)))
    }

    /// Mean over the spatial axes: `[N, C, H, W] -> [N, C]`.
    pub fn global_avg_pool(&mut self, x: Var) -> Result<Var, TensorError> {
        let s = self.value(x).shape().to_vec();
        if s.len() != 4 {
            return Err(mismatch("global_avg_pool", format!("input {s:?}")));
        }
        let plane = s[2] * s[3];
        let data = self.value(x).data().chunks(plane).map(|c| c.iter().sum::<f64>() / plane as f64).collect();
        let v = Tensor { shape: vec![s[0], s[1]], data };
        Ok(self.push(v, Op::GlobalAvgPool(x)))
    }

    /// `[N, ...] -> [N, prod(...)]`.
    pub fn flatten(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let n = t.shape().first().copied().unwrap_or(1);
        let v = Tensor { shape: vec![n, t.numel() / n], data: t.data().to_vec() };
        self.push(v, Op::Flatten(x))
    }

    /// Mean softmax cross-entropy of `logits: [N, K]` against class labels.
    pub fn cross_entropy(&mut self, logits: Var, labels: &[usize]) -> Result<Var, TensorError> {
        let s = self.value(logits).shape();
        if s.len() != 2 || s[0] != labels.len() || labels.iter().any(|&l| l >= s[1]) {
            return Err(mismatch("cross_entropy", format!("logits {s:?}, {} labels", labels.len())));
        }
        let k = s[1];
        let mut total = 0.0;
        for (row, &l) in self.value(logits).data().chunks(k).zip(labels) {
            let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + row.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
            total += lse - row[l];
        }
        let v = Tensor::scalar(total / labels.len() as f64);
        Ok(self.push(v, Op::CrossEntropy { logits, labels: labels.to_vec() }))
    }

    /// Records `value` as a function of `x` whose gradient passes through
    /// unchanged (straight-through estimator). Used for fake quantization.
    pub fn straight_through(&mut self, x: Var, value: Tensor) -> Result<Var, TensorError> {
        if value.shape() != self.value(x).shape() {
            return Err(mismatch("straight_through", format!("{:?} vs {:?}", value.shape(), self.value(x).shape())));
        }
        Ok(self.push(value, Op::StraightThrough(x)))
    }

    /// Reverse sweep from a scalar loss node.
    pub fn backward(&self, loss: Var) -> Result<Gradients, TensorError> {
        let lv = self.value(loss);
        if !lv.is_scalar() {
            return Err(TensorError::NonScalarLoss(lv.shape().to_vec()));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Tensor::full(lv.shape(), 1.0));

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g.clone());
                }
                Op::Mul(a, b) => {
                    let ga = g.zip_map(self.value(*b), |x, y| x * y)?;
                    let gb = g.zip_map(self.value(*a), |x, y| x * y)?;
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Square(a) => {
                    let ga = g.zip_map(self.value(*a), |x, y| 2.0 * x * y)?;
                    accumulate(&mut grads, *a, ga);
                }
                Op::Sum(a) => {
                    let ga = Tensor::full(self.value(*a).shape(), g.data[0]);
                    accumulate(&mut grads, *a, ga);
                }
                Op::Relu(a) => {
                    let ga = g.zip_map(self.value(*a), |x, y| if y > 0.0 { x } else { 0.0 })?;
                    accumulate(&mut grads, *a, ga);
                }
                Op::Softmax(a) => {
                    let y = &node.value;
                    let k = *y.shape().last().unwrap_or(&1);
                    let mut ga = vec![0.0; y.numel()];
                    for ((gr, yr), out) in g.data.chunks(k).zip(y.data.chunks(k)).zip(ga.chunks_mut(k)) {
                        let dot: f64 = gr.iter().zip(yr).map(|(a, b)| a * b).sum();
                        for i in 0..k {
                            out[i] = yr[i] * (gr[i] - dot);
                        }
                    }
                    accumulate(&mut grads, *a, Tensor { shape: y.shape.clone(), data: ga });
                }
                Op::Linear { x, w, b } => {
                    let xt = self.value(*x);
                    let wt = self.value(*w);
                    let (n, inp, out) = (xt.shape[0], xt.shape[1], wt.shape[0]);
                    let mut gx = vec![0.0; n * inp];
                    let mut gw = vec![0.0; out * inp];
                    for i in 0..n {
                        let gr = &g.data[i * out..(i + 1) * out];
                        let xr = &xt.data[i * inp..(i + 1) * inp];
                        let gxr = &mut gx[i * inp..(i + 1) * inp];
                        for o in 0..out {
                            let go = gr[o];
                            if go == 0.0 {
                                continue;
                            }
                            let wr = &wt.data[o * inp..(o + 1) * inp];
                            let gwr = &mut gw[o * inp..(o + 1) * inp];
                            for j in 0..inp {
                                gxr[j] += go * wr[j];
                                gwr[j] += go * xr[j];
                            }
                        }
                    }
                    if let Some(b) = b {
                        let mut gb = vec![0.0; out];
                        for row in g.data.chunks(out) {
                            for (acc, v) in gb.iter_mut().zip(row) {
                                *acc += v;
                            }
                        }
                        accumulate(&mut grads, *b, Tensor { shape: vec![out], data: gb });
                    }
                    accumulate(&mut grads, *x, Tensor { shape: xt.shape.clone(), data: gx });
                    accumulate(&mut grads, *w, Tensor { shape: wt.shape.clone(), data: gw });
                }
                Op::Conv2d { x, w, b } => {
                    let xt = self.value(*x);
                    let wt = self.value(*w);
                    let geo = ConvGeometry::new(&xt.shape, &wt.shape);
                    let mut gx = vec![0.0; xt.numel()];
                    let mut gw = vec![0.0; wt.numel()];
                    geo.backward(&xt.data, &wt.data, &g.data, &mut gx, &mut gw);
                    if let Some(b) = b {
                        let plane = geo.h * geo.w;
                        let mut gb = vec![0.0; geo.o];
                        for (ci, chunk) in g.data.chunks(plane).enumerate() {
                            gb[ci % geo.o] += chunk.iter().sum::<f64>();
                        }
                        accumulate(&mut grads, *b, Tensor { shape: vec![geo.o], data: gb });
                    }
                    accumulate(&mut grads, *x, Tensor { shape: xt.shape.clone(), data: gx });
                    accumulate(&mut grads, *w, Tensor { shape: wt.shape.clone(), data: gw });
                }
                Op::AvgPool2(x) => {
                    let s = &self.value(*x).shape;
                    let (h, w) = (s[2], s[3]);
                    let (oh, ow) = (h / 2, w / 2);
                    let mut gx = vec![0.0; s.iter().product()];
                    for p in 0..s[0] * s[1] {
                        let src = &g.data[p * oh * ow..(p + 1) * oh * ow];
                        let dst = &mut gx[p * h * w..(p + 1) * h * w];
                        for i in 0..oh {
                            for j in 0..ow {
                                let v = 0.25 * src[i * ow + j];
                                dst[2 * i * w + 2 * j] += v;
                                dst[2 * i * w + 2 * j + 1] += v;
                                dst[(2 * i + 1) * w + 2 * j] += v;
                                dst[(2 * i + 1) * w + 2 * j + 1] += v;
                            }
                        }
                    }
                    accumulate(&mut grads, *x, Tensor { shape: s.clone(), data: gx });
                }
                Op::GlobalAvgPool(x) => {
                    let s = &self.value(*x).shape;
                    let plane = s[2] * s[3];
                    let mut gx = Vec::with_capacity(s.iter().product());
                    for &v in &g.data {
                        gx.extend(std::iter::repeat_n(v / plane as f64, plane));
                    }
                    accumulate(&mut grads, *x, Tensor { shape: s.clone(), data: gx });
                }
                Op::Flatten(x) => {
                    let s = self.value(*x).shape.clone();
                    accumulate(&mut grads, *x, Tensor { shape: s, data: g.data.clone() });
                }
                Op::CrossEntropy { logits, labels } => {
                    let lt = self.value(*logits);
                    let k = lt.shape[1];
                    let scale = g.data[0] / labels.len() as f64;
                    let mut gl = vec![0.0; lt.numel()];
                    for ((row, out), &l) in lt.data.chunks(k).zip(gl.chunks_mut(k)).zip(labels) {
                        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        let z: f64 = row.iter().map(|x| (x - m).exp()).sum();
                        for i in 0..k {
                            out[i] = scale * ((row[i] - m).exp() / z - if i == l { 1.0 } else { 0.0 });
                        }
                    }
                    accumulate(&mut grads, *logits, Tensor { shape: lt.shape.clone(), data: gl });
                }
                Op::StraightThrough(x) => accumulate(&mut grads, *x, g.clone()),
            }
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }
}

fn accumulate(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
    match &mut grads[v.0] {
        Some(existing) => {
            for (a, b) in existing.data.iter_mut().zip(&g.data) {
                *a += b;
            }
        }
        slot @ None => *slot = Some(g),
    }
}

struct ConvGeometry {
    n: usize,
    c: usize,
    h: usize,
    w: usize,
    o: usize,
    k: usize,
}

impl ConvGeometry {
    fn new(xs: &[usize], ws: &[usize]) -> Self {
        Self { n: xs[0], c: xs[1], h: xs[2], w: xs[3], o: ws[0], k: ws[2] }
    }

    /// Valid output range along one axis for kernel offset `d`.
    fn span(len: usize, d: isize) -> (usize, usize) {
        let lo = (-d).max(0) as usize;
        let hi = (len as isize - d).min(len as isize).max(0) as usize;
        (lo, hi)
    }

    fn forward(&self, x: &[f64], w: &[f64], y: &mut [f64]) {
        let (h, wd, k) = (self.h, self.w, self.k);
        let pad = (k / 2) as isize;
        let plane = h * wd;
        for n in 0..self.n {
            for o in 0..self.o {
                let out = &mut y[(n * self.o + o) * plane..(n * self.o + o + 1) * plane];
                for c in 0..self.c {
                    let inp = &x[(n * self.c + c) * plane..(n * self.c + c + 1) * plane];
                    let kern = &w[(o * self.c + c) * k * k..(o * self.c + c + 1) * k * k];
                    for ky in 0..k {
                        let dy = ky as isize - pad;
                        let (ylo, yhi) = Self::span(h, dy);
                        for kx in 0..k {
                            let dx = kx as isize - pad;
                            let (xlo, xhi) = Self::span(wd, dx);
                            let kv = kern[ky * k + kx];
                            for i in ylo..yhi {
                                let src_row = ((i as isize + dy) as usize) * wd;
                                let dst_row = i * wd;
                                for j in xlo..xhi {
                                    out[dst_row + j] += kv * inp[src_row + (j as isize + dx) as usize];
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    fn backward(&self, x: &[f64], w: &[f64], gy: &[f64], gx: &mut [f64], gw: &mut [f64]) {
        let (h, wd, k) = (self.h, self.w, self.k);
        let pad = (k / 2) as isize;
        let plane = h * wd;
        for n in 0..self.n {
            for o in 0..self.o {
                let go = &gy[(n * self.o + o) * plane..(n * self.o + o + 1) * plane];
                for c in 0..self.c {
                    let xoff = (n * self.c + c) * plane;
                    let woff = (o * self.c + c) * k * k;
                    for ky in 0..k {
                        let dy = ky as isize - pad;
                        let (ylo, yhi) = Self::span(h, dy);
                        for kx in 0..k {
                            let dx = kx as isize - pad;
                            let (xlo, xhi) = Self::span(wd, dx);
                            let kv = w[woff + ky * k + kx];
                            let mut acc = 0.0;
                            for i in ylo..yhi {
                                let src_row = xoff + ((i as isize + dy) as usize) * wd;
                                let dst_row = i * wd;
                                for j in xlo..xhi {
                                    let si = src_row + (j as isize + dx) as usize;
                                    let gv = go[dst_row + j];
                                    acc += gv * x[si];
                                    gx[si] += gv * kv;
                                }
                            }
                            gw[woff + ky * k + kx] += acc;
                        }
                    }
                }
            }
        }
    }
}
