//! A small Q-network written directly against flat parameter buffers.
//!
//! Architecture (all hidden nonlinearities are rectifiers):
//!
//! ```text
//! TXC (L x N) --conv1d banks (F filters per width) -> global max-pool -> relu --\
//! FCR (1)     --dense 1 -> Hs -> relu ---------------------------------------------+-> concat
//! FCD (K x V) --flatten -> dense KV -> Hv -> relu --------------------------------/
//! concat --dense -> H1 -> relu --dense -> H2 -> relu --dense -> 1 (linear)
//! ```
//!
//! Count-valued inputs (FCR and the FCD histograms) enter the network as
//! `ln(1 + count)`.
//!
//! Parameter layout, in order: for each convolution width, the filter weights
//! `[filter][channel][tap]` followed by the filter biases; then weights
//! `[out][in]` and biases of the FCR handler, the FCD handler, the two trunk
//! layers and the head.

mod adam;
mod checkpoint;

pub use adam::AdamState;
pub use checkpoint::{load_model, load_model_expecting, save_model, Checkpoint, CHECKPOINT_MAGIC};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::features::{FeatureBundle, FeatureConfig};
use crate::rng;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub features: FeatureConfig,
    /// Convolution filters per width.
    pub filters: usize,
    pub widths: Vec<usize>,
    pub fcr_hidden: usize,
    pub fcd_hidden: usize,
    pub hidden1: usize,
    pub hidden2: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture::for_features(FeatureConfig::default())
    }
}

impl Architecture {
    pub fn for_features(features: FeatureConfig) -> Self {
        Architecture {
            features,
            filters: 8,
            widths: vec![2, 3],
            fcr_hidden: 8,
            fcd_hidden: 32,
            hidden1: 64,
            hidden2: 32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        let n = self.features.max_words;
        if self.widths.is_empty() || self.widths.iter().any(|&w| w == 0 || w > n) {
            return Err(Error::usage(format!(
                "convolution widths {:?} must lie in 1..={n}",
                self.widths
            )));
        }
        if [
            self.filters,
            self.fcr_hidden,
            self.fcd_hidden,
            self.hidden1,
            self.hidden2,
        ]
        .contains(&0)
        {
            return Err(Error::usage("layer sizes must be positive"));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        Layout::new(self).len
    }

    fn text_width(&self) -> usize {
        self.filters * self.widths.len()
    }

    fn concat_width(&self) -> usize {
        self.text_width() + self.fcr_hidden + self.fcd_hidden
    }
}

#[derive(Clone, Copy, Debug)]
struct Dense {
    w: usize,
    b: usize,
    inputs: usize,
    outputs: usize,
}

impl Dense {
    fn new(offset: &mut usize, inputs: usize, outputs: usize) -> Self {
        let w = *offset;
        let b = w + inputs * outputs;
        *offset = b + outputs;
        Dense {
            w,
            b,
            inputs,
            outputs,
        }
    }

    fn apply(&self, params: &[f64], x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.outputs {
            let row = &params[self.w + o * self.inputs..self.w + (o + 1) * self.inputs];
            let dot: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            out.push(dot + params[self.b + o]);
        }
    }

    /// Accumulates parameter gradients and returns d(loss)/d(input).
    fn backward(&self, params: &[f64], x: &[f64], dy: &[f64], grads: &mut [f64]) -> Vec<f64> {
        let mut dx = vec![0.0; self.inputs];
        for (o, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let base = self.w + o * self.inputs;
            for i in 0..self.inputs {
                grads[base + i] += g * x[i];
                dx[i] += g * params[base + i];
            }
            grads[self.b + o] += g;
        }
        dx
    }
}

#[derive(Clone, Copy, Debug)]
struct ConvBank {
    width: usize,
    w: usize,
    b: usize,
}

#[derive(Clone, Debug)]
struct Layout {
    conv: Vec<ConvBank>,
    fcr: Dense,
    fcd: Dense,
    trunk1: Dense,
    trunk2: Dense,
    head: Dense,
    len: usize,
}

impl Layout {
    fn new(arch: &Architecture) -> Self {
        let l = arch.features.embedding_dim;
        let mut off = 0;
        let conv = arch
            .widths
            .iter()
            .map(|&width| {
                let w = off;
                let b = w + arch.filters * l * width;
                off = b + arch.filters;
                ConvBank { width, w, b }
            })
            .collect();
        let kv = arch.features.generations * arch.features.buckets;
        let fcr = Dense::new(&mut off, 1, arch.fcr_hidden);
        let fcd = Dense::new(&mut off, kv, arch.fcd_hidden);
        let trunk1 = Dense::new(&mut off, arch.concat_width(), arch.hidden1);
        let trunk2 = Dense::new(&mut off, arch.hidden1, arch.hidden2);
        let head = Dense::new(&mut off, arch.hidden2, 1);
        Layout {
            conv,
            fcr,
            fcd,
            trunk1,
            trunk2,
            head,
            len: off,
        }
    }
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Clone, Debug, Default)]
struct ForwardTrace {
    /// Per filter (all banks in order): winning position and pooled value.
    pool_argmax: Vec<usize>,
    pool_max: Vec<f64>,
    fcr_in: [f64; 1],
    fcr_pre: Vec<f64>,
    fcd_in: Vec<f64>,
    fcd_pre: Vec<f64>,
    concat: Vec<f64>,
    h1_pre: Vec<f64>,
    h1: Vec<f64>,
    h2_pre: Vec<f64>,
    h2: Vec<f64>,
    out: f64,
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

fn relu_grad(pre: &[f64], dy: &[f64]) -> Vec<f64> {
    pre.iter()
        .zip(dy)
        .map(|(&p, &g)| if p > 0.0 { g } else { 0.0 })
        .collect()
}

/// Count features enter the network on a log scale.
pub fn count_input(count: u64) -> f64 {
    (count as f64).ln_1p()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSample {
    pub bundle: FeatureBundle,
    pub target_q: f64,
}

#[derive(Clone, Debug)]
pub struct QNetwork {
    arch: Architecture,
    layout: Layout,
    params: Vec<f64>,
}

impl PartialEq for QNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.arch == other.arch && self.params == other.params
    }
}

impl QNetwork {
    /// All-zero weights and biases.
    pub fn zeros(arch: Architecture) -> Result<Self> {
        arch.validate()?;
        let layout = Layout::new(&arch);
        Ok(QNetwork {
            params: vec![0.0; layout.len],
            arch,
            layout,
        })
    }

    /// He-normal weights, zero biases, seeded.
    pub fn new(arch: Architecture, seed: u64) -> Result<Self> {
        let mut net = QNetwork::zeros(arch)?;
        let mut rng = rng::seeded(seed);
        let l = net.arch.features.embedding_dim;
        let mut fill = |params: &mut [f64], fan_in: usize| {
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
            for p in params {
                *p = normal.sample(&mut rng);
            }
        };
        let layout = net.layout.clone();
        for bank in &layout.conv {
            let n = net.arch.filters * l * bank.width;
            fill(&mut net.params[bank.w..bank.w + n], l * bank.width);
        }
        for d in [
            layout.fcr,
            layout.fcd,
            layout.trunk1,
            layout.trunk2,
            layout.head,
        ] {
            fill(&mut net.params[d.w..d.w + d.inputs * d.outputs], d.inputs);
        }
        Ok(net)
    }

    pub fn from_params(arch: Architecture, params: Vec<f64>) -> Result<Self> {
        arch.validate()?;
        let layout = Layout::new(&arch);
        if params.len() != layout.len {
            return Err(Error::shape(format!(
                "expected {} parameters, got {}",
                layout.len,
                params.len()
            )));
        }
        Ok(QNetwork {
            arch,
            layout,
            params,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn forward(&self, bundle: &FeatureBundle) -> Result<f64> {
        bundle.check_shape(&self.arch.features)?;
        Ok(self.forward_trace(bundle).out)
    }

    fn forward_trace(&self, bundle: &FeatureBundle) -> ForwardTrace {
        let p = &self.params;
        let l = self.arch.features.embedding_dim;
        let n = self.arch.features.max_words;
        let x = &bundle.txc.data;
        let mut t = ForwardTrace::default();

        for bank in &self.layout.conv {
            let positions = n - bank.width + 1;
            for f in 0..self.arch.filters {
                let wf = bank.w + f * l * bank.width;
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for pos in 0..positions {
                    let mut s = p[bank.b + f];
                    for c in 0..l {
                        let wrow = &p[wf + c * bank.width..wf + (c + 1) * bank.width];
                        let xrow = &x[c * n + pos..c * n + pos + bank.width];
                        s += wrow.iter().zip(xrow).map(|(a, b)| a * b).sum::<f64>();
                    }
                    if s > best {
                        best = s;
                        arg = pos;
                    }
                }
                t.pool_argmax.push(arg);
                t.pool_max.push(best);
            }
        }

        t.fcr_in = [count_input(bundle.fcr)];
        self.layout.fcr.apply(p, &t.fcr_in, &mut t.fcr_pre);
        t.fcd_in = bundle
            .fcd
            .iter()
            .flatten()
            .map(|&c| count_input(c))
            .collect();
        self.layout.fcd.apply(p, &t.fcd_in, &mut t.fcd_pre);

        t.concat = Vec::with_capacity(self.arch.concat_width());
        t.concat.extend(t.pool_max.iter().map(|v| v.max(0.0)));
        t.concat.extend(t.fcr_pre.iter().map(|v| v.max(0.0)));
        t.concat.extend(t.fcd_pre.iter().map(|v| v.max(0.0)));

        self.layout.trunk1.apply(p, &t.concat, &mut t.h1_pre);
        t.h1 = relu(&t.h1_pre);
        self.layout.trunk2.apply(p, &t.h1, &mut t.h2_pre);
        t.h2 = relu(&t.h2_pre);
        let mut out = Vec::with_capacity(1);
        self.layout.head.apply(p, &t.h2, &mut out);
        t.out = out[0];
        t
    }

    /// Gradient of the scalar output times `upstream`, for every parameter.
    pub fn backward(&self, bundle: &FeatureBundle, upstream: f64) -> Result<Vec<f64>> {
        bundle.check_shape(&self.arch.features)?;
        let trace = self.forward_trace(bundle);
        let mut grads = vec![0.0; self.params.len()];
        self.backward_into(bundle, &trace, upstream, &mut grads);
        Ok(grads)
    }

    fn backward_into(
        &self,
        bundle: &FeatureBundle,
        t: &ForwardTrace,
        upstream: f64,
        grads: &mut [f64],
    ) {
        if upstream == 0.0 {
            return;
        }
        let p = &self.params;
        let lay = &self.layout;

        let dh2 = lay.head.backward(p, &t.h2, &[upstream], grads);
        let dh2_pre = relu_grad(&t.h2_pre, &dh2);
        let dh1 = lay.trunk2.backward(p, &t.h1, &dh2_pre, grads);
        let dh1_pre = relu_grad(&t.h1_pre, &dh1);
        let dconcat = lay.trunk1.backward(p, &t.concat, &dh1_pre, grads);

        let text = self.arch.text_width();
        let (dtext, rest) = dconcat.split_at(text);
        let (dfcr, dfcd) = rest.split_at(self.arch.fcr_hidden);

        let dfcr_pre = relu_grad(&t.fcr_pre, dfcr);
        lay.fcr.backward(p, &t.fcr_in, &dfcr_pre, grads);
        let dfcd_pre = relu_grad(&t.fcd_pre, dfcd);
        lay.fcd.backward(p, &t.fcd_in, &dfcd_pre, grads);

        let l = self.arch.features.embedding_dim;
        let n = self.arch.features.max_words;
        let x = &bundle.txc.data;
        let mut slot = 0;
        for bank in &lay.conv {
            for f in 0..self.arch.filters {
                let g = if t.pool_max[slot] > 0.0 {
                    dtext[slot]
                } else {
                    0.0
                };
                let pos = t.pool_argmax[slot];
                slot += 1;
                if g == 0.0 {
                    continue;
                }
                let wf = bank.w + f * l * bank.width;
                for c in 0..l {
                    for k in 0..bank.width {
                        grads[wf + c * bank.width + k] += g * x[c * n + pos + k];
                    }
                }
                grads[bank.b + f] += g;
            }
        }
    }

    /// Mean squared error of the batch before the update; applies one Adam step.
    pub fn train_batch(&mut self, adam: &mut AdamState, samples: &[TrainingSample]) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::usage("training batch is empty"));
        }
        if adam.len() != self.params.len() {
            return Err(Error::shape(format!(
                "optimizer tracks {} parameters, network has {}",
                adam.len(),
                self.params.len()
            )));
        }
        let scale = 1.0 / samples.len() as f64;
        let mut grads = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        for s in samples {
            s.bundle.check_shape(&self.arch.features)?;
            if !s.target_q.is_finite() {
                return Err(Error::usage("training target is not finite"));
            }
            let trace = self.forward_trace(&s.bundle);
            let err = trace.out - s.target_q;
            loss += err * err;
            self.backward_into(&s.bundle, &trace, 2.0 * err * scale, &mut grads);
        }
        adam.step(&mut self.params, &grads)?;
        Ok(loss * scale)
    }
}
