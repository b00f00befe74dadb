//! Small dense networks with hand-written backpropagation.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ppo::distribution::{ACTION_LOGITS, NUM_AXES};

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// (inputs × outputs)
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    /// Column-normalized Gaussian init: each output column has norm `std`.
    pub fn normc<R: Rng + ?Sized>(inputs: usize, outputs: usize, std: f64, rng: &mut R) -> Self {
        let mut weight = Array2::from_shape_simple_fn((inputs, outputs), || {
            rng.sample::<f64, _>(StandardNormal)
        });
        for mut col in weight.columns_mut() {
            let norm = col.dot(&col).sqrt().max(f64::MIN_POSITIVE);
            col.mapv_inplace(|v| v * std / norm);
        }
        Self {
            weight,
            bias: Array1::zeros(outputs),
        }
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

/// tanh hidden layers, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Activations kept from a forward pass: `inputs[l]` is the input to layer l.
pub struct MlpCache {
    inputs: Vec<Array2<f64>>,
}

pub struct DenseGrad {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(
        input: usize,
        hidden: &[usize],
        output: usize,
        out_std: f64,
        rng: &mut R,
    ) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut prev = input;
        for &h in hidden {
            layers.push(Dense::normc(prev, h, 1.0, rng));
            prev = h;
        }
        layers.push(Dense::normc(prev, output, out_std, rng));
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers
            .last()
            .expect("at least one layer")
            .weight
            .ncols()
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut a = x.clone();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            a = a.dot(&layer.weight) + &layer.bias;
            if l < last {
                a.mapv_inplace(f64::tanh);
            }
        }
        a
    }

    pub fn forward_cached(&self, x: &Array2<f64>) -> (Array2<f64>, MlpCache) {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut a = x.clone();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let z = a.dot(&layer.weight) + &layer.bias;
            inputs.push(a);
            a = z;
            if l < last {
                a.mapv_inplace(f64::tanh);
            }
        }
        (a, MlpCache { inputs })
    }

    /// Gradients of a scalar loss given dL/d(output).
    pub fn backward(&self, cache: &MlpCache, grad_out: Array2<f64>) -> Vec<DenseGrad> {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = grad_out;
        for l in (0..self.layers.len()).rev() {
            let input = &cache.inputs[l];
            grads.push(DenseGrad {
                weight: input.t().dot(&g),
                bias: g.sum_axis(Axis(0)),
            });
            if l > 0 {
                let mut back = g.dot(&self.layers[l].weight.t());
                // input to layer l is tanh output of layer l-1
                back.zip_mut_with(input, |b, &a| *b *= 1.0 - a * a);
                g = back;
            }
        }
        grads.reverse();
        grads
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
}

/// Policy trunk with three 3-way categorical heads, plus a separate value net.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    pub policy: Mlp,
    pub value: Mlp,
    spec: NetworkSpec,
}

/// Named tensor view used for flat parameter vectors and checkpoints.
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
}

impl ActorCritic {
    pub fn new<R: Rng + ?Sized>(spec: NetworkSpec, rng: &mut R) -> Self {
        let policy = Mlp::new(spec.input_dim, &spec.hidden, ACTION_LOGITS, 0.01, rng);
        let value = Mlp::new(spec.input_dim, &spec.hidden, 1, 0.01, rng);
        Self {
            policy,
            value,
            spec,
        }
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn param_count(&self) -> usize {
        self.policy.param_count() + self.value.param_count()
    }

    fn tensors(&self) -> impl Iterator<Item = (String, &Dense)> {
        let p = self
            .policy
            .layers
            .iter()
            .enumerate()
            .map(|(i, d)| (format!("policy.{i}"), d));
        let v = self
            .value
            .layers
            .iter()
            .enumerate()
            .map(|(i, d)| (format!("value.{i}"), d));
        p.chain(v)
    }

    pub fn tensor_infos(&self) -> Vec<TensorInfo> {
        self.tensors()
            .flat_map(|(prefix, d)| {
                [
                    TensorInfo {
                        name: format!("{prefix}.weight"),
                        shape: d.weight.shape().to_vec(),
                    },
                    TensorInfo {
                        name: format!("{prefix}.bias"),
                        shape: d.bias.shape().to_vec(),
                    },
                ]
            })
            .collect()
    }

    /// All parameters in tensor order, weights row-major.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (_, d) in self.tensors() {
            out.extend(d.weight.iter());
            out.extend(d.bias.iter());
        }
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) {
        assert_eq!(
            flat.len(),
            self.param_count(),
            "flat parameter length mismatch"
        );
        let mut offset = 0;
        for d in self
            .policy
            .layers
            .iter_mut()
            .chain(self.value.layers.iter_mut())
        {
            for w in d.weight.iter_mut().chain(d.bias.iter_mut()) {
                *w = flat[offset];
                offset += 1;
            }
        }
    }

    /// Logits (B × 9) for a batch of observations.
    pub fn logits(&self, obs: &Array2<f64>) -> Array2<f64> {
        self.policy.forward(obs)
    }

    pub fn values(&self, obs: &Array2<f64>) -> Array1<f64> {
        self.value.forward(obs).column(0).to_owned()
    }

    /// Logits and value for a single observation.
    pub fn evaluate_one(&self, obs: &[f64]) -> ([f64; ACTION_LOGITS], f64) {
        let x = Array2::from_shape_vec((1, obs.len()), obs.to_vec()).expect("row vector");
        let logits = self.policy.forward(&x);
        let value = self.value.forward(&x)[(0, 0)];
        let mut out = [0.0; ACTION_LOGITS];
        for (o, l) in out.iter_mut().zip(logits.row(0)) {
            *o = *l;
        }
        (out, value)
    }

    pub fn num_heads(&self) -> usize {
        NUM_AXES
    }
}

/// Flattens per-layer gradients of both networks in `flat_params` order.
pub fn flatten_grads(policy: &[DenseGrad], value: &[DenseGrad]) -> Vec<f64> {
    let mut out = Vec::new();
    for g in policy.iter().chain(value) {
        out.extend(g.weight.iter());
        out.extend(g.bias.iter());
    }
    out
}
