use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};

/// Fully-connected network: tanh on hidden layers, identity on the output.
///
/// Parameters live in one flat vector so optimizers, checkpoints and
/// finite-difference checks can treat the network as a plain `&[f64]`.
/// Layer `l` stores its weight matrix (`in x out`, row-major) followed by
/// its bias vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Activations recorded by [`Mlp::forward`]; `activations[0]` is the input
/// batch and the last entry is the network output.
#[derive(Debug, Clone)]
pub struct MlpCache {
    activations: Vec<Array2<f64>>,
}

impl MlpCache {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("cache holds at least the input")
    }
}

pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!("invalid layer sizes {sizes:?}")));
        }
        Ok(Mlp {
            sizes: sizes.to_vec(),
            params: vec![0.0; param_count(sizes)],
        })
    }

    /// Xavier-uniform weights, zero biases; the final layer's weights are
    /// multiplied by `output_gain`.
    pub fn new(sizes: &[usize], output_gain: f64, rng: &mut impl Rng) -> Result<Self> {
        let mut net = Mlp::zeros(sizes)?;
        let n_layers = net.n_layers();
        let mut offset = 0;
        for l in 0..n_layers {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let gain = if l + 1 == n_layers { output_gain } else { 1.0 };
            let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
            for w in &mut net.params[offset..offset + fan_in * fan_out] {
                *w = dist.sample(rng) * gain;
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(net)
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        let mut net = Mlp::zeros(sizes)?;
        if params.len() != net.params.len() {
            return Err(Error::ShapeMismatch {
                context: "mlp parameters",
                expected: net.params.len(),
                got: params.len(),
            });
        }
        net.params = params;
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn layer(&self, l: usize) -> (ArrayView2<'_, f64>, ArrayView1<'_, f64>) {
        let offset = param_count(&self.sizes[..=l]);
        let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
        let w = ArrayView2::from_shape((fan_in, fan_out), &self.params[offset..offset + fan_in * fan_out])
            .expect("layer slice matches its shape");
        let b = ArrayView1::from(&self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out]);
        (w, b)
    }

    fn check_input(&self, input: &ArrayView2<f64>) -> Result<()> {
        if input.ncols() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                context: "mlp input",
                expected: self.input_dim(),
                got: input.ncols(),
            });
        }
        Ok(())
    }

    /// Batched forward pass (`rows = samples`) keeping the activations for
    /// [`Mlp::backward`].
    pub fn forward(&self, input: ArrayView2<f64>) -> Result<MlpCache> {
        self.check_input(&input)?;
        let mut activations = Vec::with_capacity(self.sizes.len());
        activations.push(input.to_owned());
        for l in 0..self.n_layers() {
            let (w, b) = self.layer(l);
            let mut z = activations[l].dot(&w);
            z += &b;
            if l + 1 < self.n_layers() {
                z.mapv_inplace(f64::tanh);
            }
            activations.push(z);
        }
        Ok(MlpCache { activations })
    }

    pub fn predict(&self, input: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward(input)?.activations.pop().unwrap())
    }

    pub fn predict_one(&self, input: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, input.len()), input).expect("row vector");
        Ok(self.predict(view)?.into_raw_vec_and_offset().0)
    }

    /// Reverse pass. Returns the gradient with respect to the flat parameter
    /// vector and with respect to the input batch.
    pub fn backward(&self, cache: &MlpCache, output_grad: ArrayView2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
        if cache.activations.len() != self.sizes.len()
            || cache
                .activations
                .iter()
                .zip(&self.sizes)
                .any(|(a, &n)| a.ncols() != n)
        {
            return Err(Error::ShapeMismatch {
                context: "mlp cache",
                expected: self.sizes.len(),
                got: cache.activations.len(),
            });
        }
        let out = cache.output();
        if output_grad.dim() != out.dim() {
            return Err(Error::ShapeMismatch {
                context: "mlp output gradient",
                expected: out.len(),
                got: output_grad.len(),
            });
        }
        let mut grads = vec![0.0; self.params.len()];
        let mut delta = output_grad.to_owned();
        for l in (0..self.n_layers()).rev() {
            if l + 1 < self.n_layers() {
                let a = &cache.activations[l + 1];
                delta.zip_mut_with(a, |g, &y| *g *= 1.0 - y * y);
            }
            let (w, _) = self.layer(l);
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let offset = param_count(&self.sizes[..=l]);
            let dw = cache.activations[l].t().dot(&delta);
            let db = delta.sum_axis(Axis(0));
            grads[offset..offset + fan_in * fan_out]
                .iter_mut()
                .zip(dw.iter())
                .for_each(|(g, v)| *g = *v);
            grads[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out]
                .iter_mut()
                .zip(db.iter())
                .for_each(|(g, v)| *g = *v);
            delta = delta.dot(&w.t());
        }
        Ok((grads, delta))
    }

    /// Overwrites the final layer's weights and bias with zeros.
    pub fn zero_output_layer(&mut self) {
        let l = self.n_layers() - 1;
        let offset = param_count(&self.sizes[..=l]);
        self.params[offset..].fill(0.0);
    }

    /// Bias slice of layer `l`.
    pub fn bias_mut(&mut self, l: usize) -> &mut [f64] {
        let offset = param_count(&self.sizes[..=l]);
        let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
        &mut self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out]
    }

    /// Weight matrix of layer `l` as an owned array (testing and inspection).
    pub fn weight(&self, l: usize) -> Array2<f64> {
        self.layer(l).0.to_owned()
    }

    pub fn bias(&self, l: usize) -> Array1<f64> {
        self.layer(l).1.to_owned()
    }

    /// Row `r` of a batch as a slice-friendly vector.
    pub fn row(batch: &Array2<f64>, r: usize) -> Vec<f64> {
        batch.slice(s![r, ..]).to_vec()
    }
}
