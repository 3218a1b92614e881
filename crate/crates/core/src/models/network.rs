use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    /// Logistic regression: one affine layer with a sigmoid output.
    Lr,
    /// Linear SVM: one affine layer producing a raw margin.
    Svm,
    /// Fully connected network with rectifier hidden layers and sigmoid outputs.
    Fcnn { hidden: Vec<usize> },
}

impl Architecture {
    pub fn fcnn3() -> Self {
        Architecture::Fcnn {
            hidden: vec![64, 32],
        }
    }

    pub fn fcnn5() -> Self {
        Architecture::Fcnn {
            hidden: vec![64, 64, 32, 32],
        }
    }

    pub fn name(&self) -> String {
        match self {
            Architecture::Lr => "lr".into(),
            Architecture::Svm => "svm".into(),
            Architecture::Fcnn { hidden } => {
                let widths: Vec<String> = hidden.iter().map(|w| w.to_string()).collect();
                format!("fcnn:{}", widths.join("-"))
            }
        }
    }

    /// Parse `lr`, `svm`, `fcnn3`, `fcnn5` or `fcnn:64-32`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lr" => Ok(Architecture::Lr),
            "svm" => Ok(Architecture::Svm),
            "fcnn3" | "fcnn(3)" => Ok(Self::fcnn3()),
            "fcnn5" | "fcnn(5)" => Ok(Self::fcnn5()),
            _ => {
                let widths = s
                    .strip_prefix("fcnn:")
                    .ok_or_else(|| Error::config(format!("unknown architecture `{s}`")))?;
                let hidden = widths
                    .split('-')
                    .map(|w| w.parse::<usize>().ok().filter(|&w| w > 0))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::config(format!("bad layer widths in `{s}`")))?;
                Ok(Architecture::Fcnn { hidden })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Sigmoid,
    /// Raw affine score (SVM margin).
    Identity,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Classifier parameters θ, stored as one flat vector: for each layer the
/// weight matrix (row-major, `out x in`) followed by its bias vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub arch: Architecture,
    sizes: Vec<usize>,
    pub params: Vec<f64>,
}

/// Intermediate values of one forward pass, kept for back-propagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `acts[0]` is the input, `acts[l]` the output of layer `l`.
    acts: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("non-empty")
    }
}

impl ModelParams {
    /// All-zero parameters.
    pub fn zeros(arch: Architecture, input_dim: usize, output_dim: usize) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::config("model dimensions must be positive"));
        }
        if arch == Architecture::Svm && output_dim != 1 {
            return Err(Error::config("linear SVM supports binary labels only"));
        }
        let mut sizes = vec![input_dim];
        if let Architecture::Fcnn { hidden } = &arch {
            if hidden.contains(&0) {
                return Err(Error::config("hidden widths must be positive"));
            }
            sizes.extend(hidden);
        }
        sizes.push(output_dim);
        let n = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Self {
            arch,
            sizes,
            params: vec![0.0; n],
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(
        arch: Architecture,
        input_dim: usize,
        output_dim: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut m = Self::zeros(arch, input_dim, output_dim)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut off = 0;
        for w in m.sizes.clone().windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut m.params[off..off + fan_in * fan_out] {
                *p = rng.gen_range(-bound..=bound);
            }
            off += fan_in * fan_out + fan_out;
        }
        Ok(m)
    }

    pub fn from_parts(arch: Architecture, sizes: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Checkpoint(
                "need at least input and output sizes".into(),
            ));
        }
        let mut m = Self::zeros(arch, sizes[0], *sizes.last().unwrap())?;
        if m.sizes != sizes {
            return Err(Error::Checkpoint(format!(
                "layer sizes {sizes:?} do not match architecture {}",
                m.arch.name()
            )));
        }
        if params.len() != m.params.len() {
            return Err(Error::Dimension {
                expected: m.params.len(),
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("checkpoint parameter".into()));
        }
        m.params = params;
        Ok(m)
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

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn output_activation(&self) -> OutputActivation {
        match self.arch {
            Architecture::Svm => OutputActivation::Identity,
            _ => OutputActivation::Sigmoid,
        }
    }

    fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_cached(input)?.acts.pop().unwrap())
    }

    pub fn forward_cached(&self, input: &[f64]) -> Result<ForwardCache> {
        if input.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(input.to_vec());
        let mut off = 0;
        let last = self.num_layers() - 1;
        for l in 0..self.num_layers() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[off..off + n_in * n_out];
            let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let prev = &acts[l];
            let mut out = Vec::with_capacity(n_out);
            for o in 0..n_out {
                let row = &w[o * n_in..(o + 1) * n_in];
                let z = row.iter().zip(prev).map(|(a, b)| a * b).sum::<f64>() + b[o];
                out.push(if l < last {
                    z.max(0.0)
                } else {
                    match self.output_activation() {
                        OutputActivation::Sigmoid => sigmoid(z),
                        OutputActivation::Identity => z,
                    }
                });
            }
            acts.push(out);
            off += n_in * n_out + n_out;
        }
        Ok(ForwardCache { acts })
    }

    /// Accumulate into `grad` the parameter gradient of the scalar whose
    /// gradient with respect to the model output is `seed`.
    pub fn backward_cached(
        &self,
        cache: &ForwardCache,
        seed: &[f64],
        grad: &mut [f64],
    ) -> Result<()> {
        if seed.len() != self.output_dim() {
            return Err(Error::Dimension {
                expected: self.output_dim(),
                got: seed.len(),
            });
        }
        if grad.len() != self.params.len() {
            return Err(Error::Dimension {
                expected: self.params.len(),
                got: grad.len(),
            });
        }
        let out = cache.output();
        let mut delta: Vec<f64> = match self.output_activation() {
            OutputActivation::Sigmoid => seed
                .iter()
                .zip(out)
                .map(|(g, s)| g * s * (1.0 - s))
                .collect(),
            OutputActivation::Identity => seed.to_vec(),
        };

        let mut offsets = Vec::with_capacity(self.num_layers());
        let mut off = 0;
        for l in 0..self.num_layers() {
            offsets.push(off);
            off += self.sizes[l] * self.sizes[l + 1] + self.sizes[l + 1];
        }

        for l in (0..self.num_layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let input = &cache.acts[l];
            {
                let (gw, gb) = grad[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
                for o in 0..n_out {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    for (g, x) in gw[o * n_in..(o + 1) * n_in].iter_mut().zip(input) {
                        *g += d * x;
                    }
                    gb[o] += d;
                }
            }
            if l > 0 {
                let w = &self.params[off..off + n_in * n_out];
                let mut prev = vec![0.0; n_in];
                for o in 0..n_out {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    for (p, wv) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                        *p += wv * d;
                    }
                }
                // rectifier derivative; the hidden activation is zero exactly when inactive
                for (p, a) in prev.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
        Ok(())
    }

    pub fn backward(&self, input: &[f64], seed: &[f64]) -> Result<Vec<f64>> {
        let cache = self.forward_cached(input)?;
        let mut grad = vec![0.0; self.params.len()];
        self.backward_cached(&cache, seed, &mut grad)?;
        Ok(grad)
    }

    /// Largest absolute parameter difference between two models of one shape.
    pub fn max_abs_diff(&self, other: &ModelParams) -> f64 {
        self.params
            .iter()
            .zip(&other.params)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lr_outputs_half() {
        let m = ModelParams::zeros(Architecture::Lr, 4, 1).unwrap();
        assert_eq!(m.forward(&[0.3, 0.9, 0.1, 0.0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn svm_margin_is_dot_product() {
        let m =
            ModelParams::from_parts(Architecture::Svm, vec![2, 1], vec![1.0, -1.0, 0.0]).unwrap();
        let out = m.forward(&[0.3, 0.1]).unwrap();
        assert!((out[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn dimension_checks() {
        let m = ModelParams::init(Architecture::fcnn3(), 5, 1, 0).unwrap();
        assert_eq!(m.num_params(), 5 * 64 + 64 + 64 * 32 + 32 + 32 + 1);
        assert!(matches!(
            m.forward(&[0.0; 4]),
            Err(Error::Dimension {
                expected: 5,
                got: 4
            })
        ));
        assert!(m.backward(&[0.0; 5], &[1.0, 2.0]).is_err());
        assert!(ModelParams::zeros(Architecture::Svm, 3, 3).is_err());
    }

    #[test]
    fn zero_seed_gives_zero_gradient() {
        let m = ModelParams::init(Architecture::fcnn5(), 6, 3, 11).unwrap();
        let g = m
            .backward(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6], &[0.0; 3])
            .unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = ModelParams::init(Architecture::fcnn3(), 10, 1, 5).unwrap();
        let b = ModelParams::init(Architecture::fcnn3(), 10, 1, 5).unwrap();
        let c = ModelParams::init(Architecture::fcnn3(), 10, 1, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let bound = (6.0f64 / 74.0).sqrt();
        assert!(a.params[..640].iter().all(|p| p.abs() <= bound));
        assert!(a.params[640..704].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn parses_architectures() {
        assert_eq!(Architecture::parse("fcnn3").unwrap(), Architecture::fcnn3());
        assert_eq!(
            Architecture::parse("fcnn:8-4").unwrap(),
            Architecture::Fcnn { hidden: vec![8, 4] }
        );
        assert!(Architecture::parse("fcnn:8-0").is_err());
        assert!(Architecture::parse("rbf").is_err());
        for a in [Architecture::Lr, Architecture::Svm, Architecture::fcnn5()] {
            assert_eq!(Architecture::parse(&a.name()).unwrap(), a);
        }
    }
}
