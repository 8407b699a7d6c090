use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::OnlineModel;
use crate::error::{Error, Result};
use crate::stream::Label;
use crate::Scalar;

pub const DEFAULT_LEARNING_RATE: f64 = 0.04;
pub const INIT_RANGE: f64 = 0.5;
const N_CLASSES: usize = 2;

/// Hidden width: the average of attribute and class counts, rounded.
pub fn hidden_size(n_attributes: usize) -> usize {
    (((n_attributes + N_CLASSES) as f64) / 2.0).round().max(1.0) as usize
}

fn sigmoid<T: Scalar>(v: T) -> T {
    T::one() / (T::one() + (-v).exp())
}

/// One-hidden-layer perceptron with sigmoid hidden units and a softmax
/// output, trained by per-example SGD on cross-entropy.
///
/// Parameters live in one flat vector laid out as
/// `[W1 (hidden x inputs, row-major), b1, W2 (2 x hidden, row-major), b2]`.
/// Output 0 is the positive class.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel<T> {
    n_in: usize,
    n_hidden: usize,
    params: Vec<T>,
    learning_rate: T,
}

struct Forward<T> {
    hidden: Vec<T>,
    probs: [T; 2],
}

impl<T: Scalar> MlpModel<T> {
    pub fn new(n_attributes: usize, learning_rate: T, seed: u64) -> Self {
        let n_hidden = hidden_size(n_attributes);
        let n_params = n_hidden * n_attributes + n_hidden + N_CLASSES * n_hidden + N_CLASSES;
        let mut m = MlpModel {
            n_in: n_attributes,
            n_hidden,
            params: vec![T::zero(); n_params],
            learning_rate,
        };
        m.init(seed);
        m
    }

    fn init(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in &mut self.params {
            *p = T::of(rng.random_range(-INIT_RANGE..INIT_RANGE));
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_in
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn learning_rate(&self) -> T {
        self.learning_rate
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.n_hidden * self.n_in;
        let w2 = b1 + self.n_hidden;
        let b2 = w2 + N_CLASSES * self.n_hidden;
        (b1, w2, b2)
    }

    fn check(&self, x: &[T]) -> Result<()> {
        if x.len() != self.n_in {
            return Err(Error::Dimension {
                expected: self.n_in,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn forward(&self, x: &[T]) -> Forward<T> {
        let (b1, w2, b2) = self.offsets();
        let p = &self.params;
        let hidden: Vec<T> = (0..self.n_hidden)
            .map(|j| {
                let row = &p[j * self.n_in..(j + 1) * self.n_in];
                let pre = row.iter().zip(x).map(|(&w, &v)| w * v).sum::<T>() + p[b1 + j];
                sigmoid(pre)
            })
            .collect();
        let mut z = [T::zero(); 2];
        for (k, zk) in z.iter_mut().enumerate() {
            let row = &p[w2 + k * self.n_hidden..w2 + (k + 1) * self.n_hidden];
            *zk = row.iter().zip(&hidden).map(|(&w, &h)| w * h).sum::<T>() + p[b2 + k];
        }
        let m = z[0].max(z[1]);
        let e = [(z[0] - m).exp(), (z[1] - m).exp()];
        let s = e[0] + e[1];
        Forward {
            hidden,
            probs: [e[0] / s, e[1] / s],
        }
    }

    /// Cross-entropy of the true class.
    pub fn loss(&self, x: &[T], label: Label) -> Result<T> {
        self.check(x)?;
        let prob = self.forward(x).probs[label.index()];
        Ok(-prob.max(T::min_positive_value()).ln())
    }

    /// Gradient of [`MlpModel::loss`] with respect to the flat parameters.
    pub fn gradient(&self, x: &[T], label: Label) -> Result<Vec<T>> {
        self.check(x)?;
        let (b1, w2, b2) = self.offsets();
        let fwd = self.forward(x);
        let mut g = vec![T::zero(); self.params.len()];
        let mut dz = fwd.probs;
        dz[label.index()] = dz[label.index()] - T::one();
        for k in 0..N_CLASSES {
            for j in 0..self.n_hidden {
                g[w2 + k * self.n_hidden + j] = dz[k] * fwd.hidden[j];
            }
            g[b2 + k] = dz[k];
        }
        for j in 0..self.n_hidden {
            let back = (0..N_CLASSES)
                .map(|k| self.params[w2 + k * self.n_hidden + j] * dz[k])
                .sum::<T>();
            let h = fwd.hidden[j];
            let dpre = back * h * (T::one() - h);
            for i in 0..self.n_in {
                g[j * self.n_in + i] = dpre * x[i];
            }
            g[b1 + j] = dpre;
        }
        Ok(g)
    }
}

impl<T: Scalar> OnlineModel<T> for MlpModel<T> {
    fn train_one(&mut self, x: &[T], label: Label) -> Result<()> {
        let g = self.gradient(x, label)?;
        let lr = self.learning_rate;
        for (p, d) in self.params.iter_mut().zip(g) {
            *p = *p - lr * d;
        }
        Ok(())
    }

    fn predict(&self, x: &[T]) -> Result<[T; 2]> {
        self.check(x)?;
        Ok(self.forward(x).probs)
    }

    fn reset(&mut self, seed: u64) {
        self.init(seed);
    }
}
