//! Minimal fully-connected function approximator: two rectified-linear
//! hidden layers, linear output, trained by mini-batch stochastic gradient
//! descent with exact analytic gradients. No external ML dependency.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// A transition used for training: input state, the index of the output
/// whose value is regressed, and its regression target.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample {
    pub input: DVector<f64>,
    pub output_index: usize,
    pub target: f64,
}

/// Feed-forward network `input -> h1 (relu) -> h2 (relu) -> output (linear)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl Mlp {
    /// Xavier-uniform initialization.
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Self {
        assert!(sizes.len() >= 2, "need at least an input and output layer");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(DMatrix::from_fn(fan_out, fan_in, |_, _| {
                rng.gen_range(-bound..=bound)
            }));
            biases.push(DVector::zeros(fan_out));
        }
        Self { weights, biases }
    }

    /// All-zero parameters; the output is identically zero, which makes
    /// greedy action selection fully deterministic.
    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2);
        let weights = sizes
            .windows(2)
            .map(|p| DMatrix::zeros(p[1], p[0]))
            .collect();
        let biases = sizes.windows(2).map(|p| DVector::zeros(p[1])).collect();
        Self { weights, biases }
    }

    pub fn output_len(&self) -> usize {
        self.weights.last().map(|w| w.nrows()).unwrap_or(0)
    }

    /// Forward pass returning every layer's post-activation output,
    /// `acts[0]` being the input itself.
    fn forward_cached(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        let last = self.weights.len() - 1;
        let mut acts = vec![x.clone()];
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w * acts.last().unwrap() + b;
            if l < last {
                z.apply(|v| *v = v.max(0.0));
            }
            acts.push(z);
        }
        acts
    }

    pub fn forward(&self, x: &DVector<f64>) -> DVector<f64> {
        self.forward_cached(x).pop().unwrap()
    }

    /// Mean squared error of the selected outputs over a batch, without
    /// touching the parameters.
    pub fn batch_loss(&self, batch: &[TrainSample]) -> f64 {
        assert!(!batch.is_empty());
        batch
            .iter()
            .map(|s| {
                let q = self.forward(&s.input)[s.output_index];
                (s.target - q).powi(2)
            })
            .sum::<f64>()
            / batch.len() as f64
    }

    /// One mini-batch gradient step on the squared error of the selected
    /// outputs; returns the pre-update loss.
    pub fn sgd_step(&mut self, batch: &[TrainSample], lr: f64) -> f64 {
        assert!(!batch.is_empty());
        let depth = self.weights.len();
        let mut grad_w: Vec<DMatrix<f64>> = self
            .weights
            .iter()
            .map(|w| DMatrix::zeros(w.nrows(), w.ncols()))
            .collect();
        let mut grad_b: Vec<DVector<f64>> =
            self.biases.iter().map(|b| DVector::zeros(b.len())).collect();
        let mut loss = 0.0;

        for sample in batch {
            let acts = self.forward_cached(&sample.input);
            let q = acts[depth][sample.output_index];
            let err = q - sample.target;
            loss += err * err;
            // d(loss)/d(output): only the taken output carries error
            let mut delta = DVector::zeros(self.output_len());
            delta[sample.output_index] = 2.0 * err;
            for l in (0..depth).rev() {
                grad_w[l] += &delta * acts[l].transpose();
                grad_b[l] += &delta;
                if l > 0 {
                    let mut back = self.weights[l].transpose() * &delta;
                    // relu gate: gradient flows only where the unit fired
                    for (i, v) in back.iter_mut().enumerate() {
                        if acts[l][i] <= 0.0 {
                            *v = 0.0;
                        }
                    }
                    delta = back;
                }
            }
        }

        let scale = lr / batch.len() as f64;
        for l in 0..depth {
            self.weights[l] -= scale * &grad_w[l];
            self.biases[l] -= scale * &grad_b[l];
        }
        loss / batch.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample(input: &[f64], idx: usize, target: f64) -> TrainSample {
        TrainSample {
            input: DVector::from_row_slice(input),
            output_index: idx,
            target,
        }
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&[9, 64, 64, 18]);
        let out = net.forward(&DVector::from_element(9, 0.5));
        assert_eq!(out.len(), 18);
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn perfect_predictions_give_zero_loss_and_no_update() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = Mlp::new(&[3, 8, 8, 4], &mut rng);
        let input = DVector::from_row_slice(&[0.2, -0.4, 0.9]);
        let q = net.forward(&input);
        let batch: Vec<TrainSample> = (0..4)
            .map(|i| TrainSample {
                input: input.clone(),
                output_index: i,
                target: q[i],
            })
            .collect();
        let before = net.clone();
        let loss = net.sgd_step(&batch, 0.1);
        assert_relative_eq!(loss, 0.0, epsilon = 1e-24);
        assert_eq!(net, before);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sizes = [4, 6, 5, 3];
        let net = Mlp::new(&sizes, &mut rng);
        let batch = vec![sample(&[0.3, -0.7, 0.5, 0.1], 1, 0.8)];

        // recover the analytic gradient from a tiny SGD step
        let lr = 1.0;
        let mut stepped = net.clone();
        stepped.sgd_step(&batch, lr);

        let h = 1e-6;
        for l in 0..net.weights.len() {
            for idx in 0..net.weights[l].len() {
                let mut plus = net.clone();
                plus.weights[l][idx] += h;
                let mut minus = net.clone();
                minus.weights[l][idx] -= h;
                let fd = (plus.batch_loss(&batch) - minus.batch_loss(&batch)) / (2.0 * h);
                let analytic = (net.weights[l][idx] - stepped.weights[l][idx]) / lr;
                if fd.abs() > 1e-10 || analytic.abs() > 1e-10 {
                    assert_relative_eq!(analytic, fd, max_relative = 1e-5, epsilon = 1e-9);
                }
            }
            for idx in 0..net.biases[l].len() {
                let mut plus = net.clone();
                plus.biases[l][idx] += h;
                let mut minus = net.clone();
                minus.biases[l][idx] -= h;
                let fd = (plus.batch_loss(&batch) - minus.batch_loss(&batch)) / (2.0 * h);
                let analytic = (net.biases[l][idx] - stepped.biases[l][idx]) / lr;
                if fd.abs() > 1e-10 || analytic.abs() > 1e-10 {
                    assert_relative_eq!(analytic, fd, max_relative = 1e-5, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn loss_decreases_on_fixed_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut net = Mlp::new(&[9, 64, 64, 18], &mut rng);
        let batch = vec![
            sample(&[0.1; 9], 0, 1.0),
            sample(&[0.5; 9], 7, -0.5),
            sample(&[0.9; 9], 17, 0.25),
        ];
        // at a small step size every update must lower the loss
        let mut prev = net.batch_loss(&batch);
        for _ in 0..500 {
            let loss = net.sgd_step(&batch, 1e-4);
            assert!(loss <= prev + 1e-12, "loss rose: {loss} > {prev}");
            prev = loss;
        }
        // a realistic step size then drives it near zero
        for _ in 0..2000 {
            net.sgd_step(&batch, 1e-2);
        }
        assert!(net.batch_loss(&batch) < 1e-3);
    }
}
