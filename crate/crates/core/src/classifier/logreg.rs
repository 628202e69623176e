use serde::{Deserialize, Serialize};

use crate::classifier::{FeatureVector, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegConfig {
    /// L2 penalty on standardized weights (intercept excluded).
    pub l2: f64,
    pub max_iter: usize,
    /// Convergence threshold on the gradient norm.
    pub tol: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            l2: 1.0,
            max_iter: 5_000,
            tol: 1e-6,
        }
    }
}

/// Standardized design matrix with 0/1 targets (1 = fake).
#[derive(Debug, Clone)]
pub struct Design {
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl Design {
    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean negative log-likelihood plus `l2/2 * |w|^2` and its gradient.
/// `params[0]` is the intercept, `params[1..]` the weights.
pub fn logistic_objective(design: &Design, params: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let n = design.rows.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    for (row, &y) in design.rows.iter().zip(&design.targets) {
        let z = params[0] + row.iter().zip(&params[1..]).map(|(x, w)| x * w).sum::<f64>();
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        grad[0] += r;
        for (g, x) in grad[1..].iter_mut().zip(row) {
            *g += r * x;
        }
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    for (g, w) in grad[1..].iter_mut().zip(&params[1..]) {
        *g += l2 * w;
    }
    loss += 0.5 * l2 * params[1..].iter().map(|w| w * w).sum::<f64>();
    (loss, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub schema: Vec<String>,
    /// Intercept first, then one weight per feature, in standardized units.
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub l2: f64,
    pub iterations: usize,
    pub final_loss: f64,
    pub converged: bool,
}

impl TrainedClassifier {
    fn standardize(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    /// Probability that the document is fake.
    pub fn predict_proba(&self, features: &FeatureVector) -> f64 {
        let x = self.standardize(&features.values);
        sigmoid(self.weights[0] + x.iter().zip(&self.weights[1..]).map(|(a, b)| a * b).sum::<f64>())
    }

    /// exp(weight) per feature, per one unit of the raw (unstandardized)
    /// feature. Values above 1 favour the fake class.
    pub fn odds_ratios(&self) -> Vec<(String, f64)> {
        self.schema
            .iter()
            .zip(&self.weights[1..])
            .zip(&self.stds)
            .map(|((name, w), s)| (name.clone(), (w / s).exp()))
            .collect()
    }
}

pub fn odds_ratios(classifier: &TrainedClassifier) -> Vec<(String, f64)> {
    classifier.odds_ratios()
}

/// Full-batch gradient descent with Armijo backtracking from a zero start.
/// Features are standardized with training means and population standard
/// deviations (constant features keep a scale of 1).
pub fn train_logreg(examples: &[(FeatureVector, Label)], config: LogRegConfig) -> Result<TrainedClassifier> {
    if !config.l2.is_finite() || config.l2 < 0.0 {
        return Err(Error::param(format!("l2 must be finite and >= 0, got {}", config.l2)));
    }
    let Some((first, _)) = examples.first() else {
        return Err(Error::SingleClass);
    };
    let schema = first.schema.clone();
    let d = schema.len();
    for (i, (f, _)) in examples.iter().enumerate() {
        if f.values.len() != d {
            return Err(Error::param(format!(
                "example {i} has {} features, expected {d}",
                f.values.len()
            )));
        }
        if f.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
    }
    let fakes = examples.iter().filter(|(_, l)| *l == Label::Fake).count();
    if fakes == 0 || fakes == examples.len() {
        return Err(Error::SingleClass);
    }

    let n = examples.len() as f64;
    let mut means = vec![0.0; d];
    for (f, _) in examples {
        for (m, v) in means.iter_mut().zip(&f.values) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut stds = vec![0.0; d];
    for (f, _) in examples {
        for ((s, v), m) in stds.iter_mut().zip(&f.values).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut stds {
        *s = (*s / n).sqrt();
        if *s < 1e-12 {
            *s = 1.0;
        }
    }

    let design = Design {
        rows: examples
            .iter()
            .map(|(f, _)| {
                f.values
                    .iter()
                    .zip(means.iter().zip(&stds))
                    .map(|(x, (m, s))| (x - m) / s)
                    .collect()
            })
            .collect(),
        targets: examples
            .iter()
            .map(|(_, l)| if *l == Label::Fake { 1.0 } else { 0.0 })
            .collect(),
    };

    let mut params = vec![0.0; d + 1];
    let (mut loss, mut grad) = logistic_objective(&design, &params, config.l2);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut candidate = vec![0.0; d + 1];
    'descent: while iterations < config.max_iter {
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2.sqrt() < config.tol {
            break;
        }
        iterations += 1;
        // Let the step grow back after earlier backtracking.
        step *= 2.0;
        loop {
            for ((c, p), g) in candidate.iter_mut().zip(&params).zip(&grad) {
                *c = p - step * g;
            }
            let (new_loss, new_grad) = logistic_objective(&design, &candidate, config.l2);
            if new_loss <= loss - 1e-4 * step * gnorm2 {
                params.copy_from_slice(&candidate);
                loss = new_loss;
                grad = new_grad;
                break;
            }
            step *= 0.5;
            if step < 1e-20 {
                // Sufficient decrease is no longer representable.
                break 'descent;
            }
        }
    }
    let converged = grad.iter().map(|g| g * g).sum::<f64>().sqrt() < config.tol;

    Ok(TrainedClassifier {
        schema,
        weights: params,
        means,
        stds,
        l2: config.l2,
        iterations,
        final_loss: loss,
        converged,
    })
}
