use serde::{Deserialize, Serialize};

use super::MathError;

/// Full-batch update rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OptimMethod {
    GradientDescent,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl OptimMethod {
    /// Adam with the usual 0.9 / 0.999 decay rates and epsilon 1e-8.
    pub fn adam() -> Self {
        OptimMethod::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Deterministic full-batch optimizer settings. The same
/// (config, seed, data) triple always yields a bit-identical trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct OptimizerConfig {
    pub method: OptimMethod,
    pub learning_rate: f64,
    pub steps: usize,
    #[serde(default)]
    pub weight_decay: f64,
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn adam(learning_rate: f64, steps: usize, seed: u64) -> Self {
        OptimizerConfig {
            method: OptimMethod::adam(),
            learning_rate,
            steps,
            weight_decay: 0.0,
            seed,
        }
    }

    pub fn gradient_descent(learning_rate: f64, steps: usize, seed: u64) -> Self {
        OptimizerConfig {
            method: OptimMethod::GradientDescent,
            learning_rate,
            steps,
            weight_decay: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), MathError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(MathError::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.steps == 0 {
            return Err(MathError::InvalidConfig("steps must be >= 1".into()));
        }
        if self.weight_decay < 0.0 {
            return Err(MathError::InvalidConfig(format!(
                "weight decay must be nonnegative, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

/// Result of an optimization run: final parameters and the loss recorded at
/// every step (before the update), so the trace has exactly `steps` entries.
#[derive(Debug, Clone)]
pub struct OptimRun {
    pub params: Vec<f64>,
    pub loss_trace: Vec<f64>,
}

/// Minimize `objective` starting from `init`.
///
/// `objective(step, params)` returns the loss and its gradient at `params`.
/// Weight decay adds `0.5 * wd * |p|^2` to the reported loss and `wd * p` to
/// the gradient. Divergence (non-finite loss or parameter) aborts with the
/// offending step index.
pub fn optimize<F>(
    mut objective: F,
    init: Vec<f64>,
    cfg: &OptimizerConfig,
) -> Result<OptimRun, MathError>
where
    F: FnMut(usize, &[f64]) -> (f64, Vec<f64>),
{
    cfg.validate()?;
    let n = init.len();
    let mut params = init;
    let mut trace = Vec::with_capacity(cfg.steps);
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    for step in 0..cfg.steps {
        let (raw_loss, mut grad) = objective(step, &params);
        assert_eq!(grad.len(), n, "gradient length mismatch");
        let mut loss = raw_loss;
        if cfg.weight_decay > 0.0 {
            let sq: f64 = params.iter().map(|p| p * p).sum();
            loss += 0.5 * cfg.weight_decay * sq;
            for (g, p) in grad.iter_mut().zip(&params) {
                *g += cfg.weight_decay * p;
            }
        }
        if !loss.is_finite() {
            return Err(MathError::Diverged { step });
        }
        trace.push(loss);
        match cfg.method {
            OptimMethod::GradientDescent => {
                for (p, g) in params.iter_mut().zip(&grad) {
                    *p -= cfg.learning_rate * g;
                }
            }
            OptimMethod::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                let t = (step + 1) as i32;
                let bc1 = 1.0 - beta1.powi(t);
                let bc2 = 1.0 - beta2.powi(t);
                for i in 0..n {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
                    let m_hat = m[i] / bc1;
                    let v_hat = v[i] / bc2;
                    params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + epsilon);
                }
            }
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(MathError::Diverged { step });
        }
    }
    Ok(OptimRun {
        params,
        loss_trace: trace,
    })
}
