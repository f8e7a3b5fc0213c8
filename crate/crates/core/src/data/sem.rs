use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, DatasetMeta};
use crate::math::Task;

/// Structural-equation regression generator. Each example draws a latent
/// causal block `v` with per-coordinate noise N(0, 25), a label block
/// `v + eps_y` with environment-specific `eps_y ~ N(0, sigma_e^2)`, and a
/// non-causal block `z = (v + eps_y) + eps_z` with `eps_z ~ N(0, 1)`.
/// Features are `[v, z]`; the scalar target is the sum of the label block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SemConfig {
    /// Half-dimension: `v` and `z` each have this many coordinates.
    pub dim: usize,
    /// One sigma_y per environment; at least two environments.
    pub env_noise_levels: Vec<f64>,
    pub samples_per_env: usize,
    pub seed: u64,
}

impl SemConfig {
    fn validate(&self) -> Result<(), DataError> {
        if self.dim == 0 {
            return Err(DataError::InvalidConfig("dim must be >= 1".into()));
        }
        if self.env_noise_levels.len() < 2 {
            return Err(DataError::InvalidConfig(
                "at least 2 environments are required".into(),
            ));
        }
        if self.samples_per_env == 0 {
            return Err(DataError::InvalidConfig(
                "samples-per-env must be >= 1".into(),
            ));
        }
        if self.env_noise_levels.iter().any(|s| *s < 0.0 || !s.is_finite()) {
            return Err(DataError::InvalidConfig(
                "environment noise levels must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

pub fn gen_sem_regression(cfg: &SemConfig) -> Result<Dataset, DataError> {
    gen_sem_regression_with_z_noise(cfg, 1.0)
}

/// Same generator with the `eps_z` scale exposed; forcing it to zero makes
/// the non-causal block reproduce the label block exactly.
pub fn gen_sem_regression_with_z_noise(
    cfg: &SemConfig,
    z_noise: f64,
) -> Result<Dataset, DataError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let causal = Normal::new(0.0, 5.0).expect("valid normal");
    let n_envs = cfg.env_noise_levels.len();
    let n = n_envs * cfg.samples_per_env;
    let d = cfg.dim;
    let mut x = Array2::zeros((n, 2 * d));
    let mut y = Array1::zeros(n);
    let mut env = Vec::with_capacity(n);
    let mut row = 0;
    for (e, &sigma_y) in cfg.env_noise_levels.iter().enumerate() {
        for _ in 0..cfg.samples_per_env {
            let mut target = 0.0;
            for j in 0..d {
                let v = causal.sample(&mut rng);
                let eps_y = if sigma_y > 0.0 {
                    Normal::new(0.0, sigma_y).expect("valid normal").sample(&mut rng)
                } else {
                    0.0
                };
                let eps_z = if z_noise > 0.0 {
                    Normal::new(0.0, z_noise).expect("valid normal").sample(&mut rng)
                } else {
                    0.0
                };
                let label_coord = v + eps_y;
                x[[row, j]] = v;
                x[[row, d + j]] = label_coord + eps_z;
                target += label_coord;
            }
            y[row] = target;
            env.push(e as u32);
            row += 1;
        }
    }
    let meta = DatasetMeta {
        name: "sem-regression".into(),
        params: serde_json::to_value(cfg).expect("serializable config"),
        color_feature: None,
    };
    Dataset::new(x, y, Some(env), None, Task::Regression, meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cfg() -> SemConfig {
        SemConfig {
            dim: 5,
            env_noise_levels: vec![0.2, 2.0],
            samples_per_env: 1000,
            seed: 0,
        }
    }

    #[test]
    fn causal_coordinate_variance_near_25() {
        let cfg = SemConfig {
            samples_per_env: 5000,
            ..base_cfg()
        };
        let d = gen_sem_regression(&cfg).unwrap();
        // Pool all 10,000 x 5 causal draws.
        let v = d.x.slice(ndarray::s![.., ..cfg.dim]);
        let mean = v.mean().unwrap();
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (v.len() as f64 - 1.0);
        assert!((var - 25.0).abs() <= 1.5, "variance {var}");
    }

    #[test]
    fn z_minus_label_block_has_unit_variance() {
        // With sigma_y = 0, z - v = eps_z exactly, so its variance is ~1.
        let cfg = SemConfig {
            env_noise_levels: vec![0.0, 0.0],
            samples_per_env: 5000,
            ..base_cfg()
        };
        let d = gen_sem_regression(&cfg).unwrap();
        let dim = cfg.dim;
        let mut sq = 0.0;
        let mut count = 0.0;
        for row in 0..d.len() {
            for j in 0..dim {
                let diff = d.x[[row, dim + j]] - d.x[[row, j]];
                sq += diff * diff;
                count += 1.0;
            }
        }
        let var = sq / count;
        assert!((var - 1.0).abs() <= 0.1, "variance {var}");
    }

    #[test]
    fn degenerate_noise_makes_z_equal_label_block() {
        let cfg = SemConfig {
            env_noise_levels: vec![0.0, 0.0],
            samples_per_env: 50,
            ..base_cfg()
        };
        let d = gen_sem_regression_with_z_noise(&cfg, 0.0).unwrap();
        let dim = cfg.dim;
        for row in 0..d.len() {
            let mut target = 0.0;
            for j in 0..dim {
                assert_eq!(d.x[[row, dim + j]], d.x[[row, j]]);
                target += d.x[[row, j]];
            }
            assert!((d.y[row] - target).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_under_fixed_seed() {
        let a = gen_sem_regression(&base_cfg()).unwrap();
        let b = gen_sem_regression(&base_cfg()).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.y, b.y);
    }

    #[test]
    fn single_env_rejected() {
        let cfg = SemConfig {
            env_noise_levels: vec![1.0],
            ..base_cfg()
        };
        assert!(matches!(
            gen_sem_regression(&cfg),
            Err(DataError::InvalidConfig(_))
        ));
    }
}
