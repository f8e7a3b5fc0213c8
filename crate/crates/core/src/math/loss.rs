use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::MathError;

/// Per-example loss family. Squared error is used for regression targets,
/// binary cross-entropy over logits for classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    SquaredError,
    BceWithLogits,
}

/// Numerically stable sigmoid.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Stable BCE over a logit: max(z, 0) - z*y + ln(1 + exp(-|z|)).
///
/// Stays finite for any logit magnitude; no exp overflow on either branch.
fn bce_with_logits(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

fn check_bce_labels(y: &Array1<f64>) -> Result<(), MathError> {
    for (index, &value) in y.iter().enumerate() {
        if value != 0.0 && value != 1.0 {
            return Err(MathError::InvalidLabel { value, index });
        }
    }
    Ok(())
}

/// Elementwise loss vector for a batch of model outputs.
pub fn per_example_loss(
    kind: LossKind,
    outputs: &Array1<f64>,
    y: &Array1<f64>,
) -> Result<Array1<f64>, MathError> {
    if outputs.len() != y.len() {
        return Err(MathError::LengthMismatch {
            outputs: outputs.len(),
            labels: y.len(),
        });
    }
    match kind {
        LossKind::SquaredError => Ok(ndarray::Zip::from(outputs)
            .and(y)
            .map_collect(|&o, &t| (o - t) * (o - t))),
        LossKind::BceWithLogits => {
            check_bce_labels(y)?;
            Ok(ndarray::Zip::from(outputs)
                .and(y)
                .map_collect(|&z, &t| bce_with_logits(z, t)))
        }
    }
}

/// Derivative of each per-example loss w.r.t. the model output.
///
/// SquaredError: 2(o - y). BceWithLogits: sigmoid(z) - y.
pub fn dloss_doutput(
    kind: LossKind,
    outputs: &Array1<f64>,
    y: &Array1<f64>,
) -> Result<Array1<f64>, MathError> {
    if outputs.len() != y.len() {
        return Err(MathError::LengthMismatch {
            outputs: outputs.len(),
            labels: y.len(),
        });
    }
    match kind {
        LossKind::SquaredError => Ok(ndarray::Zip::from(outputs)
            .and(y)
            .map_collect(|&o, &t| 2.0 * (o - t))),
        LossKind::BceWithLogits => {
            check_bce_labels(y)?;
            Ok(ndarray::Zip::from(outputs)
                .and(y)
                .map_collect(|&z, &t| sigmoid(z) - t))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn bce_symmetric_logit_is_ln2() {
        let l = per_example_loss(LossKind::BceWithLogits, &array![0.0], &array![1.0]).unwrap();
        assert_relative_eq!(l[0], std::f64::consts::LN_2, max_relative = 1e-15);
    }

    #[test]
    fn squared_error_exact_fit_is_zero() {
        let l = per_example_loss(LossKind::SquaredError, &array![3.0], &array![3.0]).unwrap();
        assert_eq!(l[0], 0.0);
    }

    #[test]
    fn bce_extreme_logit_matches_high_precision_value() {
        // ln(1 + e^100) evaluated in extended precision: e^-100 is far below
        // f64 epsilon, so the stable form must return 100 + e^-100 ~= 100.
        let l = per_example_loss(LossKind::BceWithLogits, &array![100.0], &array![0.0]).unwrap();
        assert_relative_eq!(l[0], 100.0, max_relative = 1e-15);
        let l = per_example_loss(LossKind::BceWithLogits, &array![100.0], &array![1.0]).unwrap();
        // ln(1 + e^-100) = e^-100 to first order.
        assert_relative_eq!(l[0], (-100.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn bce_finite_for_huge_logits() {
        for &z in &[-1e6, -1e3, 0.0, 1e3, 1e6] {
            for &y in &[0.0, 1.0] {
                let l =
                    per_example_loss(LossKind::BceWithLogits, &array![z], &array![y]).unwrap();
                assert!(l[0].is_finite(), "loss not finite at z={z} y={y}");
                assert!(l[0] >= 0.0);
            }
        }
    }

    #[test]
    fn bce_rejects_non_binary_labels() {
        let err = per_example_loss(LossKind::BceWithLogits, &array![0.0], &array![0.5]);
        assert!(matches!(err, Err(MathError::InvalidLabel { .. })));
    }
}
