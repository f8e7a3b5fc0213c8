use super::MathError;

const DEFAULT_STEP: f64 = 1e-5;

/// Central-difference gradient of a scalar objective at `point`.
pub fn central_difference_gradient<F>(objective: F, point: &[f64], step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut perturbed = point.to_vec();
    let mut grad = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        perturbed[i] = point[i] + step;
        let plus = objective(&perturbed);
        perturbed[i] = point[i] - step;
        let minus = objective(&perturbed);
        perturbed[i] = point[i];
        grad.push((plus - minus) / (2.0 * step));
    }
    grad
}

/// Compare an analytic gradient against central finite differences
/// (h = 1e-5) and return the max over coordinates of
/// `|analytic - numeric| / max(1, |analytic|)`.
pub fn finite_diff_check<F>(
    objective: F,
    analytic: &[f64],
    point: &[f64],
) -> Result<f64, MathError>
where
    F: Fn(&[f64]) -> f64,
{
    assert_eq!(analytic.len(), point.len(), "gradient/point length");
    if !objective(point).is_finite() {
        return Err(MathError::NonFiniteObjective);
    }
    let numeric = central_difference_gradient(&objective, point, DEFAULT_STEP);
    if numeric.iter().any(|g| !g.is_finite()) {
        return Err(MathError::NonFiniteObjective);
    }
    let mut worst = 0.0f64;
    for (a, n) in analytic.iter().zip(&numeric) {
        let rel = (a - n).abs() / a.abs().max(1.0);
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_exact_up_to_roundoff() {
        let f = |p: &[f64]| 0.5 * p.iter().map(|x| x * x).sum::<f64>();
        let point = [1.0, 2.0];
        let analytic = point.to_vec();
        let err = finite_diff_check(f, &analytic, &point).unwrap();
        assert!(err <= 1e-8, "relative error {err}");
    }

    #[test]
    fn non_finite_objective_is_diagnosed() {
        let f = |p: &[f64]| 1.0 / (p[0] - 1.0);
        let res = finite_diff_check(f, &[0.0], &[1.0]);
        assert!(matches!(res, Err(MathError::NonFiniteObjective)));
    }

    #[test]
    fn detects_a_wrong_gradient() {
        let f = |p: &[f64]| p[0] * p[0];
        let err = finite_diff_check(f, &[5.0], &[2.0]).unwrap();
        assert!(err > 1e-2);
    }
}
