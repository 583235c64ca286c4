use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{cosine_cost, cosine_cost_gradient, CosineTransform};
use crate::error::Result;

/// Largest absolute difference between `grad(point)` and the central
/// difference `(f(p + h e_ij) - f(p - h e_ij)) / 2h` over all entries.
pub fn finite_diff_check<F, G>(f: F, grad: G, point: &DMatrix<f64>, step: f64) -> f64
where
    F: Fn(&DMatrix<f64>) -> f64,
    G: Fn(&DMatrix<f64>) -> DMatrix<f64>,
{
    assert!(step > 0.0, "finite difference step must be positive");
    let analytic = grad(point);
    let mut probe = point.clone();
    let mut worst: f64 = 0.0;
    for i in 0..point.nrows() {
        for j in 0..point.ncols() {
            let orig = probe[(i, j)];
            probe[(i, j)] = orig + step;
            let up = f(&probe);
            probe[(i, j)] = orig - step;
            let down = f(&probe);
            probe[(i, j)] = orig;
            let numeric = (up - down) / (2.0 * step);
            worst = worst.max((numeric - analytic[(i, j)]).abs());
        }
    }
    worst
}

/// Worst finite-difference deviation of the cosine cost gradient over
/// `trials` draws of a transform, `x` and `y` with entries uniform in
/// `[-1, 1]`.
pub fn cosine_gradcheck(trials: usize, dim: usize, seed: u64, step: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let omega = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..=1.0));
        let x = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0));
        let y = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0));
        let at = |m: &DMatrix<f64>| CosineTransform { omega: m.clone() };
        // a draw with a vanishing image has no gradient to check
        cosine_cost_gradient(&at(&omega), &x, &y)?;
        let err = finite_diff_check(
            |m| cosine_cost(&at(m), &x, &y).unwrap_or(f64::NAN),
            |m| cosine_cost_gradient(&at(m), &x, &y).expect("checked above"),
            &omega,
            step,
        );
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_function() {
        let p = DMatrix::from_element(3, 2, 0.7);
        let err = finite_diff_check(|_| 4.2, |m| DMatrix::zeros(m.nrows(), m.ncols()), &p, 1e-5);
        assert!(err < 1e-12);
    }

    #[test]
    fn linear_function_is_exact() {
        let g = DMatrix::from_row_slice(2, 2, &[1.5, -2.0, 0.25, 3.0]);
        let p = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, -0.3, 0.4]);
        let err = finite_diff_check(|m| m.component_mul(&g).sum(), |_| g.clone(), &p, 1e-5);
        assert!(err <= 1e-10, "err {err}");
    }

    #[test]
    fn cosine_draws_pass() {
        let err = cosine_gradcheck(20, 4, 11, 1e-5).unwrap();
        assert!(err < 1e-6, "{err}");
    }
}
