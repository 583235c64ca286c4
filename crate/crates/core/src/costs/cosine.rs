use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Linear map applied to both vectors before taking their cosine.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineTransform {
    pub omega: DMatrix<f64>,
}

impl CosineTransform {
    pub fn new(omega: DMatrix<f64>) -> Result<Self> {
        if !omega.is_square() {
            return Err(Error::Dimension(format!(
                "transform must be square, got {}x{}",
                omega.nrows(),
                omega.ncols()
            )));
        }
        Ok(CosineTransform { omega })
    }

    pub fn identity(dim: usize) -> Self {
        CosineTransform {
            omega: DMatrix::identity(dim, dim),
        }
    }

    fn images(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<Images> {
        let v = self.omega.ncols();
        if x.len() != v || y.len() != v {
            return Err(Error::Dimension(format!(
                "vectors must have length {v}, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        let ox = &self.omega * x;
        let oy = &self.omega * y;
        let (nx, ny) = (ox.norm(), oy.norm());
        if nx == 0.0 || ny == 0.0 {
            return Err(Error::ZeroImage);
        }
        let s = (ox.dot(&oy) / (nx * ny)).clamp(-1.0, 1.0);
        Ok(Images { ox, oy, nx, ny, s })
    }
}

struct Images {
    ox: DVector<f64>,
    oy: DVector<f64>,
    nx: f64,
    ny: f64,
    s: f64,
}

/// `(1 - s) / 2` where `s` is the cosine between `omega x` and `omega y`.
pub fn cosine_cost(t: &CosineTransform, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    let im = t.images(x, y)?;
    Ok(0.5 * (1.0 - im.s))
}

/// Gradient of [`cosine_cost`] with respect to the transform matrix.
pub fn cosine_cost_gradient(
    t: &CosineTransform,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let Images { ox, oy, nx, ny, s } = t.images(x, y)?;
    let cross = &ox * y.transpose() + &oy * x.transpose();
    let own = &ox * x.transpose() * (ny / nx) + &oy * y.transpose() * (nx / ny);
    Ok(-(cross - own * s) / (2.0 * nx * ny))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::finite_diff_check;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn identity_transform_values() {
        let id = CosineTransform::identity(3);
        let x = v(&[1.0, 2.0, 0.5]);
        assert!(cosine_cost(&id, &x, &x).unwrap().abs() < 1e-15);
        let y = v(&[-2.0, 1.0, 0.0]);
        assert!((cosine_cost(&id, &x, &y).unwrap() - 0.5).abs() < 1e-15);
        assert!((cosine_cost(&id, &x, &(-&x)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_image_is_an_error() {
        let mut omega = DMatrix::identity(2, 2);
        omega[(1, 1)] = 0.0;
        let t = CosineTransform::new(omega).unwrap();
        let x = v(&[0.0, 1.0]);
        let y = v(&[1.0, 1.0]);
        assert!(matches!(cosine_cost(&t, &x, &y), Err(Error::ZeroImage)));
        assert!(matches!(cosine_cost_gradient(&t, &x, &y), Err(Error::ZeroImage)));
    }

    #[test]
    fn gradient_vanishes_for_identical_vectors() {
        let t = CosineTransform::new(DMatrix::from_row_slice(
            2,
            2,
            &[1.0, 0.3, -0.2, 0.8],
        ))
        .unwrap();
        let x = v(&[0.4, -1.1]);
        let g = cosine_cost_gradient(&t, &x, &x).unwrap();
        assert!(g.amax() < 1e-15);
    }

    #[test]
    fn gradient_is_scale_invariant_in_x() {
        let t = CosineTransform::new(DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.3, -0.2, 0.1, 0.8, 0.5, -0.4, 0.2, 1.1],
        ))
        .unwrap();
        let x = v(&[0.4, -1.1, 0.3]);
        let y = v(&[1.0, 0.2, -0.7]);
        let g = cosine_cost_gradient(&t, &x, &y).unwrap();
        let g2 = cosine_cost_gradient(&t, &(&x * 3.7), &y).unwrap();
        assert!((g - g2).amax() < 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let omega = DMatrix::from_row_slice(
            3,
            3,
            &[0.9, 0.3, -0.2, 0.1, 0.8, 0.5, -0.4, 0.2, 1.1],
        );
        let x = v(&[0.4, -1.1, 0.3]);
        let y = v(&[1.0, 0.2, -0.7]);
        let f = |o: &DMatrix<f64>| cosine_cost(&CosineTransform::new(o.clone()).unwrap(), &x, &y).unwrap();
        let g = |o: &DMatrix<f64>| {
            cosine_cost_gradient(&CosineTransform::new(o.clone()).unwrap(), &x, &y).unwrap()
        };
        assert!(finite_diff_check(f, g, &omega, 1e-5) < 1e-6);
    }
}
