//! Normal barrier on the conic hull of a body, lifted by one coordinate.

use nalgebra::{DMatrix, DVector};

use crate::barrier::{Barrier, SmoothConvex};
use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;

/// Multiplier applied to the base barrier before lifting.
pub const LIFT_SCALE: f64 = 400.0;

/// `Psi(w, b) = 400 (psi(w / b) - 2 nu ln b)` on `{ (w, b) : b > 0, w / b in body }`.
#[derive(Debug, Clone)]
pub struct NormalBarrier {
    base: Barrier,
}

impl NormalBarrier {
    pub fn new(base: Barrier) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &Barrier {
        &self.base
    }

    /// Ambient dimension `d + 1`.
    pub fn lifted_dim(&self) -> usize {
        self.base.body().dim() + 1
    }

    /// Barrier parameter of the lifted function, `800 nu`.
    pub fn theta(&self) -> f64 {
        2.0 * LIFT_SCALE * self.base.nu()
    }

    fn split(&self, z: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        let n = self.lifted_dim();
        if z.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: z.len() });
        }
        let b = z[n - 1];
        if !(b > 0.0) {
            return Err(Error::NotInterior);
        }
        let y = z.rows(0, n - 1).into_owned() / b;
        if self.base.value(&y).is_none() {
            return Err(Error::NotInterior);
        }
        Ok((y, b))
    }

    pub fn value_at(&self, z: &DVector<f64>) -> Result<f64> {
        let (y, b) = self.split(z)?;
        let psi = self.base.value(&y).ok_or(Error::NotInterior)?;
        Ok(LIFT_SCALE * (psi - 2.0 * self.base.nu() * b.ln()))
    }

    pub fn gradient_at(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let (y, b) = self.split(z)?;
        let g = self.base.gradient(&y);
        let d = y.len();
        let mut out = DVector::zeros(d + 1);
        out.rows_mut(0, d).copy_from(&(&g * (LIFT_SCALE / b)));
        out[d] = LIFT_SCALE * (-g.dot(&y) - 2.0 * self.base.nu()) / b;
        Ok(out)
    }

    pub fn hessian_raw(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (y, b) = self.split(z)?;
        let g = self.base.gradient(&y);
        let h = self.base.hessian(&y);
        let d = y.len();
        let hy = &h * &y;
        let s = LIFT_SCALE / (b * b);
        let mut out = DMatrix::zeros(d + 1, d + 1);
        out.view_mut((0, 0), (d, d)).copy_from(&(&h * s));
        let cross = (&hy + &g) * (-s);
        out.view_mut((0, d), (d, 1)).copy_from(&cross);
        out.view_mut((d, 0), (1, d)).copy_from(&cross.transpose());
        out[(d, d)] = s * (y.dot(&hy) + 2.0 * g.dot(&y) + 2.0 * self.base.nu());
        Ok(out)
    }

    pub fn hessian_at(&self, z: &DVector<f64>) -> Result<SpdMatrix> {
        SpdMatrix::new(self.hessian_raw(z)?)
    }

    /// Lifts `w` to `(w, 1)`.
    pub fn lift(w: &DVector<f64>) -> DVector<f64> {
        let d = w.len();
        DVector::from_fn(d + 1, |i, _| if i < d { w[i] } else { 1.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::{make_barrier, Ball, ConvexBody};
    use approx::assert_relative_eq;

    #[test]
    fn homogeneity_on_unit_disc() {
        let nb = NormalBarrier::new(make_barrier(ConvexBody::Ball(Ball::unit(2))));
        let z = DVector::from_vec(vec![0.3, -0.2, 1.0]);
        let t = 2.5;
        let lhs = nb.value_at(&(&z * t)).unwrap();
        let rhs = nb.value_at(&z).unwrap() - nb.theta() * t.ln();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        let h = nb.hessian_raw(&z).unwrap();
        assert_relative_eq!(z.dot(&(&h * &z)), nb.theta(), max_relative = 1e-10);
        let g = nb.gradient_at(&z).unwrap();
        assert!((&h * &z + &g).amax() < 1e-9 * g.amax());
    }

    #[test]
    fn rejects_nonpositive_lift() {
        let nb = NormalBarrier::new(make_barrier(ConvexBody::Ball(Ball::unit(2))));
        assert!(nb.value_at(&DVector::from_vec(vec![0.0, 0.0, -1.0])).is_err());
        assert!(nb.value_at(&DVector::from_vec(vec![2.0, 0.0, 1.0])).is_err());
    }
}
