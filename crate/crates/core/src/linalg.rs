//! Symmetric positive-definite matrices, their square roots, and sphere sampling.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest condition number accepted for an [`SpdMatrix`].
pub const MAX_CONDITION: f64 = 1e14;

const SYMMETRY_TOL: f64 = 1e-12;

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (m[(i, j)] - m[(j, i)]).abs() / m[(i, j)].abs().max(1.0);
            worst = worst.max(gap);
        }
    }
    worst
}

/// A symmetric positive-definite matrix together with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl SpdMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.ncols() });
        }
        let asym = max_asymmetry(&matrix);
        if !(asym <= SYMMETRY_TOL) {
            return Err(Error::NotSymmetric(asym));
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let min = eig.eigenvalues.min();
        let max = eig.eigenvalues.max();
        if !(min > 1e-14 * sym.trace()) {
            return Err(Error::NotPositiveDefinite(min));
        }
        let cond = max / min;
        if cond > MAX_CONDITION {
            return Err(Error::IllConditioned(cond));
        }
        Ok(Self { matrix: sym, values: eig.eigenvalues, vectors: eig.eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn lambda_max(&self) -> f64 {
        self.values.max()
    }

    pub fn lambda_min(&self) -> f64 {
        self.values.min()
    }

    pub fn condition_number(&self) -> f64 {
        self.lambda_max() / self.lambda_min()
    }

    fn spectral(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            self.vectors[(i, j)] * f(self.values[j])
        });
        let out = scaled * self.vectors.transpose();
        (&out + out.transpose()) * 0.5
    }

    pub fn sqrt(&self) -> DMatrix<f64> {
        self.spectral(f64::sqrt)
    }

    pub fn inv_sqrt(&self) -> DMatrix<f64> {
        self.spectral(|x| 1.0 / x.sqrt())
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.spectral(|x| 1.0 / x)
    }

    /// `vᵀ M v`.
    pub fn quad_form(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.matrix * v))
    }

    /// `vᵀ M⁻¹ v`, computed in the eigenbasis.
    pub fn inv_quad_form(&self, v: &DVector<f64>) -> f64 {
        let c = self.vectors.tr_mul(v);
        c.iter().zip(self.values.iter()).map(|(c, l)| c * c / l).sum()
    }

    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        self.quad_form(v).max(0.0).sqrt()
    }

    pub fn dual_norm(&self, v: &DVector<f64>) -> f64 {
        self.inv_quad_form(v).max(0.0).sqrt()
    }
}

/// Largest eigenvalue of a symmetric (not necessarily definite) matrix.
pub fn lambda_max_symmetric(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let asym = max_asymmetry(m);
    if !(asym <= SYMMETRY_TOL) {
        return Err(Error::NotSymmetric(asym));
    }
    let sym = (m + m.transpose()) * 0.5;
    Ok(sym.symmetric_eigenvalues().max())
}

/// A vector of Euclidean norm one.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(DVector<f64>);

impl UnitVector {
    pub fn new(v: DVector<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self(v / n))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

/// Draws a point uniformly from the unit sphere in the orthogonal complement of `v`.
pub fn sample_sphere_orthogonal<R: Rng + ?Sized>(v: &DVector<f64>, rng: &mut R) -> Result<UnitVector> {
    let n = v.len();
    if n < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: n });
    }
    let axis = UnitVector::new(v.clone())?.into_inner();
    loop {
        let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let proj = &g - &axis * axis.dot(&g);
        let norm = proj.norm();
        if norm > 1e-8 {
            let mut s = proj / norm;
            // one extra projection pass keeps the orthogonality residual at roundoff
            let drift = axis.dot(&s);
            s -= &axis * drift;
            return UnitVector::new(s);
        }
    }
}

/// Draws a point uniformly from the unit sphere in `R^n`.
pub fn sample_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitVector> {
    loop {
        let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        if g.norm() > 1e-8 {
            return UnitVector::new(g);
        }
    }
}
