//! Convex bodies and their self-concordant barriers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;

const INTERIOR_TOL: f64 = 1e-12;
const DIKIN_TOL: f64 = 1e-9;

/// A function that is finite and smooth on an open convex domain.
pub trait SmoothConvex {
    fn dim(&self) -> usize;
    /// `None` when `x` lies outside the domain.
    fn value(&self, x: &DVector<f64>) -> Option<f64>;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

/// `{ w : A w <= b }` with a known strictly interior point.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    a: DMatrix<f64>,
    b: DVector<f64>,
    interior: DVector<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PolytopeFile {
    #[serde(alias = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    interior: Vec<f64>,
}

impl Polytope {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, interior: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.len() });
        }
        if a.ncols() != interior.len() {
            return Err(Error::DimensionMismatch { expected: a.ncols(), got: interior.len() });
        }
        if a.nrows() <= a.ncols() {
            return Err(Error::InvalidBody(format!(
                "{} facets cannot bound a body in dimension {}",
                a.nrows(),
                a.ncols()
            )));
        }
        let gram = a.transpose() * &a;
        if gram.symmetric_eigenvalues().min() <= 1e-12 * gram.amax() {
            return Err(Error::InvalidBody("constraint matrix lacks full column rank".into()));
        }
        let p = Self { a, b, interior };
        if !p.strictly_contains(&p.interior) {
            return Err(Error::InvalidBody("declared interior point is not strictly inside".into()));
        }
        Ok(p)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: PolytopeFile = serde_json::from_str(text)?;
        let m = f.a.len();
        let d = f.interior.len();
        if f.a.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidBody("ragged constraint matrix".into()));
        }
        let a = DMatrix::from_fn(m, d, |i, j| f.a[i][j]);
        Self::new(a, DVector::from_vec(f.b), DVector::from_vec(f.interior))
    }

    pub fn to_json(&self) -> String {
        let f = PolytopeFile {
            a: (0..self.a.nrows()).map(|i| self.a.row(i).iter().copied().collect()).collect(),
            b: self.b.iter().copied().collect(),
            interior: self.interior.iter().copied().collect(),
        };
        serde_json::to_string_pretty(&f).expect("plain data serializes")
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn interior(&self) -> &DVector<f64> {
        &self.interior
    }

    pub fn slacks(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.b - &self.a * w
    }

    fn strictly_contains(&self, w: &DVector<f64>) -> bool {
        let s = self.slacks(w);
        s.iter().zip(self.b.iter()).all(|(s, b)| *s >= INTERIOR_TOL * (1.0 + b.abs()))
    }

    /// All vertices, by enumerating every choice of `d` active facets.
    pub fn vertices(&self) -> Vec<DVector<f64>> {
        let (m, d) = self.a.shape();
        let mut out: Vec<DVector<f64>> = Vec::new();
        let mut idx: Vec<usize> = (0..d).collect();
        loop {
            let sub = DMatrix::from_fn(d, d, |i, j| self.a[(idx[i], j)]);
            let rhs = DVector::from_fn(d, |i, _| self.b[idx[i]]);
            if let Some(x) = sub.lu().solve(&rhs) {
                let ok = self.slacks(&x).iter().zip(self.b.iter()).all(|(s, b)| *s >= -1e-9 * (1.0 + b.abs()));
                if ok && x.iter().all(|v| v.is_finite()) && !out.iter().any(|v| (v - &x).amax() < 1e-9) {
                    out.push(x);
                }
            }
            // next combination
            let mut k = d;
            while k > 0 && idx[k - 1] == m - d + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            idx[k - 1] += 1;
            for j in k..d {
                idx[j] = idx[j - 1] + 1;
            }
        }
        out
    }
}

/// Euclidean ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: DVector<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: DVector<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidBody(format!("radius {radius} must be positive")));
        }
        if center.is_empty() {
            return Err(Error::InvalidBody("ball needs dimension at least one".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn unit(d: usize) -> Self {
        Self { center: DVector::zeros(d), radius: 1.0 }
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn slack(&self, w: &DVector<f64>) -> f64 {
        self.radius * self.radius - (w - &self.center).norm_squared()
    }
}

/// `{ w in simplex : w_i >= floor }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSimplex {
    dim: usize,
    floor: f64,
}

impl TruncatedSimplex {
    pub fn new(dim: usize, floor: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidBody("simplex needs at least two coordinates".into()));
        }
        if !(floor >= 0.0) || floor * dim as f64 >= 1.0 {
            return Err(Error::InvalidBody(format!("floor {floor} leaves no interior in dimension {dim}")));
        }
        Ok(Self { dim, floor })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    Polytope(Polytope),
    Ball(Ball),
    TruncatedSimplex(TruncatedSimplex),
}

impl ConvexBody {
    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Polytope(p) => p.a.ncols(),
            ConvexBody::Ball(b) => b.center.len(),
            ConvexBody::TruncatedSimplex(s) => s.dim,
        }
    }

    fn check_dim(&self, w: &DVector<f64>) -> Result<()> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: w.len() });
        }
        Ok(())
    }

    /// Strict interior with a relative margin of `1e-12`.
    pub fn is_interior(&self, w: &DVector<f64>) -> bool {
        if w.len() != self.dim() || w.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            ConvexBody::Polytope(p) => p.strictly_contains(w),
            ConvexBody::Ball(b) => b.slack(w) >= INTERIOR_TOL * b.radius * b.radius,
            ConvexBody::TruncatedSimplex(s) => {
                (w.sum() - 1.0).abs() <= 1e-9 && w.iter().all(|v| *v - s.floor >= INTERIOR_TOL)
            }
        }
    }

    /// Closed membership with absolute tolerance `tol`.
    pub fn contains(&self, w: &DVector<f64>, tol: f64) -> bool {
        if w.len() != self.dim() {
            return false;
        }
        match self {
            ConvexBody::Polytope(p) => p.slacks(w).iter().all(|s| *s >= -tol),
            ConvexBody::Ball(b) => (w - &b.center).norm() <= b.radius + tol,
            ConvexBody::TruncatedSimplex(s) => {
                (w.sum() - 1.0).abs() <= tol.max(1e-12) && w.iter().all(|v| *v >= s.floor - tol)
            }
        }
    }

    /// A canonical interior point: the declared point, the center, or the uniform vector.
    pub fn reference_point(&self) -> DVector<f64> {
        match self {
            ConvexBody::Polytope(p) => p.interior.clone(),
            ConvexBody::Ball(b) => b.center.clone(),
            ConvexBody::TruncatedSimplex(s) => DVector::from_element(s.dim, 1.0 / s.dim as f64),
        }
    }

    /// Gauge of `u - pole` scaled so the boundary sits at one.
    pub fn minkowski(&self, pole: &DVector<f64>, u: &DVector<f64>) -> Result<f64> {
        self.check_dim(pole)?;
        self.check_dim(u)?;
        if !self.is_interior(pole) {
            return Err(Error::NotInterior);
        }
        let g = match self {
            ConvexBody::Polytope(p) => {
                let v = u - pole;
                let av = &p.a * &v;
                let s = p.slacks(pole);
                av.iter().zip(s.iter()).map(|(n, d)| n / d).fold(0.0_f64, f64::max)
            }
            ConvexBody::Ball(b) => {
                let q = pole - &b.center;
                let v = u - pole;
                let vv = v.norm_squared();
                if vv == 0.0 {
                    0.0
                } else {
                    // |q + v s|^2 = r^2 with s = 1/t
                    let qv = q.dot(&v);
                    let c = q.norm_squared() - b.radius * b.radius;
                    let disc = (qv * qv - vv * c).max(0.0).sqrt();
                    let s = (-qv + disc) / vv;
                    1.0 / s
                }
            }
            ConvexBody::TruncatedSimplex(s) => {
                if (u.sum() - 1.0).abs() > 1e-9 {
                    return Err(Error::OutsideBody(f64::INFINITY));
                }
                u.iter()
                    .zip(pole.iter())
                    .map(|(u, p)| (p - u) / (p - s.floor))
                    .fold(0.0_f64, f64::max)
            }
        };
        if g > 1.0 + 1e-9 {
            return Err(Error::OutsideBody(g));
        }
        Ok(g)
    }

    /// The homothetic copy `pole + factor (body - pole)`.
    pub fn shrink(&self, pole: &DVector<f64>, factor: f64) -> Result<ConvexBody> {
        self.check_dim(pole)?;
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(Error::InvalidParameter(format!("shrink factor {factor} outside (0, 1]")));
        }
        if !self.is_interior(pole) {
            return Err(Error::NotInterior);
        }
        Ok(match self {
            ConvexBody::Polytope(p) => {
                let ap = &p.a * pole;
                let b = &ap + (&p.b - &ap) * factor;
                ConvexBody::Polytope(Polytope { a: p.a.clone(), b, interior: pole.clone() })
            }
            ConvexBody::Ball(b) => ConvexBody::Ball(Ball {
                center: pole + (&b.center - pole) * factor,
                radius: b.radius * factor,
            }),
            ConvexBody::TruncatedSimplex(s) => {
                let first = pole[0];
                if pole.iter().any(|p| (p - first).abs() > 1e-12) {
                    return Err(Error::InvalidParameter(
                        "a truncated simplex shrinks only around the uniform point".into(),
                    ));
                }
                ConvexBody::TruncatedSimplex(TruncatedSimplex {
                    dim: s.dim,
                    floor: first + factor * (s.floor - first),
                })
            }
        })
    }

    /// Minimizes `<w, l>` over the closed body; returns the value and a minimizer.
    pub fn minimize_linear(&self, l: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        self.check_dim(l)?;
        Ok(match self {
            ConvexBody::Ball(b) => {
                let n = l.norm();
                let w = if n > 0.0 { &b.center - l * (b.radius / n) } else { b.center.clone() };
                (l.dot(&w), w)
            }
            ConvexBody::Polytope(p) => {
                let verts = p.vertices();
                let best = verts
                    .into_iter()
                    .min_by(|x, y| l.dot(x).total_cmp(&l.dot(y)))
                    .ok_or_else(|| Error::InvalidBody("polytope has no vertices".into()))?;
                (l.dot(&best), best)
            }
            ConvexBody::TruncatedSimplex(s) => {
                let i = l.argmin().0;
                let mut w = DVector::from_element(s.dim, s.floor);
                w[i] += 1.0 - s.floor * s.dim as f64;
                (l.dot(&w), w)
            }
        })
    }
}

/// Self-concordant barrier of a [`ConvexBody`].
///
/// For the truncated simplex this is the unweighted `sum ln(1/w_i)` on the positive orthant.
#[derive(Debug, Clone)]
pub struct Barrier {
    body: ConvexBody,
}

pub fn make_barrier(body: ConvexBody) -> Barrier {
    Barrier { body }
}

impl Barrier {
    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    /// Barrier parameter.
    pub fn nu(&self) -> f64 {
        match &self.body {
            ConvexBody::Polytope(p) => p.a.nrows() as f64,
            ConvexBody::Ball(_) => 2.0,
            ConvexBody::TruncatedSimplex(s) => s.dim as f64,
        }
    }

    fn in_domain(&self, w: &DVector<f64>) -> bool {
        match &self.body {
            ConvexBody::TruncatedSimplex(s) => w.len() == s.dim && w.iter().all(|v| *v > 0.0 && v.is_finite()),
            body => body.is_interior(w),
        }
    }

    fn guard(&self, w: &DVector<f64>) -> Result<()> {
        if w.len() != self.body.dim() {
            return Err(Error::DimensionMismatch { expected: self.body.dim(), got: w.len() });
        }
        if !self.in_domain(w) {
            return Err(Error::NotInterior);
        }
        Ok(())
    }

    pub fn value_at(&self, w: &DVector<f64>) -> Result<f64> {
        self.guard(w)?;
        Ok(self.raw_value(w))
    }

    pub fn gradient_at(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        self.guard(w)?;
        Ok(self.raw_gradient(w))
    }

    pub fn hessian_at(&self, w: &DVector<f64>) -> Result<SpdMatrix> {
        self.guard(w)?;
        SpdMatrix::new(self.raw_hessian(w))
    }

    fn raw_value(&self, w: &DVector<f64>) -> f64 {
        match &self.body {
            ConvexBody::Polytope(p) => -p.slacks(w).iter().map(|s| s.ln()).sum::<f64>(),
            ConvexBody::Ball(b) => -b.slack(w).ln(),
            ConvexBody::TruncatedSimplex(_) => -w.iter().map(|v| v.ln()).sum::<f64>(),
        }
    }

    fn raw_gradient(&self, w: &DVector<f64>) -> DVector<f64> {
        match &self.body {
            ConvexBody::Polytope(p) => {
                let inv = p.slacks(w).map(|s| 1.0 / s);
                p.a.tr_mul(&inv)
            }
            ConvexBody::Ball(b) => (w - &b.center) * (2.0 / b.slack(w)),
            ConvexBody::TruncatedSimplex(_) => w.map(|v| -1.0 / v),
        }
    }

    fn raw_hessian(&self, w: &DVector<f64>) -> DMatrix<f64> {
        match &self.body {
            ConvexBody::Polytope(p) => {
                let s = p.slacks(w);
                let scaled = DMatrix::from_fn(p.a.nrows(), p.a.ncols(), |i, j| p.a[(i, j)] / s[i]);
                scaled.tr_mul(&scaled)
            }
            ConvexBody::Ball(b) => {
                let s = b.slack(w);
                let x = w - &b.center;
                let n = x.len();
                DMatrix::identity(n, n) * (2.0 / s) + &x * x.transpose() * (4.0 / (s * s))
            }
            ConvexBody::TruncatedSimplex(_) => DMatrix::from_diagonal(&w.map(|v| 1.0 / (v * v))),
        }
    }

    /// Minimizer of the barrier over the body.
    pub fn analytic_center(&self) -> Result<DVector<f64>> {
        if let ConvexBody::TruncatedSimplex(s) = &self.body {
            return Ok(DVector::from_element(s.dim, 1.0 / s.dim as f64));
        }
        if let ConvexBody::Ball(b) = &self.body {
            return Ok(b.center.clone());
        }
        let mut w = self.body.reference_point();
        for _ in 0..200 {
            let g = self.raw_gradient(&w);
            let h = SpdMatrix::new(self.raw_hessian(&w))?;
            let step = h.inverse() * &g;
            let dec = g.dot(&step).max(0.0).sqrt();
            if dec < 1e-13 {
                return Ok(w);
            }
            let t = if dec > 0.25 { 1.0 / (1.0 + dec) } else { 1.0 };
            let next = &w - step * t;
            if !self.in_domain(&next) {
                return Err(Error::NotInterior);
            }
            w = next;
        }
        Ok(w)
    }
}

impl SmoothConvex for Barrier {
    fn dim(&self) -> usize {
        self.body.dim()
    }

    fn value(&self, x: &DVector<f64>) -> Option<f64> {
        if self.in_domain(x) { Some(self.raw_value(x)) } else { None }
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.raw_gradient(x)
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.raw_hessian(x)
    }
}

/// `true` iff `v` lies in the closed unit Dikin ellipsoid `{ v : |v - c|_H <= 1 }`.
pub fn dikin_contains(h: &SpdMatrix, center: &DVector<f64>, v: &DVector<f64>) -> bool {
    h.norm(&(v - center)) <= 1.0 + DIKIN_TOL
}

/// Bregman divergence `f(x) - f(y) - <grad f(y), x - y>`.
pub fn bregman<F: SmoothConvex + ?Sized>(f: &F, x: &DVector<f64>, y: &DVector<f64>) -> Option<f64> {
    let fx = f.value(x)?;
    let fy = f.value(y)?;
    Some(fx - fy - f.gradient(y).dot(&(x - y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square() -> Polytope {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        Polytope::new(a, DVector::from_element(4, 1.0), DVector::zeros(2)).unwrap()
    }

    #[test]
    fn square_barrier_by_hand() {
        let b = make_barrier(ConvexBody::Polytope(square()));
        let w = DVector::from_vec(vec![0.5, 0.0]);
        let expect = -(0.5f64.ln() + 1.5f64.ln() + 0.0 + 0.0);
        assert_relative_eq!(b.value_at(&w).unwrap(), expect, epsilon = 1e-14);
        let g = b.gradient_at(&w).unwrap();
        assert_relative_eq!(g[0], 1.0 / 0.5 - 1.0 / 1.5, epsilon = 1e-14);
        assert_relative_eq!(g[1], 0.0, epsilon = 1e-14);
        let h = b.hessian_at(&w).unwrap();
        assert_relative_eq!(h.matrix()[(0, 0)], 4.0 + 1.0 / 2.25, epsilon = 1e-13);
        assert_relative_eq!(h.matrix()[(1, 1)], 2.0, epsilon = 1e-13);
        assert_eq!(b.nu(), 4.0);
    }

    #[test]
    fn outside_points_are_rejected() {
        let b = make_barrier(ConvexBody::Polytope(square()));
        assert_eq!(b.value_at(&DVector::from_vec(vec![1.0, 0.0])), Err(Error::NotInterior));
        let ball = make_barrier(ConvexBody::Ball(Ball::unit(2)));
        assert_eq!(ball.gradient_at(&DVector::from_vec(vec![0.0, 1.5])), Err(Error::NotInterior));
    }

    #[test]
    fn ball_gauge_and_shrink() {
        let body = ConvexBody::Ball(Ball::unit(2));
        let pole = DVector::from_vec(vec![0.5, 0.0]);
        let u = DVector::from_vec(vec![1.0, 0.0]);
        assert_relative_eq!(body.minkowski(&pole, &u).unwrap(), 1.0, epsilon = 1e-12);
        let u = DVector::from_vec(vec![0.0, 0.0]);
        // boundary along -x from the pole is at -1, distance 1.5; u is 0.5 away
        assert_relative_eq!(body.minkowski(&pole, &u).unwrap(), 0.5 / 1.5, epsilon = 1e-12);
        let shrunk = body.shrink(&pole, 0.5).unwrap();
        let ConvexBody::Ball(sb) = &shrunk else { panic!() };
        assert_relative_eq!(sb.radius(), 0.5);
        assert_relative_eq!(sb.center()[0], 0.25);
        assert!(matches!(body.minkowski(&pole, &DVector::from_vec(vec![3.0, 0.0])), Err(Error::OutsideBody(_))));
    }

    #[test]
    fn polytope_gauge_matches_bisection() {
        let body = ConvexBody::Polytope(square());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let pole = DVector::from_fn(2, |_, _| rng.random_range(-0.9..0.9));
            let u = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            let g = body.minkowski(&pole, &u).unwrap();
            // independent oracle: bisection on the scale t where pole + (u - pole)/t hits the boundary
            let inside = |t: f64| {
                let x = &pole + (&u - &pole) / t;
                x.iter().all(|c| c.abs() <= 1.0)
            };
            let (mut lo, mut hi) = (1e-9_f64, 1e9_f64);
            for _ in 0..200 {
                let mid = (lo * hi).sqrt();
                if inside(mid) { hi = mid } else { lo = mid }
            }
            assert!((g - hi).abs() < 1e-7 * (1.0 + hi) || (g < 1e-8 && hi < 1e-8));
        }
    }

    #[test]
    fn shrunk_polytope_contains_shrunk_points() {
        let body = ConvexBody::Polytope(square());
        let pole = DVector::from_vec(vec![0.2, -0.3]);
        let shrunk = body.shrink(&pole, 0.9).unwrap();
        let corner = DVector::from_vec(vec![1.0, 1.0]);
        let image = &pole + (&corner - &pole) * 0.9;
        assert!(shrunk.contains(&image, 1e-12));
        assert!(!shrunk.is_interior(&image));
        assert_relative_eq!(body.minkowski(&pole, &image).unwrap(), 0.9, epsilon = 1e-12);
    }

    #[test]
    fn vertices_of_square() {
        let v = square().vertices();
        assert_eq!(v.len(), 4);
        let body = ConvexBody::Polytope(square());
        let (val, w) = body.minimize_linear(&DVector::from_vec(vec![1.0, 2.0])).unwrap();
        assert_relative_eq!(val, -3.0);
        assert_relative_eq!(w[0], -1.0);
    }

    #[test]
    fn analytic_center_of_asymmetric_box() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let b = DVector::from_vec(vec![3.0, 1.0, 1.0, 1.0]);
        let p = Polytope::new(a, b, DVector::zeros(2)).unwrap();
        let c = make_barrier(ConvexBody::Polytope(p)).analytic_center().unwrap();
        assert_relative_eq!(c[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(c[1], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn dikin_boundary_counts_as_inside() {
        let h = SpdMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]))).unwrap();
        let c = DVector::zeros(2);
        assert!(dikin_contains(&h, &c, &DVector::from_vec(vec![0.5, 0.0])));
        assert!(dikin_contains(&h, &c, &DVector::from_vec(vec![0.5 + 1e-11, 0.0])));
        assert!(!dikin_contains(&h, &c, &DVector::from_vec(vec![0.51, 0.0])));
    }

    #[test]
    fn json_roundtrip() {
        let p = square();
        let q = Polytope::from_json(&p.to_json()).unwrap();
        assert_eq!(p, q);
        let bad = r#"{"A": [[1.0, 0.0]], "b": [1.0], "interior": [0.0, 0.0]}"#;
        assert!(Polytope::from_json(bad).is_err());
    }

    #[test]
    fn simplex_gauge() {
        let body = ConvexBody::TruncatedSimplex(TruncatedSimplex::new(3, 0.01).unwrap());
        let pole = DVector::from_element(3, 1.0 / 3.0);
        let u = DVector::from_vec(vec![0.98, 0.01, 0.01]);
        assert_relative_eq!(body.minkowski(&pole, &u).unwrap(), 1.0, epsilon = 1e-12);
    }
}
