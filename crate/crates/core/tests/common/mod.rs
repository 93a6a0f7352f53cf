#![allow(dead_code)]

use hpbandit::barrier::{Ball, ConvexBody};
use hpbandit::env::perturbed_box;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// Boundary point on the ray from `pole` in direction `v`.
pub fn boundary_point(body: &ConvexBody, pole: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let g = match body.minkowski(pole, &(pole + v)) {
        Err(hpbandit::Error::OutsideBody(g)) => g,
        other => other.unwrap(),
    };
    pole + v / g
}

/// Point with gauge drawn uniformly from `[0, reach)` in a random direction from `pole`.
pub fn interior_point(body: &ConvexBody, pole: &DVector<f64>, reach: f64, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let v = gaussian(body.dim(), rng);
    let edge = boundary_point(body, pole, &v);
    let r: f64 = rng.random::<f64>() * reach;
    pole + (edge - pole) * r
}

pub fn square() -> ConvexBody {
    let a = nalgebra::DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
    ConvexBody::Polytope(hpbandit::barrier::Polytope::new(a, DVector::from_element(4, 1.0), DVector::zeros(2)).unwrap())
}

/// Balls and perturbed boxes in a few dimensions.
pub fn bodies(seed: u64) -> Vec<ConvexBody> {
    let mut r = rng(seed);
    let mut out = vec![square()];
    for d in [2, 3, 4] {
        let center = gaussian(d, &mut r) * 0.3;
        out.push(ConvexBody::Ball(Ball::new(center, 0.5 + r.random::<f64>()).unwrap()));
        out.push(ConvexBody::Polytope(perturbed_box(d, 0.3, &mut r).unwrap()));
    }
    out
}
