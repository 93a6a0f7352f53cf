mod common;

use approx::assert_relative_eq;
use common::{bodies, gaussian, interior_point, rng};
use hpbandit::barrier::{ConvexBody, Polytope};
use hpbandit::cone::NormalBarrier;
use hpbandit::env::LossNormalizer;
use hpbandit::linalg::lambda_max_symmetric;
use hpbandit::linear::{lb_default_eta, LinearLearner};
use hpbandit::types::{Horizon, LearningRate};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn learner(body: ConvexBody, t: usize, eta: f64) -> LinearLearner {
    LinearLearner::new(body, Horizon::new(t).unwrap(), LearningRate::new(eta).unwrap()).unwrap()
}

fn cube(d: usize) -> ConvexBody {
    let mut a = DMatrix::zeros(2 * d, d);
    for i in 0..d {
        a[(2 * i, i)] = 1.0;
        a[(2 * i + 1, i)] = -1.0;
    }
    ConvexBody::Polytope(Polytope::new(a, DVector::from_element(2 * d, 1.0), DVector::from_element(d, 0.1)).unwrap())
}

#[test]
fn cube_starts_at_the_origin() {
    for d in 1..5 {
        let l = learner(cube(d), 100, 0.01);
        assert!(l.point().amax() <= 1e-12);
        let z = l.lifted_point();
        assert_relative_eq!(l.hessian().quad_form(&z), 800.0 * l.nu(), max_relative = 1e-12);
        assert_eq!(l.schedule(), &[1]);
    }
}

#[test]
fn lifted_comparators_have_bounded_norm() {
    let mut r = rng(1);
    for body in bodies(2) {
        let l = learner(body.clone(), 1000, 0.01);
        for _ in 0..100 {
            let u = interior_point(&body, l.center(), 1.0, &mut r);
            let norm = l.hessian().norm(&NormalBarrier::lift(&u));
            assert!(norm <= 800.0 * l.nu());
        }
    }
}

#[test]
fn samples_are_unit_dikin_steps_inside_the_body() {
    let mut r = rng(3);
    for body in bodies(4).into_iter().skip(1).take(2) {
        let mut l = learner(body.clone(), 10_000, 0.01);
        let normalizer = LossNormalizer::new(body.clone());
        for t in 0..10_000 {
            let a = l.sample(&mut r).unwrap();
            let step = l.hessian().norm(&(NormalBarrier::lift(&a.point) - l.lifted_point()));
            assert!((step - 1.0).abs() <= 1e-10);
            assert!(body.is_interior(&a.point));
            if t % 50 == 0 {
                let (loss, _) = normalizer.normalize(gaussian(body.dim(), &mut r)).unwrap();
                let est = l.estimate(&a, a.point.dot(&loss)).unwrap();
                l.update(&est).unwrap();
            }
        }
    }
}

#[test]
fn one_dimensional_slice_has_two_points() {
    let l = learner(cube(1), 100, 0.01);
    let mut r = rng(5);
    let n = 20_000;
    let mut right = 0;
    for _ in 0..n {
        let a = l.sample(&mut r).unwrap();
        if a.point[0] > l.point()[0] {
            right += 1;
        }
    }
    let p = right as f64 / n as f64;
    assert!((p - 0.5).abs() <= 3.0 * (0.25 / n as f64).sqrt());
}

#[test]
fn estimate_norm_is_scaled_observation() {
    let mut r = rng(6);
    for body in bodies(7) {
        let l = learner(body.clone(), 100, 0.01);
        let d = body.dim() as f64;
        for _ in 0..50 {
            let a = l.sample(&mut r).unwrap();
            let observed: f64 = 2.0 * rand::Rng::random::<f64>(&mut r) - 1.0;
            let est = l.estimate(&a, observed).unwrap();
            assert_relative_eq!(l.hessian().dual_norm(&est), d * observed.abs(), max_relative = 1e-10, epsilon = 1e-14);
        }
        let a = l.sample(&mut r).unwrap();
        assert_eq!(l.estimate(&a, 0.0).unwrap(), DVector::zeros(body.dim() + 1));
    }
}

#[test]
fn first_schedule_check_matches_an_eigen_oracle() {
    let mut r = rng(8);
    for body in bodies(9) {
        let mut l = learner(body.clone(), 500, 0.01);
        let before = l.hessian().matrix().clone();
        let a = l.sample(&mut r).unwrap();
        let (loss, _) = LossNormalizer::new(body).normalize(gaussian(l.dim(), &mut r)).unwrap();
        let step = l.update(&l.estimate(&a, a.point.dot(&loss)).unwrap()).unwrap();
        let growth = lambda_max_symmetric(&(l.hessian().matrix() - &before)).unwrap();
        assert_eq!(step.increased, growth > 1e-12 * before.amax());
        assert_eq!(l.schedule().len(), if step.increased { 2 } else { 1 });
    }
}

#[test]
fn increase_factor() {
    let l = learner(cube(3), 1000, 0.01);
    let expected = (1.0 / (100.0 * 3.0 * (6.0 * 1000f64).ln())).exp();
    assert_relative_eq!(l.kappa(), expected, max_relative = 1e-15);
}

fn default_eta_oracle(d: f64, nu: f64, t: f64, delta: f64) -> f64 {
    let b = 2e6 * d * nu * nu * t;
    let c = b.log2().ceil() * (b * b * t).log2().ceil();
    let first = 1.0 / (640.0 * 100.0 * c * d * d * (nu * t).ln() * (c / delta).ln());
    let second = 1.0 / (1610.0 * 100.0 * c * d * d * (nu * t).ln() * (t * (c / delta).ln()).sqrt());
    first.min(second)
}

#[test]
fn default_rate_by_hand() {
    let got = lb_default_eta(2, 4.0, Horizon::new(1000).unwrap(), 0.05).unwrap().get();
    assert_relative_eq!(got, default_eta_oracle(2.0, 4.0, 1000.0, 0.05), max_relative = 1e-14);
}

#[test]
fn default_rate_respects_the_stability_precondition() {
    for d in 1..=10 {
        for nu in [1.0, 2.0, 4.0, 10.0, 50.0] {
            let mut prev = f64::INFINITY;
            for t in [8, 10, 100, 1000, 10_000, 1_000_000] {
                let eta = lb_default_eta(d, nu, Horizon::new(t).unwrap(), 0.05).unwrap().get();
                assert!(eta <= 1.0 / (80.0 * d as f64));
                assert!(eta < prev);
                prev = eta;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn schedule_and_rate_bounds(seed in 0u64..10_000, d in 2usize..4) {
        let mut r = rng(seed);
        let body = if seed % 2 == 0 { cube(d) } else { ConvexBody::Ball(hpbandit::barrier::Ball::unit(d)) };
        let t = 300;
        let mut l = learner(body.clone(), t, 1.0 / (80.0 * d as f64));
        let normalizer = LossNormalizer::new(body);
        let drift = gaussian(d, &mut r);
        for _ in 0..t {
            let a = l.sample(&mut r).unwrap();
            let (loss, _) = normalizer.normalize(&drift + gaussian(d, &mut r) * 0.3).unwrap();
            let est = l.estimate(&a, a.point.dot(&loss)).unwrap();
            let eta = l.eta();
            let step = l.update(&est).unwrap();
            prop_assert!(step.movement <= 40.0 * eta * step.estimate_norm + 1e-12);
            prop_assert!(l.eta() <= 5.0 * l.initial_eta() * (1.0 + 1e-12));
            prop_assert!(l.schedule().len() as f64 <= l.max_schedule_len());
            l.check_invariants().unwrap();
        }
    }
}
