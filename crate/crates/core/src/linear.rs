//! Linear bandit over a convex body, exploring on the Dikin ellipsoid of a lifted normal barrier.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::barrier::{make_barrier, Barrier, ConvexBody};
use crate::cone::{NormalBarrier, LIFT_SCALE};
use crate::error::{Error, Result};
use crate::linalg::{lambda_max_symmetric, sample_sphere_orthogonal, SpdMatrix};
use crate::omd::{self, ProximalProblem, Scaled, SolverSettings};
use crate::types::{Horizon, LearningRate};

const SCHEDULE_CONSTANT: f64 = 100.0;

/// The played point and the sphere direction that produced it.
#[derive(Debug, Clone)]
pub struct LinearAction {
    pub point: DVector<f64>,
    pub direction: DVector<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct LinearStep {
    /// Whether the step size was raised after this update.
    pub increased: bool,
    /// `|z_t - z_{t+1}|` in the local norm at `z_t`.
    pub movement: f64,
    /// Dual local norm of the estimate at `z_t`.
    pub estimate_norm: f64,
    pub solver_iterations: usize,
    pub solver_decrement: f64,
}

#[derive(Debug, Clone)]
pub struct LinearLearner {
    body: ConvexBody,
    barrier: Barrier,
    lifted: NormalBarrier,
    shrunk: Barrier,
    horizon: Horizon,
    eta0: f64,
    eta: f64,
    kappa: f64,
    center: DVector<f64>,
    point: DVector<f64>,
    hessian: SpdMatrix,
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
    accumulated: DMatrix<f64>,
    schedule: Vec<usize>,
    round: usize,
    settings: SolverSettings,
}

/// Default step size for the high-probability guarantee.
pub fn lb_default_eta(dim: usize, nu: f64, horizon: Horizon, delta: f64) -> Result<LearningRate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} must lie in (0, 1)")));
    }
    let d = dim as f64;
    let t = horizon.as_f64();
    let b = 2e6 * d * nu * nu * t;
    let c = b.log2().ceil() * (b * b * t).log2().ceil();
    let a = SCHEDULE_CONSTANT;
    let l = (nu * t).ln();
    let lc = (c / delta).ln();
    let first = 1.0 / (640.0 * a * c * d * d * l * lc);
    let second = 1.0 / (1610.0 * a * c * d * d * l * (t * lc).sqrt());
    LearningRate::new(first.min(second))
}

impl LinearLearner {
    pub fn new(body: ConvexBody, horizon: Horizon, eta: LearningRate) -> Result<Self> {
        if matches!(body, ConvexBody::TruncatedSimplex(_)) {
            return Err(Error::InvalidBody("the linear bandit needs a full-dimensional body".into()));
        }
        let d = body.dim();
        let barrier = make_barrier(body.clone());
        let center = barrier.analytic_center()?;
        let shrunk = make_barrier(body.shrink(&center, 1.0 - 1.0 / horizon.as_f64())?);
        let lifted = NormalBarrier::new(barrier.clone());
        let z = NormalBarrier::lift(&center);
        let hessian = lifted.hessian_at(&z)?;
        let nu = barrier.nu();
        let kappa = (1.0 / (SCHEDULE_CONSTANT * d as f64 * (nu * horizon.as_f64()).ln())).exp();
        Ok(Self {
            body,
            sqrt: hessian.sqrt(),
            inv_sqrt: hessian.inv_sqrt(),
            accumulated: hessian.matrix().clone(),
            hessian,
            barrier,
            lifted,
            shrunk,
            horizon,
            eta0: eta.get(),
            eta: eta.get(),
            kappa,
            point: center.clone(),
            center,
            schedule: vec![1],
            round: 1,
            settings: SolverSettings::default(),
        })
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn barrier(&self) -> &Barrier {
        &self.barrier
    }

    pub fn lifted(&self) -> &NormalBarrier {
        &self.lifted
    }

    pub fn shrunk_body(&self) -> &ConvexBody {
        self.shrunk.body()
    }

    pub fn nu(&self) -> f64 {
        self.barrier.nu()
    }

    pub fn theta(&self) -> f64 {
        self.lifted.theta()
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn initial_eta(&self) -> f64 {
        self.eta0
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn point(&self) -> &DVector<f64> {
        &self.point
    }

    pub fn lifted_point(&self) -> DVector<f64> {
        NormalBarrier::lift(&self.point)
    }

    pub fn hessian(&self) -> &SpdMatrix {
        &self.hessian
    }

    pub fn schedule(&self) -> &[usize] {
        &self.schedule
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Samples a point on the boundary of the lifted Dikin ellipsoid, within the slice `b = 1`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LinearAction> {
        let d = self.dim();
        let axis = self.inv_sqrt.column(d).into_owned();
        let s = sample_sphere_orthogonal(&axis, rng)?.into_inner();
        let mut z = self.lifted_point() + &self.inv_sqrt * &s;
        let residual = (z[d] - 1.0).abs();
        if residual > 1e-9 {
            return Err(Error::Invariant(format!("sample left the slice by {residual:e}")));
        }
        z[d] = 1.0;
        let point = z.rows(0, d).into_owned();
        if !self.body.contains(&point, 1e-12) {
            return Err(Error::Invariant("sampled point left the body".into()));
        }
        Ok(LinearAction { point, direction: s })
    }

    /// `d <w, l> H^{1/2} s`, a vector in the lifted space.
    pub fn estimate(&self, action: &LinearAction, observed: f64) -> Result<DVector<f64>> {
        if !(observed.abs() <= 1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("observed loss {observed} outside [-1, 1]")));
        }
        if action.direction.len() != self.dim() + 1 {
            return Err(Error::DimensionMismatch { expected: self.dim() + 1, got: action.direction.len() });
        }
        Ok(&self.sqrt * &action.direction * (self.dim() as f64 * observed))
    }

    pub fn update(&mut self, estimate: &DVector<f64>) -> Result<LinearStep> {
        let d = self.dim();
        if estimate.len() != d + 1 {
            return Err(Error::DimensionMismatch { expected: d + 1, got: estimate.len() });
        }
        let z_old = self.lifted_point();
        let estimate_norm = self.hessian.dual_norm(estimate);
        let grad = estimate.rows(0, d).into_owned();
        let (next, iterations, decrement) = if grad.iter().all(|g| *g == 0.0) {
            (self.point.clone(), 0, 0.0)
        } else {
            let reg = Scaled { inner: &self.barrier, factor: LIFT_SCALE / self.eta };
            let problem = ProximalProblem {
                loss: &grad,
                reference: &self.point,
                regularizer: &reg,
                equalities: None,
                feasible: Some(&self.shrunk),
                start: None,
            };
            let sol = omd::solve(&problem, &self.settings)?;
            (sol.x, sol.iterations, sol.decrement)
        };
        let z_new = NormalBarrier::lift(&next);
        let movement = self.hessian.norm(&(&z_old - &z_new));
        let hessian = self.lifted.hessian_at(&z_new)?;
        let growth = lambda_max_symmetric(&(hessian.matrix() - &self.accumulated))?;
        let increased = growth > 1e-12 * self.accumulated.amax();
        self.point = next;
        self.sqrt = hessian.sqrt();
        self.inv_sqrt = hessian.inv_sqrt();
        self.round += 1;
        if increased {
            self.accumulated += hessian.matrix();
            self.schedule.push(self.round);
            self.eta *= self.kappa;
        }
        self.hessian = hessian;
        Ok(LinearStep { increased, movement, estimate_norm, solver_iterations: iterations, solver_decrement: decrement })
    }

    pub fn max_schedule_len(&self) -> f64 {
        SCHEDULE_CONSTANT * self.dim() as f64 * (self.nu() * self.horizon.as_f64()).log2() + 1.0
    }

    pub fn check_invariants(&self) -> Result<()> {
        let z = self.lifted_point();
        let q = self.hessian.quad_form(&z);
        if ((q - self.theta()) / self.theta()).abs() > 1e-6 {
            return Err(Error::Invariant(format!("local norm of the iterate {q} differs from {}", self.theta())));
        }
        let gauge = self.body.minkowski(&self.center, &self.point)?;
        let limit = 1.0 - 1.0 / self.horizon.as_f64() + 1e-12;
        if gauge > limit {
            return Err(Error::Invariant(format!("iterate gauge {gauge} exceeds {limit}")));
        }
        if self.eta > 5.0 * self.eta0 * (1.0 + 1e-12) {
            return Err(Error::Invariant(format!("step size {} exceeds five times {}", self.eta, self.eta0)));
        }
        if self.schedule.len() as f64 > self.max_schedule_len() {
            return Err(Error::Invariant(format!("{} step-size increases", self.schedule.len())));
        }
        Ok(())
    }

    /// Maps a point of the body into the shrunk body used by the comparator.
    pub fn shrink_comparator(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.center + (u - &self.center) * (1.0 - 1.0 / self.horizon.as_f64())
    }
}

/// Per-trajectory bookkeeping for the lifted regret decomposition.
#[derive(Debug, Clone)]
pub struct LinearPathwise {
    comparators: Vec<DVector<f64>>,
    inner: Vec<f64>,
    increase_terms: Vec<f64>,
    abs_loss: f64,
    pub stability_violations: usize,
    pub bregman_violations: usize,
    pub min_bregman_slack: f64,
    pub max_stability_ratio: f64,
}

impl LinearPathwise {
    /// `comparators` are points of the shrunk body (unlifted).
    pub fn new(comparators: Vec<DVector<f64>>) -> Self {
        let n = comparators.len();
        Self {
            comparators: comparators.iter().map(NormalBarrier::lift).collect(),
            inner: vec![0.0; n],
            increase_terms: vec![0.0; n],
            abs_loss: 0.0,
            stability_violations: 0,
            bregman_violations: 0,
            min_bregman_slack: f64::INFINITY,
            max_stability_ratio: 0.0,
        }
    }

    fn log_term(l: &LinearLearner) -> f64 {
        let theta = l.theta();
        theta * (theta * l.horizon().as_f64()).ln()
    }

    /// Call with the learner state before `update`.
    pub fn before_update(&mut self, l: &LinearLearner, estimate: &DVector<f64>, observed: f64) -> Result<()> {
        let z = l.lifted_point();
        self.abs_loss += observed.abs();
        let grad = l.lifted().gradient_at(&z)?;
        let psi_z = l.lifted().value_at(&z)?;
        let floor = -Self::log_term(l) - l.theta();
        for (k, u) in self.comparators.iter().enumerate() {
            self.inner[k] += (&z - u).dot(estimate);
            let breg = l.lifted().value_at(u)? - psi_z - grad.dot(&(u - &z));
            let slack = breg - (floor + l.hessian().norm(u));
            self.min_bregman_slack = self.min_bregman_slack.min(slack);
            if slack < -1e-8 * breg.abs().max(1.0) {
                self.bregman_violations += 1;
            }
        }
        Ok(())
    }

    /// Call with the learner state after `update`.
    pub fn after_update(&mut self, l: &LinearLearner, step: &LinearStep) {
        let eta = l.initial_eta();
        if eta <= 1.0 / (80.0 * l.dim() as f64) {
            let bound = 40.0 * eta * step.estimate_norm;
            if bound > 0.0 {
                self.max_stability_ratio = self.max_stability_ratio.max(step.movement / bound);
            }
            if step.movement > bound * (1.0 + 1e-9) + 1e-12 {
                self.stability_violations += 1;
            }
        }
        if step.increased && l.round() <= l.horizon().get() {
            let c = l.theta() + Self::log_term(l);
            for (k, u) in self.comparators.iter().enumerate() {
                self.increase_terms[k] += c - l.hessian().norm(u);
            }
        }
    }

    /// `(lhs, rhs)` of the regret-term inequality for each comparator.
    pub fn bounds(&self, l: &LinearLearner) -> Vec<crate::mab::PathwiseBound> {
        let eta = l.initial_eta();
        let d = l.dim() as f64;
        let t = l.horizon().as_f64();
        let denom = 5.0 * SCHEDULE_CONSTANT * eta * d * (l.nu() * t).ln();
        self.inner
            .iter()
            .zip(&self.increase_terms)
            .map(|(lhs, inc)| crate::mab::PathwiseBound {
                lhs: *lhs,
                rhs: l.theta() * t.ln() / eta + inc / denom + 40.0 * eta * d * d * self.abs_loss,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::{Ball, Polytope};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ball_learner(d: usize, t: usize, eta: f64) -> LinearLearner {
        LinearLearner::new(ConvexBody::Ball(Ball::unit(d)), Horizon::new(t).unwrap(), LearningRate::new(eta).unwrap()).unwrap()
    }

    #[test]
    fn first_round_setup() {
        let l = ball_learner(3, 100, 0.01);
        assert_eq!(l.schedule(), &[1]);
        assert_eq!(l.point(), &DVector::zeros(3));
        l.check_invariants().unwrap();
    }

    #[test]
    fn samples_stay_on_slice_and_in_body() {
        let l = ball_learner(3, 100, 0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let a = l.sample(&mut rng).unwrap();
            assert!(l.body().is_interior(&a.point));
            let z = NormalBarrier::lift(&a.point);
            // the lifted point sits on the Dikin boundary
            let r = l.hessian().norm(&(z - l.lifted_point()));
            assert!((r - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_estimate_keeps_point() {
        let mut l = ball_learner(2, 100, 0.01);
        let before = l.point().clone();
        let step = l.update(&DVector::from_vec(vec![0.0, 0.0, 3.0])).unwrap();
        assert_eq!(l.point(), &before);
        assert_eq!(step.movement, 0.0);
    }

    #[test]
    fn trajectory_keeps_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = DMatrix::from_row_slice(6, 3, &[1., 0., 0., -1., 0., 0., 0., 1., 0., 0., -1., 0., 0., 0., 1., 0., 0., -1.]);
        let p = Polytope::new(a, DVector::from_vec(vec![1.0, 0.5, 1.0, 1.0, 2.0, 1.0]), DVector::zeros(3)).unwrap();
        let t = 300;
        let mut l = LinearLearner::new(ConvexBody::Polytope(p), Horizon::new(t).unwrap(), LearningRate::new(1.0 / 240.0).unwrap()).unwrap();
        let loss = DVector::from_vec(vec![0.3, -0.2, 0.1]);
        let comps = vec![l.shrink_comparator(&DVector::from_vec(vec![-0.5, 0.9, -0.9]))];
        let mut pw = LinearPathwise::new(comps);
        for _ in 0..t {
            let act = l.sample(&mut rng).unwrap();
            let obs = act.point.dot(&loss);
            let est = l.estimate(&act, obs).unwrap();
            pw.before_update(&l, &est, obs).unwrap();
            let step = l.update(&est).unwrap();
            pw.after_update(&l, &step);
            l.check_invariants().unwrap();
        }
        assert_eq!(pw.stability_violations, 0);
        assert_eq!(pw.bregman_violations, 0);
        for b in pw.bounds(&l) {
            assert!(b.slack() >= 0.0, "{b:?}");
        }
    }

    #[test]
    fn rejects_simplex_and_bad_losses() {
        let body = ConvexBody::TruncatedSimplex(crate::barrier::TruncatedSimplex::new(3, 0.01).unwrap());
        assert!(LinearLearner::new(body, Horizon::new(10).unwrap(), LearningRate::new(0.1).unwrap()).is_err());
        let l = ball_learner(2, 10, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = l.sample(&mut rng).unwrap();
        assert!(l.estimate(&a, 2.0).is_err());
    }
}
