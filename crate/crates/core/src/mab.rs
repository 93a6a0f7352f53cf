//! Multi-armed bandit with a truncated log-barrier and per-arm increasing step sizes.

use rand::Rng;

use crate::error::{Error, Result};
use crate::types::{check_loss, Horizon, LearningRate};

/// Step-size increase recorded for one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateIncrease {
    pub arm: usize,
    pub eta: f64,
}

/// State of the log-barrier bandit learner.
#[derive(Debug, Clone)]
pub struct MabLearner {
    arms: usize,
    horizon: Horizon,
    eta: f64,
    kappa: f64,
    weights: Vec<f64>,
    thresholds: Vec<f64>,
    rates: Vec<f64>,
    increases: Vec<usize>,
    round: usize,
}

/// `min{ sqrt((d / L) ln(1/delta)), 1 / (40 C ln T ln(C/delta)), 1/2 }` with
/// `C = ceil(log2 T) ceil(3 log2 T)`.
pub fn mab_default_eta(arms: usize, horizon: Horizon, delta: f64, best_loss: f64) -> Result<LearningRate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} must lie in (0, 1)")));
    }
    let lg = horizon.log2();
    let c = lg.ceil() * (3.0 * lg).ceil();
    let small_loss = ((arms as f64 / best_loss.max(1.0)) * (1.0 / delta).ln()).sqrt();
    let cap = 1.0 / (40.0 * c * horizon.ln() * (c / delta).ln());
    LearningRate::new(small_loss.min(cap).min(0.5))
}

impl MabLearner {
    pub fn new(arms: usize, horizon: Horizon, eta: LearningRate) -> Result<Self> {
        if arms < 2 {
            return Err(Error::InvalidParameter(format!("need at least two arms, got {arms}")));
        }
        if horizon.get() <= arms {
            return Err(Error::InvalidParameter(format!(
                "horizon {} must exceed the number of arms {arms}",
                horizon.get()
            )));
        }
        let d = arms as f64;
        Ok(Self {
            arms,
            horizon,
            eta: eta.get(),
            kappa: (1.0 / horizon.ln()).exp(),
            weights: vec![1.0 / d; arms],
            thresholds: vec![2.0 * d; arms],
            rates: vec![eta.get(); arms],
            increases: vec![0; arms],
            round: 1,
        })
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn initial_eta(&self) -> f64 {
        self.eta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn floor(&self) -> f64 {
        1.0 / self.horizon.as_f64()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn increases(&self) -> &[usize] {
        &self.increases
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Draws an arm from the current weights.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.weights.iter().sum::<f64>();
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.arms - 1
    }

    /// Importance-weighted estimate of the full loss vector.
    pub fn estimate(&self, arm: usize, loss: f64) -> Result<Vec<f64>> {
        if arm >= self.arms {
            return Err(Error::InvalidParameter(format!("arm {arm} out of range")));
        }
        check_loss(loss)?;
        let mut est = vec![0.0; self.arms];
        est[arm] = loss / self.weights[arm];
        Ok(est)
    }

    /// Mirror step on the truncated simplex followed by the step-size schedule.
    pub fn update(&mut self, estimate: &[f64]) -> Result<Vec<RateIncrease>> {
        if estimate.len() != self.arms {
            return Err(Error::DimensionMismatch { expected: self.arms, got: estimate.len() });
        }
        if estimate.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParameter("loss estimates must be finite and non-negative".into()));
        }
        let next = if estimate.iter().all(|l| *l == 0.0) {
            self.weights.clone()
        } else {
            self.mirror_step(estimate)?
        };
        let mut events = Vec::new();
        for i in 0..self.arms {
            if 1.0 / next[i] > self.thresholds[i] {
                self.thresholds[i] = 2.0 / next[i];
                self.rates[i] *= self.kappa;
                self.increases[i] += 1;
                events.push(RateIncrease { arm: i, eta: self.rates[i] });
            }
        }
        self.weights = next;
        self.round += 1;
        Ok(events)
    }

    fn weights_at(&self, estimate: &[f64], lambda: f64) -> (Vec<f64>, f64) {
        let floor = self.floor();
        let mut sum = 0.0;
        let w: Vec<f64> = (0..self.arms)
            .map(|i| {
                let den = self.rates[i] * (estimate[i] + lambda) + 1.0 / self.weights[i];
                let v = if den <= 0.0 { f64::INFINITY } else { (1.0 / den).max(floor) };
                sum += v;
                v
            })
            .collect();
        (w, sum)
    }

    fn mirror_step(&self, estimate: &[f64]) -> Result<Vec<f64>> {
        // the sum is infinite at `lo` and at most one at zero for non-negative estimates
        let mut lo = (0..self.arms)
            .map(|i| -estimate[i] - 1.0 / (self.rates[i] * self.weights[i]))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut hi = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.weights_at(estimate, mid).1 > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (w_hi, s_hi) = self.weights_at(estimate, hi);
        let (w_lo, s_lo) = self.weights_at(estimate, lo);
        let (w, s) = if s_lo.is_finite() && (s_lo - 1.0).abs() < (s_hi - 1.0).abs() { (w_lo, s_lo) } else { (w_hi, s_hi) };
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::NotConverged { iterations: 200, decrement: (s - 1.0).abs() });
        }
        Ok(w)
    }

    /// Comparator `(1 - d/T) e_best + (1/T) 1` inside the truncated simplex.
    pub fn comparator(&self, best: usize) -> Vec<f64> {
        let f = self.floor();
        let mut u = vec![f; self.arms];
        u[best] += 1.0 - self.arms as f64 * f;
        u
    }

    pub fn max_increases(&self) -> usize {
        (self.horizon.as_f64() / self.arms as f64).log2().ceil() as usize + 1
    }

    pub fn check_invariants(&self) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Invariant(format!("weights sum to {sum}")));
        }
        let floor = self.floor();
        if let Some(w) = self.weights.iter().find(|w| **w < floor) {
            return Err(Error::Invariant(format!("weight {w} below floor {floor}")));
        }
        let cap = 5.0 * self.eta * (1.0 + 1e-12);
        if let Some(r) = self.rates.iter().find(|r| **r > cap) {
            return Err(Error::Invariant(format!("step size {r} exceeds five times {}", self.eta)));
        }
        let max = self.max_increases();
        if let Some(n) = self.increases.iter().find(|n| **n > max) {
            return Err(Error::Invariant(format!("{n} step-size increases exceed {max}")));
        }
        for (w, r) in self.weights.iter().zip(&self.thresholds) {
            if 1.0 / w > r * (1.0 + 1e-12) {
                return Err(Error::Invariant(format!("inverse weight {} above threshold {r}", 1.0 / w)));
            }
        }
        Ok(())
    }
}

/// Tracks the deterministic regret inequality along one trajectory for a set of comparators.
#[derive(Debug, Clone)]
pub struct MabPathwise {
    comparators: Vec<Vec<f64>>,
    estimated: Vec<f64>,
    learner_loss: f64,
    last_thresholds: Vec<f64>,
    rounds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathwiseBound {
    pub lhs: f64,
    pub rhs: f64,
}

impl PathwiseBound {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

impl MabPathwise {
    pub fn new(comparators: Vec<Vec<f64>>) -> Self {
        let n = comparators.len();
        Self { comparators, estimated: vec![0.0; n], learner_loss: 0.0, last_thresholds: Vec::new(), rounds: 0 }
    }

    /// Call before `update` with the learner state of the current round.
    pub fn record(&mut self, learner: &MabLearner, loss: f64, estimate: &[f64]) {
        self.learner_loss += loss;
        for (acc, u) in self.estimated.iter_mut().zip(&self.comparators) {
            *acc += u.iter().zip(estimate).map(|(u, l)| u * l).sum::<f64>();
        }
        self.last_thresholds.clear();
        self.last_thresholds.extend_from_slice(learner.thresholds());
        self.rounds += 1;
    }

    pub fn bounds(&self, learner: &MabLearner) -> Vec<PathwiseBound> {
        let d = learner.arms() as f64;
        let eta = learner.initial_eta();
        let ln_t = learner.horizon().ln();
        self.comparators
            .iter()
            .zip(&self.estimated)
            .map(|(u, est)| {
                let schedule: f64 = u
                    .iter()
                    .zip(&self.last_thresholds)
                    .map(|(u, r)| (2.0 + 2.0 * ln_t - u * r) / (10.0 * eta * ln_t))
                    .sum();
                PathwiseBound {
                    lhs: self.learner_loss - est,
                    rhs: d * ln_t / eta + schedule + 5.0 * eta * self.learner_loss,
                }
            })
            .collect()
    }
}
