//! Freedman-type concentration for martingales with predictable, growing ranges, plus a
//! Monte-Carlo harness for checking the bound on concrete processes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mab::MabLearner;
use crate::types::{Confidence, Horizon, LearningRate};

/// Quantities the bound depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreedmanInputs {
    /// Total conditional variance, at least 1.
    pub variance: f64,
    /// Largest realized range, in `[1, range_cap]`.
    pub range_max: f64,
    /// A-priori range cap.
    pub range_cap: f64,
    pub length: usize,
    pub delta: f64,
}

impl FreedmanInputs {
    pub fn new(variance: f64, range_max: f64, range_cap: f64, length: usize, delta: f64) -> Result<Self> {
        Confidence::new(delta)?;
        if !(variance >= 1.0) || !variance.is_finite() {
            return Err(Error::InvalidParameter(format!("variance total must be at least 1, got {variance}")));
        }
        if !(range_max >= 1.0 && range_max <= range_cap) || !range_cap.is_finite() {
            return Err(Error::InvalidParameter(format!("need 1 <= {range_max} <= {range_cap}")));
        }
        if length == 0 {
            return Err(Error::InvalidParameter("sequence length must be positive".into()));
        }
        Ok(Self { variance, range_max, range_cap, length, delta })
    }
}

/// `max(1, ceil(log2 b) * ceil(log2(b^2 T)))`.
pub fn range_constant(range_cap: f64, length: f64) -> f64 {
    let c = range_cap.log2().ceil() * (range_cap * range_cap * length).log2().ceil();
    c.max(1.0)
}

/// `C (sqrt(8 V ln(C/delta)) + 2 B* ln(C/delta))`.
pub fn freedman_bound(inputs: &FreedmanInputs) -> Result<f64> {
    let delta = Confidence::new(inputs.delta)?.get();
    let c = range_constant(inputs.range_cap, inputs.length as f64);
    let log = (c / delta).ln();
    Ok(c * ((8.0 * inputs.variance * log).sqrt() + 2.0 * inputs.range_max * log))
}

/// One martingale difference with its predictable range and conditional variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increment {
    pub value: f64,
    pub range: f64,
    pub variance: f64,
}

/// A generator of martingale difference sequences.
pub trait MartingaleProcess: Sync {
    fn length(&self) -> usize;
    fn range_cap(&self) -> f64;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<Increment>>;
}

/// `X_t = 0`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroProcess {
    pub length: usize,
}

impl MartingaleProcess for ZeroProcess {
    fn length(&self) -> usize {
        self.length
    }

    fn range_cap(&self) -> f64 {
        1.0
    }

    fn sample(&self, _rng: &mut ChaCha8Rng) -> Result<Vec<Increment>> {
        Ok(vec![Increment { value: 0.0, range: 1.0, variance: 0.0 }; self.length])
    }
}

/// `X_t = B_t (xi_t - p)` with `xi_t ~ Bernoulli(p)`; `B_t` doubles after every success, up to the cap.
#[derive(Debug, Clone, Copy)]
pub struct DoublingBernoulli {
    pub length: usize,
    pub p: f64,
    pub range_cap: f64,
}

impl MartingaleProcess for DoublingBernoulli {
    fn length(&self) -> usize {
        self.length
    }

    fn range_cap(&self) -> f64 {
        self.range_cap
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<Increment>> {
        let mut range = 1.0_f64;
        let mut out = Vec::with_capacity(self.length);
        for _ in 0..self.length {
            let hit = rng.random::<f64>() < self.p;
            let xi = if hit { 1.0 } else { 0.0 };
            out.push(Increment { value: range * (xi - self.p), range, variance: range * range * self.p * (1.0 - self.p) });
            if hit {
                range = (2.0 * range).min(self.range_cap);
            }
        }
        Ok(out)
    }
}

/// Estimation error of the log-barrier bandit on one arm, `lhat_{t,i} - l_{t,i}`, with range
/// given by the arm's current threshold.
#[derive(Debug, Clone)]
pub struct BanditReplay {
    pub losses: Vec<Vec<f64>>,
    pub arm: usize,
    pub eta: LearningRate,
}

impl BanditReplay {
    /// A loss table where arm 0 has mean `base` and the rest `base + gap`, Bernoulli draws.
    pub fn stochastic(arms: usize, length: usize, base: f64, gap: f64, eta: LearningRate, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let losses = (0..length)
            .map(|_| {
                (0..arms)
                    .map(|i| {
                        let mean = if i == 0 { base } else { base + gap };
                        if rng.random::<f64>() < mean { 1.0 } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        Self { losses, arm: 0, eta }
    }
}

impl MartingaleProcess for BanditReplay {
    fn length(&self) -> usize {
        self.losses.len()
    }

    fn range_cap(&self) -> f64 {
        2.0 * self.losses.len() as f64
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<Increment>> {
        let arms = self.losses.first().map_or(0, Vec::len);
        let mut learner = MabLearner::new(arms, Horizon::new(self.losses.len())?, self.eta)?;
        let mut out = Vec::with_capacity(self.losses.len());
        for loss in &self.losses {
            let w = learner.weights()[self.arm];
            let l = loss[self.arm];
            let range = learner.thresholds()[self.arm];
            let played = learner.sample(rng);
            let est = learner.estimate(played, loss[played])?;
            out.push(Increment { value: est[self.arm] - l, range, variance: l * l * (1.0 - w) / w });
            learner.update(&est)?;
        }
        Ok(out)
    }
}

/// Outcome of one simulated sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub sum: f64,
    pub bound: f64,
}

impl TrialOutcome {
    pub fn violated(&self) -> bool {
        self.sum > self.bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreedmanReport {
    pub trials: usize,
    pub violations: usize,
    pub frequency: f64,
    /// `delta + 3 sqrt(delta (1 - delta) / trials)`.
    pub allowance: f64,
    pub max_ratio: f64,
}

impl FreedmanReport {
    pub fn passed(&self) -> bool {
        self.frequency <= self.allowance
    }
}

/// Sum of one sampled sequence and the bound at its realized variance and range.
pub fn evaluate_trial(process: &dyn MartingaleProcess, delta: f64, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
    let seq = process.sample(rng)?;
    let mut sum = 0.0;
    let mut variance = 0.0;
    let mut range_max = 1.0_f64;
    for (step, inc) in seq.iter().enumerate() {
        if inc.value > inc.range * (1.0 + 1e-12) {
            return Err(Error::BoundViolation { step, value: inc.value, bound: inc.range });
        }
        sum += inc.value;
        variance += inc.variance;
        range_max = range_max.max(inc.range);
    }
    let inputs = FreedmanInputs::new(variance.max(1.0), range_max, process.range_cap().max(range_max), seq.len().max(1), delta)?;
    Ok(TrialOutcome { sum, bound: freedman_bound(&inputs)? })
}

/// Fraction of `trials` sequences whose sum exceeds the bound. Trial `k` uses stream `k` of `seed`.
pub fn mc_validate_freedman(
    process: &dyn MartingaleProcess,
    delta: f64,
    trials: usize,
    seed: u64,
    execution: Execution,
) -> Result<FreedmanReport> {
    let delta = Confidence::new(delta)?.get();
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let outcomes = execution.map_range(trials, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        evaluate_trial(process, delta, &mut rng)
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let violations = outcomes.iter().filter(|o| o.violated()).count();
    let max_ratio = outcomes.iter().map(|o| o.sum / o.bound).fold(f64::NEG_INFINITY, f64::max);
    Ok(FreedmanReport {
        trials,
        violations,
        frequency: violations as f64 / trials as f64,
        allowance: delta + 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt(),
        max_ratio,
    })
}
