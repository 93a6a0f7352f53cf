//! Loss-generating adversaries for the three settings.
//!
//! Every generator is a pure function of `(kind, seed, round, history)`; oblivious kinds ignore
//! the history, so two learners facing the same seed see identical losses.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::barrier::{ConvexBody, Polytope};
use crate::error::{Error, Result};
use crate::mdp::Layout;

/// Randomness for one round, independent of how many draws earlier rounds made.
pub fn round_rng(seed: u64, round: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Noise {
    /// Losses are Bernoulli draws with the stated means.
    #[default]
    Bernoulli,
    /// Losses equal their means.
    None,
}

impl Noise {
    fn draw(self, mean: f64, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        match self {
            Noise::Bernoulli => {
                if u < mean {
                    1.0
                } else {
                    0.0
                }
            }
            Noise::None => mean,
        }
    }
}

fn check_mean(m: f64) -> Result<()> {
    if (0.0..=1.0).contains(&m) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("mean loss {m} outside [0, 1]")))
    }
}

/// Row `round` of a fixed sequence, repeating the sequence cyclically.
fn fixed_row(losses: &[Vec<f64>], round: usize, len: usize) -> Result<Vec<f64>> {
    if losses.is_empty() {
        return Err(Error::InvalidParameter("fixed sequence is empty".into()));
    }
    let row = &losses[round % losses.len()];
    if row.len() != len {
        return Err(Error::DimensionMismatch { expected: len, got: row.len() });
    }
    Ok(row.clone())
}

/// Multi-armed bandit adversaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MabAdversary {
    /// Arm `best` has mean `base`; every other arm has mean `base + gap`.
    StochasticGap {
        best: usize,
        base: f64,
        gap: f64,
        #[serde(default)]
        noise: Noise,
    },
    /// Arm `best` always loses 0; the others have mean `others`.
    SmallLoss {
        best: usize,
        others: f64,
        #[serde(default)]
        noise: Noise,
    },
    FixedSequence { losses: Vec<Vec<f64>> },
    /// Loss `high` on the previously played arm and `low` elsewhere.
    FollowTheLearner { high: f64, low: f64 },
}

impl MabAdversary {
    pub fn validate(&self, arms: usize) -> Result<()> {
        match self {
            MabAdversary::StochasticGap { best, base, gap, .. } => {
                check_mean(*base)?;
                check_mean(base + gap)?;
                (*best < arms).then_some(()).ok_or(Error::InvalidParameter(format!("best arm {best} out of range")))
            }
            MabAdversary::SmallLoss { best, others, .. } => {
                check_mean(*others)?;
                (*best < arms).then_some(()).ok_or(Error::InvalidParameter(format!("best arm {best} out of range")))
            }
            MabAdversary::FixedSequence { losses } => {
                for row in losses {
                    if row.len() != arms || row.iter().any(|l| !(0.0..=1.0).contains(l)) {
                        return Err(Error::InvalidParameter("fixed losses must be rows of [0, 1] values, one per arm".into()));
                    }
                }
                Ok(())
            }
            MabAdversary::FollowTheLearner { high, low } => {
                check_mean(*high)?;
                check_mean(*low)
            }
        }
    }

    pub fn is_oblivious(&self) -> bool {
        !matches!(self, MabAdversary::FollowTheLearner { .. })
    }

    /// Loss vector for `round` given the arms played so far.
    pub fn loss(&self, arms: usize, seed: u64, round: usize, history: &[usize]) -> Result<Vec<f64>> {
        let mut rng = round_rng(seed, round);
        match self {
            MabAdversary::StochasticGap { best, base, gap, noise } => Ok((0..arms)
                .map(|i| noise.draw(if i == *best { *base } else { base + gap }, &mut rng))
                .collect()),
            MabAdversary::SmallLoss { best, others, noise } => Ok((0..arms)
                .map(|i| {
                    let l = noise.draw(*others, &mut rng);
                    if i == *best { 0.0 } else { l }
                })
                .collect()),
            MabAdversary::FixedSequence { losses } => fixed_row(losses, round, arms),
            MabAdversary::FollowTheLearner { high, low } => {
                let last = history.last().copied();
                Ok((0..arms).map(|i| if Some(i) == last { *high } else { *low }).collect())
            }
        }
    }
}

/// Evaluates `max_{w in body} |<w, l>|`, caching polytope vertices.
#[derive(Debug, Clone)]
pub struct LossNormalizer {
    body: ConvexBody,
    vertices: Vec<DVector<f64>>,
}

impl LossNormalizer {
    pub fn new(body: ConvexBody) -> Self {
        let vertices = match &body {
            ConvexBody::Polytope(p) => p.vertices(),
            _ => Vec::new(),
        };
        Self { body, vertices }
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    /// `(min, max)` of `<w, l>` over the body.
    pub fn range(&self, l: &DVector<f64>) -> Result<(f64, f64)> {
        if self.vertices.is_empty() {
            let (lo, _) = self.body.minimize_linear(l)?;
            let (neg, _) = self.body.minimize_linear(&-l)?;
            return Ok((lo, -neg));
        }
        let vals = self.vertices.iter().map(|v| v.dot(l));
        Ok(vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    pub fn max_abs(&self, l: &DVector<f64>) -> Result<f64> {
        let (lo, hi) = self.range(l)?;
        Ok(lo.abs().max(hi.abs()))
    }

    /// Rescales `l` onto the normalized set if needed; reports whether it did.
    pub fn normalize(&self, l: DVector<f64>) -> Result<(DVector<f64>, bool)> {
        let m = self.max_abs(&l)?;
        if m > 1.0 {
            Ok((l / m, true))
        } else {
            Ok((l, false))
        }
    }
}

/// Linear bandit adversaries; losses are normalized against the decision set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LinearAdversary {
    /// `mean` plus independent uniform noise in `[-noise, noise]` per coordinate.
    Stochastic { mean: Vec<f64>, noise: f64 },
    FixedSequence { losses: Vec<Vec<f64>> },
    /// Points the loss at the previously played point, scaled to `magnitude`.
    FollowTheLearner { magnitude: f64 },
}

/// A linear adversary together with its normalization and sign requirements.
#[derive(Debug, Clone)]
pub struct LinearEnvironment {
    pub adversary: LinearAdversary,
    /// Require `<w, l> >= 0` on the whole set.
    pub nonnegative: bool,
    normalizer: LossNormalizer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearLoss {
    pub loss: DVector<f64>,
    pub rescaled: bool,
}

impl LinearEnvironment {
    pub fn new(adversary: LinearAdversary, body: ConvexBody, nonnegative: bool) -> Result<Self> {
        let d = body.dim();
        match &adversary {
            LinearAdversary::Stochastic { mean, noise } => {
                if mean.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: mean.len() });
                }
                if !(*noise >= 0.0) {
                    return Err(Error::InvalidParameter("noise must be non-negative".into()));
                }
            }
            LinearAdversary::FixedSequence { losses } => {
                if let Some(row) = losses.iter().find(|r| r.len() != d) {
                    return Err(Error::DimensionMismatch { expected: d, got: row.len() });
                }
            }
            LinearAdversary::FollowTheLearner { magnitude } => {
                if !(*magnitude > 0.0 && *magnitude <= 1.0) {
                    return Err(Error::InvalidParameter("magnitude must lie in (0, 1]".into()));
                }
            }
        }
        Ok(Self { adversary, nonnegative, normalizer: LossNormalizer::new(body) })
    }

    pub fn normalizer(&self) -> &LossNormalizer {
        &self.normalizer
    }

    pub fn is_oblivious(&self) -> bool {
        !matches!(self.adversary, LinearAdversary::FollowTheLearner { .. })
    }

    /// Loss for `round` given the points played so far.
    pub fn loss(&self, seed: u64, round: usize, history: &[DVector<f64>]) -> Result<LinearLoss> {
        let d = self.normalizer.body().dim();
        let raw = match &self.adversary {
            LinearAdversary::Stochastic { mean, noise } => {
                let mut rng = round_rng(seed, round);
                DVector::from_fn(d, |i, _| mean[i] + noise * (2.0 * rng.random::<f64>() - 1.0))
            }
            LinearAdversary::FixedSequence { losses } => DVector::from_vec(fixed_row(losses, round, d)?),
            LinearAdversary::FollowTheLearner { magnitude } => match history.last() {
                Some(x) if x.norm() > 0.0 => {
                    let dir = x / x.norm();
                    let m = self.normalizer.max_abs(&dir)?;
                    dir * (magnitude / m)
                }
                _ => DVector::zeros(d),
            },
        };
        let (loss, rescaled) = self.normalizer.normalize(raw)?;
        if self.nonnegative {
            let (lo, _) = self.normalizer.range(&loss)?;
            if lo < -1e-12 {
                return Err(Error::InvalidParameter(format!("loss takes value {lo} < 0 on the decision set")));
            }
        }
        Ok(LinearLoss { loss, rescaled })
    }
}

/// Episodic MDP adversaries; losses are per (state, action) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MdpAdversary {
    /// Action `best` has mean `base` in every state; other actions have mean `base + gap`.
    StochasticGap {
        best: usize,
        base: f64,
        gap: f64,
        #[serde(default)]
        noise: Noise,
    },
    FixedSequence { losses: Vec<Vec<f64>> },
    /// Loss `high` on pairs visited in the previous episode and `low` elsewhere.
    FollowTheLearner { high: f64, low: f64 },
}

impl MdpAdversary {
    pub fn validate(&self, layout: &Layout) -> Result<()> {
        match self {
            MdpAdversary::StochasticGap { best, base, gap, .. } => {
                check_mean(*base)?;
                check_mean(base + gap)?;
                (*best < layout.actions()).then_some(()).ok_or(Error::InvalidParameter(format!("best action {best} out of range")))
            }
            MdpAdversary::FixedSequence { losses } => {
                for row in losses {
                    if row.len() != layout.pairs() || row.iter().any(|l| !(0.0..=1.0).contains(l)) {
                        return Err(Error::InvalidParameter("fixed losses must be rows of [0, 1] values, one per pair".into()));
                    }
                }
                Ok(())
            }
            MdpAdversary::FollowTheLearner { high, low } => {
                check_mean(*high)?;
                check_mean(*low)
            }
        }
    }

    pub fn is_oblivious(&self) -> bool {
        !matches!(self, MdpAdversary::FollowTheLearner { .. })
    }

    /// Loss per pair for `round`; `history[k]` lists the pairs visited in episode `k`.
    pub fn loss(&self, layout: &Layout, seed: u64, round: usize, history: &[Vec<usize>]) -> Result<Vec<f64>> {
        let mut rng = round_rng(seed, round);
        match self {
            MdpAdversary::StochasticGap { best, base, gap, noise } => Ok((0..layout.pairs())
                .map(|p| noise.draw(if layout.pair_action(p) == *best { *base } else { base + gap }, &mut rng))
                .collect()),
            MdpAdversary::FixedSequence { losses } => fixed_row(losses, round, layout.pairs()),
            MdpAdversary::FollowTheLearner { high, low } => {
                let mut out = vec![*low; layout.pairs()];
                for p in history.last().into_iter().flatten() {
                    out[*p] = *high;
                }
                Ok(out)
            }
        }
    }
}

/// Box `[-1, 1]^d` written as `2d` facets with perturbed normals and offsets.
pub fn perturbed_box<R: Rng + ?Sized>(dim: usize, perturbation: f64, rng: &mut R) -> Result<Polytope> {
    let m = 2 * dim;
    let mut a = DMatrix::zeros(m, dim);
    let mut b = DVector::zeros(m);
    for i in 0..dim {
        for (k, sign) in [(i, 1.0), (i + dim, -1.0)] {
            for j in 0..dim {
                let base = if i == j { sign } else { 0.0 };
                a[(k, j)] = base + perturbation * (2.0 * rng.random::<f64>() - 1.0);
            }
            b[k] = 1.0 + perturbation * (2.0 * rng.random::<f64>() - 1.0);
        }
    }
    Polytope::new(a, b, DVector::zeros(dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::Ball;
    use approx::assert_relative_eq;

    #[test]
    fn gap_instance_means() {
        let adv = MabAdversary::StochasticGap { best: 0, base: 0.1, gap: 0.2, noise: Noise::Bernoulli };
        let n = 20_000;
        let mut sums = [0.0; 3];
        for t in 0..n {
            let l = adv.loss(3, 5, t, &[]).unwrap();
            for i in 0..3 {
                sums[i] += l[i];
            }
        }
        // Bernoulli(0.3) standard error over 2e4 draws is about 3.2e-3
        assert!((sums[0] / n as f64 - 0.1).abs() < 0.013);
        assert!((sums[1] / n as f64 - 0.3).abs() < 0.013);
        let exact = MabAdversary::StochasticGap { best: 0, base: 0.1, gap: 0.2, noise: Noise::None };
        assert_eq!(exact.loss(2, 0, 0, &[]).unwrap(), vec![0.1, 0.30000000000000004]);
    }

    #[test]
    fn small_loss_best_arm_is_free() {
        let adv = MabAdversary::SmallLoss { best: 2, others: 0.5, noise: Noise::Bernoulli };
        for t in 0..100 {
            assert_eq!(adv.loss(4, 1, t, &[]).unwrap()[2], 0.0);
        }
    }

    #[test]
    fn oblivious_ignores_history() {
        let adv = MabAdversary::StochasticGap { best: 1, base: 0.2, gap: 0.3, noise: Noise::Bernoulli };
        for t in 0..50 {
            assert_eq!(adv.loss(4, 9, t, &[0, 1, 2]).unwrap(), adv.loss(4, 9, t, &[3]).unwrap());
        }
    }

    #[test]
    fn follow_the_learner_targets_last_arm() {
        let adv = MabAdversary::FollowTheLearner { high: 1.0, low: 0.1 };
        assert_eq!(adv.loss(3, 0, 2, &[0, 2]).unwrap(), vec![0.1, 0.1, 1.0]);
        assert_eq!(adv.loss(3, 0, 0, &[]).unwrap(), vec![0.1; 3]);
    }

    #[test]
    fn ball_normalization_is_closed_form() {
        let env = LinearEnvironment::new(
            LinearAdversary::FixedSequence { losses: vec![vec![0.8, 0.0, 0.0], vec![3.0, 4.0, 0.0]] },
            ConvexBody::Ball(Ball::unit(3)),
            false,
        )
        .unwrap();
        let first = env.loss(0, 0, &[]).unwrap();
        assert_relative_eq!(env.normalizer().max_abs(&first.loss).unwrap(), 0.8, epsilon = 1e-15);
        assert!(!first.rescaled);
        let second = env.loss(0, 1, &[]).unwrap();
        assert!(second.rescaled);
        assert_relative_eq!(second.loss[0], 0.6, epsilon = 1e-15);
    }

    #[test]
    fn polytope_normalization_uses_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let body = ConvexBody::Polytope(perturbed_box(4, 0.1, &mut rng).unwrap());
        let env = LinearEnvironment::new(LinearAdversary::Stochastic { mean: vec![1.0, -0.5, 0.3, 0.0], noise: 0.5 }, body.clone(), false).unwrap();
        for t in 0..20 {
            let l = env.loss(7, t, &[]).unwrap().loss;
            let (lo, w) = body.minimize_linear(&l).unwrap();
            assert!(lo >= -1.0 - 1e-12);
            assert!(body.contains(&w, 1e-9));
            assert!(env.normalizer().max_abs(&l).unwrap() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn nonnegative_mode_rejects_sign_changes() {
        let env = LinearEnvironment::new(LinearAdversary::Stochastic { mean: vec![0.5, 0.0], noise: 0.0 }, ConvexBody::Ball(Ball::unit(2)), true).unwrap();
        assert!(env.loss(0, 0, &[]).is_err());
        let shifted = Ball::new(DVector::from_vec(vec![2.0, 0.0]), 1.0).unwrap();
        let env = LinearEnvironment::new(LinearAdversary::Stochastic { mean: vec![0.2, 0.0], noise: 0.0 }, ConvexBody::Ball(shifted), true).unwrap();
        assert!(env.loss(0, 0, &[]).unwrap().loss[0] > 0.0);
    }

    #[test]
    fn perturbed_box_has_eight_facets_in_four_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = perturbed_box(4, 0.2, &mut rng).unwrap();
        assert_eq!(p.a().shape(), (8, 4));
        assert!(p.slacks(&DVector::zeros(4)).min() > 0.0);
    }

    #[test]
    fn mdp_follow_the_learner_marks_visited_pairs() {
        let layout = Layout::new(vec![1, 2, 1], 2).unwrap();
        let adv = MdpAdversary::FollowTheLearner { high: 1.0, low: 0.0 };
        let l = adv.loss(&layout, 0, 1, &[vec![1, 4]]).unwrap();
        assert_eq!(l, vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
    }
}
