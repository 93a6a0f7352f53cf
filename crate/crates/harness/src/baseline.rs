//! Exponential weights with importance-weighted loss estimates and a fixed step size.

use rand::Rng;

#[derive(Debug, Clone)]
pub struct Exp3 {
    eta: f64,
    /// Negated cumulative estimated losses times `eta`.
    log_weights: Vec<f64>,
}

impl Exp3 {
    /// `sqrt(ln d / (d T))`.
    pub fn default_eta(arms: usize, horizon: usize) -> f64 {
        ((arms as f64).ln() / (arms as f64 * horizon.max(1) as f64)).sqrt()
    }

    pub fn new(arms: usize, eta: f64) -> Self {
        Self { eta, log_weights: vec![0.0; arms] }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let top = self.log_weights.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        let w: Vec<f64> = self.log_weights.iter().map(|l| (l - top).exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let p = self.probabilities();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, pi) in p.iter().enumerate() {
            acc += pi;
            if u < acc {
                return i;
            }
        }
        p.len() - 1
    }

    pub fn update(&mut self, arm: usize, loss: f64) {
        let p = self.probabilities()[arm];
        self.log_weights[arm] -= self.eta * loss / p;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_losses_keep_uniform_weights() {
        let mut e = Exp3::new(4, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let i = e.sample(&mut rng);
            e.update(i, 0.0);
        }
        assert_eq!(e.probabilities(), vec![0.25; 4]);
    }

    #[test]
    fn three_rounds_by_hand() {
        // alternating losses (1, 0), (0, 1), (1, 0) with arms 0, 1, 1 played
        let eta = 0.5;
        let mut e = Exp3::new(2, eta);
        e.update(0, 1.0);
        // arm 0 estimate 1 / 0.5 = 2
        let p0 = 1.0 / (1.0 + (2.0 * eta).exp());
        assert!((e.probabilities()[0] - p0).abs() < 1e-15);
        e.update(1, 1.0);
        let l1 = 1.0 / (1.0 - p0);
        let w = [(-eta * 2.0_f64).exp(), (-eta * l1).exp()];
        let p = w[0] / (w[0] + w[1]);
        assert!((e.probabilities()[0] - p).abs() < 1e-15);
        e.update(1, 0.0);
        assert!((e.probabilities()[0] - p).abs() < 1e-15);
    }

    #[test]
    fn default_rate() {
        assert!((Exp3::default_eta(10, 1000) - (10f64.ln() / 1e4).sqrt()).abs() < 1e-15);
    }
}
