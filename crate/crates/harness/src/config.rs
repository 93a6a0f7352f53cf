//! Experiment configuration documents.

use std::path::{Path, PathBuf};

use hpbandit::barrier::{Ball, ConvexBody, Polytope};
use hpbandit::env::{perturbed_box, LinearAdversary, MabAdversary, MdpAdversary};
use hpbandit::freedman::{BanditReplay, DoublingBernoulli, MartingaleProcess, ZeroProcess};
use hpbandit::mdp::LayeredMdp;
use hpbandit::types::LearningRate;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::HarnessError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub setting: Setting,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Random comparators tracked by the pathwise checks.
    #[serde(default = "default_comparators")]
    pub check_comparators: usize,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_comparators() -> usize {
    20
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Write one CSV per seed.
    #[serde(default = "yes")]
    pub traces: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, traces: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Setting {
    Mab(MabSetting),
    Linbandit(LinearSetting),
    Mdp(MdpSetting),
    Freedman(FreedmanSetting),
}

impl Setting {
    pub fn label(&self) -> &'static str {
        match self {
            Setting::Mab(_) => "mab",
            Setting::Linbandit(_) => "linbandit",
            Setting::Mdp(_) => "mdp",
            Setting::Freedman(_) => "freedman",
        }
    }
}

/// How the initial step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EtaRule {
    Fixed { value: f64 },
    /// The default formula of the learner, with an optional comparator-loss estimate.
    Theory {
        #[serde(default)]
        best_loss: Option<f64>,
    },
    /// Only the comparator-loss term of the default formula, capped at `cap`.
    SmallLoss { best_loss: f64, cap: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MabSetting {
    pub arms: usize,
    pub horizon: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub eta: EtaRule,
    pub adversary: MabAdversary,
    /// Also run the exponential-weights baseline on every seed.
    #[serde(default)]
    pub baseline: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSetting {
    pub body: BodySpec,
    pub horizon: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub eta: EtaRule,
    pub adversary: LinearAdversary,
    #[serde(default)]
    pub nonnegative: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpSetting {
    pub mdp: MdpSpec,
    pub horizon: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub eta: EtaRule,
    pub adversary: MdpAdversary,
}

fn default_delta() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        dim: usize,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "unit")]
        radius: f64,
    },
    /// Polytope document given inline or as a path relative to the config file.
    Polytope {
        #[serde(default)]
        path: Option<PathBuf>,
        #[serde(default)]
        inline: Option<serde_json::Value>,
    },
    PerturbedBox { dim: usize, perturbation: f64, seed: u64 },
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MdpSpec {
    Path { path: PathBuf },
    Inline { mdp: serde_json::Value },
    Random { layers: Vec<usize>, actions: usize, seed: u64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreedmanSetting {
    pub process: ProcessSpec,
    pub deltas: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProcessSpec {
    Zero { length: usize },
    DoublingBernoulli { length: usize, p: f64, range_cap: f64 },
    BanditReplay { arms: usize, length: usize, base: f64, gap: f64, eta: f64, seed: u64 },
}

impl ProcessSpec {
    pub fn build(&self) -> Result<Box<dyn MartingaleProcess>, HarnessError> {
        Ok(match *self {
            ProcessSpec::Zero { length } => Box::new(ZeroProcess { length }),
            ProcessSpec::DoublingBernoulli { length, p, range_cap } => {
                if !(p > 0.0 && p < 1.0 && range_cap >= 1.0) {
                    return Err(HarnessError::Config("doubling process needs p in (0, 1) and a cap of at least 1".into()));
                }
                Box::new(DoublingBernoulli { length, p, range_cap })
            }
            ProcessSpec::BanditReplay { arms, length, base, gap, eta, seed } => {
                Box::new(BanditReplay::stochastic(arms, length, base, gap, LearningRate::new(eta)?, seed))
            }
        })
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads the document and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        match &mut cfg.setting {
            Setting::Linbandit(s) => {
                if let BodySpec::Polytope { path: Some(p), .. } = &mut s.body {
                    *p = base.join(&*p);
                }
            }
            Setting::Mdp(s) => {
                if let MdpSpec::Path { path: p } = &mut s.mdp {
                    *p = base.join(&*p);
                }
            }
            _ => {}
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !matches!(self.setting, Setting::Freedman(_)) && self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        let check_delta = |d: f64| {
            if d > 0.0 && d < 1.0 {
                Ok(())
            } else {
                Err(HarnessError::Config(format!("delta {d} must lie in (0, 1)")))
            }
        };
        match &self.setting {
            Setting::Mab(s) => {
                check_delta(s.delta)?;
                check_eta(&s.eta)?;
                s.adversary.validate(s.arms)?;
            }
            Setting::Linbandit(s) => {
                check_delta(s.delta)?;
                check_eta(&s.eta)?;
                if let BodySpec::Polytope { path, inline } = &s.body {
                    if path.is_some() == inline.is_some() {
                        return bad("a polytope needs exactly one of `path` and `inline`".into());
                    }
                }
            }
            Setting::Mdp(s) => {
                check_delta(s.delta)?;
                check_eta(&s.eta)?;
            }
            Setting::Freedman(s) => {
                for d in &s.deltas {
                    check_delta(*d)?;
                }
                if s.deltas.is_empty() || s.trials == 0 {
                    return bad("freedman validation needs deltas and a positive trial count".into());
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).unwrap_or_default();
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn check_eta(rule: &EtaRule) -> Result<(), HarnessError> {
    let ok = match *rule {
        EtaRule::Fixed { value } => value > 0.0 && value.is_finite(),
        EtaRule::Theory { best_loss } => best_loss.is_none_or(|l| l >= 0.0),
        EtaRule::SmallLoss { best_loss, cap } => best_loss >= 0.0 && cap > 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("invalid step-size rule {rule:?}")))
    }
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody, HarnessError> {
        Ok(match self {
            BodySpec::Ball { dim, center, radius } => {
                let c = match center {
                    Some(c) if c.len() != *dim => {
                        return Err(HarnessError::Config(format!("ball center has {} entries, expected {dim}", c.len())))
                    }
                    Some(c) => DVector::from_vec(c.clone()),
                    None => DVector::zeros(*dim),
                };
                ConvexBody::Ball(Ball::new(c, *radius)?)
            }
            BodySpec::Polytope { path: Some(p), .. } => {
                let text = std::fs::read_to_string(p).map_err(|e| HarnessError::io(p, e))?;
                ConvexBody::Polytope(Polytope::from_json(&text)?)
            }
            BodySpec::Polytope { inline: Some(v), .. } => ConvexBody::Polytope(Polytope::from_json(&v.to_string())?),
            BodySpec::Polytope { .. } => return Err(HarnessError::Config("polytope source missing".into())),
            BodySpec::PerturbedBox { dim, perturbation, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                ConvexBody::Polytope(perturbed_box(*dim, *perturbation, &mut rng)?)
            }
        })
    }
}

impl MdpSpec {
    pub fn build(&self) -> Result<LayeredMdp, HarnessError> {
        Ok(match self {
            MdpSpec::Path { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                LayeredMdp::from_json(&text)?
            }
            MdpSpec::Inline { mdp } => LayeredMdp::from_json(&mdp.to_string())?,
            MdpSpec::Random { layers, actions, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                LayeredMdp::random(layers.clone(), *actions, &mut rng)?
            }
        })
    }
}
