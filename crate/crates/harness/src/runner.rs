//! Drives learners against adversaries over a list of seeds.

use hpbandit::barrier::{make_barrier, ConvexBody};
use hpbandit::env::LinearEnvironment;
use hpbandit::exec::Execution;
use hpbandit::linear::{lb_default_eta, LinearLearner, LinearPathwise};
use hpbandit::mab::{mab_default_eta, MabLearner, MabPathwise};
use hpbandit::mdp::{construct_p0, mdp_default_eta, LayeredMdp, MdpLearner};
use hpbandit::types::{Confidence, Horizon, LearningRate};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;

use crate::baseline::Exp3;
use crate::config::{EtaRule, ExperimentConfig, LinearSetting, MabSetting, MdpSetting, Setting};
use crate::error::HarnessError;
use crate::trace::{Event, QuantileBands, RegretStats, RegretTrace};

/// Pathwise inequalities may fall short of their bound by at most this much.
pub const PATHWISE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub check: bool,
    pub execution: Execution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    Invariant,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub kind: FailureKind,
    /// Round during which the run stopped; 0 for the final checks.
    pub round: usize,
    pub message: String,
}

impl Failure {
    fn at(round: usize, e: hpbandit::Error) -> Self {
        let kind = match e {
            hpbandit::Error::Invariant(_) | hpbandit::Error::BoundViolation { .. } => FailureKind::Invariant,
            _ => FailureKind::Error,
        };
        Self { kind, round, message: e.to_string() }
    }

    fn invariant(message: String) -> Self {
        Self { kind: FailureKind::Invariant, round: 0, message }
    }
}

/// Quantities gathered by check-mode; all bounds were asserted, these record the margins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub rounds: usize,
    pub comparators: usize,
    /// Smallest `rhs - lhs` over the regret inequalities.
    pub min_pathwise_slack: Option<f64>,
    pub max_stability_ratio: Option<f64>,
    pub min_bregman_slack: Option<f64>,
    /// Largest current step size divided by the initial one.
    pub max_eta_ratio: f64,
    pub max_increases: usize,
    pub increase_limit: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub eta: f64,
    pub increases: usize,
    pub epochs: Option<usize>,
    /// Epoch starts whose confidence set missed the true kernel.
    pub kernel_misses: Option<usize>,
    /// Epoch starts whose confidence set missed the floored kernel.
    pub floored_kernel_misses: Option<usize>,
    pub rescaled_losses: usize,
    pub max_solver_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub seed: u64,
    #[serde(skip)]
    pub trace: RegretTrace,
    pub stats: RunStats,
    pub failure: Option<Failure>,
    pub checks: Option<CheckReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub rounds: usize,
    pub final_regret: f64,
    pub final_loss: f64,
    pub final_comparator_loss: f64,
    pub comparator: String,
    pub stats: RunStats,
    pub failure: Option<Failure>,
    pub checks: Option<CheckReport>,
}

impl From<&RunOutcome> for RunSummary {
    fn from(o: &RunOutcome) -> Self {
        Self {
            seed: o.seed,
            rounds: o.trace.rounds(),
            final_regret: o.trace.final_regret(),
            final_loss: o.trace.final_loss(),
            final_comparator_loss: o.trace.final_comparator_loss(),
            comparator: o.trace.comparator.clone(),
            stats: o.stats.clone(),
            failure: o.failure.clone(),
            checks: o.checks.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnerSummary {
    /// Statistics over runs that completed without failure.
    pub final_regret: RegretStats,
    pub bands: QuantileBands,
    pub runs: Vec<RunSummary>,
}

impl LearnerSummary {
    fn of(outcomes: &[RunOutcome]) -> Self {
        let ok: Vec<&RegretTrace> = outcomes.iter().filter(|o| o.failure.is_none()).map(|o| &o.trace).collect();
        let finals: Vec<f64> = ok.iter().map(|t| t.final_regret()).collect();
        Self { final_regret: RegretStats::of(&finals), bands: QuantileBands::of(&ok), runs: outcomes.iter().map(RunSummary::from).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub setting: &'static str,
    pub config_hash: String,
    pub horizon: usize,
    pub check: bool,
    pub learner: LearnerSummary,
    pub baseline: Option<LearnerSummary>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub runs: Vec<RunOutcome>,
    pub baseline: Vec<RunOutcome>,
    pub summary: Summary,
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_VIOLATION: u8 = 2;

impl ExperimentResult {
    pub fn failures(&self) -> impl Iterator<Item = &Failure> {
        self.runs.iter().chain(&self.baseline).filter_map(|o| o.failure.as_ref())
    }

    /// A failed seed is a violation in check-mode; otherwise it is only reported.
    pub fn exit_code(&self, check: bool) -> u8 {
        if check && self.failures().next().is_some() {
            EXIT_VIOLATION
        } else {
            EXIT_OK
        }
    }
}

/// The learner's own randomness, disjoint from the adversary's per-round streams.
pub fn learner_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng
}

fn comparator_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX - 1);
    rng
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let hash = cfg.hash();
    let seeds = cfg.seeds.clone();
    let (horizon, runs, baseline) = match &cfg.setting {
        Setting::Mab(s) => {
            let eta = mab_eta(s)?;
            let runs = opts.execution.map(seeds.clone(), |seed| run_mab(s, eta, &hash, seed, opts.check, cfg.check_comparators));
            let baseline = if s.baseline {
                opts.execution.map(seeds, |seed| run_exp3(s, &hash, seed))
            } else {
                Vec::new()
            };
            (s.horizon, runs, baseline)
        }
        Setting::Linbandit(s) => {
            let body = s.body.build()?;
            let env = LinearEnvironment::new(s.adversary.clone(), body.clone(), s.nonnegative)?;
            let eta = linear_eta(s, &body)?;
            let runs = opts.execution.map(seeds, |seed| run_linear(s, &env, eta, &hash, seed, opts.check, cfg.check_comparators));
            (s.horizon, runs, Vec::new())
        }
        Setting::Mdp(s) => {
            let mdp = s.mdp.build()?;
            s.adversary.validate(&mdp.layout)?;
            let eta = mdp_eta(s, &mdp)?;
            let runs = opts.execution.map(seeds, |seed| run_mdp(s, &mdp, eta, &hash, seed, opts.check));
            (s.horizon, runs, Vec::new())
        }
        Setting::Freedman(_) => {
            return Err(HarnessError::Config("freedman configs are run with validate-freedman".into()));
        }
    };
    let summary = Summary {
        name: cfg.name.clone(),
        setting: cfg.setting.label(),
        config_hash: hash,
        horizon,
        check: opts.check,
        learner: LearnerSummary::of(&runs),
        baseline: (!baseline.is_empty()).then(|| LearnerSummary::of(&baseline)),
    };
    Ok(ExperimentResult { runs, baseline, summary })
}

fn horizon_of(t: usize) -> Result<Horizon, HarnessError> {
    Ok(Horizon::new(t)?)
}

pub fn mab_eta(s: &MabSetting) -> Result<f64, HarnessError> {
    let d = s.arms as f64;
    Ok(match s.eta {
        EtaRule::Fixed { value } => value,
        EtaRule::Theory { best_loss } => {
            let l = best_loss.unwrap_or(s.horizon as f64);
            mab_default_eta(s.arms, horizon_of(s.horizon.max(2))?, s.delta, l)?.get()
        }
        EtaRule::SmallLoss { best_loss, cap } => (d * (1.0 / s.delta).ln() / best_loss.max(1.0)).sqrt().min(cap),
    })
}

pub fn linear_eta(s: &LinearSetting, body: &ConvexBody) -> Result<f64, HarnessError> {
    Ok(match s.eta {
        EtaRule::Fixed { value } => value,
        EtaRule::Theory { .. } => {
            let nu = make_barrier(body.clone()).nu();
            lb_default_eta(body.dim(), nu, horizon_of(s.horizon.max(2))?, s.delta)?.get()
        }
        EtaRule::SmallLoss { .. } => {
            return Err(HarnessError::Config("the linear learner has no comparator-loss step-size rule".into()))
        }
    })
}

pub fn mdp_eta(s: &MdpSetting, mdp: &LayeredMdp) -> Result<f64, HarnessError> {
    let layout = &mdp.layout;
    Ok(match s.eta {
        EtaRule::Fixed { value } => value,
        EtaRule::Theory { best_loss } => {
            mdp_default_eta(layout, horizon_of(s.horizon.max(2))?, Confidence::new(s.delta)?, best_loss)?.get()
        }
        EtaRule::SmallLoss { best_loss, cap } => {
            let x = layout.states() as f64;
            let a = layout.actions() as f64;
            (x * x * a / (best_loss.max(1.0) * (1.0 / s.delta).ln())).sqrt().min(cap)
        }
    })
}

fn empty(seed: u64, hash: &str, eta: f64) -> RunOutcome {
    RunOutcome {
        seed,
        trace: RegretTrace::from_losses(seed, hash.into(), "none".into(), Vec::new(), &[], Vec::new()),
        stats: RunStats { eta, ..RunStats::default() },
        failure: None,
        checks: None,
    }
}

fn random_simplex_point<R: Rng>(d: usize, floor: f64, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| floor + (1.0 - d as f64 * floor) * x / s).collect()
}

fn best_index(totals: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in totals.iter().enumerate() {
        if *v < totals[best] {
            best = i;
        }
    }
    best
}

fn column_totals(rows: &[Vec<f64>], width: usize) -> Vec<f64> {
    let mut totals = vec![0.0; width];
    for row in rows {
        for (acc, l) in totals.iter_mut().zip(row) {
            *acc += l;
        }
    }
    totals
}

pub fn run_mab(s: &MabSetting, eta: f64, hash: &str, seed: u64, check: bool, comparators: usize) -> RunOutcome {
    if s.horizon == 0 {
        return empty(seed, hash, eta);
    }
    let mut learner = match horizon_of(s.horizon)
        .and_then(|h| Ok(MabLearner::new(s.arms, h, LearningRate::new(eta)?)?))
    {
        Ok(l) => l,
        Err(e) => return setup_failure(seed, hash, eta, e),
    };
    let d = s.arms;
    let mut rng = learner_rng(seed);
    let mut pathwise = check.then(|| {
        let mut crng = comparator_rng(seed);
        let mut us: Vec<Vec<f64>> = (0..d).map(|i| learner.comparator(i)).collect();
        us.extend((0..comparators).map(|_| random_simplex_point(d, learner.floor(), &mut crng)));
        MabPathwise::new(us)
    });
    let mut table = Vec::with_capacity(s.horizon);
    let mut played = Vec::with_capacity(s.horizon);
    let mut incurred = Vec::with_capacity(s.horizon);
    let mut events = Vec::new();
    let mut max_eta_ratio = 1.0_f64;
    let mut step = |t: usize| -> hpbandit::Result<()> {
        let loss = s.adversary.loss(d, seed, t, &played)?;
        let arm = learner.sample(&mut rng);
        let est = learner.estimate(arm, loss[arm])?;
        if let Some(p) = pathwise.as_mut() {
            p.record(&learner, loss[arm], &est);
        }
        for ev in learner.update(&est)? {
            events.push(Event { round: t + 1, target: Some(ev.arm), eta: ev.eta });
        }
        if check {
            learner.check_invariants()?;
            let top = learner.rates().iter().fold(0.0_f64, |a, b| a.max(*b));
            max_eta_ratio = max_eta_ratio.max(top / eta);
        }
        incurred.push(loss[arm]);
        played.push(arm);
        table.push(loss);
        Ok(())
    };
    let mut failure = None;
    for t in 0..s.horizon {
        if let Err(e) = step(t) {
            failure = Some(Failure::at(t + 1, e));
            break;
        }
    }
    let best = best_index(&column_totals(&table, d));
    let comparator: Vec<f64> = table.iter().map(|row| row[best]).collect();
    let trace = RegretTrace::from_losses(seed, hash.into(), format!("arm {best}"), incurred, &comparator, events);
    let mut checks = None;
    if let (Some(p), None) = (&pathwise, &failure) {
        let bounds = p.bounds(&learner);
        let min_slack = bounds.iter().map(|b| b.slack()).fold(f64::INFINITY, f64::min);
        if min_slack < -PATHWISE_TOLERANCE {
            failure = Some(Failure::invariant(format!("pathwise regret bound violated by {}", -min_slack)));
        }
        checks = Some(CheckReport {
            rounds: s.horizon,
            comparators: bounds.len(),
            min_pathwise_slack: Some(min_slack),
            max_stability_ratio: None,
            min_bregman_slack: None,
            max_eta_ratio,
            max_increases: learner.increases().iter().copied().max().unwrap_or(0),
            increase_limit: learner.max_increases() as f64,
        });
    }
    let stats = RunStats { eta, increases: learner.increases().iter().sum(), ..RunStats::default() };
    RunOutcome { seed, trace, stats, failure, checks }
}

fn setup_failure(seed: u64, hash: &str, eta: f64, e: HarnessError) -> RunOutcome {
    let mut out = empty(seed, hash, eta);
    out.failure = Some(Failure { kind: FailureKind::Error, round: 0, message: e.to_string() });
    out
}

pub fn run_exp3(s: &MabSetting, hash: &str, seed: u64) -> RunOutcome {
    let eta = Exp3::default_eta(s.arms, s.horizon);
    if s.horizon == 0 {
        return empty(seed, hash, eta);
    }
    let d = s.arms;
    let mut learner = Exp3::new(d, eta);
    let mut rng = learner_rng(seed);
    let mut table = Vec::with_capacity(s.horizon);
    let mut played = Vec::with_capacity(s.horizon);
    let mut incurred = Vec::with_capacity(s.horizon);
    let mut failure = None;
    for t in 0..s.horizon {
        let loss = match s.adversary.loss(d, seed, t, &played) {
            Ok(l) => l,
            Err(e) => {
                failure = Some(Failure::at(t + 1, e));
                break;
            }
        };
        let arm = learner.sample(&mut rng);
        learner.update(arm, loss[arm]);
        incurred.push(loss[arm]);
        played.push(arm);
        table.push(loss);
    }
    let best = best_index(&column_totals(&table, d));
    let comparator: Vec<f64> = table.iter().map(|row| row[best]).collect();
    let trace = RegretTrace::from_losses(seed, hash.into(), format!("arm {best}"), incurred, &comparator, Vec::new());
    RunOutcome { seed, trace, stats: RunStats { eta, ..RunStats::default() }, failure, checks: None }
}

/// Uniform-radius point of the body along a random direction from `pole`.
fn random_body_point<R: Rng>(body: &ConvexBody, pole: &DVector<f64>, rng: &mut R) -> hpbandit::Result<DVector<f64>> {
    let v = DVector::from_fn(body.dim(), |_, _| StandardNormal.sample(rng));
    let g = match body.minkowski(pole, &(pole + &v)) {
        Err(hpbandit::Error::OutsideBody(g)) => g,
        other => other?,
    };
    let r: f64 = rng.random();
    Ok(pole + v * (r / g))
}

pub fn run_linear(
    s: &LinearSetting,
    env: &LinearEnvironment,
    eta: f64,
    hash: &str,
    seed: u64,
    check: bool,
    comparators: usize,
) -> RunOutcome {
    if s.horizon == 0 {
        return empty(seed, hash, eta);
    }
    let body = env.normalizer().body().clone();
    let mut learner = match horizon_of(s.horizon)
        .and_then(|h| Ok(LinearLearner::new(body.clone(), h, LearningRate::new(eta)?)?))
    {
        Ok(l) => l,
        Err(e) => return setup_failure(seed, hash, eta, e),
    };
    let mut rng = learner_rng(seed);
    let mut pathwise = None;
    if check {
        let mut crng = comparator_rng(seed);
        let mut us = Vec::with_capacity(comparators);
        for _ in 0..comparators {
            match random_body_point(&body, learner.center(), &mut crng) {
                Ok(u) => us.push(learner.shrink_comparator(&u)),
                Err(e) => return setup_failure(seed, hash, eta, e.into()),
            }
        }
        pathwise = Some(LinearPathwise::new(us));
    }
    let mut losses: Vec<DVector<f64>> = Vec::with_capacity(s.horizon);
    let mut played: Vec<DVector<f64>> = Vec::with_capacity(s.horizon);
    let mut incurred = Vec::with_capacity(s.horizon);
    let mut events = Vec::new();
    let mut stats = RunStats { eta, ..RunStats::default() };
    let mut step = |t: usize| -> hpbandit::Result<()> {
        let loss = env.loss(seed, t, &played)?;
        stats.rescaled_losses += usize::from(loss.rescaled);
        let action = learner.sample(&mut rng)?;
        let observed = action.point.dot(&loss.loss);
        let est = learner.estimate(&action, observed)?;
        if let Some(p) = pathwise.as_mut() {
            p.before_update(&learner, &est, observed)?;
        }
        let out = learner.update(&est)?;
        stats.max_solver_iterations = stats.max_solver_iterations.max(out.solver_iterations);
        if let Some(p) = pathwise.as_mut() {
            p.after_update(&learner, &out);
        }
        if out.increased {
            events.push(Event { round: t + 1, target: None, eta: learner.eta() });
        }
        if check {
            learner.check_invariants()?;
        }
        incurred.push(observed);
        played.push(action.point);
        losses.push(loss.loss);
        Ok(())
    };
    let mut failure = None;
    for t in 0..s.horizon {
        if let Err(e) = step(t) {
            failure = Some(Failure::at(t + 1, e));
            break;
        }
    }
    let total = losses.iter().fold(DVector::zeros(body.dim()), |acc, l| acc + l);
    let (comparator, label) = match body.minimize_linear(&total) {
        Ok((_, u)) => (losses.iter().map(|l| l.dot(&u)).collect::<Vec<_>>(), format!("{:?}", u.as_slice())),
        Err(e) => {
            failure.get_or_insert(Failure::at(0, e));
            (vec![0.0; losses.len()], "none".into())
        }
    };
    let trace = RegretTrace::from_losses(seed, hash.into(), label, incurred, &comparator, events);
    stats.increases = learner.schedule().len() - 1;
    let mut checks = None;
    if let (Some(p), None) = (&pathwise, &failure) {
        let bounds = p.bounds(&learner);
        let min_slack = bounds.iter().map(|b| b.slack()).fold(f64::INFINITY, f64::min);
        if p.stability_violations > 0 {
            failure = Some(Failure::invariant(format!("stability bound violated in {} rounds", p.stability_violations)));
        } else if p.bregman_violations > 0 {
            failure = Some(Failure::invariant(format!("divergence lower bound violated {} times", p.bregman_violations)));
        } else if min_slack < -PATHWISE_TOLERANCE {
            failure = Some(Failure::invariant(format!("pathwise regret bound violated by {}", -min_slack)));
        }
        checks = Some(CheckReport {
            rounds: s.horizon,
            comparators: bounds.len(),
            min_pathwise_slack: Some(min_slack),
            max_stability_ratio: Some(p.max_stability_ratio),
            min_bregman_slack: Some(p.min_bregman_slack),
            max_eta_ratio: learner.eta() / eta,
            max_increases: learner.schedule().len(),
            increase_limit: learner.max_schedule_len(),
        });
    }
    RunOutcome { seed, trace, stats, failure, checks }
}

pub fn run_mdp(s: &MdpSetting, mdp: &LayeredMdp, eta: f64, hash: &str, seed: u64, check: bool) -> RunOutcome {
    if s.horizon == 0 {
        return empty(seed, hash, eta);
    }
    let layout = &mdp.layout;
    let kernel = &mdp.kernel;
    let mut learner = match horizon_of(s.horizon).and_then(|h| {
        Ok(MdpLearner::new(layout.clone(), h, LearningRate::new(eta)?, Confidence::new(s.delta)?)?)
    }) {
        Ok(l) => l,
        Err(e) => return setup_failure(seed, hash, eta, e),
    };
    let floored = construct_p0(layout, kernel, learner.horizon());
    let mut rng = learner_rng(seed);
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(s.horizon);
    let mut visited: Vec<Vec<usize>> = Vec::with_capacity(s.horizon);
    let mut incurred = Vec::with_capacity(s.horizon);
    let mut events = Vec::new();
    let mut stats = RunStats { eta, kernel_misses: Some(0), floored_kernel_misses: Some(0), ..RunStats::default() };
    let mut max_eta_ratio = 1.0_f64;
    let mut step = |t: usize| -> hpbandit::Result<()> {
        let loss = s.adversary.loss(layout, seed, t, &visited)?;
        let w = layout.pair_marginals(&layout.occupancy(kernel, learner.policy()));
        incurred.push(w.iter().zip(&loss).map(|(w, l)| w * l).sum::<f64>());
        let trajectory = layout.run_episode(kernel, learner.policy(), &mut rng);
        let pairs: Vec<usize> = trajectory.iter().map(|st| layout.pair(st.state, st.action)).collect();
        let observed: Vec<f64> = pairs.iter().map(|p| loss[*p]).collect();
        let out = learner.learn(&trajectory, &observed)?;
        stats.max_solver_iterations = stats.max_solver_iterations.max(out.solver_iterations);
        if out.new_epoch {
            let set = learner.confidence();
            if !set.contains(layout, kernel) {
                *stats.kernel_misses.get_or_insert(0) += 1;
            }
            if !set.contains(layout, &floored) {
                *stats.floored_kernel_misses.get_or_insert(0) += 1;
            }
        }
        for inc in out.increases {
            events.push(Event { round: t + 1, target: Some(inc.pair), eta: inc.eta });
        }
        if check {
            learner.check_invariants()?;
            learner.check_against(kernel)?;
            let top = learner.rates().iter().fold(0.0_f64, |a, b| a.max(*b));
            max_eta_ratio = max_eta_ratio.max(top / eta);
        }
        visited.push(pairs);
        table.push(loss);
        Ok(())
    };
    let mut failure = None;
    for t in 0..s.horizon {
        if let Err(e) = step(t) {
            failure = Some(Failure::at(t + 1, e));
            break;
        }
    }
    incurred.truncate(table.len());
    let totals = column_totals(&table, layout.pairs());
    let (best, _) = layout.best_policy(kernel, &totals);
    let w_best = layout.pair_marginals(&layout.occupancy(kernel, &best));
    let comparator: Vec<f64> = table.iter().map(|l| w_best.iter().zip(l).map(|(w, l)| w * l).sum()).collect();
    let trace = RegretTrace::from_losses(seed, hash.into(), "optimal deterministic policy".into(), incurred, &comparator, events);
    stats.increases = learner.increases().iter().sum();
    stats.epochs = Some(learner.epoch());
    let checks = (check && failure.is_none()).then(|| CheckReport {
        rounds: s.horizon,
        comparators: 0,
        min_pathwise_slack: None,
        max_stability_ratio: None,
        min_bregman_slack: None,
        max_eta_ratio,
        max_increases: learner.increases().iter().copied().max().unwrap_or(0),
        increase_limit: learner.max_increases() as f64,
    });
    RunOutcome { seed, trace, stats, failure, checks }
}
