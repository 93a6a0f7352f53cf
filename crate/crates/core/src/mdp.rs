//! Adversarial episodic MDPs with unknown transitions: occupancy measures, confidence sets,
//! upper occupancy bounds, and the log-barrier policy-search learner.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::omd::{self, Equalities, LinearInequalities, ProximalProblem, SolverSettings, WeightedLogBarrier};
use crate::types::{check_loss, Confidence, Horizon, LearningRate};

const ROW_TOL: f64 = 1e-9;

/// Index bookkeeping for a layered state space.
///
/// States are numbered consecutively layer by layer; the first and last layers hold one state.
/// A pair is a (non-terminal state, action); a triple adds a successor in the next layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    layer_sizes: Vec<usize>,
    actions: usize,
    layer_start: Vec<usize>,
    layer_of: Vec<usize>,
    triple_start: Vec<usize>,
    triples: usize,
}

impl Layout {
    pub fn new(layer_sizes: Vec<usize>, actions: usize) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidParameter("an MDP needs at least two layers".into()));
        }
        if layer_sizes[0] != 1 || *layer_sizes.last().unwrap() != 1 {
            return Err(Error::InvalidParameter("first and last layers must hold a single state".into()));
        }
        if layer_sizes.iter().any(|n| *n == 0) || actions == 0 {
            return Err(Error::InvalidParameter("layers and action set must be nonempty".into()));
        }
        let mut layer_start = Vec::with_capacity(layer_sizes.len() + 1);
        let mut layer_of = Vec::new();
        let mut acc = 0;
        for (k, n) in layer_sizes.iter().enumerate() {
            layer_start.push(acc);
            layer_of.extend(std::iter::repeat_n(k, *n));
            acc += n;
        }
        layer_start.push(acc);
        let nonterminal = acc - 1;
        let mut triple_start = Vec::with_capacity(nonterminal * actions + 1);
        let mut t = 0;
        for x in 0..nonterminal {
            let next = layer_sizes[layer_of[x] + 1];
            for _ in 0..actions {
                triple_start.push(t);
                t += next;
            }
        }
        triple_start.push(t);
        Ok(Self { layer_sizes, actions, layer_start, layer_of, triple_start, triples: t })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    /// Number of transitions per episode.
    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn states(&self) -> usize {
        self.layer_start[self.layer_sizes.len()]
    }

    pub fn pairs(&self) -> usize {
        (self.states() - 1) * self.actions
    }

    pub fn triples(&self) -> usize {
        self.triples
    }

    pub fn layer_of(&self, x: usize) -> usize {
        self.layer_of[x]
    }

    pub fn layer(&self, k: usize) -> std::ops::Range<usize> {
        self.layer_start[k]..self.layer_start[k + 1]
    }

    pub fn pair(&self, x: usize, a: usize) -> usize {
        x * self.actions + a
    }

    pub fn pair_state(&self, p: usize) -> usize {
        p / self.actions
    }

    pub fn pair_action(&self, p: usize) -> usize {
        p % self.actions
    }

    /// Successor states of a non-terminal state.
    pub fn successors(&self, x: usize) -> std::ops::Range<usize> {
        self.layer(self.layer_of[x] + 1)
    }

    /// Range of triple indices belonging to pair `p`, ordered like `successors`.
    pub fn pair_triples(&self, p: usize) -> std::ops::Range<usize> {
        self.triple_start[p]..self.triple_start[p + 1]
    }

    pub fn triple(&self, x: usize, a: usize, next: usize) -> usize {
        let p = self.pair(x, a);
        self.triple_start[p] + (next - self.successors(x).start)
    }

    /// Number of deterministic policies, saturating.
    pub fn deterministic_policies(&self) -> usize {
        let mut n: usize = 1;
        for _ in 0..self.states() - 1 {
            n = n.saturating_mul(self.actions);
        }
        n
    }

    /// Per-pair marginals `w(x, a) = sum_x' w(x, a, x')`.
    pub fn pair_marginals(&self, w: &DVector<f64>) -> Vec<f64> {
        (0..self.pairs()).map(|p| w.rows_range(self.pair_triples(p)).sum()).collect()
    }

    /// Largest violation of nonnegativity, per-layer normalization, and flow conservation.
    pub fn occupancy_violation(&self, w: &DVector<f64>) -> f64 {
        if w.len() != self.triples {
            return f64::INFINITY;
        }
        let mut worst = w.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
        let mut inflow = vec![0.0; self.states()];
        let mut outflow = vec![0.0; self.states()];
        let mut layer_mass = vec![0.0; self.depth()];
        for x in 0..self.states() - 1 {
            for a in 0..self.actions {
                for (j, y) in self.successors(x).enumerate() {
                    let v = w[self.triple_start[self.pair(x, a)] + j];
                    outflow[x] += v;
                    inflow[y] += v;
                    layer_mass[self.layer_of[x]] += v;
                }
            }
        }
        for m in layer_mass {
            worst = worst.max((m - 1.0).abs());
        }
        for x in 1..self.states() - 1 {
            worst = worst.max((inflow[x] - outflow[x]).abs());
        }
        worst
    }

    /// Occupancy measure of `policy` under `kernel`, by forward dynamic programming.
    pub fn occupancy(&self, kernel: &Kernel, policy: &Policy) -> DVector<f64> {
        let mut reach = vec![0.0; self.states()];
        reach[0] = 1.0;
        let mut w = DVector::zeros(self.triples);
        for x in 0..self.states() - 1 {
            for a in 0..self.actions {
                let p = self.pair(x, a);
                let mass = reach[x] * policy.prob(x, a);
                for (j, y) in self.successors(x).enumerate() {
                    let v = mass * kernel.rows[p][j];
                    w[self.triple_start[p] + j] = v;
                    reach[y] += v;
                }
            }
        }
        w
    }

    /// The policy induced by an occupancy measure.
    pub fn policy_of(&self, w: &DVector<f64>) -> Result<Policy> {
        let marg = self.pair_marginals(w);
        let rows = (0..self.states() - 1)
            .map(|x| {
                let total: f64 = (0..self.actions).map(|a| marg[self.pair(x, a)]).sum();
                if !(total > 0.0) {
                    return Err(Error::InvalidParameter(format!("state {x} has zero occupancy")));
                }
                Ok((0..self.actions).map(|a| marg[self.pair(x, a)] / total).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(Policy { rows })
    }

    /// The transition kernel induced by an occupancy measure.
    pub fn kernel_of(&self, w: &DVector<f64>) -> Result<Kernel> {
        let rows = (0..self.pairs())
            .map(|p| {
                let r = self.pair_triples(p);
                let total: f64 = w.rows_range(r.clone()).sum();
                if !(total > 0.0) {
                    return Err(Error::InvalidParameter(format!("pair {p} has zero occupancy")));
                }
                Ok(r.map(|i| w[i] / total).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(Kernel { rows })
    }

    /// Equality constraints describing valid occupancy measures.
    pub fn occupancy_equalities(&self) -> Result<Equalities> {
        let interior = self.states() - 2;
        let rows = self.depth() + interior;
        let mut e = DMatrix::zeros(rows, self.triples);
        let mut rhs = DVector::zeros(rows);
        for x in 0..self.states() - 1 {
            let k = self.layer_of[x];
            for a in 0..self.actions {
                for (j, y) in self.successors(x).enumerate() {
                    let i = self.triple_start[self.pair(x, a)] + j;
                    e[(k, i)] = 1.0;
                    if x >= 1 {
                        e[(self.depth() + x - 1, i)] -= 1.0;
                    }
                    if y < self.states() - 1 {
                        e[(self.depth() + y - 1, i)] += 1.0;
                    }
                }
            }
        }
        for k in 0..self.depth() {
            rhs[k] = 1.0;
        }
        Equalities::new(e, rhs)
    }

    /// Draws one episode; returns the visited pairs and successor states.
    pub fn run_episode<R: Rng + ?Sized>(&self, kernel: &Kernel, policy: &Policy, rng: &mut R) -> Vec<Step> {
        let mut x = 0;
        let mut out = Vec::with_capacity(self.depth());
        while x < self.states() - 1 {
            let a = draw(&policy.rows[x], rng);
            let p = self.pair(x, a);
            let j = draw(&kernel.rows[p], rng);
            let next = self.successors(x).start + j;
            out.push(Step { state: x, action: a, next });
            x = next;
        }
        out
    }

    pub fn uniform_policy(&self) -> Policy {
        Policy { rows: vec![vec![1.0 / self.actions as f64; self.actions]; self.states() - 1] }
    }

    pub fn uniform_kernel(&self) -> Kernel {
        Kernel {
            rows: (0..self.pairs())
                .map(|p| {
                    let n = self.pair_triples(p).len();
                    vec![1.0 / n as f64; n]
                })
                .collect(),
        }
    }

    /// A kernel with independent uniform-then-normalized rows.
    pub fn random_kernel<R: Rng + ?Sized>(&self, rng: &mut R) -> Kernel {
        Kernel {
            rows: (0..self.pairs())
                .map(|p| {
                    let n = self.pair_triples(p).len();
                    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
                    let s: f64 = raw.iter().sum();
                    raw.into_iter().map(|v| v / s).collect()
                })
                .collect(),
        }
    }

    pub fn random_policy<R: Rng + ?Sized>(&self, rng: &mut R) -> Policy {
        Policy {
            rows: (0..self.states() - 1)
                .map(|_| {
                    let raw: Vec<f64> = (0..self.actions).map(|_| rng.random::<f64>() + 1e-3).collect();
                    let s: f64 = raw.iter().sum();
                    raw.into_iter().map(|v| v / s).collect()
                })
                .collect(),
        }
    }

    /// Deterministic policy minimizing `<w^{kernel, pi}, loss>` by backward induction.
    pub fn best_policy(&self, kernel: &Kernel, loss: &[f64]) -> (Policy, f64) {
        let mut value = vec![0.0; self.states()];
        let mut choice = vec![0; self.states() - 1];
        for x in (0..self.states() - 1).rev() {
            let mut best = f64::INFINITY;
            for a in 0..self.actions {
                let p = self.pair(x, a);
                let q = loss[p] + self.successors(x).enumerate().map(|(j, y)| kernel.rows[p][j] * value[y]).sum::<f64>();
                if q < best {
                    best = q;
                    choice[x] = a;
                }
            }
            value[x] = best;
        }
        (Policy::deterministic(&choice, self.actions), value[0])
    }
}

fn draw<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}

/// One transition of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub next: usize,
}

/// Transition probabilities, one row per pair over the next layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    rows: Vec<Vec<f64>>,
}

impl Kernel {
    pub fn new(layout: &Layout, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != layout.pairs() {
            return Err(Error::DimensionMismatch { expected: layout.pairs(), got: rows.len() });
        }
        for (p, row) in rows.iter().enumerate() {
            let n = layout.pair_triples(p).len();
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            if row.iter().any(|v| !(*v >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidParameter(format!("transition row {p} is not a distribution")));
            }
        }
        Ok(Self { rows })
    }

    pub fn row(&self, p: usize) -> &[f64] {
        &self.rows[p]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Action probabilities per non-terminal state.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    rows: Vec<Vec<f64>>,
}

impl Policy {
    pub fn new(layout: &Layout, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != layout.states() - 1 {
            return Err(Error::DimensionMismatch { expected: layout.states() - 1, got: rows.len() });
        }
        for row in &rows {
            if row.len() != layout.actions() || row.iter().any(|v| !(*v >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidParameter("policy row is not a distribution".into()));
            }
        }
        Ok(Self { rows })
    }

    pub fn deterministic(choice: &[usize], actions: usize) -> Self {
        Self {
            rows: choice
                .iter()
                .map(|c| (0..actions).map(|a| if a == *c { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    pub fn prob(&self, x: usize, a: usize) -> f64 {
        self.rows[x][a]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MdpFile {
    layers: Vec<Vec<usize>>,
    actions: usize,
    transitions: Vec<Vec<Vec<f64>>>,
}

/// A layered MDP with known transitions, used to simulate the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredMdp {
    pub layout: Layout,
    pub kernel: Kernel,
}

impl LayeredMdp {
    /// Parses `{"layers": [[state ids]...], "actions": n, "transitions": [state][action][next]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: MdpFile = serde_json::from_str(text)?;
        let mut expect = 0;
        for layer in &f.layers {
            for id in layer {
                if *id != expect {
                    return Err(Error::InvalidParameter("state ids must be consecutive in layer order".into()));
                }
                expect += 1;
            }
        }
        let layout = Layout::new(f.layers.iter().map(Vec::len).collect(), f.actions)?;
        if f.transitions.len() != layout.states() - 1 {
            return Err(Error::DimensionMismatch { expected: layout.states() - 1, got: f.transitions.len() });
        }
        let mut rows = Vec::with_capacity(layout.pairs());
        for per_state in f.transitions {
            if per_state.len() != layout.actions() {
                return Err(Error::DimensionMismatch { expected: layout.actions(), got: per_state.len() });
            }
            rows.extend(per_state);
        }
        let kernel = Kernel::new(&layout, rows)?;
        Ok(Self { layout, kernel })
    }

    pub fn to_json(&self) -> String {
        let l = &self.layout;
        let f = MdpFile {
            layers: (0..l.layer_sizes.len()).map(|k| l.layer(k).collect()).collect(),
            actions: l.actions,
            transitions: (0..l.states() - 1)
                .map(|x| (0..l.actions).map(|a| self.kernel.rows[l.pair(x, a)].clone()).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&f).expect("plain data serializes")
    }

    pub fn random<R: Rng + ?Sized>(layer_sizes: Vec<usize>, actions: usize, rng: &mut R) -> Result<Self> {
        let layout = Layout::new(layer_sizes, actions)?;
        let kernel = layout.random_kernel(rng);
        Ok(Self { layout, kernel })
    }
}

/// Visit counters for pairs and observed transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitCounts {
    pub pairs: Vec<u64>,
    pub transitions: Vec<u64>,
}

impl VisitCounts {
    pub fn zeros(layout: &Layout) -> Self {
        Self { pairs: vec![0; layout.pairs()], transitions: vec![0; layout.triples()] }
    }
}

/// Per-entry box around the empirical kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceSet {
    mean: Vec<f64>,
    radius: Vec<f64>,
    visits: Vec<u64>,
}

impl ConfidenceSet {
    /// Builds the box from counters; pairs never visited get the whole unit interval.
    pub fn from_counts(layout: &Layout, counts: &VisitCounts, horizon: Horizon, delta: Confidence) -> Self {
        let log = (horizon.as_f64() * layout.states() as f64 * layout.actions() as f64 / delta.get()).ln();
        let mut mean = vec![0.0; layout.triples()];
        let mut radius = vec![0.0; layout.triples()];
        for p in 0..layout.pairs() {
            let n = counts.pairs[p];
            let denom = (n.saturating_sub(1)).max(1) as f64;
            for i in layout.pair_triples(p) {
                let m = counts.transitions[i] as f64 / (n.max(1)) as f64;
                mean[i] = m;
                radius[i] = 4.0 * (m * log / denom).sqrt() + 28.0 * log / (3.0 * denom);
            }
        }
        Self { mean, radius, visits: counts.pairs.clone() }
    }

    /// The degenerate set containing exactly `kernel`.
    pub fn exact(layout: &Layout, kernel: &Kernel) -> Self {
        let mut mean = vec![0.0; layout.triples()];
        for p in 0..layout.pairs() {
            for (j, i) in layout.pair_triples(p).enumerate() {
                mean[i] = kernel.rows[p][j];
            }
        }
        Self { radius: vec![0.0; mean.len()], mean, visits: vec![u64::MAX; layout.pairs()] }
    }

    /// A set with explicit centers and radii.
    pub fn with_radius(layout: &Layout, kernel: &Kernel, radius: Vec<f64>) -> Result<Self> {
        if radius.len() != layout.triples() || radius.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::InvalidParameter("radii must be non-negative, one per triple".into()));
        }
        let mut s = Self::exact(layout, kernel);
        s.radius = radius;
        Ok(s)
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.mean[i]
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.radius[i]
    }

    pub fn lower(&self, i: usize) -> f64 {
        (self.mean[i] - self.radius[i]).max(0.0)
    }

    pub fn upper(&self, i: usize) -> f64 {
        (self.mean[i] + self.radius[i]).min(1.0)
    }

    fn unvisited(&self, p: usize) -> bool {
        self.visits[p] == 0
    }

    pub fn contains(&self, layout: &Layout, kernel: &Kernel) -> bool {
        (0..layout.pairs()).all(|p| {
            layout
                .pair_triples(p)
                .enumerate()
                .all(|(j, i)| (kernel.rows[p][j] - self.mean[i]).abs() <= self.radius[i] || self.unvisited(p))
        })
    }

    /// `max <p, f>` over the box intersected with the simplex, by water-filling.
    fn max_linear(&self, triples: std::ops::Range<usize>, f: &[f64]) -> Result<f64> {
        let lo: Vec<f64> = triples.clone().map(|i| self.lower(i)).collect();
        let hi: Vec<f64> = triples.clone().map(|i| self.upper(i)).collect();
        let slo: f64 = lo.iter().sum();
        let shi: f64 = hi.iter().sum();
        if slo > 1.0 + 1e-9 || shi < 1.0 - 1e-9 {
            return Err(Error::Infeasible);
        }
        let mut order: Vec<usize> = (0..f.len()).collect();
        order.sort_by(|a, b| f[*b].total_cmp(&f[*a]).then(a.cmp(b)));
        let mut residual = (1.0 - slo).max(0.0);
        let mut value: f64 = lo.iter().zip(f).map(|(p, v)| p * v).sum();
        for j in order {
            if residual <= 0.0 {
                break;
            }
            let add = (hi[j] - lo[j]).min(residual);
            value += add * f[j];
            residual -= add;
        }
        Ok(value)
    }

    /// Largest probability of reaching each state over kernels in the set, under `policy`.
    pub fn reach_upper(&self, layout: &Layout, policy: &Policy, target: usize) -> Result<f64> {
        let k = layout.layer_of(target);
        let mut f = vec![0.0; layout.states()];
        f[target] = 1.0;
        for layer in (0..k).rev() {
            for x in layout.layer(layer) {
                let succ = layout.successors(x);
                let mut v = 0.0;
                for a in 0..layout.actions() {
                    let pa = policy.prob(x, a);
                    if pa == 0.0 {
                        continue;
                    }
                    let p = layout.pair(x, a);
                    v += pa * self.max_linear(layout.pair_triples(p), &f[succ.clone()])?;
                }
                f[x] = v;
            }
        }
        Ok(f[0])
    }

    /// Upper occupancy bound of one pair.
    pub fn comp_uob(&self, layout: &Layout, policy: &Policy, x: usize, a: usize) -> Result<f64> {
        Ok(policy.prob(x, a) * self.reach_upper(layout, policy, x)?)
    }

    /// Upper occupancy bounds of every pair.
    pub fn upper_occupancy(&self, layout: &Layout, policy: &Policy) -> Result<Vec<f64>> {
        let mut phi = vec![0.0; layout.pairs()];
        for x in 0..layout.states() - 1 {
            let reach = self.reach_upper(layout, policy, x)?;
            for a in 0..layout.actions() {
                phi[layout.pair(x, a)] = policy.prob(x, a) * reach;
            }
        }
        Ok(phi)
    }

    /// Linear constraints `lower w(x,a) <= w(x,a,x') <= upper w(x,a)` plus the entry floor.
    fn constraints(&self, layout: &Layout, floor: f64) -> Result<LinearInequalities> {
        let n = layout.triples();
        let mut rows: Vec<(Vec<(usize, f64)>, f64)> = (0..n).map(|i| (vec![(i, -1.0)], -floor)).collect();
        for p in 0..layout.pairs() {
            let r = layout.pair_triples(p);
            if r.len() < 2 {
                continue;
            }
            for i in r.clone() {
                let lo = self.lower(i);
                let hi = self.upper(i);
                if lo > 0.0 {
                    let mut row: Vec<(usize, f64)> = r.clone().map(|j| (j, lo)).collect();
                    row[i - r.start].1 -= 1.0;
                    rows.push((row, 0.0));
                }
                if hi < 1.0 {
                    let mut row: Vec<(usize, f64)> = r.clone().map(|j| (j, -hi)).collect();
                    row[i - r.start].1 += 1.0;
                    rows.push((row, 0.0));
                }
            }
        }
        let mut g = DMatrix::zeros(rows.len(), n);
        let mut h = DVector::zeros(rows.len());
        for (k, (row, rhs)) in rows.into_iter().enumerate() {
            for (j, v) in row {
                g[(k, j)] = v;
            }
            h[k] = rhs;
        }
        LinearInequalities::new(g, h)
    }

    /// A kernel strictly inside the set, mixing the empirical rows toward uniform.
    fn interior_kernel(&self, layout: &Layout) -> Kernel {
        Kernel {
            rows: (0..layout.pairs())
                .map(|p| {
                    let r = layout.pair_triples(p);
                    let n = r.len() as f64;
                    if self.unvisited(p) {
                        return vec![1.0 / n; r.len()];
                    }
                    let min_radius = r.clone().map(|i| self.radius[i]).fold(f64::INFINITY, f64::min);
                    let alpha = (0.5 * min_radius).min(0.5);
                    r.map(|i| (1.0 - alpha) * self.mean[i] + alpha / n).collect()
                })
                .collect(),
        }
    }
}

/// Raises every entry of `kernel` below `1/(T |X|)` to that value, taking the mass from the
/// largest entry of the row.
pub fn construct_p0(layout: &Layout, kernel: &Kernel, horizon: Horizon) -> Kernel {
    let floor = 1.0 / (horizon.as_f64() * layout.states() as f64);
    Kernel {
        rows: kernel
            .rows
            .iter()
            .map(|row| {
                let mut out = row.clone();
                let top = (0..row.len()).max_by(|a, b| row[*a].total_cmp(&row[*b]).then(b.cmp(a))).unwrap_or(0);
                let mut moved = 0.0;
                for (j, v) in out.iter_mut().enumerate() {
                    if j != top && *v < floor {
                        moved += floor - *v;
                        *v = floor;
                    }
                }
                out[top] -= moved;
                out
            })
            .collect(),
    }
}

/// `(1 - 1/T) w* + (1/(T|A|)) sum_a w^{P0, pi_a}` with `pi_a` always playing `a`.
pub fn comparator_u(layout: &Layout, kernel: &Kernel, best: &Policy, horizon: Horizon) -> DVector<f64> {
    let t = horizon.as_f64();
    let p0 = construct_p0(layout, kernel, horizon);
    let mut u = layout.occupancy(kernel, best) * (1.0 - 1.0 / t);
    for a in 0..layout.actions() {
        let pi = Policy::deterministic(&vec![a; layout.states() - 1], layout.actions());
        u += layout.occupancy(&p0, &pi) / (t * layout.actions() as f64);
    }
    u
}

/// `min{ sqrt(|X|^2 |A| / (L ln(1/delta))), 1/(280 C ln(C |X||A|/delta) ln T) }`, `b = T^3 |X|^2 |A|`.
pub fn mdp_default_eta(layout: &Layout, horizon: Horizon, delta: Confidence, best_loss: Option<f64>) -> Result<LearningRate> {
    let x = layout.states() as f64;
    let a = layout.actions() as f64;
    let t = horizon.as_f64();
    let l = best_loss.unwrap_or(layout.depth() as f64 * t).max(1.0);
    let b = t.powi(3) * x * x * a;
    let c = crate::freedman::range_constant(b, t);
    let first = (x * x * a / (l * (1.0 / delta.get()).ln())).sqrt();
    let second = 1.0 / (280.0 * c * (c * x * a / delta.get()).ln() * t.ln());
    LearningRate::new(first.min(second))
}

/// Step-size increase for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairIncrease {
    pub pair: usize,
    pub eta: f64,
}

#[derive(Debug, Clone)]
pub struct MdpUpdate {
    pub new_epoch: bool,
    pub increases: Vec<PairIncrease>,
    pub solver_iterations: usize,
    pub solver_decrement: f64,
}

/// Log-barrier policy search over occupancy measures with upper occupancy bounds.
#[derive(Debug, Clone)]
pub struct MdpLearner {
    layout: Layout,
    horizon: Horizon,
    delta: Confidence,
    eta0: f64,
    kappa: f64,
    floor: f64,
    occupancy: DVector<f64>,
    policy: Policy,
    phi: Vec<f64>,
    rates: Vec<f64>,
    thresholds: Vec<f64>,
    increases: Vec<usize>,
    counts: VisitCounts,
    epoch_counts: Vec<u64>,
    confidence: ConfidenceSet,
    constraints: LinearInequalities,
    start: DVector<f64>,
    equalities: Equalities,
    epoch: usize,
    round: usize,
    settings: SolverSettings,
}

impl MdpLearner {
    pub fn new(layout: Layout, horizon: Horizon, eta: LearningRate, delta: Confidence) -> Result<Self> {
        let x = layout.states() as f64;
        let a = layout.actions() as f64;
        let floor = 1.0 / (horizon.as_f64().powi(3) * x * x * a);
        let mut occupancy = DVector::zeros(layout.triples());
        let mut thresholds = vec![0.0; layout.pairs()];
        for p in 0..layout.pairs() {
            let s = layout.pair_state(p);
            let k = layout.layer_of(s);
            let width = layout.layer_sizes()[k] as f64 * a;
            thresholds[p] = 2.0 * width;
            for i in layout.pair_triples(p) {
                occupancy[i] = 1.0 / (width * layout.layer_sizes()[k + 1] as f64);
            }
        }
        let counts = VisitCounts::zeros(&layout);
        let confidence = ConfidenceSet::from_counts(&layout, &counts, horizon, delta);
        let policy = layout.policy_of(&occupancy)?;
        let phi = confidence.upper_occupancy(&layout, &policy)?;
        let constraints = confidence.constraints(&layout, floor)?;
        let start = layout.occupancy(&confidence.interior_kernel(&layout), &layout.uniform_policy());
        let equalities = layout.occupancy_equalities()?;
        Ok(Self {
            kappa: (1.0 / (7.0 * horizon.ln())).exp(),
            rates: vec![eta.get(); layout.pairs()],
            increases: vec![0; layout.pairs()],
            epoch_counts: vec![0; layout.pairs()],
            eta0: eta.get(),
            layout,
            horizon,
            delta,
            floor,
            occupancy,
            policy,
            phi,
            thresholds,
            counts,
            confidence,
            constraints,
            start,
            equalities,
            epoch: 1,
            round: 1,
            settings: SolverSettings::default(),
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn occupancy(&self) -> &DVector<f64> {
        &self.occupancy
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.phi
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn increases(&self) -> &[usize] {
        &self.increases
    }

    pub fn confidence(&self) -> &ConfidenceSet {
        &self.confidence
    }

    pub fn counts(&self) -> &VisitCounts {
        &self.counts
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn initial_eta(&self) -> f64 {
        self.eta0
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `l(x,a) 1{visited} / phi(x,a)`, with `losses[k]` the loss observed at step `k`.
    pub fn estimate(&self, trajectory: &[Step], losses: &[f64]) -> Result<Vec<f64>> {
        if trajectory.len() != losses.len() {
            return Err(Error::DimensionMismatch { expected: trajectory.len(), got: losses.len() });
        }
        let mut est = vec![0.0; self.layout.pairs()];
        for (s, l) in trajectory.iter().zip(losses) {
            check_loss(*l)?;
            let p = self.layout.pair(s.state, s.action);
            if self.phi[p] < self.floor * (1.0 - 1e-9) {
                return Err(Error::Invariant(format!("upper occupancy bound {} below floor {}", self.phi[p], self.floor)));
            }
            est[p] = l / self.phi[p];
        }
        Ok(est)
    }

    /// Updates visit counters; starts a new epoch when some visited pair doubled its count.
    pub fn observe(&mut self, trajectory: &[Step]) -> bool {
        let mut trigger = false;
        for s in trajectory {
            let p = self.layout.pair(s.state, s.action);
            self.counts.pairs[p] += 1;
            self.counts.transitions[self.layout.triple(s.state, s.action, s.next)] += 1;
        }
        for s in trajectory {
            let p = self.layout.pair(s.state, s.action);
            if self.counts.pairs[p] >= (2 * self.epoch_counts[p]).max(1) {
                trigger = true;
            }
        }
        if trigger {
            self.epoch += 1;
            self.epoch_counts = self.counts.pairs.clone();
            self.confidence = ConfidenceSet::from_counts(&self.layout, &self.counts, self.horizon, self.delta);
        }
        trigger
    }

    fn rebuild_constraints(&mut self) -> Result<()> {
        self.constraints = self.confidence.constraints(&self.layout, self.floor)?;
        self.start = self.layout.occupancy(&self.confidence.interior_kernel(&self.layout), &self.layout.uniform_policy());
        if !self.constraints.strictly_satisfied(&self.start) {
            return Err(Error::Infeasible);
        }
        Ok(())
    }

    /// Mirror step under the current confidence set, then bounds and step sizes.
    pub fn update(&mut self, estimate: &[f64], new_epoch: bool) -> Result<MdpUpdate> {
        let layout = &self.layout;
        if estimate.len() != layout.pairs() {
            return Err(Error::DimensionMismatch { expected: layout.pairs(), got: estimate.len() });
        }
        if estimate.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParameter("loss estimates must be finite and non-negative".into()));
        }
        if new_epoch {
            self.rebuild_constraints()?;
        }
        let layout = &self.layout;
        let feasible_now = self.constraints.strictly_satisfied(&self.occupancy);
        let (next, iterations, decrement) = if feasible_now && estimate.iter().all(|l| *l == 0.0) {
            (self.occupancy.clone(), 0, 0.0)
        } else {
            let mut loss = DVector::zeros(layout.triples());
            let mut weights = DVector::zeros(layout.triples());
            for p in 0..layout.pairs() {
                for i in layout.pair_triples(p) {
                    loss[i] = estimate[p];
                    weights[i] = 1.0 / self.rates[p];
                }
            }
            let reg = WeightedLogBarrier::new(weights)?;
            let problem = ProximalProblem {
                loss: &loss,
                reference: &self.occupancy,
                regularizer: &reg,
                equalities: Some(&self.equalities),
                feasible: Some(&self.constraints),
                start: Some(&self.start),
            };
            let sol = omd::solve(&problem, &self.settings)?;
            (sol.x, sol.iterations, sol.decrement)
        };
        self.occupancy = next;
        self.policy = layout.policy_of(&self.occupancy)?;
        self.phi = self.confidence.upper_occupancy(layout, &self.policy)?;
        let mut increases = Vec::new();
        for p in 0..layout.pairs() {
            if 1.0 / self.phi[p] >= self.thresholds[p] {
                self.thresholds[p] = 2.0 / self.phi[p];
                self.rates[p] *= self.kappa;
                self.increases[p] += 1;
                increases.push(PairIncrease { pair: p, eta: self.rates[p] });
            }
        }
        self.round += 1;
        Ok(MdpUpdate { new_epoch, increases, solver_iterations: iterations, solver_decrement: decrement })
    }

    /// One full episode of learning from a realized trajectory and its observed losses.
    pub fn learn(&mut self, trajectory: &[Step], losses: &[f64]) -> Result<MdpUpdate> {
        let est = self.estimate(trajectory, losses)?;
        let new_epoch = self.observe(trajectory);
        self.update(&est, new_epoch)
    }

    pub fn max_increases(&self) -> usize {
        (7.0 * self.horizon.log2()).ceil() as usize
    }

    pub fn check_invariants(&self) -> Result<()> {
        let v = self.layout.occupancy_violation(&self.occupancy);
        if v > 1e-9 {
            return Err(Error::Invariant(format!("occupancy conditions violated by {v:e}")));
        }
        if let Some(w) = self.occupancy.iter().find(|w| **w < self.floor * (1.0 - 1e-9)) {
            return Err(Error::Invariant(format!("occupancy entry {w:e} below floor {:e}", self.floor)));
        }
        let marg = self.layout.pair_marginals(&self.occupancy);
        for (p, (m, phi)) in marg.iter().zip(&self.phi).enumerate() {
            if *phi < m * (1.0 - 1e-9) - 1e-15 {
                return Err(Error::Invariant(format!("upper bound {phi} below occupancy {m} at pair {p}")));
            }
        }
        let cap = 5.0 * self.eta0 * (1.0 + 1e-12);
        if let Some(r) = self.rates.iter().find(|r| **r > cap) {
            return Err(Error::Invariant(format!("step size {r} exceeds five times {}", self.eta0)));
        }
        let max = self.max_increases();
        if let Some(n) = self.increases.iter().find(|n| **n > max) {
            return Err(Error::Invariant(format!("{n} step-size increases exceed {max}")));
        }
        Ok(())
    }

    /// Checks that the bounds dominate the true occupancy whenever the true kernel is in the set.
    pub fn check_against(&self, kernel: &Kernel) -> Result<()> {
        if !self.confidence.contains(&self.layout, kernel) {
            return Ok(());
        }
        let truth = self.layout.pair_marginals(&self.layout.occupancy(kernel, &self.policy));
        for (p, (w, phi)) in truth.iter().zip(&self.phi).enumerate() {
            if *phi < w * (1.0 - 1e-9) - 1e-15 {
                return Err(Error::Invariant(format!("upper bound {phi} below true occupancy {w} at pair {p}")));
            }
        }
        Ok(())
    }
}
