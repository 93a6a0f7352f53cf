mod common;

use approx::assert_relative_eq;
use common::rng;
use hpbandit::mdp::{comparator_u, construct_p0, ConfidenceSet, Kernel, LayeredMdp, Layout, MdpLearner, Policy, Step};
use hpbandit::types::{Confidence, Horizon, LearningRate};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;

fn learner(layout: &Layout, t: usize, eta: f64, delta: f64) -> MdpLearner {
    MdpLearner::new(layout.clone(), Horizon::new(t).unwrap(), LearningRate::new(eta).unwrap(), Confidence::new(delta).unwrap()).unwrap()
}

#[test]
fn uniform_start_has_uniform_policy_and_kernel() {
    let layout = Layout::new(vec![1, 2, 3, 1], 2).unwrap();
    let l = learner(&layout, 100, 0.1, 0.1);
    let policy = layout.policy_of(l.occupancy()).unwrap();
    assert!(policy.rows().iter().flatten().all(|p| (p - 0.5).abs() <= 1e-15));
    let kernel = layout.kernel_of(l.occupancy()).unwrap();
    for (p, row) in kernel.rows().iter().enumerate() {
        let n = layout.pair_triples(p).len() as f64;
        assert!(row.iter().all(|v| (v - 1.0 / n).abs() <= 1e-15));
    }
    for p in 0..layout.pairs() {
        let k = layout.layer_of(layout.pair_state(p));
        assert_eq!(l.thresholds()[p], 2.0 * layout.layer_sizes()[k] as f64 * 2.0);
    }
}

#[test]
fn episode_frequencies_match_the_occupancy() {
    let mut r = rng(1);
    let mdp = LayeredMdp::random(vec![1, 2, 2, 1], 2, &mut r).unwrap();
    let layout = &mdp.layout;
    let policy = layout.random_policy(&mut r);
    let marg = layout.pair_marginals(&layout.occupancy(&mdp.kernel, &policy));
    let n = 100_000;
    let mut counts = vec![0usize; layout.pairs()];
    for _ in 0..n {
        for s in layout.run_episode(&mdp.kernel, &policy, &mut r) {
            counts[layout.pair(s.state, s.action)] += 1;
        }
    }
    for (c, m) in counts.iter().zip(&marg) {
        let sigma = (m * (1.0 - m) / n as f64).sqrt();
        assert!((*c as f64 / n as f64 - m).abs() <= 3.0 * sigma.max(1e-12));
    }
    let mut a = rng(5);
    let mut b = rng(5);
    assert_eq!(layout.run_episode(&mdp.kernel, &policy, &mut a), layout.run_episode(&mdp.kernel, &policy, &mut b));
}

#[test]
fn deterministic_chain_forces_the_trajectory() {
    let layout = Layout::new(vec![1, 2, 1], 1).unwrap();
    let kernel = Kernel::new(&layout, vec![vec![0.0, 1.0], vec![1.0], vec![1.0]]).unwrap();
    let mut r = rng(2);
    let steps = layout.run_episode(&kernel, &layout.uniform_policy(), &mut r);
    assert_eq!(steps, vec![Step { state: 0, action: 0, next: 2 }, Step { state: 2, action: 0, next: 3 }]);
}

/// Every trajectory with its probability.
fn trajectories(layout: &Layout, kernel: &Kernel, policy: &Policy) -> Vec<(f64, Vec<Step>)> {
    let mut out = Vec::new();
    let mut stack = vec![(1.0, 0usize, Vec::new())];
    while let Some((p, x, steps)) = stack.pop() {
        if layout.layer_of(x) == layout.depth() {
            out.push((p, steps));
            continue;
        }
        for a in 0..layout.actions() {
            for (k, next) in layout.successors(x).enumerate() {
                let q = p * policy.prob(x, a) * kernel.row(layout.pair(x, a))[k];
                if q > 0.0 {
                    let mut s: Vec<Step> = steps.clone();
                    s.push(Step { state: x, action: a, next });
                    stack.push((q, next, s));
                }
            }
        }
    }
    out
}

#[test]
fn known_transitions_make_the_estimator_unbiased() {
    let mut r = rng(3);
    for layers in [vec![1, 2, 1], vec![1, 1, 2, 1]] {
        let mdp = LayeredMdp::random(layers, 2, &mut r).unwrap();
        let layout = &mdp.layout;
        let policy = layout.random_policy(&mut r);
        let exact = ConfidenceSet::exact(layout, &mdp.kernel);
        let phi = exact.upper_occupancy(layout, &policy).unwrap();
        let marg = layout.pair_marginals(&layout.occupancy(&mdp.kernel, &policy));
        for (f, m) in phi.iter().zip(&marg) {
            assert_relative_eq!(*f, *m, max_relative = 1e-12, epsilon = 1e-15);
        }
        let paths = trajectories(layout, &mdp.kernel, &policy);
        assert_relative_eq!(paths.iter().map(|(p, _)| p).sum::<f64>(), 1.0, max_relative = 1e-12);
        let loss: Vec<f64> = (0..layout.pairs()).map(|_| r.random()).collect();
        let mut mean = vec![0.0; layout.pairs()];
        for (p, steps) in &paths {
            for s in steps {
                let i = layout.pair(s.state, s.action);
                mean[i] += p * loss[i] / phi[i];
            }
        }
        for (m, l) in mean.iter().zip(&loss) {
            assert_relative_eq!(*m, *l, max_relative = 1e-10);
        }
    }
}

#[test]
fn honest_sets_bias_estimates_downwards() {
    let mut r = rng(4);
    let mdp = LayeredMdp::random(vec![1, 2, 1], 2, &mut r).unwrap();
    let layout = &mdp.layout;
    let mut l = learner(layout, 500, 0.5, 0.1);
    for _ in 0..60 {
        let traj = layout.run_episode(&mdp.kernel, l.policy(), &mut r);
        let obs: Vec<f64> = traj.iter().map(|_| r.random()).collect();
        l.learn(&traj, &obs).unwrap();
    }
    assert!(l.confidence().contains(layout, &mdp.kernel));
    let loss: Vec<f64> = (0..layout.pairs()).map(|_| r.random()).collect();
    let mut mean = vec![0.0; layout.pairs()];
    for (p, steps) in trajectories(layout, &mdp.kernel, l.policy()) {
        let obs: Vec<f64> = steps.iter().map(|s| loss[layout.pair(s.state, s.action)]).collect();
        for (m, e) in mean.iter_mut().zip(l.estimate(&steps, &obs).unwrap()) {
            *m += p * e;
        }
    }
    let w = layout.pair_marginals(&layout.occupancy(&mdp.kernel, l.policy()));
    for i in 0..layout.pairs() {
        assert_relative_eq!(mean[i], w[i] / l.upper_bounds()[i] * loss[i], max_relative = 1e-10, epsilon = 1e-15);
        assert!(mean[i] <= loss[i] * (1.0 + 1e-12));
    }
    let zero = l.estimate(&layout.run_episode(&mdp.kernel, l.policy(), &mut r), &[0.0, 0.0]).unwrap();
    assert!(zero.iter().all(|v| *v == 0.0));
}

#[test]
fn epochs_start_when_counts_double() {
    let layout = Layout::new(vec![1, 1, 1], 1).unwrap();
    let mut l = learner(&layout, 100, 0.1, 0.1);
    let traj = vec![Step { state: 0, action: 0, next: 1 }, Step { state: 1, action: 0, next: 2 }];
    let fired: Vec<bool> = (0..9).map(|_| l.observe(&traj)).collect();
    assert_eq!(fired, vec![true, true, false, true, false, false, false, true, false]);
    assert_eq!(l.epoch(), 5);
}

#[test]
fn exact_sets_give_exact_occupancy_and_single_states_give_the_policy() {
    let mut r = rng(6);
    let mdp = LayeredMdp::random(vec![1, 3, 2, 1], 2, &mut r).unwrap();
    let layout = &mdp.layout;
    let policy = layout.random_policy(&mut r);
    let exact = ConfidenceSet::exact(layout, &mdp.kernel);
    let marg = layout.pair_marginals(&layout.occupancy(&mdp.kernel, &policy));
    for x in 0..layout.states() - 1 {
        for a in 0..2 {
            assert_relative_eq!(exact.comp_uob(layout, &policy, x, a).unwrap(), marg[layout.pair(x, a)], max_relative = 1e-12, epsilon = 1e-15);
        }
    }
    let chain = LayeredMdp::random(vec![1, 1, 1, 1], 3, &mut r).unwrap();
    let policy = chain.layout.random_policy(&mut r);
    let radius: Vec<f64> = (0..chain.layout.triples()).map(|_| r.random()).collect();
    let set = ConfidenceSet::with_radius(&chain.layout, &chain.kernel, radius).unwrap();
    for x in 0..3 {
        for a in 0..3 {
            assert_relative_eq!(set.comp_uob(&chain.layout, &policy, x, a).unwrap(), policy.prob(x, a), max_relative = 1e-15);
        }
    }
}

#[test]
fn p0_mass_shift_by_hand() {
    // |X| = 5 and T = 20 give the floor 1/100
    let layout = Layout::new(vec![1, 3, 1], 1).unwrap();
    let kernel = Kernel::new(&layout, vec![vec![1.0, 0.0, 0.0], vec![1.0], vec![1.0], vec![1.0]]).unwrap();
    let p0 = construct_p0(&layout, &kernel, Horizon::new(20).unwrap());
    let row = p0.row(0);
    assert_relative_eq!(row[0], 0.98, max_relative = 1e-15);
    assert_relative_eq!(row[1], 0.01, max_relative = 1e-15);
    assert_relative_eq!(row[2], 0.01, max_relative = 1e-15);
    let spread = Kernel::new(&layout, vec![vec![0.3, 0.3, 0.4], vec![1.0], vec![1.0], vec![1.0]]).unwrap();
    assert_eq!(construct_p0(&layout, &spread, Horizon::new(20).unwrap()), spread);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn p0_respects_floor_and_deviation(seed in 0u64..10_000, t in 2usize..200) {
        let mut r = rng(seed);
        let mdp = LayeredMdp::random(vec![1, 3, 2, 1], 2, &mut r).unwrap();
        let layout = &mdp.layout;
        let sparse: Vec<Vec<f64>> = mdp.kernel.rows().iter().map(|row| {
            let mut v: Vec<f64> = row.iter().map(|p| if r.random::<f64>() < 0.5 { 0.0 } else { *p }).collect();
            let s: f64 = v.iter().sum();
            if s == 0.0 { v[0] = 1.0; v } else { v.iter().map(|p| p / s).collect() }
        }).collect();
        let kernel = Kernel::new(layout, sparse).unwrap();
        let p0 = construct_p0(layout, &kernel, Horizon::new(t).unwrap());
        let floor = 1.0 / (t as f64 * layout.states() as f64);
        for p in 0..layout.pairs() {
            let row = p0.row(p);
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            let n = row.len() as f64;
            for (a, b) in row.iter().zip(kernel.row(p)) {
                prop_assert!(*a >= floor.min(1.0 / n) * (1.0 - 1e-12));
                prop_assert!((a - b).abs() <= n * floor + 1e-12);
            }
        }
    }

    #[test]
    fn comparator_is_a_floored_occupancy(seed in 0u64..10_000, t in 2usize..5000) {
        let mut r = rng(seed);
        let mdp = LayeredMdp::random(vec![1, 2, 3, 1], 2, &mut r).unwrap();
        let layout = &mdp.layout;
        let loss: Vec<f64> = (0..layout.pairs()).map(|_| r.random()).collect();
        let (best, _) = layout.best_policy(&mdp.kernel, &loss);
        let h = Horizon::new(t).unwrap();
        let u = comparator_u(layout, &mdp.kernel, &best, h);
        prop_assert!(layout.occupancy_violation(&u) <= 1e-12);
        let x = layout.states() as f64;
        let floor = 1.0 / ((t as f64).powi(3) * x * x * 2.0);
        prop_assert!(u.iter().all(|v| *v >= floor));
        let star = layout.occupancy(&mdp.kernel, &best);
        prop_assert!((&u - &star).amax() <= 2.0 / t as f64);
    }

    #[test]
    fn learner_keeps_bounds_and_schedule(seed in 0u64..10_000, eta in 0.05f64..1.0) {
        let mut r = rng(seed);
        let mdp = LayeredMdp::random(vec![1, 2, 2, 1], 2, &mut r).unwrap();
        let layout = &mdp.layout;
        let t = 150;
        let mut l = learner(layout, t, eta, 0.1);
        let cap = (7.0 * (t as f64).log2()).ceil() as usize;
        for _ in 0..t {
            let traj = layout.run_episode(&mdp.kernel, l.policy(), &mut r);
            let obs: Vec<f64> = traj.iter().map(|_| r.random()).collect();
            let before_thresholds = l.thresholds().to_vec();
            let before_increases = l.increases().to_vec();
            l.learn(&traj, &obs).unwrap();
            let marg = layout.pair_marginals(l.occupancy());
            for p in 0..layout.pairs() {
                let phi = l.upper_bounds()[p];
                prop_assert!(phi >= marg[p] * (1.0 - 1e-9));
                prop_assert!(l.rates()[p] <= 5.0 * eta * (1.0 + 1e-12));
                prop_assert!(l.increases()[p] <= cap);
                if l.increases()[p] > before_increases[p] {
                    prop_assert!(1.0 / phi >= before_thresholds[p]);
                    prop_assert!((l.thresholds()[p] - 2.0 / phi).abs() <= 1e-12 * l.thresholds()[p]);
                } else {
                    prop_assert!(1.0 / phi < before_thresholds[p]);
                    prop_assert_eq!(l.thresholds()[p], before_thresholds[p]);
                }
            }
            prop_assert!(layout.occupancy_violation(l.occupancy()) <= 1e-9);
            prop_assert!(l.occupancy().iter().all(|w| *w >= l.floor() * (1.0 - 1e-9)));
            l.check_invariants().unwrap();
            if l.confidence().contains(layout, &mdp.kernel) {
                let truth = layout.pair_marginals(&layout.occupancy(&mdp.kernel, l.policy()));
                for p in 0..layout.pairs() {
                    prop_assert!(l.upper_bounds()[p] >= truth[p] * (1.0 - 1e-9));
                }
            }
        }
    }
}

fn divergence_term(y: f64) -> f64 {
    y - 1.0 - y.ln()
}

#[test]
fn occupancy_step_matches_a_zooming_grid() {
    let layout = Layout::new(vec![1, 3, 1], 1).unwrap();
    let eta = 0.3;
    let mut l = learner(&layout, 50, eta, 0.1);
    let reference = l.occupancy().clone();
    let estimate = [0.5, 2.0, 0.0, 1.0];
    l.update(&estimate, false).unwrap();
    let objective = |w: &DVector<f64>| -> f64 {
        (0..layout.triples())
            .map(|i| {
                let p = (0..layout.pairs()).find(|p| layout.pair_triples(*p).contains(&i)).unwrap();
                estimate[p] * w[i] + divergence_term(w[i] / reference[i]) / eta
            })
            .sum()
    };
    let point = |a: f64, b: f64| DVector::from_vec(vec![a, b, 1.0 - a - b, a, b, 1.0 - a - b]);
    let floor = l.floor();
    let (mut ca, mut cb, mut step, mut half): (f64, f64, f64, f64) = (1.0 / 3.0, 1.0 / 3.0, 1e-2, 0.5);
    let mut best = f64::INFINITY;
    while step > 1e-10 {
        let n = (half / step).round() as i64;
        for i in -n..=n {
            for j in -n..=n {
                let (a, b) = (ca + i as f64 * step, cb + j as f64 * step);
                if a < floor || b < floor || 1.0 - a - b < floor {
                    continue;
                }
                let v = objective(&point(a, b));
                if v < best {
                    best = v;
                    (ca, cb) = (a, b);
                }
            }
        }
        half = 3.0 * step;
        step /= 10.0;
    }
    assert!((objective(l.occupancy()) - best).abs() <= 1e-8);
    assert!((l.occupancy()[0] - ca).abs() <= 1e-4 && (l.occupancy()[1] - cb).abs() <= 1e-4);
}

#[test]
fn zero_estimate_keeps_a_feasible_occupancy() {
    let layout = Layout::new(vec![1, 2, 2, 1], 2).unwrap();
    let mut l = learner(&layout, 100, 0.1, 0.1);
    let before = l.occupancy().clone();
    l.update(&vec![0.0; layout.pairs()], false).unwrap();
    assert_eq!(l.occupancy(), &before);
    assert_eq!(l.increases(), &vec![0; layout.pairs()][..]);
}
