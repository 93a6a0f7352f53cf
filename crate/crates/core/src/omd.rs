//! Constrained Bregman-proximal steps solved by a damped Newton path-following method.

use nalgebra::{DMatrix, DVector};

use crate::barrier::SmoothConvex;
use crate::error::{Error, Result};

/// `sum_i c_i ln(1/x_i)` on the positive orthant.
#[derive(Debug, Clone)]
pub struct WeightedLogBarrier {
    weights: DVector<f64>,
}

impl WeightedLogBarrier {
    pub fn new(weights: DVector<f64>) -> Result<Self> {
        if weights.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::InvalidParameter("barrier weights must be positive".into()));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }
}

impl SmoothConvex for WeightedLogBarrier {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, x: &DVector<f64>) -> Option<f64> {
        if x.len() != self.weights.len() || x.iter().any(|v| !(*v > 0.0)) {
            return None;
        }
        Some(-x.iter().zip(self.weights.iter()).map(|(x, c)| c * x.ln()).sum::<f64>())
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x.zip_map(&self.weights, |x, c| -c / x)
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&x.zip_map(&self.weights, |x, c| c / (x * x)))
    }
}

/// `factor * f`.
pub struct Scaled<'a> {
    pub inner: &'a dyn SmoothConvex,
    pub factor: f64,
}

impl SmoothConvex for Scaled<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &DVector<f64>) -> Option<f64> {
        self.inner.value(x).map(|v| v * self.factor)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.inner.gradient(x) * self.factor
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.inner.hessian(x) * self.factor
    }
}

/// Log barrier of `{ x : G x <= h }`.
#[derive(Debug, Clone)]
pub struct LinearInequalities {
    g: DMatrix<f64>,
    h: DVector<f64>,
}

impl LinearInequalities {
    pub fn new(g: DMatrix<f64>, h: DVector<f64>) -> Result<Self> {
        if g.nrows() != h.len() {
            return Err(Error::DimensionMismatch { expected: g.nrows(), got: h.len() });
        }
        Ok(Self { g, h })
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn slacks(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.h - &self.g * x
    }

    pub fn strictly_satisfied(&self, x: &DVector<f64>) -> bool {
        self.slacks(x).iter().zip(self.h.iter()).all(|(s, h)| *s >= 1e-12 * (1.0 + h.abs()))
    }
}

impl SmoothConvex for LinearInequalities {
    fn dim(&self) -> usize {
        self.g.ncols()
    }

    fn value(&self, x: &DVector<f64>) -> Option<f64> {
        let s = self.slacks(x);
        if s.iter().any(|v| !(*v > 0.0)) {
            return None;
        }
        Some(-s.iter().map(|v| v.ln()).sum::<f64>())
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let inv = self.slacks(x).map(|s| 1.0 / s);
        self.g.tr_mul(&inv)
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let s = self.slacks(x);
        let scaled = DMatrix::from_fn(self.g.nrows(), self.g.ncols(), |i, j| self.g[(i, j)] / s[i]);
        scaled.tr_mul(&scaled)
    }
}

/// `E x = e`, reduced to full row rank on construction.
#[derive(Debug, Clone)]
pub struct Equalities {
    e: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl Equalities {
    pub fn new(e: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self> {
        if e.nrows() != rhs.len() {
            return Err(Error::DimensionMismatch { expected: e.nrows(), got: rhs.len() });
        }
        let n = e.ncols();
        let svd = e.clone().svd(true, true);
        let u = svd.u.expect("requested");
        let vt = svd.v_t.expect("requested");
        let smax = svd.singular_values.max();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 1e-10 * smax.max(1.0))
            .collect();
        let reduced = DMatrix::from_fn(keep.len(), n, |r, j| svd.singular_values[keep[r]] * vt[(keep[r], j)]);
        let reduced_rhs = DVector::from_fn(keep.len(), |r, _| u.column(keep[r]).dot(&rhs));
        Ok(Self { e: reduced, rhs: reduced_rhs })
    }

    pub fn rank(&self) -> usize {
        self.e.nrows()
    }

    pub fn residual(&self, x: &DVector<f64>) -> f64 {
        (&self.e * x - &self.rhs).amax()
    }
}

/// Minimize `<x, loss> + D_R(x, reference)` subject to optional equalities and
/// the domain of an optional extra barrier.
pub struct ProximalProblem<'a> {
    pub loss: &'a DVector<f64>,
    pub reference: &'a DVector<f64>,
    pub regularizer: &'a dyn SmoothConvex,
    pub equalities: Option<&'a Equalities>,
    pub feasible: Option<&'a dyn SmoothConvex>,
    /// Strictly feasible starting point used when `reference` is not.
    pub start: Option<&'a DVector<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub fallback_iterations: usize,
    pub mu_start: f64,
    pub mu_end: f64,
    pub mu_factor: f64,
    pub armijo: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 200,
            fallback_iterations: 400,
            mu_start: 1.0,
            mu_end: 1e-12,
            mu_factor: 0.1,
            armijo: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: DVector<f64>,
    /// Newton decrement of the final centering problem, on the normalized objective.
    pub decrement: f64,
    pub iterations: usize,
    /// Accepted steps after which the decrement grew.
    pub decrement_increases: usize,
    /// Whether the extra barrier had to be followed down to its smallest weight.
    pub constrained: bool,
}

/// `weight * (<linear, x> + R(x)) / scale + F(x)` with `F` the optional extra barrier.
struct Objective<'a> {
    linear: DVector<f64>,
    reg: &'a dyn SmoothConvex,
    feasible: Option<&'a dyn SmoothConvex>,
    weight: f64,
    /// Normalizes the proximal part to unit scale.
    scale: f64,
}

impl Objective<'_> {
    /// Decrement below which full Newton steps are taken without a line search.
    fn pure_newton(&self) -> f64 {
        // the barrier-augmented objective at weight 1/mu behaves like a standard self-concordant one
        if self.feasible.is_some() && self.weight >= 1.0 { 0.25 } else { 1e-6 }
    }

    fn value(&self, x: &DVector<f64>) -> Option<f64> {
        let mut v = self.weight * (self.linear.dot(x) + self.reg.value(x)?) / self.scale;
        if let Some(f) = self.feasible {
            v += f.value(x)?;
        }
        v.is_finite().then_some(v)
    }

    fn derivatives(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let c = self.weight / self.scale;
        let mut g = (&self.linear + self.reg.gradient(x)) * c;
        let mut h = self.reg.hessian(x) * c;
        if let Some(f) = self.feasible {
            g += f.gradient(x);
            h += f.hessian(x);
        }
        (g, h)
    }
}

/// Orthonormal basis of the null space of `e * diag(scale)`, and the minimum-norm `y` with
/// `e * diag(scale) * y = residual`.
fn equality_split(e: &DMatrix<f64>, scale: &DVector<f64>, residual: &DVector<f64>) -> Option<(DMatrix<f64>, DVector<f64>)> {
    let n = e.ncols();
    let rank = e.nrows();
    let mut padded = DMatrix::zeros(n, n);
    for i in 0..rank {
        for j in 0..n {
            padded[(i, j)] = e[(i, j)] * scale[j];
        }
    }
    let svd = padded.try_svd(true, true, f64::EPSILON, 0)?;
    let (u, v_t) = (svd.u?, svd.v_t?);
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| sv[*b].total_cmp(&sv[*a]));
    let mut particular = DVector::zeros(n);
    for &k in &order[..rank] {
        let coef = u.column(k).rows(0, rank).dot(residual) / sv[k];
        particular += v_t.row(k).transpose() * coef;
    }
    let basis = DMatrix::from_fn(n, n - rank, |i, k| v_t[(order[rank + k], i)]);
    Some((basis, particular))
}


fn newton_direction(x: &DVector<f64>, g: &DVector<f64>, h: &DMatrix<f64>, eq: Option<&Equalities>) -> Option<DVector<f64>> {
    let n = g.len();
    let scale = h.diagonal().map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 1.0 });
    let hs = DMatrix::from_fn(n, n, |i, j| h[(i, j)] * scale[i] * scale[j]);
    let gs = g.component_mul(&scale);
    let y = match eq {
        None => match hs.clone().cholesky() {
            Some(c) => c.solve(&(-&gs)),
            None => hs.lu().solve(&(-&gs))?,
        },
        Some(eq) if eq.rank() > 0 => {
            // the particular part pulls accumulated roundoff back onto the affine set
            let residual = &eq.rhs - &eq.e * x;
            let (z, particular) = equality_split(&eq.e, &scale, &residual)?;
            let reduced = z.transpose() * &hs * &z;
            let rg = -(z.transpose() * (&gs + &hs * &particular));
            let p = match reduced.clone().cholesky() {
                Some(c) => c.solve(&rg),
                None => reduced.lu().solve(&rg)?,
            };
            particular + z * p
        }
        Some(_) => hs.lu().solve(&(-&gs))?,
    };
    let dx = y.component_mul(&scale);
    dx.iter().all(|v| v.is_finite()).then_some(dx)
}

struct Centering {
    x: DVector<f64>,
    decrement: f64,
    iterations: usize,
    increases: usize,
}

fn center(
    obj: &Objective<'_>,
    eq: Option<&Equalities>,
    mut x: DVector<f64>,
    tol: f64,
    budget: usize,
    first_step: f64,
    armijo: f64,
) -> Result<Centering> {
    let mut iterations = 0;
    let mut increases = 0;
    let mut prev = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    loop {
        let (g, h) = obj.derivatives(&x);
        let dx = newton_direction(&x, &g, &h, eq).ok_or(Error::NotConverged { iterations, decrement: f64::NAN })?;
        // the quadratic form avoids cancellation between g and the equality normals
        let dec = dx.dot(&(&h * &dx)).max(0.0).sqrt();
        let slope = -dec * dec;
        if dec <= tol {
            return Ok(Centering { x, decrement: dec, iterations, increases });
        }
        if iterations >= budget {
            return Err(Error::NotConverged { iterations, decrement: dec });
        }
        if dec > prev * (1.0 + 1e-9) {
            increases += 1;
        }
        prev = dec;
        if dec < 1e-5 {
            // pure Newton regime: stop once roundoff prevents further progress
            if dec > 0.5 * best {
                stalled += 1;
                if stalled > 4 {
                    return Err(Error::NotConverged { iterations, decrement: dec });
                }
            } else {
                stalled = 0;
            }
            best = best.min(dec);
        }
        iterations += 1;
        if dec < obj.pure_newton() {
            // inside the quadratic convergence region; objective differences may be below resolution
            let full = &x + &dx;
            if obj.value(&full).is_some() {
                x = full;
                continue;
            }
        }
        let f0 = obj.value(&x).ok_or(Error::Infeasible)?;
        let mut t = if dec < 0.25 { 1.0 } else { first_step };
        let mut accepted = None;
        let mut last_feasible = None;
        for _ in 0..80 {
            let cand = &x + &dx * t;
            if let Some(f1) = obj.value(&cand) {
                if last_feasible.is_none() {
                    last_feasible = Some(cand.clone());
                }
                if f1 <= f0 + armijo * t * slope {
                    accepted = Some(cand);
                    break;
                }
            }
            t *= 0.5;
        }
        match (accepted, last_feasible) {
            (Some(next), _) => x = next,
            // the decrease is below the resolution of the objective value
            (None, Some(next)) if dec < 1e-5 => x = next,
            _ => return Err(Error::NotConverged { iterations, decrement: dec }),
        }
    }
}

const START_MIX: f64 = 1e-3;

fn strictly_feasible(problem: &ProximalProblem<'_>, x: &DVector<f64>) -> bool {
    problem.regularizer.value(x).is_some() && problem.feasible.map_or(true, |f| f.value(x).is_some())
}

fn run(problem: &ProximalProblem<'_>, s: &SolverSettings, budget: usize, first_step: f64) -> Result<Solution> {
    let linear = problem.loss - problem.regularizer.gradient(problem.reference);
    let scale = linear.iter().zip(problem.reference.iter()).map(|(l, r)| (l * r).abs()).sum::<f64>().max(1.0);
    let eq = problem.equalities;
    let mut used = 0;
    let mut increases = 0;

    // without the extra barrier the step may already land inside the feasible set
    if problem.regularizer.value(problem.reference).is_some() {
        let obj = Objective { linear: linear.clone(), reg: problem.regularizer, feasible: None, weight: 1.0, scale };
        if let Ok(c) = center(&obj, eq, problem.reference.clone(), s.tolerance, budget, first_step, s.armijo) {
            let inside = problem
                .feasible
                .map_or(true, |f| f.value(&c.x).is_some() && interior_margin(f, &c.x));
            used += c.iterations;
            increases += c.increases;
            if inside {
                return Ok(Solution {
                    x: c.x,
                    decrement: c.decrement,
                    iterations: used,
                    decrement_increases: increases,
                    constrained: false,
                });
            }
        }
    }

    let Some(feasible) = problem.feasible else {
        return Err(Error::NotConverged { iterations: used, decrement: f64::NAN });
    };
    let start = problem.start.filter(|p| strictly_feasible(problem, p));
    let mut x = match (strictly_feasible(problem, problem.reference), start) {
        // a reference on the edge of the feasible set gives roundoff-dominated Newton steps
        (true, Some(p)) => problem.reference * (1.0 - START_MIX) + p * START_MIX,
        (true, None) => problem.reference.clone(),
        (false, Some(p)) => p.clone(),
        (false, None) => return Err(Error::Infeasible),
    };
    let mut mu = s.mu_start;
    loop {
        let last = mu <= s.mu_end * (1.0 + 1e-9);
        // centering `(objective)/mu + barrier` keeps the problem self-concordant at every mu
        let obj = Objective { linear: linear.clone(), reg: problem.regularizer, feasible: Some(feasible), weight: 1.0 / mu, scale };
        let root = mu.sqrt();
        let tol = if last { s.tolerance / root } else { 0.1 };
        let remaining = budget.saturating_sub(used);
        let c = center(&obj, eq, x, tol, remaining, first_step, s.armijo).map_err(|e| match e {
            Error::NotConverged { decrement, .. } => Error::NotConverged { iterations: budget, decrement: decrement * root },
            e => e,
        })?;
        used += c.iterations;
        increases += c.increases;
        x = c.x;
        if last {
            return Ok(Solution {
                x,
                decrement: c.decrement * root,
                iterations: used,
                decrement_increases: increases,
                constrained: true,
            });
        }
        mu = (mu * s.mu_factor).max(s.mu_end);
    }
}

fn interior_margin(f: &dyn SmoothConvex, x: &DVector<f64>) -> bool {
    // a finite barrier gradient keeps the accepted point away from the boundary
    f.gradient(x).iter().all(|v| v.is_finite() && v.abs() < 1e12)
}

/// Solves a [`ProximalProblem`], retrying with damped steps and a larger budget on failure.
pub fn solve(problem: &ProximalProblem<'_>, settings: &SolverSettings) -> Result<Solution> {
    let n = problem.reference.len();
    if problem.loss.len() != n || problem.regularizer.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: problem.loss.len() });
    }
    match run(problem, settings, settings.max_iterations, 1.0) {
        Ok(s) => Ok(s),
        Err(Error::Infeasible) => Err(Error::Infeasible),
        Err(_) => run(problem, settings, settings.fallback_iterations, 0.5),
    }
}
