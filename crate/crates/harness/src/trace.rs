//! Per-run regret traces and their aggregation across seeds.

use std::io::Write;

use serde::Serialize;

use crate::error::HarnessError;

pub const CSV_HEADER: [&str; 6] = ["t", "loss", "cum_loss", "cum_comparator_loss", "cum_regret", "events"];

/// A step-size increase; `target` is the arm or pair, absent for the linear learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub round: usize,
    pub target: Option<usize>,
    pub eta: f64,
}

impl Event {
    fn render(&self) -> String {
        match self.target {
            Some(i) => format!("{i}:{}", self.eta),
            None => format!("{}", self.eta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretTrace {
    pub seed: u64,
    pub config_hash: String,
    /// Describes the comparator the regret is measured against.
    pub comparator: String,
    pub loss: Vec<f64>,
    pub cum_loss: Vec<f64>,
    pub cum_comparator_loss: Vec<f64>,
    pub cum_regret: Vec<f64>,
    pub events: Vec<Event>,
}

impl RegretTrace {
    /// Builds the cumulative columns from per-round learner and comparator losses.
    pub fn from_losses(
        seed: u64,
        config_hash: String,
        comparator: String,
        loss: Vec<f64>,
        comparator_loss: &[f64],
        events: Vec<Event>,
    ) -> Self {
        assert_eq!(loss.len(), comparator_loss.len());
        let mut cum_loss = Vec::with_capacity(loss.len());
        let mut cum_comparator_loss = Vec::with_capacity(loss.len());
        let mut cum_regret = Vec::with_capacity(loss.len());
        let (mut a, mut b) = (0.0, 0.0);
        for (l, c) in loss.iter().zip(comparator_loss) {
            a += l;
            b += c;
            cum_loss.push(a);
            cum_comparator_loss.push(b);
            cum_regret.push(a - b);
        }
        Self { seed, config_hash, comparator, loss, cum_loss, cum_comparator_loss, cum_regret, events }
    }

    pub fn rounds(&self) -> usize {
        self.loss.len()
    }

    pub fn final_regret(&self) -> f64 {
        self.cum_regret.last().copied().unwrap_or(0.0)
    }

    pub fn final_loss(&self) -> f64 {
        self.cum_loss.last().copied().unwrap_or(0.0)
    }

    pub fn final_comparator_loss(&self) -> f64 {
        self.cum_comparator_loss.last().copied().unwrap_or(0.0)
    }

    /// Instantaneous comparator loss recovered from the cumulative column.
    pub fn comparator_loss(&self, t: usize) -> f64 {
        self.cum_comparator_loss[t] - if t == 0 { 0.0 } else { self.cum_comparator_loss[t - 1] }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        let mut next = 0;
        for t in 0..self.rounds() {
            let round = t + 1;
            let start = next;
            while next < self.events.len() && self.events[next].round == round {
                next += 1;
            }
            let events: Vec<String> = self.events[start..next].iter().map(Event::render).collect();
            w.write_record([
                round.to_string(),
                self.loss[t].to_string(),
                self.cum_loss[t].to_string(),
                self.cum_comparator_loss[t].to_string(),
                self.cum_regret[t].to_string(),
                events.join(";"),
            ])?;
        }
        w.flush().map_err(|e| HarnessError::Io { path: "csv".into(), source: e })?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, HarnessError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretStats {
    pub runs: usize,
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
}

impl RegretStats {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let mean = if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
        Self { runs: v.len(), mean, median: quantile(&v, 0.5), p95: quantile(&v, 0.95) }
    }
}

/// Per-round quantiles of cumulative regret across runs of equal length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileBands {
    pub levels: Vec<f64>,
    /// `bands[k][t]` is quantile `levels[k]` at round `t + 1`.
    pub bands: Vec<Vec<f64>>,
}

impl QuantileBands {
    pub const LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

    pub fn of(traces: &[&RegretTrace]) -> Self {
        let rounds = traces.iter().map(|t| t.rounds()).min().unwrap_or(0);
        let mut bands = vec![Vec::with_capacity(rounds); Self::LEVELS.len()];
        let mut column = Vec::with_capacity(traces.len());
        for t in 0..rounds {
            column.clear();
            column.extend(traces.iter().map(|tr| tr.cum_regret[t]));
            column.sort_by(f64::total_cmp);
            for (band, q) in bands.iter_mut().zip(Self::LEVELS) {
                band.push(quantile(&column, q));
            }
        }
        Self { levels: Self::LEVELS.to_vec(), bands }
    }
}
