use crate::error::{ModelError, Result};

use super::field::StateTriple;

const DIVISIBILITY_TOL: f64 = 1e-12;

/// Number of `dt` steps spanning `delay`, provided `dt` divides it.
pub fn lag_steps(key: &str, delay: f64, dt: f64, other_delays: &[f64]) -> Result<usize> {
    if delay == 0.0 {
        return Ok(0);
    }
    let k = (delay / dt).round();
    if k >= 1.0 && (k * dt - delay).abs() <= DIVISIBILITY_TOL * delay {
        return Ok(k as usize);
    }
    let mut all = vec![delay];
    all.extend(other_delays.iter().copied().filter(|d| *d > 0.0));
    Err(ModelError::IncommensurateStep {
        key: key.to_string(),
        dt,
        delay,
        suggested: admissible_step(dt, &all),
    })
}

/// Largest step not exceeding `dt` that divides every positive delay, or
/// the nearest divisor of the longest delay when no common one is found
/// within a bounded search.
pub fn admissible_step(dt: f64, delays: &[f64]) -> f64 {
    let longest = delays.iter().copied().fold(0.0, f64::max);
    if longest == 0.0 {
        return dt;
    }
    let start = (longest / dt).ceil().max(1.0) as usize;
    for k in start..start.saturating_mul(64).max(start + 1) {
        let cand = longest / k as f64;
        let divides = delays.iter().all(|&d| {
            let m = (d / cand).round();
            d == 0.0 || (m >= 1.0 && (m * cand - d).abs() <= DIVISIBILITY_TOL * d)
        });
        if divides {
            return cand;
        }
    }
    longest / start as f64
}

/// Fixed-step ring buffer of past states covering the longest delay.
///
/// Entry `k` steps ago holds the state at `t_now - k dt`; lookups are exact
/// (no interpolation).
#[derive(Debug, Clone)]
pub struct History {
    dt: f64,
    entries: Vec<StateTriple>,
    head: usize,
    t_now: f64,
    steps_taken: usize,
}

impl History {
    /// History constant in time: every entry equals `state`.
    pub fn constant(state: StateTriple, dt: f64, max_lag: usize) -> Self {
        Self {
            dt,
            entries: vec![state; max_lag + 1],
            head: max_lag,
            t_now: 0.0,
            steps_taken: 0,
        }
    }

    /// Builds a time-varying history from `f(k)`, the state `k` steps before
    /// the initial time, for `k = 0..=max_lag`.
    pub fn from_lags(dt: f64, max_lag: usize, f: impl Fn(usize) -> StateTriple) -> Self {
        // oldest first so head (most recent) sits at the end
        let entries: Vec<_> = (0..=max_lag).rev().map(f).collect();
        Self {
            dt,
            entries,
            head: max_lag,
            t_now: 0.0,
            steps_taken: 0,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_now(&self) -> f64 {
        self.t_now
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    /// Largest available lag in steps.
    pub fn max_lag(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn current(&self) -> &StateTriple {
        &self.entries[self.head]
    }

    /// State `k` steps in the past.
    pub fn lag(&self, k: usize) -> Result<&StateTriple> {
        let len = self.entries.len();
        if k >= len {
            return Err(ModelError::InsufficientHistory {
                required: k,
                available: len - 1,
            });
        }
        Ok(&self.entries[(self.head + len - k) % len])
    }

    /// Appends the next state, evicting the oldest one.
    pub fn push(&mut self, state: StateTriple) {
        let len = self.entries.len();
        self.head = (self.head + 1) % len;
        self.entries[self.head] = state;
        self.steps_taken += 1;
        self.t_now = self.steps_taken as f64 * self.dt;
    }

    /// Entries from lag 0 to the oldest.
    pub fn iter_lags(&self) -> impl Iterator<Item = &StateTriple> + '_ {
        (0..self.entries.len()).map(move |k| &self.entries[(self.head + self.entries.len() - k) % self.entries.len()])
    }
}
