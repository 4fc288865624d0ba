//! Discrete-time processes, projections and stopping-time suprema.
//!
//! A process is a `(T + 1) x |atoms|` matrix, stored time-major. The left
//! limit at `t >= 1` is the value at `t - 1`, and at `t = 0` it is the value
//! at 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::SeminormSpec;
use crate::space::{FilteredSpace, RandVar, StoppingTime};

/// Relative tolerance used when deciding measurability of computed data.
pub const MEASURABILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Process(Vec<Vec<f64>>);

impl Process {
    /// Builds a process from rows `y_0, ..., y_T`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        Self(rows)
    }

    pub fn zeros(space: &FilteredSpace) -> Self {
        Self(vec![vec![0.0; space.n_atoms()]; space.horizon() + 1])
    }

    /// Same value `xi` at every time.
    pub fn constant_path(space: &FilteredSpace, xi: &RandVar) -> Self {
        Self(vec![xi.values().to_vec(); space.horizon() + 1])
    }

    /// `m_t = E[xi | F_t]`.
    pub fn martingale(space: &FilteredSpace, xi: &RandVar) -> Self {
        Self((0..=space.horizon()).map(|t| space.cond_exp_slice(xi.values(), t)).collect())
    }

    /// Deterministic process with the given path on every atom.
    pub fn deterministic(space: &FilteredSpace, path: &[f64]) -> Self {
        Self(path.iter().map(|&v| vec![v; space.n_atoms()]).collect())
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.0[t]
    }

    pub fn at_time(&self, t: usize) -> RandVar {
        RandVar::new(self.0[t].clone())
    }

    pub fn horizon(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Checks shape against the space.
    pub fn check_shape(&self, space: &FilteredSpace) -> Result<()> {
        if self.0.len() != space.horizon() + 1 {
            return Err(Error::Dimension(format!(
                "process has {} time rows, expected {}",
                self.0.len(),
                space.horizon() + 1
            )));
        }
        if let Some((t, r)) = self.0.iter().enumerate().find(|(_, r)| r.len() != space.n_atoms()) {
            return Err(Error::Dimension(format!(
                "process row t={t} has {} entries, expected {}",
                r.len(),
                space.n_atoms()
            )));
        }
        Ok(())
    }

    /// `y_tau(omega) = y(omega, tau(omega))`.
    pub fn stopped(&self, tau: &StoppingTime) -> RandVar {
        RandVar::new(tau.times().iter().enumerate().map(|(a, &t)| self.0[t][a]).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|r| r.iter().map(|&v| f(v)).collect()).collect())
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn zip_with(&self, other: &Process, f: impl Fn(f64, f64) -> f64) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()).collect())
    }

    pub fn add(&self, other: &Process) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Process) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max_abs_diff(&self, other: &Process) -> f64 {
        self.0.iter().flatten().zip(other.0.iter().flatten()).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    fn tol(&self) -> f64 {
        MEASURABILITY_TOL * (1.0 + self.max_abs())
    }

    /// First time and block at which the process is not adapted.
    pub fn adaptedness_witness(&self, space: &FilteredSpace) -> Option<String> {
        let tol = self.tol();
        (0..self.0.len()).find_map(|t| space.measurability_witness(t, &self.0[t], tol))
    }

    pub fn is_adapted(&self, space: &FilteredSpace) -> bool {
        self.adaptedness_witness(space).is_none()
    }

    pub fn require_adapted(&self, space: &FilteredSpace) -> Result<()> {
        self.check_shape(space)?;
        match self.adaptedness_witness(space) {
            Some(w) => Err(Error::NotAdapted(w)),
            None => Ok(()),
        }
    }

    /// True if row `t` is measurable for partition `t - 1` (`t >= 1`) and row 0
    /// for partition 0.
    pub fn is_predictable(&self, space: &FilteredSpace) -> bool {
        let tol = self.tol();
        (0..self.0.len()).all(|t| space.is_measurable(t.saturating_sub(1), &self.0[t], tol))
    }

    /// True if `E[y_t | F_{t-1}] = y_{t-1}` for all `t >= 1` (within tolerance).
    pub fn is_martingale(&self, space: &FilteredSpace) -> bool {
        let tol = self.tol();
        self.is_adapted(space)
            && (1..self.0.len()).all(|t| {
                space.cond_exp_slice(&self.0[t], t - 1).iter().zip(&self.0[t - 1]).all(|(a, b)| (a - b).abs() <= tol)
            })
    }
}

/// Pathwise `max_t |y_t|`.
pub fn sup_norm(y: &Process) -> RandVar {
    let n = y.rows().first().map_or(0, Vec::len);
    let mut out = vec![0.0f64; n];
    for r in y.rows() {
        for (o, v) in out.iter_mut().zip(r) {
            *o = o.max(v.abs());
        }
    }
    RandVar::new(out)
}

/// `(oy)_t = E[y_t | F_t]`.
pub fn optional_projection(space: &FilteredSpace, y: &Process) -> Process {
    Process(y.rows().iter().enumerate().map(|(t, r)| space.cond_exp_slice(r, t)).collect())
}

/// `(py)_t = E[y_t | F_{t-1}]`, with `F_{-1} = F_0`.
pub fn predictable_projection(space: &FilteredSpace, y: &Process) -> Process {
    Process(y.rows().iter().enumerate().map(|(t, r)| space.cond_exp_slice(r, t.saturating_sub(1))).collect())
}

/// `(y_-)_t = y_{t-1}` for `t >= 1`, `(y_-)_0 = y_0`.
pub fn left_limit(y: &Process) -> Process {
    let rows = y.rows();
    Process((0..rows.len()).map(|t| rows[t.saturating_sub(1)].clone()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppedSup {
    pub value: f64,
    pub witness: StoppingTime,
}

/// `sup_tau p(y_tau)` over every stopping time. The witness is the first
/// maximizer in enumeration order.
pub fn p_t(spec: &SeminormSpec, space: &FilteredSpace, y: &Process, bound: usize) -> Result<StoppedSup> {
    y.check_shape(space)?;
    let taus = space.enumerate_stopping_times(bound)?;
    let mut best: Option<StoppedSup> = None;
    for tau in taus {
        let v = spec.seminorm(space, &y.stopped(&tau));
        if best.as_ref().is_none_or(|b| v > b.value) {
            best = Some(StoppedSup { value: v, witness: tau });
        }
    }
    Ok(best.expect("at least one stopping time"))
}

/// `sup_tau E|y_tau|` by backward induction on the Snell envelope of the
/// adapted reward `E[|y_t| | F_t]`.
pub fn snell_sup(space: &FilteredSpace, y: &Process) -> Result<f64> {
    y.check_shape(space)?;
    let reward = optional_projection(space, &y.abs());
    let horizon = space.horizon();
    let mut u = reward.row(horizon).to_vec();
    for t in (0..horizon).rev() {
        let cont = space.cond_exp_slice(&u, t);
        u = reward.row(t).iter().zip(&cont).map(|(r, c)| r.max(*c)).collect();
    }
    Ok(space.expect_slice(&u))
}

/// Regularity on the grid: `(py)_t = y_{t-1}` for `t >= 1`, i.e. `y` is a
/// martingale.
pub fn is_regular(space: &FilteredSpace, y: &Process) -> Result<bool> {
    y.require_adapted(space)?;
    Ok(y.is_martingale(space))
}
