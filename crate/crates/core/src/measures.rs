//! Random measure pairs `(u, ut)` acting on processes and their left limits.
//!
//! `u` has a row per time `0..=T`; `ut` has a row per time `1..=T` and acts on
//! the left limit `y_{t-1}`. On the grid the pair acts on any process only
//! through `w_t = u_t + ut_{t+1}` (with `ut_{T+1} = 0`); `canonicalize`
//! returns that single measure.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::audit::{Outcome, Worst};
use crate::error::{Error, Result};
use crate::linalg::{nullspace, rank};
use crate::process::{left_limit, optional_projection, predictable_projection, Process, MEASURABILITY_TOL};
use crate::sample::{random_adapted, rng_for};
use crate::space::{FilteredSpace, RandVar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurePair {
    pub u: Vec<Vec<f64>>,
    pub utilde: Vec<Vec<f64>>,
}

impl MeasurePair {
    pub fn new(u: Vec<Vec<f64>>, utilde: Vec<Vec<f64>>) -> Self {
        Self { u, utilde }
    }

    pub fn zero(space: &FilteredSpace) -> Self {
        let n = space.n_atoms();
        let h = space.horizon();
        Self { u: vec![vec![0.0; n]; h + 1], utilde: vec![vec![0.0; n]; h] }
    }

    /// `(w, 0)`.
    pub fn from_single(w: Vec<Vec<f64>>) -> Self {
        let n = w.first().map_or(0, Vec::len);
        let h = w.len().saturating_sub(1);
        Self { u: w, utilde: vec![vec![0.0; n]; h] }
    }

    /// `ut` at time `t` (`1..=T`).
    pub fn utilde_at(&self, t: usize) -> &[f64] {
        &self.utilde[t - 1]
    }

    pub fn check_shape(&self, space: &FilteredSpace) -> Result<()> {
        let n = space.n_atoms();
        let h = space.horizon();
        if self.u.len() != h + 1 || self.utilde.len() != h {
            return Err(Error::Dimension(format!(
                "measure pair has {} u rows and {} utilde rows, expected {} and {h}",
                self.u.len(),
                self.utilde.len(),
                h + 1
            )));
        }
        if self.u.iter().chain(&self.utilde).any(|r| r.len() != n) {
            return Err(Error::Dimension(format!("measure rows must have {n} entries")));
        }
        Ok(())
    }

    fn max_abs(&self) -> f64 {
        self.u.iter().chain(&self.utilde).flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn tol(&self) -> f64 {
        MEASURABILITY_TOL * (1.0 + self.max_abs())
    }
}

/// Pathwise `sum_t |u_t| + sum_t |ut_t|`.
pub fn total_variation(m: &MeasurePair) -> RandVar {
    let n = m.u.first().map_or(0, Vec::len);
    let mut tv = vec![0.0; n];
    for r in m.u.iter().chain(&m.utilde) {
        for (o, v) in tv.iter_mut().zip(r) {
            *o += v.abs();
        }
    }
    RandVar::new(tv)
}

/// Pathwise total variation of a single measure.
pub fn single_total_variation(w: &[Vec<f64>]) -> RandVar {
    total_variation(&MeasurePair::from_single(w.to_vec()))
}

/// `E[sum_t y_t u_t + sum_{t>=1} y_{t-1} ut_t]`.
pub fn pairing(space: &FilteredSpace, y: &Process, m: &MeasurePair) -> Result<f64> {
    y.check_shape(space)?;
    m.check_shape(space)?;
    let p = space.prob();
    let mut total = 0.0;
    for (t, row) in m.u.iter().enumerate() {
        total += weighted(p, y.row(t), row);
    }
    for t in 1..=space.horizon() {
        total += weighted(p, y.row(t - 1), m.utilde_at(t));
    }
    Ok(total)
}

fn weighted(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    p.iter().zip(a).zip(b).map(|((p, x), y)| p * x * y).sum()
}

/// `(u^o, ut^p)`: `u_t` averaged on partition `t`, `ut_t` on partition `t - 1`.
pub fn project_measures(space: &FilteredSpace, m: &MeasurePair) -> MeasurePair {
    MeasurePair {
        u: m.u.iter().enumerate().map(|(t, r)| space.cond_exp_slice(r, t)).collect(),
        utilde: m.utilde.iter().enumerate().map(|(i, r)| space.cond_exp_slice(r, i)).collect(),
    }
}

/// First row of the pair that breaks optional (for `u`) or predictable (for
/// `ut`) measurability.
pub fn dual_space_witness(space: &FilteredSpace, m: &MeasurePair) -> Option<String> {
    let tol = m.tol();
    for (t, r) in m.u.iter().enumerate() {
        if let Some(w) = space.measurability_witness(t, r, tol) {
            return Some(format!("u at t={t} is not optional: {w}"));
        }
    }
    for (i, r) in m.utilde.iter().enumerate() {
        if let Some(w) = space.measurability_witness(i, r, tol) {
            return Some(format!("utilde at t={} is not predictable: {w}", i + 1));
        }
    }
    None
}

/// Membership in the space of optional/predictable pairs.
pub fn is_in_m_hat(space: &FilteredSpace, m: &MeasurePair) -> bool {
    dual_space_witness(space, m).is_none()
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    /// Largest `|<y, m> - <y, (w, 0)>|` over the sampled adapted `y`.
    pub max_pairing_gap: f64,
    /// Smallest `(|u| + |ut|) - |w|` over atoms (nonnegative when `w` is no larger).
    pub tv_margin: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Canonical {
    pub w: Vec<Vec<f64>>,
    pub certificate: Certificate,
}

/// `w_t = u_t + ut_{t+1}`, without any check.
pub fn collapse(m: &MeasurePair) -> Vec<Vec<f64>> {
    let h = m.u.len() - 1;
    (0..=h)
        .map(
            |t| {
                if t < h {
                    m.u[t].iter().zip(m.utilde_at(t + 1)).map(|(a, b)| a + b).collect()
                } else {
                    m.u[t].clone()
                }
            },
        )
        .collect()
}

/// Collapses a dual pair to its single optional representative and certifies
/// the equivalence on `samples` random adapted processes.
pub fn canonicalize(space: &FilteredSpace, m: &MeasurePair, samples: usize, seed: u64) -> Result<Canonical> {
    m.check_shape(space)?;
    if let Some(w) = dual_space_witness(space, m) {
        return Err(Error::NotInDual(w));
    }
    let w = collapse(m);
    let single = MeasurePair::from_single(w.clone());
    let mut rng = rng_for(seed, "canonicalize");
    let mut gap: f64 = 0.0;
    for _ in 0..samples {
        let y = random_adapted(&mut rng, space);
        gap = gap.max((pairing(space, &y, m)? - pairing(space, &y, &single)?).abs());
    }
    let tv = total_variation(m);
    let tvw = single_total_variation(&w);
    let tv_margin = tv.values().iter().zip(tvw.values()).fold(f64::INFINITY, |acc, (a, b)| acc.min(a - b));
    Ok(Canonical { w, certificate: Certificate { max_pairing_gap: gap, tv_margin, samples } })
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationalReport {
    /// The identity holds on every basis process.
    pub holds: bool,
    /// `-max |lhs - rhs|` over basis processes.
    pub margin: f64,
    /// Basis process with the largest gap.
    pub witness: Option<serde_json::Value>,
    pub in_m_hat: bool,
}

/// Tests `<y, m> = E[sum oy_t u_t + sum p(y_-)_t ut_t]` on the unit processes
/// `1_{(atom, time)}`, which span all raw processes.
pub fn variational_check(space: &FilteredSpace, m: &MeasurePair) -> Result<VariationalReport> {
    m.check_shape(space)?;
    let n = space.n_atoms();
    let h = space.horizon();
    let mut worst = Worst::new();
    for s in 0..=h {
        for a in 0..n {
            let mut rows = vec![vec![0.0; n]; h + 1];
            rows[s][a] = 1.0;
            let y = Process::from_rows(rows);
            let lhs = pairing(space, &y, m)?;
            let oy = optional_projection(space, &y);
            let py = predictable_projection(space, &left_limit(&y));
            let mut rhs = 0.0;
            for t in 0..=h {
                rhs += weighted(space.prob(), oy.row(t), &m.u[t]);
            }
            for t in 1..=h {
                rhs += weighted(space.prob(), py.row(t), m.utilde_at(t));
            }
            let gap = (lhs - rhs).abs();
            worst.observe(-gap, || json!({ "atom": space.atoms()[a], "time": s, "lhs": lhs, "rhs": rhs }));
        }
    }
    let margin = worst.margin();
    let tol = m.tol();
    let holds = margin >= -tol;
    let outcome = worst.outcome(tol);
    Ok(VariationalReport {
        holds,
        margin,
        witness: if holds { None } else { Some(outcome.witness) },
        in_m_hat: is_in_m_hat(space, m),
    })
}

/// `|<oy, m> - <y, project_measures(m)>|`.
pub fn adjoint_gap(space: &FilteredSpace, y: &Process, m: &MeasurePair) -> Result<f64> {
    let lhs = pairing(space, &optional_projection(space, y), m)?;
    let rhs = pairing(space, y, &project_measures(space, m))?;
    Ok((lhs - rhs).abs())
}

#[derive(Debug, Clone, Serialize)]
pub struct OrthocomplementReport {
    pub dim_kernel: usize,
    pub expected_kernel: usize,
    pub dim_optional: usize,
    pub expected_optional: usize,
    /// Dimension of the annihilator of the kernel.
    pub dim_annihilator: usize,
    /// Rank of kernel basis together with optional basis.
    pub rank_union: usize,
    pub ambient: usize,
    /// Largest `|<k, w>|` over kernel basis `k` and optional basis `w`.
    pub max_inner: f64,
    /// Largest deviation from measurability among annihilator basis vectors.
    pub annihilator_measurability: f64,
}

impl OrthocomplementReport {
    pub fn outcome(&self, tol: f64) -> Outcome {
        let dims_ok = self.dim_kernel == self.expected_kernel
            && self.dim_optional == self.expected_optional
            && self.dim_annihilator == self.expected_optional
            && self.rank_union == self.ambient;
        let margin = -self.max_inner.max(self.annihilator_measurability);
        let witness = serde_json::to_value(self).unwrap_or_default();
        if dims_ok {
            Outcome::from_margin(margin, tol, witness)
        } else {
            Outcome::fail(margin.min(-1.0), witness)
        }
    }
}

/// Rank computations for the kernel of the optional projection and its
/// annihilator under the pairing `<z, (w, 0)> = E sum_t z_t w_t`.
pub fn orthocomplement(space: &FilteredSpace) -> OrthocomplementReport {
    let n = space.n_atoms();
    let h = space.horizon();
    let dim = n * (h + 1);
    let idx = |t: usize, a: usize| t * n + a;
    let p = space.prob();
    // Matrix of the optional projection on flattened raw processes.
    let mut pi = vec![vec![0.0; dim]; dim];
    for t in 0..=h {
        let part = space.partition(t);
        for b in part.blocks() {
            let mass: f64 = b.iter().map(|&a| p[a]).sum();
            for &a in b {
                for &c in b {
                    pi[idx(t, a)][idx(t, c)] = p[c] / mass;
                }
            }
        }
    }
    let tol = 1e-10;
    let kernel = nullspace(&pi, dim, tol);
    let mut optional = Vec::new();
    for t in 0..=h {
        for b in space.partition(t).blocks() {
            let mut v = vec![0.0; dim];
            for &a in b {
                v[idx(t, a)] = 1.0;
            }
            optional.push(v);
        }
    }
    let weights: Vec<f64> = (0..dim).map(|i| p[i % n]).collect();
    let inner = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).zip(&weights).map(|((a, b), w)| a * b * w).sum() };
    let mut max_inner: f64 = 0.0;
    for k in &kernel {
        for o in &optional {
            max_inner = max_inner.max(inner(k, o).abs());
        }
    }
    // Annihilator: w with <k, w> = 0 for all kernel vectors k.
    let weighted_kernel: Vec<Vec<f64>> =
        kernel.iter().map(|k| k.iter().zip(&weights).map(|(a, w)| a * w).collect()).collect();
    let annihilator = if weighted_kernel.is_empty() {
        (0..dim)
            .map(|i| {
                let mut v = vec![0.0; dim];
                v[i] = 1.0;
                v
            })
            .collect()
    } else {
        nullspace(&weighted_kernel, dim, tol)
    };
    let mut meas: f64 = 0.0;
    for v in &annihilator {
        for t in 0..=h {
            let row = &v[t * n..(t + 1) * n];
            let avg = space.cond_exp_slice(row, t);
            meas = meas.max(row.iter().zip(&avg).fold(0.0, |m, (a, b)| m.max((a - b).abs())));
        }
    }
    let mut union = kernel.clone();
    union.extend(optional.iter().cloned());
    let block_total: usize = (0..=h).map(|t| space.partition(t).block_count()).sum();
    OrthocomplementReport {
        dim_kernel: kernel.len(),
        expected_kernel: dim - block_total,
        dim_optional: rank(&optional, tol),
        expected_optional: block_total,
        dim_annihilator: annihilator.len(),
        rank_union: rank(&union, tol),
        ambient: dim,
        max_inner,
        annihilator_measurability: meas,
    }
}
