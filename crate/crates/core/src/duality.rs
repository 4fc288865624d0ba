//! Quotient seminorms on adapted processes and the dual identities around
//! them.
//!
//! The quotient seminorm of an adapted `y` is
//! `p_D(y) = inf { p(sup_t |z_t|) : E[z_t | F_t] = y_t for all t }`. For L1
//! and L-infinity it is a linear program; the other families are exercised
//! through inequalities and polar identities only.

use serde::Serialize;
use serde_json::json;

use crate::audit::{Outcome, Worst};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus};
use crate::measures::{canonicalize, collapse, pairing, single_total_variation, total_variation, MeasurePair};
use crate::norms::{polar_oracle, SeminormSpec};
use crate::process::{optional_projection, p_t, predictable_projection, sup_norm, Process};
use crate::sample::{random_adapted, random_martingale, random_measure, random_process, rng_for};
use crate::space::{FilteredSpace, RandVar};

/// Tolerance for one-sided inequalities between computed quantities.
pub const INEQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct QuotientSolution {
    pub value: f64,
    /// A minimizer `z` with `E[z_t | F_t] = y_t`.
    pub z: Process,
    pub dual_value: f64,
    pub complementary_slackness: f64,
    /// Largest violation of the projection constraints at `z`.
    pub residual: f64,
    pub pivots: usize,
}

/// `p_D(y)` for L1 or L-infinity by linear programming.
pub fn quotient_norm(space: &FilteredSpace, spec: &SeminormSpec, y: &Process) -> Result<QuotientSolution> {
    y.require_adapted(space)?;
    if !spec.is_polyhedral() {
        return Err(Error::Unsupported(format!(
            "quotient seminorm is computed for L1 and Linf only, not {}",
            spec.label()
        )));
    }
    let l1 = matches!(spec, SeminormSpec::Lp { p } if *p == 1.0);
    let n = space.n_atoms();
    let h = space.horizon();
    let nz = n * (h + 1);
    let ns = if l1 { n } else { 1 };
    let zi = |t: usize, a: usize| t * n + a;
    let si = |a: usize| nz + if l1 { a } else { 0 };
    let mut lp = LinearProgram::new(nz + ns);
    for v in 0..nz {
        lp.set_free(v);
    }
    for a in 0..ns {
        lp.objective[nz + a] = if l1 { space.prob()[a] } else { 1.0 };
    }
    for t in 0..=h {
        for a in 0..n {
            let mut up = vec![0.0; nz + ns];
            up[zi(t, a)] = 1.0;
            up[si(a)] = -1.0;
            lp.add_ub(up, 0.0);
            let mut down = vec![0.0; nz + ns];
            down[zi(t, a)] = -1.0;
            down[si(a)] = -1.0;
            lp.add_ub(down, 0.0);
        }
        for b in space.partition(t).blocks() {
            let mass: f64 = b.iter().map(|&a| space.prob()[a]).sum();
            let mut row = vec![0.0; nz + ns];
            for &a in b {
                row[zi(t, a)] = space.prob()[a] / mass;
            }
            lp.add_eq(row, y.row(t)[b[0]]);
        }
    }
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(sol.status));
    }
    let z = Process::from_rows((0..=h).map(|t| sol.x[t * n..(t + 1) * n].to_vec()).collect());
    let residual = optional_projection(space, &z).max_abs_diff(y);
    Ok(QuotientSolution {
        value: sol.value,
        z,
        dual_value: sol.dual_value,
        complementary_slackness: sol.complementary_slackness,
        residual,
        pivots: sol.pivots,
    })
}

/// `p_D(y)` when computable, otherwise the upper bound `p(sup|y|)` from the
/// feasible point `z = y`. The flag tells which one was returned.
pub fn quotient_upper(space: &FilteredSpace, spec: &SeminormSpec, y: &Process) -> Result<(f64, bool)> {
    if spec.is_polyhedral() {
        Ok((quotient_norm(space, spec, y)?.value, true))
    } else {
        Ok((spec.seminorm(space, &sup_norm(y)), false))
    }
}

/// The sign-pattern process `z_t = xi sign(w_t)` built from a polar witness
/// `xi` of `sup_t`-total variation; it satisfies `sup_t |z_t| <= |xi|`.
fn sign_pattern(w: &[Vec<f64>], xi: &RandVar) -> Process {
    Process::from_rows(
        w.iter()
            .map(|row| {
                row.iter()
                    .zip(xi.values())
                    .map(|(v, x)| {
                        if *v > 0.0 {
                            *x
                        } else if *v < 0.0 {
                            -*x
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect(),
    )
}

const ORACLE_RESTARTS: usize = 4;
const ORACLE_ITERATIONS: usize = 300;

/// Hölder bound `<y, m> <= p(sup|y|) p°(|u| + |ut|)` on random raw `y` and
/// random pairs.
pub fn holder_check(space: &FilteredSpace, spec: &SeminormSpec, samples: usize, seed: u64) -> Result<Outcome> {
    let mut rng = rng_for(seed, &format!("holder/{}", spec.label()));
    let mut worst = Worst::new();
    for _ in 0..samples {
        let y = random_process(&mut rng, space);
        let m = random_measure(&mut rng, space);
        let lhs = pairing(space, &y, &m)?;
        let rhs = spec.seminorm(space, &sup_norm(&y)) * spec.polar(space, &total_variation(&m));
        worst.observe(rhs - lhs, || json!({ "y": y, "measure": m, "lhs": lhs, "rhs": rhs }));
    }
    Ok(worst.outcome(INEQ_TOL))
}

#[derive(Debug, Clone, Serialize)]
pub struct PolarAttainment {
    /// `p°(|w|)` for the collapsed measure.
    pub polar: f64,
    /// `p°(|u| + |ut|)` for the pair as given.
    pub pair_polar: f64,
    /// Pairing achieved by the sign-pattern witness.
    pub achieved: f64,
    /// `p(sup|y|)` of the witness (at most 1).
    pub witness_norm: f64,
    pub witness: Process,
}

/// Builds the sign-pattern witness for the collapsed measure of `m` and
/// evaluates it. Works for raw pairs: the collapse is exact on all processes.
pub fn polar_attainment(
    space: &FilteredSpace,
    spec: &SeminormSpec,
    m: &MeasurePair,
    seed: u64,
) -> Result<PolarAttainment> {
    m.check_shape(space)?;
    let w = collapse(m);
    let tvw = single_total_variation(&w);
    let polar = spec.polar(space, &tvw);
    let oracle = polar_oracle(spec, space, &tvw, ORACLE_RESTARTS, ORACLE_ITERATIONS, seed);
    let y = sign_pattern(&w, &oracle.witness);
    let achieved = pairing(space, &y, &MeasurePair::from_single(w))?;
    Ok(PolarAttainment {
        polar,
        pair_polar: spec.polar(space, &total_variation(m)),
        achieved,
        witness_norm: spec.seminorm(space, &sup_norm(&y)),
        witness: y,
    })
}

/// Polar of the total variation, tested in collapsed form: the witness never
/// exceeds `p°(|w|)`, reaches it within `rel_tol` on Lp specs, and
/// `p°(|w|) <= p°(|u| + |ut|)`.
pub fn pptv_check(
    space: &FilteredSpace,
    spec: &SeminormSpec,
    m: &MeasurePair,
    rel_tol: f64,
    seed: u64,
) -> Result<Outcome> {
    let a = polar_attainment(space, spec, m, seed)?;
    let upper = a.polar * a.witness_norm.max(0.0) - a.achieved;
    let dominated = a.pair_polar - a.polar;
    let mut margin = upper.min(dominated).min(1.0 + INEQ_TOL - a.witness_norm);
    if matches!(spec, SeminormSpec::Lp { .. }) {
        margin = margin.min(a.achieved - (1.0 - rel_tol) * a.polar);
    }
    Ok(Outcome::from_margin(margin, INEQ_TOL, serde_json::to_value(&a)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientPolarReport {
    /// `<y, (w, 0)> <= p_D(y) p°(|w|)` on sampled adapted `y`.
    pub upper: Outcome,
    /// Witness `y = o(z)` with `p_D(y) <= 1` reaching `(1 - eps) p°(|w|)`.
    pub attainment: Outcome,
    /// Whether `p_D` came from the linear program (otherwise its upper bound).
    pub exact_quotient: bool,
}

impl QuotientPolarReport {
    pub fn outcome(&self) -> Outcome {
        self.upper.clone().merge(self.attainment.clone())
    }
}

pub fn quotient_polar_check(
    space: &FilteredSpace,
    spec: &SeminormSpec,
    m: &MeasurePair,
    samples: usize,
    eps: f64,
    seed: u64,
) -> Result<QuotientPolarReport> {
    let canon = canonicalize(space, m, 8, seed)?;
    let w = canon.w;
    let single = MeasurePair::from_single(w.clone());
    let polar = spec.polar(space, &single_total_variation(&w));
    let mut rng = rng_for(seed, &format!("quotient-polar/{}", spec.label()));
    let mut worst = Worst::new();
    let mut exact = spec.is_polyhedral();
    for _ in 0..samples {
        let y = random_adapted(&mut rng, space);
        let (pd, is_exact) = quotient_upper(space, spec, &y)?;
        exact &= is_exact;
        let lhs = pairing(space, &y, &single)?;
        worst.observe(pd * polar - lhs, || json!({ "y": y, "lhs": lhs, "p_D(y)": pd, "polar": polar }));
    }
    let upper = worst.outcome(INEQ_TOL);

    let a = polar_attainment(space, spec, &single, seed)?;
    let y = optional_projection(space, &a.witness);
    // `z` itself is feasible for `o(z) = y`, so `p(sup|z|)` bounds `p_D(y)`.
    let pd = if spec.is_polyhedral() { quotient_norm(space, spec, &y)?.value } else { a.witness_norm };
    let achieved = pairing(space, &y, &single)?;
    let margin = (achieved - (1.0 - eps) * polar).min(1.0 + INEQ_TOL - pd);
    let witness = json!({
        "y": y,
        "achieved": achieved,
        "polar": polar,
        "p_D(y)": pd,
        "w": w,
    });
    let attainment = if polar == 0.0 {
        Outcome::from_margin(-(achieved.abs()), INEQ_TOL, witness)
    } else {
        Outcome::from_margin(margin, INEQ_TOL, witness)
    };
    Ok(QuotientPolarReport { upper, attainment, exact_quotient: exact })
}

#[derive(Debug, Clone, Serialize)]
pub struct Sandwich {
    pub p_t: f64,
    /// `p_D(y)` for L1/Linf, otherwise the upper bound `p(sup|y|)`.
    pub p_d: f64,
    pub exact_quotient: bool,
    pub stopping_witness: Vec<usize>,
}

/// `p_T(y) <= p_D(y) <= 2 p_T(y)`; for non-polyhedral specs only
/// `p_T(y) <= p(sup|y|)` is checked.
pub fn sandwich_check(
    space: &FilteredSpace,
    spec: &SeminormSpec,
    y: &Process,
    bound: usize,
) -> Result<(Outcome, Sandwich)> {
    y.require_adapted(space)?;
    let pt = p_t(spec, space, y, bound)?;
    let (pd, exact) = quotient_upper(space, spec, y)?;
    let s = Sandwich { p_t: pt.value, p_d: pd, exact_quotient: exact, stopping_witness: pt.witness.times().to_vec() };
    let margin = if exact { (pd - pt.value).min(2.0 * pt.value - pd) } else { pd - pt.value };
    Ok((Outcome::from_margin(margin, 1e-8, serde_json::to_value(&s)?), s))
}

/// For a martingale `y`, `p_D(y) = p(y_T)`.
pub fn martingale_quotient_check(space: &FilteredSpace, spec: &SeminormSpec, y: &Process) -> Result<Outcome> {
    let q = quotient_norm(space, spec, y)?;
    let target = spec.seminorm(space, &y.at_time(space.horizon()));
    Ok(Outcome::from_margin(-(q.value - target).abs(), 1e-8, json!({ "p_D": q.value, "p(y_T)": target, "y": y })))
}

/// Seminorm axioms and certificates for `p_D` on sampled adapted processes:
/// `p_D(y) <= p(sup|y|)`, homogeneity, triangle inequality, LP duality gap
/// and feasibility of the minimizer.
pub fn quotient_seminorm_check(
    space: &FilteredSpace,
    spec: &SeminormSpec,
    samples: usize,
    seed: u64,
) -> Result<Outcome> {
    let mut rng = rng_for(seed, &format!("quotient-seminorm/{}", spec.label()));
    let mut worst = Worst::new();
    for _ in 0..samples {
        let y = random_adapted(&mut rng, space);
        let x = random_adapted(&mut rng, space);
        let qy = quotient_norm(space, spec, &y)?;
        let qx = quotient_norm(space, spec, &x)?;
        let qs = quotient_norm(space, spec, &y.add(&x))?;
        let q2 = quotient_norm(space, spec, &y.scale(-2.5))?;
        let feasible = spec.seminorm(space, &sup_norm(&y));
        let w = || json!({ "y": y, "x": x });
        worst.observe(feasible - qy.value, w);
        worst.observe(qy.value + qx.value - qs.value, w);
        worst.observe(-(q2.value - 2.5 * qy.value).abs(), w);
        worst.observe(-(qy.value - qy.dual_value).abs(), w);
        worst.observe(-qy.residual, w);
        worst.observe(-qy.complementary_slackness, w);
    }
    Ok(worst.outcome(INEQ_TOL))
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularDualReport {
    /// Martingales are optional projections of constant paths.
    pub preimage: Outcome,
    /// `<m, (w, 0)> <= p(m_T) p°(|w|)` for martingales `m`.
    pub holder: Outcome,
    /// A non-regular `y` is separated by a predictable time.
    pub separation: Outcome,
}

impl RegularDualReport {
    pub fn outcome(&self) -> Outcome {
        self.preimage.clone().merge(self.holder.clone()).merge(self.separation.clone())
    }
}

/// Finds a time with `E(py_tau - y_{tau-}) != 0` for an adapted `y`. Scans
/// predictable stopping times first, then the restricted times `tau_B`
/// (equal to `t` on a block `B` of partition `t - 1`, never stopping
/// elsewhere).
pub fn separating_time(space: &FilteredSpace, y: &Process, bound: usize) -> Result<Option<serde_json::Value>> {
    y.require_adapted(space)?;
    let py = predictable_projection(space, y);
    let tol = 1e-10 * (1.0 + y.max_abs());
    let taus = space.enumerate_stopping_times(bound)?;
    for tau in taus.iter().filter(|t| t.predictable()) {
        let v: f64 = (0..space.n_atoms())
            .map(|a| {
                let t = tau.at(a);
                let left = y.row(t.saturating_sub(1))[a];
                space.prob()[a] * (py.row(t)[a] - left)
            })
            .sum();
        if v.abs() > tol {
            return Ok(Some(json!({ "kind": "predictable", "tau": tau.times(), "value": v })));
        }
    }
    for t in 1..=space.horizon() {
        for b in space.partition(t - 1).blocks() {
            let v: f64 = b.iter().map(|&a| space.prob()[a] * (py.row(t)[a] - y.row(t - 1)[a])).sum();
            if v.abs() > tol {
                let block: Vec<&str> = b.iter().map(|&a| space.atoms()[a].as_str()).collect();
                return Ok(Some(json!({ "kind": "restricted", "t": t, "block": block, "value": v })));
            }
        }
    }
    Ok(None)
}

pub fn regular_dual_check(
    space: &FilteredSpace,
    spec: &SeminormSpec,
    w: &[Vec<f64>],
    samples: usize,
    seed: u64,
    bound: usize,
) -> Result<RegularDualReport> {
    let single = MeasurePair::from_single(w.to_vec());
    single.check_shape(space)?;
    if let Some((t, msg)) =
        w.iter().enumerate().find_map(|(t, r)| space.measurability_witness(t, r, 1e-10).map(|m| (t, m)))
    {
        return Err(Error::NotInDual(format!("w at t={t} is not optional: {msg}")));
    }
    let polar = spec.polar(space, &single_total_variation(w));
    let mut rng = rng_for(seed, &format!("regular-dual/{}", spec.label()));
    let mut pre = Worst::new();
    let mut hol = Worst::new();
    let mut sep = Worst::new();
    for _ in 0..samples {
        let m = random_martingale(&mut rng, space);
        let terminal = m.at_time(space.horizon());
        let z = Process::constant_path(space, &terminal);
        let gap = optional_projection(space, &z).max_abs_diff(&m);
        pre.observe(-gap, || json!({ "martingale": m }));
        let lhs = pairing(space, &m, &single)?;
        let rhs = spec.seminorm(space, &terminal) * polar;
        hol.observe(rhs - lhs, || json!({ "martingale": m, "lhs": lhs, "rhs": rhs }));

        let y = random_adapted(&mut rng, space);
        if !y.is_martingale(space) {
            match separating_time(space, &y, bound)? {
                Some(v) => {
                    let value = v["value"].as_f64().unwrap_or(0.0).abs();
                    sep.observe(value, || v);
                }
                None => sep.observe(-1.0, || json!({ "y": y, "reason": "no separating time found" })),
            }
        }
    }
    Ok(RegularDualReport { preimage: pre.outcome(1e-12), holder: hol.outcome(INEQ_TOL), separation: sep.outcome(0.0) })
}
