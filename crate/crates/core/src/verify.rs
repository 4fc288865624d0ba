//! Check registry and orchestration.
//!
//! Each check maps to one identity or inequality and produces a record per
//! instance (a scenario object, a pair of objects, or a batch of random
//! samples). Checks run concurrently; the report is sorted by check id.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::audit::{Outcome, Status, Worst};
use crate::doob::{decomposition_check, polar_jensen_check, quasimartingale_bound_check, DoobDecomposition};
use crate::duality::{
    holder_check, martingale_quotient_check, pptv_check, quotient_polar_check, quotient_seminorm_check,
    regular_dual_check, sandwich_check,
};
use crate::error::{Error, Result};
use crate::measures::{adjoint_gap, canonicalize, dual_space_witness, orthocomplement, variational_check, MeasurePair};
use crate::norms::{check_properties, choquet_integral, doob_constant, spectral_rho, SeminormSpec};
use crate::process::{left_limit, optional_projection, p_t, predictable_projection, snell_sup, Process};
use crate::report::{Record, Report};
use crate::sample::{
    random_adapted, random_martingale, random_nonneg_rv, random_optional_measure, random_process, random_rv, rng_for,
};
use crate::scenario::{Scenario, ScenarioFile};
use crate::space::{RandVar, DEFAULT_ENUMERATION_BOUND};

pub struct CheckInfo {
    pub id: &'static str,
    pub description: &'static str,
}

macro_rules! registry {
    ($($id:literal => $desc:literal),* $(,)?) => {
        pub const CHECKS: &[CheckInfo] = &[$(CheckInfo { id: $id, description: $desc }),*];
    };
}

registry! {
    "adjoint" => "<oy, m> = <y, projected m> for raw y and every measure pair",
    "canonical" => "collapsed single measure pairs like the pair and has no larger total variation",
    "choquet" => "Choquet integral equals the spectral functional; comonotone additivity",
    "decomposition" => "Doob decomposition reconstructs Z, M martingale, A predictable from 0, unique",
    "decomposition-claims" => "claimed decompositions satisfy the Doob invariants",
    "doob-constant" => "estimated L2 Doob constant stays at most 2 (L1 estimate reported)",
    "dual-space" => "u optional and utilde predictable for every measure pair",
    "holder" => "<y, m> <= p(sup|y|) p°(|u| + |ut|) on random raw y and pairs",
    "left-limit" => "left limit of the optional projection equals predictable projection of the left limit",
    "martingale-claims" => "processes claimed to be martingales are adapted martingales",
    "martingale-quotient" => "p_D(y) = p(y_T) for martingales (L1, Linf)",
    "norm-properties" => "monotonicity, sandwich, order continuity, truncation and Jensen for each seminorm",
    "orlicz-sandwich" => "Luxemburg norm of the conjugate <= polar <= twice that norm",
    "orthocomplement" => "kernel of the optional projection is the annihilator of optional measures",
    "polar-jensen" => "p°(E[eta | F_tau]) <= p°(eta) for every stopping time",
    "pptv" => "polar of the total variation is attained by a sign-pattern process",
    "quasimartingale" => "Var_p bounds from the Doob decomposition and l(y) <= p_D(y) Var_p on simple y",
    "quotient-polar" => "polar of the quotient seminorm at w equals p°(|w|)",
    "quotient-seminorm" => "p_D is a seminorm below p(sup|y|) with matching LP certificates",
    "regular-dual" => "martingales as projections of constant paths, Hölder bound, separating times",
    "sandwich" => "p_T <= p_D <= 2 p_T",
    "snell" => "Snell envelope value equals the stopped-supremum L1 norm",
    "space" => "the filtered space is valid",
    "variational" => "the pair pairs through optional and predictable projections",
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Check ids to run; `None` runs all.
    pub checks: Option<Vec<String>>,
    /// Overrides the per-check tolerance when judging margins.
    pub tol: Option<f64>,
    pub seed: u64,
    pub samples: usize,
    /// Bound on enumerated stopping times.
    pub bound: usize,
    /// Bound on stopping chains used for `Var_p`.
    pub chain_bound: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { checks: None, tol: None, seed: 0, samples: 20, bound: DEFAULT_ENUMERATION_BOUND, chain_bound: 20_000 }
    }
}

pub fn is_known_check(id: &str) -> bool {
    CHECKS.iter().any(|c| c.id == id)
}

fn selected(opts: &VerifyOptions) -> Result<Vec<&'static str>> {
    match &opts.checks {
        None => Ok(CHECKS.iter().map(|c| c.id).collect()),
        Some(ids) => {
            let mut out = Vec::new();
            for id in ids {
                if id == "all" {
                    return Ok(CHECKS.iter().map(|c| c.id).collect());
                }
                let c = CHECKS.iter().find(|c| c.id == id).ok_or_else(|| Error::UnknownCheck(id.clone()))?;
                if !out.contains(&c.id) {
                    out.push(c.id);
                }
            }
            Ok(out)
        }
    }
}

/// Verifies a scenario file whose space may be invalid: a broken filtration
/// becomes a failing `space` record instead of an error. Other validation
/// errors are returned.
pub fn verify_file(file: ScenarioFile, opts: &VerifyOptions) -> Result<Report> {
    let ids = selected(opts)?;
    if let Err(e) = file.space.validate() {
        let digest = file.digest();
        let rec = Record::new("space", "space", &digest, Outcome::fail(-1.0, json!({ "error": e.to_string() })), 0.0);
        return Ok(Report::new(digest, opts.seed, vec![rec]));
    }
    verify_ids(&file.validate()?, &ids, opts)
}

pub fn verify(scenario: &Scenario, opts: &VerifyOptions) -> Result<Report> {
    let ids = selected(opts)?;
    verify_ids(scenario, &ids, opts)
}

fn verify_ids(scenario: &Scenario, ids: &[&'static str], opts: &VerifyOptions) -> Result<Report> {
    let digest = scenario.digest();
    let records: Vec<Record> = ids
        .par_iter()
        .flat_map_iter(|&id| {
            let start = Instant::now();
            let outcomes = run_check(id, scenario, opts);
            let ms = start.elapsed().as_secs_f64() * 1e3;
            outcomes
                .into_iter()
                .map(|(instance, o)| Record::new(id, instance, &digest, judge(o, opts.tol), ms))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(Report::new(digest, opts.seed, records))
}

fn judge(o: Outcome, tol: Option<f64>) -> Outcome {
    match (tol, o.status) {
        (Some(tol), Status::Pass | Status::Fail) => Outcome::from_margin(o.margin, tol, o.witness),
        (Some(tol), Status::Finding) if o.margin >= -tol => Outcome::pass(o.margin, o.witness),
        _ => o,
    }
}

/// Errors from unmet preconditions become skipped records; anything else is
/// a failure.
fn settle(r: Result<Outcome>) -> Outcome {
    match r {
        Ok(o) => o,
        Err(e @ (Error::NotAdapted(_) | Error::NotInDual(_) | Error::TooLarge { .. } | Error::Unsupported(_))) => {
            Outcome::skipped(e.to_string())
        }
        Err(e) => Outcome::fail(f64::NEG_INFINITY, json!({ "error": e.to_string() })),
    }
}

type Outcomes = Vec<(String, Outcome)>;

struct Ctx<'a> {
    sc: &'a Scenario,
    opts: &'a VerifyOptions,
    id: &'static str,
}

impl Ctx<'_> {
    fn seed(&self, instance: &str) -> u64 {
        rng_for(self.opts.seed, &format!("{}/{instance}", self.id)).gen()
    }

    fn norms(&self) -> impl Iterator<Item = (&String, &SeminormSpec)> {
        self.sc.file.norms.iter()
    }

    fn processes(&self) -> impl Iterator<Item = (&String, &Process)> {
        self.sc.file.processes.iter()
    }

    fn adapted(&self) -> impl Iterator<Item = (&String, &Process)> {
        let space = &self.sc.space;
        self.processes().filter(move |(_, p)| p.is_adapted(space))
    }

    fn measures(&self) -> impl Iterator<Item = (&String, &MeasurePair)> {
        self.sc.file.measures.iter()
    }
}

fn run_check(id: &'static str, sc: &Scenario, opts: &VerifyOptions) -> Outcomes {
    let cx = Ctx { sc, opts, id };
    let out = match id {
        "adjoint" => adjoint(&cx),
        "canonical" => canonical(&cx),
        "choquet" => choquet(&cx),
        "decomposition" => decomposition(&cx),
        "decomposition-claims" => decomposition_claims(&cx),
        "doob-constant" => doob_l2(&cx),
        "dual-space" => dual_space(&cx),
        "holder" => per_norm(&cx, |spec, seed| holder_check(&sc.space, spec, opts.samples, seed)),
        "left-limit" => left_limit_identity(&cx),
        "martingale-claims" => martingale_claims(&cx),
        "martingale-quotient" => martingale_quotient(&cx),
        "norm-properties" => per_norm(&cx, |spec, seed| {
            let r = check_properties(spec, &sc.space, opts.samples, seed, opts.bound)?;
            Ok(r.monotonicity
                .merge(r.sandwich)
                .merge(r.order_continuity)
                .merge(r.truncation)
                .merge(r.jensen)
                .merge(r.polar_jensen))
        }),
        "orlicz-sandwich" => orlicz_sandwich(&cx),
        "orthocomplement" => vec![("space".into(), orthocomplement(&sc.space).outcome(1e-12))],
        "polar-jensen" => {
            per_norm(&cx, |spec, seed| polar_jensen_check(&sc.space, spec, opts.samples, seed, opts.bound))
        }
        "pptv" => pptv(&cx),
        "quasimartingale" => quasimartingale(&cx),
        "quotient-polar" => quotient_polar(&cx),
        "quotient-seminorm" => polyhedral(&cx)
            .into_iter()
            .map(|(name, spec)| {
                let seed = cx.seed(&name);
                (name, settle(quotient_seminorm_check(&sc.space, &spec, opts.samples, seed)))
            })
            .collect(),
        "regular-dual" => regular_dual(&cx),
        "sandwich" => sandwich(&cx),
        "snell" => snell(&cx),
        "space" => vec![(
            "space".into(),
            Outcome::pass(
                0.0,
                json!({
                    "atoms": sc.space.n_atoms(),
                    "horizon": sc.space.horizon(),
                    "blocks": sc.space.filtration().iter().map(|p| p.block_count()).collect::<Vec<_>>(),
                }),
            ),
        )],
        "variational" => variational(&cx),
        _ => unreachable!("unregistered check {id}"),
    };
    if out.is_empty() {
        vec![("-".into(), Outcome::skipped("no applicable objects in the scenario"))]
    } else {
        out
    }
}

fn per_norm(cx: &Ctx, f: impl Fn(&SeminormSpec, u64) -> Result<Outcome>) -> Outcomes {
    cx.norms().map(|(name, spec)| (name.clone(), settle(f(spec, cx.seed(name))))).collect()
}

fn polyhedral(cx: &Ctx) -> Vec<(String, SeminormSpec)> {
    cx.norms().filter(|(_, s)| s.is_polyhedral()).map(|(n, s)| (n.clone(), s.clone())).collect()
}

fn left_limit_identity(cx: &Ctx) -> Outcomes {
    let space = &cx.sc.space;
    let gap = |y: &Process| {
        left_limit(&optional_projection(space, y)).max_abs_diff(&predictable_projection(space, &left_limit(y)))
    };
    let mut out: Outcomes = cx
        .processes()
        .map(|(name, y)| {
            let g = gap(y);
            (name.clone(), Outcome::from_margin(-g, 1e-12, json!({ "gap": g })))
        })
        .collect();
    let mut rng = rng_for(cx.seed("random"), "left-limit");
    let mut worst = Worst::new();
    for _ in 0..cx.opts.samples {
        let y = random_process(&mut rng, space);
        let g = gap(&y);
        worst.observe(-g, || json!({ "y": y, "gap": g }));
    }
    out.push(("random".into(), worst.outcome(1e-12)));
    out
}

fn orlicz_sandwich(cx: &Ctx) -> Outcomes {
    let space = &cx.sc.space;
    cx.norms()
        .filter(|(_, s)| matches!(s, SeminormSpec::Orlicz(_)))
        .map(|(name, spec)| {
            let mut rng = rng_for(cx.seed(name), "orlicz-sandwich");
            let mut etas: Vec<RandVar> = cx.sc.file.rvs.iter().map(|(_, r)| r.clone()).collect();
            etas.extend((0..cx.opts.samples).map(|_| random_rv(&mut rng, space.n_atoms())));
            let mut worst = Worst::new();
            for eta in etas {
                let polar = spec.polar(space, &eta);
                let lux = match spec.conjugate_luxemburg(space, &eta) {
                    Ok(v) => v,
                    Err(e) => return (name.clone(), settle(Err(e))),
                };
                let scale = 1.0 + polar;
                let w = || json!({ "eta": eta, "polar": polar, "conjugate_luxemburg": lux });
                worst.observe((polar - lux) / scale, w);
                worst.observe((2.0 * lux - polar) / scale, w);
            }
            (name.clone(), worst.outcome(1e-8))
        })
        .collect()
}

fn choquet(cx: &Ctx) -> Outcomes {
    let space = &cx.sc.space;
    let n = space.n_atoms();
    cx.norms()
        .filter(|(_, s)| matches!(s, SeminormSpec::Spectral(_)))
        .map(|(name, spec)| {
            let run = || -> Result<Outcome> {
                let mut rng = rng_for(cx.seed(name), "choquet");
                let mut etas: Vec<RandVar> = cx.sc.file.rvs.iter().map(|(_, r)| r.abs()).collect();
                etas.extend((0..cx.opts.samples).map(|_| random_nonneg_rv(&mut rng, n)));
                let mut worst = Worst::new();
                for eta in &etas {
                    let c = choquet_integral(spec, space, eta)?;
                    let r = spectral_rho(spec, space, eta)?;
                    worst.observe(-(c - r).abs(), || json!({ "eta": eta, "choquet": c, "rho": r }));
                }
                for _ in 0..cx.opts.samples {
                    let x = random_nonneg_rv(&mut rng, n);
                    let mut order: Vec<usize> = (0..n).collect();
                    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
                    let mut vals = random_nonneg_rv(&mut rng, n).into_values();
                    vals.sort_by(f64::total_cmp);
                    let mut y = vec![0.0; n];
                    for (rank, &i) in order.iter().enumerate() {
                        y[i] = vals[rank];
                    }
                    let y = RandVar::new(y);
                    let sum = spectral_rho(spec, space, &x.add(&y))?;
                    let parts = spectral_rho(spec, space, &x)? + spectral_rho(spec, space, &y)?;
                    worst.observe(-(sum - parts).abs(), || json!({ "x": x, "y": y, "rho_sum": sum, "sum_rho": parts }));
                }
                Ok(worst.outcome(1e-9))
            };
            (name.clone(), settle(run()))
        })
        .collect()
}

fn with_random_adapted(cx: &Ctx, label: &str) -> Vec<(String, Process)> {
    let mut out: Vec<(String, Process)> = cx.adapted().map(|(n, p)| (n.clone(), p.clone())).collect();
    let mut rng = rng_for(cx.seed(label), label);
    for i in 0..cx.opts.samples.min(5) {
        out.push((format!("random-{i}"), random_adapted(&mut rng, &cx.sc.space)));
    }
    out
}

fn snell(cx: &Ctx) -> Outcomes {
    let space = &cx.sc.space;
    let l1 = SeminormSpec::lp(1.0);
    with_random_adapted(cx, "snell")
        .into_iter()
        .map(|(name, y)| {
            let run = || -> Result<Outcome> {
                let s = snell_sup(space, &y)?;
                let e = p_t(&l1, space, &y, cx.opts.bound)?;
                Ok(Outcome::from_margin(
                    -(s - e.value).abs(),
                    1e-10,
                    json!({ "snell": s, "enumeration": e.value, "tau": e.witness.times() }),
                ))
            };
            (name, settle(run()))
        })
        .collect()
}

fn sandwich(cx: &Ctx) -> Outcomes {
    let space = &cx.sc.space;
    let ys = with_random_adapted(cx, "sandwich");
    let mut out = Vec::new();
    for (nname, spec) in cx.norms() {
        let mut combined: Option<Outcome> = None;
        for (pname, y) in &ys {
            let o = if pname.starts_with("random-") {
                settle(sandwich_check(space, spec, y, cx.opts.bound).map(|r| r.0))
            } else {
                out.push((
                    format!("{nname}/{pname}"),
                    settle(sandwich_check(space, spec, y, cx.opts.bound).map(|r| r.0)),
                ));
                continue;
            };
            combined = Some(match combined {
                None => o,
                Some(c) => c.merge(o),
            });
        }
        if let Some(c) = combined {
            out.push((format!("{nname}/random"), c));
        }
    }
    out
}

fn martingale_quotient(cx: &Ctx) -> Outcomes {
    let space = &cx.sc.space;
    let mut out = Vec::new();
    for (nname, spec) in polyhedral(cx) {
        for (pname, y) in cx.processes().filter(|(_, p)| p.is_martingale(space)) {
            out.push((format!("{nname}/{pname}"), settle(martingale_quotient_check(space, &spec, y))));
        }
        let mut rng = rng_for(cx.seed(&nname), "martingale-quotient");
        let mut acc: Option<Outcome> = None;
        for _ in 0..cx.opts.samples {
            let m = random_martingale(&mut rng, space);
            let o = settle(martingale_quotient_check(space, &spec, &m));
            acc = Some(match acc {
                None => o,
                Some(a) => a.merge(o),
            });
        }
        if let Some(a) = acc {
            out.push((format!("{nname}/random"), a));
        }
    }
    out
}

fn adjoint(cx: &Ctx) -> Outcomes {
    let space = &cx.sc.space;
    let mut rng = rng_for(cx.seed("random"), "adjoint");
    let randoms: Vec<Process> = (0..cx.opts.samples).map(|_| random_process(&mut rng, space)).collect();
    cx.measures()
        .map(|(mname, m)| {
            let run = || -> Result<Outcome> {
                let mut worst = Worst::new();
                for (label, y) in cx
                    .processes()
                    .map(|(n, p)| (n.clone(), p))
                    .chain(randoms.iter().enumerate().map(|(i, p)| (format!("random-{i}"), p)))
                {
                    let g = adjoint_gap(space, y, m)?;
                    worst.observe(-g, || json!({ "process": label, "gap": g }));
                }
                Ok(worst.outcome(1e-12))
            };
            (mname.clone(), settle(run()))
        })
        .collect()
}

fn doob_l2(cx: &Ctx) -> Outcomes {
    let space = &cx.sc.space;
    let seed = cx.seed("space");
    let l2 = SeminormSpec::lp(2.0);
    let l1 = SeminormSpec::lp(1.0);
    let e2 = doob_constant(&l2, &l2, space, cx.opts.samples, seed);
    let e1 = doob_constant(&l1, &l1, space, cx.opts.samples, seed);
    vec![(
        "L2".into(),
        Outcome::from_margin(
            2.0 - e2.estimate,
            1e-9,
            json!({ "l2_estimate": e2.estimate, "l2_witness": e2.witness, "l1_estimate": e1.estimate, "l1_witness": e1.witness }),
        ),
    )]
}

fn decomposition(cx: &Ctx) -> Outcomes {
    with_random_adapted(cx, "decomposition")
        .into_iter()
        .map(|(name, z)| (name, settle(decomposition_check(&cx.sc.space, &z))))
        .collect()
}

fn decomposition_claims(cx: &Ctx) -> Outcomes {
    let space = &cx.sc.space;
    cx.sc
        .file
        .claims
        .decompositions
        .iter()
        .map(|(name, c)| {
            let run = || -> Result<Outcome> {
                let z = cx.sc.process(&c.process)?;
                let mut tv = vec![0.0; space.n_atoms()];
                for t in 1..=space.horizon() {
                    for (v, (a, b)) in tv.iter_mut().zip(c.a.row(t).iter().zip(c.a.row(t - 1))) {
                        *v += (a - b).abs();
                    }
                }
                let d = DoobDecomposition { m: c.m.clone(), a: c.a.clone(), tv_a: RandVar::new(tv) };
                d.verify(space, z)
            };
            (name.clone(), settle(run()))
        })
        .collect()
}

fn martingale_claims(cx: &Ctx) -> Outcomes {
    let space = &cx.sc.space;
    cx.sc
        .file
        .claims
        .martingales
        .iter()
        .map(|name| {
            let run = || -> Result<Outcome> {
                let m = cx.sc.process(name)?;
                if let Some(w) = m.adaptedness_witness(space) {
                    return Ok(Outcome::fail(-1.0, json!({ "not_adapted": w })));
                }
                let mut worst = Worst::new();
                let scale = 1.0 + m.max_abs();
                for t in 1..=space.horizon() {
                    let cond = space.cond_exp_slice(m.row(t), t - 1);
                    let gap = cond.iter().zip(m.row(t - 1)).fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
                    worst.observe(-gap / scale, || json!({ "t": t, "gap": gap, "conditional": cond }));
                }
                Ok(worst.outcome(1e-12))
            };
            (name.clone(), settle(run()))
        })
        .collect()
}

fn quasimartingale(cx: &Ctx) -> Outcomes {
    let space = &cx.sc.space;
    let mut out = Vec::new();
    for (pname, z) in cx.adapted() {
        for (nname, spec) in cx.norms() {
            let inst = format!("{nname}/{pname}");
            let r = quasimartingale_bound_check(
                space,
                spec,
                z,
                space.horizon(),
                cx.opts.chain_bound,
                cx.opts.samples.min(10),
                cx.seed(&inst),
            )
            .map(|r| {
                let mut o = r.outcome();
                o.witness = serde_json::to_value(&r).unwrap_or_default();
                o
            });
            out.push((inst, settle(r)));
        }
    }
    out
}

fn dual_space(cx: &Ctx) -> Outcomes {
    cx.measures()
        .map(|(name, m)| {
            let o = match dual_space_witness(&cx.sc.space, m) {
                None => Outcome::pass(0.0, serde_json::Value::Null),
                Some(w) => Outcome::fail(-1.0, json!({ "violation": w })),
            };
            (name.clone(), o)
        })
        .collect()
}

fn variational(cx: &Ctx) -> Outcomes {
    cx.measures()
        .map(|(name, m)| {
            let o = variational_check(&cx.sc.space, m).map(|r| {
                let witness = json!({ "in_m_hat": r.in_m_hat, "witness": r.witness });
                if r.holds {
                    Outcome::pass(r.margin, witness)
                } else {
                    Outcome::fail(r.margin, witness)
                }
            });
            (name.clone(), settle(o))
        })
        .collect()
}

fn canonical(cx: &Ctx) -> Outcomes {
    cx.measures()
        .map(|(name, m)| {
            let o = canonicalize(&cx.sc.space, m, cx.opts.samples, cx.seed(name)).map(|c| {
                let scale = 1.0 + m.u.iter().chain(&m.utilde).flatten().fold(0.0f64, |a, v| a.max(v.abs()));
                let margin = (-c.certificate.max_pairing_gap / scale).min(c.certificate.tv_margin);
                Outcome::from_margin(margin, 1e-12, serde_json::to_value(&c).unwrap_or_default())
            });
            (name.clone(), settle(o))
        })
        .collect()
}

fn pptv(cx: &Ctx) -> Outcomes {
    let mut out = Vec::new();
    for (mname, m) in cx.measures() {
        for (nname, spec) in cx.norms() {
            let inst = format!("{nname}/{mname}");
            out.push((inst.clone(), settle(pptv_check(&cx.sc.space, spec, m, 1e-4, cx.seed(&inst)))));
        }
    }
    out
}

fn quotient_polar(cx: &Ctx) -> Outcomes {
    let mut out = Vec::new();
    for (mname, m) in cx.measures() {
        for (nname, spec) in cx.norms() {
            let inst = format!("{nname}/{mname}");
            let r = quotient_polar_check(&cx.sc.space, spec, m, cx.opts.samples.min(10), 1e-3, cx.seed(&inst))
                .map(|r| r.outcome());
            out.push((inst, settle(r)));
        }
    }
    out
}

fn regular_dual(cx: &Ctx) -> Outcomes {
    let space = &cx.sc.space;
    let mut ws: Vec<(String, Result<Vec<Vec<f64>>>)> =
        cx.measures().map(|(n, m)| (n.clone(), canonicalize(space, m, 0, 0).map(|c| c.w))).collect();
    if ws.is_empty() {
        let mut rng = rng_for(cx.seed("random"), "regular-dual");
        ws.push(("random".into(), Ok(random_optional_measure(&mut rng, space))));
    }
    let mut out = Vec::new();
    for (mname, w) in &ws {
        for (nname, spec) in cx.norms() {
            let inst = format!("{nname}/{mname}");
            let r = match w {
                Ok(w) => regular_dual_check(space, spec, w, cx.opts.samples, cx.seed(&inst), cx.opts.bound)
                    .map(|r| r.outcome()),
                Err(e) => Err(Error::NotInDual(e.to_string())),
            };
            out.push((inst, settle(r)));
        }
    }
    out
}
