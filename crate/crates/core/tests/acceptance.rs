//! Acceptance suite: one PASS/FAIL line per criterion over a batch of seeded
//! random scenarios (at most 8 atoms, horizon at most 4).
//!
//! Runs without the libtest harness so the lines are always printed. The
//! process exits nonzero when a criterion fails unexpectedly; criteria listed
//! in `KNOWN_UNATTAINABLE` are printed as FAIL but do not abort the run.

use std::time::Instant;

use procdual::audit::Status;
use procdual::doob::{decomposition_check, doob_decompose, polar_jensen_check, quasimartingale_bound_check, var_p};
use procdual::duality::{holder_check, quotient_norm, sandwich_check};
use procdual::measures::{adjoint_gap, orthocomplement};
use procdual::norms::{choquet_integral, doob_constant, spectral_rho, SeminormSpec};
use procdual::process::{left_limit, optional_projection, p_t, predictable_projection, snell_sup, Process};
use procdual::sample::{random_martingale, random_measure, random_nonneg_rv, random_process, random_rv, rng_for};
use procdual::scenario::{plant_defect, random_scenario, Defect, RandomOptions, Scenario};
use procdual::space::{FilteredSpace, RandVar, DEFAULT_ENUMERATION_BOUND};
use procdual::verify::{verify, verify_file, VerifyOptions};

const BATCH: u64 = 100;
const TIME_LIMIT_S: f64 = 60.0;

/// Criteria that cannot be met as stated; see the project notes.
const KNOWN_UNATTAINABLE: &[usize] = &[10];

fn batch() -> Vec<Scenario> {
    (1..=BATCH)
        .map(|seed| {
            let atoms = 2 + (seed % 7) as usize;
            let horizon = 1 + ((seed / 7) % 4) as usize;
            random_scenario(RandomOptions::new(atoms, horizon, seed)).expect("batch scenario")
        })
        .collect()
}

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn left_limit_identity(b: &[Scenario]) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (i, s) in b.iter().enumerate() {
        let mut rng = rng_for(i as u64, "acceptance/left-limit");
        let mut ys: Vec<Process> = s.file.processes.iter().map(|(_, p)| p.clone()).collect();
        ys.extend((0..20).map(|_| random_process(&mut rng, &s.space)));
        for y in &ys {
            let lhs = left_limit(&optional_projection(&s.space, y));
            let rhs = predictable_projection(&s.space, &left_limit(y));
            worst = worst.max(lhs.max_abs_diff(&rhs));
            count += 1;
        }
    }
    verdict(worst <= 1e-12, format!("{count} processes, max gap {worst:.1e}"))
}

fn holder(b: &[Scenario]) -> Verdict {
    let mut worst = f64::INFINITY;
    for (i, s) in b.iter().enumerate() {
        for (_, spec) in s.file.norms.iter() {
            let o = holder_check(&s.space, spec, 10, i as u64).unwrap();
            worst = worst.min(o.margin);
        }
    }
    verdict(worst >= -1e-9, format!("Lp, Orlicz, spectral; worst margin {worst:.3e}"))
}

fn orlicz_sandwich(b: &[Scenario]) -> Verdict {
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for spec in [SeminormSpec::orlicz_power(2.0), SeminormSpec::orlicz_exp()] {
        for (i, s) in b.iter().enumerate() {
            let mut rng = rng_for(i as u64, "acceptance/orlicz");
            for _ in 0..2 {
                let eta = random_rv(&mut rng, s.space.n_atoms());
                let polar = spec.polar(&s.space, &eta);
                let lux = spec.conjugate_luxemburg(&s.space, &eta).unwrap();
                worst = worst.min(polar - lux).min(2.0 * lux - polar);
                count += 1;
            }
        }
    }
    verdict(worst >= -1e-8, format!("{count} eta over Power(2) and Exp; worst margin {worst:.3e}"))
}

fn choquet(b: &[Scenario]) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for gamma in [0.3, 0.5, 0.8] {
        let spec = SeminormSpec::spectral(gamma);
        for (i, s) in b.iter().enumerate() {
            let mut rng = rng_for(i as u64, "acceptance/choquet");
            for _ in 0..2 {
                let eta = random_nonneg_rv(&mut rng, s.space.n_atoms());
                let c = choquet_integral(&spec, &s.space, &eta).unwrap();
                worst = worst.max((c - spectral_rho(&spec, &s.space, &eta).unwrap()).abs());
            }
        }
    }
    let spec = SeminormSpec::spectral(0.5);
    for (i, s) in b.iter().enumerate() {
        let n = s.space.n_atoms();
        let mut rng = rng_for(i as u64, "acceptance/comonotone");
        let x = random_nonneg_rv(&mut rng, n);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &c| x[a].total_cmp(&x[c]));
        let mut vals = random_nonneg_rv(&mut rng, n).into_values();
        vals.sort_by(f64::total_cmp);
        let mut y = vec![0.0; n];
        for (rank, &a) in order.iter().enumerate() {
            y[a] = vals[rank];
        }
        let y = RandVar::new(y);
        let lhs = spectral_rho(&spec, &s.space, &x.add(&y)).unwrap();
        let rhs = spectral_rho(&spec, &s.space, &x).unwrap() + spectral_rho(&spec, &s.space, &y).unwrap();
        worst = worst.max((lhs - rhs).abs());
        pairs += 1;
    }
    let s4 = FilteredSpace::uniform(4, vec![vec![vec![0, 1, 2, 3]]]).unwrap();
    let worked = spec.polar(&s4, &RandVar::new(vec![3.0, 1.0, 1.0, 5.0]));
    let worked_gap = (worked - (2.0 + 2f64.sqrt())).abs();
    verdict(
        worst <= 1e-9 && worked_gap <= 1e-9,
        format!("600 identities, {pairs} comonotone pairs, max gap {worst:.1e}; rho(3,1,1,5) = {worked:.12}"),
    )
}

fn adapted_instances(s: &Scenario) -> Vec<&Process> {
    s.file.processes.iter().map(|(_, p)| p).filter(|p| p.is_adapted(&s.space)).collect()
}

fn snell_and_sandwich(b: &[Scenario]) -> Verdict {
    let l1 = SeminormSpec::lp(1.0);
    let mut snell_gap: f64 = 0.0;
    let mut violations = 0;
    let mut count = 0;
    for s in b {
        for y in adapted_instances(s) {
            let a = snell_sup(&s.space, y).unwrap();
            let e = p_t(&l1, &s.space, y, DEFAULT_ENUMERATION_BOUND).unwrap();
            snell_gap = snell_gap.max((a - e.value).abs());
            let (o, _) = sandwich_check(&s.space, &l1, y, DEFAULT_ENUMERATION_BOUND).unwrap();
            if !o.passed() {
                violations += 1;
            }
            count += 1;
        }
    }
    verdict(
        snell_gap <= 1e-10 && violations == 0,
        format!("{count} instances, Snell vs enumeration gap {snell_gap:.1e}, sandwich violations {violations}"),
    )
}

fn martingale_quotient(b: &[Scenario]) -> Verdict {
    let l1 = SeminormSpec::lp(1.0);
    let mut worst: f64 = 0.0;
    for (i, s) in b.iter().enumerate() {
        let mut rng = rng_for(i as u64, "acceptance/mq");
        let m = random_martingale(&mut rng, &s.space);
        let q = quotient_norm(&s.space, &l1, &m).unwrap();
        let target = l1.seminorm(&s.space, &m.at_time(s.space.horizon()));
        worst = worst.max((q.value - target).abs());
    }
    verdict(worst <= 1e-8, format!("{BATCH} martingales, max |p_D - E|y_T|| {worst:.1e}"))
}

fn orthocomplement_all(b: &[Scenario]) -> Verdict {
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    for s in b {
        let r = orthocomplement(&s.space);
        worst = worst.max(r.max_inner);
        if !r.outcome(1e-12).passed() {
            bad += 1;
        }
    }
    verdict(bad == 0, format!("{} spaces, rank mismatches {bad}, max inner product {worst:.1e}", b.len()))
}

fn adjoint(b: &[Scenario]) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (i, s) in b.iter().enumerate() {
        let mut rng = rng_for(i as u64, "acceptance/adjoint");
        let mut ms: Vec<_> = s.file.measures.iter().map(|(_, m)| m.clone()).collect();
        ms.extend((0..5).map(|_| random_measure(&mut rng, &s.space)));
        for m in &ms {
            for _ in 0..5 {
                let y = random_process(&mut rng, &s.space);
                worst = worst.max(adjoint_gap(&s.space, &y, m).unwrap());
                count += 1;
            }
        }
    }
    verdict(worst <= 1e-12, format!("{count} (y, m) pairs, max gap {worst:.1e}"))
}

fn doob_constants(b: &[Scenario]) -> Verdict {
    let l2 = SeminormSpec::lp(2.0);
    let l1 = SeminormSpec::lp(1.0);
    let (mut max2, mut max1): (f64, f64) = (0.0, 0.0);
    for (i, s) in b.iter().enumerate() {
        max2 = max2.max(doob_constant(&l2, &l2, &s.space, 20, i as u64).estimate);
        max1 = max1.max(doob_constant(&l1, &l1, &s.space, 20, i as u64).estimate);
    }
    verdict(max2 <= 2.0 + 1e-9 && max1 > 1.5, format!("max L2 estimate {max2:.6}, max L1 estimate {max1:.4}"))
}

fn theorem_decomposition(b: &[Scenario]) -> Verdict {
    let mut decomposition_ok = true;
    let mut bound_violations = [0usize; 2];
    let mut worst = [f64::INFINITY; 2];
    let mut provable_ok = true;
    let mut count = 0;
    let specs = [SeminormSpec::lp(1.0), SeminormSpec::lp(2.0)];
    for s in b {
        for z in adapted_instances(s) {
            decomposition_ok &= decomposition_check(&s.space, z).unwrap().passed();
            for (k, spec) in specs.iter().enumerate() {
                let r = quasimartingale_bound_check(&s.space, spec, z, s.space.horizon(), 50_000, 3, 1).unwrap();
                if r.bound.status != Status::Pass {
                    bound_violations[k] += 1;
                }
                worst[k] = worst[k].min(r.bound.margin);
                provable_ok &= r.chain.passed() && r.converse.passed();
            }
            count += 1;
        }
    }
    let line = FilteredSpace::uniform(1, vec![vec![vec![0]]; 3]).unwrap();
    let z = Process::from_rows(vec![vec![2.0], vec![1.0], vec![0.0]]);
    let l1 = SeminormSpec::lp(1.0);
    let v = var_p(&line, &l1, &z, 2, 1000).unwrap();
    let r = quasimartingale_bound_check(&line, &l1, &z, 2, 1000, 5, 1).unwrap();
    let d = doob_decompose(&line, &z).unwrap();
    let example_ok = v.value == 2.0 && r.joint_bound == 6.0 && d.a.rows() == [vec![0.0], vec![1.0], vec![2.0]];
    let bound_ok = bound_violations == [0, 0];
    verdict(
        decomposition_ok && example_ok && provable_ok && bound_ok,
        format!(
            "{count} adapted Z: decomposition/uniqueness {}, Z=(2,1,0) gives Var {} and bound {}, \
             Var <= p°(2TV_A)+p°(|M_T|) violated on {} (L1, worst margin {:.3}) and {} (L2, worst margin {:.3}) \
             [the inequality is false in general; the provable chain bound and l(y) <= p_D(y) Var_p hold: {}]",
            if decomposition_ok { "ok" } else { "BROKEN" },
            v.value,
            r.joint_bound,
            bound_violations[0],
            worst[0],
            bound_violations[1],
            worst[1],
            provable_ok
        ),
    )
}

/// Reported separately so the unattainable part of criterion 10 cannot hide
/// a regression in the parts that must hold.
fn theorem_decomposition_required(b: &[Scenario]) -> bool {
    let line = FilteredSpace::uniform(1, vec![vec![vec![0]]; 3]).unwrap();
    let z = Process::from_rows(vec![vec![2.0], vec![1.0], vec![0.0]]);
    let l1 = SeminormSpec::lp(1.0);
    let example = var_p(&line, &l1, &z, 2, 1000).unwrap().value == 2.0;
    example
        && b.iter()
            .all(|s| adapted_instances(s).into_iter().all(|z| decomposition_check(&s.space, z).unwrap().passed()))
}

fn polar_jensen(b: &[Scenario]) -> Verdict {
    let mut lp_violations = 0;
    let mut spectral_findings = 0;
    let mut spectral_silent = 0;
    for (i, s) in b.iter().enumerate().step_by(4) {
        for p in [1.0, 2.0, 3.0] {
            let o =
                polar_jensen_check(&s.space, &SeminormSpec::lp(p), 10, i as u64, DEFAULT_ENUMERATION_BOUND).unwrap();
            if !o.passed() {
                lp_violations += 1;
            }
        }
        let o = polar_jensen_check(&s.space, &SeminormSpec::spectral(0.5), 10, i as u64, DEFAULT_ENUMERATION_BOUND)
            .unwrap();
        match o.status {
            Status::Pass => {}
            Status::Finding if !o.witness.is_null() => spectral_findings += 1,
            _ => spectral_silent += 1,
        }
    }
    verdict(
        lp_violations == 0 && spectral_silent == 0,
        format!(
            "Lp violations {lp_violations}; spectral audited: {spectral_findings} findings with witnesses, {spectral_silent} unexplained"
        ),
    )
}

fn defects(b: &[Scenario]) -> Verdict {
    let mut missed = Vec::new();
    for d in Defect::ALL {
        for s in b.iter().filter(|s| s.space.n_atoms() >= 3 && s.space.horizon() >= 2).take(3) {
            let mut f = s.file.clone();
            plant_defect(&mut f, d).unwrap();
            let r = verify_file(f, &VerifyOptions { samples: 3, ..Default::default() }).unwrap();
            let caught = r.records.iter().any(|r| r.status == Status::Fail && !r.witness.is_null());
            if !caught {
                missed.push(d.name());
            }
        }
    }
    verdict(missed.is_empty(), format!("5 defect generators x 3 scenarios; missed: {missed:?}"))
}

fn determinism(b: &[Scenario]) -> Verdict {
    let mut mismatches = 0;
    for s in b.iter().take(5) {
        let opts = VerifyOptions { samples: 3, seed: 17, ..Default::default() };
        let r1 = verify(s, &opts).unwrap();
        let r2 = verify(s, &opts).unwrap();
        let again =
            random_scenario(RandomOptions::new(s.space.n_atoms(), s.space.horizon(), s.file.metadata.seed.unwrap()))
                .unwrap();
        if r1.digest() != r2.digest() || again.digest() != s.digest() {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("5 scenarios verified twice, digest mismatches {mismatches}"))
}

fn main() {
    let b = batch();
    type Criterion = fn(&[Scenario]) -> Verdict;
    let criteria: [(usize, &str, Criterion); 13] = [
        (1, "optional/predictable left-limit identity", left_limit_identity),
        (2, "Hölder bound for pairings", holder),
        (3, "Orlicz polar sandwich", orlicz_sandwich),
        (4, "spectral Choquet identity", choquet),
        (5, "Snell value and p_T <= p_D <= 2 p_T", snell_and_sandwich),
        (6, "martingale quotient identity", martingale_quotient),
        (7, "orthocomplement ranks", orthocomplement_all),
        (8, "adjoint identity", adjoint),
        (9, "Doob L2 constant", doob_constants),
        (10, "quasimartingale decomposition and Var_p bound", theorem_decomposition),
        (11, "polar Jensen", polar_jensen),
        (12, "planted-defect detection", defects),
        (13, "determinism", determinism),
    ];
    let mut unexpected = Vec::new();
    for (id, name, f) in criteria {
        let start = Instant::now();
        let v = f(&b);
        let secs = start.elapsed().as_secs_f64();
        let ok = v.ok && secs < TIME_LIMIT_S;
        println!("{} {id:>2} {name}: {} ({secs:.1}s)", if ok { "PASS" } else { "FAIL" }, v.detail);
        if !ok && !KNOWN_UNATTAINABLE.contains(&id) {
            unexpected.push(id);
        }
    }
    if !theorem_decomposition_required(&b) {
        unexpected.push(10);
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
