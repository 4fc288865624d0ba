//! Direct maximization of `E(x eta)` over the unit ball of a seminorm.
//!
//! For a law-invariant monotone seminorm the maximizer can be taken of the
//! form `sign(eta) g(|eta|)` with `g` nondecreasing and nonnegative, so the
//! search runs over nonnegative increments of `g` across the distinct levels
//! of `|eta|`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{conjugate_exponent, SeminormSpec, YoungSpec};
use crate::space::{FilteredSpace, RandVar};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    /// `E(witness eta)`, with `witness` normalized to seminorm 1.
    pub value: f64,
    pub witness: RandVar,
}

struct Levels {
    /// Atom indices grouped by distinct positive value of `|eta|`, ascending.
    groups: Vec<Vec<usize>>,
    sign: Vec<f64>,
    abs: Vec<f64>,
}

impl Levels {
    fn new(eta: &[f64]) -> Self {
        let abs: Vec<f64> = eta.iter().map(|v| v.abs()).collect();
        let mut vals: Vec<f64> = abs.iter().copied().filter(|v| *v > 0.0).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        let groups = vals.iter().map(|&v| (0..eta.len()).filter(|&i| abs[i] == v).collect()).collect();
        let sign = eta.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect();
        Self { groups, sign, abs }
    }

    fn build(&self, w: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.sign.len()];
        let mut g = 0.0;
        for (group, &inc) in self.groups.iter().zip(w) {
            g += inc;
            for &i in group {
                x[i] = self.sign[i] * g;
            }
        }
        x
    }
}

fn increments(vals: &[f64]) -> Vec<f64> {
    let mut w = vec![vals[0].max(0.0)];
    w.extend(vals.windows(2).map(|p| (p[1] - p[0]).max(0.0)));
    w
}

/// Per-level values of the known maximizer, when one is available: the
/// Hölder direction for Lp and power Young functions, the derivative of the
/// conjugate Young function at the optimal scale for the exponential one, and
/// the level-averaged weight for spectral specs.
fn exact_levels(spec: &SeminormSpec, prob: &[f64], levels: &Levels) -> Option<Vec<f64>> {
    let level_abs = || levels.groups.iter().map(|g| levels.abs[g[0]]);
    match spec {
        SeminormSpec::Lp { p } | SeminormSpec::Orlicz(YoungSpec::Power { p }) => {
            let q = conjugate_exponent(*p);
            q.is_finite().then(|| level_abs().map(|v| v.powf(q - 1.0)).collect())
        }
        SeminormSpec::Orlicz(YoungSpec::Exponential) => {
            let eta: Vec<f64> = levels.abs.clone();
            let (_, beta) = spec_young(spec).orlicz_polar(prob, &eta);
            (beta > 0.0).then(|| level_abs().map(|v| (v / beta).ln().max(0.0)).collect())
        }
        SeminormSpec::Spectral(d) => {
            let mut u = 1.0 - levels.groups.iter().flatten().map(|&i| prob[i]).sum::<f64>();
            let mut out = Vec::with_capacity(levels.groups.len());
            for g in &levels.groups {
                let mass: f64 = g.iter().map(|&i| prob[i]).sum();
                let hi = (u + mass).min(1.0);
                out.push((d.tail(u) - d.tail(hi)) / (hi - u).max(f64::MIN_POSITIVE));
                u = hi;
            }
            Some(out)
        }
    }
}

fn spec_young(spec: &SeminormSpec) -> super::YoungFn {
    match spec {
        SeminormSpec::Orlicz(y) => y.young_fn(),
        _ => unreachable!("only called for Orlicz specs"),
    }
}

fn ratio(spec: &SeminormSpec, prob: &[f64], eta: &[f64], x: &[f64]) -> f64 {
    let n = spec.value(prob, x);
    if n <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let pairing: f64 = prob.iter().zip(x).zip(eta).map(|((p, a), b)| p * a * b).sum();
    pairing / n
}

/// Lower bound on the polar of `eta` by multi-start pattern search.
/// Deterministic given `seed`.
pub fn polar_oracle(
    spec: &SeminormSpec,
    space: &FilteredSpace,
    eta: &RandVar,
    restarts: usize,
    iterations: usize,
    seed: u64,
) -> OracleResult {
    let prob = space.prob();
    let eta = eta.values();
    let levels = Levels::new(eta);
    let k = levels.groups.len();
    if k == 0 {
        return OracleResult { value: 0.0, witness: RandVar::zeros(eta.len()) };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut w = vec![0.0; k];
            w[j] = 1.0;
            w
        })
        .collect();
    if let Some(vals) = exact_levels(spec, prob, &levels) {
        starts.push(increments(&vals));
    }
    let lin: Vec<f64> = levels.groups.iter().map(|g| levels.abs[g[0]]).collect();
    starts.push(increments(&lin));
    for _ in 0..restarts {
        starts.push((0..k).map(|_| -rng.gen::<f64>().ln()).collect());
    }

    let mut best_w = starts[0].clone();
    let mut best = f64::NEG_INFINITY;
    let mut seeded: Vec<(f64, Vec<f64>)> =
        starts.into_iter().map(|w| (ratio(spec, prob, eta, &levels.build(&w)), w)).collect();
    seeded.sort_by(|a, b| b.0.total_cmp(&a.0));
    // Refine the most promising starts.
    let refine = seeded.len().min(restarts.max(1) + 2);
    for (v0, w0) in seeded.into_iter().take(refine) {
        let (v, w) = pattern_search(spec, prob, eta, &levels, w0, v0, iterations);
        if v > best {
            best = v;
            best_w = w;
        }
    }
    let x = levels.build(&best_w);
    let n = spec.value(prob, &x);
    let witness: Vec<f64> = x.iter().map(|v| v / n).collect();
    let value = prob.iter().zip(&witness).zip(eta).map(|((p, a), b)| p * a * b).sum();
    OracleResult { value, witness: RandVar::new(witness) }
}

fn pattern_search(
    spec: &SeminormSpec,
    prob: &[f64],
    eta: &[f64],
    levels: &Levels,
    mut w: Vec<f64>,
    mut value: f64,
    iterations: usize,
) -> (f64, Vec<f64>) {
    let scale = |w: &[f64]| w.iter().fold(0.0f64, |m, v| m.max(*v)).max(1e-300);
    let mut step = 0.5;
    for _ in 0..iterations {
        if step < 1e-12 {
            break;
        }
        let mut improved = false;
        let delta = step * scale(&w);
        for j in 0..w.len() {
            for dir in [1.0, -1.0] {
                let mut cand = w.clone();
                cand[j] = (cand[j] + dir * delta).max(0.0);
                if cand[j] == w[j] {
                    continue;
                }
                let v = ratio(spec, prob, eta, &levels.build(&cand));
                if v > value {
                    value = v;
                    w = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (value, w)
}
