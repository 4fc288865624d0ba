//! Seeded generators for random variables, processes and measures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measures::MeasurePair;
use crate::process::Process;
use crate::space::{FilteredSpace, RandVar};

/// A generator derived from a base seed and a label, so independent checks
/// draw independent but reproducible streams.
pub fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    // FNV-1a over the label, mixed with the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h.rotate_left(17))
}

/// Values uniform in `[-3, 3]`, some snapped to small integers so ties occur.
pub fn random_values(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let v: f64 = rng.gen_range(-3.0..3.0);
            if rng.gen_bool(0.2) {
                v.round()
            } else {
                v
            }
        })
        .collect()
}

pub fn random_rv(rng: &mut impl Rng, n: usize) -> RandVar {
    RandVar::new(random_values(rng, n))
}

pub fn random_nonneg_rv(rng: &mut impl Rng, n: usize) -> RandVar {
    random_rv(rng, n).abs()
}

/// A raw process (no measurability imposed).
pub fn random_process(rng: &mut impl Rng, space: &FilteredSpace) -> Process {
    let n = space.n_atoms();
    let rows = (0..=space.horizon()).map(|_| random_values(rng, n)).collect();
    Process::from_rows(rows)
}

/// An adapted process: each row averaged onto the partition at its time.
pub fn random_adapted(rng: &mut impl Rng, space: &FilteredSpace) -> Process {
    let raw = random_process(rng, space);
    let rows = (0..=space.horizon()).map(|t| space.cond_exp_slice(raw.row(t), t)).collect();
    Process::from_rows(rows)
}

/// The martingale `E[xi | F_t]` of a random terminal value.
pub fn random_martingale(rng: &mut impl Rng, space: &FilteredSpace) -> Process {
    let xi = random_values(rng, space.n_atoms());
    Process::martingale(space, &RandVar::new(xi))
}

/// A supermartingale: a martingale minus a nondecreasing predictable drift.
pub fn random_supermartingale(rng: &mut impl Rng, space: &FilteredSpace) -> Process {
    let m = random_martingale(rng, space);
    let n = space.n_atoms();
    let mut drift = vec![0.0; n];
    let mut rows = vec![m.row(0).to_vec()];
    for t in 1..=space.horizon() {
        let inc: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let inc = space.cond_exp_slice(&inc, t - 1);
        for (d, i) in drift.iter_mut().zip(&inc) {
            *d += i;
        }
        rows.push(m.row(t).iter().zip(&drift).map(|(a, d)| a - d).collect());
    }
    Process::from_rows(rows)
}

/// A raw measure pair with about half of the entries zero.
pub fn random_measure(rng: &mut impl Rng, space: &FilteredSpace) -> MeasurePair {
    let n = space.n_atoms();
    let sparse = |rng: &mut dyn rand::RngCore| -> Vec<f64> {
        (0..n).map(|_| if rng.gen_bool(0.5) { rng.gen_range(-2.0..2.0) } else { 0.0 }).collect()
    };
    let u = (0..=space.horizon()).map(|_| sparse(rng)).collect();
    let ut = (1..=space.horizon()).map(|_| sparse(rng)).collect();
    MeasurePair::new(u, ut)
}

/// A pair in the optional/predictable dual space.
pub fn random_dual_measure(rng: &mut impl Rng, space: &FilteredSpace) -> MeasurePair {
    crate::measures::project_measures(space, &random_measure(rng, space))
}

/// An optional single measure `w` (row `t` measurable for partition `t`).
pub fn random_optional_measure(rng: &mut impl Rng, space: &FilteredSpace) -> Vec<Vec<f64>> {
    (0..=space.horizon()).map(|t| space.cond_exp_slice(&random_values(rng, space.n_atoms()), t)).collect()
}
