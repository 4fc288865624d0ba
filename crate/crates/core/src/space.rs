//! Finite filtered probability spaces.
//!
//! The outcome set is a finite list of atoms with strictly positive
//! probabilities. The filtration is a list of `horizon + 1` partitions of the
//! atoms, each refining the previous one. The full sigma-algebra is always
//! the discrete one, so the last partition may be strictly coarser than the
//! atoms and raw processes stay distinguishable from adapted ones at every
//! time.

use std::collections::HashMap;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of stopping times (or stopping sequences) an
/// enumeration may produce.
pub const DEFAULT_ENUMERATION_BOUND: usize = 1_000_000;

const PROB_SUM_TOL: f64 = 1e-12;

/// A real value per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RandVar(Vec<f64>);

impl RandVar {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn constant(value: f64, n: usize) -> Self {
        Self(vec![value; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&x| f(x)).collect())
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| c * x)
    }

    pub fn add(&self, other: &RandVar) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RandVar) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &RandVar) -> f64 {
        self.0.iter().zip(&other.0).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl From<Vec<f64>> for RandVar {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl Index<usize> for RandVar {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A partition of the atom indices into blocks.
///
/// Blocks are kept in canonical form: atoms sorted inside each block, blocks
/// sorted by their smallest atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    /// Builds a partition of `0..n`, rejecting overlaps and gaps.
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> std::result::Result<Self, String> {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort_by_key(|b| b[0]);
        let mut block_of = vec![usize::MAX; n];
        for (k, b) in blocks.iter().enumerate() {
            for &a in b {
                if a >= n {
                    return Err(format!("atom index {a} out of range"));
                }
                if block_of[a] != usize::MAX {
                    return Err(format!("atom {a} appears in more than one block"));
                }
                block_of[a] = k;
            }
        }
        if let Some(a) = block_of.iter().position(|&k| k == usize::MAX) {
            return Err(format!("atom {a} is not covered by any block"));
        }
        Ok(Self { blocks, block_of })
    }

    pub fn trivial(n: usize) -> Self {
        Self { blocks: vec![(0..n).collect()], block_of: vec![0; n] }
    }

    pub fn discrete(n: usize) -> Self {
        Self { blocks: (0..n).map(|a| vec![a]).collect(), block_of: (0..n).collect() }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    /// True if every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|&a| coarser.block_of[a] == coarser.block_of[b[0]]))
    }
}

/// Serialized form of a filtered space; atoms in partitions are referenced by
/// label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceRepr {
    pub atoms: Vec<String>,
    pub prob: Vec<f64>,
    pub horizon: usize,
    pub filtration: Vec<Vec<Vec<String>>>,
}

impl SpaceRepr {
    /// Validates every invariant and builds the space. The error message names
    /// the violated invariant (and the time index, when there is one).
    pub fn validate(&self) -> Result<FilteredSpace> {
        let n = self.atoms.len();
        if n == 0 {
            return Err(Error::InvalidSpace("atom list is empty".into()));
        }
        let mut index = HashMap::new();
        for (i, a) in self.atoms.iter().enumerate() {
            if index.insert(a.as_str(), i).is_some() {
                return Err(Error::InvalidSpace(format!("duplicate atom label `{a}`")));
            }
        }
        if self.prob.len() != n {
            return Err(Error::InvalidSpace(format!("{} probabilities for {} atoms", self.prob.len(), n)));
        }
        if let Some((i, p)) = self.prob.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidSpace(format!(
                "probabilities must be strictly positive: atom `{}` has {p}",
                self.atoms[i]
            )));
        }
        let total: f64 = self.prob.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidSpace(format!("probabilities must sum to 1 (sum is {total})")));
        }
        if self.filtration.len() != self.horizon + 1 {
            return Err(Error::InvalidSpace(format!(
                "filtration has {} partitions, expected horizon + 1 = {}",
                self.filtration.len(),
                self.horizon + 1
            )));
        }
        let mut partitions = Vec::with_capacity(self.filtration.len());
        for (t, blocks) in self.filtration.iter().enumerate() {
            let mut idx_blocks = Vec::with_capacity(blocks.len());
            for b in blocks {
                let mut ib = Vec::with_capacity(b.len());
                for label in b {
                    let &i = index
                        .get(label.as_str())
                        .ok_or_else(|| Error::InvalidSpace(format!("partition at t={t}: unknown atom `{label}`")))?;
                    ib.push(i);
                }
                idx_blocks.push(ib);
            }
            let p =
                Partition::new(n, idx_blocks).map_err(|e| Error::InvalidSpace(format!("partition at t={t}: {e}")))?;
            partitions.push(p);
        }
        FilteredSpace::from_parts(self.atoms.clone(), self.prob.clone(), partitions)
    }
}

/// A finite outcome set with probabilities and a refining filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSpace {
    atoms: Vec<String>,
    prob: Vec<f64>,
    filtration: Vec<Partition>,
    /// `children[t][b]`: blocks of partition `t + 1` inside block `b` of partition `t`.
    children: Vec<Vec<Vec<usize>>>,
}

impl FilteredSpace {
    pub fn from_parts(atoms: Vec<String>, prob: Vec<f64>, filtration: Vec<Partition>) -> Result<Self> {
        let n = atoms.len();
        if filtration.is_empty() {
            return Err(Error::InvalidSpace("filtration is empty".into()));
        }
        if prob.len() != n {
            return Err(Error::InvalidSpace("probability count differs from atom count".into()));
        }
        let total: f64 = prob.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidSpace(format!("probabilities must sum to 1 (sum is {total})")));
        }
        if prob.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidSpace("probabilities must be strictly positive".into()));
        }
        for (t, p) in filtration.iter().enumerate() {
            if p.block_of.len() != n {
                return Err(Error::InvalidSpace(format!("partition at t={t} has wrong size")));
            }
        }
        for t in 0..filtration.len() - 1 {
            if !filtration[t + 1].refines(&filtration[t]) {
                return Err(Error::InvalidSpace(format!(
                    "filtration is not refining: partition at t={} does not refine partition at t={t}",
                    t + 1
                )));
            }
        }
        let children = (0..filtration.len() - 1)
            .map(|t| {
                let mut ch = vec![Vec::new(); filtration[t].block_count()];
                for (k, b) in filtration[t + 1].blocks.iter().enumerate() {
                    ch[filtration[t].block_of[b[0]]].push(k);
                }
                ch
            })
            .collect();
        Ok(Self { atoms, prob, filtration, children })
    }

    /// Uniform probabilities and the given partitions (as index lists).
    pub fn uniform(n: usize, filtration: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let atoms = (0..n).map(|i| format!("w{i}")).collect();
        let parts = filtration
            .into_iter()
            .enumerate()
            .map(|(t, b)| Partition::new(n, b).map_err(|e| Error::InvalidSpace(format!("partition at t={t}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(atoms, vec![1.0 / n as f64; n], parts)
    }

    pub fn to_repr(&self) -> SpaceRepr {
        SpaceRepr {
            atoms: self.atoms.clone(),
            prob: self.prob.clone(),
            horizon: self.horizon(),
            filtration: self
                .filtration
                .iter()
                .map(|p| p.blocks.iter().map(|b| b.iter().map(|&a| self.atoms[a].clone()).collect()).collect())
                .collect(),
        }
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn prob(&self) -> &[f64] {
        &self.prob
    }

    pub fn horizon(&self) -> usize {
        self.filtration.len() - 1
    }

    pub fn partition(&self, t: usize) -> &Partition {
        &self.filtration[t]
    }

    pub fn filtration(&self) -> &[Partition] {
        &self.filtration
    }

    /// Blocks of partition `t + 1` contained in block `block` of partition `t`.
    pub fn children(&self, t: usize, block: usize) -> &[usize] {
        &self.children[t][block]
    }

    pub fn block_prob(&self, t: usize, block: usize) -> f64 {
        self.filtration[t].blocks[block].iter().map(|&a| self.prob[a]).sum()
    }

    pub fn expect(&self, xi: &RandVar) -> f64 {
        self.expect_slice(xi.values())
    }

    pub(crate) fn expect_slice(&self, xi: &[f64]) -> f64 {
        xi.iter().zip(&self.prob).map(|(x, p)| x * p).sum()
    }

    fn check_len(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.n_atoms() {
            return Err(Error::Dimension(format!(
                "random variable has {} entries, space has {} atoms",
                xi.len(),
                self.n_atoms()
            )));
        }
        Ok(())
    }

    fn check_time(&self, t: usize) -> Result<()> {
        if t > self.horizon() {
            return Err(Error::TimeOutOfRange { t, horizon: self.horizon() });
        }
        Ok(())
    }

    /// Probability-weighted average of `xi` over each block of `partition`.
    pub(crate) fn average_over(&self, partition: &Partition, xi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; xi.len()];
        for b in &partition.blocks {
            let (mut mass, mut sum) = (0.0, 0.0);
            for &a in b {
                mass += self.prob[a];
                sum += self.prob[a] * xi[a];
            }
            let avg = sum / mass;
            for &a in b {
                out[a] = avg;
            }
        }
        out
    }

    pub(crate) fn cond_exp_slice(&self, xi: &[f64], t: usize) -> Vec<f64> {
        self.average_over(&self.filtration[t], xi)
    }

    /// Conditional expectation given the partition at `t`.
    pub fn cond_exp(&self, xi: &RandVar, t: usize) -> Result<RandVar> {
        self.check_time(t)?;
        self.check_len(xi.values())?;
        Ok(RandVar(self.cond_exp_slice(xi.values(), t)))
    }

    /// The partition generating the sigma-algebra at a stopping time: blocks
    /// of partition `t` on which the time equals `t`, over all `t`.
    pub fn stopped_partition(&self, tau: &StoppingTime) -> Result<Partition> {
        self.validate_stopping_time(tau.times())?;
        let mut blocks = Vec::new();
        for (t, p) in self.filtration.iter().enumerate() {
            for b in &p.blocks {
                if tau.times[b[0]] == t {
                    blocks.push(b.clone());
                }
            }
        }
        Partition::new(self.n_atoms(), blocks).map_err(Error::InvalidStoppingTime)
    }

    /// Conditional expectation given the sigma-algebra at a stopping time.
    pub fn cond_exp_at(&self, xi: &RandVar, tau: &StoppingTime) -> Result<RandVar> {
        self.check_len(xi.values())?;
        let part = self.stopped_partition(tau)?;
        Ok(RandVar(self.average_over(&part, xi.values())))
    }

    /// Returns a description of the first block of partition `t` on which
    /// `values` is not constant (within `tol`), if any.
    pub fn measurability_witness(&self, t: usize, values: &[f64], tol: f64) -> Option<String> {
        let p = &self.filtration[t];
        for b in &p.blocks {
            let v0 = values[b[0]];
            for &a in &b[1..] {
                if (values[a] - v0).abs() > tol {
                    return Some(format!(
                        "value differs inside a block of partition t={t}: {}={} vs {}={}",
                        self.atoms[b[0]], v0, self.atoms[a], values[a]
                    ));
                }
            }
        }
        None
    }

    pub fn is_measurable(&self, t: usize, values: &[f64], tol: f64) -> bool {
        self.measurability_witness(t, values, tol).is_none()
    }

    /// Checks that `{tau <= t}` is a union of blocks of partition `t` for every `t`.
    pub fn validate_stopping_time(&self, times: &[usize]) -> Result<()> {
        self.check_len_times(times)?;
        let horizon = self.horizon();
        if let Some(a) = times.iter().position(|&s| s > horizon) {
            return Err(Error::InvalidStoppingTime(format!(
                "value {} at atom {} exceeds horizon {horizon}",
                times[a], self.atoms[a]
            )));
        }
        for (t, p) in self.filtration.iter().enumerate() {
            for b in &p.blocks {
                let first = times[b[0]] <= t;
                if b.iter().any(|&a| (times[a] <= t) != first) {
                    return Err(Error::InvalidStoppingTime(format!(
                        "{{tau <= {t}}} is not a union of blocks of partition t={t}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Predictability: `{tau = t}` is a union of blocks of partition `t - 1`
    /// for `t >= 1`, and `{tau = 0}` a union of blocks of partition 0.
    pub fn is_predictable(&self, times: &[usize]) -> bool {
        (0..=self.horizon()).all(|t| {
            let p = &self.filtration[t.saturating_sub(1)];
            p.blocks.iter().all(|b| {
                let first = times[b[0]] == t;
                b.iter().all(|&a| (times[a] == t) == first)
            })
        })
    }

    fn check_len_times(&self, times: &[usize]) -> Result<()> {
        if times.len() != self.n_atoms() {
            return Err(Error::Dimension(format!(
                "stopping time has {} entries, space has {} atoms",
                times.len(),
                self.n_atoms()
            )));
        }
        Ok(())
    }

    /// Builds a validated stopping time.
    pub fn stopping_time(&self, times: Vec<usize>) -> Result<StoppingTime> {
        self.validate_stopping_time(&times)?;
        let predictable = self.is_predictable(&times);
        Ok(StoppingTime { times, predictable })
    }

    pub fn constant_time(&self, t: usize) -> Result<StoppingTime> {
        self.check_time(t)?;
        self.stopping_time(vec![t; self.n_atoms()])
    }

    /// Number of nondecreasing stopping-time tuples of length `len` (a
    /// single stopping time is `len = 1`). Computed in floating point so huge
    /// counts saturate gracefully.
    pub fn count_stopping_sequences(&self, len: usize) -> f64 {
        self.count_in_block(0, 0, 0, len)
    }

    fn count_in_block(&self, t: usize, block: usize, done: usize, len: usize) -> f64 {
        let horizon = self.horizon();
        let mut total = 0.0;
        for stop in done..=len {
            if stop == len {
                total += 1.0;
            } else if t < horizon {
                total +=
                    self.children[t][block].iter().map(|&c| self.count_in_block(t + 1, c, stop, len)).product::<f64>();
            }
        }
        total
    }

    /// Every stopping time with values in `0..=horizon`, sorted
    /// lexicographically by the value vector over atoms.
    pub fn enumerate_stopping_times(&self, bound: usize) -> Result<Vec<StoppingTime>> {
        Ok(self
            .enumerate_stopping_sequences(0, bound)?
            .into_iter()
            .map(|mut seq| seq.pop().expect("sequence of length one"))
            .collect())
    }

    /// Every pointwise nondecreasing tuple `(tau_0, ..., tau_n)` of stopping
    /// times, sorted lexicographically (by `tau_0`'s values, then `tau_1`'s, ...).
    pub fn enumerate_stopping_sequences(&self, n: usize, bound: usize) -> Result<Vec<Vec<StoppingTime>>> {
        let len = n + 1;
        let count = self.count_stopping_sequences(len);
        if count > bound as f64 {
            return Err(Error::TooLarge { count, bound });
        }
        let n_atoms = self.n_atoms();
        let mut flat: Vec<Vec<usize>> = Vec::with_capacity(count as usize);
        for b in 0..self.filtration[0].block_count() {
            // Partition 0 may have several blocks; combine them like children.
            let opts = self.block_options(0, b, 0, len);
            if flat.is_empty() {
                flat = opts;
            } else {
                flat = combine(&flat, &opts);
            }
        }
        // Re-layout from atom-major to index-major so sorting is by tau_0 first.
        let mut seqs: Vec<Vec<Vec<usize>>> = flat
            .into_iter()
            .map(|cells| (0..len).map(|i| (0..n_atoms).map(|a| cells[a * len + i]).collect()).collect())
            .collect();
        seqs.sort();
        Ok(seqs
            .into_iter()
            .map(|seq| {
                seq.into_iter()
                    .map(|times| {
                        let predictable = self.is_predictable(&times);
                        StoppingTime { times, predictable }
                    })
                    .collect()
            })
            .collect())
    }

    /// All ways to finish the tuple on the atoms of `block` (a block of
    /// partition `t`), given that the first `done` entries already stopped
    /// before `t`. Each option is a dense atom-major cell vector with only this
    /// block's undecided cells written.
    fn block_options(&self, t: usize, block: usize, done: usize, len: usize) -> Vec<Vec<usize>> {
        let n_atoms = self.n_atoms();
        let atoms = &self.filtration[t].blocks[block];
        let mut out = Vec::new();
        for stop in done..=len {
            if t == self.horizon() && stop < len {
                continue;
            }
            let mut base = vec![0usize; n_atoms * len];
            for &a in atoms {
                for i in done..stop {
                    base[a * len + i] = t;
                }
            }
            if stop == len {
                out.push(base);
                continue;
            }
            let mut combos = vec![base];
            for &c in &self.children[t][block] {
                let opts = self.block_options(t + 1, c, stop, len);
                combos = combine(&combos, &opts);
            }
            out.extend(combos);
        }
        out
    }
}

fn combine(left: &[Vec<usize>], right: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for l in left {
        for r in right {
            out.push(l.iter().zip(r).map(|(a, b)| a + b).collect());
        }
    }
    out
}

/// A stopping time with values in `0..=horizon`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StoppingTime {
    times: Vec<usize>,
    predictable: bool,
}

impl StoppingTime {
    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn predictable(&self) -> bool {
        self.predictable
    }

    pub fn at(&self, atom: usize) -> usize {
        self.times[atom]
    }

    pub fn le(&self, other: &StoppingTime) -> bool {
        self.times.iter().zip(&other.times).all(|(a, b)| a <= b)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Four uniform atoms a,b,c,d; F0 trivial, F1 = {ab, cd}, F2 = atoms.
    pub fn s4() -> FilteredSpace {
        SpaceRepr {
            atoms: ["a", "b", "c", "d"].map(String::from).to_vec(),
            prob: vec![0.25; 4],
            horizon: 2,
            filtration: vec![
                vec![vec!["a", "b", "c", "d"]],
                vec![vec!["a", "b"], vec!["c", "d"]],
                vec![vec!["a"], vec!["b"], vec!["c"], vec!["d"]],
            ]
            .into_iter()
            .map(|p| p.into_iter().map(|b| b.into_iter().map(String::from).collect()).collect())
            .collect(),
        }
        .validate()
        .unwrap()
    }

    /// Two atoms, F0 trivial, F1 = atoms.
    pub fn two_atoms() -> FilteredSpace {
        FilteredSpace::uniform(2, vec![vec![vec![0, 1]], vec![vec![0], vec![1]]]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn rv(v: &[f64]) -> RandVar {
        RandVar::new(v.to_vec())
    }

    #[test]
    fn cond_exp_block_averages() {
        let s = s4();
        let xi = rv(&[4.0, 0.0, 2.0, 6.0]);
        assert_eq!(s.cond_exp(&xi, 1).unwrap(), rv(&[2.0, 2.0, 4.0, 4.0]));
        assert_eq!(s.cond_exp(&xi, 0).unwrap(), rv(&[3.0, 3.0, 3.0, 3.0]));
        assert_eq!(s.cond_exp(&xi, 2).unwrap(), xi);
        assert!(matches!(s.cond_exp(&xi, 3), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn cond_exp_at_stopping_time() {
        let s = s4();
        let xi = rv(&[4.0, 0.0, 2.0, 6.0]);
        let tau = s.stopping_time(vec![1, 1, 2, 2]).unwrap();
        assert_eq!(s.cond_exp_at(&xi, &tau).unwrap(), rv(&[2.0, 2.0, 2.0, 6.0]));
        for t in 0..=2 {
            let c = s.constant_time(t).unwrap();
            assert_eq!(s.cond_exp_at(&xi, &c).unwrap(), s.cond_exp(&xi, t).unwrap());
        }
        let k = RandVar::constant(7.5, 4);
        assert_eq!(s.cond_exp_at(&k, &tau).unwrap(), k);
        assert!(s.stopping_time(vec![1, 2, 2, 2]).is_err());
    }

    /// Brute force: every vector in {0..=T}^n that passes the validator.
    fn brute_force_times(s: &FilteredSpace) -> Vec<Vec<usize>> {
        let n = s.n_atoms();
        let base = s.horizon() + 1;
        let mut out = Vec::new();
        for code in 0..base.pow(n as u32) {
            let mut c = code;
            let times: Vec<usize> = (0..n)
                .map(|_| {
                    let d = c % base;
                    c /= base;
                    d
                })
                .collect();
            if s.validate_stopping_time(&times).is_ok() {
                out.push(times);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn enumeration_matches_brute_force() {
        assert_eq!(two_atoms().enumerate_stopping_times(100).unwrap().len(), 2);
        let s = s4();
        let taus = s.enumerate_stopping_times(100).unwrap();
        assert_eq!(taus.len(), 5);
        let got: Vec<Vec<usize>> = taus.iter().map(|t| t.times().to_vec()).collect();
        assert_eq!(got, brute_force_times(&s));
        let trivial = FilteredSpace::uniform(3, vec![vec![vec![0, 1, 2]]]).unwrap();
        assert_eq!(trivial.enumerate_stopping_times(10).unwrap().len(), 1);
    }

    #[test]
    fn sequences_match_pairwise_brute_force() {
        let s = s4();
        let taus = s.enumerate_stopping_times(100).unwrap();
        let brute = taus.iter().flat_map(|a| taus.iter().map(move |b| (a, b))).filter(|(a, b)| a.le(b)).count();
        // Five stopping times admit 14 pointwise-ordered pairs.
        assert_eq!(brute, 14);
        assert_eq!(s.enumerate_stopping_sequences(1, 1000).unwrap().len(), 14);
        assert_eq!(s.enumerate_stopping_sequences(0, 1000).unwrap().len(), 5);

        let two = two_atoms();
        let pairs: Vec<Vec<Vec<usize>>> = two
            .enumerate_stopping_sequences(1, 100)
            .unwrap()
            .into_iter()
            .map(|seq| seq.iter().map(|t| t.times().to_vec()).collect())
            .collect();
        assert_eq!(
            pairs,
            vec![vec![vec![0, 0], vec![0, 0]], vec![vec![0, 0], vec![1, 1]], vec![vec![1, 1], vec![1, 1]],]
        );
    }

    #[test]
    fn enumeration_bound_is_reported() {
        let err = s4().enumerate_stopping_times(4).unwrap_err();
        assert!(matches!(err, Error::TooLarge { bound: 4, .. }));
        assert!(err.to_string().contains("too large to enumerate"));
    }

    #[test]
    fn predictable_flags() {
        let s = s4();
        let taus = s.enumerate_stopping_times(100).unwrap();
        let predictable: Vec<&[usize]> = taus.iter().filter(|t| t.predictable()).map(|t| t.times()).collect();
        // {tau = 1} must be F0-measurable, so only constant times qualify.
        assert_eq!(predictable, vec![&[0, 0, 0, 0][..], &[1, 1, 1, 1], &[2, 2, 2, 2]]);
    }

    #[test]
    fn validation_errors_name_the_invariant() {
        let mut r = s4().to_repr();
        r.prob = vec![0.2, 0.2, 0.25, 0.25];
        let e = r.validate().unwrap_err().to_string();
        assert!(e.contains("probabilities must sum to 1"), "{e}");

        let mut r = s4().to_repr();
        r.filtration[2] = vec![vec!["a".into(), "c".into()], vec!["b".into()], vec!["d".into()]];
        let e = r.validate().unwrap_err().to_string();
        assert!(e.contains("t=2"), "{e}");
        assert!(e.contains("not refining"), "{e}");
    }

    #[test]
    fn repr_roundtrip() {
        let s = s4();
        assert_eq!(s.to_repr().validate().unwrap(), s);
    }
}
