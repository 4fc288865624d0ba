//! Scenario files: a filtered space with named processes, measure pairs,
//! seminorms and random variables, plus optional claims for the checker.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::doob::doob_decompose;
use crate::error::{Error, Result};
use crate::measures::MeasurePair;
use crate::norms::SeminormSpec;
use crate::process::Process;
use crate::sample::{
    random_adapted, random_dual_measure, random_martingale, random_optional_measure, random_process, random_rv,
    random_supermartingale, rng_for,
};
use crate::space::{FilteredSpace, Partition, RandVar, SpaceRepr};

pub const MAX_RANDOM_ATOMS: usize = 12;
pub const MAX_RANDOM_HORIZON: usize = 5;

/// A map that rejects duplicate keys when deserialized.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct NamedMap<V>(pub BTreeMap<String, V>);

impl<V> Default for NamedMap<V> {
    fn default() -> Self {
        Self(BTreeMap::new())
    }
}

impl<'de, V: Deserialize<'de>> Deserialize<'de> for NamedMap<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V_<V>(PhantomData<V>);
        impl<'de, V: Deserialize<'de>> Visitor<'de> for V_<V> {
            type Value = NamedMap<V>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of names to objects")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = BTreeMap::new();
                while let Some((k, v)) = access.next_entry::<String, V>()? {
                    if out.contains_key(&k) {
                        return Err(serde::de::Error::custom(format!("duplicate name `{k}`")));
                    }
                    out.insert(k, v);
                }
                Ok(NamedMap(out))
            }
        }
        d.deserialize_map(V_(PhantomData))
    }
}

impl<V> NamedMap<V> {
    pub fn get(&self, name: &str) -> Option<&V> {
        self.0.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &V)> {
        self.0.iter()
    }

    pub fn insert(&mut self, name: impl Into<String>, v: V) {
        self.0.insert(name.into(), v);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A claimed Doob decomposition `process = m - a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionClaim {
    pub process: String,
    pub m: Process,
    pub a: Process,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Claims {
    /// Names of processes claimed to be martingales.
    pub martingales: Vec<String>,
    pub decompositions: NamedMap<DecompositionClaim>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Metadata {
    pub seed: Option<u64>,
    pub description: Option<String>,
}

/// The on-disk form. Nothing beyond JSON syntax and field names is checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub space: SpaceRepr,
    #[serde(default)]
    pub processes: NamedMap<Process>,
    #[serde(default)]
    pub measures: NamedMap<MeasurePair>,
    #[serde(default)]
    pub norms: NamedMap<SeminormSpec>,
    #[serde(default)]
    pub rvs: NamedMap<RandVar>,
    #[serde(default)]
    pub claims: Claims,
    #[serde(default)]
    pub metadata: Metadata,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub space: FilteredSpace,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Scenario(format!("parse error at line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// SHA-256 of the compact JSON form. Maps are ordered, so equal
    /// scenarios hash equally.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("scenario serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Enforces every invariant; errors name the offending object.
    pub fn validate(self) -> Result<Scenario> {
        let space = self.space.validate()?;
        let mut seen = BTreeMap::new();
        let kinds = [
            ("process", self.processes.0.keys().collect::<Vec<_>>()),
            ("measure", self.measures.0.keys().collect()),
            ("norm", self.norms.0.keys().collect()),
            ("rv", self.rvs.0.keys().collect()),
        ];
        for (kind, names) in kinds {
            for name in names {
                if let Some(other) = seen.insert(name.clone(), kind) {
                    return Err(Error::Scenario(format!("name `{name}` is used by a {other} and a {kind}")));
                }
            }
        }
        for (name, p) in self.processes.iter() {
            p.check_shape(&space).map_err(|e| named("process", name, e))?;
        }
        for (name, m) in self.measures.iter() {
            m.check_shape(&space).map_err(|e| named("measure", name, e))?;
        }
        for (name, s) in self.norms.iter() {
            s.validate().map_err(|e| named("norm", name, e))?;
        }
        for (name, r) in self.rvs.iter() {
            if r.len() != space.n_atoms() {
                return Err(Error::Scenario(format!(
                    "rv `{name}`: has {} entries, expected {}",
                    r.len(),
                    space.n_atoms()
                )));
            }
        }
        for name in &self.claims.martingales {
            if self.processes.get(name).is_none() {
                return Err(Error::Scenario(format!("martingale claim names unknown process `{name}`")));
            }
        }
        for (name, c) in self.claims.decompositions.iter() {
            if self.processes.get(&c.process).is_none() {
                return Err(Error::Scenario(format!("decomposition `{name}` names unknown process `{}`", c.process)));
            }
            c.m.check_shape(&space).map_err(|e| named("decomposition", name, e))?;
            c.a.check_shape(&space).map_err(|e| named("decomposition", name, e))?;
        }
        Ok(Scenario { file: self, space })
    }
}

fn named(kind: &str, name: &str, e: Error) -> Error {
    Error::Scenario(format!("{kind} `{name}`: {e}"))
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    ScenarioFile::read(path)?.validate()
}

impl Scenario {
    pub fn digest(&self) -> String {
        self.file.digest()
    }

    pub fn process(&self, name: &str) -> Result<&Process> {
        self.file.processes.get(name).ok_or_else(|| Error::Scenario(format!("no process named `{name}`")))
    }

    pub fn measure(&self, name: &str) -> Result<&MeasurePair> {
        self.file.measures.get(name).ok_or_else(|| Error::Scenario(format!("no measure named `{name}`")))
    }

    pub fn norm(&self, name: &str) -> Result<&SeminormSpec> {
        self.file.norms.get(name).ok_or_else(|| Error::Scenario(format!("no norm named `{name}`")))
    }

    pub fn rv(&self, name: &str) -> Result<&RandVar> {
        self.file.rvs.get(name).ok_or_else(|| Error::Scenario(format!("no rv named `{name}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomOptions {
    pub atoms: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Largest number of children a block may split into per step.
    pub branching: usize,
    /// Allows sizes above the default limits.
    pub allow_large: bool,
}

impl RandomOptions {
    pub fn new(atoms: usize, horizon: usize, seed: u64) -> Self {
        Self { atoms, horizon, seed, branching: 3, allow_large: false }
    }
}

/// The default seminorm set used by random scenarios.
pub fn default_norms() -> NamedMap<SeminormSpec> {
    let mut norms = NamedMap::default();
    norms.insert("L1", SeminormSpec::lp(1.0));
    norms.insert("L2", SeminormSpec::lp(2.0));
    norms.insert("Linf", SeminormSpec::lp(f64::INFINITY));
    norms.insert("orlicz-power2", SeminormSpec::orlicz_power(2.0));
    norms.insert("orlicz-exp", SeminormSpec::orlicz_exp());
    norms.insert("spectral-0.5", SeminormSpec::spectral(0.5));
    norms
}

/// A random scenario: the filtration is built backward from the atoms by
/// merging random groups of blocks (at most `branching` per group), with a
/// trivial partition at time 0.
pub fn random_scenario(opts: RandomOptions) -> Result<Scenario> {
    let RandomOptions { atoms, horizon, seed, branching, allow_large } = opts;
    if atoms == 0 {
        return Err(Error::Scenario("a scenario needs at least one atom".into()));
    }
    if !allow_large && (atoms > MAX_RANDOM_ATOMS || horizon > MAX_RANDOM_HORIZON) {
        return Err(Error::Scenario(format!(
            "random scenarios are limited to {MAX_RANDOM_ATOMS} atoms and horizon {MAX_RANDOM_HORIZON}; \
             larger sizes may exceed the enumeration bound"
        )));
    }
    let branching = branching.max(2);
    let mut rng = rng_for(seed, "scenario");
    let weights: Vec<f64> = (0..atoms).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = weights.iter().sum();
    let mut prob: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let rest: f64 = prob[1..].iter().sum();
    prob[0] = 1.0 - rest;

    let mut parts: Vec<Vec<Vec<usize>>> = vec![(0..atoms).map(|a| vec![a]).collect()];
    for t in (0..horizon).rev() {
        let finer = parts.last().unwrap();
        let coarser = if t == 0 {
            vec![(0..atoms).collect()]
        } else {
            let mut blocks = finer.clone();
            blocks.shuffle(&mut rng);
            let mut out = Vec::new();
            let mut i = 0;
            while i < blocks.len() {
                let k = rng.gen_range(1..=branching).min(blocks.len() - i);
                let mut merged: Vec<usize> = blocks[i..i + k].iter().flatten().copied().collect();
                merged.sort_unstable();
                out.push(merged);
                i += k;
            }
            out
        };
        parts.push(coarser);
    }
    if horizon == 0 {
        parts = vec![vec![(0..atoms).collect()]];
    } else {
        parts.reverse();
    }
    let labels: Vec<String> = (0..atoms).map(|a| format!("w{a}")).collect();
    let filtration =
        parts.into_iter().map(|p| Partition::new(atoms, p).map_err(Error::InvalidSpace)).collect::<Result<Vec<_>>>()?;
    let space = FilteredSpace::from_parts(labels, prob, filtration)?;

    let mut processes = NamedMap::default();
    processes.insert("raw", random_process(&mut rng, &space));
    processes.insert("adapted", random_adapted(&mut rng, &space));
    processes.insert("martingale", random_martingale(&mut rng, &space));
    let sup = random_supermartingale(&mut rng, &space);
    let d = doob_decompose(&space, &sup)?;
    processes.insert("supermartingale", sup);
    let mut measures = NamedMap::default();
    measures.insert("pair", random_dual_measure(&mut rng, &space));
    measures.insert("optional", MeasurePair::from_single(random_optional_measure(&mut rng, &space)));
    let mut rvs = NamedMap::default();
    rvs.insert("xi", random_rv(&mut rng, atoms));
    rvs.insert("eta", random_rv(&mut rng, atoms));
    let mut decompositions = NamedMap::default();
    decompositions.insert("supermartingale", DecompositionClaim { process: "supermartingale".into(), m: d.m, a: d.a });

    let file = ScenarioFile {
        space: space.to_repr(),
        processes,
        measures,
        norms: default_norms(),
        rvs,
        claims: Claims { martingales: vec!["martingale".into()], decompositions },
        metadata: Metadata {
            seed: Some(seed),
            description: Some(format!("random scenario: {atoms} atoms, horizon {horizon}")),
        },
    };
    file.validate()
}

/// Defects that `verify` must detect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Defect {
    /// `u_t` not measurable for the partition at `t`.
    NonOptionalU,
    /// `ut_t` not measurable for the partition at `t - 1`.
    NonPredictableUtilde,
    NonRefiningFiltration,
    /// A process claimed to be a martingale drifts.
    BrokenMartingale,
    /// A claimed decomposition no longer reconstructs its process.
    PerturbedDecomposition,
}

impl Defect {
    pub const ALL: [Defect; 5] = [
        Defect::NonOptionalU,
        Defect::NonPredictableUtilde,
        Defect::NonRefiningFiltration,
        Defect::BrokenMartingale,
        Defect::PerturbedDecomposition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Defect::NonOptionalU => "non-optional-u",
            Defect::NonPredictableUtilde => "non-predictable-utilde",
            Defect::NonRefiningFiltration => "non-refining-filtration",
            Defect::BrokenMartingale => "broken-martingale",
            Defect::PerturbedDecomposition => "perturbed-decomposition",
        }
    }
}

/// Plants `defect` into `file`, returning a short description of the change.
/// Errors when the scenario has no room for it (for example a single atom).
pub fn plant_defect(file: &mut ScenarioFile, defect: Defect) -> Result<String> {
    let space = file.space.validate()?;
    let h = space.horizon();
    let no_room = || Error::Scenario(format!("cannot plant {} in this scenario", defect.name()));
    let split_block = |t: usize| space.partition(t).blocks().iter().find(|b| b.len() > 1).map(|b| b[0]);
    match defect {
        Defect::NonOptionalU => {
            let (t, a) = (0..=h).find_map(|t| split_block(t).map(|a| (t, a))).ok_or_else(no_room)?;
            let (name, m) = file.measures.0.iter_mut().next().ok_or_else(no_room)?;
            m.u[t][a] += 1.0;
            Ok(format!("measure `{name}`: u at t={t}, atom {} shifted by 1", space.atoms()[a]))
        }
        Defect::NonPredictableUtilde => {
            let (t, a) = (1..=h).find_map(|t| split_block(t - 1).map(|a| (t, a))).ok_or_else(no_room)?;
            let (name, m) = file.measures.0.iter_mut().next().ok_or_else(no_room)?;
            m.utilde[t - 1][a] += 1.0;
            Ok(format!("measure `{name}`: utilde at t={t}, atom {} shifted by 1", space.atoms()[a]))
        }
        Defect::NonRefiningFiltration => {
            if h == 0 || space.n_atoms() < 2 {
                return Err(no_room());
            }
            let atoms = file.space.atoms.clone();
            file.space.filtration[h - 1] = atoms.iter().map(|a| vec![a.clone()]).collect();
            file.space.filtration[h] = vec![atoms];
            Ok(format!("partition at t={h} made coarser than the one at t={}", h - 1))
        }
        Defect::BrokenMartingale => {
            if h == 0 {
                return Err(no_room());
            }
            let name = file.claims.martingales.first().cloned().ok_or_else(no_room)?;
            let p = file.processes.0.get_mut(&name).ok_or_else(no_room)?;
            let mut rows = p.rows().to_vec();
            for v in &mut rows[h] {
                *v += 1.0;
            }
            *p = Process::from_rows(rows);
            Ok(format!("process `{name}`: row t={h} shifted by 1"))
        }
        Defect::PerturbedDecomposition => {
            if h == 0 {
                return Err(no_room());
            }
            let (name, c) = file.claims.decompositions.0.iter_mut().next().ok_or_else(no_room)?;
            let mut rows = c.a.rows().to_vec();
            for v in &mut rows[h] {
                *v += 0.5;
            }
            c.a = Process::from_rows(rows);
            Ok(format!("decomposition `{name}`: A at t={h} shifted by 0.5"))
        }
    }
}
