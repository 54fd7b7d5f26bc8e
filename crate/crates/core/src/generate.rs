//! Seeded instance generators.
//!
//! Every generator is a pure function of its parameters and seed. Costs are
//! drawn as multiples of `B / cost_steps` in `[0, B]`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agents::AgentSet;
use crate::error::{Error, Result};
use crate::io::{InstanceFile, Provenance};
use crate::money::Money;
use crate::optimize::Instance;
use crate::valuations::{
    is_monotone, is_subadditive, is_supermodular, monotone_closure_table, subadditive_closure_table,
    ValuationSpec, ValueTable, WeightedEdge, MAX_CLASSIFY_AGENTS,
};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GeneratorKind {
    Additive,
    Xos,
    Subadditive,
    Matching,
    Clique,
    Cut,
    SupermodularCost,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 7] = [
        GeneratorKind::Additive,
        GeneratorKind::Xos,
        GeneratorKind::Subadditive,
        GeneratorKind::Matching,
        GeneratorKind::Clique,
        GeneratorKind::Cut,
        GeneratorKind::SupermodularCost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Additive => "additive",
            GeneratorKind::Xos => "xos",
            GeneratorKind::Subadditive => "subadditive",
            GeneratorKind::Matching => "matching",
            GeneratorKind::Clique => "clique",
            GeneratorKind::Cut => "cut",
            GeneratorKind::SupermodularCost => "supermodular-cost",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<GeneratorKind> {
        GeneratorKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = GeneratorKind::ALL.iter().map(|k| k.name()).collect();
            Error::Input(format!("unknown generator {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GenParams {
    /// Number of agents, 1 to 12.
    pub n: usize,
    /// Clause count for xos.
    pub clauses: usize,
    /// Integer values, weights and clause entries are drawn from `0..=max_value`.
    pub max_value: i64,
    pub budget: Money,
    pub cost_steps: i64,
}

impl Default for GenParams {
    fn default() -> GenParams {
        GenParams { n: 4, clauses: 3, max_value: 4, budget: Money::ONE, cost_steps: 8 }
    }
}

impl GenParams {
    pub fn with_n(n: usize) -> GenParams {
        GenParams { n, ..GenParams::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=MAX_CLASSIFY_AGENTS).contains(&self.n) {
            return Err(Error::Input(format!("n must be in 1..={MAX_CLASSIFY_AGENTS}, got {}", self.n)));
        }
        if self.clauses == 0 || self.clauses > 64 {
            return Err(Error::Input(format!("clauses must be in 1..=64, got {}", self.clauses)));
        }
        if !(1..=1_000_000).contains(&self.max_value) {
            return Err(Error::Input(format!("max value must be in 1..=1000000, got {}", self.max_value)));
        }
        if !(1..=1_000_000).contains(&self.cost_steps) {
            return Err(Error::Input(format!("cost steps must be in 1..=1000000, got {}", self.cost_steps)));
        }
        if !self.budget.is_positive() {
            return Err(Error::Input(format!("budget must be positive, got {}", self.budget)));
        }
        Ok(())
    }

    fn record(&self, kind: GeneratorKind) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("n".into(), self.n.to_string());
        if kind == GeneratorKind::Xos {
            m.insert("clauses".into(), self.clauses.to_string());
        }
        m.insert("max_value".into(), self.max_value.to_string());
        m.insert("budget".into(), self.budget.to_string());
        m.insert("cost_steps".into(), self.cost_steps.to_string());
        m
    }
}

fn int(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Money {
    Money::from_int(rng.gen_range(lo..=hi) as i128)
}

fn ints(rng: &mut ChaCha8Rng, len: usize, hi: i64) -> Vec<Money> {
    (0..len).map(|_| int(rng, 0, hi)).collect()
}

/// An instance file whose valuation is of the requested family.
pub fn generate(kind: GeneratorKind, params: &GenParams, seed: u64) -> Result<InstanceFile> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.n;
    let hi = params.max_value;
    let spec = match kind {
        GeneratorKind::Additive => ValuationSpec::Additive { weights: ints(&mut rng, n, hi) },
        GeneratorKind::Xos => {
            ValuationSpec::XosClauses { clauses: (0..params.clauses).map(|_| ints(&mut rng, n, hi)).collect() }
        }
        GeneratorKind::Subadditive => ValuationSpec::Table(subadditive_table(&mut rng, n, hi)?),
        GeneratorKind::Matching => {
            let vertices = n / 2 + 2;
            let edges = (0..n)
                .map(|_| {
                    let u = rng.gen_range(0..vertices);
                    let mut v = rng.gen_range(0..vertices - 1);
                    if v >= u {
                        v += 1;
                    }
                    WeightedEdge { u, v, weight: int(&mut rng, 1, hi) }
                })
                .collect();
            ValuationSpec::Matching { edges }
        }
        GeneratorKind::Clique => {
            let values = ints(&mut rng, n, hi);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.5) {
                        edges.push((u, v));
                    }
                }
            }
            ValuationSpec::Clique { values, edges }
        }
        GeneratorKind::Cut => {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.5) {
                        edges.push(WeightedEdge { u, v, weight: int(&mut rng, 1, hi) });
                    }
                }
            }
            ValuationSpec::Cut { vertices: n, edges }
        }
        GeneratorKind::SupermodularCost => ValuationSpec::CostSaving { costs: supermodular_costs(&mut rng, n, hi)? },
    };
    let costs = (0..n)
        .map(|_| params.budget * Money::new(rng.gen_range(0..=params.cost_steps) as i128, params.cost_steps as i128))
        .collect();
    let inst = Instance::new(costs, params.budget, spec)?;
    let provenance = Provenance { generator: kind.name().to_string(), seed, params: params.record(kind) };
    Ok(InstanceFile::from_instance(&inst, Some(provenance)))
}

/// Random values, then the subadditive and monotone closures.
pub fn subadditive_table(rng: &mut ChaCha8Rng, n: usize, hi: i64) -> Result<ValueTable> {
    let raw = ValueTable::from_fn(n, |s| {
        if s.is_empty() {
            Money::ZERO
        } else {
            int(rng, 0, hi * s.len() as i64)
        }
    })?;
    let t = monotone_closure_table(&subadditive_closure_table(&raw)?)?;
    if !(is_subadditive(&t) && is_monotone(&t)) {
        return Err(Error::Precondition("closure produced an invalid table".into()));
    }
    Ok(t)
}

/// `c(S) = Σ a_i + Σ_{i<j in S} b_ij + (Σ w_i)²` with non-negative integer
/// draws, which is supermodular.
pub fn supermodular_costs(rng: &mut ChaCha8Rng, n: usize, hi: i64) -> Result<ValueTable> {
    let a = ints(rng, n, hi);
    let w = ints(rng, n, hi);
    let mut b = vec![vec![Money::ZERO; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            b[i][j] = int(rng, 0, hi);
        }
    }
    let t = ValueTable::from_fn(n, |s: AgentSet| {
        let lin: Money = s.iter().map(|i| a[i]).sum();
        let pairs: Money = s.iter().flat_map(|i| s.iter().filter(move |&j| j > i).map(move |j| (i, j))).map(|(i, j)| b[i][j]).sum();
        let ws: Money = s.iter().map(|i| w[i]).sum();
        lin + pairs + ws * ws
    })?;
    if !is_supermodular(&t) {
        return Err(Error::Precondition("generated cost table is not supermodular".into()));
    }
    Ok(t)
}
