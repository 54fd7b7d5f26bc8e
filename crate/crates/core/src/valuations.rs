//! Valuation functions over agent sets, their structural classification, and
//! the monotone / subadditive closures.

use serde::{Deserialize, Serialize};

use crate::agents::{AgentSet, MAX_AGENTS};
use crate::error::{guard_size, Error, Result};
use crate::lpcore;
use crate::money::Money;

/// Size limit for closures and exhaustive classification.
pub const MAX_CLASSIFY_AGENTS: usize = 12;

/// A set function given explicitly on all `2^n` subsets, indexed by bitmask.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ValueTable {
    n: usize,
    values: Vec<Money>,
}

impl ValueTable {
    pub fn new(n: usize, values: Vec<Money>) -> Result<ValueTable> {
        guard_size("value table", n, MAX_AGENTS)?;
        if values.len() != 1 << n {
            return Err(Error::Input(format!(
                "table over {n} agents needs {} entries, got {}",
                1usize << n,
                values.len()
            )));
        }
        if !values[0].is_zero() {
            return Err(Error::Input(format!("value of the empty set must be 0, got {}", values[0])));
        }
        if let Some(mask) = values.iter().position(|v| v.is_negative()) {
            return Err(Error::Input(format!("negative value {} at subset {mask}", values[mask])));
        }
        Ok(ValueTable { n, values })
    }

    /// Builds a table from `f`; `f(∅)` is forced to be 0 by the caller.
    pub fn from_fn(n: usize, mut f: impl FnMut(AgentSet) -> Money) -> Result<ValueTable> {
        guard_size("value table", n, MAX_AGENTS)?;
        let values = (0..1u32 << n).map(|m| f(AgentSet(m))).collect();
        ValueTable::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ground(&self) -> AgentSet {
        AgentSet::full(self.n)
    }

    #[inline]
    pub fn get(&self, s: AgentSet) -> Money {
        self.values[s.index()]
    }

    pub fn values(&self) -> &[Money] {
        &self.values
    }

    pub fn singleton(&self, i: usize) -> Money {
        self.get(AgentSet::singleton(i))
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub u: usize,
    pub v: usize,
    pub weight: Money,
}

/// Description of a valuation function over agents `0..n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ValuationSpec {
    Additive { weights: Vec<Money> },
    /// `v(S) = max_j f_j(S)` over non-negative additive clauses of equal length.
    XosClauses { clauses: Vec<Vec<Money>> },
    Table(ValueTable),
    /// Agents are edges; `v(S)` is the heaviest matching using edges of `S`.
    Matching { edges: Vec<WeightedEdge> },
    /// Agents are vertices; `v(S)` is the heaviest clique inside `S`.
    Clique { values: Vec<Money>, edges: Vec<(usize, usize)> },
    /// Agents are vertices; `v(S)` is the weight of edges crossing `(S, A \ S)`.
    Cut { vertices: usize, edges: Vec<WeightedEdge> },
    /// `v(S) = c(A) - c(A \ S)` for a cost table `c`.
    CostSaving { costs: ValueTable },
}

impl ValuationSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ValuationSpec::Additive { .. } => "additive",
            ValuationSpec::XosClauses { .. } => "xos",
            ValuationSpec::Table(_) => "table",
            ValuationSpec::Matching { .. } => "matching",
            ValuationSpec::Clique { .. } => "clique",
            ValuationSpec::Cut { .. } => "cut",
            ValuationSpec::CostSaving { .. } => "cost_saving",
        }
    }

    /// Number of agents.
    pub fn n(&self) -> usize {
        match self {
            ValuationSpec::Additive { weights } => weights.len(),
            ValuationSpec::XosClauses { clauses } => clauses.first().map_or(0, Vec::len),
            ValuationSpec::Table(t) => t.n(),
            ValuationSpec::Matching { edges } => edges.len(),
            ValuationSpec::Clique { values, .. } => values.len(),
            ValuationSpec::Cut { vertices, .. } => *vertices,
            ValuationSpec::CostSaving { costs } => costs.n(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        guard_size("valuation", n, MAX_AGENTS)?;
        let nonneg = |what: &str, xs: &[Money]| -> Result<()> {
            match xs.iter().position(|x| x.is_negative()) {
                Some(i) => Err(Error::Input(format!("{what}[{i}] is negative ({})", xs[i]))),
                None => Ok(()),
            }
        };
        match self {
            ValuationSpec::Additive { weights } => nonneg("weights", weights),
            ValuationSpec::XosClauses { clauses } => {
                if clauses.is_empty() {
                    return Err(Error::Input("xos valuation needs at least one clause".into()));
                }
                for (j, c) in clauses.iter().enumerate() {
                    if c.len() != n {
                        return Err(Error::Input(format!(
                            "clause {j} has {} weights, expected {n}",
                            c.len()
                        )));
                    }
                    nonneg(&format!("clauses[{j}]"), c)?;
                }
                Ok(())
            }
            // constructor already validated
            ValuationSpec::Table(_) => Ok(()),
            ValuationSpec::Matching { edges } => {
                for (k, e) in edges.iter().enumerate() {
                    if e.u == e.v {
                        return Err(Error::Input(format!("edge {k} is a self-loop")));
                    }
                    if e.weight.is_negative() {
                        return Err(Error::Input(format!("edge {k} has negative value")));
                    }
                }
                Ok(())
            }
            ValuationSpec::Clique { values, edges } => {
                nonneg("values", values)?;
                for (k, &(a, b)) in edges.iter().enumerate() {
                    if a >= n || b >= n || a == b {
                        return Err(Error::Input(format!("edge {k} ({a},{b}) is invalid for {n} vertices")));
                    }
                }
                Ok(())
            }
            ValuationSpec::Cut { vertices, edges } => {
                for (k, e) in edges.iter().enumerate() {
                    if e.u >= *vertices || e.v >= *vertices || e.u == e.v {
                        return Err(Error::Input(format!("edge {k} ({},{}) is invalid", e.u, e.v)));
                    }
                    if e.weight.is_negative() {
                        return Err(Error::Input(format!("edge {k} has negative weight")));
                    }
                }
                Ok(())
            }
            ValuationSpec::CostSaving { costs } => {
                let full = costs.ground();
                let total = costs.get(full);
                for s in full.subsets() {
                    if costs.get(full.difference(s)) > total {
                        return Err(Error::Input(format!(
                            "cost table gives a negative saving at subset {}",
                            s.bits()
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn check_agents(&self, s: AgentSet) -> Result<()> {
        let outside = s.difference(AgentSet::full(self.n()));
        match outside.first() {
            Some(i) => Err(Error::Input(format!("unknown agent id {i} (n = {})", self.n()))),
            None => Ok(()),
        }
    }

    /// Materializes the valuation on every subset.
    pub fn table(&self) -> Result<ValueTable> {
        self.validate()?;
        let n = self.n();
        match self {
            ValuationSpec::Table(t) => Ok(t.clone()),
            ValuationSpec::Additive { weights } => additive_table(weights),
            ValuationSpec::XosClauses { clauses } => {
                let mut best = vec![Money::ZERO; 1 << n];
                for clause in clauses {
                    let sums = additive_table(clause)?;
                    for (b, s) in best.iter_mut().zip(sums.values()) {
                        *b = (*b).max(*s);
                    }
                }
                ValueTable::new(n, best)
            }
            ValuationSpec::Matching { edges } => {
                let conflicts = matching_conflicts(edges);
                let mut m = vec![Money::ZERO; 1 << n];
                for mask in 1..1u32 << n {
                    let e = mask.trailing_zeros() as usize;
                    let skip = m[(mask & (mask - 1)) as usize];
                    let take = edges[e].weight + m[(mask & !conflicts[e]) as usize];
                    m[mask as usize] = skip.max(take);
                }
                ValueTable::new(n, m)
            }
            ValuationSpec::Clique { values, edges } => {
                let nbrs = neighbours(n, edges);
                let mut c = vec![Money::ZERO; 1 << n];
                for mask in 1..1u32 << n {
                    let i = mask.trailing_zeros() as usize;
                    let skip = c[(mask & (mask - 1)) as usize];
                    let take = values[i] + c[(mask & nbrs[i]) as usize];
                    c[mask as usize] = skip.max(take);
                }
                ValueTable::new(n, c)
            }
            ValuationSpec::Cut { .. } | ValuationSpec::CostSaving { .. } => {
                ValueTable::from_fn(n, |s| self.value_unchecked(s))
            }
        }
    }

    /// Exact `v(S)`.
    pub fn value(&self, s: AgentSet) -> Result<Money> {
        self.validate()?;
        self.check_agents(s)?;
        Ok(self.value_unchecked(s))
    }

    fn value_unchecked(&self, s: AgentSet) -> Money {
        match self {
            ValuationSpec::Additive { weights } => s.iter().map(|i| weights[i]).sum(),
            ValuationSpec::XosClauses { clauses } => clauses
                .iter()
                .map(|c| s.iter().map(|i| c[i]).sum::<Money>())
                .max()
                .unwrap_or(Money::ZERO),
            ValuationSpec::Table(t) => t.get(s),
            ValuationSpec::Matching { edges } => {
                let conflicts = matching_conflicts(edges);
                best_matching(edges, &conflicts, s.bits())
            }
            ValuationSpec::Clique { values, edges } => {
                let nbrs = neighbours(values.len(), edges);
                best_clique(values, &nbrs, s.bits())
            }
            ValuationSpec::Cut { edges, .. } => edges
                .iter()
                .filter(|e| s.contains(e.u) != s.contains(e.v))
                .map(|e| e.weight)
                .sum(),
            ValuationSpec::CostSaving { costs } => {
                let full = costs.ground();
                costs.get(full) - costs.get(full.difference(s))
            }
        }
    }
}

fn additive_table(weights: &[Money]) -> Result<ValueTable> {
    let n = weights.len();
    guard_size("value table", n, MAX_AGENTS)?;
    let mut sums = vec![Money::ZERO; 1 << n];
    for mask in 1..1usize << n {
        let i = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + weights[i];
    }
    ValueTable::new(n, sums)
}

/// For each edge, the mask of edges sharing an endpoint with it (itself included).
fn matching_conflicts(edges: &[WeightedEdge]) -> Vec<u32> {
    edges
        .iter()
        .map(|e| {
            edges
                .iter()
                .enumerate()
                .filter(|(_, f)| f.u == e.u || f.u == e.v || f.v == e.u || f.v == e.v)
                .fold(0u32, |m, (k, _)| m | 1 << k)
        })
        .collect()
}

fn best_matching(edges: &[WeightedEdge], conflicts: &[u32], mask: u32) -> Money {
    if mask == 0 {
        return Money::ZERO;
    }
    let e = mask.trailing_zeros() as usize;
    let skip = best_matching(edges, conflicts, mask & (mask - 1));
    let take = edges[e].weight + best_matching(edges, conflicts, mask & !conflicts[e]);
    skip.max(take)
}

fn neighbours(n: usize, edges: &[(usize, usize)]) -> Vec<u32> {
    let mut nbrs = vec![0u32; n];
    for &(a, b) in edges {
        nbrs[a] |= 1 << b;
        nbrs[b] |= 1 << a;
    }
    nbrs
}

fn best_clique(values: &[Money], nbrs: &[u32], mask: u32) -> Money {
    if mask == 0 {
        return Money::ZERO;
    }
    let i = mask.trailing_zeros() as usize;
    let skip = best_clique(values, nbrs, mask & (mask - 1));
    let take = values[i] + best_clique(values, nbrs, mask & nbrs[i]);
    skip.max(take)
}

/// Structural properties of a valuation, all verified by exhaustive checks.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ClassificationReport {
    pub monotone: bool,
    pub subadditive: bool,
    pub xos: bool,
    pub submodular: bool,
    pub supermodular: bool,
    /// Smallest `K` with `v ≤ K·v̌`; `None` when `v̌(S) = 0 < v(S)` for some `S`.
    pub k_subadditive_constant: Option<Money>,
}

pub fn is_monotone(t: &ValueTable) -> bool {
    let n = t.n();
    (0..1u32 << n).all(|m| {
        let s = AgentSet(m);
        s.iter().all(|i| t.get(s.without(i)) <= t.get(s))
    })
}

/// `v(S) + v(T) ≥ v(S ∪ T)` for every pair `S, T`.
pub fn is_subadditive(t: &ValueTable) -> bool {
    let size = 1u32 << t.n();
    let v = t.values();
    (0..size).all(|s| (s..size).all(|u| v[s as usize] + v[u as usize] >= v[(s | u) as usize]))
}

/// Local exchange form: `v(S+i) + v(S+j) ≥ v(S) + v(S+i+j)`.
pub fn is_submodular(t: &ValueTable) -> bool {
    second_differences(t).all(|d| !d.is_positive())
}

pub fn is_supermodular(t: &ValueTable) -> bool {
    second_differences(t).all(|d| !d.is_negative())
}

/// `v(S+i+j) - v(S+i) - v(S+j) + v(S)` over all `S` and `i < j` outside `S`.
fn second_differences(t: &ValueTable) -> impl Iterator<Item = Money> + '_ {
    let n = t.n();
    (0..1u32 << n).flat_map(move |m| {
        let s = AgentSet(m);
        let outside: Vec<usize> = (0..n).filter(|&i| !s.contains(i)).collect();
        let mut out = Vec::new();
        for (a, &i) in outside.iter().enumerate() {
            for &j in &outside[a + 1..] {
                out.push(t.get(s.with(i).with(j)) - t.get(s.with(i)) - t.get(s.with(j)) + t.get(s));
            }
        }
        out
    })
}

pub fn classify(spec: &ValuationSpec) -> Result<ClassificationReport> {
    guard_size("classify", spec.n(), MAX_CLASSIFY_AGENTS)?;
    let table = spec.table()?;
    classify_table(&table)
}

pub fn classify_table(table: &ValueTable) -> Result<ClassificationReport> {
    guard_size("classify", table.n(), MAX_CLASSIFY_AGENTS)?;
    let closure = subadditive_closure_table(table)?;
    let mut k = Some(Money::ONE);
    for s in table.ground().subsets() {
        let (v, low) = (table.get(s), closure.get(s));
        k = match (k, low.is_zero()) {
            (None, _) => None,
            (Some(_), true) if v.is_positive() => None,
            (Some(k), true) => Some(k),
            (Some(k), false) => Some(k.max(v / low)),
        };
    }
    let gap = lpcore::max_integrality_gap_table(table)?;
    Ok(ClassificationReport {
        monotone: is_monotone(table),
        subadditive: is_subadditive(table),
        xos: gap.max_gap == Some(Money::ONE),
        submodular: is_submodular(table),
        supermodular: is_supermodular(table),
        k_subadditive_constant: k,
    })
}

/// `ĥv(S) = max_{T ⊆ S} v(T)`.
pub fn monotone_closure(spec: &ValuationSpec) -> Result<ValuationSpec> {
    Ok(ValuationSpec::Table(monotone_closure_table(&spec.table()?)?))
}

pub fn monotone_closure_table(t: &ValueTable) -> Result<ValueTable> {
    let n = t.n();
    let mut h = t.values().to_vec();
    for m in 1..1usize << n {
        let s = AgentSet(m as u32);
        for i in s.iter() {
            let below = h[s.without(i).index()];
            if below > h[m] {
                h[m] = below;
            }
        }
    }
    ValueTable::new(n, h)
}

/// `v̌(S) = min` over partitions of `S` of the summed part values.
pub fn subadditive_closure(spec: &ValuationSpec) -> Result<ValuationSpec> {
    guard_size("subadditive closure", spec.n(), MAX_CLASSIFY_AGENTS)?;
    Ok(ValuationSpec::Table(subadditive_closure_table(&spec.table()?)?))
}

pub fn subadditive_closure_table(t: &ValueTable) -> Result<ValueTable> {
    let n = t.n();
    guard_size("subadditive closure", n, MAX_CLASSIFY_AGENTS)?;
    let mut low = t.values().to_vec();
    for m in 1..1u32 << n {
        // the part holding the lowest agent ranges over subsets of the rest
        let first = m & m.wrapping_neg();
        let rest = m ^ first;
        let mut sub = rest;
        loop {
            let part = sub | first;
            if part != m {
                let cand = t.get(AgentSet(part)) + low[(m ^ part) as usize];
                if cand < low[m as usize] {
                    low[m as usize] = cand;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    ValueTable::new(n, low)
}

/// `v(S) = c(A) - c(A \ S)` from a complete cost table with `c(∅) = 0`.
pub fn cost_saving_valuation(costs: ValueTable) -> Result<ValuationSpec> {
    let spec = ValuationSpec::CostSaving { costs };
    spec.validate()?;
    Ok(spec)
}

/// The clause achieving `v(S)`, lowest index on ties.
pub fn xos_clause_at(spec: &ValuationSpec, s: AgentSet) -> Result<(usize, Vec<Money>)> {
    let ValuationSpec::XosClauses { clauses } = spec else {
        return Err(Error::Capability(format!(
            "explicit clauses exist only for xos valuations, not {}; use lpcore::dual_witness",
            spec.kind_name()
        )));
    };
    spec.validate()?;
    spec.check_agents(s)?;
    let mut best = (0, Money::ZERO);
    for (j, c) in clauses.iter().enumerate() {
        let sum: Money = s.iter().map(|i| c[i]).sum();
        if j == 0 || sum > best.1 {
            best = (j, sum);
        }
    }
    Ok((best.0, clauses[best.0].clone()))
}
