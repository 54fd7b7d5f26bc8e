//! The fractional set-cover LP over subsets:
//!
//! ```text
//! minimize   Σ_j α_j · v(S_j)
//! subject to Σ_{j : i ∈ S_j} α_j ≥ 1   for every i ∈ S,   α ≥ 0
//! ```
//!
//! Its optimum `ṽ(S)` never exceeds `v(S)`, equals it everywhere exactly for
//! XOS valuations, and is itself XOS. The LP is solved by an exact rational
//! revised simplex with Bland's rule.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::agents::AgentSet;
use crate::error::{guard_size, Result};
use crate::money::Money;
use crate::valuations::{ValuationSpec, ValueTable, MAX_CLASSIFY_AGENTS};

/// Primal solution: weight `α_j` per original subset `S_j`, zero when absent.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct FractionalCover {
    pub alpha: BTreeMap<AgentSet, Money>,
}

impl FractionalCover {
    pub fn alpha(&self, subset: AgentSet) -> Money {
        self.alpha.get(&subset).copied().unwrap_or(Money::ZERO)
    }

    pub fn objective(&self, table: &ValueTable) -> Money {
        self.alpha.iter().map(|(&s, &a)| a * table.get(s)).sum()
    }

    /// Total weight of the subsets containing `i`.
    pub fn coverage(&self, i: usize) -> Money {
        self.alpha.iter().filter(|(s, _)| s.contains(i)).map(|(_, &a)| a).sum()
    }
}

/// Dual solution: an additive function `y` supported on `S` with
/// `y(S_j ∩ S) ≤ v(S_j)` for every subset.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DualWitness {
    pub y: Vec<Money>,
}

impl DualWitness {
    pub fn total(&self) -> Money {
        self.y.iter().sum()
    }

    pub fn on(&self, s: AgentSet) -> Money {
        s.iter().map(|i| self.y[i]).sum()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoverSolution {
    pub value: Money,
    pub cover: FractionalCover,
    pub dual: DualWitness,
    pub pivots: usize,
}

/// Per-subset integrality gaps `I(S) = v(S) / ṽ(S)`; `None` marks `ṽ(S) = 0 < v(S)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GapReport {
    pub per_subset: Vec<Option<Money>>,
    pub max_gap: Option<Money>,
}

impl GapReport {
    pub fn is_xos(&self) -> bool {
        self.max_gap == Some(Money::ONE)
    }

    pub fn max_gap_string(&self) -> String {
        render_gap(self.max_gap)
    }
}

pub fn render_gap(gap: Option<Money>) -> String {
    gap.map_or_else(|| "inf".to_string(), |g| g.to_string())
}

#[derive(Serialize)]
struct GapReportJson {
    max_gap: String,
    per_subset: BTreeMap<u32, String>,
}

impl Serialize for GapReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GapReportJson {
            max_gap: render_gap(self.max_gap),
            per_subset: self
                .per_subset
                .iter()
                .enumerate()
                .map(|(m, g)| (m as u32, render_gap(*g)))
                .collect(),
        }
        .serialize(serializer)
    }
}

/// Solves LP(S) for a materialized valuation.
///
/// Only `S_j ∩ S` matters for feasibility, so the columns are the nonempty
/// `U ⊆ S`, each priced at the cheapest `v(S_j)` with `S_j ∩ S = U` (the
/// lowest such index represents it in the returned cover). Starting from the
/// singleton cover, which is basic and feasible, no phase one is needed.
pub fn solve_cover_lp(table: &ValueTable, s: AgentSet) -> CoverSolution {
    let n = table.n();
    let items: Vec<usize> = s.iter().collect();
    let k = items.len();
    if k == 0 {
        return CoverSolution {
            value: Money::ZERO,
            cover: FractionalCover::default(),
            dual: DualWitness { y: vec![Money::ZERO; n] },
            pivots: 0,
        };
    }
    let outside = AgentSet::full(n).difference(s);
    let expand = |u: usize| -> AgentSet {
        AgentSet::from_agents((0..k).filter(|b| u >> b & 1 == 1).map(|b| items[b]))
    };

    let columns = (1usize << k) - 1;
    let mut cost = vec![Money::ZERO; columns + 1];
    let mut repr = vec![AgentSet::EMPTY; columns + 1];
    for u in 1..=columns {
        let inner = expand(u);
        let mut best = (inner, table.get(inner));
        for extra in outside.subsets().skip(1) {
            let cand = inner.union(extra);
            let val = table.get(cand);
            if val < best.1 {
                best = (cand, val);
            }
        }
        repr[u] = best.0;
        cost[u] = best.1;
    }

    // Variable ids: structural column u is id u - 1; surplus of row r is id columns + r.
    let struct_id = |u: usize| u - 1;
    let mut basic: Vec<usize> = (0..k).map(|r| struct_id(1 << r)).collect();
    let mut basis_inv: Vec<Vec<Money>> = (0..k)
        .map(|r| (0..k).map(|c| if r == c { Money::ONE } else { Money::ZERO }).collect())
        .collect();
    let mut x_b = vec![Money::ONE; k];
    let var_cost = |id: usize| if id < columns { cost[id + 1] } else { Money::ZERO };

    let mut y_sum = vec![Money::ZERO; columns + 1];
    let mut pivots = 0;
    loop {
        let y: Vec<Money> = (0..k)
            .map(|c| (0..k).map(|r| var_cost(basic[r]) * basis_inv[r][c]).sum())
            .collect();

        // Bland: lowest-id improving variable enters.
        let mut entering = None;
        for u in 1..=columns {
            y_sum[u] = y_sum[u & (u - 1)] + y[u.trailing_zeros() as usize];
            if cost[u] < y_sum[u] {
                entering = Some(struct_id(u));
                break;
            }
        }
        if entering.is_none() {
            entering = (0..k).find(|&r| y[r].is_negative()).map(|r| columns + r);
        }
        let Some(q) = entering else {
            let value: Money = (0..k).map(|r| var_cost(basic[r]) * x_b[r]).sum();
            let mut cover = FractionalCover::default();
            for r in 0..k {
                if basic[r] < columns && x_b[r].is_positive() {
                    let key = repr[basic[r] + 1];
                    *cover.alpha.entry(key).or_insert(Money::ZERO) += x_b[r];
                }
            }
            let mut full_y = vec![Money::ZERO; n];
            for (b, &i) in items.iter().enumerate() {
                full_y[i] = y[b];
            }
            let dual = DualWitness { y: full_y };
            assert_eq!(value, dual.total(), "strong duality failed");
            return CoverSolution { value, cover, dual, pivots };
        };

        let column: Vec<Money> = if q < columns {
            let u = q + 1;
            (0..k).map(|b| if u >> b & 1 == 1 { Money::ONE } else { Money::ZERO }).collect()
        } else {
            (0..k).map(|b| if b == q - columns { -Money::ONE } else { Money::ZERO }).collect()
        };
        let d: Vec<Money> = (0..k)
            .map(|r| (0..k).filter(|&c| !column[c].is_zero()).map(|c| basis_inv[r][c] * column[c]).sum())
            .collect();

        // Bland: among minimal ratios the lowest basic id leaves.
        let mut leave: Option<(usize, Money)> = None;
        for r in 0..k {
            if !d[r].is_positive() {
                continue;
            }
            let ratio = x_b[r] / d[r];
            leave = match leave {
                None => Some((r, ratio)),
                Some((p, best)) if ratio < best || (ratio == best && basic[r] < basic[p]) => Some((r, ratio)),
                keep => keep,
            };
        }
        let (p, _) = leave.expect("cover LP is bounded below by zero");

        let pivot = d[p];
        for c in 0..k {
            basis_inv[p][c] = basis_inv[p][c] / pivot;
        }
        x_b[p] = x_b[p] / pivot;
        for r in 0..k {
            if r == p || d[r].is_zero() {
                continue;
            }
            let factor = d[r];
            for c in 0..k {
                let delta = factor * basis_inv[p][c];
                basis_inv[r][c] -= delta;
            }
            let delta = factor * x_b[p];
            x_b[r] -= delta;
        }
        basic[p] = q;
        pivots += 1;
    }
}

fn checked_table(spec: &ValuationSpec) -> Result<ValueTable> {
    guard_size("cover LP", spec.n(), MAX_CLASSIFY_AGENTS)?;
    spec.table()
}

/// `ṽ(S)` together with an optimal cover.
pub fn fractional_cover_value(spec: &ValuationSpec, s: AgentSet) -> Result<(Money, FractionalCover)> {
    let table = checked_table(spec)?;
    spec.value(s)?;
    let sol = solve_cover_lp(&table, s);
    Ok((sol.value, sol.cover))
}

/// An optimal dual `y`: an additive function with `y(S) = ṽ(S)` and `y ≤ ṽ` everywhere.
pub fn dual_witness(spec: &ValuationSpec, s: AgentSet) -> Result<DualWitness> {
    let table = checked_table(spec)?;
    spec.value(s)?;
    Ok(solve_cover_lp(&table, s).dual)
}

fn gap_of(v: Money, tilde: Money) -> Option<Money> {
    match (v.is_zero(), tilde.is_zero()) {
        (true, _) => Some(Money::ONE),
        (false, true) => None,
        (false, false) => Some(v / tilde),
    }
}

pub fn integrality_gap(spec: &ValuationSpec, s: AgentSet) -> Result<Option<Money>> {
    let table = checked_table(spec)?;
    spec.value(s)?;
    Ok(gap_of(table.get(s), solve_cover_lp(&table, s).value))
}

pub fn max_integrality_gap(spec: &ValuationSpec) -> Result<GapReport> {
    max_integrality_gap_table(&checked_table(spec)?)
}

pub fn max_integrality_gap_table(table: &ValueTable) -> Result<GapReport> {
    let tilde = tilde_table(table)?;
    let per_subset: Vec<Option<Money>> = table
        .ground()
        .subsets()
        .map(|s| gap_of(table.get(s), tilde.get(s)))
        .collect();
    let max_gap = per_subset.iter().try_fold(Money::ONE, |acc, g| g.map(|g| acc.max(g)));
    Ok(GapReport { per_subset, max_gap })
}

/// `ṽ` on every subset.
pub fn tilde_table(table: &ValueTable) -> Result<ValueTable> {
    guard_size("cover LP", table.n(), MAX_CLASSIFY_AGENTS)?;
    ValueTable::from_fn(table.n(), |s| solve_cover_lp(table, s).value)
}

pub fn tilde_valuation_table(spec: &ValuationSpec) -> Result<ValuationSpec> {
    Ok(ValuationSpec::Table(tilde_table(&checked_table(spec)?)?))
}
