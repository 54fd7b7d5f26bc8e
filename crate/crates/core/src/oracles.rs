//! Demand queries: sets maximizing `v(S) - p(S)` for a price vector.

use crate::agents::{AgentSet, MAX_AGENTS};
use crate::error::{guard_size, Error, Result};
use crate::money::Money;
use crate::valuations::{ValuationSpec, ValueTable};

/// A price for every agent.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PriceVector(pub Vec<Money>);

impl PriceVector {
    pub fn new(prices: Vec<Money>) -> Result<PriceVector> {
        if let Some(i) = prices.iter().position(|p| p.is_negative()) {
            return Err(Error::Input(format!("price of agent {i} is negative")));
        }
        Ok(PriceVector(prices))
    }

    pub fn total(&self, s: AgentSet) -> Money {
        s.iter().map(|i| self.0[i]).sum()
    }
}

/// Access to a valuation through value and demand queries.
///
/// Everything downstream (budgeted maximization, the mechanisms) talks to
/// the valuation only through this trait.
pub trait DemandOracle {
    fn n(&self) -> usize;

    fn value(&self, s: AgentSet) -> Money;

    /// Some maximizer of `v(S) - p(S)` over `S ⊆ ground`.
    fn demand(&self, prices: &[Money], ground: AgentSet) -> AgentSet;

    fn surplus(&self, prices: &[Money], s: AgentSet) -> Money {
        self.value(s) - s.iter().map(|i| prices[i]).sum::<Money>()
    }
}

/// Brute-force oracle over a materialized table.
#[derive(Clone, Copy)]
pub struct TableOracle<'a>(pub &'a ValueTable);

impl DemandOracle for TableOracle<'_> {
    fn n(&self) -> usize {
        self.0.n()
    }

    fn value(&self, s: AgentSet) -> Money {
        self.0.get(s)
    }

    fn demand(&self, prices: &[Money], ground: AgentSet) -> AgentSet {
        best_response(self.0, prices, ground).0
    }
}

/// Maximum surplus over subsets of `ground`, walking them in Gray-code order
/// so each step toggles one agent. Returns the first maximizer met.
pub fn best_response(table: &ValueTable, prices: &[Money], ground: AgentSet) -> (AgentSet, Money) {
    let items: Vec<usize> = ground.iter().collect();
    let mut cur = 0u32;
    let mut price = Money::ZERO;
    let mut best = (AgentSet::EMPTY, Money::ZERO);
    let values = table.values();
    for step in 1u32..1 << items.len() {
        let i = items[step.trailing_zeros() as usize];
        if cur >> i & 1 == 1 {
            price -= prices[i];
        } else {
            price += prices[i];
        }
        cur ^= 1 << i;
        let surplus = values[cur as usize] - price;
        if surplus > best.1 {
            best = (AgentSet(cur), surplus);
        }
    }
    best
}

/// The fixed-order canonical maximizer.
///
/// Items are visited in increasing id order. An item is dropped from
/// consideration when some maximizer avoids it (excluding it does not
/// strictly lower the best surplus) and kept otherwise. Every kept item is
/// then in all remaining maximizers, so the kept set is itself a maximizer
/// and depends only on `(v, prices, ground)`.
pub fn canonical_demand<O: DemandOracle + ?Sized>(
    oracle: &O,
    prices: &[Money],
    ground: AgentSet,
) -> AgentSet {
    let best_within = |g: AgentSet| oracle.surplus(prices, oracle.demand(prices, g));
    let mut allowed = ground;
    let mut kept = AgentSet::EMPTY;
    let mut best = best_within(allowed);
    for i in ground.iter() {
        let without = allowed.without(i);
        let best_without = best_within(without);
        if best > best_without {
            kept = kept.with(i);
        } else {
            allowed = without;
            best = best_without;
        }
    }
    debug_assert_eq!(kept, allowed);
    kept
}

fn check_prices(spec: &ValuationSpec, prices: &PriceVector) -> Result<()> {
    guard_size("demand query", spec.n(), MAX_AGENTS)?;
    if prices.0.len() != spec.n() {
        return Err(Error::Input(format!(
            "price vector has {} entries for {} agents",
            prices.0.len(),
            spec.n()
        )));
    }
    Ok(())
}

/// Some surplus maximizer over all agents.
pub fn demand_query(spec: &ValuationSpec, prices: &PriceVector) -> Result<AgentSet> {
    check_prices(spec, prices)?;
    let table = spec.table()?;
    Ok(TableOracle(&table).demand(&prices.0, table.ground()))
}

/// The canonical surplus maximizer over all agents.
pub fn canonical_demand_query(spec: &ValuationSpec, prices: &PriceVector) -> Result<AgentSet> {
    check_prices(spec, prices)?;
    let table = spec.table()?;
    Ok(canonical_demand(&TableOracle(&table), &prices.0, table.ground()))
}
