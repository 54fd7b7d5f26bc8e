//! Budgeted maximization: `max v(S)` subject to `c(S) ≤ B`.

use std::sync::Arc;

use serde::Serialize;

use crate::agents::{AgentId, AgentSet, MAX_AGENTS};
use crate::error::{guard_size, Error, Result};
use crate::mechanisms::MechanismCache;
use crate::money::Money;
use crate::oracles::{canonical_demand, DemandOracle, TableOracle};
use crate::valuations::{ValuationSpec, ValueTable};

/// Agents with private true costs, a budget and a public valuation.
#[derive(Clone, Debug)]
pub struct Instance {
    costs: Vec<Money>,
    budget: Money,
    spec: ValuationSpec,
    table: Arc<ValueTable>,
    pub(crate) cache: Arc<MechanismCache>,
}

impl Instance {
    pub fn new(costs: Vec<Money>, budget: Money, spec: ValuationSpec) -> Result<Instance> {
        spec.validate()?;
        guard_size("instance", spec.n(), MAX_AGENTS)?;
        if costs.len() != spec.n() {
            return Err(Error::Input(format!(
                "{} costs given for {} agents",
                costs.len(),
                spec.n()
            )));
        }
        if !budget.is_positive() {
            return Err(Error::Input(format!("budget must be positive, got {budget}")));
        }
        for (i, c) in costs.iter().enumerate() {
            if c.is_negative() {
                return Err(Error::Input(format!("cost of agent {i} is negative")));
            }
            if *c > budget {
                return Err(Error::Input(format!("cost of agent {i} ({c}) exceeds the budget {budget}")));
            }
        }
        let table = Arc::new(spec.table()?);
        Ok(Instance { costs, budget, spec, table, cache: Arc::default() })
    }

    /// Same agents and budget under a different valuation.
    pub fn with_spec(&self, spec: ValuationSpec) -> Result<Instance> {
        Instance::new(self.costs.clone(), self.budget, spec)
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.n()).map(AgentId)
    }

    pub fn ground(&self) -> AgentSet {
        AgentSet::full(self.n())
    }

    pub fn true_costs(&self) -> &[Money] {
        &self.costs
    }

    pub fn budget(&self) -> Money {
        self.budget
    }

    pub fn spec(&self) -> &ValuationSpec {
        &self.spec
    }

    pub fn table(&self) -> &ValueTable {
        &self.table
    }

    pub fn value(&self, s: AgentSet) -> Money {
        self.table.get(s)
    }

    fn check_costs(&self, costs: &[Money]) -> Result<()> {
        if costs.len() != self.n() {
            return Err(Error::Input(format!("{} costs given for {} agents", costs.len(), self.n())));
        }
        if let Some(i) = costs.iter().position(|c| c.is_negative()) {
            return Err(Error::Input(format!("cost of agent {i} is negative")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct BudgetedSolution {
    pub winners: AgentSet,
    pub value: Money,
}

impl BudgetedSolution {
    pub const EMPTY: BudgetedSolution = BudgetedSolution { winners: AgentSet::EMPTY, value: Money::ZERO };
}

fn total(costs: &[Money], s: AgentSet) -> Money {
    s.iter().map(|i| costs[i]).sum()
}

/// Exact optimum over all agents. Ties: higher value, then fewer agents,
/// then the lexicographically smallest agent list.
pub fn budgeted_opt_exact(inst: &Instance, costs: &[Money]) -> Result<BudgetedSolution> {
    inst.check_costs(costs)?;
    Ok(budgeted_opt_within(inst.table(), costs, inst.budget(), inst.ground()))
}

/// Exact optimum over subsets of `ground`.
pub fn budgeted_opt_within(
    table: &ValueTable,
    costs: &[Money],
    budget: Money,
    ground: AgentSet,
) -> BudgetedSolution {
    let mut best = BudgetedSolution::EMPTY;
    for s in ground.subsets().skip(1) {
        if total(costs, s) > budget {
            continue;
        }
        let value = table.get(s);
        let better = value > best.value
            || (value == best.value
                && (s.len() < best.winners.len()
                    || (s.len() == best.winners.len() && s.cmp_lex(best.winners).is_lt())));
        if better {
            best = BudgetedSolution { winners: s, value };
        }
    }
    best
}

/// One grid point of the demand-based budgeted maximizer.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GridStep {
    pub target: Money,
    pub demanded: AgentSet,
    /// Whether `v(demanded) ≥ target / 2`.
    pub accepted: bool,
    pub chosen: AgentSet,
    pub value: Money,
}

/// Target grids for the budgeted maximizer.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Grid {
    /// `{v*, 2v*, .., n·v*}`.
    Coarse,
    /// `{εv*, 2εv*, .., ⌈n/ε⌉·εv*}`.
    Fine(Money),
}

/// Runs every grid point and reports each.
///
/// At grid value `v` the prices are `p(i) = v·c(i)/(2B)`; when the canonical
/// demand `T` has `v(T) ≥ v/2`, `T` is filled into the budget greedily by
/// decreasing cost (lower id first on ties), stopping at the first item that
/// does not fit. Items costing more than `B` are never considered.
pub fn sa_alg_max_trace<O: DemandOracle + ?Sized>(
    oracle: &O,
    costs: &[Money],
    budget: Money,
    ground: AgentSet,
    grid: Grid,
) -> Vec<GridStep> {
    let ground = AgentSet::from_agents(ground.iter().filter(|&i| costs[i] <= budget));
    let best_single = ground
        .iter()
        .map(|i| oracle.value(AgentSet::singleton(i)))
        .max()
        .unwrap_or(Money::ZERO);
    if !best_single.is_positive() {
        return Vec::new();
    }
    let m = ground.len();
    let (step, points) = match grid {
        Grid::Coarse => (best_single, m as i128),
        Grid::Fine(eps) => {
            assert!(eps.is_positive(), "grid resolution must be positive");
            (eps * best_single, (Money::from(m) / eps).ceil_int())
        }
    };
    let mut order: Vec<usize> = ground.iter().collect();
    order.sort_by(|&a, &b| costs[b].cmp(&costs[a]).then(a.cmp(&b)));

    let mut prices = vec![Money::ZERO; costs.len()];
    let two_b = budget + budget;
    (1..=points)
        .map(|j| {
            let target = step * Money::from_int(j);
            let scale = target / two_b;
            for i in ground.iter() {
                prices[i] = scale * costs[i];
            }
            let demanded = canonical_demand(oracle, &prices, ground);
            let accepted = oracle.value(demanded) + oracle.value(demanded) >= target;
            let mut chosen = AgentSet::EMPTY;
            if accepted {
                let mut spent = Money::ZERO;
                for &i in order.iter().filter(|&&i| demanded.contains(i)) {
                    if spent + costs[i] > budget {
                        break;
                    }
                    spent += costs[i];
                    chosen = chosen.with(i);
                }
            }
            GridStep { target, demanded, accepted, chosen, value: oracle.value(chosen) }
        })
        .collect()
}

fn best_step(steps: &[GridStep]) -> BudgetedSolution {
    steps.iter().fold(BudgetedSolution::EMPTY, |best, s| {
        if s.value > best.value {
            BudgetedSolution { winners: s.chosen, value: s.value }
        } else {
            best
        }
    })
}

pub fn sa_alg_max_within<O: DemandOracle + ?Sized>(
    oracle: &O,
    costs: &[Money],
    budget: Money,
    ground: AgentSet,
) -> BudgetedSolution {
    best_step(&sa_alg_max_trace(oracle, costs, budget, ground, Grid::Coarse))
}

/// 8-approximate budgeted maximizer for subadditive valuations.
pub fn sa_alg_max(inst: &Instance, costs: &[Money]) -> Result<BudgetedSolution> {
    inst.check_costs(costs)?;
    Ok(sa_alg_max_within(&TableOracle(inst.table()), costs, inst.budget(), inst.ground()))
}

/// The same procedure over the finer grid with resolution `eps`.
pub fn sa_alg_max_fine(inst: &Instance, costs: &[Money], eps: Money) -> Result<BudgetedSolution> {
    inst.check_costs(costs)?;
    if !eps.is_positive() {
        return Err(Error::Input(format!("eps must be positive, got {eps}")));
    }
    let steps = sa_alg_max_trace(&TableOracle(inst.table()), costs, inst.budget(), inst.ground(), Grid::Fine(eps));
    Ok(best_step(&steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::money::q;

    fn ints(xs: &[i128]) -> Vec<Money> {
        xs.iter().map(|&x| Money::from_int(x)).collect()
    }

    fn additive(w: &[i128], c: &[i128], b: i128) -> Instance {
        Instance::new(ints(c), Money::from_int(b), ValuationSpec::Additive { weights: ints(w) }).unwrap()
    }

    #[test]
    fn only_singletons_affordable() {
        let inst = additive(&[3, 4], &[2, 2], 2);
        let sol = budgeted_opt_exact(&inst, inst.true_costs()).unwrap();
        assert_eq!(sol, BudgetedSolution { winners: AgentSet::singleton(1), value: q(4, 1) });
    }

    #[test]
    fn everything_affordable() {
        let inst = additive(&[3, 4, 1], &[1, 1, 1], 3);
        let sol = budgeted_opt_exact(&inst, inst.true_costs()).unwrap();
        assert_eq!(sol.winners, AgentSet::full(3));
    }

    #[test]
    fn optimum_tie_breaks() {
        // {0,1} and {2} both worth 2; fewer agents wins
        let inst = additive(&[1, 1, 2], &[1, 1, 2], 2);
        let sol = budgeted_opt_exact(&inst, inst.true_costs()).unwrap();
        assert_eq!(sol.winners, AgentSet::singleton(2));
        // {0} and {1} both worth 1; lexicographic
        let inst = additive(&[1, 1], &[1, 1], 1);
        assert_eq!(budgeted_opt_exact(&inst, inst.true_costs()).unwrap().winners, AgentSet::singleton(0));
    }

    #[test]
    fn single_item_wins() {
        let inst = additive(&[5], &[1], 2);
        let sol = sa_alg_max(&inst, inst.true_costs()).unwrap();
        assert_eq!(sol.winners, AgentSet::singleton(0));
    }

    #[test]
    fn zero_valuation_returns_empty() {
        let inst = additive(&[0, 0], &[1, 1], 2);
        assert_eq!(sa_alg_max(&inst, inst.true_costs()).unwrap(), BudgetedSolution::EMPTY);
    }

    #[test]
    fn greedy_fill_respects_budget() {
        let inst = additive(&[5, 5, 5, 5], &[3, 2, 2, 1], 4);
        let sol = sa_alg_max(&inst, inst.true_costs()).unwrap();
        let spent: Money = sol.winners.iter().map(|i| inst.true_costs()[i]).sum();
        assert!(spent <= inst.budget());
        assert!(sol.value * Money::from_int(8) >= budgeted_opt_exact(&inst, inst.true_costs()).unwrap().value);
    }

    #[test]
    fn fine_grid_size() {
        let inst = additive(&[1, 1, 1], &[1, 1, 1], 3);
        let steps = sa_alg_max_trace(
            &TableOracle(inst.table()),
            inst.true_costs(),
            inst.budget(),
            inst.ground(),
            Grid::Fine(q(1, 2)),
        );
        assert_eq!(steps.len(), 6);
        assert_eq!(steps.last().unwrap().target, q(3, 1));
    }

    #[test]
    fn instance_validation() {
        let spec = ValuationSpec::Additive { weights: ints(&[1, 1]) };
        assert!(Instance::new(ints(&[1]), Money::ONE, spec.clone()).is_err());
        assert!(Instance::new(ints(&[1, 2]), Money::ONE, spec.clone()).is_err());
        assert!(Instance::new(ints(&[1, 1]), Money::ZERO, spec.clone()).is_err());
        assert!(Instance::new(ints(&[-1, 1]), Money::ONE, spec).is_err());
    }
}
