//! Exact expectations over tapes, truthfulness probes, threshold bisection,
//! bipartition checks and approximation reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::agents::AgentSet;
use crate::error::{guard_size, Error, Result};
use crate::mechanisms::{Bids, MechanismId, Outcome, RandomTape, ADDITIVE_SELECTOR_VALUES};
use crate::money::Money;
use crate::optimize::{budgeted_opt_exact, Instance};
use crate::valuations::{ValuationSpec, ValueTable};

/// Largest population for exhaustive tape enumeration.
pub const MAX_TAPE_AGENTS: usize = 14;

/// Misreports tried for each agent.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ProbeGrid {
    /// Applied to the agent's true cost. Always contains 1.
    pub multipliers: Vec<Money>,
    /// Also try `B/k` for `k = 1..=n`.
    pub boundaries: bool,
}

impl Default for ProbeGrid {
    /// 21 geometric points from 1/10 to 10 (to three decimals), the exact
    /// true cost, and the `B/k` boundaries.
    fn default() -> ProbeGrid {
        let mut multipliers: Vec<Money> = (0..=20)
            .map(|k| {
                let x = 10f64.powf((k as f64 - 10.0) / 10.0);
                Money::new((x * 1000.0).round() as i128, 1000)
            })
            .collect();
        multipliers[10] = Money::ONE;
        ProbeGrid { multipliers, boundaries: true }
    }
}

impl ProbeGrid {
    pub fn new(multipliers: Vec<Money>, boundaries: bool) -> Result<ProbeGrid> {
        if multipliers.iter().any(|m| !m.is_positive()) {
            return Err(Error::Input("probe multipliers must be positive".into()));
        }
        let mut multipliers = multipliers;
        if !multipliers.contains(&Money::ONE) {
            multipliers.push(Money::ONE);
        }
        Ok(ProbeGrid { multipliers, boundaries })
    }

    /// Distinct misreports for an agent of true cost `cost`, ascending.
    pub fn bids_for(&self, cost: Money, budget: Money, n: usize) -> Vec<Money> {
        let mut out: Vec<Money> = self.multipliers.iter().map(|&m| m * cost).collect();
        if self.boundaries {
            out.extend((1..=n.max(1)).map(|k| budget / Money::from(k)));
        }
        out.sort();
        out.dedup();
        out
    }
}

fn check_tape_size(inst: &Instance) -> Result<()> {
    guard_size("tape enumeration", inst.n(), MAX_TAPE_AGENTS)
}

fn average(values: impl Iterator<Item = Money>, count: usize) -> Money {
    values.sum::<Money>() / Money::from(count)
}

/// `E[v(winners)]` over the uniform tape distribution, winners valued in the
/// instance's own valuation.
pub fn expected_value_exact(mech: MechanismId, inst: &Instance, bids: &Bids) -> Result<Money> {
    check_tape_size(inst)?;
    let tapes = mech.tapes(inst.n());
    let values = tapes
        .iter()
        .map(|t| mech.run(inst, bids, t).map(|o| o.value(inst.table())))
        .collect::<Result<Vec<_>>>()?;
    Ok(average(values.into_iter(), tapes.len()))
}

/// The same expectation by brute force over every tape, relevant or not.
pub fn expected_value_all_tapes(mech: MechanismId, inst: &Instance, bids: &Bids) -> Result<Money> {
    check_tape_size(inst)?;
    let values = RandomTape::all(inst.n())
        .map(|t| mech.run(inst, bids, &t).map(|o| o.value(inst.table())))
        .collect::<Result<Vec<_>>>()?;
    Ok(average(values.into_iter(), RandomTape::count(inst.n())))
}

/// Draws a uniform tape.
pub fn random_tape(n: usize, rng: &mut impl Rng) -> RandomTape {
    RandomTape {
        sample_bits: AgentSet(rng.gen::<u32>() & AgentSet::full(n).bits()),
        top_selector: rng.gen(),
        additive_selector: rng.gen_range(0..ADDITIVE_SELECTOR_VALUES),
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
}

impl MonteCarloEstimate {
    /// Whether `exact` lies within `sigmas` standard errors of the mean.
    pub fn agrees_with(&self, exact: Money, sigmas: f64) -> bool {
        let gap = (self.mean - exact.to_f64()).abs();
        gap <= sigmas * self.std_error + 1e-9 * exact.to_f64().abs().max(1.0)
    }
}

pub fn expected_value_monte_carlo(
    mech: MechanismId,
    inst: &Instance,
    bids: &Bids,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if trials < 2 {
        return Err(Error::Input(format!("need at least 2 trials, got {trials}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let tape = random_tape(inst.n(), &mut rng);
        let v = mech.run(inst, bids, &tape)?.value(inst.table()).to_f64();
        sum += v;
        sum_sq += v * v;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0);
    Ok(MonteCarloEstimate { mean, std_error: (var / t).sqrt(), trials, seed })
}

/// A profitable unilateral misreport.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct TruthViolation {
    pub mechanism: MechanismId,
    pub agent: usize,
    pub tape: RandomTape,
    pub true_cost: Money,
    pub misreport: Money,
    pub truthful_utility: Money,
    pub misreport_utility: Money,
    pub truthful_outcome: Outcome,
    pub misreport_outcome: Outcome,
}

/// An outcome breaking no positive transfer, individual rationality or the budget.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct InvariantViolation {
    pub mechanism: MechanismId,
    pub tape: RandomTape,
    pub bids: Bids,
    pub problems: Vec<String>,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct ProbeReport {
    /// Mechanism runs performed.
    pub runs: usize,
    pub truthfulness: Vec<TruthViolation>,
    pub invariants: Vec<InvariantViolation>,
}

impl ProbeReport {
    pub fn is_clean(&self) -> bool {
        self.truthfulness.is_empty() && self.invariants.is_empty()
    }

    pub fn merge(&mut self, other: ProbeReport) {
        self.runs += other.runs;
        self.truthfulness.extend(other.truthfulness);
        self.invariants.extend(other.invariants);
    }
}

fn checked_run(
    mech: MechanismId,
    inst: &Instance,
    bids: &Bids,
    tape: &RandomTape,
    report: &mut ProbeReport,
) -> Result<Outcome> {
    let out = mech.run(inst, bids, tape)?;
    report.runs += 1;
    let problems = out.invariant_violations(bids, inst.budget());
    if !problems.is_empty() {
        report.invariants.push(InvariantViolation { mechanism: mech, tape: *tape, bids: bids.clone(), problems });
    }
    Ok(out)
}

/// Every agent, every relevant tape, every grid misreport, others truthful.
/// Utilities are compared exactly. Every outcome seen is also checked for
/// the payment invariants.
pub fn truthfulness_probe(mech: MechanismId, inst: &Instance, grid: &ProbeGrid) -> Result<ProbeReport> {
    check_tape_size(inst)?;
    let truthful = Bids::truthful(inst);
    let costs = inst.true_costs();
    let mut report = ProbeReport::default();
    let misreports: Vec<Vec<Money>> =
        costs.iter().map(|&c| grid.bids_for(c, inst.budget(), inst.n())).collect();
    for tape in mech.tapes(inst.n()) {
        let base = checked_run(mech, inst, &truthful, &tape, &mut report)?;
        for i in 0..inst.n() {
            let honest = base.utility(i, costs[i]);
            for &b in &misreports[i] {
                if b == costs[i] {
                    continue;
                }
                let bids = truthful.with(i, b);
                let out = checked_run(mech, inst, &bids, &tape, &mut report)?;
                let lie = out.utility(i, costs[i]);
                if lie > honest {
                    report.truthfulness.push(TruthViolation {
                        mechanism: mech,
                        agent: i,
                        tape,
                        true_cost: costs[i],
                        misreport: b,
                        truthful_utility: honest,
                        misreport_utility: lie,
                        truthful_outcome: base.clone(),
                        misreport_outcome: out,
                    });
                }
            }
        }
    }
    Ok(report)
}

pub fn default_tolerance(budget: Money) -> Money {
    budget / Money::from_int(1 << 20)
}

/// Localizes the largest winning bid of `agent` on `[bid, B]` to width `tol`
/// and returns the highest bid observed to win.
pub fn threshold_by_bisection(
    mech: MechanismId,
    inst: &Instance,
    bids: &Bids,
    tape: &RandomTape,
    agent: usize,
    tol: Money,
) -> Result<Money> {
    if agent >= inst.n() {
        return Err(Error::Input(format!("unknown agent id {agent}")));
    }
    if !tol.is_positive() {
        return Err(Error::Input(format!("tolerance must be positive, got {tol}")));
    }
    let wins = |b: Money| -> Result<bool> { Ok(mech.run(inst, &bids.with(agent, b), tape)?.winners.contains(agent)) };
    let mut lo = bids.get(agent);
    if !wins(lo)? {
        return Err(Error::Precondition(format!("agent {agent} does not win at bid {lo}")));
    }
    let mut hi = inst.budget();
    if wins(hi)? {
        return Ok(hi);
    }
    while hi - lo > tol {
        let mid = (lo + hi) / Money::from_int(2);
        if wins(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct PartitionCheck {
    pub hits: usize,
    pub trials: usize,
    pub frequency: f64,
    pub seed: u64,
}

impl PartitionCheck {
    /// Binomial standard error at the observed frequency.
    pub fn std_error(&self) -> f64 {
        (self.frequency * (1.0 - self.frequency) / self.trials as f64).sqrt()
    }
}

fn partition_setup(spec: &ValuationSpec, s: AgentSet, k: u32) -> Result<(ValueTable, Money)> {
    if k == 0 {
        return Err(Error::Input("k must be positive".into()));
    }
    let table = spec.table()?;
    spec.check_agents(s)?;
    if s.is_empty() {
        return Err(Error::Precondition("the set to partition is empty".into()));
    }
    let vs = table.get(s);
    let kk = Money::from(k);
    if let Some(i) = s.iter().find(|&i| vs < kk * table.singleton(i)) {
        return Err(Error::Precondition(format!(
            "v(S) = {vs} is below {k}·v({{{i}}}) = {}",
            kk * table.singleton(i)
        )));
    }
    let bar = Money::from(k - 1) / Money::from(4 * k) * vs;
    Ok((table, bar))
}

fn both_halves(table: &ValueTable, s: AgentSet, t1: AgentSet, bar: Money) -> bool {
    table.get(t1) >= bar && table.get(s.difference(t1)) >= bar
}

/// Frequency of `v(T1), v(T2) ≥ (k-1)/(4k)·v(S)` over uniform bipartitions of `S`.
pub fn partition_check(spec: &ValuationSpec, s: AgentSet, k: u32, trials: usize, seed: u64) -> Result<PartitionCheck> {
    let (table, bar) = partition_setup(spec, s, k)?;
    if trials == 0 {
        return Err(Error::Input("need at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..trials)
        .filter(|_| {
            let t1 = AgentSet(rng.gen::<u32>() & s.bits());
            both_halves(&table, s, t1, bar)
        })
        .count();
    Ok(PartitionCheck { hits, trials, frequency: hits as f64 / trials as f64, seed })
}

/// The same probability, exactly, over all `2^|S|` bipartitions.
pub fn partition_probability_exact(spec: &ValuationSpec, s: AgentSet, k: u32) -> Result<Money> {
    let (table, bar) = partition_setup(spec, s, k)?;
    let hits = s.subsets().filter(|&t1| both_halves(&table, s, t1, bar)).count();
    Ok(Money::from(hits) / Money::from_int(1 << s.len()))
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ExperimentReport {
    pub instance_id: String,
    pub mechanism: MechanismId,
    pub n: usize,
    pub opt: Money,
    pub expected_value: Money,
    /// `opt / expected_value`; 1 when both are 0 and `None` when only the
    /// expectation is 0.
    pub ratio: Option<Money>,
    pub tapes: usize,
    pub clean_tapes: usize,
    pub invariant_violations: Vec<InvariantViolation>,
    pub seed: Option<u64>,
}

pub fn ratio(opt: Money, expected: Money) -> Option<Money> {
    if expected.is_zero() {
        opt.is_zero().then_some(Money::ONE)
    } else {
        Some(opt / expected)
    }
}

/// Exact expectation under truthful bids, the budgeted optimum, their ratio
/// and per-tape invariant tallies.
pub fn approximation_report(mech: MechanismId, inst: &Instance) -> Result<ExperimentReport> {
    approximation_report_for("", None, mech, inst)
}

pub fn approximation_report_for(
    instance_id: &str,
    seed: Option<u64>,
    mech: MechanismId,
    inst: &Instance,
) -> Result<ExperimentReport> {
    check_tape_size(inst)?;
    let bids = Bids::truthful(inst);
    let tapes = mech.tapes(inst.n());
    let mut probe = ProbeReport::default();
    let mut total = Money::ZERO;
    for t in &tapes {
        total += checked_run(mech, inst, &bids, t, &mut probe)?.value(inst.table());
    }
    let expected_value = total / Money::from(tapes.len());
    let opt = budgeted_opt_exact(inst, inst.true_costs())?.value;
    let bad: std::collections::BTreeSet<RandomTape> = probe.invariants.iter().map(|v| v.tape).collect();
    Ok(ExperimentReport {
        instance_id: instance_id.to_string(),
        mechanism: mech,
        n: inst.n(),
        opt,
        expected_value,
        ratio: ratio(opt, expected_value),
        tapes: tapes.len(),
        clean_tapes: tapes.len() - bad.len(),
        invariant_violations: probe.invariants,
        seed,
    })
}
