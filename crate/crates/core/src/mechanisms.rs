//! Budget-feasible procurement mechanisms.
//!
//! Every mechanism is a deterministic function of `(instance, bids, tape)`;
//! all randomness lives in the [`RandomTape`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::agents::{AgentSet, MAX_AGENTS};
use crate::error::{guard_size, Error, Result};
use crate::lpcore::{max_integrality_gap_table, solve_cover_lp, tilde_table};
use crate::money::Money;
use crate::oracles::{best_response, canonical_demand, TableOracle};
use crate::optimize::{budgeted_opt_within, sa_alg_max_within, Instance};
use crate::valuations::{xos_clause_at, ValuationSpec, ValueTable, MAX_CLASSIFY_AGENTS};

/// One bid per agent.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bids(pub Vec<Money>);

impl Bids {
    pub fn new(bids: Vec<Money>) -> Result<Bids> {
        if let Some(i) = bids.iter().position(|b| b.is_negative()) {
            return Err(Error::Input(format!("bid of agent {i} is negative")));
        }
        Ok(Bids(bids))
    }

    pub fn truthful(inst: &Instance) -> Bids {
        Bids(inst.true_costs().to_vec())
    }

    pub fn get(&self, i: usize) -> Money {
        self.0[i]
    }

    /// The same profile with agent `i` bidding `bid` instead.
    pub fn with(&self, i: usize, bid: Money) -> Bids {
        let mut v = self.0.clone();
        v[i] = bid;
        Bids(v)
    }

    pub fn total(&self, s: AgentSet) -> Money {
        s.iter().map(|i| self.0[i]).sum()
    }

    /// Agents whose bid does not exceed the budget.
    pub fn eligible(&self, budget: Money) -> AgentSet {
        AgentSet::from_agents((0..self.0.len()).filter(|&i| self.0[i] <= budget))
    }
}

/// Every coin a mechanism may flip.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct RandomTape {
    /// Membership in the sample group `T`.
    pub sample_bits: AgentSet,
    /// `true` selects the random-sampling branch of a main mechanism.
    pub top_selector: bool,
    /// Branch of the additive mechanism: 0 is largest item, 1 and 2 are
    /// proportional share.
    pub additive_selector: u8,
}

pub const ADDITIVE_SELECTOR_VALUES: u8 = 3;

impl RandomTape {
    pub fn new(n: usize, sample_bits: AgentSet, top_selector: bool, additive_selector: u8) -> Result<RandomTape> {
        if !sample_bits.is_subset_of(AgentSet::full(n)) {
            return Err(Error::Input(format!("sample bits {sample_bits} name agents beyond {n}")));
        }
        if additive_selector >= ADDITIVE_SELECTOR_VALUES {
            return Err(Error::Input(format!("additive selector must be below 3, got {additive_selector}")));
        }
        Ok(RandomTape { sample_bits, top_selector, additive_selector })
    }

    pub fn count(n: usize) -> usize {
        (1usize << n) * 2 * ADDITIVE_SELECTOR_VALUES as usize
    }

    /// The whole tape space for `n` agents, each tape equally likely.
    pub fn all(n: usize) -> impl Iterator<Item = RandomTape> {
        AgentSet::full(n).subsets().flat_map(|sample_bits| {
            [false, true].into_iter().flat_map(move |top_selector| {
                (0..ADDITIVE_SELECTOR_VALUES).map(move |additive_selector| RandomTape {
                    sample_bits,
                    top_selector,
                    additive_selector,
                })
            })
        })
    }

    fn uses_proportional_share(&self) -> bool {
        self.additive_selector != 0
    }
}

impl Default for RandomTape {
    fn default() -> RandomTape {
        RandomTape { sample_bits: AgentSet::EMPTY, top_selector: false, additive_selector: 0 }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct Outcome {
    pub winners: AgentSet,
    pub payments: BTreeMap<usize, Money>,
}

impl Outcome {
    pub fn empty() -> Outcome {
        Outcome::default()
    }

    fn posted(winners: AgentSet, price: Money) -> Outcome {
        Outcome { winners, payments: winners.iter().map(|i| (i, price)).collect() }
    }

    pub fn payment(&self, i: usize) -> Money {
        self.payments.get(&i).copied().unwrap_or(Money::ZERO)
    }

    pub fn total_payment(&self) -> Money {
        self.payments.values().sum()
    }

    pub fn utility(&self, i: usize, cost: Money) -> Money {
        if self.winners.contains(i) {
            self.payment(i) - cost
        } else {
            self.payment(i)
        }
    }

    pub fn value(&self, table: &ValueTable) -> Money {
        table.get(self.winners)
    }

    /// Problems with no positive transfer, individual rationality and budget
    /// feasibility, as readable strings. Empty when all hold.
    pub fn invariant_violations(&self, bids: &Bids, budget: Money) -> Vec<String> {
        let mut out = Vec::new();
        for (&i, &p) in &self.payments {
            if !self.winners.contains(i) && !p.is_zero() {
                out.push(format!("loser {i} receives {p}"));
            }
            if p.is_negative() {
                out.push(format!("agent {i} is charged {p}"));
            }
        }
        for i in self.winners.iter() {
            if self.payment(i) < bids.get(i) {
                out.push(format!("winner {i} is paid {} below their bid {}", self.payment(i), bids.get(i)));
            }
        }
        let total = self.total_payment();
        if total > budget {
            out.push(format!("payments total {total} exceed the budget {budget}"));
        }
        out
    }
}

fn check_bids(inst: &Instance, bids: &Bids) -> Result<()> {
    if bids.0.len() != inst.n() {
        return Err(Error::Input(format!("{} bids given for {} agents", bids.0.len(), inst.n())));
    }
    if let Some(i) = bids.0.iter().position(|b| b.is_negative()) {
        return Err(Error::Input(format!("bid of agent {i} is negative")));
    }
    Ok(())
}

fn check_tape(inst: &Instance, tape: &RandomTape) -> Result<()> {
    RandomTape::new(inst.n(), tape.sample_bits, tape.top_selector, tape.additive_selector).map(|_| ())
}

/// Pays the whole budget to the eligible agent of largest single value.
pub fn largest_item_mechanism(inst: &Instance, bids: &Bids) -> Result<Outcome> {
    check_bids(inst, bids)?;
    Ok(largest_item(inst.table(), bids, inst.budget()))
}

fn largest_item(table: &ValueTable, bids: &Bids, budget: Money) -> Outcome {
    let mut best: Option<(usize, Money)> = None;
    for i in bids.eligible(budget).iter() {
        let v = table.singleton(i);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    match best {
        Some((i, _)) => Outcome::posted(AgentSet::singleton(i), budget),
        None => Outcome::empty(),
    }
}

/// Truthful budget-feasible mechanism for additive valuations.
///
/// Selector 0 pays `B` to the largest-weight candidate. Selectors 1 and 2 run
/// proportional share: candidates sorted by `w/b` descending take the
/// longest prefix `W` whose last member has `b ≤ w·B/w(W)`, and each winner
/// is paid their threshold bid.
pub fn additive_mechanism(weights: &[Money], bids: &Bids, budget: Money, tape: &RandomTape) -> Result<Outcome> {
    if weights.len() != bids.0.len() {
        return Err(Error::Input(format!("{} weights given for {} bids", weights.len(), bids.0.len())));
    }
    if let Some(i) = weights.iter().position(|w| w.is_negative()) {
        return Err(Error::Input(format!("weight of agent {i} is negative")));
    }
    if !budget.is_positive() {
        return Err(Error::Input(format!("budget must be positive, got {budget}")));
    }
    Bids::new(bids.0.clone())?;
    Ok(additive(weights, bids, budget, tape))
}

fn additive(weights: &[Money], bids: &Bids, budget: Money, tape: &RandomTape) -> Outcome {
    let candidates: Vec<usize> = bids.eligible(budget).iter().filter(|&i| weights[i].is_positive()).collect();
    if candidates.is_empty() {
        return Outcome::empty();
    }
    if !tape.uses_proportional_share() {
        let mut best = candidates[0];
        for &i in &candidates[1..] {
            if weights[i] > weights[best] {
                best = i;
            }
        }
        return Outcome::posted(AgentSet::singleton(best), budget);
    }
    let order = density_order(weights, bids, &candidates);
    let winners = proportional_share_prefix(weights, bids, budget, &order);
    let mut out = Outcome { winners: AgentSet::from_agents(winners.iter().copied()), payments: BTreeMap::new() };
    for &i in &winners {
        let others: Vec<usize> = order.iter().copied().filter(|&j| j != i).collect();
        out.payments.insert(i, proportional_share_threshold(weights, bids, budget, i, &others));
    }
    out
}

/// Decreasing `w/b`, lower id first on ties; `b = 0` counts as infinite density.
fn density_order(weights: &[Money], bids: &Bids, candidates: &[usize]) -> Vec<usize> {
    let mut order = candidates.to_vec();
    order.sort_by(|&a, &b| {
        (weights[b] * bids.get(a))
            .cmp(&(weights[a] * bids.get(b)))
            .then(a.cmp(&b))
    });
    order
}

fn proportional_share_prefix(weights: &[Money], bids: &Bids, budget: Money, order: &[usize]) -> Vec<usize> {
    let mut total = Money::ZERO;
    let mut len = 0;
    for (k, &i) in order.iter().enumerate() {
        total += weights[i];
        if bids.get(i) * total <= budget * weights[i] {
            len = k + 1;
        } else {
            break;
        }
    }
    order[..len].to_vec()
}

/// Supremum of bids at which `i` is still selected, the other candidates'
/// bids held fixed. Placing `i` right after the first `j` others is possible
/// for bids up to `w_i·b'_{j+1}/w'_{j+1}` and wins for bids up to
/// `w_i·B/(w(first j) + w_i)`.
fn proportional_share_threshold(weights: &[Money], bids: &Bids, budget: Money, i: usize, others: &[usize]) -> Money {
    let wi = weights[i];
    let mut best = Money::ZERO;
    let mut prefix = Money::ZERO;
    for j in 0..=others.len() {
        let share = wi * budget / (prefix + wi);
        let cap = match others.get(j) {
            Some(&next) => share.min(wi * bids.get(next) / weights[next]),
            None => share,
        };
        best = best.max(cap);
        if let Some(&next) = others.get(j) {
            prefix += weights[next];
        }
    }
    best.min(budget)
}

/// `θ(n)`: `min(1/80, log₂log₂n / (80·log₂n))` floored to a multiple of
/// `2⁻³²`, and `1/80` wherever the formula is not positive.
pub fn sample_threshold_factor(n: usize) -> Money {
    let cap = Money::new(1, 80);
    if n <= 2 {
        return cap;
    }
    let lg = (n as f64).log2();
    let x = lg.log2() / (80.0 * lg);
    if x <= 0.0 {
        cap
    } else {
        Money::floor_dyadic(x, 32).min(cap)
    }
}

/// Random-sampling mechanism for subadditive valuations.
pub fn sa_random_sample(inst: &Instance, bids: &Bids, tape: &RandomTape) -> Result<Outcome> {
    check_bids(inst, bids)?;
    check_tape(inst, tape)?;
    Ok(sa_sample(inst, bids, tape))
}

fn sa_sample(inst: &Instance, bids: &Bids, tape: &RandomTape) -> Outcome {
    let budget = inst.budget();
    let oracle = TableOracle(inst.table());
    let eligible = bids.eligible(budget);
    let sample = tape.sample_bits.intersection(eligible);
    let rest = eligible.difference(sample);
    let reference = sa_alg_max_within(&oracle, &bids.0, budget, sample).value;
    let bar = sample_threshold_factor(inst.n()) * reference;
    for k in 1..=rest.len() {
        let price = budget / Money::from(k);
        let ground = AgentSet::from_agents(rest.iter().filter(|&i| bids.get(i) <= price));
        let uniform = vec![price; inst.n()];
        let x = sa_alg_max_within(&oracle, &uniform, budget, ground);
        if x.value >= bar {
            return Outcome::posted(x.winners, price);
        }
    }
    Outcome::empty()
}

pub fn sa_mechanism_main(inst: &Instance, bids: &Bids, tape: &RandomTape) -> Result<Outcome> {
    check_bids(inst, bids)?;
    check_tape(inst, tape)?;
    Ok(if tape.top_selector { sa_sample(inst, bids, tape) } else { largest_item(inst.table(), bids, inst.budget()) })
}

/// How `OPT(T)` is computed for the threshold of the XOS sampler.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum SampleOptimum {
    #[default]
    Exact,
    /// The demand-based 8-approximation; the threshold keeps its factor 8.
    Approx,
}

/// Payments of the XOS sampler.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum XosPayments {
    /// The lower of the additive mechanism's threshold and the highest bid
    /// at which the agent stays in `S*`.
    #[default]
    Composite,
    /// The additive mechanism's payments unchanged.
    AdditiveOnly,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct XosConfig {
    pub opt_t: SampleOptimum,
    pub payments: XosPayments,
}

/// Everything one run of the XOS sampler computed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct XosSampleTrace {
    pub sample: AgentSet,
    pub sample_optimum: Money,
    /// `t = v(OPT(T)) / (8B)`.
    pub threshold: Money,
    pub s_star: AgentSet,
    /// The additive function used on `S*`, zero elsewhere.
    pub clause: Vec<Money>,
    pub additive: Outcome,
    pub outcome: Outcome,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum ClauseSource {
    Clauses,
    Weights,
    Witness,
}

/// Per-instance memo of derived data, shared by clones of an [`Instance`].
#[derive(Debug, Default)]
pub(crate) struct MechanismCache {
    clause_source: OnceLock<Result<ClauseSource>>,
    tilde: OnceLock<Result<Option<Instance>>>,
    witnesses: Mutex<HashMap<AgentSet, Arc<Vec<Money>>>>,
}

fn clause_source(inst: &Instance) -> Result<ClauseSource> {
    inst.cache
        .clause_source
        .get_or_init(|| match inst.spec() {
            ValuationSpec::XosClauses { .. } => Ok(ClauseSource::Clauses),
            ValuationSpec::Additive { .. } => Ok(ClauseSource::Weights),
            spec => {
                guard_size("xos certification", inst.n(), MAX_CLASSIFY_AGENTS)?;
                if max_integrality_gap_table(inst.table())?.is_xos() {
                    Ok(ClauseSource::Witness)
                } else {
                    Err(Error::Capability(format!(
                        "the {} valuation is not xos (integrality gap above 1)",
                        spec.kind_name()
                    )))
                }
            }
        })
        .clone()
}

/// An additive function on `s` dominated by `v` below `s` and tight at `s`.
fn clause_on(inst: &Instance, source: ClauseSource, s: AgentSet) -> Result<Vec<Money>> {
    let full = match source {
        ClauseSource::Clauses => xos_clause_at(inst.spec(), s)?.1,
        ClauseSource::Weights => match inst.spec() {
            ValuationSpec::Additive { weights } => weights.clone(),
            _ => unreachable!(),
        },
        ClauseSource::Witness => {
            let mut cache = inst.cache.witnesses.lock().expect("witness cache poisoned");
            let y = cache.entry(s).or_insert_with(|| Arc::new(solve_cover_lp(inst.table(), s).dual.y));
            y.as_ref().clone()
        }
    };
    Ok((0..inst.n()).map(|i| if s.contains(i) { full[i] } else { Money::ZERO }).collect())
}

/// Random-sampling mechanism for XOS valuations.
pub fn xos_random_sample(inst: &Instance, bids: &Bids, tape: &RandomTape, cfg: XosConfig) -> Result<Outcome> {
    Ok(xos_random_sample_trace(inst, bids, tape, cfg)?.outcome)
}

pub fn xos_random_sample_trace(
    inst: &Instance,
    bids: &Bids,
    tape: &RandomTape,
    cfg: XosConfig,
) -> Result<XosSampleTrace> {
    check_bids(inst, bids)?;
    check_tape(inst, tape)?;
    let source = clause_source(inst)?;
    let budget = inst.budget();
    let table = inst.table();
    let oracle = TableOracle(table);
    let eligible = bids.eligible(budget);
    let sample = tape.sample_bits.intersection(eligible);
    let rest = eligible.difference(sample);
    let sample_optimum = match cfg.opt_t {
        SampleOptimum::Exact => budgeted_opt_within(table, &bids.0, budget, sample).value,
        SampleOptimum::Approx => sa_alg_max_within(&oracle, &bids.0, budget, sample).value,
    };
    let threshold = sample_optimum / (Money::from_int(8) * budget);
    let prices: Vec<Money> = bids.0.iter().map(|&b| threshold * b).collect();
    let s_star = canonical_demand(&oracle, &prices, rest);
    let clause = clause_on(inst, source, s_star)?;
    let additive = additive(&clause, bids, budget, tape);
    let outcome = match cfg.payments {
        XosPayments::AdditiveOnly => additive.clone(),
        XosPayments::Composite => {
            let mut out = additive.clone();
            if threshold.is_positive() {
                for (&i, p) in out.payments.iter_mut() {
                    *p = (*p).min(stay_threshold(table, &prices, rest, i) / threshold);
                }
            }
            out
        }
    };
    Ok(XosSampleTrace { sample, sample_optimum, threshold, s_star, clause, additive, outcome })
}

/// `t` times the highest bid at which `i` stays in `S*`: the best surplus of
/// sets containing `i` (ignoring its own price) minus the best without `i`.
fn stay_threshold(table: &ValueTable, prices: &[Money], ground: AgentSet, i: usize) -> Money {
    let others = ground.without(i);
    let without = best_response(table, prices, others).1;
    let with = others
        .subsets()
        .map(|s| table.get(s.with(i)) - s.iter().map(|j| prices[j]).sum::<Money>())
        .max()
        .expect("at least the empty subset");
    with - without
}

pub fn xos_mechanism_main(inst: &Instance, bids: &Bids, tape: &RandomTape) -> Result<Outcome> {
    check_bids(inst, bids)?;
    if tape.top_selector {
        xos_random_sample(inst, bids, tape, XosConfig::default())
    } else {
        clause_source(inst)?;
        Ok(largest_item(inst.table(), bids, inst.budget()))
    }
}

/// The instance whose valuation is `ṽ`, or `None` when `ṽ = v`.
pub fn tilde_instance(inst: &Instance) -> Result<Option<Instance>> {
    inst.cache
        .tilde
        .get_or_init(|| {
            guard_size("tilde valuation", inst.n(), MAX_CLASSIFY_AGENTS)?;
            let tilde = tilde_table(inst.table())?;
            if let Some(s) = inst.ground().subsets().find(|&s| tilde.get(s) > inst.value(s)) {
                return Err(Error::Precondition(format!("cover value exceeds v at {s}")));
            }
            if &tilde == inst.table() {
                return Ok(None);
            }
            let out = inst.with_spec(ValuationSpec::Table(tilde))?;
            out.cache.clause_source.set(Ok(ClauseSource::Witness)).expect("fresh cache");
            Ok(Some(out))
        })
        .clone()
}

/// Runs the XOS main mechanism against `ṽ`; winners are then valued in `v`.
pub fn sa_mechanism_main_2(inst: &Instance, bids: &Bids, tape: &RandomTape) -> Result<Outcome> {
    check_bids(inst, bids)?;
    match tilde_instance(inst)? {
        None => xos_mechanism_main(inst, bids, tape),
        Some(tilde) => xos_mechanism_main(&tilde, bids, tape),
    }
}

/// Identifies a mechanism for dispatch, reports and the command line.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum MechanismId {
    LargestItem,
    Additive,
    SaRandomSample,
    SaMain,
    XosRandomSample,
    XosMain,
    SaMain2,
}

/// Which tape coins a mechanism reads.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Coins {
    pub sample: bool,
    pub top: bool,
    pub additive: bool,
}

impl MechanismId {
    pub const ALL: [MechanismId; 7] = [
        MechanismId::LargestItem,
        MechanismId::Additive,
        MechanismId::SaRandomSample,
        MechanismId::SaMain,
        MechanismId::XosRandomSample,
        MechanismId::XosMain,
        MechanismId::SaMain2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanismId::LargestItem => "largest-item",
            MechanismId::Additive => "additive",
            MechanismId::SaRandomSample => "sa-random-sample",
            MechanismId::SaMain => "sa-main",
            MechanismId::XosRandomSample => "xos-random-sample",
            MechanismId::XosMain => "xos-main",
            MechanismId::SaMain2 => "sa-main-2",
        }
    }

    pub fn coins(self) -> Coins {
        let (sample, top, additive) = match self {
            MechanismId::LargestItem => (false, false, false),
            MechanismId::Additive => (false, false, true),
            MechanismId::SaRandomSample => (true, false, false),
            MechanismId::SaMain => (true, true, false),
            MechanismId::XosRandomSample => (true, false, true),
            MechanismId::XosMain | MechanismId::SaMain2 => (true, true, true),
        };
        Coins { sample, top, additive }
    }

    /// One representative per class of tapes the mechanism cannot tell
    /// apart. The classes have equal size, so a uniform average over these
    /// equals the average over the full tape space.
    pub fn tapes(self, n: usize) -> Vec<RandomTape> {
        let coins = self.coins();
        let samples: Vec<AgentSet> =
            if coins.sample { AgentSet::full(n).subsets().collect() } else { vec![AgentSet::EMPTY] };
        let tops: &[bool] = if coins.top { &[false, true] } else { &[true] };
        let adds: Vec<u8> = if coins.additive { (0..ADDITIVE_SELECTOR_VALUES).collect() } else { vec![0] };
        let mut out = Vec::with_capacity(samples.len() * tops.len() * adds.len());
        for &sample_bits in &samples {
            for &top_selector in tops {
                for &additive_selector in &adds {
                    out.push(RandomTape { sample_bits, top_selector, additive_selector });
                }
            }
        }
        out
    }

    pub fn run(self, inst: &Instance, bids: &Bids, tape: &RandomTape) -> Result<Outcome> {
        guard_size("mechanism", inst.n(), MAX_AGENTS)?;
        match self {
            MechanismId::LargestItem => largest_item_mechanism(inst, bids),
            MechanismId::Additive => match inst.spec() {
                ValuationSpec::Additive { weights } => {
                    check_bids(inst, bids)?;
                    additive_mechanism(weights, bids, inst.budget(), tape)
                }
                spec => Err(Error::Capability(format!(
                    "the additive mechanism needs an additive valuation, not {}",
                    spec.kind_name()
                ))),
            },
            MechanismId::SaRandomSample => sa_random_sample(inst, bids, tape),
            MechanismId::SaMain => sa_mechanism_main(inst, bids, tape),
            MechanismId::XosRandomSample => xos_random_sample(inst, bids, tape, XosConfig::default()),
            MechanismId::XosMain => xos_mechanism_main(inst, bids, tape),
            MechanismId::SaMain2 => sa_mechanism_main_2(inst, bids, tape),
        }
    }

    /// Whether the mechanism accepts this valuation at all.
    pub fn supports(self, inst: &Instance) -> bool {
        match self {
            MechanismId::Additive => matches!(inst.spec(), ValuationSpec::Additive { .. }),
            MechanismId::XosRandomSample | MechanismId::XosMain => clause_source(inst).is_ok(),
            MechanismId::SaMain2 => inst.n() <= MAX_CLASSIFY_AGENTS,
            _ => true,
        }
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismId {
    type Err = Error;

    fn from_str(s: &str) -> Result<MechanismId> {
        MechanismId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = MechanismId::ALL.iter().map(|m| m.name()).collect();
                Error::Input(format!("unknown mechanism {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

impl Serialize for MechanismId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}
