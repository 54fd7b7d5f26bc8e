use budget_feasible::harness::{expected_value_all_tapes, expected_value_exact};
use budget_feasible::io::InstanceFile;
use budget_feasible::lpcore::{max_integrality_gap_table, solve_cover_lp, tilde_table};
use budget_feasible::mechanisms::{xos_random_sample_trace, XosConfig};
use budget_feasible::optimize::{budgeted_opt_exact, sa_alg_max, sa_alg_max_fine, sa_alg_max_trace, Grid};
use budget_feasible::oracles::{canonical_demand, TableOracle};
use budget_feasible::valuations::{
    is_monotone, is_subadditive, is_submodular, monotone_closure_table, subadditive_closure_table,
};
use budget_feasible::{AgentSet, Bids, Instance, MechanismId, Money, RandomTape, ValuationSpec, ValueTable};
use proptest::prelude::*;

fn table(n: usize, hi: i64) -> impl Strategy<Value = ValueTable> {
    prop::collection::vec(0..=hi, 1 << n).prop_map(move |mut v| {
        v[0] = 0;
        ValueTable::new(n, v.into_iter().map(|x| Money::from_int(x as i128)).collect()).unwrap()
    })
}

fn subadditive(n: usize) -> impl Strategy<Value = ValueTable> {
    table(n, 6).prop_map(|t| monotone_closure_table(&subadditive_closure_table(&t).unwrap()).unwrap())
}

fn costs(n: usize) -> impl Strategy<Value = Vec<Money>> {
    prop::collection::vec(0..=8i128, n).prop_map(|v| v.into_iter().map(|x| Money::new(x, 8)).collect())
}

fn sized<T: Strategy>(max_n: usize, f: impl Fn(usize) -> T) -> impl Strategy<Value = (usize, T::Value)>
where
    T::Value: std::fmt::Debug,
{
    (1..=max_n).prop_flat_map(move |n| (Just(n), f(n)))
}

fn instance(max_n: usize) -> impl Strategy<Value = Instance> {
    sized(max_n, |n| (subadditive(n), costs(n)))
        .prop_map(|(_, (t, c))| Instance::new(c, Money::ONE, ValuationSpec::Table(t)).unwrap())
}

fn xos_instance(max_n: usize) -> impl Strategy<Value = Instance> {
    sized(max_n, |n| (prop::collection::vec(prop::collection::vec(0..=5i128, n), 1..=3), costs(n))).prop_map(
        |(_, (clauses, c))| {
            let clauses = clauses.into_iter().map(|cl| cl.into_iter().map(Money::from_int).collect()).collect();
            Instance::new(c, Money::ONE, ValuationSpec::XosClauses { clauses }).unwrap()
        },
    )
}

fn tape(n: usize) -> impl Strategy<Value = RandomTape> {
    (any::<u32>(), any::<bool>(), 0..3u8).prop_map(move |(bits, top, add)| RandomTape {
        sample_bits: AgentSet(bits & AgentSet::full(n).bits()),
        top_selector: top,
        additive_selector: add,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closures_have_their_class(t in sized(5, |n| table(n, 6))) {
        let (_, t) = t;
        let m = monotone_closure_table(&t).unwrap();
        prop_assert!(is_monotone(&m));
        let s = subadditive_closure_table(&t).unwrap();
        for a in t.ground().subsets() {
            for b in t.ground().difference(a).subsets() {
                prop_assert!(s.get(a.union(b)) <= s.get(a) + s.get(b));
            }
        }
        prop_assert!(is_subadditive(&monotone_closure_table(&s).unwrap()));
        for u in t.ground().subsets() {
            prop_assert!(m.get(u) >= t.get(u));
            prop_assert!(s.get(u) <= t.get(u));
        }
    }

    #[test]
    fn budgeted_maximizer_within_eight(inst in instance(6)) {
        let opt = budgeted_opt_exact(&inst, inst.true_costs()).unwrap();
        let got = sa_alg_max(&inst, inst.true_costs()).unwrap();
        prop_assert!(got.value * Money::from_int(8) >= opt.value);
        prop_assert!(inst.true_costs().iter().enumerate().filter(|(i, _)| got.winners.contains(*i)).map(|(_, c)| *c).sum::<Money>() <= inst.budget());
        let fine = sa_alg_max_fine(&inst, inst.true_costs(), Money::new(1, 2)).unwrap();
        prop_assert!(fine.value * Money::from_int(8) >= opt.value);
    }

    #[test]
    fn grid_points_below_optimum_reach_a_quarter(inst in instance(6)) {
        let opt = budgeted_opt_exact(&inst, inst.true_costs()).unwrap().value;
        for grid in [Grid::Coarse, Grid::Fine(Money::new(1, 2))] {
            let steps = sa_alg_max_trace(&TableOracle(inst.table()), inst.true_costs(), inst.budget(), inst.ground(), grid);
            for s in steps.iter().filter(|s| s.target <= opt) {
                prop_assert!(s.value * Money::from_int(4) >= s.target);
            }
        }
    }

    #[test]
    fn canonical_demand_stable_when_member_price_drops(
        (n, (t, p)) in sized(5, |n| (table(n, 5), prop::collection::vec(0..=10i128, n))),
        pick in any::<usize>(),
        cut in 1..=4i128,
    ) {
        let prices: Vec<Money> = p.into_iter().map(|x| Money::new(x, 2)).collect();
        let oracle = TableOracle(&t);
        let ground = AgentSet::full(n);
        let s = canonical_demand(&oracle, &prices, ground);
        if let Some(i) = s.iter().nth(pick % s.len().max(1)) {
            let mut lower = prices.clone();
            lower[i] = prices[i] * Money::new(cut - 1, 4);
            prop_assert_eq!(canonical_demand(&oracle, &lower, ground), s);
        }
    }

    #[test]
    fn cover_lp_strong_duality(t in sized(5, |n| table(n, 6))) {
        let (_, t) = t;
        for s in t.ground().subsets() {
            let sol = solve_cover_lp(&t, s);
            prop_assert_eq!(sol.cover.objective(&t), sol.dual.on(s));
            prop_assert!(sol.value <= t.get(s));
        }
    }

    #[test]
    fn tilde_is_monotone_and_fractionally_subadditive(
        t in sized(4, subadditive),
        gammas in prop::collection::vec((any::<u32>(), 1..=4i128), 1..6),
    ) {
        let (n, t) = t;
        let tilde = tilde_table(&t).unwrap();
        prop_assert!(is_monotone(&tilde));
        prop_assert!(max_integrality_gap_table(&tilde).unwrap().is_xos());
        // any fractional cover of the full set by the sampled sets, scaled up to feasibility
        let full = AgentSet::full(n);
        let sets: Vec<(AgentSet, Money)> = gammas.iter()
            .map(|&(m, g)| (AgentSet(m & full.bits()), Money::new(g, 4)))
            .filter(|(s, _)| !s.is_empty())
            .collect();
        let mut cover = sets.clone();
        for i in full.iter() {
            let c: Money = cover.iter().filter(|(s, _)| s.contains(i)).map(|(_, g)| *g).sum();
            if c < Money::ONE {
                cover.push((AgentSet::singleton(i), Money::ONE - c));
            }
        }
        let total: Money = cover.iter().map(|(s, g)| *g * tilde.get(*s)).sum();
        prop_assert!(total >= tilde.get(full));
    }

    #[test]
    fn submodular_tables_certify_xos(t in sized(4, |n| table(n, 6))) {
        let (_, t) = t;
        let m = monotone_closure_table(&t).unwrap();
        if is_submodular(&m) {
            prop_assert!(max_integrality_gap_table(&m).unwrap().is_xos());
        }
    }

    #[test]
    fn winners_keep_winning_when_lowering(inst in instance(5), t in tape(5), frac in 0..4i128) {
        let n = inst.n();
        let t = RandomTape { sample_bits: AgentSet(t.sample_bits.bits() & AgentSet::full(n).bits()), ..t };
        let bids = Bids::truthful(&inst);
        for mech in MechanismId::ALL {
            if !mech.supports(&inst) {
                continue;
            }
            let out = mech.run(&inst, &bids, &t).unwrap();
            for i in out.winners.iter() {
                let lower = bids.with(i, bids.get(i) * Money::new(frac, 4));
                prop_assert!(mech.run(&inst, &lower, &t).unwrap().winners.contains(i), "{} agent {}", mech, i);
            }
        }
    }

    #[test]
    fn s_star_unchanged_when_member_lowers(inst in xos_instance(5), t in tape(5), frac in 0..4i128) {
        let n = inst.n();
        let t = RandomTape { sample_bits: AgentSet(t.sample_bits.bits() & AgentSet::full(n).bits()), ..t };
        let bids = Bids::truthful(&inst);
        let tr = xos_random_sample_trace(&inst, &bids, &t, XosConfig::default()).unwrap();
        for i in tr.s_star.iter() {
            let lower = bids.with(i, bids.get(i) * Money::new(frac, 4));
            let again = xos_random_sample_trace(&inst, &lower, &t, XosConfig::default()).unwrap();
            prop_assert_eq!(again.s_star, tr.s_star);
        }
    }

    #[test]
    fn payments_respect_invariants(inst in instance(5), t in tape(5), scale in prop::collection::vec(0..=16i128, 5)) {
        let n = inst.n();
        let t = RandomTape { sample_bits: AgentSet(t.sample_bits.bits() & AgentSet::full(n).bits()), ..t };
        let bids = Bids((0..n).map(|i| inst.true_costs()[i] * Money::new(scale[i], 8) + Money::new(scale[i] % 3, 16)).collect());
        for mech in MechanismId::ALL {
            if !mech.supports(&inst) {
                continue;
            }
            let out = mech.run(&inst, &bids, &t).unwrap();
            prop_assert!(out.invariant_violations(&bids, inst.budget()).is_empty(), "{}", mech);
        }
    }

    #[test]
    fn mixture_expectation_is_branch_average(inst in xos_instance(4)) {
        let bids = Bids::truthful(&inst);
        let half = Money::new(1, 2);
        let largest = expected_value_exact(MechanismId::LargestItem, &inst, &bids).unwrap();
        let sa = expected_value_exact(MechanismId::SaRandomSample, &inst, &bids).unwrap();
        let xos = expected_value_exact(MechanismId::XosRandomSample, &inst, &bids).unwrap();
        prop_assert_eq!(expected_value_exact(MechanismId::SaMain, &inst, &bids).unwrap(), half * (largest + sa));
        prop_assert_eq!(expected_value_exact(MechanismId::XosMain, &inst, &bids).unwrap(), half * (largest + xos));
        prop_assert_eq!(expected_value_all_tapes(MechanismId::XosMain, &inst, &bids).unwrap(), half * (largest + xos));
    }

    #[test]
    fn instance_files_round_trip(inst in instance(5)) {
        let f = InstanceFile::from_instance(&inst, None);
        let again = InstanceFile::parse(&f.to_json()).unwrap();
        prop_assert_eq!(&again, &f);
        let back = again.to_instance().unwrap();
        prop_assert_eq!(back.table(), inst.table());
    }

    #[test]
    fn money_field_laws(a in -50..50i128, b in 1..20i128, c in -50..50i128, d in 1..20i128) {
        let x = Money::new(a, b);
        let y = Money::new(c, d);
        prop_assert_eq!(x + y - y, x);
        prop_assert_eq!((x * y).to_string().parse::<Money>().unwrap(), x * y);
        if !y.is_zero() {
            prop_assert_eq!(x / y * y, x);
        }
    }
}
