//! Named instance suites and suite verification.
//!
//! Fixture instances are embedded; generated members record their seed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::{generate, GenParams, GeneratorKind};
use crate::harness::{approximation_report_for, truthfulness_probe, ExperimentReport, ProbeGrid, ProbeReport};
use crate::io::InstanceFile;
use crate::lpcore::max_integrality_gap_table;
use crate::mechanisms::MechanismId;
use crate::money::Money;
use crate::optimize::Instance;
use crate::valuations::{monotone_closure_table, ValuationSpec, ValueTable, MAX_CLASSIFY_AGENTS};

pub const FIXTURES: [(&str, &str); 8] = [
    ("sym3", include_str!("../fixtures/sym3.json")),
    ("unit4", include_str!("../fixtures/unit4.json")),
    ("additive6", include_str!("../fixtures/additive6.json")),
    ("xos3", include_str!("../fixtures/xos3.json")),
    ("path_matching", include_str!("../fixtures/path_matching.json")),
    ("clique4", include_str!("../fixtures/clique4.json")),
    ("triangle_cut_closure", include_str!("../fixtures/triangle_cut_closure.json")),
    ("cost_saving3", include_str!("../fixtures/cost_saving3.json")),
];

pub const SUITE_NAMES: [&str; 6] = ["core", "truthfulness", "xos", "additive", "gap", "closure"];

#[derive(Clone, Debug)]
pub struct SuiteInstance {
    pub id: String,
    pub seed: Option<u64>,
    pub instance: Instance,
}

pub fn fixture(name: &str) -> Result<Instance> {
    let (_, text) = FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Input(format!("no fixture named {name:?}")))?;
    InstanceFile::parse(text)?.to_instance()
}

fn fixtures() -> Vec<SuiteInstance> {
    FIXTURES
        .iter()
        .map(|(name, _)| SuiteInstance {
            id: (*name).to_string(),
            seed: None,
            instance: fixture(name).expect("shipped fixtures are valid"),
        })
        .collect()
}

fn generated(kind: GeneratorKind, params: GenParams, seed: u64) -> SuiteInstance {
    let inst = generate(kind, &params, seed).and_then(|f| f.to_instance()).expect("generator output is valid");
    SuiteInstance { id: format!("{kind}-n{}-s{seed}", params.n), seed: Some(seed), instance: inst }
}

fn closed_cut(n: usize, seed: u64) -> SuiteInstance {
    let g = generated(GeneratorKind::Cut, GenParams::with_n(n), seed);
    let table = monotone_closure_table(g.instance.table()).expect("closure of a valid table");
    SuiteInstance {
        id: format!("cut-closure-n{n}-s{seed}"),
        seed: Some(seed),
        instance: g.instance.with_spec(ValuationSpec::Table(table)).expect("same agents"),
    }
}

/// `v(S) = 1` for nonempty proper `S` and `v(A) = 2`, under uniform and
/// staggered costs.
fn flat_with_bonus(n: usize) -> Vec<SuiteInstance> {
    let table = ValueTable::from_fn(n, |s| match s.len() {
        0 => Money::ZERO,
        k if k == n => Money::from_int(2),
        _ => Money::ONE,
    })
    .expect("small table");
    let profiles = [
        ("uniform", vec![Money::new(1, n as i128); n]),
        ("staggered", (0..n).map(|i| Money::new(i as i128 + 1, 2 * n as i128)).collect()),
    ];
    profiles
        .into_iter()
        .map(|(name, costs)| SuiteInstance {
            id: format!("flat-bonus-n{n}-{name}"),
            seed: None,
            instance: Instance::new(costs, Money::ONE, ValuationSpec::Table(table.clone())).expect("valid costs"),
        })
        .collect()
}

/// Every additive instance with `n ≤ max_n`, weights in `0..=3` and costs
/// in `{0, 1/3, 2/3, 1}` at `B = 1`.
pub fn additive_grid(max_n: usize) -> Vec<SuiteInstance> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let combos = 4usize.pow(n as u32);
        for wc in 0..combos {
            for cc in 0..combos {
                let digits = |mut x: usize| {
                    (0..n)
                        .map(|_| {
                            let d = x % 4;
                            x /= 4;
                            d as i128
                        })
                        .collect::<Vec<_>>()
                };
                let weights = digits(wc).into_iter().map(Money::from_int).collect();
                let costs = digits(cc).into_iter().map(|d| Money::new(d, 3)).collect();
                let inst = Instance::new(costs, Money::ONE, ValuationSpec::Additive { weights }).expect("grid instance");
                out.push(SuiteInstance { id: format!("additive-grid-n{n}-w{wc}-c{cc}"), seed: None, instance: inst });
            }
        }
    }
    out
}

/// Instances of a named suite.
pub fn suite(name: &str) -> Result<Vec<SuiteInstance>> {
    let mut out = Vec::new();
    match name {
        "core" => {
            out.extend(fixtures());
            out.push(generated(GeneratorKind::Subadditive, GenParams::with_n(4), 1));
            out.push(generated(GeneratorKind::Xos, GenParams::with_n(4), 2));
            out.push(closed_cut(4, 3));
        }
        "truthfulness" => {
            out.extend(fixtures());
            let kinds = [
                GeneratorKind::Additive,
                GeneratorKind::Xos,
                GeneratorKind::Subadditive,
                GeneratorKind::Matching,
                GeneratorKind::Clique,
                GeneratorKind::SupermodularCost,
            ];
            for n in 1..=6 {
                for (k, &kind) in kinds.iter().enumerate() {
                    out.push(generated(kind, GenParams::with_n(n), 100 * n as u64 + k as u64));
                }
                out.push(closed_cut(n, 100 * n as u64 + 50));
            }
        }
        "xos" => {
            for n in 1..=8 {
                for s in 0..3 {
                    out.push(generated(GeneratorKind::Xos, GenParams::with_n(n), 200 * n as u64 + s));
                }
                out.push(generated(GeneratorKind::Additive, GenParams::with_n(n), 200 * n as u64 + 10));
                out.push(generated(GeneratorKind::Matching, GenParams::with_n(n), 200 * n as u64 + 20));
            }
        }
        "additive" => {
            out.extend(additive_grid(3));
            for n in 4..=6 {
                for s in 0..200 {
                    out.push(generated(GeneratorKind::Additive, GenParams::with_n(n), 300 * n as u64 + s));
                }
            }
            out.push(SuiteInstance { id: "additive6".into(), seed: None, instance: fixture("additive6")? });
        }
        "gap" => {
            out.push(SuiteInstance { id: "sym3".into(), seed: None, instance: fixture("sym3")? });
            for n in 2..=6 {
                for s in 0..4 {
                    out.push(generated(GeneratorKind::Subadditive, GenParams::with_n(n), 400 * n as u64 + s));
                }
                out.push(generated(GeneratorKind::Clique, GenParams::with_n(n), 400 * n as u64 + 10));
                if n >= 3 {
                    out.extend(flat_with_bonus(n));
                }
            }
        }
        "closure" => {
            out.push(SuiteInstance { id: "triangle_cut_closure".into(), seed: None, instance: fixture("triangle_cut_closure")? });
            for n in 2..=6 {
                for s in 0..3 {
                    out.push(closed_cut(n, 500 * n as u64 + s));
                }
            }
        }
        _ => {
            return Err(Error::Input(format!("unknown suite {name:?}; expected one of {}", SUITE_NAMES.join(", "))));
        }
    }
    Ok(out)
}

/// Upper bound on the expected ratio asserted by verification, if any.
pub fn ratio_bound(mech: MechanismId, inst: &Instance) -> Result<Option<Money>> {
    Ok(match mech {
        MechanismId::Additive => Some(Money::from_int(3)),
        MechanismId::XosMain => Some(Money::from_int(768)),
        MechanismId::SaMain2 if inst.n() <= MAX_CLASSIFY_AGENTS => {
            max_integrality_gap_table(inst.table())?.max_gap.map(|i| Money::from_int(768) * i)
        }
        _ => None,
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteVerification {
    pub suite: String,
    pub reports: Vec<ExperimentReport>,
    pub probes: ProbeReport,
    /// Ratio bounds that failed, as readable strings.
    pub bound_failures: Vec<String>,
}

impl SuiteVerification {
    pub fn is_clean(&self) -> bool {
        self.probes.is_clean() && self.bound_failures.is_empty() && self.reports.iter().all(|r| r.invariant_violations.is_empty())
    }
}

/// Runs every applicable mechanism on every suite instance: exact
/// approximation reports, ratio bounds and truthfulness probes.
pub fn verify_suite(name: &str, grid: &ProbeGrid, mechanisms: &[MechanismId]) -> Result<SuiteVerification> {
    let mut out = SuiteVerification { suite: name.to_string(), ..SuiteVerification::default() };
    for member in suite(name)? {
        let inst = &member.instance;
        for &mech in mechanisms {
            if !mech.supports(inst) {
                continue;
            }
            let report = approximation_report_for(&member.id, member.seed, mech, inst)?;
            if let Some(bound) = ratio_bound(mech, inst)? {
                match report.ratio {
                    Some(r) if r <= bound => {}
                    r => out.bound_failures.push(format!(
                        "{} on {}: ratio {} above {bound}",
                        mech,
                        member.id,
                        crate::lpcore::render_gap(r)
                    )),
                }
            }
            out.reports.push(report);
            out.probes.merge(truthfulness_probe(mech, inst, grid)?);
        }
    }
    Ok(out)
}
