//! JSON instance files and CSV/JSON experiment reports.
//!
//! Rationals are written as `"p/q"` strings. Subset tables are keyed by
//! bitmask, agent 0 being the least significant bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::ExperimentReport;
use crate::money::Money;
use crate::optimize::Instance;
use crate::valuations::{ValuationSpec, ValueTable, WeightedEdge};

pub const INSTANCE_VERSION: &str = "bfm-instance/1";

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: String,
    pub n: usize,
    pub budget: Money,
    pub costs: Vec<Money>,
    pub valuation: ValuationBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// Where a generated instance came from.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValuationBlock {
    Additive { weights: Vec<Money> },
    Xos { clauses: Vec<Vec<Money>> },
    Table {
        #[serde(with = "mask_keys")]
        values: BTreeMap<u32, Money>,
    },
    Matching { edges: Vec<WeightedEdge> },
    Clique { values: Vec<Money>, edges: Vec<(usize, usize)> },
    Cut { vertices: usize, edges: Vec<WeightedEdge> },
    CostSaving {
        #[serde(with = "mask_keys")]
        costs: BTreeMap<u32, Money>,
    },
}

/// Bitmask-keyed maps; JSON object keys are decimal strings.
mod mask_keys {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::money::Money;

    pub fn serialize<S: Serializer>(map: &BTreeMap<u32, Money>, s: S) -> Result<S::Ok, S::Error> {
        map.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, Money>, D::Error> {
        BTreeMap::<String, Money>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| {
                k.parse::<u32>()
                    .map(|m| (m, v))
                    .map_err(|_| D::Error::custom(format!("subset key {k:?} is not a bitmask")))
            })
            .collect()
    }
}

fn table_to_map(t: &ValueTable) -> BTreeMap<u32, Money> {
    t.values().iter().enumerate().map(|(m, &v)| (m as u32, v)).collect()
}

fn map_to_table(field: &str, n: usize, map: &BTreeMap<u32, Money>) -> Result<ValueTable> {
    if n > crate::agents::MAX_AGENTS {
        return Err(Error::TooLarge { what: "table", n, max: crate::agents::MAX_AGENTS });
    }
    let size = 1u32 << n;
    if let Some((&k, _)) = map.range(size..).next() {
        return Err(Error::Input(format!("valuation.{field}: key {k} is not a subset of {n} agents")));
    }
    if let Some(missing) = (0..size).find(|k| !map.contains_key(k)) {
        return Err(Error::Input(format!("valuation.{field}: missing key {missing}")));
    }
    ValueTable::new(n, map.values().copied().collect())
        .map_err(|e| Error::Input(format!("valuation.{field}: {e}")))
}

impl ValuationBlock {
    pub fn from_spec(spec: &ValuationSpec) -> ValuationBlock {
        match spec.clone() {
            ValuationSpec::Additive { weights } => ValuationBlock::Additive { weights },
            ValuationSpec::XosClauses { clauses } => ValuationBlock::Xos { clauses },
            ValuationSpec::Table(t) => ValuationBlock::Table { values: table_to_map(&t) },
            ValuationSpec::Matching { edges } => ValuationBlock::Matching { edges },
            ValuationSpec::Clique { values, edges } => ValuationBlock::Clique { values, edges },
            ValuationSpec::Cut { vertices, edges } => ValuationBlock::Cut { vertices, edges },
            ValuationSpec::CostSaving { costs } => ValuationBlock::CostSaving { costs: table_to_map(&costs) },
        }
    }

    pub fn to_spec(&self, n: usize) -> Result<ValuationSpec> {
        Ok(match self.clone() {
            ValuationBlock::Additive { weights } => ValuationSpec::Additive { weights },
            ValuationBlock::Xos { clauses } => ValuationSpec::XosClauses { clauses },
            ValuationBlock::Table { values } => ValuationSpec::Table(map_to_table("values", n, &values)?),
            ValuationBlock::Matching { edges } => ValuationSpec::Matching { edges },
            ValuationBlock::Clique { values, edges } => ValuationSpec::Clique { values, edges },
            ValuationBlock::Cut { vertices, edges } => ValuationSpec::Cut { vertices, edges },
            ValuationBlock::CostSaving { costs } => ValuationSpec::CostSaving { costs: map_to_table("costs", n, &costs)? },
        })
    }
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance, provenance: Option<Provenance>) -> InstanceFile {
        InstanceFile {
            version: INSTANCE_VERSION.to_string(),
            n: inst.n(),
            budget: inst.budget(),
            costs: inst.true_costs().to_vec(),
            valuation: ValuationBlock::from_spec(inst.spec()),
            provenance,
        }
    }

    /// Parses JSON; syntax and schema errors carry line and column.
    pub fn parse(text: &str) -> Result<InstanceFile> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
        if file.version != INSTANCE_VERSION {
            return Err(Error::Input(format!(
                "version: expected {INSTANCE_VERSION:?}, found {:?}",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance files always serialize");
        s.push('\n');
        s
    }

    pub fn to_instance(&self) -> Result<Instance> {
        if self.costs.len() != self.n {
            return Err(Error::Input(format!("costs: {} entries for n = {}", self.costs.len(), self.n)));
        }
        let spec = self.valuation.to_spec(self.n)?;
        if spec.n() != self.n {
            return Err(Error::Input(format!(
                "valuation: describes {} agents but n = {}",
                spec.n(),
                self.n
            )));
        }
        Instance::new(self.costs.clone(), self.budget, spec)
    }
}

pub const REPORT_COLUMNS: [&str; 11] = [
    "instance_id",
    "mechanism",
    "n",
    "opt",
    "opt_decimal",
    "expected_value",
    "expected_value_decimal",
    "ratio",
    "ratio_decimal",
    "invariant_violations",
    "seed",
];

const DECIMALS: usize = 6;

fn ratio_cells(r: Option<Money>) -> (String, String) {
    match r {
        Some(r) => (r.to_string(), r.to_decimal_string(DECIMALS)),
        None => ("inf".into(), "inf".into()),
    }
}

/// One row per report; rows keep the order given.
pub fn reports_to_csv(reports: &[ExperimentReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_COLUMNS).expect("in-memory write");
    for r in reports {
        let (ratio, ratio_dec) = ratio_cells(r.ratio);
        w.write_record([
            r.instance_id.clone(),
            r.mechanism.to_string(),
            r.n.to_string(),
            r.opt.to_string(),
            r.opt.to_decimal_string(DECIMALS),
            r.expected_value.to_string(),
            r.expected_value.to_decimal_string(DECIMALS),
            ratio,
            ratio_dec,
            r.invariant_violations.len().to_string(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn reports_to_json(reports: &[ExperimentReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports always serialize");
    s.push('\n');
    s
}
