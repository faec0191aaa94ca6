//! Serializable result documents.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::entropy::{from_millibits, EntropyOracle};
use crate::error::Result;
use crate::lattice::VariableSet;
use crate::synergy::{SuppressionType, SynergyFinding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Mbits,
    Nats,
}

impl Units {
    /// Converts from millibits and rounds for presentation: two decimals for
    /// millibits, six for nats.
    pub fn present(self, mbits: f64) -> f64 {
        match self {
            Units::Mbits => round_to(mbits, 2),
            Units::Nats => round_to(from_millibits(mbits), 6),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Units::Mbits => "mbits",
            Units::Nats => "nats",
        }
    }

    fn decimals(self) -> usize {
        match self {
            Units::Mbits => 2,
            Units::Nats => 6,
        }
    }
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    let r = (x * s).round() / s;
    // avoid "-0.00"
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// `sha256:<hex>` of the input files, in argument order.
    pub input_fingerprint: String,
    pub units: Units,
    pub zero_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ReportMetadata {
    pub fn new(command: &str, input_fingerprint: String, units: Units, zero_tol: f64) -> Self {
        ReportMetadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            input_fingerprint,
            units,
            zero_tol,
            threshold: None,
            max_order: None,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRecord {
    pub subset: Vec<String>,
    pub order: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub subset: Vec<String>,
    pub order: usize,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynergyRecord {
    pub triple: Vec<String>,
    pub delta: f64,
    pub conditioning: Vec<String>,
    pub collider: String,
    pub weakest_pair_info: f64,
    pub suppression_type: SuppressionType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub metadata: ReportMetadata,
    pub delta_records: Vec<DeltaRecord>,
    pub synergy_records: Vec<SynergyRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy_records: Option<Vec<EntropyRecord>>,
}

fn set_names(names: &[String], s: VariableSet) -> Vec<String> {
    s.iter().map(|i| names[i].clone()).collect()
}

impl ReportDocument {
    pub fn new(metadata: ReportMetadata) -> Self {
        ReportDocument {
            metadata,
            delta_records: Vec::new(),
            synergy_records: Vec::new(),
            entropy_records: None,
        }
    }

    /// Adds δ records (except `∅`) sorted by order, then δ.
    pub fn with_deltas(
        mut self,
        names: &[String],
        entries: impl IntoIterator<Item = (VariableSet, f64)>,
    ) -> Self {
        let mut rows: Vec<(VariableSet, f64)> =
            entries.into_iter().filter(|(s, _)| !s.is_empty()).collect();
        rows.sort_by(|a, b| {
            a.0.len()
                .cmp(&b.0.len())
                .then(a.1.total_cmp(&b.1))
                .then(a.0.cmp(&b.0))
        });
        let units = self.metadata.units;
        self.delta_records = rows
            .into_iter()
            .map(|(s, d)| DeltaRecord {
                subset: set_names(names, s),
                order: s.len(),
                delta: units.present(d),
            })
            .collect();
        self
    }

    pub fn with_findings(mut self, names: &[String], findings: &[SynergyFinding]) -> Self {
        let units = self.metadata.units;
        self.synergy_records = findings
            .iter()
            .map(|f| SynergyRecord {
                triple: set_names(names, f.triple),
                delta: units.present(f.delta),
                conditioning: set_names(names, f.conditioning),
                collider: names[f.collider].clone(),
                weakest_pair_info: units.present(f.weakest_pair_info),
                suppression_type: f.suppression_type,
            })
            .collect();
        self
    }

    /// Entropies of every nonempty subset of `universe`, by order then set.
    pub fn with_entropies(mut self, oracle: &EntropyOracle, universe: VariableSet) -> Result<Self> {
        let mut sets: Vec<VariableSet> = universe.subsets().filter(|s| !s.is_empty()).collect();
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        let units = self.metadata.units;
        let records = sets
            .into_iter()
            .map(|s| {
                Ok(EntropyRecord {
                    subset: set_names(oracle.names(), s),
                    order: s.len(),
                    entropy: units.present(crate::entropy::to_millibits(oracle.entropy(s)?)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.entropy_records = Some(records);
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Aligned plain-text tables.
    pub fn to_text(&self) -> String {
        let m = &self.metadata;
        let dec = m.units.decimals();
        let mut out = String::new();
        let _ = writeln!(out, "# {} {} {}", m.tool, m.version, m.command);
        let _ = writeln!(out, "# input {}", m.input_fingerprint);
        let _ = write!(out, "# units {}  zero-tol {}", m.units.as_str(), m.zero_tol);
        if let Some(t) = m.threshold {
            let _ = write!(out, "  threshold {t}");
        }
        if let Some(k) = m.max_order {
            let _ = write!(out, "  max-order {k}");
        }
        if let Some(s) = m.seed {
            let _ = write!(out, "  seed {s}");
        }
        out.push('\n');

        let join = |v: &[String]| {
            if v.is_empty() {
                "-".to_string()
            } else {
                v.join(":")
            }
        };
        if let Some(ents) = &self.entropy_records {
            out.push_str("\nentropies\n");
            let w = ents
                .iter()
                .map(|r| join(&r.subset).len())
                .max()
                .unwrap_or(6)
                .max(6);
            let _ = writeln!(out, "{:>5}  {:<w$}  {:>14}", "order", "subset", "entropy");
            for r in ents {
                let _ = writeln!(
                    out,
                    "{:>5}  {:<w$}  {:>14.dec$}",
                    r.order,
                    join(&r.subset),
                    r.entropy
                );
            }
        }
        if !self.delta_records.is_empty() {
            out.push_str("\nforward differences\n");
            let w = self
                .delta_records
                .iter()
                .map(|r| join(&r.subset).len())
                .max()
                .unwrap_or(6)
                .max(6);
            let _ = writeln!(out, "{:>5}  {:<w$}  {:>14}", "order", "subset", "delta");
            for r in &self.delta_records {
                let _ = writeln!(
                    out,
                    "{:>5}  {:<w$}  {:>14.dec$}",
                    r.order,
                    join(&r.subset),
                    r.delta
                );
            }
        }
        if !self.synergy_records.is_empty() {
            out.push_str("\nsynergies\n");
            let w = self
                .synergy_records
                .iter()
                .map(|r| join(&r.triple).len())
                .max()
                .unwrap_or(6)
                .max(6);
            let c = self
                .synergy_records
                .iter()
                .map(|r| r.collider.len())
                .max()
                .unwrap_or(8)
                .max(8);
            let _ = writeln!(
                out,
                "{:<w$}  {:<c$}  {:>14}  {:>14}  {:<10}  given",
                "triple", "collider", "delta", "weakest", "type"
            );
            for r in &self.synergy_records {
                let ty = serde_json::to_value(r.suppression_type)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{:<w$}  {:<c$}  {:>14.dec$}  {:>14.dec$}  {:<10}  {}",
                    join(&r.triple),
                    r.collider,
                    r.delta,
                    r.weakest_pair_info,
                    ty,
                    join(&r.conditioning)
                );
            }
        }
        out
    }
}

/// Empirical distribution function points `(value, fraction ≤ value)`.
pub fn ecdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| (x, (i + 1) as f64 / n))
        .collect()
}
