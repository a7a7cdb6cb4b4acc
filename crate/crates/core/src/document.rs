//! Versioned JSON documents: loss matrices in, consistency reports out.

use crate::arith::{format_rational, parse_rational, Rational};
use crate::consistency::{build_report, ConsistencyReport, ReportConfig};
use crate::corpus::CorpusEntry;
use crate::loss::LossMatrix;
use crate::{Error, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub const LOSS_FORMAT: &str = "loss-matrix/v1";
pub const REPORT_FORMAT: &str = "consistency-report/v1";
pub const TOOL_NAME: &str = "margin";

const KNOWN_FIELDS: [&str; 6] = ["format", "name", "k", "labels", "entries", "description"];

/// A named loss matrix with output labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LossDocument {
    pub name: String,
    pub labels: Vec<String>,
    pub loss: LossMatrix,
}

impl From<CorpusEntry> for LossDocument {
    fn from(e: CorpusEntry) -> Self {
        LossDocument { name: e.name, labels: e.labels, loss: e.loss }
    }
}

#[derive(Serialize)]
struct CanonicalLoss<'a> {
    format: &'static str,
    name: &'a str,
    k: usize,
    labels: &'a [String],
    entries: Vec<Vec<String>>,
}

impl LossDocument {
    /// Parses a `loss-matrix/v1` document. Entries may be JSON integers or
    /// strings holding integers, fractions `p/q` or finite decimals; JSON
    /// numbers with a fraction or exponent are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {} column {}: {}", e.line(), e.column(), strip_position(&e.to_string()))))?;
        let obj = value.as_object().ok_or_else(|| Error::Parse("document must be a JSON object".into()))?;
        if let Some(key) = obj.keys().find(|k| !KNOWN_FIELDS.contains(&k.as_str())) {
            return Err(Error::Parse(format!("unknown field {key:?}")));
        }
        match obj.get("format") {
            Some(Value::String(f)) if f == LOSS_FORMAT => {}
            Some(other) => return Err(Error::Parse(format!("unsupported format {other}, expected {LOSS_FORMAT:?}"))),
            None => return Err(Error::Parse(format!("missing \"format\" field (expected {LOSS_FORMAT:?})"))),
        }
        let name = match obj.get("name") {
            Some(Value::String(s)) => s.clone(),
            _ => return Err(Error::Parse("missing or non-string \"name\"".into())),
        };
        let k = obj
            .get("k")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("missing or non-integer \"k\"".into()))? as usize;
        if k < 2 {
            return Err(Error::Validation(format!("k = {k}: a loss needs at least two outputs")));
        }
        let entries = parse_entries(obj, k)?;
        let labels = parse_labels(obj, k)?;
        let loss = LossMatrix::new(entries)?;
        Ok(LossDocument { name, labels, loss })
    }

    /// Pretty-printed canonical form; parses back to an equal document.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.canonical()).expect("serializable");
        s.push('\n');
        s
    }

    fn canonical(&self) -> CanonicalLoss<'_> {
        CanonicalLoss {
            format: LOSS_FORMAT,
            name: &self.name,
            k: self.loss.k(),
            labels: &self.labels,
            entries: self.loss.rows().iter().map(|r| r.iter().map(format_rational).collect()).collect(),
        }
    }

    /// SHA-256 of the compact canonical form, in hex.
    pub fn digest(&self) -> String {
        let compact = serde_json::to_string(&self.canonical()).expect("serializable");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }

    pub fn label(&self, y: usize) -> &str {
        &self.labels[y]
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn parse_entries(obj: &Map<String, Value>, k: usize) -> Result<Vec<Vec<Rational>>> {
    let rows = obj
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing or non-array \"entries\"".into()))?;
    if rows.len() != k {
        return Err(Error::Parse(format!("\"entries\" has {} rows, expected k = {k}", rows.len())));
    }
    let mut out = Vec::with_capacity(k);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| Error::Parse(format!("row {} is not an array", i + 1)))?;
        if row.len() != k {
            return Err(Error::Parse(format!("row {} has {} entries, expected {k}", i + 1, row.len())));
        }
        let mut parsed = Vec::with_capacity(k);
        for (j, cell) in row.iter().enumerate() {
            let at = || format!("entry at row {}, column {}", i + 1, j + 1);
            let value = match cell {
                Value::String(s) => parse_rational(s).map_err(|e| Error::Parse(format!("{}: {e}", at())))?,
                Value::Number(n) if n.is_i64() || n.is_u64() => {
                    parse_rational(&n.to_string()).map_err(|e| Error::Parse(format!("{}: {e}", at())))?
                }
                Value::Number(n) => {
                    return Err(Error::Parse(format!(
                        "{}: binary floating-point number {n} is not accepted; write it as a string such as \"{n}\" or \"p/q\"",
                        at()
                    )))
                }
                other => return Err(Error::Parse(format!("{}: expected a rational literal, found {other}", at()))),
            };
            parsed.push(value);
        }
        out.push(parsed);
    }
    Ok(out)
}

fn parse_labels(obj: &Map<String, Value>, k: usize) -> Result<Vec<String>> {
    match obj.get("labels") {
        None | Some(Value::Null) => Ok((1..=k).map(|i| i.to_string()).collect()),
        Some(Value::Array(items)) => {
            if items.len() != k {
                return Err(Error::Parse(format!("\"labels\" has {} items, expected k = {k}", items.len())));
            }
            items
                .iter()
                .enumerate()
                .map(|(i, v)| v.as_str().map(str::to_string).ok_or_else(|| Error::Parse(format!("label {} is not a string", i + 1))))
                .collect()
        }
        Some(_) => Err(Error::Parse("\"labels\" must be an array of strings".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputInfo {
    pub name: String,
    pub k: usize,
    pub labels: Vec<String>,
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigInfo {
    pub cap: usize,
    pub grid: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportDocument {
    pub format: String,
    pub tool: ToolInfo,
    pub input: InputInfo,
    pub config: ConfigInfo,
    pub report: ConsistencyReport,
}

impl ReportDocument {
    pub fn analyze(doc: &LossDocument, config: &ReportConfig) -> Self {
        let report = build_report(&doc.loss, config);
        ReportDocument {
            format: REPORT_FORMAT.into(),
            tool: ToolInfo { name: TOOL_NAME.into(), version: env!("CARGO_PKG_VERSION").into() },
            input: InputInfo { name: doc.name.clone(), k: doc.loss.k(), labels: doc.labels.clone(), digest: doc.digest() },
            config: ConfigInfo { cap: config.cap, grid: config.grid_for(doc.loss.k()), seed: config.seed },
            report,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}
