//! Command implementations for the `margin` binary. Each command returns the
//! text destined for standard output; structured documents go to `--out`.

pub mod plot;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use margin_core::arith::{format_rational, format_vector, parse_rational, RVector, Rational};
use margin_core::consistency::{Checked, ReportConfig, Verdict, VerdictStatus};
use margin_core::corpus;
use margin_core::document::{LossDocument, ReportDocument};
use margin_core::loss::{bayes_predictor, SimplexPoint};
use margin_core::polytope::{active_sets, epigraph_polytope, prediction_set, transport_vertices, DEFAULT_CAP};
use margin_core::risk::{
    bayes_risk, conjugate_neg_hm, conjugate_neg_hm_lp, subgradient_point_neg_hm, RiskKind, Subgradient, Witness,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;

pub const BAYES_FORMAT: &str = "bayes-result/v1";
pub const VERTICES_FORMAT: &str = "vertex-listing/v1";

#[derive(Debug, Parser)]
#[command(name = "margin", version, about = "Exact consistency analysis of max-margin surrogates for a finite loss matrix")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Path to a loss-matrix/v1 JSON document.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Name of a built-in loss (see `margin corpus`).
    #[arg(long)]
    pub corpus: Option<String>,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Write the structured JSON document to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Maximum free dimension handed to vertex enumeration.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    /// Grid denominator N for grid checks [default: 2k].
    #[arg(long)]
    pub grid: Option<u64>,
    /// Seed for randomized spot checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    #[value(name = "L")]
    L,
    #[value(name = "M")]
    M,
    #[value(name = "RM")]
    Rm,
    #[value(name = "MM")]
    Mm,
    #[value(name = "M-dual")]
    MDual,
    /// Conjugate (−H_M)* at the score vector given by --v.
    #[value(name = "conj")]
    Conj,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    PredSet,
    Epigraph,
    Transport,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the full consistency report.
    Analyze {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
    },
    /// Exact Bayes risk with a verified witness.
    Bayes {
        #[command(flatten)]
        source: Source,
        /// Distribution q, comma separated rationals.
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        /// Score vector for `--which conj`, comma separated rationals.
        #[arg(long, allow_hyphen_values = true)]
        v: Option<String>,
        #[arg(long, value_enum)]
        which: Which,
        #[command(flatten)]
        common: Common,
    },
    /// List the vertices of a prediction set, the epigraph polytope or U(q, q).
    Vertices {
        #[command(flatten)]
        source: Source,
        #[arg(value_enum)]
        target: Target,
        /// Output index (1-based) for pred-set.
        #[arg(long)]
        y: Option<usize>,
        /// Marginal q for transport.
        #[arg(long)]
        q: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Barycentric geometry for a 3-output loss.
    Plotdata {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
    },
    /// List the built-in losses.
    Corpus {
        /// Print the matrix of one entry.
        #[arg(long)]
        show: Option<String>,
    },
}

pub fn load(source: &Source) -> Result<LossDocument> {
    match (&source.input, &source.corpus) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            LossDocument::parse(&text).with_context(|| format!("invalid loss document {}", path.display()))
        }
        (None, Some(name)) => Ok(corpus::lookup(name)?.into()),
        _ => bail!("exactly one of --input or --corpus is required"),
    }
}

pub fn parse_vector(text: &str) -> Result<RVector> {
    text.split(',')
        .enumerate()
        .map(|(i, s)| parse_rational(s.trim()).with_context(|| format!("component {}", i + 1)))
        .collect()
}

fn write_out(common: &Common, json: &str) -> Result<()> {
    if let Some(path) = &common.out {
        std::fs::write(path, json).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn one_based(set: &[usize]) -> String {
    let items: Vec<String> = set.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Analyze { source, common } => analyze(&load(source)?, common),
        Command::Bayes { source, q, v, which, common } => {
            bayes(&load(source)?, q.as_deref(), v.as_deref(), *which, common)
        }
        Command::Vertices { source, target, y, q, common } => {
            vertices(&load(source)?, *target, *y, q.as_deref(), common)
        }
        Command::Plotdata { source, common } => {
            let doc = load(source)?;
            let g = plot::geometry(&doc.name, &doc.labels, &doc.loss, common.cap)?;
            let json = pretty(&g);
            write_out(common, &json)?;
            Ok(if common.out.is_some() { format!("wrote geometry for {}\n", doc.name) } else { json })
        }
        Command::Corpus { show } => corpus_listing(show.as_deref()),
    }
}

fn config(common: &Common) -> ReportConfig {
    ReportConfig { cap: common.cap, grid: common.grid, seed: common.seed }
}

fn status(v: &Verdict) -> &'static str {
    match v.status {
        VerdictStatus::Consistent => "consistent",
        VerdictStatus::Inconsistent => "inconsistent",
        VerdictStatus::Undetermined => "undetermined",
    }
}

fn checked<T>(c: &Checked<T>, f: impl Fn(&T) -> String) -> String {
    match c {
        Checked::Evaluated(v) => f(v),
        Checked::Undetermined(why) => format!("undetermined ({why})"),
    }
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

pub fn analyze(doc: &LossDocument, common: &Common) -> Result<String> {
    let report = ReportDocument::analyze(doc, &config(common));
    write_out(common, &report.to_json())?;
    let r = &report.report;
    let mut s = String::new();
    writeln!(s, "loss {} (k = {}, digest {})", doc.name, doc.loss.k(), &report.input.digest[..16])?;
    writeln!(s, "grid N = {}, cap = {}, seed = {}", report.config.grid, report.config.cap, report.config.seed)?;
    writeln!(s)?;
    let rows = [
        ("symmetric", yes_no(r.loss.symmetric)),
        ("distance", yes_no(r.loss.distance.is_distance)),
        (
            "necessary triple condition",
            checked(&r.necessary_condition, |n| match &n.violating_triple {
                Some(t) => format!(
                    "fails at ({}, {}, {}), {} violating triples",
                    t.triple[0] + 1,
                    t.triple[1] + 1,
                    t.triple[2] + 1,
                    n.violating_triple_count
                ),
                None if n.vacuous => "holds (vacuous)".into(),
                None => yes_no(n.holds),
            }),
        ),
        ("tree metric", yes_no(r.tree.is_certified())),
        ("min q_y over prediction sets > 0", checked(&r.rm_simple_sufficient, |m| yes_no(m.holds))),
        ("vertex disjunction (A1)", checked(&r.a1, |a| yes_no(a.holds))),
        ("dominant-label identity", checked(&r.dominant_label_identity, |d| yes_no(d.verified))),
        (
            "embedding identities",
            checked(&r.embedding_checks, |e| {
                let held = e.values().filter(|c| c.outcome.holds()).count();
                format!("{held}/{} hold", e.len())
            }),
        ),
        (
            "Fenchel-Young spot checks",
            checked(&r.fenchel_young, |f| format!("{} scores checked", f.len())),
        ),
    ];
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        writeln!(s, "{k:<width$}  {v}")?;
    }
    writeln!(s)?;
    for (name, v) in [
        ("max-margin", &r.verdicts.max_margin),
        ("restricted max-margin", &r.verdicts.restricted_max_margin),
        ("max-min-margin", &r.verdicts.max_min_margin),
    ] {
        writeln!(s, "{name:<22} {}", status(v))?;
        for j in &v.justification {
            writeln!(s, "{:<22}   {j}", "")?;
        }
    }
    Ok(s)
}

#[derive(Serialize)]
struct BayesDocument<'a> {
    format: &'static str,
    input: &'a str,
    which: &'static str,
    point: Vec<String>,
    result: serde_json::Value,
}

fn which_name(w: Which) -> &'static str {
    match w {
        Which::L => "L",
        Which::M => "M",
        Which::Rm => "RM",
        Which::Mm => "MM",
        Which::MDual => "M-dual",
        Which::Conj => "conj",
    }
}

pub fn bayes(doc: &LossDocument, q: Option<&str>, v: Option<&str>, which: Which, common: &Common) -> Result<String> {
    let loss = &doc.loss;
    let mut s = String::new();
    let (point, result) = if which == Which::Conj {
        let v = parse_vector(v.ok_or_else(|| anyhow!("--which conj needs --v"))?)?;
        let conj = conjugate_neg_hm(loss, &v)?;
        for &(y, z) in &conj.maximizers {
            if loss.get(y, z) + (&v[y] + &v[z]) / Rational::from_integer(2.into()) != conj.value {
                bail!("maximizing pair ({}, {}) does not reproduce the value", y + 1, z + 1);
            }
        }
        let lp = conjugate_neg_hm_lp(loss, &v)?;
        if lp != conj.value {
            bail!("pair enumeration gives {} but the LP form gives {}", format_rational(&conj.value), format_rational(&lp));
        }
        writeln!(s, "(-H_M)*(v) = {}", format_rational(&conj.value))?;
        writeln!(s, "v = {}", format_vector(&v))?;
        let pairs: Vec<String> = conj.maximizers.iter().map(|(a, b)| format!("({}, {})", a + 1, b + 1)).collect();
        writeln!(s, "maximizing pairs: {}", pairs.join(", "))?;
        if let Subgradient::Unique { point, .. } = subgradient_point_neg_hm(loss, &v)? {
            writeln!(s, "subgradient: {}", format_vector(point.as_slice()))?;
        }
        writeln!(s, "witness verified against the LP form")?;
        (v, serde_json::to_value(&conj)?)
    } else {
        let q = SimplexPoint::new(parse_vector(q.ok_or_else(|| anyhow!("--which {} needs --q", which_name(which)))?)?)?;
        let kind = match which {
            Which::L => RiskKind::Task,
            Which::M => RiskKind::MaxMargin,
            Which::Rm => RiskKind::RestrictedMaxMargin,
            Which::Mm => RiskKind::MaxMinMargin,
            Which::MDual => RiskKind::MaxMarginDual,
            Which::Conj => unreachable!(),
        };
        let r = bayes_risk(kind, loss, &q)?;
        if !r.verify(kind, loss, &q) {
            bail!("witness for H_{} failed re-verification", which_name(which));
        }
        writeln!(s, "H_{}(q) = {}", which_name(which), format_rational(&r.value))?;
        writeln!(s, "q = {}", format_vector(q.as_slice()))?;
        match &r.witness {
            Witness::Output(y) => writeln!(s, "witness output: {} ({})", y + 1, doc.label(*y))?,
            Witness::Dual(a) => writeln!(s, "witness dual: {}", format_vector(a))?,
            Witness::Plan(p) => {
                writeln!(s, "witness plan:")?;
                for i in 0..p.k() {
                    let row: Vec<String> = p.row(i).iter().map(format_rational).collect();
                    writeln!(s, "  {}", row.join("  "))?;
                }
            }
        }
        writeln!(s, "witness verified")?;
        (q.into_inner(), serde_json::to_value(&r)?)
    };
    let out = BayesDocument {
        format: BAYES_FORMAT,
        input: &doc.name,
        which: which_name(which),
        point: point.iter().map(format_rational).collect(),
        result,
    };
    write_out(common, &pretty(&out))?;
    Ok(s)
}

#[derive(Serialize)]
struct VertexEntry {
    point: Vec<String>,
    s: Vec<usize>,
    t: Vec<usize>,
}

#[derive(Serialize)]
struct VertexDocument<'a> {
    format: &'static str,
    input: &'a str,
    target: String,
    vertices: Vec<VertexEntry>,
}

fn plus_one(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

/// For pred-set, S is the set of Bayes-optimal outputs and T the zero
/// coordinates. For the epigraph, S and T are the tight rows of the two
/// blocks. For transport, S is the support and T the zero cells, both as
/// row-major cell indices.
pub fn vertices(
    doc: &LossDocument,
    target: Target,
    y: Option<usize>,
    q: Option<&str>,
    common: &Common,
) -> Result<String> {
    let loss = &doc.loss;
    let k = loss.k();
    let zeros = |p: &[Rational]| -> Vec<usize> { (0..p.len()).filter(|&i| p[i] == Rational::from_integer(0.into())).collect() };
    let (title, entries) = match target {
        Target::PredSet => {
            let y = y.ok_or_else(|| anyhow!("pred-set needs --y"))?;
            if y == 0 || y > k {
                bail!("--y must lie in 1..={k}, got {y}");
            }
            let set = prediction_set(loss, y - 1)?;
            let mut entries = Vec::new();
            for p in set.vertices(common.cap)?.iter() {
                let s = bayes_predictor(loss, &SimplexPoint::new(p.clone())?)?;
                entries.push(VertexEntry { point: p.iter().map(format_rational).collect(), s, t: zeros(p) });
            }
            (format!("pred-set {y}"), entries)
        }
        Target::Epigraph => {
            let p = epigraph_polytope(loss);
            let mut entries = Vec::new();
            for x in p.enumerate_vertices(common.cap)?.iter() {
                let a = active_sets(&p, x)?;
                if !a.is_vertex || !a.s_nonempty || !a.covers_k {
                    bail!("enumerated point {} fails the active-set checks", format_vector(x));
                }
                entries.push(VertexEntry { point: x.iter().map(format_rational).collect(), s: a.s, t: a.t });
            }
            ("epigraph".to_string(), entries)
        }
        Target::Transport => {
            let q = SimplexPoint::new(parse_vector(q.ok_or_else(|| anyhow!("transport needs --q"))?)?)?;
            let mut entries = Vec::new();
            for x in transport_vertices(&q, common.cap)?.iter() {
                let t = zeros(x);
                let s = (0..x.len()).filter(|i| !t.contains(i)).collect();
                entries.push(VertexEntry { point: x.iter().map(format_rational).collect(), s, t });
            }
            (format!("transport {}", format_vector(q.as_slice())), entries)
        }
    };
    let mut s = String::new();
    writeln!(s, "{} vertices of {title} for {}", entries.len(), doc.name)?;
    for e in &entries {
        writeln!(s, "({})  S = {}  T = {}", e.point.join(", "), one_based(&e.s), one_based(&e.t))?;
    }
    let entries = entries.into_iter().map(|e| VertexEntry { s: plus_one(&e.s), t: plus_one(&e.t), ..e }).collect();
    write_out(common, &pretty(&VertexDocument { format: VERTICES_FORMAT, input: &doc.name, target: title, vertices: entries }))?;
    Ok(s)
}

pub fn corpus_listing(show: Option<&str>) -> Result<String> {
    let mut s = String::new();
    match show {
        Some(name) => {
            let doc: LossDocument = corpus::lookup(name)?.into();
            s.push_str(&doc.to_json());
        }
        None => {
            let all = corpus::all();
            let width = all.iter().map(|e| e.name.len()).max().unwrap_or(0);
            for e in all {
                writeln!(s, "{:<width$}  k = {}  {}", e.name, e.loss.k(), e.description)?;
            }
        }
    }
    Ok(s)
}
