//! Batch front end: read JSON job documents, run an engine, write a report.
//!
//! Exit codes: 0 when every check passes, 1 when the run completed with
//! failing residuals, non-convergence or a verdict other than equivalent,
//! 2 on input errors.

pub mod input;
pub mod report;

use std::fs;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use wold_core::classify::{classification_fingerprint, equivalence_verdict, irreducibility_test, Verdict};
use wold_core::symalg::{parse_expression, verify_identity};
use wold_core::tuples::{dilate_tuple, verify_tuple_relations, IsometryTuple, WanderingData};
use wold_core::wold::wold_decompose;
use wold_core::{Config, IndexSet};

use input::InputDoc;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: cannot read input: {message}")]
    Io { path: String, message: String },
    #[error("line {line}, column {column} ({path}): {message}")]
    Json { line: usize, column: usize, path: String, message: String },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("expression: {0}")]
    Expression(wold_core::Error),
    #[error("{0}")]
    Core(#[from] wold_core::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Reduce,
    Verify,
    Standard,
    Decompose,
    Classify,
    Equiv,
    Dilate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Reduce => "reduce",
            Command::Verify => "verify",
            Command::Standard => "standard",
            Command::Decompose => "decompose",
            Command::Classify => "classify",
            Command::Equiv => "equiv",
            Command::Dilate => "dilate",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wold", version, about = "Wold decomposition toolkit for doubly non-commuting isometries")]
pub struct Args {
    /// Command to run; defaults to `job.command` of the first input.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Input document (repeat for `equiv`).
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Window size per lattice coordinate.
    #[arg(long)]
    pub window: Option<usize>,
    /// Seed for generic intertwiners.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Word-length bound for trace comparisons.
    #[arg(long)]
    pub word_bound: Option<usize>,
}

/// A finished run: exit code, report, and a one-line summary.
pub struct Outcome {
    pub code: u8,
    pub report: String,
    pub summary: String,
}

struct Loaded {
    doc: InputDoc,
    sha256: String,
}

fn load(path: &PathBuf) -> Result<Loaded, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let doc = input::parse_document(&text)?;
    Ok(Loaded { doc, sha256: hex::encode(Sha256::digest(&bytes)) })
}

fn config(args: &Args, job: &input::JobBlock) -> Result<Config, CliError> {
    let d = Config::default();
    let cfg = Config {
        window: args.window.or(job.window).unwrap_or(d.window),
        k_max: job.k_max.unwrap_or(d.k_max),
        tol: args.tol.or(job.tol).unwrap_or(d.tol),
        word_bound: args.word_bound.or(job.word_bound),
        seed: args.seed.or(job.seed).unwrap_or(d.seed),
        ..d
    };
    if cfg.window == 0 {
        return Err(CliError::Usage("window must be at least 1".into()));
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(CliError::Usage("tolerance must be positive".into()));
    }
    if cfg.k_max == 0 {
        return Err(CliError::Usage("k_max must be at least 1".into()));
    }
    Ok(cfg)
}

fn tuple_of(l: &Loaded) -> Result<IsometryTuple, CliError> {
    let zc = input::constants(&l.doc.constants)?;
    let spec = l.doc.tuple.as_ref().ok_or_else(|| CliError::Schema { path: "tuple".into(), message: "missing".into() })?;
    input::build_tuple(spec, &zc, "tuple")
}

fn data_of(l: &Loaded) -> Result<WanderingData, CliError> {
    let zc = input::constants(&l.doc.constants)?;
    let spec = l.doc.data.as_ref().ok_or_else(|| CliError::Schema { path: "data".into(), message: "missing".into() })?;
    input::sector_data(spec, &zc, "data")
}

fn expression_of(l: &Loaded) -> Result<&str, CliError> {
    l.doc
        .expression
        .as_deref()
        .ok_or_else(|| CliError::Schema { path: "expression".into(), message: "missing".into() })
}

struct Result_ {
    pass: bool,
    body: Value,
    summary: String,
}

fn reduce(l: &Loaded) -> Result<Result_, CliError> {
    let zc = input::constants(&l.doc.constants)?;
    let src = expression_of(l)?;
    let s = parse_expression(src, &zc).map_err(CliError::Expression)?;
    let normal = s.to_string();
    Ok(Result_ { pass: true, body: json!({ "expression": src, "normal_form": normal }), summary: normal })
}

fn verify(l: &Loaded, cfg: &Config) -> Result<Result_, CliError> {
    if l.doc.tuple.is_some() {
        let t = tuple_of(l)?;
        let r = verify_tuple_relations(&t, cfg.window)?;
        let pass = r.max_residual <= cfg.tol;
        let summary = format!("max relation residual {:e}", r.max_residual);
        return Ok(Result_ { pass, body: json!({ "relations": report::relations(&r) }), summary });
    }
    if l.doc.data.is_some() {
        let d = data_of(l)?;
        return Ok(Result_ { pass: true, body: json!({ "data": report::data(&d) }), summary: "data valid".into() });
    }
    let zc = input::constants(&l.doc.constants)?;
    let src = expression_of(l)?;
    let Some((lhs, rhs)) = src.split_once('=') else {
        return Err(CliError::Schema { path: "expression".into(), message: "verify expects `lhs = rhs`".into() });
    };
    let offset = lhs.chars().count() + 1;
    let left = parse_expression(lhs, &zc).map_err(CliError::Expression)?;
    let right = parse_expression(rhs, &zc).map_err(|e| match e {
        wold_core::Error::Parse { column, message } => {
            CliError::Expression(wold_core::Error::Parse { column: column + offset, message })
        }
        other => CliError::Expression(other),
    })?;
    let holds = verify_identity(&left, &right);
    Ok(Result_ {
        pass: holds,
        body: json!({
            "lhs": left.to_string(),
            "rhs": right.to_string(),
            "identity": holds,
        }),
        summary: if holds { "identity holds".into() } else { "identity fails".into() },
    })
}

fn standard(l: &Loaded, cfg: &Config) -> Result<Result_, CliError> {
    let t = tuple_of(l)?;
    let r = verify_tuple_relations(&t, cfg.window)?;
    let pass = r.max_residual <= cfg.tol;
    Ok(Result_ {
        pass,
        body: json!({ "tuple": report::tuple(&t), "relations": report::relations(&r) }),
        summary: format!("{} ; max relation residual {:e}", t.signature(), r.max_residual),
    })
}

fn decompose(l: &Loaded, cfg: &Config) -> Result<Result_, CliError> {
    let t = tuple_of(l)?;
    let w = wold_decompose(&t, cfg)?;
    let rec_ok = w.sectors.iter().all(|s| s.reconstruction_residual.is_none_or(|r| r <= cfg.tol));
    let pass = w.converged && w.completeness_residual <= cfg.tol && w.orthogonality_residual <= cfg.tol && rec_ok;
    let parts: Vec<String> =
        w.nonempty().map(|s| format!("{}: window dim {}, wandering dim {}", s.a, s.window_dim, s.wandering_dim)).collect();
    Ok(Result_ { pass, body: json!({ "wold": report::wold(&w) }), summary: parts.join("; ") })
}

fn classify(l: &Loaded, cfg: &Config) -> Result<Result_, CliError> {
    if l.doc.data.is_some() {
        let d = data_of(l)?;
        let irreducible = irreducibility_test(&d, cfg)?;
        return Ok(Result_ {
            pass: true,
            body: json!({ "A": d.a, "dim": d.dim, "irreducible": irreducible }),
            summary: if irreducible { "irreducible".into() } else { "reducible".into() },
        });
    }
    let t = tuple_of(l)?;
    let w = wold_decompose(&t, cfg)?;
    let f = classification_fingerprint(&w, cfg);
    let mut irreducible = Vec::new();
    for s in w.sectors.iter().filter(|s| s.wandering_dim > 0 && s.reliable) {
        irreducible.push(json!({ "A": s.a, "irreducible": irreducibility_test(&s.data, cfg)? }));
    }
    Ok(Result_ {
        pass: w.converged,
        body: json!({ "fingerprint": report::fingerprint(&f), "irreducible": irreducible }),
        summary: format!("fingerprint over {} sectors{}", f.sectors.len(), if f.partial { " (partial)" } else { "" }),
    })
}

fn equiv(inputs: &[Loaded], cfg: &Config) -> Result<Result_, CliError> {
    let [a, b] = inputs else {
        return Err(CliError::Usage("equiv needs exactly two --input documents".into()));
    };
    if a.doc.data.is_some() && b.doc.data.is_some() {
        let (d1, d2) = (data_of(a)?, data_of(b)?);
        let v = equivalence_verdict(&d1, &d2, cfg)?;
        return Ok(Result_ { pass: v.is_equivalent(), body: json!({ "verdict": report::verdict(&v) }), summary: v.label().into() });
    }
    let (t1, t2) = (tuple_of(a)?, tuple_of(b)?);
    t1.zc().ensure_matches(t2.zc())?;
    let (w1, w2) = (wold_decompose(&t1, cfg)?, wold_decompose(&t2, cfg)?);
    let mut all = true;
    let mut sectors = Vec::new();
    for a in IndexSet::all_subsets(t1.n()) {
        let (s1, s2) = (w1.sector(a), w2.sector(a));
        if s1.wandering_dim == 0 && s2.wandering_dim == 0 {
            continue;
        }
        let v = if !s1.reliable || !s2.reliable {
            Verdict::Undecided("sector data are a windowed compression".into())
        } else {
            equivalence_verdict(&s1.data, &s2.data, cfg)?
        };
        all &= v.is_equivalent();
        sectors.push(json!({ "A": a, "verdict": report::verdict(&v) }));
    }
    let label = if all { "equivalent" } else { "not shown equivalent" };
    Ok(Result_ { pass: all, body: json!({ "sectors": sectors, "verdict": label }), summary: label.into() })
}

fn dilate(l: &Loaded, cfg: &Config) -> Result<Result_, CliError> {
    let t = tuple_of(l)?;
    let d = dilate_tuple(&t)?;
    let c = d.check(cfg.window)?;
    let pass = [c.unitarity, c.restriction, c.compression, c.corner].iter().all(|r| *r <= cfg.tol);
    Ok(Result_ {
        pass,
        body: json!({
            "original": t.signature().to_string(),
            "dilated": report::tuple(&d.dilated),
            "checks": report::dilation(&c),
        }),
        summary: format!("{} -> {}", t.signature(), d.dilated.signature()),
    })
}

/// Runs one job. Input errors come back as `Err`.
pub fn run(args: &Args) -> Result<Outcome, CliError> {
    let inputs = args.input.iter().map(load).collect::<Result<Vec<_>, _>>()?;
    let first = &inputs[0];
    let command = match args.command {
        Some(c) => c,
        None => {
            let name = first.doc.job.command.as_deref().ok_or_else(|| {
                CliError::Usage("no command given on the command line or in job.command".into())
            })?;
            Command::from_str(name, true).map_err(|_| CliError::Schema {
                path: "job.command".into(),
                message: format!("unknown command `{name}`"),
            })?
        }
    };
    if command != Command::Equiv && inputs.len() != 1 {
        return Err(CliError::Usage(format!("{} takes exactly one --input", command.name())));
    }
    let cfg = config(args, &first.doc.job)?;
    let result = match command {
        Command::Reduce => reduce(first)?,
        Command::Verify => verify(first, &cfg)?,
        Command::Standard => standard(first, &cfg)?,
        Command::Decompose => decompose(first, &cfg)?,
        Command::Classify => classify(first, &cfg)?,
        Command::Equiv => equiv(&inputs, &cfg)?,
        Command::Dilate => dilate(first, &cfg)?,
    };
    let doc = json!({
        "tool": "wold",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command.name(),
        "input_sha256": inputs.iter().map(|l| l.sha256.clone()).collect::<Vec<_>>(),
        "config": cfg,
        "status": if result.pass { "pass" } else { "fail" },
        "result": result.body,
    });
    let mut report = serde_json::to_string_pretty(&doc).expect("serializable");
    report.push('\n');
    Ok(Outcome { code: if result.pass { 0 } else { 1 }, report, summary: result.summary })
}
