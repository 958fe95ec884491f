//! JSON renderings of engine results. Keys come out sorted, so reports are
//! byte-stable for a given input and seed.

use num_complex::Complex64;
use serde_json::{json, Value};

use wold_core::classify::{CMatrix, Certificate, Fingerprint, Verdict};
use wold_core::opalg::{InternalOperator, ScalarMatrix, StructuredOperator};
use wold_core::tuples::{DilationCheck, IsometryTuple, RelationReport, WanderingData};
use wold_core::wold::{SectorReport, WoldReport};
use wold_core::Scalar;

pub fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn scalar(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(_) => Value::String(s.to_string()),
        Scalar::Float(z) => complex(*z),
    }
}

pub fn matrix(m: &ScalarMatrix) -> Value {
    let rows: Vec<Value> = m.to_rows().iter().map(|r| Value::Array(r.iter().map(scalar).collect())).collect();
    json!({ "exact": m.is_exact(), "entries": rows })
}

pub fn cmatrix(m: &CMatrix) -> Value {
    let rows: Vec<Value> =
        (0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect())).collect();
    Value::Array(rows)
}

pub fn data(d: &WanderingData) -> Value {
    let unitaries: Vec<Value> = d
        .complement_indices()
        .iter()
        .zip(d.matrices())
        .map(|(j, m)| json!({ "index": j + 1, "matrix": matrix(&m) }))
        .collect();
    json!({
        "A": d.a,
        "dim": d.dim,
        "unitaries": unitaries,
        "torus_relations": d.relation_checks(),
    })
}

pub fn operator(op: &StructuredOperator) -> Value {
    let terms: Vec<Value> = op
        .terms()
        .iter()
        .map(|t| {
            let internal = match &t.internal {
                InternalOperator::Identity => json!("identity"),
                other => {
                    let d = op.signature().blocks[t.block].internal_dim;
                    matrix(&other.to_matrix(d))
                }
            };
            json!({
                "block": t.block,
                "coeff": scalar(&t.coeff),
                "factors": t.factors,
                "internal": internal,
            })
        })
        .collect();
    Value::Array(terms)
}

pub fn tuple(t: &IsometryTuple) -> Value {
    let ops: Vec<Value> = t.ops().iter().enumerate().map(|(i, op)| json!({ "index": i + 1, "terms": operator(op) })).collect();
    json!({
        "signature": t.signature().to_string(),
        "meta": t.meta(),
        "operators": ops,
    })
}

pub fn relations(r: &RelationReport) -> Value {
    let entries: Vec<Value> = r
        .entries
        .iter()
        .map(|e| {
            json!({
                "relation": e.kind.to_string(),
                "i": e.i,
                "j": e.j,
                "residual": e.residual.residual,
                "first_violation": e.residual.first_violation.as_ref().map(|k| k.to_string()),
            })
        })
        .collect();
    json!({
        "window": r.window,
        "max_residual": r.max_residual,
        "flagged": r.flagged,
        "entries": entries,
    })
}

pub fn sector(s: &SectorReport) -> Value {
    json!({
        "A": s.a,
        "window_dim": s.window_dim,
        "wandering_dim": s.wandering_dim,
        "extraction_residual": s.extraction_residual,
        "reliable": s.reliable,
        "converged": s.converged,
        "reconstruction_residual": s.reconstruction_residual,
        "data": if s.wandering_dim > 0 { data(&s.data) } else { Value::Null },
        "notes": s.notes,
    })
}

pub fn wold(r: &WoldReport) -> Value {
    json!({
        "window": r.window,
        "completeness_residual": r.completeness_residual,
        "orthogonality_residual": r.orthogonality_residual,
        "converged": r.converged,
        "sectors": r.sectors.iter().map(sector).collect::<Vec<_>>(),
    })
}

pub fn verdict(v: &Verdict) -> Value {
    match v {
        Verdict::Equivalent { witness, residual } => json!({
            "verdict": v.label(),
            "witness": cmatrix(witness),
            "witness_residual": residual,
        }),
        Verdict::Inequivalent(c) => {
            let cert = match c {
                Certificate::Dimension { left, right } => json!({ "dimension": [left, right] }),
                Certificate::TraceWord { word, left, right } => {
                    json!({ "trace_word": { "word": word, "left": left, "right": right } })
                }
            };
            json!({ "verdict": v.label(), "certificate": cert })
        }
        Verdict::Undecided(reason) => json!({ "verdict": v.label(), "reason": reason }),
    }
}

pub fn fingerprint(f: &Fingerprint) -> Value {
    serde_json::to_value(f).expect("plain data")
}

pub fn dilation(c: &DilationCheck) -> Value {
    serde_json::to_value(c).expect("plain data")
}
