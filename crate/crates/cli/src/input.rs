//! The JSON input document.
//!
//! ```json
//! {
//!   "constants": { "n": 2, "z": [ { "i": 1, "j": 2, "phase": { "num": 1, "den": 4 } } ] },
//!   "tuple": { "standard": { "sectors": [ { "A": [1], "wandering": { "clock_shift": { "dim": 2 } } } ] } },
//!   "job": { "command": "decompose", "window": 6, "seed": 0 }
//! }
//! ```
//!
//! A tuple is either `standard` (one standard tuple per sector, summed) or a
//! `direct_sum` of tuples. A sector's `wandering` block is `"torus"` (the
//! lattice torus on the unitary directions), `{"clock_shift": {"dim": d}}`, or
//! `{"explicit": {"dim": d, "unitaries": [...]}}` with one unitary per index
//! outside `A`, in increasing order. A unitary is `{"perm": [...], "phases": [...]}`
//! (`e_m ↦ phases[m] e_{perm[m]}`, 0-based), `{"diag": [...]}`, or
//! `{"dense": [[[re, im], ...], ...]}` given row by row.

use num_complex::Complex64;
use serde::Deserialize;

use wold_core::opalg::{InternalOperator, ScalarMatrix};
use wold_core::phase::PhaseRepr;
use wold_core::tuples::{
    make_clock_shift_data, make_standard_torus_tuple, make_standard_tuple, tuple_direct_sum, IsometryTuple,
    WanderingData,
};
use wold_core::{IndexSet, Phase, Scalar, StructureConstants};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDoc {
    pub constants: ConstantsSpec,
    pub tuple: Option<TupleSpec>,
    pub data: Option<SectorSpec>,
    pub expression: Option<String>,
    #[serde(default)]
    pub job: JobBlock,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobBlock {
    pub command: Option<String>,
    pub window: Option<usize>,
    pub word_bound: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub k_max: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSpec {
    pub n: usize,
    #[serde(default)]
    pub z: Vec<PairSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub i: usize,
    pub j: usize,
    pub phase: PhaseRepr,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TupleSpec {
    Standard { sectors: Vec<SectorSpec> },
    DirectSum(Vec<TupleSpec>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSpec {
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    pub wandering: Option<WanderingSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WanderingSpec {
    Torus,
    ClockShift { dim: usize },
    Explicit { dim: usize, unitaries: Vec<UnitarySpec> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum UnitarySpec {
    Permutation { perm: Vec<usize>, phases: Vec<PhaseRepr> },
    Diagonal { diag: Vec<PhaseRepr> },
    Dense { dense: Vec<Vec<[f64; 2]>> },
}

pub fn parse_document(text: &str) -> Result<InputDoc, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Json { line: inner.line(), column: inner.column(), path, message: inner.to_string() }
    })
}

fn phase(r: PhaseRepr, at: &str) -> Result<Phase, CliError> {
    Phase::try_from(r).map_err(|e| CliError::Schema { path: at.into(), message: e.to_string() })
}

pub fn constants(spec: &ConstantsSpec) -> Result<StructureConstants, CliError> {
    let mut upper = Vec::with_capacity(spec.z.len());
    for (k, p) in spec.z.iter().enumerate() {
        let at = format!("constants.z[{k}]");
        if p.i == 0 || p.j == 0 || p.i >= p.j || p.j > spec.n {
            return Err(CliError::Schema {
                path: at,
                message: format!("pair ({}, {}) must satisfy 1 <= i < j <= {}", p.i, p.j, spec.n),
            });
        }
        upper.push((p.i - 1, p.j - 1, phase(p.phase, &at)?));
    }
    StructureConstants::new(spec.n, &upper).map_err(|e| CliError::Schema { path: "constants".into(), message: e.to_string() })
}

fn index_set(a: &[usize], n: usize, at: &str) -> Result<IndexSet, CliError> {
    if let Some(bad) = a.iter().find(|&&i| i == 0 || i > n) {
        return Err(CliError::Schema { path: at.into(), message: format!("index {bad} outside 1..={n}") });
    }
    Ok(IndexSet::from_indices(a.iter().map(|i| i - 1)))
}

fn unitary(spec: &UnitarySpec, dim: usize, at: &str) -> Result<InternalOperator, CliError> {
    let bad = |message: String| CliError::Schema { path: at.into(), message };
    match spec {
        UnitarySpec::Permutation { perm, phases } => {
            let ph = phases.iter().map(|p| phase(*p, at)).collect::<Result<Vec<_>, _>>()?;
            if perm.len() != dim {
                return Err(bad(format!("permutation of length {} for dimension {dim}", perm.len())));
            }
            InternalOperator::generalized_permutation(perm.clone(), ph)
                .ok_or_else(|| bad("not a bijection with one phase per entry".into()))
        }
        UnitarySpec::Diagonal { diag } => {
            if diag.len() != dim {
                return Err(bad(format!("diagonal of length {} for dimension {dim}", diag.len())));
            }
            Ok(InternalOperator::diagonal(diag.iter().map(|p| phase(*p, at)).collect::<Result<Vec<_>, _>>()?))
        }
        UnitarySpec::Dense { dense } => {
            if dense.len() != dim || dense.iter().any(|r| r.len() != dim) {
                return Err(bad(format!("dense matrix must be {dim} x {dim}")));
            }
            let rows = dense
                .iter()
                .map(|r| r.iter().map(|&[re, im]| Scalar::from_complex(Complex64::new(re, im))).collect())
                .collect();
            Ok(InternalOperator::Dense(ScalarMatrix::from_rows(rows)))
        }
    }
}

/// Wandering data of a finite sector block.
pub fn sector_data(spec: &SectorSpec, zc: &StructureConstants, at: &str) -> Result<WanderingData, CliError> {
    let a = index_set(&spec.a, zc.n(), &format!("{at}.A"))?;
    let core = |e: wold_core::Error| CliError::Schema { path: at.to_string(), message: e.to_string() };
    match &spec.wandering {
        None if a == IndexSet::full(zc.n()) => WanderingData::new(zc.clone(), a, 1, Vec::new()).map_err(core),
        None => Err(CliError::Schema {
            path: format!("{at}.wandering"),
            message: "required unless A = {1..n}".into(),
        }),
        Some(WanderingSpec::Torus) => Err(CliError::Schema {
            path: format!("{at}.wandering"),
            message: "the lattice torus has no finite wandering data".into(),
        }),
        Some(WanderingSpec::ClockShift { dim }) => make_clock_shift_data(zc, a, *dim).map_err(core),
        Some(WanderingSpec::Explicit { dim, unitaries }) => {
            let us = unitaries
                .iter()
                .enumerate()
                .map(|(k, u)| unitary(u, *dim, &format!("{at}.wandering.explicit.unitaries[{k}]")))
                .collect::<Result<Vec<_>, _>>()?;
            WanderingData::new(zc.clone(), a, *dim, us).map_err(core)
        }
    }
}

pub fn build_tuple(spec: &TupleSpec, zc: &StructureConstants, at: &str) -> Result<IsometryTuple, CliError> {
    let core = |e: wold_core::Error| CliError::Schema { path: at.to_string(), message: e.to_string() };
    let parts = match spec {
        TupleSpec::Standard { sectors } => {
            if sectors.is_empty() {
                return Err(CliError::Schema { path: format!("{at}.standard.sectors"), message: "empty".into() });
            }
            sectors
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    let sat = format!("{at}.standard.sectors[{k}]");
                    match s.wandering {
                        Some(WanderingSpec::Torus) => {
                            make_standard_torus_tuple(zc, index_set(&s.a, zc.n(), &format!("{sat}.A"))?)
                                .map_err(|e| CliError::Schema { path: sat.clone(), message: e.to_string() })
                        }
                        _ => {
                            let d = sector_data(s, zc, &sat)?;
                            make_standard_tuple(zc, &d)
                                .map_err(|e| CliError::Schema { path: sat.clone(), message: e.to_string() })
                        }
                    }
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        TupleSpec::DirectSum(items) => items
            .iter()
            .enumerate()
            .map(|(k, t)| build_tuple(t, zc, &format!("{at}.direct_sum[{k}]")))
            .collect::<Result<Vec<_>, _>>()?,
    };
    tuple_direct_sum(&parts).map_err(core)
}
