//! Unitary equivalence and irreducibility of finite-dimensional wandering data.
//!
//! Words in the unitaries and their adjoints are compared through the normal
//! form `U_{j_1}^{a_1} ⋯ U_{j_m}^{a_m}`, `a ∈ ℤ^m`, `|a|₁ ≤ L`: the torus
//! relations turn every word of length at most `L` into a unimodular multiple
//! of one of these, and the multiple depends only on the structure constants.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::tuples::WanderingData;
use crate::wold::WoldReport;

pub type CMatrix = DMatrix<Complex64>;

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn complex_matrices(d: &WanderingData) -> Vec<CMatrix> {
    d.matrices().iter().map(|m| m.to_complex()).collect()
}

fn ensure_comparable(d1: &WanderingData, d2: &WanderingData) -> Result<()> {
    d1.zc.ensure_matches(&d2.zc)?;
    if d1.a != d2.a {
        return Err(Error::SectorMismatch(d1.a.to_string(), d2.a.to_string()));
    }
    Ok(())
}

/// Basis of `{X : X U_j = U'_j X, X U_j* = U'_j* X for all j}` (`X` is `d₂ × d₁`).
pub fn intertwiner_space(d1: &WanderingData, d2: &WanderingData, cfg: &Config) -> Result<Vec<CMatrix>> {
    ensure_comparable(d1, d2)?;
    let (n1, n2) = (d1.dim, d2.dim);
    let cols = n1 * n2;
    if cols == 0 {
        return Ok(Vec::new());
    }
    let (u1, u2) = (complex_matrices(d1), complex_matrices(d2));
    let blocks = 2 * u1.len();
    let rows = (blocks * cols).max(cols);
    let mut a = CMatrix::zeros(rows, cols);
    let id1 = CMatrix::identity(n1, n1);
    let id2 = CMatrix::identity(n2, n2);
    // column-major vec: vec(X U) = (Uᵀ ⊗ 1) vec X, vec(U' X) = (1 ⊗ U') vec X
    let pairs = u1.iter().zip(&u2).flat_map(|(p, q)| [(p.clone(), q.clone()), (p.adjoint(), q.adjoint())]);
    for (b, (p, q)) in pairs.enumerate() {
        let block = p.transpose().kronecker(&id2) - id1.kronecker(&q);
        a.view_mut((b * cols, 0), (cols, cols)).copy_from(&block);
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let mut out = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s < cfg.rank_tol {
            let v = v_t.row(k).adjoint();
            out.push(CMatrix::from_column_slice(n2, n1, v.as_slice()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Certificate {
    Dimension { left: usize, right: usize },
    TraceWord { word: String, left: [f64; 2], right: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Equivalent { witness: CMatrix, residual: f64 },
    Inequivalent(Certificate),
    Undecided(String),
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Equivalent { .. } => "equivalent",
            Verdict::Inequivalent(_) => "inequivalent",
            Verdict::Undecided(_) => "undecided",
        }
    }
}

/// Exponent vectors with `|a|₁ ≤ bound`, ordered by `|a|₁` then lexicographically.
pub fn normal_words(m: usize, bound: usize) -> Vec<Vec<i64>> {
    fn fill(m: usize, total: usize, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == m {
            if total == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        if prefix.len() + 1 == m {
            let t = total as i64;
            for a in if t == 0 { vec![0] } else { vec![-t, t] } {
                prefix.push(a);
                fill(m, 0, prefix, out);
                prefix.pop();
            }
            return;
        }
        for k in 0..=total as i64 {
            for a in if k == 0 { vec![0] } else { vec![-k, k] } {
                prefix.push(a);
                fill(m, total - k as usize, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    for total in 0..=bound {
        if m == 0 && total > 0 {
            break;
        }
        fill(m, total, &mut Vec::new(), &mut out);
    }
    out
}

pub fn word_label(js: &[usize], a: &[i64]) -> String {
    let parts: Vec<String> = js
        .iter()
        .zip(a)
        .filter(|(_, &e)| e != 0)
        .map(|(j, e)| if *e == 1 { format!("U{}", j + 1) } else { format!("U{}^{e}", j + 1) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

/// Traces of normal words, computed with cached powers.
struct TraceTable {
    pos: Vec<Vec<CMatrix>>,
    neg: Vec<Vec<CMatrix>>,
    dim: usize,
}

impl TraceTable {
    fn new(us: &[CMatrix], dim: usize, bound: usize) -> Self {
        let powers = |u: &CMatrix| {
            let mut v = vec![CMatrix::identity(dim, dim)];
            for _ in 0..bound {
                let next = v.last().expect("seeded") * u;
                v.push(next);
            }
            v
        };
        TraceTable {
            pos: us.iter().map(powers).collect(),
            neg: us.iter().map(|u| powers(&u.adjoint())).collect(),
            dim,
        }
    }

    fn trace(&self, a: &[i64]) -> Complex64 {
        let mut acc = CMatrix::identity(self.dim, self.dim);
        for (j, &e) in a.iter().enumerate() {
            if e > 0 {
                acc *= &self.pos[j][e as usize];
            } else if e < 0 {
                acc *= &self.neg[j][(-e) as usize];
            }
        }
        acc.trace()
    }
}

fn generic_combination(basis: &[CMatrix], seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = CMatrix::zeros(basis[0].nrows(), basis[0].ncols());
    for b in basis {
        let c: f64 = rng.gen_range(-1.0..1.0);
        x += b * Complex64::new(c, 0.0);
    }
    x
}

/// `max(‖W*W − 1‖, max_j ‖W U_j − U'_j W‖)`.
pub fn witness_residual(w: &CMatrix, u1: &[CMatrix], u2: &[CMatrix]) -> f64 {
    let n = w.ncols();
    let mut r = frobenius(&(w.adjoint() * w - CMatrix::identity(n, n)));
    for (p, q) in u1.iter().zip(u2) {
        r = r.max(frobenius(&(w * p - q * w)));
    }
    r
}

/// Dimension check, trace-word filter, then a verified polar-corrected intertwiner.
pub fn equivalence_verdict(d1: &WanderingData, d2: &WanderingData, cfg: &Config) -> Result<Verdict> {
    ensure_comparable(d1, d2)?;
    if d1.dim != d2.dim {
        return Ok(Verdict::Inequivalent(Certificate::Dimension { left: d1.dim, right: d2.dim }));
    }
    let dim = d1.dim;
    if dim == 0 {
        return Ok(Verdict::Equivalent { witness: CMatrix::zeros(0, 0), residual: 0.0 });
    }
    let (u1, u2) = (complex_matrices(d1), complex_matrices(d2));
    let bound = cfg.word_bound_for(dim);
    let (t1, t2) = (TraceTable::new(&u1, dim, bound), TraceTable::new(&u2, dim, bound));
    let js = d1.complement_indices();
    let trace_tol = cfg.rank_tol * dim as f64;
    for a in normal_words(u1.len(), bound) {
        let (x, y) = (t1.trace(&a), t2.trace(&a));
        if (x - y).norm() > trace_tol {
            return Ok(Verdict::Inequivalent(Certificate::TraceWord {
                word: word_label(&js, &a),
                left: [x.re, x.im],
                right: [y.re, y.im],
            }));
        }
    }
    let basis = intertwiner_space(d1, d2, cfg)?;
    if basis.is_empty() {
        return Ok(Verdict::Undecided("traces agree but no nonzero intertwiner was found".into()));
    }
    let x = generic_combination(&basis, cfg.seed);
    let svd = x.svd(true, true);
    let w = svd.u.expect("requested") * svd.v_t.expect("requested");
    let residual = witness_residual(&w, &u1, &u2);
    if residual < cfg.witness_tol {
        Ok(Verdict::Equivalent { witness: w, residual })
    } else {
        Ok(Verdict::Undecided(format!("polar-corrected intertwiner has residual {residual:.3e}")))
    }
}

/// True iff the commutant of the data is one-dimensional.
pub fn irreducibility_test(d: &WanderingData, cfg: &Config) -> Result<bool> {
    if d.dim == 0 {
        return Err(Error::InvalidWanderingData("irreducibility of an empty representation".into()));
    }
    Ok(intertwiner_space(d, d, cfg)?.len() == 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorFingerprint {
    pub a: IndexSet,
    pub dim: usize,
    pub reliable: bool,
    /// `(exponents, [re, im])` per normal word.
    pub traces: Vec<(Vec<i64>, [f64; 2])>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fingerprint {
    pub word_bound: usize,
    pub partial: bool,
    pub sectors: Vec<SectorFingerprint>,
}

impl Fingerprint {
    /// Equal dimensions per sector and traces within `tol`.
    pub fn matches(&self, other: &Fingerprint, tol: f64) -> bool {
        self.word_bound == other.word_bound
            && self.sectors.len() == other.sectors.len()
            && self.sectors.iter().zip(&other.sectors).all(|(s, t)| {
                s.a == t.a
                    && s.dim == t.dim
                    && s.traces.len() == t.traces.len()
                    && s.traces.iter().zip(&t.traces).all(|((ea, x), (eb, y))| {
                        ea == eb && Complex64::new(x[0] - y[0], x[1] - y[1]).norm() <= tol
                    })
            })
    }
}

/// Per-sector dimensions and word traces of a decomposition.
pub fn classification_fingerprint(report: &WoldReport, cfg: &Config) -> Fingerprint {
    let max_dim = report.sectors.iter().map(|s| s.wandering_dim).max().unwrap_or(0);
    let bound = cfg.word_bound_for(max_dim);
    let mut partial = false;
    let sectors = report
        .sectors
        .iter()
        .map(|s| {
            partial |= s.wandering_dim > 0 && !s.reliable;
            let traces = if s.wandering_dim == 0 {
                Vec::new()
            } else {
                let us = complex_matrices(&s.data);
                let table = TraceTable::new(&us, s.wandering_dim, bound);
                normal_words(us.len(), bound)
                    .into_iter()
                    .map(|a| {
                        let t = table.trace(&a);
                        (a, [t.re, t.im])
                    })
                    .collect()
            };
            SectorFingerprint { a: s.a, dim: s.wandering_dim, reliable: s.reliable, traces }
        })
        .collect();
    Fingerprint { word_bound: bound, partial, sectors }
}
