//! Sector projections, wandering subspaces and the reconstruction of a tuple
//! from its wandering data.
//!
//! Strong limits are replaced by exact evaluation on finitely supported
//! vectors. A series or iteration is declared converged once it has run past
//! the lattice reach of its input and two consecutive iterates agree; on
//! structured tuples every half-line direction has emptied out by then.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::config::Config;
use crate::error::Result;
use crate::index_set::IndexSet;
use crate::opalg::{BasisKey, InternalOperator, ScalarMatrix, StructuredOperator, SupportedVector};
use crate::phase::Rational;
use crate::scalar::Scalar;
use crate::tuples::{make_standard_tuple, IsometryTuple, WanderingData};

/// A projected vector with its convergence status.
#[derive(Debug, Clone)]
pub struct Projected {
    pub vector: SupportedVector,
    pub converged: bool,
    /// Iterations used by the slowest factor.
    pub iterations: usize,
}

/// Projection machinery for one tuple, caching powers of the generators.
pub struct Projector<'a> {
    t: &'a IsometryTuple,
    k_max: usize,
    adjoints: Vec<StructuredOperator>,
    powers: RefCell<Vec<Vec<StructuredOperator>>>,
}

impl<'a> Projector<'a> {
    pub fn new(t: &'a IsometryTuple, cfg: &Config) -> Self {
        let id = StructuredOperator::identity(t.signature());
        Projector {
            t,
            k_max: cfg.k_max,
            adjoints: t.ops().iter().map(StructuredOperator::adjoint).collect(),
            powers: RefCell::new(vec![vec![id]; t.n()]),
        }
    }

    pub fn tuple(&self) -> &IsometryTuple {
        self.t
    }

    fn power(&self, i: usize, k: usize) -> StructuredOperator {
        let mut cache = self.powers.borrow_mut();
        while cache[i].len() <= k {
            let next = self.t.op(i).compose(cache[i].last().expect("seeded")).expect("shared signature");
            cache[i].push(next);
        }
        cache[i][k].clone()
    }

    /// `Σ_k V_i^k (1 − V_iV_i*) V_i^{*k} x`.
    pub fn defect(&self, i: usize, x: &SupportedVector) -> Result<Projected> {
        let guard = x.reach() as usize;
        let (v, v_adj) = (self.t.op(i), &self.adjoints[i]);
        let mut acc = SupportedVector::zero(x.signature());
        let mut y = x.clone();
        let mut quiet = false;
        for k in 0..=self.k_max {
            if y.is_zero() {
                return Ok(Projected { vector: acc, converged: true, iterations: k });
            }
            let down = v_adj.apply(&y)?;
            let defect = y.sub(&v.apply(&down)?)?;
            let term = self.power(i, k).apply(&defect)?;
            let term_zero = term.is_zero();
            acc = acc.add(&term)?;
            if term_zero && quiet && k > guard {
                return Ok(Projected { vector: acc, converged: true, iterations: k });
            }
            quiet = term_zero;
            y = down;
        }
        Ok(Projected { vector: acc, converged: false, iterations: self.k_max })
    }

    /// `lim_k V_i^k V_i^{*k} x`.
    pub fn unitary(&self, i: usize, x: &SupportedVector) -> Result<Projected> {
        let guard = x.reach() as usize;
        let v_adj = &self.adjoints[i];
        let mut down = x.clone();
        let mut prev = x.clone();
        for k in 1..=self.k_max {
            down = v_adj.apply(&down)?;
            let cur = self.power(i, k).apply(&down)?;
            if cur == prev && k > guard {
                return Ok(Projected { vector: cur, converged: true, iterations: k });
            }
            prev = cur;
        }
        Ok(Projected { vector: prev, converged: false, iterations: self.k_max })
    }

    /// `P_A x = ∏_{i∈A} P_i^iso ∏_{j∉A} P_j^uni x`.
    pub fn sector(&self, a: IndexSet, x: &SupportedVector) -> Result<Projected> {
        let mut out = Projected { vector: x.clone(), converged: true, iterations: 0 };
        for i in 0..self.t.n() {
            if out.vector.is_zero() {
                break;
            }
            let p = if a.contains(i) { self.defect(i, &out.vector)? } else { self.unitary(i, &out.vector)? };
            out = Projected {
                vector: p.vector,
                converged: out.converged && p.converged,
                iterations: out.iterations.max(p.iterations),
            };
        }
        Ok(out)
    }

    /// `Q_A x = ∏_{i∈A} (1 − V_iV_i*) x`.
    pub fn wandering_filter(&self, a: IndexSet, x: &SupportedVector) -> Result<SupportedVector> {
        let mut y = x.clone();
        for i in a.iter() {
            y = y.sub(&self.t.op(i).apply(&self.adjoints[i].apply(&y)?)?)?;
        }
        Ok(y)
    }
}

pub fn defect_projection_apply(i: usize, t: &IsometryTuple, x: &SupportedVector, cfg: &Config) -> Result<Projected> {
    Projector::new(t, cfg).defect(i, x)
}

pub fn unitary_projection_apply(i: usize, t: &IsometryTuple, x: &SupportedVector, cfg: &Config) -> Result<Projected> {
    Projector::new(t, cfg).unitary(i, x)
}

pub fn sector_projection_apply(a: IndexSet, t: &IsometryTuple, x: &SupportedVector, cfg: &Config) -> Result<Projected> {
    Projector::new(t, cfg).sector(a, x)
}

fn exact_sqrt(r: Rational) -> Option<Rational> {
    fn isqrt(n: i64) -> Option<i64> {
        if n < 0 {
            return None;
        }
        let s = (n as f64).sqrt().round() as i64;
        (s.checked_mul(s) == Some(n)).then_some(s)
    }
    Some(Rational::new(isqrt(*r.numer())?, isqrt(*r.denom())?))
}

/// Sequential Gram–Schmidt over sparse vectors. Inner products are taken only
/// against basis vectors sharing support with the candidate.
pub struct Orthonormalizer {
    tol: f64,
    basis: Vec<SupportedVector>,
    by_key: HashMap<BasisKey, Vec<usize>>,
}

impl Orthonormalizer {
    pub fn new(tol: f64) -> Self {
        Orthonormalizer { tol, basis: Vec::new(), by_key: HashMap::new() }
    }

    fn project_out(&self, v: &SupportedVector) -> Result<SupportedVector> {
        let mut touched: Vec<usize> = v.entries().flat_map(|(k, _)| self.by_key.get(k).into_iter().flatten()).copied().collect();
        touched.sort_unstable();
        touched.dedup();
        let mut u = v.clone();
        for &b in &touched {
            let c = self.basis[b].inner(v);
            if !c.is_zero() {
                u = u.sub(&self.basis[b].scale(&c))?;
            }
        }
        Ok(u)
    }

    /// Adds the normalized residual of `v` if it exceeds the tolerance.
    pub fn push(&mut self, v: &SupportedVector) -> Result<bool> {
        if v.is_zero() {
            return Ok(false);
        }
        let mut u = self.project_out(v)?;
        if !u.is_exact() && !u.is_zero() {
            u = self.project_out(&u)?;
        }
        if u.is_zero() || u.norm() <= self.tol {
            return Ok(false);
        }
        let inv = match u.entries().map(|(_, c)| c.exact_norm_sqr()).sum::<Option<Rational>>().and_then(exact_sqrt) {
            Some(n) => Scalar::from_rational(n.recip()),
            None => Scalar::from_complex((1.0 / u.norm()).into()),
        };
        let u = u.scale(&inv);
        let idx = self.basis.len();
        for (k, _) in u.entries() {
            self.by_key.entry(k.clone()).or_default().push(idx);
        }
        self.basis.push(u);
        Ok(true)
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn into_basis(self) -> Vec<SupportedVector> {
        self.basis
    }
}

/// A wandering basis together with convergence status.
#[derive(Debug, Clone)]
pub struct WanderingBasis {
    pub vectors: Vec<SupportedVector>,
    pub converged: bool,
}

fn wandering_basis_with(p: &Projector<'_>, a: IndexSet, cfg: &Config) -> Result<WanderingBasis> {
    let mut gs = Orthonormalizer::new(cfg.tol);
    let mut converged = true;
    for key in p.tuple().window_basis(cfg.window) {
        let x = p.tuple().basis_vector(key);
        let q = p.wandering_filter(a, &x)?;
        if q.is_zero() {
            continue;
        }
        let y = p.sector(a, &q)?;
        converged &= y.converged;
        gs.push(&y.vector)?;
    }
    Ok(WanderingBasis { vectors: gs.into_basis(), converged })
}

/// Orthonormal basis of `P_A Q_A` applied to the window, in window order.
pub fn wandering_basis(a: IndexSet, t: &IsometryTuple, cfg: &Config) -> Result<WanderingBasis> {
    wandering_basis_with(&Projector::new(t, cfg), a, cfg)
}

/// Wandering data read off a tuple on a window.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub data: WanderingData,
    pub basis: Vec<SupportedVector>,
    /// RMS-per-column unitarity plus invariance defect, maximized over `j`.
    pub residual: f64,
    pub reliable: bool,
    pub converged: bool,
}

fn compress(op: &StructuredOperator, basis: &[SupportedVector]) -> Result<(ScalarMatrix, f64)> {
    let d = basis.len();
    let mut m = ScalarMatrix::zeros(d, d);
    let mut invariance = 0.0;
    for (c, b) in basis.iter().enumerate() {
        let y = op.apply(b)?;
        let mut back = SupportedVector::zero(y.signature());
        for (r, br) in basis.iter().enumerate() {
            let entry = br.inner(&y);
            if !entry.is_zero() {
                back = back.add(&br.scale(&entry))?;
                m.set(r, c, entry);
            }
        }
        let miss = y.sub(&back)?;
        if !miss.is_zero() {
            invariance += miss.norm_sqr();
        }
    }
    Ok((m, invariance.sqrt()))
}

fn extract_with(p: &Projector<'_>, a: IndexSet, cfg: &Config) -> Result<Extraction> {
    let t = p.tuple();
    let wb = wandering_basis_with(p, a, cfg)?;
    let dim = wb.vectors.len();
    let mut unitaries = Vec::new();
    let mut residual: f64 = 0.0;
    for j in a.complement(t.n()).iter() {
        let (m, invariance) = compress(t.op(j), &wb.vectors)?;
        let unitarity = m.adjoint().mul(&m).sub(&ScalarMatrix::identity(dim)).residual_norm();
        if dim > 0 {
            residual = residual.max((unitarity + invariance) / (dim as f64).sqrt());
        }
        unitaries.push(InternalOperator::Dense(m));
    }
    let data = WanderingData::unchecked(t.zc().clone(), a, dim, unitaries)?;
    Ok(Extraction {
        data,
        basis: wb.vectors,
        residual,
        reliable: residual <= cfg.extraction_tol && wb.converged,
        converged: wb.converged,
    })
}

/// `M_j = B* V_j B` for `j ∉ A` with `B` the wandering basis.
pub fn extract_wandering_data(a: IndexSet, t: &IsometryTuple, cfg: &Config) -> Result<Extraction> {
    extract_with(&Projector::new(t, cfg), a, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorDimension {
    pub a: IndexSet,
    pub dim: usize,
    pub converged: bool,
}

fn sector_dimension(p: &Projector<'_>, a: IndexSet, cfg: &Config) -> Result<SectorDimension> {
    let mut gs = Orthonormalizer::new(cfg.tol);
    let mut converged = true;
    for key in p.tuple().window_basis(cfg.window) {
        let y = p.sector(a, &p.tuple().basis_vector(key))?;
        converged &= y.converged;
        gs.push(&y.vector)?;
    }
    Ok(SectorDimension { a, dim: gs.len(), converged })
}

/// Rank of `P_A` applied to the window, for every `A`.
pub fn classify_sectors(t: &IsometryTuple, cfg: &Config) -> Result<Vec<SectorDimension>> {
    let p = Projector::new(t, cfg);
    IndexSet::all_subsets(t.n()).map(|a| sector_dimension(&p, a, cfg)).collect()
}

/// `φ(e_k ⊗ w_m) = V_{i_1}^{k_1} ⋯ V_{i_l}^{k_l} b_m` on demand.
struct Reconstruction<'a> {
    p: &'a Projector<'a>,
    a: Vec<usize>,
    basis: &'a [SupportedVector],
    cache: RefCell<BTreeMap<BasisKey, SupportedVector>>,
}

impl Reconstruction<'_> {
    fn phi_key(&self, key: &BasisKey) -> Result<SupportedVector> {
        if let Some(v) = self.cache.borrow().get(key) {
            return Ok(v.clone());
        }
        let mut v = self.basis[key.internal].clone();
        for (r, &i) in self.a.iter().enumerate().rev() {
            v = self.p.power(i, key.index[r] as usize).apply(&v)?;
        }
        self.cache.borrow_mut().insert(key.clone(), v.clone());
        Ok(v)
    }

    fn phi(&self, y: &SupportedVector) -> Result<SupportedVector> {
        let mut out = SupportedVector::zero(self.p.tuple().signature());
        for (k, c) in y.entries() {
            out = out.add(&self.phi_key(k)?.scale(c))?;
        }
        Ok(out)
    }
}

/// Per-sector outcome of the decomposition.
#[derive(Debug, Clone)]
pub struct SectorReport {
    pub a: IndexSet,
    pub window_dim: usize,
    pub wandering_dim: usize,
    pub data: WanderingData,
    pub extraction_residual: f64,
    pub reliable: bool,
    pub converged: bool,
    /// `None` when the sector is empty or its data fail validation.
    pub reconstruction_residual: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct WoldReport {
    pub window: usize,
    pub sectors: Vec<SectorReport>,
    pub completeness_residual: f64,
    pub orthogonality_residual: f64,
    pub converged: bool,
}

impl WoldReport {
    pub fn sector(&self, a: IndexSet) -> &SectorReport {
        self.sectors.iter().find(|s| s.a == a).expect("all subsets present")
    }

    pub fn nonempty(&self) -> impl Iterator<Item = &SectorReport> {
        self.sectors.iter().filter(|s| s.window_dim > 0)
    }
}

fn reconstruction_residual(
    p: &Projector<'_>,
    ex: &Extraction,
    cfg: &Config,
) -> Result<std::result::Result<f64, String>> {
    let t = p.tuple();
    let std = match make_standard_tuple(t.zc(), &ex.data) {
        Ok(s) => s,
        Err(e) => return Ok(Err(format!("no standard model: {e}"))),
    };
    let rec = Reconstruction { p, a: ex.data.a.iter().collect(), basis: &ex.basis, cache: RefCell::new(BTreeMap::new()) };
    let mut worst: f64 = 0.0;
    for key in std.window_basis(cfg.window) {
        let y = std.basis_vector(key);
        let phi_y = rec.phi(&y)?;
        for i in 0..t.n() {
            let lhs = rec.phi(&std.op(i).apply(&y)?)?;
            let rhs = t.op(i).apply(&phi_y)?;
            let d = lhs.sub(&rhs)?;
            if !d.is_zero() {
                worst = worst.max(d.norm());
            }
        }
    }
    Ok(Ok(worst))
}

/// Full decomposition on the window `cfg.window`.
pub fn wold_decompose(t: &IsometryTuple, cfg: &Config) -> Result<WoldReport> {
    let p = Projector::new(t, cfg);
    let subsets: Vec<IndexSet> = IndexSet::all_subsets(t.n()).collect();
    let mut sectors = Vec::with_capacity(subsets.len());
    for &a in &subsets {
        let dim = sector_dimension(&p, a, cfg)?;
        let ex = extract_with(&p, a, cfg)?;
        let mut notes = Vec::new();
        if !ex.converged || !dim.converged {
            notes.push(format!("projection series did not settle within k_max = {}", cfg.k_max));
        }
        let reconstruction_residual = if ex.data.dim == 0 {
            None
        } else {
            match reconstruction_residual(&p, &ex, cfg)? {
                Ok(r) => Some(r),
                Err(msg) => {
                    notes.push(msg);
                    None
                }
            }
        };
        if ex.data.dim > 0 && !ex.reliable {
            notes.push("extracted data are a windowed compression (window too small to close the sector)".into());
        }
        sectors.push(SectorReport {
            a,
            window_dim: dim.dim,
            wandering_dim: ex.data.dim,
            data: ex.data,
            extraction_residual: ex.residual,
            reliable: ex.reliable,
            converged: ex.converged && dim.converged,
            reconstruction_residual,
            notes,
        });
    }
    let (completeness_residual, orthogonality_residual, converged) = completeness_check(&p, &subsets, cfg)?;
    let converged = converged && sectors.iter().all(|s| s.converged);
    Ok(WoldReport { window: cfg.window, sectors, completeness_residual, orthogonality_residual, converged })
}

/// `max ‖Σ_A P_A x − x‖` and `max ‖P_B P_A x‖` over window basis vectors.
fn completeness_check(p: &Projector<'_>, subsets: &[IndexSet], cfg: &Config) -> Result<(f64, f64, bool)> {
    let mut completeness: f64 = 0.0;
    let mut orthogonality: f64 = 0.0;
    let mut converged = true;
    for key in p.tuple().window_basis(cfg.window) {
        let x = p.tuple().basis_vector(key);
        let mut sum = SupportedVector::zero(x.signature());
        for &a in subsets {
            let pa = p.sector(a, &x)?;
            converged &= pa.converged;
            sum = sum.add(&pa.vector)?;
            if pa.vector.is_zero() {
                continue;
            }
            for &b in subsets.iter().filter(|&&b| b != a) {
                let pb = p.sector(b, &pa.vector)?;
                converged &= pb.converged;
                if !pb.vector.is_zero() {
                    orthogonality = orthogonality.max(pb.vector.norm());
                }
            }
        }
        let d = sum.sub(&x)?;
        if !d.is_zero() {
            completeness = completeness.max(d.norm());
        }
    }
    Ok((completeness, orthogonality, converged))
}

/// How far an orthonormal family is from being a wandering basis for `A`:
/// the largest overlap `|⟨V^α b, V^β b'⟩ − δ|` over multi-exponents in `A`
/// up to `depth`, and the largest leak `‖(1 − P_L) V_j b‖` for `j ∉ A`.
pub fn wandering_defect(
    t: &IsometryTuple,
    a: IndexSet,
    basis: &[SupportedVector],
    depth: usize,
) -> Result<(f64, f64)> {
    let idx: Vec<usize> = a.iter().collect();
    let mut exps: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in &idx {
        exps = exps
            .into_iter()
            .flat_map(|e| {
                (0..=depth).map(move |k| {
                    let mut next = e.clone();
                    next.push(k);
                    next
                })
            })
            .collect();
    }
    let shifted = |alpha: &[usize], b: &SupportedVector| -> Result<SupportedVector> {
        let mut v = b.clone();
        for (r, &i) in idx.iter().enumerate().rev() {
            for _ in 0..alpha[r] {
                v = t.op(i).apply(&v)?;
            }
        }
        Ok(v)
    };
    let mut family = Vec::new();
    for alpha in &exps {
        for (m, b) in basis.iter().enumerate() {
            family.push(((alpha.clone(), m), shifted(alpha, b)?));
        }
    }
    let mut overlap: f64 = 0.0;
    for (p, (ka, va)) in family.iter().enumerate() {
        for (kb, vb) in &family[p..] {
            let want = if ka == kb { Scalar::one() } else { Scalar::zero() };
            let got = va.inner(vb);
            overlap = overlap.max((got - want).to_complex().norm());
        }
    }
    let mut leak: f64 = 0.0;
    for j in a.complement(t.n()).iter() {
        for b in basis {
            let y = t.op(j).apply(b)?;
            let mut back = SupportedVector::zero(y.signature());
            for c in basis {
                back = back.add(&c.scale(&c.inner(&y)))?;
            }
            let miss = y.sub(&back)?;
            if !miss.is_zero() {
                leak = leak.max(miss.norm());
            }
        }
    }
    Ok((overlap, leak))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::BasisKey;
    use crate::tuples::{bilateral_shift, tuple_direct_sum, unilateral_shift};

    fn e(t: &IsometryTuple, block: usize, k: i64) -> SupportedVector {
        t.basis_vector(BasisKey::new(block, vec![k], 0))
    }

    #[test]
    fn one_isometry_projections() {
        let cfg = Config::default();
        let s = unilateral_shift(1);
        let p = defect_projection_apply(0, &s, &e(&s, 0, 3), &cfg).unwrap();
        assert!(p.converged);
        assert_eq!(p.vector, e(&s, 0, 3));
        let u = unitary_projection_apply(0, &s, &e(&s, 0, 3), &cfg).unwrap();
        assert!(u.converged && u.vector.is_zero());

        let b = bilateral_shift();
        let p = defect_projection_apply(0, &b, &e(&b, 0, -2), &cfg).unwrap();
        assert!(p.converged && p.vector.is_zero());
        let u = unitary_projection_apply(0, &b, &e(&b, 0, 0), &cfg).unwrap();
        assert!(u.converged);
        assert_eq!(u.vector, e(&b, 0, 0));
    }

    #[test]
    fn blockwise_projections() {
        let cfg = Config::default();
        let t = tuple_direct_sum(&[unilateral_shift(1), bilateral_shift()]).unwrap();
        let x = e(&t, 0, 0).add(&e(&t, 1, 0)).unwrap();
        assert_eq!(defect_projection_apply(0, &t, &x, &cfg).unwrap().vector, e(&t, 0, 0));
        let x = e(&t, 0, 2).add(&e(&t, 1, 5)).unwrap();
        assert_eq!(unitary_projection_apply(0, &t, &x, &cfg).unwrap().vector, e(&t, 1, 5));
    }

    #[test]
    fn shift_wandering_space_is_kernel_of_adjoint() {
        let cfg = Config::default();
        let s = unilateral_shift(1);
        let wb = wandering_basis(IndexSet::full(1), &s, &cfg).unwrap();
        assert_eq!(wb.vectors, vec![e(&s, 0, 0)]);
        assert!(wandering_basis(IndexSet::empty(), &s, &cfg).unwrap().vectors.is_empty());
    }

    #[test]
    fn non_convergence_is_flagged() {
        let cfg = Config { k_max: 2, ..Config::default() };
        let s = unilateral_shift(1);
        let p = unitary_projection_apply(0, &s, &e(&s, 0, 5), &cfg).unwrap();
        assert!(!p.converged);
    }

    #[test]
    fn exact_normalization() {
        let s = unilateral_shift(1);
        let v = e(&s, 0, 0).add(&e(&s, 0, 1)).unwrap().scale(&Scalar::from_int(3));
        let mut gs = Orthonormalizer::new(1e-10);
        assert!(gs.push(&v).unwrap());
        let b = gs.into_basis();
        assert!(!b[0].is_exact() || b[0].norm_sqr() == 1.0);
        let w = e(&s, 0, 0).add(&e(&s, 0, 1)).unwrap().add(&e(&s, 0, 2)).unwrap().add(&e(&s, 0, 3)).unwrap();
        let mut gs = Orthonormalizer::new(1e-10);
        gs.push(&w).unwrap();
        assert!(gs.into_basis()[0].is_exact());
    }
}
