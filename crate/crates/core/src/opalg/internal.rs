use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::phase::Phase;
use crate::scalar::Scalar;

/// Dense row-major matrix of [`Scalar`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl ScalarMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ScalarMatrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = ScalarMatrix::zeros(d, d);
        for i in 0..d {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        ScalarMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_complex(m: &DMatrix<Complex64>) -> Self {
        let mut out = ScalarMatrix::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.set(i, j, Scalar::Float(m[(i, j)]));
            }
        }
        out
    }

    pub fn diagonal(entries: Vec<Scalar>) -> Self {
        let d = entries.len();
        let mut m = ScalarMatrix::zeros(d, d);
        for (i, e) in entries.into_iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_exact(&self) -> bool {
        self.data.iter().all(Scalar::is_exact)
    }

    pub fn mul(&self, other: &ScalarMatrix) -> ScalarMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = ScalarMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    let prev = std::mem::take(&mut out.data[idx]);
                    out.data[idx] = prev + a * b;
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> ScalarMatrix {
        let mut out = ScalarMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> ScalarMatrix {
        ScalarMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| c * x).collect() }
    }

    pub fn sub(&self, other: &ScalarMatrix) -> ScalarMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ScalarMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(Scalar::norm_sqr).sum::<f64>().sqrt()
    }

    /// Frobenius norm, reported as exactly 0 when every entry is exactly zero.
    pub fn residual_norm(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.norm()
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_complex())
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).clone()).collect()).collect()
    }
}

impl fmt::Display for ScalarMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Operator on the internal factor `ℂ^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum InternalOperator {
    Identity,
    /// `e_m ↦ phases[m] · e_{perm[m]}`; unitary by construction.
    GeneralizedPermutation { perm: Vec<usize>, phases: Vec<Phase> },
    Dense(ScalarMatrix),
}

impl InternalOperator {
    pub fn generalized_permutation(perm: Vec<usize>, phases: Vec<Phase>) -> Option<Self> {
        let d = perm.len();
        if phases.len() != d {
            return None;
        }
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || seen[p] {
                return None;
            }
            seen[p] = true;
        }
        Some(InternalOperator::GeneralizedPermutation { perm, phases })
    }

    /// `diag(phases)`.
    pub fn diagonal(phases: Vec<Phase>) -> Self {
        InternalOperator::GeneralizedPermutation { perm: (0..phases.len()).collect(), phases }
    }

    /// Cyclic shift `e_m ↦ e_{m+1 mod d}`.
    pub fn cyclic_shift(d: usize) -> Self {
        InternalOperator::GeneralizedPermutation {
            perm: (0..d).map(|m| (m + 1) % d).collect(),
            phases: vec![Phase::one(); d],
        }
    }

    /// Clock `diag(ζ^m)`.
    pub fn clock(d: usize, zeta: Phase) -> Self {
        InternalOperator::diagonal((0..d).map(|m| zeta.pow(m as i64)).collect())
    }

    pub fn scalar_phase(d: usize, p: Phase) -> Self {
        InternalOperator::diagonal(vec![p; d])
    }

    pub fn is_identity(&self) -> bool {
        match self {
            InternalOperator::Identity => true,
            InternalOperator::GeneralizedPermutation { perm, phases } => {
                perm.iter().enumerate().all(|(m, &p)| m == p) && phases.iter().all(Phase::is_one)
            }
            InternalOperator::Dense(m) => *m == ScalarMatrix::identity(m.rows()),
        }
    }

    /// Image of `e_m` as `(row, coefficient)` pairs.
    pub fn column(&self, m: usize) -> Vec<(usize, Scalar)> {
        match self {
            InternalOperator::Identity => vec![(m, Scalar::one())],
            InternalOperator::GeneralizedPermutation { perm, phases } => {
                vec![(perm[m], Scalar::from_phase(phases[m]))]
            }
            InternalOperator::Dense(a) => (0..a.rows())
                .filter(|&i| !a.get(i, m).is_zero())
                .map(|i| (i, a.get(i, m).clone()))
                .collect(),
        }
    }

    pub fn to_matrix(&self, d: usize) -> ScalarMatrix {
        match self {
            InternalOperator::Identity => ScalarMatrix::identity(d),
            InternalOperator::GeneralizedPermutation { perm, phases } => {
                let mut out = ScalarMatrix::zeros(d, d);
                for m in 0..d {
                    out.set(perm[m], m, Scalar::from_phase(phases[m]));
                }
                out
            }
            InternalOperator::Dense(a) => a.clone(),
        }
    }

    /// `self ∘ f`.
    pub fn compose(&self, f: &InternalOperator, d: usize) -> InternalOperator {
        use InternalOperator::*;
        match (self, f) {
            (Identity, x) | (x, Identity) => x.clone(),
            (
                GeneralizedPermutation { perm: pg, phases: wg },
                GeneralizedPermutation { perm: pf, phases: wf },
            ) => GeneralizedPermutation {
                perm: pf.iter().map(|&k| pg[k]).collect(),
                phases: (0..pf.len()).map(|m| wf[m] * wg[pf[m]]).collect(),
            },
            (g, f) => Dense(g.to_matrix(d).mul(&f.to_matrix(d))),
        }
    }

    pub fn adjoint(&self) -> InternalOperator {
        match self {
            InternalOperator::Identity => InternalOperator::Identity,
            InternalOperator::GeneralizedPermutation { perm, phases } => {
                let d = perm.len();
                let mut inv = vec![0; d];
                let mut ph = vec![Phase::one(); d];
                for m in 0..d {
                    inv[perm[m]] = m;
                    ph[perm[m]] = phases[m].conj();
                }
                InternalOperator::GeneralizedPermutation { perm: inv, phases: ph }
            }
            InternalOperator::Dense(a) => InternalOperator::Dense(a.adjoint()),
        }
    }

    /// Frobenius norm of `U*U − 1`; exactly 0 for generalized permutations.
    pub fn unitarity_defect(&self, d: usize) -> f64 {
        match self {
            InternalOperator::Identity | InternalOperator::GeneralizedPermutation { .. } => 0.0,
            InternalOperator::Dense(a) => {
                if a.rows() != d || a.cols() != d {
                    return f64::INFINITY;
                }
                a.adjoint().mul(a).sub(&ScalarMatrix::identity(d)).residual_norm()
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        match self {
            InternalOperator::Identity => true,
            InternalOperator::GeneralizedPermutation { phases, .. } => phases.iter().all(Phase::is_exact),
            InternalOperator::Dense(a) => a.is_exact(),
        }
    }

    pub fn dim_hint(&self) -> Option<usize> {
        match self {
            InternalOperator::Identity => None,
            InternalOperator::GeneralizedPermutation { perm, .. } => Some(perm.len()),
            InternalOperator::Dense(a) => Some(a.rows()),
        }
    }
}
