use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::Result;
use crate::scalar::Scalar;

use super::signature::{BasisKey, Signature};

/// A finitely supported vector. Zero coefficients are never stored.
#[derive(Debug, Clone)]
pub struct SupportedVector {
    sig: Signature,
    entries: BTreeMap<BasisKey, Scalar>,
}

impl SupportedVector {
    pub fn zero(sig: &Signature) -> Self {
        SupportedVector { sig: sig.clone(), entries: BTreeMap::new() }
    }

    pub fn basis(sig: &Signature, key: BasisKey) -> Self {
        assert!(sig.contains(&key), "basis key {key} outside {sig}");
        let mut v = SupportedVector::zero(sig);
        v.entries.insert(key, Scalar::one());
        v
    }

    pub fn from_entries<I: IntoIterator<Item = (BasisKey, Scalar)>>(sig: &Signature, entries: I) -> Self {
        let mut v = SupportedVector::zero(sig);
        for (k, c) in entries {
            v.add_entry(k, c);
        }
        v
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn add_entry(&mut self, key: BasisKey, c: Scalar) {
        debug_assert!(self.sig.contains(&key), "basis key {key} outside {}", self.sig);
        if c.is_zero() {
            return;
        }
        match self.entries.get_mut(&key) {
            Some(slot) => {
                *slot += c;
                if slot.is_zero() {
                    self.entries.remove(&key);
                }
            }
            None => {
                self.entries.insert(key, c);
            }
        }
    }

    pub fn get(&self, key: &BasisKey) -> Scalar {
        self.entries.get(key).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&BasisKey, &Scalar)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.entries.values().all(Scalar::is_exact)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().map(Scalar::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &SupportedVector) -> Scalar {
        let (small, large, flip) =
            if self.len() <= other.len() { (self, other, false) } else { (other, self, true) };
        let mut acc = Scalar::zero();
        for (k, a) in &small.entries {
            if let Some(b) = large.entries.get(k) {
                acc += if flip { &b.conj() * a } else { &a.conj() * b };
            }
        }
        acc
    }

    pub fn add(&self, other: &SupportedVector) -> Result<SupportedVector> {
        self.sig.ensure_same(&other.sig)?;
        let mut out = self.clone();
        for (k, c) in &other.entries {
            out.add_entry(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SupportedVector) -> Result<SupportedVector> {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> SupportedVector {
        SupportedVector::from_entries(&self.sig, self.entries.iter().map(|(k, x)| (k.clone(), c * x)))
    }

    /// Largest absolute lattice index in the support.
    pub fn reach(&self) -> i64 {
        self.entries.keys().flat_map(|k| k.index.iter().map(|i| i.abs())).max().unwrap_or(0)
    }

    /// Coordinates against an ordered basis; entries outside it are dropped.
    pub fn coordinates(&self, basis: &[BasisKey]) -> Vec<Complex64> {
        basis.iter().map(|k| self.get(k).to_complex()).collect()
    }

    /// Same entries viewed in another signature with identical keys.
    pub fn with_signature(&self, sig: &Signature) -> SupportedVector {
        SupportedVector::from_entries(sig, self.entries.iter().map(|(k, c)| (k.clone(), c.clone())))
    }
}

impl PartialEq for SupportedVector {
    fn eq(&self, other: &SupportedVector) -> bool {
        self.sig == other.sig && self.sub(other).is_ok_and(|d| d.is_zero())
    }
}

impl fmt::Display for SupportedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.entries.iter().map(|(k, c)| format!("({c}) {k}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::LatticeSignature;
    use crate::phase::Phase;

    fn sig() -> Signature {
        Signature::single(LatticeSignature::half_lines(1, 1))
    }

    fn e(k: i64) -> BasisKey {
        BasisKey::new(0, vec![k], 0)
    }

    #[test]
    fn cancellation_prunes() {
        let s = sig();
        let x = SupportedVector::basis(&s, e(2));
        assert!(x.sub(&x).unwrap().is_zero());
    }

    #[test]
    fn inner_product_is_sesquilinear() {
        let s = sig();
        let i = Scalar::from_phase(Phase::turns(1, 4));
        let x = SupportedVector::basis(&s, e(0)).scale(&i);
        let y = SupportedVector::basis(&s, e(0));
        assert_eq!(x.inner(&y), i.conj());
        assert_eq!(y.inner(&x), i);
        assert_eq!(x.norm(), 1.0);
    }
}
