use std::fmt;

use crate::phase::{Phase, StructureConstants};

/// A generator `V_i` or its adjoint. `index` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub index: usize,
    pub starred: bool,
}

impl Letter {
    pub fn v(index: usize) -> Self {
        Letter { index, starred: false }
    }

    pub fn star(index: usize) -> Self {
        Letter { index, starred: true }
    }

    pub fn adjoint(self) -> Self {
        Letter { index: self.index, starred: !self.starred }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V{}{}", self.index + 1, if self.starred { "*" } else { "" })
    }
}

/// `phase · V_1^{a_1}···V_n^{a_n} V_1^{*b_1}···V_n^{*b_n}`; `exps[i] = (a_i, b_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub phase: Phase,
    pub exps: Vec<(u32, u32)>,
}

impl Monomial {
    pub fn identity(n: usize) -> Self {
        Monomial { phase: Phase::one(), exps: vec![(0, 0); n] }
    }

    pub fn letter(n: usize, l: Letter) -> Self {
        let mut m = Monomial::identity(n);
        if l.starred {
            m.exps[l.index].1 = 1;
        } else {
            m.exps[l.index].0 = 1;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.exps.len()
    }

    pub fn is_identity_pattern(&self) -> bool {
        self.exps.iter().all(|&(a, b)| a == 0 && b == 0)
    }

    /// The normal-ordered word without its phase.
    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for (i, &(a, _)) in self.exps.iter().enumerate() {
            out.extend(std::iter::repeat_n(Letter::v(i), a as usize));
        }
        for (i, &(_, b)) in self.exps.iter().enumerate() {
            out.extend(std::iter::repeat_n(Letter::star(i), b as usize));
        }
        out
    }

    /// `self · l`, moving `l` leftwards into place.
    pub fn push_right(&mut self, l: Letter, zc: &StructureConstants) {
        let j = l.index;
        let n = self.n();
        let mut cost = Phase::one();
        if l.starred {
            // V_i* V_j* = z_ij V_j* V_i*
            for i in j + 1..n {
                cost = cost * zc.z(i, j).pow(self.exps[i].1 as i64);
            }
            self.exps[j].1 += 1;
        } else {
            // V_i* V_j = conj(z_ij) V_j V_i*
            for i in j + 1..n {
                cost = cost * zc.z(i, j).pow(-(self.exps[i].1 as i64));
            }
            if self.exps[j].1 > 0 {
                self.exps[j].1 -= 1;
            } else {
                for i in 0..j {
                    cost = cost * zc.z(i, j).pow(-(self.exps[i].1 as i64));
                }
                // V_i V_j = z_ij V_j V_i
                for i in j + 1..n {
                    cost = cost * zc.z(i, j).pow(self.exps[i].0 as i64);
                }
                self.exps[j].0 += 1;
            }
        }
        self.phase = self.phase * cost;
    }

    /// `l · self`, moving `l` rightwards into place.
    pub fn push_left(&mut self, l: Letter, zc: &StructureConstants) {
        let j = l.index;
        let n = self.n();
        let mut cost = Phase::one();
        if l.starred {
            // V_j* V_i = z_ij V_i V_j*
            for i in 0..j {
                cost = cost * zc.z(i, j).pow(self.exps[i].0 as i64);
            }
            if self.exps[j].0 > 0 {
                self.exps[j].0 -= 1;
            } else {
                for i in j + 1..n {
                    cost = cost * zc.z(i, j).pow(self.exps[i].0 as i64);
                }
                // V_j* V_i* = conj(z_ij) V_i* V_j*
                for i in 0..j {
                    cost = cost * zc.z(i, j).pow(-(self.exps[i].1 as i64));
                }
                self.exps[j].1 += 1;
            }
        } else {
            // V_j V_i = z_ji V_i V_j
            for i in 0..j {
                cost = cost * zc.z(j, i).pow(self.exps[i].0 as i64);
            }
            self.exps[j].0 += 1;
        }
        self.phase = self.phase * cost;
    }

    /// Canonical product `self · other`.
    pub fn mul(&self, other: &Monomial, zc: &StructureConstants) -> Monomial {
        let mut out = self.clone();
        for l in other.letters() {
            out.push_right(l, zc);
        }
        out.phase = out.phase * other.phase;
        out
    }

    /// Adjoint, re-canonicalized.
    pub fn adjoint(&self, zc: &StructureConstants) -> Monomial {
        let letters: Vec<Letter> = self.letters().into_iter().rev().map(Letter::adjoint).collect();
        let mut m = reduce_word(&letters, self.n(), zc);
        m.phase = m.phase * self.phase.conj();
        m
    }

    pub fn word_string(&self) -> String {
        let mut parts = Vec::new();
        for (i, &(a, _)) in self.exps.iter().enumerate() {
            match a {
                0 => {}
                1 => parts.push(format!("V{}", i + 1)),
                _ => parts.push(format!("V{}^{}", i + 1, a)),
            }
        }
        for (i, &(_, b)) in self.exps.iter().enumerate() {
            match b {
                0 => {}
                1 => parts.push(format!("V{}*", i + 1)),
                _ => parts.push(format!("V{}*^{}", i + 1, b)),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase.is_one() {
            write!(f, "{}", self.word_string())
        } else if self.is_identity_pattern() {
            write!(f, "{}", self.phase)
        } else {
            write!(f, "{} · {}", self.phase, self.word_string())
        }
    }
}

/// Reduces a word to its normal form, absorbing letters left to right.
pub fn reduce_word(letters: &[Letter], n: usize, zc: &StructureConstants) -> Monomial {
    let mut m = Monomial::identity(n);
    for &l in letters {
        m.push_right(l, zc);
    }
    m
}

/// Same normal form, absorbing letters right to left.
pub fn reduce_word_from_right(letters: &[Letter], n: usize, zc: &StructureConstants) -> Monomial {
    let mut m = Monomial::identity(n);
    for &l in letters.iter().rev() {
        m.push_left(l, zc);
    }
    m
}
