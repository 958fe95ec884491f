#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use wold_core::symalg::{verify_identity, FormalSum, Letter};
use wold_core::{Phase, StructureConstants};

pub fn random_phase(rng: &mut ChaCha8Rng, max_den: i64) -> Phase {
    let den = rng.gen_range(1..=max_den);
    Phase::turns(rng.gen_range(0..den), den)
}

pub fn random_constants(rng: &mut ChaCha8Rng, n: usize, max_den: i64) -> StructureConstants {
    let mut upper = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            upper.push((i, j, random_phase(rng, max_den)));
        }
    }
    StructureConstants::new(n, &upper).unwrap()
}

pub fn v(n: usize, i: usize) -> FormalSum {
    FormalSum::letter(n, Letter::v(i))
}

pub fn vs(n: usize, i: usize) -> FormalSum {
    FormalSum::letter(n, Letter::star(i))
}

pub fn c(n: usize, p: Phase) -> FormalSum {
    FormalSum::scalar(n, p.into())
}

/// `V_i^k (1 − V_i V_i*) V_i^{*k}`.
pub fn shifted_defect(n: usize, i: usize, k: u32, zc: &StructureConstants) -> FormalSum {
    FormalSum::product(n, [&v(n, i).pow(k, zc), &FormalSum::defect(n, i), &vs(n, i).pow(k, zc)], zc)
}

fn subsets_up_to(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for i in 0..n {
        let more: Vec<Vec<usize>> =
            out.iter().filter(|s| s.len() < size).map(|s| s.iter().copied().chain([i]).collect()).collect();
        out.extend(more);
    }
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (p, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(p);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

fn exponent_tuples(len: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out.into_iter().flat_map(|e| (0..=max).map(move |k| [e.clone(), vec![k]].concat())).collect();
    }
    out
}

/// Checks the implied relations, the range and defect commutation rules for `k ≤ k_max`
/// and both factor-moving identities for ordered index tuples of size
/// `≤ max_set` with exponents `≤ max_exp`. Returns the failing instances.
pub fn symbolic_suite(zc: &StructureConstants, k_max: u32, max_set: usize, max_exp: u32) -> Vec<String> {
    let n = zc.n();
    let mut failures = Vec::new();
    let mut check = |name: String, lhs: FormalSum, rhs: FormalSum| {
        if !verify_identity(&lhs, &rhs) {
            failures.push(name);
        }
    };
    for i in 0..n {
        check(format!("V{}* V{} = 1", i + 1, i + 1), vs(n, i).mul(&v(n, i), zc), FormalSum::one(n));
        for j in 0..n {
            if i == j {
                continue;
            }
            let z = zc.z(i, j);
            check(
                format!("V{0}* V{1} = conj(z) V{1} V{0}*", i + 1, j + 1),
                vs(n, i).mul(&v(n, j), zc),
                FormalSum::product(n, [&c(n, z.conj()), &v(n, j), &vs(n, i)], zc),
            );
            check(
                format!("V{0} V{1} = z V{1} V{0}", i + 1, j + 1),
                v(n, i).mul(&v(n, j), zc),
                FormalSum::product(n, [&c(n, z), &v(n, j), &v(n, i)], zc),
            );
            check(
                format!("V{1}* V{0} = z V{0} V{1}*", i + 1, j + 1),
                vs(n, j).mul(&v(n, i), zc),
                FormalSum::product(n, [&c(n, z), &v(n, i), &vs(n, j)], zc),
            );
            check(
                format!("V{1}* V{0}* = conj(z) V{0}* V{1}*", i + 1, j + 1),
                vs(n, j).mul(&vs(n, i), zc),
                FormalSum::product(n, [&c(n, z.conj()), &vs(n, i), &vs(n, j)], zc),
            );
            for k in 0..=k_max {
                let range = FormalSum::range_projection(n, j, k);
                let defect = shifted_defect(n, j, k, zc);
                for (label, x) in [("V", v(n, i)), ("V*", vs(n, i))] {
                    check(
                        format!("{label}{} commutes with V{}^{k} V{}*^{k}", i + 1, j + 1, j + 1),
                        x.mul(&range, zc),
                        range.mul(&x, zc),
                    );
                    check(
                        format!("{label}{} commutes with shifted defect {} at depth {k}", i + 1, j + 1),
                        x.mul(&defect, zc),
                        defect.mul(&x, zc),
                    );
                }
            }
        }
    }
    for set in subsets_up_to(n, max_set) {
        for order in permutations(&set) {
            for ks in exponent_tuples(order.len(), max_exp) {
                let pairs: Vec<(usize, u32)> = order.iter().copied().zip(ks.iter().copied()).collect();
                let ups = FormalSum::product(n, &pairs.iter().map(|&(i, k)| v(n, i).pow(k, zc)).collect::<Vec<_>>(), zc);
                let downs =
                    FormalSum::product(n, &pairs.iter().rev().map(|&(i, k)| vs(n, i).pow(k, zc)).collect::<Vec<_>>(), zc);
                let defects =
                    FormalSum::product(n, &pairs.iter().map(|&(i, _)| FormalSum::defect(n, i)).collect::<Vec<_>>(), zc);
                let lhs1 = FormalSum::product(
                    n,
                    &pairs.iter().map(|&(i, k)| shifted_defect(n, i, k, zc)).collect::<Vec<_>>(),
                    zc,
                );
                check(format!("moving factors (defects) {pairs:?}"), lhs1, FormalSum::product(n, [&ups, &defects, &downs], zc));
                let lhs2 = FormalSum::product(
                    n,
                    &pairs.iter().map(|&(i, k)| FormalSum::range_projection(n, i, k)).collect::<Vec<_>>(),
                    zc,
                );
                check(format!("moving factors (ranges) {pairs:?}"), lhs2, ups.mul(&downs, zc));
            }
        }
    }
    failures
}
