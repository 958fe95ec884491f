mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wold_core::classify::{equivalence_verdict, intertwiner_space, irreducibility_test, witness_residual, Verdict};
use wold_core::opalg::{BasisKey, StructuredOperator, SupportedVector};
use wold_core::symalg::{reduce_word, reduce_word_from_right, verify_identity, FormalSum, Letter, Monomial};
use wold_core::tuples::{
    make_clock_shift_data, make_standard_torus_tuple, make_standard_tuple, realize_monomial, scalar_data,
    tuple_direct_sum, IsometryTuple, WanderingData,
};
use wold_core::wold::wold_decompose;
use wold_core::{Config, IndexSet, Phase, Scalar, StructureConstants};

fn phase() -> impl Strategy<Value = Phase> {
    (1i64..=12).prop_flat_map(|q| (0..q).prop_map(move |p| Phase::turns(p, q)))
}

fn constants(n: usize) -> impl Strategy<Value = StructureConstants> {
    proptest::collection::vec(phase(), n * n.saturating_sub(1) / 2).prop_map(move |ps| {
        let mut it = ps.into_iter();
        let mut upper = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                upper.push((i, j, it.next().unwrap()));
            }
        }
        StructureConstants::new(n, &upper).unwrap()
    })
}

fn word(n: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    proptest::collection::vec((0..n, any::<bool>()), 0..=max_len)
        .prop_map(|ls| ls.into_iter().map(|(i, s)| if s { Letter::star(i) } else { Letter::v(i) }).collect())
}

fn monomial(n: usize) -> impl Strategy<Value = Monomial> {
    (proptest::collection::vec((0u32..=2, 0u32..=2), n), phase()).prop_map(|(exps, phase)| Monomial { phase, exps })
}

/// A standard tuple at the full index set, with unit wandering space.
fn pure_tuple(zc: &StructureConstants) -> IsometryTuple {
    let data = WanderingData::new(zc.clone(), IndexSet::full(zc.n()), 1, vec![]).unwrap();
    make_standard_tuple(zc, &data).unwrap()
}

/// Two-generator tuple with a pure and a unitary direction, clock–shift
/// wandering data when the constant allows it.
fn mixed_tuple(zc: &StructureConstants) -> IsometryTuple {
    let a = IndexSet::from_indices([0]);
    make_standard_torus_tuple(zc, a).unwrap()
}

fn vector(t: &IsometryTuple, k: usize, coeffs: &[(usize, i64, Phase)]) -> SupportedVector {
    let keys = t.window_basis(k);
    SupportedVector::from_entries(
        t.signature(),
        coeffs.iter().map(|&(p, c, ph)| (keys[p % keys.len()].clone(), Scalar::from_int(c) * ph)),
    )
}

fn coeffs() -> impl Strategy<Value = Vec<(usize, i64, Phase)>> {
    proptest::collection::vec((0usize..64, -3i64..=3, phase()), 1..6)
}

fn thresholds_valid(op: &StructuredOperator) -> bool {
    op.terms().iter().all(|t| {
        let block = &op.signature().blocks[t.block];
        t.factors.iter().zip(&block.coords).all(|(f, &kind)| f.is_valid(kind))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phase_mul_matches_complex(p in phase(), q in phase()) {
        let diff = p.mul(q).as_complex() - p.as_complex() * q.as_complex();
        prop_assert!(diff.norm() < 1e-12);
    }

    #[test]
    fn phase_pow_is_additive(p in phase(), a in -20i64..20, b in -20i64..20) {
        prop_assert_eq!(p.pow(a + b), p.pow(a).mul(p.pow(b)));
    }

    #[test]
    fn structure_constants_are_hermitian(zc in (1usize..=4).prop_flat_map(constants)) {
        for i in 0..zc.n() {
            prop_assert!(zc.z(i, i).is_one());
            for j in 0..zc.n() {
                prop_assert_eq!(zc.z(j, i), zc.z(i, j).conj());
            }
        }
    }

    #[test]
    fn reduction_is_confluent(
        (zc, w) in (1usize..=4).prop_flat_map(|n| (constants(n), word(n, 10)))
    ) {
        let n = zc.n();
        prop_assert_eq!(reduce_word(&w, n, &zc), reduce_word_from_right(&w, n, &zc));
    }

    #[test]
    fn adjoint_reverses_words(
        (zc, w) in (1usize..=3).prop_flat_map(|n| (constants(n), word(n, 8)))
    ) {
        let n = zc.n();
        let rev: Vec<Letter> = w.iter().rev().map(|l| l.adjoint()).collect();
        prop_assert_eq!(reduce_word(&w, n, &zc).adjoint(&zc), reduce_word(&rev, n, &zc));
    }

    #[test]
    fn realization_is_multiplicative(
        (zc, m1, m2) in (1usize..=3).prop_flat_map(|n| (constants(n), monomial(n), monomial(n)))
    ) {
        let t = pure_tuple(&zc);
        let product = realize_monomial(&t, &m1.mul(&m2, &zc)).unwrap();
        let composed = realize_monomial(&t, &m1).unwrap().compose(&realize_monomial(&t, &m2).unwrap()).unwrap();
        let r = product.equal_on_window(&composed, 3).unwrap();
        prop_assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn realization_on_mixed_tuple_is_multiplicative(zc in constants(2), m1 in monomial(2), m2 in monomial(2)) {
        let t = mixed_tuple(&zc);
        let product = realize_monomial(&t, &m1.mul(&m2, &zc)).unwrap();
        let composed = realize_monomial(&t, &m1).unwrap().compose(&realize_monomial(&t, &m2).unwrap()).unwrap();
        prop_assert_eq!(product.equal_on_window(&composed, 3).unwrap().residual, 0.0);
    }

    #[test]
    fn adjoint_is_exact(zc in constants(2), m in monomial(2), x in coeffs(), y in coeffs()) {
        let t = mixed_tuple(&zc);
        let f = realize_monomial(&t, &m).unwrap();
        let (x, y) = (vector(&t, 3, &x), vector(&t, 3, &y));
        let lhs = f.apply(&x).unwrap().inner(&y);
        let rhs = x.inner(&f.adjoint().apply(&y).unwrap());
        prop_assert!((lhs - rhs).is_zero());
    }

    #[test]
    fn compose_matches_sequential_apply(zc in constants(2), m1 in monomial(2), m2 in monomial(2), x in coeffs()) {
        let t = mixed_tuple(&zc);
        let f = realize_monomial(&t, &m1).unwrap().add(&realize_monomial(&t, &m2).unwrap()).unwrap();
        let g = realize_monomial(&t, &m2).unwrap();
        let x = vector(&t, 3, &x);
        let once = g.compose(&f).unwrap().apply(&x).unwrap();
        let twice = g.apply(&f.apply(&x).unwrap()).unwrap();
        prop_assert!(once.sub(&twice).unwrap().is_zero());
        prop_assert!(once.is_exact());
    }

    #[test]
    fn thresholds_stay_valid(zc in constants(3), m1 in monomial(3), m2 in monomial(3)) {
        let t = pure_tuple(&zc);
        let f = realize_monomial(&t, &m1).unwrap();
        let g = realize_monomial(&t, &m2).unwrap();
        prop_assert!(thresholds_valid(&f));
        prop_assert!(thresholds_valid(&f.adjoint()));
        prop_assert!(thresholds_valid(&g.compose(&f).unwrap()));
        prop_assert!(thresholds_valid(&f.adjoint().compose(&g).unwrap()));
    }

    #[test]
    fn identities_survive_symbolic_rearrangement(zc in constants(3), ks in proptest::collection::vec(0u32..=3, 3)) {
        let n = 3;
        let ups = FormalSum::product(n, &(0..n).map(|i| common::v(n, i).pow(ks[i], &zc)).collect::<Vec<_>>(), &zc);
        let downs = FormalSum::product(n, &(0..n).rev().map(|i| common::vs(n, i).pow(ks[i], &zc)).collect::<Vec<_>>(), &zc);
        let ranges = FormalSum::product(
            n,
            &(0..n).map(|i| FormalSum::range_projection(n, i, ks[i])).collect::<Vec<_>>(),
            &zc,
        );
        prop_assert!(verify_identity(&ranges, &ups.mul(&downs, &zc)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sectors_are_complete_and_orthogonal(
        zc in constants(2),
        picks in proptest::sample::subsequence(vec![0u32, 1, 2, 3], 1..=3),
        mults in proptest::collection::vec(1usize..=2, 3),
    ) {
        let parts: Vec<IsometryTuple> = picks
            .iter()
            .zip(&mults)
            .map(|(&bits, &d)| {
                let a = IndexSet::from_bits(bits);
                match a.complement(2).len() {
                    0 => make_standard_tuple(&zc, &WanderingData::new(zc.clone(), a, d, vec![]).unwrap()).unwrap(),
                    1 => make_standard_tuple(&zc, &make_clock_shift_data(&zc, a, d).unwrap()).unwrap(),
                    _ => make_standard_torus_tuple(&zc, a).unwrap(),
                }
            })
            .collect();
        let t = tuple_direct_sum(&parts).unwrap();
        let cfg = Config { window: 4, ..Config::default() };
        let report = wold_decompose(&t, &cfg).unwrap();
        prop_assert!(report.converged);
        prop_assert_eq!(report.completeness_residual, 0.0);
        prop_assert_eq!(report.orthogonality_residual, 0.0);
        for (&bits, &d) in picks.iter().zip(&mults) {
            let a = IndexSet::from_bits(bits);
            if a.complement(2).len() < 2 {
                prop_assert_eq!(report.sector(a).wandering_dim, d);
            }
        }
    }

    #[test]
    fn schur_consistency(seed in any::<u64>(), d in 1usize..=4, p in 1i64..=4) {
        let zc = StructureConstants::new(2, &[(0, 1, Phase::turns(1, p))]).unwrap();
        let data = match make_clock_shift_data(&zc, IndexSet::empty(), d) {
            Ok(data) => data,
            Err(_) => scalar_data(&StructureConstants::commuting(2), IndexSet::empty(), &[Phase::one(), Phase::one()]).unwrap(),
        };
        let cfg = Config { seed, ..Config::default() };
        let irreducible = irreducibility_test(&data, &cfg).unwrap();
        let space = intertwiner_space(&data, &data, &cfg).unwrap();
        prop_assert_eq!(irreducible, space.len() == 1);
    }

    #[test]
    fn witnesses_are_sound(seed in any::<u64>(), d in prop_oneof![Just(2usize), Just(4)]) {
        let zc = StructureConstants::new(2, &[(0, 1, Phase::turns(1, 2))]).unwrap();
        let data = make_clock_shift_data(&zc, IndexSet::empty(), d).unwrap();
        let cfg = Config { seed, ..Config::default() };
        let u: Vec<_> = data.matrices().iter().map(|m| m.to_complex()).collect();
        match equivalence_verdict(&data, &data, &cfg).unwrap() {
            Verdict::Equivalent { witness, residual } => {
                prop_assert!(residual < 1e-9);
                prop_assert!(witness_residual(&witness, &u, &u) < 1e-9);
                let gram = witness.adjoint() * &witness;
                let id = nalgebra::DMatrix::identity(d, d);
                prop_assert!((gram - id).norm() < 1e-9);
            }
            other => prop_assert!(false, "verdict {}", other.label()),
        }
    }
}

#[test]
fn random_constants_pass_symbolic_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=3 {
        let zc = common::random_constants(&mut rng, n, 12);
        let failures = common::symbolic_suite(&zc, 3, n, 3);
        assert!(failures.is_empty(), "{failures:?}");
    }
}

#[test]
fn window_basis_is_lexicographic() {
    let zc = StructureConstants::commuting(2);
    let keys = pure_tuple(&zc).window_basis(2);
    let expect: Vec<BasisKey> =
        [[0, 0], [0, 1], [1, 0], [1, 1]].iter().map(|k| BasisKey::new(0, k.to_vec(), 0)).collect();
    assert_eq!(keys, expect);
}
