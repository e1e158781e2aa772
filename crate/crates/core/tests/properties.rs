use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qpi_core::exact::rat;
use qpi_core::isometry_numeric::{compose, sample_with, IsometryClass, PartialIsometryMatrix};
use qpi_core::measures::{mu_formula, RationalMeasure};
use qpi_core::partial_maps::{sample_rank, SignedPartialPermutation};
use qpi_core::partitions::{mobius, Lattice, SetPartition};

fn signed(n: usize, x: u32, seed: u64) -> SignedPartialPermutation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = (seed as usize) % (n + 1);
    sample_rank(n, k, x, &mut rng).unwrap()
}

fn labels(n: usize) -> impl Strategy<Value = SetPartition> {
    prop::collection::vec(0..n, n).prop_map(|l| SetPartition::from_labels(&l))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_associative(n in 0usize..7, x in 1u32..4, a: u64, b: u64, c: u64) {
        let (f, g, h) = (signed(n, x, a), signed(n, x, b), signed(n, x, c));
        prop_assert_eq!(f.compose(&g).unwrap().compose(&h).unwrap(), f.compose(&g.compose(&h).unwrap()).unwrap());
    }

    #[test]
    fn inverse_is_a_generalized_inverse(n in 0usize..7, x in 1u32..4, a: u64) {
        let f = signed(n, x, a);
        let g = f.inverse();
        prop_assert_eq!(f.compose(&g).unwrap().compose(&f).unwrap(), f.clone());
        prop_assert_eq!(g.inverse(), f.clone());
        prop_assert_eq!(f.compose(&g).unwrap().kappa(), f.kappa());
    }

    #[test]
    fn rank_never_grows(n in 0usize..7, a: u64, b: u64) {
        let (f, g) = (signed(n, 2, a), signed(n, 2, b));
        prop_assert!(f.compose(&g).unwrap().kappa() <= f.kappa().min(g.kappa()));
    }

    #[test]
    fn matrix_representation_is_multiplicative(n in 1usize..6, x in 1u32..5, a: u64, b: u64) {
        let (f, g) = (signed(n, x, a), signed(n, x, b));
        let fg = f.compose(&g).unwrap().to_matrix().unwrap();
        prop_assert_eq!(fg, f.to_matrix().unwrap().mul(&g.to_matrix().unwrap()));
    }

    #[test]
    fn characters_sum_fixed_phases(n in 1usize..7, a: u64) {
        let f = signed(n, 1, a);
        prop_assert_eq!(f.chi(n).as_scalar(), Some(BigInt::from(f.base().fixed_points(n))));
    }

    #[test]
    fn join_is_a_least_upper_bound(p in labels(6), q in labels(6), r in labels(6)) {
        let j = p.join(&q).unwrap();
        prop_assert!(p.refines(&j) && q.refines(&j));
        prop_assert_eq!(&j, &q.join(&p).unwrap());
        if p.refines(&r) && q.refines(&r) {
            prop_assert!(j.refines(&r));
        }
    }

    #[test]
    fn mobius_row_sums_vanish(p in labels(5)) {
        // Σ_{p ≤ q} μ(p, q) = 0 unless p is the top element
        let total: BigInt = qpi_core::partitions::all_partitions(5)
            .iter()
            .filter(|q| p.refines(q))
            .map(|q| mobius(&p, q, Lattice::P).unwrap())
            .sum();
        let expected = if p.num_blocks() == 1 { BigInt::one() } else { BigInt::zero() };
        prop_assert_eq!(total, expected);
    }

    #[test]
    fn kreweras_is_an_anti_isomorphism_on_sizes(p in labels(6)) {
        prop_assume!(p.is_noncrossing());
        let k = p.kreweras();
        prop_assert!(k.is_noncrossing());
        prop_assert_eq!(p.num_blocks() + k.num_blocks(), 7);
    }

    #[test]
    fn laws_are_probabilities_with_mean_kl_over_n_squared(n in 1usize..9, k in 0usize..9, l in 0usize..9) {
        prop_assume!(k <= n && l <= n);
        let m = mu_formula(n, k, l).unwrap();
        prop_assert!(m.is_probability());
        prop_assert_eq!(m.moment(1).unwrap(), rat((k * l) as i64, (n * n) as i64));
    }

    #[test]
    fn convolution_adds_means(a in 0i64..4, b in 0i64..4) {
        let x = RationalMeasure::dirac_int(1, a);
        let y = RationalMeasure::dirac_int(1, b);
        prop_assert_eq!(x.convolve(&y), RationalMeasure::dirac_int(1, a + b));
    }

    #[test]
    fn numeric_composition_stays_in_class(n in 2usize..7, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for class in [IsometryClass::O, IsometryClass::U, IsometryClass::H, IsometryClass::K] {
            let u = sample_with(class, n, n / 2, &mut rng).unwrap();
            let v = sample_with(class, n, n - 1, &mut rng).unwrap();
            let w = compose(&u, &v).unwrap();
            prop_assert!(w.residual() < 1e-10);
            prop_assert!(qpi_core::isometry_numeric::membership(&w, class, 1e-8).member);
            prop_assert!(w.rank() <= u.rank().min(v.rank()));
        }
    }

    #[test]
    fn composition_with_identity(n in 1usize..7, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = sample_with(IsometryClass::U, n, n / 2, &mut rng).unwrap();
        let id = PartialIsometryMatrix::identity(n);
        let w = compose(&id, &u).unwrap();
        prop_assert!((w.entries() - u.entries()).iter().all(|z| z.norm() < 1e-10));
    }
}
