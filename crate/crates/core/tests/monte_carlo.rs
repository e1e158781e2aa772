//! Sampled laws of the truncated character against the exact laws.

use num_traits::ToPrimitive;

use qpi_core::isometry_numeric::{monte_carlo_law, real_words, IsometryClass};
use qpi_core::measures::{mu_formula, sign_mixing, RationalMeasure};

fn assert_frequencies_match(class: IsometryClass, exact: &RationalMeasure, n: usize, k: usize, l: usize) {
    let samples = 20_000;
    let law = monte_carlo_law(class, n, k, l, samples, 11, &real_words(2)).unwrap();
    let freq = law.integer_frequencies();
    let atoms = exact.integer_atoms().unwrap();
    for (p, w) in &atoms {
        let p = p.to_i64().unwrap();
        let expect = w.to_f64().unwrap();
        let got = *freq.get(&p).unwrap_or(&0) as f64 / samples as f64;
        let se = (expect * (1.0 - expect) / samples as f64).sqrt();
        assert!((got - expect).abs() <= 4.0 * se + 1e-12, "{class:?} atom {p}: {got} vs {expect}");
    }
    let total: usize = freq.values().sum();
    let covered: usize = atoms.iter().map(|(p, _)| *freq.get(&p.to_i64().unwrap()).unwrap_or(&0)).sum();
    assert_eq!(total, covered, "{class:?}: sampled values outside the support");
}

#[test]
fn partial_permutations_follow_the_exact_law() {
    assert_frequencies_match(IsometryClass::S, &mu_formula(4, 2, 3).unwrap(), 4, 2, 3);
}

#[test]
fn signed_partial_permutations_follow_sign_mixing() {
    assert_frequencies_match(IsometryClass::H, &sign_mixing(4, 3, 3).unwrap(), 4, 3, 3);
}
