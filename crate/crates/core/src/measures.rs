//! Exact discrete laws on cyclotomic lattices, the truncated-character laws
//! `μ_k^l`, limit families and the classical/free cumulant comparison.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::exact::{binomial, factorial, format_rational, int, parse_rational, pow_rat};
use crate::partial_maps::{enumerate, rank_count, SignOrder};
use crate::partitions::{enumerate_partitions, mobius_to_top, Category, Color, ColoredWord, Lattice};

pub type Point = Cyclotomic<BigInt>;

/// Largest ground set accepted by [`mu_bruteforce`].
pub const BRUTEFORCE_MAX_N: usize = 8;
/// Largest rank slice accepted by [`mu_bruteforce`].
pub const BRUTEFORCE_MAX_SLICE: u64 = 20_000_000;

/// Constant the stored weights must be multiplied by.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normalization {
    Exact,
    Rational(BigRational),
    /// `e^{-r}`
    ExpNeg(BigRational),
}

impl Normalization {
    pub fn to_f64(&self) -> f64 {
        match self {
            Normalization::Exact => 1.0,
            Normalization::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Normalization::ExpNeg(r) => (-r.to_f64().unwrap_or(f64::NAN)).exp(),
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Normalization::Exact => Some(BigRational::one()),
            Normalization::Rational(r) => Some(r.clone()),
            Normalization::ExpNeg(r) if r.is_zero() => Some(BigRational::one()),
            Normalization::ExpNeg(_) => None,
        }
    }
}

/// Finitely supported signed measure on `Z[ζ_x]` with rational weights.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMeasure {
    order: u32,
    atoms: BTreeMap<Point, BigRational>,
    normalization: Normalization,
    /// Bound on the (normalized) mass dropped by truncation.
    tail_bound: Option<f64>,
    /// Bound on the dropped part of moments of order `n`, see
    /// [`RationalMeasure::moment_tail_bound`].
    truncation: Option<(BigRational, usize)>,
}

impl RationalMeasure {
    pub fn zero(order: u32) -> Self {
        RationalMeasure {
            order,
            atoms: BTreeMap::new(),
            normalization: Normalization::Exact,
            tail_bound: None,
            truncation: None,
        }
    }

    pub fn dirac(point: Point) -> Self {
        let mut m = Self::zero(point.order());
        m.atoms.insert(point, BigRational::one());
        m
    }

    /// `δ_p` for an integer `p` on the order-`x` lattice.
    pub fn dirac_int(order: u32, p: i64) -> Self {
        Self::dirac(Point::from_value(order, BigInt::from(p)))
    }

    pub fn from_atoms(order: u32, atoms: impl IntoIterator<Item = (Point, BigRational)>) -> Self {
        let mut m = Self::zero(order);
        for (p, w) in atoms {
            m.add_atom(p, w);
        }
        m
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn normalization(&self) -> &Normalization {
        &self.normalization
    }

    pub fn tail_bound(&self) -> Option<f64> {
        self.tail_bound
    }

    /// Stored (unnormalized) atoms.
    pub fn atoms(&self) -> &BTreeMap<Point, BigRational> {
        &self.atoms
    }

    pub fn weight(&self, p: &Point) -> BigRational {
        self.atoms.get(p).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn weight_int(&self, p: i64) -> BigRational {
        self.weight(&Point::from_value(self.order, BigInt::from(p)))
    }

    pub fn add_atom(&mut self, p: Point, w: BigRational) {
        assert_eq!(p.order(), self.order, "atom on the wrong lattice");
        if w.is_zero() {
            return;
        }
        let slot = self.atoms.entry(p.clone()).or_insert_with(BigRational::zero);
        *slot += w;
        if slot.is_zero() {
            self.atoms.remove(&p);
        }
    }

    /// `self += c·other`.
    pub fn add_scaled(&mut self, other: &RationalMeasure, c: &BigRational) {
        for (p, w) in &other.atoms {
            self.add_atom(p.clone(), w * c);
        }
    }

    pub fn convolve(&self, other: &RationalMeasure) -> RationalMeasure {
        assert_eq!(self.order, other.order, "convolution across lattices");
        let mut out = Self::zero(self.order);
        for (p, w) in &self.atoms {
            for (q, v) in &other.atoms {
                out.add_atom(p + q, w * v);
            }
        }
        out
    }

    pub fn convolution_power(&self, n: usize) -> RationalMeasure {
        let mut acc = Self::dirac(Point::zero(self.order));
        for _ in 0..n {
            acc = acc.convolve(self);
        }
        acc
    }

    /// Re-expresses atoms on the order-`m` lattice, `m` a multiple of `x`.
    pub fn lift(&self, m: u32) -> RationalMeasure {
        let mut out = self.clone();
        out.order = m;
        out.atoms = self.atoms.iter().map(|(p, w)| (p.lift(m), w.clone())).collect();
        out
    }

    /// Sum of stored weights.
    pub fn raw_mass(&self) -> BigRational {
        self.atoms.values().sum()
    }

    /// Exact probability measure: nonnegative weights summing to one.
    pub fn is_probability(&self) -> bool {
        self.normalization == Normalization::Exact
            && self.raw_mass().is_one()
            && self.atoms.values().all(|w| !w.is_negative())
    }

    pub fn is_signed(&self) -> bool {
        self.atoms.values().any(Signed::is_negative)
    }

    /// Atoms as `(integer point, weight)` when every point is an integer.
    pub fn integer_atoms(&self) -> Option<Vec<(BigInt, BigRational)>> {
        self.atoms
            .iter()
            .map(|(p, w)| p.as_scalar().map(|v| (v, w.clone())))
            .collect()
    }

    /// Normalized weights as floats.
    pub fn weights_f64(&self) -> BTreeMap<Point, f64> {
        let c = self.normalization.to_f64();
        self.atoms
            .iter()
            .map(|(p, w)| (p.clone(), w.to_f64().unwrap_or(f64::NAN) * c))
            .collect()
    }

    /// `Σ w·z^{#1}·z̄^{#*}` over stored weights, exactly in `Q(ζ_x)`.
    pub fn star_moment_unnormalized(&self, word: &ColoredWord) -> Cyclotomic<BigRational> {
        let a = word.count(Color::One) as u32;
        let b = word.count(Color::Star) as u32;
        let mut acc = Cyclotomic::<BigRational>::zero(self.order);
        for (p, w) in &self.atoms {
            let v = &p.pow(a) * &p.conj().pow(b);
            let v = v.map_coeffs(|c| BigRational::from_integer(c.clone()));
            acc = &acc + &v.scale(w);
        }
        acc
    }

    /// Exact *-moment; fails when the value is not rational or the
    /// normalization is transcendental.
    pub fn star_moment(&self, word: &ColoredWord) -> Result<BigRational> {
        let c = self.normalization.as_rational().ok_or_else(|| {
            Error::Parameter("moment of a law with transcendental normalization".into())
        })?;
        self.star_moment_unnormalized(word)
            .as_scalar()
            .map(|v| v * c)
            .ok_or_else(|| Error::Parameter(format!("moment {word} is not rational")))
    }

    /// Normalized *-moment in floating point.
    pub fn star_moment_f64(&self, word: &ColoredWord) -> Complex64 {
        let m = self.star_moment_unnormalized(word);
        m.to_complex() * self.normalization.to_f64()
    }

    pub fn moment(&self, n: usize) -> Result<BigRational> {
        self.star_moment(&ColoredWord::all_ones(n))
    }

    /// Upper bound for the moment of order `n` lost to truncation (zero for
    /// untruncated laws).
    pub fn moment_tail_bound(&self, n: usize) -> f64 {
        let Some((t, cutoff)) = &self.truncation else {
            return 0.0;
        };
        compound_poisson_moment_tail(t.to_f64().unwrap_or(f64::NAN), *cutoff, n)
    }

    /// Exact moments `1..=n_max` as a real moment sequence.
    pub fn moment_sequence(&self, n_max: usize, source: &str) -> Result<MomentSequence> {
        let moments = (1..=n_max).map(|n| self.moment(n)).collect::<Result<Vec<_>>>()?;
        Ok(MomentSequence::from_real(source, &moments))
    }
}

/// Total variation distance `½ Σ |a − b|` of the normalized weights.
pub fn tv_distance(a: &RationalMeasure, b: &RationalMeasure) -> Result<f64> {
    if a.order != b.order {
        return Err(Error::Parameter(format!(
            "measures on lattices of order {} and {}",
            a.order, b.order
        )));
    }
    let wa = a.weights_f64();
    let wb = b.weights_f64();
    let mut s = 0.0;
    for (p, w) in &wa {
        s += (w - wb.get(p).copied().unwrap_or(0.0)).abs();
    }
    for (p, w) in &wb {
        if !wa.contains_key(p) {
            s += w.abs();
        }
    }
    Ok(s / 2.0)
}

fn check_nkl(n: usize, k: usize, l: usize) -> Result<()> {
    if k > n || l > n {
        return Err(Error::Parameter(format!("need 0 ≤ k,l ≤ N, got N={n} k={k} l={l}")));
    }
    Ok(())
}

/// `(δ₁ − δ₀)^{*q}` on the integers.
fn difference_power(q: usize) -> RationalMeasure {
    let mut m = RationalMeasure::zero(1);
    for r in 0..=q {
        let c = BigRational::from_integer(binomial(q as u64, r as u64));
        m.add_atom(Point::from_value(1, BigInt::from((q - r) as i64)), if r % 2 == 0 { c } else { -c });
    }
    m
}

/// Closed form `μ_k^l = Σ_q C(k,q)C(l,q)C(N,q)^{-2}(δ₁ − δ₀)^{*q}/q!`.
pub fn mu_formula(n: usize, k: usize, l: usize) -> Result<RationalMeasure> {
    check_nkl(n, k, l)?;
    let mut out = RationalMeasure::zero(1);
    for q in 0..=k.min(l) {
        let (n, k, l, q64) = (n as u64, k as u64, l as u64, q as u64);
        let cn = binomial(n, q64);
        let c = BigRational::new(
            binomial(k, q64) * binomial(l, q64),
            &cn * &cn * factorial(q64),
        );
        out.add_scaled(&difference_power(q), &c);
    }
    Ok(out)
}

/// Law of `χ_l` under the uniform measure on the rank-`k` part of
/// `H̃_N^x`, by exhaustive enumeration.
pub fn mu_bruteforce(n: usize, k: usize, l: usize, x: u32) -> Result<RationalMeasure> {
    check_nkl(n, k, l)?;
    if x == 0 {
        return Err(Error::Parameter("x must be positive".into()));
    }
    let slice = rank_count(n as u64, k as u64, u64::from(x));
    if n > BRUTEFORCE_MAX_N || slice > BigInt::from(BRUTEFORCE_MAX_SLICE) {
        return Err(Error::Guard(format!(
            "brute force over {slice} elements (N={n}, k={k}, x={x}) exceeds the enumeration guard"
        )));
    }
    let mut counts: BTreeMap<Point, u64> = BTreeMap::new();
    let mut total = 0u64;
    for s in enumerate(n, SignOrder::Finite(x), Some(k))? {
        *counts.entry(s.chi(l)).or_insert(0) += 1;
        total += 1;
    }
    Ok(RationalMeasure::from_atoms(
        x,
        counts
            .into_iter()
            .map(|(p, c)| (p, BigRational::new(BigInt::from(c), BigInt::from(total)))),
    ))
}

/// The `x = 2` law obtained from the `x = 1` law by giving every fixed
/// point an independent uniform sign:
/// `P(χ = p) = Σ_r 2^{-(|p|+2r)} C(|p|+2r, r) P_S(χ = |p|+2r)`.
pub fn sign_mixing(n: usize, k: usize, l: usize) -> Result<RationalMeasure> {
    Ok(sign_mix(&mu_formula(n, k, l)?))
}

/// Applies the sign mixing to any law on `{0, 1, 2, …}`.
pub fn sign_mix(base: &RationalMeasure) -> RationalMeasure {
    let mut out = RationalMeasure::zero(2);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for (p, w) in base.integer_atoms().expect("integer law") {
        let m = p.to_u64().expect("nonnegative fixed-point count");
        for minus in 0..=m {
            let c = BigRational::from_integer(binomial(m, minus)) * pow_rat(&half, m as usize);
            let v = BigInt::from(m as i64 - 2 * minus as i64);
            out.add_atom(Point::from_value(2, v), &w * c);
        }
    }
    out
}

/// `Σ_{n>c} t^n/n!`, bounded by the first term over `1 − t/(c+2)`.
pub fn poisson_tail_bound(t: f64, cutoff: usize) -> f64 {
    let c = cutoff as f64;
    let mut first = 1.0;
    for j in 1..=cutoff + 1 {
        first *= t / j as f64;
    }
    if t < c + 2.0 {
        first / (1.0 - t / (c + 2.0))
    } else {
        f64::INFINITY
    }
}

/// `e^{-t} Σ_{m>c} t^m m^n / m!`, bounding the part of an order-`n` moment
/// of a compound Poisson law with unit-modulus jumps lost by truncating
/// after `c` jumps.
fn compound_poisson_moment_tail(t: f64, cutoff: usize, n: usize) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let term = |m: usize| -> f64 {
        let lf: f64 = (1..=m).map(|j| (j as f64).ln()).sum();
        (m as f64 * t.ln() + n as f64 * (m as f64).ln() - lf - t).exp()
    };
    // ratio of consecutive terms; decreasing in m
    let ratio = |m: usize| t / (m as f64 + 1.0) * ((m as f64 + 1.0) / m as f64).powi(n as i32);
    let mut s = 0.0;
    let mut m = cutoff + 1;
    loop {
        let a = term(m);
        s += a;
        let r = ratio(m);
        if r < 0.5 && a <= s * 1e-17 {
            return s + a * r / (1.0 - r);
        }
        if m > cutoff + 100_000 {
            return f64::INFINITY;
        }
        m += 1;
    }
}

/// Uniform law on the `x`-th roots of unity.
pub fn roots_uniform(x: u32) -> RationalMeasure {
    RationalMeasure::from_atoms(
        x,
        (0..x).map(|r| (Point::root(x, r), BigRational::new(BigInt::one(), BigInt::from(x)))),
    )
}

/// Truncated compound Poisson law `e^{-t} Σ_{n≤c} t^n/n! ρ_x^{*n}`, with
/// `ρ_x` uniform on the `x`-th roots of unity. Weights are stored without the
/// factor `e^{-t}`, which is kept symbolically.
pub fn bessel_truncated(x: u32, t: &BigRational, cutoff: usize) -> Result<RationalMeasure> {
    if x == 0 {
        return Err(Error::Parameter("x must be positive".into()));
    }
    if t.is_negative() {
        return Err(Error::Parameter("the Poisson parameter must be nonnegative".into()));
    }
    let rho = roots_uniform(x);
    let mut out = RationalMeasure::zero(x);
    let mut power = RationalMeasure::dirac(Point::zero(x));
    let mut coeff = BigRational::one();
    for n in 0..=cutoff {
        if n > 0 {
            power = power.convolve(&rho);
            coeff = coeff * t / int(n as i64);
        }
        out.add_scaled(&power, &coeff);
    }
    let tf = t.to_f64().unwrap_or(f64::NAN);
    out.normalization = Normalization::ExpNeg(t.clone());
    out.tail_bound = Some((-tf).exp() * poisson_tail_bound(tf, cutoff));
    out.truncation = Some((t.clone(), cutoff));
    Ok(out)
}

pub fn poisson_truncated(t: &BigRational, cutoff: usize) -> Result<RationalMeasure> {
    bessel_truncated(1, t, cutoff)
}

/// `Σ_{α ∈ cat(word)} weight^{|α|}`.
pub fn partition_moments(cat: Category, word: &ColoredWord, weight: &BigRational) -> Result<BigRational> {
    let parts = enumerate_partitions(word.len(), cat, Some(word))?;
    Ok(parts.iter().map(|p| pow_rat(weight, p.num_blocks())).sum())
}

/// Real moment sequence `n ↦ Σ_{α ∈ cat(1…1)} weight^{|α|}` for `n ≤ n_max`.
pub fn partition_moment_sequence(cat: Category, n_max: usize, weight: &BigRational) -> Result<MomentSequence> {
    let moments = (1..=n_max)
        .map(|n| partition_moments(cat, &ColoredWord::all_ones(n), weight))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence::from_real(&format!("{cat} partitions, weight {}", format_rational(weight)), &moments))
}

/// *-moments indexed by colored words; the empty word has moment 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentSequence {
    pub source: String,
    pub entries: BTreeMap<ColoredWord, BigRational>,
}

impl MomentSequence {
    pub fn new(source: &str) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(ColoredWord(Vec::new()), BigRational::one());
        MomentSequence {
            source: source.to_string(),
            entries,
        }
    }

    /// Real moments `m_1, m_2, …` (stored under the all-`1` words).
    pub fn from_real(source: &str, moments: &[BigRational]) -> Self {
        let mut s = Self::new(source);
        for (i, m) in moments.iter().enumerate() {
            s.entries.insert(ColoredWord::all_ones(i + 1), m.clone());
        }
        s
    }

    pub fn get(&self, word: &ColoredWord) -> Option<&BigRational> {
        self.entries.get(word)
    }

    pub fn real(&self, n: usize) -> Option<&BigRational> {
        self.entries.get(&ColoredWord::all_ones(n))
    }

    pub fn insert(&mut self, word: ColoredWord, value: BigRational) {
        self.entries.insert(word, value);
    }
}

fn cumulants(m: &MomentSequence, n_max: usize, cat: Category, lattice: Lattice) -> Result<Vec<BigRational>> {
    let moments = (1..=n_max)
        .map(|n| m.real(n).cloned().ok_or(Error::MissingMoment(n)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut k = BigRational::zero();
        for p in enumerate_partitions(n, cat, None)? {
            let mu = mobius_to_top(&p, lattice)?;
            let prod: BigRational = p.block_sizes().iter().map(|&s| moments[s - 1].clone()).product();
            k += BigRational::from_integer(mu) * prod;
        }
        out.push(k);
    }
    Ok(out)
}

/// Classical cumulants `κ_1..κ_{n_max}` by Möbius inversion over `P(n)`.
pub fn classical_cumulants(m: &MomentSequence, n_max: usize) -> Result<Vec<BigRational>> {
    cumulants(m, n_max, Category::P, Lattice::P)
}

/// Free cumulants `κ_1..κ_{n_max}` by Möbius inversion over `NC(n)`.
pub fn free_cumulants(m: &MomentSequence, n_max: usize) -> Result<Vec<BigRational>> {
    cumulants(m, n_max, Category::NC, Lattice::NC)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BpReport {
    pub pass: bool,
    /// First order (one-based) where the cumulants differ.
    pub first_failure: Option<usize>,
    #[serde(serialize_with = "ser_rationals")]
    pub classical: Vec<BigRational>,
    #[serde(serialize_with = "ser_rationals")]
    pub free: Vec<BigRational>,
}

fn ser_rationals<S: serde::Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(format_rational))
}

/// Compares classical cumulants of `classical` with free cumulants of `free`.
pub fn bp_check(classical: &MomentSequence, free: &MomentSequence, n_max: usize) -> Result<BpReport> {
    let c = classical_cumulants(classical, n_max)?;
    let f = free_cumulants(free, n_max)?;
    let first_failure = c.iter().zip(&f).position(|(a, b)| a != b).map(|i| i + 1);
    Ok(BpReport {
        pass: first_failure.is_none(),
        first_failure,
        classical: c,
        free: f,
    })
}

// ---------------------------------------------------------------- JSON

#[derive(Serialize, Deserialize)]
struct AtomJson {
    point: Vec<String>,
    weight: String,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    x: u32,
    atoms: Vec<AtomJson>,
    normalization: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail_bound: Option<f64>,
}

impl Serialize for RationalMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let normalization = match &self.normalization {
            Normalization::Exact => "exact".to_string(),
            Normalization::Rational(r) => format_rational(r),
            Normalization::ExpNeg(r) => format!("exp(-{})", format_rational(r)),
        };
        MeasureJson {
            x: self.order,
            atoms: self
                .atoms
                .iter()
                .map(|(p, w)| AtomJson {
                    point: p.coeffs().iter().map(ToString::to_string).collect(),
                    weight: format_rational(w),
                })
                .collect(),
            normalization,
            tail_bound: self.tail_bound,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MeasureJson::deserialize(d)?;
        if raw.x == 0 {
            return Err(D::Error::custom("x must be positive"));
        }
        let mut m = RationalMeasure::zero(raw.x);
        for a in raw.atoms {
            let coeffs = a
                .point
                .iter()
                .map(|c| c.parse::<BigInt>().map_err(D::Error::custom))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let w = parse_rational(&a.weight).map_err(D::Error::custom)?;
            m.add_atom(Point::from_raw(raw.x, coeffs), w);
        }
        let n = raw.normalization.trim();
        m.normalization = if n == "exact" {
            Normalization::Exact
        } else if let Some(inner) = n.strip_prefix("exp(-").and_then(|r| r.strip_suffix(')')) {
            Normalization::ExpNeg(parse_rational(inner).map_err(D::Error::custom)?)
        } else {
            Normalization::Rational(parse_rational(n).map_err(D::Error::custom)?)
        };
        m.tail_bound = raw.tail_bound;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn law(pairs: &[(i64, i64, i64)]) -> RationalMeasure {
        RationalMeasure::from_atoms(
            1,
            pairs.iter().map(|&(p, a, b)| (Point::from_value(1, BigInt::from(p)), rat(a, b))),
        )
    }

    #[test]
    fn formula_examples() {
        assert_eq!(mu_formula(2, 1, 1).unwrap(), law(&[(0, 3, 4), (1, 1, 4)]));
        assert_eq!(mu_formula(2, 2, 1).unwrap(), law(&[(0, 1, 2), (1, 1, 2)]));
        for l in 0..=4 {
            assert_eq!(mu_formula(4, 0, l).unwrap(), RationalMeasure::dirac_int(1, 0));
        }
        assert!(mu_formula(2, 3, 1).is_err());
    }

    #[test]
    fn formula_matches_bruteforce_small() {
        for n in 0..=4 {
            for k in 0..=n {
                for l in 0..=n {
                    let f = mu_formula(n, k, l).unwrap();
                    assert!(f.is_probability());
                    assert_eq!(f, mu_bruteforce(n, k, l, 1).unwrap(), "N={n} k={k} l={l}");
                    assert_eq!(f, mu_formula(n, l, k).unwrap());
                }
            }
        }
    }

    #[test]
    fn bruteforce_signed_and_guard() {
        let m = mu_bruteforce(1, 1, 1, 2).unwrap();
        let expect = RationalMeasure::from_atoms(
            2,
            [(Point::from_value(2, BigInt::from(-1)), rat(1, 2)), (Point::from_value(2, BigInt::from(1)), rat(1, 2))],
        );
        assert_eq!(m, expect);
        assert_eq!(sign_mixing(1, 1, 1).unwrap(), expect);
        assert_eq!(sign_mixing(3, 0, 2).unwrap(), RationalMeasure::dirac_int(2, 0));
        assert!(matches!(mu_bruteforce(9, 1, 1, 1), Err(Error::Guard(_))));
    }

    #[test]
    fn sign_mixing_small() {
        for n in 0..=3 {
            for k in 0..=n {
                for l in 0..=n {
                    assert_eq!(sign_mixing(n, k, l).unwrap(), mu_bruteforce(n, k, l, 2).unwrap());
                }
            }
        }
    }

    #[test]
    fn truncated_laws() {
        let t = rat(1, 1);
        let p = poisson_truncated(&t, 20).unwrap();
        assert_eq!(p.weight_int(0), BigRational::one());
        assert_eq!(*p.normalization(), Normalization::ExpNeg(t.clone()));
        assert!(p.tail_bound().unwrap() < 1e-18);
        let b = bessel_truncated(2, &t, 12).unwrap();
        for (pt, w) in b.atoms() {
            assert_eq!(b.weight(&-pt), *w);
        }
        let m2 = b.star_moment_f64(&ColoredWord::all_ones(2)).re;
        assert!((m2 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn partition_moment_examples() {
        let t = rat(2, 7);
        let m3 = partition_moments(Category::NC, &ColoredWord::all_ones(3), &t).unwrap();
        assert_eq!(m3, &t + &(&t * &t * int(3)) + &t * &t * &t);
        let cat: Vec<_> = (1..=4)
            .map(|n| partition_moments(Category::NC, &ColoredWord::all_ones(n), &BigRational::one()).unwrap())
            .collect();
        assert_eq!(cat, vec![int(1), int(2), int(5), int(14)]);
        assert_eq!(partition_moments(Category::Px(2), &ColoredWord::all_ones(2), &t).unwrap(), t);
    }

    #[test]
    fn cumulant_examples() {
        let t = rat(3, 5);
        let point = MomentSequence::from_real("dirac", &(1..=6).map(|n| pow_rat(&t, n)).collect::<Vec<_>>());
        let k = classical_cumulants(&point, 6).unwrap();
        assert_eq!(k[0], t);
        assert!(k[1..].iter().all(Zero::is_zero));

        let pois = partition_moment_sequence(Category::P, 6, &t).unwrap();
        assert!(classical_cumulants(&pois, 6).unwrap().iter().all(|c| *c == t));
        let fpois = partition_moment_sequence(Category::NC, 6, &t).unwrap();
        assert!(free_cumulants(&fpois, 6).unwrap().iter().all(|c| *c == t));
        assert!(matches!(classical_cumulants(&pois, 7), Err(Error::MissingMoment(7))));
    }

    #[test]
    fn bp_examples() {
        let t = rat(1, 4);
        let r = bp_check(
            &partition_moment_sequence(Category::P, 6, &t).unwrap(),
            &partition_moment_sequence(Category::NC, 6, &t).unwrap(),
            6,
        )
        .unwrap();
        assert!(r.pass);
        let s2 = rat(2, 3);
        let g: Vec<_> = [0, 1, 0, 3, 0, 15].iter().enumerate().map(|(i, &c)| int(c) * pow_rat(&s2, i.div_ceil(2))).collect();
        let sc: Vec<_> = [0, 1, 0, 2, 0, 5].iter().enumerate().map(|(i, &c)| int(c) * pow_rat(&s2, i.div_ceil(2))).collect();
        let r = bp_check(&MomentSequence::from_real("g", &g), &MomentSequence::from_real("sc", &sc), 6).unwrap();
        assert!(r.pass, "{r:?}");
        let r = bp_check(
            &partition_moment_sequence(Category::P, 6, &int(1)).unwrap(),
            &partition_moment_sequence(Category::NC, 6, &int(2)).unwrap(),
            6,
        )
        .unwrap();
        assert_eq!(r.first_failure, Some(1));
    }

    #[test]
    fn json_round_trip() {
        let b = bessel_truncated(3, &rat(1, 2), 4).unwrap();
        let text = serde_json::to_string(&b).unwrap();
        assert!(text.contains("\"normalization\":\"exp(-1/2)\""));
        let back: RationalMeasure = serde_json::from_str(&text).unwrap();
        assert_eq!(back.atoms(), b.atoms());
        assert_eq!(back.normalization(), b.normalization());
        let m = mu_formula(3, 2, 2).unwrap();
        let back: RationalMeasure = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn tv_is_a_distance() {
        let a = mu_formula(4, 2, 2).unwrap();
        let b = mu_formula(4, 2, 3).unwrap();
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        let d = tv_distance(&a, &b).unwrap();
        assert!(d > 0.0 && d <= 1.0);
        assert!((d - tv_distance(&b, &a).unwrap()).abs() < 1e-15);
    }
}
