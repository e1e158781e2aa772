//! Exact elements of the cyclotomic ring `Z[ζ_x]` (or `Q[ζ_x]`).
//!
//! Values are coefficient vectors over `1, ζ, …, ζ^{x-1}`. Every operation
//! folds exponents modulo `x` and then reduces modulo the cyclotomic
//! polynomial `Φ_x`, so the stored vector is canonical: coefficients at
//! positions `≥ φ(x)` are zero and structural equality is numerical equality.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Coefficient ring for [`Cyclotomic`].
pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coefficient for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Coefficient for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Coefficient for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    // both monic, division is exact
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let qn = rem.len() - 1 - dn;
    let mut q = vec![0i64; qn + 1];
    for d in (0..=qn).rev() {
        let c = rem[d + dn];
        q[d] = c;
        if c != 0 {
            for (i, &dc) in den.iter().enumerate() {
                rem[d + i] -= c * dc;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    q
}

fn compute_cyclotomic_poly(x: u32) -> Vec<i64> {
    // t^x - 1 = prod_{d | x} Φ_d(t)
    let mut num = vec![0i64; x as usize + 1];
    num[0] = -1;
    num[x as usize] = 1;
    for d in 1..x {
        if x.is_multiple_of(d) {
            num = poly_div_exact(&num, &cyclotomic_poly(d));
        }
    }
    num
}

/// Coefficients of `Φ_x`, lowest degree first.
pub fn cyclotomic_poly(x: u32) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&x) {
        return p.clone();
    }
    let p = Arc::new(compute_cyclotomic_poly(x));
    cache.lock().unwrap().insert(x, p.clone());
    p
}

/// Euler's totient, the degree of `Φ_x`.
pub fn totient(x: u32) -> usize {
    cyclotomic_poly(x).len() - 1
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cyclotomic<T = BigInt> {
    order: u32,
    coeffs: Vec<T>,
}

impl<T: Coefficient> Cyclotomic<T> {
    /// Builds from a raw coefficient vector; exponents are taken modulo `order`.
    pub fn from_raw(order: u32, raw: Vec<T>) -> Self {
        assert!(order >= 1, "cyclotomic order must be positive");
        let x = order as usize;
        let mut coeffs = vec![T::zero(); x];
        for (j, c) in raw.into_iter().enumerate() {
            let slot = &mut coeffs[j % x];
            *slot = slot.clone() + c;
        }
        let mut value = Cyclotomic { order, coeffs };
        value.reduce();
        value
    }

    fn reduce(&mut self) {
        let phi = cyclotomic_poly(self.order);
        let deg = phi.len() - 1;
        for d in (deg..self.coeffs.len()).rev() {
            let c = std::mem::replace(&mut self.coeffs[d], T::zero());
            if c.is_zero() {
                continue;
            }
            // t^d ≡ t^{d-deg}·(t^deg - Φ(t))
            for (i, &p) in phi.iter().enumerate().take(deg) {
                if p != 0 {
                    let slot = &mut self.coeffs[d - deg + i];
                    *slot = slot.clone() - c.clone() * T::from_i64(p);
                }
            }
        }
    }

    pub fn zero(order: u32) -> Self {
        Self::from_raw(order, Vec::new())
    }

    pub fn one(order: u32) -> Self {
        Self::from_value(order, T::one())
    }

    pub fn from_value(order: u32, v: T) -> Self {
        Self::from_raw(order, vec![v])
    }

    /// The root of unity `ζ^r`.
    pub fn root(order: u32, r: u32) -> Self {
        let mut raw = vec![T::zero(); order as usize];
        raw[(r % order) as usize] = T::one();
        Self::from_raw(order, raw)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Canonical coefficient vector, always of length `order`.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// `Some(c)` when the value is the rational (or integer) constant `c`.
    pub fn as_scalar(&self) -> Option<T> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn check_order(&self, other: &Self) {
        assert_eq!(
            self.order, other.order,
            "cyclotomic values of different orders"
        );
    }

    /// Complex conjugate, `ζ^j ↦ ζ^{-j}`.
    pub fn conj(&self) -> Self {
        let x = self.order as usize;
        let mut raw = vec![T::zero(); x];
        for (j, c) in self.coeffs.iter().enumerate() {
            raw[(x - j) % x] = c.clone();
        }
        Self::from_raw(self.order, raw)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.order);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn scale(&self, s: &T) -> Self {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }

    /// Re-expresses the value in `Z[ζ_m]` for a multiple `m` of the order.
    pub fn lift(&self, m: u32) -> Self {
        assert!(m.is_multiple_of(self.order), "lift target must be a multiple");
        let step = (m / self.order) as usize;
        let mut raw = vec![T::zero(); m as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            raw[j * step] = c.clone();
        }
        Self::from_raw(m, raw)
    }

    pub fn to_complex(&self) -> Complex64 {
        let x = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| Complex64::from_polar(c.to_f64(), std::f64::consts::TAU * j as f64 / x))
            .sum()
    }

    pub fn map_coeffs<U: Coefficient>(&self, f: impl Fn(&T) -> U) -> Cyclotomic<U> {
        Cyclotomic::from_raw(self.order, self.coeffs.iter().map(f).collect())
    }
}

impl<T: Coefficient> Add for &Cyclotomic<T> {
    type Output = Cyclotomic<T>;
    fn add(self, rhs: Self) -> Cyclotomic<T> {
        self.check_order(rhs);
        Cyclotomic {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<T: Coefficient> Sub for &Cyclotomic<T> {
    type Output = Cyclotomic<T>;
    fn sub(self, rhs: Self) -> Cyclotomic<T> {
        self + &(-rhs)
    }
}

impl<T: Coefficient> Neg for &Cyclotomic<T> {
    type Output = Cyclotomic<T>;
    fn neg(self) -> Cyclotomic<T> {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

impl<T: Coefficient> Mul for &Cyclotomic<T> {
    type Output = Cyclotomic<T>;
    fn mul(self, rhs: Self) -> Cyclotomic<T> {
        self.check_order(rhs);
        let x = self.order as usize;
        let mut raw = vec![T::zero(); x];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let slot = &mut raw[(i + j) % x];
                *slot = slot.clone() + a.clone() * b.clone();
            }
        }
        Cyclotomic::from_raw(self.order, raw)
    }
}

impl<T: Coefficient + fmt::Display> fmt::Display for Cyclotomic<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.as_scalar() {
            return write!(f, "{c}");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})ζ")?,
                _ => write!(f, "({c})ζ^{j}")?,
            }
        }
        Ok(())
    }
}

impl<T: Coefficient> fmt::Debug for Cyclotomic<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyc{}{:?}", self.order, self.coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Cyclotomic<i64>;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(*cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_poly(2), vec![1, 1]);
        assert_eq!(*cyclotomic_poly(3), vec![1, 1, 1]);
        assert_eq!(*cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(totient(12), 4);
    }

    #[test]
    fn roots_sum_to_zero() {
        for x in 2..10 {
            let s = (0..x).fold(C::zero(x), |acc, r| &acc + &C::root(x, r));
            assert!(s.is_zero(), "x={x}");
        }
    }

    #[test]
    fn sign_group_is_integers() {
        let minus = C::root(2, 1);
        assert_eq!(minus.as_scalar(), Some(-1));
        assert_eq!((&minus * &minus).as_scalar(), Some(1));
    }

    #[test]
    fn multiplication_matches_complex() {
        let a = C::from_raw(5, vec![1, -2, 0, 3]);
        let b = C::from_raw(5, vec![0, 1, 1]);
        let exact = (&a * &b).to_complex();
        let float = a.to_complex() * b.to_complex();
        assert!((exact - float).norm() < 1e-12);
        assert!((a.conj().to_complex() - a.to_complex().conj()).norm() < 1e-12);
    }

    #[test]
    fn lift_preserves_value() {
        let a = C::from_raw(3, vec![2, 1]);
        let lifted = a.lift(12);
        assert!((lifted.to_complex() - a.to_complex()).norm() < 1e-12);
    }
}
