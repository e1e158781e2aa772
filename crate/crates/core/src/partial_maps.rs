//! Partial permutations of `{0..N-1}` and their versions signed by roots of
//! unity.
//!
//! Indices are zero-based throughout the Rust API. The JSON form uses the
//! one-based targets of the usual mathematical notation.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::exact::{binomial, factorial};

pub type CycInt = Cyclotomic<BigInt>;

/// A bijection between two subsets of `{0..n-1}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialPermutation {
    map: Vec<Option<usize>>,
}

impl PartialPermutation {
    pub fn new(map: Vec<Option<usize>>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for t in map.iter().flatten() {
            if *t >= n {
                return Err(Error::Parameter(format!("target {t} out of range for n={n}")));
            }
            if std::mem::replace(&mut seen[*t], true) {
                return Err(Error::Parameter(format!("target {t} is hit twice")));
            }
        }
        Ok(PartialPermutation { map })
    }

    /// Builds from `(source, target)` pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut map = vec![None; n];
        for &(i, j) in pairs {
            if i >= n {
                return Err(Error::Parameter(format!("source {i} out of range for n={n}")));
            }
            if map[i].replace(j).is_some() {
                return Err(Error::Parameter(format!("source {i} given twice")));
            }
        }
        Self::new(map)
    }

    pub fn identity(n: usize) -> Self {
        PartialPermutation {
            map: (0..n).map(Some).collect(),
        }
    }

    /// The null partial permutation, with empty domain and range.
    pub fn empty(n: usize) -> Self {
        PartialPermutation { map: vec![None; n] }
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.map.get(i).copied().flatten()
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.map
    }

    pub fn domain(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.map[i].is_some()).collect()
    }

    pub fn range(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.map.iter().flatten().copied().collect();
        r.sort_unstable();
        r
    }

    /// Rank statistic κ: the size of the domain.
    pub fn kappa(&self) -> usize {
        self.map.iter().flatten().count()
    }

    /// Number of fixed points among `{0..l-1}`.
    pub fn fixed_points(&self, l: usize) -> usize {
        (0..l.min(self.n())).filter(|&i| self.map[i] == Some(i)).count()
    }

    pub fn is_total(&self) -> bool {
        self.map.iter().all(Option::is_some)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &PartialPermutation) -> Result<PartialPermutation> {
        if self.n() != other.n() {
            return Err(Error::Dimension(format!(
                "cannot compose partial permutations of sizes {} and {}",
                self.n(),
                other.n()
            )));
        }
        Ok(PartialPermutation {
            map: other.map.iter().map(|t| t.and_then(|j| self.map[j])).collect(),
        })
    }

    /// The subinverse `σ⁻¹: Y → X`.
    pub fn inverse(&self) -> PartialPermutation {
        let mut map = vec![None; self.n()];
        for (i, t) in self.map.iter().enumerate() {
            if let Some(j) = t {
                map[*j] = Some(i);
            }
        }
        PartialPermutation { map }
    }

    /// Identity restricted to the given set.
    pub fn partial_identity(n: usize, support: &[usize]) -> PartialPermutation {
        let mut map = vec![None; n];
        for &i in support {
            map[i] = Some(i);
        }
        PartialPermutation { map }
    }

    /// Completion to a permutation of `{0..2n-1}`.
    ///
    /// With `X^c = {x_0 < … < x_{L-1}}` and `Y^c = {y_0 < … < y_{L-1}}` the
    /// complements of domain and range: `x_r ↦ n + r`, `n + r ↦ y_r`, points
    /// `≥ n + L` are fixed and the domain keeps its values.
    pub fn embed_s2n(&self) -> PartialPermutation {
        let n = self.n();
        let missing_dom: Vec<usize> = (0..n).filter(|&i| self.map[i].is_none()).collect();
        let ran = self.range();
        let missing_ran: Vec<usize> = {
            let mut hit = vec![false; n];
            for &j in &ran {
                hit[j] = true;
            }
            (0..n).filter(|&j| !hit[j]).collect()
        };
        let l = missing_dom.len();
        let mut map: Vec<Option<usize>> = vec![None; 2 * n];
        map[..n].copy_from_slice(&self.map);
        for (r, &x) in missing_dom.iter().enumerate() {
            map[x] = Some(n + r);
        }
        for (r, &y) in missing_ran.iter().enumerate() {
            map[n + r] = Some(y);
        }
        for (i, slot) in map.iter_mut().enumerate().skip(n + l) {
            *slot = Some(i);
        }
        PartialPermutation { map }
    }

    /// 0/1 matrix with `u[i][j] = 1` iff `σ(j) = i`.
    pub fn to_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.n();
        let mut m = vec![vec![0u8; n]; n];
        for (j, t) in self.map.iter().enumerate() {
            if let Some(i) = t {
                m[*i][j] = 1;
            }
        }
        m
    }
}

impl fmt::Debug for PartialPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .map
            .iter()
            .map(|t| t.map_or("-".to_string(), |j| j.to_string()))
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Order `x` of the sign group `Z_x`; `Circle` is the full torus `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignOrder {
    Finite(u32),
    Circle,
}

impl SignOrder {
    pub fn finite(self) -> Option<u32> {
        match self {
            SignOrder::Finite(x) => Some(x),
            SignOrder::Circle => None,
        }
    }
}

impl fmt::Display for SignOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignOrder::Finite(x) => write!(f, "{x}"),
            SignOrder::Circle => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for SignOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" | "∞" => Ok(SignOrder::Circle),
            t => match t.parse::<u32>() {
                Ok(x) if x >= 1 => Ok(SignOrder::Finite(x)),
                _ => Err(Error::Parameter(format!("x must be a positive integer or inf, got {s:?}"))),
            },
        }
    }
}

/// A phase `e^{2πiθ}` stored as the exact turn fraction `θ ∈ [0,1)`.
pub type Turn = Ratio<i64>;

fn normalize_turn(t: Turn) -> Turn {
    let f = t.fract();
    if f < Turn::zero() {
        f + Turn::from_integer(1)
    } else {
        f
    }
}

/// Partial permutation signed by elements of `Z_x` on its domain.
///
/// Phases live on domain points: the matrix entry is `u[σ(j)][j] = ε(j)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignedPartialPermutation {
    base: PartialPermutation,
    order: SignOrder,
    phases: Vec<Option<Turn>>,
}

impl SignedPartialPermutation {
    pub fn new(base: PartialPermutation, order: SignOrder, phases: Vec<Option<Turn>>) -> Result<Self> {
        if phases.len() != base.n() {
            return Err(Error::Dimension(format!(
                "{} phases for a partial permutation of size {}",
                phases.len(),
                base.n()
            )));
        }
        if let SignOrder::Finite(0) = order {
            return Err(Error::Parameter("x must be positive".into()));
        }
        let mut norm = Vec::with_capacity(phases.len());
        for (i, p) in phases.into_iter().enumerate() {
            match (base.get(i), p) {
                (Some(_), Some(t)) => {
                    let t = normalize_turn(t);
                    if let SignOrder::Finite(x) = order {
                        if !(t * i64::from(x)).is_integer() {
                            return Err(Error::Parameter(format!(
                                "phase {t} at point {i} is not an {x}-th root of unity"
                            )));
                        }
                    }
                    norm.push(Some(t));
                }
                (None, None) => norm.push(None),
                (Some(_), None) => {
                    return Err(Error::Parameter(format!("missing sign at domain point {i}")))
                }
                (None, Some(_)) => {
                    return Err(Error::Parameter(format!("sign given outside the domain at {i}")))
                }
            }
        }
        Ok(SignedPartialPermutation {
            base,
            order,
            phases: norm,
        })
    }

    /// Signs given as residues `r ∈ {0..x-1}` (the phase `ζ_x^r`).
    pub fn with_residues(base: PartialPermutation, x: u32, residues: Vec<Option<u32>>) -> Result<Self> {
        if x == 0 {
            return Err(Error::Parameter("x must be positive".into()));
        }
        for r in residues.iter().flatten() {
            if *r >= x {
                return Err(Error::Parameter(format!("residue {r} not below x={x}")));
            }
        }
        let phases = residues
            .into_iter()
            .map(|r| r.map(|r| Turn::new(i64::from(r), i64::from(x))))
            .collect();
        Self::new(base, SignOrder::Finite(x), phases)
    }

    /// Trivially signed copy of `base` in `Z_x`.
    pub fn unsigned(base: PartialPermutation, order: SignOrder) -> Self {
        let phases = base.as_slice().iter().map(|t| t.map(|_| Turn::zero())).collect();
        SignedPartialPermutation { base, order, phases }
    }

    pub fn base(&self) -> &PartialPermutation {
        &self.base
    }

    pub fn order(&self) -> SignOrder {
        self.order
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn phase(&self, i: usize) -> Option<Turn> {
        self.phases.get(i).copied().flatten()
    }

    pub fn phases(&self) -> &[Option<Turn>] {
        &self.phases
    }

    /// Residue `r` with phase `ζ_x^r`, for finite `x`.
    pub fn residue(&self, i: usize) -> Option<u32> {
        let x = self.order.finite()?;
        self.phase(i).map(|t| (t * i64::from(x)).to_integer() as u32)
    }

    pub fn kappa(&self) -> usize {
        self.base.kappa()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::Dimension(format!(
                "cannot compose signed partial permutations of sizes {} and {}",
                self.n(),
                other.n()
            )));
        }
        if self.order != other.order {
            return Err(Error::Parameter(format!(
                "sign groups differ: x={} vs x={}",
                self.order, other.order
            )));
        }
        Ok(())
    }

    /// `self ∘ other`, multiplying the signs along the composition.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let base = self.base.compose(&other.base)?;
        let phases = (0..self.n())
            .map(|j| {
                let mid = other.base.get(j)?;
                self.base.get(mid)?;
                Some(normalize_turn(other.phases[j]? + self.phases[mid]?))
            })
            .collect();
        Ok(SignedPartialPermutation {
            base,
            order: self.order,
            phases,
        })
    }

    /// Subinverse with conjugated signs, so that `u(σ⁻¹) = u(σ)*`.
    pub fn inverse(&self) -> Self {
        let base = self.base.inverse();
        let mut phases = vec![None; self.n()];
        for (i, t) in self.base.as_slice().iter().enumerate() {
            if let Some(j) = t {
                phases[*j] = self.phases[i].map(|p| normalize_turn(-p));
            }
        }
        SignedPartialPermutation {
            base,
            order: self.order,
            phases,
        }
    }

    fn phase_value(t: Turn, order: u32) -> CycInt {
        let r = (t * i64::from(order)).to_integer();
        CycInt::root(order, r as u32)
    }

    /// χ_l: sum of the signs over fixed points in `{0..l-1}`.
    ///
    /// For `x = ∞` the value lives in `Z[ζ_m]` with `m` the least common
    /// denominator of the phases involved.
    pub fn chi(&self, l: usize) -> CycInt {
        let fixed: Vec<Turn> = (0..l.min(self.n()))
            .filter(|&i| self.base.get(i) == Some(i))
            .map(|i| self.phases[i].expect("domain point carries a phase"))
            .collect();
        let order = match self.order {
            SignOrder::Finite(x) => x,
            SignOrder::Circle => fixed
                .iter()
                .fold(1i64, |acc, t| acc.lcm(t.denom()))
                .try_into()
                .expect("phase denominator fits in u32"),
        };
        fixed
            .iter()
            .fold(CycInt::zero(order), |acc, &t| &acc + &Self::phase_value(t, order))
    }

    /// Monomial matrix `u[i][j] = ε(j)·[σ(j) = i]` over `Z[ζ_x]`.
    pub fn to_matrix(&self) -> Result<CyclotomicMatrix> {
        let x = self.order.finite().ok_or_else(|| {
            Error::Parameter("cyclotomic matrix needs a finite sign group".into())
        })?;
        let n = self.n();
        let mut m = CyclotomicMatrix::zeros(n, x);
        for j in 0..n {
            if let Some(i) = self.base.get(j) {
                m.entries[i * n + j] = Self::phase_value(self.phases[j].unwrap(), x);
            }
        }
        Ok(m)
    }

    /// Set-theoretic embedding into `H_{2N}^x`: the base is completed as in
    /// [`PartialPermutation::embed_s2n`] and the new points carry trivial sign.
    pub fn embed_h2n(&self) -> Self {
        let base = self.base.embed_s2n();
        let phases = (0..2 * self.n())
            .map(|i| {
                if i < self.n() && self.base.get(i).is_some() {
                    self.phases[i]
                } else {
                    Some(Turn::zero())
                }
            })
            .collect();
        SignedPartialPermutation {
            base,
            order: self.order,
            phases,
        }
    }
}

impl fmt::Debug for SignedPartialPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..self.n())
            .map(|i| match (self.base.get(i), self.phases[i]) {
                (Some(j), Some(t)) if t.is_zero() => j.to_string(),
                (Some(j), Some(t)) => format!("{j}@{t}"),
                _ => "-".to_string(),
            })
            .collect();
        write!(f, "[{}; x={}]", parts.join(" "), self.order)
    }
}

/// Square matrix over `Z[ζ_x]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CyclotomicMatrix {
    n: usize,
    order: u32,
    entries: Vec<CycInt>,
}

impl CyclotomicMatrix {
    pub fn zeros(n: usize, order: u32) -> Self {
        CyclotomicMatrix {
            n,
            order,
            entries: vec![CycInt::zero(order); n * n],
        }
    }

    pub fn identity(n: usize, order: u32) -> Self {
        let mut m = Self::zeros(n, order);
        for i in 0..n {
            m.entries[i * n + i] = CycInt::one(order);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &CycInt {
        &self.entries[i * self.n + j]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut m = Self::zeros(n, self.order);
        for i in 0..n {
            for j in 0..n {
                m.entries[j * n + i] = self.get(i, j).conj();
            }
        }
        m
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = Self::zeros(n, self.order);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        let idx = i * n + j;
                        out.entries[idx] = &out.entries[idx] + &(a * b);
                    }
                }
            }
        }
        out
    }

    /// Number of nonzero entries in each row and column is at most one.
    pub fn is_submonomial(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).filter(|&j| !self.get(i, j).is_zero()).count() <= 1)
            && (0..n).all(|j| (0..n).filter(|&i| !self.get(i, j).is_zero()).count() <= 1)
    }
}

/// `|H̃_N^x| = Σ_k k!·C(N,k)²·x^k`.
pub fn count(n: u64, x: u64) -> BigInt {
    (0..=n).map(|k| rank_count(n, k, x)).sum()
}

/// Size of the rank-`k` slice, `k!·C(N,k)²·x^k`.
pub fn rank_count(n: u64, k: u64, x: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let c = binomial(n, k);
    factorial(k) * &c * &c * BigInt::from(x).pow(k as u32)
}

/// Leading asymptotic of `|S̃_N|`, `N!·sqrt(exp(4√N − 1) / (4π√N))`, for
/// plotting next to the exact counts.
pub fn count_asymptotic(n: u64) -> f64 {
    let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let s = (n as f64).sqrt();
    (ln_fact + 0.5 * ((4.0 * s - 1.0) - (4.0 * std::f64::consts::PI * s).ln())).exp()
}

/// Deterministic stream over `H̃_N^x` (or a rank slice of it).
///
/// Order: rank ascending; domain subsets in colexicographic order; range
/// subsets in colexicographic order; the bijection (targets of the sorted
/// domain) in lexicographic order; signs as a base-`x` counter whose last
/// digit belongs to the largest domain point.
pub struct Enumeration {
    n: usize,
    x: u32,
    k: usize,
    k_max: usize,
    dom: Vec<usize>,
    ran: Vec<usize>,
    perm: Vec<usize>,
    signs: Vec<u32>,
    done: bool,
}

/// Enumerates `H̃_N^x`; with `k` given, only the rank-`k` slice.
pub fn enumerate(n: usize, order: SignOrder, k: Option<usize>) -> Result<Enumeration> {
    let x = order.finite().ok_or(Error::UnsupportedEnumeration)?;
    if x == 0 {
        return Err(Error::Parameter("x must be positive".into()));
    }
    if let Some(k) = k {
        if k > n {
            return Err(Error::Parameter(format!("rank k={k} exceeds N={n}")));
        }
    }
    let (k0, k_max) = match k {
        Some(k) => (k, k),
        None => (0, n),
    };
    let mut e = Enumeration {
        n,
        x,
        k: k0,
        k_max,
        dom: Vec::new(),
        ran: Vec::new(),
        perm: Vec::new(),
        signs: Vec::new(),
        done: false,
    };
    e.reset_rank();
    Ok(e)
}

fn next_colex(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for j in 0..k {
        let limit = if j + 1 < k { c[j + 1] } else { n };
        if c[j] + 1 < limit {
            c[j] += 1;
            for (i, slot) in c.iter_mut().enumerate().take(j) {
                *slot = i;
            }
            return true;
        }
    }
    false
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

impl Enumeration {
    fn reset_rank(&mut self) {
        self.dom = (0..self.k).collect();
        self.ran = (0..self.k).collect();
        self.perm = (0..self.k).collect();
        self.signs = vec![0; self.k];
    }

    fn current(&self) -> SignedPartialPermutation {
        let mut map = vec![None; self.n];
        let mut phases = vec![None; self.n];
        for (a, &d) in self.dom.iter().enumerate() {
            map[d] = Some(self.ran[self.perm[a]]);
            phases[d] = Some(Turn::new(i64::from(self.signs[a]), i64::from(self.x)));
        }
        SignedPartialPermutation {
            base: PartialPermutation { map },
            order: SignOrder::Finite(self.x),
            phases,
        }
    }

    fn advance(&mut self) {
        for s in self.signs.iter_mut().rev() {
            *s += 1;
            if *s < self.x {
                return;
            }
            *s = 0;
        }
        if next_permutation(&mut self.perm) {
            return;
        }
        self.perm = (0..self.k).collect();
        if next_colex(&mut self.ran, self.n) {
            return;
        }
        self.ran = (0..self.k).collect();
        if next_colex(&mut self.dom, self.n) {
            return;
        }
        if self.k < self.k_max {
            self.k += 1;
            self.reset_rank();
        } else {
            self.done = true;
        }
    }
}

impl Iterator for Enumeration {
    type Item = SignedPartialPermutation;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.current();
        self.advance();
        Some(item)
    }
}

/// Uniform element of the rank-`k` slice of `H̃_N^x`.
pub fn sample_rank<R: Rng + ?Sized>(n: usize, k: usize, x: u32, rng: &mut R) -> Result<SignedPartialPermutation> {
    if k > n {
        return Err(Error::Parameter(format!("rank k={k} exceeds N={n}")));
    }
    if x == 0 {
        return Err(Error::Parameter("x must be positive".into()));
    }
    let mut points: Vec<usize> = (0..n).collect();
    points.shuffle(rng);
    let dom = points[..k].to_vec();
    points.shuffle(rng);
    let targets = &points[..k];
    let mut map = vec![None; n];
    let mut residues = vec![None; n];
    for (a, &d) in dom.iter().enumerate() {
        map[d] = Some(targets[a]);
        residues[d] = Some(rng.random_range(0..x));
    }
    SignedPartialPermutation::with_residues(PartialPermutation { map }, x, residues)
}

// ---------------------------------------------------------------- JSON

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OrderJson {
    Finite(u32),
    Named(String),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SignJson {
    Residue(u32),
    Turn(String),
}

#[derive(Serialize, Deserialize)]
struct SignedJson {
    n: usize,
    x: OrderJson,
    map: Vec<Option<usize>>,
    signs: Vec<Option<SignJson>>,
}

impl Serialize for SignedPartialPermutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let x = match self.order {
            SignOrder::Finite(x) => OrderJson::Finite(x),
            SignOrder::Circle => OrderJson::Named("inf".into()),
        };
        let signs = (0..self.n())
            .map(|i| {
                self.phases[i].map(|t| match self.order {
                    SignOrder::Finite(x) => SignJson::Residue((t * i64::from(x)).to_integer() as u32),
                    SignOrder::Circle => SignJson::Turn(format!("{}/{}", t.numer(), t.denom())),
                })
            })
            .collect();
        SignedJson {
            n: self.n(),
            x,
            map: self.base.map.iter().map(|t| t.map(|j| j + 1)).collect(),
            signs,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SignedPartialPermutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SignedJson::deserialize(d)?;
        let order = match raw.x {
            OrderJson::Finite(x) => SignOrder::Finite(x),
            OrderJson::Named(s) => s.parse().map_err(D::Error::custom)?,
        };
        if raw.map.len() != raw.n || raw.signs.len() != raw.n {
            return Err(D::Error::custom("map/signs length differs from n"));
        }
        let mut map = Vec::with_capacity(raw.n);
        for t in raw.map {
            map.push(match t {
                Some(0) => return Err(D::Error::custom("targets are one-based")),
                Some(j) => Some(j - 1),
                None => None,
            });
        }
        let base = PartialPermutation::new(map).map_err(D::Error::custom)?;
        let mut phases = Vec::with_capacity(raw.n);
        for s in raw.signs {
            phases.push(match (s, order) {
                (None, _) => None,
                (Some(SignJson::Residue(r)), SignOrder::Finite(x)) => {
                    if r >= x {
                        return Err(D::Error::custom(format!("residue {r} not below x={x}")));
                    }
                    Some(Turn::new(i64::from(r), i64::from(x)))
                }
                (Some(SignJson::Turn(t)), _) => {
                    let (p, q) = t.split_once('/').unwrap_or((t.as_str(), "1"));
                    let p: i64 = p.trim().parse().map_err(D::Error::custom)?;
                    let q: i64 = q.trim().parse().map_err(D::Error::custom)?;
                    if q == 0 {
                        return Err(D::Error::custom("zero denominator"));
                    }
                    Some(Turn::new(p, q))
                }
                (Some(SignJson::Residue(_)), SignOrder::Circle) => {
                    return Err(D::Error::custom("x=inf signs are written as \"p/q\" turns"))
                }
            });
        }
        SignedPartialPermutation::new(base, order, phases).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all(n: usize, x: u32) -> Vec<SignedPartialPermutation> {
        enumerate(n, SignOrder::Finite(x), None).unwrap().collect()
    }

    #[test]
    fn null_absorbs_and_identity_is_neutral() {
        for s in all(3, 1) {
            let b = s.base();
            assert_eq!(PartialPermutation::empty(3).compose(b).unwrap(), PartialPermutation::empty(3));
            assert_eq!(b.compose(&PartialPermutation::empty(3)).unwrap(), PartialPermutation::empty(3));
            assert_eq!(PartialPermutation::identity(3).compose(b).unwrap(), *b);
        }
    }

    #[test]
    fn compose_example() {
        let g = PartialPermutation::from_pairs(3, &[(0, 1)]).unwrap();
        let f = PartialPermutation::from_pairs(3, &[(1, 2)]).unwrap();
        let fg = f.compose(&g).unwrap();
        assert_eq!(fg, PartialPermutation::from_pairs(3, &[(0, 2)]).unwrap());
        assert!(f.compose(&PartialPermutation::identity(2)).is_err());
    }

    #[test]
    fn signed_compose_examples() {
        let one = PartialPermutation::identity(1);
        let minus = SignedPartialPermutation::with_residues(one.clone(), 2, vec![Some(1)]).unwrap();
        let prod = minus.compose(&minus).unwrap();
        assert_eq!(prod.residue(0), Some(0));

        let f = SignedPartialPermutation::with_residues(
            PartialPermutation::from_pairs(2, &[(0, 1)]).unwrap(),
            4,
            vec![Some(1), None],
        )
        .unwrap();
        let g = SignedPartialPermutation::with_residues(
            PartialPermutation::from_pairs(2, &[(1, 0)]).unwrap(),
            4,
            vec![None, Some(2)],
        )
        .unwrap();
        let fg = f.compose(&g).unwrap();
        assert_eq!(fg.base().get(1), Some(1));
        assert_eq!(fg.base().get(0), None);
        assert_eq!(fg.residue(1), Some(3));
        // matrix oracle
        let lhs = fg.to_matrix().unwrap();
        let rhs = f.to_matrix().unwrap().mul(&g.to_matrix().unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn mismatched_sign_groups() {
        let a = SignedPartialPermutation::unsigned(PartialPermutation::identity(2), SignOrder::Finite(2));
        let b = SignedPartialPermutation::unsigned(PartialPermutation::identity(2), SignOrder::Finite(3));
        assert!(matches!(a.compose(&b), Err(Error::Parameter(_))));
    }

    #[test]
    fn counts() {
        let expected = [1, 2, 7, 34, 209];
        for (n, &e) in expected.iter().enumerate() {
            assert_eq!(count(n as u64, 1), BigInt::from(e));
        }
        assert_eq!(count(5, 1), BigInt::from(1546));
        assert_eq!(count(1, 2), BigInt::from(3));
        assert_eq!(count(2, 2), BigInt::from(17));
    }

    #[test]
    fn enumeration_sizes_and_order() {
        let s1: Vec<_> = all(1, 1);
        assert_eq!(s1.len(), 2);
        assert_eq!(s1[0].kappa(), 0);
        assert_eq!(*s1[1].base(), PartialPermutation::identity(1));
        assert_eq!(enumerate(2, SignOrder::Finite(1), Some(1)).unwrap().count(), 4);
        assert_eq!(all(2, 2).len(), 17);
        assert!(matches!(
            enumerate(3, SignOrder::Circle, None),
            Err(Error::UnsupportedEnumeration)
        ));
        // colex domains: {0}, {1}, {2} for rank 1
        let r1: Vec<_> = enumerate(3, SignOrder::Finite(1), Some(1)).unwrap().collect();
        assert_eq!(r1[0].base().domain(), vec![0]);
        assert_eq!(r1[3].base().domain(), vec![1]);
        assert_eq!(r1[6].base().domain(), vec![2]);
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        for (n, x) in [(3usize, 1u32), (3, 2), (2, 3)] {
            let items = all(n, x);
            let set: std::collections::HashSet<_> = items.iter().cloned().collect();
            assert_eq!(set.len(), items.len());
            assert_eq!(BigInt::from(items.len()), count(n as u64, x as u64));
        }
    }

    #[test]
    fn matrix_images() {
        let id = SignedPartialPermutation::unsigned(PartialPermutation::identity(3), SignOrder::Finite(2));
        assert_eq!(id.to_matrix().unwrap(), CyclotomicMatrix::identity(3, 2));
        let e = SignedPartialPermutation::unsigned(PartialPermutation::empty(3), SignOrder::Finite(2));
        assert_eq!(e.to_matrix().unwrap(), CyclotomicMatrix::zeros(3, 2));
        let s = SignedPartialPermutation::with_residues(
            PartialPermutation::from_pairs(2, &[(0, 1)]).unwrap(),
            2,
            vec![Some(1), None],
        )
        .unwrap();
        let m = s.to_matrix().unwrap();
        assert_eq!(m.get(1, 0).as_scalar(), Some(BigInt::from(-1)));
        assert!(m.get(0, 0).is_zero() && m.get(0, 1).is_zero() && m.get(1, 1).is_zero());
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(PartialPermutation::identity(3).embed_s2n(), PartialPermutation::identity(6));
        let t = PartialPermutation::empty(1).embed_s2n();
        assert_eq!(t.as_slice(), &[Some(1), Some(0)]);
    }

    #[test]
    fn statistics() {
        let e = SignedPartialPermutation::unsigned(PartialPermutation::empty(4), SignOrder::Finite(1));
        assert_eq!(e.kappa(), 0);
        assert!(e.chi(4).is_zero());
        let id = SignedPartialPermutation::unsigned(PartialPermutation::identity(4), SignOrder::Finite(1));
        assert_eq!(id.kappa(), 4);
        assert_eq!(id.chi(4).as_scalar(), Some(BigInt::from(4)));
    }

    #[test]
    fn circle_phases_compose_and_chi() {
        let base = PartialPermutation::identity(2);
        let a = SignedPartialPermutation::new(
            base.clone(),
            SignOrder::Circle,
            vec![Some(Turn::new(1, 3)), Some(Turn::new(1, 4))],
        )
        .unwrap();
        let aa = a.compose(&a).unwrap();
        assert_eq!(aa.phase(0), Some(Turn::new(2, 3)));
        assert_eq!(aa.phase(1), Some(Turn::new(1, 2)));
        let chi = a.chi(2);
        assert_eq!(chi.order(), 12);
        let expect = num_complex::Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0)
            + num_complex::Complex64::from_polar(1.0, std::f64::consts::TAU / 4.0);
        assert!((chi.to_complex() - expect).norm() < 1e-12);
        assert!(a.to_matrix().is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_rank(5, 3, 4, &mut rng).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: SignedPartialPermutation = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let c = SignedPartialPermutation::new(
            PartialPermutation::identity(1),
            SignOrder::Circle,
            vec![Some(Turn::new(2, 7))],
        )
        .unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(text, r#"{"n":1,"x":"inf","map":[1],"signs":["2/7"]}"#);
        let back: SignedPartialPermutation = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<SignedPartialPermutation>(
            r#"{"n":2,"x":1,"map":[1,1],"signs":[0,0]}"#
        )
        .is_err());
    }

    #[test]
    fn invalid_inputs() {
        assert!(PartialPermutation::new(vec![Some(0), Some(0)]).is_err());
        assert!(PartialPermutation::new(vec![Some(2), None]).is_err());
        assert!(SignedPartialPermutation::with_residues(PartialPermutation::identity(1), 2, vec![Some(2)]).is_err());
        assert!(SignedPartialPermutation::with_residues(PartialPermutation::identity(1), 2, vec![None]).is_err());
        assert!(SignedPartialPermutation::with_residues(PartialPermutation::empty(1), 2, vec![Some(0)]).is_err());
    }
}
