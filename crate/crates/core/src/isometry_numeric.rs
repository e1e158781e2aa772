//! Floating point partial isometries: composition through the meet of
//! projections, class membership, Haar sampling of `T = U·E_k·V·E_kᵀ·W` and
//! Monte Carlo laws of the truncated character.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partial_maps::SignedPartialPermutation;
use crate::partitions::{Color, ColoredWord};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default validation tolerance `1e-9·n`.
pub fn default_tol(n: usize) -> f64 {
    1e-9 * n.max(1) as f64
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Deterministic generator for sample `index` of a seeded run.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Validated matrix with `UU*U = U`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialIsometryMatrix {
    entries: CMatrix,
    rank: usize,
    tol: f64,
}

impl PartialIsometryMatrix {
    pub fn new(entries: CMatrix, tol: f64) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension(format!(
                "partial isometry must be square, got {}×{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let n = entries.nrows();
        let residual = absorption_residual(&entries);
        // written so that a NaN residual fails
        if !(residual <= tol) {
            return Err(Error::Validation {
                what: "UU*U = U".into(),
                residual,
            });
        }
        let tr = (entries.adjoint() * &entries).trace().re;
        let rank = tr.round().max(0.0) as usize;
        let dev = (tr - rank as f64).abs();
        if !(dev <= n as f64 * tol) {
            return Err(Error::Validation {
                what: "integral trace of U*U".into(),
                residual: dev,
            });
        }
        Ok(PartialIsometryMatrix { entries, rank, tol })
    }

    pub fn with_default_tol(entries: CMatrix) -> Result<Self> {
        let tol = default_tol(entries.nrows());
        Self::new(entries, tol)
    }

    pub fn from_real(entries: &DMatrix<f64>) -> Result<Self> {
        Self::with_default_tol(entries.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        PartialIsometryMatrix {
            entries: CMatrix::identity(n, n),
            rank: n,
            tol: default_tol(n),
        }
    }

    pub fn zero(n: usize) -> Self {
        PartialIsometryMatrix {
            entries: CMatrix::zeros(n, n),
            rank: 0,
            tol: default_tol(n),
        }
    }

    /// Matrix of a signed partial permutation, `u[σ(j)][j] = ε(j)`.
    pub fn from_signed(s: &SignedPartialPermutation) -> Self {
        let n = s.n();
        let mut m = CMatrix::zeros(n, n);
        for j in 0..n {
            if let (Some(i), Some(t)) = (s.base().get(j), s.phase(j)) {
                m[(i, j)] = phase_exact(*t.numer(), *t.denom());
            }
        }
        PartialIsometryMatrix {
            entries: m,
            rank: s.kappa(),
            tol: default_tol(n),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn set_tol(&mut self, tol: f64) {
        self.tol = tol;
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        PartialIsometryMatrix {
            entries: self.entries.adjoint(),
            rank: self.rank,
            tol: self.tol,
        }
    }

    /// `U*U`, the projection onto the initial space.
    pub fn initial_projection(&self) -> CMatrix {
        self.entries.adjoint() * &self.entries
    }

    /// `UU*`, the projection onto the final space.
    pub fn final_projection(&self) -> CMatrix {
        &self.entries * self.entries.adjoint()
    }

    pub fn residual(&self) -> f64 {
        absorption_residual(&self.entries)
    }
}

/// `e^{2πi p/q}`, exact at multiples of a quarter turn.
fn phase_exact(p: i64, q: i64) -> Complex64 {
    let p = p.rem_euclid(q);
    if (4 * p) % q == 0 {
        match 4 * p / q {
            0 => ONE,
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, std::f64::consts::TAU * p as f64 / q as f64)
    }
}

/// `‖UU*U − U‖_∞`.
pub fn absorption_residual(u: &CMatrix) -> f64 {
    max_abs(&(u * u.adjoint() * u - u))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WedgeMethod {
    #[default]
    Spectral,
    Iterative,
}

impl FromStr for WedgeMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(WedgeMethod::Spectral),
            "iterative" => Ok(WedgeMethod::Iterative),
            _ => Err(Error::Parse(format!("unknown wedge method {s:?}"))),
        }
    }
}

/// Eigenvalue threshold below 2 for the spectral meet.
pub const SPECTRAL_THRESHOLD: f64 = 1e-9;
const ITERATIVE_STEP_TOL: f64 = 1e-12;
const ITERATIVE_MAX_STEPS: usize = 10_000;

fn check_projection(p: &CMatrix, tol: f64, name: &str) -> Result<()> {
    let idem = max_abs(&(p * p - p));
    let herm = max_abs(&(p - p.adjoint()));
    let residual = idem.max(herm);
    if !(residual <= tol) {
        return Err(Error::Validation {
            what: format!("{name} is an orthogonal projection"),
            residual,
        });
    }
    Ok(())
}

/// Orthogonal projection onto `range(P) ∩ range(Q)`.
pub fn wedge(p: &CMatrix, q: &CMatrix, method: WedgeMethod, tol: f64) -> Result<CMatrix> {
    if p.shape() != q.shape() || !p.is_square() {
        return Err(Error::Dimension("wedge of projections of different shapes".into()));
    }
    check_projection(p, tol, "P")?;
    check_projection(q, tol, "Q")?;
    let pq = p * q;
    // commuting projections meet in their product
    if max_abs(&(&pq - q * p)) == 0.0 {
        return Ok(pq);
    }
    Ok(match method {
        WedgeMethod::Spectral => wedge_spectral(p, q),
        WedgeMethod::Iterative => wedge_iterative(p, q),
    })
}

fn wedge_spectral(p: &CMatrix, q: &CMatrix) -> CMatrix {
    let n = p.nrows();
    let s = p + q;
    let s = (&s + s.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(s);
    let mut out = CMatrix::zeros(n, n);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > 2.0 - SPECTRAL_THRESHOLD {
            let v = eig.eigenvectors.column(i);
            out += v * v.adjoint();
        }
    }
    out
}

/// `lim (PQP)^m` by repeated squaring.
fn wedge_iterative(p: &CMatrix, q: &CMatrix) -> CMatrix {
    let half = Complex64::new(0.5, 0.0);
    let mut x = p * q * p;
    for _ in 0..ITERATIVE_MAX_STEPS {
        let y = &x * &x;
        let y = (&y + y.adjoint()) * half;
        let step = max_abs(&(&y - &x));
        x = y;
        if step < ITERATIVE_STEP_TOL {
            break;
        }
    }
    x
}

/// `U∘V = U(U*U ∧ VV*)V`.
pub fn compose(u: &PartialIsometryMatrix, v: &PartialIsometryMatrix) -> Result<PartialIsometryMatrix> {
    compose_with(u, v, WedgeMethod::Spectral)
}

pub fn compose_with(u: &PartialIsometryMatrix, v: &PartialIsometryMatrix, method: WedgeMethod) -> Result<PartialIsometryMatrix> {
    if u.n() != v.n() {
        return Err(Error::Dimension(format!("compose of sizes {} and {}", u.n(), v.n())));
    }
    let tol = u.tol.max(v.tol);
    let w = wedge(&u.initial_projection(), &v.final_projection(), method, tol)?;
    let out = &u.entries * w * &v.entries;
    PartialIsometryMatrix::new(out, tol)
}

/// `‖(U∘V)∘W − U∘(V∘W)‖_∞`.
pub fn associativity_residual(u: &PartialIsometryMatrix, v: &PartialIsometryMatrix, w: &PartialIsometryMatrix) -> Result<f64> {
    let left = compose(&compose(u, v)?, w)?;
    let right = compose(u, &compose(v, w)?)?;
    Ok(max_abs(&(left.entries - right.entries)))
}

/// Matrix semigroups of partial isometries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IsometryClass {
    /// real partial isometries
    O,
    /// all partial isometries
    U,
    /// real ones with `Uξ = UUᵗξ`
    B,
    /// signed partial permutation matrices
    H,
    /// partial permutation matrices with unimodular entries
    K,
    /// partial permutation matrices
    S,
}

impl IsometryClass {
    pub const ALL: [IsometryClass; 6] = [
        IsometryClass::O,
        IsometryClass::U,
        IsometryClass::B,
        IsometryClass::H,
        IsometryClass::K,
        IsometryClass::S,
    ];

    pub fn is_real(self) -> bool {
        !matches!(self, IsometryClass::U | IsometryClass::K)
    }
}

impl fmt::Display for IsometryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for IsometryClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "O" => Ok(IsometryClass::O),
            "U" => Ok(IsometryClass::U),
            "B" => Ok(IsometryClass::B),
            "H" => Ok(IsometryClass::H),
            "K" => Ok(IsometryClass::K),
            "S" => Ok(IsometryClass::S),
            _ => Err(Error::Parse(format!("unknown class {s:?} (O, U, B, H, K, S)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub class: IsometryClass,
    pub member: bool,
    pub residuals: BTreeMap<String, f64>,
}

/// Support pattern check: at most one entry above `tol` per row and column;
/// returns the worst deviation of the nonzero entries from `target`.
fn monomial_deviation(u: &CMatrix, tol: f64, target: impl Fn(Complex64) -> f64) -> (bool, f64) {
    let n = u.nrows();
    let big = |z: Complex64| z.norm() > tol;
    let rows_ok = (0..n).all(|i| (0..n).filter(|&j| big(u[(i, j)])).count() <= 1);
    let cols_ok = (0..n).all(|j| (0..n).filter(|&i| big(u[(i, j)])).count() <= 1);
    let dev = u.iter().filter(|z| big(**z)).map(|z| target(*z)).fold(0.0, f64::max);
    (rows_ok && cols_ok, dev)
}

pub fn membership(u: &PartialIsometryMatrix, class: IsometryClass, tol: f64) -> Membership {
    let m = &u.entries;
    let mut residuals = BTreeMap::new();
    let imag = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let member = match class {
        IsometryClass::U => true,
        IsometryClass::O => {
            residuals.insert("imaginary".into(), imag);
            imag <= tol
        }
        IsometryClass::B => {
            let n = u.n();
            let xi = CMatrix::from_element(n, 1, ONE);
            let lhs = m * &xi;
            let rhs = m * m.transpose() * &xi;
            let r = max_abs(&(lhs - rhs));
            residuals.insert("imaginary".into(), imag);
            residuals.insert("xi".into(), r);
            imag <= tol && r <= tol
        }
        IsometryClass::H | IsometryClass::K | IsometryClass::S => {
            let (pattern, dev) = monomial_deviation(m, tol, |z| match class {
                IsometryClass::H => (z - Complex64::new(z.re.signum(), 0.0)).norm(),
                IsometryClass::K => (z.norm() - 1.0).abs(),
                _ => (z - ONE).norm(),
            });
            residuals.insert("pattern".into(), if pattern { 0.0 } else { 1.0 });
            residuals.insert("entries".into(), dev);
            pattern && dev <= tol
        }
    };
    Membership {
        class,
        member,
        residuals,
    }
}

fn gaussian_real<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn gaussian_complex<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal) * s, rng.sample::<f64, _>(StandardNormal) * s)
    })
}

/// `n × k` matrix with Haar-distributed orthonormal columns (the first `k`
/// columns of a Haar orthogonal matrix).
pub fn haar_stiefel_real<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> DMatrix<f64> {
    if k == 0 {
        return DMatrix::zeros(n, 0);
    }
    let qr = gaussian_real(n, k, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn haar_stiefel_complex<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> CMatrix {
    if k == 0 {
        return CMatrix::zeros(n, 0);
    }
    let qr = gaussian_complex(n, k, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            q.column_mut(j).scale_mut_complex(ph);
        }
    }
    q
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, c: Complex64);
}

impl<S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>> ScaleComplex
    for nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>
{
    fn scale_mut_complex(&mut self, c: Complex64) {
        for z in self.iter_mut() {
            *z *= c;
        }
    }
}

pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    haar_stiefel_real(n, n, rng)
}

pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    haar_stiefel_complex(n, n, rng)
}

/// Householder reflection taking `e_0` to `ξ/√n`; its columns are an
/// orthonormal completion of `ξ/√n`.
fn xi_frame(n: usize) -> DMatrix<f64> {
    let s = 1.0 / (n as f64).sqrt();
    let mut v = nalgebra::DVector::from_element(n, s);
    v[0] -= 1.0;
    let nv = v.norm_squared();
    if nv == 0.0 {
        return DMatrix::identity(n, n);
    }
    DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / nv)
}

/// Haar element of `B_N ≅ O_{N-1}`: orthogonal matrices fixing `ξ`.
pub fn haar_bistochastic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    if n <= 1 {
        return DMatrix::identity(n, n);
    }
    let f = xi_frame(n);
    let mut inner = DMatrix::zeros(n, n);
    inner[(0, 0)] = 1.0;
    inner.view_mut((1, 1), (n - 1, n - 1)).copy_from(&haar_orthogonal(n - 1, rng));
    &f * inner * f.transpose()
}

/// Uniform permutation matrix with i.i.d. phases drawn by `phase`.
fn monomial<R: Rng + ?Sized>(n: usize, rng: &mut R, mut phase: impl FnMut(&mut R) -> Complex64) -> CMatrix {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut m = CMatrix::zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        m[(i, j)] = phase(rng);
    }
    m
}

/// Haar element of the group attached to `class` in dimension `n`.
pub fn haar<R: Rng + ?Sized>(class: IsometryClass, n: usize, rng: &mut R) -> CMatrix {
    let real = |m: DMatrix<f64>| m.map(|x| Complex64::new(x, 0.0));
    match class {
        IsometryClass::O => real(haar_orthogonal(n, rng)),
        IsometryClass::U => haar_unitary(n, rng),
        IsometryClass::B => real(haar_bistochastic(n, rng)),
        IsometryClass::H => monomial(n, rng, |r| if r.random::<bool>() { ONE } else { -ONE }),
        IsometryClass::K => monomial(n, rng, |r| Complex64::from_polar(1.0, std::f64::consts::TAU * r.random::<f64>())),
        IsometryClass::S => monomial(n, rng, |_| ONE),
    }
}

/// Embedding `E_k: C^k → C^N` onto the first `k` coordinates.
fn embedding(n: usize, k: usize) -> CMatrix {
    CMatrix::from_fn(n, k, |i, j| if i == j { ONE } else { ZERO })
}

/// `T = U·E_k·V·E_kᵀ·W` with `U, W` Haar on `G_N` and `V` Haar on `G_k`.
pub fn sample_with<R: Rng + ?Sized>(class: IsometryClass, n: usize, k: usize, rng: &mut R) -> Result<PartialIsometryMatrix> {
    if k > n {
        return Err(Error::Parameter(format!("rank k={k} exceeds N={n}")));
    }
    let u = haar(class, n, rng);
    let v = haar(class, k, rng);
    let w = haar(class, n, rng);
    let e = embedding(n, k);
    let t = u * &e * v * e.transpose() * w;
    let mut out = PartialIsometryMatrix::with_default_tol(t)?;
    out.rank = k;
    Ok(out)
}

/// Seeded [`sample_with`].
pub fn sample(class: IsometryClass, n: usize, k: usize, seed: u64) -> Result<PartialIsometryMatrix> {
    sample_with(class, n, k, &mut stream_rng(seed, 0))
}

/// `χ_l(T) = Σ_{i<l} T_ii` for one draw of `T`.
///
/// For `O` and `U` only the first `k` columns of `U` and rows of `W` matter,
/// and these are drawn directly as Haar Stiefel frames.
pub fn sample_character<R: Rng + ?Sized>(class: IsometryClass, n: usize, k: usize, l: usize, rng: &mut R) -> Result<Complex64> {
    if k > n || l > n {
        return Err(Error::Parameter(format!("need k,l ≤ N, got N={n} k={k} l={l}")));
    }
    match class {
        IsometryClass::O => {
            let a = haar_stiefel_real(n, k, rng);
            let v = haar_orthogonal(k, rng);
            let b = haar_stiefel_real(n, k, rng);
            // T = a v bᵗ
            let av = a.rows(0, l) * v;
            let bl = b.rows(0, l);
            Ok(Complex64::new(av.component_mul(&bl).sum(), 0.0))
        }
        IsometryClass::U => {
            let a = haar_stiefel_complex(n, k, rng);
            let v = haar_unitary(k, rng);
            let b = haar_stiefel_complex(n, k, rng);
            // W's first k rows are the adjoint of a Haar Stiefel frame
            let av = a.rows(0, l) * v;
            let bl = b.rows(0, l).map(|z| z.conj());
            Ok(av.component_mul(&bl).sum())
        }
        _ => {
            let t = sample_with(class, n, k, rng)?;
            Ok((0..l).map(|i| t.entries[(i, i)]).sum())
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentEstimate {
    pub word: ColoredWord,
    pub re: f64,
    pub im: f64,
    /// Standard error of the complex mean.
    pub se: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloLaw {
    pub class: IsometryClass,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub samples: usize,
    pub seed: u64,
    pub moments: Vec<MomentEstimate>,
    #[serde(skip)]
    pub values: Vec<Complex64>,
}

impl MonteCarloLaw {
    pub fn moment(&self, word: &ColoredWord) -> Option<&MomentEstimate> {
        self.moments.iter().find(|m| &m.word == word)
    }

    pub fn real_moment(&self, n: usize) -> Option<&MomentEstimate> {
        self.moment(&ColoredWord::all_ones(n))
    }

    /// Counts of values falling in `bins` equal bins over `[lo, hi)` (real parts).
    pub fn histogram(&self, lo: f64, hi: f64, bins: usize) -> Vec<(f64, usize)> {
        let w = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for z in &self.values {
            let b = ((z.re - lo) / w).floor();
            if b >= 0.0 && (b as usize) < bins {
                counts[b as usize] += 1;
            }
        }
        counts.into_iter().enumerate().map(|(i, c)| (lo + w * i as f64, c)).collect()
    }

    /// Empirical law of integer-valued characters (exact for `S`/`H` classes).
    pub fn integer_frequencies(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for z in &self.values {
            *out.entry(z.re.round() as i64).or_insert(0) += 1;
        }
        out
    }
}

/// Evaluates `z^{#1} z̄^{#*}`.
pub fn word_value(z: Complex64, word: &ColoredWord) -> Complex64 {
    word.0.iter().fold(ONE, |acc, c| match c {
        Color::One => acc * z,
        Color::Star => acc * z.conj(),
    })
}

/// Empirical *-moments of `χ_l` for the given words over `samples` seeded
/// draws. Sample `i` always uses stream `i` of the seed, so the result does
/// not depend on the thread count.
pub fn monte_carlo_law(
    class: IsometryClass,
    n: usize,
    k: usize,
    l: usize,
    samples: usize,
    seed: u64,
    words: &[ColoredWord],
) -> Result<MonteCarloLaw> {
    if samples == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let values = (0..samples as u64)
        .into_par_iter()
        .map(|i| sample_character(class, n, k, l, &mut stream_rng(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let cnt = samples as f64;
    let moments = words
        .iter()
        .map(|w| {
            let xs: Vec<Complex64> = values.iter().map(|&z| word_value(z, w)).collect();
            let mean = xs.iter().sum::<Complex64>() / cnt;
            let var = if samples > 1 {
                xs.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (cnt - 1.0)
            } else {
                0.0
            };
            MomentEstimate {
                word: w.clone(),
                re: mean.re,
                im: mean.im,
                se: (var / cnt).sqrt(),
            }
        })
        .collect();
    Ok(MonteCarloLaw {
        class,
        n,
        k,
        l,
        samples,
        seed,
        moments,
        values,
    })
}

/// Real moment words `1, 11, …` up to `n_max`.
pub fn real_words(n_max: usize) -> Vec<ColoredWord> {
    (1..=n_max).map(ColoredWord::all_ones).collect()
}

// ---------------------------------------------------------------- JSON

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    entries: Vec<Vec<[f64; 2]>>,
}

/// Rows of `[re, im]` pairs.
pub fn matrix_to_json(m: &CMatrix) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    serde_json::json!(rows)
}

pub fn matrix_from_json(v: &serde_json::Value) -> Result<CMatrix> {
    let rows: Vec<Vec<serde_json::Value>> =
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("matrix rows: {e}")))?;
    let n = rows.len();
    let mut m = CMatrix::zeros(n, rows.first().map_or(0, Vec::len));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != m.ncols() {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = match e {
                serde_json::Value::Number(x) => Complex64::new(x.as_f64().unwrap_or(f64::NAN), 0.0),
                _ => {
                    let [re, im]: [f64; 2] = serde_json::from_value(e.clone())
                        .map_err(|e| Error::Parse(format!("matrix entry: {e}")))?;
                    Complex64::new(re, im)
                }
            };
        }
    }
    Ok(m)
}

impl Serialize for PartialIsometryMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m = &self.entries;
        MatrixJson {
            n: self.n(),
            rank: Some(self.rank),
            entries: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PartialIsometryMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MatrixJson::deserialize(d)?;
        if raw.entries.len() != raw.n || raw.entries.iter().any(|r| r.len() != raw.n) {
            return Err(D::Error::custom("entries must be n×n"));
        }
        let m = CMatrix::from_fn(raw.n, raw.n, |i, j| Complex64::new(raw.entries[i][j][0], raw.entries[i][j][1]));
        PartialIsometryMatrix::with_default_tol(m).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partial_maps::{enumerate, sample_rank, SignOrder};

    fn rng(i: u64) -> ChaCha8Rng {
        stream_rng(11, i)
    }

    fn random_projection(n: usize, r: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = haar_stiefel_complex(n, r, rng);
        &a * a.adjoint()
    }

    #[test]
    fn wedge_examples() {
        let mut g = rng(0);
        let p = random_projection(4, 2, &mut g);
        let w = wedge(&p, &p, WedgeMethod::Spectral, 1e-9).unwrap();
        assert!(max_abs(&(&w - &p)) < 1e-10);
        let w = wedge(&p, &p, WedgeMethod::Iterative, 1e-9).unwrap();
        assert!(max_abs(&(&w - &p)) < 1e-10);

        let d1 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, ONE, ZERO]));
        let d2 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ZERO, ONE, ONE]));
        assert_eq!(wedge(&d1, &d2, WedgeMethod::Spectral, 1e-9).unwrap(), &d1 * &d2);

        let a = random_projection(2, 1, &mut g);
        let b = random_projection(2, 1, &mut g);
        for m in [WedgeMethod::Spectral, WedgeMethod::Iterative] {
            assert!(max_abs(&wedge(&a, &b, m, 1e-9).unwrap()) < 1e-10);
        }
        let bad = CMatrix::from_element(2, 2, ONE);
        assert!(matches!(wedge(&bad, &a, WedgeMethod::Spectral, 1e-9), Err(Error::Validation { .. })));
    }

    #[test]
    fn wedge_methods_agree() {
        for i in 0..40u64 {
            let mut g = rng(100 + i);
            let n = 2 + (i as usize % 15);
            // shared subspace of dimension c plus generic extra directions
            let c = (i as usize) % n.min(3);
            let base = haar_unitary(n, &mut g);
            let common = base.columns(0, c).into_owned();
            let extra = |g: &mut ChaCha8Rng| {
                let r = (n - c) / 2;
                let mut cols = common.clone().resize_horizontally(c + r, ZERO);
                let rest = haar_stiefel_complex(n - c, r, g);
                let tail = base.columns(c, n - c) * rest;
                cols.columns_mut(c, r).copy_from(&tail);
                &cols * cols.adjoint()
            };
            let p = extra(&mut g);
            let q = extra(&mut g);
            let s = wedge(&p, &q, WedgeMethod::Spectral, 1e-9).unwrap();
            let t = wedge(&p, &q, WedgeMethod::Iterative, 1e-9).unwrap();
            assert!(max_abs(&(&s - &t)) < 1e-10, "n={n} c={c}: {}", max_abs(&(&s - &t)));
            assert!((s.trace().re - c as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn compose_examples() {
        let mut g = rng(1);
        let u = sample_with(IsometryClass::U, 5, 3, &mut g).unwrap();
        let id = PartialIsometryMatrix::identity(5);
        assert!(max_abs(&(compose(&id, &u).unwrap().entries - &u.entries)) < 1e-12);
        let a = PartialIsometryMatrix::with_default_tol(haar_unitary(5, &mut g)).unwrap();
        let b = PartialIsometryMatrix::with_default_tol(haar_unitary(5, &mut g)).unwrap();
        let ab = compose(&a, &b).unwrap();
        assert!(max_abs(&(ab.entries - &a.entries * &b.entries)) < 1e-12);
        let bad = PartialIsometryMatrix::identity(4);
        assert!(matches!(compose(&a, &bad), Err(Error::Dimension(_))));
    }

    #[test]
    fn compose_matches_partial_maps_s5() {
        let mut g = rng(2);
        for _ in 0..200 {
            let k1 = g.random_range(0..=5);
            let k2 = g.random_range(0..=5);
            let f = sample_rank(5, k1, 2, &mut g).unwrap();
            let h = sample_rank(5, k2, 2, &mut g).unwrap();
            let lhs = compose(&PartialIsometryMatrix::from_signed(&f), &PartialIsometryMatrix::from_signed(&h)).unwrap();
            let rhs = PartialIsometryMatrix::from_signed(&f.compose(&h).unwrap());
            assert_eq!(lhs.entries, rhs.entries);
        }
    }

    #[test]
    fn subinverse_and_rank() {
        let mut g = rng(3);
        for class in IsometryClass::ALL {
            let u = sample_with(class, 6, 4, &mut g).unwrap();
            assert_eq!(u.rank(), 4);
            let us = u.adjoint();
            let back = compose(&compose(&us, &u).unwrap(), &us).unwrap();
            assert!(max_abs(&(back.entries - &us.entries)) < 1e-9);
            assert!(membership(&u, class, 1e-9).member, "{class}");
        }
    }

    #[test]
    fn membership_examples() {
        let id = PartialIsometryMatrix::identity(3);
        for c in IsometryClass::ALL {
            assert!(membership(&id, c, 1e-9).member);
        }
        let mut d = CMatrix::zeros(3, 3);
        d[(0, 0)] = ONE;
        d[(1, 1)] = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let d = PartialIsometryMatrix::with_default_tol(d).unwrap();
        assert!(membership(&d, IsometryClass::K, 1e-9).member);
        assert!(membership(&d, IsometryClass::U, 1e-9).member);
        assert!(!membership(&d, IsometryClass::O, 1e-9).member);
        let o = PartialIsometryMatrix::from_real(&haar_orthogonal(3, &mut rng(4))).unwrap();
        assert!(membership(&o, IsometryClass::O, 1e-9).member);
        assert!(!membership(&o, IsometryClass::H, 1e-9).member);
    }

    #[test]
    fn sampling_examples() {
        let z = sample(IsometryClass::O, 4, 0, 1).unwrap();
        assert_eq!(z.rank(), 0);
        assert!(max_abs(z.entries()) == 0.0);
        let o = sample(IsometryClass::O, 4, 4, 1).unwrap();
        let r = max_abs(&(o.entries().adjoint() * o.entries() - CMatrix::identity(4, 4)));
        assert!(r < 1e-12);
        let t = sample(IsometryClass::O, 2, 1, 5).unwrap();
        assert!((t.final_projection().trace().re - 1.0).abs() < 1e-12);
        assert!((t.initial_projection().trace().re - 1.0).abs() < 1e-12);
        assert_eq!(sample(IsometryClass::U, 5, 2, 9).unwrap(), sample(IsometryClass::U, 5, 2, 9).unwrap());
        assert!(sample(IsometryClass::U, 3, 4, 9).is_err());
        let b = haar_bistochastic(5, &mut rng(6));
        let xi = nalgebra::DVector::from_element(5, 1.0);
        assert!((&b * &xi - &xi).amax() < 1e-12);
    }

    #[test]
    fn associativity_examples() {
        let s3: Vec<_> = enumerate(3, SignOrder::Finite(1), None).unwrap().collect();
        for a in s3.iter().step_by(5) {
            for b in s3.iter().step_by(3) {
                for c in s3.iter().step_by(7) {
                    let m = |x| PartialIsometryMatrix::from_signed(x);
                    assert_eq!(associativity_residual(&m(a), &m(b), &m(c)).unwrap(), 0.0);
                }
            }
        }
        let mut g = rng(7);
        for _ in 0..20 {
            let u = sample_with(IsometryClass::U, 6, g.random_range(0..=6), &mut g).unwrap();
            let v = sample_with(IsometryClass::U, 6, g.random_range(0..=6), &mut g).unwrap();
            let w = sample_with(IsometryClass::U, 6, g.random_range(0..=6), &mut g).unwrap();
            assert!(associativity_residual(&u, &v, &w).unwrap() < 1e-8);
        }
    }

    #[test]
    fn monte_carlo_unitary_mean_vanishes() {
        let law = monte_carlo_law(IsometryClass::U, 6, 6, 6, 4000, 3, &real_words(1)).unwrap();
        let m = law.real_moment(1).unwrap();
        assert!(m.re.hypot(m.im) < 3.5 * m.se);
        let again = monte_carlo_law(IsometryClass::U, 6, 6, 6, 4000, 3, &real_words(1)).unwrap();
        assert_eq!(again.values, law.values);
    }

    #[test]
    fn fast_path_matches_full_sampler_in_law() {
        // second moment of χ for O at (N,k,l) = (6,3,3) from both samplers
        let second = |fast: bool| {
            let xs: Vec<f64> = (0..6000u64)
                .map(|i| {
                    let mut g = stream_rng(21, i);
                    if fast {
                        sample_character(IsometryClass::O, 6, 3, 3, &mut g).unwrap().re
                    } else {
                        let t = sample_with(IsometryClass::O, 6, 3, &mut g).unwrap();
                        (0..3).map(|i| t.entries()[(i, i)].re).sum()
                    }
                })
                .collect();
            let m = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
            let v = xs.iter().map(|x| (x * x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0);
            (m, (v / xs.len() as f64).sqrt())
        };
        let (a, sa) = second(true);
        let (b, sb) = second(false);
        assert!((a - b).abs() < 4.0 * sa.hypot(sb), "{a} vs {b}");
    }

    #[test]
    fn json_round_trip() {
        let u = sample(IsometryClass::K, 3, 2, 4).unwrap();
        let text = serde_json::to_string(&u).unwrap();
        let back: PartialIsometryMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back.entries(), u.entries());
        let v = matrix_to_json(u.entries());
        assert_eq!(&matrix_from_json(&v).unwrap(), u.entries());
        assert!(serde_json::from_str::<PartialIsometryMatrix>(r#"{"n":1,"entries":[[[2,0]]]}"#).is_err());
    }
}
