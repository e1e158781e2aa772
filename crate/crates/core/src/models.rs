//! The 2×2 crossed-product model of half-liberated coordinates, the
//! relation checkers `abc = cba` / `ab*c = cb*a`, and the complex doubling
//! `A + iB ↦ [[A, B], [−B, A]]`.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::isometry_numeric::{
    absorption_residual, compose, max_abs, membership, stream_rng, CMatrix, IsometryClass, PartialIsometryMatrix,
};

pub type Block = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn block_norm(b: &Block) -> f64 {
    b.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `n × n` array of 2×2 blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockModelMatrix {
    n: usize,
    blocks: Vec<Block>,
}

impl BlockModelMatrix {
    /// Arbitrary blocks in row-major order.
    pub fn from_blocks(n: usize, blocks: Vec<Block>) -> Result<Self> {
        if blocks.len() != n * n {
            return Err(Error::Dimension(format!("{} blocks for n={n}", blocks.len())));
        }
        Ok(BlockModelMatrix { n, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block(&self, i: usize, j: usize) -> &Block {
        &self.blocks[i * self.n + j]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Every block has the form `[[0, u], [ū, 0]]`.
    pub fn is_crossed_form(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| {
            b[(0, 0)].norm() <= tol && b[(1, 1)].norm() <= tol && (b[(1, 0)] - b[(0, 1)].conj()).norm() <= tol
        })
    }

    /// `max ‖v_ij − v_ij*‖`.
    pub fn self_adjoint_residual(&self) -> f64 {
        self.blocks.iter().map(|b| block_norm(&(b - b.adjoint()))).fold(0.0, f64::max)
    }

    /// `max_ij ‖Σ_{kl} v_ik v_lk v_lj − v_ij‖`.
    pub fn vvtv_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Block::zeros();
                for k in 0..n {
                    for l in 0..n {
                        acc += self.block(i, k) * self.block(l, k) * self.block(l, j);
                    }
                }
                worst = worst.max(block_norm(&(acc - self.block(i, j))));
            }
        }
        worst
    }
}

/// `v_ij = [[0, u_ij], [conj(u_ij), 0]]`.
pub fn crossed_model(u: &PartialIsometryMatrix) -> BlockModelMatrix {
    let m = u.entries();
    let n = u.n();
    let blocks = (0..n * n)
        .map(|a| {
            let z = m[(a / n, a % n)];
            Block::new(ZERO, z, z.conj(), ZERO)
        })
        .collect();
    BlockModelMatrix { n, blocks }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `abc = cba`
    AbcCba,
    /// `ab*c = cb*a`
    AbStarC,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::AbcCba => "abc_cba",
            Relation::AbStarC => "abstarc",
        })
    }
}

impl FromStr for Relation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abc_cba" | "abc" => Ok(Relation::AbcCba),
            "abstarc" | "ab*c" => Ok(Relation::AbStarC),
            _ => Err(Error::Parse(format!("unknown relation {s:?} (abc_cba, abstarc)"))),
        }
    }
}

/// Label of a scanned element: matrix position, and whether it is the adjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub i: usize,
    pub j: usize,
    pub adjoint: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationReport {
    pub variant: Relation,
    pub max_residual: f64,
    pub argmax_triple: Option<[Slot; 3]>,
    pub pass: bool,
    pub triples: u64,
    pub exhaustive: bool,
}

/// Largest `n` scanned exhaustively.
pub const EXHAUSTIVE_MAX_N: usize = 6;
pub const RANDOM_TRIPLES: u64 = 100_000;

/// Elements of a relation scan with their labels.
pub struct RelationInput {
    elements: Vec<(Slot, Block)>,
}

impl RelationInput {
    fn from_blocks(n: usize, blocks: &[Block], with_adjoints: bool) -> Self {
        let mut elements: Vec<(Slot, Block)> = blocks
            .iter()
            .enumerate()
            .map(|(a, b)| (Slot { i: a / n, j: a % n, adjoint: false }, *b))
            .collect();
        let self_adjoint = blocks.iter().all(|b| block_norm(&(b - b.adjoint())) == 0.0);
        if with_adjoints && !self_adjoint {
            let adj: Vec<_> = elements
                .iter()
                .map(|(s, b)| (Slot { adjoint: true, ..*s }, b.adjoint()))
                .collect();
            elements.extend(adj);
        }
        RelationInput { elements }
    }

    pub fn model(m: &BlockModelMatrix, relation: Relation) -> Self {
        Self::from_blocks(m.n, &m.blocks, relation == Relation::AbcCba)
    }

    /// Scalar entries, as multiples of the 2×2 identity.
    pub fn scalars(m: &CMatrix, relation: Relation) -> Self {
        let n = m.nrows();
        let blocks: Vec<Block> = (0..n * n)
            .map(|a| Block::identity() * m[(a / n, a % n)])
            .collect();
        Self::from_blocks(n, &blocks, relation == Relation::AbcCba)
    }

    fn side(&self) -> usize {
        self.elements.iter().map(|(s, _)| s.i.max(s.j) + 1).max().unwrap_or(0)
    }
}

fn triple_residual(relation: Relation, a: &Block, b: &Block, c: &Block) -> f64 {
    let d = match relation {
        Relation::AbcCba => a * b * c - c * b * a,
        Relation::AbStarC => {
            let bs = b.adjoint();
            a * bs * c - c * bs * a
        }
    };
    block_norm(&d)
}

/// Max residual of the relation over all ordered triples of elements when
/// the side is at most [`EXHAUSTIVE_MAX_N`], over [`RANDOM_TRIPLES`] seeded
/// random triples otherwise.
pub fn check_half_commutation(input: &RelationInput, relation: Relation, tol: f64, seed: u64) -> RelationReport {
    let e = &input.elements;
    let m = e.len();
    let mut worst = 0.0;
    let mut arg = None;
    let mut visit = |x: usize, y: usize, z: usize| {
        let r = triple_residual(relation, &e[x].1, &e[y].1, &e[z].1);
        if r > worst || arg.is_none() {
            worst = r;
            arg = Some([e[x].0, e[y].0, e[z].0]);
        }
    };
    let exhaustive = input.side() <= EXHAUSTIVE_MAX_N;
    let triples = if m == 0 {
        0
    } else if exhaustive {
        for x in 0..m {
            for y in 0..m {
                for z in 0..m {
                    visit(x, y, z);
                }
            }
        }
        (m as u64).pow(3)
    } else {
        let mut rng = stream_rng(seed, 0);
        for _ in 0..RANDOM_TRIPLES {
            let (x, y, z) = (rng.random_range(0..m), rng.random_range(0..m), rng.random_range(0..m));
            visit(x, y, z);
        }
        RANDOM_TRIPLES
    };
    RelationReport {
        variant: relation,
        max_residual: worst,
        argmax_triple: arg,
        pass: worst <= tol,
        triples,
        exhaustive,
    }
}

/// `[[A, B], [−B, A]]` for `U = A + iB`.
pub fn double_matrix(u: &CMatrix) -> CMatrix {
    let n = u.nrows();
    CMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (bi, i) = (r / n, r % n);
        let (bj, j) = (c / n, c % n);
        let z = u[(i, j)];
        let v = match (bi, bj) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => z.im,
            _ => -z.im,
        };
        Complex64::new(v, 0.0)
    })
}

/// Real `2N × 2N` doubling of a partial isometry; the rank doubles.
pub fn double(u: &PartialIsometryMatrix) -> Result<PartialIsometryMatrix> {
    PartialIsometryMatrix::new(double_matrix(u.entries()), u.tol().max(crate::isometry_numeric::default_tol(2 * u.n())))
}

/// Whether a `2N × 2N` matrix has the pattern `[[A, B], [−B, A]]`.
pub fn doubling_pattern_residual(m: &CMatrix) -> f64 {
    let n = m.nrows() / 2;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst
                .max((m[(i, j)] - m[(n + i, n + j)]).norm())
                .max((m[(i, n + j)] + m[(n + i, j)]).norm());
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoubleComposeReport {
    pub max_residual: f64,
    pub pass: bool,
}

/// `‖double(U∘V) − double(U)∘double(V)‖_∞ ≤ tol`.
pub fn double_compose_check(u: &PartialIsometryMatrix, v: &PartialIsometryMatrix, tol: f64) -> Result<DoubleComposeReport> {
    let lhs = double(&compose(u, v)?)?;
    let rhs = compose(&double(u)?, &double(v)?)?;
    let r = max_abs(&(lhs.entries() - rhs.entries()));
    Ok(DoubleComposeReport {
        max_residual: r,
        pass: r <= tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RestrictedTarget {
    /// doubling of `K̃_N` lands in `H̃_{2N}` with rotation-block pattern
    H2NFromK,
    /// doubling of `Ũ_N` lands in `Õ_{2N}` with the doubling pattern
    O2NFromU,
}

impl FromStr for RestrictedTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H2N_from_K" | "h2n" => Ok(RestrictedTarget::H2NFromK),
            "O2N_from_U" | "o2n" => Ok(RestrictedTarget::O2NFromU),
            _ => Err(Error::Parse(format!("unknown target {s:?} (H2N_from_K, O2N_from_U)"))),
        }
    }
}

/// Membership of `double(U)` in the stated intersection class.
pub fn restricted_class_check(u: &PartialIsometryMatrix, target: RestrictedTarget, tol: f64) -> Result<bool> {
    let d = double(u)?;
    let m = d.entries();
    if doubling_pattern_residual(m) > tol || !membership(&d, IsometryClass::O, tol).member {
        return Ok(false);
    }
    match target {
        RestrictedTarget::O2NFromU => Ok(true),
        RestrictedTarget::H2NFromK => {
            // 2×2 bands (i, n+i) × (j, n+j): at most one nonzero rotation block per band
            let n = u.n();
            let band = |i: usize, j: usize| -> [f64; 4] {
                [m[(i, j)].re, m[(i, n + j)].re, m[(n + i, j)].re, m[(n + i, n + j)].re]
            };
            let nonzero = |b: &[f64; 4]| b.iter().any(|x| x.abs() > tol);
            for i in 0..n {
                let cnt_row = (0..n).filter(|&j| nonzero(&band(i, j))).count();
                let cnt_col = (0..n).filter(|&j| nonzero(&band(j, i))).count();
                if cnt_row > 1 || cnt_col > 1 {
                    return Ok(false);
                }
                for j in 0..n {
                    let b = band(i, j);
                    if nonzero(&b) && ((b[0] * b[0] + b[1] * b[1]) - 1.0).abs() > tol {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingEquivalence {
    pub source_residual: f64,
    pub double_residual: f64,
    pub source_member: bool,
    pub double_member: bool,
}

impl DoublingEquivalence {
    /// Both predicates agree and the residuals are within a factor 10.
    pub fn consistent(&self) -> bool {
        let (a, b) = (self.source_residual, self.double_residual);
        let close = (a <= 10.0 * b + 1e-15) && (b <= 10.0 * a + 1e-15);
        self.source_member == self.double_member && close
    }
}

/// Compares `UU*U = U` for `U` with `DDᵗD = D` for its doubling `D`, for an
/// arbitrary complex matrix.
pub fn doubling_equivalence(u: &CMatrix, tol: f64) -> DoublingEquivalence {
    let d = double_matrix(u);
    let source_residual = absorption_residual(u);
    let double_residual = absorption_residual(&d);
    DoublingEquivalence {
        source_residual,
        double_residual,
        source_member: source_residual <= tol,
        double_member: double_residual <= tol,
    }
}

/// Entries `x·G₁`, `y·G₂` with `G₁ = diag(1, i)` and `G₂` the swap. Any
/// triple from a two-element set of unitaries satisfies `ab*c = cb*a`, while
/// `G₁G₁G₂ ≠ G₂G₁G₁`.
pub fn separating_witness(x: f64, y: f64) -> BlockModelMatrix {
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let g1 = Block::new(one, ZERO, ZERO, i) * Complex64::new(x, 0.0);
    let g2 = Block::new(ZERO, one, one, ZERO) * Complex64::new(y, 0.0);
    // arranged as [[g1, g2], [0, 0]]
    BlockModelMatrix {
        n: 2,
        blocks: vec![g1, g2, Block::zeros(), Block::zeros()],
    }
}

// ---------------------------------------------------------------- JSON

impl Serialize for BlockModelMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let blocks: Vec<Vec<[[f64; 2]; 4]>> = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        let b = self.block(i, j);
                        [
                            [b[(0, 0)].re, b[(0, 0)].im],
                            [b[(0, 1)].re, b[(0, 1)].im],
                            [b[(1, 0)].re, b[(1, 0)].im],
                            [b[(1, 1)].re, b[(1, 1)].im],
                        ]
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({ "n": self.n, "blocks": blocks }).serialize(s)
    }
}
