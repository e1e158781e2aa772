//! Gram and Weingarten matrices over partition categories, Haar integrals of
//! coordinate words and the three-factor moments of `χ_k^l`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{format_rational, int, RationalMatrix};
use crate::measures::partition_moments;
use crate::partitions::{enumerate_partitions, Category, ColoredWord, SetPartition};

/// Gram matrix `N^{|p∨q|}` over a category basis together with its exact
/// inverse.
#[derive(Clone, Debug)]
pub struct WeingartenTable {
    pub n: usize,
    pub dim: u64,
    pub cat: Category,
    pub word: Option<ColoredWord>,
    pub basis: Vec<SetPartition>,
    /// Integer entries stored as rationals.
    pub gram: RationalMatrix,
    pub wg: RationalMatrix,
}

/// `N^{|p∨q|}` over `basis`.
pub fn gram_matrix(basis: &[SetPartition], dim: u64) -> RationalMatrix {
    let m = basis.len();
    let mut g = RationalMatrix::zeros(m, m);
    let d = BigInt::from(dim);
    for i in 0..m {
        for j in i..m {
            let b = basis[i].join(&basis[j]).expect("same ground set").num_blocks();
            let v = BigRational::from_integer(d.pow(b as u32));
            g[(i, j)] = v.clone();
            g[(j, i)] = v;
        }
    }
    g
}

fn category_basis(n: usize, cat: Category, word: Option<&ColoredWord>) -> Result<Vec<SetPartition>> {
    let word = match (cat.color_order(), word) {
        (Some(_), None) => Some(ColoredWord::all_ones(n)),
        (_, w) => w.cloned(),
    };
    enumerate_partitions(n, cat, word.as_ref())
}

/// Builds the table for words of length `n` in dimension `N`. Colored
/// categories default to the all-`1` word.
pub fn build_table(n: usize, dim: u64, cat: Category, word: Option<&ColoredWord>) -> Result<WeingartenTable> {
    if n == 0 {
        return Err(Error::Parameter("word length n must be ≥ 1".into()));
    }
    if dim == 0 {
        return Err(Error::Parameter("dimension N must be ≥ 1".into()));
    }
    let basis = category_basis(n, cat, word)?;
    if basis.is_empty() {
        return Err(Error::Parameter(format!("empty basis for {cat} at n={n}")));
    }
    let gram = gram_matrix(&basis, dim);
    let wg = gram.inverse().ok_or_else(|| Error::SingularGram {
        n,
        dim,
        category: cat.to_string(),
    })?;
    let word = match (cat.color_order(), word) {
        (Some(_), None) => Some(ColoredWord::all_ones(n)),
        (_, w) => w.cloned(),
    };
    Ok(WeingartenTable {
        n,
        dim,
        cat,
        word,
        basis,
        gram,
        wg,
    })
}

fn kernel(indices: &[usize]) -> SetPartition {
    SetPartition::from_labels(indices)
}

impl WeingartenTable {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    /// `gram · wg == id`.
    pub fn is_exact_inverse(&self) -> bool {
        (&self.gram * &self.wg).is_identity()
    }

    /// `∫ u_{i₁j₁}⋯u_{iₙjₙ} = Σ_{α ≤ ker i, β ≤ ker j} W(α, β)`.
    pub fn integrate_word(&self, rows: &[usize], cols: &[usize]) -> Result<BigRational> {
        if rows.len() != self.n || cols.len() != self.n {
            return Err(Error::Dimension(format!(
                "index tuples of lengths {}/{} for n={}",
                rows.len(),
                cols.len(),
                self.n
            )));
        }
        let (ki, kj) = (kernel(rows), kernel(cols));
        let a: Vec<usize> = (0..self.size()).filter(|&p| self.basis[p].refines(&ki)).collect();
        let b: Vec<usize> = (0..self.size()).filter(|&q| self.basis[q].refines(&kj)).collect();
        let mut s = BigRational::zero();
        for &p in &a {
            for &q in &b {
                s += &self.wg[(p, q)];
            }
        }
        Ok(s)
    }

    /// `Σ_{α,β} W(α,β) l^{|α∨β|}`, the `n`-th moment of `χ_l` on the group.
    pub fn character_moment(&self, l: u64) -> BigRational {
        let overlay = gram_matrix(&self.basis, l);
        let m = self.size();
        let mut s = BigRational::zero();
        for a in 0..m {
            for b in 0..m {
                s += &self.wg[(a, b)] * &overlay[(a, b)];
            }
        }
        s
    }
}

/// Exact moment of `χ_k^l` over `G_N × G_k × G_N` for the category `cat`:
/// `Σ_{α,ρ} (W_N G_k W_N)_{αρ} l^{|α∨ρ|}`.
pub fn triple_moment(n: usize, dim: u64, k: u64, l: u64, cat: Category, word: Option<&ColoredWord>) -> Result<BigRational> {
    if k > dim || l > dim {
        return Err(Error::Parameter(format!("need k,l ≤ N, got N={dim} k={k} l={l}")));
    }
    if category_basis(n, cat, word)?.is_empty() {
        return Ok(BigRational::zero());
    }
    let big = build_table(n, dim, cat, word)?;
    // the k-table must exist for the six-fold sum to make sense
    build_table(n, k, cat, word)?;
    let gk = gram_matrix(&big.basis, k);
    let core = &(&big.wg * &gk) * &big.wg;
    let overlay = gram_matrix(&big.basis, l);
    let m = big.size();
    let mut s = BigRational::zero();
    for a in 0..m {
        for r in 0..m {
            s += &core[(a, r)] * &overlay[(a, r)];
        }
    }
    Ok(s)
}

/// The six-fold sum over `(α, β, γ, δ, ε, ρ)`, kept as a test oracle.
pub fn triple_moment_naive(n: usize, dim: u64, k: u64, l: u64, cat: Category, word: Option<&ColoredWord>) -> Result<BigRational> {
    if category_basis(n, cat, word)?.is_empty() {
        return Ok(BigRational::zero());
    }
    let tn = build_table(n, dim, cat, word)?;
    let tk = build_table(n, k, cat, word)?;
    let b = &tn.basis;
    let m = b.len();
    let pw = |d: u64, p: usize, q: usize| -> BigRational {
        int(BigInt::from(d).pow(b[p].join(&b[q]).unwrap().num_blocks() as u32))
    };
    let mut s = BigRational::zero();
    for al in 0..m {
        for be in 0..m {
            let w1 = &tn.wg[(al, be)];
            if w1.is_zero() {
                continue;
            }
            for ga in 0..m {
                for de in 0..m {
                    let w2 = &tk.wg[(ga, de)];
                    if w2.is_zero() {
                        continue;
                    }
                    let left = w1 * w2 * pw(k, be, ga);
                    for ep in 0..m {
                        for rh in 0..m {
                            s += &left * &tn.wg[(ep, rh)] * pw(l, al, rh) * pw(k, de, ep);
                        }
                    }
                }
            }
        }
    }
    Ok(s)
}

/// [`triple_moment`] restricted to the classical categories `P`, `P2`, `Px`.
///
/// The Gram weights `N^{|p∨q|}` give the exact Haar integrals of `S_N`,
/// `O_N` and `H_N^x` once `N ≥ n`.
pub fn classical_triple_moment(n: usize, dim: u64, k: u64, l: u64, cat: Category) -> Result<BigRational> {
    if cat.is_noncrossing() {
        return Err(Error::Parameter(format!("{cat} is not a classical category")));
    }
    if matches!(cat, Category::P2) && n % 2 == 1 {
        return Ok(BigRational::zero());
    }
    triple_moment(n, dim, k, l, cat, None)
}

/// One line of a moment table.
#[derive(Clone, Debug, Serialize)]
pub struct MomentRow {
    pub n: usize,
    #[serde(rename = "N")]
    pub dim: u64,
    pub k: u64,
    pub l: u64,
    pub category: String,
    pub exact_value: String,
    pub limit_value: String,
    pub abs_error: f64,
}

pub const MOMENT_CSV_HEADER: &str = "n,N,k,l,category,exact_value,limit_value,abs_error";

impl MomentRow {
    /// Compares the exact moment with the partition-count limit
    /// `Σ_{α ∈ cat(n)} (kl/N²)^{|α|}`.
    pub fn compute(n: usize, dim: u64, k: u64, l: u64, cat: Category) -> Result<MomentRow> {
        let exact = triple_moment(n, dim, k, l, cat, None)?;
        let st = BigRational::new(BigInt::from(k * l), BigInt::from(dim * dim));
        let limit = limit_moment(n, cat, &st)?;
        let abs_error = (&exact - &limit).abs().to_f64().unwrap_or(f64::NAN);
        Ok(MomentRow {
            n,
            dim,
            k,
            l,
            category: cat.to_string(),
            exact_value: format_rational(&exact),
            limit_value: format_rational(&limit),
            abs_error,
        })
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.17e}",
            self.n, self.dim, self.k, self.l, self.category, self.exact_value, self.limit_value, self.abs_error
        )
    }
}

/// `∫_{G_N} χ_l^n`, zero when the category has no partitions of the word.
pub fn single_group_moment(n: usize, dim: u64, l: u64, cat: Category, word: Option<&ColoredWord>) -> Result<BigRational> {
    if category_basis(n, cat, word)?.is_empty() {
        return Ok(BigRational::zero());
    }
    Ok(build_table(n, dim, cat, word)?.character_moment(l))
}

/// `Σ_{α ∈ cat(1…1)} st^{|α|}`.
pub fn limit_moment(n: usize, cat: Category, st: &BigRational) -> Result<BigRational> {
    partition_moments(cat, &ColoredWord::all_ones(n), st)
}

/// `N^{|p|}·W` should approach the identity as `N` grows; returns the
/// largest deviation `max |N^{|p|} W(p,q) − δ_{pq}|`.
pub fn diagonal_deviation(table: &WeingartenTable) -> BigRational {
    let m = table.size();
    let d = BigInt::from(table.dim);
    let mut worst = BigRational::zero();
    for p in 0..m {
        let scale = int(d.pow(table.basis[p].num_blocks() as u32));
        for q in 0..m {
            let mut v = &table.wg[(p, q)] * &scale;
            if p == q {
                v -= BigRational::one();
            }
            let v = v.abs();
            if v > worst {
                worst = v;
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn small_tables() {
        let t = build_table(1, 7, Category::NC, None).unwrap();
        assert_eq!(t.size(), 1);
        assert_eq!(t.gram[(0, 0)], int(7));
        assert_eq!(t.wg[(0, 0)], rat(1, 7));
        let t = build_table(2, 4, Category::NC, None).unwrap();
        assert_eq!(t.basis[0].to_string(), "1,2");
        // basis in RGS order: {12}, {1|2}
        assert_eq!(t.gram[(0, 0)], int(4));
        assert_eq!(t.gram[(1, 1)], int(16));
        assert_eq!(t.gram[(0, 1)], int(4));
        assert_eq!(t.wg[(1, 1)], rat(1, 12));
        assert_eq!(t.wg[(0, 1)], rat(-1, 12));
        assert_eq!(t.wg[(0, 0)], rat(1, 3));
        let t = build_table(4, 4, Category::NC, None).unwrap();
        assert_eq!(t.size(), 14);
        assert!(t.is_exact_inverse());
    }

    #[test]
    fn singular_gram_is_an_error() {
        // P(3) Gram at N=2 is singular
        let e = build_table(3, 2, Category::P, None).unwrap_err();
        assert!(matches!(e, Error::SingularGram { n: 3, dim: 2, .. }));
    }

    #[test]
    fn integrate_words() {
        let t1 = build_table(1, 5, Category::NC, None).unwrap();
        assert_eq!(t1.integrate_word(&[2], &[4]).unwrap(), rat(1, 5));
        let t2 = build_table(2, 4, Category::NC, None).unwrap();
        // magic: u_ij² = u_ij, and rows sum to one
        for i in 0..4 {
            let mut row = BigRational::zero();
            for j in 0..4 {
                assert_eq!(t2.integrate_word(&[i, i], &[j, j]).unwrap(), rat(1, 4));
                row += t2.integrate_word(&[i, i], &[j, j]).unwrap();
            }
            assert_eq!(row, int(1));
            // orthogonality along a row
            assert!(t2.integrate_word(&[i, i], &[0, 1]).unwrap().is_zero());
        }
    }

    #[test]
    fn fixed_point_projection_is_idempotent() {
        let (n, dim) = (2usize, 4usize);
        let t = build_table(n, dim as u64, Category::NC, None).unwrap();
        let idx: Vec<Vec<usize>> = (0..dim * dim).map(|a| vec![a / dim, a % dim]).collect();
        let p = RationalMatrix::from_fn(idx.len(), idx.len(), |a, b| t.integrate_word(&idx[a], &idx[b]).unwrap());
        let p2 = &p * &p;
        for a in 0..idx.len() {
            for b in 0..idx.len() {
                assert_eq!(p2[(a, b)], p[(a, b)]);
            }
        }
    }

    #[test]
    fn first_moment_is_kl_over_n_squared() {
        for cat in [Category::P, Category::NC, Category::Px(1)] {
            assert_eq!(triple_moment(1, 6, 3, 4, cat, None).unwrap(), rat(12, 36));
        }
        // no balanced partition of a single letter
        assert!(triple_moment(1, 6, 3, 4, Category::NCx(2), None).unwrap().is_zero());
        assert!(single_group_moment(1, 6, 4, Category::Px(3), None).unwrap().is_zero());
    }

    #[test]
    fn contracted_matches_naive() {
        for n in 1..=3 {
            for cat in [Category::NC, Category::P, Category::NC2, Category::Px(2)] {
                if matches!(cat, Category::NC2) && n % 2 == 1 {
                    continue;
                }
                for (dim, k, l) in [(5, 5, 3), (5, 4, 2), (6, 3, 5)] {
                    assert_eq!(
                        triple_moment(n, dim, k, l, cat, None).unwrap(),
                        triple_moment_naive(n, dim, k, l, cat, None).unwrap(),
                        "{cat} n={n} N={dim} k={k} l={l}"
                    );
                }
            }
        }
    }

    #[test]
    fn classical_examples() {
        assert!(classical_triple_moment(3, 6, 6, 6, Category::P2).unwrap().is_zero());
        assert_eq!(classical_triple_moment(2, 6, 6, 6, Category::P2).unwrap(), int(1));
        assert!(classical_triple_moment(2, 6, 6, 6, Category::NC).is_err());
        let target = 3.0 / 16.0;
        let mut last = f64::INFINITY;
        for dim in [8u64, 16, 32] {
            let v = classical_triple_moment(4, dim, dim / 2, dim / 2, Category::P2).unwrap();
            let err = (v.to_f64().unwrap() - target).abs();
            assert!(err < last);
            last = err;
        }
        assert!(last < 0.02);
    }

    #[test]
    fn diagonal_concentration() {
        for cat in [Category::P, Category::NC] {
            let mut last = None;
            for dim in [8u64, 16, 32, 64] {
                let d = diagonal_deviation(&build_table(4, dim, cat, None).unwrap());
                if let Some(prev) = last {
                    assert!(d < prev);
                }
                last = Some(d);
            }
        }
    }

    #[test]
    fn csv_rows() {
        let r = MomentRow::compute(2, 8, 4, 4, Category::NC).unwrap();
        let line = r.to_csv();
        assert!(line.starts_with("2,8,4,4,NC,"));
        assert_eq!(line.split(',').count(), MOMENT_CSV_HEADER.split(',').count());
    }
}
