//! Set partitions of `{0..n-1}`, the six partition categories used by the
//! moment formulas, and Möbius functions of the partition lattices.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{binomial, factorial};

/// Partition in canonical form: block labels `0,1,2,…` by first occurrence.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    labels: Vec<usize>,
}

impl SetPartition {
    /// Builds from arbitrary block labels, relabelling by first occurrence.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut seen: Vec<(usize, usize)> = Vec::new();
        let canon = labels
            .iter()
            .map(|l| match seen.iter().find(|(k, _)| k == l) {
                Some(&(_, v)) => v,
                None => {
                    let v = seen.len();
                    seen.push((*l, v));
                    v
                }
            })
            .collect();
        SetPartition { labels: canon }
    }

    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &i in block {
                if i >= n {
                    return Err(Error::Parameter(format!("point {i} out of range for n={n}")));
                }
                if labels[i] != usize::MAX {
                    return Err(Error::Parameter(format!("point {i} lies in two blocks")));
                }
                labels[i] = b;
            }
        }
        if let Some(i) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Parameter(format!("point {i} lies in no block")));
        }
        Ok(Self::from_labels(&labels))
    }

    /// Singletons.
    pub fn discrete(n: usize) -> Self {
        SetPartition { labels: (0..n).collect() }
    }

    /// One block.
    pub fn full(n: usize) -> Self {
        SetPartition { labels: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_blocks(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// Blocks as sorted point lists, in order of their smallest point.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_blocks()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.num_blocks()];
        for &l in &self.labels {
            out[l] += 1;
        }
        out
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    pub fn is_noncrossing(&self) -> bool {
        // a < b < c < d with a~c, b~d, a≁b
        let n = self.n();
        let l = &self.labels;
        for a in 0..n {
            for b in a + 1..n {
                if l[a] == l[b] {
                    continue;
                }
                for c in b + 1..n {
                    if l[c] != l[a] {
                        continue;
                    }
                    if (c + 1..n).any(|d| l[d] == l[b]) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `self ≤ other`: every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &SetPartition) -> bool {
        if self.n() != other.n() {
            return false;
        }
        let mut image = vec![usize::MAX; self.num_blocks()];
        for (i, &l) in self.labels.iter().enumerate() {
            let o = other.labels[i];
            if image[l] == usize::MAX {
                image[l] = o;
            } else if image[l] != o {
                return false;
            }
        }
        true
    }

    /// Least common coarsening.
    pub fn join(&self, other: &SetPartition) -> Result<SetPartition> {
        if self.n() != other.n() {
            return Err(Error::Dimension(format!(
                "join of partitions of sizes {} and {}",
                self.n(),
                other.n()
            )));
        }
        let n = self.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for p in [self, other] {
            let mut first = vec![usize::MAX; p.num_blocks()];
            for i in 0..n {
                let l = p.labels[i];
                if first[l] == usize::MAX {
                    first[l] = i;
                } else {
                    let (a, b) = (find(&mut parent, first[l]), find(&mut parent, i));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        Ok(SetPartition::from_labels(&roots))
    }

    /// Restriction to a subset of points, relabelled `0..len`.
    pub fn restrict(&self, points: &[usize]) -> SetPartition {
        let labels: Vec<usize> = points.iter().map(|&i| self.labels[i]).collect();
        SetPartition::from_labels(&labels)
    }

    /// Kreweras complement of a noncrossing partition.
    pub fn kreweras(&self) -> SetPartition {
        let n = self.n();
        if n == 0 {
            return self.clone();
        }
        // next point of the own block, cyclically
        let mut succ = vec![0; n];
        for block in self.blocks() {
            for (a, &i) in block.iter().enumerate() {
                succ[i] = block[(a + 1) % block.len()];
            }
        }
        let mut pred = vec![0; n];
        for i in 0..n {
            pred[succ[i]] = i;
        }
        // K = P⁻¹ ∘ γ
        let k: Vec<usize> = (0..n).map(|i| pred[(i + 1) % n]).collect();
        let mut labels = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if labels[s] != usize::MAX {
                continue;
            }
            let mut i = s;
            while labels[i] == usize::MAX {
                labels[i] = next;
                i = k[i];
            }
            next += 1;
        }
        SetPartition::from_labels(&labels)
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", blocks.join("|"))
    }
}

impl fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromStr for SetPartition {
    type Err = Error;

    /// Parses the text form `"1,3|2|4"` (one-based points).
    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut n = 0;
        for part in s.trim().split('|') {
            let mut block = Vec::new();
            for p in part.split(',') {
                let v: usize = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad point {p:?} in partition {s:?}")))?;
                if v == 0 {
                    return Err(Error::Parse("partition points are one-based".into()));
                }
                n = n.max(v);
                block.push(v - 1);
            }
            blocks.push(block);
        }
        Self::from_blocks(n, &blocks)
    }
}

impl Serialize for SetPartition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Letters of a colored word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    One,
    Star,
}

/// Word over `{1, *}` indexing a *-moment.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColoredWord(pub Vec<Color>);

impl ColoredWord {
    pub fn all_ones(n: usize) -> Self {
        ColoredWord(vec![Color::One; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, c: Color) -> usize {
        self.0.iter().filter(|&&l| l == c).count()
    }

    /// Every word of length `n`, `1` before `*`, lexicographic.
    pub fn all_of_length(n: usize) -> Vec<ColoredWord> {
        (0..1usize << n)
            .map(|m| {
                ColoredWord(
                    (0..n)
                        .map(|i| if m >> (n - 1 - i) & 1 == 1 { Color::Star } else { Color::One })
                        .collect(),
                )
            })
            .collect()
    }

    pub fn restrict(&self, points: &[usize]) -> ColoredWord {
        ColoredWord(points.iter().map(|&i| self.0[i]).collect())
    }
}

impl fmt::Display for ColoredWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            f.write_str(match c {
                Color::One => "1",
                Color::Star => "*",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for ColoredWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for ColoredWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !matches!(c, ',' | ' '))
            .map(|c| match c {
                '1' => Ok(Color::One),
                '*' => Ok(Color::Star),
                _ => Err(Error::Parse(format!("colored words use 1 and *, got {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(ColoredWord)
    }
}

impl Serialize for ColoredWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The six partition families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    P,
    P2,
    Px(u32),
    NC,
    NC2,
    NCx(u32),
}

impl Category {
    pub fn is_noncrossing(self) -> bool {
        matches!(self, Category::NC | Category::NC2 | Category::NCx(_))
    }

    pub fn color_order(self) -> Option<u32> {
        match self {
            Category::Px(x) | Category::NCx(x) => Some(x),
            _ => None,
        }
    }

    /// Noncrossing counterpart (identity on noncrossing families).
    pub fn free_version(self) -> Category {
        match self {
            Category::P => Category::NC,
            Category::P2 => Category::NC2,
            Category::Px(x) => Category::NCx(x),
            c => c,
        }
    }

    /// Crossing counterpart (identity on the `P` families).
    pub fn classical_version(self) -> Category {
        match self {
            Category::NC => Category::P,
            Category::NC2 => Category::P2,
            Category::NCx(x) => Category::Px(x),
            c => c,
        }
    }

    fn validate(self) -> Result<()> {
        match self.color_order() {
            Some(0) => Err(Error::Parameter("category color order x must be ≥ 1".into())),
            _ => Ok(()),
        }
    }

    /// Membership of `p` for the given coloring (ignored outside `Px`/`NCx`).
    pub fn contains(self, p: &SetPartition, word: Option<&ColoredWord>) -> Result<bool> {
        self.validate()?;
        if self.is_noncrossing() && !p.is_noncrossing() {
            return Ok(false);
        }
        match self {
            Category::P | Category::NC => Ok(true),
            Category::P2 | Category::NC2 => Ok(p.block_sizes().iter().all(|&s| s == 2)),
            Category::Px(x) | Category::NCx(x) => {
                let w = word.ok_or_else(|| {
                    Error::Parameter(format!("category {self} needs a colored word"))
                })?;
                if w.len() != p.n() {
                    return Err(Error::Parameter(format!(
                        "word of length {} for partitions of {} points",
                        w.len(),
                        p.n()
                    )));
                }
                let mut bal = vec![0i64; p.num_blocks()];
                for (i, &l) in p.labels().iter().enumerate() {
                    bal[l] += match w.0[i] {
                        Color::One => 1,
                        Color::Star => -1,
                    };
                }
                Ok(bal.iter().all(|b| b.rem_euclid(i64::from(x)) == 0))
            }
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::P => write!(f, "P"),
            Category::P2 => write!(f, "P2"),
            Category::Px(x) => write!(f, "Px({x})"),
            Category::NC => write!(f, "NC"),
            Category::NC2 => write!(f, "NC2"),
            Category::NCx(x) => write!(f, "NCx({x})"),
        }
    }
}

impl FromStr for Category {
    type Err = Error;

    /// Accepts `P`, `P2`, `Px(3)`, `Px3`, `NC`, `NC2`, `NCx(2)`, ...
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let up = t.to_ascii_uppercase();
        let colored = |prefix: &str| -> Option<Result<u32>> {
            let rest = up.strip_prefix(prefix)?;
            let rest = rest.trim_start_matches('(').trim_end_matches(')');
            Some(
                rest.parse::<u32>()
                    .ok()
                    .filter(|&x| x >= 1)
                    .ok_or_else(|| Error::Parse(format!("bad color order in category {s:?}"))),
            )
        };
        match up.as_str() {
            "P" => Ok(Category::P),
            "P2" => Ok(Category::P2),
            "NC" => Ok(Category::NC),
            "NC2" => Ok(Category::NC2),
            _ => {
                if let Some(x) = colored("NCX") {
                    Ok(Category::NCx(x?))
                } else if let Some(x) = colored("PX") {
                    Ok(Category::Px(x?))
                } else {
                    Err(Error::Parse(format!("unknown category {s:?}")))
                }
            }
        }
    }
}

/// All partitions of `{0..n-1}` in restricted-growth-string order.
pub fn all_partitions(n: usize) -> Vec<SetPartition> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    fn rec(i: usize, max: usize, labels: &mut [usize], out: &mut Vec<SetPartition>) {
        if i == labels.len() {
            out.push(SetPartition { labels: labels.to_vec() });
            return;
        }
        let top = if i == 0 { 0 } else { max + 1 };
        for l in 0..=top {
            labels[i] = l;
            rec(i + 1, max.max(l), labels, out);
        }
    }
    if n == 0 {
        out.push(SetPartition { labels: Vec::new() });
    } else {
        rec(0, 0, &mut labels, &mut out);
    }
    out
}

/// The members of `cat` on `n` points (the colored families need `word`).
pub fn enumerate_partitions(n: usize, cat: Category, word: Option<&ColoredWord>) -> Result<Vec<SetPartition>> {
    cat.validate()?;
    if cat.color_order().is_some() {
        match word {
            None => return Err(Error::Parameter(format!("category {cat} needs a colored word"))),
            Some(w) if w.len() != n => {
                return Err(Error::Parameter(format!("word of length {} for n={n}", w.len())))
            }
            _ => {}
        }
    }
    if matches!(cat, Category::P2 | Category::NC2) && n % 2 == 1 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for p in all_partitions(n) {
        if cat.contains(&p, word)? {
            out.push(p);
        }
    }
    Ok(out)
}

/// Lattice for [`mobius`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lattice {
    P,
    NC,
}

pub fn catalan(n: u64) -> BigInt {
    binomial(2 * n, n) / BigInt::from(n + 1)
}

/// Möbius function `μ(p, q)` of the partition lattice or the noncrossing
/// partition lattice.
///
/// `[p, q]` factors over the blocks of `q`. On `P` each factor is a full
/// partition lattice of the blocks of `p` inside; on `NC` each factor is
/// `[0, K(p|_B)]`, a product of `NC(|C|)` over the blocks `C` of the Kreweras
/// complement.
pub fn mobius(p: &SetPartition, q: &SetPartition, lattice: Lattice) -> Result<BigInt> {
    if p.n() != q.n() {
        return Err(Error::Dimension(format!("partitions of sizes {} and {}", p.n(), q.n())));
    }
    if lattice == Lattice::NC && !(p.is_noncrossing() && q.is_noncrossing()) {
        return Err(Error::Parameter("NC Möbius function of a crossing partition".into()));
    }
    if !p.refines(q) {
        return Err(Error::Order(format!("{p} does not refine {q}")));
    }
    let mut mu = BigInt::one();
    for block in q.blocks() {
        let inner = p.restrict(&block);
        match lattice {
            Lattice::P => {
                let m = inner.num_blocks() as u64;
                let v = factorial(m - 1);
                mu *= if m % 2 == 1 { v } else { -v };
            }
            Lattice::NC => {
                for c in inner.kreweras().block_sizes() {
                    let c = c as u64;
                    let v = catalan(c - 1);
                    mu *= if c % 2 == 1 { v } else { -v };
                }
            }
        }
    }
    Ok(mu)
}

/// Möbius values `μ(π, 1_n)` in a lattice, by the same factorization.
pub fn mobius_to_top(p: &SetPartition, lattice: Lattice) -> Result<BigInt> {
    mobius(p, &SetPartition::full(p.n()), lattice)
}

/// Dense Möbius matrix by inverting the zeta matrix over the rationals, the
/// independent oracle for [`mobius`].
pub fn mobius_matrix_by_inversion(parts: &[SetPartition]) -> Option<Vec<Vec<BigInt>>> {
    use crate::exact::RationalMatrix;
    use num_rational::BigRational;
    let m = parts.len();
    let zeta = RationalMatrix::from_fn(m, m, |i, j| {
        if parts[i].refines(&parts[j]) {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    });
    let inv = zeta.inverse()?;
    Some(
        (0..m)
            .map(|i| (0..m).map(|j| inv[(i, j)].to_integer()).collect())
            .collect(),
    )
}
