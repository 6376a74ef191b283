//! Permutations in one-line notation and the statistics built on them:
//! inversions, left descents, the statistic `X(w) = ℓ(w) - C(d(w)+1, 2)`,
//! properness, and the block decompositions used by the unipotent
//! dimension counts.
//!
//! Everything public speaks 1-based one-line notation. The word is stored
//! 0-based internally.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `C(x, 2)`.
#[inline]
pub fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// A permutation `w` of `{1, ..., n}`, `n >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    // word[i] = w(i + 1) - 1
    word: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from 1-based one-line notation.
    pub fn new(one_line: &[usize]) -> Result<Self> {
        if one_line.is_empty() {
            return Err(Error::domain("a permutation needs n >= 1"));
        }
        let n = one_line.len();
        let mut seen = vec![false; n];
        for (pos, &v) in one_line.iter().enumerate() {
            if v == 0 || v > n {
                return Err(Error::Parse {
                    position: pos + 1,
                    token: v.to_string(),
                    reason: format!("value out of range 1..={n}"),
                });
            }
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::Parse {
                    position: pos + 1,
                    token: v.to_string(),
                    reason: "repeated value, not a bijection".into(),
                });
            }
        }
        Ok(Permutation {
            word: one_line.iter().map(|v| v - 1).collect(),
        })
    }

    /// Builds a permutation from a 0-based word the caller knows is a bijection.
    pub(crate) fn from_zero_based_unchecked(word: Vec<usize>) -> Self {
        debug_assert!(!word.is_empty());
        Permutation { word }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "n must be positive");
        Permutation {
            word: (0..n).collect(),
        }
    }

    /// The longest element `n, n-1, ..., 1`.
    pub fn reversal(n: usize) -> Self {
        assert!(n >= 1, "n must be positive");
        Permutation {
            word: (0..n).rev().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.word.len()
    }

    /// `w(i)` for `1 <= i <= n`.
    pub fn at(&self, i: usize) -> usize {
        self.word[i - 1] + 1
    }

    /// 1-based one-line notation.
    pub fn one_line(&self) -> Vec<usize> {
        self.word.iter().map(|v| v + 1).collect()
    }

    pub fn zero_based(&self) -> &[usize] {
        &self.word
    }

    pub fn is_identity(&self) -> bool {
        self.word.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.n()];
        for (i, &v) in self.word.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { word: inv }
    }

    /// Number of pairs `i < j` with `w(i) > w(j)`, by merge counting.
    pub fn inversion_number(&self) -> u64 {
        let mut buf = self.word.clone();
        let mut scratch = vec![0; buf.len()];
        merge_count(&mut buf, &mut scratch)
    }

    /// Left descents `{i : w^-1(i+1) < w^-1(i)}`.
    pub fn left_descent_set(&self) -> DescentProfile {
        let inv = self.inverse();
        let left_descents = (1..self.n())
            .filter(|&i| inv.word[i] < inv.word[i - 1])
            .collect();
        DescentProfile { left_descents }
    }

    /// Left descents recomputed as `{i : ℓ(s_i w) < ℓ(w)}`.
    ///
    /// Quadratic in the number of inversion counts; it exists as a second
    /// route to [`Permutation::left_descent_set`].
    pub fn left_descents_by_length(&self) -> Vec<usize> {
        let len = self.inversion_number();
        (1..self.n())
            .filter(|&i| self.left_multiply_simple(i).inversion_number() < len)
            .collect()
    }

    /// The set `{i : exists j < i with w(j) = i + 1}` read literally off the
    /// first definition of `J(w)`. Diagnostic only: it disagrees with the
    /// left descent set, e.g. on `2 3 1`.
    pub fn literal_j_set(&self) -> Vec<usize> {
        (1..self.n())
            .filter(|&i| (1..i).any(|j| self.at(j) == i + 1))
            .collect()
    }

    /// Positions `i` with `w(i) > w(i+1)`.
    pub fn descent_positions(&self) -> Vec<usize> {
        (1..self.n())
            .filter(|&i| self.word[i - 1] > self.word[i])
            .collect()
    }

    /// Lehmer code `c_i = #{j > i : w(j) < w(i)}`, indexed from position 1.
    pub fn lehmer_code(&self) -> Vec<usize> {
        let n = self.n();
        (0..n)
            .map(|i| (i + 1..n).filter(|&j| self.word[j] < self.word[i]).count())
            .collect()
    }

    /// `s_i * w`: swaps the values `i` and `i + 1`.
    pub fn left_multiply_simple(&self, i: usize) -> Permutation {
        assert!(i >= 1 && i < self.n(), "letter {i} out of range");
        let word = self
            .word
            .iter()
            .map(|&v| match v {
                v if v == i - 1 => i,
                v if v == i => i - 1,
                v => v,
            })
            .collect();
        Permutation { word }
    }

    /// `w * s_i`: swaps the entries in positions `i` and `i + 1`.
    pub fn right_multiply_simple(&self, i: usize) -> Permutation {
        assert!(i >= 1 && i < self.n(), "letter {i} out of range");
        let mut word = self.word.clone();
        word.swap(i - 1, i);
        Permutation { word }
    }

    /// `X(w) = ℓ(w) - C(d(w) + 1, 2)`. May be negative.
    pub fn statistic_x(&self) -> i64 {
        let d = self.left_descent_set().d() as u64;
        self.inversion_number() as i64 - choose2(d + 1) as i64
    }

    /// `ℓ(w) <= n + C(d(w) + 1, 2)`.
    pub fn is_proper(&self) -> bool {
        let d = self.left_descent_set().d() as u64;
        self.inversion_number() <= self.n() as u64 + choose2(d + 1)
    }
}

fn merge_count(a: &mut [usize], scratch: &mut [usize]) -> u64 {
    let n = a.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (lo, hi) = a.split_at_mut(mid);
        let (slo, shi) = scratch.split_at_mut(mid);
        merge_count(lo, slo) + merge_count(hi, shi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if a[i] <= a[j] {
            scratch[k] = a[i];
            i += 1;
        } else {
            // every remaining left element exceeds a[j]
            count += (mid - i) as u64;
            scratch[k] = a[j];
            j += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&a[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&a[j..n]);
    a.copy_from_slice(&scratch[..n]);
    count
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, self.word.iter().map(|v| v + 1), ",")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Comma- and/or whitespace-separated 1-based one-line notation.
    fn from_str(s: &str) -> Result<Self> {
        let tokens = split_tokens(s);
        if tokens.is_empty() {
            return Err(Error::Parse {
                position: 0,
                token: s.to_string(),
                reason: "empty permutation".into(),
            });
        }
        let mut values = Vec::with_capacity(tokens.len());
        for (pos, tok) in tokens.iter().enumerate() {
            let v = tok.parse::<usize>().map_err(|_| Error::Parse {
                position: pos + 1,
                token: tok.to_string(),
                reason: "not a positive integer".into(),
            })?;
            values.push(v);
        }
        Permutation::new(&values)
    }
}

fn split_tokens(s: &str) -> Vec<&str> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Parses a comma-separated subset such as `"1,2,4"`. The empty string is
/// the empty set. Range checks happen in [`BlockDecomposition::new`].
pub fn parse_index_set(s: &str) -> Result<Vec<usize>> {
    let mut out = BTreeSet::new();
    for (pos, tok) in split_tokens(s).into_iter().enumerate() {
        let v = tok.parse::<usize>().map_err(|_| Error::Parse {
            position: pos + 1,
            token: tok.to_string(),
            reason: "not a nonnegative integer".into(),
        })?;
        out.insert(v);
    }
    Ok(out.into_iter().collect())
}

pub(crate) fn write_joined<T: fmt::Display>(
    f: &mut impl fmt::Write,
    items: impl IntoIterator<Item = T>,
    sep: &str,
) -> fmt::Result {
    for (i, x) in items.into_iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

pub(crate) fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    let mut s = String::new();
    write_joined(&mut s, items, sep).expect("writing to a String");
    s
}

/// The left descent set `J(w)` and its size `d(w)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentProfile {
    left_descents: Vec<usize>,
}

impl DescentProfile {
    /// Sorted, 1-based.
    pub fn left_descents(&self) -> &[usize] {
        &self.left_descents
    }

    pub fn d(&self) -> usize {
        self.left_descents.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.left_descents.binary_search(&i).is_ok()
    }
}

/// Where a letter `s_i` falls relative to a block decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LetterSlot {
    /// `i = d_t` for the cut at index `t - 1` of [`BlockDecomposition::cuts`].
    Cut(usize),
    /// `d_{t-1} < i < d_t`, the interior of block `t - 1` (0-based).
    Interior(usize),
}

/// The complement `D = [n-1] - I = {d_1 < ... < d_k}` with sentinels
/// `d_0 = 0` and `d_{k+1} = n`, and the resulting block sizes
/// `d_t - d_{t-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    n: usize,
    included: Vec<usize>,
    cuts: Vec<usize>,
    block_sizes: Vec<usize>,
    // slot[i] for letters 1..n-1, index 0 unused
    slots: Vec<LetterSlot>,
}

impl BlockDecomposition {
    pub fn new(n: usize, included: &[usize]) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("degree n must be at least 1"));
        }
        let set: BTreeSet<usize> = included.iter().copied().collect();
        if let Some(&bad) = set.iter().find(|&&i| i == 0 || i >= n) {
            return Err(Error::domain(format!(
                "index {bad} of I lies outside 1..={}",
                n.saturating_sub(1)
            )));
        }
        let cuts: Vec<usize> = (1..n).filter(|i| !set.contains(i)).collect();

        let mut block_sizes = Vec::with_capacity(cuts.len() + 1);
        let mut slots = vec![LetterSlot::Interior(0); n];
        let mut prev = 0;
        for (t, &cut) in cuts.iter().chain(std::iter::once(&n)).enumerate() {
            block_sizes.push(cut - prev);
            for slot in slots.iter_mut().take(cut).skip(prev + 1) {
                *slot = LetterSlot::Interior(t);
            }
            if cut < n {
                slots[cut] = LetterSlot::Cut(t);
            }
            prev = cut;
        }
        Ok(BlockDecomposition {
            n,
            included: set.into_iter().collect(),
            cuts,
            block_sizes,
            slots,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The subset `I`.
    pub fn included(&self) -> &[usize] {
        &self.included
    }

    /// `d_1 < ... < d_k`.
    pub fn cuts(&self) -> &[usize] {
        &self.cuts
    }

    /// `k`, the number of cuts.
    pub fn k(&self) -> usize {
        self.cuts.len()
    }

    /// `d_0, d_1, ..., d_k, d_{k+1}`.
    pub fn sentinels(&self) -> Vec<usize> {
        std::iter::once(0)
            .chain(self.cuts.iter().copied())
            .chain(std::iter::once(self.n))
            .collect()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    /// Classifies letter `i` in `1..n`.
    pub fn slot(&self, letter: usize) -> LetterSlot {
        assert!(letter >= 1 && letter < self.n, "letter {letter} out of range");
        self.slots[letter]
    }

    /// `sum_t C(d_t - d_{t-1}, 2)`, the dimension of the unipotent radical
    /// of the Borel subgroup of the block-diagonal Levi.
    pub fn dim_unipotent(&self) -> u64 {
        self.block_sizes.iter().map(|&b| choose2(b as u64)).sum()
    }
}

/// Upper bound `C(d + 1, 2)` on [`BlockDecomposition::dim_unipotent`] over
/// all decompositions with `n - 1 - d` cuts: the sum of `C(b, 2)` over
/// blocks summing to `n` peaks with one block of size `d + 1` and the
/// rest singletons.
pub fn max_unipotent_dim(n: usize, d: usize) -> Result<u64> {
    if n == 0 || d >= n {
        return Err(Error::domain(format!(
            "descent count d = {d} must satisfy 0 <= d <= n - 1 for n = {n}"
        )));
    }
    Ok(choose2(d as u64 + 1))
}
