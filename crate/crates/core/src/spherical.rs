//! I-sphericality: does `w` have a reduced word in which every cut letter
//! `s_{d_t}` appears at most once and every block `t` uses at most
//! `C(d_t - d_{t-1} + 1, 2) - 1` interior letters?
//!
//! Reduced words are generated left to right by peeling a left descent
//! `i` off the remaining permutation (`w = s_i * w'` with
//! `ℓ(w') = ℓ(w) - 1`), so every word produced is reduced by construction.
//! Failed `(remaining permutation, budget)` states are memoized.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result, CAP_OVERRIDE_FLAG};
use crate::exact::enumerate_sn_capped;
use crate::perm::{choose2, join, BlockDecomposition, LetterSlot, Permutation};

pub const DEFAULT_CENSUS_CAP: usize = 6;

/// A word `s_{i_1} s_{i_2} ... s_{i_l}` in the simple transpositions of
/// `S_n`, known to be reduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedWord {
    n: usize,
    letters: Vec<usize>,
}

impl ReducedWord {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Letters joined with `;`, the census witness format.
    pub fn to_semicolon_string(&self) -> String {
        join(&self.letters, ";")
    }
}

/// Multiplies out `s_{i_1} ... s_{i_l}` and reports whether the word is
/// reduced, i.e. its length equals the inversion number of the product.
pub fn evaluate_word(n: usize, letters: &[usize]) -> Result<(Permutation, bool)> {
    if n == 0 {
        return Err(Error::domain("degree n must be at least 1"));
    }
    if let Some(&bad) = letters.iter().find(|&&i| i == 0 || i >= n) {
        return Err(Error::domain(format!(
            "letter s_{bad} does not exist in S_{n}"
        )));
    }
    let product = letters
        .iter()
        .fold(Permutation::identity(n), |acc, &i| acc.right_multiply_simple(i));
    let reduced = product.inversion_number() == letters.len() as u64;
    Ok((product, reduced))
}

/// Remaining letter allowances for a [`BlockDecomposition`]: one use per
/// cut letter `d_t`, and `C(b + 1, 2) - 1` interior uses per block of size
/// `b`. Occurrences are counted with multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SphericalBudget<'a> {
    decomposition: &'a BlockDecomposition,
    cut_remaining: Vec<u32>,
    block_remaining: Vec<u32>,
}

impl<'a> SphericalBudget<'a> {
    pub fn new(decomposition: &'a BlockDecomposition) -> Self {
        SphericalBudget {
            decomposition,
            cut_remaining: vec![1; decomposition.k()],
            block_remaining: decomposition
                .block_sizes()
                .iter()
                .map(|&b| (choose2(b as u64 + 1) - 1) as u32)
                .collect(),
        }
    }

    fn counter(&mut self, letter: usize) -> &mut u32 {
        match self.decomposition.slot(letter) {
            LetterSlot::Cut(t) => &mut self.cut_remaining[t],
            LetterSlot::Interior(t) => &mut self.block_remaining[t],
        }
    }

    /// Uses one occurrence of `letter`, or returns false if exhausted.
    pub fn try_spend(&mut self, letter: usize) -> bool {
        let c = self.counter(letter);
        if *c == 0 {
            return false;
        }
        *c -= 1;
        true
    }

    pub fn refund(&mut self, letter: usize) {
        *self.counter(letter) += 1;
    }

    pub fn total_remaining(&self) -> u64 {
        self.cut_remaining
            .iter()
            .chain(&self.block_remaining)
            .map(|&c| c as u64)
            .sum()
    }

    fn key(&self) -> Vec<u32> {
        self.cut_remaining
            .iter()
            .chain(&self.block_remaining)
            .copied()
            .collect()
    }
}

/// Checks conditions (I) and (II) for `letters` against a fresh budget.
pub fn satisfies_budget(letters: &[usize], decomposition: &BlockDecomposition) -> bool {
    let mut budget = SphericalBudget::new(decomposition);
    letters.iter().all(|&i| budget.try_spend(i))
}

/// Whether the search may reject non-proper permutations up front. Every
/// I-spherical permutation is proper, so [`SearchMode::Fast`] is sound;
/// [`SearchMode::Verification`] never looks at properness so that the
/// implication can be tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    #[default]
    Verification,
    Fast,
}

fn check_subset(w: &Permutation, included: &[usize]) -> Result<BlockDecomposition> {
    let decomposition = BlockDecomposition::new(w.n(), included)?;
    let profile = w.left_descent_set();
    if let Some(&bad) = decomposition.included().iter().find(|&&i| !profile.contains(i)) {
        return Err(Error::NotSubsetOfDescents {
            index: bad,
            descents: join(profile.left_descents(), ","),
        });
    }
    Ok(decomposition)
}

struct Search<'a> {
    budget: SphericalBudget<'a>,
    failed: HashSet<(Vec<usize>, Vec<u32>)>,
    word: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, remaining: &Permutation, length: u64) -> bool {
        if length == 0 {
            return true;
        }
        if length > self.budget.total_remaining() {
            return false;
        }
        let key = (remaining.zero_based().to_vec(), self.budget.key());
        if self.failed.contains(&key) {
            return false;
        }
        for &i in remaining.left_descent_set().left_descents() {
            if !self.budget.try_spend(i) {
                continue;
            }
            self.word.push(i);
            if self.run(&remaining.left_multiply_simple(i), length - 1) {
                return true;
            }
            self.word.pop();
            self.budget.refund(i);
        }
        self.failed.insert(key);
        false
    }
}

/// First qualifying reduced word for `w` under the decomposition of
/// `included`, trying left descents in increasing order.
pub fn witness_word(w: &Permutation, included: &[usize], mode: SearchMode) -> Result<Option<ReducedWord>> {
    let decomposition = check_subset(w, included)?;
    if mode == SearchMode::Fast && !w.is_proper() {
        return Ok(None);
    }
    Ok(search(w, &decomposition))
}

fn search(w: &Permutation, decomposition: &BlockDecomposition) -> Option<ReducedWord> {
    let mut s = Search {
        budget: SphericalBudget::new(decomposition),
        failed: HashSet::new(),
        word: Vec::new(),
    };
    s.run(w, w.inversion_number()).then(|| ReducedWord {
        n: w.n(),
        letters: s.word,
    })
}

/// Whether `w` is `I`-spherical. Requires `I ⊆ J(w)`.
pub fn is_i_spherical(w: &Permutation, included: &[usize], mode: SearchMode) -> Result<bool> {
    Ok(witness_word(w, included, mode)?.is_some())
}

/// One row of the sphericality census.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SphericalRow {
    pub w: Permutation,
    pub left_descents: Vec<usize>,
    pub ell: u64,
    pub x: i64,
    pub proper: bool,
    pub maximally_spherical: bool,
    pub some_i_spherical: bool,
    /// Witness for `I = J(w)` when maximally spherical, otherwise for the
    /// first spherical `I` in subset order.
    pub witness: Option<ReducedWord>,
}

impl SphericalRow {
    pub fn d(&self) -> usize {
        self.left_descents.len()
    }
}

fn subsets(set: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    // largest first so that I = J(w) is tried before its proper subsets
    (0..1u64 << set.len()).rev().map(move |mask| {
        set.iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &i)| i)
            .collect()
    })
}

pub fn census_row(w: Permutation, mode: SearchMode) -> SphericalRow {
    let profile = w.left_descent_set();
    let j = profile.left_descents().to_vec();
    let maximal = witness_word(&w, &j, mode).expect("J(w) is a subset of itself");
    let mut witness = maximal.clone();
    if witness.is_none() {
        witness = subsets(&j)
            .skip(1)
            .find_map(|sub| witness_word(&w, &sub, mode).expect("subsets of J(w) are valid"));
    }
    SphericalRow {
        ell: w.inversion_number(),
        x: w.statistic_x(),
        proper: w.is_proper(),
        maximally_spherical: maximal.is_some(),
        some_i_spherical: witness.is_some(),
        witness,
        left_descents: j,
        w,
    }
}

pub fn spherical_census(n: usize, mode: SearchMode) -> Result<Vec<SphericalRow>> {
    spherical_census_capped(n, DEFAULT_CENSUS_CAP, mode)
}

/// One row per `w` in `S_n`, in lexicographic order.
pub fn spherical_census_capped(n: usize, cap: usize, mode: SearchMode) -> Result<Vec<SphericalRow>> {
    if n > cap {
        return Err(Error::CapExceeded {
            what: "sphericality census",
            n,
            cap,
            flag: CAP_OVERRIDE_FLAG,
        });
    }
    let perms: Vec<Permutation> = enumerate_sn_capped(n, cap)?.collect();
    Ok(perms.into_par_iter().map(|w| census_row(w, mode)).collect())
}

pub const CENSUS_CSV_HEADER: &str = "oneline,J,ell,d,X,proper,maximally_spherical,some_I_spherical,witness";

/// Census as CSV. One-line notation is space-separated and sets are
/// `;`-joined so no field needs quoting.
pub fn write_census_csv<W: Write>(rows: &[SphericalRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CENSUS_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            join(r.w.one_line(), " "),
            join(&r.left_descents, ";"),
            r.ell,
            r.d(),
            r.x,
            r.proper,
            r.maximally_spherical,
            r.some_i_spherical,
            r.witness.as_ref().map(|w| w.to_semicolon_string()).unwrap_or_default(),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(evaluate_word(3, &[1, 2, 1]).unwrap(), (p("3 2 1"), true));
        assert_eq!(evaluate_word(3, &[1, 1]).unwrap(), (Permutation::identity(3), false));
        assert_eq!(evaluate_word(3, &[]).unwrap(), (Permutation::identity(3), true));
        assert_eq!(evaluate_word(3, &[1, 2]).unwrap(), (p("2 3 1"), true));
        assert!(evaluate_word(3, &[3]).is_err());
        assert!(evaluate_word(3, &[0]).is_err());
    }

    #[test]
    fn budgets_follow_blocks() {
        let b = BlockDecomposition::new(6, &[1, 2, 4, 5]).unwrap();
        let budget = SphericalBudget::new(&b);
        // cut {3}, two blocks of size 3 with C(4,2) - 1 = 5 each
        assert_eq!(budget.total_remaining(), 11);
        assert!(satisfies_budget(&[3, 1, 2, 1, 2, 1], &b));
        assert!(!satisfies_budget(&[3, 3], &b));
        assert!(!satisfies_budget(&[1, 2, 1, 2, 1, 2], &b));
    }

    #[test]
    fn spherical_examples() {
        let v = SearchMode::Verification;
        assert!(is_i_spherical(&p("2 1"), &[1], v).unwrap());
        assert!(is_i_spherical(&p("3 2 1"), &[1, 2], v).unwrap());
        assert!(!is_i_spherical(&p("4 5 6 1 2 3"), &[3], v).unwrap());
        assert!(!is_i_spherical(&p("4 5 6 1 2 3"), &[3], SearchMode::Fast).unwrap());
    }

    #[test]
    fn witness_examples() {
        let v = SearchMode::Verification;
        let w = witness_word(&p("3 2 1"), &[1, 2], v).unwrap().unwrap();
        assert_eq!(w.letters(), &[1, 2, 1]);
        assert_eq!(w.to_semicolon_string(), "1;2;1");
        let e = witness_word(&Permutation::identity(4), &[], v).unwrap().unwrap();
        assert!(e.is_empty());
        assert!(witness_word(&p("4 5 6 1 2 3"), &[3], v).unwrap().is_none());
    }

    #[test]
    fn subset_precondition() {
        let err = is_i_spherical(&p("2 3 1"), &[2], SearchMode::Verification).unwrap_err();
        assert!(matches!(err, Error::NotSubsetOfDescents { index: 2, .. }), "{err}");
        assert_eq!(err.exit_code(), 4);
        assert!(matches!(
            is_i_spherical(&p("2 3 1"), &[5], SearchMode::Verification),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn small_censuses() {
        let rows = spherical_census(1, SearchMode::Verification).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].maximally_spherical && rows[0].some_i_spherical);
        let rows = spherical_census(2, SearchMode::Verification).unwrap();
        assert!(rows.iter().all(|r| r.maximally_spherical));
        assert!(matches!(
            spherical_census(7, SearchMode::Verification),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn subsets_start_with_full_set() {
        let all: Vec<_> = subsets(&[1, 3]).collect();
        assert_eq!(all, vec![vec![1, 3], vec![3], vec![1], vec![]]);
    }

    #[test]
    fn census_csv_format() {
        let rows = spherical_census(3, SearchMode::Verification).unwrap();
        let mut buf = Vec::new();
        write_census_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], CENSUS_CSV_HEADER);
        assert_eq!(lines[1], "1 2 3,,0,0,0,true,true,true,");
        assert_eq!(lines[6], "3 2 1,1;2,3,2,0,true,true,true,1;2;1");
    }
}
