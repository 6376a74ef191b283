//! Exact enumeration of `S_n` and the joint law of (inversions, descents).
//!
//! Two routes build the same [`JointCountTable`]: brute force over the
//! lexicographic enumeration, and a dynamic program over Lehmer codes. All
//! counts and moments are exact big integers and rationals.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::ops::AddAssign;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, CAP_OVERRIDE_FLAG};
use crate::perm::{choose2, Permutation};

pub const DEFAULT_ENUMERATION_CAP: usize = 12;
pub const BRUTE_FORCE_CAP: usize = 10;
pub const DEFAULT_DP_CAP: usize = 30;

fn check_cap(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("degree n must be at least 1"));
    }
    if n > cap {
        return Err(Error::CapExceeded {
            what,
            n,
            cap,
            flag: CAP_OVERRIDE_FLAG,
        });
    }
    Ok(())
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// Lexicographic iterator over the permutations of `{1..n}` whose first
/// entry is fixed, or over all of `S_n`.
#[derive(Debug, Clone)]
pub struct Permutations {
    next: Option<Vec<usize>>,
    pinned_first: Option<usize>,
}

impl Permutations {
    fn all(n: usize) -> Self {
        Permutations {
            next: Some((0..n).collect()),
            pinned_first: None,
        }
    }

    /// Permutations with `w(1) = first + 1` (0-based `first`).
    fn shard(n: usize, first: usize) -> Self {
        let mut start = vec![first];
        start.extend((0..n).filter(|&v| v != first));
        Permutations {
            next: Some(start),
            pinned_first: Some(first),
        }
    }
}

impl Iterator for Permutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_lexicographic(&mut succ) && self.pinned_first.is_none_or(|f| succ[0] == f) {
            self.next = Some(succ);
        }
        Some(Permutation::from_zero_based_unchecked(current))
    }
}

fn next_lexicographic(a: &mut [usize]) -> bool {
    let n = a.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| a[i] < a[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| a[j] > a[i]).expect("pivot has a successor");
    a.swap(i, j);
    a[i + 1..].reverse();
    true
}

/// All of `S_n` in lexicographic order, guarded by
/// [`DEFAULT_ENUMERATION_CAP`].
pub fn enumerate_sn(n: usize) -> Result<Permutations> {
    enumerate_sn_capped(n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_sn_capped(n: usize, cap: usize) -> Result<Permutations> {
    check_cap("enumeration of S_n", n, cap)?;
    Ok(Permutations::all(n))
}

/// Counts of permutations of `S_n` by inversion number `k` and descent
/// number `m`, stored as `counts[k][m]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointCountTable {
    n: usize,
    counts: Vec<Vec<BigUint>>,
}

impl JointCountTable {
    fn zeros(n: usize) -> Self {
        let rows = choose2(n as u64) as usize + 1;
        JointCountTable {
            n,
            counts: vec![vec![BigUint::zero(); n.max(1)]; rows],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_inversions(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn max_descents(&self) -> usize {
        self.n - 1
    }

    pub fn get(&self, k: usize, m: usize) -> &BigUint {
        &self.counts[k][m]
    }

    /// `(k, m, count)` for every nonzero cell, `k`-major.
    pub fn nonzero_cells(&self) -> impl Iterator<Item = (usize, usize, &BigUint)> {
        self.counts.iter().enumerate().flat_map(|(k, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(move |(m, c)| (k, m, c))
        })
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().flatten().sum()
    }

    /// `counts[k][m] == counts[C(n,2) - k][n - 1 - m]` for every cell.
    pub fn is_symmetric(&self) -> bool {
        let kmax = self.max_inversions();
        let mmax = self.max_descents();
        (0..=kmax).all(|k| (0..=mmax).all(|m| self.counts[k][m] == self.counts[kmax - k][mmax - m]))
    }

    /// Number of permutations whose statistic `X = k - C(m+1, 2)` satisfies
    /// `X <= threshold`.
    pub fn count_x_at_most(&self, threshold: i64) -> BigUint {
        self.nonzero_cells()
            .filter(|&(k, m, _)| x_value(k, m) <= threshold)
            .map(|(_, _, c)| c)
            .sum()
    }

    pub fn count_proper(&self) -> BigUint {
        self.count_x_at_most(self.n as i64)
    }

    /// Writes the table as CSV with header `k,m,count`, nonzero cells only.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,m,count")?;
        for (k, m, c) in self.nonzero_cells() {
            writeln!(out, "{k},{m},{c}")?;
        }
        Ok(())
    }

    /// Reads a table written by [`JointCountTable::write_csv`]. The degree
    /// is recovered from the reversal cell `(C(n,2), n-1)`, which is always
    /// present.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let io_err = |e: std::io::Error| Error::domain(format!("reading table: {e}"));
        let header = lines
            .next()
            .transpose()
            .map_err(io_err)?
            .ok_or_else(|| Error::domain("empty table file"))?;
        if header.trim() != "k,m,count" {
            return Err(Error::domain(format!("unexpected table header {header:?}")));
        }
        let mut cells = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(io_err)?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            let bad = || Error::Parse {
                position: lineno + 2,
                token: line.clone(),
                reason: "expected k,m,count".into(),
            };
            if fields.len() != 3 {
                return Err(bad());
            }
            let k: usize = fields[0].parse().map_err(|_| bad())?;
            let m: usize = fields[1].parse().map_err(|_| bad())?;
            let c: BigUint = fields[2].parse().map_err(|_| bad())?;
            cells.push((k, m, c));
        }
        let n = cells.iter().map(|&(_, m, _)| m).max().unwrap_or(0) + 1;
        let kmax = cells.iter().map(|&(k, _, _)| k).max().unwrap_or(0);
        if kmax as u64 != choose2(n as u64) {
            return Err(Error::domain(format!(
                "inconsistent table: max k = {kmax} but descents imply n = {n}"
            )));
        }
        let mut table = JointCountTable::zeros(n);
        for (k, m, c) in cells {
            table.counts[k][m] = c;
        }
        Ok(table)
    }
}

#[inline]
fn x_value(k: usize, m: usize) -> i64 {
    k as i64 - choose2(m as u64 + 1) as i64
}

/// Tallies `(ℓ(w), d(w))` over every `w` in `S_n`, `n <= 10`.
pub fn brute_force_joint_table(n: usize) -> Result<JointCountTable> {
    check_cap("brute-force table", n, BRUTE_FORCE_CAP)?;
    let kmax = choose2(n as u64) as usize;
    // shard on w(1); integer sums make the merge order irrelevant
    let shards: Vec<Vec<u64>> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut local = vec![0u64; (kmax + 1) * n];
            for w in Permutations::shard(n, first) {
                let k = w.inversion_number() as usize;
                let m = w.left_descent_set().d();
                local[k * n + m] += 1;
            }
            local
        })
        .collect();
    let mut table = JointCountTable::zeros(n);
    for shard in shards {
        for (idx, c) in shard.into_iter().enumerate() {
            if c > 0 {
                table.counts[idx / n][idx % n] += c;
            }
        }
    }
    Ok(table)
}

/// Bytes held live by the Lehmer-code DP at degree `n` (three layers of
/// `n * (C(n,2)+1) * n` cells).
pub fn dp_memory_estimate(n: usize) -> u64 {
    let cells = (n as u64) * (choose2(n as u64) + 1) * n.max(1) as u64;
    let cell = if n <= U128_SAFE_DEGREE {
        std::mem::size_of::<u128>()
    } else {
        // BigUint header plus a few limbs
        std::mem::size_of::<BigUint>() + 32
    } as u64;
    3 * cells * cell
}

/// `34! < 2^128`, and every DP cell and partial sum is at most `n!`.
const U128_SAFE_DEGREE: usize = 34;

/// Joint table by dynamic programming over Lehmer codes, default cap.
pub fn lehmer_dp_joint_table(n: usize) -> Result<JointCountTable> {
    lehmer_dp_joint_table_capped(n, DEFAULT_DP_CAP)
}

/// Joint table by dynamic programming over Lehmer codes.
///
/// The Lehmer code `c_1..c_n` ranges over `0 <= c_i <= n - i`, sums to the
/// inversion number, and has `c_i > c_{i+1}` exactly at the descents of
/// `w`. The descent count of `w` has the same joint law with `ℓ` as the
/// left descent count, via `w -> w^-1`. Positions are scanned right to
/// left; the state is `(c_i, inversions so far, descents so far)` and each
/// new code value reads a prefix sum (for `c_{i+1} < c_i`) or suffix sum
/// (for `c_{i+1} >= c_i`) of the previous layer.
pub fn lehmer_dp_joint_table_capped(n: usize, cap: usize) -> Result<JointCountTable> {
    check_cap("Lehmer-code DP", n, cap)?;
    if n <= U128_SAFE_DEGREE {
        Ok(dp_tally::<u128>(n, |c| BigUint::from(*c)))
    } else {
        Ok(dp_tally::<BigUint>(n, |c| c.clone()))
    }
}

fn dp_tally<T>(n: usize, to_big: impl Fn(&T) -> BigUint) -> JointCountTable
where
    T: Clone + Zero + One + for<'a> AddAssign<&'a T> + Send + Sync,
{
    let kdim = choose2(n as u64) as usize + 1;
    let mdim = n;
    let plane = kdim * mdim;
    let idx = |k: usize, m: usize| k * mdim + m;

    // position n: c_n = 0, no inversions, no descents
    let mut layer: Vec<Vec<T>> = vec![{
        let mut p = vec![T::zero(); plane];
        p[idx(0, 0)] = T::one();
        p
    }];
    let mut kmax = 0;
    let mut mmax = 0;

    for pos in (1..n).rev() {
        // c_pos ranges over 0..=n-pos; the previous layer has n-pos values
        let width = layer.len();
        let mut prefix: Vec<Vec<T>> = Vec::with_capacity(width + 1);
        prefix.push(vec![T::zero(); plane]);
        for c in 0..width {
            let mut next = prefix[c].clone();
            add_plane(&mut next, &layer[c], kmax, mmax, mdim);
            prefix.push(next);
        }
        let mut suffix: Vec<Vec<T>> = vec![vec![T::zero(); plane]; width + 1];
        for c in (0..width).rev() {
            let mut next = suffix[c + 1].clone();
            add_plane(&mut next, &layer[c], kmax, mmax, mdim);
            suffix[c] = next;
        }
        drop(layer);

        let new_width = n - pos + 1;
        layer = (0..new_width)
            .into_par_iter()
            .map(|code| {
                let mut out = vec![T::zero(); plane];
                // previous c < code: descent at pos
                let below = &prefix[code.min(width)];
                // previous c >= code: no descent
                let above = &suffix[code.min(width)];
                for k in 0..=kmax {
                    for m in 0..=mmax {
                        let src = idx(k, m);
                        let b = &below[src];
                        if !b.is_zero() {
                            out[idx(k + code, m + 1)] += b;
                        }
                        let a = &above[src];
                        if !a.is_zero() {
                            out[idx(k + code, m)] += a;
                        }
                    }
                }
                out
            })
            .collect();
        kmax += n - pos;
        mmax += 1;
    }

    let mut table = JointCountTable::zeros(n);
    let mut total: Vec<T> = vec![T::zero(); plane];
    for p in &layer {
        add_plane(&mut total, p, kmax, mmax, mdim);
    }
    for k in 0..kdim {
        for m in 0..mdim {
            table.counts[k][m] = to_big(&total[idx(k, m)]);
        }
    }
    table
}

fn add_plane<T>(dst: &mut [T], src: &[T], kmax: usize, mmax: usize, mdim: usize)
where
    T: Zero + for<'a> AddAssign<&'a T>,
{
    for k in 0..=kmax {
        for m in 0..=mmax {
            let s = &src[k * mdim + m];
            if !s.is_zero() {
                dst[k * mdim + m] += s;
            }
        }
    }
}

/// Number of proper permutations in `S_n`, through the DP (default cap).
pub fn count_proper(n: usize) -> Result<BigUint> {
    Ok(lehmer_dp_joint_table(n)?.count_proper())
}

pub fn count_proper_capped(n: usize, cap: usize) -> Result<BigUint> {
    Ok(lehmer_dp_joint_table_capped(n, cap)?.count_proper())
}

/// Exact moments of `L`, `D` and `X = L - C(D+1, 2)` under the uniform law
/// on `S_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMoments {
    pub n: usize,
    pub e_l: BigRational,
    pub e_d: BigRational,
    pub e_d2: BigRational,
    pub e_x: BigRational,
    pub e_x2: BigRational,
    pub var_x: BigRational,
}

impl ExactMoments {
    pub fn from_table(table: &JointCountTable) -> Self {
        let mut s_l = BigInt::zero();
        let mut s_d = BigInt::zero();
        let mut s_d2 = BigInt::zero();
        let mut s_x = BigInt::zero();
        let mut s_x2 = BigInt::zero();
        for (k, m, c) in table.nonzero_cells() {
            let c = BigInt::from(c.clone());
            let x = x_value(k, m);
            s_l += &c * k;
            s_d += &c * m;
            s_d2 += &c * (m * m);
            s_x += &c * x;
            s_x2 += &c * (x as i128 * x as i128);
        }
        let total = BigInt::from(table.total());
        let mean = |s: BigInt| BigRational::new(s, total.clone());
        let e_x = mean(s_x);
        let e_x2 = mean(s_x2);
        let var_x = &e_x2 - &e_x * &e_x;
        ExactMoments {
            n: table.n(),
            e_l: mean(s_l),
            e_d: mean(s_d),
            e_d2: mean(s_d2),
            e_x,
            e_x2,
            var_x,
        }
    }

    /// `E[X^2] * 64 / n^4`, which tends to 1.
    pub fn second_moment_ratio(&self) -> BigRational {
        let n4 = BigInt::from(self.n as u64).pow(4);
        &self.e_x2 * BigRational::new(BigInt::from(64), n4)
    }
}

pub fn exact_moments(n: usize) -> Result<ExactMoments> {
    exact_moments_capped(n, DEFAULT_DP_CAP)
}

pub fn exact_moments_capped(n: usize, cap: usize) -> Result<ExactMoments> {
    if n < 2 {
        return Err(Error::domain("exact moments need n >= 2"));
    }
    Ok(ExactMoments::from_table(&lehmer_dp_joint_table_capped(n, cap)?))
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `(3n^2 - 7n + 2) / 24`.
pub fn formula_ex(n: usize) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::domain("the mean formula for X holds for n >= 2"));
    }
    let n = n as i64;
    Ok(ratio(3 * n * n - 7 * n + 2, 24))
}

/// `(n-1)/2 + (n-2)/3 + ((n-1 choose 2) - (n-2)) / 2`.
pub fn formula_ed2(n: usize) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::domain("the E[D^2] formula holds for n >= 2"));
    }
    let c = choose2(n as u64 - 1) as i64;
    let n = n as i64;
    Ok(ratio(n - 1, 2) + ratio(n - 2, 3) + ratio(c - (n - 2), 2))
}

/// Exact `Pr[X <= n]`, i.e. the proper fraction of `S_n`.
pub fn proper_probability(table: &JointCountTable) -> BigRational {
    BigRational::new(table.count_proper().into(), table.total().into())
}

/// Chebyshev bound `min(1, Var(X) / (E[X] - n)^2)` on `Pr[X <= n]`, or 1
/// when `E[X] <= n` leaves the bound vacuous.
pub fn chebyshev_bound_from(moments: &ExactMoments) -> BigRational {
    let gap = &moments.e_x - BigRational::from_integer(BigInt::from(moments.n as u64));
    if !gap.is_positive() {
        return BigRational::one();
    }
    let bound = &moments.var_x / (&gap * &gap);
    bound.min(BigRational::one())
}

pub fn chebyshev_bound(n: usize) -> Result<BigRational> {
    Ok(chebyshev_bound_from(&exact_moments(n)?))
}

/// Decimal expansion of a nonnegative rational, rounded half-up to
/// `digits` places.
pub fn decimal_string(r: &BigRational, digits: usize) -> String {
    let negative = r.is_negative();
    let r = r.abs();
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (r * BigRational::from_integer(scale.clone()) + ratio(1, 2)).floor().to_integer();
    let int_part = &scaled / &scale;
    let frac_part = &scaled % &scale;
    let mut s = String::new();
    if negative && !scaled.is_zero() {
        s.push('-');
    }
    write!(s, "{int_part}").unwrap();
    if digits > 0 {
        write!(s, ".{:0>width$}", frac_part.to_string(), width = digits).unwrap();
    }
    s
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// One entry of the proper-permutation census.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusEntry {
    pub n: usize,
    /// Decimal string; may exceed 64 bits.
    pub proper_count: String,
    pub total: String,
    pub ratio_decimal_string: String,
}

pub const RATIO_DIGITS: usize = 20;

impl CensusEntry {
    pub fn from_table(table: &JointCountTable) -> Self {
        CensusEntry {
            n: table.n(),
            proper_count: table.count_proper().to_string(),
            total: table.total().to_string(),
            ratio_decimal_string: decimal_string(&proper_probability(table), RATIO_DIGITS),
        }
    }
}
