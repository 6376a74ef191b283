//! Seeded uniform sampling of `S_n` and streaming estimates of `E[X]`,
//! `E[X^2]` and the proper rate.
//!
//! Samples are grouped into fixed chunks of [`CHUNK_SIZE`]. Chunk `c` at
//! degree `n` draws from its own ChaCha8 stream, `(n << 32) | c`, keyed by
//! the user seed, so results do not depend on how chunks are scheduled
//! across threads. Accumulators are exact integers.

use std::fmt::Write as _;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{self, decimal_string, ExactMoments};
use crate::perm::Permutation;

pub const CHUNK_SIZE: u64 = 1024;

/// Generator for chunk `chunk` of a run at degree `n`.
pub fn chunk_rng(seed: u64, n: usize, chunk: u64) -> ChaCha8Rng {
    assert!(chunk < 1 << 32, "chunk index overflows the stream id");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | chunk);
    rng
}

/// Uniform integer in `0..bound` by Lemire's multiply-and-reject method.
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, bound: u64) -> u64 {
    assert!(bound > 0);
    let mut m = rng.next_u64() as u128 * bound as u128;
    if (m as u64) < bound {
        let threshold = bound.wrapping_neg() % bound;
        while (m as u64) < threshold {
            m = rng.next_u64() as u128 * bound as u128;
        }
    }
    (m >> 64) as u64
}

/// Fisher-Yates shuffle of the identity.
pub fn sample_permutation<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    assert!(n >= 1, "n must be positive");
    let mut word: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = uniform_below(rng, i as u64 + 1) as usize;
        word.swap(i, j);
    }
    Permutation::from_zero_based_unchecked(word)
}

/// Running totals for the statistic `X` over a batch of samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentSummary {
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub sum_x: i128,
    pub sum_x2: i128,
    pub proper_hits: u64,
}

impl MomentSummary {
    pub fn empty(n: usize, seed: u64) -> Self {
        MomentSummary {
            n,
            samples: 0,
            seed,
            sum_x: 0,
            sum_x2: 0,
            proper_hits: 0,
        }
    }

    /// Records one observation of `X`.
    pub fn push(&mut self, x: i64) {
        let x = x as i128;
        self.samples += 1;
        self.sum_x += x;
        self.sum_x2 += x * x;
        if x <= self.n as i128 {
            self.proper_hits += 1;
        }
    }

    pub fn merge(mut self, other: &MomentSummary) -> Self {
        debug_assert_eq!(self.n, other.n);
        self.samples += other.samples;
        self.sum_x += other.sum_x;
        self.sum_x2 += other.sum_x2;
        self.proper_hits += other.proper_hits;
        self
    }

    fn exact_mean(&self, total: i128) -> BigRational {
        assert!(self.samples >= 1, "no samples recorded");
        BigRational::new(BigInt::from(total), BigInt::from(self.samples))
    }

    pub fn mean_x_exact(&self) -> BigRational {
        self.exact_mean(self.sum_x)
    }

    pub fn mean_x(&self) -> f64 {
        exact::to_f64(&self.mean_x_exact())
    }

    pub fn m2_x_exact(&self) -> BigRational {
        self.exact_mean(self.sum_x2)
    }

    pub fn m2_x(&self) -> f64 {
        exact::to_f64(&self.m2_x_exact())
    }

    /// Unbiased sample variance `(N * S2 - S1^2) / (N (N - 1))`.
    pub fn sample_variance_exact(&self) -> BigRational {
        assert!(self.samples >= 2, "variance needs two samples");
        let n = BigInt::from(self.samples);
        let s1 = BigInt::from(self.sum_x);
        let s2 = BigInt::from(self.sum_x2);
        BigRational::new(&n * s2 - &s1 * &s1, &n * (&n - 1))
    }

    pub fn sample_variance(&self) -> f64 {
        exact::to_f64(&self.sample_variance_exact())
    }

    /// Standard error of the mean of `X`.
    pub fn se_mean(&self) -> f64 {
        (self.sample_variance() / self.samples as f64).sqrt()
    }

    /// Empirical `E[X^2] * 64 / n^4`.
    pub fn ratio_to_n4_over_64(&self) -> f64 {
        let n4 = BigInt::from(self.n as u64).pow(4);
        exact::to_f64(&(self.m2_x_exact() * BigRational::new(BigInt::from(64), n4)))
    }

    pub fn proper_rate(&self) -> f64 {
        self.proper_hits as f64 / self.samples as f64
    }

    /// Normal-approximation standard error `sqrt(p (1 - p) / N)`. It is zero
    /// when no sample (or every sample) is proper, so intervals built from
    /// it say nothing for rates near 0 or 1.
    pub fn se_rate(&self) -> f64 {
        let p = self.proper_rate();
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }
}

fn run_chunk(n: usize, seed: u64, chunk: u64, len: u64) -> MomentSummary {
    let mut rng = chunk_rng(seed, n, chunk);
    let mut acc = MomentSummary::empty(n, seed);
    for _ in 0..len {
        acc.push(sample_permutation(n, &mut rng).statistic_x());
    }
    acc
}

/// Draws `samples` uniform permutations of `S_n` and accumulates `X`.
///
/// Runs on the current rayon pool; the result is identical for every pool
/// size.
pub fn estimate_moments(n: usize, samples: u64, seed: u64) -> Result<MomentSummary> {
    if n == 0 {
        return Err(Error::domain("degree n must be at least 1"));
    }
    if samples < 2 {
        return Err(Error::domain(format!(
            "need at least 2 samples for a variance estimate, got {samples}"
        )));
    }
    let chunks = samples.div_ceil(CHUNK_SIZE);
    if chunks >= 1 << 32 {
        return Err(Error::domain("sample count too large"));
    }
    let partials: Vec<MomentSummary> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
            run_chunk(n, seed, c, len)
        })
        .collect();
    Ok(partials
        .iter()
        .fold(MomentSummary::empty(n, seed), |acc, p| acc.merge(p)))
}

/// One row of a decay experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub summary: MomentSummary,
    pub formula_ex: BigRational,
    /// Exact proper fraction, when `n` is within the DP cap.
    pub exact_rate: Option<BigRational>,
    pub chebyshev_bound: Option<BigRational>,
}

impl DecayRow {
    pub fn n(&self) -> usize {
        self.summary.n
    }
}

/// Estimates at each degree in `ns`, with exact comparisons up to `dp_cap`.
pub fn decay_experiment(ns: &[usize], samples: u64, seed: u64, dp_cap: usize) -> Result<Vec<DecayRow>> {
    if ns.is_empty() {
        return Err(Error::domain("decay experiment needs at least one degree"));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("degrees must be strictly ascending"));
    }
    if ns[0] < 2 {
        return Err(Error::domain("decay experiment needs n >= 2"));
    }
    ns.iter()
        .map(|&n| {
            let summary = estimate_moments(n, samples, seed)?;
            let (exact_rate, chebyshev_bound) = if n <= dp_cap {
                let table = exact::lehmer_dp_joint_table_capped(n, dp_cap)?;
                let moments = ExactMoments::from_table(&table);
                (
                    Some(exact::proper_probability(&table)),
                    Some(exact::chebyshev_bound_from(&moments)),
                )
            } else {
                (None, None)
            };
            Ok(DecayRow {
                summary,
                formula_ex: exact::formula_ex(n)?,
                exact_rate,
                chebyshev_bound,
            })
        })
        .collect()
}

pub const CSV_HEADER: &str = "n,samples,seed,mean_X,se_mean,formula_EX,m2_X,ratio_to_n4_over_64,proper_rate,se_rate,exact_rate,chebyshev_bound";

const DIGITS: usize = 10;

fn fmt_f64(x: f64) -> String {
    format!("{x:.DIGITS$}")
}

/// CSV line for a row, no trailing newline.
pub fn csv_line(row: &DecayRow) -> String {
    let s = &row.summary;
    let mut line = String::new();
    let opt = |r: &Option<BigRational>| r.as_ref().map(|r| decimal_string(r, DIGITS)).unwrap_or_default();
    write!(
        line,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        s.n,
        s.samples,
        s.seed,
        decimal_string(&s.mean_x_exact(), DIGITS),
        fmt_f64(s.se_mean()),
        decimal_string(&row.formula_ex, DIGITS),
        decimal_string(&s.m2_x_exact(), DIGITS),
        fmt_f64(s.ratio_to_n4_over_64()),
        fmt_f64(s.proper_rate()),
        fmt_f64(s.se_rate()),
        opt(&row.exact_rate),
        opt(&row.chebyshev_bound),
    )
    .unwrap();
    line
}

pub fn write_csv<W: Write>(rows: &[DecayRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", csv_line(row))?;
    }
    Ok(())
}
