//! Monte-Carlo rewriting simulator.
//!
//! One step flips one information bit drawn from the flip distribution. A
//! successful write counts as a rewrite. A flip the code cannot absorb erases
//! the block: both the block and the tracked information vector return to
//! zero and the triggering flip is dropped. Each erase closes one interval,
//! whose length is the number of rewrites it contains.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64`, so runs are
//! reproducible across platforms and thread counts.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::code::{CodeKind, FlashCode, Step};
use crate::dist::FlipDistribution;
use crate::error::{FlashError, Result};
use crate::model::{BlockState, CodeParams, InfoVector};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: CodeParams,
    pub code: CodeKind,
    pub dist: FlipDistribution<f64>,
    /// Number of erases after which the run stops.
    pub stop: u64,
    pub seed: u64,
}

impl RunConfig {
    pub fn uniform(params: CodeParams, code: CodeKind, stop: u64, seed: u64) -> Self {
        RunConfig {
            params,
            code,
            dist: FlipDistribution::uniform(params.k()),
            stop,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.stop == 0 {
            return Err(FlashError::InvalidParams(
                "erase target must be >= 1".into(),
            ));
        }
        if self.dist.k() != self.params.k() {
            return Err(FlashError::InvalidDistribution(format!(
                "{} probabilities for k = {}",
                self.dist.k(),
                self.params.k()
            )));
        }
        Ok(())
    }
}

/// Draws bit indices by inverting the cumulative distribution.
#[derive(Debug, Clone)]
pub struct BitSampler {
    cumulative: Vec<f64>,
    last_nonzero: usize,
}

impl BitSampler {
    pub fn new(dist: &FlipDistribution<f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = dist
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last_nonzero = dist.support().last().unwrap_or(0);
        BitSampler {
            cumulative,
            last_nonzero,
        }
    }

    /// Maps `u` in `[0, 1)` to the first bit whose cumulative mass exceeds it.
    /// Zero-probability bits are never returned.
    pub fn pick(&self, u: f64) -> usize {
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.last_nonzero)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.pick(rng.random::<f64>())
    }
}

/// Per-interval rewrite counts of one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    intervals: Vec<u64>,
}

impl RunStats {
    pub fn from_intervals(intervals: Vec<u64>) -> Self {
        RunStats { intervals }
    }

    /// Concatenates runs in the given order.
    pub fn merge<I: IntoIterator<Item = RunStats>>(runs: I) -> Self {
        RunStats {
            intervals: runs.into_iter().flat_map(|r| r.intervals).collect(),
        }
    }

    pub fn intervals(&self) -> &[u64] {
        &self.intervals
    }

    pub fn erases(&self) -> u64 {
        self.intervals.len() as u64
    }

    pub fn total_rewrites(&self) -> u64 {
        self.intervals.iter().sum()
    }

    /// Rewrites plus erase steps.
    pub fn total_steps(&self) -> u64 {
        self.total_rewrites() + self.erases()
    }

    /// Frequency of each interval length.
    pub fn histogram(&self) -> BTreeMap<u64, u64> {
        let mut h = BTreeMap::new();
        for &x in &self.intervals {
            *h.entry(x).or_insert(0) += 1;
        }
        h
    }

    /// Mean number of rewrites between consecutive erases.
    pub fn average(&self) -> Result<f64> {
        if self.intervals.is_empty() {
            return Err(FlashError::EmptyStats);
        }
        Ok(self.total_rewrites() as f64 / self.erases() as f64)
    }

    fn sample_variance(&self) -> Result<f64> {
        let mean = self.average()?;
        let n = self.intervals.len();
        if n < 2 {
            return Ok(0.0);
        }
        let ss: f64 = self
            .intervals
            .iter()
            .map(|&x| (x as f64 - mean).powi(2))
            .sum();
        Ok(ss / (n - 1) as f64)
    }

    pub fn average_std_error(&self) -> Result<f64> {
        Ok((self.sample_variance()? / self.erases() as f64).sqrt())
    }

    /// Erases per step, the triggering flip counted as a step.
    pub fn erase_rate(&self) -> Result<f64> {
        if self.intervals.is_empty() {
            return Err(FlashError::EmptyStats);
        }
        Ok(self.erases() as f64 / self.total_steps() as f64)
    }

    /// Erases per rewrite, `1 / average()`. This is the erase probability
    /// that the Markov analyzer reports.
    pub fn erase_probability(&self) -> Result<f64> {
        Ok(1.0 / self.average()?)
    }

    /// Delta-method standard error of [`erase_probability`](Self::erase_probability);
    /// intervals are independent renewal cycles.
    pub fn erase_probability_std_error(&self) -> Result<f64> {
        let mean = self.average()?;
        Ok(self.average_std_error()? / (mean * mean))
    }
}

/// Drives `code` until `stop` erases, drawing bits from `next_bit`.
pub fn run_with<C, F>(code: &C, stop: u64, mut next_bit: F) -> Result<RunStats>
where
    C: FlashCode,
    F: FnMut() -> usize,
{
    let params = *code.params();
    let mut state = BlockState::zero(&params);
    let mut info = InfoVector::zero(params.k());
    let mut intervals = Vec::with_capacity(stop as usize);
    let mut current = 0u64;
    while (intervals.len() as u64) < stop {
        let bit = next_bit();
        match code.write_flip(&mut state, bit)? {
            Step::Written => {
                current += 1;
                info.flip(bit);
            }
            Step::Erase => {
                intervals.push(current);
                current = 0;
                state.reset();
                info.reset();
            }
        }
    }
    Ok(RunStats { intervals })
}

pub fn run(cfg: &RunConfig) -> Result<RunStats> {
    cfg.validate()?;
    let code = cfg.code.codec(cfg.params);
    let sampler = BitSampler::new(&cfg.dist);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    run_with(&code, cfg.stop, || sampler.sample(&mut rng))
}

/// Seed of run `index` under master seed `master` (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `runs` independent replicas in parallel, replica `r` seeded with
/// `derive_seed(cfg.seed, r)`; results are ordered by replica.
pub fn run_batch(cfg: &RunConfig, runs: u64) -> Result<Vec<RunStats>> {
    (0..runs)
        .into_par_iter()
        .map(|r| {
            run(&RunConfig {
                seed: derive_seed(cfg.seed, r),
                ..cfg.clone()
            })
        })
        .collect()
}

/// Scalar results of a run, for the stats JSON.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub params: CodeParams,
    pub code: CodeKind,
    pub probabilities: Vec<f64>,
    pub erases: u64,
    pub seed: u64,
    pub average: f64,
    pub average_std_error: f64,
    pub erase_rate: f64,
    pub erase_probability: f64,
    pub erase_probability_std_error: f64,
    pub intervals: u64,
    pub total_rewrites: u64,
    pub total_steps: u64,
}

impl RunSummary {
    pub fn new(cfg: &RunConfig, stats: &RunStats) -> Result<Self> {
        Ok(RunSummary {
            params: cfg.params,
            code: cfg.code,
            probabilities: cfg.dist.probs().to_vec(),
            erases: cfg.stop,
            seed: cfg.seed,
            average: stats.average()?,
            average_std_error: stats.average_std_error()?,
            erase_rate: stats.erase_rate()?,
            erase_probability: stats.erase_probability()?,
            erase_probability_std_error: stats.erase_probability_std_error()?,
            intervals: stats.erases(),
            total_rewrites: stats.total_rewrites(),
            total_steps: stats.total_steps(),
        })
    }
}

/// Writes `rewrites,frequency` rows in ascending order.
pub fn write_histogram_csv<W: Write>(stats: &RunStats, mut out: W) -> io::Result<()> {
    writeln!(out, "rewrites,frequency")?;
    for (rewrites, freq) in stats.histogram() {
        writeln!(out, "{rewrites},{freq}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilifc::Ilifc;

    fn params(n: usize, k: usize, q: usize) -> CodeParams {
        CodeParams::new(n, k, q).unwrap()
    }

    #[test]
    fn alternating_schedule_on_small_ilifc() {
        let code = Ilifc::new(params(4, 2, 2));
        let mut schedule = [0usize, 1].into_iter().cycle();
        let stats = run_with(&code, 3, || schedule.next().unwrap()).unwrap();
        // 0,1,0,1 written; 0 erases; then 1,0,1,0 written; 1 erases; ...
        assert_eq!(stats.intervals(), &[4, 4, 4]);
    }

    #[test]
    fn single_erase_target() {
        let cfg = RunConfig::uniform(params(4, 2, 3), CodeKind::Layered, 1, 9);
        assert_eq!(run(&cfg).unwrap().erases(), 1);
    }

    #[test]
    fn same_seed_same_stats() {
        let cfg = RunConfig::uniform(params(8, 2, 4), CodeKind::Ilifc, 500, 42);
        assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
        let other = RunConfig {
            seed: 43,
            ..cfg.clone()
        };
        assert_ne!(run(&cfg).unwrap(), run(&other).unwrap());
    }

    #[test]
    fn batch_is_thread_count_invariant() {
        let cfg = RunConfig::uniform(params(8, 4, 3), CodeKind::Layered, 50, 7);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| run_batch(&cfg, 8)).unwrap();
        let b = four.install(|| run_batch(&cfg, 8)).unwrap();
        assert_eq!(a, b);
        assert_eq!(RunStats::merge(a).erases(), 400);
    }

    #[test]
    fn averages_and_rates() {
        let s = RunStats::from_intervals(vec![3, 5]);
        assert_eq!(s.average().unwrap(), 4.0);
        let s = RunStats::from_intervals(vec![9]);
        assert_eq!(s.erase_rate().unwrap(), 0.1);
        assert!((s.erase_probability().unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(RunStats::default().average(), Err(FlashError::EmptyStats));
        assert_eq!(
            RunStats::default().erase_rate(),
            Err(FlashError::EmptyStats)
        );
    }

    #[test]
    fn histogram_csv_sorted() {
        let s = RunStats::from_intervals(vec![5, 3, 5, 4]);
        let mut buf = Vec::new();
        write_histogram_csv(&s, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "rewrites,frequency\n3,1\n4,1\n5,2\n"
        );
    }

    #[test]
    fn sampler_skips_zero_mass() {
        let d = FlipDistribution::new(vec![0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        let s = BitSampler::new(&d);
        assert_eq!(s.pick(0.0), 1);
        assert_eq!(s.pick(0.4999), 1);
        assert_eq!(s.pick(0.5), 3);
        assert_eq!(s.pick(0.999_999), 3);
        assert_eq!(s.pick(1.0), 3);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = RunConfig::uniform(params(4, 2, 2), CodeKind::Ilifc, 0, 1);
        assert!(run(&cfg).is_err());
        cfg.stop = 1;
        cfg.dist = FlipDistribution::uniform(4);
        assert!(run(&cfg).is_err());
    }
}
