//! Periods of the key-matrix sequence and seeded period censuses.
//!
//! The schedule is left multiplication by a fixed matrix `T` (see
//! [`schedule_matrix`]), so column `j` of `K_l` is `T^{l−1}` applied to
//! column `j` of `K1` and evolves on its own.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cipher::schedule_matrix;
use crate::error::{ensure_dims, Error, Result};
use crate::modmat::{ByteMatrix, ByteVector};

/// Step budget used by censuses unless overridden.
pub const DEFAULT_MAX_STEPS: usize = 65_536;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_2007;

/// Reported period counts `N_p` for `p = 8, 16, …, 512` over 10 000 random
/// `K1` with `m = 3`.
pub const REFERENCE_CENSUS: [ReferenceRow; 5] = [
    ReferenceRow {
        iv: [91, 63, 45],
        counts: [0, 0, 0, 0, 0, 1463, 8537],
    },
    ReferenceRow {
        iv: [113, 25, 219],
        counts: [14, 34, 127, 561, 3561, 5703, 0],
    },
    ReferenceRow {
        iv: [253, 115, 17],
        counts: [6, 20, 72, 284, 1081, 8537, 0],
    },
    ReferenceRow {
        iv: [1, 3, 5],
        counts: [0, 0, 98, 284, 1081, 8537, 0],
    },
    ReferenceRow {
        iv: [5, 121, 247],
        counts: [7, 36, 132, 561, 3561, 5703, 0],
    },
];

pub const REFERENCE_PERIODS: [usize; 7] = [8, 16, 32, 64, 128, 256, 512];
pub const REFERENCE_TRIALS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReferenceRow {
    pub iv: [u8; 3],
    pub counts: [usize; 7],
}

impl ReferenceRow {
    pub fn iv_vector(&self) -> ByteVector {
        ByteVector::new(self.iv.to_vec()).expect("three entries")
    }

    pub fn fraction(&self, period: usize) -> f64 {
        REFERENCE_PERIODS
            .iter()
            .position(|&p| p == period)
            .map_or(0.0, |i| self.counts[i] as f64 / REFERENCE_TRIALS as f64)
    }
}

/// Tail length `preperiod` and cycle length `period` of a state sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cycle {
    pub preperiod: usize,
    pub period: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeriodOutcome {
    Cycle(Cycle),
    /// No state repeated within the step budget.
    Overflow,
}

impl PeriodOutcome {
    pub fn cycle(self) -> Option<Cycle> {
        match self {
            PeriodOutcome::Cycle(c) => Some(c),
            PeriodOutcome::Overflow => None,
        }
    }
}

fn pack(bytes: &[u8]) -> u128 {
    bytes
        .iter()
        .fold(0u128, |acc, &b| (acc << 8) | u128::from(b))
}

fn apply(t: &ByteMatrix, v: &[u8]) -> Vec<u8> {
    t.rows()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(0u8, |acc, (a, b)| acc.wrapping_add(a.wrapping_mul(*b)))
        })
        .collect()
}

/// First repeat of `state_{l+1} = next(state_l)` within `max_steps` states.
fn find_cycle<S, K, F>(start: S, max_steps: usize, key: K, next: F) -> PeriodOutcome
where
    K: Fn(&S) -> u128,
    F: Fn(&S) -> S,
{
    let mut seen: HashMap<u128, usize> = HashMap::new();
    let mut state = start;
    for l in 0..=max_steps {
        if let Some(&first) = seen.get(&key(&state)) {
            return PeriodOutcome::Cycle(Cycle {
                preperiod: first,
                period: l - first,
            });
        }
        if l == max_steps {
            break;
        }
        seen.insert(key(&state), l);
        state = next(&state);
    }
    PeriodOutcome::Overflow
}

fn column_cycle(t: &ByteMatrix, column: Vec<u8>, max_steps: usize) -> PeriodOutcome {
    find_cycle(column, max_steps, |v| pack(v), |v| apply(t, v))
}

/// Preperiod `μ` and period `λ` of column `column` (1-based) of `K_l`.
///
/// `max_steps` bounds the number of distinct states recorded.
pub fn column_period(
    k1: &ByteMatrix,
    iv: &ByteVector,
    column: usize,
    max_steps: usize,
) -> Result<PeriodOutcome> {
    ensure_dims(k1.size(), iv.len())?;
    if column == 0 || column > k1.size() {
        return Err(Error::DimensionMismatch {
            expected: k1.size(),
            found: column,
        });
    }
    let t = schedule_matrix(iv)?;
    Ok(column_cycle(&t, k1.column(column - 1), max_steps))
}

/// Preperiod and period of the whole matrix sequence `K_l`.
pub fn matrix_period(k1: &ByteMatrix, iv: &ByteVector, max_steps: usize) -> Result<PeriodOutcome> {
    ensure_dims(k1.size(), iv.len())?;
    let t = schedule_matrix(iv)?;
    // period of the matrix is the lcm over columns only when preperiods
    // agree, so hash whole matrices instead
    let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut state = k1.clone();
    for l in 0..=max_steps {
        if let Some(&first) = seen.get(state.entries()) {
            return Ok(PeriodOutcome::Cycle(Cycle {
                preperiod: first,
                period: l - first,
            }));
        }
        if l == max_steps {
            break;
        }
        seen.insert(state.entries().to_vec(), l);
        state = t.mul(&state)?;
    }
    Ok(PeriodOutcome::Overflow)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusConfig {
    pub iv: ByteVector,
    pub trials: usize,
    pub seed: u64,
    /// Redraw `K1` until its determinant is odd.
    pub invertible_only: bool,
    pub max_steps: usize,
    /// 1-based column whose period is recorded.
    pub column: usize,
}

impl CensusConfig {
    pub fn new(iv: ByteVector, trials: usize, seed: u64, invertible_only: bool) -> Self {
        Self {
            iv,
            trials,
            seed,
            invertible_only,
            max_steps: DEFAULT_MAX_STEPS,
            column: 1,
        }
    }
}

/// Histogram of column periods over random `K1` for one `IV`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodCensus {
    pub iv: ByteVector,
    pub trials: usize,
    pub seed: u64,
    pub invertible_only: bool,
    pub histogram: BTreeMap<usize, usize>,
    pub preperiod_histogram: BTreeMap<usize, usize>,
    /// Trials with no repeat inside the step budget.
    pub overflows: usize,
}

impl PeriodCensus {
    pub fn count(&self, period: usize) -> usize {
        self.histogram.get(&period).copied().unwrap_or(0)
    }

    pub fn fraction(&self, period: usize) -> f64 {
        self.count(period) as f64 / self.trials as f64
    }

    /// Observed periods that are not powers of two.
    pub fn non_power_of_two(&self) -> Vec<usize> {
        self.histogram
            .keys()
            .copied()
            .filter(|p| !p.is_power_of_two())
            .collect()
    }
}

/// Random `K1` for trial `index`: ChaCha8 keyed by `seed` on stream `index`,
/// so each trial is independent of execution order.
pub fn trial_matrix(m: usize, seed: u64, index: u64, invertible_only: bool) -> Result<ByteMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    if invertible_only {
        ByteMatrix::random_invertible(m, &mut rng)
    } else {
        ByteMatrix::random(m, &mut rng)
    }
}

pub fn period_census(
    iv: &ByteVector,
    trials: usize,
    seed: u64,
    invertible_only: bool,
) -> Result<PeriodCensus> {
    run_census(&CensusConfig::new(
        iv.clone(),
        trials,
        seed,
        invertible_only,
    ))
}

pub fn run_census(config: &CensusConfig) -> Result<PeriodCensus> {
    if config.trials == 0 {
        return Err(Error::Parse("census needs at least one trial".into()));
    }
    let m = config.iv.len();
    if config.column == 0 || config.column > m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: config.column,
        });
    }
    let t = schedule_matrix(&config.iv)?;
    let outcomes = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| {
            let k1 = trial_matrix(m, config.seed, i, config.invertible_only)?;
            Ok(column_cycle(
                &t,
                k1.column(config.column - 1),
                config.max_steps,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut census = PeriodCensus {
        iv: config.iv.clone(),
        trials: config.trials,
        seed: config.seed,
        invertible_only: config.invertible_only,
        histogram: BTreeMap::new(),
        preperiod_histogram: BTreeMap::new(),
        overflows: 0,
    };
    for outcome in outcomes {
        match outcome {
            PeriodOutcome::Cycle(c) => {
                *census.histogram.entry(c.period).or_default() += 1;
                *census.preperiod_histogram.entry(c.preperiod).or_default() += 1;
            }
            PeriodOutcome::Overflow => census.overflows += 1,
        }
    }
    Ok(census)
}
