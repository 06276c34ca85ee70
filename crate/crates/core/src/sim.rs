//! Seeded simulation of noisy QoS outcomes and empirical utility estimates.
//!
//! Observed QoS is q = a + ε with ε ~ N(0, Σ). Every sample index owns its
//! own ChaCha8 stream derived from (seed, index), so serial and parallel
//! runs produce bit-identical results, and accumulation runs over fixed
//! chunks merged in index order regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market::{Contract, EffortVector, MarketInstance, UTILITY_EXPONENT_CAP};
use crate::matrix::{dot, Matrix};

const CHUNK: u64 = 4096;

/// Simulation size, seed, and the antithetic-pairing toggle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    samples: u64,
    seed: u64,
    antithetic: bool,
}

impl SimConfig {
    pub fn new(samples: u64, seed: u64, antithetic: bool) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidSimConfig("samples must be at least 1".into()));
        }
        Ok(Self {
            samples,
            seed,
            antithetic,
        })
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn antithetic(&self) -> bool {
        self.antithetic
    }
}

/// Empirical moments of the simulated payoff distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub mean_fn_utility: f64,
    pub stderr_fn_utility: f64,
    pub mean_payment: f64,
    pub stderr_payment: f64,
    pub mean_qos: Vec<f64>,
    pub samples_used: u64,
}

/// Welford accumulator; exact for constant streams, mergeable in fixed order.
#[derive(Debug, Clone, Copy)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn new() -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2
            + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let k = self.count as f64;
        (self.m2 / (k * (k - 1.0))).sqrt()
    }
}

fn draw_normals(base: &ChaCha8Rng, index: u64, n: usize) -> Vec<f64> {
    let mut rng = base.clone();
    rng.set_stream(index);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn shifted(a: &[f64], noise: &[f64], sign: f64) -> Vec<f64> {
    a.iter().zip(noise).map(|(ai, ni)| ai + sign * ni).collect()
}

/// Deterministic stream of simulated QoS vectors q = a + ε. With the
/// antithetic toggle each index yields the paired draws q(z) then q(−z).
pub struct QosStream {
    base: ChaCha8Rng,
    factor: Matrix,
    a: Vec<f64>,
    total: u64,
    index: u64,
    pending: Option<Vec<f64>>,
    antithetic: bool,
}

impl Iterator for QosStream {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if let Some(q) = self.pending.take() {
            return Some(q);
        }
        if self.index >= self.total {
            return None;
        }
        let z = draw_normals(&self.base, self.index, self.a.len());
        let noise = self.factor.mul_vec(&z);
        self.index += 1;
        if self.antithetic {
            self.pending = Some(shifted(&self.a, &noise, -1.0));
        }
        Some(shifted(&self.a, &noise, 1.0))
    }
}

/// Samples observed QoS around the effort `a` under the instance's noise
/// covariance. The stream is a pure function of (instance, a, config).
pub fn sample_qos(
    inst: &MarketInstance,
    a: &EffortVector,
    config: SimConfig,
) -> Result<QosStream> {
    if a.len() != inst.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            found: a.len(),
        });
    }
    Ok(QosStream {
        base: ChaCha8Rng::seed_from_u64(config.seed()),
        factor: inst.noise_cov().sampling_factor()?,
        a: a.as_slice().to_vec(),
        total: config.samples(),
        index: 0,
        pending: None,
        antithetic: config.antithetic(),
    })
}

struct ChunkState {
    utility: Moments,
    payment: Moments,
    qos: Vec<Moments>,
}

/// Estimates the node's expected CARA utility and expected payment under the
/// contract at effort `a`. Means and standard errors are sample moments;
/// any draw whose utility exponent exceeds the cap aborts with
/// [`Error::Overflow`].
pub fn estimate_fn_utility(
    inst: &MarketInstance,
    contract: &Contract,
    a: &EffortVector,
    config: SimConfig,
) -> Result<SimResult> {
    let n = inst.n();
    if contract.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: contract.dim(),
        });
    }
    if a.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.len(),
        });
    }
    let factor = inst.noise_cov().sampling_factor()?;
    let cost = inst.operation_cost(a)?;
    let base = ChaCha8Rng::seed_from_u64(config.seed());
    let eta = inst.eta();
    let total = config.samples();
    let num_chunks = total.div_ceil(CHUNK);

    let run_chunk = |chunk: u64| -> Result<ChunkState> {
        let lo = chunk * CHUNK;
        let hi = (lo + CHUNK).min(total);
        let mut state = ChunkState {
            utility: Moments::new(),
            payment: Moments::new(),
            qos: vec![Moments::new(); n],
        };
        let mut absorb = |q: Vec<f64>| -> Result<()> {
            let w = contract.t + dot(&contract.s, &q);
            let exponent = -eta * (w - cost);
            if exponent > UTILITY_EXPONENT_CAP {
                return Err(Error::Overflow(exponent));
            }
            state.utility.push(-exponent.exp());
            state.payment.push(w);
            for (m, qi) in state.qos.iter_mut().zip(&q) {
                m.push(*qi);
            }
            Ok(())
        };
        for index in lo..hi {
            let z = draw_normals(&base, index, n);
            let noise = factor.mul_vec(&z);
            absorb(shifted(a.as_slice(), &noise, 1.0))?;
            if config.antithetic() {
                absorb(shifted(a.as_slice(), &noise, -1.0))?;
            }
        }
        Ok(state)
    };

    // chunk boundaries are fixed, and the merge below runs in chunk order,
    // so the result does not depend on how rayon schedules the work
    let chunks: Vec<Result<ChunkState>> = (0..num_chunks)
        .into_par_iter()
        .map(run_chunk)
        .collect();

    let mut utility = Moments::new();
    let mut payment = Moments::new();
    let mut qos = vec![Moments::new(); n];
    for chunk in chunks {
        let chunk = chunk?;
        utility.merge(&chunk.utility);
        payment.merge(&chunk.payment);
        for (acc, m) in qos.iter_mut().zip(&chunk.qos) {
            acc.merge(m);
        }
    }

    Ok(SimResult {
        mean_fn_utility: utility.mean,
        stderr_fn_utility: utility.stderr(),
        mean_payment: payment.mean,
        stderr_payment: payment.stderr(),
        mean_qos: qos.iter().map(|m| m.mean).collect(),
        samples_used: utility.count,
    })
}

/// Closed-form counterpart of the simulated mean utility:
/// −exp(−η · CE_u(contract, a)).
pub fn analytic_fn_utility(
    inst: &MarketInstance,
    contract: &Contract,
    a: &EffortVector,
) -> Result<f64> {
    let ce = inst.fn_certainty_equivalent(contract, a)?;
    let exponent = -inst.eta() * ce;
    if exponent > UTILITY_EXPONENT_CAP {
        return Err(Error::Overflow(exponent));
    }
    Ok(-exponent.exp())
}
