//! Ground truth for reciprocal p-circuits.
//!
//! [`enumerate`] evaluates the Boltzmann law exactly over every free state.
//! [`ReferenceSampler`] is the ideal sequential sampler in real arithmetic:
//! `m_i = sgn(rand(-1, 1) + tanh(I_i))` with `I_i = I0 (h_i + Σ_j J_ij m_j)`,
//! no fixed point, no lookup table and a ChaCha random source.
//!
//! Energies follow the gate's convention:
//!
//! * bipolar, `s ∈ {-1, +1}`: `E = -I0 (Σ_{i<j} J_ij s_i s_j + Σ_i h_i s_i)`
//! * binary, `m ∈ {0, 1}`: `E = -2 I0 (Σ_{i<j} J_ij m_i m_j + Σ_i h_i m_i)`
//!
//! The factor 2 in the binary form comes from driving a `{0, 1}` unit with
//! `tanh` of its field: `P(m = 1) = (1 + tanh I) / 2 = 1 / (1 + e^{-2I})`.
//! With it, a bipolar gate and its binary transform give identical
//! distributions state for state.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::library::{Convention, GateSpec};

/// Largest free-p-bit count [`enumerate`] accepts.
pub const ENUMERATION_LIMIT: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("J is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("J has a nonzero diagonal entry at {0}")]
    NonZeroDiagonal(usize),
    #[error("state has {got} entries, gate has {expected}")]
    Length { expected: usize, got: usize },
    #[error("state value {0} is not valid in the {1:?} convention")]
    BadSpin(i8, Convention),
    #[error("{free} free p-bits exceed the enumeration budget of {limit}")]
    BudgetExceeded { free: usize, limit: usize },
    #[error("gate has {0} p-bits, state keys hold at most 64")]
    TooWide(usize),
}

/// Dense real-valued view of a gate.
#[derive(Debug, Clone)]
struct RealGate {
    j: Vec<Vec<f64>>,
    h: Vec<f64>,
    convention: Convention,
}

impl RealGate {
    fn new(g: &GateSpec) -> Result<Self, OracleError> {
        let n = g.len();
        if g.j.len() != n || g.h.len() != n {
            return Err(OracleError::Length {
                expected: n,
                got: g.j.len().min(g.h.len()),
            });
        }
        let j: Vec<Vec<f64>> = g
            .j
            .iter()
            .map(|r| r.iter().map(|v| v.to_f64()).collect())
            .collect();
        for i in 0..n {
            if j[i].len() != n {
                return Err(OracleError::Length {
                    expected: n,
                    got: j[i].len(),
                });
            }
            if j[i][i] != 0.0 {
                return Err(OracleError::NonZeroDiagonal(i));
            }
            for k in i + 1..n {
                if j[i][k] != j[k][i] {
                    return Err(OracleError::Asymmetric(i, k));
                }
            }
        }
        Ok(Self {
            j,
            h: g.h.iter().map(|v| v.to_f64()).collect(),
            convention: g.convention,
        })
    }

    fn spin_value(&self, up: bool) -> f64 {
        match (self.convention, up) {
            (_, true) => 1.0,
            (Convention::Bipolar, false) => -1.0,
            (Convention::Binary, false) => 0.0,
        }
    }

    fn energy_factor(&self) -> f64 {
        match self.convention {
            Convention::Bipolar => 1.0,
            Convention::Binary => 2.0,
        }
    }

    fn energy(&self, x: &[f64], i0: f64) -> f64 {
        let n = x.len();
        let mut pair = 0.0;
        let mut field = 0.0;
        for i in 0..n {
            field += self.h[i] * x[i];
            for k in i + 1..n {
                pair += self.j[i][k] * x[i] * x[k];
            }
        }
        -self.energy_factor() * i0 * (pair + field)
    }

    fn local_field(&self, x: &[f64], i: usize, i0: f64) -> f64 {
        let coupled: f64 = self.j[i].iter().zip(x).map(|(w, v)| w * v).sum();
        i0 * (self.h[i] + coupled)
    }
}

/// Energy of `state` under the gate's convention. Bipolar states use `±1`,
/// binary states `0`/`1`.
pub fn energy(g: &GateSpec, state: &[i8], i0: f64) -> Result<f64, OracleError> {
    let real = RealGate::new(g)?;
    if state.len() != g.len() {
        return Err(OracleError::Length {
            expected: g.len(),
            got: state.len(),
        });
    }
    let x = state
        .iter()
        .map(|&s| match (g.convention, s) {
            (Convention::Bipolar, 1 | -1) | (Convention::Binary, 0 | 1) => Ok(s as f64),
            _ => Err(OracleError::BadSpin(s, g.convention)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(real.energy(&x, i0))
}

/// Exact stationary distribution over binary state keys (bit `i` set when
/// p-bit `i` is up).
#[derive(Debug, Clone, PartialEq)]
pub struct BoltzmannDistribution {
    pub probs: BTreeMap<u64, f64>,
    pub i0: f64,
}

impl BoltzmannDistribution {
    pub fn prob(&self, key: u64) -> f64 {
        self.probs.get(&key).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }
}

/// Packs a bit pattern into a state key, p-bit 0 in the LSB.
pub fn state_key(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
}

/// Boltzmann law over the free p-bits; clamped p-bits (`Some(value)`) are
/// conditioned on, not sampled.
pub fn enumerate(
    g: &GateSpec,
    i0: f64,
    clamps: &[Option<bool>],
) -> Result<BoltzmannDistribution, OracleError> {
    let real = RealGate::new(g)?;
    let n = g.len();
    if n > 64 {
        return Err(OracleError::TooWide(n));
    }
    if clamps.len() != n {
        return Err(OracleError::Length {
            expected: n,
            got: clamps.len(),
        });
    }
    let free: Vec<usize> = (0..n).filter(|&i| clamps[i].is_none()).collect();
    if free.len() > ENUMERATION_LIMIT {
        return Err(OracleError::BudgetExceeded {
            free: free.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let base_key = state_key(&clamps.iter().map(|c| c.unwrap_or(false)).collect::<Vec<_>>());
    let count = 1usize << free.len();
    let mut x: Vec<f64> = clamps.iter().map(|c| real.spin_value(c.unwrap_or(false))).collect();
    let mut keys = Vec::with_capacity(count);
    let mut energies = Vec::with_capacity(count);
    for code in 0..count {
        let mut key = base_key;
        for (bit, &i) in free.iter().enumerate() {
            let up = (code >> bit) & 1 == 1;
            x[i] = real.spin_value(up);
            key |= (up as u64) << i;
        }
        keys.push(key);
        energies.push(real.energy(&x, i0));
    }
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (-(e - e_min)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let probs = keys
        .into_iter()
        .zip(weights)
        .map(|(k, w)| (k, w / z))
        .collect();
    Ok(BoltzmannDistribution { probs, i0 })
}

/// Ideal sequential Gibbs sampler in real arithmetic.
#[derive(Debug, Clone)]
pub struct ReferenceSampler {
    gate: RealGate,
    i0: f64,
    free: Vec<usize>,
    x: Vec<f64>,
    rng: ChaCha8Rng,
}

impl ReferenceSampler {
    pub fn new(g: &GateSpec, i0: f64, clamps: &[Option<bool>], seed: u64) -> Result<Self, OracleError> {
        let gate = RealGate::new(g)?;
        let n = g.len();
        if n > 64 {
            return Err(OracleError::TooWide(n));
        }
        if clamps.len() != n {
            return Err(OracleError::Length {
                expected: n,
                got: clamps.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = clamps
            .iter()
            .map(|c| gate.spin_value(c.unwrap_or_else(|| rng.gen())))
            .collect();
        Ok(Self {
            free: (0..n).filter(|&i| clamps[i].is_none()).collect(),
            gate,
            i0,
            x,
            rng,
        })
    }

    pub fn local_field(&self, i: usize) -> f64 {
        self.gate.local_field(&self.x, i, self.i0)
    }

    pub fn is_up(&self, i: usize) -> bool {
        self.x[i] > 0.0
    }

    /// `m_i = sgn(rand(-1, 1) + tanh(I_i))`; returns whether the p-bit is up.
    pub fn update(&mut self, i: usize) -> bool {
        let drive = self.local_field(i).tanh();
        let r: f64 = self.rng.gen_range(-1.0..1.0);
        let up = r + drive > 0.0;
        self.x[i] = self.gate.spin_value(up);
        up
    }

    /// One sequential pass over the free p-bits in index order.
    pub fn sweep(&mut self) {
        for k in 0..self.free.len() {
            let i = self.free[k];
            self.update(i);
        }
    }

    pub fn key(&self) -> u64 {
        self.x
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &v)| acc | (((v > 0.0) as u64) << i))
    }
}

/// State counts after each of `n_sweeps` sweeps of the reference sampler.
pub fn reference_sample(
    g: &GateSpec,
    i0: f64,
    clamps: &[Option<bool>],
    n_sweeps: usize,
    seed: u64,
) -> Result<BTreeMap<u64, u64>, OracleError> {
    let mut sampler = ReferenceSampler::new(g, i0, clamps, seed)?;
    let mut counts = BTreeMap::new();
    for _ in 0..n_sweeps {
        sampler.sweep();
        *counts.entry(sampler.key()).or_insert(0) += 1;
    }
    Ok(counts)
}
