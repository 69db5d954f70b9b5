//! The weighted p-bit: local weight row, overflow/clamp multiplexer, tanh
//! lookup table, LFSR and comparator in one unit.
//!
//! Data path of a single update:
//!
//! ```text
//! m_j ──▶ Σ (h + J·m + h_C·m_C) ──▶ × I0 ──▶ MUX ──▶ LUT ──▶ z ──┐
//!                                   S, C ──┘                     ├─▶ m = rand < z
//!                                          LFSR ──▶ rand ────────┘
//! ```

use std::sync::OnceLock;

use crate::fixedpoint::{FixedError, FixedFormat, FixedPoint};
use crate::lfsr::{Lfsr32, UNIFORM_FORMAT};

/// LUT input format.
pub const ACTIVATION_INPUT: FixedFormat = FixedFormat::signed(3, 2);
/// LUT output format: `z = (tanh(u) + 1) / 2` as an unsigned 31-bit fraction.
pub const ACTIVATION_OUTPUT: FixedFormat = UNIFORM_FORMAT;
/// Number of LUT entries, one per `s[3][2]` grid point.
pub const TABLE_LEN: usize = 64;
/// Fractional width shared by weights, biases and the activation input.
pub const WEIGHT_FRAC_BITS: u8 = 2;

pub fn min_tanh() -> FixedPoint {
    ACTIVATION_INPUT.min_value()
}

pub fn max_tanh() -> FixedPoint {
    ACTIVATION_INPUT.max_value()
}

/// Truncated `(tanh(u) + 1) / 2` for `u` in `[-8, 7.75]` at 0.25 steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationTable {
    entries: [u32; TABLE_LEN],
}

impl ActivationTable {
    pub fn new() -> Self {
        let mut entries = [0u32; TABLE_LEN];
        for (index, entry) in entries.iter_mut().enumerate() {
            let u = (index as f64 - 32.0) * 0.25;
            // 1/(1+e^-2u) keeps full relative precision in the lower tail.
            let z = 1.0 / (1.0 + (-2.0 * u).exp());
            *entry = (z * (1u64 << 31) as f64).floor() as u32;
        }
        Self { entries }
    }

    /// Process-wide table; contents are fixed.
    pub fn shared() -> &'static ActivationTable {
        static TABLE: OnceLock<ActivationTable> = OnceLock::new();
        TABLE.get_or_init(ActivationTable::new)
    }

    pub fn raw_entries(&self) -> &[u32; TABLE_LEN] {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> FixedPoint {
        FixedPoint::from_raw(self.entries[index] as i64, ACTIVATION_OUTPUT)
            .expect("LUT entries fit u[0][31]")
    }

    /// Table index of an `s[3][2]` input: its mantissa offset by 32.
    #[inline]
    pub fn index_of(u: FixedPoint) -> usize {
        debug_assert_eq!(u.format(), ACTIVATION_INPUT);
        (u.raw() + 32) as usize
    }

    /// Exact lookup; `u` must already be an `s[3][2]` value.
    pub fn activate(&self, u: FixedPoint) -> FixedPoint {
        self.entry(Self::index_of(u))
    }

    #[inline]
    pub fn activate_raw(&self, u: FixedPoint) -> u32 {
        self.entries[Self::index_of(u)]
    }
}

impl Default for ActivationTable {
    fn default() -> Self {
        Self::new()
    }
}

/// Select/clamp state of a p-bit as seen by the multiplexer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClampValue {
    Zero,
    One,
    Float,
}

impl ClampValue {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            ClampValue::One
        } else {
            ClampValue::Zero
        }
    }
}

/// Weighted external input on the `m_C` terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coupling {
    pub strength: FixedPoint,
    pub input: bool,
}

#[derive(Debug, Clone)]
pub struct WeightedPBit {
    pub weights: Vec<FixedPoint>,
    pub bias: FixedPoint,
    pub i0: FixedPoint,
    pub select: bool,
    pub clamp: bool,
    pub coupling: Option<Coupling>,
    lfsr: Lfsr32,
    m: bool,
}

impl WeightedPBit {
    pub fn new(weights: Vec<FixedPoint>, bias: FixedPoint, i0: FixedPoint, lfsr: Lfsr32) -> Self {
        Self {
            weights,
            bias,
            i0,
            select: false,
            clamp: false,
            coupling: None,
            lfsr,
            m: false,
        }
    }

    pub fn output(&self) -> bool {
        self.m
    }

    pub fn set_output(&mut self, m: bool) {
        self.m = m;
    }

    pub fn lfsr(&self) -> &Lfsr32 {
        &self.lfsr
    }

    /// Clocks the LFSR without sampling it. Inside a tile every LFSR is
    /// free-running and steps on each cycle, latching or not.
    #[inline]
    pub fn idle_tick(&mut self) {
        self.lfsr.step();
    }

    pub fn reseed(&mut self, lfsr: Lfsr32) {
        self.lfsr = lfsr;
    }

    pub fn set_clamp(&mut self, value: ClampValue) {
        match value {
            ClampValue::Float => self.select = false,
            ClampValue::Zero => {
                self.select = true;
                self.clamp = false;
            }
            ClampValue::One => {
                self.select = true;
                self.clamp = true;
            }
        }
    }

    pub fn clamp_value(&self) -> ClampValue {
        match (self.select, self.clamp) {
            (false, _) => ClampValue::Float,
            (true, false) => ClampValue::Zero,
            (true, true) => ClampValue::One,
        }
    }

    /// `I0 * (h + Σ_j J_j m_j + h_C m_C)`, exact in a widened format.
    pub fn weighted_sum(&self, m: &[bool]) -> Result<FixedPoint, FixedError> {
        debug_assert_eq!(m.len(), self.weights.len());
        let mut acc = self.bias;
        for (&w, &bit) in self.weights.iter().zip(m) {
            if bit {
                acc = acc.add_widened(w)?;
            }
        }
        if let Some(c) = self.coupling {
            if c.input {
                acc = acc.add_widened(c.strength)?;
            }
        }
        acc.scale(self.i0)
    }

    /// The multiplexer: clamp overrides the sum, otherwise the sum is
    /// saturated onto the LUT domain `[min_tanh, max_tanh]`.
    pub fn mux_threshold(&self, sum: FixedPoint) -> FixedPoint {
        mux(self.select, self.clamp, sum)
    }

    /// First update cycle: weighted sum, multiplexer and table lookup.
    pub fn compute_activation(&self, table: &ActivationTable, m: &[bool]) -> u32 {
        let sum = self
            .weighted_sum(m)
            .expect("weight formats are validated at construction");
        table.activate_raw(self.mux_threshold(sum))
    }

    /// Second update cycle: step the LFSR once and compare against `z`.
    #[inline]
    pub fn latch(&mut self, z: u32) -> bool {
        let r = self.lfsr.next_uniform_raw();
        self.m = r < z;
        self.m
    }

    /// A complete update against the current outputs `m` of the p-bit's row.
    pub fn update(&mut self, table: &ActivationTable, m: &[bool]) -> bool {
        let z = self.compute_activation(table, m);
        self.latch(z)
    }
}

/// Table I of the multiplexer, as a pure function.
pub fn mux(select: bool, clamp: bool, sum: FixedPoint) -> FixedPoint {
    match (select, clamp) {
        (true, false) => min_tanh(),
        (true, true) => max_tanh(),
        (false, _) => sum.saturate(min_tanh(), max_tanh()),
    }
}
