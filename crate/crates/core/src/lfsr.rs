//! XNOR-feedback Fibonacci shift registers.
//!
//! Bit position 1 is the least significant bit and position `width` the most
//! significant. Each step shifts the register one place toward the MSB and
//! feeds the XNOR of the tap bits into position 1. With XNOR feedback the
//! all-ones word is the lock-up state, so all-zeros is a legal seed.

use thiserror::Error;

use crate::fixedpoint::{FixedFormat, FixedPoint};

/// Tap positions of the 32-bit generator (maximal length, `2^32 - 1`).
pub const TAPS_32: [u8; 4] = [32, 22, 2, 1];

/// Fraction format of the comparator input.
pub const UNIFORM_FORMAT: FixedFormat = FixedFormat::unsigned(0, 31);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LfsrError {
    #[error("seed {seed:#x} is the all-ones lock-up state of a {width}-bit XNOR register")]
    LockupSeed { seed: u32, width: u8 },
    #[error("register width {0} outside 2..=32")]
    BadWidth(u8),
    #[error("tap position {tap} outside 1..={width}")]
    BadTap { tap: u8, width: u8 },
}

/// An XNOR shift register of arbitrary width up to 32 bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XnorLfsr {
    state: u32,
    width: u8,
    tap_mask: u32,
}

impl XnorLfsr {
    pub fn new(width: u8, taps: &[u8], seed: u32) -> Result<Self, LfsrError> {
        if !(2..=32).contains(&width) {
            return Err(LfsrError::BadWidth(width));
        }
        let mut tap_mask = 0u32;
        for &tap in taps {
            if tap == 0 || tap > width {
                return Err(LfsrError::BadTap { tap, width });
            }
            tap_mask |= 1 << (tap - 1);
        }
        let word_mask = Self::mask_for(width);
        let seed = seed & word_mask;
        if seed == word_mask {
            return Err(LfsrError::LockupSeed { seed, width });
        }
        Ok(Self {
            state: seed,
            width,
            tap_mask,
        })
    }

    fn mask_for(width: u8) -> u32 {
        if width == 32 {
            u32::MAX
        } else {
            (1u32 << width) - 1
        }
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    /// Shifts once and returns the new register word.
    #[inline]
    pub fn step(&mut self) -> u32 {
        let feedback = !(self.state & self.tap_mask).count_ones() & 1;
        self.state = ((self.state << 1) | feedback) & Self::mask_for(self.width);
        self.state
    }
}

/// The per-p-bit random source: 32-bit XNOR register with taps 32, 22, 2, 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lfsr32(XnorLfsr);

impl Lfsr32 {
    pub fn new(seed: u32) -> Result<Self, LfsrError> {
        XnorLfsr::new(32, &TAPS_32, seed).map(Self)
    }

    pub fn state(&self) -> u32 {
        self.0.state()
    }

    #[inline]
    pub fn step(&mut self) -> u32 {
        self.0.step()
    }

    /// Steps once and returns the top 31 bits of the new word as a `u[0][31]`
    /// mantissa, i.e. a fraction in `[0, 1)`.
    #[inline]
    pub fn next_uniform_raw(&mut self) -> u32 {
        uniform_raw(self.step())
    }

    pub fn next_uniform(&mut self) -> FixedPoint {
        uniform_s031(self.step())
    }
}

/// Maps a 32-bit register word to its comparator fraction (top 31 bits).
#[inline]
pub fn uniform_raw(sample: u32) -> u32 {
    sample >> 1
}

pub fn uniform_s031(sample: u32) -> FixedPoint {
    FixedPoint::from_raw(uniform_raw(sample) as i64, UNIFORM_FORMAT)
        .expect("31-bit value always fits u[0][31]")
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives `count` distinct, lock-up-free 32-bit seeds from a master seed.
pub fn derive_seeds(master: u64, count: usize) -> Vec<u32> {
    let mut seen = std::collections::HashSet::with_capacity(count);
    let mut seeds = Vec::with_capacity(count);
    let mut counter = 0u64;
    while seeds.len() < count {
        let word = splitmix64(master ^ splitmix64(counter));
        counter += 1;
        let seed = (word >> 32) as u32;
        if seed != u32::MAX && seen.insert(seed) {
            seeds.push(seed);
        }
    }
    seeds
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds() {
        assert!(Lfsr32::new(0).is_ok());
        assert!(Lfsr32::new(0xDEAD_BEEF).is_ok());
        assert_eq!(
            Lfsr32::new(u32::MAX),
            Err(LfsrError::LockupSeed {
                seed: u32::MAX,
                width: 32
            })
        );
        assert!(XnorLfsr::new(8, &[8, 6, 5, 4], 0xFF).is_err());
        assert!(XnorLfsr::new(8, &[9], 0).is_err());
        assert!(XnorLfsr::new(1, &[1], 0).is_err());
    }

    #[test]
    fn first_step_from_zero() {
        // XNOR(0,0,0,0) = 1 enters at position 1.
        let mut r = Lfsr32::new(0).unwrap();
        assert_eq!(r.step(), 1);
        // taps hold 0,0,0,1 -> XNOR = 0
        assert_eq!(r.step(), 0b10);
        // taps hold 0,0,1,0 -> XNOR = 0
        assert_eq!(r.step(), 0b100);
        // position 1 and 2 clear, 3 set: no tap set -> 1
        assert_eq!(r.step(), 0b1001);
    }

    #[test]
    fn hand_traced_high_taps() {
        // bit 32 set only -> one tap set -> feedback 0
        let mut r = Lfsr32::new(0x8000_0000).unwrap();
        assert_eq!(r.step(), 0);
        // bit 22 and bit 1 set -> two taps -> feedback 1
        let mut r = Lfsr32::new((1 << 21) | 1).unwrap();
        assert_eq!(r.step(), (1 << 22) | 0b11);
    }

    #[test]
    fn uniform_mapping() {
        assert_eq!(uniform_s031(0).to_f64(), 0.0);
        assert_eq!(uniform_s031(0x8000_0000).to_f64(), 0.5);
        assert_eq!(uniform_s031(0xFFFF_FFFE).to_f64(), 1.0 - (-31f64).exp2());
        assert_eq!(uniform_s031(0xFFFF_FFFE).raw(), 0x7FFF_FFFF);
    }

    #[test]
    fn miniature_full_period() {
        let mut r = XnorLfsr::new(8, &[8, 6, 5, 4], 0).unwrap();
        let mut seen = [false; 256];
        for _ in 0..255 {
            let s = r.step() as usize;
            assert!(!seen[s], "state {s} revisited early");
            seen[s] = true;
        }
        assert_eq!(seen.iter().filter(|&&v| v).count(), 255);
        assert!(!seen[255]);
        assert_eq!(r.state(), 0);
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let seeds = derive_seeds(7, 5000);
        let set: std::collections::HashSet<_> = seeds.iter().collect();
        assert_eq!(set.len(), 5000);
        assert!(!seeds.contains(&u32::MAX));
        assert_eq!(derive_seeds(7, 10), seeds[..10].to_vec());
        assert_ne!(derive_seeds(8, 10), seeds[..10].to_vec());
    }
}
