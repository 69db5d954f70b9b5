//! Two's-complement fixed-point values in `s[x][y]` notation.
//!
//! A signed `s[x][y]` number carries one sign bit, `x` integer bits and `y`
//! fractional bits, covering `[-2^x, 2^x - 2^-y]` at resolution `2^-y`. The
//! unsigned variant `u[x][y]` drops the sign bit and covers `[0, 2^x - 2^-y]`.
//!
//! Every operation here is exact on the integer mantissa. Narrowing always
//! truncates toward negative infinity.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Widest mantissa (sign included) any format may use.
pub const MAX_MANTISSA_BITS: u32 = 63;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixedError {
    #[error("format {0} does not fit a 64-bit mantissa")]
    FormatTooWide(FixedFormat),
    #[error("denominator {0} is not a positive power of two")]
    BadDenominator(i64),
    #[error("{value} is not representable in {format} (resolution 2^-{frac})", frac = .format.frac_bits)]
    NotRepresentable { value: String, format: FixedFormat },
    #[error("raw mantissa {raw} is out of range for {format}")]
    RawOutOfRange { raw: i64, format: FixedFormat },
    #[error("fractional widths differ: {0} vs {1}")]
    FracMismatch(FixedFormat, FixedFormat),
    #[error("cannot parse fixed-point literal {0:?}")]
    Parse(String),
    #[error("cannot parse format {0:?}, expected s[x][y] or u[x][y]")]
    ParseFormat(String),
}

/// Shape of a fixed-point number: `int_bits` (x), `frac_bits` (y), signedness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedFormat {
    pub int_bits: u8,
    pub frac_bits: u8,
    pub signed: bool,
}

impl FixedFormat {
    /// Signed `s[int][frac]`.
    pub const fn signed(int_bits: u8, frac_bits: u8) -> Self {
        Self {
            int_bits,
            frac_bits,
            signed: true,
        }
    }

    /// Unsigned `u[int][frac]`.
    pub const fn unsigned(int_bits: u8, frac_bits: u8) -> Self {
        Self {
            int_bits,
            frac_bits,
            signed: false,
        }
    }

    pub fn validate(self) -> Result<Self, FixedError> {
        if self.mantissa_bits() > MAX_MANTISSA_BITS {
            return Err(FixedError::FormatTooWide(self));
        }
        Ok(self)
    }

    /// Total mantissa width including the sign bit when signed.
    pub const fn mantissa_bits(self) -> u32 {
        self.int_bits as u32 + self.frac_bits as u32 + self.signed as u32
    }

    pub const fn min_raw(self) -> i64 {
        if self.signed {
            -(1i64 << (self.int_bits as u32 + self.frac_bits as u32))
        } else {
            0
        }
    }

    pub const fn max_raw(self) -> i64 {
        (1i64 << (self.int_bits as u32 + self.frac_bits as u32)) - 1
    }

    pub fn resolution(self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn min_value(self) -> FixedPoint {
        FixedPoint {
            raw: self.min_raw(),
            format: self,
        }
    }

    pub fn max_value(self) -> FixedPoint {
        FixedPoint {
            raw: self.max_raw(),
            format: self,
        }
    }

    pub fn contains_raw(self, raw: i64) -> bool {
        (self.min_raw()..=self.max_raw()).contains(&raw)
    }

    /// Smallest signed format with `frac_bits` fractional bits holding every raw
    /// mantissa in `raws` (mantissas already scaled by `2^frac_bits`).
    pub fn smallest_signed(frac_bits: u8, raws: impl IntoIterator<Item = i64>) -> Self {
        let mut int_bits = 0u8;
        for raw in raws {
            while !FixedFormat::signed(int_bits, frac_bits).contains_raw(raw) {
                int_bits += 1;
            }
        }
        FixedFormat::signed(int_bits, frac_bits)
    }
}

impl fmt::Display for FixedFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.signed { 's' } else { 'u' };
        write!(f, "{}[{}][{}]", tag, self.int_bits, self.frac_bits)
    }
}

impl FromStr for FixedFormat {
    type Err = FixedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FixedError::ParseFormat(s.to_string());
        let t = s.trim();
        let signed = match t.chars().next() {
            Some('s') => true,
            Some('u') => false,
            _ => return Err(bad()),
        };
        let rest = t[1..].strip_prefix('[').ok_or_else(bad)?;
        let (int_part, rest) = rest.split_once("][").ok_or_else(bad)?;
        let frac_part = rest.strip_suffix(']').ok_or_else(bad)?;
        let int_bits = int_part.parse::<u8>().map_err(|_| bad())?;
        let frac_bits = frac_part.parse::<u8>().map_err(|_| bad())?;
        FixedFormat {
            int_bits,
            frac_bits,
            signed,
        }
        .validate()
    }
}

/// How to handle a value that falls between two grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    /// Reject values not on the grid.
    Exact,
    /// Truncate toward negative infinity.
    Floor,
}

/// A mantissa together with its format: `value = raw * 2^-frac_bits`.
#[derive(Debug, Clone, Copy)]
pub struct FixedPoint {
    raw: i64,
    format: FixedFormat,
}

impl FixedPoint {
    pub fn from_raw(raw: i64, format: FixedFormat) -> Result<Self, FixedError> {
        let format = format.validate()?;
        if !format.contains_raw(raw) {
            return Err(FixedError::RawOutOfRange { raw, format });
        }
        Ok(Self { raw, format })
    }

    pub fn zero(format: FixedFormat) -> Self {
        Self { raw: 0, format }
    }

    /// Builds `numer / denom` in `format`, saturating at the format bounds.
    ///
    /// `denom` must be a positive power of two. Off-grid values are rejected
    /// under [`Rounding::Exact`] and floored under [`Rounding::Floor`].
    pub fn from_rational(
        numer: i64,
        denom: i64,
        format: FixedFormat,
        rounding: Rounding,
    ) -> Result<Self, FixedError> {
        let format = format.validate()?;
        if denom <= 0 || (denom & (denom - 1)) != 0 {
            return Err(FixedError::BadDenominator(denom));
        }
        let denom_log2 = denom.trailing_zeros() as i32;
        let shift = format.frac_bits as i32 - denom_log2;
        let numer = numer as i128;
        let raw = if shift >= 0 {
            numer << shift
        } else {
            let down = (-shift) as u32;
            let floored = numer >> down;
            if rounding == Rounding::Exact && (floored << down) != numer {
                return Err(FixedError::NotRepresentable {
                    value: format!("{}/{}", numer, denom),
                    format,
                });
            }
            floored
        };
        let clamped = raw.clamp(format.min_raw() as i128, format.max_raw() as i128);
        Ok(Self {
            raw: clamped as i64,
            format,
        })
    }

    pub fn from_int(value: i64, format: FixedFormat) -> Result<Self, FixedError> {
        Self::from_rational(value, 1, format, Rounding::Exact)
    }

    /// Parses an exact decimal literal such as `"-1.25"` or `"7.75"`.
    ///
    /// The literal must land exactly on the format's grid and inside its range.
    pub fn parse_exact(text: &str, format: FixedFormat) -> Result<Self, FixedError> {
        let format = format.validate()?;
        let (numer, denom) = parse_decimal(text)?;
        let not_repr = || FixedError::NotRepresentable {
            value: text.trim().to_string(),
            format,
        };
        // numer / denom with denom = 10^k; on-grid iff numer * 2^y divisible by denom.
        let scaled = numer.checked_shl(format.frac_bits as u32).ok_or_else(not_repr)?;
        if scaled % denom != 0 {
            return Err(not_repr());
        }
        let raw = scaled / denom;
        if raw < format.min_raw() as i128 || raw > format.max_raw() as i128 {
            return Err(not_repr());
        }
        Ok(Self {
            raw: raw as i64,
            format,
        })
    }

    pub fn raw(self) -> i64 {
        self.raw
    }

    pub fn format(self) -> FixedFormat {
        self.format
    }

    pub fn to_f64(self) -> f64 {
        self.raw as f64 * self.format.resolution()
    }

    /// Exact sum. The result gains one integer bit so no carry is ever lost.
    pub fn add_widened(self, other: Self) -> Result<Self, FixedError> {
        if self.format.frac_bits != other.format.frac_bits {
            return Err(FixedError::FracMismatch(self.format, other.format));
        }
        let format = FixedFormat {
            int_bits: self.format.int_bits.max(other.format.int_bits) + 1,
            frac_bits: self.format.frac_bits,
            signed: self.format.signed || other.format.signed,
        }
        .validate()?;
        Ok(Self {
            raw: self.raw + other.raw,
            format,
        })
    }

    /// Exact product followed by a floor back to `self`'s fractional width.
    pub fn scale(self, k: Self) -> Result<Self, FixedError> {
        let format = FixedFormat {
            int_bits: self.format.int_bits + k.format.int_bits + 1,
            frac_bits: self.format.frac_bits,
            signed: self.format.signed || k.format.signed,
        }
        .validate()?;
        let product = self.raw as i128 * k.raw as i128;
        let raw = product >> k.format.frac_bits;
        if raw < format.min_raw() as i128 || raw > format.max_raw() as i128 {
            return Err(FixedError::RawOutOfRange {
                raw: raw as i64,
                format,
            });
        }
        Ok(Self {
            raw: raw as i64,
            format,
        })
    }

    /// Re-expresses the value in `format`, flooring extra fractional bits and
    /// saturating at the bounds.
    pub fn convert(self, format: FixedFormat) -> Self {
        let shift = format.frac_bits as i32 - self.format.frac_bits as i32;
        let raw = self.raw as i128;
        let raw = if shift >= 0 {
            raw << shift
        } else {
            raw >> (-shift)
        };
        let raw = raw.clamp(format.min_raw() as i128, format.max_raw() as i128);
        Self {
            raw: raw as i64,
            format,
        }
    }

    /// `min(max(self, lo), hi)` compared exactly, returned in `lo`'s format.
    pub fn saturate(self, lo: Self, hi: Self) -> Self {
        debug_assert!(lo <= hi, "saturate bounds out of order");
        if self < lo {
            lo
        } else if self > hi {
            hi.convert(lo.format)
        } else {
            self.convert(lo.format)
        }
    }

    /// Exact decimal rendering; every binary fraction has a finite expansion.
    pub fn to_decimal_string(self) -> String {
        let frac_bits = self.format.frac_bits as u32;
        let negative = self.raw < 0;
        let magnitude = (self.raw as i128).unsigned_abs();
        let int_part = magnitude >> frac_bits;
        let mut rem = magnitude & ((1u128 << frac_bits) - 1);
        let mut out = String::new();
        if negative {
            out.push('-');
        }
        out.push_str(&int_part.to_string());
        if rem != 0 {
            out.push('.');
            while rem != 0 {
                rem *= 10;
                let digit = rem >> frac_bits;
                out.push(char::from(b'0' + digit as u8));
                rem &= (1u128 << frac_bits) - 1;
            }
        }
        out
    }

    fn cmp_value(&self, other: &Self) -> Ordering {
        let frac = self.format.frac_bits.max(other.format.frac_bits) as u32;
        let a = (self.raw as i128) << (frac - self.format.frac_bits as u32);
        let b = (other.raw as i128) << (frac - other.format.frac_bits as u32);
        a.cmp(&b)
    }
}

/// Value equality: `1.0` in `s[3][2]` equals `1.0` in `s[5][4]`.
impl PartialEq for FixedPoint {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl Eq for FixedPoint {}

impl PartialOrd for FixedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FixedPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_value(other)
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

/// Splits a decimal literal into `numer / 10^k`.
fn parse_decimal(text: &str) -> Result<(i128, i128), FixedError> {
    let bad = || FixedError::Parse(text.to_string());
    let t = text.trim();
    let (negative, digits) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_digits, frac_digits) = digits.split_once('.').unwrap_or((digits, ""));
    if int_digits.is_empty() && frac_digits.is_empty() {
        return Err(bad());
    }
    if !int_digits.bytes().chain(frac_digits.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if frac_digits.len() > 30 || int_digits.len() > 30 {
        return Err(bad());
    }
    let mut numer: i128 = 0;
    for b in int_digits.bytes().chain(frac_digits.bytes()) {
        numer = numer.checked_mul(10).and_then(|n| n.checked_add((b - b'0') as i128)).ok_or_else(bad)?;
    }
    let denom = 10i128.pow(frac_digits.len() as u32);
    Ok((if negative { -numer } else { numer }, denom))
}
