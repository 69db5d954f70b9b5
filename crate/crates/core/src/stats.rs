//! Sample logs, decoded histograms, distribution distances and the
//! single-p-bit transfer curve.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::fixedpoint::{FixedPoint, Rounding};
use crate::lfsr::{derive_seeds, Lfsr32};
use crate::pbit::{ActivationTable, WeightedPBit, ACTIVATION_INPUT, TABLE_LEN};

/// Widest terminal group that can be decoded.
pub const MAX_GROUP_BITS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("unknown group {0:?}")]
    UnknownGroup(String),
    #[error("group {name:?} refers to bit {bit} of a {width}-bit sample")]
    GroupOutOfRange { name: String, bit: usize, width: usize },
    #[error("group {name:?} is {bits} bits wide, limit is {MAX_GROUP_BITS}")]
    GroupTooWide { name: String, bits: usize },
    #[error("sample width {got} differs from log width {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("cannot parse expression {0:?}")]
    BadExpression(String),
    #[error("state keys need at most 64 p-bits, log has {0}")]
    StateTooWide(usize),
    #[error("logs disagree on group definitions")]
    GroupMismatch,
}

/// Append-only record of sampled state vectors with named bit groups.
///
/// Group bits are little-endian: the first listed bit is the LSB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleLog {
    width: usize,
    words: usize,
    data: Vec<u64>,
    len: usize,
    groups: IndexMap<String, Vec<usize>>,
}

impl SampleLog {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            words: width.div_ceil(64),
            data: Vec::new(),
            len: 0,
            groups: IndexMap::new(),
        }
    }

    pub fn define_group(&mut self, name: impl Into<String>, bits: Vec<usize>) -> Result<(), StatsError> {
        let name = name.into();
        if bits.len() > MAX_GROUP_BITS {
            return Err(StatsError::GroupTooWide {
                name,
                bits: bits.len(),
            });
        }
        if let Some(&bit) = bits.iter().find(|&&b| b >= self.width) {
            return Err(StatsError::GroupOutOfRange {
                name,
                bit,
                width: self.width,
            });
        }
        self.groups.insert(name, bits);
        Ok(())
    }

    pub fn groups(&self) -> &IndexMap<String, Vec<usize>> {
        &self.groups
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words_per_sample(&self) -> usize {
        self.words
    }

    pub fn reserve(&mut self, samples: usize) {
        self.data.reserve(samples * self.words);
    }

    pub fn push(&mut self, state: &[bool]) -> Result<(), StatsError> {
        if state.len() != self.width {
            return Err(StatsError::WidthMismatch {
                expected: self.width,
                got: state.len(),
            });
        }
        let start = self.data.len();
        self.data.resize(start + self.words, 0);
        for (i, &bit) in state.iter().enumerate() {
            if bit {
                self.data[start + i / 64] |= 1 << (i % 64);
            }
        }
        self.len += 1;
        Ok(())
    }

    /// Appends a packed sample, bit `i` in word `i / 64`.
    pub fn push_words(&mut self, words: &[u64]) {
        debug_assert_eq!(words.len(), self.words);
        self.data.extend_from_slice(words);
        self.len += 1;
    }

    fn words_of(&self, sample: usize) -> &[u64] {
        &self.data[sample * self.words..(sample + 1) * self.words]
    }

    pub fn bit(&self, sample: usize, bit: usize) -> bool {
        (self.words_of(sample)[bit / 64] >> (bit % 64)) & 1 == 1
    }

    pub fn sample(&self, sample: usize) -> Vec<bool> {
        (0..self.width).map(|b| self.bit(sample, b)).collect()
    }

    /// Whole state as an integer, p-bit 0 in the LSB.
    pub fn state_key(&self, sample: usize) -> Result<u64, StatsError> {
        match self.words {
            0 => Ok(0),
            1 => Ok(self.data[sample]),
            _ => Err(StatsError::StateTooWide(self.width)),
        }
    }

    pub fn decode(&self, sample: usize, group: &str) -> Result<i128, StatsError> {
        let bits = self
            .groups
            .get(group)
            .ok_or_else(|| StatsError::UnknownGroup(group.to_string()))?;
        Ok(self.decode_bits(sample, bits))
    }

    fn decode_bits(&self, sample: usize, bits: &[usize]) -> i128 {
        let words = self.words_of(sample);
        bits.iter().enumerate().fold(0i128, |acc, (k, &b)| {
            acc | ((((words[b / 64] >> (b % 64)) & 1) as i128) << k)
        })
    }

    /// Counts of each full state.
    pub fn state_histogram(&self) -> Result<BTreeMap<u64, u64>, StatsError> {
        let mut hist = BTreeMap::new();
        for s in 0..self.len {
            *hist.entry(self.state_key(s)?).or_insert(0) += 1;
        }
        Ok(hist)
    }

    /// Counts of an integer expression over groups, e.g. `"S-A-B"`.
    pub fn histogram(&self, expr: &str) -> Result<BTreeMap<i128, u64>, StatsError> {
        let expr = GroupExpr::parse(expr)?;
        let resolved = expr
            .terms
            .iter()
            .map(|(sign, term)| match term {
                Term::Group(name) => self
                    .groups
                    .get(name)
                    .map(|bits| (*sign, Some(bits.as_slice()), 0))
                    .ok_or_else(|| StatsError::UnknownGroup(name.clone())),
                Term::Const(c) => Ok((*sign, None, *c)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut hist = BTreeMap::new();
        for s in 0..self.len {
            let value: i128 = resolved
                .iter()
                .map(|&(sign, bits, c)| sign * bits.map_or(c, |b| self.decode_bits(s, b)))
                .sum();
            *hist.entry(value).or_insert(0) += 1;
        }
        Ok(hist)
    }

    /// Appends another log recorded on the same circuit.
    pub fn merge(&mut self, other: &SampleLog) -> Result<(), StatsError> {
        if other.width != self.width {
            return Err(StatsError::WidthMismatch {
                expected: self.width,
                got: other.width,
            });
        }
        if other.groups != self.groups {
            return Err(StatsError::GroupMismatch);
        }
        self.data.extend_from_slice(&other.data);
        self.len += other.len;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Term {
    Group(String),
    Const(i128),
}

/// Signed sum of group values and integer constants.
#[derive(Debug, Clone, PartialEq, Eq)]
struct GroupExpr {
    terms: Vec<(i128, Term)>,
}

impl GroupExpr {
    fn parse(text: &str) -> Result<Self, StatsError> {
        let bad = || StatsError::BadExpression(text.to_string());
        let normalized: String = text
            .chars()
            .map(|c| if c == '\u{2212}' { '-' } else { c })
            .filter(|c| !c.is_whitespace())
            .collect();
        let mut terms = Vec::new();
        let mut sign = 1i128;
        let mut current = String::new();
        let mut expect_term = true;
        for c in normalized.chars() {
            match c {
                '+' | '-' => {
                    if expect_term {
                        if !current.is_empty() || !terms.is_empty() {
                            return Err(bad());
                        }
                        // leading sign
                        sign = if c == '-' { -1 } else { 1 };
                        expect_term = true;
                        continue;
                    }
                    terms.push((sign, Self::term(&current).ok_or_else(bad)?));
                    current.clear();
                    sign = if c == '-' { -1 } else { 1 };
                    expect_term = true;
                }
                c if c.is_alphanumeric() || c == '_' || c == '.' => {
                    current.push(c);
                    expect_term = false;
                }
                _ => return Err(bad()),
            }
        }
        if expect_term {
            return Err(bad());
        }
        terms.push((sign, Self::term(&current).ok_or_else(bad)?));
        Ok(Self { terms })
    }

    fn term(text: &str) -> Option<Term> {
        if text.is_empty() {
            return None;
        }
        if text.chars().all(|c| c.is_ascii_digit()) {
            return text.parse().ok().map(Term::Const);
        }
        let first = text.chars().next()?;
        (first.is_alphabetic() || first == '_').then(|| Term::Group(text.to_string()))
    }
}

/// Counts normalised to probabilities.
pub fn normalize<K: Ord + Clone>(counts: &BTreeMap<K, u64>) -> BTreeMap<K, f64> {
    let total: u64 = counts.values().sum();
    counts
        .iter()
        .map(|(k, &c)| (k.clone(), if total == 0 { 0.0 } else { c as f64 / total as f64 }))
        .collect()
}

/// Total-variation distance `(1/2) Σ |p - q|` over the union of supports.
pub fn tv_distance<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut sum = 0.0;
    for (k, &pv) in p {
        sum += (pv - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &qv) in q {
        if !p.contains_key(k) {
            sum += qv.abs();
        }
    }
    0.5 * sum
}

/// Key with the largest count; ties go to the smallest key.
pub fn mode<K: Ord + Clone>(counts: &BTreeMap<K, u64>) -> Option<K> {
    let mut best: Option<(&K, u64)> = None;
    for (k, &c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k.clone())
}

/// Writes `value,count,probability` rows.
pub fn write_histogram_csv<K: Display, W: Write>(
    counts: &BTreeMap<K, u64>,
    out: W,
) -> Result<(), csv::Error> {
    let total: u64 = counts.values().sum();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["value", "count", "probability"])?;
    for (k, &c) in counts {
        let p = if total == 0 { 0.0 } else { c as f64 / total as f64 };
        w.write_record([k.to_string(), c.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmoidPoint {
    pub input: f64,
    pub mean: f64,
}

/// Writes `input,mean,ideal` rows, `ideal` being `(tanh(u) + 1) / 2`.
pub fn write_sigmoid_csv<W: Write>(points: &[SigmoidPoint], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["input", "mean", "ideal"])?;
    for p in points {
        let ideal = (p.input.tanh() + 1.0) / 2.0;
        w.write_record([p.input.to_string(), p.mean.to_string(), ideal.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Every `s[3][2]` input from -8 to 7.75.
pub fn activation_grid() -> Vec<FixedPoint> {
    (0..TABLE_LEN as i64)
        .map(|i| {
            FixedPoint::from_rational(i - 32, 4, ACTIVATION_INPUT, Rounding::Exact)
                .expect("grid point on s[3][2]")
        })
        .collect()
}

/// Drives one free-running p-bit with each fixed input in `grid` for
/// `n_updates` updates and records the mean binary output.
pub fn sigmoid_sweep(n_updates: usize, grid: &[FixedPoint], seed: u64) -> Vec<SigmoidPoint> {
    let table = ActivationTable::shared();
    let lfsr = Lfsr32::new(derive_seeds(seed, 1)[0]).expect("derived seed avoids lock-up");
    let one = FixedPoint::from_int(1, ACTIVATION_INPUT).expect("1 fits s[3][2]");
    let mut pbit = WeightedPBit::new(Vec::new(), FixedPoint::zero(ACTIVATION_INPUT), one, lfsr);
    grid.iter()
        .map(|&u| {
            pbit.bias = u.convert(ACTIVATION_INPUT);
            let ones = (0..n_updates).filter(|_| pbit.update(table, &[])).count();
            SigmoidPoint {
                input: u.to_f64(),
                mean: if n_updates == 0 { 0.0 } else { ones as f64 / n_updates as f64 },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn log_with(samples: &[[bool; 4]]) -> SampleLog {
        let mut log = SampleLog::new(4);
        log.define_group("A", vec![0, 1]).unwrap();
        log.define_group("B", vec![2, 3]).unwrap();
        for s in samples {
            log.push(s).unwrap();
        }
        log
    }

    #[test]
    fn decode_is_little_endian() {
        let log = log_with(&[[true, false, false, true]]);
        assert_eq!(log.decode(0, "A").unwrap(), 1);
        assert_eq!(log.decode(0, "B").unwrap(), 2);
        assert_eq!(log.state_key(0).unwrap(), 0b1001);
        assert!(matches!(log.decode(0, "Z"), Err(StatsError::UnknownGroup(_))));
    }

    #[test]
    fn expression_histograms() {
        let log = log_with(&[
            [true, false, false, true],
            [true, true, true, true],
            [false, false, false, false],
        ]);
        let h = log.histogram("B-A").unwrap();
        assert_eq!(h, BTreeMap::from([(0, 2), (1, 1)]));
        let h = log.histogram("A + B").unwrap();
        assert_eq!(h, BTreeMap::from([(0, 1), (3, 1), (6, 1)]));
        let h = log.histogram("B\u{2212}A\u{2212}1").unwrap();
        assert_eq!(h, BTreeMap::from([(-1, 2), (0, 1)]));
        let h = log.histogram("-A").unwrap();
        assert_eq!(h, BTreeMap::from([(-3, 1), (-1, 1), (0, 1)]));
        assert!(log.histogram("A+").is_err());
        assert!(log.histogram("A*B").is_err());
        assert!(log.histogram("").is_err());
        assert!(matches!(log.histogram("A-Q"), Err(StatsError::UnknownGroup(_))));
    }

    #[test]
    fn constant_log_single_bin() {
        let log = log_with(&[[true, true, false, false]; 17]);
        assert_eq!(log.histogram("A").unwrap(), BTreeMap::from([(3, 17)]));
        assert_eq!(log.state_histogram().unwrap(), BTreeMap::from([(3, 17)]));
    }

    #[test]
    fn group_validation() {
        let mut log = SampleLog::new(4);
        assert!(log.define_group("X", vec![4]).is_err());
        assert!(log.define_group("W", (0..65).collect()).is_err());
        assert!(log.push(&[true; 3]).is_err());
        assert!(SampleLog::new(65).state_key(0).is_err());
    }

    #[test]
    fn merge_appends() {
        let mut a = log_with(&[[true, false, false, false]]);
        let b = log_with(&[[false, true, false, false], [false, false, false, false]]);
        a.merge(&b).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a.decode(1, "A").unwrap(), 2);
        assert!(a.merge(&SampleLog::new(4)).is_err());
    }

    #[test]
    fn tv_extremes() {
        let p = BTreeMap::from([(0u64, 0.5), (1, 0.5)]);
        assert_eq!(tv_distance(&p, &p), 0.0);
        let a = BTreeMap::from([(0u64, 1.0)]);
        let b = BTreeMap::from([(1u64, 1.0)]);
        assert_eq!(tv_distance(&a, &b), 1.0);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_histogram_csv(&BTreeMap::from([(-2i128, 1u64), (5, 3)]), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "value,count,probability\n-2,1,0.25\n5,3,0.75\n"
        );
    }

    #[test]
    fn mode_prefers_smallest_key_on_ties() {
        assert_eq!(mode(&BTreeMap::from([(3, 5u64), (1, 5), (2, 4)])), Some(1));
        assert_eq!(mode::<i32>(&BTreeMap::new()), None);
    }

    #[test]
    fn sigmoid_endpoints() {
        let grid = activation_grid();
        assert_eq!(grid.len(), 64);
        assert_eq!(grid[32].to_f64(), 0.0);
        let pts = sigmoid_sweep(100_000, &[grid[0], grid[32], grid[63]], 3);
        assert!(pts[0].mean <= 0.001);
        assert!((pts[1].mean - 0.5).abs() < 0.005);
        assert!(pts[2].mean >= 0.999);
    }

    fn arb_dist() -> impl Strategy<Value = BTreeMap<u8, f64>> {
        proptest::collection::vec(0.0f64..1.0, 6).prop_map(|w| {
            let total: f64 = w.iter().sum::<f64>().max(1e-9);
            w.into_iter()
                .enumerate()
                .map(|(k, v)| (k as u8, v / total))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn tv_is_a_metric(p in arb_dist(), q in arb_dist(), r in arb_dist()) {
            let pq = tv_distance(&p, &q);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
            prop_assert!((pq - tv_distance(&q, &p)).abs() < 1e-15);
            prop_assert!(pq <= tv_distance(&p, &r) + tv_distance(&r, &q) + 1e-12);
        }

        #[test]
        fn histogram_total_matches_samples(bits in proptest::collection::vec(any::<[bool; 4]>(), 0..50)) {
            let log = log_with(&bits);
            let total: u64 = log.histogram("A-B").unwrap().values().sum();
            prop_assert_eq!(total as usize, bits.len());
        }
    }
}
