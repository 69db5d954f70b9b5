//! Tiles, sequencers, directed inter-tile links and the global clock.
//!
//! Every tile owns a sequencer that enables one p-bit at a time. An enabled
//! p-bit spends two cycles on its update (sum and lookup, then compare and
//! latch) followed by one gap cycle, so a tile of `n` p-bits completes a sweep
//! every `3n` cycles. Each p-bit's LFSR is free-running: it steps on every
//! cycle and the comparator reads it only when the p-bit latches, so
//! consecutive samples of one p-bit are `3n` shifts apart rather than one.
//! All tiles share one clock and run concurrently. Tiles
//! only see each other through [`DirectedLink`]s, which copy latched source
//! outputs into destination clamp or coupling inputs at the end of a cycle.

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fixedpoint::{FixedError, FixedFormat, FixedPoint};
use crate::lfsr::{derive_seeds, splitmix64, Lfsr32};
use crate::pbit::{ActivationTable, ClampValue, Coupling, WeightedPBit, WEIGHT_FRAC_BITS};
use crate::stats::SampleLog;

/// Cycles an enabled p-bit holds the enable line.
pub const CYCLES_PER_UPDATE: u64 = 2;
/// Idle cycles between adjacent enables.
pub const GAP_CYCLES: u64 = 1;
pub const SLOT_CYCLES: u64 = CYCLES_PER_UPDATE + GAP_CYCLES;

/// Format of the interconnect strength `I0`.
pub const I0_FORMAT: FixedFormat = FixedFormat::signed(7, 8);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("no p-bit at tile {tile}, index {pbit}")]
    InvalidRef { tile: usize, pbit: usize },
    #[error("tile {tile}: {what}")]
    BadTile { tile: String, what: String },
    #[error("link {0} -> {1} stays inside one tile")]
    SameTileLink(PbitRef, PbitRef),
    #[error("p-bit {0} already driven by another link")]
    DuplicateLinkDest(PbitRef),
    #[error("unknown terminal {0:?}")]
    UnknownTerminal(String),
    #[error("value {value} does not fit terminal {name:?} of width {width}")]
    ValueOutOfRange { name: String, value: i128, width: usize },
    #[error(transparent)]
    Fixed(#[from] FixedError),
}

/// Address of one p-bit: tile index and position inside the tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PbitRef {
    pub tile: usize,
    pub pbit: usize,
}

impl PbitRef {
    pub const fn new(tile: usize, pbit: usize) -> Self {
        Self { tile, pbit }
    }
}

impl std::fmt::Display for PbitRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.tile, self.pbit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkMode {
    /// Destination select line held high, clamp line follows the source.
    ClampFollow,
    /// Source drives the destination's `m_C` input with strength `h_C`.
    Weighted(FixedPoint),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectedLink {
    pub source: PbitRef,
    pub dest: PbitRef,
    pub mode: LinkMode,
}

/// What a tile's sequencer does on the upcoming cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TileActivity {
    Idle,
    Compute(usize),
    Latch(usize),
    Gap(usize),
}

impl TileActivity {
    pub fn updating(self) -> Option<usize> {
        match self {
            TileActivity::Compute(i) | TileActivity::Latch(i) => Some(i),
            _ => None,
        }
    }
}

/// A sequenced group of reciprocally coupled p-bits.
#[derive(Debug, Clone)]
pub struct Tile {
    name: String,
    labels: Vec<String>,
    weight_format: FixedFormat,
    pbits: Vec<WeightedPBit>,
    outputs: Vec<bool>,
    update_order: Vec<usize>,
    position: u64,
    pending: u32,
}

impl Tile {
    /// Builds a tile from a weight matrix (row `i` is p-bit `i`'s weight row)
    /// and a bias vector, all on the `s[x][2]` grid of `weight_format`.
    pub fn new(
        name: impl Into<String>,
        labels: Vec<String>,
        weights: Vec<Vec<FixedPoint>>,
        biases: Vec<FixedPoint>,
        weight_format: FixedFormat,
    ) -> Result<Self, CircuitError> {
        let name = name.into();
        let n = labels.len();
        let bad = |what: String| CircuitError::BadTile {
            tile: name.clone(),
            what,
        };
        if weight_format.frac_bits != WEIGHT_FRAC_BITS || !weight_format.signed {
            return Err(bad(format!("weight format {weight_format} must be s[x][{WEIGHT_FRAC_BITS}]")));
        }
        if weights.len() != n || biases.len() != n {
            return Err(bad(format!(
                "{} labels, {} weight rows, {} biases",
                n,
                weights.len(),
                biases.len()
            )));
        }
        let placeholder = Lfsr32::new(0).expect("zero seed is legal");
        let one = FixedPoint::from_int(1, I0_FORMAT)?;
        let mut pbits = Vec::with_capacity(n);
        for (i, (row, bias)) in weights.into_iter().zip(biases).enumerate() {
            if row.len() != n {
                return Err(bad(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if row[i].raw() != 0 {
                return Err(bad(format!("self-weight of p-bit {i} is {}", row[i])));
            }
            let row = row
                .into_iter()
                .map(|w| check_on_grid(w, weight_format))
                .collect::<Result<Vec<_>, _>>()?;
            let bias = check_on_grid(bias, weight_format)?;
            pbits.push(WeightedPBit::new(row, bias, one, placeholder.clone()));
        }
        Ok(Self {
            name,
            labels,
            weight_format,
            outputs: vec![false; n],
            update_order: (0..n).collect(),
            pbits,
            position: 0,
            pending: 0,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rename(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weight_format(&self) -> FixedFormat {
        self.weight_format
    }

    pub fn len(&self) -> usize {
        self.pbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pbits.is_empty()
    }

    pub fn pbits(&self) -> &[WeightedPBit] {
        &self.pbits
    }

    pub fn pbit_mut(&mut self, index: usize) -> Option<&mut WeightedPBit> {
        self.pbits.get_mut(index)
    }

    pub fn outputs(&self) -> &[bool] {
        &self.outputs
    }

    pub fn update_order(&self) -> &[usize] {
        &self.update_order
    }

    pub fn set_update_order(&mut self, order: Vec<usize>) -> Result<(), CircuitError> {
        let mut seen = vec![false; self.len()];
        for &i in &order {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(CircuitError::BadTile {
                    tile: self.name.clone(),
                    what: format!("update order {order:?} is not a permutation"),
                });
            }
        }
        if order.len() != self.len() {
            return Err(CircuitError::BadTile {
                tile: self.name.clone(),
                what: format!("update order {order:?} is not a permutation"),
            });
        }
        self.update_order = order;
        Ok(())
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Cycles for one pass of the sequencer over every p-bit.
    pub fn sweep_cycles(&self) -> u64 {
        self.len() as u64 * SLOT_CYCLES
    }

    pub fn activity(&self) -> TileActivity {
        if self.is_empty() {
            return TileActivity::Idle;
        }
        let slot = (self.position / SLOT_CYCLES) as usize;
        let pbit = self.update_order[slot];
        match self.position % SLOT_CYCLES {
            0 => TileActivity::Compute(pbit),
            1 => TileActivity::Latch(pbit),
            _ => TileActivity::Gap(pbit),
        }
    }

    /// Advances the sequencer one cycle. Returns the p-bit latched, if any.
    fn tick(&mut self, table: &ActivationTable, order_rng: Option<&mut ChaCha8Rng>) -> Option<usize> {
        if self.is_empty() {
            return None;
        }
        if self.position == 0 {
            if let Some(rng) = order_rng {
                self.update_order.shuffle(rng);
            }
        }
        let activity = self.activity();
        let latched = match activity {
            TileActivity::Compute(i) => {
                self.pending = self.pbits[i].compute_activation(table, &self.outputs);
                None
            }
            TileActivity::Latch(i) => {
                self.outputs[i] = self.pbits[i].latch(self.pending);
                Some(i)
            }
            _ => None,
        };
        for (k, p) in self.pbits.iter_mut().enumerate() {
            if latched != Some(k) {
                p.idle_tick();
            }
        }
        self.position = (self.position + 1) % self.sweep_cycles();
        latched
    }

    fn reset(&mut self) {
        self.position = 0;
        self.pending = 0;
        self.outputs.iter_mut().for_each(|m| *m = false);
        self.pbits.iter_mut().for_each(|p| p.set_output(false));
    }
}

fn check_on_grid(value: FixedPoint, format: FixedFormat) -> Result<FixedPoint, CircuitError> {
    let converted = value.convert(format);
    if converted != value {
        return Err(FixedError::NotRepresentable {
            value: value.to_string(),
            format,
        }
        .into());
    }
    Ok(converted)
}

/// A set of tiles on one clock, joined by directed links.
#[derive(Debug, Clone)]
pub struct Circuit {
    tiles: Vec<Tile>,
    links: Vec<DirectedLink>,
    i0: FixedPoint,
    clock: u64,
    terminals: IndexMap<String, Vec<PbitRef>>,
    offsets: Vec<usize>,
    update_counts: Vec<u64>,
    randomize_order: bool,
    order_rng: ChaCha8Rng,
    table: &'static ActivationTable,
}

impl Circuit {
    pub fn new(i0: FixedPoint) -> Result<Self, CircuitError> {
        Ok(Self {
            tiles: Vec::new(),
            links: Vec::new(),
            i0: check_i0(i0)?,
            clock: 0,
            terminals: IndexMap::new(),
            offsets: vec![0],
            update_counts: Vec::new(),
            randomize_order: false,
            order_rng: ChaCha8Rng::seed_from_u64(0),
            table: ActivationTable::shared(),
        })
    }

    pub fn add_tile(&mut self, mut tile: Tile) -> usize {
        for p in &mut tile.pbits {
            p.i0 = self.i0;
        }
        let total = self.pbit_count() + tile.len();
        self.offsets.push(total);
        self.update_counts.resize(total, 0);
        self.tiles.push(tile);
        self.reset(0);
        self.tiles.len() - 1
    }

    pub fn add_link(&mut self, link: DirectedLink) -> Result<(), CircuitError> {
        self.check_ref(link.source)?;
        self.check_ref(link.dest)?;
        if link.source.tile == link.dest.tile {
            return Err(CircuitError::SameTileLink(link.source, link.dest));
        }
        if self.links.iter().any(|l| l.dest == link.dest) {
            return Err(CircuitError::DuplicateLinkDest(link.dest));
        }
        let dest = &mut self.tiles[link.dest.tile].pbits[link.dest.pbit];
        match link.mode {
            LinkMode::ClampFollow => dest.set_clamp(ClampValue::Zero),
            LinkMode::Weighted(strength) => {
                let grid = FixedFormat::signed(strength.format().int_bits, WEIGHT_FRAC_BITS);
                let strength = check_on_grid(strength, grid)?;
                dest.coupling = Some(Coupling {
                    strength,
                    input: false,
                });
            }
        }
        self.links.push(link);
        Ok(())
    }

    pub fn add_terminal(&mut self, name: impl Into<String>, bits: Vec<PbitRef>) -> Result<(), CircuitError> {
        for &b in &bits {
            self.check_ref(b)?;
        }
        self.terminals.insert(name.into(), bits);
        Ok(())
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn tile_mut(&mut self, index: usize) -> Option<&mut Tile> {
        self.tiles.get_mut(index)
    }

    pub fn links(&self) -> &[DirectedLink] {
        &self.links
    }

    pub fn terminals(&self) -> &IndexMap<String, Vec<PbitRef>> {
        &self.terminals
    }

    pub fn i0(&self) -> FixedPoint {
        self.i0
    }

    pub fn set_i0(&mut self, i0: FixedPoint) -> Result<(), CircuitError> {
        self.i0 = check_i0(i0)?;
        for p in self.tiles.iter_mut().flat_map(|t| t.pbits.iter_mut()) {
            p.i0 = self.i0;
        }
        Ok(())
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn pbit_count(&self) -> usize {
        *self.offsets.last().expect("offsets start with 0")
    }

    pub fn global_index(&self, r: PbitRef) -> usize {
        self.offsets[r.tile] + r.pbit
    }

    pub fn pbit_ref(&self, global: usize) -> Option<PbitRef> {
        let tile = self.offsets.partition_point(|&o| o <= global).checked_sub(1)?;
        (tile < self.tiles.len()).then(|| PbitRef::new(tile, global - self.offsets[tile]))
    }

    pub fn pbit(&self, r: PbitRef) -> Result<&WeightedPBit, CircuitError> {
        self.check_ref(r)?;
        Ok(&self.tiles[r.tile].pbits[r.pbit])
    }

    /// Updates completed by each p-bit since the last reset, in global order.
    pub fn update_counts(&self) -> &[u64] {
        &self.update_counts
    }

    pub fn randomized_order(&self) -> bool {
        self.randomize_order
    }

    /// Reshuffle each tile's update order at the start of every tile sweep.
    pub fn set_randomized_order(&mut self, on: bool) {
        self.randomize_order = on;
    }

    fn check_ref(&self, r: PbitRef) -> Result<(), CircuitError> {
        match self.tiles.get(r.tile) {
            Some(t) if r.pbit < t.len() => Ok(()),
            _ => Err(CircuitError::InvalidRef {
                tile: r.tile,
                pbit: r.pbit,
            }),
        }
    }

    /// Returns the circuit to clock 0 with all outputs low, and assigns every
    /// p-bit a distinct LFSR seed derived from `master_seed`. Clamps persist.
    pub fn reset(&mut self, master_seed: u64) {
        let seeds = derive_seeds(master_seed, self.pbit_count());
        let mut seeds = seeds.into_iter();
        for tile in &mut self.tiles {
            tile.reset();
            for p in &mut tile.pbits {
                let seed = seeds.next().expect("one seed per p-bit");
                p.reseed(Lfsr32::new(seed).expect("derived seeds avoid lock-up"));
                if let Some(c) = p.coupling.as_mut() {
                    c.input = false;
                }
            }
        }
        self.clock = 0;
        self.update_counts.iter_mut().for_each(|c| *c = 0);
        self.order_rng = ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ 0x5EC0_E4CE));
        self.propagate_links();
    }

    pub fn set_clamp(&mut self, r: PbitRef, value: ClampValue) -> Result<(), CircuitError> {
        self.check_ref(r)?;
        self.tiles[r.tile].pbits[r.pbit].set_clamp(value);
        Ok(())
    }

    /// Clamps a terminal group to `value`, bit 0 of the value on the group's
    /// first p-bit.
    pub fn clamp_terminal(&mut self, name: &str, value: i128) -> Result<(), CircuitError> {
        let bits = self
            .terminals
            .get(name)
            .ok_or_else(|| CircuitError::UnknownTerminal(name.to_string()))?
            .clone();
        if value < 0 || (bits.len() < 127 && value >> bits.len() != 0) {
            return Err(CircuitError::ValueOutOfRange {
                name: name.to_string(),
                value,
                width: bits.len(),
            });
        }
        for (k, r) in bits.into_iter().enumerate() {
            self.set_clamp(r, ClampValue::from_bit((value >> k) & 1 == 1))?;
        }
        Ok(())
    }

    pub fn float_terminal(&mut self, name: &str) -> Result<(), CircuitError> {
        let bits = self
            .terminals
            .get(name)
            .ok_or_else(|| CircuitError::UnknownTerminal(name.to_string()))?
            .clone();
        for r in bits {
            self.set_clamp(r, ClampValue::Float)?;
        }
        Ok(())
    }

    pub fn float_all(&mut self) {
        let linked: Vec<PbitRef> = self
            .links
            .iter()
            .filter(|l| l.mode == LinkMode::ClampFollow)
            .map(|l| l.dest)
            .collect();
        for (t, tile) in self.tiles.iter_mut().enumerate() {
            for (i, p) in tile.pbits.iter_mut().enumerate() {
                if !linked.contains(&PbitRef::new(t, i)) {
                    p.set_clamp(ClampValue::Float);
                }
            }
        }
    }

    /// What each tile's sequencer does on the next cycle.
    pub fn activity(&self) -> Vec<TileActivity> {
        self.tiles.iter().map(Tile::activity).collect()
    }

    /// Advances the global clock by one cycle.
    pub fn step_clock(&mut self) {
        let rng = &mut self.order_rng;
        let randomize = self.randomize_order;
        for (t, tile) in self.tiles.iter_mut().enumerate() {
            let rng = if randomize { Some(&mut *rng) } else { None };
            if let Some(i) = tile.tick(self.table, rng) {
                self.update_counts[self.offsets[t] + i] += 1;
            }
        }
        self.propagate_links();
        self.clock += 1;
    }

    fn propagate_links(&mut self) {
        for k in 0..self.links.len() {
            let link = self.links[k];
            let value = self.tiles[link.source.tile].outputs[link.source.pbit];
            let dest = &mut self.tiles[link.dest.tile].pbits[link.dest.pbit];
            match link.mode {
                LinkMode::ClampFollow => dest.set_clamp(ClampValue::from_bit(value)),
                LinkMode::Weighted(_) => {
                    if let Some(c) = dest.coupling.as_mut() {
                        c.input = value;
                    }
                }
            }
        }
    }

    /// Clock cycles in one full sweep: the slowest tile's sequencer period.
    pub fn sweep_cycles(&self) -> u64 {
        self.tiles.iter().map(Tile::sweep_cycles).max().unwrap_or(0)
    }

    /// Runs one sweep and returns the latched outputs in global order.
    pub fn sweep(&mut self) -> Vec<bool> {
        for _ in 0..self.sweep_cycles() {
            self.step_clock();
        }
        self.state()
    }

    pub fn state(&self) -> Vec<bool> {
        self.tiles.iter().flat_map(|t| t.outputs.iter().copied()).collect()
    }

    fn write_state(&self, words: &mut [u64]) {
        words.iter_mut().for_each(|w| *w = 0);
        let mut g = 0;
        for tile in &self.tiles {
            for &m in &tile.outputs {
                if m {
                    words[g / 64] |= 1 << (g % 64);
                }
                g += 1;
            }
        }
    }

    /// Runs `n_sweeps` sweeps, recording one sample after each.
    pub fn sample(&mut self, n_sweeps: usize) -> SampleLog {
        let mut log = SampleLog::new(self.pbit_count());
        for (name, bits) in &self.terminals {
            let globals = bits.iter().map(|&r| self.global_index(r)).collect();
            log.define_group(name.clone(), globals)
                .expect("terminal refs are validated on insertion");
        }
        log.reserve(n_sweeps);
        let mut words = vec![0u64; log.words_per_sample()];
        let cycles = self.sweep_cycles();
        for _ in 0..n_sweeps {
            for _ in 0..cycles {
                self.step_clock();
            }
            self.write_state(&mut words);
            log.push_words(&words);
        }
        log
    }

    /// Finds a p-bit by `tile_name.label`, or by bare label when unique.
    pub fn find_pbit(&self, name: &str) -> Option<PbitRef> {
        if let Some((tile_name, label)) = name.rsplit_once('.') {
            for (t, tile) in self.tiles.iter().enumerate() {
                if tile.name == tile_name {
                    return tile.label_index(label).map(|i| PbitRef::new(t, i));
                }
            }
            return None;
        }
        let mut found = None;
        for (t, tile) in self.tiles.iter().enumerate() {
            if let Some(i) = tile.label_index(name) {
                if found.is_some() {
                    return None;
                }
                found = Some(PbitRef::new(t, i));
            }
        }
        found
    }
}

fn check_i0(i0: FixedPoint) -> Result<FixedPoint, CircuitError> {
    check_on_grid(i0, I0_FORMAT)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: i64) -> FixedPoint {
        FixedPoint::from_int(v, FixedFormat::signed(3, 2)).unwrap()
    }

    fn and_tile() -> Tile {
        let j = [[0, -2, 4], [-2, 0, 4], [4, 4, 0]];
        Tile::new(
            "and",
            vec!["A".into(), "B".into(), "C".into()],
            j.iter().map(|r| r.iter().map(|&v| w(v)).collect()).collect(),
            vec![w(0), w(0), w(-6)],
            FixedFormat::signed(3, 2),
        )
        .unwrap()
    }

    fn one() -> FixedPoint {
        FixedPoint::from_int(1, I0_FORMAT).unwrap()
    }

    #[test]
    fn and_tile_updates_in_order_within_nine_cycles() {
        let mut c = Circuit::new(one()).unwrap();
        c.add_tile(and_tile());
        let mut latched = Vec::new();
        for _ in 0..9 {
            if let [TileActivity::Latch(i)] = c.activity()[..] {
                latched.push(i);
            }
            c.step_clock();
        }
        assert_eq!(latched, vec![0, 1, 2]);
        assert_eq!(c.update_counts(), &[1, 1, 1]);
        assert_eq!(c.sweep_cycles(), 9);
    }

    #[test]
    fn empty_circuit_sweeps_nothing() {
        let mut c = Circuit::new(one()).unwrap();
        assert_eq!(c.sweep_cycles(), 0);
        assert!(c.sweep().is_empty());
        assert_eq!(c.clock(), 0);
        let log = c.sample(3);
        assert_eq!(log.len(), 3);
        assert_eq!(log.width(), 0);
    }

    #[test]
    fn tile_validation() {
        let j = vec![vec![w(1)]];
        assert!(Tile::new("t", vec!["x".into()], j, vec![w(0)], FixedFormat::signed(3, 2)).is_err());
        let j = vec![vec![w(0)]];
        assert!(Tile::new("t", vec!["x".into()], j.clone(), vec![], FixedFormat::signed(3, 2)).is_err());
        assert!(Tile::new("t", vec!["x".into()], j, vec![w(0)], FixedFormat::signed(3, 4)).is_err());
        let mut t = and_tile();
        assert!(t.set_update_order(vec![0, 0, 1]).is_err());
        assert!(t.set_update_order(vec![0, 1]).is_err());
        assert!(t.set_update_order(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn links_must_cross_tiles() {
        let mut c = Circuit::new(one()).unwrap();
        c.add_tile(and_tile());
        c.add_tile(and_tile());
        let same = DirectedLink {
            source: PbitRef::new(0, 2),
            dest: PbitRef::new(0, 0),
            mode: LinkMode::ClampFollow,
        };
        assert!(matches!(c.add_link(same), Err(CircuitError::SameTileLink(..))));
        let bad = DirectedLink {
            source: PbitRef::new(0, 7),
            dest: PbitRef::new(1, 0),
            mode: LinkMode::ClampFollow,
        };
        assert!(matches!(c.add_link(bad), Err(CircuitError::InvalidRef { .. })));
        let ok = DirectedLink {
            source: PbitRef::new(0, 2),
            dest: PbitRef::new(1, 0),
            mode: LinkMode::ClampFollow,
        };
        c.add_link(ok).unwrap();
        assert!(matches!(c.add_link(ok), Err(CircuitError::DuplicateLinkDest(_))));
    }

    #[test]
    fn clamp_follow_tracks_source() {
        let mut c = Circuit::new(one()).unwrap();
        c.add_tile(and_tile());
        c.add_tile(and_tile());
        c.add_link(DirectedLink {
            source: PbitRef::new(0, 0),
            dest: PbitRef::new(1, 0),
            mode: LinkMode::ClampFollow,
        })
        .unwrap();
        // the destination sees a new source value one sweep later
        c.set_clamp(PbitRef::new(0, 0), ClampValue::One).unwrap();
        c.sweep();
        for _ in 0..20 {
            c.sweep();
            assert!(c.state()[3]);
        }
        c.set_clamp(PbitRef::new(0, 0), ClampValue::Zero).unwrap();
        c.sweep();
        for _ in 0..20 {
            c.sweep();
            assert!(!c.state()[3]);
        }
    }

    #[test]
    fn global_indexing() {
        let mut c = Circuit::new(one()).unwrap();
        c.add_tile(and_tile());
        c.add_tile(and_tile());
        assert_eq!(c.pbit_count(), 6);
        assert_eq!(c.global_index(PbitRef::new(1, 2)), 5);
        assert_eq!(c.pbit_ref(4), Some(PbitRef::new(1, 1)));
        assert_eq!(c.pbit_ref(6), None);
        assert_eq!(c.find_pbit("and.C"), Some(PbitRef::new(0, 2)));
        assert_eq!(c.find_pbit("C"), None);
    }

    #[test]
    fn clamp_terminal_checks_width() {
        let mut c = Circuit::new(one()).unwrap();
        c.add_tile(and_tile());
        c.add_terminal("X", vec![PbitRef::new(0, 0), PbitRef::new(0, 1)]).unwrap();
        c.clamp_terminal("X", 2).unwrap();
        assert_eq!(c.pbit(PbitRef::new(0, 0)).unwrap().clamp_value(), ClampValue::Zero);
        assert_eq!(c.pbit(PbitRef::new(0, 1)).unwrap().clamp_value(), ClampValue::One);
        assert!(c.clamp_terminal("X", 4).is_err());
        assert!(c.clamp_terminal("X", -1).is_err());
        assert!(matches!(c.clamp_terminal("Y", 0), Err(CircuitError::UnknownTerminal(_))));
    }
}
