//! Canonical p-circuits: AND gate, 5- and 14-p-bit full adders, ripple carry
//! adders and the subset-sum solver.
//!
//! Gates are written in the bipolar convention (`m ∈ {-1, +1}`) and converted
//! to the binary convention (`m ∈ {0, 1}`) the hardware uses with
//! `J_bin = 2 J` and `h_bin = h - J·1`.

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, DirectedLink, LinkMode, PbitRef, Tile, I0_FORMAT};
use crate::fixedpoint::{FixedError, FixedFormat, FixedPoint};
use crate::pbit::{ClampValue, WEIGHT_FRAC_BITS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LibraryError {
    #[error("gate matrix is not square with one bias per p-bit")]
    Dimensions,
    #[error("J is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("J has a nonzero diagonal entry at {0}")]
    NonZeroDiagonal(usize),
    #[error("gate is missing terminal {0:?}")]
    MissingTerminal(String),
    #[error("adder needs at least one bit")]
    ZeroWidth,
    #[error("set {0:?} is not of the form {{0}} or {{0, 2^k}} within the input width")]
    UnencodableSet(Vec<u64>),
    #[error("need at least two sets, got {0}")]
    TooFewSets(usize),
    #[error("target {target} needs more than {bits} bits")]
    TargetTooWide { target: u64, bits: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Fixed(#[from] FixedError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// States `m ∈ {-1, +1}`.
    Bipolar,
    /// States `m ∈ {0, 1}`.
    Binary,
}

/// A reciprocal p-circuit: symmetric zero-diagonal `J`, bias `h`, labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateSpec {
    pub names: Vec<String>,
    pub j: Vec<Vec<FixedPoint>>,
    pub h: Vec<FixedPoint>,
    pub convention: Convention,
}

impl GateSpec {
    /// Builds a gate from values on the quarter grid, given as raw `s[x][2]`
    /// mantissas; the smallest sufficient format is chosen.
    pub fn from_raw(
        names: Vec<String>,
        j: Vec<Vec<i64>>,
        h: Vec<i64>,
        convention: Convention,
    ) -> Result<Self, LibraryError> {
        let n = names.len();
        if j.len() != n || h.len() != n || j.iter().any(|row| row.len() != n) {
            return Err(LibraryError::Dimensions);
        }
        let format = FixedFormat::smallest_signed(
            WEIGHT_FRAC_BITS,
            j.iter().flatten().chain(h.iter()).copied(),
        );
        let fx = |raw: i64| FixedPoint::from_raw(raw, format);
        let gate = Self {
            names,
            j: j.into_iter()
                .map(|row| row.into_iter().map(fx).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?,
            h: h.into_iter().map(fx).collect::<Result<Vec<_>, _>>()?,
            convention,
        };
        gate.validate()?;
        Ok(gate)
    }

    /// Same as [`GateSpec::from_raw`] with integer-valued entries.
    pub fn from_ints(
        names: &[&str],
        j: &[&[i64]],
        h: &[i64],
        convention: Convention,
    ) -> Result<Self, LibraryError> {
        let scale = 1i64 << WEIGHT_FRAC_BITS;
        Self::from_raw(
            names.iter().map(|s| s.to_string()).collect(),
            j.iter().map(|row| row.iter().map(|v| v * scale).collect()).collect(),
            h.iter().map(|v| v * scale).collect(),
            convention,
        )
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn validate(&self) -> Result<(), LibraryError> {
        let n = self.len();
        if self.j.len() != n || self.h.len() != n || self.j.iter().any(|r| r.len() != n) {
            return Err(LibraryError::Dimensions);
        }
        for i in 0..n {
            if self.j[i][i].raw() != 0 {
                return Err(LibraryError::NonZeroDiagonal(i));
            }
            for k in i + 1..n {
                if self.j[i][k] != self.j[k][i] {
                    return Err(LibraryError::Asymmetric(i, k));
                }
            }
        }
        Ok(())
    }

    pub fn index_of(&self, name: &str) -> Result<usize, LibraryError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| LibraryError::MissingTerminal(name.to_string()))
    }

    fn raw_j(&self) -> Vec<Vec<i64>> {
        self.j
            .iter()
            .map(|r| r.iter().map(|v| v.convert(quarter_grid(v.format())).raw()).collect())
            .collect()
    }

    fn raw_h(&self) -> Vec<i64> {
        self.h.iter().map(|v| v.convert(quarter_grid(v.format())).raw()).collect()
    }

    /// `J_bin = 2 J`, `h_bin = h - J·1`. Binary gates are returned unchanged.
    pub fn to_binary(&self) -> Result<GateSpec, LibraryError> {
        if self.convention == Convention::Binary {
            return Ok(self.clone());
        }
        let j = self.raw_j();
        let h = self.raw_h();
        let jb = j.iter().map(|r| r.iter().map(|v| 2 * v).collect()).collect();
        let hb = h
            .iter()
            .zip(&j)
            .map(|(hi, row)| hi - row.iter().sum::<i64>())
            .collect();
        GateSpec::from_raw(self.names.clone(), jb, hb, Convention::Binary)
    }

    /// Format holding every weight and bias of the binary form.
    pub fn weight_format(&self) -> FixedFormat {
        FixedFormat::smallest_signed(
            WEIGHT_FRAC_BITS,
            self.raw_j().into_iter().flatten().chain(self.raw_h()),
        )
    }

    /// One tile realising this gate in the binary convention.
    pub fn tile(&self, name: impl Into<String>) -> Result<Tile, LibraryError> {
        let bin = self.to_binary()?;
        let format = bin.weight_format();
        let tile = Tile::new(
            name,
            bin.names.clone(),
            bin.j.iter().map(|r| r.iter().map(|v| v.convert(format)).collect()).collect(),
            bin.h.iter().map(|v| v.convert(format)).collect(),
            format,
        )?;
        Ok(tile)
    }

    /// A single-tile circuit with one terminal per p-bit, named after it.
    pub fn circuit(&self, i0: FixedPoint) -> Result<Circuit, LibraryError> {
        let mut c = Circuit::new(i0)?;
        let t = c.add_tile(self.tile("gate")?);
        for (i, name) in self.names.iter().enumerate() {
            c.add_terminal(name.clone(), vec![PbitRef::new(t, i)])?;
        }
        Ok(c)
    }

    /// Recovers the binary gate realised by a tile. Fails if the tile's
    /// weights are not symmetric.
    pub fn from_tile(tile: &Tile) -> Result<GateSpec, LibraryError> {
        let gate = GateSpec {
            names: tile.labels().to_vec(),
            j: tile.pbits().iter().map(|p| p.weights.clone()).collect(),
            h: tile.pbits().iter().map(|p| p.bias).collect(),
            convention: Convention::Binary,
        };
        gate.validate()?;
        Ok(gate)
    }
}

fn quarter_grid(format: FixedFormat) -> FixedFormat {
    FixedFormat::signed(format.int_bits, WEIGHT_FRAC_BITS)
}

pub fn default_i0() -> FixedPoint {
    FixedPoint::from_int(1, I0_FORMAT).expect("1 fits the I0 format")
}

/// AND gate `C = A ∧ B` (bipolar).
pub fn and_gate() -> GateSpec {
    GateSpec::from_ints(
        &["A", "B", "C"],
        &[&[0, -1, 2], &[-1, 0, 2], &[2, 2, 0]],
        &[1, 1, -2],
        Convention::Bipolar,
    )
    .expect("AND gate is well formed")
}

/// Five-p-bit full adder with zero bias (bipolar), labels `Cin B A S Cout`.
pub fn full_adder_5() -> GateSpec {
    GateSpec::from_ints(
        &["Cin", "B", "A", "S", "Cout"],
        &[
            &[0, -1, -1, 1, 2],
            &[-1, 0, -1, 1, 2],
            &[-1, -1, 0, 1, 2],
            &[1, 1, 1, 0, -2],
            &[2, 2, 2, -2, 0],
        ],
        &[0, 0, 0, 0, 0],
        Convention::Bipolar,
    )
    .expect("full adder is well formed")
}

/// Literal of a composed gate: a p-bit index, optionally inverted.
#[derive(Debug, Clone, Copy)]
struct Lit(usize, bool);

impl Lit {
    fn pos(i: usize) -> Self {
        Lit(i, false)
    }

    fn neg(i: usize) -> Self {
        Lit(i, true)
    }

    fn sign(self) -> i64 {
        if self.1 {
            -1
        } else {
            1
        }
    }
}

/// Sums bipolar gate energies over shared p-bits.
struct Composer {
    names: Vec<String>,
    j: Vec<Vec<i64>>,
    h: Vec<i64>,
}

impl Composer {
    fn new(names: &[&str]) -> Self {
        let n = names.len();
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            j: vec![vec![0; n]; n],
            h: vec![0; n],
        }
    }

    fn couple(&mut self, a: Lit, b: Lit, w: i64) {
        let w = w * a.sign() * b.sign();
        self.j[a.0][b.0] += w;
        self.j[b.0][a.0] += w;
    }

    fn bias(&mut self, a: Lit, w: i64) {
        self.h[a.0] += w * a.sign();
    }

    /// `out = a ∧ b` via the three-p-bit AND energy.
    fn and(&mut self, a: Lit, b: Lit, out: Lit) {
        self.couple(a, b, -1);
        self.couple(a, out, 2);
        self.couple(b, out, 2);
        self.bias(a, 1);
        self.bias(b, 1);
        self.bias(out, -2);
    }

    /// `out = a ∨ b`: the AND energy with every spin inverted.
    fn or(&mut self, a: Lit, b: Lit, out: Lit) {
        self.and(Lit(a.0, !a.1), Lit(b.0, !b.1), Lit(out.0, !out.1));
    }

    fn finish(self) -> GateSpec {
        let names: Vec<&str> = self.names.iter().map(String::as_str).collect();
        let j: Vec<&[i64]> = self.j.iter().map(Vec::as_slice).collect();
        GateSpec::from_ints(&names, &j, &self.h, Convention::Bipolar)
            .expect("composed gates are symmetric")
    }
}

/// Fourteen-p-bit full adder built from AND/OR sub-gates.
///
/// Sum path: `t = A ⊕ B` and `S = t ⊕ Cin`, each XOR as
/// `(x ∨ y) ∧ ¬(x ∧ y)` with two auxiliary p-bits. Carry path: the majority
/// `(A∧B) ∨ (A∧Cin) ∨ (B∧Cin)` through four auxiliaries. Every auxiliary is
/// a function of the terminals, so the eight ground states are exactly the
/// truth table rows.
pub fn full_adder_14() -> GateSpec {
    const NAMES: [&str; 14] = [
        "Cin", "B", "A", "S", "Cout", "ab", "a_or_b", "t", "tc", "t_or_c", "maj_ab", "maj_ac",
        "maj_bc", "maj_or",
    ];
    let [cin, b, a, s, cout, ab, a_or_b, t, tc, t_or_c, mab, mac, mbc, mor] =
        std::array::from_fn(|i| i);
    let mut g = Composer::new(&NAMES);
    g.and(Lit::pos(a), Lit::pos(b), Lit::pos(ab));
    g.or(Lit::pos(a), Lit::pos(b), Lit::pos(a_or_b));
    g.and(Lit::pos(a_or_b), Lit::neg(ab), Lit::pos(t));
    g.and(Lit::pos(t), Lit::pos(cin), Lit::pos(tc));
    g.or(Lit::pos(t), Lit::pos(cin), Lit::pos(t_or_c));
    g.and(Lit::pos(t_or_c), Lit::neg(tc), Lit::pos(s));
    g.and(Lit::pos(a), Lit::pos(b), Lit::pos(mab));
    g.and(Lit::pos(a), Lit::pos(cin), Lit::pos(mac));
    g.and(Lit::pos(b), Lit::pos(cin), Lit::pos(mbc));
    g.or(Lit::pos(mab), Lit::pos(mac), Lit::pos(mor));
    g.or(Lit::pos(mor), Lit::pos(mbc), Lit::pos(cout));
    g.finish()
}

/// Terminal positions of a full adder gate.
#[derive(Debug, Clone, Copy)]
struct FaPorts {
    cin: usize,
    a: usize,
    b: usize,
    s: usize,
    cout: usize,
}

impl FaPorts {
    fn of(fa: &GateSpec) -> Result<Self, LibraryError> {
        Ok(Self {
            cin: fa.index_of("Cin")?,
            a: fa.index_of("A")?,
            b: fa.index_of("B")?,
            s: fa.index_of("S")?,
            cout: fa.index_of("Cout")?,
        })
    }
}

/// One row of chained full adders inside a circuit.
struct AdderRow {
    tiles: Vec<usize>,
    ports: FaPorts,
}

impl AdderRow {
    /// Adds `width` adder tiles with carry `Cout_k -> Cin_{k+1}` directed
    /// links and the first carry-in clamped low.
    fn build(
        c: &mut Circuit,
        fa: &GateSpec,
        width: usize,
        prefix: &str,
    ) -> Result<Self, LibraryError> {
        let ports = FaPorts::of(fa)?;
        let template = fa.tile("template")?;
        let mut tiles = Vec::with_capacity(width);
        for k in 0..width {
            let mut tile = template.clone();
            tile.rename(format!("{prefix}{k}"));
            tiles.push(c.add_tile(tile));
        }
        c.set_clamp(PbitRef::new(tiles[0], ports.cin), ClampValue::Zero)?;
        for k in 1..width {
            c.add_link(DirectedLink {
                source: PbitRef::new(tiles[k - 1], ports.cout),
                dest: PbitRef::new(tiles[k], ports.cin),
                mode: LinkMode::ClampFollow,
            })?;
        }
        Ok(Self { tiles, ports })
    }

    fn bits(&self, port: usize) -> Vec<PbitRef> {
        self.tiles.iter().map(|&t| PbitRef::new(t, port)).collect()
    }

    fn a_bits(&self) -> Vec<PbitRef> {
        self.bits(self.ports.a)
    }

    fn b_bits(&self) -> Vec<PbitRef> {
        self.bits(self.ports.b)
    }

    /// Sum bits plus the final carry-out as the MSB.
    fn sum_bits(&self) -> Vec<PbitRef> {
        let mut bits = self.bits(self.ports.s);
        bits.push(PbitRef::new(*self.tiles.last().expect("non-empty row"), self.ports.cout));
        bits
    }
}

/// N-bit ripple carry adder: one full-adder tile per bit, carries directed
/// from LSB to MSB. Terminals `A`, `B` (n bits), `S` (n + 1 bits) and the
/// carry-in `Cin`, clamped low.
pub fn build_rca(n_bits: usize, fa: &GateSpec, i0: FixedPoint) -> Result<Circuit, LibraryError> {
    if n_bits == 0 {
        return Err(LibraryError::ZeroWidth);
    }
    let mut c = Circuit::new(i0)?;
    let row = AdderRow::build(&mut c, fa, n_bits, "fa")?;
    c.add_terminal("A", row.a_bits())?;
    c.add_terminal("B", row.b_bits())?;
    c.add_terminal("S", row.sum_bits())?;
    c.add_terminal("Cin", vec![PbitRef::new(row.tiles[0], row.ports.cin)])?;
    Ok(c)
}

/// Subset-sum instance: pick one member of each set so the picks sum to
/// `target`. Sets are `{0}` or `{0, 2^k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SspInstance {
    pub target: u64,
    pub sets: Vec<Vec<u64>>,
    pub input_bits: usize,
}

impl SspInstance {
    /// Target 3584 over `{0,512}`, `{0,1024}`, `{0,2048}` with 15-bit inputs.
    pub fn reference() -> Self {
        Self {
            target: 3584,
            sets: vec![vec![0, 512], vec![0, 1024], vec![0, 2048]],
            input_bits: 15,
        }
    }

    /// Bit that floats for each set, `None` when every bit is clamped low.
    fn free_bits(&self) -> Result<Vec<Option<usize>>, LibraryError> {
        self.sets
            .iter()
            .map(|set| {
                let mut members: Vec<u64> = set.clone();
                members.sort_unstable();
                members.dedup();
                let unencodable = || LibraryError::UnencodableSet(set.clone());
                match members.as_slice() {
                    [0] => Ok(None),
                    [0, m] if m.is_power_of_two() && (m.trailing_zeros() as usize) < self.input_bits => {
                        Ok(Some(m.trailing_zeros() as usize))
                    }
                    _ => Err(unencodable()),
                }
            })
            .collect()
    }

    /// Names of the set terminals: `A`, `B`, `C`, ...
    pub fn set_names(&self) -> Vec<String> {
        (0..self.sets.len())
            .map(|i| ((b'A' + i as u8) as char).to_string())
            .collect()
    }

    /// Expression summing all set terminals, e.g. `A+B+C`.
    pub fn sum_expression(&self) -> String {
        self.set_names().join("+")
    }
}

/// Layered subset-sum solver.
///
/// Layer 1 adds sets A and B; each further layer adds the next set to the
/// previous layer's sum. The last layer's sum is clamped to the target. The
/// partial sums travel upward: each layer's `A` inputs drive the previous
/// layer's sum outputs through clamp-follow links, as do the carry chains
/// within a layer from LSB to MSB.
pub fn build_ssp(inst: &SspInstance, fa: &GateSpec, i0: FixedPoint) -> Result<Circuit, LibraryError> {
    let m = inst.sets.len();
    if m < 2 {
        return Err(LibraryError::TooFewSets(m));
    }
    if inst.input_bits == 0 {
        return Err(LibraryError::ZeroWidth);
    }
    let free = inst.free_bits()?;
    let w = inst.input_bits;
    let out_bits = w + m - 1;
    if out_bits < 64 && inst.target >> out_bits != 0 {
        return Err(LibraryError::TargetTooWide {
            target: inst.target,
            bits: out_bits,
        });
    }

    let mut c = Circuit::new(i0)?;
    let mut rows: Vec<AdderRow> = Vec::with_capacity(m - 1);
    for layer in 1..m {
        rows.push(AdderRow::build(&mut c, fa, w + layer - 1, &format!("l{layer}_fa"))?);
    }

    // upward links: layer L's A inputs drive layer L-1's sum outputs
    for l in 1..rows.len() {
        let sources = rows[l].a_bits();
        let dests = rows[l - 1].sum_bits();
        debug_assert_eq!(sources.len(), dests.len());
        for (source, dest) in sources.into_iter().zip(dests) {
            c.add_link(DirectedLink {
                source,
                dest,
                mode: LinkMode::ClampFollow,
            })?;
        }
    }

    let names = inst.set_names();
    for (set, name) in names.iter().enumerate() {
        let all_bits = if set == 0 {
            rows[0].a_bits()
        } else {
            rows[set - 1].b_bits()
        };
        for (k, &bit) in all_bits.iter().enumerate() {
            if free[set] != Some(k) {
                c.set_clamp(bit, ClampValue::Zero)?;
            }
        }
        c.add_terminal(name.clone(), all_bits[..w].to_vec())?;
    }
    for (l, row) in rows.iter().enumerate().skip(1) {
        c.add_terminal(format!("P{l}"), row.a_bits())?;
    }
    let sum = rows.last().expect("at least one layer").sum_bits();
    c.add_terminal("S", sum)?;
    c.clamp_terminal("S", inst.target as i128)?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(g: &GateSpec) -> (Vec<Vec<f64>>, Vec<f64>) {
        (
            g.j.iter().map(|r| r.iter().map(|v| v.to_f64()).collect()).collect(),
            g.h.iter().map(|v| v.to_f64()).collect(),
        )
    }

    #[test]
    fn and_gate_entries() {
        let g = and_gate();
        let (j, h) = ints(&g);
        assert_eq!(j[0][2], 2.0);
        assert_eq!(h[2], -2.0);
        assert!((0..3).all(|i| j[i][i] == 0.0));
        assert_eq!(g.names, ["A", "B", "C"]);
    }

    #[test]
    fn full_adder_entries() {
        let g = full_adder_5();
        let (j, h) = ints(&g);
        let (cin, s, cout) = (0, 3, 4);
        assert_eq!(j[cin][cout], 2.0);
        assert_eq!(j[s][cout], -2.0);
        for a in 0..5 {
            for b in 0..5 {
                assert_eq!(j[a][b], j[b][a]);
                assert!([-2.0, -1.0, 0.0, 1.0, 2.0].contains(&j[a][b]));
            }
        }
        assert!(h.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn binary_transform_of_and() {
        let b = and_gate().to_binary().unwrap();
        let (j, h) = ints(&b);
        assert_eq!(j, vec![vec![0.0, -2.0, 4.0], vec![-2.0, 0.0, 4.0], vec![4.0, 4.0, 0.0]]);
        assert_eq!(h, vec![0.0, 0.0, -6.0]);
        assert_eq!(b.weight_format(), FixedFormat::signed(3, 2));
    }

    #[test]
    fn binary_transform_of_zero_gate() {
        let z = GateSpec::from_ints(&["x", "y"], &[&[0, 0], &[0, 0]], &[0, 0], Convention::Bipolar)
            .unwrap();
        let b = z.to_binary().unwrap();
        assert!(b.j.iter().flatten().chain(&b.h).all(|v| v.raw() == 0));
    }

    #[test]
    fn rejects_malformed_gates() {
        assert_eq!(
            GateSpec::from_ints(&["x", "y"], &[&[0, 1], &[2, 0]], &[0, 0], Convention::Bipolar),
            Err(LibraryError::Asymmetric(0, 1))
        );
        assert_eq!(
            GateSpec::from_ints(&["x"], &[&[1]], &[0], Convention::Bipolar),
            Err(LibraryError::NonZeroDiagonal(0))
        );
        assert_eq!(
            GateSpec::from_ints(&["x"], &[&[0]], &[], Convention::Bipolar),
            Err(LibraryError::Dimensions)
        );
    }

    #[test]
    fn fa14_shape() {
        let g = full_adder_14();
        assert_eq!(g.len(), 14);
        assert_eq!(&g.names[..5], ["Cin", "B", "A", "S", "Cout"]);
        g.validate().unwrap();
        let t = g.tile("fa").unwrap();
        assert_eq!(t.sweep_cycles(), 42);
    }

    #[test]
    fn rca_structure() {
        let c = build_rca(1, &full_adder_5(), default_i0()).unwrap();
        assert_eq!(c.tiles().len(), 1);
        assert!(c.links().is_empty());
        assert_eq!(c.pbit(PbitRef::new(0, 0)).unwrap().clamp_value(), ClampValue::Zero);
        let c = build_rca(32, &full_adder_14(), default_i0()).unwrap();
        assert_eq!(c.tiles().len(), 32);
        assert_eq!(c.links().len(), 31);
        assert_eq!(c.terminals()["S"].len(), 33);
        assert_eq!(c.sweep_cycles(), 42);
        assert!(matches!(build_rca(0, &full_adder_5(), default_i0()), Err(LibraryError::ZeroWidth)));
        assert!(matches!(
            build_rca(2, &and_gate(), default_i0()),
            Err(LibraryError::MissingTerminal(_))
        ));
    }

    #[test]
    fn ssp_structure() {
        let c = build_ssp(&SspInstance::reference(), &full_adder_5(), default_i0()).unwrap();
        assert_eq!(c.tiles().len(), 31);
        assert_eq!(c.pbit_count(), 155);
        assert_eq!(c.sweep_cycles(), 15);
        assert_eq!(c.terminals()["S"].len(), 17);
        assert_eq!(c.terminals()["A"].len(), 15);
        assert_eq!(c.terminals()["P1"].len(), 16);
        // 14 + 15 carry links plus 16 upward links
        assert_eq!(c.links().len(), 14 + 15 + 16);
        let a = &c.terminals()["A"];
        for (k, &r) in a.iter().enumerate() {
            let expected = if k == 9 { ClampValue::Float } else { ClampValue::Zero };
            assert_eq!(c.pbit(r).unwrap().clamp_value(), expected, "A bit {k}");
        }
    }

    #[test]
    fn ssp_rejects_bad_instances() {
        let fa = full_adder_5();
        let mut inst = SspInstance::reference();
        inst.sets[1] = vec![0, 768];
        assert!(matches!(build_ssp(&inst, &fa, default_i0()), Err(LibraryError::UnencodableSet(_))));
        inst.sets[1] = vec![512, 1024];
        assert!(build_ssp(&inst, &fa, default_i0()).is_err());
        inst.sets[1] = vec![0, 1 << 15];
        assert!(build_ssp(&inst, &fa, default_i0()).is_err());
        let mut inst = SspInstance::reference();
        inst.sets.truncate(1);
        assert!(matches!(build_ssp(&inst, &fa, default_i0()), Err(LibraryError::TooFewSets(1))));
        let mut inst = SspInstance::reference();
        inst.target = 1 << 17;
        assert!(matches!(build_ssp(&inst, &fa, default_i0()), Err(LibraryError::TargetTooWide { .. })));
        let mut inst = SspInstance::reference();
        inst.sets[2] = vec![0];
        assert!(build_ssp(&inst, &fa, default_i0()).is_ok());
    }
}
