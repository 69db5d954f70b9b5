//! JSON netlists: tiles, links, clamps and terminals in a stable text form.
//!
//! Fixed-point values are written as exact decimal strings so that a netlist
//! survives a load/save cycle byte for byte. P-bits are addressed as
//! `tile.label`.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, DirectedLink, LinkMode, PbitRef, Tile, I0_FORMAT};
use crate::fixedpoint::{FixedError, FixedFormat, FixedPoint};
use crate::pbit::ClampValue;

pub const NETLIST_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("{path}: {what}")]
    Invalid { path: String, what: String },
    #[error("malformed netlist JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid(path: impl Into<String>, what: impl ToString) -> NetlistError {
    NetlistError::Invalid {
        path: path.into(),
        what: what.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Netlist {
    pub version: u32,
    pub i0: String,
    pub tiles: Vec<TileSpec>,
    #[serde(default)]
    pub links: Vec<LinkSpec>,
    #[serde(default)]
    pub clamps: Vec<ClampSpec>,
    #[serde(default)]
    pub terminals: IndexMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileSpec {
    pub name: String,
    pub format: String,
    pub labels: Vec<String>,
    pub weights: Vec<Vec<String>>,
    pub biases: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub update_order: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub source: String,
    pub dest: String,
    /// Absent for clamp-follow links, the coupling strength otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClampSpec {
    pub pbit: String,
    pub value: u8,
}

fn pbit_name(c: &Circuit, r: PbitRef) -> String {
    let tile = &c.tiles()[r.tile];
    format!("{}.{}", tile.name(), tile.labels()[r.pbit])
}

impl Netlist {
    /// Captures structure and current clamps. Link destinations are left out
    /// of `clamps` since their links drive them.
    pub fn from_circuit(c: &Circuit) -> Self {
        let tiles = c
            .tiles()
            .iter()
            .map(|t| TileSpec {
                name: t.name().to_string(),
                format: t.weight_format().to_string(),
                labels: t.labels().to_vec(),
                weights: t
                    .pbits()
                    .iter()
                    .map(|p| p.weights.iter().map(|w| w.to_string()).collect())
                    .collect(),
                biases: t.pbits().iter().map(|p| p.bias.to_string()).collect(),
                update_order: Some(t.update_order().to_vec()),
            })
            .collect();
        let links = c
            .links()
            .iter()
            .map(|l| LinkSpec {
                source: pbit_name(c, l.source),
                dest: pbit_name(c, l.dest),
                strength: match l.mode {
                    LinkMode::ClampFollow => None,
                    LinkMode::Weighted(s) => Some(s.to_string()),
                },
            })
            .collect();
        let mut clamps = Vec::new();
        for (t, tile) in c.tiles().iter().enumerate() {
            for (i, p) in tile.pbits().iter().enumerate() {
                let r = PbitRef::new(t, i);
                let driven = c
                    .links()
                    .iter()
                    .any(|l| l.dest == r && l.mode == LinkMode::ClampFollow);
                let value = match p.clamp_value() {
                    ClampValue::Float => continue,
                    ClampValue::Zero => 0,
                    ClampValue::One => 1,
                };
                if !driven {
                    clamps.push(ClampSpec {
                        pbit: pbit_name(c, r),
                        value,
                    });
                }
            }
        }
        let terminals = c
            .terminals()
            .iter()
            .map(|(name, bits)| (name.clone(), bits.iter().map(|&r| pbit_name(c, r)).collect()))
            .collect();
        Netlist {
            version: NETLIST_VERSION,
            i0: c.i0().to_string(),
            tiles,
            links,
            clamps,
            terminals,
        }
    }

    /// Builds the circuit, reporting the JSON path of the first bad field.
    pub fn build(&self) -> Result<Circuit, NetlistError> {
        if self.version != NETLIST_VERSION {
            return Err(invalid(
                "version",
                format!("unsupported version {}, expected {NETLIST_VERSION}", self.version),
            ));
        }
        let i0 = FixedPoint::parse_exact(&self.i0, I0_FORMAT).map_err(|e| invalid("i0", e))?;
        let mut circuit = Circuit::new(i0).map_err(|e| invalid("i0", e))?;
        for (t, spec) in self.tiles.iter().enumerate() {
            let path = format!("tiles[{t}]");
            if self.tiles[..t].iter().any(|o| o.name == spec.name) {
                return Err(invalid(format!("{path}.name"), format!("duplicate tile name {:?}", spec.name)));
            }
            if spec.name.contains('.') {
                return Err(invalid(format!("{path}.name"), "tile names may not contain '.'"));
            }
            let tile = build_tile(spec, &path)?;
            circuit.add_tile(tile);
        }
        let resolve = |path: String, name: &str, c: &Circuit| -> Result<PbitRef, NetlistError> {
            let (tile, label) = name
                .rsplit_once('.')
                .ok_or_else(|| invalid(&path, format!("{name:?} is not of the form tile.label")))?;
            let t = c
                .tiles()
                .iter()
                .position(|x| x.name() == tile)
                .ok_or_else(|| invalid(&path, format!("unknown tile {tile:?}")))?;
            let i = c.tiles()[t]
                .label_index(label)
                .ok_or_else(|| invalid(&path, format!("tile {tile:?} has no p-bit {label:?}")))?;
            Ok(PbitRef::new(t, i))
        };
        for (k, l) in self.links.iter().enumerate() {
            let path = format!("links[{k}]");
            let source = resolve(format!("{path}.source"), &l.source, &circuit)?;
            let dest = resolve(format!("{path}.dest"), &l.dest, &circuit)?;
            let mode = match &l.strength {
                None => LinkMode::ClampFollow,
                Some(s) => {
                    let fmt = circuit.tiles()[dest.tile].weight_format();
                    let v = parse_weight(s, fmt).map_err(|e| invalid(format!("{path}.strength"), e))?;
                    LinkMode::Weighted(v)
                }
            };
            circuit
                .add_link(DirectedLink { source, dest, mode })
                .map_err(|e| invalid(&path, e))?;
        }
        for (k, cl) in self.clamps.iter().enumerate() {
            let path = format!("clamps[{k}]");
            let r = resolve(format!("{path}.pbit"), &cl.pbit, &circuit)?;
            if circuit.links().iter().any(|l| l.dest == r && l.mode == LinkMode::ClampFollow) {
                return Err(invalid(&path, format!("{} is driven by a link", cl.pbit)));
            }
            let value = match cl.value {
                0 => ClampValue::Zero,
                1 => ClampValue::One,
                v => return Err(invalid(format!("{path}.value"), format!("clamp value {v} is not 0 or 1"))),
            };
            circuit.set_clamp(r, value).map_err(|e| invalid(&path, e))?;
        }
        for (name, bits) in &self.terminals {
            let path = format!("terminals.{name}");
            let refs = bits
                .iter()
                .enumerate()
                .map(|(k, b)| resolve(format!("{path}[{k}]"), b, &circuit))
                .collect::<Result<Vec<_>, _>>()?;
            circuit.add_terminal(name.clone(), refs).map_err(|e| invalid(&path, e))?;
        }
        circuit.reset(0);
        Ok(circuit)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("netlists always serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, NetlistError> {
        Ok(serde_json::from_str(text)?)
    }
}

fn parse_weight(text: &str, fmt: FixedFormat) -> Result<FixedPoint, FixedError> {
    FixedPoint::parse_exact(text, fmt)
}

fn build_tile(spec: &TileSpec, path: &str) -> Result<Tile, NetlistError> {
    let fmt: FixedFormat = spec
        .format
        .parse()
        .map_err(|e| invalid(format!("{path}.format"), e))?;
    let n = spec.labels.len();
    if spec.weights.len() != n {
        return Err(invalid(
            format!("{path}.weights"),
            format!("{} rows for {n} labels", spec.weights.len()),
        ));
    }
    if spec.biases.len() != n {
        return Err(invalid(
            format!("{path}.biases"),
            format!("{} entries for {n} labels", spec.biases.len()),
        ));
    }
    for (i, label) in spec.labels.iter().enumerate() {
        if label.is_empty() || spec.labels[..i].contains(label) {
            return Err(invalid(format!("{path}.labels[{i}]"), format!("bad or duplicate label {label:?}")));
        }
    }
    let mut weights = Vec::with_capacity(n);
    for (i, row) in spec.weights.iter().enumerate() {
        if row.len() != n {
            return Err(invalid(
                format!("{path}.weights[{i}]"),
                format!("{} entries, expected {n}", row.len()),
            ));
        }
        let parsed = row
            .iter()
            .enumerate()
            .map(|(k, w)| parse_weight(w, fmt).map_err(|e| invalid(format!("{path}.weights[{i}][{k}]"), e)))
            .collect::<Result<Vec<_>, _>>()?;
        weights.push(parsed);
    }
    for i in 0..n {
        for k in i + 1..n {
            if weights[i][k] != weights[k][i] {
                return Err(invalid(
                    format!("{path}.weights[{i}][{k}]"),
                    format!("{} differs from weights[{k}][{i}] = {}", weights[i][k], weights[k][i]),
                ));
            }
        }
    }
    let biases = spec
        .biases
        .iter()
        .enumerate()
        .map(|(i, b)| parse_weight(b, fmt).map_err(|e| invalid(format!("{path}.biases[{i}]"), e)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut tile = Tile::new(spec.name.clone(), spec.labels.clone(), weights, biases, fmt)
        .map_err(|e| invalid(path, e))?;
    match &spec.update_order {
        Some(order) => tile
            .set_update_order(order.clone())
            .map_err(|e: CircuitError| invalid(format!("{path}.update_order"), e))?,
        None => log::warn!("{path}: no update_order given, using index order"),
    }
    Ok(tile)
}

pub fn load_netlist(path: &Path) -> Result<Circuit, NetlistError> {
    let text = std::fs::read_to_string(path)?;
    Netlist::from_json(&text)?.build()
}

pub fn save_netlist(circuit: &Circuit, path: &Path) -> Result<(), NetlistError> {
    std::fs::write(path, Netlist::from_circuit(circuit).to_json())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::{and_gate, build_rca, default_i0, full_adder_5, SspInstance, build_ssp};

    #[test]
    fn round_trip_is_byte_identical() {
        let circuits = [
            and_gate().circuit(default_i0()).unwrap(),
            build_rca(4, &full_adder_5(), default_i0()).unwrap(),
            build_ssp(&SspInstance::reference(), &full_adder_5(), default_i0()).unwrap(),
        ];
        for c in circuits {
            let text = Netlist::from_circuit(&c).to_json();
            let rebuilt = Netlist::from_json(&text).unwrap().build().unwrap();
            assert_eq!(Netlist::from_circuit(&rebuilt).to_json(), text);
        }
    }

    #[test]
    fn errors_name_the_field() {
        let c = and_gate().circuit(default_i0()).unwrap();
        let mut n = Netlist::from_circuit(&c);
        n.tiles[0].weights[1][2] = "0.3".into();
        let err = n.build().unwrap_err().to_string();
        assert!(err.starts_with("tiles[0].weights[1][2]"), "{err}");

        let mut n = Netlist::from_circuit(&c);
        n.tiles[0].weights[0][1] = "2".into();
        let err = n.build().unwrap_err().to_string();
        assert!(err.starts_with("tiles[0].weights[0][1]"), "{err}");

        let mut n = Netlist::from_circuit(&c);
        n.terminals.insert("X".into(), vec!["nowhere.A".into()]);
        let err = n.build().unwrap_err().to_string();
        assert!(err.starts_with("terminals.X[0]"), "{err}");
    }

    #[test]
    fn off_grid_weight_rejected() {
        // 1.125 needs three fractional bits; s[3][2] has two
        let c = and_gate().circuit(default_i0()).unwrap();
        let mut n = Netlist::from_circuit(&c);
        n.tiles[0].weights[0][1] = "1.125".into();
        n.tiles[0].weights[1][0] = "1.125".into();
        let err = n.build().unwrap_err().to_string();
        assert!(err.starts_with("tiles[0].weights[0][1]"), "{err}");
        n.tiles[0].weights[0][1] = "1.25".into();
        n.tiles[0].weights[1][0] = "1.25".into();
        assert!(n.build().is_ok());
    }

    #[test]
    fn unknown_fields_rejected() {
        let c = and_gate().circuit(default_i0()).unwrap();
        let text = Netlist::from_circuit(&c).to_json().replacen("\"version\"", "\"extra\": 1,\n  \"version\"", 1);
        assert!(matches!(Netlist::from_json(&text), Err(NetlistError::Json(_))));
    }

    #[test]
    fn missing_update_order_defaults_to_index_order() {
        let c = and_gate().circuit(default_i0()).unwrap();
        let mut n = Netlist::from_circuit(&c);
        n.tiles[0].update_order = None;
        let built = n.build().unwrap();
        assert_eq!(built.tiles()[0].update_order(), &[0, 1, 2]);
    }
}
