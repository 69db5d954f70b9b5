//! Bit-exact emulator of a fabric of weighted p-bits.
//!
//! Fixed-point arithmetic, 32-bit XNOR LFSRs, a 64-entry activation table,
//! sequenced tiles linked by directed edges, a gate library with adders and
//! a subset-sum solver, and exact Boltzmann oracles to check them against.

pub mod circuit;
pub mod fixedpoint;
pub mod lfsr;
pub mod library;
pub mod netlist;
pub mod oracle;
pub mod pbit;
pub mod stats;

pub use circuit::{Circuit, CircuitError, DirectedLink, LinkMode, PbitRef, Tile, TileActivity};
pub use fixedpoint::{FixedError, FixedFormat, FixedPoint, Rounding};
pub use lfsr::{Lfsr32, XnorLfsr};
pub use library::{Convention, GateSpec, LibraryError, SspInstance};
pub use netlist::{load_netlist, save_netlist, Netlist, NetlistError};
pub use oracle::{enumerate, BoltzmannDistribution, OracleError, ReferenceSampler};
pub use pbit::{ActivationTable, ClampValue, WeightedPBit};
pub use stats::{SampleLog, StatsError};
