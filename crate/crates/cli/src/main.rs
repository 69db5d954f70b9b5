//! `pbit`: build or load p-circuits, run them, and compare against the
//! exact Boltzmann oracle.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pbit_core::circuit::{Circuit, LinkMode, I0_FORMAT};
use pbit_core::fixedpoint::FixedPoint;
use pbit_core::library::{
    and_gate, build_rca, build_ssp, full_adder_14, full_adder_5, GateSpec, SspInstance,
};
use pbit_core::netlist::{load_netlist, save_netlist};
use pbit_core::oracle::{enumerate, OracleError};
use pbit_core::pbit::{ActivationTable, ClampValue, TABLE_LEN};
use pbit_core::stats::{
    activation_grid, mode, normalize, sigmoid_sweep, tv_distance, write_histogram_csv,
    write_sigmoid_csv,
};

/// Environment variable naming the directory for relative output paths.
const OUT_DIR_VAR: &str = "PBIT_OUT_DIR";

/// Emulator of a weighted p-bit fabric
#[derive(Parser, Debug)]
#[command(author, version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a circuit and histogram an expression over its terminals
    Run(RunArgs),
    /// Compare a single-tile circuit against exact enumeration
    Verify(VerifyArgs),
    /// Measure the p-bit transfer curve over the 64-point input grid
    Sigmoid(SigmoidArgs),
    /// Print the activation lookup table
    Lut(LutArgs),
    /// Write a circuit, with its clamps, as a JSON netlist
    Export(ExportArgs),
}

#[derive(Args, Debug)]
struct CircuitArgs {
    /// and | fa5 | fa14 | rca:N[:fa5|fa14] | ssp[:TARGET:M1,M2,...][:fa5|fa14] | netlist.json
    #[arg(short, long)]
    circuit: String,

    /// Interconnect strength I0 (exact decimal on the s[7][8] grid)
    #[arg(long)]
    i0: Option<String>,

    /// Clamp a terminal or `tile.label` p-bit: NAME=VALUE, or NAME=float
    #[arg(long = "clamp", value_name = "NAME=VALUE")]
    clamps: Vec<String>,

    /// Update the p-bits of each tile in a fresh random order every sweep
    #[arg(long)]
    randomize_order: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    circuit: CircuitArgs,

    #[arg(short, long, default_value_t = 100_000)]
    sweeps: usize,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Independent runs with seeds seed, seed+1, ...; histograms are summed
    #[arg(long, default_value_t = 1)]
    replicas: u64,

    /// Expression over terminal names, e.g. `S-A-B`; `state` histograms raw
    /// state keys (bit i = p-bit i)
    #[arg(short, long)]
    expr: Option<String>,

    /// JSON report path
    #[arg(long)]
    out: Option<PathBuf>,

    /// CSV histogram path
    #[arg(long)]
    hist: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    circuit: CircuitArgs,

    #[arg(short, long, default_value_t = 1_000_000)]
    sweeps: usize,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Largest total-variation distance that passes
    #[arg(long, default_value_t = 0.01)]
    tol: f64,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SigmoidArgs {
    #[arg(short, long, default_value_t = 100_000)]
    updates: usize,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// CSV path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LutArgs {
    /// Print all 64 entries as `input,hex`
    #[arg(long)]
    dump: bool,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    circuit: CircuitArgs,

    #[arg(long)]
    out: PathBuf,
}

/// A failure with the process exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    const VALIDATION: u8 = 2;
    const VERIFY: u8 = 3;
    const BUDGET: u8 = 4;
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let budget = error
            .chain()
            .any(|e| matches!(e.downcast_ref::<OracleError>(), Some(OracleError::BudgetExceeded { .. })));
        let code = if budget { Failure::BUDGET } else { Failure::VALIDATION };
        Failure { code, error }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
        Command::Sigmoid(args) => sigmoid(args).map_err(Failure::from),
        Command::Lut(args) => lut(args).map_err(Failure::from),
        Command::Export(args) => export(args).map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let path = output_path(path);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> anyhow::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn parse_adder(name: &str) -> anyhow::Result<GateSpec> {
    match name {
        "fa5" => Ok(full_adder_5()),
        "fa14" => Ok(full_adder_14()),
        other => bail!("unknown full adder {other:?}, expected fa5 or fa14"),
    }
}

/// Parses the `--circuit` argument into a circuit plus its default expression.
fn build_circuit(spec: &str, i0: FixedPoint) -> anyhow::Result<(Circuit, String)> {
    let parts: Vec<&str> = spec.split(':').collect();
    let circuit = match parts.as_slice() {
        ["and"] => return Ok((and_gate().circuit(i0)?, "state".into())),
        ["fa5"] => return Ok((full_adder_5().circuit(i0)?, "state".into())),
        ["fa14"] => return Ok((full_adder_14().circuit(i0)?, "state".into())),
        ["rca", n, rest @ ..] => {
            let n: usize = n.parse().with_context(|| format!("bad RCA width {n:?}"))?;
            let fa = match rest {
                [] => full_adder_14(),
                [fa] => parse_adder(fa)?,
                _ => bail!("expected rca:N[:fa5|fa14], got {spec:?}"),
            };
            (build_rca(n, &fa, i0)?, "S-A-B".to_string())
        }
        ["ssp", rest @ ..] => {
            let (inst, fa) = match rest {
                [] => (SspInstance::reference(), full_adder_14()),
                [fa] => (SspInstance::reference(), parse_adder(fa)?),
                [target, members] => (ssp_instance(target, members)?, full_adder_14()),
                [target, members, fa] => (ssp_instance(target, members)?, parse_adder(fa)?),
                _ => bail!("expected ssp[:TARGET:M1,M2,...][:fa5|fa14], got {spec:?}"),
            };
            let expr = inst.sum_expression();
            (build_ssp(&inst, &fa, i0)?, expr)
        }
        _ if spec.ends_with(".json") => {
            let mut c = load_netlist(Path::new(spec)).with_context(|| format!("loading {spec}"))?;
            c.set_i0(i0)?;
            let expr = if c.links().is_empty() && c.tiles().len() == 1 { "state" } else { "" };
            (c, expr.to_string())
        }
        _ => bail!("unknown circuit {spec:?}"),
    };
    Ok(circuit)
}

fn ssp_instance(target: &str, members: &str) -> anyhow::Result<SspInstance> {
    let target = target.parse().with_context(|| format!("bad SSP target {target:?}"))?;
    let sets = members
        .split(',')
        .map(|m| m.trim().parse::<u64>().map(|m| vec![0, m]))
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("bad SSP members {members:?}"))?;
    Ok(SspInstance {
        target,
        sets,
        input_bits: SspInstance::reference().input_bits,
    })
}

fn parse_i0(text: Option<&str>, from_file: bool) -> anyhow::Result<Option<FixedPoint>> {
    match text {
        Some(t) => Ok(Some(FixedPoint::parse_exact(t, I0_FORMAT).with_context(|| format!("bad --i0 {t:?}"))?)),
        None if from_file => Ok(None),
        None => Ok(Some(FixedPoint::from_int(1, I0_FORMAT)?)),
    }
}

fn prepare(args: &CircuitArgs) -> anyhow::Result<(Circuit, String)> {
    let from_file = args.circuit.ends_with(".json");
    let i0 = parse_i0(args.i0.as_deref(), from_file)?;
    let (mut c, expr) = match i0 {
        Some(i0) => build_circuit(&args.circuit, i0)?,
        None => {
            let c = load_netlist(Path::new(&args.circuit)).with_context(|| format!("loading {}", args.circuit))?;
            let expr = if c.links().is_empty() && c.tiles().len() == 1 { "state" } else { "" };
            (c, expr.to_string())
        }
    };
    for clamp in &args.clamps {
        apply_clamp(&mut c, clamp)?;
    }
    c.set_randomized_order(args.randomize_order);
    Ok((c, expr))
}

fn apply_clamp(c: &mut Circuit, text: &str) -> anyhow::Result<()> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| anyhow!("clamp {text:?} is not NAME=VALUE"))?;
    let float = matches!(value, "float" | "x" | "X");
    if c.terminals().contains_key(name) {
        if float {
            c.float_terminal(name)?;
        } else {
            let v: i128 = value.parse().with_context(|| format!("bad clamp value {value:?}"))?;
            c.clamp_terminal(name, v)?;
        }
        return Ok(());
    }
    let r = c
        .find_pbit(name)
        .ok_or_else(|| anyhow!("unknown terminal or p-bit {name:?}"))?;
    let v = match value {
        _ if float => ClampValue::Float,
        "0" => ClampValue::Zero,
        "1" => ClampValue::One,
        _ => bail!("p-bit clamp value must be 0, 1 or float, got {value:?}"),
    };
    c.set_clamp(r, v)?;
    Ok(())
}

#[derive(Serialize)]
struct Bin {
    value: String,
    count: u64,
    probability: f64,
}

#[derive(Serialize)]
struct RunReport {
    circuit: String,
    expression: String,
    sweeps: usize,
    replicas: u64,
    seed: u64,
    i0: String,
    clamps: Vec<String>,
    pbits: usize,
    tiles: usize,
    cycles_per_sweep: u64,
    total_cycles: u64,
    samples: u64,
    mode: Option<String>,
    mode_probability: Option<f64>,
    oracle_tv: Option<f64>,
    histogram: Vec<Bin>,
}

fn histogram_of(c: &mut Circuit, sweeps: usize, seed: u64, expr: &str) -> anyhow::Result<BTreeMap<i128, u64>> {
    c.reset(seed);
    let log = c.sample(sweeps);
    Ok(if expr == "state" {
        log.state_histogram()?.into_iter().map(|(k, v)| (k as i128, v)).collect()
    } else {
        log.histogram(expr)?
    })
}

/// Exact distribution for a single unlinked tile under its current clamps.
fn oracle_distribution(c: &Circuit) -> anyhow::Result<BTreeMap<i128, f64>> {
    if c.tiles().len() != 1 || !c.links().is_empty() {
        bail!("exact enumeration needs a single tile without links");
    }
    let tile = &c.tiles()[0];
    let gate = GateSpec::from_tile(tile)?;
    let clamps: Vec<Option<bool>> = tile
        .pbits()
        .iter()
        .map(|p| match p.clamp_value() {
            ClampValue::Float => None,
            ClampValue::Zero => Some(false),
            ClampValue::One => Some(true),
        })
        .collect();
    let d = enumerate(&gate, c.i0().to_f64(), &clamps)?;
    Ok(d.probs.into_iter().map(|(k, p)| (k as i128, p)).collect())
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let (circuit, default_expr) = prepare(&args.circuit)?;
    let expr = args.expr.clone().unwrap_or(default_expr);
    if expr.is_empty() {
        return Err(anyhow!("no default expression for this circuit, pass --expr").into());
    }
    if args.replicas == 0 {
        return Err(anyhow!("--replicas must be at least 1").into());
    }
    log::info!(
        "{}: {} p-bits in {} tiles, {} cycles per sweep",
        args.circuit.circuit,
        circuit.pbit_count(),
        circuit.tiles().len(),
        circuit.sweep_cycles()
    );
    let runs: Vec<anyhow::Result<BTreeMap<i128, u64>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..args.replicas)
            .map(|k| {
                let mut c = circuit.clone();
                let expr = expr.as_str();
                let seed = args.seed.wrapping_add(k);
                scope.spawn(move || histogram_of(&mut c, args.sweeps, seed, expr))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("replica thread panicked")).collect()
    });
    let mut merged: BTreeMap<i128, u64> = BTreeMap::new();
    for hist in runs {
        for (k, v) in hist? {
            *merged.entry(k).or_insert(0) += v;
        }
    }

    let oracle_tv = if expr == "state" && circuit.tiles().len() == 1 && circuit.links().is_empty() {
        match oracle_distribution(&circuit) {
            Ok(exact) => Some(tv_distance(&normalize(&merged), &exact)),
            Err(e) => {
                log::warn!("skipping oracle comparison: {e:#}");
                None
            }
        }
    } else {
        None
    };

    let total: u64 = merged.values().sum();
    let top = mode(&merged);
    let probs = normalize(&merged);
    let report = RunReport {
        circuit: args.circuit.circuit.clone(),
        expression: expr.clone(),
        sweeps: args.sweeps,
        replicas: args.replicas,
        seed: args.seed,
        i0: circuit.i0().to_string(),
        clamps: args.circuit.clamps.clone(),
        pbits: circuit.pbit_count(),
        tiles: circuit.tiles().len(),
        cycles_per_sweep: circuit.sweep_cycles(),
        total_cycles: circuit.sweep_cycles() * args.sweeps as u64 * args.replicas,
        samples: total,
        mode: top.map(|k| k.to_string()),
        mode_probability: top.map(|k| probs[&k]),
        oracle_tv,
        histogram: merged
            .iter()
            .map(|(k, &v)| Bin {
                value: k.to_string(),
                count: v,
                probability: probs[k],
            })
            .collect(),
    };

    println!(
        "{}: {} samples of {}, {} bins, mode {} (p = {:.4})",
        report.circuit,
        total,
        expr,
        merged.len(),
        report.mode.as_deref().unwrap_or("-"),
        report.mode_probability.unwrap_or(0.0)
    );
    if let Some(tv) = oracle_tv {
        println!("TV distance to exact distribution: {tv:.5}");
    }
    if let Some(path) = &args.hist {
        let mut w = create(path)?;
        write_histogram_csv(&merged, &mut w).map_err(anyhow::Error::from)?;
        w.flush().map_err(anyhow::Error::from)?;
    }
    if let Some(path) = &args.out {
        write_json(&report, path)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    circuit: String,
    sweeps: usize,
    seed: u64,
    i0: String,
    clamps: Vec<String>,
    tv: f64,
    tolerance: f64,
    pass: bool,
    states: Vec<StateComparison>,
}

#[derive(Serialize)]
struct StateComparison {
    state: String,
    empirical: f64,
    exact: f64,
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let (mut circuit, _) = prepare(&args.circuit)?;
    if circuit.links().iter().any(|l| matches!(l.mode, LinkMode::ClampFollow | LinkMode::Weighted(_))) {
        return Err(anyhow!("verify needs a reciprocal circuit; {} has directed links", args.circuit.circuit).into());
    }
    let exact = oracle_distribution(&circuit)?;
    let empirical = normalize(&histogram_of(&mut circuit, args.sweeps, args.seed, "state")?);
    let tv = tv_distance(&empirical, &exact);
    let pass = tv <= args.tol;
    let width = circuit.pbit_count();
    let states = exact
        .iter()
        .map(|(&k, &p)| StateComparison {
            state: format!("{:0width$b}", k, width = width),
            empirical: empirical.get(&k).copied().unwrap_or(0.0),
            exact: p,
        })
        .collect();
    let report = VerifyReport {
        circuit: args.circuit.circuit.clone(),
        sweeps: args.sweeps,
        seed: args.seed,
        i0: circuit.i0().to_string(),
        clamps: args.circuit.clamps.clone(),
        tv,
        tolerance: args.tol,
        pass,
        states,
    };
    println!(
        "{}: TV distance {:.5} over {} sweeps (tolerance {}) {}",
        report.circuit,
        tv,
        args.sweeps,
        args.tol,
        if pass { "PASS" } else { "FAIL" }
    );
    if let Some(path) = &args.out {
        write_json(&report, path)?;
    }
    if pass {
        Ok(())
    } else {
        Err(Failure {
            code: Failure::VERIFY,
            error: anyhow!("TV distance {tv:.5} exceeds tolerance {}", args.tol),
        })
    }
}

fn sigmoid(args: SigmoidArgs) -> anyhow::Result<()> {
    let points = sigmoid_sweep(args.updates, &activation_grid(), args.seed);
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            write_sigmoid_csv(&points, &mut w)?;
            w.flush()?;
        }
        None => write_sigmoid_csv(&points, io::stdout().lock())?,
    }
    let worst = points
        .iter()
        .map(|p| (p.mean - (p.input.tanh() + 1.0) / 2.0).abs())
        .fold(0.0, f64::max);
    eprintln!("max |mean - (tanh(u)+1)/2| = {worst:.5} over {} points", points.len());
    Ok(())
}

fn lut(args: LutArgs) -> anyhow::Result<()> {
    let table = ActivationTable::shared();
    let grid = activation_grid();
    let mut out = io::stdout().lock();
    if args.dump {
        writeln!(out, "input,entry")?;
        for (u, raw) in grid.iter().zip(table.raw_entries()) {
            writeln!(out, "{},0x{:08x}", u, raw)?;
        }
    } else {
        let raw = table.raw_entries();
        writeln!(out, "{TABLE_LEN} entries, input s[3][2] in [-8, 7.75], output u[0][31]")?;
        writeln!(out, "u = -8    -> 0x{:08x}", raw[0])?;
        writeln!(out, "u = 0     -> 0x{:08x}", raw[TABLE_LEN / 2])?;
        writeln!(out, "u = 7.75  -> 0x{:08x}", raw[TABLE_LEN - 1])?;
    }
    Ok(())
}

fn export(args: ExportArgs) -> anyhow::Result<()> {
    let (circuit, _) = prepare(&args.circuit)?;
    let path = output_path(&args.out);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    save_netlist(&circuit, &path).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "wrote {} ({} tiles, {} p-bits, {} links)",
        path.display(),
        circuit.tiles().len(),
        circuit.pbit_count(),
        circuit.links().len()
    );
    Ok(())
}
