use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn pbit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbit"))
        .args(args)
        .env("PBIT_OUT_DIR", dir)
        .output()
        .expect("failed to launch pbit")
}

fn read_hist(path: &Path) -> BTreeMap<i128, u64> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|line| {
            let mut f = line.split(',');
            (f.next().unwrap().parse().unwrap(), f.next().unwrap().parse().unwrap())
        })
        .collect()
}

#[test]
fn same_seed_gives_identical_histogram_files() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = pbit(dir.path(), &["run", "-c", "rca:4:fa5", "--clamp", "A=3", "-s", "5000", "--seed", "9", "--hist", name]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn replicas_sum_the_individual_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |extra: &[&str], hist: &str| {
        let mut args = vec!["run", "-c", "and", "-s", "3000", "--hist", hist];
        args.extend_from_slice(extra);
        let out = pbit(dir.path(), &args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        read_hist(&dir.path().join(hist))
    };
    let merged = run(&["--seed", "20", "--replicas", "3"], "merged.csv");
    let mut summed: BTreeMap<i128, u64> = BTreeMap::new();
    for seed in ["20", "21", "22"] {
        for (k, v) in run(&["--seed", seed], &format!("s{seed}.csv")) {
            *summed.entry(k).or_insert(0) += v;
        }
    }
    assert_eq!(merged, summed);
    assert_eq!(merged.values().sum::<u64>(), 9000);
}

#[test]
fn report_is_valid_json_with_cycle_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbit(dir.path(), &["run", "-c", "ssp", "-s", "200", "--out", "r/report.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r/report.json")).unwrap()).unwrap();
    assert_eq!(report["cycles_per_sweep"], 42);
    assert_eq!(report["total_cycles"], 42 * 200);
    assert_eq!(report["samples"], 200);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| pbit(dir.path(), args).status.code().unwrap();

    assert_eq!(code(&["verify", "-c", "and", "-s", "200000"]), 0);
    assert_eq!(code(&["verify", "-c", "fa14", "-s", "500", "--tol", "0.0001"]), 3);
    assert_eq!(code(&["run", "-c", "nonsense"]), 2);
    assert_eq!(code(&["run", "-c", "and", "--clamp", "Q=1"]), 2);
    assert_eq!(code(&["run", "-c", "and", "--i0", "0.001"]), 2);
    assert_eq!(code(&["verify", "-c", "rca:2"]), 2);

    // one tile of 25 uncoupled p-bits is beyond exact enumeration
    let n = 25;
    let labels: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let netlist = serde_json::json!({
        "version": 1,
        "i0": "1",
        "tiles": [{
            "name": "wide",
            "format": "s[3][2]",
            "labels": labels,
            "weights": vec![vec!["0"; n]; n],
            "biases": vec!["0"; n],
            "update_order": (0..n).collect::<Vec<_>>(),
        }],
        "links": [],
        "clamps": [],
        "terminals": {},
    });
    let path = dir.path().join("wide.json");
    std::fs::write(&path, serde_json::to_string_pretty(&netlist).unwrap()).unwrap();
    assert_eq!(code(&["verify", "-c", path.to_str().unwrap(), "-s", "10"]), 4);
}

#[test]
fn lut_dump_lists_every_entry() {
    let out = pbit(Path::new("."), &["lut", "--dump"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 64);
    assert_eq!(rows[0].split(',').next(), Some("-8"));
    assert_eq!(rows[32], "0,0x40000000");
    assert_eq!(rows[63], "7.75,0x7ffffe71");
}

#[test]
fn exported_netlist_reloads_with_its_clamps() {
    let dir = tempfile::tempdir().unwrap();
    let out = pbit(dir.path(), &["export", "-c", "rca:3:fa5", "--clamp", "A=5", "--out", "rca.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join("rca.json");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"clamps\""));
    let out = pbit(dir.path(), &["run", "-c", path.to_str().unwrap(), "-s", "3000", "--expr", "A", "--hist", "a.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let hist = read_hist(&dir.path().join("a.csv"));
    assert_eq!(hist.keys().collect::<Vec<_>>(), vec![&5]);
}
