use std::path::Path;
use std::process::{Command, Output};

fn npid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npid"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_adder_exit_codes() {
    let o = npid(&["verify-adder", "--three-value"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("9/9 exact"), "{}", stdout(&o));

    let o = npid(&[
        "verify-adder",
        "--neurons",
        "15",
        "--distribution",
        "quadratic",
        "--quantized",
        "true",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));

    // Exact match is not attainable for quantized quadratic grids at this size.
    let o = npid(&[
        "verify-adder",
        "--neurons",
        "151",
        "--distribution",
        "quadratic",
        "--quantized",
        "true",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));

    let o = npid(&["verify-adder", "--neurons", "2001"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn export_netlist_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("net.json");
    let o = npid(&[
        "export-netlist",
        "--neurons",
        "15",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(
        stdout(&o).starts_with("93 unit neurons, 45 input neurons"),
        "{}",
        stdout(&o)
    );
    let net = npid_harness::netlist_io::read_netlist(&p).unwrap();
    assert_eq!(net.neuron_counts(), (93, 45));
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

#[test]
fn run_and_compare_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = npid(&[
        "run",
        "--neurons",
        "15",
        "--duration",
        "2",
        "--raster",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let names = files(&out);
    for want in [
        "config.json",
        "plot.svg",
        "raster.csv",
        "spikes.csv",
        "summary.csv",
    ] {
        assert!(names.iter().any(|n| n == want), "{names:?}");
    }
    let trace = names.iter().find(|n| n.starts_with("trace_")).unwrap();
    let text = std::fs::read_to_string(out.join(trace)).unwrap();
    assert_eq!(text.lines().count(), 141);

    // The written config replays to the same bytes.
    let again = dir.path().join("again");
    let cfg = out.join("config.json");
    let o = npid(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(again.join(trace)).unwrap(), text.as_bytes());

    let cmp = dir.path().join("cmp");
    let o = npid(&[
        "compare",
        "--duration",
        "2",
        "--setpoint",
        "2",
        "--out",
        cmp.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let summary = std::fs::read_to_string(cmp.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn bad_arguments_fail() {
    assert!(!npid(&["run", "--rate", "-3"]).status.success());
    assert!(!npid(&["run", "--mode", "sideways"]).status.success());
    assert!(!npid(&["frobnicate"]).status.success());
}
