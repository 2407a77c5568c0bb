use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

fn estc(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_estc"));
    cmd.args(args).arg("--out").arg(dir);
    if let Some(text) = config {
        let path = dir.join("run.toml");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// `section.key -> value` for a key-value summary, skipping comments.
fn record(path: &Path) -> HashMap<String, String> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut section = String::new();
    let mut out = HashMap::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()) {
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = format!("{name}.");
        } else if let Some((k, v)) = line.split_once(" = ") {
            out.insert(format!("{section}{k}"), v.to_string());
        }
    }
    out
}

fn float(rec: &HashMap<String, String>, key: &str) -> f64 {
    rec.get(key).unwrap_or_else(|| panic!("missing {key}")).parse().unwrap()
}

fn floats(rec: &HashMap<String, String>, key: &str) -> Vec<f64> {
    let v = rec.get(key).unwrap_or_else(|| panic!("missing {key}"));
    v.trim_matches(|c| c == '[' || c == ']').split(", ").map(|x| x.parse().unwrap()).collect()
}

const ESTC2: &str = "[crystal]\npreset = \"estc2\"\n";

#[test]
fn validate_default_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = estc(dir.path(), &["validate"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(dir.path().join("validate.txt")).unwrap();
    assert!(text.contains("failed=0"));
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS conformance")).count(), 71);
}

#[test]
fn corrupted_table_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let o = estc(dir.path(), &["validate"], Some("[validate]\ncorrupt_n2_entries = [5]\n"));
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("FAIL conformance")));
    assert!(!out.lines().any(|l| l.starts_with("FAIL") && !l.contains("conformance")));
}

#[test]
fn zero_field_validation() {
    let dir = tempfile::tempdir().unwrap();
    let o = estc(dir.path(), &["validate"], Some("[crystal]\npreset = \"estc1\"\na_m = 0.0\n"));
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o).lines().find(|l| l.contains("zero model R(c+, q40)")).unwrap().to_string();
    assert!(line.starts_with("PASS") && line.contains("max_dev=0.000e0"), "{line}");
}

#[test]
fn config_errors_exit_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    for (text, path) in [("[scan]\nsteps = 1\n", "scan.steps"), ("[solver]\nfamily = \"dense\"\n", "solver.family")] {
        let o = estc(dir.path(), &["scan"], Some(text));
        assert_eq!(o.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&o.stderr).contains(&format!("`{path}`")));
    }
    let o = estc(dir.path(), &["scan", "--radius", "0"], None);
    assert_eq!(o.status.code(), Some(2));
    let o = estc(dir.path(), &["minimize"], Some("[minimize]\nbracket = [1.0e-6, 1.1e-6]\n"));
    assert_eq!(o.status.code(), Some(3), "a bracket without an interior minimum is a numerical failure");
}

#[test]
fn minimize_reference_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = estc(dir.path(), &["minimize"], None);
    assert_eq!(o.status.code(), Some(0));
    let rec = record(&dir.path().join("minimize.txt"));
    assert_eq!(rec["lines"], "1");
    let xi0 = float(&rec, "line.single.xi0");
    let r0 = float(&rec, "line.single.R0");
    assert!((xi0 / 1.5e-6 - 1.0).abs() < 0.15, "{xi0}");
    assert!((r0 / 1.25e-4 - 1.0).abs() < 0.25, "{r0}");
    assert!((float(&rec, "line.single.rho1_trace") - 2.0).abs() < 1e-12);
}

#[test]
fn doublet_summaries_and_spins() {
    let dir = tempfile::tempdir().unwrap();
    let o = estc(dir.path(), &["observe"], Some(ESTC2));
    assert_eq!(o.status.code(), Some(0));
    let rec = record(&dir.path().join("observe.txt"));
    assert_eq!(rec["lines"], "2");
    let split = float(&rec, "splitting");
    assert!((4e-8..=1.6e-7).contains(&split), "{split}");
    let (a, b) = (floats(&rec, "line.a.spin"), floats(&rec, "line.b.spin"));
    for k in 0..3 {
        assert!((a[k] + b[k]).abs() < 1e-3, "{a:?} {b:?}");
    }
    assert!(a[0] * b[0] < 0.0);

    let o = estc(dir.path(), &["minimize"], Some(ESTC2));
    assert_eq!(o.status.code(), Some(0));
    let rec = record(&dir.path().join("minimize.txt"));
    for l in ["a", "b"] {
        assert!((float(&rec, &format!("line.{l}.rho1_trace")) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sigma3_maps_of_the_doublet_anticorrelate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{ESTC2}[fieldmap]\noperator = \"sigma3\"\nspace_points = 16\ntime_points = 16\n");
    let o = estc(dir.path(), &["fieldmap"], Some(&cfg));
    assert_eq!(o.status.code(), Some(0));
    let rec = record(&dir.path().join("fieldmap.txt"));
    assert!(float(&rec, "pair.correlation") <= -0.99);
    let grid = std::fs::read_to_string(dir.path().join("fieldmap_a.csv")).unwrap();
    let rows: Vec<&str> = grid.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "X3,X4,value");
    assert_eq!(rows.len(), 1 + 16 * 16);
}

#[test]
fn outputs_are_byte_identical_across_reruns_and_thread_counts() {
    let cfg = "[scan]\nsteps = 41\n";
    let runs: Vec<Vec<u8>> = ["1", "3"]
        .iter()
        .map(|t| {
            let dir = tempfile::tempdir().unwrap();
            let o = estc(dir.path(), &["scan", "--threads", t], Some(cfg));
            assert_eq!(o.status.code(), Some(0));
            std::fs::read(dir.path().join("scan.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let text = String::from_utf8(runs[0].clone()).unwrap();
    assert!(text.contains("#   [scan]") && text.contains("#   steps = 41"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 41);

    let dir = tempfile::tempdir().unwrap();
    let first = {
        estc(dir.path(), &["minimize"], None);
        std::fs::read(dir.path().join("minimize.txt")).unwrap()
    };
    estc(dir.path(), &["minimize"], None);
    assert_eq!(first, std::fs::read(dir.path().join("minimize.txt")).unwrap());
}

#[test]
fn overrides_reach_the_echo() {
    let dir = tempfile::tempdir().unwrap();
    let o = estc(dir.path(), &["minimize", "--radius", "2", "--precision", "extended"], Some("[minimize]\nbracket = [1.4e-6, 1.6e-6]\n"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("minimize.txt")).unwrap();
    assert!(text.contains("#   radius = 2") && text.contains("#   precision = \"extended\""));
    let rec = record(&dir.path().join("minimize.txt"));
    let r0 = float(&rec, "line.single.R0");
    assert!(r0 < 1e-4 && r0 > 1e-5, "{r0}");
}
