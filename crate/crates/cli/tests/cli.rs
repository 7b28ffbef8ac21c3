use std::path::Path;
use std::process::{Command, Output};

fn heislim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heislim"))
        .args(args)
        .env_remove("HEISLIM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV, without comments and the column row.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn phi_example() {
    let o = heislim(&["phi", "--t", "2", "--r1", "0.1", "--r2", "0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "t,r1,r2,branch,phi"));
    let r = rows(&text);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][4].parse::<f64>().unwrap(), 0.25);
}

#[test]
fn threshold_example() {
    let o = heislim(&["threshold", "--alpha", "0.25", "--beta", "1"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert!((r[0][2].parse::<f64>().unwrap() - 22.0 / 7.0).abs() < 1e-9);
    assert_eq!(r[0][3], "22/7");
}

#[test]
fn header_has_version_hash_and_seed() {
    let o = heislim(&["energy", "--t", "0.5", "--pairs", "2000", "--seed", "7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with(&format!("# heislim {} config=", env!("CARGO_PKG_VERSION"))));
    assert!(first.ends_with(" seed=7"));
    assert!(text.lines().any(|l| l == "# pairs = 2000"));
    assert!(text.lines().any(|l| {
        l == "r1,r2,t,n_pairs,seed,energy,stderr,bound,energy_over_bound,cap_lower,phi,cap_over_phi"
    }));
}

#[test]
fn same_seed_same_bytes() {
    let args = [
        "cover",
        "--sweep",
        "2",
        "--t",
        "3.5",
        "--samples",
        "500",
        "--seed",
        "3",
    ];
    let a = heislim(&args);
    let b = heislim(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let single = heislim(&[&args[..], &["--threads", "1"]].concat());
    assert_eq!(a.stdout, single.stdout);
    let other = heislim(&[
        "cover",
        "--sweep",
        "2",
        "--t",
        "3.5",
        "--samples",
        "500",
        "--seed",
        "4",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "schema = 1\n\n[phi]\nt = [2.5, 3.5]\nr1 = 0.1\nr2 = [0.5]\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = stdout(&heislim(&["phi", "--config", cfg]));
    assert_eq!(rows(&from_file).len(), 2);
    let overridden = stdout(&heislim(&["phi", "--config", cfg, "--t", "2"]));
    let r = rows(&overridden);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][4].parse::<f64>().unwrap(), 0.25);
    // The hash covers effective values, not where they came from.
    let flags = stdout(&heislim(&["phi", "--t", "2", "--r1", "0.1", "--r2", "0.5"]));
    assert_eq!(overridden.lines().next(), flags.lines().next());
}

#[test]
fn unknown_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "schema = 1\n[cover]\nsampels = 10\n").unwrap();
    let o = heislim(&["cover", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cover.sampels"));

    std::fs::write(&cfg, "[cover]\nsamples = 10\n").unwrap();
    let o = heislim(&["cover", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(heislim(&["phi", "--t", "banana"]).status.code(), Some(1));
    assert_eq!(heislim(&["phi", "--t", "5"]).status.code(), Some(1));
    assert_eq!(heislim(&["nonsense"]).status.code(), Some(1));
    assert_eq!(heislim(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_heislim"))
        .args(["gadgets", "coeffs", "--blocks", "3"])
        .env("HEISLIM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(Path::new(dir.path()).join("gadgets-coeffs.csv")).unwrap();
    let r = rows(&text);
    assert_eq!(r.len(), 2 + 4 + 8);
    assert!(r.iter().filter(|x| x[0] == "3").all(|x| x[3] == "0.125"));
}

#[test]
fn simulate_reports_slope() {
    let o = heislim(&["simulate", "--n", "200,800,3200"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 4);
    assert_eq!(r[3][0], "summary");
    let slope: f64 = r[3][2].parse().unwrap();
    assert!((slope - 2.0).abs() < 0.3, "{slope}");
}

#[test]
fn accept_subset_passes() {
    let o = heislim(&["accept", "--seed", "42", "--only", "2,3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.contains(" PASS: ")));
}
