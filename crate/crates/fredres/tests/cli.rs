use std::path::PathBuf;
use std::process::Command;

use fredres::cli::resonance_rows;
use fredres::config::JobConfig;
use fredres::resonances::find_resonances_from_exclusion;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fredres"))
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fredres-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of the first CSV table (header skipped).
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip_while(|l| l.starts_with('#'))
        .skip(1)
        .take_while(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

const ZERO_GRID: &str = r#"
[coefficients]
preset = "zero"

[grid]
kind = "rect"
re = [0.5, 2.5]
im = [0.5, 2.5]
points = [3, 3]
"#;

#[test]
fn zero_grid_gives_unit_determinant() {
    let cfg = scratch("zero.toml", ZERO_GRID);
    let text = run_ok(&["det-grid", "--config", cfg.to_str().unwrap()]);
    let r = rows(&text);
    assert_eq!(r.len(), 9);
    for row in r {
        let (re, im): (f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap());
        assert_eq!((re, im), (1.0, 0.0), "{row:?}");
    }
}

#[test]
fn output_is_deterministic() {
    let a = run_ok(&["--preset", "smooth", "--nodes", "64", "det-grid"]);
    let b = run_ok(&["--preset", "smooth", "--nodes", "64", "det-grid", "--threads", "1"]);
    assert_eq!(a, b);
    let a = run_ok(&["--preset", "box", "--format", "json", "smatrix"]);
    let b = run_ok(&["--preset", "box", "--format", "json", "smatrix"]);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["command"], "smatrix");
}

#[test]
fn resonances_match_library() {
    let text = run_ok(&["--preset", "box", "resonances"]);
    let cfg = JobConfig::preset(fredres::config::Preset::Box);
    let c = cfg.coefficients.build().unwrap();
    let set = find_resonances_from_exclusion(&c, cfg.region.region().unwrap(), cfg.tolerances.zero, cfg.numerics.search_method()).unwrap();
    let expected = resonance_rows(&set);
    let got = rows(&text);
    assert_eq!(got.len(), expected.len());
    for (g, e) in got.iter().zip(&expected) {
        assert_eq!(g[0].parse::<f64>().unwrap(), e.re);
        assert_eq!(g[1].parse::<f64>().unwrap(), e.im);
        assert_eq!(g[2].parse::<u32>().unwrap(), e.multiplicity);
    }
    let counting: Vec<&str> = text.lines().skip_while(|l| *l != "# table: counting").skip(2).collect();
    assert_eq!(counting.len(), 3);
    for l in counting {
        let f: Vec<&str> = l.split(',').collect();
        assert!(f[1].parse::<f64>().unwrap() <= f[2].parse::<f64>().unwrap());
        assert_eq!(f[3], "true");
    }
}

#[test]
fn verify_exit_status() {
    let ok = bin().args(["--preset", "zero", "verify", "--suite", "kernels,determinant"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let text = String::from_utf8(ok.stdout).unwrap();
    assert!(text.contains("kernel.rotated_difference"));
    let bad = bin().args(["--preset", "box", "verify", "--suite", "kernels", "--mutate-rotations"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8(bad.stdout).unwrap().contains("FAIL"));
}

#[test]
fn errors_exit_with_two() {
    let out = bin().args(["--preset", "box", "--nodes", "3", "det-grid"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let cfg = scratch("bad.toml", "[coefficients]\npreset = \"box\"\n[region]\nr_min = 0.001\nr_max = 12.0\n");
    let out = bin().args(["resonances", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("r_min"));
    let out = bin().args(["verify", "--suite", "nonsense", "--preset", "zero"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_file_and_config_echo() {
    let dir = std::env::temp_dir().join(format!("fredres-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("d.csv");
    let stdout = run_ok(&["--preset", "zero", "det-grid", "--out", path.to_str().unwrap()]);
    assert!(stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# fredres "));
    assert!(text.contains("preset = \"zero\""));
}
