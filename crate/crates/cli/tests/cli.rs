use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magbar"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, file: &str) -> String {
    fs::read_to_string(dir.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

#[test]
fn bands_table_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bands", "--b", "1", "--kmin", "-4", "--kmax", "6", "--nbands", "8", "--samples", "81", "--resolution", "1500"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let table = read(dir.path(), "bands_table.csv");
    let header = table.lines().next().unwrap();
    assert!(header.starts_with("k,parabola,omega_1,"), "{header}");
    assert!(header.ends_with(",omega_8"));
    let row: Vec<f64> = table.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], -4.0);
    assert_eq!(row[1], 16.0);
    for j in 1..=8 {
        let dat = read(dir.path(), &format!("bands_omega_{j}.dat"));
        let first: Vec<f64> = dat.lines().next().unwrap().split_whitespace().map(|v| v.parse().unwrap()).collect();
        assert_eq!(first.len(), 2);
    }
    assert!(read(dir.path(), "bands_checks.csv").lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(read(dir.path(), "run_config.txt").contains("nbands = 8"));
    assert!(!dir.path().join("bands.FAILED").exists());
}

#[test]
fn single_wave_number_gives_levels() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bands", "--kmin", "0", "--kmax", "0", "--nbands", "4"]);
    assert!(o.status.success());
    let t = read(dir.path(), "bands_levels.csv");
    let omegas: Vec<f64> = t.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    for (j, w) in omegas.iter().enumerate() {
        assert!((w - (2 * j + 1) as f64).abs() < 1e-9, "{w}");
    }
}

#[test]
fn malformed_flag_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bands", "--nbands", "eight"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = run(dir.path(), &["count1d", "--alpha", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(dir.path().join("count1d.FAILED").exists());
}

#[test]
fn failing_checks_exit_one_with_marker() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["count1d", "--lambdas", "0.3,0.1,0.03"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(read(dir.path(), "count1d.FAILED").contains("fitted_exponent"));
    assert!(dir.path().join("count1d_curve.csv").exists());
}

#[test]
fn count1d_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["count1d", "--alpha", "1", "--ell", "1", "--m", "1", "--lambdas", "1e-3,3e-4,1e-4"]);
    assert!(o.status.success());
    let checks = read(dir.path(), "count1d_checks.csv");
    let line = checks.lines().find(|l| l.starts_with("fitted_exponent,")).unwrap();
    let p: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((p - 0.5).abs() < 0.05, "{p}");
}

#[test]
fn minima_and_mourre_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["minima", "--b", "1", "--jmax", "3"]).status.success());
    assert_eq!(read(dir.path(), "minima_minima.csv").lines().count(), 4);
    let o = run(dir.path(), &["mourre", "--b", "1", "--n", "1", "--E", "mid", "--states", "10"]);
    assert!(o.status.success());
    let w = read(dir.path(), "mourre_window.csv");
    assert!(w.starts_with("n,b,E,delta0,"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# count settings\nell = 2\nlambdas = 1e-3,3e-4,1e-4\nformat = json\n").unwrap();
    let o = run(dir.path(), &["count1d", "--config", cfg.to_str().unwrap(), "--ell", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&read(dir.path(), "count1d.json")).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert!(doc["config"].as_str().unwrap().contains("ell = 1.0"));
    assert_eq!(doc["pass"], true);
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "no equals sign\n").unwrap();
    assert_eq!(run(dir.path(), &["count1d", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for fmt in ["csv", "json"] {
        for d in [&a, &b] {
            let args = ["count1d", "--format", fmt, "--lambdas", "1e-3,3e-4,1e-4"];
            assert!(run(d.path(), &args).status.success());
            let args = ["mourre", "--format", fmt, "--states", "5", "--nodes", "9", "--jobs", "2"];
            assert!(run(d.path(), &args).status.success());
        }
    }
    for file in ["count1d_curve.csv", "count1d.json", "mourre_currents.csv", "mourre.json"] {
        assert_eq!(read(a.path(), file).replace(a.path().to_str().unwrap(), ""), read(b.path(), file).replace(b.path().to_str().unwrap(), ""), "{file}");
    }
}
