use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tpng_core::trajectory_io::read_trajectory_csv;

fn tpng(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tpng"))
        .args(args)
        .env_remove("TPNG_OUT")
        .output()
        .expect("spawning tpng")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn only_trajectory(out: &Path) -> PathBuf {
    let mut found: Vec<PathBuf> = std::fs::read_dir(out)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path().join("trajectory.csv");
            p.exists().then_some(p)
        })
        .collect();
    assert_eq!(found.len(), 1);
    found.remove(0)
}

/// Baseline run shortened to keep the suite quick.
fn short_run(dir: &Path) -> PathBuf {
    let cfg = write(
        dir,
        "short.toml",
        "schema_version = 1\nname = \"short\"\n[sim]\nt_max = 20.0\n",
    );
    let out = dir.join("short-out");
    let o = tpng(&["run", "--config", path(&cfg), "--out", path(&out), "--plots", "off"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    only_trajectory(&out)
}

#[test]
fn baseline_run_hits_on_time_and_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    let o = tpng(&["run", "--td", "70", "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("yes"), "{stdout}");

    let rows = read_trajectory_csv(&only_trajectory(&out)).unwrap();
    let last = rows.last().unwrap();
    assert!((last.t - 70.0).abs() < 0.1, "ends at {}", last.t);
    assert!(rows.iter().all(|r| r.a_i > -4.0 && r.a_i < 8.0));

    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("label,t_d,intercepted,t_f,"));
    assert_eq!(summary.lines().count(), 2);
    for svg in ["trajectory", "time_to_go", "acceleration", "error_velocity"] {
        assert!(out.join("plots").join(format!("{svg}.svg")).exists());
    }
}

#[test]
fn plots_can_be_switched_off() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("np");
    let o = tpng(&["run", "--out", path(&out), "--plots", "off", "--td", "60"]);
    assert!(o.status.success());
    assert!(!out.join("plots").exists());
    only_trajectory(&out);
}

#[test]
fn bad_configuration_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    assert_eq!(tpng(&["run", "--dt", "0", "--out", path(&out)]).status.code(), Some(2));
    assert_eq!(tpng(&["run", "--td", "-5", "--out", path(&out)]).status.code(), Some(2));
    let missing = tmp.path().join("nope.toml");
    assert_eq!(tpng(&["run", "--config", path(&missing)]).status.code(), Some(2));
    let broken = write(tmp.path(), "broken.toml", "schema_version = 1\n[target]\nspeed = \"fast\"\n");
    assert_eq!(tpng(&["run", "--config", path(&broken)]).status.code(), Some(2));
    let future = write(tmp.path(), "future.toml", "schema_version = 9\n");
    assert_eq!(tpng(&["run", "--config", path(&future)]).status.code(), Some(2));
}

#[test]
fn validate_accepts_a_clean_log() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = short_run(tmp.path());
    let o = tpng(&["validate", path(&csv)]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn validate_flags_an_out_of_bounds_row() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = short_run(tmp.path());
    let text = std::fs::read_to_string(&csv).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "a_i").unwrap();
    let lines: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, line)| {
            if i != 500 {
                return line.to_string();
            }
            let mut f: Vec<&str> = line.split(',').collect();
            f[col] = "9";
            f.join(",")
        })
        .collect();
    let bad = write(tmp.path(), "bad.csv", &(lines.join("\n") + "\n"));
    let o = tpng(&["validate", path(&bad)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn validate_rejects_unreadable_input() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = write(tmp.path(), "empty.csv", "");
    assert_eq!(tpng(&["validate", path(&empty)]).status.code(), Some(2));
    let junk = write(tmp.path(), "junk.csv", "a,b\n1,2\n");
    assert_eq!(tpng(&["validate", path(&junk)]).status.code(), Some(2));
}

#[test]
fn compare_orders_the_reaching_laws() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cmp");
    let o = tpng(&["compare", "--out", path(&out), "--plots", "off"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("standard") && stdout.contains("exponential"));
    assert!(stdout.contains("t_r1") && stdout.contains("t_r2"));
    assert!(out.join("standard").join("trajectory.csv").exists());
    assert!(out.join("exponential").join("trajectory.csv").exists());
}

#[test]
fn compare_with_nearly_flat_shaping_still_passes() {
    // theta_g close to 1 makes both laws almost identical.
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "flat.toml",
        "schema_version = 1\nname = \"flat\"\n[guidance]\ntheta_g = 0.999\n",
    );
    let out = tmp.path().join("flat-out");
    let o = tpng(&["compare", "--config", path(&cfg), "--out", path(&out), "--plots", "off"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn compare_refuses_a_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "sweep.toml",
        "schema_version = 1\n[sweep]\nimpact_time = [60.0, 70.0]\n",
    );
    let o = tpng(&["compare", "--config", path(&cfg), "--out", path(&tmp.path().join("s"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_root_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_tpng"))
        .args(["run", "--td", "60", "--plots", "off"])
        .env("TPNG_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let dirs: Vec<_> = std::fs::read_dir(tmp.path()).unwrap().collect();
    assert_eq!(dirs.len(), 1);
    assert!(dirs[0].as_ref().unwrap().path().join("summary.csv").exists());
}
