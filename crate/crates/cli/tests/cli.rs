//! End-to-end runs of the `fdiab` binary.

use std::path::Path;
use std::process::{Command, Output};

fn fdiab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdiab")).args(args).current_dir(dir).env("FDIAB_WORKERS", "2").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn parse_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let empty = write(d, "empty.sweep", "axis = xi\ngrid = 0, 100, 0\n");
    let o = fdiab(&["--sweep", &empty], d);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("empty"));

    let unknown = write(d, "unknown.sweep", "axis = lambda_x\nvalues = 1\n");
    let o = fdiab(&["--sweep", &unknown], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda_x"));

    let cfg = write(d, "bad.cfg", "colour = blue\n");
    let ok = write(d, "ok.sweep", "axis = bias_ratio_db\nvalues = 0\nmetrics = association\n");
    let o = fdiab(&["--config", &cfg, "--sweep", &ok], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));

    // a hard-core distance too large for the gNB density
    let dense = write(d, "dense.sweep", "axis = xi\nvalues = 300\nmetrics = association\n");
    assert_eq!(fdiab(&["--sweep", &dense], d).status.code(), Some(2));

    assert_eq!(fdiab(&["--figure", "fig_unknown"], d).status.code(), Some(2));
    assert_eq!(fdiab(&[], d).status.code(), Some(2));
}

#[test]
fn evaluator_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // one-bit quantization caps the attainable SINR below 10 dB
    let cfg = write(d, "q1.cfg", "q_adc = 1\n");
    let sweep = write(d, "tau.sweep", "axis = tau_db\nvalues = 10\n");
    let o = fdiab(&["--config", &cfg, "--sweep", &sweep], d);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn fixed_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sweep = write(
        d,
        "s.sweep",
        "axis = bias_ratio_db\nvalues = -5, 5\nmetrics = association, coverage, cap_outage\nengines = both\nmc_iterations = 3000\nseed = 17\n",
    );
    let a = fdiab(&["--sweep", &sweep, "--out", "a.csv"], d);
    assert!(a.status.success(), "{}", stderr(&a));
    let b = fdiab(&["--sweep", &sweep, "--out", "b.csv", "--engine", "both"], d);
    assert!(b.status.success());
    let ta = std::fs::read(d.join("a.csv")).unwrap();
    assert_eq!(ta, std::fs::read(d.join("b.csv")).unwrap());

    let mut rdr = csv::Reader::from_reader(ta.as_slice());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["axis_name", "axis_value", "engine", "metric", "link_class", "value", "ci95", "seconds"]
    );
    let recs: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    // per point and engine: 3 association classes, network plus 4 links for two metrics
    assert_eq!(recs.len(), 2 * 2 * (3 + 5 + 5));
    assert!(recs.iter().all(|r| r[7].is_empty()));
    assert!(recs.iter().all(|r| (&r[2] == "mc") == !r[6].is_empty()));

    let c = fdiab(&["--sweep", &sweep, "--out", "c.csv", "--seed", "18"], d);
    assert!(c.status.success());
    assert_ne!(ta, std::fs::read(d.join("c.csv")).unwrap());
}

#[test]
fn timing_fills_seconds_column() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sweep = write(d, "s.sweep", "axis = xi\nvalues = 50\nmetrics = association\n");
    let o = fdiab(&["--sweep", &sweep, "--timing"], d);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    for r in rdr.records() {
        assert!(r.unwrap()[7].parse::<f64>().unwrap() >= 0.0);
    }
}

#[test]
fn figure_writes_csv_and_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = fdiab(&["--figure", "assoc_vs_bias", "--out", "fig", "--mc-iters", "500"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let dat = std::fs::read_to_string(d.join("fig/assoc_vs_bias.dat")).unwrap();
    let lines: Vec<&str> = dat.lines().collect();
    assert!(lines[0].starts_with("# bias_ratio_db analytic:association:gnb"));
    assert_eq!(lines.len(), 8);
    let csv = std::fs::read_to_string(d.join("fig/assoc_vs_bias.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 7 * 2 * 3);
}
