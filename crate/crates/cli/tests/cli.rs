use std::process::{Command, Output};

fn qlimit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlimit")).args(args).output().expect("running qlimit")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    serde_json::from_str(text.lines().last().expect("error line")).expect("error line is JSON")
}

/// Rows of the CSV block following `# table = name`.
fn block(text: &str, name: &str) -> Vec<Vec<String>> {
    let marker = format!("# table = {name}");
    let start = text.lines().position(|l| l == marker).unwrap_or_else(|| panic!("no table {name}"));
    text.lines()
        .skip(start + 1)
        .take_while(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn field(rows: &[Vec<String>], name: &str) -> String {
    let col = rows[0].iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1][col].clone()
}

#[test]
fn header_is_self_describing() {
    let o = qlimit(&["derive"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# qlimit = "));
    assert!(text.contains("# config_hash = "));
    assert!(text.contains("# seed = none"));
    assert!(text.contains("# config: I_0 = "));
}

#[test]
fn overrides_change_the_hash() {
    let a = stdout(&qlimit(&["derive"]));
    let b = stdout(&qlimit(&["derive", "--set", "T=0.2 K"]));
    let hash = |t: &str| t.lines().find(|l| l.starts_with("# config_hash")).unwrap().to_string();
    assert_ne!(hash(&a), hash(&b));
    assert!(b.contains("# config: T = 2e-1 K"));
}

#[test]
fn analyze_reports_optimum_and_curve() {
    let o = qlimit(&["analyze", "--points", "9"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let report = block(&text, "report");
    let tau: f64 = field(&report, "tau_star").parse().unwrap();
    let min: f64 = field(&report, "min_resolution").parse().unwrap();
    assert!(tau > 0.0 && min > 0.0);
    assert!(field(&report, "sql_ratio").parse::<f64>().is_ok());
    assert_eq!(block(&text, "curve").len(), 10);
}

#[test]
fn unstable_spring_exits_three() {
    let o = qlimit(&["analyze", "--set", "I_0=5 nW"]);
    assert_eq!(o.status.code(), Some(3));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "UnstableSpring");
    assert_eq!(e["exit_code"], 3);
}

#[test]
fn malformed_config_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "m = 50 pg\nomega_m = 100 kHz\nthis is not a pair\n").unwrap();
    let o = qlimit(&["derive", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert!(e["message"].as_str().unwrap().contains("line 3"), "{e}");
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(qlimit(&["derive", "--bogus"]).status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible() {
    let args = ["simulate", "--trials", "2", "--seed", "7"];
    let a = qlimit(&args);
    let b = qlimit(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("# seed = 7"));
    let c = qlimit(&["simulate", "--trials", "2", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_rejects_large_step() {
    let o = qlimit(&["simulate", "--trials", "2", "--dt", "1e-3"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "StepTooLarge");
}

#[test]
fn trajectory_dump_goes_to_its_own_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let o = qlimit(&[
        "simulate", "--trials", "3", "--tau", "1e-5,2e-5", "--dump-trajectories", "2", "--dump-stride", "1",
        "--dump-out", path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let dump = std::fs::read_to_string(&path).unwrap();
    let body: Vec<&str> = dump.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0].split(',').next(), Some("trial"));
    assert!(body.iter().skip(1).any(|l| l.starts_with("1,")));
}

#[test]
fn jsonl_has_meta_line_first() {
    let o = qlimit(&["spectra", "--points", "4", "--format", "jsonl"]);
    let text = stdout(&o);
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines[0]["meta"]["config_hash"].is_string());
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1]["table"], "spectra");
    assert!(lines[1]["q_coeff_abs2"].as_f64().unwrap() > 0.0);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let o = qlimit(&["derive", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains("omega_eff"));
}

#[test]
fn rate_config_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.conf");
    std::fs::write(
        &path,
        "omega_m = 1\nomega_s = 50\ng0 = 0.05\ngamma_c = 0.1\ngamma_d = 0.1\nc_bar = 20\nn_th = 0\n",
    )
    .unwrap();
    let o = qlimit(&["analyze", "--rates", path.to_str().unwrap(), "--points", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = block(&stdout(&o), "report");
    let tau: f64 = field(&report, "tau_star").parse().unwrap();
    assert!(tau > 1e4 && tau < 1e6);
}

fn write_system(dir: &tempfile::TempDir, body: &str) -> String {
    let path = dir.path().join("system.txt");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn reduce_emits_tripartite_record() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_system(
        &dir,
        "mech_freqs = 1.0\next_freqs = 50 150\ndecay = 0.1 0.1\ndrive = 1 20.0\nchi 1 2 1 = 0.05\n",
    );
    let o = qlimit(&["reduce", &path]);
    assert!(o.status.success());
    let text = stdout(&o);
    let tri = block(&text, "tripartite");
    assert_eq!(field(&tri, "idle"), "2");
    assert_eq!(field(&tri, "driven_mode"), "common");
    assert_eq!(block(&text, "reduction").len(), 3);
}

#[test]
fn reduce_reports_qnd_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_system(
        &dir,
        "mech_freqs = 1.0\next_freqs = 50 150\ndecay = 0.1 0.1\ndrive = 1 20.0\nchi 1 2 1 = 0.05\nchi 1 1 1 = 0.01\n",
    );
    let o = qlimit(&["reduce", &path]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "QndViolated");
    assert!(stdout(&o).contains("# qnd_conditions_ok = false"));
}

#[test]
fn reduce_parse_error_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_system(&dir, "mech_freqs = 1.0\next_freqs = fifty\n");
    let o = qlimit(&["reduce", &path]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_rows_and_json() {
    let o = qlimit(&["sweep", "--axis", "T:log:0.01:1:3", "--axis", "finesse:log:1e5:1e6:2", "--json"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<serde_json::Value> = text.lines().skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 6);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r["index"], k);
    }
}

#[test]
fn sweep_bad_axis_is_usage_error() {
    let o = qlimit(&["sweep", "--axis", "nonsense:log:1:2:3"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(qlimit(&["sweep", "--axis", "T:log:1:2"]).status.code(), Some(2));
}
