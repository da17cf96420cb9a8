use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn calabi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calabi"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn out_dir(tmp: &TempDir, name: &str) -> String {
    tmp.path().join(name).to_string_lossy().into_owned()
}

fn column(csv: &Path, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    let k = lines
        .next()
        .unwrap()
        .split(',')
        .position(|c| c == name)
        .unwrap();
    lines
        .map(|l| l.split(',').nth(k).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn zero_length_run_writes_one_snapshot() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "a");
    let o = calabi(&[
        "run",
        "--preset",
        "interval",
        "--t-end",
        "0",
        "--out-dir",
        &dir,
    ]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let snaps = fs::read_dir(Path::new(&dir).join("snapshots"))
        .unwrap()
        .count();
    assert_eq!(snaps, 1);
    assert_eq!(column(&Path::new(&dir).join("series.csv"), "t"), vec![0.0]);
    assert!(Path::new(&dir).join("audits/audit_0000.json").is_file());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(Path::new(&dir).join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["outcome"]["status"], "completed");
}

#[test]
fn canonical_square_energy_stays_constant() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "sq");
    let o = calabi(&[
        "run",
        "--preset",
        "square",
        "--h",
        "1/8",
        "--t-end",
        "0.01",
        "--out-dir",
        &dir,
    ]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(Path::new(&dir).join("report.json")).unwrap())
            .unwrap();
    let eps = report["eps_mono"].as_f64().unwrap();
    let ca = column(&Path::new(&dir).join("energy.csv"), "Ca");
    assert!(ca.len() > 100);
    assert!(
        ca.iter().all(|c| (c - ca[0]).abs() <= eps),
        "{eps} {:?}",
        &ca[..3]
    );
}

#[test]
fn malformed_scenario_names_the_key() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("bad.txt");
    fs::write(&path, "preset = square\ntimestep = 0.1\n").unwrap();
    let o = calabi(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--out-dir",
        &out_dir(&tmp, "x"),
    ]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("`timestep`"), "{}", stderr(&o));
    fs::write(&path, "preset = square\nh = coarse\n").unwrap();
    let o = calabi(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("`h`"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_3() {
    assert_eq!(code(&calabi(&["run", "--preset", "dodecahedron"])), 3);
    assert_eq!(code(&calabi(&["run", "--cfl", "-1"])), 3);
    assert_eq!(
        code(&calabi(&[
            "run",
            "--profile",
            "quadratic",
            "--amplitude",
            "-100"
        ])),
        3
    );
    assert_eq!(code(&calabi(&["run", "--unknown-flag"])), 3);
    assert_eq!(code(&calabi(&["verify"])), 3);
    assert_eq!(code(&calabi(&["--help"])), 0);
}

#[test]
fn scenario_file_and_polytope_file() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("tri.txt"),
        "# simplex\n1 0 0\n0 1 0\n-1 -1 1\n",
    )
    .unwrap();
    fs::write(
        tmp.path().join("tri.scn"),
        "name = tri\npolytope_file = tri.txt\nprofile = bump\namplitude = 1\nh = 1/16\nt_end = 0.0002\naudits = off\n",
    )
    .unwrap();
    let dir = out_dir(&tmp, "tri");
    let o = calabi(&[
        "run",
        "--scenario",
        tmp.path().join("tri.scn").to_str().unwrap(),
        "--out-dir",
        &dir,
    ]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("audits: disabled"));
    assert!(fs::read_to_string(Path::new(&dir).join("scenario.txt"))
        .unwrap()
        .contains("name = tri"));
    let ca = column(&Path::new(&dir).join("series.csv"), "Ca");
    assert_eq!(ca.len(), 11);
    assert!(ca.last().unwrap() < &ca[0]);
}

#[test]
fn verify_replays_and_detects_corruption() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "iv");
    let o = calabi(&[
        "run",
        "--preset",
        "interval",
        "--profile",
        "bump",
        "--amplitude",
        "1",
        "--h",
        "1/16",
        "--t-end",
        "0.001",
        "--snapshot-every",
        "0.00025",
        "--out-dir",
        &dir,
    ]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let o = calabi(&["verify", &dir]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(
        stdout(&o).contains("verified 5 snapshots in 1 run(s)"),
        "{}",
        stdout(&o)
    );
    assert!(
        stdout(&o).contains("0 snapshot(s) differ"),
        "{}",
        stdout(&o)
    );

    let last = Path::new(&dir).join("snapshots/snapshot_0004.json");
    let mut snap: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&last).unwrap()).unwrap();
    for v in snap["current"]["smooth"].as_array_mut().unwrap() {
        *v = serde_json::json!(v.as_f64().unwrap() * 100.0);
    }
    let bad = tmp.path().join("corrupt.json");
    fs::write(&bad, snap.to_string()).unwrap();
    let o = calabi(&["verify", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    let table = stdout(&o);
    assert!(
        table
            .lines()
            .any(|l| l.contains("hessian_positivity") && l.contains("FAIL")),
        "{table}"
    );

    fs::write(&bad, "{\"t\": 0}").unwrap();
    assert_eq!(code(&calabi(&["verify", bad.to_str().unwrap()])), 3);
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let run = |name: &str| {
        let dir = out_dir(&tmp, name);
        let o = calabi(&[
            "run",
            "--preset",
            "simplex",
            "--profile",
            "bump",
            "--amplitude",
            "2",
            "--h",
            "1/16",
            "--t-end",
            "0.0002",
            "--deterministic",
            "--out-dir",
            &dir,
        ]);
        assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
        dir
    };
    let (a, b) = (run("a"), run("b"));
    for file in [
        "series.csv",
        "energy.csv",
        "report.json",
        "snapshots/snapshot_0010.json",
    ] {
        let (x, y) = (
            fs::read(Path::new(&a).join(file)).unwrap(),
            fs::read(Path::new(&b).join(file)).unwrap(),
        );
        assert!(x == y, "{file} differs");
    }
}

#[test]
fn fit_decay_on_synthetic_series() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("exp.csv");
    let mut text = String::from("t,Ca\n");
    for k in 0..40 {
        let t = k as f64 * 0.05;
        text.push_str(&format!("{t:e},{:e}\n", (-3.0 * t).exp()));
    }
    fs::write(&path, &text).unwrap();
    let o = calabi(&["fit-decay", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rate: f64 = stdout(&o)
        .lines()
        .next()
        .unwrap()
        .trim_start_matches("rate = ")
        .parse()
        .unwrap();
    assert!((rate - 3.0).abs() < 1e-6, "{rate}");

    fs::write(&path, "t,Ca\n0,1\n1,1\n").unwrap();
    assert_eq!(code(&calabi(&["fit-decay", path.to_str().unwrap()])), 1);
    fs::write(&path, "time,energy\n0,1\n").unwrap();
    let o = calabi(&["fit-decay", path.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("t"), "{}", stderr(&o));
}

#[test]
fn presets_lists_all_three() {
    let o = calabi(&["presets"]);
    assert_eq!(code(&o), 0);
    for name in ["interval", "square", "simplex"] {
        assert!(stdout(&o).contains(name));
    }
}
