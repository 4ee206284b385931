use std::path::Path;
use std::process::{Command, Output};

const PHYSICS: &str = r#"
[physics]
epsilon = 0.01
tau = 0.1
alpha_bar_plus = 0.5
rho_bar_plus = 1.0
law_plus = { a = 1.0, gamma = 2.0 }
law_minus = { a = 1.0, gamma = 1.4 }
"#;

fn run_section(system: &str, amplitude: f64) -> String {
    format!(
        r#"
[run]
system = "{system}"
dim = 1
n = 32
t_end = 0.2
samples = 4
ic = {{ seed = 5, amplitude = {amplitude}, band = [1, 3], well_prepared = true }}
"#
    )
}

fn relaxlab(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("config.toml");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_relaxlab"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (h, rows) = csv_rows(text);
    let k = h.iter().position(|c| c == name).unwrap();
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn zero_amplitude_run_stays_at_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = format!("{PHYSICS}{}", run_section("BN", 0.0));
    let o = relaxlab(dir.path(), &cfg, &["run", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ledger = std::fs::read_to_string(out.join("ledger.csv")).unwrap();
    for name in ["gap_l2", "gap_linf", "p_dev_l2", "u_l2", "flux_l2"] {
        assert!(column(&ledger, name).iter().all(|v| *v == 0.0), "{name}");
    }
    let m = column(&ledger, "m_total");
    assert!(m.iter().all(|v| *v == m[0]));
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    let hash = manifest["config_hash"].as_str().unwrap();
    assert!(ledger.lines().skip(1).all(|l| l.ends_with(hash)));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{PHYSICS}{}", run_section("K", 0.01));
    let mut ledgers = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = relaxlab(dir.path(), &cfg, &["run", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        ledgers.push(std::fs::read(out.join("ledger.csv")).unwrap());
    }
    assert_eq!(ledgers[0], ledgers[1]);
}

#[test]
fn seed_override_changes_the_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{PHYSICS}{}", run_section("K", 0.01));
    let read = |seed: &str| {
        let out = dir.path().join(seed);
        let o = relaxlab(dir.path(), &cfg, &["run", "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read_to_string(out.join("ledger.csv")).unwrap()
    };
    assert_ne!(column(&read("1"), "u_l2"), column(&read("2"), "u_l2"));
}

#[test]
fn snapshots_are_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = format!("{PHYSICS}{}", run_section("PM", 0.01));
    let o = relaxlab(dir.path(), &cfg, &["run", "--snapshots", "on", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut files: Vec<_> = std::fs::read_dir(out.join("snapshots")).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert_eq!(files.len(), 5);
    let mut f = std::fs::File::open(&files[4]).unwrap();
    let (h, fields) = relaxlab_core::io::read_snapshot(&mut f).unwrap();
    assert_eq!((h.dim, h.n, h.sample_index), (1, 32, 4));
    assert!((h.time - 0.2).abs() < 1e-12);
    assert_eq!(fields.len(), 4);
}

#[test]
fn invalid_system_exits_two_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{PHYSICS}{}", run_section("BX", 0.01));
    let o = relaxlab(dir.path(), &cfg, &["run", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("BX"), "{}", stderr(&o));
}

#[test]
fn unknown_key_exits_two_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{PHYSICS}{}", run_section("K", 0.01)).replace("samples = 4", "samples = 4\nstepz = 3");
    let o = relaxlab(dir.path(), &cfg, &["run", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("stepz"), "{}", stderr(&o));
}

#[test]
fn inadmissible_physics_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{}{}", PHYSICS.replace("epsilon = 0.01", "epsilon = 0.5"), run_section("K", 0.01));
    let o = relaxlab(dir.path(), &cfg, &["run", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("epsilon"), "{}", stderr(&o));
}

#[test]
fn blow_up_exits_one_with_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = format!(
        "{PHYSICS}{}",
        run_section("K", 0.2).replace("t_end = 0.2", "t_end = 40.0\ndt = 1.0").replace("samples = 4", "samples = 8")
    );
    let o = relaxlab(dir.path(), &cfg, &["run", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"blow-up\""));
    let rows = std::fs::read_to_string(out.join("ledger.csv")).unwrap().lines().count() - 1;
    assert!((1..9).contains(&rows));
}

#[test]
fn synthetic_sweep_reports_exact_slope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
[sweep]
vary = "epsilon"
values = [0.01, 0.005, 0.0025, 0.00125]
synthetic = { coefficient = 3.0, exponent = 0.5 }
"#;
    let o = relaxlab(dir.path(), cfg, &["sweep-pressure", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep_pressure.json")).unwrap()).unwrap();
    let slope = report["report"]["fit"]["slope"].as_f64().unwrap();
    assert!((slope - 0.5).abs() < 1e-12);
    assert_eq!(report["report"]["synthetic"], true);
    let csv = std::fs::read_to_string(dir.path().join("sweep_pressure.csv")).unwrap();
    assert_eq!(column(&csv, "synthetic")[0], 3.0 * 0.01f64.sqrt());
}

fn small_sweep(extra_run: &str) -> String {
    format!(
        "{PHYSICS}{}\n[sweep]\nvary = \"epsilon\"\nvalues = [0.01, 0.005, 0.0025]\n",
        run_section("BN", 0.01).replace("t_end = 0.2", extra_run)
    )
}

#[test]
fn pressure_sweep_is_reproducible_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_sweep("t_end = 0.2");
    let mut csvs = Vec::new();
    for w in ["1", "3"] {
        let out = dir.path().join(w);
        let o = relaxlab(dir.path(), &cfg, &["sweep-pressure", "--workers", w, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("slope"));
        csvs.push(std::fs::read(out.join("sweep_pressure.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn failed_sweep_run_is_persisted_as_partial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_sweep("t_end = 40.0\ndt = 1.0").replace("amplitude = 0.01", "amplitude = 0.2");
    let o = relaxlab(dir.path(), &cfg, &["sweep-pressure", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep_pressure.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["partial"], true);
}

#[test]
fn spectrum_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
[spectrum]
epsilon = 0.01
tau = 0.1
gamma_gap = 0.6
xi_min = 0.001
xi_max = 1000.0
xi_points = 61
include_zero = true
overdamping = { xi = 1.0, friction_min = 0.01, friction_max = 100.0, points = 400 }
"#;
    let o = relaxlab(dir.path(), cfg, &["spectrum", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let land = std::fs::read_to_string(dir.path().join("landscape.csv")).unwrap();
    assert!(column(&land, "max_re").iter().all(|v| *v <= 0.0));
    let (h, rows) = csv_rows(&land);
    let at = |name: &str| rows[0][h.iter().position(|c| c == name).unwrap()].parse::<f64>().unwrap();
    assert_eq!(at("xi"), 0.0);
    let mut re = [at("re1"), at("re2"), at("re3")];
    re.sort_by(f64::total_cmp);
    let expect = [-1.0 / 0.01, -1.0 / 0.1, 0.0];
    for (a, b) in re.iter().zip(expect) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
    }
    let od = std::fs::read_to_string(dir.path().join("overdamping.csv")).unwrap();
    let (h, rows) = csv_rows(&od);
    let peak: Vec<_> = rows.iter().filter(|r| r[h.iter().position(|c| c == "peak").unwrap()] == "1").collect();
    assert_eq!(peak.len(), 1);
    assert_eq!(peak[0][0].parse::<f64>().unwrap(), 2.0);
    assert_eq!(peak[0][1].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn lp_check_passes_and_rejects_tiny_grids() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[lp]\ndim = 1\nn = 64\ntau = 0.125\n";
    let o = relaxlab(dir.path(), cfg, &["lp-check"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(!text.contains("FAIL"));
    assert!(text.contains("(tau = 0.125, k = -2) = 1"), "{text}");
    let o = relaxlab(dir.path(), &cfg.replace("n = 64", "n = 4"), &["lp-check"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("resolution"));
}

#[test]
fn missing_config_is_invalid_input() {
    let o = Command::new(env!("CARGO_BIN_EXE_relaxlab")).arg("run").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
