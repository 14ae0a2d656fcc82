use std::path::Path;
use std::process::{Command, Output};

use momenta_cli::output::{read_table, sha256_hex, Manifest};

fn momenta(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momenta"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run momenta")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> Manifest {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const SCENARIO: &str = r#"name = "short"
mass = 1.0
coupling = 2.0
order = 2
hbar = 0.02

[initial]
r = 1.0
p_r = 1.0
theta = 3.141592653589793
p_theta = 1.0

[moments]
position_r = 0.01
position_theta = 0.01

[integrator]
t_end = 1.0
sample_interval = 0.05
"#;

#[test]
fn help_and_version_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&momenta(&["--help"], tmp.path())), 0);
    let v = momenta(&["--version"], tmp.path());
    assert_eq!(code(&v), 0);
    assert!(stdout(&v).starts_with("momenta "));
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&momenta(&[], tmp.path())), 1);
    assert_eq!(code(&momenta(&["integrate", "--bogus"], tmp.path())), 1);
    assert_eq!(code(&momenta(&["integrate", "--order", "two"], tmp.path())), 1);
    assert_eq!(code(&momenta(&["integrate", "--preset", "nope"], tmp.path())), 1);
    assert_eq!(code(&momenta(&["integrate", "--classical", "--saturate"], tmp.path())), 1);
    assert_eq!(code(&momenta(&["integrate", "--order", "1"], tmp.path())), 1);
    assert_eq!(code(&momenta(&["integrate", "--scenario", "missing.toml"], tmp.path())), 1);
}

#[test]
fn unknown_scenario_key_reports_line_and_field() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = SCENARIO.replace("t_end = 1.0", "t_end = 1.0\nstep_size = 0.1");
    std::fs::write(tmp.path().join("bad.toml"), bad).unwrap();
    let o = momenta(&["integrate", "--scenario", "bad.toml"], tmp.path());
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("line 19, column 1"), "{err}");
    assert!(err.contains("unknown field `step_size`"), "{err}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn integrate_writes_checksummed_run() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("s.toml"), SCENARIO).unwrap();
    let o = momenta(&["integrate", "--scenario", "s.toml", "--out", "run"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dir = tmp.path().join("run");
    let m = manifest(&dir);
    assert!(m.completed);
    assert_eq!(m.samples, 21);
    for name in ["trajectory.csv", "classical.csv", "scenario.toml", "equations.eqs", "orbit.svg", "uncertainty.svg"] {
        let bytes = std::fs::read(dir.join(name)).unwrap();
        assert_eq!(m.files[name], sha256_hex(&bytes), "{name}");
    }
    let t = read_table(&dir.join("trajectory.csv")).unwrap();
    assert_eq!(&t.headers[..6], ["t", "r", "p_r", "theta", "p_theta", "G_2_0_0_0"]);
    assert_eq!(t.headers.last().unwrap(), "ratio_dr_dp_r");
    assert_eq!(t.headers.iter().filter(|h| h.starts_with("G_")).count(), 10);
    let line = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let first = line.lines().nth(1).unwrap();
    assert!(first.starts_with("0.0000000000000000e0,1.0000000000000000e0,"), "{first}");
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("s.toml"), SCENARIO).unwrap();
    assert_eq!(code(&momenta(&["integrate", "--scenario", "s.toml", "--out", "a"], tmp.path())), 0);

    let o = momenta(&["integrate", "--manifest", "a/manifest.json", "--out", "b"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("reproduced byte for byte: true"));

    assert_eq!(code(&momenta(&["integrate", "--scenario", "a/scenario.toml", "--out", "c"], tmp.path())), 0);
    let a = std::fs::read(tmp.path().join("a/trajectory.csv")).unwrap();
    for other in ["b", "c"] {
        assert_eq!(a, std::fs::read(tmp.path().join(other).join("trajectory.csv")).unwrap());
    }
    assert_eq!(manifest(&tmp.path().join("a")), manifest(&tmp.path().join("b")));
}

#[test]
fn tampered_run_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("s.toml"), SCENARIO).unwrap();
    assert_eq!(code(&momenta(&["integrate", "--scenario", "s.toml", "--out", "a"], tmp.path())), 0);
    let p = tmp.path().join("a/scenario.toml");
    let text = std::fs::read_to_string(&p).unwrap().replace("t_end = 1.0", "t_end = 2.0");
    std::fs::write(&p, text).unwrap();
    let o = momenta(&["integrate", "--manifest", "a/manifest.json", "--out", "b"], tmp.path());
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("scenario.toml"));
    let o = momenta(&["integrate", "--manifest", "a/manifest.json", "--order", "3"], tmp.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn overrides_and_classical_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let o = momenta(
        &["integrate", "--t-end", "0.5", "--tol", "1e-9", "--classical", "--out", "cl"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dir = tmp.path().join("cl");
    let m = manifest(&dir);
    assert_eq!(m.hbar, 0.0);
    assert_eq!(m.final_time, 0.5);
    assert!(!dir.join("classical.csv").exists());
    let t = read_table(&dir.join("trajectory.csv")).unwrap();
    assert!(t.column("G_2_0_0_0").unwrap().iter().all(|v| *v == 0.0));
    let s = std::fs::read_to_string(dir.join("scenario.toml")).unwrap();
    assert!(s.contains("atol = 0.000000001"), "{s}");
}

#[test]
fn saturate_flag_gives_zero_margin() {
    let tmp = tempfile::tempdir().unwrap();
    let o = momenta(&["integrate", "--t-end", "0.1", "--saturate", "--no-plots", "--out", "sat"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = read_table(&tmp.path().join("sat/trajectory.csv")).unwrap();
    assert_eq!(t.column("margin_r_p_r").unwrap()[0], 0.0);
    assert_eq!(t.column("margin_theta_p_theta").unwrap()[0], 0.0);
}

#[test]
fn radial_infall_is_a_numeric_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let o = momenta(&["integrate", "--preset", "radial", "--no-plots", "--out", "rad"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("radius below r_min"));
    let m = manifest(&tmp.path().join("rad"));
    assert!(!m.completed);
    assert!(m.final_time < 3.0);
}

#[test]
fn derive_writes_loadable_equations() {
    let tmp = tempfile::tempdir().unwrap();
    let o = momenta(&["derive", "--order", "2", "--out", "eq"], tmp.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("12 live"), "{}", stdout(&o));
    let listing = momenta(&["derive", "--order", "3", "--bracket-rule", "printed"], tmp.path());
    assert!(stdout(&listing).contains("d/dt G_0_3_0_0 = "));
    assert!(stdout(&listing).contains("rule printed"));

    std::fs::write(tmp.path().join("s.toml"), SCENARIO).unwrap();
    let args = ["integrate", "--scenario", "s.toml", "--no-plots"];
    let from_file = momenta(
        &[&args[..], &["--equations", "eq/equations-order2.eqs", "--out", "f"]].concat(),
        tmp.path(),
    );
    assert_eq!(code(&from_file), 0, "{}", stderr(&from_file));
    assert_eq!(code(&momenta(&[&args[..], &["--out", "g"]].concat(), tmp.path())), 0);
    assert_eq!(
        std::fs::read(tmp.path().join("f/trajectory.csv")).unwrap(),
        std::fs::read(tmp.path().join("g/trajectory.csv")).unwrap()
    );
    let r = momenta(&["integrate", "--manifest", "f/manifest.json", "--out", "h"], tmp.path());
    assert_eq!(code(&r), 0, "{}", stderr(&r));

    let mismatch = momenta(&[&args[..], &["--order", "3", "--equations", "eq/equations-order2.eqs"]].concat(), tmp.path());
    assert_eq!(code(&mismatch), 1);
}

#[test]
fn verify_reports_and_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let o = momenta(&["verify", "--out", "v"], tmp.path());
    assert_eq!(code(&o), 3);
    let out = stdout(&o);
    assert!(out.contains("PASS bracket oracle (exact rule): 1044 pairs, 0 mismatches"), "{out}");
    assert!(out.contains("PASS jacobi identity"));
    assert!(out.contains("PASS reference system, order 2"));
    assert!(out.contains("FAIL reference system, order 3"));
    assert!(tmp.path().join("v/verify_report.txt").exists());
}

#[test]
fn sweep_writes_runs_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let o = momenta(&["sweep", "--t-end", "2", "--dispersions", "1e-3,1e-4", "--out", "sw"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = std::fs::read_to_string(tmp.path().join("sw/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.starts_with("run,dispersion,window_start,window_end"));
    for run in ["run-00", "run-01"] {
        assert!(manifest(&tmp.path().join("sw").join(run)).completed);
    }
    assert_eq!(code(&momenta(&["sweep", "--dispersions", "-1"], tmp.path())), 1);
}

#[test]
fn plot_renders_all_figures() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("s.toml"), SCENARIO).unwrap();
    let run = momenta(&["integrate", "--scenario", "s.toml", "--no-plots", "--out", "a"], tmp.path());
    assert_eq!(code(&run), 0);
    let o = momenta(&["plot", "--input", "a/trajectory.csv", "--out", "figs"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let names = ["r", "p_r", "orbit", "phase_space", "energy", "uncertainty", "dispersion_ratio"];
    for n in names {
        let svg = std::fs::read_to_string(tmp.path().join(format!("figs/{n}.svg"))).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"), "{n}");
    }
    // companion overlay picked up from classical.csv next to the input
    let orbit = std::fs::read_to_string(tmp.path().join("figs/orbit.svg")).unwrap();
    assert!(orbit.contains(">classical<"));
    assert_eq!(code(&momenta(&["plot", "--input", "nothing.csv"], tmp.path())), 1);
}
