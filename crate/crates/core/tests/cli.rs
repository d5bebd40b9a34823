use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_spinor-pairs");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn gain_scan_writes_csv_to_output_path() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("scan.csv");
    let cfg = write(
        dir.path(),
        "scan.cfg",
        &format!(
            "# long cigar\nsigma_z = 10\nq_mag = 20\nn_theta = 7\noutput_path = {}\n",
            csv.display()
        ),
    );
    let out = run(&["gain-scan", "--config", &cfg]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta_deg,g_raw,g_normalized"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[6][0], 90.0);
    assert_eq!(rows[0][2], 1.0);
    assert!(rows.windows(2).all(|w| w[1][2] < w[0][2]));
}

#[test]
fn isotropic_scan_is_flat() {
    let out = run(&[
        "gain-scan",
        "--set",
        "sigma_z=1",
        "--set",
        "q_mag=3",
        "--set",
        "n_theta=10",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for line in String::from_utf8(out.stdout).unwrap().lines().skip(1) {
        let g: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((g - 1.0).abs() < 1e-9);
    }
}

#[test]
fn set_overrides_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "d.cfg",
        "rate_ref = 1\nt_max = 2\nn_times = 3\n",
    );
    let base = run(&["dynamics", "--config", &cfg]);
    let over = run(&["dynamics", "--config", &cfg, "--set", "t_max=4"]);
    assert_eq!(code(&base), 0);
    assert_eq!(code(&over), 0);
    let last = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .last()
            .unwrap()
            .split(',')
            .next()
            .unwrap()
            .parse::<f64>()
            .unwrap()
    };
    assert_eq!(last(&base), 2.0);
    assert_eq!(last(&over), 4.0);
}

#[test]
fn every_subcommand_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let coeffs = write(dir.path(), "c.txt", "-2 0.6 0\n0 0 0.8\n");
    let cases: Vec<Vec<String>> = vec![
        vec![
            "gain-scan",
            "--set",
            "sigma_z=10",
            "--set",
            "q_mag=10",
            "--set",
            "n_theta=5",
        ],
        vec![
            "dynamics",
            "--set",
            "rate_ref=1",
            "--set",
            "t_max=20",
            "--set",
            "n_times=50",
        ],
        vec![
            "fock",
            "--set",
            "n0=100",
            "--set",
            "chi=0.01",
            "--set",
            "t_max=10",
            "--set",
            "n_times=21",
        ],
        vec!["spin-stats", "--set", "n0=100"],
        vec!["spin-stats", "--set", "n0=4", "--coeffs", coeffs.as_str()],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = run(&args);
        let second = run(&args);
        assert_eq!(code(&first), 0, "{args:?}: {}", stderr(&first));
        assert!(!first.stdout.is_empty());
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["gain-scan", "--help"])), 0);
}

#[test]
fn exit_1_on_config_errors() {
    let dir = TempDir::new().unwrap();
    let bad_value = write(dir.path(), "a.cfg", "sigma_z = ten\nq_mag = 1\n");
    let out = run(&["gain-scan", "--config", &bad_value]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("sigma_z"));

    let out = run(&["gain-scan", "--set", "q_mag=3"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("sigma_z"));

    let out = run(&["gain-scan", "--set", "flavour=3"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("flavour"));

    let out = run(&["gain-scan", "--config", "/nonexistent/x.cfg"]);
    assert_eq!(code(&out), 1);

    assert_eq!(code(&run(&["no-such-command"])), 1);
    assert_eq!(
        code(&run(&[
            "dynamics",
            "--set",
            "t_max=1",
            "--set",
            "n_times=1"
        ])),
        1
    );
}

#[test]
fn exit_2_on_closed_channel() {
    let out = run(&[
        "gain-scan",
        "--set",
        "sigma_z=10",
        "--set",
        "q_mag=10",
        "--set",
        "detuning=1",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no energy-conserving partner"));
}

#[test]
fn exit_3_on_unconverged_quadrature() {
    let out = run(&[
        "gain-scan",
        "--set",
        "sigma_z=10",
        "--set",
        "q_mag=10",
        "--set",
        "angular_nodes=4",
        "--set",
        "n_theta=3",
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn exit_4_on_overflow() {
    let out = run(&[
        "dynamics",
        "--set",
        "rate_ref=1",
        "--set",
        "t_max=800",
        "--set",
        "n_times=2",
    ]);
    assert_eq!(code(&out), 4);
}

#[test]
fn exit_5_on_odd_atom_number() {
    let out = run(&[
        "fock",
        "--set",
        "n0=11",
        "--set",
        "chi=0.1",
        "--set",
        "t_max=1",
        "--set",
        "n_times=2",
    ]);
    assert_eq!(code(&out), 5);
    assert_eq!(code(&run(&["spin-stats", "--set", "n0=11"])), 5);
}

#[test]
fn exit_6_on_norm_drift_budget() {
    let out = run(&[
        "fock",
        "--set",
        "n0=100",
        "--set",
        "chi=0.01",
        "--set",
        "t_max=10",
        "--set",
        "n_times=5",
        "--set",
        "norm_tolerance=0",
    ]);
    assert_eq!(code(&out), 6, "{}", stderr(&out));
}

#[test]
fn exit_7_on_unnormalized_coefficients() {
    let dir = TempDir::new().unwrap();
    let coeffs = write(dir.path(), "c.txt", "0 0.5 0\n2 0.5 0\n");
    let out = run(&["spin-stats", "--set", "n0=4", "--coeffs", &coeffs]);
    assert_eq!(code(&out), 7);
}

#[test]
fn exit_8_on_all_zero_scan() {
    // q_s = 0: the partner shell collapses to a point.
    let out = run(&[
        "gain-scan",
        "--set",
        "sigma_z=10",
        "--set",
        "q_mag=2",
        "--set",
        "detuning=1",
    ]);
    assert_eq!(code(&out), 8, "{}", stderr(&out));
}
