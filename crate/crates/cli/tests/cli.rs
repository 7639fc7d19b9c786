use std::fs;
use std::process::{Command, Output};

fn fracbvp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracbvp")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn verify_specfun_passes_and_is_deterministic() {
    let a = fracbvp(&["verify", "specfun", "--seed", "42"]);
    let b = fracbvp(&["verify", "specfun", "--seed", "42"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("suite,name,class,measured,tolerance,pass,anchor,detail\n"));
}

#[test]
fn failing_check_exits_with_one() {
    // The laplace suite holds the order-16 Stehfest battery, which misses 1e-5.
    let out = fracbvp(&["verify", "laplace"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains(",false,"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&fracbvp(&["frobnicate"])), 2);
    assert_eq!(code(&fracbvp(&["verify", "nope"])), 2);
    assert_eq!(code(&fracbvp(&["solve", "--alpha", "0.6", "--t", "1", "--x", "0"])), 2);
    assert_eq!(code(&fracbvp(&["solve", "--t", "1:2"])), 2);
    assert_eq!(code(&fracbvp(&["mc", "stable", "--alpha", "1.5"])), 2);
    assert_eq!(code(&fracbvp(&["laplace", "--expr", "nope", "--alpha", "0.5"])), 2);
    assert_eq!(
        code(&fracbvp(&["--config", "/nonexistent.json", "verify", "specfun"])),
        2
    );
}

#[test]
fn numerical_failure_exits_with_three() {
    let out = fracbvp(&["laplace", "--expr", "u-zero", "--alpha", "0.5", "--t", "1e-300"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn solve_reads_config_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"alpha":0.8,"eta":1,"sigma":0,"c":1,"t":[0.25,1],"x":[0],"seed":7}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = fracbvp(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "solve",
        "--route",
        "laplace",
        "--c",
        "0.5",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(out_dir.join("solve.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows
        .iter()
        .all(|r| r.starts_with("0.8,1.0,0.0,0.5,") && r.contains(",laplace,")));
    assert!(rows.iter().all(|r| r.contains(",7,")));
}

#[test]
fn solve_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = [
        "--out",
        d,
        "solve",
        "--alpha",
        "0.6",
        "--eta",
        "1",
        "--sigma",
        "0.5",
        "--c",
        "1",
        "--t",
        "0.5:2:4",
        "--x",
        "0.5",
        "--route",
        "all",
        "--mc-draws",
        "10000",
    ];
    assert_eq!(code(&fracbvp(&args)), 0);
    let csv = dir.path().join("solve.csv");
    let out = fracbvp(&["--out", d, "plot", "--input", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let svg = fs::read_to_string(dir.path().join("survival.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn mc_summary_and_laplace_csv() {
    let out = fracbvp(&[
        "mc",
        "joint",
        "--t",
        "1",
        "--x",
        "0.5",
        "--n",
        "20000",
        "--summary",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("t,x,quantity,mean,std_error,draws\n"));
    assert_eq!(text.lines().count(), 4);
    assert_eq!(
        out.stdout,
        fracbvp(&[
            "mc",
            "joint",
            "--t",
            "1",
            "--x",
            "0.5",
            "--n",
            "20000",
            "--summary",
            "--seed",
            "3"
        ])
        .stdout
    );

    let out = fracbvp(&[
        "laplace",
        "--expr",
        "l-density",
        "--alpha",
        "0.5",
        "--at",
        "1",
        "--t",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let v: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    // λ^{-1/2} e^{-√λ} inverts to e^{-1/4}/√π at t = 1.
    assert!((v - (-0.25f64).exp() / std::f64::consts::PI.sqrt()).abs() < 1e-9, "{v}");
}

#[test]
fn threads_flag_is_accepted() {
    let out = fracbvp(&[
        "--threads",
        "2",
        "mc",
        "stable",
        "--alpha",
        "0.5",
        "--n",
        "5",
        "--summary",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&fracbvp(&["--threads", "0", "verify", "specfun"])), 2);
}
