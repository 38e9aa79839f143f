use std::path::PathBuf;
use std::process::{Command, Output};

fn relaycap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaycap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("relaycap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Value of a `key=value` line.
fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(relaycap(&["--help"]).status.code(), Some(0));
    assert_eq!(relaycap(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(relaycap(&["preset", "fig9"]).status.code(), Some(1));
    assert_eq!(
        relaycap(&["point", "--model", "general", "--set", "P1=10"])
            .status
            .code(),
        Some(1)
    );
    let bad_noise = [
        "sweep",
        "--model",
        "general",
        "--x",
        "snr_relay",
        "--range",
        "0:1:1",
        "--set",
        "P1=1",
        "--set",
        "P2=1",
        "--set",
        "N3=0",
        "--set",
        "Q=1",
    ];
    let out = relaycap(&bad_noise);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert_eq!(
        relaycap(&["preset", "fig3", "--range", "0:x:1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        relaycap(&["preset", "fig3", "--bounds", "nonsense"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn preset_csv_is_deterministic() {
    let a = relaycap(&["preset", "fig5a", "--range", "-10:10:2"]);
    let b = relaycap(&["preset", "fig5a", "--range", "-10:10:2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("x_dB,lb_hyper,ub_hyper,cutset,baseline_df")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0], -10.0 + 2.0 * k as f64);
        assert!(row[1] <= row[2] && row[2] <= row[3]);
    }
}

#[test]
fn flags_override_config_file() {
    let config = scratch("override.cfg");
    std::fs::write(
        &config,
        "# fig3 with a weaker state\nQ_dB = 0\nsweep.range = 0:4:2\n",
    )
    .unwrap();
    let path = config.to_str().unwrap();
    let from_file = relaycap(&[
        "preset",
        "fig3",
        "--bounds",
        "lb_input_description,baseline_df",
        "--config",
        path,
    ]);
    assert_eq!(
        from_file.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&from_file.stderr)
    );
    let text = stdout(&from_file);
    assert_eq!(text.lines().count(), 4);
    let flagged = relaycap(&[
        "preset",
        "fig3",
        "--bounds",
        "lb_input_description,baseline_df",
        "--config",
        path,
        "--range",
        "0:2:2",
        "--set",
        "Q_dB=30",
    ]);
    let flagged_text = stdout(&flagged);
    assert_eq!(flagged_text.lines().count(), 3);
    // The input-description rate ignores the state power; the state-as-noise baseline does not.
    let cells = |t: &str, row: usize| -> Vec<String> {
        t.lines()
            .nth(row)
            .unwrap()
            .split(',')
            .map(str::to_string)
            .collect()
    };
    assert_eq!(cells(&text, 1)[1], cells(&flagged_text, 1)[1]);
    assert_ne!(cells(&text, 1)[2], cells(&flagged_text, 1)[2]);
}

#[test]
fn point_reports_key_values() {
    let args = [
        "point", "--model", "general", "--bounds", "cutset", "--set", "P1=1", "--set", "P2=1",
        "--set", "N2=1", "--set", "N3=1", "--set", "Q=1",
    ];
    let out = relaycap(&args);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("model=general\nbound=cutset\n"));
    let rate = field(&text, "rate");
    assert!((rate - field(&text, "detail.relay").min(field(&text, "detail.mac"))).abs() < 1e-15);
    let out_file = scratch("point.txt");
    let mut with_file = args.to_vec();
    with_file.extend(["--out", out_file.to_str().unwrap()]);
    assert_eq!(relaycap(&with_file).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out_file).unwrap(), text);
}

const NOISELESS_SPLIT: &str = "channel
size S 1
size X1R 2
size X1D 2
size X2 2
size Y2 2
size Y3 2
end
state 0 1
kernel 0 0 0 0 0 0 1
kernel 0 0 0 1 0 1 1
kernel 0 0 1 0 0 0 1
kernel 0 0 1 1 0 1 1
kernel 0 1 0 0 1 0 1
kernel 0 1 0 1 1 1 1
kernel 0 1 1 0 1 0 1
kernel 0 1 1 1 1 1 1
";

#[test]
fn dm_search_then_eval() {
    let channel = scratch("noiseless.ch");
    let joint = scratch("best.joint");
    std::fs::write(&channel, NOISELESS_SPLIT).unwrap();
    let search = relaycap(&[
        "dm",
        "search",
        "--channel",
        channel.to_str().unwrap(),
        "--evaluator",
        "ub_hyper",
        "--restarts",
        "8",
        "--seed",
        "3",
        "--joint-out",
        joint.to_str().unwrap(),
    ]);
    assert_eq!(
        search.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&search.stderr)
    );
    let found = field(&stdout(&search), "rate");
    assert!((found - 1.0).abs() < 1e-4, "{found}");
    assert_eq!(field(&stdout(&search), "feasible_restarts"), 8.0);
    let eval = relaycap(&[
        "dm",
        "eval",
        "--joint",
        joint.to_str().unwrap(),
        "--evaluator",
        "ub_hyper",
    ]);
    assert_eq!(eval.status.code(), Some(0));
    assert!((field(&stdout(&eval), "rate") - found).abs() < 1e-12);
    let wrong = relaycap(&[
        "dm",
        "eval",
        "--joint",
        joint.to_str().unwrap(),
        "--evaluator",
        "lb_partial_df",
    ]);
    assert_eq!(wrong.status.code(), Some(1));
    let missing = relaycap(&[
        "dm",
        "eval",
        "--joint",
        "/nonexistent/joint",
        "--evaluator",
        "ub_hyper",
    ]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn verify_fails_at_impossible_tolerance() {
    let out = relaycap(&["verify", "--tol", "1e-15", "--points", "5", "--joints", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.contains(" FAIL")));
    assert!(text
        .trim_end()
        .lines()
        .last()
        .unwrap()
        .starts_with("checks="));
}
