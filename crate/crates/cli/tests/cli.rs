use std::process::Command;

use serde_json::Value;

fn barnesq(args: &[&str]) -> (i32, String, String) {
    barnesq_env(args, &[])
}

fn barnesq_env(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_barnesq"));
    cmd.args(args).env_remove("BARNESQ_WORK_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).expect("valid JSON")
}

fn re(v: &Value) -> f64 {
    v["value"]["re"].to_string().parse().unwrap()
}

#[test]
fn first_q_euler_number() {
    let (code, out, _) = barnesq(&["eval", "--family", "q-euler", "--n", "1", "--q", "0.5", "--x", "0"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["family"], "q-euler");
    assert_eq!(v["method"], "CLOSED");
    assert!((re(&v) + 2.0 / 3.0).abs() < 1e-15);
    // fixed key order
    let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    assert_eq!(&keys[..3], ["family", "params", "value"]);
    assert!(keys.contains(&"certifiedError".to_string()) && keys.contains(&"termsUsed".to_string()));
}

#[test]
fn basel_sum() {
    let (code, out, _) = barnesq(&["eval", "--family", "barnes-classical", "--s", "2", "--w", "1", "--a", "1"]);
    assert_eq!(code, 0);
    assert!((re(&json(&out)) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-8);
}

#[test]
fn interpolation_suite_passes() {
    let (code, out, _) = barnesq(&["verify", "--suite", "interpolation", "--n-max", "4"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["passed"], true);
    let worst: f64 = v["worst"]["residual"].to_string().parse().unwrap();
    assert!(worst < 1e-6);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["eval", "--family", "q-zeta", "--s", "2.5", "--q", "0.3", "--x", "1", "--w", "1,2", "--a", "1,1"];
    let (_, a, _) = barnesq(&args);
    let (_, b, _) = barnesq(&args);
    assert_eq!(a, b);
    // 17 significant digits
    let v = json(&a);
    let text = v["value"]["re"].to_string();
    let mantissa = text.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{text}");
}

#[test]
fn rational_and_padic_backends() {
    let (code, out, _) =
        barnesq(&["eval", "--family", "q-euler", "--n", "1", "--q", "1/2", "--x", "0", "--backend", "rational"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["value"]["num"].to_string(), "-2");
    assert_eq!(v["value"]["den"].to_string(), "3");
    assert_eq!(v["method"], "EXACT");

    let common = [
        "eval",
        "--family",
        "q-euler-hr",
        "--h",
        "2",
        "--r",
        "2",
        "--n",
        "2",
        "--q",
        "4",
        "--x",
        "1",
        "--backend",
        "padic",
        "--p",
        "3",
        "--K",
        "6",
    ];
    let (code, closed, _) = barnesq(&common);
    assert_eq!(code, 0);
    let mut with_integral = common.to_vec();
    with_integral.extend(["--method", "integral"]);
    let (code, integral, _) = barnesq(&with_integral);
    assert_eq!(code, 0);
    let (c, i) = (json(&closed), json(&integral));
    assert_eq!(c["value"], i["value"]);
    assert_eq!(c["value"]["p"], 3);
    assert_eq!(c["value"]["K"], 6);
    assert_eq!(c["value"]["residue"].as_array().unwrap().len(), 6);
    assert_eq!(i["method"], "PADIC_INTEGRAL");
}

#[test]
fn characters_by_index_and_by_values_agree() {
    let base = ["eval", "--family", "q-euler", "--n", "2", "--q", "0.5", "--x", "1"];
    let mut a = base.to_vec();
    a.extend(["--chi", "3:1"]);
    let mut b = base.to_vec();
    b.extend(["--chi-values", "0,1,-1"]);
    let (va, vb) = (json(&barnesq(&a).1), json(&barnesq(&b).1));
    assert_eq!(va["value"], vb["value"]);
}

#[test]
fn table_emits_csv_with_header() {
    let (code, out, _) = barnesq(&[
        "table",
        "--family",
        "bernoulli-multi",
        "--x",
        "1/2",
        "--a",
        "1,2",
        "--range",
        "0:4",
        "--backend",
        "rational",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines[0], "n,num,den,method,certifiedError,errorEstimate,termsUsed,error");
    assert_eq!(lines.len(), 6);
    assert!(lines[3].starts_with("2,7,24,EXACT"));
}

#[test]
fn zeta_command_with_mellin_check() {
    let (code, out, _) =
        barnesq(&["zeta", "--s", "3", "--q", "0.5", "--x", "1", "--w", "1,2", "--a", "1,1", "--mellin"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["family"], "q-zeta");
    assert_eq!(v["mellin"]["passed"], true);
}

#[test]
fn negative_integers_go_through_bernoulli_values() {
    let (code, out, _) = barnesq(&["zeta", "--s", "-1", "--w", "1", "--a", "1", "--backend", "rational"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["method"], "BERNOULLI");
    assert_eq!(v["value"]["num"].to_string(), "-1");
    assert_eq!(v["value"]["den"].to_string(), "12");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(barnesq(&["eval", "--family", "nope", "--n", "1"]).0, 2);
    assert_eq!(barnesq(&["eval", "--family", "q-euler", "--q", "0.5"]).0, 2);
    assert_eq!(barnesq(&["eval", "--family", "q-l", "--s", "2", "--q", "0.5"]).0, 2);
    assert_eq!(barnesq(&["eval", "--family", "q-zeta", "--s", "2", "--q", "0.5", "--backend", "padic"]).0, 2);
    assert_eq!(barnesq(&["verify", "--suite", "everything"]).0, 2);
}

#[test]
fn computation_errors_exit_1_and_name_the_error() {
    let (code, out, _) = barnesq(&[
        "eval",
        "--family",
        "q-euler-hr",
        "--h",
        "-1",
        "--r",
        "2",
        "--n",
        "2",
        "--q",
        "0.5",
        "--x",
        "1",
        "--method",
        "series",
    ]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["error"]["name"], "NotSummable");
}

#[test]
fn work_budget_from_environment() {
    let args = ["eval", "--family", "q-zeta", "--s", "2", "--q", "0.5", "--x", "1", "--w", "1", "--a", "1"];
    assert_eq!(barnesq(&args).0, 0);
    let (code, out, _) = barnesq_env(&args, &[("BARNESQ_WORK_BUDGET", "10")]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["error"]["name"], "WorkBoundExceeded");
}

#[test]
fn config_file_overrides_defaults() {
    let path = std::env::temp_dir().join(format!("barnesq-test-{}.conf", std::process::id()));
    std::fs::write(&path, "# tiny budget\nwork_budget = 5\n").unwrap();
    let p = path.to_str().unwrap();
    let (code, out, _) = barnesq(&[
        "--config", p, "eval", "--family", "q-zeta", "--s", "2", "--q", "0.5", "--x", "1", "--w", "1", "--a", "1",
    ]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["error"]["name"], "WorkBoundExceeded");
    std::fs::write(&path, "bogus = 1\n").unwrap();
    assert_eq!(barnesq(&["--config", p, "verify", "--suite", "mellin"]).0, 2);
    std::fs::remove_file(&path).ok();
}

#[test]
fn text_output() {
    let (code, out, _) = barnesq(&["verify", "--suite", "mellin", "--output", "text"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("suite mellin: PASS"));
}
