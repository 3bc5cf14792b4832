use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_affine-zeta"));
    c.env_remove("AFFINE_ZETA_MAX_DEGREE").env_remove("AFFINE_ZETA_MAX_ENUMERATION");
    c
}

fn job(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("jobs").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone()).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn column(recs: &[Value], key: &str) -> Vec<String> {
    recs.iter().map(|r| r[key].as_str().unwrap().to_string()).collect()
}

#[test]
fn count_job_power_map() {
    let out = run(&["--job", &job("count_power.json")]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs.len(), 8);
    assert!(recs.iter().all(|r| r["schema"] == "affine-zeta/1" && r["match"] == true));
    assert_eq!(column(&recs, "closed"), ["3", "3", "9", "7", "33", "9", "129", "87"]);
}

#[test]
fn count_additive_and_inseparable() {
    let out = run(&["count", "--family", "additive", "--p", "3", "--sigma", "[-1,1]", "--n-max", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(column(&recs, "closed"), ["4", "4", "28", "28"]);
    assert!(recs.iter().all(|r| r["match"] == true));

    let out = run(&["count", "--family", "power", "--p", "3", "--d", "3", "--n-max", "6"]);
    let want: Vec<String> = (1..=6).map(|n| (3u64.pow(n) + 1).to_string()).collect();
    assert_eq!(column(&records(&out), "closed"), want);
}

#[test]
fn zeta_power_map_has_no_guess() {
    let out = run(&["zeta", "--family", "power", "--p", "3", "--d", "2", "--terms", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &records(&out)[0];
    let c = r["coefficients"].as_array().unwrap();
    assert_eq!(c.len(), 31);
    assert_eq!(c[0], "1");
    assert!(c.iter().all(|x| x.as_str().unwrap().parse::<i128>().is_ok()));
    assert!(r["guess"].is_null());
}

#[test]
fn zeta_u_plus_phi_is_rational() {
    let out = run(&["zeta", "--family", "additive", "--p", "3", "--rational-function", "--sigma", "[[0,1],1]"]);
    let r = &records(&out)[0];
    assert_eq!(r["guess"]["closed_form"]["denominator"], serde_json::json!(["1", "-4", "3"]));
}

#[test]
fn verdict_job_additive() {
    let out = run(&["--job", &job("verdict_additive.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &records(&out)[0];
    assert_eq!(r["outcome"], "transcendental_evidence");
    assert_eq!(r["ell"], "29");
    let certs = r["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 3);
    assert!(certs.iter().all(|c| c["verified"] == true && c["period"].is_null()));
}

#[test]
fn christol_job_powers_of_two() {
    let out = run(&["--job", &job("christol_powers_of_two.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("[christol]\n"));
    let out = run(&["automata", "--job", &job("christol_powers_of_two.json"), "--output", "/dev/stdout"]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&[
        "automata", "--kind", "christol", "--p", "2", "--poly", "[[0,1],[1],[1]]", "--root-prefix", "[0,1]", "--terms", "64",
    ]);
    let recs = records(&out);
    let y = column_array(&recs[0], "coefficients");
    for (n, c) in y.iter().enumerate() {
        assert_eq!(c == "1", n > 0 && n.is_power_of_two(), "coefficient {n}");
    }
    assert_eq!(recs[0]["resubstitution_vanishes"], true);
    assert_eq!(recs[1]["classification"], "closed");
}

fn column_array(r: &Value, key: &str) -> Vec<String> {
    r[key].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

#[test]
fn census_and_oracle_on_a_raw_map() {
    let out = run(&["oracle", "--family", "raw", "--p", "3", "--num", "[1,0,1]", "--n-max", "3"]);
    assert_eq!(column(&records(&out), "per_n"), ["2", "4", "5"]);
    let out = run(&["census", "--family", "raw", "--p", "3", "--num", "[1,0,1]", "--max-k", "3", "--n-max", "3"]);
    let recs = records(&out);
    assert_eq!(column(&recs, "cycles"), ["2", "0", "1"]);
    assert_eq!(column(&recs, "points_dividing"), ["2", "2", "5"]);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["count", "--family", "power", "--p", "4", "--d", "2"]).status.code(), Some(2));
    assert_eq!(run(&["count", "--family", "power", "--d", "2"]).status.code(), Some(2));
    assert_eq!(run(&["--job", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(run(&["zeta", "--job", &job("count_power.json")]).status.code(), Some(2));

    let capped = |args: &[&str]| bin().env("AFFINE_ZETA_MAX_DEGREE", "10").args(args).output().unwrap();
    assert_eq!(capped(&["oracle", "--family", "power", "--p", "3", "--d", "2", "--n-max", "5"]).status.code(), Some(3));
    let out = capped(&["count", "--family", "power", "--p", "3", "--d", "2", "--n-max", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(records(&out)[3]["oracle"].is_null());
    let bad = bin().env("AFFINE_ZETA_MAX_DEGREE", "lots").args(["count", "--family", "power", "--p", "3", "--d", "2"]).output();
    assert_eq!(bad.unwrap().status.code(), Some(2));

    let out = run(&[
        "count", "--family", "lattes-generic-j", "--p", "5", "--sigma", "2", "--curve", "1,1", "--kernel", "unsquared", "--n-max", "2",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(records(&out)[0]["match"], false);
}

#[test]
fn flags_compile_to_the_same_job() {
    let args = ["count", "--family", "chebyshev", "--p", "5", "--d", "3", "--n-max", "5"];
    let printed = run(&[&args[..], &["--print-job"]].concat());
    assert_eq!(printed.status.code(), Some(0));
    let path = std::env::temp_dir().join(format!("affine-zeta-job-{}.json", std::process::id()));
    std::fs::write(&path, &printed.stdout).unwrap();
    let from_file = run(&["--job", path.to_str().unwrap()]);
    std::fs::remove_file(&path).unwrap();
    let from_flags = run(&args);
    assert_eq!(from_file.stdout, from_flags.stdout);
    assert_eq!(records(&from_flags).len(), 5);
}

#[test]
fn output_is_deterministic() {
    let a = run(&["--job", &job("verdict_additive.json")]);
    let b = run(&["--job", &job("verdict_additive.json")]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!String::from_utf8(a.stdout).unwrap().contains('.'));
}

#[test]
fn table_output() {
    let out = run(&["count", "--family", "power", "--p", "3", "--d", "2", "--n-max", "2", "--table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "[count]");
    assert!(lines[1].starts_with("map") && lines[1].ends_with("match"));
    assert_eq!(lines.len(), 4);
}
