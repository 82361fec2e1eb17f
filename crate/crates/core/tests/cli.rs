use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (Value, i32, String) {
    run_env(args, None)
}

fn run_env(args: &[&str], precision: Option<&str>) -> (Value, i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gross-tower"));
    cmd.args(args).env_remove("GROSS_TOWER_PRECISION");
    if let Some(p) = precision {
        cmd.env("GROSS_TOWER_PRECISION", p);
    }
    let out = cmd.output().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (v, out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn classset_small_discriminants() {
    let (v, code, _) = run(&["classset", "--nminus", "2", "--nplus", "1", "--p", "5", "--m", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["levels"][0]["h"], 1);
    assert_eq!(v["results"]["levels"][0]["mass"], "1/12");
    let (v, code, _) = run(&["classset", "--nminus", "11", "--nplus", "1", "--p", "5", "--m", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["levels"][0]["h"], 2);
    assert_eq!(v["schema"], "gross-tower/1");
}

#[test]
fn classset_rejects_even_parity() {
    let (v, code, err) = run(&["classset", "--nminus", "15", "--p", "7"]);
    assert_eq!(code, 2);
    assert!(err.contains("even parity"), "{err}");
    assert_eq!(v["error"]["kind"], "invalid");
}

#[test]
fn hecke_examples() {
    let (v, code, _) = run(&["hecke", "--nminus", "11", "--m", "0", "--op", "T", "--param", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["eigenvalues"], serde_json::json!([-2, 3]));

    let (v, code, _) = run(&["hecke", "--nminus", "2", "--m", "2", "--op", "U"]);
    assert_eq!(code, 0);
    assert!(v["results"]["column_sums"].as_array().unwrap().iter().all(|s| s == 5));
    assert!(v["results"]["commutativity"].as_array().unwrap().iter().all(|c| c["commutes"] == true));

    let (v, code, _) = run(&["hecke", "--nminus", "2", "--m", "2", "--op", "diamond", "--param", "1"]);
    assert_eq!(code, 0);
    let m = v["results"]["matrix"].as_array().unwrap();
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.as_array().unwrap().iter().enumerate() {
            assert_eq!(x.as_i64().unwrap(), (i == j) as i64);
        }
    }

    let (_, code, _) = run(&["hecke", "--nminus", "2", "--m", "1", "--op", "T", "--param", "5"]);
    assert_eq!(code, 2);
}

#[test]
fn heegner_desk_family() {
    let (v, code, _) = run(&["heegner", "--nminus", "2", "--dk", "-11", "--mmax", "2"]);
    assert_eq!(code, 0);
    let certs = v["results"]["certificates"].as_array().unwrap();
    let base: Vec<&Value> = certs.iter().filter(|c| c["base_conductor"] == 1).collect();
    assert_eq!(base.len(), 3);
    assert!(certs.iter().all(|c| c["optimal"] == true && c["p_local"] == true && c["precision"].is_u64()));

    let (_, code, err) = run(&["heegner", "--nminus", "2", "--dk", "-11", "--c", "11"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn verify_suites() {
    let (v, code, _) = run(&["verify", "--nminus", "2", "--dk", "-11", "--mmax", "2", "--suite", "tower"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["tower"]["holds"], true);

    let (v, code, _) = run(&["verify", "--nminus", "2", "--dk", "-11", "--mmax", "1", "--suite", "galois"]);
    assert_eq!(code, 0);
    let dia = v["results"]["galois"]["diamond"].as_array().unwrap();
    assert!(!dia.is_empty() && dia.iter().all(|d| d["ok"] == true));
    assert_eq!(v["results"]["galois"]["freeness"]["group_order"], 8);

    let (v, code, _) = run(&["verify", "--nminus", "2", "--dk", "-11", "--suite", "none"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["vacuous"], true);

    let (_, code, _) = run(&["verify", "--nminus", "2", "--dk", "-11", "--suite", "bogus"]);
    assert_eq!(code, 2);
}

#[test]
fn theta_examples() {
    let base = ["theta", "--nminus", "11", "--dk", "-3", "--nmax", "1"];
    let (v, code, _) = run(&[&base[..], &["--eigensystem", "2:-2,5:1"]].concat());
    assert_eq!(code, 0);
    assert_eq!(v["results"]["compatibility"], serde_json::json!([true]));
    assert!(v["results"]["L_star_invariant"].as_array().unwrap().iter().all(|x| x == true));
    assert_eq!(v["results"]["rescaling_audit"], true);

    let (_, code, err) = run(&[&base[..], &["--eigensystem", "2:-2,5:1", "--rmax", "1"]].concat());
    assert_eq!(code, 2);
    assert!(err.contains("d(n) = 2"), "{err}");

    let (v, code, _) = run(&[&base[..], &["--eigensystem", "2:4"]].concat());
    assert_eq!(code, 3);
    assert_eq!(v["error"]["kind"], "nonexistent");
}

#[test]
fn precision_from_environment_and_flag() {
    let (v, code, _) = run_env(&["classset", "--nminus", "2", "--m", "1"], Some("12"));
    assert_eq!(code, 0);
    assert_eq!(v["precision"]["requested"], 12);
    let (v, _, _) = run_env(&["classset", "--nminus", "2", "--m", "1", "--precision", "9"], Some("12"));
    assert_eq!(v["precision"]["requested"], 9);
    let (_, code, _) = run_env(&["classset", "--nminus", "2"], Some("lots"));
    assert_eq!(code, 2);
}

#[test]
fn out_file_and_timing() {
    let path = std::env::temp_dir().join(format!("gross_tower_cli_{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let (_, code, _) = run(&["classset", "--nminus", "2", "--out", p]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let _ = std::fs::remove_file(&path);
    assert_eq!(v["results"]["levels"][0]["h"], 1);
    assert!(v.get("timing").is_none());
    let (v, _, _) = run(&["classset", "--nminus", "2", "--timing"]);
    assert!(v["timing"].is_object());
}

#[test]
fn selftest_passes() {
    let (v, code, _) = run(&["selftest"]);
    assert_eq!(code, 0);
    assert!(v["results"]["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}
