use std::process::{Command, Output};

use darboux_core::elliptic::{jacobi, JacobiCode, C64};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_darboux")).args(args).output().expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

const SN_CHANNEL: [&str; 10] = ["--k", "0.6", "--xi", "0", "--eta", "-1", "--mu", "-1", "--nu", "1"];

#[test]
fn sn_channel_matches_sn() {
    let mut args = SN_CHANNEL.to_vec();
    args.extend(["--h", "1.36", "eval", "--range", "0.1:1.5:15"]);
    let out = run(&args);
    assert!(out.status.success());
    let recs = records(&out);
    assert_eq!(recs.len(), 15);
    for r in recs {
        let u = C64::new(num(&r, "u_re"), num(&r, "u_im"));
        let sn = jacobi(JacobiCode::Sn, u, C64::new(0.6, 0.0)).unwrap();
        assert!((C64::new(num(&r, "y_re"), num(&r, "y_im")) - sn).norm() <= 1e-8, "{r}");
    }
}

#[test]
fn value_at_origin_is_zero() {
    let out = run(&["--nu", "0.3", "--h", "1", "eval", "--u", "0"]);
    assert!(out.status.success());
    let r = &records(&out)[0];
    assert_eq!((num(r, "y_re"), num(r, "y_im")), (0.0, 0.0));
}

#[test]
fn out_of_domain_point_exits_2_without_output() {
    let out = run(&["--nu", "0.3", "--h", "1", "eval", "--u", "0.2", "--u", "0.5+1.5i"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("convergence radius"));
}

#[test]
fn malformed_input_exits_2() {
    assert_eq!(run(&["--k", "banana", "eval", "--u", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["--k", "1", "eval", "--u", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["--nu", "0.3", "--h", "1", "--trunc", "4", "eval", "--u", "0.1"]).status.code(), Some(2));
}

#[test]
fn polynomial_eigenvalues() {
    let out = run(&["--nu", "3", "eigen", "--mode", "polynomial"]);
    assert!(out.status.success());
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    assert!((num(&recs[0], "h_re") - 4.0 * 1.36).abs() < 1e-12);
    let mut args = SN_CHANNEL.to_vec();
    args.extend(["eigen", "--mode", "polynomial"]);
    let recs = records(&run(&args));
    assert!((num(&recs[0], "h_re") - 1.36).abs() < 1e-12);
}

#[test]
fn no_termination_exits_3() {
    let out = run(&["--xi", "1", "--eta", "1", "eigen", "--mode", "polynomial"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn function_mode_finds_the_perron_root() {
    let out = run(&["--nu", "1", "--region", "0:10", "eigen", "--mode", "function"]);
    assert!(out.status.success());
    let recs = records(&out);
    assert!(!recs.is_empty());
    assert!((num(&recs[0], "h_re") - 3.606652280861).abs() < 1e-9);
}

#[test]
fn catalog_lists_192_in_8_groups() {
    let out = run(&["catalog", "list"]);
    let recs = records(&out);
    assert_eq!(recs.len(), 192);
    let mut counts = std::collections::BTreeMap::new();
    for r in &recs {
        *counts.entry(r["group"].as_str().unwrap().to_string()).or_insert(0) += 1;
    }
    assert_eq!(counts.len(), 8);
    assert!(counts.values().all(|&n| n == 24));
}

#[test]
fn catalog_verify_passes_at_an_eigenvalue() {
    let out = run(&["--nu", "3", "--h", "5.44", "catalog", "verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = records(&out);
    assert_eq!(recs.len(), 24);
    assert!(recs.iter().all(|r| num(r, "residual") <= 1e-6), "{recs:?}");
}

#[test]
fn transform_records() {
    let base = ["--xi", "0.1", "--eta", "0.2", "--mu", "0.3", "--nu", "0.4", "--h", "1"];
    let with = |el: &str| {
        let mut a = base.to_vec();
        a.extend(["transform", "--element", el]);
        records(&run(&a)).remove(0)
    };
    let c0 = with("C0");
    assert_eq!(c0["sigma"], "(eta mu)");
    assert!((num(&c0, "h_re") - 1.0 / 0.36).abs() < 1e-12);
    assert!((num(&c0, "kappa_re") - 1.0 / 0.6).abs() < 1e-15);
    assert_eq!((num(&c0, "eta_re"), num(&c0, "mu_re")), (0.3, 0.2));
    let i0 = with("I0");
    assert_eq!((num(&i0, "xi_re"), num(&i0, "h_re"), num(&i0, "kappa_re")), (0.1, 1.0, 0.6));
    let b0 = with("B0");
    let casimir: f64 = [0.1f64, 0.2, 0.3, 0.4].iter().map(|g| g * (g + 1.0)).sum();
    assert!((num(&b0, "h_re") - (casimir - 1.0)).abs() < 1e-12);
    assert!((num(&b0, "kappa_re") - 0.8).abs() < 1e-15);
}

#[test]
fn identities_pass_on_frozen_and_fail_on_transcribed() {
    let out = run(&["identities"]);
    assert!(out.status.success());
    assert!(records(&out).iter().all(|r| r["pass"] == true));
    let out = run(&["identities", "--transcribed"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(records(&out).iter().any(|r| r["pass"] == false));
}

#[test]
fn lambda_at_i() {
    let r = records(&run(&["lambda", "--tau", "i"])).remove(0);
    assert!((num(&r, "lambda_re") - 0.5).abs() < 1e-14);
}

#[test]
fn square_lattice_evalues() {
    let r = records(&run(&["--k", "0.7071067811865476", "weierstrass", "evalues"])).remove(0);
    assert!((num(&r, "e1_re") - 0.5).abs() < 1e-12);
    assert!(num(&r, "e2_re").abs() < 1e-12);
    assert!((num(&r, "e3_re") + 0.5).abs() < 1e-12);
}

#[test]
fn adjudication_check_agrees_with_frozen_data() {
    assert!(run(&["verify", "adjudicate", "--check"]).status.success());
}

#[test]
fn every_record_carries_the_variant() {
    for args in [
        vec!["--variant", "paper", "--nu", "3", "eigen", "--mode", "polynomial"],
        vec!["--variant", "paper", "catalog", "list"],
        vec!["--variant", "paper", "lambda", "--tau", "i"],
    ] {
        let recs = records(&run(&args));
        assert!(!recs.is_empty());
        for r in recs {
            assert_eq!(r.as_object().unwrap().keys().next().unwrap(), "variant");
            assert_eq!(r["variant"], "paper");
        }
    }
    let r = records(&run(&["--variant", "paper", "--nu", "3", "eigen", "--mode", "polynomial"])).remove(0);
    assert!((num(&r, "h_re") - 3.0 * 1.36).abs() < 1e-12);
}

#[test]
fn csv_output_has_a_header_and_one_row_per_point() {
    let mut args = SN_CHANNEL.to_vec();
    args.extend(["--h", "1.36", "--format", "csv", "eval", "--u", "0.3", "--u", "0.6"]);
    let out = run(&args);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "variant");
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    let y = headers.iter().position(|h| h == "y_re").unwrap();
    let sn = jacobi(JacobiCode::Sn, C64::new(0.3, 0.0), C64::new(0.6, 0.0)).unwrap();
    assert!((rows[0][y].parse::<f64>().unwrap() - sn.re).abs() < 1e-12);
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        vec!["catalog", "verify"],
        vec!["--nu", "1", "--region", "0:10", "eigen", "--mode", "function"],
        vec!["verify", "lvariant"],
    ] {
        let mut full = vec!["--nu", "3", "--h", "5.44"];
        full.extend(args);
        let (a, b) = (run(&full), run(&full));
        assert_eq!(a.stdout, b.stdout, "{full:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn lvariant_evidence_matches_versioned_file() {
    let out = run(&["verify", "lvariant"]);
    assert!(out.status.success());
    let stored = std::fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/evidence/lvariant.jsonl")).unwrap();
    assert_eq!(out.stdout, stored);
}
