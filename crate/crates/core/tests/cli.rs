//! End-to-end checks of the `regnorm` binary: exit codes, determinism and
//! structured-output round trips.

use std::process::{Command, Output};

use serde::de::DeserializeOwned;
use serde::Serialize;

use regnorm::cli::{round_value, GammaStarOutput, InvertOutput, KappaOutput};
use regnorm::norm_core::HuberReport;
use regnorm::sim::SimReport;
use regnorm::smoothness::{CharReport, SmoothnessReport, TraceReport};
use regnorm::TailResult64;

fn regnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regnorm")).args(args).output().unwrap()
}

fn structured(args: &[&str]) -> String {
    let mut full = vec!["--format", "structured"];
    full.extend_from_slice(args);
    let out = regnorm(&full);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Parses the document into its schema type and re-emits it.
fn roundtrip<T: DeserializeOwned + Serialize>(text: &str) {
    let parsed: T = serde_json::from_str(text).unwrap();
    let value = round_value(serde_json::to_value(&parsed).unwrap());
    let again = serde_json::to_string_pretty(&value).unwrap() + "\n";
    assert_eq!(again, text);
}

#[test]
fn structured_outputs_roundtrip() {
    roundtrip::<KappaOutput>(&structured(&["kappa", "--space", "schatten:m=20,n=30,p=6"]));
    roundtrip::<KappaOutput>(&structured(&["kappa", "--space", "block:p=inf[4*euclidean:n=3]"]));
    roundtrip::<GammaStarOutput>(&structured(&["gamma-star", "--alpha", "1.5", "--sigma", "const:1x4"]));
    roundtrip::<GammaStarOutput>(&structured(&["gamma-star", "--alpha", "2", "--sigma", "const:1x4"]));
    roundtrip::<TailResult64>(&structured(&[
        "bound", "--variant", "regular_i", "--alpha", "1.5", "--kappa", "2", "--sigma", "const:0.5x30", "--gamma", "40",
    ]));
    roundtrip::<Vec<TailResult64>>(&structured(&[
        "bound", "--variant", "smooth_ii", "--kappa", "3", "--sigma", "const:1x9", "--gamma", "0,1,2",
    ]));
    roundtrip::<InvertOutput>(&structured(&[
        "invert", "--variant", "smooth_i", "--alpha", "1.25", "--kappa", "1", "--sigma", "const:1x16", "--eps", "0.01",
    ]));
    roundtrip::<SmoothnessReport>(&structured(&["verify-smooth", "--space", "lp:n=10,p=4", "--trials", "2000"]));
    roundtrip::<CharReport>(&structured(&["char-check", "--space", "lp:n=20,p=3", "--kappa", "1.5", "--trials", "2000"]));
    roundtrip::<TraceReport>(&structured(&["trace-check", "--function", "quartic", "--trials", "50"]));
    roundtrip::<HuberReport>(&structured(&["huber-check", "--space", "lp:n=4,p=inf", "--trials", "500"]));
    roundtrip::<SimReport>(&structured(&[
        "simulate", "--scheme", "bounded-sphere:sigma=3", "--space", "lp:n=10,p=4", "--N", "16", "--trials", "500",
    ]));
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let args = ["--format", "structured", "simulate", "--scheme", "gaussian-iso:n=5", "--N", "32", "--trials", "3000", "--seed", "17"];
    let a = regnorm(&args);
    let b = regnorm(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("\"seed\": 17"));
    let mut other = args;
    other[10] = "18";
    assert_ne!(regnorm(&other).stdout, a.stdout);
}

#[test]
fn exit_codes_and_diagnostics() {
    for args in [
        &["kappa", "--space"][..],
        &["kappa", "--space", "lp:n=3,p=4", "--verbose"],
        &["bound", "--variant", "nope", "--kappa", "1", "--sigma", "const:1x4", "--gamma", "1"],
        &["kappa", "--space", "lp:n=0,p=4"],
        &["simulate", "--scheme", "gaussian-iso:n=3", "--N", "4", "--trials", "10", "--variant", "regular_iii"],
        &["simulate", "--scheme", "rademacher-basis:n=3", "--N", "4", "--trials", "10"],
        &["--format", "xml", "kappa", "--space", "euclidean:n=2"],
    ] {
        let out = regnorm(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
    }
    assert_eq!(regnorm(&["--help"]).status.code(), Some(0));
}

#[test]
fn simulate_csv_has_one_row_per_gamma() {
    let out = regnorm(&[
        "--format", "csv", "simulate", "--scheme", "fixed-direction:sigma=1", "--space", "euclidean:n=1", "--N", "64",
        "--trials", "2000", "--gammas", "0.5,2", "--variant", "smooth_iii",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "gamma,threshold,hits,trials,freq,freq_upper_conf,bound,regime");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("2,24,"));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("elapsed"));
}
