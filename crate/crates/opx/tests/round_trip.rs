use opx::run;
use opx_core::detproc::GapQuery;
use opx_core::opcore::{compute_moments, MomentSequence, RecurrenceCoefficients, Weight};
use opx_core::painleve::{
    dp1_positive_solution, DP1Solution, LatticeFlow, OdeResidual, SystemResidual, WronskianIdentities,
};
use opx_core::rmt::{EigenvalueStats, EnsembleSpec};
use opx_core::Mp;
use serde::de::DeserializeOwned;
use serde_json::Value;

fn json(args: &[&str]) -> Value {
    let mut argv = vec!["opx", "--format", "json"];
    argv.extend_from_slice(args);
    let out = run(argv);
    assert_eq!(out.code, 0, "{}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

fn result<T: DeserializeOwned>(args: &[&str]) -> T {
    serde_json::from_value(json(args)["result"].clone()).unwrap()
}

#[test]
fn moments_round_trip_at_full_precision() {
    let seq: MomentSequence = result(&["moments", "--family", "laguerre", "--alpha", "0.3", "--count", "6"]);
    let direct = compute_moments(&Weight::laguerre(0.3).unwrap(), 6, 256).unwrap();
    assert_eq!(seq.values.len(), 6);
    assert_eq!(seq.weight_tag, direct.weight_tag);
    for (a, b) in seq.values.iter().zip(&direct.values) {
        let rel = ((a.clone() - b.clone()) / b.clone()).abs().to_f64();
        assert!(rel < 1e-70, "{rel}");
    }
}

#[test]
fn recurrence_round_trip() {
    let rec: RecurrenceCoefficients<Mp> = result(&["recurrence", "--family", "hermite", "--n", "4"]);
    assert_eq!(rec.b.len(), 4);
    for k in 1..4 {
        assert!((rec.a2(k).to_f64() - k as f64 / 2.0).abs() < 1e-60);
    }
}

#[test]
fn dp1_round_trip_equals_library() {
    let s: DP1Solution = result(&["dp1", "--n", "12"]);
    assert_eq!(s, dp1_positive_solution(0.0, 12, 1e-12).unwrap());
}

#[test]
fn painleve_results_round_trip() {
    let _: OdeResidual = result(&["ode", "--quantity", "p3-chen-its"]);
    let _: LatticeFlow = result(&["lattice", "--n", "3", "--steps", "2"]);
    let w: WronskianIdentities = result(&["wronskian", "--n", "2"]);
    assert!(w.gap < 1e-8);
    let s: SystemResidual = result(&["system", "--n", "4"]);
    assert_eq!(s.t, 1.0);
}

#[test]
fn detproc_and_rmt_round_trip() {
    let g: GapQuery = result(&["gap", "--n", "1", "--a", "0", "--b", "6"]);
    assert!((g.result - 0.5).abs() < 1e-6);
    let e: EigenvalueStats = result(&["rmt", "eigen-stats", "--samples", "4000", "--bins", "5"]);
    assert_eq!(e.counts.len(), 5);
    let v = json(&["rmt", "avg-char", "--samples", "2000"]);
    let spec_name = v["summary"]["ensemble"].as_str().unwrap();
    assert_eq!(spec_name, EnsembleSpec::Gue { n: 3 }.name());
}
