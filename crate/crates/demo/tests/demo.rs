use serde_json::Value;

use rose_demo::{kuramoto_json, pac_json, roundtrip_json};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn coupling_strength_tracks_depth() {
    let flat = parse(pac_json(0.0, 0.0, 4.0, 60.0));
    let full = parse(pac_json(1.0, 0.0, 4.0, 60.0));
    let mi = |v: &Value| v["modulation_index"].as_f64().unwrap();
    assert!(mi(&flat) < 0.005, "{}", mi(&flat));
    assert!(mi(&full) > 0.05, "{}", mi(&full));
    assert_eq!(full["mean_amplitude"].as_array().unwrap().len(), 18);
}

#[test]
fn preferred_phase_is_recovered() {
    let v = parse(pac_json(0.8, 2.0, 4.0, 60.0));
    let got = v["preferred_phase"].as_f64().unwrap();
    assert!(rose_core::circular_distance(got, 2.0) < 0.05, "{got}");
}

#[test]
fn strong_coupling_synchronizes() {
    let weak = parse(kuramoto_json(20, 0.0, 0.5, 5.0, 3));
    let strong = parse(kuramoto_json(20, 20.0, 0.5, 5.0, 3));
    let r = |v: &Value| v["final_order_parameter"].as_f64().unwrap();
    assert!(r(&strong) > 0.95, "{}", r(&strong));
    assert!(r(&weak) < r(&strong));
    assert!(strong["order_parameter"].as_array().unwrap().len() <= 1500);
}

#[test]
fn kuramoto_rejects_bad_sizes() {
    assert!(parse(kuramoto_json(1, 1.0, 0.1, 1.0, 0))["error"].is_string());
    assert!(parse(kuramoto_json(10, 1.0, 0.1, 0.0, 0))["error"].is_string());
}

const SCRIPT: &str = "select old\nselect dog\nselect chased\nmerge old dog\nmerge chased @0\n";

#[test]
fn noiseless_roundtrip_is_exact() {
    let v = parse(roundtrip_json(SCRIPT, -1.0, 5));
    assert_eq!(v["exact_match"], true);
    assert_eq!(v["decoded"], v["tree"]);
    assert_eq!(v["slots"].as_array().unwrap().len(), 5);
    assert_eq!(v["bracketed"], "{chased {dog old}}");
}

#[test]
fn bad_script_reports_error() {
    let v = parse(roundtrip_json("select unicorn\n", 10.0, 0));
    assert!(v["error"].as_str().unwrap().contains("unicorn"));
}

#[test]
fn noise_is_seeded() {
    assert_eq!(
        roundtrip_json(SCRIPT, 0.0, 9),
        roundtrip_json(SCRIPT, 0.0, 9)
    );
}
