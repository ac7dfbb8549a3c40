use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rose_cli::commands::{DEMO_LEXICON, MI_THRESHOLD};
use rose_core::signal::{synth_composite, HighFreqComponent, PacConfig, TravelingWave};

fn rose(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rose"));
    cmd.args(args).env_remove("ROSE_OUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("ROSE_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new(script: &str, extra_config: &str) -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("lexicon.json"), DEMO_LEXICON).unwrap();
        fs::write(dir.path().join("script.txt"), script).unwrap();
        let cfg = format!("lexicon = \"lexicon.json\"\nscript = \"script.txt\"\nseed = 11\n{extra_config}");
        fs::write(dir.path().join("config.toml"), cfg).unwrap();
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

const NP: &str = "select old\nselect dog\nmerge old dog\n";
const DEPTH3: &str = "select old\nselect dog\nselect chased\nselect cat\nmerge old dog\nmerge chased @0\nmerge cat @1\n";

#[test]
fn derive_prints_noun_phrase() {
    let f = Fixture::new(NP, "");
    let out = f.path("out");
    let o = rose(&["derive", "--script", p(&f.path("script.txt")), "--lexicon", p(&f.path("lexicon.json")), "--out", p(&out)], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let tree: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(tree["label"], "N");
    assert_eq!(tree["children"].as_array().unwrap().len(), 2);
    assert_eq!(fs::read(out.join("tree.json")).unwrap(), o.stdout);
    assert!(stderr(&o).contains("merge @0 = {old, dog} : N"));
}

#[test]
fn empty_script_is_rejected() {
    let f = Fixture::new("# nothing here\n", "");
    let o = rose(&["derive", "--script", p(&f.path("script.txt")), "--lexicon", p(&f.path("lexicon.json")), "--out", p(&f.path("out"))], None);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).trim(), "error[config]: empty derivation");
}

#[test]
fn unlabelable_or_bad_merge_exits_2() {
    let f = Fixture::new("select old\nmerge old old\n", "");
    let o = rose(&["derive", "--script", p(&f.path("script.txt")), "--lexicon", p(&f.path("lexicon.json")), "--out", p(&f.path("out"))], None);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error[config]: script line 2"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn derive_is_byte_identical_across_runs() {
    let f = Fixture::new(DEPTH3, "");
    let run = |name: &str| {
        let out = f.path(name);
        let o = rose(&["derive", "--script", p(&f.path("script.txt")), "--lexicon", p(&f.path("lexicon.json")), "--out", p(&out)], None);
        assert!(o.status.success());
        (o.stdout, fs::read(out.join("tree.json")).unwrap(), fs::read(out.join("derivation.log")).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn noiseless_roundtrip_of_depth_three_tree_is_exact() {
    let f = Fixture::new(DEPTH3, "");
    let out = f.path("rt");
    let o = rose(&["roundtrip", "--config", p(&f.path("config.toml")), "--out", p(&out)], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&out);
    assert_eq!(r["exact_match"], true);
    assert_eq!(r["per_node_category_accuracy"], 1.0);
    assert_eq!(r["decoded"], r["tree"]);
}

#[test]
fn mismatched_phase_code_fails_the_roundtrip() {
    let key = "[roundtrip.decode_phase_code]\namplitude = 1.0\nfrequency = 6.0\nmapping = { V = 0.0, A = 1.5707963267948966, P = 3.141592653589793, N = 4.71238898038469 }\n";
    let f = Fixture::new(DEPTH3, key);
    let out = f.path("rt");
    let o = rose(&["roundtrip", "--config", p(&f.path("config.toml")), "--out", p(&out)], None);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error[decode]: "));
    let r = report(&out);
    assert_eq!(r["exact_match"], false);
    assert!(r["per_node_category_accuracy"].as_f64().unwrap() < 1.0);
}

#[test]
fn report_matches_documented_schema() {
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    // one short noiseless run (no weights) and one long noisy run (weights)
    let short = Fixture::new(DEPTH3, "");
    let long = Fixture::new(DEPTH3, "[encoding]\nduration_per_node = 5.0\n[roundtrip]\nsnr_db = 15.0\n");
    for f in [&short, &long] {
        let out = f.path("rt");
        let o = rose(&["roundtrip", "--config", p(&f.path("config.toml")), "--out", p(&out)], None);
        assert!(o.status.success(), "{}", stderr(&o));
        let r = report(&out);
        let errors: Vec<String> = validator.iter_errors(&r).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{errors:?}");
    }
    assert!(report(&short.path("rt"))["weight_errors"].is_null());
    assert!(report(&long.path("rt"))["weight_errors"].is_array());
    // a report missing a required field is rejected
    let mut broken = report(&short.path("rt"));
    broken.as_object_mut().unwrap().remove("exact_match");
    assert!(!validator.is_valid(&broken));
}

#[test]
fn encode_then_decode_via_bundle_dir() {
    let f = Fixture::new(DEPTH3, "");
    let enc = f.path("enc");
    let o = rose(&["encode", "--config", p(&f.path("config.toml")), "--out", p(&enc)], None);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["lf.csv", "hf.csv", "spikes.csv", "schedule.json", "config.json"] {
        assert!(enc.join("bundle").join(name).is_file(), "{name}");
    }
    let dec = f.path("dec");
    let o = rose(&["decode", "--bundle", p(&enc.join("bundle")), "--lexicon", p(&f.path("lexicon.json")), "--out", p(&dec)], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(dec.join("decoded.json")).unwrap(), fs::read(enc.join("tree.json")).unwrap());
}

#[test]
fn decode_of_corrupted_bundle_exits_3() {
    let f = Fixture::new(DEPTH3, "");
    let enc = f.path("enc");
    assert!(rose(&["encode", "--config", p(&f.path("config.toml")), "--out", p(&enc)], None).status.success());
    // silence the lf trace
    let lf = enc.join("bundle").join("lf.csv");
    let text = fs::read_to_string(&lf).unwrap();
    let zeroed: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| if i == 0 { format!("{l}\n") } else { format!("{},0\n", l.split(',').next().unwrap()) })
        .collect();
    fs::write(&lf, zeroed).unwrap();
    let o = rose(&["decode", "--bundle", p(&enc.join("bundle")), "--lexicon", p(&f.path("lexicon.json")), "--out", p(&f.path("dec"))], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[decode]: ambiguous"), "{}", stderr(&o));
}

fn pac_csv(dir: &Path, name: &str, depth: f64) -> PathBuf {
    let wave = TravelingWave::new(1.0, 2.0, 0.0, 0.0).unwrap();
    let bank = [HighFreqComponent::new(1.0, depth, 60.0, 0.0).unwrap()];
    let tr = synth_composite(&bank, &wave, &PacConfig::new(0.0), 1000.0, 10.0, 0.0).unwrap();
    let path = dir.join(name);
    fs::write(&path, tr.to_csv()).unwrap();
    path
}

#[test]
fn analyze_reports_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let metrics = |trace: &Path, out: &Path| {
        let o = rose(&["analyze", "--trace", p(trace), "--out", p(out)], None);
        assert!(o.status.success(), "{}", stderr(&o));
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()
    };
    let flat = metrics(&pac_csv(dir.path(), "flat.csv", 0.0), &dir.path().join("a"));
    let mi = flat["trace"]["modulation_index"].as_f64().unwrap();
    assert!(mi < MI_THRESHOLD);
    assert_eq!(flat["trace"]["coupled"], false);
    let full = metrics(&pac_csv(dir.path(), "full.csv", 1.0), &dir.path().join("b"));
    assert_eq!(full["trace"]["coupled"], true);
}

#[test]
fn analyze_synchronized_phases() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("t,e_0,e_1,e_2,e_3\n");
    for k in 0..200 {
        let t = k as f64 * 0.01;
        let base = (TAU * 6.0 * t) % TAU;
        csv.push_str(&format!("{t},{base},{base},{base},{base}\n"));
    }
    let path = dir.path().join("phases.csv");
    fs::write(&path, csv).unwrap();
    let o = rose(&["analyze", "--phases", p(&path), "--out", p(&dir.path().join("o"))], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((m["phases"]["final_order_parameter"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn analyze_plots_are_well_formed_svg() {
    let dir = tempfile::tempdir().unwrap();
    let trace = pac_csv(dir.path(), "full.csv", 0.7);
    let out = dir.path().join("plots");
    let o = rose(&["analyze", "--trace", p(&trace), "--plot", "--out", p(&out)], None);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["trace.svg", "pac.svg"] {
        let text = fs::read_to_string(out.join(name)).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
    }
}

#[test]
fn analyze_rejects_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "t,value\n0,1\n0.001,oops\n").unwrap();
    let o = rose(&["analyze", "--trace", p(&path), "--out", p(&dir.path().join("o"))], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]: "));
}

#[test]
fn simulate_events_past_duration_are_rejected() {
    let f = Fixture::new(NP, "[sim]\nduration = 0.0\nonset = 0.0\n");
    let o = rose(&["simulate", "--config", p(&f.path("config.toml")), "--out", p(&f.path("s"))], None);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn simulate_zero_duration_gives_one_row() {
    let f = Fixture::new("select old\n", "[sim]\nduration = 0.0\nonset = 0.0\n");
    let out = f.path("s");
    let o = rose(&["simulate", "--config", p(&f.path("config.toml")), "--out", p(&out)], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn simulate_is_deterministic() {
    let f = Fixture::new(DEPTH3, "");
    let run = |name: &str| {
        let out = f.path(name);
        let o = rose(&["simulate", "--config", p(&f.path("config.toml")), "--out", p(&out)], None);
        assert!(o.status.success(), "{}", stderr(&o));
        (fs::read(out.join("trajectory.csv")).unwrap(), fs::read(out.join("run_report.json")).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn simulate_rejects_unstable_step() {
    let f = Fixture::new(DEPTH3, "[sim]\ndt = 0.01\nfrequency = 40.0\n");
    let o = rose(&["simulate", "--config", p(&f.path("config.toml")), "--out", p(&f.path("s"))], None);
    assert_eq!(o.status.code(), Some(4));
    let err = stderr(&o);
    assert!(err.starts_with("error[integration]: step size"), "{err}");
}

#[test]
fn output_dir_falls_back_to_env() {
    let f = Fixture::new(NP, "");
    let env_dir = f.path("from-env");
    let o = rose(&["derive", "--script", p(&f.path("script.txt")), "--lexicon", p(&f.path("lexicon.json"))], Some(&env_dir));
    assert!(o.status.success());
    assert!(env_dir.join("tree.json").is_file());
}

#[test]
fn bad_config_exits_2() {
    let f = Fixture::new(NP, "[encoding]\nsample_rate = 90.0\n");
    let o = rose(&["encode", "--config", p(&f.path("config.toml")), "--out", p(&f.path("e"))], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]: "));
    let o = rose(&["encode"], None);
    assert_eq!(o.status.code(), Some(2));
}
