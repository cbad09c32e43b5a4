use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cat0vis(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cat0vis"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn demo_t4_writes_every_table_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("demo");
    let o = cat0vis(&["demo-t4", "--pairs", "200", "--points", "200"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["example1_fit.json", "nonvisual.csv", "nonqs.csv", "perfect.json", "verdicts.json", "config.toml"] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    let m = manifest(&out);
    assert_eq!(m["pass"], true);
    assert_eq!(m["verdicts"].as_object().unwrap().len(), 4);
    let nonvisual = fs::read_to_string(out.join("nonvisual.csv")).unwrap();
    assert_eq!(nonvisual.lines().next(), Some("n,branch,d_a,product,growth"));
    assert_eq!(nonvisual.lines().count(), 31);
    let fit: Value = serde_json::from_str(&fs::read_to_string(out.join("example1_fit.json")).unwrap()).unwrap();
    assert_eq!(fit["k1"]["exact"], "2");
    assert_eq!(fit["k2"]["exact"], "2");
    // no temporary files left behind
    assert!(fs::read_dir(&out).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn manifest_hashes_match_the_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fit");
    let o = cat0vis(&["visual-fit", "--pairs", "50"], &out);
    assert_eq!(o.status.code(), Some(0));
    let m = manifest(&out);
    for (name, hash) in m["outputs"].as_object().unwrap() {
        let bytes = fs::read(out.join(name)).unwrap();
        let digest: String = sha2_hex(&bytes);
        assert_eq!(hash.as_str().unwrap(), digest, "{name}");
    }
    assert_eq!(m["config_sha256"], m["outputs"]["config.toml"]);
}

fn sha2_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn identical_metrics_compare_without_violations() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cmp");
    let o = cat0vis(
        &["compare", "--space", "euclidean:2", "--metric", "d_a:1.5", "--target", "d_a:1.5", "--triples", "2000", "--points", "100"],
        &out,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["control"]["violations"], 0);
    assert_eq!(report["control"]["checked"], 2000);
    assert_eq!(report["eta"], "linear(1)");
    assert_eq!(report["power_fit"]["residual"], 0.0);
}

#[test]
fn changing_a_on_the_tree_is_controlled_by_the_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cmp");
    let o = cat0vis(&["compare", "--metric", "d_a:1", "--target", "d_a:3", "--triples", "3000"], &out);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["eta"], "linear(3)");
    assert_eq!(report["control"]["exact"], report["control"]["checked"]);
}

#[test]
fn pushin_on_the_four_valent_tree() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("pushin");
    let o = cat0vis(
        &["cover-pushin", "--space", "tree:4", "--R", "2", "--K", "5", "--points", "150", "--interior", "400"],
        &out,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["n"], 0);
    assert!(report["order"].as_u64().unwrap() <= 2);
    assert!(report["mesh"].as_f64().unwrap() <= 4.0 * 4f64.exp() + 4.0);
    assert_eq!(report["uncovered"], 0);
    assert!(report.get("cover").is_none());
    let levels = fs::read_to_string(out.join("levels.csv")).unwrap();
    assert_eq!(levels.lines().count(), 6);
    let cover: Value = serde_json::from_str(&fs::read_to_string(out.join("cover.json")).unwrap()).unwrap();
    assert_eq!(cover["ground"].as_array().unwrap().len(), 400);
}

#[test]
fn reruns_are_byte_identical_and_seeds_matter() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["ell-dim", "--space", "euclidean:2", "--metric", "d_a:1", "--points", "120", "--seed", "9"];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(cat0vis(&args, &a).status.code(), Some(0));
    assert_eq!(cat0vis(&args, &b).status.code(), Some(0));
    let names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert!(names.len() >= 4);
    for name in &names {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name:?}");
    }
    let mut other = args.to_vec();
    *other.last_mut().unwrap() = "10";
    let c = tmp.path().join("c");
    assert_eq!(cat0vis(&other, &c).status.code(), Some(0));
    assert_ne!(fs::read(a.join("ell_dim.json")).unwrap(), fs::read(c.join("ell_dim.json")).unwrap());
}

#[test]
fn bad_configs_exit_1_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let cases: [(&str, &str); 4] = [
        ("experiment = \"metric\"\n[space]\nkind = \"tree:1\"\n", "space.kind"),
        ("experiment = \"metric\"\n[metric]\nfamily = \"d_a:0\"\n", "metric.family"),
        ("experiment = \"cover-pushout\"\n[cover]\nr = 1.0\na = 1.0\n", "cover.r"),
        ("experiment = \"metric\"\n[sample]\npointz = 3\n", "pointz"),
    ];
    for (text, field) in cases {
        let path = tmp.path().join("bad.toml");
        fs::write(&path, text).unwrap();
        let o = cat0vis(&["run", "--config", path.to_str().unwrap()], &out);
        assert_eq!(o.status.code(), Some(1), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(field), "{err} lacks {field}");
    }
    assert!(!out.exists());
    let o = cat0vis(&["metric", "--no-such-flag"], &out);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_verdicts_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("weak");
    // three rows cannot grow by a factor of 1e9
    let o = cat0vis(&["demo-t4", "--n-max", "3", "--factor", "1e9", "--pairs", "20", "--points", "20"], &out);
    assert_eq!(o.status.code(), Some(2));
    let m = manifest(&out);
    assert_eq!(m["pass"], false);
    assert_eq!(m["verdicts"]["d1_not_visual"], false);
    assert_eq!(m["verdicts"]["dbar_visual_constants_2"], true);
}

#[test]
fn printed_config_runs_the_same_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cat0vis"))
        .args(["visual-fit", "--space", "hyperbolic", "--a", "2.5", "--pairs", "30", "--seed", "4", "--print-config"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let path = tmp.path().join("fit.toml");
    fs::write(&path, &o.stdout).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(cat0vis(&["run", "--config", path.to_str().unwrap()], &a).status.code(), Some(0));
    assert_eq!(
        cat0vis(&["visual-fit", "--space", "hyperbolic", "--a", "2.5", "--pairs", "30", "--seed", "4"], &b)
            .status
            .code(),
        Some(0)
    );
    assert_eq!(fs::read(a.join("fit.json")).unwrap(), fs::read(b.join("fit.json")).unwrap());
    assert_eq!(fs::read(a.join("config.toml")).unwrap(), fs::read(b.join("config.toml")).unwrap());
}
