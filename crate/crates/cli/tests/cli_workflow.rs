use std::path::Path;
use std::process::{Command, Output};

use thztomo_cli::dataset::{Dataset, Kind, Mode, PayloadFormat, Quantity};

fn thz(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thz-tomo"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = thz(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    thz(dir, args).status.code().expect("exit code")
}

fn small_triangle(dir: &Path) {
    ok(dir, &["phantom", "--shape", "triangle", "--n", "31", "--out", "tri.json"]);
}

#[test]
fn phantom_files_round_trip_in_both_formats() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["phantom", "--shape", "disk", "--n", "20", "--radius", "0.4", "--out", "a.json"]);
    ok(d, &["phantom", "--shape", "disk", "--n", "20", "--radius", "0.4", "--out", "b.json", "--format", "csv"]);
    let a = Dataset::read(&d.join("a.json")).unwrap();
    let b = Dataset::read(&d.join("b.json")).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(a.header.payload.format, PayloadFormat::F64Le);
    assert_eq!(b.header.payload.format, PayloadFormat::Csv);
    assert_eq!(a.header.kind, Kind::Image);
    assert!(d.join("a.bin").exists() && d.join("b.csv").exists());
    let mut distinct = a.values.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    assert_eq!(distinct, vec![0.0, 1.0]);
}

#[test]
fn pgm_preview_is_two_level_for_a_phantom() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["phantom", "--shape", "triangle", "--n", "41", "--out", "t.json", "--pgm", "t.pgm"]);
    let bytes = std::fs::read(d.join("t.pgm")).unwrap();
    let header = b"P5\n41 41\n255\n";
    assert!(bytes.starts_with(header));
    let pixels = &bytes[header.len()..];
    assert_eq!(pixels.len(), 41 * 41);
    assert!(pixels.iter().all(|&p| p == 0 || p == 255));
}

#[test]
fn single_ray_pipeline_recovers_line_integrals() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    small_triangle(d);
    for mode in ["p", "i"] {
        let raw = format!("raw_{mode}.json");
        let lin = format!("lin_{mode}.json");
        ok(d, &["simulate", "--phantom", "tri.json", "--model", "single-ray", "--mode", mode,
                "--angles", "30", "--offsets", "21", "--out", &raw]);
        ok(d, &["preprocess", "--input", &raw, "--log", "--out", &lin]);
        let ds = Dataset::read(&d.join(&lin)).unwrap();
        assert_eq!(ds.header.quantity, Quantity::LineIntegral);
        assert!(ds.values.iter().all(|v| v.is_finite() && *v >= 0.0));
    }
    let p = Dataset::read(&d.join("lin_p.json")).unwrap();
    let i = Dataset::read(&d.join("lin_i.json")).unwrap();
    for (a, b) in p.values.iter().zip(&i.values) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}

#[test]
fn identity_preprocess_changes_nothing_but_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    small_triangle(d);
    ok(d, &["simulate", "--phantom", "tri.json", "--angles", "20", "--offsets", "15", "--oversampling", "2", "--out", "raw.json"]);
    ok(d, &["preprocess", "--input", "raw.json", "--out", "same.json"]);
    let a = Dataset::read(&d.join("raw.json")).unwrap();
    let b = Dataset::read(&d.join("same.json")).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(b.header.mode, Some(Mode::P));
    assert_eq!(b.header.provenance.inputs.len(), 1);
}

#[test]
fn time_domain_traces_feed_the_preprocessor() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    small_triangle(d);
    ok(d, &["simulate", "--phantom", "tri.json", "--model", "time-domain", "--angles", "12",
            "--offsets", "11", "--t-samples", "801", "--t-max", "3", "--out", "tr.json"]);
    let tr = Dataset::read(&d.join("tr.json")).unwrap();
    assert_eq!(tr.header.kind, Kind::Traces);
    assert_eq!(tr.values.len(), (12 * 11 + 1) * 801);
    ok(d, &["preprocess", "--input", "tr.json", "--mode", "p", "--out", "ratio.json"]);
    ok(d, &["simulate", "--phantom", "tri.json", "--angles", "12", "--offsets", "11", "--out", "model.json"]);
    let from_traces = Dataset::read(&d.join("ratio.json")).unwrap();
    let model = Dataset::read(&d.join("model.json")).unwrap();
    for (a, b) in from_traces.values.iter().zip(&model.values) {
        assert!((a - b).abs() <= 2e-3 * b, "{a} vs {b}");
    }
}

#[test]
fn reconstruct_writes_image_and_log() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    small_triangle(d);
    ok(d, &["simulate", "--phantom", "tri.json", "--angles", "40", "--offsets", "31", "--out", "raw.json"]);
    ok(d, &["preprocess", "--input", "raw.json", "--log", "--out", "lin.json"]);
    for method in ["fbp", "tikhonov", "landweber", "ista", "fista", "contour"] {
        let out = format!("{method}.json");
        ok(d, &["reconstruct", "--input", "lin.json", "--method", method, "--n", "31",
                "--iters", "30", "--out", &out, "--log-csv", &format!("{method}.csv")]);
        let img = Dataset::read(&d.join(&out)).unwrap();
        assert_eq!(img.values.len(), 31 * 31);
        assert!(img.values.iter().all(|v| v.is_finite()));
    }
    let log = std::fs::read_to_string(d.join("landweber.csv")).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], "k,residual,stepsize");
    assert_eq!(lines.len(), 1 + 31);
    assert!(lines[31].ends_with(','));
    assert!(!d.join("fbp.csv").exists());
}

#[test]
fn exit_codes_follow_the_error_class() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    small_triangle(d);
    ok(d, &["simulate", "--phantom", "tri.json", "--angles", "10", "--offsets", "11", "--oversampling", "2", "--out", "raw.json"]);
    // usage
    assert_eq!(code(d, &["frobnicate"]), 1);
    assert_eq!(code(d, &["phantom", "--shape", "disk", "--n", "1", "--out", "x.json"]), 1);
    assert_eq!(code(d, &["info", "missing.json"]), 1);
    // data/model mismatch
    assert_eq!(code(d, &["simulate", "--phantom", "tri.json", "--mode", "i", "--out", "y.json"]), 2);
    assert_eq!(code(d, &["reconstruct", "--input", "raw.json", "--method", "fbp", "--out", "z.json"]), 2);
    assert_eq!(code(d, &["reconstruct", "--input", "tri.json", "--method", "fbp", "--out", "z.json"]), 2);
    // malformed dataset
    std::fs::write(d.join("bad.json"), "{ not json").unwrap();
    assert_eq!(code(d, &["info", "bad.json"]), 2);
    std::fs::write(d.join("raw.bin"), [0u8; 12]).unwrap();
    assert_eq!(code(d, &["info", "raw.json"]), 2);
}

#[test]
fn verify_subcommand_reports_each_check() {
    let tmp = tempfile::tempdir().unwrap();
    let out = thz(tmp.path(), &["verify", "--only", "smoothness", "--only", "single-ray"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert_eq!(code(tmp.path(), &["verify", "--only", "nonsense"]), 1);
}
