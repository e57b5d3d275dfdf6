use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use capillarity::geometry::io::{write_profile, write_voxel};
use capillarity::harness::{graph_perturbation_family, PerturbationMode, PerturbationSpec};
use capillarity::{CapillarityParams, VoxelSet};
use serde_json::Value;
use sha2::{Digest, Sha256};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capillarity")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing `{key}` in {v}"))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Unit squares of side `h` at the given columns of a one-row raster standing on the wall.
fn row_raster(dir: &Path, name: &str, h: f64, cells: &[u8]) -> PathBuf {
    let v = VoxelSet::uniform(2, h, &[-(cells.len() as f64) * h / 2.0, 0.0], &[cells.len(), 1], cells.to_vec()).unwrap();
    let path = dir.join(name);
    write_voxel(&path, &v).unwrap();
    path
}

#[test]
fn bubble_at_zero_angle_is_a_half_disk() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bubble", "--out", "b"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let b = json(dir.path().join("b/bubble.json"));
    assert!((num(&b, "p_lambda") - std::f64::consts::PI).abs() < 1e-12);
    assert!(num(&b, "deficit").abs() < 1e-12);
    assert!(dir.path().join("b/bubble.csv").exists());
    assert!(num(&json(dir.path().join("b/report.json")), "deficit").abs() < 1e-8);
}

#[test]
fn bubble_energy_matches_arc_length_quadrature() {
    // circular arc of radius 1 centred at height -λ, above the wall, as a fine polyline
    let lambda = 0.5_f64;
    let pts: Vec<(f64, f64)> = (0..=400_000)
        .map(|k| std::f64::consts::PI * k as f64 / 400_000.0)
        .map(|t| (t.cos(), t.sin() - lambda))
        .filter(|p| p.1 >= 0.0)
        .collect();
    let arc: f64 = pts.windows(2).map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt()).sum();
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    // the remaining arc down to the wall is y / |x| to first order
    let tip = |p: (f64, f64)| p.1 / p.0.abs();
    let arc = arc + tip(first) + tip(last);
    let wetted = 2.0 * (1.0 - lambda * lambda).sqrt();
    let oracle = arc - lambda * wetted;

    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bubble", "--lambda", "0.5", "--out", "b"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let p = num(&json(dir.path().join("b/bubble.json")), "p_lambda");
    assert!((p - oracle).abs() < 1e-6, "{p} vs {oracle}");
    assert!((p - 1.228370).abs() < 1e-6);
}

#[test]
fn steep_bubble_in_three_dimensions_has_no_deficit() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bubble", "--lambda", "0.9", "--n", "3", "--nodes", "4096", "--out", "b"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(num(&json(dir.path().join("b/bubble.json")), "deficit").abs() <= 1e-8);
}

#[test]
fn eval_of_the_bubble_file_has_zero_asymmetry() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["bubble", "--nodes", "4096", "--out", "b"])), 0);
    let o = run(dir.path(), &["eval", "b/bubble.csv", "--out", "e"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(dir.path().join("e/report.json"));
    assert!(num(&r, "alpha") < 1e-6);
    assert!(num(&r, "deficit") < 1e-6);
}

#[test]
fn eval_of_a_square_on_the_wall() {
    let dir = tempfile::tempdir().unwrap();
    row_raster(dir.path(), "sq.json", 1.0, &[1]);
    let o = run(dir.path(), &["eval", "sq.json", "--out", "e"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    // three free sides of length 1 against 2 |B^0|^{1/2} with |B^0| = π/2
    let oracle = 3.0 / (2.0 * std::f64::consts::FRAC_PI_2.sqrt()) - 1.0;
    let d = num(&json(dir.path().join("e/report.json")), "deficit");
    assert!((d - oracle).abs() < 1e-12, "{d} vs {oracle}");
    assert!((d - 0.19683).abs() < 1e-5);
}

#[test]
fn corrupt_inputs_exit_with_the_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), "{\"dim\": 2,\n").unwrap();
    let o = run(dir.path(), &["eval", "bad.json", "--out", "e"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("bad.json:2"), "{}", stderr(&o));

    fs::write(dir.path().join("bad.csv"), "t,rho\n0,1\n0.5,x\n1,0\n").unwrap();
    let o = run(dir.path(), &["eval", "bad.csv", "--out", "e"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    assert_eq!(code(&run(dir.path(), &["eval", "missing.json"])), 4);
    assert_eq!(code(&run(dir.path(), &["sweep", "--no-such-flag"])), 4);
    assert_eq!(code(&run(dir.path(), &["--help"])), 0);
}

#[test]
fn schwarz_merges_two_squares() {
    let dir = tempfile::tempdir().unwrap();
    row_raster(dir.path(), "two.json", 0.5, &[1, 0, 0, 1]);
    let o = run(dir.path(), &["symmetrize", "two.json", "--stages", "schwarz", "--out", "s"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = json(dir.path().join("s/pipeline.json"))["rows"].as_array().unwrap().clone();
    let (before, after) = (num(&rows[0], "p_lambda"), num(&rows[1], "p_lambda"));
    // two squares of side 1/2: 2 · 3/2; the symmetral is a 1 × 1/2 rectangle: 1 + 2 · 1/2
    assert!((before - 3.0).abs() < 1e-12);
    assert!((after - 2.0).abs() < 1e-9);
    assert!(after < before);
    assert!(dir.path().join("s/symmetrized.csv").exists());
}

#[test]
fn bubble_passes_through_the_pipeline_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["bubble", "--nodes", "2048", "--out", "b"])), 0);
    let o = run(dir.path(), &["symmetrize", "b/bubble.csv", "--out", "s"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = json(dir.path().join("s/pipeline.json"))["rows"].as_array().unwrap().clone();
    for r in &rows {
        assert!(num(r, "deficit").abs() < 1e-6, "{r}");
        assert!(num(r, "alpha") < 1e-6, "{r}");
    }
    let last = rows.last().unwrap();
    assert!((num(last, "volume") - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!(dir.path().join("s/truncation.json").exists());
}

#[test]
fn flat_set_is_refused_by_the_truncation_gate() {
    let dir = tempfile::tempdir().unwrap();
    row_raster(dir.path(), "flat.json", 0.25, &[1; 16]);
    let o = run(dir.path(), &["symmetrize", "flat.json", "--out", "s"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("gate"), "{}", stderr(&o));
    let m = json(dir.path().join("s/manifest.json"));
    assert_eq!(m["status"], "fail");
}

#[test]
fn abp_covers_the_cap_on_bubble_and_perturbed_rasters() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bubble", "--rep", "voxel", "--h", "0.03125", "--nodes", "4096", "--out", "b"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(dir.path(), &["abp", "b/bubble_voxel.json", "--h", "0.03125", "--out", "a"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(dir.path().join("a/abp.json"));
    assert!(num(&r["coverage"], "covered_fraction") >= 0.99);
    assert!(num(&r, "r2") >= -1e-8);
    assert!(dir.path().join("a/solution.u.f64").exists());

    let p = CapillarityParams::new(0.0, 2).unwrap();
    let prof = graph_perturbation_family(&p, &PerturbationSpec::new(PerturbationMode::Legendre(2), 0.1)).unwrap();
    write_profile(&dir.path().join("pert.csv"), &prof).unwrap();
    let o = run(dir.path(), &["abp", "pert.csv", "--h", "0.03125", "--tol-coverage", "0.95", "--out", "a2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(num(&json(dir.path().join("a2/abp.json"))["coverage"], "covered_fraction") >= 0.95);
}

#[test]
fn abp_refuses_two_components_and_three_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    row_raster(dir.path(), "two.json", 0.5, &[1, 0, 0, 1]);
    let o = run(dir.path(), &["abp", "two.json", "--out", "a"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("connected"), "{}", stderr(&o));
    assert_eq!(code(&run(dir.path(), &["abp", "two.json", "--n", "3", "--out", "a"])), 3);
}

#[test]
fn mode_two_sweep_has_first_and_second_order_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["sweep", "--lambda", "-0.3", "--nodes", "4096", "--out", "w"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = json(dir.path().join("w/sweep.json"));
    assert!((num(&s, "alpha_slope") - 1.0).abs() <= 0.1);
    assert!((num(&s, "deficit_slope") - 2.0).abs() <= 0.1);
    let csv = fs::read_to_string(dir.path().join("w/sweep.csv")).unwrap();
    assert!(csv.starts_with("eps,volume,p_lambda,deficit,alpha,beta"));
    assert_eq!(csv.lines().count(), 8);
}

#[test]
fn unperturbed_sweep_has_zero_deficit() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["sweep", "--eps", "0", "--out", "w"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("w/sweep.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 0.0);
    assert!(row[3].abs() < 1e-8, "deficit {}", row[3]);
}

#[test]
fn oversized_amplitude_is_a_generation_refusal() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["sweep", "--eps", "3", "--out", "w"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("ε_max"), "{}", stderr(&o));
    assert!(json(dir.path().join("w/sweep.json"))["meta"]["error"].is_string());
}

#[test]
fn lemma1d_record_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["lemma1d", "--lambda", "0.5", "--n", "3", "--trials", "2000", "--out", "l"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let recs = json(dir.path().join("l/lemma1d.json"));
    let recs = recs.as_array().unwrap();
    assert_eq!(recs.len(), 3);
    for r in recs {
        let c = &r["constant"];
        assert!(num(c, "fitted").is_finite());
        assert!(num(c, "held_out") <= 3.0 * num(c, "fitted"));
    }
}

#[test]
fn factor3_on_a_small_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["factor3", "--trials", "10", "--out", "f"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(dir.path().join("f/factor3.json"));
    assert_eq!(r["violations"], 0);
    assert_eq!(r["items"].as_array().unwrap().len(), 10);
}

#[test]
fn reruns_are_byte_identical_and_hashed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = run(d.path(), &["sweep", "--nodes", "2048", "--count", "4", "--seed", "7", "--out", "w"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let manifest = json(a.path().join("w/manifest.json"));
    let files = manifest["files"].as_array().unwrap();
    assert!(files.len() >= 3);
    for f in files {
        let rel = f["path"].as_str().unwrap();
        let x = fs::read(a.path().join("w").join(rel)).unwrap();
        let y = fs::read(b.path().join("w").join(rel)).unwrap();
        assert_eq!(x, y, "{rel} differs between runs");
        let hash: String = Sha256::digest(&x).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(f["sha256"].as_str().unwrap(), hash);
    }
    assert_eq!(fs::read(a.path().join("w/manifest.json")).unwrap(), fs::read(b.path().join("w/manifest.json")).unwrap());
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "lambda = 0.5\nn = 3\nout = \"from_file\"\n").unwrap();
    let o = run(dir.path(), &["bubble", "--config", "run.toml", "--n", "2", "--nodes", "1024"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let b = json(dir.path().join("from_file/bubble.json"));
    assert_eq!(num(&b, "lambda"), 0.5);
    assert_eq!(b["n"], 2);
    let echoed = fs::read_to_string(dir.path().join("from_file/config.toml")).unwrap();
    assert!(echoed.contains("lambda = 0.5") && echoed.contains("n = 2"));

    fs::write(dir.path().join("bad.toml"), "lambda = 0.5\ntol_deficit = \"small\"\n").unwrap();
    let o = run(dir.path(), &["bubble", "--config", "bad.toml"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    assert_eq!(code(&run(dir.path(), &["bubble", "--lambda", "1.5", "--out", "x"])), 3);
}
