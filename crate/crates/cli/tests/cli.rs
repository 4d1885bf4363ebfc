use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use triplex::bounds::{evaluate, write_reports_csv, BoundId, BoundInputs};
use triplex::linproc::bn_path_identity_residual;
use triplex::montecarlo::{estimate_tail, BoundSetup, ExperimentConfig};
use triplex::processes::{generate, mixingale_profile_of, ProcessSpec, SamplePath};
use triplex::SubWeibullSpec;

fn triplex(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triplex"))
        .args(args)
        .current_dir(dir)
        .env_remove("TRIPLEX_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn read(dir: &Path, rel: &str) -> String {
    fs::read_to_string(dir.join(rel)).unwrap()
}

const EXPERIMENT: &str = r#"
[run]
seed = 11

[process]
family = "iid"
n = 5
t_len = 100
alpha = 2.0

[bounds]
ids = ["martingale", "triplex_simplified"]

[montecarlo]
replicates = 100
x = [0.05, 0.1, 0.2, 0.5, 1.0, 5.0, 20.0]
"#;

#[test]
fn empty_sections_accepted() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "[run]\n[process]\n[bounds]\n[montecarlo]\n[verify]\n");
    let out = triplex(&["simulate", "--config", "c.toml", "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("o/path.csv").exists());
}

#[test]
fn unknown_key_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "[bounds]\nidz = [\"triplex\"]\n");
    let out = triplex(&["bounds", "--config", "c.toml", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("idz"));
}

#[test]
fn unknown_bound_id_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "[bounds]\nids = [\"tripple\"]\nx = [1.0]\n");
    let out = triplex(&["bounds", "--config", "c.toml", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tripple"));
}

#[test]
fn simulate_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "[run]\nseed = 5\n[process]\nfamily = \"ar1\"\nn = 3\nt_len = 50\nphi = 0.7\n");
    let out = triplex(&["simulate", "--config", "c.toml", "--out", "o"], dir.path());
    assert!(out.status.success());
    let f = fs::File::open(dir.path().join("o/path.csv")).unwrap();
    let back = SamplePath::<f64>::read_csv(BufReader::new(f)).unwrap();
    let direct = generate(&ProcessSpec::ar1(3, 0.7), 50, 5).unwrap();
    assert_eq!(back.data, direct.data);
    assert_eq!(back.column_sums(), direct.column_sums());
}

#[test]
fn simulate_writes_filtered_path() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "[process]\nn = 2\nt_len = 40\n[filter]\nweights = [1.0, 0.5, 0.25]\n");
    let out = triplex(&["simulate", "--config", "c.toml", "--out", "o"], dir.path());
    assert!(out.status.success());
    let path = read(dir.path(), "o/path.csv");
    let filtered = read(dir.path(), "o/filtered.csv");
    assert_eq!(path.lines().count(), 43);
    assert_eq!(filtered.lines().count(), 41);
}

#[test]
fn bounds_empty_grid_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "[bounds]\nids = [\"martingale\", \"autocov\"]\n");
    let out = triplex(&["bounds", "--config", "c.toml", "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(dir.path(), "o/bounds.csv"), format!("{}\n", triplex::bounds::CSV_HEADER));
}

#[test]
fn bounds_match_library_and_lie_in_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.toml",
        "[process]\nn = 20\nt_len = 300\nalpha = 1.0\n[bounds]\nids = [\"triplex\", \"triplex_corollary\"]\nx = [0.5, 1.0, 4.0, 16.0]\nm = 2\nbig_m = 0.3\n",
    );
    let out = triplex(&["bounds", "--config", "c.toml", "--out", "o"], dir.path());
    assert!(out.status.success());
    let csv = read(dir.path(), "o/bounds.csv");
    for line in csv.lines().skip(1) {
        let v: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }

    let spec = ProcessSpec::iid(20, 1.0);
    let sw = SubWeibullSpec::new(1.0, spec.marginal_orlicz_norm().unwrap()).unwrap();
    let mut inp = BoundInputs::new(20, 300, 1.0, sw, mixingale_profile_of(&spec).unwrap());
    inp.m = 2;
    inp.big_m = 0.3;
    let mut reports = Vec::new();
    for id in [BoundId::Triplex, BoundId::TriplexCorollary] {
        for x in [0.5, 1.0, 4.0, 16.0] {
            reports.push(evaluate(id, &inp.with_x(x), None, 0).unwrap());
        }
    }
    let mut expected = Vec::new();
    write_reports_csv(&reports, &mut expected).unwrap();
    assert_eq!(csv.as_bytes(), expected.as_slice());
}

#[test]
fn verify_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = triplex(&["verify", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = read(dir.path(), "o/verify.csv");
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    for check in ["bn_polynomial", "bn_path", "vec_identity", "commutation", "telescoping"] {
        assert!(csv.contains(check));
    }
}

const FIXTURE: &str = r#"
[verify]
polynomials = 0
path_len = 80

[[verify.fixtures]]
name = "pair"
coeffs = [[[1.0, 0.0], [0.0, 1.0]], [[0.5, 0.2], [0.0, 0.5]]]
"#;

#[test]
fn verify_reports_library_residuals() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", FIXTURE);
    let out = triplex(&["verify", "--config", "c.toml", "--out", "o", "--seed", "4"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = read(dir.path(), "o/verify.csv");
    let row = csv.lines().find(|l| l.starts_with("bn_path,pair,")).unwrap();
    let fields: Vec<&str> = row.split(',').collect();

    let poly = triplex::linproc::LagPolynomial::new(vec![
        ndarray::array![[1.0, 0.0], [0.0, 1.0]],
        ndarray::array![[0.5, 0.2], [0.0, 0.5]],
    ])
    .unwrap();
    let x = generate(&ProcessSpec::iid(2, 2.0), 81, 4).unwrap();
    let (r, s) = bn_path_identity_residual(&poly, &x).unwrap();
    assert_eq!(fields[2], format!("{r:.6e}"));
    assert_eq!(fields[3], format!("{s:.6e}"));
}

#[test]
fn verify_flags_corrupted_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let corrupted = format!("{FIXTURE}c_one = [[1.5, 0.2], [0.0, 1.4]]\n");
    write(dir.path(), "c.toml", &corrupted);
    let out = triplex(&["verify", "--config", "c.toml", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL bn_polynomial pair"));
}

#[test]
fn experiment_matches_library_and_plots_every_bound() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", EXPERIMENT);
    let out = triplex(&["experiment", "--config", "c.toml", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let svg = read(dir.path(), "o/plot.svg");
    assert!(svg.starts_with("<svg"));
    for id in ["martingale", "triplex_simplified"] {
        assert!(svg.contains(id));
    }

    let spec = ProcessSpec::iid(5, 2.0);
    let mut cfg = ExperimentConfig::new(spec, 100, vec![0.05, 0.1, 0.2, 0.5, 1.0, 5.0, 20.0], 100, 11);
    cfg.bounds = vec![BoundId::Martingale, BoundId::TriplexSimplified];
    let sw = SubWeibullSpec::new(2.0, spec.marginal_orlicz_norm().unwrap()).unwrap();
    cfg.setup = Some(BoundSetup {
        inputs: BoundInputs::new(5, 100, 1.0, sw, mixingale_profile_of(&spec).unwrap()),
        consts: None,
        grid: None,
    });
    let mut expected = Vec::new();
    estimate_tail(&cfg).unwrap().write_csv(&mut expected).unwrap();
    assert_eq!(read(dir.path(), "o/tail.csv").as_bytes(), expected.as_slice());
}

#[test]
fn manifest_reruns_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", EXPERIMENT);
    assert!(triplex(&["experiment", "--config", "c.toml", "--out", "a", "--threads", "1"], dir.path()).status.success());
    let manifest = read(dir.path(), "a/experiment.manifest.toml");
    let parsed: toml::Table = toml::from_str(&manifest).unwrap();
    assert_eq!(parsed["command"].as_str(), Some("experiment"));
    assert_eq!(parsed["base_seed"].as_integer(), Some(11));
    let artifacts: Vec<&str> = parsed["artifacts"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(artifacts, ["tail.csv", "domination.csv", "plot.svg"]);

    let out = triplex(&["experiment", "--config", "a/experiment.manifest.toml", "--out", "b", "--threads", "4"], dir.path());
    assert!(out.status.success());
    for a in artifacts {
        assert_eq!(read(dir.path(), &format!("a/{a}")), read(dir.path(), &format!("b/{a}")), "{a}");
    }
}

#[test]
fn seed_flag_and_env_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "[process]\nn = 2\nt_len = 10\n");
    let out = Command::new(env!("CARGO_BIN_EXE_triplex"))
        .args(["simulate", "--config", "c.toml", "--seed", "99"])
        .current_dir(dir.path())
        .env("TRIPLEX_OUT_DIR", "from_env")
        .output()
        .unwrap();
    assert!(out.status.success());
    let manifest: toml::Table = toml::from_str(&read(dir.path(), "from_env/simulate.manifest.toml")).unwrap();
    assert_eq!(manifest["base_seed"].as_integer(), Some(99));
    let f = fs::File::open(dir.path().join("from_env/path.csv")).unwrap();
    let back = SamplePath::<f64>::read_csv(BufReader::new(f)).unwrap();
    assert_eq!(back.data, generate(&ProcessSpec::iid(2, 2.0), 10, 99).unwrap().data);
}

#[test]
fn too_few_replicates_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "[montecarlo]\nreplicates = 10\nx = [1.0]\n");
    let out = triplex(&["experiment", "--config", "c.toml", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
