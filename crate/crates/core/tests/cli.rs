use std::path::{Path, PathBuf};

use proptest::prelude::*;
use spectra_core::cli::{config_hash, run, CommandName, RunConfig, MANIFEST_FILE};
use spectra_core::Execution;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn shipped(name: &str) -> RunConfig {
    RunConfig::load(&configs_dir().join(name)).unwrap()
}

const SPECTRUM: &str = r#"
[map]
preset = "doubling"

[potential]
kind = "bernoulli"
probs = [0.25, 0.75]

[command]
name = "spectrum"
tol = 1e-10
a_range = [-4.0, 4.0]
grid_points = 9
alphas = [0.6, 1.0, 1.4]
"#;

fn read(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join(file)).unwrap()
}

#[test]
fn every_shipped_config_parses() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap(), cfg);
            n += 1;
        }
    }
    assert!(n >= 8);
}

#[test]
fn unknown_keys_are_rejected() {
    for (from, to) in [("tol = 1e-10", "tolerance = 1e-10"), ("[command]", "[command]\nfoo = 1"), ("[map]", "[mapping]\nx = 1\n[map]")] {
        let bad = SPECTRUM.replacen(from, to, 1);
        let err = RunConfig::from_toml_str(&bad).unwrap_err();
        assert_eq!(err.name(), "ConfigError", "{to}");
    }
}

#[test]
fn out_of_range_values_are_rejected() {
    for (from, to) in [
        ("tol = 1e-10", "tol = 0.0"),
        ("tol = 1e-10", "tol = 2.0"),
        ("grid_points = 9", "grid_points = 2"),
        ("grid_points = 9", "grid_points = 20000"),
        ("name = \"spectrum\"", "name = \"spectrum\"\nlevel = 0"),
        ("name = \"spectrum\"", "name = \"spectrum\"\nlevel = 41"),
        ("name = \"spectrum\"", "name = \"spectrum\"\neps = 0.0"),
        ("name = \"spectrum\"", "name = \"spectrum\"\ndepth = 2"),
        ("name = \"spectrum\"", "name = \"spectrum\"\ncount = 100000000"),
        ("preset = \"doubling\"", "preset = \"tent\""),
        ("preset = \"doubling\"", "preset = \"manneville_pomeau\""),
        ("name = \"spectrum\"", "name = \"spectra\""),
    ] {
        let bad = SPECTRUM.replacen(from, to, 1);
        assert!(RunConfig::from_toml_str(&bad).is_err(), "{to}");
    }
    assert!(RunConfig::from_toml_str(SPECTRUM).is_ok());
}

#[test]
fn spectrum_run_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_toml_str(SPECTRUM).unwrap();
    let out = run(&cfg, dir.path()).unwrap();
    assert_eq!(out.exit_code(), 0);
    let csv = read(dir.path(), "spectrum.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "a,b,b_low,b_high,alpha,f,f_low,f_high");
    assert_eq!(lines.count(), 3);
    assert!(read(dir.path(), "spectrum_samples.csv").starts_with("a,b,b_low,b_high,on_ray,converged\n"));
    let manifest: toml::Value = toml::from_str(&read(dir.path(), MANIFEST_FILE)).unwrap();
    assert_eq!(manifest["status"].as_str(), Some("ok"));
    assert_eq!(manifest["config_sha256"].as_str().unwrap(), config_hash(&cfg).unwrap());
}

#[test]
fn farey_endpoints_report_infinity() {
    let dir = tempfile::tempdir().unwrap();
    run(&shipped("farey_endpoints.toml"), dir.path()).unwrap();
    let csv = read(dir.path(), "endpoints.csv");
    let row = csv.lines().find(|l| l.starts_with("alpha_max,")).unwrap();
    assert_eq!(row.split(',').nth(1), Some("inf"));
}

#[test]
fn overlapping_branches_fail_validation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&shipped("overlapping_branches.toml"), dir.path()).unwrap();
    assert_eq!(out.exit_code(), 1);
    assert_eq!(out.manifest.error.as_deref(), Some("MarkovViolation"));
    assert!(dir.path().join(MANIFEST_FILE).exists());
}

fn artifacts(cfg: &RunConfig) -> Vec<(String, Vec<u8>)> {
    let dir = tempfile::tempdir().unwrap();
    run(cfg, dir.path()).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    for name in ["bernoulli_spectrum.toml", "bernoulli_localdim.toml", "slopes_bcurve.toml"] {
        let mut cfg = shipped(name);
        let first = artifacts(&cfg);
        assert_eq!(first, artifacts(&cfg), "{name}");
        cfg.command.execution = Some(Execution::Sequential);
        let seq = artifacts(&cfg);
        let strip = |v: &[(String, Vec<u8>)]| v.iter().filter(|(n, _)| n != MANIFEST_FILE).cloned().collect::<Vec<_>>();
        assert_eq!(strip(&first), strip(&seq), "{name}");
    }
}

#[test]
fn config_hash_is_stable() {
    let cfg = RunConfig::from_toml_str(SPECTRUM).unwrap();
    let h = config_hash(&cfg).unwrap();
    assert_eq!(h.len(), 64);
    let reparsed = RunConfig::from_toml_str(&format!("# comment\n{SPECTRUM}")).unwrap();
    assert_eq!(config_hash(&reparsed).unwrap(), h);
    let mut other = cfg.clone();
    other.command.tol = Some(1e-9);
    assert_ne!(config_hash(&other).unwrap(), h);
}

fn command_strategy() -> impl Strategy<Value = RunConfig> {
    let names = prop::sample::select(vec![
        CommandName::Pressure,
        CommandName::Bcurve,
        CommandName::Spectrum,
        CommandName::Endpoints,
        CommandName::Blockopt,
        CommandName::Localdim,
        CommandName::Induce,
        CommandName::Validate,
    ]);
    (
        names,
        prop::option::of(1usize..=40),
        prop::option::of(1e-14f64..0.5),
        prop::option::of((-10.0f64..0.0, 0.1f64..10.0)),
        prop::option::of(3usize..200),
        prop::option::of(prop::collection::vec(0.1f64..3.0, 1..5)),
        prop::option::of(1e-3f64..1.0),
        prop::option::of(any::<u64>()),
        prop::option::of(4usize..=60),
        prop::option::of(prop::bool::ANY),
    )
        .prop_map(|(name, level, tol, a_range, grid_points, alphas, eps, seed, depth, seq)| {
            let mut cfg = RunConfig::from_toml_str(SPECTRUM).unwrap();
            let c = &mut cfg.command;
            c.name = name;
            c.level = level;
            c.tol = tol;
            c.a_range = a_range.map(|(lo, w)| [lo, lo + w]);
            c.grid_points = grid_points;
            c.alphas = alphas;
            c.eps = eps;
            c.seed = seed;
            c.depth = depth;
            c.execution = seq.map(|s| if s { Execution::Sequential } else { Execution::Parallel });
            cfg
        })
}

proptest! {
    #[test]
    fn configs_round_trip(cfg in command_strategy()) {
        let text = cfg.to_toml_string().unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(config_hash(&back).unwrap(), config_hash(&cfg).unwrap());
    }
}
