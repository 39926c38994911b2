//! End-to-end checks of the command-line surface: output formats, file
//! round trips, determinism, and the exit-code contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use epsent::bits::EncodedBlock;
use epsent::hypergraph::{build_hypergraph, unique_clustering};
use epsent::lzw::decode_stream;
use epsent::model::load_instance;
use epsent::modular::quantize_stream;
use epsent::polar::PolarDesign;
use epsent::rng::{derive_seed, sample_pmf};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_epsent"))
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{}.json", env!("CARGO_MANIFEST_DIR"), name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("epsent-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn curve_csv_matches_library() {
    let out = run(&["curve", "--instance", &fixture("fig5")]);
    assert!(out.status.success());
    let inst = load_instance(fixture("fig5")).unwrap();
    let expected = epsent::curve::rate_curve(&inst).unwrap().to_csv();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}

#[test]
fn hypergraph_epsilon_override() {
    let out = run(&["hypergraph", "--instance", &fixture("fig5"), "--epsilon", "1.1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["maximal_edges"], serde_json::json!([[0, 1, 2]]));
}

#[test]
fn entropy_value_on_stdout() {
    let out = run(&["entropy", "--instance", &fixture("fig5")]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = v["value"].as_f64().unwrap();
    assert!((value - 2.0 / 3.0).abs() < 1e-4);
}

#[test]
fn reproduce_is_byte_identical_across_processes() {
    for name in ["example1", "example2", "fig4", "fig5"] {
        let a = run(&["reproduce", "--fixture", name, "--seed", "7"]);
        let b = run(&["reproduce", "--fixture", name, "--seed", "7"]);
        assert!(a.status.success(), "fixture {name} failed");
        assert_eq!(a.stdout, b.stdout, "fixture {name} differs between runs");
        let text = String::from_utf8(a.stdout).unwrap();
        assert!(text.trim_end().ends_with("all checks passed"), "{name}:\n{text}");
    }
}

#[test]
fn exit_code_contract() {
    // 1: usage errors.
    let out = run(&["bounds", "--instance", &fixture("fig5"), "--epsilon", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["curve"]);
    assert_eq!(out.status.code(), Some(1));
    // 2: instance errors.
    let out = run(&["hypergraph", "--instance", "/no/such/file.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["reproduce", "--fixture", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    // 3: codec precondition failures.
    let out = run(&["encode-modular", "--instance", &fixture("example2"), "--blocklength", "10"]);
    assert_eq!(out.status.code(), Some(3));
    let out =
        run(&["encode-polar", "--instance", &fixture("example2"), "--blocklength", "16"]);
    assert_eq!(out.status.code(), Some(3));
    // 0: --help.
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn modular_block_file_round_trips() {
    let path = tmp("modular.bin");
    let out = run(&[
        "encode-modular",
        "--instance",
        &fixture("fig4"),
        "--blocklength",
        "5000",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let bytes = std::fs::read(&path).unwrap();
    let block = EncodedBlock::from_bytes(&bytes).unwrap();
    assert_eq!(block.n, 5000);
    assert_eq!(block.alphabet_size, 2);
    let decoded = decode_stream(&block.bits, block.n, block.alphabet_size).unwrap();

    // Replay the seeded draw and quantization.
    let inst = load_instance(fixture("fig4")).unwrap();
    let joint: Vec<f64> = inst.p.iter().flatten().copied().collect();
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(3, 0));
    let mut xs = Vec::new();
    for _ in 0..5000 {
        let cell = sample_pmf(&mut rng, &joint);
        xs.push(cell / inst.ny);
    }
    let graph = build_hypergraph(&inst).unwrap();
    let clustering = unique_clustering(&inst, &graph).unwrap();
    let expected = quantize_stream(&inst, &clustering, &xs).unwrap();
    assert_eq!(decoded, expected);
    let _ = std::fs::remove_file(&path);
}

#[test]
fn polar_design_and_block_files() {
    let design_path = tmp("design.json");
    let blocks_path = tmp("polar.bin");
    let out = run(&[
        "encode-polar",
        "--instance",
        &fixture("fig5"),
        "--blocklength",
        "64",
        "--blocks",
        "3",
        "--seed",
        "5",
        "--rate",
        "0.9",
        "--samples",
        "1000",
        "--design-out",
        design_path.to_str().unwrap(),
        "--out",
        blocks_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let design = PolarDesign::from_json(&std::fs::read_to_string(&design_path).unwrap()).unwrap();
    assert_eq!(design.n(), 64);
    assert_eq!(design.info_set.len(), 58); // ceil(64 * 0.9)
    let bytes = std::fs::read(&blocks_path).unwrap();
    let per_block = 10 + 58usize.div_ceil(8);
    assert_eq!(bytes.len(), 3 * per_block);
    let first = EncodedBlock::from_bytes(&bytes[..per_block]).unwrap();
    assert_eq!(first.n, 64);
    assert_eq!(first.alphabet_size, 2);
    let _ = std::fs::remove_file(&design_path);
    let _ = std::fs::remove_file(&blocks_path);
}

#[test]
fn simulate_csv_has_documented_columns() {
    let out = run(&[
        "simulate",
        "--instance",
        &fixture("fig4"),
        "--codec",
        "modular",
        "--blocklength",
        "2000",
        "--seed",
        "1",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("theoretical_rate,empirical_rate,n,violations,p_avg\n"));
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields.len(), 5);
    assert_eq!(fields[3], "0");
}

#[test]
fn simulate_output_file_is_deterministic() {
    let p1 = tmp("sim1.json");
    let p2 = tmp("sim2.json");
    for p in [&p1, &p2] {
        let out = run(&[
            "simulate",
            "--instance",
            &fixture("fig4"),
            "--codec",
            "modular",
            "--blocklength",
            "2000",
            "--blocks",
            "2",
            "--seed",
            "9",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let a = std::fs::read(&p1).unwrap();
    let b = std::fs::read(&p2).unwrap();
    assert_eq!(a, b);
    assert!(!String::from_utf8(a).unwrap().contains("runtime"));
    let _ = std::fs::remove_file(&p1);
    let _ = std::fs::remove_file(&p2);
}

#[test]
fn bounds_subcommand_values() {
    let out = run(&[
        "bounds",
        "--instance",
        &fixture("fig5"),
        "--epsilon",
        "1.9",
        "--lipschitz",
        "2",
    ]);
    assert!(out.status.success());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((v - 2.0 / 3.0).abs() < 1e-4);

    let out = run(&[
        "bounds",
        "--instance",
        &fixture("fig5"),
        "--epsilon",
        "1.1",
        "--delta",
        "0.05",
    ]);
    assert!(out.status.success());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((v - (3f64.log2() - 1.0)).abs() < 1e-4);
}

#[test]
fn pmf_override_reaches_the_codec() {
    let out = run(&[
        "encode-modular",
        "--instance",
        &fixture("fig4"),
        "--blocklength",
        "20000",
        "--seed",
        "11",
        "--pmf",
        "0.11764705882352941,0.058823529411764705,0.47058823529411764,0.35294117647058826",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rate = v["empirical_rate"].as_f64().unwrap();
    // Row-2 marginal compresses well below one bit per symbol.
    assert!(rate < 0.9, "rate {rate}");
    assert_eq!(v["p_avg"].as_f64().unwrap(), 0.0);
}

/// The fixtures directory itself is part of the interface: files must stay
/// canonical under load-then-save.
#[test]
fn fixtures_are_canonical_on_disk() {
    for name in ["example1", "example2", "fig4", "fig5"] {
        let path = fixture(name);
        let text = std::fs::read_to_string(Path::new(&path)).unwrap();
        let inst = load_instance(&path).unwrap();
        assert_eq!(inst.to_canonical_json(), text, "{name} drifted from canonical form");
    }
}
