use std::path::{Path, PathBuf};
use std::process::Command;

use ionphonon::cli::{self, ExperimentConfig, ExperimentKind, Overrides};
use proptest::prelude::*;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn configs() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(root().join("configs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    v.sort();
    v
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ionphonon"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Set UPDATE_GOLDEN=1 to rewrite tests/golden from the current build.
#[test]
fn bundled_configs_match_golden_outputs() {
    let update = std::env::var("UPDATE_GOLDEN").is_ok_and(|v| v == "1");
    for path in configs() {
        let name = path.file_stem().unwrap().to_str().unwrap().to_string();
        let cfg = ExperimentConfig::from_path(&path).unwrap();
        let bundle = cli::execute(&cfg).unwrap();
        assert!(bundle.all_pass(), "{name}: {:?}", bundle.checks);
        let dir = root().join("tests/golden").join(&name);
        let mut files = vec![("summary.json".to_string(), bundle.summary_json())];
        files.extend(bundle.tables.iter().map(|t| (t.file_name(), t.to_csv())));
        if update {
            std::fs::create_dir_all(&dir).unwrap();
            for (f, text) in &files {
                std::fs::write(dir.join(f), text).unwrap();
            }
            continue;
        }
        for (f, text) in &files {
            let golden = std::fs::read_to_string(dir.join(f)).unwrap_or_else(|_| panic!("missing golden {name}/{f}"));
            assert!(golden == *text, "{name}/{f} differs from golden output");
        }
    }
}

#[test]
fn repeated_cli_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for path in configs() {
        let name = path.file_stem().unwrap().to_str().unwrap().to_string();
        let mut outs = Vec::new();
        for k in 0..2 {
            let dir = tmp.path().join(format!("{name}-{k}"));
            let st = bin().arg("run").arg(&path).arg("--out").arg(&dir).output().unwrap();
            assert!(st.status.success(), "{name}: {}", String::from_utf8_lossy(&st.stderr));
            let mut files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
            files.sort();
            outs.push(files.iter().map(|f| (f.file_name().unwrap().to_owned(), std::fs::read(f).unwrap())).collect::<Vec<_>>());
        }
        assert_eq!(outs[0], outs[1], "{name}");
    }
}

#[test]
fn jarzynski_seed_and_trials_overrides_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = root().join("configs/jarzynski.json");
    let run = |d: &str| {
        let dir = tmp.path().join(d);
        let st = bin().args(["run", cfg.to_str().unwrap(), "--trials", "100000", "--seed", "7", "--out"]).arg(&dir).status().unwrap();
        assert!(st.success());
        std::fs::read(dir.join("jarzynski.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
    let other = cli::run(&cfg, &Overrides { seed: Some(8), trials: Some(2000), out: Some(tmp.path().join("c")) }).unwrap();
    assert_eq!(other.0.seed, 8);
    assert_ne!(std::fs::read(tmp.path().join("c/jarzynski.csv")).unwrap(), run("d"));
}

#[test]
fn noon_run_reports_three_fold_fringe() {
    let cfg = ExperimentConfig::from_path(&root().join("configs/noon.json")).unwrap();
    let b = cli::execute(&cfg).unwrap();
    assert!((b.metrics["k"].as_f64().unwrap() - 3.0).abs() < 1e-6);
    assert!((b.metrics["contrast"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let t = b.table("fringe").unwrap();
    assert_eq!(t.header, ["phi_rad", "parity", "fit"]);
    assert_eq!(t.rows.len(), 64);
}

#[test]
fn vibronic_run_has_sticks_and_spectrum() {
    let cfg = ExperimentConfig::from_path(&root().join("configs/vibronic_so2.json")).unwrap();
    let b = cli::execute(&cfg).unwrap();
    let sticks = b.table("sticks").unwrap();
    assert_eq!(sticks.header, ["n_0", "n_1", "energy_cm1", "intensity"]);
    // brightest stick belongs to the mode-1 progression
    let best = sticks.rows.iter().max_by(|a, b| a[3].parse::<f64>().unwrap().total_cmp(&b[3].parse::<f64>().unwrap())).unwrap();
    assert_eq!(best[0], "0");
    assert!(b.table("spectrum").unwrap().rows.len() > 100);
}

#[test]
fn list_has_eleven_kinds() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    for k in ExperimentKind::ALL {
        assert!(text.contains(k.name()));
    }
    assert_eq!(cli::list(), text);
}

#[test]
fn describe_reports_units_and_rejects_unknown_kinds() {
    let out = bin().args(["describe", "fridge"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let params = v["params"].as_array().unwrap();
    assert!(params.iter().any(|p| p["name"] == "xi_n_rad_s" && p["unit"] == "rad/s"));
    assert!(params.iter().all(|p| p["unit"].is_string()));
    assert_eq!(bin().args(["describe", "nosuch"]).status().unwrap().code(), Some(3));
    for k in ExperimentKind::ALL {
        assert!(cli::describe(k.name()).is_ok());
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let code = |cfg: &Path, extra: &[&str]| {
        bin().arg("run").arg(cfg).args(extra).arg("--out").arg(tmp.path().join("o")).status().unwrap().code()
    };
    let bad_json = write(tmp.path(), "a.json", "{ \"kind\": ");
    assert_eq!(code(&bad_json, &[]), Some(2));
    assert_eq!(code(&tmp.path().join("missing.json"), &[]), Some(2));
    let unknown_top = write(tmp.path(), "b.json", r#"{"kind":"noon","seed":0,"colour":1,"params":{}}"#);
    assert_eq!(code(&unknown_top, &[]), Some(2));
    let unknown_param = write(
        tmp.path(),
        "c.json",
        r#"{"kind":"noon","params":{"n":2,"mode_dim":6,"phase_s_rad":0,"points":32,"k_max":4,"phase_s":0}}"#,
    );
    assert_eq!(code(&unknown_param, &[]), Some(2));
    let unitless = write(tmp.path(), "d.json", r#"{"kind":"fridge","params":{"xi_n":1.0}}"#);
    assert_eq!(code(&unitless, &[]), Some(2));
    let invalid = write(tmp.path(), "e.json", r#"{"kind":"noon","params":{"n":0,"mode_dim":6,"phase_s_rad":0,"points":32,"k_max":4}}"#);
    assert_eq!(code(&invalid, &[]), Some(3));
    let noon = root().join("configs/noon.json");
    assert_eq!(code(&noon, &["--trials", "10"]), Some(3));
    let leaky = write(
        tmp.path(),
        "f.json",
        r#"{"kind":"wigner-q-scan","params":{"mode_dim":6,"state":{"coherent":{"re":3,"im":0}},"method":"husimi","radius":1,"points":3,"pad":4}}"#,
    );
    assert_eq!(code(&leaky, &[]), Some(4));
    assert_eq!(bin().arg("frobnicate").status().unwrap().code(), Some(2));
    assert_eq!(code(&noon, &[]), Some(0));
}

#[test]
fn thread_env_var_is_honoured_and_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = root().join("configs/uniform_bsb.json");
    let run = |threads: &str, d: &str| {
        let st = bin().env(cli::THREADS_ENV, threads).arg("run").arg(&cfg).arg("--out").arg(tmp.path().join(d)).status().unwrap();
        st.code()
    };
    assert_eq!(run("1", "one"), Some(0));
    assert_eq!(run("4", "four"), Some(0));
    assert_eq!(
        std::fs::read(tmp.path().join("one/trace.csv")).unwrap(),
        std::fs::read(tmp.path().join("four/trace.csv")).unwrap()
    );
    assert_eq!(run("many", "bad"), Some(3));
}

#[test]
fn output_dir_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(root().join("configs/noon.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["output_dir"] = serde_json::Value::String(tmp.path().join("from-config").to_str().unwrap().into());
    let p = write(tmp.path(), "noon.json", &v.to_string());
    let (_, dir) = cli::run(&p, &Overrides::default()).unwrap();
    assert!(dir.join("fringe.csv").exists() && dir.ends_with("from-config"));
    let (_, dir) = cli::run(&p, &Overrides { out: Some(tmp.path().join("flag")), ..Overrides::default() }).unwrap();
    assert!(dir.join("summary.json").exists() && dir.ends_with("flag"));
}

#[test]
fn provenance_hash_tracks_config_and_seed() {
    let cfg = ExperimentConfig::from_path(&root().join("configs/crossing_scan.json")).unwrap();
    let a = cli::execute(&cfg).unwrap();
    let mut c2 = cfg.clone();
    c2.seed = 99;
    let b = cli::execute(&c2).unwrap();
    assert_ne!(a.config_sha256, b.config_sha256);
    assert_eq!(a.config_sha256.len(), 64);
    let s = a.summary();
    assert_eq!(s["provenance"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(s["provenance"]["seed"], 0);
}

#[test]
fn bundled_configs_round_trip() {
    for path in configs() {
        let a = ExperimentConfig::from_path(&path).unwrap();
        let b = ExperimentConfig::from_json(&a.to_json()).unwrap();
        assert_eq!(a, b, "{}", path.display());
        assert_eq!(a.to_json(), b.to_json());
        let c = ExperimentConfig::from_json(&a.to_json_pretty()).unwrap();
        assert_eq!(a, c);
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e9..1e9f64, -1.0..1.0f64, Just(0.0), (1e-300..1e-10f64)]
}

proptest! {
    #[test]
    fn fridge_config_round_trip(xi in finite(), h in 0.0..10.0f64, w in 0.0..10.0f64, c in 0.0..10.0f64,
                                sq in proptest::option::of(0.0..3.0f64), d in 1e-9..1.0f64,
                                steps in 2usize..1000, trials in 1usize..100000, seed in any::<u64>()) {
        let text = serde_json::json!({
            "kind": "fridge", "seed": seed,
            "params": {"xi_n_rad_s": xi, "nbar_hot": h, "nbar_work": w, "nbar_cold": c, "work_squeeze": sq,
                       "duration_s": d, "steps": steps, "trials": trials}
        }).to_string();
        let a = ExperimentConfig::from_json(&text).unwrap();
        let b = ExperimentConfig::from_json(&a.to_json()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn custom_sequence_round_trip(rabi in finite(), phase in finite(), dur in 1e-9..1e-3f64, mode in 0usize..3,
                                  red in any::<bool>(), qubit_up in any::<bool>(), n in 0usize..4) {
        let kind = if red { "red" } else { "blue" };
        let text = serde_json::json!({
            "kind": "custom-sequence",
            "params": {
                "mode_dims": [6, 6, 6], "qubit": if qubit_up { "up" } else { "down" }, "fock": [n, 0, 0],
                "segments": [
                    {"segment": "constant", "label": "s", "duration_s": dur, "terms": [
                        {"term": "sideband", "kind": kind, "order": 1, "mode": mode, "rabi_rad_s": rabi, "phase_rad": phase},
                        {"term": "mode-rotation", "theta_rad_s": rabi, "phase_rad": phase, "i": 0, "j": 1}
                    ]},
                    {"segment": "uniform-bsb", "mode": mode, "omega0_rad_s": rabi, "beta": phase, "delta0_rad_s": rabi,
                     "duration_s": dur, "variant": "mid-inversion"}
                ],
                "samples_per_segment": 3
            }
        }).to_string();
        let a = ExperimentConfig::from_json(&text).unwrap();
        let b = ExperimentConfig::from_json(&a.to_json()).unwrap();
        prop_assert_eq!(a, b);
    }
}
