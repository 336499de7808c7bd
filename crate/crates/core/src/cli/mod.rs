//! Batch experiment runner behind the `ionphonon` binary.

pub mod config;
pub mod kinds;
pub mod output;

use std::path::{Path, PathBuf};

use serde_json::json;

pub use config::{Experiment, ExperimentConfig, ExperimentKind};
pub use output::{Check, ResultBundle, Table};

use crate::error::Result;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "IONPHONON_THREADS";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.trials {
            cfg.experiment.set_trials(n)?;
        }
        Ok(())
    }
}

/// Runs an already-overridden config and returns the bundle without writing it.
pub fn execute(cfg: &ExperimentConfig) -> Result<ResultBundle> {
    let o = kinds::run(&cfg.experiment, cfg.seed)?;
    Ok(ResultBundle {
        kind: cfg.experiment.kind().name().into(),
        config_sha256: output::sha256_hex(cfg.to_json().as_bytes()),
        seed: cfg.seed,
        metrics: o.metrics,
        checks: o.checks,
        tables: o.tables,
    })
}

/// Output directory: `--out`, then the config's `output_dir`, then `out/<kind>`.
pub fn output_dir(cfg: &ExperimentConfig, ov: &Overrides) -> PathBuf {
    ov.out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("out").join(cfg.experiment.kind().name()))
}

/// Parse, override, execute and write.
pub fn run(path: &Path, ov: &Overrides) -> Result<(ResultBundle, PathBuf)> {
    let mut cfg = ExperimentConfig::from_path(path)?;
    ov.apply(&mut cfg)?;
    let bundle = execute(&cfg)?;
    let dir = output_dir(&cfg, ov);
    bundle.write(&dir)?;
    Ok((bundle, dir))
}

struct Field {
    name: &'static str,
    ty: &'static str,
    unit: &'static str,
    about: &'static str,
}

const fn fld(name: &'static str, ty: &'static str, unit: &'static str, about: &'static str) -> Field {
    Field { name, ty, unit, about }
}

fn summary_line(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::CbsTruthTable => "controlled beam splitter Fredkin truth table and ancilla parity check",
        ExperimentKind::UniformBsb => "uniform blue-sideband sweep transfer for each Fock level",
        ExperimentKind::CrossingScan => "parametric coupling eigenvalues against detuning and the minimum gap",
        ExperimentKind::KerrPeaks => "cross-Kerr sideband shifts, exact and perturbative, with probe spectra",
        ExperimentKind::Noon => "NOON state parity fringe, fit and quantum Fisher information",
        ExperimentKind::Gkp => "GKP grid state marginals, logical expectations and anticommutation",
        ExperimentKind::Jarzynski => "two-point work statistics for temperature and ramp combinations",
        ExperimentKind::Fridge => "three-mode trilinear refrigerator occupation time series",
        ExperimentKind::Vibronic => "Franck-Condon sticks and broadened vibronic spectrum",
        ExperimentKind::WignerQScan => "Wigner or Husimi Q grid of one mode with optional MaxLik reconstruction",
        ExperimentKind::CustomSequence => "user pulse sequence built from named Hamiltonian terms",
    }
}

fn fields(kind: ExperimentKind) -> Vec<Field> {
    match kind {
        ExperimentKind::CbsTruthTable => vec![
            fld("mode_dim", "integer", "levels", "Fock dimension of each of the two modes"),
            fld("xi_rad_s", "number", "rad/s", "controlled beam splitter rate"),
            fld("shots", "integer", "shots", "sampled shots per input row; 0 for exact probabilities only"),
            fld("parity_states", "integer", "count", "random states for the ancilla parity comparison"),
        ],
        ExperimentKind::UniformBsb => vec![
            fld("mode_dim", "integer", "levels", "Fock dimension"),
            fld("omega0_rad_s", "number", "rad/s", "peak n = 0 sideband Rabi frequency"),
            fld("beta", "number", "dimensionless", "counter-diabatic imaginary amplitude fraction"),
            fld("delta0_rad_s", "number", "rad/s", "detuning sweep amplitude"),
            fld("duration_s", "number", "s", "total sweep time"),
            fld("variant", "\"continuous\" | \"mid-inversion\"", "-", "sweep shape"),
            fld("max_n", "integer", "quanta", "highest initial Fock level"),
            fld("samples", "integer", "count", "trace samples per run"),
        ],
        ExperimentKind::CrossingScan => vec![
            fld("xi_d_rad_s", "number", "rad/s", "degenerate parametric coupling"),
            fld("delta_min_rad_s", "number", "rad/s", "scan start"),
            fld("delta_max_rad_s", "number", "rad/s", "scan end"),
            fld("points", "integer", "count", "scan points"),
            fld("max_manifold", "integer", "quanta", "highest 2n_a + n_b manifold tabulated"),
        ],
        ExperimentKind::KerrPeaks => vec![
            fld("xi_d_rad_s", "number", "rad/s", "degenerate parametric coupling"),
            fld("delta_rad_s", "number", "rad/s", "detuning of the coupling"),
            fld("max_n_b", "integer", "quanta", "shift table runs over n_b = 0..=max_n_b"),
            fld("probe_max_n_b", "integer", "quanta", "probe spectra for n_b = 0..=probe_max_n_b"),
            fld("probe_rabi_rad_s", "number", "rad/s", "probe sideband Rabi frequency"),
            fld("probe_duration_s", "number", "s", "probe pulse length"),
            fld("detuning_min_rad_s", "number", "rad/s", "probe scan start"),
            fld("detuning_max_rad_s", "number", "rad/s", "probe scan end"),
            fld("points", "integer", "count", "probe scan points"),
        ],
        ExperimentKind::Noon => vec![
            fld("n", "integer", "quanta", "NOON photon number"),
            fld("mode_dim", "integer", "levels", "Fock dimension of each mode"),
            fld("phase_s_rad", "number", "rad", "phase of the |0,N> branch"),
            fld("points", "integer", "count", "analysis phases over [0, 2pi)"),
            fld("k_max", "number", "dimensionless", "upper bound of the fitted fringe frequency"),
        ],
        ExperimentKind::Gkp => vec![
            fld("spacing", "number", "displacement amplitude", "lattice spacing l"),
            fld("squeeze", "number", "dimensionless", "squeeze parameter r of each peak"),
            fld("half_width", "integer", "count", "comb half-width K"),
            fld("envelope_variance", "number", "displacement amplitude^2", "Gaussian envelope variance"),
            fld("mode_dim", "integer", "levels", "Fock dimension"),
            fld("quadrature_min", "number", "x = (a + a^dag)/sqrt2", "marginal grid start"),
            fld("quadrature_max", "number", "x = (a + a^dag)/sqrt2", "marginal grid end"),
            fld("points", "integer", "count", "marginal grid points"),
            fld("anticommutator_work_dim", "integer", "levels", "working dimension for the anticommutator"),
        ],
        ExperimentKind::Jarzynski => vec![
            fld("mass_amu", "number", "u", "ion mass"),
            fld("omega_rad_s", "number", "rad/s", "trap frequency"),
            fld("free_energy_nk", "number", "nK", "-Delta F / k_B"),
            fld("temperatures_nk", "array of numbers", "nK", "initial thermal temperatures"),
            fld("protocols", "array of \"sudden\" | \"adiabatic\" | {\"linear\": {\"duration_s\"}}", "s", "force ramps"),
            fld("trials", "integer", "count", "Monte Carlo trials per combination"),
            fld("mode_dim", "integer", "levels", "Fock dimension"),
        ],
        ExperimentKind::Fridge => vec![
            fld("xi_n_rad_s", "number", "rad/s", "trilinear coupling"),
            fld("nbar_hot", "number", "quanta", "initial thermal occupation of the hot mode"),
            fld("nbar_work", "number", "quanta", "initial thermal occupation of the work mode"),
            fld("nbar_cold", "number", "quanta", "initial thermal occupation of the cold mode"),
            fld("work_squeeze", "number (optional)", "dimensionless", "squeezed vacuum work mode instead of thermal"),
            fld("duration_s", "number", "s", "evolution time"),
            fld("steps", "integer", "count", "time samples"),
            fld("trials", "integer", "count", "sampled initial Fock tuples"),
        ],
        ExperimentKind::Vibronic => vec![
            fld("initial_cm1", "array of numbers", "cm^-1", "initial-state mode frequencies"),
            fld("final_cm1", "array of numbers", "cm^-1", "final-state mode frequencies"),
            fld("alpha", "array of numbers", "dimensionless", "displacement per mode"),
            fld("theta_rad", "array of numbers", "rad", "rotation angle for each adjacent mode pair"),
            fld("n_max", "integer", "quanta", "highest final level per mode"),
            fld("fwhm_cm1", "number", "cm^-1", "Gaussian broadening full width"),
            fld("grid_step_cm1", "number", "cm^-1", "spectrum grid step"),
            fld("min_intensity", "number", "dimensionless", "smallest reported stick"),
            fld("shots", "integer", "shots", "sampled final tuples; 0 disables sampling"),
        ],
        ExperimentKind::WignerQScan => vec![
            fld("mode_dim", "integer", "levels", "Fock dimension"),
            fld("state", "object", "-", "vacuum | {fock: {n}} | {coherent: {re, im}} | {even-cat: {re, im}} | {squeezed: {r}}"),
            fld("method", "\"husimi\" | \"wigner-parity\" | \"wigner-cbs\"", "-", "quasi-probability route"),
            fld("radius", "number", "displacement amplitude", "half-width of the square grid"),
            fld("points", "integer", "count", "grid points per axis"),
            fld("pad", "integer", "levels", "extra levels for displaced states"),
            fld(
                "reconstruction",
                "object (optional)",
                "-",
                "{displacement_radius, settings, n_meas, n_max, iterations} for MaxLik",
            ),
        ],
        ExperimentKind::CustomSequence => vec![
            fld("mode_dims", "array of integers", "levels", "Fock dimension per mode"),
            fld("lamb_dicke", "array of numbers (optional)", "dimensionless", "per-mode eta, default 0.1"),
            fld("qubit", "\"up\" | \"down\"", "-", "initial qubit level"),
            fld("fock", "array of integers", "quanta", "initial Fock level per mode"),
            fld(
                "segments",
                "array",
                "-",
                "{segment: constant, label, duration_s, terms} or {segment: uniform-bsb, mode, omega0_rad_s, beta, delta0_rad_s, duration_s, variant}",
            ),
            fld("samples_per_segment", "integer", "count", "trace samples per segment"),
        ],
    }
}

/// Bundled example config for each kind.
pub fn example_config(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::CbsTruthTable => include_str!("../../configs/cbs_truth_table.json"),
        ExperimentKind::UniformBsb => include_str!("../../configs/uniform_bsb.json"),
        ExperimentKind::CrossingScan => include_str!("../../configs/crossing_scan.json"),
        ExperimentKind::KerrPeaks => include_str!("../../configs/kerr_peaks.json"),
        ExperimentKind::Noon => include_str!("../../configs/noon.json"),
        ExperimentKind::Gkp => include_str!("../../configs/gkp.json"),
        ExperimentKind::Jarzynski => include_str!("../../configs/jarzynski.json"),
        ExperimentKind::Fridge => include_str!("../../configs/fridge.json"),
        ExperimentKind::Vibronic => include_str!("../../configs/vibronic_so2.json"),
        ExperimentKind::WignerQScan => include_str!("../../configs/wigner_q_scan.json"),
        ExperimentKind::CustomSequence => include_str!("../../configs/custom_sequence.json"),
    }
}

/// One `name  summary` line per kind.
pub fn list() -> String {
    ExperimentKind::ALL.iter().map(|k| format!("{:<16} {}\n", k.name(), summary_line(*k))).collect()
}

/// JSON schema-like description of a kind's parameter block.
pub fn describe(name: &str) -> Result<String> {
    let kind = ExperimentKind::from_name(name)?;
    let params: Vec<_> = fields(kind)
        .iter()
        .map(|f| json!({"name": f.name, "type": f.ty, "unit": f.unit, "description": f.about}))
        .collect();
    let example: serde_json::Value = serde_json::from_str(example_config(kind)).expect("bundled config is valid JSON");
    let doc = json!({
        "kind": kind.name(),
        "summary": summary_line(kind),
        "top_level": ["kind", "seed", "output_dir (optional)", "params"],
        "params": params,
        "example": example,
    });
    Ok(serde_json::to_string_pretty(&doc).expect("description serializes") + "\n")
}

/// Sizes the global rayon pool from `IONPHONON_THREADS` when set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| crate::Error::InvalidParameter(format!("{THREADS_ENV}={v} is not a thread count")))?;
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
