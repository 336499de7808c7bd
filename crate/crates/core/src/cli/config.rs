//! Experiment configuration documents.
//!
//! A config is a JSON object `{kind, seed, output_dir?, params}`; `params` is decoded into the
//! kind's own struct. Every level rejects unknown fields and physical quantities carry a unit
//! suffix (`_rad_s`, `_s`, `_cm1`, `_nk`, `_amu`, `_rad`).

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::StaVariant;
use crate::error::{Error, Result};
use crate::hamiltonians::{Axis, Sideband};
use crate::hilbert::Level;
use crate::protocols::RampProtocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    CbsTruthTable,
    UniformBsb,
    CrossingScan,
    KerrPeaks,
    Noon,
    Gkp,
    Jarzynski,
    Fridge,
    Vibronic,
    WignerQScan,
    CustomSequence,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 11] = [
        ExperimentKind::CbsTruthTable,
        ExperimentKind::UniformBsb,
        ExperimentKind::CrossingScan,
        ExperimentKind::KerrPeaks,
        ExperimentKind::Noon,
        ExperimentKind::Gkp,
        ExperimentKind::Jarzynski,
        ExperimentKind::Fridge,
        ExperimentKind::Vibronic,
        ExperimentKind::WignerQScan,
        ExperimentKind::CustomSequence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CbsTruthTable => "cbs-truth-table",
            ExperimentKind::UniformBsb => "uniform-bsb",
            ExperimentKind::CrossingScan => "crossing-scan",
            ExperimentKind::KerrPeaks => "kerr-peaks",
            ExperimentKind::Noon => "noon",
            ExperimentKind::Gkp => "gkp",
            ExperimentKind::Jarzynski => "jarzynski",
            ExperimentKind::Fridge => "fridge",
            ExperimentKind::Vibronic => "vibronic",
            ExperimentKind::WignerQScan => "wigner-q-scan",
            ExperimentKind::CustomSequence => "custom-sequence",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown experiment kind `{name}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: ExperimentKind,
    #[serde(default)]
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<String>,
    params: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CbsParams {
    /// Fock dimension of each of the two modes.
    pub mode_dim: usize,
    pub xi_rad_s: f64,
    /// Sampled shots per input row; 0 reports exact probabilities only.
    pub shots: u64,
    /// Random single-mode states used to compare the ancilla parity with the direct operator.
    pub parity_states: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsbParams {
    pub mode_dim: usize,
    pub omega0_rad_s: f64,
    pub beta: f64,
    pub delta0_rad_s: f64,
    pub duration_s: f64,
    pub variant: StaVariant,
    pub max_n: usize,
    /// Time samples of the population trace for each n.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingParams {
    pub xi_d_rad_s: f64,
    pub delta_min_rad_s: f64,
    pub delta_max_rad_s: f64,
    pub points: usize,
    /// Highest manifold 2n_a + n_b included in the eigenvalue table.
    pub max_manifold: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KerrParams {
    pub xi_d_rad_s: f64,
    pub delta_rad_s: f64,
    /// Shifts are tabulated for n_b = 0..=max_n_b.
    pub max_n_b: usize,
    /// Probe spectra are simulated for n_b = 0..=probe_max_n_b.
    pub probe_max_n_b: usize,
    pub probe_rabi_rad_s: f64,
    pub probe_duration_s: f64,
    pub detuning_min_rad_s: f64,
    pub detuning_max_rad_s: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoonParams {
    pub n: usize,
    pub mode_dim: usize,
    pub phase_s_rad: f64,
    pub points: usize,
    pub k_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GkpCliParams {
    /// Displacement-amplitude units.
    pub spacing: f64,
    pub squeeze: f64,
    pub half_width: usize,
    pub envelope_variance: f64,
    pub mode_dim: usize,
    /// Range of the quadrature grid, x = (a + a†)/√2.
    pub quadrature_min: f64,
    pub quadrature_max: f64,
    pub points: usize,
    /// Working dimension for the anticommutator check.
    pub anticommutator_work_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JarzynskiCliParams {
    pub mass_amu: f64,
    pub omega_rad_s: f64,
    /// −ΔF/k_B
    pub free_energy_nk: f64,
    pub temperatures_nk: Vec<f64>,
    pub protocols: Vec<RampProtocol>,
    pub trials: usize,
    pub mode_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FridgeCliParams {
    pub xi_n_rad_s: f64,
    pub nbar_hot: f64,
    pub nbar_work: f64,
    pub nbar_cold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub work_squeeze: Option<f64>,
    pub duration_s: f64,
    pub steps: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VibronicCliParams {
    pub initial_cm1: Vec<f64>,
    pub final_cm1: Vec<f64>,
    pub alpha: Vec<f64>,
    pub theta_rad: Vec<f64>,
    pub n_max: usize,
    pub fwhm_cm1: f64,
    pub grid_step_cm1: f64,
    pub min_intensity: f64,
    /// Boson-sampling shots drawn from the FC table; 0 disables sampling.
    pub shots: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    Vacuum,
    Fock { n: usize },
    Coherent { re: f64, im: f64 },
    /// (|α⟩ + |−α⟩) normalized.
    EvenCat { re: f64, im: f64 },
    Squeezed { r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMethod {
    Husimi,
    WignerParity,
    WignerCbs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionParams {
    /// Displacements sit on a circle of this radius.
    pub displacement_radius: f64,
    pub settings: usize,
    pub n_meas: usize,
    pub n_max: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanParams {
    pub mode_dim: usize,
    pub state: StateSpec,
    pub method: ScanMethod,
    pub radius: f64,
    pub points: usize,
    pub pad: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<ReconstructionParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "term", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TermSpec {
    Carrier { rabi_rad_s: f64, phase_rad: f64 },
    QubitDetuning { delta_rad_s: f64 },
    ModeDetuning { mode: usize, delta_rad_s: f64 },
    Sideband { kind: Sideband, order: usize, mode: usize, rabi_rad_s: f64, phase_rad: f64 },
    SpinDisplacement { alpha_rate_rad_s: f64, phase_rad: f64, axis: Axis, mode: usize },
    SpinSqueeze { zeta_rad_s: f64, phase_rad: f64, mode: usize },
    ModeRotation { theta_rad_s: f64, phase_rad: f64, i: usize, j: usize },
    DipoleExchange { omega_c_rad_s: f64, i: usize, j: usize },
    Cbs { xi_rad_s: f64, upsilon_rad: f64, i: usize, j: usize, control: Level },
    DegenerateParametric { xi_rad_s: f64, delta_rad_s: f64, a: usize, b: usize },
    Trilinear { xi_rad_s: f64, delta_rad_s: f64, h: usize, w: usize, c: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "segment", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SegmentSpec {
    Constant { label: String, duration_s: f64, terms: Vec<TermSpec> },
    UniformBsb { mode: usize, omega0_rad_s: f64, beta: f64, delta0_rad_s: f64, duration_s: f64, variant: StaVariant },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomParams {
    pub mode_dims: Vec<usize>,
    /// Per-mode Lamb–Dicke parameters; defaults to 0.1 for every mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lamb_dicke: Option<Vec<f64>>,
    pub qubit: Level,
    pub fock: Vec<usize>,
    pub segments: Vec<SegmentSpec>,
    pub samples_per_segment: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    CbsTruthTable(CbsParams),
    UniformBsb(BsbParams),
    CrossingScan(CrossingParams),
    KerrPeaks(KerrParams),
    Noon(NoonParams),
    Gkp(GkpCliParams),
    Jarzynski(JarzynskiCliParams),
    Fridge(FridgeCliParams),
    Vibronic(VibronicCliParams),
    WignerQScan(ScanParams),
    CustomSequence(CustomParams),
}

impl Experiment {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Experiment::CbsTruthTable(_) => ExperimentKind::CbsTruthTable,
            Experiment::UniformBsb(_) => ExperimentKind::UniformBsb,
            Experiment::CrossingScan(_) => ExperimentKind::CrossingScan,
            Experiment::KerrPeaks(_) => ExperimentKind::KerrPeaks,
            Experiment::Noon(_) => ExperimentKind::Noon,
            Experiment::Gkp(_) => ExperimentKind::Gkp,
            Experiment::Jarzynski(_) => ExperimentKind::Jarzynski,
            Experiment::Fridge(_) => ExperimentKind::Fridge,
            Experiment::Vibronic(_) => ExperimentKind::Vibronic,
            Experiment::WignerQScan(_) => ExperimentKind::WignerQScan,
            Experiment::CustomSequence(_) => ExperimentKind::CustomSequence,
        }
    }

    fn params_value(&self) -> Value {
        let v = match self {
            Experiment::CbsTruthTable(p) => serde_json::to_value(p),
            Experiment::UniformBsb(p) => serde_json::to_value(p),
            Experiment::CrossingScan(p) => serde_json::to_value(p),
            Experiment::KerrPeaks(p) => serde_json::to_value(p),
            Experiment::Noon(p) => serde_json::to_value(p),
            Experiment::Gkp(p) => serde_json::to_value(p),
            Experiment::Jarzynski(p) => serde_json::to_value(p),
            Experiment::Fridge(p) => serde_json::to_value(p),
            Experiment::Vibronic(p) => serde_json::to_value(p),
            Experiment::WignerQScan(p) => serde_json::to_value(p),
            Experiment::CustomSequence(p) => serde_json::to_value(p),
        };
        v.expect("parameter structs serialize")
    }

    /// The trial-like count that `--trials` overrides, if the kind has one.
    pub fn set_trials(&mut self, n: usize) -> Result<()> {
        match self {
            Experiment::Jarzynski(p) => p.trials = n,
            Experiment::Fridge(p) => p.trials = n,
            Experiment::CbsTruthTable(p) => p.shots = n as u64,
            Experiment::Vibronic(p) => p.shots = n as u64,
            other => {
                return Err(Error::InvalidParameter(format!("--trials does not apply to `{}`", other.kind().name())));
            }
        }
        Ok(())
    }
}

fn decode<T: serde::de::DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Parse(format!("params: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: Option<String>,
    pub experiment: Experiment,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let experiment = match raw.kind {
            ExperimentKind::CbsTruthTable => Experiment::CbsTruthTable(decode(raw.params)?),
            ExperimentKind::UniformBsb => Experiment::UniformBsb(decode(raw.params)?),
            ExperimentKind::CrossingScan => Experiment::CrossingScan(decode(raw.params)?),
            ExperimentKind::KerrPeaks => Experiment::KerrPeaks(decode(raw.params)?),
            ExperimentKind::Noon => Experiment::Noon(decode(raw.params)?),
            ExperimentKind::Gkp => Experiment::Gkp(decode(raw.params)?),
            ExperimentKind::Jarzynski => Experiment::Jarzynski(decode(raw.params)?),
            ExperimentKind::Fridge => Experiment::Fridge(decode(raw.params)?),
            ExperimentKind::Vibronic => Experiment::Vibronic(decode(raw.params)?),
            ExperimentKind::WignerQScan => Experiment::WignerQScan(decode(raw.params)?),
            ExperimentKind::CustomSequence => Experiment::CustomSequence(decode(raw.params)?),
        };
        Ok(ExperimentConfig { seed: raw.seed, output_dir: raw.output_dir, experiment })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Canonical JSON (sorted keys, compact).
    pub fn to_json(&self) -> String {
        let raw = RawConfig {
            kind: self.experiment.kind(),
            seed: self.seed,
            output_dir: self.output_dir.clone(),
            params: self.experiment.params_value(),
        };
        serde_json::to_string(&raw).expect("config serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        let v: Value = serde_json::from_str(&self.to_json()).expect("round trip");
        serde_json::to_string_pretty(&v).expect("config serializes")
    }
}
