//! Time evolution: static exponentials, pulse sequences with time-dependent
//! envelopes, the uniform blue-sideband sweep and sideband spectroscopy scans.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    embed_product, mode_ladder, qubit_populations, sigma_plus, sigma_z, HybridState, ModeRegister, OperatorMatrix,
    Slot, DEFAULT_LEAKAGE_THRESHOLD,
};
use crate::linalg::{self, expm_action, Propagator, C64, DEFAULT_EIG_THRESHOLD, I};

pub type Envelope = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub fn envelope<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Envelope {
    Arc::new(f)
}

/// Generator multiplied by a real scalar envelope of segment-local time.
#[derive(Clone)]
pub struct DriveTerm {
    pub envelope: Envelope,
    pub generator: OperatorMatrix,
}

#[derive(Clone)]
pub struct PulseSegment {
    pub label: String,
    pub static_h: OperatorMatrix,
    pub drives: Vec<DriveTerm>,
    /// Seconds.
    pub duration: f64,
}

impl std::fmt::Debug for PulseSegment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PulseSegment")
            .field("label", &self.label)
            .field("drives", &self.drives.len())
            .field("duration", &self.duration)
            .finish()
    }
}

impl PulseSegment {
    pub fn constant(label: &str, h: OperatorMatrix, duration: f64) -> Self {
        PulseSegment { label: label.to_string(), static_h: h, drives: Vec::new(), duration }
    }

    pub fn with_drive(mut self, envelope: Envelope, generator: OperatorMatrix) -> Self {
        self.drives.push(DriveTerm { envelope, generator });
        self
    }

    pub fn register(&self) -> &ModeRegister {
        self.static_h.register()
    }

    pub fn hamiltonian_at(&self, t: f64) -> Result<OperatorMatrix> {
        let mut h = self.static_h.clone();
        for d in &self.drives {
            h = h.add(&d.generator.scale_real((d.envelope)(t)))?;
        }
        Ok(h)
    }

    fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidParameter(format!("segment '{}' duration must be > 0", self.label)));
        }
        if !self.static_h.is_hermitian() {
            return Err(Error::NotHermitian(self.static_h.matrix().hermitian_deviation()));
        }
        for d in &self.drives {
            if !d.generator.is_hermitian() {
                return Err(Error::NotHermitian(d.generator.matrix().hermitian_deviation()));
            }
            if d.generator.register() != self.register() {
                return Err(Error::RegisterMismatch);
            }
        }
        Ok(())
    }

    /// Time-reversed adjoint: running it after this segment undoes it.
    pub fn reversed(&self) -> Self {
        let t = self.duration;
        PulseSegment {
            label: format!("{}-reversed", self.label),
            static_h: self.static_h.scale_real(-1.0),
            drives: self
                .drives
                .iter()
                .map(|d| {
                    let f = d.envelope.clone();
                    DriveTerm { envelope: envelope(move |s| -f(t - s)), generator: d.generator.clone() }
                })
                .collect(),
            duration: t,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PulseSequence {
    segments: Vec<PulseSegment>,
}

impl PulseSequence {
    pub fn new(segments: Vec<PulseSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter("pulse sequence must not be empty".into()));
        }
        Ok(PulseSequence { segments })
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn then(mut self, other: PulseSequence) -> Self {
        self.segments.extend(other.segments);
        self
    }

    pub fn reversed(&self) -> Self {
        PulseSequence { segments: self.segments.iter().rev().map(|s| s.reversed()).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    /// Accept when doubling the step count moves the state by less than this (2-norm).
    pub tolerance: f64,
    pub initial_steps: usize,
    pub max_doublings: usize,
    pub leakage_threshold: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { tolerance: 1e-8, initial_steps: 4, max_doublings: 18, leakage_threshold: DEFAULT_LEAKAGE_THRESHOLD }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticOptions {
    pub leakage_threshold: f64,
    pub eig_threshold: usize,
}

impl Default for StaticOptions {
    fn default() -> Self {
        StaticOptions { leakage_threshold: DEFAULT_LEAKAGE_THRESHOLD, eig_threshold: DEFAULT_EIG_THRESHOLD }
    }
}

fn check_static(h: &OperatorMatrix, state: &HybridState) -> Result<()> {
    if h.register() != state.register() {
        return Err(Error::RegisterMismatch);
    }
    if !h.is_hermitian() {
        return Err(Error::NotHermitian(h.matrix().hermitian_deviation()));
    }
    Ok(())
}

/// exp(−iHt)|ψ⟩
pub fn propagate_static(h: &OperatorMatrix, t: f64, state: &HybridState) -> Result<HybridState> {
    propagate_static_with(h, t, state, &StaticOptions::default())
}

pub fn propagate_static_with(h: &OperatorMatrix, t: f64, state: &HybridState, opts: &StaticOptions) -> Result<HybridState> {
    check_static(h, state)?;
    let p = Propagator::with_threshold(h.matrix(), opts.eig_threshold);
    finish(state.register(), p.apply(t, state.amplitudes()), opts.leakage_threshold)
}

/// Evolve many states (or the same state to many times) under one Hamiltonian in parallel.
pub fn propagate_batch(h: &OperatorMatrix, t: f64, states: &[HybridState]) -> Result<Vec<HybridState>> {
    for s in states {
        check_static(h, s)?;
    }
    let p = Propagator::new(h.matrix());
    states
        .par_iter()
        .map(|s| finish(s.register(), p.apply(t, s.amplitudes()), DEFAULT_LEAKAGE_THRESHOLD))
        .collect()
}

fn finish(reg: &ModeRegister, amps: Vec<C64>, threshold: f64) -> Result<HybridState> {
    let s = HybridState::from_amplitudes(reg, amps)?;
    s.check_leakage(threshold)?;
    Ok(s)
}

const SQRT3_6: f64 = 0.288_675_134_594_812_9; // √3/6

/// One fourth-order commutator-free Magnus step from t to t+h.
fn cf4_step(seg: &PulseSegment, norms: &[f64], t: f64, h: f64, x: &[C64]) -> Vec<C64> {
    let t1 = t + (0.5 - SQRT3_6) * h;
    let t2 = t + (0.5 + SQRT3_6) * h;
    let f1: Vec<f64> = seg.drives.iter().map(|d| (d.envelope)(t1)).collect();
    let f2: Vec<f64> = seg.drives.iter().map(|d| (d.envelope)(t2)).collect();
    let (wa, wb) = (0.25 + SQRT3_6, 0.25 - SQRT3_6);
    let mut y = x.to_vec();
    for (w1, w2) in [(wa, wb), (wb, wa)] {
        let coefs: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| h * (w1 * a + w2 * b)).collect();
        let c0 = 0.5 * h;
        let bound = c0 * norms[0] + coefs.iter().zip(&norms[1..]).map(|(c, n)| c.abs() * n).sum::<f64>();
        let apply = |v: &[C64], out: &mut [C64]| {
            seg.static_h.matrix().matvec_add(C64::new(c0, 0.0), v, out);
            for (d, &c) in seg.drives.iter().zip(&coefs) {
                if c != 0.0 {
                    d.generator.matrix().matvec_add(C64::new(c, 0.0), v, out);
                }
            }
        };
        y = expm_action(apply, bound, 1.0, &y);
    }
    y
}

fn evolve_fixed(seg: &PulseSegment, norms: &[f64], t0: f64, t1: f64, steps: usize, x: &[C64]) -> Vec<C64> {
    let h = (t1 - t0) / steps as f64;
    let mut y = x.to_vec();
    for k in 0..steps {
        y = cf4_step(seg, norms, t0 + k as f64 * h, h, &y);
    }
    y
}

/// Evolve over [t0, t1] of a segment's local time with step doubling.
fn evolve_interval(seg: &PulseSegment, t0: f64, t1: f64, x: &[C64], ctl: &StepControl) -> Result<Vec<C64>> {
    if seg.drives.is_empty() {
        let p = Propagator::new(seg.static_h.matrix());
        return Ok(p.apply(t1 - t0, x));
    }
    let mut norms = vec![seg.static_h.matrix().one_norm()];
    norms.extend(seg.drives.iter().map(|d| d.generator.matrix().one_norm()));
    let mut steps = ctl.initial_steps.max(1);
    let mut coarse = evolve_fixed(seg, &norms, t0, t1, steps, x);
    for _ in 0..ctl.max_doublings {
        steps *= 2;
        let fine = evolve_fixed(seg, &norms, t0, t1, steps, x);
        let diff = linalg::diff_norm(&coarse, &fine);
        if diff < ctl.tolerance {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Convergence(format!(
        "segment '{}' did not reach tolerance {:.1e} with {} steps",
        seg.label, ctl.tolerance, steps
    )))
}

/// Time-ordered evolution through every segment.
pub fn propagate_pulsed(seq: &PulseSequence, state: &HybridState, ctl: &StepControl) -> Result<HybridState> {
    let mut amps = state.amplitudes().to_vec();
    for seg in seq.segments() {
        seg.validate()?;
        if seg.register() != state.register() {
            return Err(Error::RegisterMismatch);
        }
        amps = evolve_interval(seg, 0.0, seg.duration, &amps, ctl)?;
    }
    finish(state.register(), amps, ctl.leakage_threshold)
}

/// Like `propagate_pulsed`, also recording ⟨O_k⟩ at `samples` evenly spaced points per segment
/// (and at t = 0). Returns (time, expectations) rows.
pub fn propagate_pulsed_sampled(
    seq: &PulseSequence,
    state: &HybridState,
    ctl: &StepControl,
    observables: &[OperatorMatrix],
    samples: usize,
) -> Result<(HybridState, Vec<(f64, Vec<f64>)>)> {
    let record = |amps: &[C64]| -> Vec<f64> {
        observables.iter().map(|o| linalg::dot(amps, &o.apply(amps)).re).collect()
    };
    let mut amps = state.amplitudes().to_vec();
    let mut rows = vec![(0.0, record(&amps))];
    let mut clock = 0.0;
    let samples = samples.max(1);
    for seg in seq.segments() {
        seg.validate()?;
        if seg.register() != state.register() {
            return Err(Error::RegisterMismatch);
        }
        for k in 0..samples {
            let a = seg.duration * k as f64 / samples as f64;
            let b = seg.duration * (k + 1) as f64 / samples as f64;
            amps = evolve_interval(seg, a, b, &amps, ctl)?;
            rows.push((clock + b, record(&amps)));
        }
        clock += seg.duration;
    }
    Ok((finish(state.register(), amps, ctl.leakage_threshold)?, rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StaVariant {
    /// One sweep Ω₀[sin(πt/T)+iβ], Δ₀cos(πt/T) over the whole duration.
    Continuous,
    /// Same envelopes with the sign of Re Ω and of Δ flipped for t > T/2.
    MidInversion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaPulseParams {
    /// Peak sideband Rabi frequency for n = 0, rad/s.
    pub omega0: f64,
    pub beta: f64,
    /// rad/s
    pub delta0: f64,
    /// Total sweep time T, s.
    pub duration: f64,
    pub mode: usize,
    pub variant: StaVariant,
}

impl StaPulseParams {
    /// Ω₀ = 2π·38.5 kHz, β = 0.075, Δ₀ = 1.6Ω₀, T = 91 μs.
    pub fn reference(mode: usize) -> Self {
        let omega0 = 2.0 * PI * 38.5e3;
        StaPulseParams { omega0, beta: 0.075, delta0: 1.6 * omega0, duration: 91e-6, mode, variant: StaVariant::Continuous }
    }

    /// n = 0 blue-sideband π time, π/Ω₀.
    pub fn pi_time(&self) -> f64 {
        PI / self.omega0
    }
}

/// Generators (½(σ₊a† + σ₋a), (i/2)(σ₊a† − σ₋a), −½σ_z) driven by Re Ω, Im Ω and Δ.
fn bsb_generators(reg: &ModeRegister, mode: usize) -> Result<[OperatorMatrix; 3]> {
    let ad = mode_ladder(reg.slot_dim(Slot::Mode(mode))?)?.raise;
    let sp = sigma_plus() * C64::new(0.5, 0.0);
    let up = embed_product(&[(Slot::Qubit, &sp), (Slot::Mode(mode), &ad)], reg)?;
    let re = up.add(&up.adjoint())?;
    let iu = up.scale(I);
    let im = iu.add(&iu.adjoint())?;
    let z = sigma_z() * C64::new(-0.5, 0.0);
    let det = embed_product(&[(Slot::Qubit, &z)], reg)?;
    Ok([re, im, det])
}

/// Uniform blue-sideband sweep |↓,n⟩ → |↑,n+1⟩ with an n-independent duration.
pub fn uniform_bsb(reg: &ModeRegister, p: &StaPulseParams) -> Result<PulseSequence> {
    if !(p.omega0 > 0.0 && p.duration > 0.0) {
        return Err(Error::InvalidParameter("uniform BSB needs Ω₀ > 0 and T > 0".into()));
    }
    let [re, im, det] = bsb_generators(reg, p.mode)?;
    let (w, b, d, t) = (p.omega0, p.beta, p.delta0, p.duration);
    let zero = OperatorMatrix::zero(reg);
    let build = |label: &str, offset: f64, sign: f64, len: f64| {
        PulseSegment::constant(label, zero.clone(), len)
            .with_drive(envelope(move |s| sign * w * (PI * (s + offset) / t).sin()), re.clone())
            .with_drive(envelope(move |_| w * b), im.clone())
            .with_drive(envelope(move |s| sign * d * (PI * (s + offset) / t).cos()), det.clone())
    };
    match p.variant {
        StaVariant::Continuous => PulseSequence::new(vec![build("uniform-bsb", 0.0, 1.0, t)]),
        StaVariant::MidInversion => PulseSequence::new(vec![
            build("uniform-bsb-first-half", 0.0, 1.0, t / 2.0),
            build("uniform-bsb-second-half", t / 2.0, -1.0, t / 2.0),
        ]),
    }
}

/// Probability of |↑⟩ after each detuning's probe Hamiltonian acts for `duration`.
pub fn sideband_spectrum_scan<F>(builder: F, detunings: &[f64], state: &HybridState, duration: f64) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<OperatorMatrix> + Sync,
{
    if detunings.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidParameter("detuning range must be finite".into()));
    }
    detunings
        .par_iter()
        .map(|&d| {
            let h = builder(d)?;
            let out = propagate_static(&h, duration, state)?;
            Ok((d, qubit_populations(&out)[0]))
        })
        .collect()
}

/// Identity pulse of the given length (useful as a wait in custom sequences).
pub fn idle(reg: &ModeRegister, duration: f64) -> PulseSegment {
    PulseSegment::constant("idle", OperatorMatrix::zero(reg), duration)
}

pub fn transfer_probability(state: &HybridState, reg: &ModeRegister, n: usize, mode: usize) -> Result<f64> {
    let mut ns = vec![0; reg.num_modes()];
    ns[mode] = n + 1;
    Ok(state.amplitude(crate::hilbert::Level::Up, &ns)?.norm_sqr())
}

