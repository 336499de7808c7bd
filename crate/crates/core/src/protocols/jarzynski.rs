//! Work statistics of a dragged harmonic trap from two-point energy measurements.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{envelope, propagate_pulsed, PulseSegment, PulseSequence, StepControl};
use crate::error::{Error, Result};
use crate::hamiltonians::{displacement_elements, mode_detuning, HBAR, K_B};
use crate::hilbert::{embed, mode_ladder, sample_index, HybridState, Level, ModeRegister, Slot, DEFAULT_LEAKAGE_THRESHOLD};
use crate::linalg::C64;

use super::trajectory_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoParams {
    /// kg
    pub mass: f64,
    /// rad/s
    pub omega: f64,
    /// N
    pub force_max: f64,
    /// K
    pub temperature: f64,
    pub trials: usize,
    pub dim: usize,
}

impl ThermoParams {
    /// Force chosen so that ΔF = −k_B·`free_energy_kelvin`.
    pub fn from_free_energy(mass: f64, omega: f64, free_energy_kelvin: f64, temperature: f64, trials: usize, dim: usize) -> Self {
        let force_max = (2.0 * mass * omega * omega * K_B * free_energy_kelvin).sqrt();
        ThermoParams { mass, omega, force_max, temperature, trials, dim }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.omega > 0.0 && self.temperature > 0.0 && self.force_max >= 0.0) {
            return Err(Error::InvalidParameter("mass, frequency and temperature must be > 0, force ≥ 0".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be ≥ 1".into()));
        }
        if self.dim < 4 {
            return Err(Error::InvalidDimension(self.dim));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        1.0 / (K_B * self.temperature)
    }

    /// ΔF = −f²/(2Mω²) in J.
    pub fn delta_f(&self) -> f64 {
        -self.force_max * self.force_max / (2.0 * self.mass * self.omega * self.omega)
    }

    /// Final trap offset in units of the ground-state width: δ = f·x₀/(ħω), x₀ = √(ħ/2Mω).
    pub fn shift(&self) -> f64 {
        let x0 = (HBAR / (2.0 * self.mass * self.omega)).sqrt();
        self.force_max * x0 / (HBAR * self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum RampProtocol {
    Sudden,
    /// f(t) = f_max·t/τ
    Linear {
        #[serde(rename = "duration_s")]
        duration: f64,
    },
    Adiabatic,
}

#[derive(Debug, Clone, Serialize)]
pub struct JarzynskiResult {
    /// (initial n, final m) per trial
    pub samples: Vec<(usize, usize)>,
    /// J
    pub work: Vec<f64>,
    pub beta: f64,
    pub delta_f: f64,
    pub beta_delta_f: f64,
    /// ⟨e^{−βW}⟩
    pub estimator: f64,
    /// e^{−βΔF}
    pub target: f64,
    /// Σₙ pₙ Σₘ P(m|n) e^{−βW} without sampling
    pub exact_estimator: f64,
    /// −ln⟨e^{−β(W−ΔF)}⟩
    pub minus_ln_diss: f64,
    pub standard_error: f64,
    pub mean_work: f64,
}

/// P(m|n) for each initial level with nonnegligible Boltzmann weight.
fn transition_table(p: &ThermoParams, protocol: &RampProtocol, n_max: usize) -> Result<DMatrix<f64>> {
    let dim = p.dim;
    let delta = p.shift();
    let undisplace = displacement_elements(C64::new(delta, 0.0), dim);
    let mut table = DMatrix::zeros(n_max + 1, dim);
    match protocol {
        RampProtocol::Adiabatic => {
            for n in 0..=n_max {
                table[(n, n)] = 1.0;
            }
            return Ok(table);
        }
        RampProtocol::Sudden => {
            for n in 0..=n_max {
                for m in 0..dim {
                    table[(n, m)] = undisplace[(m, n)].norm_sqr();
                }
            }
        }
        RampProtocol::Linear { duration } => {
            if !(*duration > 0.0) {
                return Err(Error::InvalidParameter("ramp duration must be > 0".into()));
            }
            let reg = ModeRegister::with_dims(&[dim])?;
            let l = mode_ladder(dim)?;
            let x = embed(&(&l.lower + &l.raise), Slot::Mode(0), &reg)?.scale_real(p.omega);
            let (tau, d) = (*duration, delta);
            let seg = PulseSegment::constant("ramp", mode_detuning(&reg, 0, p.omega)?, tau).with_drive(envelope(move |t| d * t / tau), x);
            let seq = PulseSequence::new(vec![seg])?;
            let rows: Vec<Vec<f64>> = (0..=n_max)
                .into_par_iter()
                .map(|n| -> Result<Vec<f64>> {
                    let s = HybridState::basis(&reg, Level::Down, &[n])?;
                    let out = propagate_pulsed(&seq, &s, &StepControl::default())?;
                    let psi = &out.amplitudes()[dim..];
                    Ok((0..dim).map(|m| (0..dim).map(|k| undisplace[(m, k)] * psi[k]).sum::<C64>().norm_sqr()).collect())
                })
                .collect::<Result<_>>()?;
            for (n, r) in rows.iter().enumerate() {
                for (m, v) in r.iter().enumerate() {
                    table[(n, m)] = *v;
                }
            }
        }
    }
    for n in 0..=n_max {
        let lost = 1.0 - table.row(n).sum() + table[(n, dim - 1)] + table[(n, dim - 2)];
        if lost > DEFAULT_LEAKAGE_THRESHOLD {
            return Err(Error::Leakage { leakage: lost, threshold: DEFAULT_LEAKAGE_THRESHOLD });
        }
    }
    Ok(table)
}

/// Two-point-measurement Monte Carlo with per-trial streams derived from `seed`.
pub fn jarzynski_run(p: &ThermoParams, protocol: &RampProtocol, seed: u64) -> Result<JarzynskiResult> {
    p.validate()?;
    let hw = HBAR * p.omega;
    let bhw = p.beta() * hw;
    let mut weights = Vec::new();
    loop {
        let w = (-bhw * weights.len() as f64).exp();
        if w < 1e-12 {
            break;
        }
        weights.push(w);
        if weights.len() + 2 > p.dim {
            return Err(Error::Leakage { leakage: w, threshold: 1e-12 });
        }
    }
    let z: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= z);
    let n_max = weights.len() - 1;
    let table = transition_table(p, protocol, n_max)?;
    let d2 = p.shift().powi(2);
    let energy_final = |m: usize| hw * (m as f64 - d2);
    let work_of = |n: usize, m: usize| energy_final(m) - hw * n as f64;

    let rows: Vec<Vec<f64>> = (0..=n_max).map(|n| table.row(n).iter().copied().collect()).collect();
    let samples: Vec<(usize, usize)> = (0..p.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(seed, i as u64);
            let n = sample_index(&weights, &mut rng);
            let m = sample_index(&rows[n], &mut rng);
            (n, m)
        })
        .collect();
    let beta = p.beta();
    let delta_f = p.delta_f();
    let work: Vec<f64> = samples.iter().map(|&(n, m)| work_of(n, m)).collect();
    let xs: Vec<f64> = work.iter().map(|w| (-beta * (w - delta_f)).exp()).collect();
    let nf = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0) } else { 0.0 };
    let se_mean = (var / nf).sqrt();
    let mut exact = 0.0;
    for (n, w) in weights.iter().enumerate() {
        for (m, pm) in rows[n].iter().enumerate() {
            exact += w * pm * (-beta * work_of(n, m)).exp();
        }
    }
    Ok(JarzynskiResult {
        beta,
        delta_f,
        beta_delta_f: beta * delta_f,
        estimator: work.iter().map(|w| (-beta * w).exp()).sum::<f64>() / nf,
        target: (-beta * delta_f).exp(),
        exact_estimator: exact,
        minus_ln_diss: -mean.ln(),
        standard_error: se_mean / mean,
        mean_work: work.iter().sum::<f64>() / nf,
        samples,
        work,
    })
}
