//! Phonon addition and subtraction with a uniform blue sideband and a carrier π pulse.

use std::f64::consts::PI;

use rand::{Rng, RngCore};

use crate::dynamics::{propagate_pulsed, propagate_static, uniform_bsb, StaPulseParams, StepControl};
use crate::error::{Error, Result};
use crate::hamiltonians::{carrier, DriveParams};
use crate::hilbert::{qubit_populations, HybridState, Level, Slot, DEFAULT_LEAKAGE_THRESHOLD};
use crate::linalg::ZERO;
use crate::measurement::{ideal_carrier_pi, ideal_reverse_bsb};

fn require_down(state: &HybridState) -> Result<()> {
    if qubit_populations(state)[0] > 1e-12 {
        return Err(Error::InvalidParameter("arithmetic expects the qubit in |↓⟩".into()));
    }
    Ok(())
}

/// Σcₙ|↓,n⟩ → Σcₙ|↓,n+1⟩ with ideal pulses.
pub fn phonon_add(state: &HybridState, mode: usize) -> Result<HybridState> {
    require_down(state)?;
    let reg = state.register();
    reg.slot_dim(Slot::Mode(mode))?;
    let d = reg.mode_dim(mode);
    let top: f64 = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| reg.tuple(*i).1[mode] == d - 1)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if top > 0.0 {
        return Err(Error::Leakage { leakage: top, threshold: 0.0 });
    }
    // blue sideband |↓,n⟩ → |↑,n+1⟩, then carrier |↑⟩ → |↓⟩
    let out = ideal_carrier_pi(&ideal_reverse_bsb(state, mode)?)?;
    out.check_leakage(DEFAULT_LEAKAGE_THRESHOLD)?;
    Ok(out)
}

/// Addition through the simulated uniform sweep and carrier pulse; keeps the pulse phases.
pub fn phonon_add_pulsed(state: &HybridState, sta: &StaPulseParams, carrier_rabi: f64) -> Result<HybridState> {
    require_down(state)?;
    let reg = state.register();
    let s = propagate_pulsed(&uniform_bsb(reg, sta)?, state, &StepControl::default())?;
    propagate_static(&carrier(reg, &DriveParams::new(carrier_rabi, 0.0))?, PI / carrier_rabi, &s)
}

/// Probability that the vacuum component fluoresces and the run is discarded.
pub fn subtract_success_probability(state: &HybridState, mode: usize) -> Result<f64> {
    let p = crate::hilbert::phonon_distribution(state, mode)?;
    Ok(1.0 - p[0])
}

/// Carrier π then the reverse sweep. Dark outcome: Σ_{n≥1}cₙ|↓,n−1⟩ (success).
/// Bright outcome: the vacuum branch, returned as |↑⟩ with success = false.
pub fn phonon_subtract(state: &HybridState, mode: usize, rng: &mut dyn RngCore) -> Result<(HybridState, bool)> {
    require_down(state)?;
    let reg = state.register();
    reg.slot_dim(Slot::Mode(mode))?;
    let after = ideal_reverse_bsb(&ideal_carrier_pi(state)?, mode)?;
    let p_bright = qubit_populations(&after)[0];
    let bright = p_bright > 0.0 && rng.random::<f64>() < p_bright;
    let half = reg.motional_dim();
    let mut amps = after.into_amplitudes();
    if bright {
        amps[half..].iter_mut().for_each(|a| *a = ZERO);
    } else {
        amps[..half].iter_mut().for_each(|a| *a = ZERO);
    }
    let out = HybridState::from_amplitudes(reg, amps)?;
    debug_assert!(bright || out.amplitude(Level::Up, &vec![0; reg.num_modes()]).map(|a| a.norm()).unwrap_or(0.0) == 0.0);
    Ok((out, !bright))
}
