//! Controlled beam splitter as a Fredkin gate on single-phonon inputs.

use rand::RngCore;
use serde::Serialize;

use crate::dynamics::propagate_static;
use crate::error::{Error, Result};
use crate::hamiltonians::{cbs, cbs_swap_time};
use crate::hilbert::{HybridState, Level, ModeRegister};

/// Rows are inputs, columns outcomes, both indexed 4c + 2nᵢ + nⱼ with c = 1 for |↑⟩.
#[derive(Debug, Clone, Serialize)]
pub struct FredkinTable {
    pub probabilities: [[f64; 8]; 8],
    pub counts: Option<Vec<Vec<u64>>>,
    pub success: [f64; 8],
}

pub fn fredkin_expected(input: usize) -> usize {
    if input >= 4 {
        4 + ((input & 1) << 1) + ((input >> 1) & 1)
    } else {
        input
    }
}

fn level(c: usize) -> Level {
    if c == 1 {
        Level::Up
    } else {
        Level::Down
    }
}

/// Exact outcome table for the swap pulse, optionally sampled with `shots` per input.
pub fn fredkin_truth_table(reg: &ModeRegister, xi: f64, shots: Option<u64>, rng: &mut dyn RngCore) -> Result<FredkinTable> {
    if reg.num_modes() != 2 {
        return Err(Error::InvalidParameter("Fredkin table needs exactly two modes".into()));
    }
    if reg.dims().iter().any(|&d| d < 2) {
        return Err(Error::InvalidParameter("modes must hold a single phonon".into()));
    }
    let h = cbs(reg, xi, 0.0, 0, 1, Level::Up)?;
    let t = cbs_swap_time(xi);
    let mut probabilities = [[0.0; 8]; 8];
    let mut counts = shots.map(|_| Vec::with_capacity(8));
    let mut success = [0.0; 8];
    for input in 0..8 {
        let (c, ni, nj) = (input >> 2, (input >> 1) & 1, input & 1);
        let s = HybridState::basis(reg, level(c), &[ni, nj])?;
        let out = propagate_static(&h, t, &s)?;
        for (o, p) in probabilities[input].iter_mut().enumerate() {
            let (oc, oi, oj) = (o >> 2, (o >> 1) & 1, o & 1);
            *p = out.amplitude(level(oc), &[oi, oj])?.norm_sqr();
        }
        success[input] = probabilities[input][fredkin_expected(input)];
        if let (Some(n), Some(cs)) = (shots, counts.as_mut()) {
            let mut w: Vec<f64> = probabilities[input].to_vec();
            let outside = (1.0 - w.iter().sum::<f64>()).max(0.0);
            w.push(outside);
            let mut k = super::multinomial(n, &w, rng)?;
            k.truncate(8);
            cs.push(k);
        }
    }
    Ok(FredkinTable { probabilities, counts, success })
}
