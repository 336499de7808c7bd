//! NOON states, parity interferometry and quantum Fisher information.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::dynamics::propagate_static;
use crate::error::{Error, Result};
use crate::hamiltonians::mode_rotation;
use crate::hilbert::{embed, expectation, mode_ladder, HybridState, Level, ModeRegister, OperatorMatrix, Slot};
use crate::linalg::{C64, ZERO};

/// (|N,0⟩ + e^{iNφ_S}|0,N⟩)/√2 on modes 0 and 1 with the qubit in |↓⟩.
pub fn noon_prepare(reg: &ModeRegister, n: usize, phase_s: f64) -> Result<HybridState> {
    if reg.num_modes() < 2 {
        return Err(Error::InvalidParameter("NOON state needs two modes".into()));
    }
    for m in 0..2 {
        if n >= reg.mode_dim(m) {
            return Err(Error::FockOutOfRange { n, dim: reg.mode_dim(m) });
        }
    }
    if n == 0 {
        return Err(Error::InvalidParameter("N must be ≥ 1".into()));
    }
    let rest = vec![0; reg.num_modes() - 2];
    let mut a = vec![n, 0];
    a.extend(&rest);
    let mut b = vec![0, n];
    b.extend(&rest);
    let mut amps = vec![ZERO; reg.total_dim()];
    amps[reg.index(Level::Down, &a)?] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[reg.index(Level::Down, &b)?] = C64::from_polar(FRAC_1_SQRT_2, n as f64 * phase_s);
    HybridState::from_amplitudes(reg, amps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeFit {
    pub contrast: f64,
    pub k: f64,
    pub phase: f64,
    pub offset: f64,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoonFringe {
    pub phis: Vec<f64>,
    pub parity: Vec<f64>,
    pub fit: FringeFit,
}

/// Balanced beam splitter with phase φ followed by the parity of mode 0.
pub fn noon_parity_fringe(state: &HybridState, phis: &[f64], k_max: f64) -> Result<NoonFringe> {
    let reg = state.register();
    let parity_op = embed(&mode_ladder(reg.mode_dim(0))?.parity, Slot::Mode(0), reg)?;
    let mut parity = Vec::with_capacity(phis.len());
    for &phi in phis {
        // the qubit sits in |↓⟩, so σ_z = −1 in the rotation generator
        let bs = mode_rotation(reg, 1.0, phi + FRAC_PI_2, 0, 1)?;
        let out = propagate_static(&bs, FRAC_PI_4, state)?;
        parity.push(expectation(&out, &parity_op)?.re);
    }
    let fit = fit_fringe(phis, &parity, k_max)?;
    Ok(NoonFringe { phis: phis.to_vec(), parity, fit })
}

/// Least-squares A cos kφ + B sin kφ + C for fixed k; returns (A, B, C, rss).
fn linear_fit(phis: &[f64], y: &[f64], k: f64) -> (f64, f64, f64, f64) {
    let mut m = Matrix3::zeros();
    let mut v = Vector3::zeros();
    for (&p, &yy) in phis.iter().zip(y) {
        let r = Vector3::new((k * p).cos(), (k * p).sin(), 1.0);
        m += r * r.transpose();
        v += r * yy;
    }
    let sol = m.svd(true, true).solve(&v, 1e-14).unwrap_or_else(|_| Vector3::zeros());
    let rss = phis
        .iter()
        .zip(y)
        .map(|(&p, &yy)| {
            let f = sol[0] * (k * p).cos() + sol[1] * (k * p).sin() + sol[2];
            (yy - f).powi(2)
        })
        .sum();
    (sol[0], sol[1], sol[2], rss)
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Fit A cos kφ + B sin kφ + C: coarse scan of k in (0, k_max], then golden-section refinement.
pub fn fit_fringe(phis: &[f64], y: &[f64], k_max: f64) -> Result<FringeFit> {
    if phis.len() != y.len() || phis.len() < 4 {
        return Err(Error::InvalidParameter("fringe fit needs ≥ 4 matching samples".into()));
    }
    let step = 0.01;
    let steps = (k_max / step).ceil() as usize;
    let mut best = (f64::INFINITY, step);
    for i in 1..=steps {
        let k = i as f64 * step;
        let rss = linear_fit(phis, y, k).3;
        if rss < best.0 {
            best = (rss, k);
        }
    }
    let k = golden_min(|k| linear_fit(phis, y, k).3, (best.1 - step).max(1e-6), best.1 + step, 1e-12);
    let (a, b, c, rss) = linear_fit(phis, y, k);
    Ok(FringeFit {
        contrast: a.hypot(b),
        k,
        phase: b.atan2(a),
        offset: c,
        rms_residual: (rss / phis.len() as f64).sqrt(),
    })
}

/// (n_a − n_b)/2
pub fn half_difference_number(reg: &ModeRegister, a: usize, b: usize) -> Result<OperatorMatrix> {
    let na = embed(&mode_ladder(reg.mode_dim(a))?.number, Slot::Mode(a), reg)?;
    let nb = embed(&mode_ladder(reg.mode_dim(b))?.number, Slot::Mode(b), reg)?;
    Ok(na.sub(&nb)?.scale_real(0.5))
}

/// 4·Var(G) for a pure state.
pub fn qfi(state: &HybridState, generator: &OperatorMatrix) -> Result<f64> {
    if !generator.is_hermitian() {
        return Err(Error::NotHermitian(generator.matrix().hermitian_deviation()));
    }
    let m = expectation(state, generator)?.re;
    let g2 = generator.mul(generator)?;
    Ok(4.0 * (expectation(state, &g2)?.re - m * m))
}
