//! Approximate GKP states as finite combs of displaced squeezed states.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{displacement_elements, squeezed_vacuum_amplitudes};
use crate::hilbert::{reduced_density, HybridState, ModeRegister, DEFAULT_LEAKAGE_THRESHOLD};
use crate::linalg::{C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GkpParams {
    /// Lattice spacing l in displacement-amplitude units: D(l) shifts x = (a+a†)/√2 by √2·l.
    pub spacing: f64,
    pub squeeze: f64,
    pub half_width: usize,
    /// c_k ∝ exp(−(kl)²/(2v))
    pub envelope_variance: f64,
    pub dim: usize,
}

impl Default for GkpParams {
    fn default() -> Self {
        GkpParams { spacing: (2.0 * PI).sqrt(), squeeze: 0.9, half_width: 1, envelope_variance: 10.0, dim: 120 }
    }
}

impl GkpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0 && self.squeeze >= 0.0 && self.envelope_variance > 0.0) {
            return Err(Error::InvalidParameter("spacing, envelope variance must be > 0 and squeeze ≥ 0".into()));
        }
        if self.dim < 4 {
            return Err(Error::InvalidDimension(self.dim));
        }
        Ok(())
    }

    pub fn weights(&self) -> Vec<(i64, f64)> {
        let k = self.half_width as i64;
        (-k..=k)
            .map(|j| {
                let x = j as f64 * self.spacing;
                (j, (-x * x / (2.0 * self.envelope_variance)).exp())
            })
            .collect()
    }

    pub fn register(&self) -> Result<ModeRegister> {
        ModeRegister::with_dims(&[self.dim])
    }
}

/// |0⟩_L = Σ_k c_k D(kl)|r⟩, normalized, qubit in |↓⟩.
pub fn gkp_prepare(p: &GkpParams) -> Result<HybridState> {
    p.validate()?;
    let work = p.dim + 60;
    let sq = squeezed_vacuum_amplitudes(p.squeeze, work);
    let mut v = vec![ZERO; work];
    for (k, c) in p.weights() {
        let d = displacement_elements(C64::new(k as f64 * p.spacing, 0.0), work);
        for m in 0..work {
            let mut acc = ZERO;
            for (n, s) in sq.iter().enumerate().step_by(2) {
                acc += d[(m, n)] * s;
            }
            v[m] += acc * c;
        }
    }
    let total: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    let tail: f64 = v[p.dim - 2..].iter().map(|x| x.norm_sqr()).sum::<f64>() / total;
    if tail > DEFAULT_LEAKAGE_THRESHOLD {
        return Err(Error::Leakage { leakage: tail, threshold: DEFAULT_LEAKAGE_THRESHOLD });
    }
    v.truncate(p.dim);
    HybridState::product(&p.register()?, [ZERO, C64::new(1.0, 0.0)], &[v])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogicalOp {
    X,
    Y,
    Z,
    /// X_L²
    StabilizerX,
    /// Z_L²
    StabilizerZ,
}

impl LogicalOp {
    /// Displacement amplitude: X_L = D(l/2), Z_L = D(iπ/l), Y_L = iX_LZ_L = D(l/2 + iπ/l).
    pub fn amplitude(self, spacing: f64) -> C64 {
        let x = C64::new(spacing / 2.0, 0.0);
        let z = C64::new(0.0, PI / spacing);
        match self {
            LogicalOp::X => x,
            LogicalOp::Z => z,
            LogicalOp::Y => x + z,
            LogicalOp::StabilizerX => x * 2.0,
            LogicalOp::StabilizerZ => z * 2.0,
        }
    }
}

/// Tr(ρ D(α)) on one mode.
pub fn gkp_logical_expect(state: &HybridState, mode: usize, spacing: f64, op: LogicalOp) -> Result<C64> {
    let rho = reduced_density(state, mode)?;
    let d = displacement_elements(op.amplitude(spacing), rho.nrows());
    Ok((rho * d).trace())
}

/// max |(X_LZ_L + Z_LX_L)ᵢⱼ| over the lowest `block` levels, products formed in `work` levels.
pub fn gkp_anticommutator_norm(spacing: f64, block: usize, work: usize) -> f64 {
    let x = displacement_elements(LogicalOp::X.amplitude(spacing), work);
    let z = displacement_elements(LogicalOp::Z.amplitude(spacing), work);
    let s = &x * &z + &z * &x;
    s.view((0, 0), (block, block)).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Position,
    Momentum,
}

/// Hermite functions φ₀..φ_{d−1} at x.
fn hermite_functions(x: f64, d: usize) -> Vec<f64> {
    let mut h = vec![0.0; d];
    h[0] = PI.powf(-0.25) * (-x * x / 2.0).exp();
    if d > 1 {
        h[1] = 2f64.sqrt() * x * h[0];
    }
    for n in 2..d {
        h[n] = (2.0 / n as f64).sqrt() * x * h[n - 1] - ((n - 1) as f64 / n as f64).sqrt() * h[n - 2];
    }
    h
}

/// Marginal density of x = (a+a†)/√2 or p = (a−a†)/(i√2) on the grid.
pub fn gkp_marginal(state: &HybridState, mode: usize, quad: Quadrature, grid: &[f64]) -> Result<Vec<f64>> {
    let rho = reduced_density(state, mode)?;
    let d = rho.nrows();
    let phase: Vec<C64> = (0..d)
        .map(|n| match quad {
            Quadrature::Position => C64::new(1.0, 0.0),
            Quadrature::Momentum => C64::new(0.0, -1.0).powu(n as u32),
        })
        .collect();
    Ok(grid
        .iter()
        .map(|&x| {
            let h = hermite_functions(x, d);
            let f: Vec<C64> = (0..d).map(|n| phase[n] * h[n]).collect();
            let mut acc = ZERO;
            for m in 0..d {
                for n in 0..d {
                    acc += f[m] * rho[(m, n)] * f[n].conj();
                }
            }
            acc.re
        })
        .collect())
}

/// Local maxima above `rel` times the global maximum.
pub fn marginal_peaks(grid: &[f64], density: &[f64], rel: f64) -> Vec<f64> {
    let top = density.iter().copied().fold(0.0, f64::max);
    (1..density.len().saturating_sub(1))
        .filter(|&i| density[i] > density[i - 1] && density[i] >= density[i + 1] && density[i] > rel * top)
        .map(|i| grid[i])
        .collect()
}
