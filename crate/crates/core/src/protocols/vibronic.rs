//! Franck–Condon profiles through the Doktorov decomposition U = D(α)S†(ζ′)R(θ)S(ζ).

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{displacement_elements, squeeze_unitary, CM1_TO_RAD_S};
use crate::hilbert::{ModeRegister, OperatorMatrix, DEFAULT_LEAKAGE_THRESHOLD};
use crate::linalg::{CsrMatrix, C64, ONE, ZERO};

/// Extra Fock levels per mode kept beyond the reported table.
pub const WORK_PADDING: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoktorovParams {
    /// rad/s
    pub omega_initial: Vec<f64>,
    /// rad/s
    pub omega_final: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Rotation angle for each adjacent pair (i, i+1).
    pub theta: Vec<f64>,
}

impl DoktorovParams {
    pub fn from_wavenumbers(initial_cm1: &[f64], final_cm1: &[f64], alpha: &[f64], theta: &[f64]) -> Self {
        DoktorovParams {
            omega_initial: initial_cm1.iter().map(|w| w * CM1_TO_RAD_S).collect(),
            omega_final: final_cm1.iter().map(|w| w * CM1_TO_RAD_S).collect(),
            alpha: alpha.to_vec(),
            theta: theta.to_vec(),
        }
    }

    /// SO₂ → SO₂⁺ photoionization.
    pub fn so2_cation() -> Self {
        Self::from_wavenumbers(&[1178.4, 518.9], &[1112.7, 415.0], &[-0.026, 1.716], &[0.189])
    }

    /// SO₂⁻ → SO₂ photodetachment.
    pub fn so2_anion() -> Self {
        Self::from_wavenumbers(&[989.5, 451.4], &[1178.4, 518.9], &[1.360, -0.264], &[0.065])
    }

    pub fn modes(&self) -> usize {
        self.omega_initial.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.modes();
        if n == 0 || self.omega_final.len() != n || self.alpha.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.omega_final.len().min(self.alpha.len()) });
        }
        if self.theta.len() != n - 1 {
            return Err(Error::DimensionMismatch { expected: n - 1, got: self.theta.len() });
        }
        if self.omega_initial.iter().chain(&self.omega_final).any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("frequencies must be positive".into()));
        }
        if self.alpha.iter().chain(&self.theta).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("α and θ must be finite".into()));
        }
        Ok(())
    }

    /// (ζ, ζ′) with ζᵢ = ½ln(ωᵢ/ω_ref), ζ′ᵢ = ½ln(ω′ᵢ/ω_ref), ω_ref the geometric mean of all frequencies.
    pub fn squeezes(&self) -> (Vec<f64>, Vec<f64>) {
        let all: Vec<f64> = self.omega_initial.iter().chain(&self.omega_final).copied().collect();
        let lref = all.iter().map(|w| w.ln()).sum::<f64>() / all.len() as f64;
        let f = |w: &f64| 0.5 * (w.ln() - lref);
        (self.omega_initial.iter().map(f).collect(), self.omega_final.iter().map(f).collect())
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn apply_mode(psi: &[C64], dims: &[usize], mode: usize, u: &DMatrix<C64>) -> Vec<C64> {
    let st = strides(dims);
    let d = dims[mode];
    let mut out = vec![ZERO; psi.len()];
    for base in 0..psi.len() {
        if (base / st[mode]) % d != 0 {
            continue;
        }
        for m in 0..d {
            let mut acc = ZERO;
            for n in 0..d {
                acc += u[(m, n)] * psi[base + n * st[mode]];
            }
            out[base + m * st[mode]] = acc;
        }
    }
    out
}

/// exp(θ(aᵢ†aⱼ − aᵢaⱼ†)) applied manifold by manifold of nᵢ + nⱼ.
fn apply_rotation(psi: &[C64], dims: &[usize], i: usize, j: usize, theta: f64) -> Vec<C64> {
    let st = strides(dims);
    let (di, dj) = (dims[i], dims[j]);
    let mut cache: HashMap<usize, DMatrix<f64>> = HashMap::new();
    let mut out = psi.to_vec();
    for base in 0..psi.len() {
        if (base / st[i]) % di != 0 || (base / st[j]) % dj != 0 {
            continue;
        }
        for total in 0..(di + dj - 1) {
            let lo = total.saturating_sub(dj - 1);
            let hi = total.min(di - 1);
            let size = hi - lo + 1;
            let r = cache.entry(total).or_insert_with(|| {
                let mut g = DMatrix::<f64>::zeros(size, size);
                for a in 0..size - 1 {
                    let k = lo + a;
                    let v = (((k + 1) * (total - k)) as f64).sqrt();
                    g[(a + 1, a)] = v * theta;
                    g[(a, a + 1)] = -v * theta;
                }
                g.exp()
            });
            let idx: Vec<usize> = (lo..=hi).map(|k| base + k * st[i] + (total - k) * st[j]).collect();
            let v: Vec<C64> = idx.iter().map(|&x| psi[x]).collect();
            for (a, &x) in idx.iter().enumerate() {
                out[x] = (0..size).map(|b| v[b] * r[(a, b)]).sum();
            }
        }
    }
    out
}

fn squeeze_block(r: f64, d: usize) -> DMatrix<C64> {
    squeeze_unitary(C64::new(r, 0.0), d + 40).view((0, 0), (d, d)).into_owned()
}

/// U_Dok applied to `psi` on motional dims `dims`, factors right to left.
fn apply_doktorov(p: &DoktorovParams, psi: Vec<C64>, dims: &[usize]) -> Vec<C64> {
    let (z, zp) = p.squeezes();
    let mut v = psi;
    for (m, &r) in z.iter().enumerate() {
        v = apply_mode(&v, dims, m, &squeeze_block(r, dims[m]));
    }
    for (k, &t) in p.theta.iter().enumerate() {
        v = apply_rotation(&v, dims, k, k + 1, t);
    }
    for (m, &r) in zp.iter().enumerate() {
        v = apply_mode(&v, dims, m, &squeeze_block(-r, dims[m]));
    }
    for (m, &a) in p.alpha.iter().enumerate() {
        v = apply_mode(&v, dims, m, &displacement_elements(C64::new(a, 0.0), dims[m]));
    }
    v
}

/// U_Dok on a register (qubit untouched). Dense construction; meant for small registers.
pub fn doktorov_build(p: &DoktorovParams, reg: &ModeRegister) -> Result<OperatorMatrix> {
    p.validate()?;
    if reg.num_modes() != p.modes() {
        return Err(Error::DimensionMismatch { expected: p.modes(), got: reg.num_modes() });
    }
    let dims = reg.dims()[1..].to_vec();
    let half = reg.motional_dim();
    let mut trip = Vec::new();
    for col in 0..half {
        let mut e = vec![ZERO; half];
        e[col] = ONE;
        let u = apply_doktorov(p, e, &dims);
        for (row, v) in u.into_iter().enumerate() {
            if v.norm() > 1e-15 {
                trip.push((row, col, v));
                trip.push((row + half, col + half, v));
            }
        }
    }
    OperatorMatrix::new(reg, CsrMatrix::from_triplets(2 * half, trip))
}

#[derive(Debug, Clone, Serialize)]
pub struct FcTable {
    /// Levels per mode (n_max + 1).
    pub dims: Vec<usize>,
    /// Row-major over final-state Fock tuples.
    pub probs: Vec<f64>,
    pub total_mass: f64,
}

impl FcTable {
    pub fn levels(&self, index: usize) -> Vec<usize> {
        let st = strides(&self.dims);
        self.dims.iter().zip(&st).map(|(d, s)| (index / s) % d).collect()
    }

    pub fn get(&self, levels: &[usize]) -> f64 {
        let st = strides(&self.dims);
        self.probs[levels.iter().zip(&st).map(|(n, s)| n * s).sum::<usize>()]
    }

    /// Mass of the pure progression of `mode` (that mode excited, all others in 0).
    pub fn progression_mass(&self, mode: usize) -> f64 {
        (0..self.probs.len())
            .filter(|&i| {
                let l = self.levels(i);
                l[mode] > 0 && l.iter().enumerate().all(|(k, &n)| k == mode || n == 0)
            })
            .map(|i| self.probs[i])
            .sum()
    }

    /// Mass with two or more modes excited.
    pub fn combination_mass(&self) -> f64 {
        (0..self.probs.len()).filter(|&i| self.levels(i).iter().filter(|&&n| n > 0).count() >= 2).map(|i| self.probs[i]).sum()
    }
}

/// FC(n⃗) = |⟨n⃗|U_Dok|0⃗⟩|² for nᵢ ≤ n_max.
pub fn vibronic_fc(p: &DoktorovParams, n_max: usize) -> Result<FcTable> {
    p.validate()?;
    let n = p.modes();
    let work = vec![n_max + 1 + WORK_PADDING; n];
    let size: usize = work.iter().product();
    let mut psi = vec![ZERO; size];
    psi[0] = ONE;
    let v = apply_doktorov(p, psi, &work);
    let st = strides(&work);
    let tail: f64 = v
        .iter()
        .enumerate()
        .filter(|(i, _)| work.iter().zip(&st).any(|(d, s)| (i / s) % d >= d - 2))
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if tail > DEFAULT_LEAKAGE_THRESHOLD {
        return Err(Error::Leakage { leakage: tail, threshold: DEFAULT_LEAKAGE_THRESHOLD });
    }
    let dims = vec![n_max + 1; n];
    let out_st = strides(&dims);
    let mut probs = vec![0.0; dims.iter().product()];
    for (i, a) in v.iter().enumerate() {
        let l: Vec<usize> = work.iter().zip(&st).map(|(d, s)| (i / s) % d).collect();
        if l.iter().all(|&x| x <= n_max) {
            probs[l.iter().zip(&out_st).map(|(x, s)| x * s).sum::<usize>()] = a.norm_sqr();
        }
    }
    let total_mass = probs.iter().sum();
    Ok(FcTable { dims, probs, total_mass })
}

#[derive(Debug, Clone, Serialize)]
pub struct Stick {
    pub levels: Vec<usize>,
    /// cm⁻¹ above the 0–0 line
    pub position: f64,
    pub intensity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub sticks: Vec<Stick>,
    /// cm⁻¹
    pub grid: Vec<f64>,
    pub broadened: Vec<f64>,
}

/// Sticks at Σnᵢω′ᵢ (cm⁻¹) convolved with a unit-height Gaussian of the given FWHM.
pub fn vibronic_spectrum(fc: &FcTable, final_cm1: &[f64], fwhm: f64, step: f64, min_intensity: f64) -> Result<Spectrum> {
    if !(fwhm >= 0.0) {
        return Err(Error::InvalidParameter(format!("broadening width {fwhm} must be ≥ 0")));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidParameter("grid step must be > 0".into()));
    }
    if final_cm1.len() != fc.dims.len() {
        return Err(Error::DimensionMismatch { expected: fc.dims.len(), got: final_cm1.len() });
    }
    let mut sticks: Vec<Stick> = (0..fc.probs.len())
        .filter(|&i| fc.probs[i] > min_intensity)
        .map(|i| {
            let levels = fc.levels(i);
            let position = levels.iter().zip(final_cm1).map(|(n, w)| *n as f64 * w).sum();
            Stick { levels, position, intensity: fc.probs[i] }
        })
        .collect();
    sticks.sort_by(|a, b| a.position.total_cmp(&b.position).then_with(|| a.levels.cmp(&b.levels)));
    let hi = sticks.iter().map(|s| s.position).fold(0.0, f64::max) + 3.0 * fwhm.max(step);
    let lo = -3.0 * fwhm.max(step);
    let n = ((hi - lo) / step).floor() as usize + 1;
    let grid: Vec<f64> = (0..n).map(|k| lo + k as f64 * step).collect();
    let sigma = fwhm / (2.0 * (2.0 * 2f64.ln()).sqrt());
    let broadened = grid
        .iter()
        .map(|&x| {
            if sigma == 0.0 {
                return sticks.iter().filter(|s| (s.position - x).abs() < step / 2.0).map(|s| s.intensity).sum();
            }
            sticks.iter().map(|s| s.intensity * (-(x - s.position).powi(2) / (2.0 * sigma * sigma)).exp()).sum()
        })
        .collect();
    Ok(Spectrum { sticks, grid, broadened })
}

/// Multinomial sample of `shots` final-state tuples; counts per table entry.
pub fn vibronic_sample(fc: &FcTable, rng: &mut dyn RngCore, shots: u64) -> Result<Vec<u64>> {
    super::multinomial(shots, &fc.probs, rng)
}
