//! Spin–phonon and phonon–phonon interaction builders in the interaction picture.
//!
//! Everything is in units with ħ = 1 and angular frequencies. Only the
//! coupling-coefficient helpers at the bottom take SI inputs.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    embed_product, level_projector, mode_ladder, sigma_plus, sigma_x, sigma_y, sigma_z, Level,
    ModeRegister, OperatorMatrix, Slot,
};
use crate::linalg::{expm_hermitian, C64, I, ZERO};

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const EPSILON_0: f64 = 8.854_187_8128e-12;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;
pub const AMU: f64 = 1.660_539_066_60e-27;
pub const YB171_MASS: f64 = 170.936_3315 * AMU;
/// 1 cm⁻¹ in rad/s.
pub const CM1_TO_RAD_S: f64 = 2.0 * PI * 29.979_245_8e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct DriveParams {
    /// Rabi frequency Ω, rad/s.
    pub rabi: f64,
    /// Drive phase, rad.
    pub phase: f64,
    /// Detuning, rad/s (used by builders that take one).
    pub detuning: f64,
}

impl DriveParams {
    pub fn new(rabi: f64, phase: f64) -> Self {
        DriveParams { rabi, phase, detuning: 0.0 }
    }

    fn check(&self) -> Result<()> {
        if !(self.rabi >= 0.0) {
            return Err(Error::InvalidParameter(format!("Rabi frequency {} must be ≥ 0", self.rabi)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sideband {
    Blue,
    Red,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

fn cis(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

fn mode_dim(reg: &ModeRegister, m: usize) -> Result<usize> {
    reg.slot_dim(Slot::Mode(m))
}

fn lower(reg: &ModeRegister, m: usize) -> Result<DMatrix<C64>> {
    Ok(mode_ladder(mode_dim(reg, m)?)?.lower)
}

fn raise(reg: &ModeRegister, m: usize) -> Result<DMatrix<C64>> {
    Ok(mode_ladder(mode_dim(reg, m)?)?.raise)
}

fn number(reg: &ModeRegister, m: usize) -> Result<DMatrix<C64>> {
    Ok(mode_ladder(mode_dim(reg, m)?)?.number)
}

fn power(m: &DMatrix<C64>, k: usize) -> DMatrix<C64> {
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// A term plus its Hermitian conjugate.
fn with_hc(op: OperatorMatrix) -> Result<OperatorMatrix> {
    op.add(&op.adjoint())
}

fn distinct(modes: &[usize]) -> Result<()> {
    for (k, a) in modes.iter().enumerate() {
        if modes[k + 1..].contains(a) {
            return Err(Error::InvalidParameter(format!("mode index {a} repeated")));
        }
    }
    Ok(())
}

/// (Ω/2)(σ₊e^{iφ} + σ₋e^{−iφ})
pub fn carrier(reg: &ModeRegister, p: &DriveParams) -> Result<OperatorMatrix> {
    p.check()?;
    let sp = sigma_plus() * C64::new(p.rabi / 2.0, 0.0) * cis(p.phase);
    with_hc(embed_product(&[(Slot::Qubit, &sp)], reg)?)
}

/// −(δ/2)σ_z: the qubit frame term for a drive detuned by δ.
pub fn qubit_detuning(reg: &ModeRegister, delta: f64) -> Result<OperatorMatrix> {
    let z = sigma_z() * C64::new(-delta / 2.0, 0.0);
    embed_product(&[(Slot::Qubit, &z)], reg)
}

/// δ a†a on one mode.
pub fn mode_detuning(reg: &ModeRegister, mode: usize, delta: f64) -> Result<OperatorMatrix> {
    let n = number(reg, mode)? * C64::new(delta, 0.0);
    embed_product(&[(Slot::Mode(mode), &n)], reg)
}

/// Blue order 1: (iηΩ/2)(σ₊a†e^{iφ} − σ₋a e^{−iφ}); red swaps a ↔ a†; order 2 uses η² and squared ladders.
pub fn sideband(reg: &ModeRegister, kind: Sideband, order: usize, mode: usize, p: &DriveParams) -> Result<OperatorMatrix> {
    p.check()?;
    if order != 1 && order != 2 {
        return Err(Error::InvalidParameter(format!("sideband order {order} not in {{1, 2}}")));
    }
    let eta = reg.modes.get(mode).ok_or(Error::SlotOutOfRange { slot: mode, modes: reg.num_modes() })?.lamb_dicke;
    let ladder = match kind {
        Sideband::Blue => raise(reg, mode)?,
        Sideband::Red => lower(reg, mode)?,
    };
    let lad = power(&ladder, order);
    let coef = I * C64::new(eta.powi(order as i32) * p.rabi / 2.0, 0.0) * cis(p.phase);
    let sp = sigma_plus() * coef;
    with_hc(embed_product(&[(Slot::Qubit, &sp), (Slot::Mode(mode), &lad)], reg)?)
}

/// Carrier plus first- and second-order sidebands of both colours with a common drive.
pub fn lamb_dicke_composite(reg: &ModeRegister, mode: usize, p: &DriveParams) -> Result<OperatorMatrix> {
    let mut h = carrier(reg, p)?;
    for kind in [Sideband::Blue, Sideband::Red] {
        for order in [1, 2] {
            h = h.add(&sideband(reg, kind, order, mode, p)?)?;
        }
    }
    Ok(h)
}

/// α_rate(a†e^{iφ} + a e^{−iφ})σ_axis. Each σ_axis branch is displaced by |β| = α_rate·t.
pub fn spin_displacement(reg: &ModeRegister, alpha_rate: f64, phase: f64, axis: Axis, mode: usize) -> Result<OperatorMatrix> {
    let s = match axis {
        Axis::X => sigma_x(),
        Axis::Y => sigma_y(),
        Axis::Z => sigma_z(),
    };
    let ad = raise(reg, mode)? * C64::new(alpha_rate, 0.0) * cis(phase);
    with_hc(embed_product(&[(Slot::Qubit, &s), (Slot::Mode(mode), &ad)], reg)?)
}

/// ζ(a†²e^{iφ} + a²e^{−iφ})σ_z. Evolving for t squeezes each branch by r = 2ζt.
pub fn spin_squeeze(reg: &ModeRegister, zeta: f64, phase: f64, mode: usize) -> Result<OperatorMatrix> {
    let ad2 = power(&raise(reg, mode)?, 2) * C64::new(zeta, 0.0) * cis(phase);
    with_hc(embed_product(&[(Slot::Qubit, &sigma_z()), (Slot::Mode(mode), &ad2)], reg)?)
}

/// θ(a_i†a_j e^{iφ} + a_i a_j† e^{−iφ})σ_z
pub fn mode_rotation(reg: &ModeRegister, theta: f64, phase: f64, i: usize, j: usize) -> Result<OperatorMatrix> {
    distinct(&[i, j])?;
    let ai = raise(reg, i)? * C64::new(theta, 0.0) * cis(phase);
    let aj = lower(reg, j)?;
    with_hc(embed_product(&[(Slot::Qubit, &sigma_z()), (Slot::Mode(i), &ai), (Slot::Mode(j), &aj)], reg)?)
}

/// Σ νᵢ nᵢ + Σ_{i≠j} κᵢⱼ aᵢ†aⱼ, plus extra site shifts modelling a blockade.
pub fn local_hopping(reg: &ModeRegister, kappa: &[Vec<f64>], nu: &[f64], blockade: &[(usize, f64)]) -> Result<OperatorMatrix> {
    let m = reg.num_modes();
    if kappa.len() != m || kappa.iter().any(|r| r.len() != m) || nu.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: kappa.len() });
    }
    for i in 0..m {
        if kappa[i][i] != 0.0 {
            return Err(Error::InvalidParameter("hopping matrix must have zero diagonal".into()));
        }
        for j in 0..m {
            if (kappa[i][j] - kappa[j][i]).abs() > 1e-12 * kappa[i][j].abs().max(1.0) {
                return Err(Error::InvalidParameter("hopping matrix must be symmetric".into()));
            }
        }
    }
    let mut shifts = nu.to_vec();
    for &(site, u) in blockade {
        *shifts.get_mut(site).ok_or(Error::SlotOutOfRange { slot: site, modes: m })? += u;
    }
    let mut h = OperatorMatrix::zero(reg);
    for (i, &s) in shifts.iter().enumerate() {
        if s != 0.0 {
            h = h.add(&mode_detuning(reg, i, s)?)?;
        }
    }
    for i in 0..m {
        for j in 0..m {
            if i != j && kappa[i][j] != 0.0 {
                let ai = raise(reg, i)? * C64::new(kappa[i][j], 0.0);
                let aj = lower(reg, j)?;
                h = h.add(&embed_product(&[(Slot::Mode(i), &ai), (Slot::Mode(j), &aj)], reg)?)?;
            }
        }
    }
    Ok(h)
}

/// −(Ω_c/2)(a_i a_j† + a_i†a_j), the rotating-wave dipole exchange.
pub fn dipole_exchange(reg: &ModeRegister, omega_c: f64, i: usize, j: usize) -> Result<OperatorMatrix> {
    distinct(&[i, j])?;
    let ai = raise(reg, i)? * C64::new(-omega_c / 2.0, 0.0);
    let aj = lower(reg, j)?;
    with_hc(embed_product(&[(Slot::Mode(i), &ai), (Slot::Mode(j), &aj)], reg)?)
}

/// ξ|c⟩⟨c|(a_i†a_j e^{iυ} + a_i a_j† e^{−iυ}) for control level c.
pub fn cbs(reg: &ModeRegister, xi: f64, upsilon: f64, i: usize, j: usize, control: Level) -> Result<OperatorMatrix> {
    distinct(&[i, j])?;
    let proj = level_projector(control);
    let ai = raise(reg, i)? * C64::new(xi, 0.0) * cis(upsilon);
    let aj = lower(reg, j)?;
    with_hc(embed_product(&[(Slot::Qubit, &proj), (Slot::Mode(i), &ai), (Slot::Mode(j), &aj)], reg)?)
}

/// Duration of the CBS pulse that swaps the two modes: π/(2ξ).
pub fn cbs_swap_time(xi: f64) -> f64 {
    PI / (2.0 * xi)
}

/// δ a†a + ξ_d(a b†² + a†b²), detuning carried by the higher-frequency mode a.
pub fn degenerate_parametric(reg: &ModeRegister, xi_d: f64, delta: f64, a: usize, b: usize) -> Result<OperatorMatrix> {
    distinct(&[a, b])?;
    let la = lower(reg, a)? * C64::new(xi_d, 0.0);
    let bd2 = power(&raise(reg, b)?, 2);
    let coupling = with_hc(embed_product(&[(Slot::Mode(a), &la), (Slot::Mode(b), &bd2)], reg)?)?;
    coupling.add(&mode_detuning(reg, a, delta)?)
}

/// δ n_h + ξ_n(a_h†a_w a_c + a_h a_w†a_c†)
pub fn trilinear(reg: &ModeRegister, xi_n: f64, delta: f64, h: usize, w: usize, c: usize) -> Result<OperatorMatrix> {
    distinct(&[h, w, c])?;
    let ah = raise(reg, h)? * C64::new(xi_n, 0.0);
    let aw = lower(reg, w)?;
    let ac = lower(reg, c)?;
    let coupling = with_hc(embed_product(&[(Slot::Mode(h), &ah), (Slot::Mode(w), &aw), (Slot::Mode(c), &ac)], reg)?)?;
    coupling.add(&mode_detuning(reg, h, delta)?)
}

/// −((δ_p)/2)σ_z + (Ω/2)(σ₊a† + σ₋a): weak blue-sideband probe detuned by δ_p.
pub fn sideband_probe(reg: &ModeRegister, mode: usize, rabi: f64, detuning: f64) -> Result<OperatorMatrix> {
    let sp = sigma_plus() * C64::new(rabi / 2.0, 0.0);
    let ad = raise(reg, mode)?;
    let coupling = with_hc(embed_product(&[(Slot::Qubit, &sp), (Slot::Mode(mode), &ad)], reg)?)?;
    coupling.add(&qubit_detuning(reg, detuning)?)
}

/// exp(α a† − α* a) on a truncated mode (unitary in the truncated space).
pub fn displacement_unitary(alpha: C64, dim: usize) -> DMatrix<C64> {
    let l = mode_ladder(dim.max(2)).expect("dim ≥ 2");
    let gen = (&l.raise * alpha - &l.lower * alpha.conj()) * I;
    expm_hermitian(&gen, 1.0)
}

/// exp(½(ξ* a² − ξ a†²)); real ξ > 0 squeezes x.
pub fn squeeze_unitary(xi: C64, dim: usize) -> DMatrix<C64> {
    let l = mode_ladder(dim.max(2)).expect("dim ≥ 2");
    let a2 = &l.lower * &l.lower;
    let ad2 = &l.raise * &l.raise;
    let gen = (a2 * xi.conj() - ad2 * xi) * C64::new(0.0, 0.5);
    expm_hermitian(&gen, 1.0)
}

/// Matrix elements ⟨m|D(α)|n⟩ of the untruncated displacement for m, n < dim,
/// from the generalized Laguerre form with a log-space prefactor.
pub fn displacement_elements(alpha: C64, dim: usize) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    let x = alpha.norm_sqr();
    if x == 0.0 {
        return DMatrix::identity(dim, dim);
    }
    let mut ln_fact = vec![0.0; dim + 1];
    for k in 1..=dim {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let ln_abs = x.sqrt().ln();
    let unit = alpha / x.sqrt();
    let unit_neg = -alpha.conj() / x.sqrt();
    for k in 0..dim {
        // L_lo^{(k)}(x) for lo = 0.. by the three-term recurrence
        let kf = k as f64;
        let (mut l0, mut l1) = (1.0, 1.0 + kf - x);
        for lo in 0..dim - k {
            let lag = if lo == 0 {
                1.0
            } else if lo == 1 {
                l1
            } else {
                let lf = lo as f64;
                let l2 = ((2.0 * lf - 1.0 + kf - x) * l1 - (lf - 1.0 + kf) * l0) / lf;
                l0 = l1;
                l1 = l2;
                l2
            };
            let hi = lo + k;
            let mag = (0.5 * (ln_fact[lo] - ln_fact[hi]) + kf * ln_abs - x / 2.0).exp() * lag;
            m[(hi, lo)] = unit.powu(k as u32) * mag;
            if k > 0 {
                m[(lo, hi)] = unit_neg.powu(k as u32) * mag;
            }
        }
    }
    m
}

/// Fock amplitudes of S(r)|0⟩ with S(r) = exp(½(r a² − r a†²)).
pub fn squeezed_vacuum_amplitudes(r: f64, dim: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    let t = -r.tanh();
    let mut c = 1.0 / r.cosh().sqrt();
    for m in 0..dim.div_ceil(2) {
        if m > 0 {
            // √((2m)!)/(2^m m!) recursion
            c *= t * ((2 * m - 1) as f64 / (2 * m) as f64).sqrt();
        }
        v[2 * m] = C64::new(c, 0.0);
    }
    v
}

pub fn coherent_amplitudes(alpha: C64, dim: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[0] = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for k in 1..dim {
        v[k] = v[k - 1] * alpha / (k as f64).sqrt();
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KerrMethod {
    Perturbative,
    Exact,
}

/// States, eigenvalues and eigenvectors of the closed manifold 2n_a + n_b = k of
/// δ a†a + ξ(a b†² + a†b²). States are listed by increasing n_a.
pub fn parametric_manifold(xi: f64, delta: f64, k: usize) -> (Vec<(usize, usize)>, Vec<f64>, DMatrix<f64>) {
    let states: Vec<(usize, usize)> = (0..=k / 2).map(|na| (na, k - 2 * na)).collect();
    let n = states.len();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (i, &(na, nb)) in states.iter().enumerate() {
        h[(i, i)] = delta * na as f64;
        if i + 1 < n {
            // a†b² takes (na, nb) to (na+1, nb−2)
            let v = xi * ((na + 1) as f64 * nb as f64 * (nb - 1) as f64).sqrt();
            h[(i + 1, i)] = v;
            h[(i, i + 1)] = v;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(h);
    (states, eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn dressed_energy(xi: f64, delta: f64, na: usize, nb: usize) -> f64 {
    let (states, vals, vecs) = parametric_manifold(xi, delta, 2 * na + nb);
    let i = states.iter().position(|&s| s == (na, nb)).expect("state in its manifold");
    let k = (0..vals.len())
        .max_by(|&x, &y| vecs[(i, x)].abs().partial_cmp(&vecs[(i, y)].abs()).unwrap())
        .expect("nonempty manifold");
    vals[k]
}

/// Shift of the a-mode sideband with n_b quanta in b, reported as bare minus dressed
/// frequency so that the perturbative value is −2(2n_b+1)ξ²/δ.
pub fn cross_kerr_shift(xi: f64, delta: f64, n_b: usize, method: KerrMethod) -> Result<f64> {
    if xi == 0.0 {
        return Ok(0.0);
    }
    match method {
        KerrMethod::Perturbative => {
            if delta == 0.0 {
                return Err(Error::InvalidParameter("perturbative cross-Kerr shift needs δ ≠ 0".into()));
            }
            Ok(-2.0 * (2 * n_b + 1) as f64 * xi * xi / delta)
        }
        KerrMethod::Exact => {
            let dressed = dressed_energy(xi, delta, 1, n_b) - dressed_energy(xi, delta, 0, n_b);
            Ok(delta - dressed)
        }
    }
}

/// Trap and crystal description for the coupling-coefficient helpers (SI units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapGeometry {
    /// kg
    pub ion_mass: f64,
    /// C
    pub ion_charge: f64,
    /// (ω_X, ω_Y, ω_Z), rad/s
    pub secular_freqs: [f64; 3],
    /// Number of ions in the axial crystal (2 or 3).
    pub ions: usize,
}

impl TrapGeometry {
    pub fn validate(&self) -> Result<()> {
        let [wx, wy, wz] = self.secular_freqs;
        if !(self.ion_mass > 0.0 && self.ion_charge != 0.0) {
            return Err(Error::InvalidParameter("ion mass and charge must be nonzero".into()));
        }
        if !(wz > 0.0 && wz < wx.min(wy)) {
            return Err(Error::InvalidParameter("axial frequency must be below both radial frequencies".into()));
        }
        if self.ions != 2 && self.ions != 3 {
            return Err(Error::InvalidParameter(format!("{} ions: only 2 or 3 supported", self.ions)));
        }
        Ok(())
    }

    /// Distance from the trap centre to an outer ion, m.
    pub fn z0(&self) -> Result<f64> {
        self.validate()?;
        let wz = self.secular_freqs[2];
        let q2 = self.ion_charge * self.ion_charge;
        let base = q2 / (16.0 * PI * EPSILON_0 * self.ion_mass * wz * wz);
        Ok(match self.ions {
            2 => base.cbrt(),
            _ => (5.0 * base).cbrt(),
        })
    }

    /// Two-ion axial stretch and radial rocking frequencies (ω_a, ω_b).
    pub fn degenerate_modes(&self) -> (f64, f64) {
        let [wx, _, wz] = self.secular_freqs;
        (3f64.sqrt() * wz, (wx * wx - wz * wz).sqrt())
    }

    /// Three-ion (ω_h, ω_w, ω_c): axial zig-zag-free mode and two radial modes.
    pub fn trilinear_modes(&self) -> (f64, f64, f64) {
        let [wx, _, wz] = self.secular_freqs;
        ((29.0f64 / 5.0).sqrt() * wz, (wx * wx - wz * wz).sqrt(), (wx * wx - 12.0 * wz * wz / 5.0).sqrt())
    }
}

/// ξ_d = (1/8z₀)√(ħω_a³/(Mω_b²)), rad/s.
pub fn coupling_xi_d(g: &TrapGeometry) -> Result<f64> {
    let z0 = g.z0()?;
    let (wa, wb) = g.degenerate_modes();
    Ok((HBAR * wa.powi(3) / (g.ion_mass * wb * wb)).sqrt() / (8.0 * z0))
}

/// ξ_n = 9ω_Z²√(ħ/(Mω_hω_wω_c))/(5z₀), rad/s.
pub fn coupling_xi_n(g: &TrapGeometry) -> Result<f64> {
    let z0 = g.z0()?;
    let wz = g.secular_freqs[2];
    let (wh, ww, wc) = g.trilinear_modes();
    if !(wc > 0.0) {
        return Err(Error::InvalidParameter("radial mode unstable for this axial confinement".into()));
    }
    Ok(9.0 * wz * wz * (HBAR / (g.ion_mass * wh * ww * wc)).sqrt() / (5.0 * z0))
}

/// Hopping rate between neighbouring ions in separate wells, rad/s: q²/(4πε₀ · 2Mω d³).
pub fn hopping_kappa(mass: f64, charge: f64, omega: f64, distance: f64) -> f64 {
    charge * charge / (4.0 * PI * EPSILON_0 * 2.0 * mass * omega * distance.powi(3))
}

/// Dipole–dipole exchange rate Ω_c = q₁q₂/(2πε₀ r³ √(M₁M₂ω₁ω₂)), rad/s.
pub fn dipole_coupling(q1: f64, q2: f64, m1: f64, m2: f64, w1: f64, w2: f64, r: f64) -> f64 {
    q1 * q2 / (2.0 * PI * EPSILON_0 * r.powi(3) * (m1 * m2 * w1 * w2).sqrt())
}

/// Effective squeezing rate from a bichromatic drive: (η²Ω²/8)(1/δ₁ − 2/(δ₁−ω) + 1/(δ₁−2ω)).
pub fn squeeze_rate(eta: f64, rabi: f64, delta1: f64, omega: f64) -> f64 {
    eta * eta * rabi * rabi / 8.0 * (1.0 / delta1 - 2.0 / (delta1 - omega) + 1.0 / (delta1 - 2.0 * omega))
}

/// Beam-splitter detuning combination: 1/Δ = 1/(−δ₁) + 1/(−δ₁+ω₁−ω₂) + 1/(δ₁−ω₁) + 1/(δ₁+ω₂).
pub fn delta_bs(delta1: f64, omega1: f64, omega2: f64) -> f64 {
    1.0 / (1.0 / (-delta1) + 1.0 / (-delta1 + omega1 - omega2) + 1.0 / (delta1 - omega1) + 1.0 / (delta1 + omega2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{HybridState, ModeRegister};

    fn reg(d: &[usize]) -> ModeRegister {
        ModeRegister::with_dims(d).unwrap()
    }

    #[test]
    fn builders_are_hermitian() {
        let r = reg(&[4, 3, 3]);
        let p = DriveParams::new(1.3, 0.4);
        let ops = vec![
            carrier(&r, &p).unwrap(),
            sideband(&r, Sideband::Blue, 1, 0, &p).unwrap(),
            sideband(&r, Sideband::Red, 2, 1, &p).unwrap(),
            spin_displacement(&r, 0.7, 0.3, Axis::X, 2).unwrap(),
            spin_squeeze(&r, 0.2, 1.0, 0).unwrap(),
            mode_rotation(&r, 0.5, 0.2, 0, 1).unwrap(),
            cbs(&r, 1.0, 0.3, 1, 2, Level::Up).unwrap(),
            degenerate_parametric(&r, 0.3, 1.1, 0, 1).unwrap(),
            trilinear(&r, 0.3, 0.2, 0, 1, 2).unwrap(),
            dipole_exchange(&r, 0.9, 0, 2).unwrap(),
            lamb_dicke_composite(&r, 0, &p).unwrap(),
        ];
        for o in ops {
            assert!(o.is_hermitian());
            assert!(o.matrix().hermitian_deviation() < 1e-12);
        }
    }

    #[test]
    fn carrier_zero_rabi_is_zero() {
        let r = reg(&[3]);
        assert_eq!(carrier(&r, &DriveParams::new(0.0, 0.0)).unwrap().matrix().nnz(), 0);
    }

    #[test]
    fn second_order_blue_element() {
        let r = reg(&[5]);
        let eta = r.modes[0].lamb_dicke;
        let h = sideband(&r, Sideband::Blue, 2, 0, &DriveParams::new(2.0, 0.0)).unwrap();
        let from = r.index(Level::Down, &[0]).unwrap();
        let to = r.index(Level::Up, &[2]).unwrap();
        let v = h.matrix().get(to, from);
        assert!((v.norm() - 2f64.sqrt() * eta * eta * 2.0 / 2.0).abs() < 1e-14);
        let nonzero: Vec<usize> = (0..r.total_dim()).filter(|&i| h.matrix().get(i, from) != ZERO).collect();
        assert_eq!(nonzero, vec![to]);
        assert!(sideband(&r, Sideband::Blue, 3, 0, &DriveParams::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn degenerate_matrix_element_sqrt2() {
        let r = reg(&[3, 4]);
        let h = degenerate_parametric(&r, 1.0, 0.0, 0, 1).unwrap();
        let a = r.index(Level::Down, &[1, 0]).unwrap();
        let b = r.index(Level::Down, &[0, 2]).unwrap();
        assert!((h.matrix().get(b, a).re - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn kerr_closed_form() {
        assert!((cross_kerr_shift(1.0, 10.0, 0, KerrMethod::Perturbative).unwrap() + 0.2).abs() < 1e-15);
        assert_eq!(cross_kerr_shift(0.0, 10.0, 3, KerrMethod::Exact).unwrap(), 0.0);
        assert!(cross_kerr_shift(1.0, 0.0, 0, KerrMethod::Perturbative).is_err());
    }

    #[test]
    fn hopping_rejects_asymmetric() {
        let r = reg(&[3, 3]);
        let k = vec![vec![0.0, 1.0], vec![0.5, 0.0]];
        assert!(local_hopping(&r, &k, &[0.0, 0.0], &[]).is_err());
    }

    #[test]
    fn displacement_elements_match_truncated_unitary_on_low_block() {
        let a = C64::new(0.8, -0.5);
        let exact = displacement_elements(a, 60);
        let trunc = displacement_unitary(a, 60);
        for i in 0..15 {
            for j in 0..15 {
                assert!((exact[(i, j)] - trunc[(i, j)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn repeated_modes_rejected() {
        let r = reg(&[3, 3, 3]);
        assert!(trilinear(&r, 1.0, 0.0, 0, 1, 1).is_err());
        assert!(mode_rotation(&r, 1.0, 0.0, 2, 2).is_err());
    }

    #[test]
    fn xi_n_for_ytterbium_geometry() {
        let wz = 2.0 * PI * 587e3;
        let g = TrapGeometry { ion_mass: YB171_MASS, ion_charge: ELEMENTARY_CHARGE, secular_freqs: [wz / 0.556, wz / 0.556 * 1.05, wz], ions: 3 };
        let xi = coupling_xi_n(&g).unwrap();
        let (wh, ww, wc) = g.trilinear_modes();
        assert!((wh - ww - wc).abs() / wh < 1e-3);
        let f = 2.0 * xi / (2.0 * PI);
        assert!(f > 280.0 && f < 28_000.0, "exchange frequency {f}");
        let _ = HybridState::basis(&reg(&[2]), Level::Up, &[0]).unwrap();
    }
}
