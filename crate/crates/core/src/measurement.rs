//! Simulated readout: qubit fluorescence, sideband-signal population
//! inversion, repeated-transfer phonon counting and phase-space functions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, RngCore};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate_pulsed, propagate_static, uniform_bsb, StaPulseParams, StepControl};
use crate::error::{Error, Result};
use crate::hamiltonians::{carrier, cbs, coherent_amplitudes, displacement_elements, displacement_unitary, DriveParams};
use crate::hilbert::{
    leakage, qubit_populations, reduced_density, HybridState, Level, ModeRegister, OperatorMatrix,
    DEFAULT_LEAKAGE_THRESHOLD,
};
use crate::linalg::{self, Propagator, C64, ONE, ZERO};

#[derive(Debug, Clone)]
pub struct ReadoutOutcome {
    pub bright: bool,
    pub state: HybridState,
    /// Set after a bright event: scattered photons heat the motion.
    pub motion_destroyed: bool,
}

/// Fluorescence detection with contrast A: bright with probability A·P↑.
pub fn qubit_readout(state: &HybridState, rng: &mut dyn RngCore, contrast: f64) -> Result<ReadoutOutcome> {
    if !(contrast > 0.0 && contrast <= 1.0) {
        return Err(Error::InvalidParameter(format!("contrast {contrast} outside (0, 1]")));
    }
    let p_up = qubit_populations(state)[0];
    let bright = rng.random::<f64>() < contrast * p_up;
    let half = state.register().motional_dim();
    let mut amps = state.amplitudes().to_vec();
    if bright {
        amps[half..].iter_mut().for_each(|a| *a = ZERO);
    } else {
        let k = (1.0 - contrast).sqrt();
        amps[..half].iter_mut().for_each(|a| *a *= k);
    }
    Ok(ReadoutOutcome { bright, state: HybridState::from_amplitudes(state.register(), amps)?, motion_destroyed: bright })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalModel {
    /// 1/s
    pub gamma0: f64,
    pub gamma_exponent: f64,
    pub contrast: f64,
}

impl Default for SignalModel {
    fn default() -> Self {
        SignalModel { gamma0: 0.0, gamma_exponent: 0.7, contrast: 1.0 }
    }
}

impl SignalModel {
    fn validate(&self) -> Result<()> {
        if !(self.gamma0 >= 0.0) {
            return Err(Error::InvalidParameter("gamma0 must be ≥ 0".into()));
        }
        if !(self.contrast > 0.0 && self.contrast <= 1.0) {
            return Err(Error::InvalidParameter("contrast must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn gamma(&self, n: usize) -> f64 {
        self.gamma0 * ((n + 1) as f64).powf(self.gamma_exponent)
    }

    /// Contribution of level n at time t: ½[1 − e^{−γₙt}A cos(2√(n+1)·g·t)].
    pub fn kernel(&self, n: usize, t: f64, rabi: f64) -> f64 {
        let w = ((n + 1) as f64).sqrt() * rabi;
        0.5 * (1.0 - (-self.gamma(n) * t).exp() * self.contrast * (2.0 * w * t).cos())
    }
}

/// P↑(t) for phonon populations Pₙ under a blue-sideband drive with base rate `rabi`.
pub fn bsb_signal(pops: &[f64], times: &[f64], rabi: f64, model: &SignalModel) -> Result<Vec<f64>> {
    model.validate()?;
    Ok(times.iter().map(|&t| pops.iter().enumerate().map(|(n, p)| p * model.kernel(n, t, rabi)).sum()).collect())
}

/// Binomial shot noise: fraction of `shots` bright outcomes at each point.
pub fn sample_signal(curve: &[f64], shots: u64, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
    curve
        .iter()
        .map(|&p| {
            let b = Binomial::new(shots, p.clamp(0.0, 1.0)).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(b.sample(rng) as f64 / shots as f64)
        })
        .collect()
}

/// Lawson–Hanson nonnegative least squares: argmin ‖Ax − b‖ subject to x ≥ 0.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.norm().max(1.0) * b.norm().max(1.0);
    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let sub = a.select_columns(&idx);
        let sol = sub.svd(true, true).solve(b, 1e-14).expect("svd solve");
        let mut z = DVector::zeros(n);
        for (k, &j) in idx.iter().enumerate() {
            z[j] = sol[k];
        }
        z
    };
    for _ in 0..(3 * n + 10) {
        let w = a.transpose() * (b - a * &x);
        let cand = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap());
        let Some(j) = cand else { break };
        passive[j] = true;
        loop {
            let z = solve_passive(&passive);
            if (0..n).filter(|&k| passive[k]).all(|k| z[k] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for k in 0..n {
                if passive[k] && z[k] <= 0.0 {
                    alpha = alpha.min(x[k] / (x[k] - z[k]));
                }
            }
            x = &x + (&z - &x) * alpha;
            for k in 0..n {
                if passive[k] && x[k].abs() < 1e-15 {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
        }
    }
    x
}

/// Estimate P₀…P_{n_max} from a sampled P↑(t) curve by constrained least squares
/// on the known frequency ladder (Pₙ ≥ 0, ΣPₙ ≤ 1).
pub fn invert_populations(curve: &[f64], times: &[f64], rabi: f64, model: &SignalModel, n_max: usize) -> Result<Vec<f64>> {
    model.validate()?;
    if curve.len() != times.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: curve.len() });
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("times must be strictly increasing".into()));
    }
    let k = n_max + 1;
    if times.len() < 2 * k {
        return Err(Error::IllConditioned(format!("{} samples cannot resolve {} populations", times.len(), k)));
    }
    let a = DMatrix::from_fn(times.len(), k, |i, n| model.kernel(n, times[i], rabi));
    let sv = a.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 0.0) || smax / smin > 1e12 {
        return Err(Error::IllConditioned(format!("design condition number {:.3e}", smax / smin)));
    }
    let b = DVector::from_column_slice(curve);
    let mut x = nnls(&a, &b);
    if x.sum() > 1.0 + 1e-9 {
        let w = 1e3 * smax;
        let mut aa = a.clone().insert_row(times.len(), 0.0);
        for n in 0..k {
            aa[(times.len(), n)] = w;
        }
        let bb = b.clone().insert_row(times.len(), w);
        x = nnls(&aa, &bb);
    }
    Ok(x.iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub qubit_bit: bool,
    pub modes: Vec<usize>,
    pub phonon_counts: Vec<usize>,
    pub repetitions_used: usize,
    pub rng_seed: u64,
}

/// Pulse model for the repeated carrier + reverse-sideband cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseModel {
    /// Exact swaps |↓⟩↔|↑⟩ and |↑,n+1⟩↔|↓,n⟩ with |↑,0⟩ left alone.
    Ideal,
    /// Carrier π pulse at `carrier_rabi` followed by the uniform sideband sweep.
    Simulated { carrier_rabi: f64, sta: StaPulseParams },
}

pub(crate) fn ideal_carrier_pi(state: &HybridState) -> Result<HybridState> {
    let half = state.register().motional_dim();
    let a = state.amplitudes();
    let mut out = vec![ZERO; a.len()];
    out[..half].copy_from_slice(&a[half..]);
    out[half..].copy_from_slice(&a[..half]);
    HybridState::from_amplitudes(state.register(), out)
}

/// |↑,n⟩ → |↓,n−1⟩ (n ≥ 1), |↓,n⟩ → |↑,n+1⟩, |↑,0⟩ fixed.
pub(crate) fn ideal_reverse_bsb(state: &HybridState, mode: usize) -> Result<HybridState> {
    let reg = state.register();
    let mut out = vec![ZERO; reg.total_dim()];
    for (i, &a) in state.amplitudes().iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let (lvl, mut ns) = reg.tuple(i);
        let target = match lvl {
            Level::Up if ns[mode] == 0 => (Level::Up, ns),
            Level::Up => {
                ns[mode] -= 1;
                (Level::Down, ns)
            }
            Level::Down => {
                ns[mode] += 1;
                if ns[mode] >= reg.mode_dim(mode) {
                    return Err(Error::Leakage { leakage: a.norm_sqr(), threshold: 0.0 });
                }
                (Level::Up, ns)
            }
        };
        out[reg.index(target.0, &target.1)?] += a;
    }
    HybridState::from_amplitudes(reg, out)
}

/// One cycle (carrier π, reverse sideband transfer, fluorescence readout).
pub fn readout_cycle(state: &HybridState, mode: usize, model: &PulseModel, rng: &mut dyn RngCore, contrast: f64) -> Result<ReadoutOutcome> {
    let prepared = match model {
        PulseModel::Ideal => ideal_reverse_bsb(&ideal_carrier_pi(state)?, mode)?,
        PulseModel::Simulated { carrier_rabi, sta } => {
            let reg = state.register();
            let c = carrier(reg, &DriveParams::new(*carrier_rabi, 0.0))?;
            let s = propagate_static(&c, PI / carrier_rabi, state)?;
            let seq = uniform_bsb(reg, &StaPulseParams { mode, ..*sta })?;
            propagate_pulsed(&seq, &s, &StepControl::default())?
        }
    };
    qubit_readout(&prepared, rng, contrast)
}

/// Count phonons in `mode` by repeating the readout cycle until the first bright event.
/// Returns the record and the input state projected onto the measured Fock level.
pub fn projective_phonon_readout(
    state: &HybridState,
    mode: usize,
    rng: &mut dyn RngCore,
    max_reps: usize,
    model: &PulseModel,
    seed: u64,
) -> Result<(MeasurementRecord, HybridState)> {
    let reg = state.register();
    reg.slot_dim(crate::hilbert::Slot::Mode(mode))?;
    if qubit_populations(state)[0] > 1e-12 {
        return Err(Error::InvalidParameter("phonon readout expects the qubit in |↓⟩".into()));
    }
    let mut current = state.clone();
    for rep in 1..=max_reps {
        let out = readout_cycle(&current, mode, model, rng, 1.0)?;
        if out.bright {
            let n = rep - 1;
            let collapsed = project_mode(state, mode, n)?;
            let rec = MeasurementRecord { qubit_bit: true, modes: vec![mode], phonon_counts: vec![n], repetitions_used: rep, rng_seed: seed };
            return Ok((rec, collapsed));
        }
        current = out.state;
    }
    Err(Error::MaxRepetitions(max_reps))
}

/// Normalized projection onto Fock level n of one mode.
pub fn project_mode(state: &HybridState, mode: usize, n: usize) -> Result<HybridState> {
    let reg = state.register();
    let amps: Vec<C64> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, &a)| if reg.tuple(i).1[mode] == n { a } else { ZERO })
        .collect();
    HybridState::from_amplitudes(reg, amps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSpaceGrid {
    pub points: Vec<C64>,
    pub values: Vec<f64>,
    pub method: String,
}

fn check_grid(grid: &[C64]) -> Result<()> {
    if grid.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::InvalidParameter("phase-space grid must be finite".into()));
    }
    Ok(())
}

/// Square grid of side 2·radius with `n` points per axis.
pub fn square_grid(radius: f64, n: usize) -> Vec<C64> {
    let n = n.max(2);
    let step = 2.0 * radius / (n - 1) as f64;
    let mut g = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            g.push(C64::new(-radius + j as f64 * step, -radius + i as f64 * step));
        }
    }
    g
}

/// Q(α) = ⟨α|ρ|α⟩/π for the reduced state of `mode`.
pub fn q_function(state: &HybridState, mode: usize, grid: &[C64]) -> Result<PhaseSpaceGrid> {
    check_grid(grid)?;
    let rho = reduced_density(state, mode)?;
    let d = rho.nrows();
    let values = grid
        .iter()
        .map(|&a| {
            let c = coherent_amplitudes(a, d);
            let tail: f64 = c[d - 2..].iter().map(|v| v.norm_sqr()).sum();
            if tail > DEFAULT_LEAKAGE_THRESHOLD {
                return Err(Error::Leakage { leakage: tail, threshold: DEFAULT_LEAKAGE_THRESHOLD });
            }
            let v = DVector::from_vec(c);
            Ok((v.adjoint() * &rho * &v)[(0, 0)].re / PI)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(PhaseSpaceGrid { points: grid.to_vec(), values, method: "husimi".into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WignerMethod {
    Parity,
    /// Parity from a squared controlled beam splitter with a vacuum ancilla and a qubit Ramsey readout.
    CbsParity,
}

/// Eigen-decomposition of ρ embedded in a larger working dimension.
fn purify(rho: &DMatrix<C64>, work: usize) -> Vec<(f64, Vec<C64>)> {
    let eig = SymmetricEigen::new(rho.clone());
    let d = rho.nrows();
    let mut out = Vec::new();
    for k in 0..d {
        let p = eig.eigenvalues[k];
        if p > 1e-14 {
            let mut v = vec![ZERO; work];
            for i in 0..d {
                v[i] = eig.eigenvectors[(i, k)];
            }
            out.push((p, v));
        }
    }
    out
}

struct CbsParity {
    reg: ModeRegister,
    prop: Propagator,
    time: f64,
}

impl CbsParity {
    fn new(work: usize) -> Result<Self> {
        let reg = ModeRegister::with_dims(&[work, work])?;
        let h = cbs(&reg, 1.0, 0.0, 0, 1, Level::Up)?;
        Ok(CbsParity { prop: Propagator::new(h.matrix()), reg, time: 2.0 * crate::hamiltonians::cbs_swap_time(1.0) })
    }

    /// ⟨σ_x⟩ after (U_CBS)² on (|↓⟩+|↑⟩)/√2 ⊗ |φ⟩ ⊗ |0⟩, which equals ⟨φ|Π|φ⟩.
    fn expect(&self, phi: &[C64]) -> Result<f64> {
        let w = phi.len();
        let mut anc = vec![ZERO; w];
        anc[0] = ONE;
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s = HybridState::product(&self.reg, [h, h], &[phi.to_vec(), anc])?;
        let out = self.prop.apply(self.time, s.amplitudes());
        let half = self.reg.motional_dim();
        let sx: C64 = (0..half).map(|i| out[i].conj() * out[half + i]).sum::<C64>() * 2.0;
        Ok(sx.re)
    }
}

/// ⟨φ|Π|φ⟩ read out through the CBS ancilla circuit; `phi` spans one mode.
pub fn cbs_parity(phi: &[C64]) -> Result<f64> {
    CbsParity::new(phi.len())?.expect(phi)
}

/// W(α) = (2/π)⟨Π⟩ of the state displaced by −α.
pub fn wigner(state: &HybridState, mode: usize, grid: &[C64], method: WignerMethod, pad: usize) -> Result<PhaseSpaceGrid> {
    check_grid(grid)?;
    let rho = reduced_density(state, mode)?;
    let work = rho.nrows() + pad;
    let comps = purify(&rho, work);
    let engine = match method {
        WignerMethod::CbsParity => Some(CbsParity::new(work)?),
        WignerMethod::Parity => None,
    };
    let mut values = Vec::with_capacity(grid.len());
    for &a in grid {
        let d = displacement_unitary(-a, work);
        let mut w = 0.0;
        for (p, v) in &comps {
            let phi = linalg::dense_matvec(&d, v);
            let tail: f64 = phi[work - 2..].iter().map(|x| x.norm_sqr()).sum();
            if tail > DEFAULT_LEAKAGE_THRESHOLD {
                return Err(Error::Leakage { leakage: tail, threshold: DEFAULT_LEAKAGE_THRESHOLD });
            }
            let par = match &engine {
                None => phi.iter().enumerate().map(|(n, x)| if n % 2 == 0 { x.norm_sqr() } else { -x.norm_sqr() }).sum(),
                Some(e) => e.expect(&phi)?,
            };
            w += p * par;
        }
        values.push(2.0 / PI * w);
    }
    let label = match method {
        WignerMethod::Parity => "wigner-parity",
        WignerMethod::CbsParity => "wigner-cbs",
    };
    Ok(PhaseSpaceGrid { points: grid.to_vec(), values, method: label.into() })
}

/// Fock populations measured after displacing the mode by `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacedPopulations {
    pub alpha: C64,
    pub probs: Vec<f64>,
}

/// Noiseless data: P(n) of D(α)ρD(α)† for each α, n < n_meas.
pub fn displaced_populations(rho: &DMatrix<C64>, alphas: &[C64], n_meas: usize) -> Vec<DisplacedPopulations> {
    let d = rho.nrows();
    let work = d.max(n_meas) + 40;
    alphas
        .iter()
        .map(|&a| {
            let dm = displacement_elements(a, work);
            let sub = dm.view((0, 0), (n_meas, d)).into_owned();
            let r = &sub * rho * sub.adjoint();
            DisplacedPopulations { alpha: a, probs: (0..n_meas).map(|n| r[(n, n)].re).collect() }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct DensityReconstruction {
    pub rho: DMatrix<C64>,
    pub iterations: usize,
    /// Trace distance between the last two iterates.
    pub residual: f64,
}

fn trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    SymmetricEigen::new(a - b).eigenvalues.iter().map(|v| v.abs()).sum::<f64>() / 2.0
}

/// Iterative maximum-likelihood (RρR) reconstruction on Fock levels 0..=n_max.
pub fn reconstruct_density(data: &[DisplacedPopulations], n_max: usize, iterations: usize) -> Result<DensityReconstruction> {
    if data.len() < 8 {
        return Err(Error::InvalidParameter(format!("{} displacement settings given, need ≥ 8", data.len())));
    }
    let d = n_max + 1;
    let mut rho = DMatrix::<C64>::identity(d, d) / C64::new(d as f64, 0.0);
    if iterations == 0 {
        return Ok(DensityReconstruction { rho, iterations: 0, residual: f64::NAN });
    }
    let n_meas = data.iter().map(|s| s.probs.len()).max().unwrap_or(0);
    let work = d.max(n_meas) + 40;
    // POVM rows: ⟨n|D(α)|·⟩ restricted to the fit space.
    let mut rows: Vec<(DVector<C64>, f64)> = Vec::new();
    let total: f64 = data.iter().map(|s| s.probs.iter().sum::<f64>()).sum();
    for s in data {
        let dm = displacement_elements(s.alpha, work);
        for (n, &f) in s.probs.iter().enumerate() {
            let row = DVector::from_iterator(d, (0..d).map(|j| dm[(n, j)]));
            rows.push((row, f / total));
        }
    }
    let mut residual = f64::INFINITY;
    for it in 1..=iterations {
        let mut r = DMatrix::<C64>::zeros(d, d);
        for (row, f) in &rows {
            if *f <= 0.0 {
                continue;
            }
            let p = (row.transpose() * &rho * row.conjugate())[(0, 0)].re;
            if p > 1e-300 {
                // E = v v† with v = conj(row)
                let v = row.conjugate();
                r += &v * v.adjoint() * C64::new(f / p, 0.0);
            }
        }
        let mut next = &r * &rho * &r;
        let tr = next.trace();
        next /= tr;
        next = (&next + next.adjoint()) * C64::new(0.5, 0.0);
        residual = trace_distance(&next, &rho);
        rho = next;
        if residual < 1e-8 {
            return Ok(DensityReconstruction { rho, iterations: it, residual });
        }
    }
    Err(Error::Convergence(format!("maximum-likelihood iteration stopped at residual {residual:.3e}")))
}

/// ⟨ψ|ρ|ψ⟩ for a pure target.
pub fn density_fidelity(rho: &DMatrix<C64>, psi: &[C64]) -> f64 {
    let v = DVector::from_column_slice(psi);
    (v.adjoint() * rho * &v)[(0, 0)].re
}

/// Leakage of a state after an operator (diagnostic for displaced grids).
pub fn leakage_after(op: &OperatorMatrix, state: &HybridState) -> Result<f64> {
    Ok(leakage(&state.apply(op)?))
}
