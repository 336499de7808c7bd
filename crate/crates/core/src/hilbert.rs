//! Truncated Fock space: registers, basis indexing, states and operators.
//!
//! The composite space is qubit ⊗ mode₁ ⊗ … ⊗ mode_M. Qubit level |↑⟩ has
//! index 0 and |↓⟩ index 1, so σ_z = diag(+1, −1). Indices are row-major in
//! declaration order with the qubit as the slowest factor.

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{displacement_unitary, squeeze_unitary};
use crate::linalg::{self, CsrMatrix, C64, I, ONE, ZERO};

pub const DEFAULT_LEAKAGE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    /// Angular frequency, rad/s.
    pub frequency: f64,
    pub lamb_dicke: f64,
    pub dim: usize,
}

impl ModeSpec {
    pub fn new(frequency: f64, lamb_dicke: f64, dim: usize) -> Result<Self> {
        let m = ModeSpec { frequency, lamb_dicke, dim };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidDimension(self.dim));
        }
        if !(self.frequency > 0.0) {
            return Err(Error::InvalidParameter(format!("mode frequency {} must be > 0", self.frequency)));
        }
        if !(self.lamb_dicke > 0.0 && self.lamb_dicke < 1.0) {
            return Err(Error::InvalidParameter(format!("Lamb-Dicke parameter {} outside (0,1)", self.lamb_dicke)));
        }
        Ok(())
    }

    /// True when η·dim² ≥ 1, i.e. the truncation reaches outside the Lamb–Dicke regime.
    pub fn lamb_dicke_warning(&self) -> bool {
        self.lamb_dicke * (self.dim * self.dim) as f64 >= 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct QubitSpec {
    /// Hyperfine splitting, rad/s. Bookkeeping only.
    pub splitting: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRegister {
    pub qubit: QubitSpec,
    pub modes: Vec<ModeSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Up,
    Down,
}

impl Level {
    pub fn index(self) -> usize {
        match self {
            Level::Up => 0,
            Level::Down => 1,
        }
    }

    pub fn from_index(i: usize) -> Level {
        if i == 0 {
            Level::Up
        } else {
            Level::Down
        }
    }

    pub fn flip(self) -> Level {
        match self {
            Level::Up => Level::Down,
            Level::Down => Level::Up,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Qubit,
    Mode(usize),
}

impl ModeRegister {
    pub fn new(qubit: QubitSpec, modes: Vec<ModeSpec>) -> Result<Self> {
        if qubit.splitting < 0.0 {
            return Err(Error::InvalidParameter("qubit splitting must be ≥ 0".into()));
        }
        for m in &modes {
            m.validate()?;
        }
        Ok(ModeRegister { qubit, modes })
    }

    /// Register with the given mode dimensions, unit frequencies and η = 0.1.
    pub fn with_dims(dims: &[usize]) -> Result<Self> {
        let modes = dims.iter().map(|&d| ModeSpec::new(1.0, 0.1, d)).collect::<Result<Vec<_>>>()?;
        Self::new(QubitSpec::default(), modes)
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn mode_dim(&self, m: usize) -> usize {
        self.modes[m].dim
    }

    /// Factor dimensions with the qubit first.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(2).chain(self.modes.iter().map(|m| m.dim)).collect()
    }

    pub fn motional_dim(&self) -> usize {
        self.modes.iter().map(|m| m.dim).product()
    }

    pub fn total_dim(&self) -> usize {
        2 * self.motional_dim()
    }

    pub fn slot_dim(&self, slot: Slot) -> Result<usize> {
        match slot {
            Slot::Qubit => Ok(2),
            Slot::Mode(m) => self
                .modes
                .get(m)
                .map(|s| s.dim)
                .ok_or(Error::SlotOutOfRange { slot: m, modes: self.modes.len() }),
        }
    }

    fn slot_position(&self, slot: Slot) -> Result<usize> {
        self.slot_dim(slot)?;
        Ok(match slot {
            Slot::Qubit => 0,
            Slot::Mode(m) => m + 1,
        })
    }

    pub fn index(&self, level: Level, ns: &[usize]) -> Result<usize> {
        if ns.len() != self.modes.len() {
            return Err(Error::DimensionMismatch { expected: self.modes.len(), got: ns.len() });
        }
        let mut idx = level.index();
        for (n, m) in ns.iter().zip(&self.modes) {
            if *n >= m.dim {
                return Err(Error::FockOutOfRange { n: *n, dim: m.dim });
            }
            idx = idx * m.dim + n;
        }
        Ok(idx)
    }

    pub fn tuple(&self, mut index: usize) -> (Level, Vec<usize>) {
        let mut ns = vec![0; self.modes.len()];
        for (k, m) in self.modes.iter().enumerate().rev() {
            ns[k] = index % m.dim;
            index /= m.dim;
        }
        (Level::from_index(index), ns)
    }
}

/// Single-mode ladder matrices.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub lower: DMatrix<C64>,
    pub raise: DMatrix<C64>,
    pub number: DMatrix<C64>,
    pub parity: DMatrix<C64>,
}

pub fn mode_ladder(dim: usize) -> Result<Ladder> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut raise = DMatrix::from_element(dim, dim, ZERO);
    for n in 0..dim - 1 {
        raise[(n + 1, n)] = C64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let number = DMatrix::from_fn(dim, dim, |i, j| if i == j { C64::new(i as f64, 0.0) } else { ZERO });
    let parity = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        } else {
            ZERO
        }
    });
    Ok(Ladder { lower, raise, number, parity })
}

fn mat2(a: C64, b: C64, c: C64, d: C64) -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

pub fn sigma_x() -> DMatrix<C64> {
    mat2(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> DMatrix<C64> {
    mat2(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> DMatrix<C64> {
    mat2(ONE, ZERO, ZERO, -ONE)
}

/// σ₊ = |↑⟩⟨↓|
pub fn sigma_plus() -> DMatrix<C64> {
    mat2(ZERO, ONE, ZERO, ZERO)
}

/// σ₋ = |↓⟩⟨↑|
pub fn sigma_minus() -> DMatrix<C64> {
    mat2(ZERO, ZERO, ONE, ZERO)
}

pub fn level_projector(level: Level) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(2, 2, ZERO);
    m[(level.index(), level.index())] = ONE;
    m
}

/// Operator on the full register.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    register: ModeRegister,
    matrix: CsrMatrix,
    hermitian: bool,
}

const HERMITIAN_TOL: f64 = 1e-12;

impl OperatorMatrix {
    pub fn new(register: &ModeRegister, matrix: CsrMatrix) -> Result<Self> {
        if matrix.dim() != register.total_dim() {
            return Err(Error::DimensionMismatch { expected: register.total_dim(), got: matrix.dim() });
        }
        let hermitian = matrix.hermitian_deviation() < HERMITIAN_TOL;
        Ok(OperatorMatrix { register: register.clone(), matrix, hermitian })
    }

    pub fn zero(register: &ModeRegister) -> Self {
        OperatorMatrix { register: register.clone(), matrix: CsrMatrix::zeros(register.total_dim()), hermitian: true }
    }

    pub fn identity(register: &ModeRegister) -> Self {
        OperatorMatrix { register: register.clone(), matrix: CsrMatrix::identity(register.total_dim()), hermitian: true }
    }

    pub fn register(&self) -> &ModeRegister {
        &self.register
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.register != other.register {
            return Err(Error::RegisterMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Self::new(&self.register, self.matrix.add(&other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Self::new(&self.register, self.matrix.sub(&other.matrix))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Self::new(&self.register, self.matrix.mul(&other.matrix))
    }

    pub fn scale(&self, c: C64) -> Self {
        let matrix = self.matrix.scale(c);
        let hermitian = matrix.hermitian_deviation() < HERMITIAN_TOL;
        OperatorMatrix { register: self.register.clone(), matrix, hermitian }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        OperatorMatrix { register: self.register.clone(), matrix: self.matrix.scale(C64::new(c, 0.0)), hermitian: self.hermitian }
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix { register: self.register.clone(), matrix: self.matrix.adjoint(), hermitian: self.hermitian }
    }

    /// Largest entry of [A, B].
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        self.check(other)?;
        Ok(self.matrix.commutator(&other.matrix).max_abs())
    }

    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        self.matrix.matvec(amps)
    }

    pub fn sum<'a, It: IntoIterator<Item = &'a OperatorMatrix>>(register: &ModeRegister, ops: It) -> Result<Self> {
        let mut acc = Self::zero(register);
        for o in ops {
            acc = acc.add(o)?;
        }
        Ok(acc)
    }
}

/// identity ⊗ … ⊗ op ⊗ … ⊗ identity
pub fn embed(op: &DMatrix<C64>, slot: Slot, register: &ModeRegister) -> Result<OperatorMatrix> {
    embed_product(&[(slot, op)], register)
}

/// Tensor product of single-factor operators on distinct slots (identity elsewhere).
pub fn embed_product(factors: &[(Slot, &DMatrix<C64>)], register: &ModeRegister) -> Result<OperatorMatrix> {
    let dims = register.dims();
    let mut ops: Vec<Option<&DMatrix<C64>>> = vec![None; dims.len()];
    for (slot, op) in factors {
        let p = register.slot_position(*slot)?;
        if op.nrows() != dims[p] || op.ncols() != dims[p] {
            return Err(Error::DimensionMismatch { expected: dims[p], got: op.nrows() });
        }
        if ops[p].is_some() {
            return Err(Error::InvalidParameter("repeated slot in tensor product".into()));
        }
        ops[p] = Some(op);
    }
    // Start from a 1x1 "matrix" and extend one factor at a time.
    let mut entries: Vec<(usize, usize, C64)> = vec![(0, 0, ONE)];
    for (p, &d) in dims.iter().enumerate() {
        let local: Vec<(usize, usize, C64)> = match ops[p] {
            Some(m) => {
                let mut v = Vec::new();
                for i in 0..d {
                    for j in 0..d {
                        if m[(i, j)] != ZERO {
                            v.push((i, j, m[(i, j)]));
                        }
                    }
                }
                v
            }
            None => (0..d).map(|i| (i, i, ONE)).collect(),
        };
        let mut next = Vec::with_capacity(entries.len() * local.len());
        for &(r, c, v) in &entries {
            for &(a, b, w) in &local {
                next.push((r * d + a, c * d + b, v * w));
            }
        }
        entries = next;
    }
    OperatorMatrix::new(register, CsrMatrix::from_triplets(register.total_dim(), entries))
}

/// Apply a single-factor matrix to a raw amplitude vector without forming the full operator.
pub fn apply_local(register: &ModeRegister, slot: Slot, op: &DMatrix<C64>, amps: &[C64]) -> Result<Vec<C64>> {
    let dims = register.dims();
    let p = register.slot_position(slot)?;
    let d = dims[p];
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: op.nrows() });
    }
    let inner: usize = dims[p + 1..].iter().product();
    let outer = amps.len() / (d * inner);
    let mut out = vec![ZERO; amps.len()];
    let mut buf = vec![ZERO; d];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * d * inner + i;
            for (k, b) in buf.iter_mut().enumerate() {
                *b = amps[base + k * inner];
            }
            for r in 0..d {
                let mut acc = ZERO;
                for (k, b) in buf.iter().enumerate() {
                    acc += op[(r, k)] * b;
                }
                out[base + r * inner] = acc;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    register: ModeRegister,
    amps: Vec<C64>,
}

impl HybridState {
    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(register: &ModeRegister, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != register.total_dim() {
            return Err(Error::DimensionMismatch { expected: register.total_dim(), got: amps.len() });
        }
        let n = linalg::norm(&amps);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter("state vector has zero or non-finite norm".into()));
        }
        let amps = amps.into_iter().map(|a| a / n).collect();
        Ok(HybridState { register: register.clone(), amps })
    }

    pub fn basis(register: &ModeRegister, level: Level, ns: &[usize]) -> Result<Self> {
        let idx = register.index(level, ns)?;
        let mut amps = vec![ZERO; register.total_dim()];
        amps[idx] = ONE;
        Ok(HybridState { register: register.clone(), amps })
    }

    /// Product state from qubit amplitudes (↑, ↓) and one amplitude vector per mode.
    pub fn product(register: &ModeRegister, qubit: [C64; 2], modes: &[Vec<C64>]) -> Result<Self> {
        if modes.len() != register.num_modes() {
            return Err(Error::DimensionMismatch { expected: register.num_modes(), got: modes.len() });
        }
        let mut amps = qubit.to_vec();
        for (k, m) in modes.iter().enumerate() {
            if m.len() != register.mode_dim(k) {
                return Err(Error::DimensionMismatch { expected: register.mode_dim(k), got: m.len() });
            }
            amps = amps.iter().flat_map(|a| m.iter().map(move |b| a * b)).collect();
        }
        Self::from_amplitudes(register, amps)
    }

    pub fn register(&self) -> &ModeRegister {
        &self.register
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amps)
    }

    pub fn amplitude(&self, level: Level, ns: &[usize]) -> Result<C64> {
        Ok(self.amps[self.register.index(level, ns)?])
    }

    /// Apply a single-factor matrix and renormalize.
    pub fn apply_local(&self, slot: Slot, op: &DMatrix<C64>) -> Result<Self> {
        let out = apply_local(&self.register, slot, op, &self.amps)?;
        Self::from_amplitudes(&self.register, out)
    }

    pub fn apply(&self, op: &OperatorMatrix) -> Result<Self> {
        if op.register() != &self.register {
            return Err(Error::RegisterMismatch);
        }
        Self::from_amplitudes(&self.register, op.apply(&self.amps))
    }

    /// Replace the qubit factor of a state whose qubit is in a definite level.
    pub fn with_qubit(&self, qubit: [C64; 2]) -> Result<Self> {
        let half = self.register.motional_dim();
        let motion: Vec<C64> = (0..half).map(|i| self.amps[i] + self.amps[half + i]).collect();
        let mut amps = Vec::with_capacity(2 * half);
        amps.extend(motion.iter().map(|m| qubit[0] * m));
        amps.extend(motion.iter().map(|m| qubit[1] * m));
        Self::from_amplitudes(&self.register, amps)
    }

    pub fn check_leakage(&self, threshold: f64) -> Result<f64> {
        let l = leakage(self);
        if l > threshold {
            Err(Error::Leakage { leakage: l, threshold })
        } else {
            Ok(l)
        }
    }
}

/// Initial-state recipes. Mode-wise vectors have one entry per mode.
#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    Vacuum,
    Fock(Vec<usize>),
    Coherent(Vec<C64>),
    /// Real squeeze parameters; r > 0 squeezes x = (a + a†)/√2.
    Squeezed(Vec<f64>),
    /// Mean occupations; one Fock state is sampled per call.
    Thermal(Vec<f64>),
    /// Motional amplitudes over the row-major mode basis.
    Amplitudes(Vec<C64>),
}

/// Build a state with the qubit in |↓⟩.
pub fn make_state(kind: &StateKind, register: &ModeRegister, rng: Option<&mut dyn RngCore>) -> Result<HybridState> {
    make_state_guarded(kind, register, rng, DEFAULT_LEAKAGE_THRESHOLD)
}

pub fn make_state_guarded(
    kind: &StateKind,
    register: &ModeRegister,
    rng: Option<&mut dyn RngCore>,
    threshold: f64,
) -> Result<HybridState> {
    let m = register.num_modes();
    let want = |len: usize| -> Result<()> {
        if len != m {
            Err(Error::DimensionMismatch { expected: m, got: len })
        } else {
            Ok(())
        }
    };
    let down = [ZERO, ONE];
    let vac = |d: usize| {
        let mut v = vec![ZERO; d];
        v[0] = ONE;
        v
    };
    let state = match kind {
        StateKind::Vacuum => HybridState::basis(register, Level::Down, &vec![0; m])?,
        StateKind::Fock(ns) => {
            want(ns.len())?;
            HybridState::basis(register, Level::Down, ns)?
        }
        StateKind::Coherent(alphas) => {
            want(alphas.len())?;
            let modes: Vec<Vec<C64>> = alphas
                .iter()
                .enumerate()
                .map(|(k, &a)| {
                    let d = register.mode_dim(k);
                    linalg::dense_matvec(&displacement_unitary(a, d), &vac(d))
                })
                .collect();
            HybridState::product(register, down, &modes)?
        }
        StateKind::Squeezed(rs) => {
            want(rs.len())?;
            let modes: Vec<Vec<C64>> = rs
                .iter()
                .enumerate()
                .map(|(k, &r)| {
                    let d = register.mode_dim(k);
                    linalg::dense_matvec(&squeeze_unitary(C64::new(r, 0.0), d), &vac(d))
                })
                .collect();
            HybridState::product(register, down, &modes)?
        }
        StateKind::Thermal(nbars) => {
            want(nbars.len())?;
            let rng = rng.ok_or_else(|| Error::InvalidParameter("thermal state needs an rng".into()))?;
            let mut ns = Vec::with_capacity(m);
            for (k, &nb) in nbars.iter().enumerate() {
                ns.push(sample_thermal(nb, register.mode_dim(k), rng)?);
            }
            HybridState::basis(register, Level::Down, &ns)?
        }
        StateKind::Amplitudes(a) => {
            let half = register.motional_dim();
            if a.len() != half {
                return Err(Error::DimensionMismatch { expected: half, got: a.len() });
            }
            let mut amps = vec![ZERO; half];
            amps.extend_from_slice(a);
            HybridState::from_amplitudes(register, amps)?
        }
    };
    state.check_leakage(threshold)?;
    Ok(state)
}

/// Truncated, renormalized Boltzmann weights for mean occupation n̄.
pub fn thermal_weights(nbar: f64, dim: usize) -> Result<Vec<f64>> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidParameter(format!("mean occupation {nbar} must be ≥ 0")));
    }
    if nbar == 0.0 {
        let mut w = vec![0.0; dim];
        w[0] = 1.0;
        return Ok(w);
    }
    let q = nbar / (nbar + 1.0);
    let mut w: Vec<f64> = (0..dim).map(|n| q.powi(n as i32)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    Ok(w)
}

pub fn sample_thermal(nbar: f64, dim: usize, rng: &mut dyn RngCore) -> Result<usize> {
    let w = thermal_weights(nbar, dim)?;
    Ok(sample_index(&w, rng))
}

/// Draw an index from a discrete distribution (weights need not be normalized).
pub fn sample_index<R: RngCore + ?Sized>(w: &[f64], rng: &mut R) -> usize {
    let total: f64 = w.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &x) in w.iter().enumerate() {
        if u < x {
            return i;
        }
        u -= x;
    }
    w.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

pub fn expectation(state: &HybridState, op: &OperatorMatrix) -> Result<C64> {
    if op.register() != state.register() {
        return Err(Error::RegisterMismatch);
    }
    Ok(linalg::dot(state.amplitudes(), &op.apply(state.amplitudes())))
}

pub fn expectation_local(state: &HybridState, slot: Slot, op: &DMatrix<C64>) -> Result<C64> {
    let v = apply_local(state.register(), slot, op, state.amplitudes())?;
    Ok(linalg::dot(state.amplitudes(), &v))
}

pub fn fidelity(a: &HybridState, b: &HybridState) -> Result<f64> {
    if a.register() != b.register() {
        return Err(Error::RegisterMismatch);
    }
    Ok(linalg::dot(a.amplitudes(), b.amplitudes()).norm_sqr())
}

pub fn phonon_distribution(state: &HybridState, mode: usize) -> Result<Vec<f64>> {
    let reg = state.register();
    let d = reg.slot_dim(Slot::Mode(mode))?;
    let mut p = vec![0.0; d];
    for (i, a) in state.amplitudes().iter().enumerate() {
        let (_, ns) = reg.tuple(i);
        p[ns[mode]] += a.norm_sqr();
    }
    Ok(p)
}

/// Populations of (|↑⟩, |↓⟩).
pub fn qubit_populations(state: &HybridState) -> [f64; 2] {
    let half = state.register().motional_dim();
    let up = state.amplitudes()[..half].iter().map(|a| a.norm_sqr()).sum();
    let down = state.amplitudes()[half..].iter().map(|a| a.norm_sqr()).sum();
    [up, down]
}

/// Joint Fock populations of all modes, summed over the qubit (row-major).
pub fn joint_distribution(state: &HybridState) -> Vec<f64> {
    let half = state.register().motional_dim();
    let a = state.amplitudes();
    (0..half).map(|i| a[i].norm_sqr() + a[half + i].norm_sqr()).collect()
}

/// Population in basis states where any mode sits in one of its top two levels.
pub fn leakage(state: &HybridState) -> f64 {
    let reg = state.register();
    let mut l = 0.0;
    for (i, a) in state.amplitudes().iter().enumerate() {
        let (_, ns) = reg.tuple(i);
        if ns.iter().zip(&reg.modes).any(|(n, m)| n + 2 >= m.dim) {
            l += a.norm_sqr();
        }
    }
    l
}

/// Reduced density matrix of one mode.
pub fn reduced_density(state: &HybridState, mode: usize) -> Result<DMatrix<C64>> {
    let reg = state.register();
    let dims = reg.dims();
    let p = mode + 1;
    let d = reg.slot_dim(Slot::Mode(mode))?;
    let inner: usize = dims[p + 1..].iter().product();
    let outer = state.amplitudes().len() / (d * inner);
    let a = state.amplitudes();
    let mut rho = DMatrix::from_element(d, d, ZERO);
    for o in 0..outer {
        for i in 0..inner {
            let base = o * d * inner + i;
            for r in 0..d {
                let ar = a[base + r * inner];
                if ar == ZERO {
                    continue;
                }
                for c in 0..d {
                    rho[(r, c)] += ar * a[base + c * inner].conj();
                }
            }
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_entries() {
        let l = mode_ladder(2).unwrap();
        assert_eq!(l.raise[(1, 0)], ONE);
        let l = mode_ladder(4).unwrap();
        assert!((l.raise[(3, 2)].re - 1.7320508075688772).abs() < 1e-15);
        let l = mode_ladder(3).unwrap();
        assert_eq!(l.parity[(1, 1)], -ONE);
        assert_eq!(l.parity[(2, 2)], ONE);
        assert!(matches!(mode_ladder(1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn truncated_commutator_is_identity_below_top_level() {
        let d = 7;
        let l = mode_ladder(d).unwrap();
        let c = &l.lower * &l.raise - &l.raise * &l.lower;
        for i in 0..d {
            for j in 0..d {
                let want = if i == j && i < d - 1 { 1.0 } else { 0.0 };
                if i == d - 1 && j == d - 1 {
                    // the top level carries −(d−1) instead of 1
                    assert!((c[(i, j)].re + (d - 1) as f64).abs() < 1e-12);
                } else {
                    assert!((c[(i, j)] - C64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn embed_sigma_z_ordering() {
        let reg = ModeRegister::with_dims(&[3]).unwrap();
        let z = embed(&sigma_z(), Slot::Qubit, &reg).unwrap();
        let d: Vec<f64> = z.matrix().diagonal_values().iter().map(|v| v.re).collect();
        assert_eq!(d, vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn embed_number_on_second_mode() {
        let reg = ModeRegister::with_dims(&[3, 4]).unwrap();
        let n = embed(&mode_ladder(4).unwrap().number, Slot::Mode(1), &reg).unwrap();
        let s = HybridState::basis(&reg, Level::Down, &[0, 2]).unwrap();
        assert!((expectation(&s, &n).unwrap().re - 2.0).abs() < 1e-15);
        let id = embed(&DMatrix::identity(3, 3), Slot::Mode(0), &reg).unwrap();
        assert_eq!(id, OperatorMatrix::identity(&reg));
    }

    #[test]
    fn embed_rejects_bad_slot_and_size() {
        let reg = ModeRegister::with_dims(&[3]).unwrap();
        assert!(matches!(embed(&sigma_z(), Slot::Mode(1), &reg), Err(Error::SlotOutOfRange { .. })));
        assert!(matches!(embed(&sigma_z(), Slot::Mode(0), &reg), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn apply_local_matches_embed() {
        let reg = ModeRegister::with_dims(&[3, 4]).unwrap();
        let amps: Vec<C64> = (0..reg.total_dim()).map(|k| C64::new(k as f64, -(k as f64) / 3.0)).collect();
        let a = mode_ladder(4).unwrap().lower;
        let x = apply_local(&reg, Slot::Mode(1), &a, &amps).unwrap();
        let y = embed(&a, Slot::Mode(1), &reg).unwrap().apply(&amps);
        assert!(linalg::diff_norm(&x, &y) < 1e-12);
    }

    #[test]
    fn fock_states_and_leakage() {
        let reg = ModeRegister::with_dims(&[5]).unwrap();
        let vac = make_state(&StateKind::Vacuum, &reg, None).unwrap();
        assert_eq!(leakage(&vac), 0.0);
        let top = HybridState::basis(&reg, Level::Down, &[4]).unwrap();
        assert_eq!(leakage(&top), 1.0);
        assert!(matches!(
            make_state(&StateKind::Fock(vec![5]), &reg, None),
            Err(Error::FockOutOfRange { n: 5, dim: 5 })
        ));
        let p = expectation_local(&HybridState::basis(&reg, Level::Down, &[2]).unwrap(), Slot::Mode(0), &mode_ladder(5).unwrap().parity).unwrap();
        assert_eq!(p.re, 1.0);
    }

    #[test]
    fn hong_ou_mandel_input() {
        let reg = ModeRegister::with_dims(&[4, 4]).unwrap();
        let s = make_state(&StateKind::Fock(vec![1, 1]), &reg, None).unwrap();
        assert_eq!(s.amplitude(Level::Down, &[1, 1]).unwrap(), ONE);
    }

    #[test]
    fn thermal_weights_mean() {
        let w = thermal_weights(0.5, 60).unwrap();
        let mean: f64 = w.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        assert!((mean - 0.5).abs() < 1e-10);
    }
}
