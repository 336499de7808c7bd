//! One runner per experiment kind.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::*;
use super::output::{fmt_f64 as f, Check, Table};
use crate::dynamics::{
    propagate_pulsed_sampled, sideband_spectrum_scan, transfer_probability, uniform_bsb, PulseSegment,
    PulseSequence, StaPulseParams, StepControl,
};
use crate::error::{Error, Result};
use crate::hamiltonians::*;
use crate::hilbert::*;
use crate::linalg::C64;
use crate::measurement::{
    density_fidelity, displaced_populations, q_function, reconstruct_density, square_grid, wigner, WignerMethod,
};
use crate::protocols::gkp::marginal_peaks;
use crate::protocols::*;

#[derive(Debug, Default)]
pub struct Outcome {
    pub metrics: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl Outcome {
    fn metric(&mut self, key: &str, v: impl Into<Value>) {
        self.metrics.insert(key.into(), v.into());
    }
}

fn need(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

pub fn run(exp: &Experiment, seed: u64) -> Result<Outcome> {
    match exp {
        Experiment::CbsTruthTable(p) => cbs_truth_table(p, seed),
        Experiment::UniformBsb(p) => uniform_bsb_run(p),
        Experiment::CrossingScan(p) => crossing_scan(p),
        Experiment::KerrPeaks(p) => kerr_peaks(p),
        Experiment::Noon(p) => noon(p),
        Experiment::Gkp(p) => gkp(p),
        Experiment::Jarzynski(p) => jarzynski(p, seed),
        Experiment::Fridge(p) => fridge(p, seed),
        Experiment::Vibronic(p) => vibronic(p, seed),
        Experiment::WignerQScan(p) => wigner_q_scan(p),
        Experiment::CustomSequence(p) => custom_sequence(p),
    }
}

fn cbs_truth_table(p: &CbsParams, seed: u64) -> Result<Outcome> {
    need(p.xi_rad_s > 0.0 && p.xi_rad_s.is_finite(), "xi_rad_s must be > 0")?;
    let reg = ModeRegister::with_dims(&[p.mode_dim, p.mode_dim])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shots = (p.shots > 0).then_some(p.shots);
    let t = fredkin_truth_table(&reg, p.xi_rad_s, shots, &mut rng)?;
    let mut out = Outcome::default();
    let mut tab = Table::new("truth_table", &["in_c", "in_n_i", "in_n_j", "out_c", "out_n_i", "out_n_j", "probability", "count"]);
    for i in 0..8 {
        for o in 0..8 {
            let count = t.counts.as_ref().map(|c| c[i][o].to_string()).unwrap_or_default();
            tab.push(vec![
                (i >> 2).to_string(),
                ((i >> 1) & 1).to_string(),
                (i & 1).to_string(),
                (o >> 2).to_string(),
                ((o >> 1) & 1).to_string(),
                (o & 1).to_string(),
                f(t.probabilities[i][o]),
                count,
            ]);
        }
    }
    out.tables.push(tab);
    let min_success = t.success.iter().copied().fold(1.0, f64::min);
    out.metric("swap_time_s", cbs_swap_time(p.xi_rad_s));
    out.metric("min_success", min_success);
    out.checks.push(Check::at_least("min_success", min_success, 1.0, 1e-9));

    let mut par = Table::new("parity", &["state", "direct_parity", "cbs_parity", "abs_diff"]);
    let mut worst = 0.0f64;
    for k in 0..p.parity_states {
        let mut r = trajectory_rng(seed, k as u64);
        let mut phi: Vec<C64> = (0..p.mode_dim).map(|_| C64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).collect();
        let norm = phi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        phi.iter_mut().for_each(|c| *c /= norm);
        let direct: f64 = phi.iter().enumerate().map(|(n, c)| if n % 2 == 0 { c.norm_sqr() } else { -c.norm_sqr() }).sum();
        let via = crate::measurement::cbs_parity(&phi)?;
        worst = worst.max((direct - via).abs());
        par.push(vec![k.to_string(), f(direct), f(via), f((direct - via).abs())]);
    }
    out.tables.push(par);
    if p.parity_states > 0 {
        out.checks.push(Check::at_most("parity_max_abs_diff", worst, 0.0, 1e-9));
    }
    Ok(out)
}

fn uniform_bsb_run(p: &BsbParams) -> Result<Outcome> {
    need(p.max_n + 3 < p.mode_dim, "mode_dim must exceed max_n + 3")?;
    need(p.samples >= 1, "samples must be ≥ 1")?;
    let reg = ModeRegister::with_dims(&[p.mode_dim])?;
    let sta = StaPulseParams {
        omega0: p.omega0_rad_s,
        beta: p.beta,
        delta0: p.delta0_rad_s,
        duration: p.duration_s,
        mode: 0,
        variant: p.variant,
    };
    let seq = uniform_bsb(&reg, &sta)?;
    let up = embed(&level_projector(Level::Up), Slot::Qubit, &reg)?;
    let num = embed(&mode_ladder(p.mode_dim)?.number, Slot::Mode(0), &reg)?;
    let ctl = StepControl::default();
    let runs = (0..=p.max_n)
        .into_par_iter()
        .map(|n| {
            let s = make_state(&StateKind::Fock(vec![n]), &reg, None)?;
            let (fin, rows) = propagate_pulsed_sampled(&seq, &s, &ctl, &[up.clone(), num.clone()], p.samples)?;
            Ok((transfer_probability(&fin, &reg, n, 0)?, rows))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Outcome::default();
    let mut tr = Table::new("transfer", &["n", "transfer_probability"]);
    let mut trace = Table::new("trace", &["n", "time_s", "p_up", "mean_n"]);
    for (n, (t, rows)) in runs.iter().enumerate() {
        tr.push(vec![n.to_string(), f(*t)]);
        for (time, v) in rows {
            trace.push(vec![n.to_string(), f(*time), f(v[0]), f(v[1])]);
        }
    }
    let min = runs.iter().map(|r| r.0).fold(1.0, f64::min);
    out.metric("pi_time_s", sta.pi_time());
    out.metric("duration_over_pi_time", sta.duration / sta.pi_time());
    out.metric("min_transfer", min);
    out.checks.push(Check::at_least("min_transfer", min, 0.99, 0.0));
    out.tables.push(tr);
    out.tables.push(trace);
    Ok(out)
}

fn pair_gap(xi: f64, delta: f64) -> f64 {
    let (_, vals, _) = parametric_manifold(xi, delta, 2);
    (vals[1] - vals[0]).abs()
}

fn crossing_scan(p: &CrossingParams) -> Result<Outcome> {
    need(p.points >= 3, "points must be ≥ 3")?;
    need(p.delta_max_rad_s > p.delta_min_rad_s, "delta_max_rad_s must exceed delta_min_rad_s")?;
    need(p.xi_d_rad_s > 0.0, "xi_d_rad_s must be > 0")?;
    let xi = p.xi_d_rad_s;
    let deltas = linspace(p.delta_min_rad_s, p.delta_max_rad_s, p.points);
    let mut spec = Table::new("spectrum", &["delta_rad_s", "manifold", "n_a_max_overlap", "energy_rad_s"]);
    let mut gap = Table::new("gap", &["delta_rad_s", "gap_rad_s"]);
    for &d in &deltas {
        for k in 0..=p.max_manifold {
            let (states, vals, vecs) = parametric_manifold(xi, d, k);
            for (j, e) in vals.iter().enumerate() {
                let lead = (0..states.len()).max_by(|&a, &b| vecs[(a, j)].abs().total_cmp(&vecs[(b, j)].abs())).unwrap_or(0);
                spec.push(vec![f(d), k.to_string(), states[lead].0.to_string(), f(*e)]);
            }
        }
        gap.push(vec![f(d), f(pair_gap(xi, d))]);
    }
    let gaps: Vec<f64> = deltas.iter().map(|&d| pair_gap(xi, d)).collect();
    let i = (0..gaps.len()).min_by(|&a, &b| gaps[a].total_cmp(&gaps[b])).expect("nonempty");
    let (mut a, mut b) = (deltas[i.saturating_sub(1)], deltas[(i + 1).min(deltas.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if pair_gap(xi, c) < pair_gap(xi, d) {
            b = d;
        } else {
            a = c;
        }
    }
    let at = 0.5 * (a + b);
    let min_gap = pair_gap(xi, at);
    let expected = 2.0 * 2f64.sqrt() * xi;
    let mut out = Outcome::default();
    out.metric("min_gap_rad_s", min_gap);
    out.metric("delta_at_min_gap_rad_s", at);
    out.metric("expected_gap_rad_s", expected);
    out.checks.push(Check::near("min_gap_relative_error", (min_gap - expected).abs() / expected, 0.0, 0.01));
    out.tables.push(spec);
    out.tables.push(gap);
    Ok(out)
}

fn kerr_peaks(p: &KerrParams) -> Result<Outcome> {
    need(p.points >= 3 && p.detuning_max_rad_s > p.detuning_min_rad_s, "need points ≥ 3 and a nonempty detuning range")?;
    need(p.probe_rabi_rad_s > 0.0 && p.probe_duration_s > 0.0, "probe Rabi frequency and duration must be > 0")?;
    let (xi, delta) = (p.xi_d_rad_s, p.delta_rad_s);
    let mut out = Outcome::default();
    let mut shifts = Table::new("shifts", &["n_b", "exact_shift_rad_s", "perturbative_shift_rad_s", "relative_difference"]);
    let mut exact = Vec::new();
    let mut worst_low = 0.0f64;
    for nb in 0..=p.max_n_b {
        let e = cross_kerr_shift(xi, delta, nb, KerrMethod::Exact)?;
        let q = cross_kerr_shift(xi, delta, nb, KerrMethod::Perturbative)?;
        let rel = (e - q).abs() / e.abs().max(q.abs());
        if nb <= 3 {
            worst_low = worst_low.max(rel);
        }
        exact.push(e);
        shifts.push(vec![nb.to_string(), f(e), f(q), f(rel)]);
    }
    let monotone = exact.windows(2).all(|w| w[1].abs() > w[0].abs() && w[1].signum() == w[0].signum());
    out.metric("max_relative_difference_n_b_le_3", worst_low);
    out.checks.push(Check::at_most("perturbative_vs_exact_n_b_le_3", worst_low, 0.05, 0.0));
    out.checks.push(Check::flag("exact_shift_monotone", monotone));
    out.tables.push(shifts);

    let dets = linspace(p.detuning_min_rad_s, p.detuning_max_rad_s, p.points);
    let step = dets[1] - dets[0];
    let mut probe = Table::new("probe_spectrum", &["n_b", "probe_detuning_rad_s", "p_up"]);
    let mut peaks = Table::new("peaks", &["n_b", "peak_detuning_rad_s", "expected_rad_s"]);
    let mut worst_peak = 0.0f64;
    for nb in 0..=p.probe_max_n_b {
        let reg = ModeRegister::with_dims(&[5, nb + 8])?;
        let s = HybridState::basis(&reg, Level::Down, &[0, nb])?;
        let coupling = degenerate_parametric(&reg, xi, delta, 0, 1)?;
        let scan = sideband_spectrum_scan(
            |d| sideband_probe(&reg, 0, p.probe_rabi_rad_s, d + delta)?.add(&coupling),
            &dets,
            &s,
            p.probe_duration_s,
        )?;
        for (d, pu) in &scan {
            probe.push(vec![nb.to_string(), f(*d), f(*pu)]);
        }
        let best = scan.iter().copied().fold((f64::NAN, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        let expected = -cross_kerr_shift(xi, delta, nb, KerrMethod::Exact)?;
        worst_peak = worst_peak.max((best.0 - expected).abs());
        peaks.push(vec![nb.to_string(), f(best.0), f(expected)]);
    }
    out.metric("max_peak_offset_rad_s", worst_peak);
    out.checks.push(Check::at_most("peak_offset_rad_s", worst_peak, 0.0, 2.0 * step));
    out.tables.push(probe);
    out.tables.push(peaks);
    Ok(out)
}

fn noon(p: &NoonParams) -> Result<Outcome> {
    need(p.n >= 1 && p.points >= 8, "need n ≥ 1 and points ≥ 8")?;
    need(p.mode_dim >= p.n + 3, "mode_dim must be ≥ n + 3")?;
    let reg = ModeRegister::with_dims(&[p.mode_dim, p.mode_dim])?;
    let s = noon_prepare(&reg, p.n, p.phase_s_rad)?;
    let phis: Vec<f64> = (0..p.points).map(|k| 2.0 * PI * k as f64 / p.points as f64).collect();
    let fringe = noon_parity_fringe(&s, &phis, p.k_max)?;
    let q = qfi(&s, &half_difference_number(&reg, 0, 1)?)?;
    let fit = fringe.fit;
    let mut tab = Table::new("fringe", &["phi_rad", "parity", "fit"]);
    for (phi, y) in phis.iter().zip(&fringe.parity) {
        let model = fit.contrast * (fit.k * phi + fit.phase).cos() + fit.offset;
        tab.push(vec![f(*phi), f(*y), f(model)]);
    }
    let n = p.n as f64;
    let mut out = Outcome::default();
    out.metric("contrast", fit.contrast);
    out.metric("k", fit.k);
    out.metric("phase_rad", fit.phase);
    out.metric("offset", fit.offset);
    out.metric("rms_residual", fit.rms_residual);
    out.metric("qfi", q);
    out.checks.push(Check::near("k", fit.k, n, 1e-6));
    out.checks.push(Check::near("contrast", fit.contrast, 1.0, 1e-6));
    out.checks.push(Check::near("qfi", q, n * n, 1e-6));
    out.tables.push(tab);
    Ok(out)
}

fn gkp(p: &GkpCliParams) -> Result<Outcome> {
    need(p.points >= 3 && p.quadrature_max > p.quadrature_min, "need points ≥ 3 and a nonempty quadrature range")?;
    let gp = GkpParams {
        spacing: p.spacing,
        squeeze: p.squeeze,
        half_width: p.half_width,
        envelope_variance: p.envelope_variance,
        dim: p.mode_dim,
    };
    let s = gkp_prepare(&gp)?;
    let grid = linspace(p.quadrature_min, p.quadrature_max, p.points);
    let px = gkp_marginal(&s, 0, Quadrature::Position, &grid)?;
    let pp = gkp_marginal(&s, 0, Quadrature::Momentum, &grid)?;
    let mut marg = Table::new("marginals", &["quadrature", "position_density", "momentum_density"]);
    for ((x, a), b) in grid.iter().zip(&px).zip(&pp) {
        marg.push(vec![f(*x), f(*a), f(*b)]);
    }
    let mut logical = Table::new("logical", &["operator", "re", "im"]);
    let mut out = Outcome::default();
    for (name, op) in [
        ("X", LogicalOp::X),
        ("Y", LogicalOp::Y),
        ("Z", LogicalOp::Z),
        ("stabilizer_x", LogicalOp::StabilizerX),
        ("stabilizer_z", LogicalOp::StabilizerZ),
    ] {
        let v = gkp_logical_expect(&s, 0, p.spacing, op)?;
        logical.push(vec![name.into(), f(v.re), f(v.im)]);
        out.metric(&format!("expect_{name}"), v.re);
    }
    let peaks = marginal_peaks(&grid, &px, 0.05);
    let mut pk = Table::new("position_peaks", &["index", "quadrature"]);
    for (i, x) in peaks.iter().enumerate() {
        pk.push(vec![i.to_string(), f(*x)]);
    }
    let step = grid[1] - grid[0];
    let lattice = 2f64.sqrt() * p.spacing;
    let spacing_err = peaks.windows(2).map(|w| (w[1] - w[0] - lattice).abs()).fold(0.0, f64::max);
    let anti = gkp_anticommutator_norm(p.spacing, p.mode_dim.min(40), p.anticommutator_work_dim);
    out.metric("peak_count", peaks.len());
    out.metric("anticommutator_norm", anti);
    out.checks.push(Check::near("peak_count", peaks.len() as f64, (2 * p.half_width + 1) as f64, 0.0));
    out.checks.push(Check::at_most("peak_spacing_error", spacing_err, 0.0, 2.0 * step));
    out.checks.push(Check::at_most("anticommutator_norm", anti, 0.0, 1e-10));
    out.tables.push(marg);
    out.tables.push(logical);
    out.tables.push(pk);
    Ok(out)
}

fn ramp_name(r: &RampProtocol) -> (String, f64) {
    match r {
        RampProtocol::Sudden => ("sudden".into(), 0.0),
        RampProtocol::Linear { duration } => ("linear".into(), *duration),
        RampProtocol::Adiabatic => ("adiabatic".into(), f64::INFINITY),
    }
}

fn jarzynski(p: &JarzynskiCliParams, seed: u64) -> Result<Outcome> {
    need(!p.temperatures_nk.is_empty() && !p.protocols.is_empty(), "need at least one temperature and one protocol")?;
    let mut tab = Table::new(
        "jarzynski",
        &[
            "temperature_nk",
            "protocol",
            "ramp_duration_s",
            "beta_delta_f",
            "estimator",
            "target",
            "exact_estimator",
            "minus_ln_diss",
            "standard_error",
            "mean_work_j",
        ],
    );
    let mut out = Outcome::default();
    let mut worst_ratio = 0.0f64;
    let mut worst_exact = 0.0f64;
    let mut k = 0u64;
    for &t in &p.temperatures_nk {
        for proto in &p.protocols {
            let tp = ThermoParams::from_free_energy(p.mass_amu * AMU, p.omega_rad_s, p.free_energy_nk * 1e-9, t * 1e-9, p.trials, p.mode_dim);
            let r = jarzynski_run(&tp, proto, seed.wrapping_add(k))?;
            k += 1;
            let (name, dur) = ramp_name(proto);
            worst_ratio = worst_ratio.max(r.minus_ln_diss.abs() / r.standard_error);
            worst_exact = worst_exact.max((r.exact_estimator - r.target).abs() / r.target);
            tab.push(vec![
                f(t),
                name,
                if dur.is_finite() { f(dur) } else { String::new() },
                f(r.beta_delta_f),
                f(r.estimator),
                f(r.target),
                f(r.exact_estimator),
                f(r.minus_ln_diss),
                f(r.standard_error),
                f(r.mean_work),
            ]);
        }
    }
    out.metric("max_abs_minus_ln_over_standard_error", worst_ratio);
    out.metric("max_exact_estimator_relative_error", worst_exact);
    out.checks.push(Check::at_most("minus_ln_within_3_standard_errors", worst_ratio, 3.0, 0.0));
    out.checks.push(Check::at_most("exact_estimator_relative_error", worst_exact, 0.0, 1e-6));
    out.tables.push(tab);
    Ok(out)
}

fn fridge(p: &FridgeCliParams, seed: u64) -> Result<Outcome> {
    let cfg = FridgeConfig {
        xi_n: p.xi_n_rad_s,
        nbar_hot: p.nbar_hot,
        nbar_work: p.nbar_work,
        nbar_cold: p.nbar_cold,
        work_squeeze: p.work_squeeze,
        duration: p.duration_s,
        steps: p.steps,
        trials: p.trials,
    };
    let r = fridge_run(&cfg, seed)?;
    let mut header = vec!["time_s", "mean_n_hot", "mean_n_work", "mean_n_cold"];
    if r.thermal_comparison.is_some() {
        header.extend(["thermal_mean_n_hot", "thermal_mean_n_work", "thermal_mean_n_cold"]);
    }
    let mut tab = Table::new("occupations", &header);
    for (i, t) in r.times.iter().enumerate() {
        let s = &r.series;
        let mut row = vec![f(*t), f(s.mean_hot[i]), f(s.mean_work[i]), f(s.mean_cold[i])];
        if let Some(c) = &r.thermal_comparison {
            row.extend([f(c.mean_hot[i]), f(c.mean_work[i]), f(c.mean_cold[i])]);
        }
        tab.push(row);
    }
    let mut out = Outcome::default();
    let series = |s: &crate::protocols::fridge::FridgeSeries| {
        json!({
            "initial": s.initial,
            "time_average": s.time_average,
            "min_cold": s.min_cold,
            "t_star_s": s.t_star,
            "cools": s.cools,
        })
    };
    out.metric("series", series(&r.series));
    if let Some(c) = &r.thermal_comparison {
        out.metric("thermal_comparison", series(c));
    }
    out.metric("refrigeration_condition", r.refrigeration_condition);
    out.metric("unique_initial_states", r.unique_initial_states);
    out.metric("max_norm_error", r.max_norm_error);
    out.checks.push(Check::at_most("max_norm_error", r.max_norm_error, 0.0, 1e-10));
    out.tables.push(tab);
    Ok(out)
}

fn vibronic(p: &VibronicCliParams, seed: u64) -> Result<Outcome> {
    let dp = DoktorovParams::from_wavenumbers(&p.initial_cm1, &p.final_cm1, &p.alpha, &p.theta_rad);
    dp.validate()?;
    let fc = vibronic_fc(&dp, p.n_max)?;
    let spec = vibronic_spectrum(&fc, &p.final_cm1, p.fwhm_cm1, p.grid_step_cm1, p.min_intensity)?;
    let modes = dp.modes();
    let mut head: Vec<String> = (0..modes).map(|m| format!("n_{m}")).collect();
    head.extend(["energy_cm1".into(), "intensity".into()]);
    let head_ref: Vec<&str> = head.iter().map(|s| s.as_str()).collect();
    let mut sticks = Table::new("sticks", &head_ref);
    for s in &spec.sticks {
        let mut row: Vec<String> = s.levels.iter().map(|n| n.to_string()).collect();
        row.extend([f(s.position), f(s.intensity)]);
        sticks.push(row);
    }
    let mut broad = Table::new("spectrum", &["energy_cm1", "intensity"]);
    for (x, y) in spec.grid.iter().zip(&spec.broadened) {
        broad.push(vec![f(*x), f(*y)]);
    }
    let mut out = Outcome::default();
    out.metric("total_mass", fc.total_mass);
    out.metric("combination_mass", fc.combination_mass());
    out.metric("progression_mass", (0..modes).map(|m| fc.progression_mass(m)).collect::<Vec<_>>());
    out.checks.push(Check::at_least("total_mass", fc.total_mass, 0.999, 0.0));
    out.tables.push(sticks);
    out.tables.push(broad);
    if p.shots > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts = vibronic_sample(&fc, &mut rng, p.shots)?;
        let mut head: Vec<String> = (0..modes).map(|m| format!("n_{m}")).collect();
        head.push("count".into());
        let head_ref: Vec<&str> = head.iter().map(|s| s.as_str()).collect();
        let mut samp = Table::new("samples", &head_ref);
        for (i, c) in counts.iter().enumerate().filter(|(_, c)| **c > 0) {
            let mut row: Vec<String> = fc.levels(i).iter().map(|n| n.to_string()).collect();
            row.push(c.to_string());
            samp.push(row);
        }
        out.tables.push(samp);
    }
    Ok(out)
}

fn scan_state(spec: &StateSpec, reg: &ModeRegister) -> Result<HybridState> {
    let d = reg.mode_dim(0);
    let kind = match *spec {
        StateSpec::Vacuum => StateKind::Vacuum,
        StateSpec::Fock { n } => StateKind::Fock(vec![n]),
        StateSpec::Coherent { re, im } => StateKind::Coherent(vec![C64::new(re, im)]),
        StateSpec::Squeezed { r } => StateKind::Squeezed(vec![r]),
        StateSpec::EvenCat { re, im } => {
            let a = coherent_amplitudes(C64::new(re, im), d);
            let b = coherent_amplitudes(C64::new(-re, -im), d);
            let mut v: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            need(n > 1e-12, "cat amplitude too small to normalize")?;
            v.iter_mut().for_each(|c| *c /= n);
            StateKind::Amplitudes(v)
        }
    };
    make_state(&kind, reg, None)
}

fn wigner_q_scan(p: &ScanParams) -> Result<Outcome> {
    need(p.points >= 2 && p.radius > 0.0, "need points ≥ 2 and radius > 0")?;
    let reg = ModeRegister::with_dims(&[p.mode_dim])?;
    let s = scan_state(&p.state, &reg)?;
    let grid = square_grid(p.radius, p.points);
    let g = match p.method {
        ScanMethod::Husimi => q_function(&s, 0, &grid)?,
        ScanMethod::WignerParity => wigner(&s, 0, &grid, WignerMethod::Parity, p.pad)?,
        ScanMethod::WignerCbs => wigner(&s, 0, &grid, WignerMethod::CbsParity, p.pad)?,
    };
    let mut tab = Table::new("phase_space", &["re_alpha", "im_alpha", "value"]);
    for (a, v) in g.points.iter().zip(&g.values) {
        tab.push(vec![f(a.re), f(a.im), f(*v)]);
    }
    let da = (2.0 * p.radius / (p.points - 1) as f64).powi(2);
    let mut out = Outcome::default();
    out.metric("method", g.method.clone());
    out.metric("grid_integral", g.values.iter().sum::<f64>() * da);
    out.metric("min_value", g.values.iter().copied().fold(f64::INFINITY, f64::min));
    out.metric("max_value", g.values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    out.tables.push(tab);
    if let Some(r) = &p.reconstruction {
        need(r.settings >= 1 && r.n_max + 1 <= p.mode_dim, "reconstruction needs settings ≥ 1 and n_max < mode_dim")?;
        let rho = reduced_density(&s, 0)?;
        let alphas: Vec<C64> =
            (0..r.settings).map(|k| C64::from_polar(r.displacement_radius, 2.0 * PI * k as f64 / r.settings as f64)).collect();
        let data = displaced_populations(&rho, &alphas, r.n_meas);
        let rec = reconstruct_density(&data, r.n_max, r.iterations)?;
        let half = reg.motional_dim();
        let psi: Vec<C64> = s.amplitudes()[half..half + r.n_max + 1].to_vec();
        let fid = density_fidelity(&rec.rho, &psi);
        let mut rt = Table::new("reconstruction", &["row", "col", "re", "im"]);
        for i in 0..rec.rho.nrows() {
            for j in 0..rec.rho.ncols() {
                rt.push(vec![i.to_string(), j.to_string(), f(rec.rho[(i, j)].re), f(rec.rho[(i, j)].im)]);
            }
        }
        out.metric("reconstruction_fidelity", fid);
        out.metric("reconstruction_iterations", rec.iterations);
        out.metric("reconstruction_residual", rec.residual);
        out.checks.push(Check::at_least("reconstruction_fidelity", fid, 0.999, 0.0));
        out.tables.push(rt);
    }
    Ok(out)
}

fn term(reg: &ModeRegister, t: &TermSpec) -> Result<OperatorMatrix> {
    match *t {
        TermSpec::Carrier { rabi_rad_s, phase_rad } => carrier(reg, &DriveParams::new(rabi_rad_s, phase_rad)),
        TermSpec::QubitDetuning { delta_rad_s } => qubit_detuning(reg, delta_rad_s),
        TermSpec::ModeDetuning { mode, delta_rad_s } => mode_detuning(reg, mode, delta_rad_s),
        TermSpec::Sideband { kind, order, mode, rabi_rad_s, phase_rad } => {
            sideband(reg, kind, order, mode, &DriveParams::new(rabi_rad_s, phase_rad))
        }
        TermSpec::SpinDisplacement { alpha_rate_rad_s, phase_rad, axis, mode } => {
            spin_displacement(reg, alpha_rate_rad_s, phase_rad, axis, mode)
        }
        TermSpec::SpinSqueeze { zeta_rad_s, phase_rad, mode } => spin_squeeze(reg, zeta_rad_s, phase_rad, mode),
        TermSpec::ModeRotation { theta_rad_s, phase_rad, i, j } => mode_rotation(reg, theta_rad_s, phase_rad, i, j),
        TermSpec::DipoleExchange { omega_c_rad_s, i, j } => dipole_exchange(reg, omega_c_rad_s, i, j),
        TermSpec::Cbs { xi_rad_s, upsilon_rad, i, j, control } => cbs(reg, xi_rad_s, upsilon_rad, i, j, control),
        TermSpec::DegenerateParametric { xi_rad_s, delta_rad_s, a, b } => degenerate_parametric(reg, xi_rad_s, delta_rad_s, a, b),
        TermSpec::Trilinear { xi_rad_s, delta_rad_s, h, w, c } => trilinear(reg, xi_rad_s, delta_rad_s, h, w, c),
    }
}

fn custom_sequence(p: &CustomParams) -> Result<Outcome> {
    need(!p.segments.is_empty(), "at least one segment is required")?;
    need(p.fock.len() == p.mode_dims.len(), "fock needs one entry per mode")?;
    let etas = p.lamb_dicke.clone().unwrap_or_else(|| vec![0.1; p.mode_dims.len()]);
    need(etas.len() == p.mode_dims.len(), "lamb_dicke needs one entry per mode")?;
    let modes = p.mode_dims.iter().zip(&etas).map(|(&d, &eta)| ModeSpec::new(1.0, eta, d)).collect::<Result<Vec<_>>>()?;
    let reg = ModeRegister::new(QubitSpec::default(), modes)?;
    let mut segs: Vec<PulseSegment> = Vec::new();
    for s in &p.segments {
        match s {
            SegmentSpec::Constant { label, duration_s, terms } => {
                let ops = terms.iter().map(|t| term(&reg, t)).collect::<Result<Vec<_>>>()?;
                let h = OperatorMatrix::sum(&reg, ops.iter())?;
                segs.push(PulseSegment::constant(label, h, *duration_s));
            }
            SegmentSpec::UniformBsb { mode, omega0_rad_s, beta, delta0_rad_s, duration_s, variant } => {
                let sta = StaPulseParams {
                    omega0: *omega0_rad_s,
                    beta: *beta,
                    delta0: *delta0_rad_s,
                    duration: *duration_s,
                    mode: *mode,
                    variant: *variant,
                };
                segs.extend(uniform_bsb(&reg, &sta)?.segments().iter().cloned());
            }
        }
    }
    let seq = PulseSequence::new(segs)?;
    let s0 = HybridState::basis(&reg, p.qubit, &p.fock)?;
    let mut obs = vec![embed(&level_projector(Level::Up), Slot::Qubit, &reg)?];
    for m in 0..reg.num_modes() {
        obs.push(embed(&mode_ladder(reg.mode_dim(m))?.number, Slot::Mode(m), &reg)?);
    }
    let ctl = StepControl::default();
    let (fin, rows) = propagate_pulsed_sampled(&seq, &s0, &ctl, &obs, p.samples_per_segment.max(1))?;
    let mut head = vec!["time_s".to_string(), "p_up".to_string()];
    head.extend((0..reg.num_modes()).map(|m| format!("mean_n_{m}")));
    let head_ref: Vec<&str> = head.iter().map(|s| s.as_str()).collect();
    let mut tab = Table::new("trace", &head_ref);
    for (t, v) in &rows {
        let mut row = vec![f(*t)];
        row.extend(v.iter().map(|x| f(*x)));
        tab.push(row);
    }
    let mut dist = Table::new("final_populations", &["qubit", "fock", "probability"]);
    for (i, a) in fin.amplitudes().iter().enumerate() {
        let pr = a.norm_sqr();
        if pr > 1e-12 {
            let (lvl, ns) = reg.tuple(i);
            let lv = if lvl == Level::Up { "up" } else { "down" };
            let ns: Vec<String> = ns.iter().map(|n| n.to_string()).collect();
            dist.push(vec![lv.into(), ns.join(" "), f(pr)]);
        }
    }
    let mut out = Outcome::default();
    let last = &rows.last().expect("at least the initial row").1;
    out.metric("duration_s", seq.duration());
    out.metric("final_p_up", last[0]);
    out.metric("final_mean_n", last[1..].to_vec());
    out.metric("final_leakage", leakage(&fin));
    out.checks.push(Check::near("final_norm", fin.norm(), 1.0, 1e-9));
    out.tables.push(tab);
    out.tables.push(dist);
    Ok(out)
}
