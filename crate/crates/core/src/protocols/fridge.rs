//! Three-mode absorption refrigerator driven by the trilinear exchange.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::RngCore;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::squeezed_vacuum_amplitudes;
use crate::hilbert::sample_index;

use super::trajectory_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FridgeConfig {
    /// rad/s
    pub xi_n: f64,
    pub nbar_hot: f64,
    pub nbar_work: f64,
    pub nbar_cold: f64,
    /// Squeezed vacuum on the work mode instead of a thermal state.
    pub work_squeeze: Option<f64>,
    /// s
    pub duration: f64,
    pub steps: usize,
    pub trials: usize,
}

impl FridgeConfig {
    pub fn validate(&self) -> Result<()> {
        if [self.nbar_hot, self.nbar_work, self.nbar_cold].iter().any(|n| !(*n >= 0.0)) {
            return Err(Error::InvalidParameter("occupations must be ≥ 0".into()));
        }
        if !(self.xi_n.is_finite() && self.duration > 0.0) || self.steps < 2 || self.trials == 0 {
            return Err(Error::InvalidParameter("need finite ξ, duration > 0, steps ≥ 2, trials ≥ 1".into()));
        }
        if matches!(self.work_squeeze, Some(r) if !(r >= 0.0 && r < 3.0)) {
            return Err(Error::InvalidParameter("work squeeze must lie in [0, 3)".into()));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.duration * k as f64 / (self.steps - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FridgeSeries {
    pub mean_hot: Vec<f64>,
    pub mean_work: Vec<f64>,
    pub mean_cold: Vec<f64>,
    pub time_average: [f64; 3],
    pub initial: [f64; 3],
    pub min_cold: f64,
    pub t_star: f64,
    pub cools: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FridgeResult {
    pub times: Vec<f64>,
    pub series: FridgeSeries,
    /// Thermal work mode with the squeezed state's mean occupation.
    pub thermal_comparison: Option<FridgeSeries>,
    /// q_h < q_w·q_c with q = n̄/(n̄+1)
    pub refrigeration_condition: bool,
    pub unique_initial_states: usize,
    pub max_norm_error: f64,
}

/// ⟨n_h⟩, ⟨n_w⟩, ⟨n_c⟩ at each time for the Fock start (n_h, n_w, n_c), resonant exchange.
/// The block {(n_h+k, n_w−k, n_c−k)} is closed under the coupling, so no truncation is involved.
pub fn fridge_trajectory(start: (usize, usize, usize), xi: f64, times: &[f64]) -> (Vec<[f64; 3]>, f64) {
    let (h, w, c) = start;
    let up = w.min(c);
    let size = h + up + 1;
    // basis j ↔ n_h = j
    let mut m = DMatrix::<f64>::zeros(size, size);
    for j in 0..size - 1 {
        let (nw, nc) = (w + h - j, c + h - j);
        let v = xi * (((j + 1) * nw * nc) as f64).sqrt();
        m[(j, j + 1)] = v;
        m[(j + 1, j)] = v;
    }
    let eig = SymmetricEigen::new(m);
    let mut norm_err: f64 = 0.0;
    let out = times
        .iter()
        .map(|&t| {
            let mut pop = vec![0.0; size];
            for (j, p) in pop.iter_mut().enumerate() {
                let mut re = 0.0;
                let mut im = 0.0;
                for k in 0..size {
                    let a = eig.eigenvectors[(j, k)] * eig.eigenvectors[(h, k)];
                    let ph = eig.eigenvalues[k] * t;
                    re += a * ph.cos();
                    im -= a * ph.sin();
                }
                *p = re * re + im * im;
            }
            norm_err = norm_err.max((pop.iter().sum::<f64>() - 1.0).abs());
            let mut n = [0.0; 3];
            for (j, p) in pop.iter().enumerate() {
                n[0] += p * j as f64;
                n[1] += p * (w + h - j) as f64;
                n[2] += p * (c + h - j) as f64;
            }
            n
        })
        .collect();
    (out, norm_err)
}

fn geometric(nbar: f64) -> Result<Geometric> {
    Geometric::new(1.0 / (nbar + 1.0)).map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn squeezed_populations(r: f64) -> Vec<f64> {
    let mut dim = 64;
    loop {
        let p: Vec<f64> = squeezed_vacuum_amplitudes(r, dim).iter().map(|a| a.norm_sqr()).collect();
        if 1.0 - p.iter().sum::<f64>() < 1e-13 || dim > 8192 {
            return p;
        }
        dim *= 2;
    }
}

enum WorkDist {
    Thermal(Geometric),
    Table(Vec<f64>),
}

fn run_series(cfg: &FridgeConfig, work: &WorkDist, seed: u64, times: &[f64]) -> Result<(FridgeSeries, usize, f64)> {
    let gh = geometric(cfg.nbar_hot)?;
    let gc = geometric(cfg.nbar_cold)?;
    let starts: Vec<(usize, usize, usize)> = (0..cfg.trials)
        .map(|i| {
            let mut rng = trajectory_rng(seed, i as u64);
            let r: &mut dyn RngCore = &mut rng;
            let h = gh.sample(r) as usize;
            let w = match work {
                WorkDist::Thermal(g) => g.sample(r) as usize,
                WorkDist::Table(p) => sample_index(p, r),
            };
            let c = gc.sample(r) as usize;
            (h, w, c)
        })
        .collect();
    let mut counts: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    for s in &starts {
        *counts.entry(*s).or_default() += 1;
    }
    let keys: Vec<_> = counts.keys().copied().collect();
    let traj: Vec<(Vec<[f64; 3]>, f64)> = keys.par_iter().map(|&k| fridge_trajectory(k, cfg.xi_n, times)).collect();
    let nt = times.len();
    let mut mean = vec![[0.0; 3]; nt];
    let mut norm_err: f64 = 0.0;
    for ((_, &cnt), (series, err)) in counts.iter().zip(&traj) {
        norm_err = norm_err.max(*err);
        for (acc, v) in mean.iter_mut().zip(series) {
            for q in 0..3 {
                acc[q] += cnt as f64 * v[q];
            }
        }
    }
    let nf = cfg.trials as f64;
    mean.iter_mut().for_each(|v| v.iter_mut().for_each(|x| *x /= nf));
    let col = |q: usize| mean.iter().map(|v| v[q]).collect::<Vec<f64>>();
    let (mh, mw, mc) = (col(0), col(1), col(2));
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (imin, min_cold) = mc.iter().enumerate().fold((0, f64::INFINITY), |a, (i, &v)| if v < a.1 { (i, v) } else { a });
    let initial = mean[0];
    let time_average = [avg(&mh), avg(&mw), avg(&mc)];
    let series = FridgeSeries {
        cools: time_average[2] < initial[2],
        time_average,
        initial,
        min_cold,
        t_star: times[imin],
        mean_hot: mh,
        mean_work: mw,
        mean_cold: mc,
    };
    Ok((series, keys.len(), norm_err))
}

pub fn fridge_run(cfg: &FridgeConfig, seed: u64) -> Result<FridgeResult> {
    cfg.validate()?;
    let times = cfg.times();
    let q = |n: f64| n / (n + 1.0);
    let (work, comparison, nbar_w) = match cfg.work_squeeze {
        None => (WorkDist::Thermal(geometric(cfg.nbar_work)?), None, cfg.nbar_work),
        Some(r) => {
            let nb = r.sinh().powi(2);
            (WorkDist::Table(squeezed_populations(r)), Some(WorkDist::Thermal(geometric(nb)?)), nb)
        }
    };
    let (series, unique, err) = run_series(cfg, &work, seed, &times)?;
    let thermal_comparison = match comparison {
        Some(w) => Some(run_series(cfg, &w, seed, &times)?.0),
        None => None,
    };
    Ok(FridgeResult {
        times,
        series,
        thermal_comparison,
        refrigeration_condition: q(cfg.nbar_hot) < q(nbar_w) * q(cfg.nbar_cold),
        unique_initial_states: unique,
        max_norm_error: err,
    })
}
