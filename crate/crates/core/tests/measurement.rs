use std::f64::consts::PI;

use ionphonon::dynamics::StaPulseParams;
use ionphonon::hamiltonians::coherent_amplitudes;
use ionphonon::hilbert::*;
use ionphonon::linalg::C64;
use ionphonon::measurement::*;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reg(d: &[usize]) -> ModeRegister {
    ModeRegister::with_dims(d).unwrap()
}

fn times(n: usize, rabi: f64) -> Vec<f64> {
    let tmax = 6.0 * PI / rabi;
    (1..=n).map(|k| k as f64 * tmax / n as f64).collect()
}

#[test]
fn readout_collapses_and_flags_heating() {
    let r = reg(&[4]);
    let h = C64::new(0.5f64.sqrt(), 0.0);
    let s = HybridState::product(&r, [h, h], &[vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bright = 0;
    for _ in 0..2000 {
        let o = qubit_readout(&s, &mut rng, 1.0).unwrap();
        let up = qubit_populations(&o.state)[0];
        assert!(o.bright == (up > 0.99) && o.motion_destroyed == o.bright);
        bright += o.bright as usize;
    }
    assert!((bright as f64 / 2000.0 - 0.5).abs() < 0.05);
}

#[test]
fn noiseless_inversion_round_trip() {
    let pops = [0.3, 0.25, 0.2, 0.1, 0.08, 0.05, 0.02];
    let rabi = 2.0 * PI * 10e3;
    let ts = times(60, rabi);
    let model = SignalModel::default();
    let curve = bsb_signal(&pops, &ts, rabi, &model).unwrap();
    let est = invert_populations(&curve, &ts, rabi, &model, pops.len() - 1).unwrap();
    let err = pops.iter().zip(&est).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6, "max error {err}");
}

#[test]
fn inversion_with_decay_and_contrast() {
    let pops = [0.5, 0.3, 0.2];
    let rabi = 1.0;
    let ts = times(40, rabi);
    let model = SignalModel { gamma0: 0.05, gamma_exponent: 0.7, contrast: 0.97 };
    let curve = bsb_signal(&pops, &ts, rabi, &model).unwrap();
    let est = invert_populations(&curve, &ts, rabi, &model, 4).unwrap();
    assert!((est[0] - 0.5).abs() < 1e-6 && est[3].abs() < 1e-6);
}

#[test]
fn shot_noise_inversion_error_quantile() {
    let pops = [0.4, 0.3, 0.15, 0.1, 0.05];
    let rabi = 1.0;
    let ts = times(50, rabi);
    let model = SignalModel::default();
    let curve = bsb_signal(&pops, &ts, rabi, &model).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut errs: Vec<f64> = (0..200)
        .map(|_| {
            let noisy = sample_signal(&curve, 10_000, &mut rng).unwrap();
            let est = invert_populations(&noisy, &ts, rabi, &model, 4).unwrap();
            pops.iter().zip(&est).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .collect();
    errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!(errs[189] < 0.03, "95th percentile {}", errs[189]);
}

#[test]
fn inversion_too_few_times_is_ill_conditioned() {
    let ts = times(5, 1.0);
    let curve = vec![0.2; 5];
    let r = invert_populations(&curve, &ts, 1.0, &SignalModel::default(), 5);
    assert!(matches!(r, Err(ionphonon::Error::IllConditioned(_))));
}

#[test]
fn nnls_matches_unconstrained_when_interior() {
    let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, -1.0]);
    let x0 = DVector::from_vec(vec![0.3, 0.7]);
    let b = &a * &x0;
    let x = nnls(&a, &b);
    assert!((x - x0).norm() < 1e-12);
    // negative unconstrained optimum is clipped
    let b = DVector::from_vec(vec![-1.0, 1.0, 0.0, -3.0]);
    let x = nnls(&a, &b);
    assert!(x.iter().all(|v| *v >= 0.0));
}

#[test]
fn projective_readout_fock_and_superposition() {
    let r = reg(&[8, 3]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 0..5 {
        let s = make_state(&StateKind::Fock(vec![n, 0]), &r, None).unwrap();
        let (rec, out) = projective_phonon_readout(&s, 0, &mut rng, 10, &PulseModel::Ideal, 1).unwrap();
        assert_eq!(rec.phonon_counts, vec![n]);
        assert_eq!(rec.repetitions_used, n + 1);
        assert!((fidelity(&out, &s).unwrap() - 1.0).abs() < 1e-12);
    }
    let mut amps = vec![vec![C64::new(0.0, 0.0); 8], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]];
    amps[0][1] = C64::new(0.6, 0.0);
    amps[0][3] = C64::new(0.0, 0.8);
    let s = HybridState::product(&r, [C64::new(0.0, 0.0), C64::new(1.0, 0.0)], &amps).unwrap();
    let mut hist = [0usize; 8];
    for _ in 0..4000 {
        let (rec, out) = projective_phonon_readout(&s, 0, &mut rng, 10, &PulseModel::Ideal, 1).unwrap();
        hist[rec.phonon_counts[0]] += 1;
        assert!((phonon_distribution(&out, 0).unwrap()[rec.phonon_counts[0]] - 1.0).abs() < 1e-12);
    }
    assert!((hist[1] as f64 / 4000.0 - 0.36).abs() < 0.03);
    assert_eq!(hist[1] + hist[3], 4000);
}

#[test]
fn projective_readout_errors() {
    let r = reg(&[6]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = make_state(&StateKind::Fock(vec![3]), &r, None).unwrap();
    assert!(matches!(
        projective_phonon_readout(&s, 0, &mut rng, 2, &PulseModel::Ideal, 0),
        Err(ionphonon::Error::MaxRepetitions(2))
    ));
    assert!(projective_phonon_readout(&s, 1, &mut rng, 5, &PulseModel::Ideal, 0).is_err());
}

#[test]
fn simulated_cycle_bright_probability_is_ground_population() {
    let r = reg(&[12]);
    let alpha = C64::new(0.7, 0.0);
    let s = make_state(&StateKind::Coherent(vec![alpha]), &r, None).unwrap();
    let model = PulseModel::Simulated { carrier_rabi: 2.0 * PI * 200e3, sta: StaPulseParams::reference(0) };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let shots = 400;
    let bright = (0..shots).filter(|_| readout_cycle(&s, 0, &model, &mut rng, 1.0).unwrap().bright).count();
    let expect = (-alpha.norm_sqr()).exp();
    let se = (expect * (1.0 - expect) / shots as f64).sqrt();
    assert!((bright as f64 / shots as f64 - expect).abs() < 4.0 * se + 0.01);
}

#[test]
fn q_function_of_coherent_state() {
    let r = reg(&[40]);
    let beta = C64::new(1.0, -0.5);
    let s = make_state(&StateKind::Coherent(vec![beta]), &r, None).unwrap();
    let grid = square_grid(2.0, 9);
    let q = q_function(&s, 0, &grid).unwrap();
    for (a, v) in grid.iter().zip(&q.values) {
        let exact = (-(a - beta).norm_sqr()).exp() / PI;
        assert!((v - exact).abs() < 1e-6);
    }
}

#[test]
fn q_function_edge_leakage() {
    let r = reg(&[6]);
    let s = make_state(&StateKind::Vacuum, &r, None).unwrap();
    assert!(matches!(q_function(&s, 0, &[C64::new(3.0, 0.0)]), Err(ionphonon::Error::Leakage { .. })));
}

#[test]
fn wigner_routes_agree_and_match_fock_one() {
    let r = reg(&[6]);
    let s = make_state(&StateKind::Fock(vec![1]), &r, None).unwrap();
    let grid = square_grid(1.5, 5);
    let a = wigner(&s, 0, &grid, WignerMethod::Parity, 24).unwrap();
    let b = wigner(&s, 0, &grid, WignerMethod::CbsParity, 24).unwrap();
    for ((p, x), y) in grid.iter().zip(&a.values).zip(&b.values) {
        assert!((x - y).abs() < 1e-9);
        let r2 = p.norm_sqr();
        let exact = -2.0 / PI * (1.0 - 4.0 * r2) * (-2.0 * r2).exp();
        assert!((x - exact).abs() < 1e-8, "{p} {x} {exact}");
    }
    assert!((a.values[12] + 2.0 / PI).abs() < 1e-10);
}

#[test]
fn wigner_of_mixed_reduced_state() {
    let r = reg(&[5, 5]);
    let h = C64::new(0.5f64.sqrt(), 0.0);
    let z = C64::new(0.0, 0.0);
    let mut amps = vec![z; r.total_dim()];
    amps[r.index(Level::Down, &[0, 0]).unwrap()] = h;
    amps[r.index(Level::Down, &[1, 1]).unwrap()] = h;
    let s = HybridState::from_amplitudes(&r, amps).unwrap();
    let w = wigner(&s, 0, &[C64::new(0.0, 0.0)], WignerMethod::CbsParity, 20).unwrap();
    assert!(w.values[0].abs() < 1e-10);
}

#[test]
fn maxlik_recovers_fock_and_cat() {
    let alphas: Vec<C64> = (0..8).map(|k| C64::from_polar(0.8, 2.0 * PI * k as f64 / 8.0)).collect();
    // Fock 1
    let mut rho = DMatrix::<C64>::zeros(6, 6);
    rho[(1, 1)] = C64::new(1.0, 0.0);
    let data = displaced_populations(&rho, &alphas, 8);
    let rec = reconstruct_density(&data, 5, 20_000).unwrap();
    let mut psi = vec![C64::new(0.0, 0.0); 6];
    psi[1] = C64::new(1.0, 0.0);
    let f = density_fidelity(&rec.rho, &psi);
    assert!(f > 0.999, "fidelity {f}");
    // superposition of 0 and 2
    let mut psi = vec![C64::new(0.0, 0.0); 6];
    psi[0] = C64::new(0.6, 0.0);
    psi[2] = C64::new(0.0, 0.8);
    let v = DVector::from_vec(psi.clone());
    let rho = &v * v.adjoint();
    let data = displaced_populations(&rho, &alphas, 8);
    let rec = reconstruct_density(&data, 5, 20_000).unwrap();
    assert!(density_fidelity(&rec.rho, &psi) > 0.999);
    assert!((rec.rho.trace().re - 1.0).abs() < 1e-12);
}

#[test]
fn maxlik_zero_iterations_and_too_few_settings() {
    let alphas: Vec<C64> = (0..8).map(|k| C64::from_polar(0.8, k as f64)).collect();
    let rho = DMatrix::<C64>::identity(3, 3) / C64::new(3.0, 0.0);
    let data = displaced_populations(&rho, &alphas, 5);
    let rec = reconstruct_density(&data, 3, 0).unwrap();
    assert!((rec.rho[(2, 2)].re - 0.25).abs() < 1e-15);
    assert!(reconstruct_density(&data[..4], 3, 10).is_err());
}

#[test]
fn coherent_amplitudes_normalized() {
    let c = coherent_amplitudes(C64::new(1.0, 1.0), 40);
    let n: f64 = c.iter().map(|x| x.norm_sqr()).sum();
    assert!((n - 1.0).abs() < 1e-12);
}
