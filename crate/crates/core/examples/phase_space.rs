//! Q function and Wigner function of a cat state, then maximum-likelihood state reconstruction.

use ionphonon::hamiltonians::coherent_amplitudes;
use ionphonon::hilbert::*;
use ionphonon::linalg::C64;
use ionphonon::measurement::*;

fn main() -> ionphonon::Result<()> {
    let dim = 30;
    let reg = ModeRegister::with_dims(&[dim])?;
    let alpha = C64::new(1.5, 0.0);
    let (p, m) = (coherent_amplitudes(alpha, dim), coherent_amplitudes(-alpha, dim));
    let mut cat: Vec<C64> = p.iter().zip(&m).map(|(a, b)| a + b).collect();
    let norm = cat.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    cat.iter_mut().for_each(|c| *c /= norm);
    let s = make_state(&StateKind::Amplitudes(cat), &reg, None)?;

    let q_grid = square_grid(2.0, 9);
    let q = q_function(&s, 0, &q_grid)?;
    let grid = square_grid(2.5, 11);
    let w = wigner(&s, 0, &grid, WignerMethod::CbsParity, 20)?;
    let at_origin = |g: &[C64], v: &[f64]| v[g.iter().position(|a| a.norm() < 1e-12).unwrap()];
    println!("at the origin Q = {:.4}, W = {:.4}", at_origin(&q_grid, &q.values), at_origin(&grid, &w.values));
    println!("min W over the grid {:.4}", w.values.iter().cloned().fold(f64::INFINITY, f64::min));

    let rho = reduced_density(&s, 0)?;
    let settings: Vec<C64> = (0..16).map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 16.0)).collect();
    let data = displaced_populations(&rho, &settings, 16);
    let rec = reconstruct_density(&data, 12, 20000)?;
    println!("reconstruction fidelity {:.5} after {} iterations", density_fidelity(&rec.rho, &s.amplitudes()[dim..dim + 13]), rec.iterations);
    Ok(())
}
