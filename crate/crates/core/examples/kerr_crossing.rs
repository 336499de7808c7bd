//! Parametric down-conversion between two modes: avoided crossing and the dispersive Kerr shift.

use ionphonon::hamiltonians::*;

fn main() -> ionphonon::Result<()> {
    let xi = 1.0;
    println!("delta/xi  levels of the {{|0,2>, |1,0>}} manifold");
    for k in -4..=4 {
        let delta = k as f64 * xi;
        let (_, evals, _) = parametric_manifold(xi, delta, 2);
        println!("{:>5.1}  {:?}", delta, evals.iter().map(|e| (e * 1e4).round() / 1e4).collect::<Vec<_>>());
    }
    println!("minimum gap expected at 2*sqrt(2)*xi = {:.4}", 2.0 * 2f64.sqrt() * xi);

    println!("n_b  exact shift  perturbative shift (delta = 20 xi)");
    for n_b in 0..=5 {
        let e = cross_kerr_shift(xi, 20.0 * xi, n_b, KerrMethod::Exact)?;
        let p = cross_kerr_shift(xi, 20.0 * xi, n_b, KerrMethod::Perturbative)?;
        println!("{n_b:>3}  {e:>11.5}  {p:>11.5}");
    }
    Ok(())
}
