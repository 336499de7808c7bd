//! Finite-energy GKP grid states: quadrature marginals and logical expectation values.

use ionphonon::protocols::gkp::marginal_peaks;
use ionphonon::protocols::*;

fn main() -> ionphonon::Result<()> {
    let p = GkpParams::default();
    let s = gkp_prepare(&p)?;
    let grid: Vec<f64> = (0..=1600).map(|k| -8.0 + 0.01 * k as f64).collect();
    let x = gkp_marginal(&s, 0, Quadrature::Position, &grid)?;
    println!("position peaks {:?}", marginal_peaks(&grid, &x, 0.05));
    println!("stabilizer anticommutator norm {:.1e}", gkp_anticommutator_norm(p.spacing, 40, 160));
    for r in [0.5, 0.7, 0.9, 1.1] {
        let st = gkp_prepare(&GkpParams { squeeze: r, ..p })?;
        let z = gkp_logical_expect(&st, 0, p.spacing, LogicalOp::Z)?;
        println!("r = {r}: <Z_L> = {:.4}", z.re);
    }
    Ok(())
}
