//! NOON states of two modes: parity fringes oscillate N times faster and QFI reaches N^2.

use std::f64::consts::PI;

use ionphonon::hilbert::ModeRegister;
use ionphonon::protocols::*;

fn main() -> ionphonon::Result<()> {
    let phis: Vec<f64> = (0..128).map(|k| 2.0 * PI * k as f64 / 128.0).collect();
    for n in 1..=6 {
        let reg = ModeRegister::with_dims(&[n + 4, n + 4])?;
        let s = noon_prepare(&reg, n, 0.0)?;
        let f = noon_parity_fringe(&s, &phis, 8.0)?;
        let q = qfi(&s, &half_difference_number(&reg, 0, 1)?)?;
        println!("N = {n}: fringe frequency {:.6}, contrast {:.6}, QFI {:.6}", f.fit.k, f.fit.contrast, q);
    }
    Ok(())
}
