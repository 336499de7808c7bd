//! Blue-sideband Rabi flopping from several Fock states; the rate grows as sqrt(n+1).

use std::f64::consts::PI;

use ionphonon::dynamics::propagate_static;
use ionphonon::hamiltonians::{sideband, DriveParams, Sideband};
use ionphonon::hilbert::*;

fn main() -> ionphonon::Result<()> {
    let reg = ModeRegister::with_dims(&[10])?;
    let rabi = 2.0 * PI * 50e3;
    let eta = reg.modes[0].lamb_dicke;
    let h = sideband(&reg, Sideband::Blue, 1, 0, &DriveParams::new(rabi, 0.0))?;
    for n in 0..=5 {
        let s = make_state(&StateKind::Fock(vec![n]), &reg, None)?;
        let t_pi = PI / (((n + 1) as f64).sqrt() * eta * rabi);
        let out = propagate_static(&h, t_pi, &s)?;
        println!("n = {n}: t_pi = {:.2} us, P_up = {:.6}", t_pi * 1e6, qubit_populations(&out)[0]);
    }
    Ok(())
}
