//! Hand-built pulse sequence: carrier pi, a sin^2-shaped sideband pi on |up,1>, then an idle.

use std::f64::consts::PI;

use ionphonon::dynamics::*;
use ionphonon::hamiltonians::*;
use ionphonon::hilbert::*;

fn main() -> ionphonon::Result<()> {
    let reg = ModeRegister::with_dims(&[6])?;
    let rabi = 2.0 * PI * 100e3;
    let eta = reg.modes[0].lamb_dicke;
    let t_c = PI / rabi;
    let t_r = PI / (2f64.sqrt() * eta * rabi);
    let red = sideband(&reg, Sideband::Red, 1, 0, &DriveParams::new(1.0, 0.0))?;
    let seq = PulseSequence::new(vec![
        PulseSegment::constant("carrier", carrier(&reg, &DriveParams::new(rabi, 0.0))?, t_c),
        PulseSegment::constant("red", OperatorMatrix::zero(&reg), t_r)
            .with_drive(envelope(move |t| 2.0 * rabi * (PI * t / t_r).sin().powi(2)), red),
        idle(&reg, 10e-6),
    ])?;
    let s = make_state(&StateKind::Fock(vec![1]), &reg, None)?;
    let p_up = embed(&level_projector(Level::Up), Slot::Qubit, &reg)?;
    let n = embed(&mode_ladder(6)?.number, Slot::Mode(0), &reg)?;
    let (out, rows) = propagate_pulsed_sampled(&seq, &s, &StepControl::default(), &[p_up, n], 4)?;
    for (t, v) in &rows {
        println!("t = {:>6.2} us  P_up = {:.5}  <n> = {:.5}", t * 1e6, v[0], v[1]);
    }
    println!("final |down,2> population {:.5}", out.amplitude(Level::Down, &[2])?.norm_sqr());
    Ok(())
}
