//! Number-independent blue-sideband transfer with the chirped, shaped pulse.

use ionphonon::dynamics::*;
use ionphonon::hilbert::*;

fn main() -> ionphonon::Result<()> {
    let reg = ModeRegister::with_dims(&[12])?;
    let p = StaPulseParams::reference(0);
    let seq = uniform_bsb(&reg, &p)?;
    println!("duration {:.1} us ({:.1} x the n=0 pi time)", p.duration * 1e6, p.duration / p.pi_time());
    for n in 0..=5 {
        let s = make_state(&StateKind::Fock(vec![n]), &reg, None)?;
        let out = propagate_pulsed(&seq, &s, &StepControl::default())?;
        println!("|down,{n}> -> |up,{}>: {:.5}", n + 1, transfer_probability(&out, &reg, n, 0)?);
    }
    Ok(())
}
