//! Add one phonon to a superposition, then remove it again heralded by the qubit.

use ionphonon::hilbert::*;
use ionphonon::linalg::C64;
use ionphonon::protocols::{phonon_add, phonon_subtract, subtract_success_probability};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ionphonon::Result<()> {
    let reg = ModeRegister::with_dims(&[10])?;
    let c = [C64::new(0.6, 0.0), C64::new(0.0, 0.48), C64::new(0.64, 0.0)];
    let mut amps = vec![C64::new(0.0, 0.0); 10];
    amps[..3].copy_from_slice(&c);
    let s = make_state(&StateKind::Amplitudes(amps), &reg, None)?;

    let up = phonon_add(&s, 0)?;
    println!("after adding: {:?}", phonon_distribution(&up, 0)?.iter().take(5).map(|p| format!("{p:.4}")).collect::<Vec<_>>());

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    println!("heralding probability {:.4}", subtract_success_probability(&up, 0)?);
    let (back, ok) = phonon_subtract(&up, 0, &mut rng)?;
    println!("heralded {ok}, fidelity with the input {:.12}", fidelity(&back, &s)?);
    Ok(())
}
