//! Two ways to count phonons: repeated readout cycles and sideband-signal inversion.

use ionphonon::hilbert::*;
use ionphonon::measurement::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ionphonon::Result<()> {
    let reg = ModeRegister::with_dims(&[8])?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [0, 1, 3] {
        let s = make_state(&StateKind::Fock(vec![n]), &reg, None)?;
        let (rec, _) = projective_phonon_readout(&s, 0, &mut rng, 10, &PulseModel::Ideal, 11)?;
        println!("Fock {n}: counted {:?} after {} cycles", rec.phonon_counts, rec.repetitions_used);
    }

    let pops = [0.5, 0.3, 0.15, 0.05];
    let times: Vec<f64> = (1..=40).map(|k| 0.25 * k as f64).collect();
    let model = SignalModel::default();
    let curve = bsb_signal(&pops, &times, 1.0, &model)?;
    let noisy = sample_signal(&curve, 10_000, &mut rng)?;
    let est = invert_populations(&noisy, &times, 1.0, &model, 3)?;
    println!("true {pops:?}");
    println!("estimate {:?}", est.iter().map(|p| (p * 1e3).round() / 1e3).collect::<Vec<_>>());
    Ok(())
}
