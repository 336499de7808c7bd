//! Franck-Condon factors of SO2 photoionization from a Doktorov transformation, plus sampled spectra.

use ionphonon::protocols::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ionphonon::Result<()> {
    for (name, p) in [("cation", DoktorovParams::so2_cation()), ("anion", DoktorovParams::so2_anion())] {
        let fc = vibronic_fc(&p, 29)?;
        println!("{name}: total {:.6}, mode-1 progression {:.3}, mode-2 progression {:.3}, combinations {:.3}",
            fc.total_mass, fc.progression_mass(0), fc.progression_mass(1), fc.combination_mass());
        let spec = vibronic_spectrum(&fc, &[1112.7, 415.0], 50.0, 5.0, 1e-3)?;
        for st in spec.sticks.iter().take(6) {
            println!("  {:?} at {:.1} cm^-1: {:.4}", st.levels, st.position, st.intensity);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let counts = vibronic_sample(&fc, &mut rng, 10_000)?;
        let top = counts.iter().enumerate().max_by_key(|(_, c)| **c).unwrap();
        println!("  most frequent sample {:?} ({} of 10000)", fc.levels(top.0), top.1);
    }
    Ok(())
}
