//! Controlled beam splitter as a Fredkin gate: qubit control, single-phonon targets.

use ionphonon::hilbert::ModeRegister;
use ionphonon::protocols::fredkin::fredkin_expected;
use ionphonon::protocols::fredkin_truth_table;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ionphonon::Result<()> {
    let reg = ModeRegister::with_dims(&[5, 5])?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let exact = fredkin_truth_table(&reg, 2.0 * std::f64::consts::PI * 1e3, None, &mut rng)?;
    let sampled = fredkin_truth_table(&reg, 2.0 * std::f64::consts::PI * 1e3, Some(1000), &mut rng)?;
    println!("in  -> out  P_exact  P_1000shots");
    for i in 0..8 {
        let o = fredkin_expected(i);
        println!("{i:03b} -> {o:03b}  {:.6}  {:.3}", exact.probabilities[i][o], sampled.probabilities[i][o]);
    }
    Ok(())
}
