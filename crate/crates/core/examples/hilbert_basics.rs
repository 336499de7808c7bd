//! Build a qubit plus two modes, embed ladder operators and inspect a product state.

use ionphonon::hilbert::*;
use ionphonon::linalg::C64;

fn main() -> ionphonon::Result<()> {
    let reg = ModeRegister::with_dims(&[12, 3])?;
    println!("dims {:?}, total {}", reg.dims(), reg.total_dim());

    let i = reg.index(Level::Up, &[2, 1])?;
    println!("|up,2,1> sits at index {i} and maps back to {:?}", reg.tuple(i));

    let l = mode_ladder(12)?;
    let a0 = embed(&l.lower, Slot::Mode(0), &reg)?;
    let n0 = embed(&l.number, Slot::Mode(0), &reg)?;
    let n_check = a0.adjoint().mul(&a0)?.sub(&n0)?;
    println!("|a+a - n| = {:.1e}, [a, n] norm {:.3}", n_check.commutator_norm(&OperatorMatrix::identity(&reg))?, a0.commutator_norm(&n0)?);

    let s = make_state(&StateKind::Coherent(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.0)]), &reg, None)?;
    println!("<n0> = {:.4}, leakage {:.2e}", expectation(&s, &n0)?.re, leakage(&s));
    println!("P(n) mode 0: {:?}", phonon_distribution(&s, 0)?.iter().map(|p| format!("{p:.4}")).collect::<Vec<_>>());
    Ok(())
}
