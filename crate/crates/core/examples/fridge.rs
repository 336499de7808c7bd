//! Three-mode absorption refrigerator: the cold mode's occupation drops on average.

use std::f64::consts::PI;

use ionphonon::hamiltonians::*;
use ionphonon::protocols::{fridge_run, FridgeConfig};

fn main() -> ionphonon::Result<()> {
    let wz = 2.0 * PI * 587e3;
    let g = TrapGeometry { ion_mass: YB171_MASS, ion_charge: ELEMENTARY_CHARGE, secular_freqs: [wz / 0.556, wz / 0.556 * 1.05, wz], ions: 3 };
    let xi = coupling_xi_n(&g)?;
    println!("three-ion Yb+ trilinear coupling: xi/2pi = {:.0} Hz", xi / (2.0 * PI));

    let cfg = FridgeConfig {
        xi_n: xi,
        nbar_hot: 0.2,
        nbar_work: 2.0,
        nbar_cold: 1.0,
        work_squeeze: Some(1.0),
        duration: 5e-3,
        steps: 201,
        trials: 2000,
    };
    let r = fridge_run(&cfg, 9)?;
    let s = &r.series;
    println!("cold mode: initial {:.4}, time average {:.4}, minimum {:.4} at {:.2} ms", s.initial[2], s.time_average[2], s.min_cold, s.t_star * 1e3);
    if let Some(t) = &r.thermal_comparison {
        println!("thermal work mode of equal mean occupation: time average {:.4}", t.time_average[2]);
    }
    Ok(())
}
