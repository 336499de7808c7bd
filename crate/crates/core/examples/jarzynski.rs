//! Work statistics of a linearly dragged ion trap and the Jarzynski estimator.

use std::f64::consts::PI;

use ionphonon::hamiltonians::YB171_MASS;
use ionphonon::protocols::*;

fn main() -> ionphonon::Result<()> {
    for t_nk in [316.0, 390.0, 480.0] {
        let p = ThermoParams::from_free_energy(YB171_MASS, 2.0 * PI * 10e3, 831e-9, t_nk * 1e-9, 20_000, 64);
        for tau_us in [5.0, 25.0, 45.0] {
            let r = jarzynski_run(&p, &RampProtocol::Linear { duration: tau_us * 1e-6 }, 7)?;
            println!(
                "T = {t_nk} nK, tau = {tau_us} us: beta dF = {:.3}, <beta W> = {:.3}, -ln<e^-b(W-dF)> = {:+.4} +/- {:.4}",
                r.beta_delta_f,
                r.beta * r.mean_work,
                r.minus_ln_diss,
                r.standard_error
            );
        }
    }
    Ok(())
}
