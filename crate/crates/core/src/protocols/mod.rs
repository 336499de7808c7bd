//! Application experiments built on the lower layers.

pub mod arithmetic;
pub mod fredkin;
pub mod fridge;
pub mod gkp;
pub mod jarzynski;
pub mod noon;
pub mod vibronic;

pub use arithmetic::{phonon_add, phonon_add_pulsed, phonon_subtract, subtract_success_probability};
pub use fredkin::{fredkin_truth_table, FredkinTable};
pub use fridge::{fridge_run, FridgeConfig, FridgeResult};
pub use gkp::{gkp_anticommutator_norm, gkp_logical_expect, gkp_marginal, gkp_prepare, GkpParams, LogicalOp, Quadrature};
pub use jarzynski::{jarzynski_run, JarzynskiResult, RampProtocol, ThermoParams};
pub use noon::{fit_fringe, half_difference_number, noon_parity_fringe, noon_prepare, qfi, FringeFit, NoonFringe};
pub use vibronic::{doktorov_build, vibronic_fc, vibronic_sample, vibronic_spectrum, DoktorovParams, FcTable, Spectrum};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

/// Independent stream `index` derived from a master seed.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Multinomial counts from conditional binomials; `weights` need not be normalized.
pub fn multinomial(n: u64, weights: &[f64], rng: &mut dyn RngCore) -> Result<Vec<u64>> {
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidParameter("weights must be nonnegative".into()));
    }
    let mut rest: f64 = weights.iter().sum();
    let mut left = n;
    let mut out = Vec::with_capacity(weights.len());
    for &w in weights {
        let k = if left == 0 || rest <= 0.0 {
            0
        } else {
            let p = (w / rest).clamp(0.0, 1.0);
            Binomial::new(left, p).map_err(|e| Error::InvalidParameter(e.to_string()))?.sample(rng)
        };
        out.push(k);
        left -= k;
        rest -= w;
    }
    Ok(out)
}
