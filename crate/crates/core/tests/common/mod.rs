//! Brute-force Franck-Condon oracle: Laguerre displacement, disentangled squeeze,
//! polynomial rotation, all on plain f64 arrays.
#![allow(dead_code)]

use ionphonon::protocols::DoktorovParams;

pub fn ln_fact(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

pub fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 + a - x);
    if n == 0 {
        return l0;
    }
    for k in 1..n {
        let l2 = ((2.0 * k as f64 + 1.0 + a - x) * l1 - (k as f64 + a) * l0) / (k as f64 + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

pub fn oracle_displacement(alpha: f64, d: usize) -> Vec<Vec<f64>> {
    let x = alpha * alpha;
    let mut m = vec![vec![0.0; d]; d];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (hi, lo) = (i.max(j), i.min(j));
            let k = hi - lo;
            let pre = (0.5 * (ln_fact(lo) - ln_fact(hi))).exp() * (-x / 2.0).exp();
            let sign = if i >= j { alpha.powi(k as i32) } else { (-alpha).powi(k as i32) };
            *v = pre * sign * laguerre(lo, k as f64, x);
        }
    }
    m
}

pub fn oracle_squeeze(r: f64, d: usize) -> Vec<Vec<f64>> {
    // S(r) = exp(−t/2 a†²) sech(r)^{n+1/2} exp(t/2 a²), t = tanh r
    let t = r.tanh();
    let sech = 1.0 / r.cosh();
    let mut m = vec![vec![0.0; d]; d];
    for (mm, row) in m.iter_mut().enumerate() {
        for (n, v) in row.iter_mut().enumerate() {
            if (mm + n) % 2 == 1 {
                continue;
            }
            let mut acc = 0.0;
            let kmax = mm.min(n);
            let mut k = kmax % 2;
            if (mm - k) % 2 != 0 {
                k += 1;
            }
            while k <= kmax {
                let (i, j) = ((mm - k) / 2, (n - k) / 2);
                let lmag = 0.5 * (ln_fact(mm) - ln_fact(k)) - ln_fact(i) + 0.5 * (ln_fact(n) - ln_fact(k)) - ln_fact(j);
                let val = (lmag + (i + j) as f64 * (t / 2.0).abs().ln()).exp()
                    * if i % 2 == 1 { -1.0 } else { 1.0 }
                    * sech.powf(k as f64 + 0.5);
                acc += if t < 0.0 && (i + j) % 2 == 1 { -val } else { val };
                k += 2;
            }
            *v = acc;
        }
    }
    m
}

pub fn binom(n: usize, k: usize) -> f64 {
    (ln_fact(n) - ln_fact(k) - ln_fact(n - k)).exp()
}

/// R|n1,n2⟩ = (c a† − s b†)^{n1}(c b† + s a†)^{n2}|0⟩/√(n1!n2!)
pub fn oracle_rotation_apply(theta: f64, psi: &[f64], d: usize) -> Vec<f64> {
    let (cth, sth) = (theta.cos(), theta.sin());
    let mut out = vec![0.0; d * d];
    for n1 in 0..d {
        for n2 in 0..d {
            let amp = psi[n1 * d + n2];
            if amp.abs() < 1e-300 {
                continue;
            }
            let norm = -0.5 * (ln_fact(n1) + ln_fact(n2));
            for i in 0..=n1 {
                // i factors of a† from the first bracket
                let c1 = binom(n1, i) * cth.powi(i as i32) * (-sth).powi((n1 - i) as i32);
                for j in 0..=n2 {
                    let c2 = binom(n2, j) * sth.powi(j as i32) * cth.powi((n2 - j) as i32);
                    let (p, q) = (i + j, n1 - i + n2 - j);
                    if p < d && q < d {
                        out[p * d + q] += amp * c1 * c2 * (norm + 0.5 * (ln_fact(p) + ln_fact(q))).exp();
                    }
                }
            }
        }
    }
    out
}

pub fn oracle_fc(p: &DoktorovParams, d: usize) -> Vec<f64> {
    let (z, zp) = p.squeezes();
    let apply = |psi: &[f64], mode: usize, m: &[Vec<f64>]| -> Vec<f64> {
        let mut out = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                let mut acc = 0.0;
                for k in 0..d {
                    acc += if mode == 0 { m[a][k] * psi[k * d + b] } else { m[b][k] * psi[a * d + k] };
                }
                out[a * d + b] = acc;
            }
        }
        out
    };
    let mut psi = vec![0.0; d * d];
    psi[0] = 1.0;
    psi = apply(&psi, 0, &oracle_squeeze(z[0], d));
    psi = apply(&psi, 1, &oracle_squeeze(z[1], d));
    psi = oracle_rotation_apply(p.theta[0], &psi, d);
    psi = apply(&psi, 0, &oracle_squeeze(-zp[0], d));
    psi = apply(&psi, 1, &oracle_squeeze(-zp[1], d));
    psi = apply(&psi, 0, &oracle_displacement(p.alpha[0], d));
    psi = apply(&psi, 1, &oracle_displacement(p.alpha[1], d));
    psi.iter().map(|x| x * x).collect()
}
