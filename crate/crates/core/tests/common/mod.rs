// Independent reference implementations used by the integration tests.
// Nothing here calls into the library's numeric kernels.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian(r: &mut ChaCha20Rng) -> f64 {
    let u1: f64 = r.random::<f64>().max(1e-300);
    let u2: f64 = r.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// AR(p) process `x[n] = sum a[i] x[n-1-i] + s * w[n]`; returns (x, innovations).
pub fn ar_process(a: &[f64], n: usize, s: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for t in 0..n {
        w[t] = s * gaussian(&mut r);
        let mut v = w[t];
        for (i, ai) in a.iter().enumerate() {
            if t > i {
                v += ai * x[t - 1 - i];
            }
        }
        x[t] = v;
    }
    (x, w)
}

pub fn naive_acf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let mut r = vec![0.0; max_lag + 1];
    for (lag, slot) in r.iter_mut().enumerate() {
        for n in lag..x.len() {
            *slot += x[n] * x[n - lag];
        }
    }
    r
}

/// Solves `T a = r[1..=p]` with `T[i][j] = r[|i-j|]` by Gaussian elimination
/// with partial pivoting.
pub fn toeplitz_solve(r: &[f64], p: usize) -> Vec<f64> {
    let mut m: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            let mut row: Vec<f64> = (0..p).map(|j| r[i.abs_diff(j)]).collect();
            row.push(r[i + 1]);
            row
        })
        .collect();
    for col in 0..p {
        let piv = (col..p)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for row in col + 1..p {
            let f = m[row][col] / m[col][col];
            for k in col..=p {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut a = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = m[i][p];
        for j in i + 1..p {
            s -= m[i][j] * a[j];
        }
        a[i] = s / m[i][i];
    }
    a
}

/// Exact autocorrelation of a stationary AR(2) process with unit
/// innovation variance, from the Yule-Walker recursion.
pub fn ar2_acf(a1: f64, a2: f64, max_lag: usize) -> Vec<f64> {
    let rho1 = a1 / (1.0 - a2);
    let r0 = 1.0 / (1.0 - a1 * rho1 - a2 * (a1 * rho1 + a2));
    let mut r = vec![r0, rho1 * r0];
    while r.len() <= max_lag {
        let n = r.len();
        r.push(a1 * r[n - 1] + a2 * r[n - 2]);
    }
    r.truncate(max_lag + 1);
    r
}

/// 10-2-1 forward pass written out scalar by scalar.
pub fn naive_forward(w: &[f64; 25], x: &[f64]) -> f64 {
    let mut h = [0.0; 2];
    for j in 0..2 {
        let mut s = w[20 + j];
        for i in 0..10 {
            s += w[j * 10 + i] * x[i];
        }
        h[j] = s.tanh();
    }
    w[22] * h[0] + w[23] * h[1] + w[24]
}

pub fn naive_mse(e: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in e {
        s += v * v;
    }
    s / e.len() as f64
}

pub fn naive_median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Per-frame SNR in dB computed directly from the definition.
pub fn naive_frame_snr(x: &[f64], y: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in x.iter().zip(y) {
        num += a * a;
        den += (a - b) * (a - b);
    }
    10.0 * (num / den).log10()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

// double-double helpers (error-free transforms)

pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

pub fn dd_add(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    let (s, e) = two_sum(x.0, y.0);
    let e = e + x.1 + y.1;
    two_sum(s, e)
}

pub fn dd_mul(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    let (p, e) = two_prod(x.0, y.0);
    let e = e + x.0 * y.1 + x.1 * y.0;
    two_sum(p, e)
}

pub fn dd_div_f64(x: (f64, f64), d: f64) -> (f64, f64) {
    let q1 = x.0 / d;
    let (p, pe) = two_prod(q1, d);
    let r = ((x.0 - p) - pe + x.1) / d;
    two_sum(q1, r)
}

/// `gamma * mean(e^2) + (1 - gamma) * mean(w^2)` in double-double, rounded
/// once at the end.
pub fn msereg_dd(e: &[f64], w: &[f64], gamma: f64) -> f64 {
    let mut se = (0.0, 0.0);
    for v in e {
        se = dd_add(se, two_prod(*v, *v));
    }
    let mut sw = (0.0, 0.0);
    for v in w {
        sw = dd_add(sw, two_prod(*v, *v));
    }
    let g = (gamma, 0.0);
    let one_minus = two_sum(1.0, -gamma);
    let a = dd_mul(g, dd_div_f64(se, e.len() as f64));
    let b = dd_mul(one_minus, dd_div_f64(sw, w.len() as f64));
    let r = dd_add(a, b);
    r.0 + r.1
}

/// Units in the last place between two doubles of the same sign.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

pub fn random_unit_vec(r: &mut ChaCha20Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * (2.0 * r.random::<f64>() - 1.0)).collect()
}

/// Central difference of `e = target - y(w)` with the scalar oracle.
pub fn fd_row(w: &[f64; 25], x: &[f64], target: f64, h: f64) -> [f64; 25] {
    let mut row = [0.0; 25];
    for (j, slot) in row.iter_mut().enumerate() {
        let mut plus = *w;
        let mut minus = *w;
        plus[j] += h;
        minus[j] -= h;
        let ep = target - naive_forward(&plus, x);
        let em = target - naive_forward(&minus, x);
        *slot = (ep - em) / (2.0 * h);
    }
    row
}

/// Least-squares mse of the order-`p` autocorrelation-method LPC predictor
/// on the 10-sample-history pairs of `frame` (the linear baseline).
pub fn lpc_pair_mse(frame: &[f64], a: &[f64]) -> f64 {
    let mut e = Vec::new();
    for n in 10..frame.len() {
        let mut p = 0.0;
        for (i, ai) in a.iter().enumerate() {
            p += ai * frame[n - 1 - i];
        }
        e.push(frame[n] - p);
    }
    naive_mse(&e)
}
