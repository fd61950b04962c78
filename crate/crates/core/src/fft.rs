//! Complex DFT: iterative radix-2 for powers of two, Bluestein otherwise.
//!
//! `forward` computes `X_k = Σ_j x_j e^{-2πi jk/n}`, `backward` the same with
//! `e^{+2πi jk/n}`. Neither normalizes.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math::cis_turns;

pub fn forward(data: &mut [Complex64]) {
    transform(data, -1.0);
}

pub fn backward(data: &mut [Complex64]) {
    transform(data, 1.0);
}

fn transform(data: &mut [Complex64], sign: f64) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        radix2(data, sign);
    } else {
        bluestein(data, sign);
    }
}

/// `e^{sign·2πi k/n}` for `k < n/2`, each computed directly.
fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n / 2)
        .map(|k| {
            let (c, s) = cis_turns(k as f64 / n as f64);
            Complex64::new(c, sign * s)
        })
        .collect()
}

fn radix2(data: &mut [Complex64], sign: f64) {
    let n = data.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let tw = twiddles(n, sign);
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = tw[k * stride];
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

fn bluestein(data: &mut [Complex64], sign: f64) {
    let n = data.len();
    let m = (2 * n - 1).next_power_of_two();
    // chirp_k = e^{sign·πi k²/n}; k² mod 2n keeps the argument small.
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let k2 = ((k as u128 * k as u128) % (2 * n as u128)) as f64;
            let (c, s) = cis_turns(k2 / (2 * n) as f64);
            Complex64::new(c, sign * s)
        })
        .collect();
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..n {
        a[k] = data[k] * chirp[k];
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        b[k] = chirp[k].conj();
        b[m - k] = chirp[k].conj();
    }
    radix2(&mut a, -1.0);
    radix2(&mut b, -1.0);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    radix2(&mut a, 1.0);
    let scale = 1.0 / m as f64;
    for k in 0..n {
        data[k] = a[k] * scale * chirp[k];
    }
}
