//! Roots of real polynomials as eigenvalues of the balanced companion matrix.
//!
//! Balancing follows the Parlett–Reinsch scheme; eigenvalues come from the
//! Francis double-shift QR iteration on the (already Hessenberg) companion
//! matrix. Each root is then polished by a couple of Newton steps on the
//! original coefficients, kept only when they shrink the residual.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

const MAX_ITS: usize = 60;

/// Roots of `Σ coeffs[i] z^i`. Leading zeros are dropped; trailing-low zeros
/// give roots at the origin.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let top = match coeffs.iter().rposition(|&c| c != 0.0) {
        Some(t) => t,
        None => return Err(Error::InvalidArgument("zero polynomial".into())),
    };
    let low = coeffs.iter().position(|&c| c != 0.0).expect("nonzero");
    let mut roots = vec![Complex64::new(0.0, 0.0); low];
    let core = &coeffs[low..=top];
    let n = core.len() - 1;
    match n {
        0 => return Ok(roots),
        1 => {
            roots.push(Complex64::new(-core[0] / core[1], 0.0));
            return Ok(roots);
        }
        _ => {}
    }
    let mut a = Companion::new(core);
    a.balance();
    let eig = a.hqr().ok_or(Error::RootFindingDiverged { degree: n })?;
    roots.extend(eig.into_iter().map(|r| polish(core, r)));
    Ok(roots)
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn polish(coeffs: &[f64], mut z: Complex64) -> Complex64 {
    let (mut p, mut dp) = horner(coeffs, z);
    for _ in 0..3 {
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        let (np, ndp) = horner(coeffs, next);
        if !(np.norm() < p.norm()) {
            break;
        }
        z = next;
        p = np;
        dp = ndp;
    }
    z
}

/// Dense 1-based square matrix, as in the classical EISPACK formulation.
struct Companion {
    n: usize,
    a: Vec<f64>,
}

impl Companion {
    /// Monic companion matrix with the normalized coefficients in row 1.
    fn new(core: &[f64]) -> Self {
        let n = core.len() - 1;
        let lead = core[n];
        let mut m = Companion {
            n,
            a: vec![0.0; (n + 1) * (n + 1)],
        };
        for j in 1..=n {
            *m.at(1, j) = -core[n - j] / lead;
        }
        for i in 2..=n {
            *m.at(i, i - 1) = 1.0;
        }
        m
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * (self.n + 1) + j]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.n + 1) + j]
    }

    fn balance(&mut self) {
        const RADIX: f64 = 2.0;
        const SQRDX: f64 = RADIX * RADIX;
        let n = self.n;
        let mut done = false;
        while !done {
            done = true;
            for i in 1..=n {
                let mut r = 0.0;
                let mut c = 0.0;
                for j in 1..=n {
                    if j != i {
                        c += self.get(j, i).abs();
                        r += self.get(i, j).abs();
                    }
                }
                if c != 0.0 && r != 0.0 {
                    let mut g = r / RADIX;
                    let mut f = 1.0;
                    let s = c + r;
                    while c < g {
                        f *= RADIX;
                        c *= SQRDX;
                    }
                    g = r * RADIX;
                    while c > g {
                        f /= RADIX;
                        c /= SQRDX;
                    }
                    if (c + r) / f < 0.95 * s {
                        done = false;
                        let g = 1.0 / f;
                        for j in 1..=n {
                            *self.at(i, j) *= g;
                        }
                        for j in 1..=n {
                            *self.at(j, i) *= f;
                        }
                    }
                }
            }
        }
    }

    /// Eigenvalues of an upper Hessenberg matrix; `None` if some eigenvalue
    /// needs more than `MAX_ITS` iterations.
    #[allow(clippy::many_single_char_names)]
    fn hqr(mut self) -> Option<Vec<Complex64>> {
        let n = self.n;
        let mut wr = vec![0.0; n + 1];
        let mut wi = vec![0.0; n + 1];
        let mut anorm = 0.0;
        for i in 1..=n {
            for j in (i.max(2) - 1)..=n {
                anorm += self.get(i, j).abs();
            }
        }
        let mut nn = n;
        let mut t = 0.0;
        let (mut p, mut q, mut r): (f64, f64, f64);
        let (mut x, mut y, mut z, mut w);
        while nn >= 1 {
            let mut its = 0;
            loop {
                let mut l = nn;
                while l >= 2 {
                    let mut s = self.get(l - 1, l - 1).abs() + self.get(l, l).abs();
                    if s == 0.0 {
                        s = anorm;
                    }
                    if self.get(l, l - 1).abs() + s == s {
                        *self.at(l, l - 1) = 0.0;
                        break;
                    }
                    l -= 1;
                }
                x = self.get(nn, nn);
                if l == nn {
                    wr[nn] = x + t;
                    wi[nn] = 0.0;
                    nn -= 1;
                } else {
                    y = self.get(nn - 1, nn - 1);
                    w = self.get(nn, nn - 1) * self.get(nn - 1, nn);
                    if l == nn - 1 {
                        p = 0.5 * (y - x);
                        q = p * p + w;
                        z = math::sqrt(q.abs());
                        x += t;
                        if q >= 0.0 {
                            z = p + z.copysign(p);
                            wr[nn - 1] = x + z;
                            wr[nn] = x + z;
                            if z != 0.0 {
                                wr[nn] = x - w / z;
                            }
                            wi[nn - 1] = 0.0;
                            wi[nn] = 0.0;
                        } else {
                            wr[nn - 1] = x + p;
                            wr[nn] = x + p;
                            wi[nn - 1] = -z;
                            wi[nn] = z;
                        }
                        nn -= 2;
                    } else {
                        if its == MAX_ITS {
                            return None;
                        }
                        if its > 0 && its % 10 == 0 {
                            // exceptional shift
                            t += x;
                            for i in 1..=nn {
                                *self.at(i, i) -= x;
                            }
                            let s = self.get(nn, nn - 1).abs() + self.get(nn - 1, nn - 2).abs();
                            x = 0.75 * s;
                            y = x;
                            w = -0.4375 * s * s;
                        }
                        its += 1;
                        let mut m = nn - 2;
                        loop {
                            z = self.get(m, m);
                            r = x - z;
                            let s0 = y - z;
                            p = (r * s0 - w) / self.get(m + 1, m) + self.get(m, m + 1);
                            q = self.get(m + 1, m + 1) - z - r - s0;
                            r = self.get(m + 2, m + 1);
                            let s = p.abs() + q.abs() + r.abs();
                            p /= s;
                            q /= s;
                            r /= s;
                            if m == l {
                                break;
                            }
                            let u = self.get(m, m - 1).abs() * (q.abs() + r.abs());
                            let v = p.abs()
                                * (self.get(m - 1, m - 1).abs()
                                    + z.abs()
                                    + self.get(m + 1, m + 1).abs());
                            if u + v == v {
                                break;
                            }
                            m -= 1;
                        }
                        for i in (m + 2)..=nn {
                            *self.at(i, i - 2) = 0.0;
                            if i != m + 2 {
                                *self.at(i, i - 3) = 0.0;
                            }
                        }
                        let mut k = m;
                        while k < nn {
                            if k != m {
                                p = self.get(k, k - 1);
                                q = self.get(k + 1, k - 1);
                                r = 0.0;
                                if k != nn - 1 {
                                    r = self.get(k + 2, k - 1);
                                }
                                x = p.abs() + q.abs() + r.abs();
                                if x != 0.0 {
                                    p /= x;
                                    q /= x;
                                    r /= x;
                                }
                            }
                            let s = math::sqrt(p * p + q * q + r * r).copysign(p);
                            if s != 0.0 {
                                if k == m {
                                    if l != m {
                                        *self.at(k, k - 1) = -self.get(k, k - 1);
                                    }
                                } else {
                                    *self.at(k, k - 1) = -s * x;
                                }
                                p += s;
                                x = p / s;
                                y = q / s;
                                z = r / s;
                                q /= p;
                                r /= p;
                                for j in k..=nn {
                                    p = self.get(k, j) + q * self.get(k + 1, j);
                                    if k != nn - 1 {
                                        p += r * self.get(k + 2, j);
                                        *self.at(k + 2, j) -= p * z;
                                    }
                                    *self.at(k + 1, j) -= p * y;
                                    *self.at(k, j) -= p * x;
                                }
                                let mmin = if nn < k + 3 { nn } else { k + 3 };
                                for i in l..=mmin {
                                    p = x * self.get(i, k) + y * self.get(i, k + 1);
                                    if k != nn - 1 {
                                        p += z * self.get(i, k + 2);
                                        *self.at(i, k + 2) -= p * r;
                                    }
                                    *self.at(i, k + 1) -= p * q;
                                    *self.at(i, k) -= p;
                                }
                            }
                            k += 1;
                        }
                    }
                }
                if nn < 2 || l >= nn - 1 {
                    break;
                }
            }
        }
        Some((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_moduli(roots: &[Complex64]) -> Vec<f64> {
        let mut m: Vec<f64> = roots.iter().map(|r| r.norm()).collect();
        m.sort_by(|a, b| a.partial_cmp(b).unwrap());
        m
    }

    #[test]
    fn quadratic_and_linear() {
        let r = polynomial_roots(&[2.0, -3.0, 1.0]).unwrap();
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] - 1.0).abs() < 1e-12 && (re[1] - 2.0).abs() < 1e-12);
        let r = polynomial_roots(&[1.0, 1.0]).unwrap();
        assert!((r[0].re + 1.0).abs() < 1e-15);
        assert!(polynomial_roots(&[5.0]).unwrap().is_empty());
    }

    #[test]
    fn chacon_cubic() {
        // z³ + z + 1: real root ≈ −0.6823278, complex pair with |α|² = 1/0.6823278.
        let r = polynomial_roots(&[1.0, 1.0, 0.0, 1.0]).unwrap();
        let m = sorted_moduli(&r);
        assert!((m[0] - 0.682_327_803_828_019_3).abs() < 1e-12);
        assert!((m[1] * m[2] - 1.0 / 0.682_327_803_828_019_3).abs() < 1e-12);
    }

    #[test]
    fn roots_of_unity_and_zero_roots() {
        // z^2 (z^8 - 1)
        let mut c = vec![0.0; 11];
        c[2] = -1.0;
        c[10] = 1.0;
        let r = polynomial_roots(&c).unwrap();
        assert_eq!(r.len(), 10);
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
        for z in r.iter().filter(|z| z.norm() != 0.0) {
            assert!((z.norm() - 1.0).abs() < 1e-12);
            assert!((z.powu(8) - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn products_of_known_roots() {
        // (z - 2)(z + 0.5)(z² + 1)(z - 3i)(z + 3i) expanded with real coefficients.
        let factors: [&[f64]; 4] = [&[-2.0, 1.0], &[0.5, 1.0], &[1.0, 0.0, 1.0], &[9.0, 0.0, 1.0]];
        let mut poly = vec![1.0];
        for f in factors {
            let mut next = vec![0.0; poly.len() + f.len() - 1];
            for (i, a) in poly.iter().enumerate() {
                for (j, b) in f.iter().enumerate() {
                    next[i + j] += a * b;
                }
            }
            poly = next;
        }
        let m = sorted_moduli(&polynomial_roots(&poly).unwrap());
        let expected = [0.5, 1.0, 1.0, 2.0, 3.0, 3.0];
        for (a, b) in m.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10, "{m:?}");
        }
    }

    #[test]
    fn high_degree_sparse() {
        // 1 + z^4 + z^9 + z^200: every root is a root of the polynomial.
        let mut c = vec![0.0; 201];
        for d in [0, 4, 9, 200] {
            c[d] = 1.0;
        }
        let r = polynomial_roots(&c).unwrap();
        assert_eq!(r.len(), 200);
        for z in &r {
            let (p, _) = horner(&c, *z);
            assert!(p.norm() < 1e-8, "residual {}", p.norm());
        }
        // product of all roots = ±c0/c200 → modulus 1
        let prod: f64 = r.iter().map(|z| z.norm().ln()).sum();
        assert!(prod.abs() < 1e-8);
    }
}
