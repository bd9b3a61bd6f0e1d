//! Complex root isolation for univariate polynomials in double precision.
//!
//! Roots are found simultaneously by Aberth–Ehrlich iteration and then
//! polished with a few Newton steps. Exact zero roots are split off first so
//! that `x^k * q(x)` reports `k` exact zeros.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 2000;

/// Evaluate `p` (ascending coefficients) and its derivative at `z`.
pub fn horner_with_derivative(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut val = Complex64::new(0.0, 0.0);
    let mut der = Complex64::new(0.0, 0.0);
    for c in p.iter().rev() {
        der = der * z + val;
        val = val * z + c;
    }
    (val, der)
}

pub fn horner(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// All complex roots of `p` given with ascending coefficients, with multiplicity.
pub fn poly_roots(p: &[Complex64]) -> Result<Vec<Complex64>> {
    if p.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut hi = p.len();
    while hi > 0 && p[hi - 1] == Complex64::new(0.0, 0.0) {
        hi -= 1;
    }
    if hi == 0 {
        return Err(Error::RootIsolation("zero polynomial has no isolated roots".into()));
    }
    let mut lo = 0;
    while p[lo] == Complex64::new(0.0, 0.0) {
        lo += 1;
    }
    let mut roots = vec![Complex64::new(0.0, 0.0); lo];
    let q = &p[lo..hi];
    let n = q.len() - 1;
    if n == 0 {
        return Ok(roots);
    }
    let lead = q[n];
    let monic: Vec<Complex64> = q.iter().map(|c| c / lead).collect();
    if n == 1 {
        roots.push(-monic[0]);
        return Ok(roots);
    }

    // Fujiwara bound for the initial circle; a second circle of the same
    // radius would cluster poorly, so the starting points spiral slightly.
    let mut bound: f64 = 0.0;
    for (k, c) in monic[..n].iter().enumerate() {
        let e = (n - k) as f64;
        let v = if k == 0 { (c.norm() / 2.0).powf(1.0 / e) } else { c.norm().powf(1.0 / e) };
        bound = bound.max(v);
    }
    let radius = (2.0 * bound).max(1e-12);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            let r = radius * (0.5 + 0.5 * ((k as f64 + 1.0) / n as f64));
            Complex64::from_polar(r, theta)
        })
        .collect();

    let dmonic: Vec<Complex64> = monic
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect();

    let mut converged = vec![false; n];
    for _ in 0..MAX_SWEEPS {
        let mut all = true;
        for i in 0..n {
            if converged[i] {
                continue;
            }
            let zi = z[i];
            let f = horner(&monic, zi);
            if f == Complex64::new(0.0, 0.0) {
                converged[i] = true;
                continue;
            }
            let df = horner(&dmonic, zi);
            let ratio = f / df;
            let mut s = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    let d = zi - zj;
                    if d != Complex64::new(0.0, 0.0) {
                        s += 1.0 / d;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * s;
            let step = if denom.norm() > 0.0 && df.norm() > 0.0 {
                ratio / denom
            } else {
                // Nudge away from a critical point.
                Complex64::new(1e-8 * (1.0 + zi.norm()), 1e-8)
            };
            if !step.re.is_finite() || !step.im.is_finite() {
                return Err(Error::RootIsolation("non-finite Aberth correction".into()));
            }
            z[i] = zi - step;
            if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z[i].norm()) {
                converged[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }

    // Newton polish on the original (non-normalised) polynomial.
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (f, df) = horner_with_derivative(&monic, *zi);
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            if !step.re.is_finite() || step.norm() > 1e-3 * (1.0 + zi.norm()) {
                break;
            }
            *zi -= step;
        }
    }

    let scale: f64 = monic.iter().map(|c| c.norm()).sum::<f64>();
    for zi in &z {
        let r = horner(&monic, *zi).norm();
        let zn = zi.norm().max(1.0).powi(n as i32);
        if !r.is_finite() || r > 1e-6 * scale * zn {
            return Err(Error::RootIsolation(format!(
                "root residual {r:.3e} too large at {zi}"
            )));
        }
    }
    roots.extend(z);
    Ok(roots)
}

/// Sort roots by decreasing real part, ties broken by decreasing imaginary part.
pub fn sort_embedding_order(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| {
        let tol = 1e-9 * (1.0 + a.norm().max(b.norm()));
        if (a.re - b.re).abs() > tol {
            b.re.partial_cmp(&a.re).unwrap()
        } else {
            b.im.partial_cmp(&a.im).unwrap()
        }
    });
}

/// Eigenvalues of a complex 2x2 matrix `[[a, b], [c, d]]`, larger modulus first.
pub fn eig2(m: [[Complex64; 2]; 2]) -> (Complex64, Complex64) {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    // Choose the numerically stable branch and recover the other from det.
    let s = if (tr + disc).norm() >= (tr - disc).norm() { tr + disc } else { tr - disc };
    let l1 = s / 2.0;
    let l2 = if l1.norm() > 0.0 { det / l1 } else { tr - l1 };
    if l1.norm() >= l2.norm() {
        (l1, l2)
    } else {
        (l2, l1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn quadratic_roots() {
        let mut r = poly_roots(&[c(-2.0), c(0.0), c(1.0)]).unwrap();
        sort_embedding_order(&mut r);
        assert!((r[0].re - 2f64.sqrt()).abs() < 1e-14);
        assert!((r[1].re + 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn exact_zero_roots_split_off() {
        let r = poly_roots(&[c(0.0), c(0.0), c(0.0), c(1.0)]).unwrap();
        assert_eq!(r, vec![c(0.0); 3]);
    }

    #[test]
    fn cube_roots_of_unity() {
        let r = poly_roots(&[c(-1.0), c(0.0), c(0.0), c(1.0)]).unwrap();
        for z in r {
            assert!(((z * z * z) - c(1.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn wilkinson_like_degree_twelve() {
        // prod (x - k), k = 1..12
        let mut p = vec![c(1.0)];
        for k in 1..=12 {
            let mut q = vec![c(0.0); p.len() + 1];
            for (i, a) in p.iter().enumerate() {
                q[i + 1] += a;
                q[i] -= a * k as f64;
            }
            p = q;
        }
        let mut r = poly_roots(&p).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (k, z) in r.iter().enumerate() {
            assert!((z.re - (k + 1) as f64).abs() < 1e-6, "{z}");
        }
    }

    #[test]
    fn eig2_diagonal() {
        let (a, b) = eig2([[c(3.0), c(0.0)], [c(0.0), c(-0.5)]]);
        assert_eq!(a, c(3.0));
        assert!((b - c(-0.5)).norm() < 1e-15);
    }
}
