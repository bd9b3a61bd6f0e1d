//! Exact radicals of rationals: perfect-power detection and the simple
//! extension `Q(c^{1/k})`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement, FieldSpec};

const TRIAL_PRIMES_UP_TO: u32 = 10_000;

fn exact_int_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.is_negative() {
        if k % 2 == 0 {
            return None;
        }
        return exact_int_root(&-n, k).map(|r| -r);
    }
    let r = n.nth_root(k);
    (r.pow(k) == *n).then_some(r)
}

/// `Some(r)` with `r^k = q` exactly, for `k >= 1`.
pub fn rational_root(q: &BigRational, k: u32) -> Option<BigRational> {
    if k == 1 {
        return Some(q.clone());
    }
    let n = exact_int_root(q.numer(), k)?;
    let d = exact_int_root(q.denom(), k)?;
    Some(BigRational::new(n, d))
}

/// Writes `m = s^k * rest` pulling out k-th powers of small primes.
fn strip_powers(m: &BigInt, k: u32) -> (BigInt, BigInt) {
    let mut s = BigInt::one();
    let mut rest = m.clone();
    let mut p = 2u32;
    while p <= TRIAL_PRIMES_UP_TO {
        let pk = BigInt::from(p).pow(k);
        while (&rest % &pk).is_zero() {
            rest /= &pk;
            s *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if let Some(r) = exact_int_root(&rest, k) {
        s *= r;
        rest = BigInt::one();
    }
    (s, rest)
}

fn prime_divisors(mut k: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= k {
        if k % p == 0 {
            out.push(p);
            while k % p == 0 {
                k /= p;
            }
        }
        p += 1;
    }
    if k > 1 {
        out.push(k);
    }
    out
}

/// Capelli: `X^k - a` is irreducible over Q iff `a` is not a p-th power for
/// any prime `p | k`, and not of the form `-4 c^4` when `4 | k`.
pub fn binomial_irreducible(a: &BigInt, k: u32) -> bool {
    if a.is_zero() {
        return k == 1;
    }
    for p in prime_divisors(k) {
        if exact_int_root(a, p).is_some() {
            return false;
        }
    }
    if k % 4 == 0 && a.is_negative() {
        let b = -a;
        let four = BigInt::from(4);
        if (&b % &four).is_zero() && exact_int_root(&(b / &four), 4).is_some() {
            return false;
        }
    }
    true
}

/// Minimal polynomial (ascending, monic integer) of a `k`-th root of `q`,
/// in the representation `X^k - n d^{k-1}` scaled by the denominator.
pub fn radical_minpoly(q: &BigRational, k: u32) -> Result<Vec<BigInt>> {
    let m = q.numer() * q.denom().pow(k - 1);
    let mut out = vec![BigInt::zero(); k as usize + 1];
    out[0] = -m;
    out[k as usize] = BigInt::one();
    Ok(out)
}

/// Builds `Q(theta)` containing an element `alpha` with `alpha^k = q`.
///
/// The minimal polynomial is `X^k - M` with `M` free of small k-th powers;
/// `alpha` is the image of the default (largest real part) root.
pub fn radical_extension(q: &BigRational, k: u32) -> Result<(Field, FieldElement)> {
    if q.is_zero() || k < 2 {
        return Err(Error::InvalidInput("radical of zero or with exponent < 2".into()));
    }
    let (n, d) = (q.numer().clone(), q.denom().clone());
    // alpha = theta / d with theta^k = n d^{k-1}, or alpha = n / theta with
    // theta^k = d n^{k-1}; pick whichever keeps M small.
    let by_denominator = n.abs() >= d;
    let m = if by_denominator { &n * d.pow(k - 1) } else { &d * n.pow(k - 1) };
    let (s, rest) = strip_powers(&m, k);
    if rest.is_one() {
        return Err(Error::ReducibleRadical(format!("{q} already has a rational {k}-th root")));
    }
    if !binomial_irreducible(&rest, k) {
        return Err(Error::ReducibleRadical(format!("X^{k} - {rest}")));
    }
    let mut minpoly = vec![BigInt::zero(); k as usize + 1];
    minpoly[0] = -rest;
    minpoly[k as usize] = BigInt::one();
    let field = FieldSpec::extension(minpoly, None)?;
    // theta_full = s * theta
    let theta = &FieldElement::generator(&field)? * &FieldElement::from_rational(&field, BigRational::from_integer(s));
    let alpha = if by_denominator {
        &theta * &FieldElement::from_rational(&field, BigRational::new(BigInt::one(), d))
    } else {
        &FieldElement::from_rational(&field, BigRational::from_integer(n)) * &theta.inv()?
    };
    debug_assert_eq!(alpha.pow(k as i64)?, FieldElement::from_rational(&field, q.clone()));
    Ok((field, alpha))
}
