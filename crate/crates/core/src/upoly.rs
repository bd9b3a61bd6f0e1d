//! Dense univariate polynomials over a number field.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

/// Ascending coefficients; no trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct UPoly {
    field: Field,
    coeffs: Vec<FieldElement>,
}

impl UPoly {
    pub fn new(field: &Field, mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(FieldElement::is_zero) {
            coeffs.pop();
        }
        UPoly { field: field.clone(), coeffs }
    }

    pub fn zero(field: &Field) -> Self {
        UPoly { field: field.clone(), coeffs: Vec::new() }
    }

    pub fn constant(c: FieldElement) -> Self {
        let field = c.field().clone();
        Self::new(&field, vec![c])
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }

    pub fn add(&self, other: &UPoly) -> UPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = FieldElement::zero(&self.field);
        let out = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
            .collect();
        UPoly::new(&self.field, out)
    }

    pub fn sub(&self, other: &UPoly) -> UPoly {
        self.add(&other.scale(&-&FieldElement::one(&self.field)))
    }

    pub fn scale(&self, c: &FieldElement) -> UPoly {
        UPoly::new(&self.field, self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero(&self.field);
        }
        let mut out = vec![FieldElement::zero(&self.field); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        UPoly::new(&self.field, out)
    }

    /// Quotient and remainder.
    pub fn divrem(&self, d: &UPoly) -> Result<(UPoly, UPoly)> {
        let lead_inv = d.leading().ok_or(Error::DivisionByZero)?.inv()?;
        let dd = d.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((UPoly::zero(&self.field), self.clone()));
        }
        let mut quot = vec![FieldElement::zero(&self.field); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dj) in d.coeffs.iter().enumerate() {
                rem[k + j] = &rem[k + j] - &(&c * dj);
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        Ok((UPoly::new(&self.field, quot), UPoly::new(&self.field, rem)))
    }

    /// Division known to be exact.
    pub fn exact_div(&self, d: &UPoly) -> Result<UPoly> {
        let (q, r) = self.divrem(d)?;
        if !r.is_zero() {
            return Err(Error::InvalidInput("inexact polynomial division".into()));
        }
        Ok(q)
    }

    pub fn derivative(&self) -> UPoly {
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * &FieldElement::from_int(&self.field, i as i64))
            .collect();
        UPoly::new(&self.field, out)
    }

    pub fn monic(&self) -> Result<UPoly> {
        let inv = self.leading().ok_or(Error::DivisionByZero)?.inv()?;
        Ok(self.scale(&inv))
    }

    pub fn gcd(&self, other: &UPoly) -> Result<UPoly> {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.divrem(&b)?.1;
            a = b;
            b = if r.is_zero() { r } else { r.monic()? };
        }
        if a.is_zero() {
            Ok(a)
        } else {
            a.monic()
        }
    }

    /// Yun's square-free decomposition of a monic polynomial: `self = prod a_i^i`,
    /// returned as `(a_i, i)` for the nonconstant `a_i`.
    pub fn squarefree_decomposition(&self) -> Result<Vec<(UPoly, usize)>> {
        let f = self.monic()?;
        let mut out = Vec::new();
        if f.degree().unwrap_or(0) == 0 {
            return Ok(out);
        }
        let df = f.derivative();
        let a0 = f.gcd(&df)?;
        let mut b = f.exact_div(&a0)?;
        let mut c = df.exact_div(&a0)?;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d)?;
            b = b.exact_div(&a)?;
            c = d.exact_div(&a)?;
            d = c.sub(&b.derivative());
            if a.degree().unwrap_or(0) > 0 {
                out.push((a, i));
            }
            i += 1;
        }
        Ok(out)
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        let mut acc = FieldElement::zero(&self.field);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// Embedded coefficients, ascending.
    pub fn to_complex(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(FieldElement::embed).collect()
    }

    /// Rational roots (with multiplicity ignored) of a polynomial with rational coefficients.
    ///
    /// Returns `None` when some coefficient is irrational.
    pub fn rational_roots(&self) -> Option<Vec<BigRational>> {
        let rats: Vec<&BigRational> = self.coeffs.iter().map(FieldElement::as_rational).collect::<Option<_>>()?;
        if rats.is_empty() {
            return Some(Vec::new());
        }
        let lcm = rats.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let ints: Vec<BigInt> = rats.iter().map(|r| (r.numer() * &lcm) / r.denom()).collect();
        let shift = ints.iter().position(|c| !c.is_zero()).unwrap_or(0);
        let ints = &ints[shift..];
        let mut roots = Vec::new();
        if shift > 0 {
            roots.push(BigRational::zero());
        }
        if ints.len() <= 1 {
            return Some(roots);
        }
        // Candidates p/q with p | a_0, q | a_n, filtered by numeric root location
        // so the divisor enumeration stays small.
        let approx = crate::roots::poly_roots(&self.to_complex()[shift..]).ok()?;
        for z in approx {
            if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
                continue;
            }
            if let Some(r) = rational_near(z.re, ints) {
                if !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
        roots.sort();
        Some(roots)
    }
}

/// Snaps `x` to a rational root `p/q` of the integer polynomial when one is close.
fn rational_near(x: f64, ints: &[BigInt]) -> Option<BigRational> {
    let lead = ints.last()?.abs();
    let eval = |r: &BigRational| {
        let mut acc = BigRational::zero();
        for c in ints.iter().rev() {
            acc = acc * r + BigRational::from_integer(c.clone());
        }
        acc
    };
    // q divides the leading coefficient; try its divisors when small, else continued fractions.
    let mut candidates = Vec::new();
    if lead.bits() <= 40 {
        let l: u64 = (&lead).try_into().ok()?;
        let mut q = 1u64;
        while q * q <= l {
            if l % q == 0 {
                candidates.push(q);
                candidates.push(l / q);
            }
            q += 1;
        }
    }
    for q in candidates {
        let p = (x * q as f64).round();
        if !p.is_finite() {
            continue;
        }
        let r = BigRational::new(BigInt::from(p as i128), BigInt::from(q));
        if eval(&r).is_zero() {
            return Some(r);
        }
    }
    let r = BigRational::from_float(x)?;
    let approx = continued_fraction_approx(&r, 64);
    approx.into_iter().find(|c| eval(c).is_zero())
}

fn continued_fraction_approx(x: &BigRational, max_terms: usize) -> Vec<BigRational> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rest = x.clone();
    for _ in 0..max_terms {
        let a = rest.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        out.push(BigRational::new(h2.clone(), k2.clone()));
        let frac = &rest - BigRational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        rest = frac.recip();
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    out
}

/// Determinant of a square matrix over `K[x]` by fraction-free (Bareiss) elimination.
pub fn bareiss_det(mut m: Vec<Vec<UPoly>>, field: &Field) -> Result<UPoly> {
    let n = m.len();
    if n == 0 {
        return Ok(UPoly::constant(FieldElement::one(field)));
    }
    let mut sign_negative = false;
    let mut prev = UPoly::constant(FieldElement::one(field));
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return Ok(UPoly::zero(field));
            };
            m.swap(k, r);
            sign_negative = !sign_negative;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[k][k].mul(&m[i][j]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = num.exact_div(&prev)?;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    Ok(if sign_negative { det.scale(&-&FieldElement::one(field)) } else { det })
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| format!("{c}")).collect();
        write!(f, "UPoly[{}]", parts.join(", "))
    }
}
