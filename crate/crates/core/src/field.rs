//! Exact scalars: the rationals and simple extensions `Q(t)` presented by a
//! monic integer minimal polynomial, with one chosen complex embedding.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::roots;

/// Coefficient bound for the trial-division irreducibility sieve.
const SIEVE_COEFF_BOUND: f64 = 1e6;
const SIEVE_MAX_SUBSETS: usize = 50_000;

#[derive(Debug, Clone)]
pub struct FieldSpec {
    minpoly: Option<Vec<BigInt>>,
    root_index: usize,
    root: Complex64,
}

/// Shared handle to a field; every scalar and polynomial carries one.
pub type Field = Arc<FieldSpec>;

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.minpoly == other.minpoly && self.root_index == other.root_index
    }
}

impl Eq for FieldSpec {}

pub fn same_field(a: &Field, b: &Field) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl FieldSpec {
    pub fn rationals() -> Field {
        Arc::new(FieldSpec { minpoly: None, root_index: 0, root: Complex64::new(0.0, 0.0) })
    }

    /// `minpoly` is ascending `[c0, c1, ..., 1]`. `root_index` selects a root in
    /// the order (real part desc, imaginary part desc); `None` means 0.
    pub fn extension(minpoly: Vec<BigInt>, root_index: Option<usize>) -> Result<Field> {
        let m = minpoly.len().saturating_sub(1);
        if m < 2 {
            return Err(Error::InvalidField("minimal polynomial must have degree >= 2".into()));
        }
        if !minpoly[m].is_one() {
            return Err(Error::InvalidField("minimal polynomial must be monic".into()));
        }
        let k = root_index.unwrap_or(0);
        if k >= m {
            return Err(Error::InvalidField(format!("root index {k} out of range for degree {m}")));
        }
        let roots = sorted_roots(&minpoly)?;
        check_irreducible(&minpoly, &roots)?;
        Ok(Arc::new(FieldSpec { minpoly: Some(minpoly), root_index: k, root: roots[k] }))
    }

    pub fn extension_i64(minpoly: &[i64], root_index: Option<usize>) -> Result<Field> {
        Self::extension(minpoly.iter().map(|&c| BigInt::from(c)).collect(), root_index)
    }

    pub fn degree(&self) -> usize {
        self.minpoly.as_ref().map_or(1, |p| p.len() - 1)
    }

    pub fn is_rationals(&self) -> bool {
        self.minpoly.is_none()
    }

    pub fn minpoly(&self) -> Option<&[BigInt]> {
        self.minpoly.as_deref()
    }

    pub fn root_index(&self) -> usize {
        self.root_index
    }

    /// The complex number the generator `t` is sent to.
    pub fn embedding_root(&self) -> Complex64 {
        self.root
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.minpoly {
            None => write!(f, "Q"),
            Some(p) => write!(f, "Q(t), t root #{} of {}", self.root_index, crate::error::format_minpoly(p)),
        }
    }
}

fn sorted_roots(minpoly: &[BigInt]) -> Result<Vec<Complex64>> {
    let c: Vec<Complex64> = minpoly
        .iter()
        .map(|a| Complex64::new(a.to_f64().unwrap_or(f64::NAN), 0.0))
        .collect();
    let mut r = roots::poly_roots(&c)?;
    roots::sort_embedding_order(&mut r);
    Ok(r)
}

/// Rejects `minpoly` if it has a monic integer factor of degree <= m/2 whose
/// coefficients are bounded by the sieve bound.
fn check_irreducible(minpoly: &[BigInt], roots: &[Complex64]) -> Result<()> {
    let m = roots.len();
    let mut visited = 0usize;
    for k in 1..=m / 2 {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            visited += 1;
            if visited > SIEVE_MAX_SUBSETS {
                return Ok(());
            }
            let mut prod = vec![Complex64::new(1.0, 0.0)];
            for &i in &idx {
                let mut next = vec![Complex64::new(0.0, 0.0); prod.len() + 1];
                for (j, a) in prod.iter().enumerate() {
                    next[j + 1] += a;
                    next[j] -= a * roots[i];
                }
                prod = next;
            }
            let candidate: Option<Vec<BigInt>> = prod
                .iter()
                .map(|c| {
                    let r = c.re.round();
                    let close = (c.re - r).abs() < 1e-6 * (1.0 + r.abs()) && c.im.abs() < 1e-6 * (1.0 + r.abs());
                    (close && r.abs() <= SIEVE_COEFF_BOUND).then(|| BigInt::from(r as i64))
                })
                .collect();
            if let Some(f) = candidate {
                if int_poly_divides(&f, minpoly) {
                    return Err(Error::InvalidField(format!(
                        "minimal polynomial {} is divisible by {}",
                        crate::error::format_minpoly(minpoly),
                        crate::error::format_minpoly(&f)
                    )));
                }
            }
            // next k-subset in lexicographic order
            let mut i = k;
            while i > 0 && idx[i - 1] == m - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(())
}

/// Exact divisibility of integer polynomials, `f` monic.
fn int_poly_divides(f: &[BigInt], g: &[BigInt]) -> bool {
    let df = f.len() - 1;
    let mut r: Vec<BigInt> = g.to_vec();
    while r.len() > df {
        let c = r.pop().unwrap();
        let shift = r.len() - df;
        for (i, a) in f[..df].iter().enumerate() {
            r[shift + i] -= &c * a;
        }
    }
    r.iter().all(|c| c.is_zero())
}

/// Exact element `c0 + c1 t + ... + c_{m-1} t^{m-1}`, reduced modulo the minimal polynomial.
#[derive(Clone)]
pub struct FieldElement {
    field: Field,
    coeffs: Vec<BigRational>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && same_field(&self.field, &other.field)
    }
}

impl Eq for FieldElement {}

impl std::hash::Hash for FieldElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Checked arithmetic entry point: reports field mismatches and division by zero.
pub fn field_arith(op: ArithOp, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
    if !same_field(&a.field, &b.field) {
        return Err(Error::FieldMismatch);
    }
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.try_div(b)?,
    })
}

impl FieldElement {
    pub fn zero(field: &Field) -> Self {
        FieldElement { field: field.clone(), coeffs: vec![BigRational::zero(); field.degree()] }
    }

    pub fn one(field: &Field) -> Self {
        Self::from_rational(field, BigRational::one())
    }

    pub fn from_rational(field: &Field, q: BigRational) -> Self {
        let mut e = Self::zero(field);
        e.coeffs[0] = q;
        e
    }

    pub fn from_int(field: &Field, n: i64) -> Self {
        Self::from_rational(field, BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(field: &Field, num: i64, den: i64) -> Self {
        Self::from_rational(field, BigRational::new(num.into(), den.into()))
    }

    /// The generator `t`; over `Q` this is an error.
    pub fn generator(field: &Field) -> Result<Self> {
        if field.is_rationals() {
            return Err(Error::InvalidInput("the generator t is not available over Q".into()));
        }
        let mut e = Self::zero(field);
        e.coeffs[1] = BigRational::one();
        Ok(e)
    }

    /// Builds an element from (possibly unreduced) coefficients in `t`.
    pub fn from_coeffs(field: &Field, coeffs: Vec<BigRational>) -> Self {
        let mut c = coeffs;
        reduce_mod(field, &mut c);
        FieldElement { field: field.clone(), coeffs: c }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// `Some(q)` when the element lies in the prime field.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.coeffs[1..].iter().all(|c| c.is_zero()).then(|| &self.coeffs[0])
    }

    /// Re-express a rational element in another field.
    pub fn lift(&self, target: &Field) -> Result<Self> {
        if same_field(&self.field, target) {
            return Ok(FieldElement { field: target.clone(), coeffs: self.coeffs.clone() });
        }
        match self.as_rational() {
            Some(q) => Ok(Self::from_rational(target, q.clone())),
            None => Err(Error::FieldMismatch),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match self.field.minpoly() {
            None => Ok(Self::from_rational(&self.field, self.coeffs[0].recip())),
            Some(mp) => {
                let modulus: Vec<BigRational> = mp.iter().map(|c| BigRational::from_integer(c.clone())).collect();
                let inv = qpoly_inverse_mod(&self.coeffs, &modulus);
                Ok(Self::from_coeffs(&self.field, inv))
            }
        }
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Self::one(&self.field);
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &sq;
            }
            n >>= 1;
            if n > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Image under the chosen complex embedding.
    pub fn embed(&self) -> Complex64 {
        let r = self.field.embedding_root();
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * r + Complex64::new(rat_to_f64(c), 0.0);
        }
        acc
    }

    /// Largest absolute numerator or denominator, in decimal digits.
    pub fn height_digits(&self) -> usize {
        self.coeffs
            .iter()
            .map(|c| c.numer().abs().to_string().len().max(c.denom().to_string().len()))
            .max()
            .unwrap_or(1)
    }
}

pub(crate) fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Extreme sizes: fall back to a logarithmic estimate.
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

fn reduce_mod(field: &Field, c: &mut Vec<BigRational>) {
    let m = field.degree();
    if let Some(mp) = field.minpoly() {
        while c.len() > m {
            let top = c.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let shift = c.len() - m;
            for (i, a) in mp[..m].iter().enumerate() {
                if !a.is_zero() {
                    c[shift + i] -= &top * BigRational::from_integer(a.clone());
                }
            }
        }
    }
    c.resize(m, BigRational::zero());
}

fn trim(p: &mut Vec<BigRational>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn qpoly_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = &b[db];
    if r.len() <= db {
        return (vec![], r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    while r.len() > db {
        let k = r.len() - 1 - db;
        let c = r.last().unwrap() / lead;
        for (i, bi) in b.iter().enumerate() {
            r[k + i] -= &c * bi;
        }
        q[k] = c;
        r.pop();
        trim(&mut r);
        if r.len() <= db {
            break;
        }
    }
    (q, r)
}

fn qpoly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn qpoly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out: Vec<BigRational> = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
            let y = b.get(i).cloned().unwrap_or_else(BigRational::zero);
            x - y
        })
        .collect();
    trim(&mut out);
    out
}

/// Inverse of `a` modulo an irreducible `m`, by the extended Euclidean algorithm.
fn qpoly_inverse_mod(a: &[BigRational], m: &[BigRational]) -> Vec<BigRational> {
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    trim(&mut r1);
    let mut s0: Vec<BigRational> = vec![];
    let mut s1: Vec<BigRational> = vec![BigRational::one()];
    while r1.len() > 1 {
        let (q, r) = qpoly_divrem(&r0, &r1);
        let s = qpoly_sub(&s0, &qpoly_mul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    // r1 is a nonzero constant because m is irreducible and a != 0 mod m.
    let c = r1[0].clone();
    s1.iter().map(|x| x / &c).collect()
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        debug_assert!(same_field(&self.field, &rhs.field), "field mismatch");
        FieldElement {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        debug_assert!(same_field(&self.field, &rhs.field), "field mismatch");
        FieldElement {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        debug_assert!(same_field(&self.field, &rhs.field), "field mismatch");
        if self.coeffs.len() == 1 {
            return FieldElement { field: self.field.clone(), coeffs: vec![&self.coeffs[0] * &rhs.coeffs[0]] };
        }
        let prod = qpoly_mul(&self.coeffs, &rhs.coeffs);
        FieldElement::from_coeffs(&self.field, prod)
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { field: self.field.clone(), coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

pub(crate) fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for FieldElement {
    /// Ascending powers of `t`, e.g. `3 - 1/2*t + t^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            let mon = match i {
                0 => String::new(),
                1 => "t".into(),
                _ => format!("t^{i}"),
            };
            let body = if mon.is_empty() {
                fmt_rational(&a)
            } else if a.is_one() {
                mon
            } else {
                format!("{}*{}", fmt_rational(&a), mon)
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        if out.is_empty() {
            out.push('0');
        }
        write!(f, "{out}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sqrt2() -> Field {
        FieldSpec::extension_i64(&[-2, 0, 1], None).unwrap()
    }

    fn elem(field: &Field, c: &[i64]) -> FieldElement {
        FieldElement::from_coeffs(field, c.iter().map(|&v| BigRational::from_integer(v.into())).collect())
    }

    #[test]
    fn theta_squared_reduces_to_two() {
        let k = sqrt2();
        let t = FieldElement::generator(&k).unwrap();
        assert_eq!(field_arith(ArithOp::Mul, &t, &t).unwrap(), FieldElement::from_int(&k, 2));
    }

    #[test]
    fn rational_identity_division() {
        let q = FieldSpec::rationals();
        let r = field_arith(ArithOp::Div, &FieldElement::from_int(&q, 3), &FieldElement::one(&q)).unwrap();
        assert_eq!(r, FieldElement::from_int(&q, 3));
    }

    #[test]
    fn inverse_of_theta_is_half_theta() {
        let k = sqrt2();
        let t = FieldElement::generator(&k).unwrap();
        let inv = field_arith(ArithOp::Div, &FieldElement::one(&k), &t).unwrap();
        let half = FieldElement::from_ratio(&k, 1, 2);
        assert_eq!(inv, &half * &t);
        // Oracle: the product reduces to one.
        assert!((&inv * &t).is_one());
    }

    #[test]
    fn division_by_zero_and_mismatch_are_errors() {
        let k = sqrt2();
        let q = FieldSpec::rationals();
        let z = FieldElement::zero(&k);
        assert_eq!(FieldElement::one(&k).try_div(&z), Err(Error::DivisionByZero));
        assert_eq!(
            field_arith(ArithOp::Add, &FieldElement::one(&k), &FieldElement::one(&q)),
            Err(Error::FieldMismatch)
        );
    }

    #[test]
    fn embedding_of_sqrt_two() {
        let k = sqrt2();
        let t = FieldElement::generator(&k).unwrap();
        let z = t.embed();
        assert!((z * z - 2.0).norm() < 1e-12);
        assert!((z.re - std::f64::consts::SQRT_2).abs() < 1e-15);
        let one = FieldElement::one(&k);
        assert!(((&t + &one).embed().re - 2.414_213_562_373_095).abs() < 1e-14);
        let q = FieldSpec::rationals();
        assert_eq!(FieldElement::from_ratio(&q, 5, 2).embed(), Complex64::new(2.5, 0.0));
    }

    #[test]
    fn default_root_is_largest_real_part() {
        // x^2 + x + 1: roots -1/2 +- i sqrt(3)/2, tie on real part; larger imaginary wins.
        let k = FieldSpec::extension_i64(&[1, 1, 1], None).unwrap();
        assert!(k.embedding_root().im > 0.0);
        let k1 = FieldSpec::extension_i64(&[1, 1, 1], Some(1)).unwrap();
        assert!(k1.embedding_root().im < 0.0);
    }

    #[test]
    fn reducible_minpoly_rejected() {
        // (x^2 + 1)(x^2 - 3)
        assert!(FieldSpec::extension_i64(&[-3, 0, -2, 0, 1], None).is_err());
        assert!(FieldSpec::extension_i64(&[-4, 0, 1], None).is_err());
        assert!(FieldSpec::extension_i64(&[2, 0, 1], Some(2)).is_err());
        assert!(FieldSpec::extension_i64(&[-2, 0, 2], None).is_err());
        assert!(FieldSpec::extension_i64(&[-5, 0, 0, 1], None).is_ok());
    }

    #[test]
    fn minpoly_evaluates_to_zero_under_embedding() {
        let k = FieldSpec::extension_i64(&[-25, 0, 0, 1], None).unwrap();
        let t = FieldElement::generator(&k).unwrap();
        let v = &(&(&t * &t) * &t) - &FieldElement::from_int(&k, 25);
        assert!(v.is_zero());
        assert!((t.embed().powu(3) - 25.0).norm() < 1e-10);
    }

    fn arb_elem() -> impl Strategy<Value = Vec<i64>> {
        proptest::collection::vec(-1000i64..=1000, 3)
    }

    proptest! {
        #[test]
        fn ring_axioms_hold_exactly(a in arb_elem(), b in arb_elem(), c in arb_elem()) {
            let k = FieldSpec::extension_i64(&[-5, 1, 0, 1], None).unwrap();
            let (a, b, c) = (elem(&k, &a), elem(&k, &b), elem(&k, &c));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            if !a.is_zero() {
                let inv = FieldElement::one(&k).try_div(&a).unwrap();
                prop_assert!((&a * &inv).is_one());
            }
        }

        #[test]
        fn embedding_is_multiplicative(a in arb_elem(), b in arb_elem()) {
            let k = FieldSpec::extension_i64(&[-5, 1, 0, 1], None).unwrap();
            let (a, b) = (elem(&k, &a), elem(&k, &b));
            let lhs = (&a * &b).embed();
            let rhs = a.embed() * b.embed();
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        }
    }
}
