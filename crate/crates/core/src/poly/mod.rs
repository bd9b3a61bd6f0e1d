//! Sparse bivariate polynomials over a [`Field`].

mod parse;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{fmt_rational, same_field, Field, FieldElement};

pub use parse::parse_poly;

/// Largest exponent any stored monomial may carry.
pub const MAX_EXPONENT: u32 = 1_000_000;

/// Exponent pair `x^i y^j`, ordered graded-lexicographically with `x > y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exp {
    pub i: u32,
    pub j: u32,
}

impl Exp {
    pub fn new(i: u32, j: u32) -> Self {
        Exp { i, j }
    }

    pub fn total(self) -> u32 {
        self.i + self.j
    }
}

impl Ord for Exp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total().cmp(&other.total()).then(self.i.cmp(&other.i))
    }
}

impl PartialOrd for Exp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PlanePoly {
    field: Field,
    terms: BTreeMap<Exp, FieldElement>,
}

/// Result of a floating-point evaluation; overflow is tagged rather than
/// propagated as NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluated {
    Finite(Complex64),
    Overflow,
}

impl Evaluated {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Evaluated::Finite(z) => Some(z),
            Evaluated::Overflow => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

pub fn poly_arith(op: PolyOp, a: &PlanePoly, b: &PlanePoly) -> Result<PlanePoly> {
    if !same_field(&a.field, &b.field) {
        return Err(Error::FieldMismatch);
    }
    match op {
        PolyOp::Add => Ok(a + b),
        PolyOp::Sub => Ok(a - b),
        PolyOp::Mul => a.mul(b),
    }
}

/// Substitute `x <- u`, `y <- v` in `p`.
pub fn poly_compose2(p: &PlanePoly, u: &PlanePoly, v: &PlanePoly) -> Result<PlanePoly> {
    if !same_field(&p.field, &u.field) || !same_field(&p.field, &v.field) {
        return Err(Error::FieldMismatch);
    }
    p.compose(u, v)
}

fn check_exp(e: u64) -> Result<u32> {
    if e > MAX_EXPONENT as u64 {
        Err(Error::ExponentCap { exponent: e, cap: MAX_EXPONENT as u64 })
    } else {
        Ok(e as u32)
    }
}

impl PlanePoly {
    pub fn zero(field: &Field) -> Self {
        PlanePoly { field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(c: FieldElement) -> Self {
        let field = c.field().clone();
        let mut p = Self::zero(&field);
        p.insert(Exp::new(0, 0), c);
        p
    }

    pub fn one(field: &Field) -> Self {
        Self::constant(FieldElement::one(field))
    }

    pub fn from_int(field: &Field, n: i64) -> Self {
        Self::constant(FieldElement::from_int(field, n))
    }

    pub fn monomial(c: FieldElement, i: u32, j: u32) -> Self {
        let field = c.field().clone();
        let mut p = Self::zero(&field);
        p.insert(Exp::new(i, j), c);
        p
    }

    pub fn x(field: &Field) -> Self {
        Self::monomial(FieldElement::one(field), 1, 0)
    }

    pub fn y(field: &Field) -> Self {
        Self::monomial(FieldElement::one(field), 0, 1)
    }

    /// Builds a polynomial from `(i, j, c)` triples; repeated exponents add up.
    pub fn from_terms<I: IntoIterator<Item = (u32, u32, FieldElement)>>(field: &Field, terms: I) -> Self {
        let mut p = Self::zero(field);
        for (i, j, c) in terms {
            p.add_term(Exp::new(i, j), &c);
        }
        p
    }

    /// Univariate polynomial `sum c_k * x^k` (or in `y` when `in_y`).
    pub fn univariate(field: &Field, coeffs: &[FieldElement], in_y: bool) -> Self {
        Self::from_terms(
            field,
            coeffs.iter().enumerate().map(|(k, c)| {
                let k = k as u32;
                if in_y {
                    (0, k, c.clone())
                } else {
                    (k, 0, c.clone())
                }
            }),
        )
    }

    fn insert(&mut self, e: Exp, c: FieldElement) {
        if c.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, c);
        }
    }

    fn add_term(&mut self, e: Exp, c: &FieldElement) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(old) => {
                let s = &*old + c;
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|e| e.total())
    }

    pub fn degree_in_x(&self) -> u32 {
        self.terms.keys().map(|e| e.i).max().unwrap_or(0)
    }

    pub fn degree_in_y(&self) -> u32 {
        self.terms.keys().map(|e| e.j).max().unwrap_or(0)
    }

    pub fn coeff(&self, i: u32, j: u32) -> FieldElement {
        self.terms.get(&Exp::new(i, j)).cloned().unwrap_or_else(|| FieldElement::zero(&self.field))
    }

    /// Terms in descending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (Exp, &FieldElement)> {
        self.terms.iter().rev().map(|(e, c)| (*e, c))
    }

    pub fn constant_term(&self) -> FieldElement {
        self.coeff(0, 0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree().is_none_or(|d| d == 0)
    }

    /// Homogeneous part of top degree.
    pub fn leading_form(&self) -> PlanePoly {
        let mut out = Self::zero(&self.field);
        if let Some(d) = self.degree() {
            for (e, c) in self.terms.iter().rev().take_while(|(e, _)| e.total() == d) {
                out.terms.insert(*e, c.clone());
            }
        }
        out
    }

    pub fn leading_term(&self) -> Option<(Exp, &FieldElement)> {
        self.terms.iter().next_back().map(|(e, c)| (*e, c))
    }

    /// True when only powers of `y` occur.
    pub fn is_in_y_only(&self) -> bool {
        self.terms.keys().all(|e| e.i == 0)
    }

    pub fn is_in_x_only(&self) -> bool {
        self.terms.keys().all(|e| e.j == 0)
    }

    /// Coefficients `c_k` of a polynomial in `y` only (or `x` only).
    pub fn univariate_coeffs(&self, in_y: bool) -> Vec<FieldElement> {
        let n = if in_y { self.degree_in_y() } else { self.degree_in_x() } as usize;
        let mut out = vec![FieldElement::zero(&self.field); n + 1];
        for (e, c) in &self.terms {
            let k = if in_y { e.j } else { e.i } as usize;
            out[k] = &out[k] + c;
        }
        out
    }

    pub fn scale(&self, c: &FieldElement) -> PlanePoly {
        let mut out = Self::zero(&self.field);
        if c.is_zero() {
            return out;
        }
        for (e, a) in &self.terms {
            out.terms.insert(*e, a * c);
        }
        out
    }

    pub fn mul(&self, other: &PlanePoly) -> Result<PlanePoly> {
        debug_assert!(same_field(&self.field, &other.field));
        if let (Some(a), Some(b)) = (self.terms.keys().map(|e| e.i).max(), other.terms.keys().map(|e| e.i).max()) {
            check_exp(a as u64 + b as u64)?;
        }
        if let (Some(a), Some(b)) = (self.terms.keys().map(|e| e.j).max(), other.terms.keys().map(|e| e.j).max()) {
            check_exp(a as u64 + b as u64)?;
        }
        if self.field.is_rationals() {
            return Ok(self.mul_rational(other));
        }
        let mut acc: std::collections::HashMap<Exp, FieldElement> = std::collections::HashMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = Exp::new(e1.i + e2.i, e1.j + e2.j);
                let prod = c1 * c2;
                match acc.get_mut(&e) {
                    Some(v) => *v = &*v + &prod,
                    None => {
                        acc.insert(e, prod);
                    }
                }
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(PlanePoly { field: self.field.clone(), terms })
    }

    /// Product over Q with denominators cleared first, so the inner loop runs on
    /// integers and each output coefficient is normalized once.
    fn mul_rational(&self, other: &PlanePoly) -> PlanePoly {
        fn integral(p: &PlanePoly) -> (BigInt, Vec<(Exp, BigInt)>) {
            let rat = |c: &FieldElement| c.as_rational().expect("rational coefficient").clone();
            let den = p.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(rat(c).denom()));
            let terms = p.terms.iter().map(|(e, c)| (*e, rat(c).numer() * (&den / rat(c).denom()))).collect();
            (den, terms)
        }
        let (da, a) = integral(self);
        let (db, b) = integral(other);
        let mut acc: std::collections::HashMap<Exp, BigInt> = std::collections::HashMap::with_capacity(a.len() * b.len());
        for (e1, c1) in &a {
            for (e2, c2) in &b {
                *acc.entry(Exp::new(e1.i + e2.i, e1.j + e2.j)).or_default() += c1 * c2;
            }
        }
        let den = da * db;
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (e, FieldElement::from_rational(&self.field, BigRational::new(c, den.clone()))))
            .collect();
        PlanePoly { field: self.field.clone(), terms }
    }

    pub fn pow(&self, n: u32) -> Result<PlanePoly> {
        if let Some(d) = self.degree() {
            check_exp(d as u64 * n as u64)?;
        }
        let mut acc = Self::one(&self.field);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// `self(u, v)`, Horner-style: outer loop over powers of `x`, inner over `y`.
    pub fn compose(&self, u: &PlanePoly, v: &PlanePoly) -> Result<PlanePoly> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let du = u.degree().unwrap_or(0) as u64;
        let dv = v.degree().unwrap_or(0) as u64;
        check_exp(self.degree().unwrap_or(0) as u64 * du.max(dv))?;

        // Group by x-exponent: self = sum_i x^i c_i(y).
        let mut rows: BTreeMap<u32, Vec<(u32, &FieldElement)>> = BTreeMap::new();
        for (e, c) in &self.terms {
            rows.entry(e.i).or_default().push((e.j, c));
        }
        let mut vpow_cache: BTreeMap<u32, PlanePoly> = BTreeMap::new();
        let mut vpow = |k: u32| -> Result<PlanePoly> {
            if let Some(p) = vpow_cache.get(&k) {
                return Ok(p.clone());
            }
            let p = v.pow(k)?;
            vpow_cache.insert(k, p.clone());
            Ok(p)
        };
        let mut acc = Self::zero(&self.field);
        let mut prev_i: Option<u32> = None;
        for (&i, row) in rows.iter().rev() {
            if let Some(pi) = prev_i {
                acc = acc.mul(&u.pow(pi - i)?)?;
            }
            // Inner Horner over y-exponents, descending.
            let mut inner = Self::zero(&self.field);
            let mut prev_j: Option<u32> = None;
            for &(j, c) in row.iter().rev() {
                if let Some(pj) = prev_j {
                    inner = inner.mul(&vpow(pj - j)?)?;
                }
                inner.add_term(Exp::new(0, 0), c);
                prev_j = Some(j);
            }
            if let Some(pj) = prev_j {
                if pj > 0 {
                    inner = inner.mul(&vpow(pj)?)?;
                }
            }
            acc = &acc + &inner;
            prev_i = Some(i);
        }
        if let Some(pi) = prev_i {
            if pi > 0 {
                acc = acc.mul(&u.pow(pi)?)?;
            }
        }
        Ok(acc)
    }

    pub fn dx(&self) -> PlanePoly {
        let mut out = Self::zero(&self.field);
        for (e, c) in &self.terms {
            if e.i > 0 {
                out.insert(Exp::new(e.i - 1, e.j), c * &FieldElement::from_int(&self.field, e.i as i64));
            }
        }
        out
    }

    pub fn dy(&self) -> PlanePoly {
        let mut out = Self::zero(&self.field);
        for (e, c) in &self.terms {
            if e.j > 0 {
                out.insert(Exp::new(e.i, e.j - 1), c * &FieldElement::from_int(&self.field, e.j as i64));
            }
        }
        out
    }

    /// Re-express a polynomial with rational coefficients over another field.
    pub fn lift(&self, target: &Field) -> Result<PlanePoly> {
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            out.terms.insert(*e, c.lift(target)?);
        }
        Ok(out)
    }

    /// Floating-point evaluation through the field's complex embedding.
    pub fn eval_complex(&self, z: (Complex64, Complex64)) -> Evaluated {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            acc += c.embed() * z.0.powu(e.i) * z.1.powu(e.j);
        }
        if acc.re.is_finite() && acc.im.is_finite() {
            Evaluated::Finite(acc)
        } else {
            Evaluated::Overflow
        }
    }

    /// Coefficients embedded once, for repeated numeric evaluation.
    /// Exact value at a point of the coefficient field.
    pub fn eval_exact(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let powers = |v: &FieldElement, n: u32| {
            let mut out = vec![FieldElement::one(&self.field)];
            for _ in 0..n {
                let next = out.last().expect("nonempty") * v;
                out.push(next);
            }
            out
        };
        let (xp, yp) = (powers(x, self.degree_in_x()), powers(y, self.degree_in_y()));
        self.terms().fold(FieldElement::zero(&self.field), |acc, (e, c)| &acc + &(&(c * &xp[e.i as usize]) * &yp[e.j as usize]))
    }

    pub fn to_numeric(&self) -> NumericPoly {
        NumericPoly { terms: self.terms.iter().map(|(e, c)| (e.i, e.j, c.embed())).collect() }
    }

    /// Apply `f` to every coefficient.
    pub fn map_coeffs(&self, mut f: impl FnMut(&FieldElement) -> FieldElement) -> PlanePoly {
        let mut out = Self::zero(&self.field);
        for (e, c) in &self.terms {
            out.insert(*e, f(c));
        }
        out
    }
}

/// A polynomial with embedded complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericPoly {
    pub terms: Vec<(u32, u32, Complex64)>,
}

impl NumericPoly {
    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.terms.iter().map(|&(i, j, c)| c * x.powu(i) * y.powu(j)).sum()
    }

    /// Value and both partial derivatives.
    pub fn eval_grad(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let (mut v, mut gx, mut gy) = (zero, zero, zero);
        for &(i, j, c) in &self.terms {
            let xi = x.powu(i);
            let yj = y.powu(j);
            v += c * xi * yj;
            if i > 0 {
                gx += c * (i as f64) * x.powu(i - 1) * yj;
            }
            if j > 0 {
                gy += c * (j as f64) * xi * y.powu(j - 1);
            }
        }
        (v, gx, gy)
    }
}

impl Add for &PlanePoly {
    type Output = PlanePoly;
    fn add(self, rhs: &PlanePoly) -> PlanePoly {
        debug_assert!(same_field(&self.field, &rhs.field));
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c);
        }
        out
    }
}

impl Sub for &PlanePoly {
    type Output = PlanePoly;
    fn sub(self, rhs: &PlanePoly) -> PlanePoly {
        debug_assert!(same_field(&self.field, &rhs.field));
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, &-c);
        }
        out
    }
}

impl Neg for &PlanePoly {
    type Output = PlanePoly;
    fn neg(self) -> PlanePoly {
        self.map_coeffs(|c| -c)
    }
}

fn monomial_text(e: Exp) -> String {
    let mut parts = Vec::new();
    match e.i {
        0 => {}
        1 => parts.push("x".to_string()),
        k => parts.push(format!("x^{k}")),
    }
    match e.j {
        0 => {}
        1 => parts.push("y".to_string()),
        k => parts.push(format!("y^{k}")),
    }
    parts.join("*")
}

/// Splits a coefficient into (is_negative, magnitude text) for the printer.
fn coeff_text(c: &FieldElement) -> (bool, String, bool) {
    let nonzero: Vec<usize> = (0..c.coeffs().len()).filter(|&k| !c.coeffs()[k].is_zero_value()).collect();
    if nonzero.len() == 1 {
        let k = nonzero[0];
        let q = &c.coeffs()[k];
        let neg = q.is_negative();
        let mag = fmt_rational(&q.abs());
        let text = match (k, mag.as_str()) {
            (0, _) => mag,
            (1, "1") => "t".into(),
            (1, _) => format!("{mag}*t"),
            (_, "1") => format!("t^{k}"),
            _ => format!("{mag}*t^{k}"),
        };
        (neg, text, k == 0 && q.abs().is_one_value())
    } else {
        (false, format!("({c})"), false)
    }
}

trait RatExt {
    fn is_zero_value(&self) -> bool;
    fn is_one_value(&self) -> bool;
}

impl RatExt for num_rational::BigRational {
    fn is_zero_value(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn is_one_value(&self) -> bool {
        num_traits::One::is_one(self)
    }
}

impl fmt::Display for PlanePoly {
    /// Canonical form: descending graded-lex, explicit `*`, e.g. `1/2*x^2*y + t*y`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (e, c) in self.terms() {
            let (neg, mag, unit) = coeff_text(c);
            let mon = monomial_text(e);
            let body = if mon.is_empty() {
                mag
            } else if unit {
                mon
            } else {
                format!("{mag}*{mon}")
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
        write!(f, "{out}")
    }
}

impl fmt::Debug for PlanePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlanePoly({self})")
    }
}
