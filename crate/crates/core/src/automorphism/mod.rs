//! Polynomial maps of the plane and the automorphism group calculus.

mod henon;
mod jung;

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{same_field, Field, FieldElement};
use crate::poly::{parse_poly, PlanePoly};

pub use henon::{classify, henon_normal_form, Class, ClassificationResult, HenonFactor, HenonForm, Witness};
pub use jung::{jung_decompose, AffineMap, ElementaryMap, Factor, FactorKind, JungWord};

/// `(x, y) -> (p(x, y), q(x, y))`.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyMap {
    p: PlanePoly,
    q: PlanePoly,
}

impl PolyMap {
    /// Rejects constant maps and components over different fields.
    pub fn new(p: PlanePoly, q: PlanePoly) -> Result<Self> {
        if !same_field(p.field(), q.field()) {
            return Err(Error::FieldMismatch);
        }
        if p.is_constant() && q.is_constant() {
            return Err(Error::InvalidInput("constant maps are not polynomial maps of positive degree".into()));
        }
        Ok(PolyMap { p, q })
    }

    pub fn parse(x: &str, y: &str, field: &Field) -> Result<Self> {
        Self::new(parse_poly(x, field)?, parse_poly(y, field)?)
    }

    pub fn identity(field: &Field) -> Self {
        PolyMap { p: PlanePoly::x(field), q: PlanePoly::y(field) }
    }

    /// `(x, y) -> (y, x)`.
    pub fn swap(field: &Field) -> Self {
        PolyMap { p: PlanePoly::y(field), q: PlanePoly::x(field) }
    }

    pub fn field(&self) -> &Field {
        self.p.field()
    }

    pub fn p(&self) -> &PlanePoly {
        &self.p
    }

    pub fn q(&self) -> &PlanePoly {
        &self.q
    }

    pub fn components(&self) -> (&PlanePoly, &PlanePoly) {
        (&self.p, &self.q)
    }

    pub fn degree(&self) -> u32 {
        self.p.degree().unwrap_or(0).max(self.q.degree().unwrap_or(0))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.field())
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap> {
        compose_maps(self, inner)
    }

    pub fn pow(&self, n: u32) -> Result<PolyMap> {
        let mut acc = Self::identity(self.field());
        for _ in 0..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    pub fn lift(&self, target: &Field) -> Result<PolyMap> {
        Ok(PolyMap { p: self.p.lift(target)?, q: self.q.lift(target)? })
    }

    pub fn eval_exact(&self, (x, y): (&FieldElement, &FieldElement)) -> (FieldElement, FieldElement) {
        (self.p.eval_exact(x, y), self.q.eval_exact(x, y))
    }

    pub fn to_numeric(&self) -> NumericMap {
        NumericMap { p: self.p.to_numeric(), q: self.q.to_numeric() }
    }
}

impl fmt::Display for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

impl fmt::Debug for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyMap{self}")
    }
}

/// `f ∘ g`, exactly.
pub fn compose_maps(f: &PolyMap, g: &PolyMap) -> Result<PolyMap> {
    if !same_field(f.field(), g.field()) {
        return Err(Error::FieldMismatch);
    }
    Ok(PolyMap { p: f.p.compose(&g.p, &g.q)?, q: f.q.compose(&g.p, &g.q)? })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jacobian {
    pub det: PlanePoly,
    pub constant_nonzero: bool,
}

impl Jacobian {
    pub fn constant(&self) -> Option<FieldElement> {
        self.constant_nonzero.then(|| self.det.constant_term())
    }
}

pub fn jacobian_det(f: &PolyMap) -> Jacobian {
    let a = f.p.dx().mul(&f.q.dy()).expect("derivative degrees are below the cap");
    let b = f.p.dy().mul(&f.q.dx()).expect("derivative degrees are below the cap");
    let det = &a - &b;
    let constant_nonzero = det.is_constant() && !det.is_zero();
    Jacobian { det, constant_nonzero }
}

/// Inverse of an automorphism, assembled from the inverses of its Jung factors.
pub fn invert_map(f: &PolyMap) -> Result<PolyMap> {
    let word = jung_decompose(f)?;
    let mut acc = PolyMap::identity(f.field());
    for factor in &word.factors {
        acc = factor.inverse()?.to_map().compose(&acc)?;
    }
    Ok(acc)
}

/// A polynomial map with embedded complex coefficients.
#[derive(Debug, Clone)]
pub struct NumericMap {
    pub p: crate::poly::NumericPoly,
    pub q: crate::poly::NumericPoly,
}

impl NumericMap {
    pub fn apply(&self, z: (num_complex::Complex64, num_complex::Complex64)) -> (num_complex::Complex64, num_complex::Complex64) {
        (self.p.eval(z.0, z.1), self.q.eval(z.0, z.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn q() -> Field {
        FieldSpec::rationals()
    }

    fn m(x: &str, y: &str) -> PolyMap {
        PolyMap::parse(x, y, &q()).unwrap()
    }

    #[test]
    fn identity_composition() {
        let g = m("x^2 + 3*y", "y - x");
        assert_eq!(compose_maps(&PolyMap::identity(&q()), &g).unwrap(), g);
    }

    #[test]
    fn square_of_quadratic_henon() {
        let f = m("y", "x + y^2");
        let f2 = compose_maps(&f, &f).unwrap();
        // Direct substitution oracle: f(f(x,y)) = (x + y^2, y + (x + y^2)^2).
        assert_eq!(f2, m("x + y^2", "y + (x + y^2)^2"));
        assert_eq!(f2.degree(), 4);
    }

    #[test]
    fn iterate_degrees_of_cubic() {
        let f = m("y", "x + y^3");
        let mut g = f.clone();
        for n in 1..=6u32 {
            assert_eq!(g.degree(), 3u32.pow(n));
            if n < 6 {
                g = compose_maps(&f, &g).unwrap();
            }
        }
    }

    #[test]
    fn jacobian_examples() {
        let j = jacobian_det(&m("5*y + x^3 - x", "x"));
        assert!(j.constant_nonzero);
        assert_eq!(j.det, PlanePoly::from_int(&q(), -5));
        assert_eq!(jacobian_det(&PolyMap::identity(&q())).det, PlanePoly::one(&q()));
        assert_eq!(jacobian_det(&m("x + y^2", "y")).det, PlanePoly::one(&q()));
        assert!(!jacobian_det(&m("x^2", "y")).constant_nonzero);
    }

    #[test]
    fn jacobian_chain_rule() {
        let f = m("x + y^2", "y + 3");
        let g = m("2*y - x^3", "x + 1");
        let fg = compose_maps(&f, &g).unwrap();
        let jf = jacobian_det(&f).det;
        let jg = jacobian_det(&g).det;
        let rhs = jf.compose(g.p(), g.q()).unwrap().mul(&jg).unwrap();
        assert_eq!(jacobian_det(&fg).det, rhs);
    }

    #[test]
    fn constant_map_rejected() {
        assert!(PolyMap::parse("1", "2", &q()).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(invert_map(&m("y", "x + y^2")).unwrap(), m("y - x^2", "x"));
        assert_eq!(invert_map(&m("2*x + 1", "3*y")).unwrap(), m("1/2*x - 1/2", "1/3*y"));
        assert_eq!(invert_map(&PolyMap::identity(&q())).unwrap(), PolyMap::identity(&q()));
    }
}
