//! Cyclic reduction, elliptic/loxodromic classification and Hénon normal forms.

use std::fmt;

use num_complex::Complex64;

use super::jung::{jung_decompose, reduce, AffineMap, ElementaryMap, Factor, FactorKind};
use super::PolyMap;
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::poly::PlanePoly;
use crate::radical;

/// `(x, y) -> (a y + p(x), x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HenonFactor {
    pub a: FieldElement,
    /// Univariate in `x`, degree at least 2.
    pub p: PlanePoly,
}

impl HenonFactor {
    pub fn new(a: FieldElement, p: PlanePoly) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::InvalidInput("Hénon factor needs a != 0".into()));
        }
        if !p.is_in_x_only() || p.degree().unwrap_or(0) < 2 {
            return Err(Error::InvalidInput(format!("Hénon factor needs a univariate p(x) of degree >= 2, got {p}")));
        }
        Ok(HenonFactor { a, p })
    }

    pub fn degree(&self) -> u32 {
        self.p.degree().unwrap_or(0)
    }

    pub fn to_map(&self) -> PolyMap {
        let k = self.a.field();
        PolyMap::new(&PlanePoly::monomial(self.a.clone(), 0, 1) + &self.p, PlanePoly::x(k)).expect("Hénon factor")
    }

    /// Embedded coefficients of `p`, ascending.
    pub fn numeric_coeffs(&self) -> Vec<Complex64> {
        self.p.univariate_coeffs(false).iter().map(FieldElement::embed).collect()
    }
}

/// `factors[0] ∘ ... ∘ factors[k-1]` together with a conjugator `phi` such that
/// `phi ∘ f ∘ phi^{-1}` equals that composition for the source map `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HenonForm {
    pub factors: Vec<HenonFactor>,
    pub conjugator: PolyMap,
}

impl HenonForm {
    /// A form whose source map is the composition itself.
    pub fn from_factors(factors: Vec<HenonFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("empty Hénon word".into()));
        }
        let field = factors[0].a.field().clone();
        Ok(HenonForm { factors, conjugator: PolyMap::identity(&field) })
    }

    pub fn field(&self) -> &Field {
        self.factors[0].a.field()
    }

    pub fn map(&self) -> Result<PolyMap> {
        let mut acc = PolyMap::identity(self.field());
        for f in self.factors.iter().rev() {
            acc = f.to_map().compose(&acc)?;
        }
        Ok(acc)
    }

    /// Dynamical degree: the product of the factor degrees.
    pub fn lambda1(&self) -> u64 {
        self.factors.iter().map(|f| f.degree() as u64).product()
    }

    /// Constant Jacobian determinant, `prod(-a_i)`.
    pub fn jacobian(&self) -> FieldElement {
        let mut acc = FieldElement::one(self.field());
        for f in &self.factors {
            acc = &acc * &-&f.a;
        }
        acc
    }

    /// Conjugate by `(s x, s y)` so that the first factor's leading coefficient is 1.
    ///
    /// Needs an `(d-1)`-th root of that coefficient; when it is missing from the
    /// field the required minimal polynomial is reported.
    pub fn normalize_leading(&self) -> Result<HenonForm> {
        let first = &self.factors[0];
        let d = first.degree();
        let lead = first.p.coeff(d, 0);
        if lead.is_one() {
            return Ok(self.clone());
        }
        let k = d - 1;
        let s = match lead.as_rational() {
            Some(q) => match radical::rational_root(q, k) {
                Some(r) => FieldElement::from_rational(self.field(), r),
                None => {
                    let minpoly = radical::radical_minpoly(q, k)?;
                    return Err(Error::FieldExtensionNeeded {
                        minpoly,
                        reason: format!("normalising leading coefficient {lead} needs its {k}-th root"),
                    });
                }
            },
            None => {
                return Err(Error::FieldExtensionNeeded {
                    minpoly: vec![],
                    reason: format!("leading coefficient {lead} is irrational; its {k}-th root is not handled"),
                })
            }
        };
        let field = self.field().clone();
        let s_inv = s.inv()?;
        let mut factors = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            // p -> s * p(x / s)
            let xs = PlanePoly::monomial(s_inv.clone(), 1, 0);
            let p = f.p.compose(&xs, &PlanePoly::y(&field))?.scale(&s);
            factors.push(HenonFactor::new(f.a.clone(), p)?);
        }
        let scale = PolyMap::new(PlanePoly::monomial(s.clone(), 1, 0), PlanePoly::monomial(s, 0, 1))?;
        Ok(HenonForm { factors, conjugator: scale.compose(&self.conjugator)? })
    }
}

impl fmt::Display for HenonForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|h| format!("({}, {})", h.a, h.p)).collect();
        write!(f, "[{}]", parts.join(" ∘ "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Elliptic,
    Loxodromic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// `conjugator ∘ f ∘ conjugator^{-1} = factor`.
    Elliptic { conjugator: PolyMap, factor: Factor },
    Loxodromic(HenonForm),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationResult {
    pub class: Class,
    pub lambda1: u64,
    pub witness: Witness,
}

/// A word `cinv ∘ f ∘ c` maintained under cyclic rotation.
struct Cyclic {
    word: Vec<Factor>,
    c: PolyMap,
    cinv: PolyMap,
}

impl Cyclic {
    /// Replace the word by its conjugate `g^{-1} ∘ word ∘ g`, with the word
    /// already rewritten accordingly by the caller.
    fn conjugate_by(&mut self, g: &PolyMap, ginv: &PolyMap) -> Result<()> {
        self.c = self.c.compose(g)?;
        self.cinv = ginv.compose(&self.cinv)?;
        Ok(())
    }

    fn rotate_left(&mut self) -> Result<()> {
        let first = self.word.remove(0);
        let g = first.to_map();
        let ginv = first.inverse()?.to_map();
        self.word.push(first);
        self.word = reduce(std::mem::take(&mut self.word))?;
        self.conjugate_by(&g, &ginv)
    }
}

fn kind_eq(a: &Factor, b: &Factor) -> bool {
    a.kind() == b.kind()
}

pub fn classify(f: &PolyMap) -> Result<ClassificationResult> {
    let word = jung_decompose(f)?;
    let field = f.field().clone();
    let mut cyc = Cyclic { word: word.factors, c: PolyMap::identity(&field), cinv: PolyMap::identity(&field) };

    while cyc.word.len() >= 2 && kind_eq(&cyc.word[0], cyc.word.last().unwrap()) {
        cyc.rotate_left()?;
    }
    if cyc.word.len() <= 1 {
        return Ok(ClassificationResult {
            class: Class::Elliptic,
            lambda1: 1,
            witness: Witness::Elliptic { conjugator: cyc.cinv, factor: cyc.word.remove(0) },
        });
    }
    if cyc.word[0].kind() != FactorKind::Elementary {
        cyc.rotate_left()?;
    }
    let form = to_henon(cyc, f, &field)?;
    let lambda1 = form
        .factors
        .iter()
        .try_fold(1u64, |acc, h| acc.checked_mul(h.degree() as u64))
        .ok_or_else(|| Error::ResourceCap("dynamical degree overflows u64".into()))?;
    Ok(ClassificationResult { class: Class::Loxodromic, lambda1, witness: Witness::Loxodromic(form) })
}

pub fn henon_normal_form(f: &PolyMap) -> Result<HenonForm> {
    match classify(f)?.witness {
        Witness::Loxodromic(h) => Ok(h),
        Witness::Elliptic { .. } => Err(Error::NotLoxodromic),
    }
}

/// Converts a cyclically reduced word `E1 A1 ... Ek Ak` into Hénon factors.
fn to_henon(mut cyc: Cyclic, f: &PolyMap, field: &Field) -> Result<HenonForm> {
    let swap = PolyMap::swap(field);
    let k = cyc.word.len() / 2;
    let mut elems: Vec<PolyMap> = Vec::with_capacity(k);
    // Bruhat split of each affine factor: A = b ∘ swap ∘ b2 with b, b2 triangular.
    let mut left_b: Vec<PolyMap> = Vec::with_capacity(k);
    let mut right_b: Vec<(PolyMap, PolyMap)> = Vec::with_capacity(k);
    for i in 0..k {
        let e = cyc.word[2 * i].to_map();
        let a = match &cyc.word[2 * i + 1] {
            Factor::Affine(a) => a.clone(),
            other => return Err(Error::InvalidInput(format!("expected affine factor, found {other}"))),
        };
        let b2 = AffineMap { a: a.c.clone(), b: a.d.clone(), e: a.f.clone(), ..AffineMap::from_map(&PolyMap::identity(field))? };
        let b2_map = b2.to_map();
        let b2_inv = b2.inverse().to_map();
        let b1 = a.to_map().compose(&b2_inv)?.compose(&swap)?;
        debug_assert!(AffineMap::from_map(&b1)?.is_triangular());
        elems.push(e);
        left_b.push(b1);
        right_b.push((b2_map, b2_inv));
    }
    // Conjugate by the trailing triangular piece so that it wraps to the front.
    let (last_b2, last_b2_inv) = right_b[k - 1].clone();
    cyc.conjugate_by(&last_b2_inv, &last_b2)?;

    let mut tilde: Vec<ElementaryMap> = Vec::with_capacity(k);
    for i in 0..k {
        let prev = if i == 0 { &right_b[k - 1].0 } else { &right_b[i - 1].0 };
        let m = prev.compose(&elems[i])?.compose(&left_b[i])?;
        let e = ElementaryMap::from_map(&m)
            .ok_or_else(|| Error::InvalidInput(format!("expected elementary map, found {m}")))?;
        tilde.push(e);
    }
    // E~_i ∘ swap = t_i ∘ H_i with t_i = (x, beta_i y + gamma_i).
    let to_x = |p: &PlanePoly| p.compose(&PlanePoly::x(field), &PlanePoly::x(field));
    let mut factors = Vec::with_capacity(k);
    for i in 0..k {
        let next = &tilde[(i + 1) % k];
        let a = &tilde[i].alpha * &next.beta;
        let shift = PlanePoly::constant(&tilde[i].alpha * &next.gamma);
        let p = &to_x(&tilde[i].p)? + &shift;
        factors.push(HenonFactor::new(a, p)?);
    }
    let t1 = PolyMap::new(
        PlanePoly::x(field),
        PlanePoly::from_terms(field, [(0, 1, tilde[0].beta.clone()), (0, 0, tilde[0].gamma.clone())]),
    )?;
    let t1_inv = ElementaryMap::from_map(&t1).expect("triangular").inverse()?.to_map();
    cyc.conjugate_by(&t1, &t1_inv)?;

    let form = HenonForm { factors, conjugator: cyc.cinv };
    if !conjugates(&form.conjugator, f, &form.map()?)? {
        return Err(Error::InvalidInput("normal form failed exact verification".into()));
    }
    Ok(form)
}

/// Above this value of `deg phi · deg f` the identity `phi ∘ f = h ∘ phi` is
/// tested at sample points instead of by symbolic composition.
const SYMBOLIC_CHECK_DEGREE: u64 = 64;

/// Exact check of `phi ∘ f = h ∘ phi`. Large instances are checked by exact
/// evaluation at fixed rational points: both sides have degree at most
/// `deg phi · max(deg f, deg h)`, far below the spread of the sample points.
fn conjugates(phi: &PolyMap, f: &PolyMap, h: &PolyMap) -> Result<bool> {
    let cost = phi.degree() as u64 * f.degree().max(h.degree()) as u64;
    if cost <= SYMBOLIC_CHECK_DEGREE {
        return Ok(phi.compose(f)? == h.compose(phi)?);
    }
    let k = f.field();
    for (a, b) in [(1_000_003i64, -999_983i64), (-7_919, 104_729), (31_337, 2_718_281)] {
        let z = (FieldElement::from_ratio(k, a, 17), FieldElement::from_ratio(k, b, 23));
        let fz = f.eval_exact((&z.0, &z.1));
        let pz = phi.eval_exact((&z.0, &z.1));
        if phi.eval_exact((&fz.0, &fz.1)) != h.eval_exact((&pz.0, &pz.1)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::{compose_maps, invert_map};
    use crate::field::FieldSpec;

    fn q() -> Field {
        FieldSpec::rationals()
    }

    fn m(x: &str, y: &str) -> PolyMap {
        PolyMap::parse(x, y, &q()).unwrap()
    }

    #[test]
    fn elementary_map_is_elliptic() {
        let r = classify(&m("2*x + y^3", "3*y + 1")).unwrap();
        assert_eq!(r.class, Class::Elliptic);
        assert_eq!(r.lambda1, 1);
    }

    #[test]
    fn cubic_henon_is_loxodromic() {
        let f = m("y", "x + y^3");
        let r = classify(&f).unwrap();
        assert_eq!((r.class, r.lambda1), (Class::Loxodromic, 3));
        let h = henon_normal_form(&f).unwrap();
        assert_eq!(h.factors.len(), 1);
        assert_eq!(h.factors[0].p.degree(), Some(3));
        assert!(h.factors[0].a.is_one());
        assert_eq!(h.factors[0].p, crate::poly::parse_poly("x^3", &q()).unwrap());
    }

    #[test]
    fn product_of_degrees() {
        let h2 = m("y + x^2 - 1", "x");
        let h3 = m("2*y + x^3 + x", "x");
        let f = compose_maps(&h2, &h3).unwrap();
        let r = classify(&f).unwrap();
        assert_eq!((r.class, r.lambda1), (Class::Loxodromic, 6));
        // Degree growth cross-check: deg f^n = 6^n for a Hénon word.
        let f2 = f.compose(&f).unwrap();
        assert_eq!(f2.degree(), 36);
    }

    #[test]
    fn conjugated_form_has_same_lambda() {
        let h = m("y + x^3 - 2*x", "x");
        let a = m("2*x + y + 1", "x - y");
        let ainv = invert_map(&a).unwrap();
        let f = a.compose(&h).unwrap().compose(&ainv).unwrap();
        let form = henon_normal_form(&f).unwrap();
        assert_eq!(form.lambda1(), 3);
        let phi = &form.conjugator;
        assert_eq!(phi.compose(&f).unwrap(), form.map().unwrap().compose(phi).unwrap());
    }

    #[test]
    fn elliptic_input_has_no_normal_form() {
        assert_eq!(henon_normal_form(&m("x + y^2", "y")), Err(Error::NotLoxodromic));
        assert_eq!(henon_normal_form(&PolyMap::identity(&q())), Err(Error::NotLoxodromic));
    }

    #[test]
    fn conjugated_elementary_is_elliptic() {
        let e = m("x + y^4", "2*y");
        let a = m("x + 3*y", "x + y + 1");
        let f = a.compose(&e).unwrap().compose(&invert_map(&a).unwrap()).unwrap();
        let r = classify(&f).unwrap();
        assert_eq!(r.class, Class::Elliptic);
        if let Witness::Elliptic { conjugator, factor } = r.witness {
            assert_eq!(conjugator.compose(&f).unwrap(), factor.to_map().compose(&conjugator).unwrap());
        } else {
            panic!("expected elliptic witness");
        }
    }

    #[test]
    fn leading_coefficient_normalisation() {
        let h = HenonForm::from_factors(vec![HenonFactor::new(
            FieldElement::one(&q()),
            crate::poly::parse_poly("4*x^3 + x", &q()).unwrap(),
        )
        .unwrap()])
        .unwrap();
        let n = h.normalize_leading().unwrap();
        assert!(n.factors[0].p.coeff(3, 0).is_one());
        let h2 = HenonForm::from_factors(vec![HenonFactor::new(
            FieldElement::one(&q()),
            crate::poly::parse_poly("2*x^3", &q()).unwrap(),
        )
        .unwrap()])
        .unwrap();
        match h2.normalize_leading() {
            Err(Error::FieldExtensionNeeded { minpoly, .. }) => {
                assert_eq!(minpoly, vec![(-2).into(), 0.into(), 1.into()]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
