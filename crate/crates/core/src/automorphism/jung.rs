//! Amalgamated-product words: affine and elementary factors.

use std::fmt;

use super::{jacobian_det, PolyMap};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::poly::PlanePoly;

/// `(a x + b y + e, c x + d y + f)` with `ad - bc != 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap {
    pub a: FieldElement,
    pub b: FieldElement,
    pub c: FieldElement,
    pub d: FieldElement,
    pub e: FieldElement,
    pub f: FieldElement,
}

impl AffineMap {
    pub fn from_map(m: &PolyMap) -> Result<Self> {
        if m.degree() > 1 {
            return Err(Error::InvalidInput(format!("{m} is not affine")));
        }
        let (p, q) = m.components();
        let out = AffineMap {
            a: p.coeff(1, 0),
            b: p.coeff(0, 1),
            e: p.coeff(0, 0),
            c: q.coeff(1, 0),
            d: q.coeff(0, 1),
            f: q.coeff(0, 0),
        };
        if out.det().is_zero() {
            return Err(Error::NotAutomorphism(format!("affine part {m} is singular")));
        }
        Ok(out)
    }

    pub fn det(&self) -> FieldElement {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn field(&self) -> &Field {
        self.a.field()
    }

    pub fn to_map(&self) -> PolyMap {
        let k = self.field();
        let lin = |u: &FieldElement, v: &FieldElement, w: &FieldElement| {
            PlanePoly::from_terms(k, [(1, 0, u.clone()), (0, 1, v.clone()), (0, 0, w.clone())])
        };
        PolyMap::new(lin(&self.a, &self.b, &self.e), lin(&self.c, &self.d, &self.f)).expect("invertible affine map")
    }

    pub fn inverse(&self) -> AffineMap {
        let det_inv = self.det().inv().expect("invertible affine map");
        let a = &self.d * &det_inv;
        let b = -(&self.b * &det_inv);
        let c = -(&self.c * &det_inv);
        let d = &self.a * &det_inv;
        let e = -(&(&a * &self.e) + &(&b * &self.f));
        let f = -(&(&c * &self.e) + &(&d * &self.f));
        AffineMap { a, b, c, d, e, f }
    }

    /// Lower-triangular affine maps are also elementary.
    pub fn is_triangular(&self) -> bool {
        self.c.is_zero()
    }
}

/// `(alpha x + p(y), beta y + gamma)` with `alpha, beta != 0` and `deg p >= 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryMap {
    pub alpha: FieldElement,
    pub beta: FieldElement,
    pub gamma: FieldElement,
    pub p: PlanePoly,
}

impl ElementaryMap {
    /// Recognises the elementary shape; `None` if the map has another form.
    pub fn from_map(m: &PolyMap) -> Option<Self> {
        let (p, q) = m.components();
        if q.degree().unwrap_or(0) > 1 || !q.coeff(1, 0).is_zero() {
            return None;
        }
        let beta = q.coeff(0, 1);
        if beta.is_zero() {
            return None;
        }
        let alpha = p.coeff(1, 0);
        if alpha.is_zero() {
            return None;
        }
        let rest = p - &PlanePoly::monomial(alpha.clone(), 1, 0);
        if !rest.is_in_y_only() {
            return None;
        }
        Some(ElementaryMap { alpha, beta, gamma: q.coeff(0, 0), p: rest })
    }

    pub fn field(&self) -> &Field {
        self.alpha.field()
    }

    pub fn to_map(&self) -> PolyMap {
        let k = self.field();
        let p = &PlanePoly::monomial(self.alpha.clone(), 1, 0) + &self.p;
        let q = PlanePoly::from_terms(k, [(0, 1, self.beta.clone()), (0, 0, self.gamma.clone())]);
        PolyMap::new(p, q).expect("elementary map")
    }

    pub fn inverse(&self) -> Result<ElementaryMap> {
        let k = self.field();
        let alpha_inv = self.alpha.inv()?;
        let beta_inv = self.beta.inv()?;
        // y' = (y - gamma)/beta; x' = (x - p(y'))/alpha
        let y_back = PlanePoly::from_terms(k, [(0, 1, beta_inv.clone()), (0, 0, -(&self.gamma * &beta_inv))]);
        let p_back = self.p.compose(&PlanePoly::x(k), &y_back)?;
        Ok(ElementaryMap {
            alpha: alpha_inv.clone(),
            beta: beta_inv.clone(),
            gamma: -(&self.gamma * &beta_inv),
            p: p_back.scale(&-alpha_inv),
        })
    }

    pub fn degree(&self) -> u32 {
        self.p.degree().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Affine,
    Elementary,
    /// Triangular affine maps, common to both subgroups.
    Intersection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    Affine(AffineMap),
    Elementary(ElementaryMap),
}

impl Factor {
    /// Degree-one maps always become `Affine`; anything else must be elementary.
    pub fn from_map(m: &PolyMap) -> Result<Self> {
        if m.degree() <= 1 {
            return Ok(Factor::Affine(AffineMap::from_map(m)?));
        }
        match ElementaryMap::from_map(m) {
            Some(e) => Ok(Factor::Elementary(e)),
            None => Err(Error::NotAutomorphism(format!("{m} is neither affine nor elementary"))),
        }
    }

    pub fn kind(&self) -> FactorKind {
        match self {
            Factor::Affine(a) if a.is_triangular() => FactorKind::Intersection,
            Factor::Affine(_) => FactorKind::Affine,
            Factor::Elementary(_) => FactorKind::Elementary,
        }
    }

    pub fn to_map(&self) -> PolyMap {
        match self {
            Factor::Affine(a) => a.to_map(),
            Factor::Elementary(e) => e.to_map(),
        }
    }

    pub fn inverse(&self) -> Result<Factor> {
        Ok(match self {
            Factor::Affine(a) => Factor::Affine(a.inverse()),
            Factor::Elementary(e) => Factor::Elementary(e.inverse()?),
        })
    }

    /// Degree of the factor's non-linear part (1 for affine factors).
    pub fn degree(&self) -> u32 {
        match self {
            Factor::Affine(_) => 1,
            Factor::Elementary(e) => e.degree(),
        }
    }

    fn is_identity(&self) -> bool {
        self.to_map().is_identity()
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Affine(a) => write!(f, "Affine{}", a.to_map()),
            Factor::Elementary(e) => write!(f, "Elementary{}", e.to_map()),
        }
    }
}

/// `factors[0] ∘ factors[1] ∘ ... ∘ factors[n-1]`, alternating after reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JungWord {
    pub factors: Vec<Factor>,
}

impl JungWord {
    pub fn recompose(&self) -> Result<PolyMap> {
        let field = self.field();
        let mut acc = PolyMap::identity(&field);
        for f in self.factors.iter().rev() {
            acc = f.to_map().compose(&acc)?;
        }
        Ok(acc)
    }

    pub fn field(&self) -> Field {
        self.factors[0].to_map().field().clone()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Number of elementary (non-affine) factors.
    pub fn elementary_count(&self) -> usize {
        self.factors.iter().filter(|f| f.kind() == FactorKind::Elementary).count()
    }

    /// Builds a word from arbitrary factors and reduces it.
    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        Ok(JungWord { factors: reduce(factors)? })
    }
}

fn merge(a: &Factor, b: &Factor) -> Result<Factor> {
    Factor::from_map(&a.to_map().compose(&b.to_map())?)
}

/// Merges same-kind neighbours and absorbs intersection factors into their
/// right-hand neighbour (the left one for a trailing factor).
pub(crate) fn reduce(mut fs: Vec<Factor>) -> Result<Vec<Factor>> {
    if fs.is_empty() {
        return Err(Error::InvalidInput("empty word".into()));
    }
    let identity = Factor::from_map(&PolyMap::identity(&fs[0].to_map().field().clone()))?;
    loop {
        if fs.len() > 1 {
            fs.retain(|f| !f.is_identity());
            if fs.is_empty() {
                fs.push(identity.clone());
            }
        }
        let mut changed = false;
        let n = fs.len();
        for i in 0..n {
            if n == 1 {
                break;
            }
            if fs[i].kind() == FactorKind::Intersection {
                if i + 1 < n {
                    let m = merge(&fs[i], &fs[i + 1])?;
                    fs.splice(i..=i + 1, [m]);
                } else {
                    let m = merge(&fs[i - 1], &fs[i])?;
                    fs.splice(i - 1..=i, [m]);
                }
                changed = true;
                break;
            }
            if i + 1 < n && fs[i].kind() == fs[i + 1].kind() {
                let m = merge(&fs[i], &fs[i + 1])?;
                fs.splice(i..=i + 1, [m]);
                changed = true;
                break;
            }
        }
        if !changed {
            return Ok(fs);
        }
    }
}

/// Writes an automorphism as an alternating word by repeated degree reduction.
///
/// Failure of the reduction at any step proves the input is not an automorphism.
///
/// A completed word of invertible factors that recomposes to `f` is itself the
/// proof that `f` is invertible, so the Jacobian is only computed to explain a failure.
pub fn jung_decompose(f: &PolyMap) -> Result<JungWord> {
    match peel(f) {
        Err(Error::NotAutomorphism(reason)) => {
            let jac = jacobian_det(f);
            if jac.constant_nonzero {
                Err(Error::NotAutomorphism(reason))
            } else {
                Err(Error::NotAutomorphism(format!("Jacobian determinant {} is not a nonzero constant", jac.det)))
            }
        }
        other => other,
    }
}

fn peel(f: &PolyMap) -> Result<JungWord> {
    let field = f.field().clone();
    let swap = PolyMap::swap(&field);
    let mut h = f.clone();
    let mut left: Vec<Factor> = Vec::new();
    loop {
        let (p, q) = h.components();
        let d1 = p.degree().unwrap_or(0);
        let d2 = q.degree().unwrap_or(0);
        if d1.max(d2) <= 1 {
            left.push(Factor::Affine(AffineMap::from_map(&h)?));
            break;
        }
        if d2 > d1 {
            left.push(Factor::from_map(&swap)?);
            h = swap.compose(&h)?;
            continue;
        }
        if d2 == 0 || d1 % d2 != 0 {
            return Err(Error::NotAutomorphism(format!("component degrees {d1} and {d2} admit no reduction")));
        }
        let k = d1 / d2;
        let ptop = p.leading_form();
        let qk = q.leading_form().pow(k)?;
        let (_, lp) = ptop.leading_term().expect("nonzero");
        let (_, lq) = qk.leading_term().expect("nonzero");
        let c = lp.try_div(lq)?;
        if ptop != qk.scale(&c) {
            return Err(Error::NotAutomorphism(format!(
                "leading form of {p} is not a multiple of a power of the leading form of {q}"
            )));
        }
        // h = (x + c y^k, y) ∘ (p - c q^k, q)
        let step = PolyMap::new(
            &PlanePoly::x(&field) + &PlanePoly::monomial(c.clone(), 0, k),
            PlanePoly::y(&field),
        )?;
        left.push(Factor::from_map(&step)?);
        let reduced_p = p - &q.pow(k)?.scale(&c);
        h = PolyMap::new(reduced_p, q.clone())?;
    }
    let word = JungWord::from_factors(left)?;
    if word.recompose()? != *f {
        return Err(Error::InvalidInput("decomposition failed to recompose".into()));
    }
    Ok(word)
}
