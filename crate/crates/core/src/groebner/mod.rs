//! Sparse multivariate polynomials over a number field and Buchberger's algorithm
//! in graded reverse-lexicographic order.

mod solve;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

pub use solve::{eliminant, field_roots, integral_form, solve_points, PointSet, ResidualSystem};

/// Exponent vector compared in graded reverse-lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u16>);

impl Mono {
    pub fn one(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Mono(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other`, assuming divisibility.
    pub fn div(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn coprime(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// `Some(i)` when this is a pure power of variable `i`.
    pub fn pure_power_of(&self) -> Option<usize> {
        let nz: Vec<usize> = (0..self.0.len()).filter(|&i| self.0[i] > 0).collect();
        (nz.len() == 1).then(|| nz[0])
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (a, b) in self.0.iter().zip(&other.0).rev() {
                if a != b {
                    // smaller exponent in the last differing variable is larger
                    return b.cmp(a);
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Polynomial in `nvars` variables; terms ascending, leading term last.
#[derive(Clone, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    field: Field,
    terms: Vec<(Mono, FieldElement)>,
}

impl MPoly {
    pub fn zero(field: &Field, nvars: usize) -> Self {
        MPoly { nvars, field: field.clone(), terms: Vec::new() }
    }

    pub fn constant(c: FieldElement, nvars: usize) -> Self {
        let field = c.field().clone();
        if c.is_zero() {
            return Self::zero(&field, nvars);
        }
        MPoly { nvars, field, terms: vec![(Mono::one(nvars), c)] }
    }

    pub fn one(field: &Field, nvars: usize) -> Self {
        Self::constant(FieldElement::one(field), nvars)
    }

    pub fn var(field: &Field, nvars: usize, i: usize) -> Self {
        MPoly { nvars, field: field.clone(), terms: vec![(Mono::var(nvars, i), FieldElement::one(field))] }
    }

    pub fn from_terms(field: &Field, nvars: usize, terms: impl IntoIterator<Item = (Mono, FieldElement)>) -> Self {
        let mut acc: BTreeMap<Mono, FieldElement> = BTreeMap::new();
        for (m, c) in terms {
            debug_assert_eq!(m.0.len(), nvars);
            let slot = acc.entry(m).or_insert_with(|| FieldElement::zero(field));
            *slot = &*slot + &c;
        }
        MPoly { nvars, field: field.clone(), terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn terms(&self) -> &[(Mono, FieldElement)] {
        &self.terms
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

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    pub fn lt(&self) -> Option<(&Mono, &FieldElement)> {
        self.terms.last().map(|(m, c)| (m, c))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn max_height_digits(&self) -> usize {
        self.terms.iter().map(|(_, c)| c.height_digits()).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> FieldElement {
        match self.terms.first() {
            Some((m, c)) if m.is_one() => c.clone(),
            _ => FieldElement::zero(&self.field),
        }
    }

    /// Merges `self + c * m * other`.
    pub fn add_scaled(&self, other: &MPoly, c: &FieldElement, m: &Mono) -> MPoly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = self.terms.iter().peekable();
        let mut b = other.terms.iter().map(|(bm, bc)| (bm.mul(m), bc * c)).peekable();
        loop {
            let ord = match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (Some((am, _)), Some((bm, _))) => am.cmp(bm),
            };
            match ord {
                Ordering::Less => out.push(a.next().expect("peeked").clone()),
                Ordering::Greater => out.push(b.next().expect("peeked")),
                Ordering::Equal => {
                    let (am, ac) = a.next().expect("peeked");
                    let (_, bc) = b.next().expect("peeked");
                    let s = ac + &bc;
                    if !s.is_zero() {
                        out.push((am.clone(), s));
                    }
                }
            }
        }
        MPoly { nvars: self.nvars, field: self.field.clone(), terms: out }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        self.add_scaled(other, &FieldElement::one(&self.field), &Mono::one(self.nvars))
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add_scaled(other, &-&FieldElement::one(&self.field), &Mono::one(self.nvars))
    }

    pub fn scale(&self, c: &FieldElement) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(&self.field, self.nvars);
        }
        MPoly { nvars: self.nvars, field: self.field.clone(), terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        let mut acc = MPoly::zero(&self.field, self.nvars);
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        for (m, c) in &small.terms {
            acc = acc.add_scaled(big, c, m);
        }
        acc
    }

    pub fn pow(&self, n: u32) -> MPoly {
        let mut acc = MPoly::one(&self.field, self.nvars);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn monic(&self) -> Result<MPoly> {
        let (_, c) = self.lt().ok_or(Error::DivisionByZero)?;
        Ok(self.scale(&c.inv()?))
    }

    pub fn derivative(&self, var: usize) -> MPoly {
        let terms = self.terms.iter().filter(|(m, _)| m.0[var] > 0).map(|(m, c)| {
            let mut e = m.clone();
            let k = e.0[var];
            e.0[var] -= 1;
            (e, c * &FieldElement::from_int(&self.field, k as i64))
        });
        MPoly::from_terms(&self.field, self.nvars, terms)
    }

    /// Substitutes polynomials for every variable (all in `nvars_out` variables).
    pub fn substitute(&self, values: &[MPoly]) -> MPoly {
        let nv = values[0].nvars;
        let mut powers: Vec<Vec<MPoly>> = values.iter().map(|v| vec![MPoly::one(&self.field, nv), v.clone()]).collect();
        let mut acc = MPoly::zero(&self.field, nv);
        for (m, c) in &self.terms {
            let mut t = MPoly::constant(c.clone(), nv);
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().expect("nonempty").mul(&values[i]);
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][e as usize]);
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Replaces variable `var` by the constant `value`.
    pub fn substitute_value(&self, var: usize, value: &FieldElement) -> MPoly {
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = m.clone();
            let k = e.0[var];
            e.0[var] = 0;
            (e, c * &value.pow(k as i64).expect("nonnegative power"))
        });
        MPoly::from_terms(&self.field, self.nvars, terms)
    }

    pub fn eval(&self, point: &[FieldElement]) -> FieldElement {
        let mut acc = FieldElement::zero(&self.field);
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = &t * &point[i].pow(e as i64).expect("nonnegative power");
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Splits off the variables in `split`: map from their exponents to the
    /// coefficient polynomial (which no longer involves them).
    pub fn coefficients_in(&self, split: &[usize]) -> BTreeMap<Vec<u16>, MPoly> {
        let mut out: BTreeMap<Vec<u16>, Vec<(Mono, FieldElement)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let key: Vec<u16> = split.iter().map(|&v| m.0[v]).collect();
            let mut rest = m.clone();
            for &v in split {
                rest.0[v] = 0;
            }
            out.entry(key).or_default().push((rest, c.clone()));
        }
        out.into_iter().map(|(k, t)| (k, MPoly::from_terms(&self.field, self.nvars, t))).collect()
    }

    /// `Some((var, c))` when the polynomial is `var - c` up to scaling.
    pub fn as_assignment(&self) -> Option<(usize, FieldElement)> {
        let (m, lc) = self.lt()?;
        let var = m.pure_power_of().filter(|&v| m.0[v] == 1)?;
        if self.terms.len() > 2 || (self.terms.len() == 2 && !self.terms[0].0.is_one()) {
            return None;
        }
        let c = -&(&self.constant_term() * &lc.inv().ok()?);
        Some((var, c))
    }

    /// Drops trailing variables that do not occur.
    pub fn truncate_vars(&self, n: usize) -> MPoly {
        debug_assert!(self.terms.iter().all(|(m, _)| m.0[n..].iter().all(|&e| e == 0)));
        let terms = self.terms.iter().map(|(m, c)| (Mono(m.0[..n].to_vec()), c.clone()));
        MPoly::from_terms(&self.field, n, terms)
    }

    pub fn lift(&self, target: &Field) -> Result<MPoly> {
        let terms: Result<Vec<_>> = self.terms.iter().map(|(m, c)| Ok((m.clone(), c.lift(target)?))).collect();
        Ok(MPoly { nvars: self.nvars, field: target.clone(), terms: terms? })
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().rev().map(|(m, c)| format!("({c}){m:?}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroebnerConfig {
    pub max_pairs: usize,
    pub max_height_digits: usize,
    /// Degree-truncation guard on S-pair lcms.
    pub max_degree: u32,
}

impl Default for GroebnerConfig {
    fn default() -> Self {
        GroebnerConfig { max_pairs: 100_000, max_height_digits: 10_000, max_degree: 64 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroebnerStats {
    pub pairs_processed: usize,
    pub pairs_skipped_coprime: usize,
    pub pairs_skipped_chain: usize,
}

/// Full reduction of `p` modulo `basis`.
pub fn normal_form(p: &MPoly, basis: &[MPoly]) -> MPoly {
    let mut rest = p.clone();
    let mut out: Vec<(Mono, FieldElement)> = Vec::new();
    while let Some((m, c)) = rest.terms.last().cloned() {
        match basis.iter().find(|g| g.lt().is_some_and(|(gm, _)| gm.divides(&m))) {
            Some(g) => {
                let (gm, gc) = g.lt().expect("nonzero");
                let factor = -&c.try_div(gc).expect("nonzero leading coefficient");
                rest = rest.add_scaled(g, &factor, &m.div(gm));
            }
            None => {
                out.push(rest.terms.pop().expect("nonempty"));
            }
        }
    }
    out.reverse();
    MPoly { nvars: p.nvars, field: p.field.clone(), terms: out }
}

fn s_polynomial(f: &MPoly, g: &MPoly) -> MPoly {
    let (fm, fc) = f.lt().expect("nonzero");
    let (gm, gc) = g.lt().expect("nonzero");
    let l = fm.lcm(gm);
    let left = MPoly::zero(&f.field, f.nvars).add_scaled(f, &fc.inv().expect("nonzero"), &l.div(fm));
    left.add_scaled(g, &-&gc.inv().expect("nonzero"), &l.div(gm))
}

/// Reduced Gröbner basis (monic, sorted by leading monomial).
pub fn groebner_basis(input: &[MPoly], cfg: &GroebnerConfig) -> Result<(Vec<MPoly>, GroebnerStats)> {
    let mut stats = GroebnerStats::default();
    let mut basis: Vec<MPoly> = Vec::new();
    let mut pairs: Vec<(usize, usize, Mono)> = Vec::new();
    let mut gens: Vec<MPoly> = input.iter().filter(|p| !p.is_zero()).cloned().collect();
    gens.sort_by(|a, b| a.lt().map(|t| t.0).cmp(&b.lt().map(|t| t.0)));

    let add = |h: MPoly, basis: &mut Vec<MPoly>, pairs: &mut Vec<(usize, usize, Mono)>, stats: &mut GroebnerStats| -> Result<bool> {
        let h = h.monic()?;
        if h.max_height_digits() > cfg.max_height_digits {
            return Err(Error::ResourceCap(format!("coefficient height exceeds {} digits", cfg.max_height_digits)));
        }
        let is_one = h.is_constant();
        let t = basis.len();
        let hm = h.lt().expect("nonzero").0.clone();
        // chain criterion on existing pairs
        pairs.retain(|(i, j, l)| {
            let drop = hm.divides(l)
                && basis[*i].lt().expect("nonzero").0.lcm(&hm) != *l
                && basis[*j].lt().expect("nonzero").0.lcm(&hm) != *l;
            if drop {
                stats.pairs_skipped_chain += 1;
            }
            !drop
        });
        for (i, g) in basis.iter().enumerate() {
            let gm = g.lt().expect("nonzero").0;
            if gm.coprime(&hm) {
                stats.pairs_skipped_coprime += 1;
                continue;
            }
            pairs.push((i, t, gm.lcm(&hm)));
        }
        basis.push(h);
        Ok(is_one)
    };

    for g in gens {
        let r = normal_form(&g, &basis);
        if !r.is_zero() && add(r, &mut basis, &mut pairs, &mut stats)? {
            return Ok((vec![MPoly::one(&input[0].field, input[0].nvars)], stats));
        }
    }
    while !pairs.is_empty() {
        // normal selection strategy: smallest lcm first
        let k = (0..pairs.len()).min_by(|&a, &b| pairs[a].2.cmp(&pairs[b].2)).expect("nonempty");
        let (i, j, l) = pairs.swap_remove(k);
        stats.pairs_processed += 1;
        if stats.pairs_processed > cfg.max_pairs {
            return Err(Error::ResourceCap(format!("more than {} S-pairs", cfg.max_pairs)));
        }
        if l.degree() > cfg.max_degree {
            return Err(Error::ResourceCap(format!("S-pair degree {} exceeds the guard {}", l.degree(), cfg.max_degree)));
        }
        let s = s_polynomial(&basis[i], &basis[j]);
        let r = normal_form(&s, &basis);
        if !r.is_zero() && add(r, &mut basis, &mut pairs, &mut stats)? {
            return Ok((vec![MPoly::one(&input[0].field, input[0].nvars)], stats));
        }
    }
    Ok((reduce_basis(basis)?, stats))
}

/// Minimal, interreduced, monic basis sorted by leading monomial.
fn reduce_basis(basis: Vec<MPoly>) -> Result<Vec<MPoly>> {
    let mut minimal: Vec<MPoly> = Vec::new();
    for (k, g) in basis.iter().enumerate() {
        let gm = g.lt().expect("nonzero").0;
        let redundant = basis.iter().enumerate().any(|(l, h)| {
            let hm = h.lt().expect("nonzero").0;
            l != k && hm.divides(gm) && (hm != gm || l < k)
        });
        if !redundant {
            minimal.push(g.clone());
        }
    }
    let mut out = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let others: Vec<MPoly> = minimal.iter().enumerate().filter(|(l, _)| *l != k).map(|(_, g)| g.clone()).collect();
        out.push(normal_form(&minimal[k], &others).monic()?);
    }
    out.sort_by(|a, b| a.lt().expect("nonzero").0.cmp(b.lt().expect("nonzero").0));
    Ok(out)
}

pub fn is_trivial(basis: &[MPoly]) -> bool {
    basis.iter().any(|g| !g.is_zero() && g.is_constant())
}

/// Finitely many solutions over the algebraic closure: every variable has a
/// pure power among the leading monomials.
pub fn is_zero_dimensional(basis: &[MPoly]) -> bool {
    let Some(first) = basis.first() else { return false };
    if is_trivial(basis) {
        return true;
    }
    (0..first.nvars).all(|v| basis.iter().any(|g| g.lt().is_some_and(|(m, _)| m.pure_power_of() == Some(v))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn q() -> Field {
        FieldSpec::rationals()
    }

    fn p(terms: &[(i64, &[u16])]) -> MPoly {
        let k = q();
        let n = terms[0].1.len();
        MPoly::from_terms(&k, n, terms.iter().map(|(c, e)| (Mono(e.to_vec()), FieldElement::from_int(&k, *c))))
    }

    #[test]
    fn grevlex_order() {
        // x > y > z with x^2 > x y > y^2 > x z in degree 2 grevlex
        let xx = Mono(vec![2, 0, 0]);
        let xy = Mono(vec![1, 1, 0]);
        let yy = Mono(vec![0, 2, 0]);
        let xz = Mono(vec![1, 0, 1]);
        assert!(xx > xy && xy > yy && yy > xz);
        assert!(Mono(vec![0, 0, 3]) > xx);
    }

    #[test]
    fn circle_and_line() {
        // x^2 + y^2 - 1, x - y  → y^2 - 1/2 after reduction
        let f = p(&[(1, &[2, 0]), (1, &[0, 2]), (-1, &[0, 0])]);
        let g = p(&[(1, &[1, 0]), (-1, &[0, 1])]);
        let (basis, _) = groebner_basis(&[f.clone(), g.clone()], &GroebnerConfig::default()).unwrap();
        assert!(is_zero_dimensional(&basis));
        assert!(normal_form(&f, &basis).is_zero() && normal_form(&g, &basis).is_zero());
        for a in &basis {
            for b in &basis {
                if a != b {
                    assert!(normal_form(&s_polynomial(a, b), &basis).is_zero());
                }
            }
        }
    }

    #[test]
    fn inconsistent_system_is_trivial() {
        let f = p(&[(1, &[1, 1]), (-1, &[0, 0])]);
        let g = p(&[(1, &[1, 0])]);
        let (basis, _) = groebner_basis(&[f, g], &GroebnerConfig::default()).unwrap();
        assert!(is_trivial(&basis));
    }

    #[test]
    fn substitution_and_derivative() {
        let f = p(&[(1, &[2, 1]), (3, &[0, 0])]); // x^2 y + 3
        let k = q();
        let x = MPoly::var(&k, 2, 0);
        let y = MPoly::var(&k, 2, 1);
        let g = f.substitute(&[y.clone(), x.clone()]); // y^2 x + 3
        assert_eq!(g, p(&[(1, &[1, 2]), (3, &[0, 0])]));
        assert_eq!(f.derivative(0), p(&[(2, &[1, 1])]));
    }
}
