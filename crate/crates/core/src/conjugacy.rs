//! Polynomial conjugacy between loxodromic automorphisms: invariant screens,
//! coefficient systems, exact solving and certificates.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::automorphism::{classify, invert_map, jacobian_det, jung_decompose, Class, HenonForm, JungWord, PolyMap, Witness};
use crate::error::{Error, Result};
use crate::field::{same_field, Field, FieldElement, FieldSpec};
use crate::groebner::{integral_form, solve_points, GroebnerConfig, MPoly, Mono, PointSet};
use crate::periodic::{multiplier_spectrum, spectra_match, MAX_PERIODIC_COUNT};
use crate::poly::PlanePoly;
use crate::radical::{radical_extension, rational_root};

/// `2^57 (df dg)^29`, exactly.
pub fn conjugacy_degree_bound(df: u64, dg: u64) -> Result<BigInt> {
    if df < 2 || dg < 2 {
        return Err(Error::InvalidInput("loxodromic maps have degree at least 2".into()));
    }
    Ok(BigInt::from(2).pow(57) * BigInt::from(df * dg).pow(29))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefutationReason {
    Lambda1Mismatch,
    JacobianMismatch,
    MultiplierMismatch,
    ExhaustedDegreeCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refutation {
    pub reason: RefutationReason,
    pub data: Value,
}

impl Refutation {
    /// Multiplier refutations depend on floating-point tolerances.
    pub fn is_numeric(&self) -> bool {
        self.reason == RefutationReason::MultiplierMismatch
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Screen {
    Pass { periods_checked: u32 },
    Refuted(Refutation),
}

fn loxodromic_form(f: &PolyMap) -> Result<(u64, HenonForm)> {
    let c = classify(f)?;
    match (c.class, c.witness) {
        (Class::Loxodromic, Witness::Loxodromic(h)) => Ok((c.lambda1, h)),
        _ => Err(Error::NotLoxodromic),
    }
}

/// Lifts both maps to a common field (one of them may be over Q).
pub fn common_field(f: &PolyMap, g: &PolyMap) -> Result<(PolyMap, PolyMap)> {
    if same_field(f.field(), g.field()) {
        return Ok((f.clone(), g.clone()));
    }
    if f.field().is_rationals() {
        return Ok((f.lift(g.field())?, g.clone()));
    }
    if g.field().is_rationals() {
        return Ok((f.clone(), g.lift(f.field())?));
    }
    Err(Error::FieldMismatch)
}

/// λ1, constant Jacobian, then multiplier spectra for periods up to `max_period`
/// (periods whose point count exceeds the elimination cap are skipped).
pub fn screen_invariants(f: &PolyMap, g: &PolyMap, max_period: u32, tol: f64) -> Result<Screen> {
    let (f, g) = common_field(f, g)?;
    let (lf, hf) = loxodromic_form(&f)?;
    let (lg, hg) = loxodromic_form(&g)?;
    if lf != lg {
        return Ok(Screen::Refuted(Refutation {
            reason: RefutationReason::Lambda1Mismatch,
            data: json!({ "f": lf, "g": lg }),
        }));
    }
    // Conjugation preserves a constant Jacobian, so the normal forms carry it.
    let (jf, jg) = (hf.jacobian(), hg.jacobian());
    if jf != jg {
        return Ok(Screen::Refuted(Refutation {
            reason: RefutationReason::JacobianMismatch,
            data: json!({ "f": jf.to_string(), "g": jg.to_string() }),
        }));
    }
    let mut periods = 0;
    for n in 1..=max_period {
        if (lf as f64).powi(n as i32) > MAX_PERIODIC_COUNT as f64 {
            break;
        }
        periods = n;
    }
    if periods > 0 {
        let sf = multiplier_spectrum(&hf, periods)?;
        let sg = multiplier_spectrum(&hg, periods)?;
        if !spectra_match(&sf, &sg, tol) {
            let show = |s: &[crate::periodic::SpectrumEntry]| -> Vec<Value> {
                s.iter()
                    .map(|e| json!({ "period": e.period, "multipliers": [
                        [e.multipliers.0.re, e.multipliers.0.im], [e.multipliers.1.re, e.multipliers.1.im]] }))
                    .collect()
            };
            return Ok(Screen::Refuted(Refutation {
                reason: RefutationReason::MultiplierMismatch,
                data: json!({ "numeric": true, "tolerance": tol, "max_period": periods, "f": show(&sf), "g": show(&sg) }),
            }));
        }
    }
    Ok(Screen::Pass { periods_checked: periods })
}

/// Builds polynomials in `unknowns + (x, y)`.
struct Scaffold {
    field: Field,
    unknowns: usize,
}

impl Scaffold {
    fn nvars(&self) -> usize {
        self.unknowns + 2
    }

    fn var(&self, i: usize) -> MPoly {
        MPoly::var(&self.field, self.nvars(), i)
    }

    fn x(&self) -> MPoly {
        self.var(self.unknowns)
    }

    fn plane(&self, p: &PlanePoly) -> MPoly {
        let n = self.nvars();
        MPoly::from_terms(
            &self.field,
            n,
            p.terms().map(|(e, c)| {
                let mut m = Mono::one(n);
                m.0[n - 2] = e.i as u16;
                m.0[n - 1] = e.j as u16;
                (m, c.clone())
            }),
        )
    }

    /// Unknown polynomial `sum u_{first+k} x^i y^j` over the given monomials.
    fn generic(&self, first: usize, monomials: &[(u32, u32)]) -> MPoly {
        let n = self.nvars();
        MPoly::from_terms(
            &self.field,
            n,
            monomials.iter().enumerate().map(|(k, &(i, j))| {
                let mut m = Mono::var(n, first + k);
                m.0[n - 2] = i as u16;
                m.0[n - 1] = j as u16;
                (m, FieldElement::one(&self.field))
            }),
        )
    }

    /// `p(X, Y)` where `p` is written in the (x, y) slots.
    fn compose(&self, p: &MPoly, xv: &MPoly, yv: &MPoly) -> MPoly {
        let mut values: Vec<MPoly> = (0..self.unknowns).map(|i| self.var(i)).collect();
        values.push(xv.clone());
        values.push(yv.clone());
        p.substitute(&values)
    }

    /// Coefficients in `(x, y)` as polynomials in the unknowns only.
    fn split(&self, p: &MPoly) -> BTreeMap<(u16, u16), MPoly> {
        p.coefficients_in(&[self.unknowns, self.unknowns + 1])
            .into_iter()
            .map(|(k, c)| ((k[0], k[1]), c.truncate_vars(self.unknowns)))
            .collect()
    }
}

/// Monomials `x^i y^j` with `i + j <= d`, in graded order.
pub fn monomials_up_to(d: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for t in 0..=d {
        for i in (0..=t).rev() {
            out.push((i, t - i));
        }
    }
    out
}

/// Coefficient equations of `psi ∘ f = g ∘ psi` for `deg psi <= D`.
#[derive(Debug, Clone)]
pub struct ConjugacySystem {
    pub degree_cap: u32,
    pub field: Field,
    /// Monomial slots of each component of `psi`.
    pub monomials: Vec<(u32, u32)>,
    /// Unknowns: first component coefficients, second component coefficients, then `v`.
    pub unknowns: usize,
    /// One entry per (component, monomial of degree <= D·max(deg f, deg g)); may be zero.
    pub matching: Vec<MPoly>,
    /// `J0 v - 1` for the constant Jacobian term `J0`, then the nonconstant Jacobian coefficients.
    pub nondegeneracy: Vec<MPoly>,
}

impl ConjugacySystem {
    pub fn equation_count(&self) -> usize {
        self.matching.len() + self.nondegeneracy.len()
    }

    pub fn polynomials(&self) -> Vec<MPoly> {
        self.matching.iter().chain(&self.nondegeneracy).filter(|p| !p.is_zero()).cloned().collect()
    }

    /// Coefficient vector of a candidate `psi` (with `v = 1/J0`).
    pub fn assignment(&self, psi: &PolyMap) -> Result<Vec<FieldElement>> {
        let mut out = Vec::with_capacity(self.unknowns);
        for comp in [psi.p(), psi.q()] {
            if comp.degree().unwrap_or(0) > self.degree_cap {
                return Err(Error::InvalidInput("candidate exceeds the degree cap".into()));
            }
            out.extend(self.monomials.iter().map(|&(i, j)| comp.coeff(i, j)));
        }
        out.push(jacobian_det(psi).det.constant_term().inv()?);
        Ok(out)
    }

    pub fn map_from(&self, point: &[FieldElement]) -> Result<PolyMap> {
        let m = self.monomials.len();
        let comp = |off: usize| {
            PlanePoly::from_terms(&self.field, self.monomials.iter().enumerate().map(|(k, &(i, j))| (i, j, point[off + k].clone())))
        };
        PolyMap::new(comp(0), comp(m))
    }
}

pub const DEFAULT_MAX_UNKNOWNS: usize = 31;

pub fn conjugacy_equations(f: &PolyMap, g: &PolyMap, degree_cap: u32) -> Result<ConjugacySystem> {
    conjugacy_equations_capped(f, g, degree_cap, DEFAULT_MAX_UNKNOWNS)
}

pub fn conjugacy_equations_capped(f: &PolyMap, g: &PolyMap, degree_cap: u32, max_unknowns: usize) -> Result<ConjugacySystem> {
    if degree_cap == 0 {
        return Err(Error::InvalidInput("degree cap must be at least 1".into()));
    }
    let (f, g) = common_field(f, g)?;
    let monomials = monomials_up_to(degree_cap);
    let m = monomials.len();
    let unknowns = 2 * m + 1;
    if unknowns > max_unknowns {
        return Err(Error::ResourceCap(format!("{unknowns} unknowns exceed the cap {max_unknowns}")));
    }
    let field = f.field().clone();
    let s = Scaffold { field: field.clone(), unknowns };
    let psi1 = s.generic(0, &monomials);
    let psi2 = s.generic(m, &monomials);
    let (f1, f2) = (s.plane(f.p()), s.plane(f.q()));
    let (g1, g2) = (s.plane(g.p()), s.plane(g.q()));
    let lhs1 = s.compose(&psi1, &f1, &f2);
    let lhs2 = s.compose(&psi2, &f1, &f2);
    let rhs1 = s.compose(&g1, &psi1, &psi2);
    let rhs2 = s.compose(&g2, &psi1, &psi2);
    let top = degree_cap * f.degree().max(g.degree());
    let mut matching = Vec::new();
    for diff in [lhs1.sub(&rhs1), lhs2.sub(&rhs2)] {
        let coeffs = s.split(&diff);
        for (i, j) in monomials_up_to(top) {
            matching.push(coeffs.get(&(i as u16, j as u16)).cloned().unwrap_or_else(|| MPoly::zero(&field, unknowns)));
        }
    }
    let (x, y) = (unknowns, unknowns + 1);
    let jac = psi1.derivative(x).mul(&psi2.derivative(y)).sub(&psi1.derivative(y).mul(&psi2.derivative(x)));
    let v = MPoly::var(&field, unknowns, unknowns - 1);
    let mut nondegeneracy = Vec::new();
    for ((i, j), c) in s.split(&jac) {
        if i == 0 && j == 0 {
            nondegeneracy.insert(0, c.mul(&v).sub(&MPoly::one(&field, unknowns)));
        } else {
            nondegeneracy.push(c);
        }
    }
    Ok(ConjugacySystem { degree_cap, field, monomials, unknowns, matching, nondegeneracy })
}

/// A conjugacy `psi ∘ f = g ∘ psi`, verified by exact recomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyCertificate {
    pub psi: PolyMap,
    pub checked_identity: bool,
    pub automorphism_witness: JungWord,
}

impl ConjugacyCertificate {
    pub fn field(&self) -> &Field {
        self.psi.field()
    }
}

/// `Some` only when `psi ∘ f = g ∘ psi` holds exactly and `psi` decomposes.
pub fn certify(psi: &PolyMap, f: &PolyMap, g: &PolyMap) -> Result<Option<ConjugacyCertificate>> {
    let k = psi.field();
    let lift = |m: &PolyMap| if same_field(m.field(), k) { Ok(m.clone()) } else { m.lift(k) };
    let (f, g) = (lift(f)?, lift(g)?);
    if psi.compose(&f)? != g.compose(psi)? {
        return Ok(None);
    }
    let witness = match jung_decompose(psi) {
        Ok(w) => w,
        Err(Error::NotAutomorphism(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if witness.recompose()? != *psi {
        return Ok(None);
    }
    Ok(Some(ConjugacyCertificate { psi: psi.clone(), checked_identity: true, automorphism_witness: witness }))
}

/// `alpha^e0 beta^e1 = c`.
#[derive(Debug, Clone)]
struct Binomial {
    e: [i64; 2],
    c: BigRational,
}

fn rat_pow(c: &BigRational, k: i64) -> Option<BigRational> {
    if k >= 0 {
        Some(num_traits::pow(c.clone(), k as usize))
    } else if c.is_zero() {
        None
    } else {
        Some(num_traits::pow(c.recip(), (-k) as usize))
    }
}

/// Triangularises the exponent lattice: returns `(alpha-row, beta-row)` or `None` if inconsistent.
fn reduce_binomials(mut rows: Vec<Binomial>) -> Option<(Option<Binomial>, Option<Binomial>)> {
    fn eliminate(rows: &mut Vec<Binomial>, col: usize) -> Option<Binomial> {
        loop {
            let mut live: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].e[col] != 0).collect();
            if live.len() <= 1 {
                return live.pop().map(|i| rows.remove(i));
            }
            live.sort_by_key(|&i| rows[i].e[col].abs());
            let (p, q) = (live[0], live[1]);
            let t = rows[q].e[col] / rows[p].e[col];
            let cp = rat_pow(&rows[p].c, t)?;
            let new = Binomial { e: [rows[q].e[0] - t * rows[p].e[0], rows[q].e[1] - t * rows[p].e[1]], c: &rows[q].c / cp };
            rows[q] = new;
        }
    }
    let a = eliminate(&mut rows, 0);
    let b = eliminate(&mut rows, 1);
    rows.iter().all(|r| r.c.is_one()).then_some((a, b))
}

/// Solves `value^k = c` in the field of `c`, extending Q by a radical when needed.
fn solve_power(c: &FieldElement, k: i64) -> Result<Option<FieldElement>> {
    let (c, k) = if k < 0 { (c.inv()?, -k) } else { (c.clone(), k) };
    if k == 1 {
        return Ok(Some(c));
    }
    let Some(q) = c.as_rational() else { return Ok(None) };
    if let Some(r) = rational_root(q, k as u32) {
        return Ok(Some(FieldElement::from_rational(c.field(), r)));
    }
    if !c.field().is_rationals() {
        return Ok(None);
    }
    match radical_extension(q, k as u32) {
        Ok((_, alpha)) => Ok(Some(alpha)),
        Err(Error::ReducibleRadical(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Tries `psi = (alpha x, beta y)` and `psi = (alpha y, beta x)`.
///
/// Coefficient matching leaves binomial equations `alpha^i beta^j = c`, solved
/// exactly, adjoining a radical when the needed root is irrational.
pub fn solve_diagonal_ansatz(f: &PolyMap, g: &PolyMap) -> Result<Option<ConjugacyCertificate>> {
    let (f, g) = common_field(f, g)?;
    for swapped in [false, true] {
        if let Some(cert) = diagonal_attempt(&f, &g, swapped)? {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

fn diagonal_attempt(f: &PolyMap, g: &PolyMap, swapped: bool) -> Result<Option<ConjugacyCertificate>> {
    let mut rows = Vec::new();
    // psi ∘ f: component k is (alpha or beta) * f_{k or 1-k}; g ∘ psi has x^i y^j from g's (a, b) term.
    let f_comp = |k: usize| if swapped { [f.q(), f.p()][k] } else { [f.p(), f.q()][k] };
    for k in 0..2 {
        let outer = if k == 0 { [1i64, 0] } else { [0, 1] };
        let fk = f_comp(k);
        let gk = if k == 0 { g.p() } else { g.q() };
        let mut keys: Vec<(u32, u32)> = fk.terms().map(|(e, _)| (e.i, e.j)).collect();
        for (e, _) in gk.terms() {
            keys.push(if swapped { (e.j, e.i) } else { (e.i, e.j) });
        }
        keys.sort();
        keys.dedup();
        for (i, j) in keys {
            let fc = fk.coeff(i, j);
            // g term feeding x^i y^j, and the power of alpha, beta it carries
            let (gc, pa, pb) = if swapped { (gk.coeff(j, i), j as i64, i as i64) } else { (gk.coeff(i, j), i as i64, j as i64) };
            match (fc.is_zero(), gc.is_zero()) {
                (true, true) => {}
                (true, false) | (false, true) => return Ok(None),
                (false, false) => {
                    let (Some(fq), Some(gq)) = (fc.as_rational(), gc.as_rational()) else { return Ok(None) };
                    // outer * fc = gc * alpha^pa beta^pb
                    rows.push(Binomial { e: [pa - outer[0], pb - outer[1]], c: fq / gq });
                }
            }
        }
    }
    let Some((arow, brow)) = reduce_binomials(rows) else { return Ok(None) };
    let field = f.field().clone();
    let beta = match &brow {
        Some(b) => match solve_power(&FieldElement::from_rational(&field, b.c.clone()), b.e[1])? {
            Some(v) => v,
            None => return Ok(None),
        },
        None => FieldElement::one(&field),
    };
    let k = beta.field().clone();
    let alpha = match &arow {
        Some(a) => {
            let rhs = &FieldElement::from_rational(&k, a.c.clone()) * &beta.pow(-a.e[1])?;
            match solve_power(&rhs, a.e[0])? {
                Some(v) if same_field(v.field(), &k) || v.field().is_rationals() => v.lift(&k)?,
                _ => return Ok(None),
            }
        }
        None => FieldElement::one(&k),
    };
    let (u, v) = if swapped { ((0, 1), (1, 0)) } else { ((1, 0), (0, 1)) };
    let psi = PolyMap::new(PlanePoly::monomial(alpha, u.0, u.1), PlanePoly::monomial(beta, v.0, v.1))?;
    certify(&psi, f, g)
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub groebner: GroebnerConfig,
    pub max_unknowns: usize,
    /// Skip the direct coefficient system when `D * max(deg f, deg g)` exceeds this.
    pub max_direct_degree: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { groebner: GroebnerConfig::default(), max_unknowns: DEFAULT_MAX_UNKNOWNS, max_direct_degree: 12 }
    }
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Certificate(ConjugacyCertificate),
    Refuted(Refutation),
    /// Neither a certificate nor a refutation; residual systems name the extensions needed.
    Undecided { reason: String, residuals: Vec<ResidualReport> },
}

/// A zero-dimensional system with no further points over the current field.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub route: String,
    pub variable: usize,
    pub eliminant: Vec<String>,
}

fn residual_reports(route: &str, pts: &PointSet) -> Vec<ResidualReport> {
    pts.residuals
        .iter()
        .map(|r| ResidualReport {
            route: route.into(),
            variable: r.var,
            eliminant: r.eliminant.coeffs().iter().map(|c| c.to_string()).collect(),
        })
        .collect()
}

fn henon_factor_inverse(h: &crate::automorphism::HenonFactor) -> Result<PolyMap> {
    let k = h.a.field();
    let p_of_y = h.p.compose(&PlanePoly::y(k), &PlanePoly::x(k))?;
    PolyMap::new(PlanePoly::y(k), (&PlanePoly::x(k) - &p_of_y).scale(&h.a.inv()?))
}

/// Affine chains `chi_{i-1} ∘ H_i = H'_i ∘ chi_i` between two Hénon words of equal length.
fn chain_system(h: &[crate::automorphism::HenonFactor], hp: &[crate::automorphism::HenonFactor]) -> (Scaffold, Vec<MPoly>) {
    let k = h.len();
    let field = h[0].a.field().clone();
    let unknowns = 6 * k + 1;
    let s = Scaffold { field: field.clone(), unknowns };
    let affine = monomials_up_to(1);
    let chi: Vec<(MPoly, MPoly)> = (0..k).map(|i| (s.generic(6 * i, &affine), s.generic(6 * i + 3, &affine))).collect();
    let mut eqs = Vec::new();
    for i in 0..k {
        let prev = &chi[i];
        let next = &chi[(i + 1) % k];
        let (h1, h2) = (s.plane(&(&h[i].p + &PlanePoly::monomial(h[i].a.clone(), 0, 1))), s.x());
        let hp_1 = s.plane(&(&hp[i].p + &PlanePoly::monomial(hp[i].a.clone(), 0, 1)));
        let left = (s.compose(&prev.0, &h1, &h2), s.compose(&prev.1, &h1, &h2));
        let right = (s.compose(&hp_1, &next.0, &next.1), next.0.clone());
        for diff in [left.0.sub(&right.0), left.1.sub(&right.1)] {
            eqs.extend(s.split(&diff).into_values().filter(|p| !p.is_zero()));
        }
    }
    // chi_0 = (u0 + u1 x + u2 y, u3 + u4 x + u5 y); det(chi_0) v = 1
    let u = |t: usize| MPoly::var(&field, unknowns, t);
    let det = u(1).mul(&u(5)).sub(&u(2).mul(&u(4)));
    eqs.push(det.mul(&u(unknowns - 1)).sub(&MPoly::one(&field, unknowns)));
    (s, eqs)
}

fn chain_map(field: &Field, point: &[FieldElement]) -> Result<PolyMap> {
    let affine = monomials_up_to(1);
    let comp = |off: usize| PlanePoly::from_terms(field, affine.iter().enumerate().map(|(k, &(i, j))| (i, j, point[off + k].clone())));
    PolyMap::new(comp(0), comp(3))
}

fn by_degree_then_text(a: &ConjugacyCertificate, b: &ConjugacyCertificate) -> std::cmp::Ordering {
    a.psi
        .degree()
        .cmp(&b.psi.degree())
        .then_with(|| b.psi.is_identity().cmp(&a.psi.is_identity()))
        .then_with(|| a.psi.to_string().cmp(&b.psi.to_string()))
}

struct ChainResult {
    certificates: Vec<ConjugacyCertificate>,
    residuals: Vec<ResidualReport>,
    all_inconsistent: bool,
}

fn chain_route(f: &PolyMap, g: &PolyMap, hf: &HenonForm, hg: &HenonForm, cfg: &GroebnerConfig) -> Result<ChainResult> {
    let k = hf.factors.len();
    let mut out = ChainResult { certificates: Vec::new(), residuals: Vec::new(), all_inconsistent: true };
    if hg.factors.len() != k {
        return Ok(out);
    }
    let field = hf.field().clone();
    let to_g = invert_map(&hg.conjugator)?;
    for r in 0..k {
        let rotated: Vec<_> = hf.factors[r..].iter().chain(&hf.factors[..r]).cloned().collect();
        let degrees_match = rotated.iter().zip(&hg.factors).all(|(a, b)| a.degree() == b.degree());
        if !degrees_match {
            continue;
        }
        let (_, eqs) = chain_system(&rotated, &hg.factors);
        let pts = solve_points(&eqs, cfg)?;
        if !pts.inconsistent {
            out.all_inconsistent = false;
        }
        out.residuals.extend(residual_reports(&format!("normal-form rotation {r}"), &pts));
        for point in &pts.points {
            let psi0 = chain_map(&field, point)?;
            let psi = to_g.compose(&psi0)?.compose(&rotation_inverse(&hf.factors, r)?)?.compose(&hf.conjugator)?;
            if let Some(cert) = certify(&psi, f, g)? {
                out.certificates.push(cert);
            }
        }
    }
    Ok(out)
}

/// Replaces `psi` by `psi ∘ f^{±1}` while that lowers the degree; both conjugate `f` to `g`.
fn lower_by_powers(mut cert: ConjugacyCertificate, f: &PolyMap, finv: &PolyMap, g: &PolyMap) -> Result<ConjugacyCertificate> {
    loop {
        let k = cert.field().clone();
        let mut best: Option<PolyMap> = None;
        for step in [f, finv] {
            let cand = cert.psi.compose(&step.lift(&k)?)?;
            if cand.degree() < best.as_ref().map_or(cert.psi.degree(), PolyMap::degree) {
                best = Some(cand);
            }
        }
        match best.map(|psi| certify(&psi, f, g)).transpose()?.flatten() {
            Some(lower) => cert = lower,
            None => return Ok(cert),
        }
    }
}

/// `(H_1 ∘ ... ∘ H_r)^{-1}`.
fn rotation_inverse(factors: &[crate::automorphism::HenonFactor], r: usize) -> Result<PolyMap> {
    let field = factors[0].a.field().clone();
    let mut acc = PolyMap::identity(&field);
    for h in &factors[..r] {
        acc = henon_factor_inverse(h)?.compose(&acc)?;
    }
    Ok(acc)
}

/// Searches conjugacies `psi ∘ f = g ∘ psi`.
///
/// The normal-form route solves for affine chains between the Hénon words of
/// `f` and `g` (every rotation), which covers all conjugacies between cyclically
/// reduced words; the direct route solves the coefficient system of
/// [`conjugacy_equations`] at degree `D` when its size allows.
pub fn solve_bounded_degree(f: &PolyMap, g: &PolyMap, degree_cap: u32, opts: &SolveOptions) -> Result<SolveOutcome> {
    let (f, g) = common_field(f, g)?;
    let (lf, hf) = loxodromic_form(&f)?;
    let (lg, hg) = loxodromic_form(&g)?;
    if lf != lg {
        return Ok(SolveOutcome::Refuted(Refutation { reason: RefutationReason::Lambda1Mismatch, data: json!({ "f": lf, "g": lg }) }));
    }
    let mut residuals = Vec::new();
    let mut caps = Vec::new();
    let chain = match chain_route(&f, &g, &hf, &hg, &opts.groebner) {
        Ok(c) => Some(c),
        Err(e) if e.is_cap() => {
            caps.push(e.to_string());
            None
        }
        Err(e) => return Err(e),
    };
    if let Some(mut c) = chain {
        if !c.certificates.is_empty() {
            let finv = invert_map(&f)?;
            c.certificates = c.certificates.into_iter().map(|cert| lower_by_powers(cert, &f, &finv, &g)).collect::<Result<_>>()?;
            c.certificates.sort_by(by_degree_then_text);
            let within = c.certificates.iter().position(|cert| cert.psi.degree() <= degree_cap).unwrap_or(0);
            return Ok(SolveOutcome::Certificate(c.certificates.swap_remove(within)));
        }
        if c.all_inconsistent && c.residuals.is_empty() {
            return Ok(SolveOutcome::Refuted(Refutation {
                reason: RefutationReason::ExhaustedDegreeCap,
                data: json!({ "cap": degree_cap, "route": "normal-form" }),
            }));
        }
        residuals.extend(c.residuals);
    }
    let direct_size = degree_cap * f.degree().max(g.degree());
    if direct_size <= opts.max_direct_degree {
        match direct_route(&f, &g, degree_cap, opts) {
            Ok((Some(cert), _, _)) => return Ok(SolveOutcome::Certificate(cert)),
            Ok((None, true, _)) => {
                return Ok(SolveOutcome::Refuted(Refutation {
                    reason: RefutationReason::ExhaustedDegreeCap,
                    data: json!({ "cap": degree_cap, "route": "direct" }),
                }))
            }
            Ok((None, false, res)) => residuals.extend(res),
            Err(e) if e.is_cap() => caps.push(e.to_string()),
            Err(e) => return Err(e),
        }
    } else {
        caps.push(format!("direct system of degree {direct_size} skipped"));
    }
    if let Some(cert) = solve_diagonal_ansatz(&f, &g)? {
        return Ok(SolveOutcome::Certificate(cert));
    }
    let reason = if caps.is_empty() { "solutions need a field extension".to_string() } else { format!("undecided at cap: {}", caps.join("; ")) };
    Ok(SolveOutcome::Undecided { reason, residuals })
}

type DirectResult = (Option<ConjugacyCertificate>, bool, Vec<ResidualReport>);

fn direct_route(f: &PolyMap, g: &PolyMap, degree_cap: u32, opts: &SolveOptions) -> Result<DirectResult> {
    let sys = conjugacy_equations_capped(f, g, degree_cap, opts.max_unknowns)?;
    let pts = solve_points(&sys.polynomials(), &opts.groebner)?;
    let mut certs = Vec::new();
    for p in &pts.points {
        let psi = sys.map_from(p)?;
        if let Some(c) = certify(&psi, f, g)? {
            certs.push(c);
        }
    }
    certs.sort_by(by_degree_then_text);
    let refuted = pts.inconsistent;
    Ok((certs.into_iter().next(), refuted, residual_reports("direct", &pts)))
}

/// Degree-one maps commuting with `f`, over the smallest field reached by
/// adjoining one root of a residual eliminant factor (when needed).
#[derive(Debug, Clone)]
pub struct Torsion {
    pub field: Field,
    pub maps: Vec<PolyMap>,
}

pub fn centralizer_torsion(f: &PolyMap, cfg: &GroebnerConfig) -> Result<Torsion> {
    let solve = |f: &PolyMap| -> Result<(Vec<PolyMap>, PointSet)> {
        let sys = conjugacy_equations(f, f, 1)?;
        let pts = solve_points(&sys.polynomials(), cfg)?;
        let mut maps = Vec::new();
        for p in &pts.points {
            let c = sys.map_from(p)?;
            if c.compose(f)? == f.compose(&c)? {
                maps.push(c);
            }
        }
        Ok((maps, pts))
    };
    let (maps, pts) = solve(f)?;
    if f.field().is_rationals() {
        for r in &pts.residuals {
            let Ok(monic) = r.eliminant.monic() else { continue };
            let Some((minpoly, _)) = integral_form(&monic) else { continue };
            if minpoly.len() > 5 {
                continue;
            }
            let Ok(k) = FieldSpec::extension(minpoly, None) else { continue };
            let lifted = f.lift(&k)?;
            let (more, _) = solve(&lifted)?;
            if more.len() > maps.len() {
                return Ok(Torsion { field: k, maps: sort_maps(more) });
            }
        }
    }
    Ok(Torsion { field: f.field().clone(), maps: sort_maps(maps) })
}

fn sort_maps(mut maps: Vec<PolyMap>) -> Vec<PolyMap> {
    maps.sort_by(|a, b| b.is_identity().cmp(&a.is_identity()).then_with(|| a.to_string().cmp(&b.to_string())));
    maps
}

fn lift_pair(a: &PolyMap, b: &PolyMap) -> Option<(PolyMap, PolyMap)> {
    common_field(a, b).ok()
}

/// Quotients certificates by `psi ~ psi ∘ c` for `c` in the centralizer part
/// `{t ∘ f^k}`: torsion `t` of degree one and powers `f^k` with `deg f^|k| <= cap`.
/// Each class is represented by its least member (degree, then printed form).
pub fn dedup_modulo_centralizer(certs: &[ConjugacyCertificate], f: &PolyMap, degree_cap: u32) -> Vec<ConjugacyCertificate> {
    if certs.is_empty() {
        return Vec::new();
    }
    let torsion = centralizer_torsion(f, &GroebnerConfig::default())
        .map(|t| t.maps)
        .unwrap_or_else(|_| vec![PolyMap::identity(f.field())]);
    let mut powers = vec![PolyMap::identity(f.field())];
    if let Ok(finv) = invert_map(f) {
        let (mut fwd, mut bwd) = (f.clone(), finv.clone());
        while fwd.degree() <= degree_cap.max(1) && !fwd.is_identity() {
            powers.push(fwd.clone());
            powers.push(bwd.clone());
            match (f.compose(&fwd), finv.compose(&bwd)) {
                (Ok(a), Ok(b)) => {
                    fwd = a;
                    bwd = b;
                }
                _ => break,
            }
        }
    }
    let mut centralizer = Vec::new();
    for t in &torsion {
        for p in &powers {
            if let Some((t, p)) = lift_pair(t, p) {
                if let Ok(c) = t.compose(&p) {
                    centralizer.push(c);
                }
            }
        }
    }
    let equivalent = |a: &PolyMap, b: &PolyMap| -> bool {
        centralizer.iter().any(|c| {
            let Some((a2, c2)) = lift_pair(a, c) else { return false };
            let Some((ac, b2)) = a2.compose(&c2).ok().and_then(|ac| lift_pair(&ac, b)) else { return false };
            ac == b2
        })
    };
    // Classes are the connected components of the relation, so representatives
    // are pairwise unrelated and a second pass changes nothing.
    let n = certs.len();
    let mut root: Vec<usize> = (0..n).collect();
    fn find(root: &mut [usize], mut i: usize) -> usize {
        while root[i] != i {
            root[i] = root[root[i]];
            i = root[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..i {
            if find(&mut root, i) != find(&mut root, j)
                && (equivalent(&certs[i].psi, &certs[j].psi) || equivalent(&certs[j].psi, &certs[i].psi))
            {
                let r = find(&mut root, i);
                root[r] = find(&mut root, j);
            }
        }
    }
    let mut classes: Vec<Vec<ConjugacyCertificate>> = Vec::new();
    let mut class_of: Vec<Option<usize>> = vec![None; n];
    for (i, cert) in certs.iter().enumerate() {
        let r = find(&mut root, i);
        match class_of[r] {
            Some(c) => classes[c].push(cert.clone()),
            None => {
                class_of[r] = Some(classes.len());
                classes.push(vec![cert.clone()]);
            }
        }
    }
    let mut reps: Vec<ConjugacyCertificate> = classes
        .into_iter()
        .map(|mut cls| {
            cls.sort_by(by_degree_then_text);
            cls.swap_remove(0)
        })
        .collect();
    reps.sort_by(by_degree_then_text);
    reps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        FieldSpec::rationals()
    }

    fn m(x: &str, y: &str) -> PolyMap {
        PolyMap::parse(x, y, &q()).unwrap()
    }

    #[test]
    fn bound_values() {
        assert_eq!(conjugacy_degree_bound(2, 2).unwrap(), BigInt::from(2).pow(115));
        assert_eq!(conjugacy_degree_bound(2, 3).unwrap(), BigInt::from(2).pow(57) * BigInt::from(6).pow(29));
        assert!(conjugacy_degree_bound(1, 3).is_err());
    }

    #[test]
    fn lambda1_screen() {
        let s = screen_invariants(&m("y", "x + y^2"), &m("y", "x + y^3"), 1, 1e-6).unwrap();
        match s {
            Screen::Refuted(r) => {
                assert_eq!(r.reason, RefutationReason::Lambda1Mismatch);
                assert_eq!(r.data, json!({"f": 2, "g": 3}));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn example_family_passes_exact_screens() {
        let s = screen_invariants(&m("y", "x + y^3"), &m("y", "x + 2*y^3"), 2, 1e-6).unwrap();
        assert!(matches!(s, Screen::Pass { .. }));
    }

    #[test]
    fn equation_count_and_identity_solution() {
        let f = m("y", "x + y^3");
        let sys = conjugacy_equations(&f, &f, 1).unwrap();
        // monomials of degree <= 3: 10, two components, plus the unit equation
        assert_eq!(sys.equation_count(), 2 * 10 + 1);
        let point = sys.assignment(&PolyMap::identity(&q())).unwrap();
        for p in sys.polynomials() {
            assert!(p.eval(&point).is_zero());
        }
    }

    #[test]
    fn example_system_needs_an_extension() {
        let f = m("y", "x + y^3");
        let g = m("y", "x + 2*y^3");
        let sys = conjugacy_equations(&f, &g, 1).unwrap();
        let pts = solve_points(&sys.polynomials(), &GroebnerConfig::default()).unwrap();
        assert!(pts.points.is_empty() && !pts.residuals.is_empty());
        let cert = solve_diagonal_ansatz(&f, &g).unwrap().unwrap();
        let k = cert.field().clone();
        assert_eq!(k.minpoly().unwrap(), &[(-2).into(), 0.into(), 1.into()]);
        let point = sys.assignment(&cert.psi).unwrap();
        let lifted: Vec<MPoly> = sys.polynomials().iter().map(|p| p.lift(&k).unwrap()).collect();
        for p in lifted {
            assert!(p.eval(&point).is_zero());
        }
    }

    #[test]
    fn diagonal_ansatz_cube_root() {
        let f = m("y", "x + y^4");
        let g = m("y", "x + 5*y^4");
        let cert = solve_diagonal_ansatz(&f, &g).unwrap().unwrap();
        let alpha = cert.psi.p().coeff(1, 0);
        assert_eq!(alpha.pow(3).unwrap(), FieldElement::from_ratio(cert.field(), 1, 5));
        assert!(cert.checked_identity);
        assert!(solve_diagonal_ansatz(&f, &f).unwrap().unwrap().psi.is_identity());
    }

    #[test]
    fn planted_affine_conjugacy() {
        let f = m("y", "x + y^3");
        let a = m("2*x", "1/2*y");
        let g = a.compose(&f).unwrap().compose(&invert_map(&a).unwrap()).unwrap();
        match solve_bounded_degree(&f, &g, 1, &SolveOptions::default()).unwrap() {
            SolveOutcome::Certificate(c) => {
                assert!(c.checked_identity);
                assert!(c.psi.degree() <= 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn self_conjugacy_is_identity() {
        let f = m("y + x^2 - 3", "x");
        match solve_bounded_degree(&f, &f, 1, &SolveOptions::default()).unwrap() {
            SolveOutcome::Certificate(c) => assert!(c.psi.is_identity()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shifted_family_not_conjugate() {
        let out = solve_bounded_degree(&m("y", "x + y^2"), &m("y", "x + y^2 + 1"), 2, &SolveOptions::default()).unwrap();
        assert!(matches!(out, SolveOutcome::Refuted(Refutation { reason: RefutationReason::ExhaustedDegreeCap, .. })), "{out:?}");
    }

    #[test]
    fn torsion_of_example_family() {
        for mm in [2u32, 3] {
            let f = m("y", &format!("x + y^{}", mm + 1));
            let t = centralizer_torsion(&f, &GroebnerConfig::default()).unwrap();
            assert_eq!(t.maps.len(), mm as usize);
            for c in &t.maps {
                let zeta = c.p().coeff(1, 0);
                assert!(zeta.pow(mm as i64).unwrap().is_one());
                assert_eq!(c.q().coeff(0, 1), zeta);
            }
        }
    }

    #[test]
    fn dedup_collapses_torsion_and_powers() {
        let f = m("y", "x + y^3");
        let g = m("y", "x + 2*y^3");
        let c = solve_diagonal_ansatz(&f, &g).unwrap().unwrap();
        let k = c.field().clone();
        let neg = PolyMap::parse("-x", "-y", &k).unwrap();
        let other = certify(&c.psi.compose(&neg).unwrap(), &f, &g).unwrap().unwrap();
        let reps = dedup_modulo_centralizer(&[c.clone(), other.clone()], &f, 3);
        assert_eq!(reps.len(), 1);
        let with_power = certify(&c.psi.compose(&f.lift(&k).unwrap()).unwrap(), &f, &g).unwrap().unwrap();
        assert_eq!(dedup_modulo_centralizer(&[with_power, c.clone()], &f, 3).len(), 1);
        assert!(dedup_modulo_centralizer(&[], &f, 3).is_empty());
        let once = dedup_modulo_centralizer(&[c.clone(), other], &f, 3);
        assert_eq!(dedup_modulo_centralizer(&once, &f, 3), once);
    }
}
