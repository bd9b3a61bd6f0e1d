//! Points of zero-dimensional ideals with coordinates in the coefficient field.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use super::{groebner_basis, is_trivial, is_zero_dimensional, normal_form, GroebnerConfig, MPoly, Mono};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::roots::poly_roots;
use crate::upoly::UPoly;

/// Largest eliminant degree searched for.
const MAX_ELIMINANT_DEGREE: usize = 256;
/// Cap on embedding tuples tried when recognising roots in an extension.
const MAX_RECOGNITION_TUPLES: usize = 20_000;

/// Monic generator of `I ∩ K[v]` for a zero-dimensional ideal with Gröbner basis `basis`.
pub fn eliminant(basis: &[MPoly], var: usize) -> Result<UPoly> {
    let first = basis.first().ok_or_else(|| Error::InvalidInput("empty basis".into()))?;
    let (field, nvars) = (first.field().clone(), first.nvars());
    let x = MPoly::var(&field, nvars, var);
    // rows: (vector, combination of powers), each with a distinct leading monomial
    let mut rows: Vec<(MPoly, Vec<FieldElement>)> = Vec::new();
    let mut power = normal_form(&MPoly::one(&field, nvars), basis);
    for i in 0..=MAX_ELIMINANT_DEGREE {
        let mut w = power.clone();
        let mut combo = vec![FieldElement::zero(&field); i + 1];
        combo[i] = FieldElement::one(&field);
        loop {
            let Some((m, c)) = w.lt().map(|(m, c)| (m.clone(), c.clone())) else {
                return UPoly::new(&field, combo).monic();
            };
            let Some((rv, rc)) = rows.iter().find(|(r, _)| r.lt().is_some_and(|(rm, _)| *rm == m)) else {
                break;
            };
            let f = -&c.try_div(rv.lt().expect("nonzero").1)?;
            w = w.add_scaled(rv, &f, &Mono::one(nvars));
            for (k, v) in rc.iter().enumerate() {
                combo[k] = &combo[k] + &(&f * v);
            }
        }
        rows.push((w, combo));
        power = normal_form(&power.mul(&x), basis);
    }
    Err(Error::ResourceCap(format!("eliminant degree exceeds {MAX_ELIMINANT_DEGREE}")))
}

fn rational_from_f64(x: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    // continued fraction convergents with bounded denominator
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rest = x;
    for _ in 0..40 {
        let a = rest.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = rest - a as f64;
        if frac.abs() < 1e-12 {
            break;
        }
        rest = 1.0 / frac;
    }
    (k1 != 0).then(|| BigRational::new(BigInt::from(h1), BigInt::from(k1)))
}

/// Solves the Vandermonde system `sum_i c_i r_j^i = z_j` for real `c`.
fn vandermonde_solve(r: &[Complex64], z: &[Complex64]) -> Option<Vec<f64>> {
    let n = r.len();
    let mut a: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut row: Vec<Complex64> = (0..n).map(|i| r[j].powu(i as u32)).collect();
            row.push(z[j]);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| a[p][col].norm().total_cmp(&a[q][col].norm()))?;
        if a[piv][col].norm() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..=n {
                    let v = a[col][k];
                    a[row][k] -= f * v;
                }
            }
        }
    }
    let c: Vec<Complex64> = (0..n).map(|i| a[i][n] / a[i][i]).collect();
    c.iter().all(|v| v.im.abs() <= 1e-7 * (1.0 + v.re.abs())).then(|| c.iter().map(|v| v.re).collect())
}

/// Roots of `p` lying in its coefficient field, each listed once.
pub fn field_roots(p: &UPoly) -> Result<Vec<FieldElement>> {
    let field = p.field().clone();
    let mut out: Vec<FieldElement> = Vec::new();
    if p.degree().unwrap_or(0) == 0 {
        return Ok(out);
    }
    if let Some(rats) = p.rational_roots() {
        out.extend(rats.into_iter().map(|r| FieldElement::from_rational(&field, r)));
    }
    if field.is_rationals() {
        return Ok(out);
    }
    let minpoly: Vec<Complex64> = field.minpoly().expect("extension").iter().map(|c| Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0)).collect();
    let embeddings = poly_roots(&minpoly)?;
    let per_embedding: Vec<Vec<Complex64>> = embeddings
        .iter()
        .map(|r| {
            let coeffs: Vec<Complex64> = p
                .coeffs()
                .iter()
                .map(|c| c.coeffs().iter().enumerate().map(|(i, q)| r.powu(i as u32) * crate::field::rat_to_f64(q)).sum())
                .collect();
            poly_roots(&coeffs)
        })
        .collect::<Result<_>>()?;
    let total: usize = per_embedding.iter().map(Vec::len).product();
    if total > MAX_RECOGNITION_TUPLES {
        return Ok(out);
    }
    let n = embeddings.len();
    let mut idx = vec![0usize; n];
    'tuples: loop {
        let z: Vec<Complex64> = (0..n).map(|j| per_embedding[j][idx[j]]).collect();
        if let Some(c) = vandermonde_solve(&embeddings, &z) {
            let rats: Option<Vec<BigRational>> = c.iter().map(|&v| rational_from_f64(v, 1_000_000)).collect();
            if let Some(rats) = rats {
                let cand = FieldElement::from_coeffs(&field, rats);
                if !out.contains(&cand) && p.eval(&cand).is_zero() {
                    out.push(cand);
                }
            }
        }
        for j in 0..n {
            idx[j] += 1;
            if idx[j] < per_embedding[j].len() {
                continue 'tuples;
            }
            idx[j] = 0;
        }
        break;
    }
    Ok(out)
}

/// A zero-dimensional system whose remaining solutions need a field extension.
#[derive(Debug, Clone)]
pub struct ResidualSystem {
    pub basis: Vec<MPoly>,
    pub var: usize,
    /// Factor of the eliminant of `var` without roots in the field.
    pub eliminant: UPoly,
}

#[derive(Debug, Clone, Default)]
pub struct PointSet {
    pub points: Vec<Vec<FieldElement>>,
    pub residuals: Vec<ResidualSystem>,
    pub positive_dimensional: bool,
    /// The input ideal is the unit ideal.
    pub inconsistent: bool,
}

/// All solutions with coordinates in the coefficient field; the rest is
/// reported as residual systems.
pub fn solve_points(polys: &[MPoly], cfg: &GroebnerConfig) -> Result<PointSet> {
    let mut out = PointSet::default();
    if polys.iter().all(MPoly::is_zero) {
        out.positive_dimensional = true;
        return Ok(out);
    }
    let (basis, _) = groebner_basis(polys, cfg)?;
    if is_trivial(&basis) {
        out.inconsistent = true;
        return Ok(out);
    }
    descend(basis, cfg, &mut out)?;
    Ok(out)
}

fn descend(basis: Vec<MPoly>, cfg: &GroebnerConfig, out: &mut PointSet) -> Result<()> {
    if is_trivial(&basis) {
        return Ok(());
    }
    if !is_zero_dimensional(&basis) {
        out.positive_dimensional = true;
        return Ok(());
    }
    let nvars = basis[0].nvars();
    let field: Field = basis[0].field().clone();
    let mut assigned: Vec<Option<FieldElement>> = vec![None; nvars];
    for g in &basis {
        if let Some((v, c)) = g.as_assignment() {
            assigned[v] = Some(c);
        }
    }
    let Some(var) = assigned.iter().position(Option::is_none) else {
        out.points.push(assigned.into_iter().map(|c| c.expect("assigned")).collect());
        return Ok(());
    };
    let elim = eliminant(&basis, var)?;
    let roots = field_roots(&elim)?;
    let mut rest = elim.clone();
    for r in &roots {
        let lin = UPoly::new(&field, vec![-r, FieldElement::one(&field)]);
        while rest.degree().unwrap_or(0) > 0 {
            let (q, rem) = rest.divrem(&lin)?;
            if !rem.is_zero() {
                break;
            }
            rest = q;
        }
    }
    if rest.degree().unwrap_or(0) > 0 {
        out.residuals.push(ResidualSystem { basis: basis.clone(), var, eliminant: rest });
    }
    for r in roots {
        let mut sys = basis.clone();
        sys.push(MPoly::var(&field, nvars, var).sub(&MPoly::constant(r, nvars)));
        let (next, _) = groebner_basis(&sys, cfg)?;
        descend(next, cfg, out)?;
    }
    Ok(())
}

/// `(integer monic minimal polynomial, L)` with `P(X) = 0 ⇔ Q(L X) = 0` for a monic rational `P`.
pub fn integral_form(p: &UPoly) -> Option<(Vec<BigInt>, BigInt)> {
    let rats: Vec<&BigRational> = p.coeffs().iter().map(FieldElement::as_rational).collect::<Option<_>>()?;
    let n = rats.len().checked_sub(1)?;
    if !rats[n].is_one() {
        return None;
    }
    let scaled = |l: &BigInt| -> Option<Vec<BigInt>> {
        (0..=n)
            .map(|i| {
                let v = rats[i] * BigRational::from_integer(l.pow((n - i) as u32));
                v.is_integer().then(|| v.to_integer())
            })
            .collect()
    };
    if let Some(coeffs) = scaled(&BigInt::one()) {
        return Some((coeffs, BigInt::one()));
    }
    // L^{n-i} c_i is integral once L is a common denominator
    let l = rats.iter().fold(BigInt::one(), |a, r| num_integer::Integer::lcm(&a, r.denom()));
    scaled(&l).map(|c| (c, l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use num_traits::Zero;

    fn q() -> Field {
        FieldSpec::rationals()
    }

    fn var(k: &Field, n: usize, i: usize) -> MPoly {
        MPoly::var(k, n, i)
    }

    fn c(k: &Field, v: i64, n: usize) -> MPoly {
        MPoly::constant(FieldElement::from_int(k, v), n)
    }

    #[test]
    fn eliminant_of_circle_line() {
        let k = q();
        let (x, y) = (var(&k, 2, 0), var(&k, 2, 1));
        let f = x.mul(&x).add(&y.mul(&y)).sub(&c(&k, 2, 2));
        let g = x.sub(&y);
        let (basis, _) = groebner_basis(&[f, g], &GroebnerConfig::default()).unwrap();
        let e = eliminant(&basis, 0).unwrap();
        assert_eq!(e, UPoly::new(&k, vec![FieldElement::from_int(&k, -1), FieldElement::zero(&k), FieldElement::one(&k)]));
        let pts = solve_points(&basis, &GroebnerConfig::default()).unwrap();
        assert_eq!(pts.points.len(), 2);
        assert!(pts.residuals.is_empty());
    }

    #[test]
    fn irrational_points_become_residuals() {
        let k = q();
        let x = var(&k, 1, 0);
        let pts = solve_points(&[x.mul(&x).sub(&c(&k, 2, 1))], &GroebnerConfig::default()).unwrap();
        assert!(pts.points.is_empty());
        assert_eq!(pts.residuals.len(), 1);
        assert_eq!(pts.residuals[0].eliminant.degree(), Some(2));
    }

    #[test]
    fn roots_in_quadratic_field() {
        let k = FieldSpec::extension_i64(&[1, 1, 1], None).unwrap();
        // X^3 - 1 over Q(zeta_3)
        let p = UPoly::new(&k, vec![FieldElement::from_int(&k, -1), FieldElement::zero(&k), FieldElement::zero(&k), FieldElement::one(&k)]);
        let roots = field_roots(&p).unwrap();
        assert_eq!(roots.len(), 3);
        for r in roots {
            assert!(r.pow(3).unwrap().is_one());
        }
    }

    #[test]
    fn integral_form_scales_denominators() {
        let k = q();
        // X^2 - 1/2 -> (Y^2 - 2, L = 2)
        let p = UPoly::new(&k, vec![FieldElement::from_ratio(&k, -1, 2), FieldElement::zero(&k), FieldElement::one(&k)]);
        let (m, l) = integral_form(&p).unwrap();
        assert_eq!(m, vec![BigInt::from(-2), BigInt::zero(), BigInt::one()]);
        assert_eq!(l, BigInt::from(2));
    }
}
