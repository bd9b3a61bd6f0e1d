//! Periodic points of Hénon words and their multipliers.
//!
//! A point of period dividing `n` is a closed `x`-sequence
//! `x_{j+1} = a_j x_{j-1} + p_j(x_j)` of length `m = n·k` (k factors per word).
//! Running half of the sequence forward and half backward from `(x, y) = (x_0, x_{-1})`
//! gives two bivariate equations whose `y`-resultant has degree at most `D^n`.
//! That is the exact periodic-point count, with multiplicity.

use std::cmp::Ordering;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::automorphism::{invert_map, HenonForm, NumericMap};
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::green::{mat_mul, max_norm, NumericHenon, Point};
use crate::poly::PlanePoly;
use crate::roots::{eig2, poly_roots};
use crate::upoly::{bareiss_det, UPoly};

/// Largest `D^n` accepted for elimination.
pub const MAX_PERIODIC_COUNT: u64 = 1000;
/// Roots closer than this (relative) form one cluster.
pub const CLUSTER_TOL: f64 = 1e-7;
/// Above this degree the exact square-free split is skipped.
const MAX_EXACT_SQUAREFREE_DEGREE: usize = 256;
pub const RESIDUAL_TOL: f64 = 1e-10;
const NEUTRAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitType {
    Saddle,
    Attracting,
    Repelling,
    Neutral,
    Mixed,
}

impl OrbitType {
    fn from_multipliers(l1: Complex64, l2: Complex64) -> Self {
        let side = |l: Complex64| {
            let r = l.norm();
            if (r - 1.0).abs() <= NEUTRAL_TOL {
                Ordering::Equal
            } else {
                r.partial_cmp(&1.0).unwrap_or(Ordering::Equal)
            }
        };
        match (side(l1), side(l2)) {
            (Ordering::Equal, Ordering::Equal) => OrbitType::Neutral,
            (Ordering::Equal, _) | (_, Ordering::Equal) => OrbitType::Mixed,
            (Ordering::Less, Ordering::Less) => OrbitType::Attracting,
            (Ordering::Greater, Ordering::Greater) => OrbitType::Repelling,
            _ => OrbitType::Saddle,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    /// Minimal period.
    pub period: u32,
    /// Orbit points in the source coordinates of the form.
    pub points: Vec<Point>,
    /// Eigenvalues of the Jacobian of `f^period` along the orbit, larger modulus first.
    pub multipliers: (Complex64, Complex64),
    pub kind: OrbitType,
    /// Largest `‖f^period(q) - q‖` over the orbit, in Hénon coordinates.
    pub residual: f64,
    /// Number of resultant roots that merged into this orbit's starting point.
    pub multiplicity: usize,
}

impl PeriodicOrbit {
    pub fn clustered(&self) -> bool {
        self.multiplicity > 1
    }
}

/// Coefficients in `y`, each a polynomial in `x`.
fn y_coefficients(p: &PlanePoly) -> Vec<UPoly> {
    let k = p.field();
    let dy = p.degree_in_y() as usize;
    let dx = p.degree_in_x() as usize;
    let mut table = vec![vec![FieldElement::zero(k); dx + 1]; dy + 1];
    for (e, c) in p.terms() {
        table[e.j as usize][e.i as usize] = c.clone();
    }
    table.into_iter().map(|row| UPoly::new(k, row)).collect()
}

/// `Res_y(f, g)` as a polynomial in `x`.
pub fn resultant_y(f: &PlanePoly, g: &PlanePoly) -> Result<UPoly> {
    let k = f.field();
    if f.is_zero() || g.is_zero() {
        return Ok(UPoly::zero(k));
    }
    let fc = y_coefficients(f);
    let gc = y_coefficients(g);
    let (a, b) = (fc.len() - 1, gc.len() - 1);
    let n = a + b;
    let mut m = vec![vec![UPoly::zero(k); n]; n];
    for r in 0..b {
        for (c, coeff) in fc.iter().rev().enumerate() {
            m[r][r + c] = coeff.clone();
        }
    }
    for r in 0..a {
        for (c, coeff) in gc.iter().rev().enumerate() {
            m[b + r][r + c] = coeff.clone();
        }
    }
    bareiss_det(m, k)
}

/// The two closing equations for period dividing `n`.
fn closing_equations(h: &HenonForm, n: u32) -> Result<(PlanePoly, PlanePoly)> {
    let k = h.factors.len() as i64;
    let m = n as i64 * k;
    let field = h.field();
    // step j applies factor index k-1 - (j mod k)
    let factor_at = |j: i64| &h.factors[(k - 1 - j.rem_euclid(k)) as usize];
    let s = (m + 1) / 2;
    let t = m - s;
    // forward: xs[j+1] for j = -1..=s
    let mut fwd = vec![PlanePoly::y(field), PlanePoly::x(field)];
    for j in 0..s {
        let f = factor_at(j);
        let cur = &fwd[fwd.len() - 1];
        let prev = &fwd[fwd.len() - 2];
        let next = &prev.scale(&f.a) + &f.p.compose(cur, &PlanePoly::y(field))?;
        fwd.push(next);
    }
    // backward: bwd[i] = x_{-i}, i = 0..=t+1
    let mut bwd = vec![PlanePoly::x(field), PlanePoly::y(field)];
    for i in 1..=t {
        // x_{-i-1} = (x_{-i+1} - p(x_{-i})) / a for step j = -i
        let f = factor_at(-i);
        let cur = &bwd[i as usize];
        let newer = &bwd[i as usize - 1];
        let inv_a = f.a.inv()?;
        let next = (newer - &f.p.compose(cur, &PlanePoly::y(field))?).scale(&inv_a);
        bwd.push(next);
    }
    let xs = &fwd[s as usize + 1];
    let xs1 = &fwd[s as usize];
    let eq1 = xs - &bwd[t as usize];
    let eq2 = xs1 - &bwd[t as usize + 1];
    Ok((eq1, eq2))
}

fn iterate_with_jacobian(h: &NumericHenon, z: Point, n: u32) -> (Point, [[Complex64; 2]; 2]) {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [[one, zero], [zero, one]];
    let mut z = z;
    for _ in 0..n {
        m = mat_mul(h.jacobian(z), m);
        z = h.apply(z);
    }
    (z, m)
}

fn newton_periodic(h: &NumericHenon, mut z: Point, n: u32) -> (Point, f64) {
    let one = Complex64::new(1.0, 0.0);
    let mut best = (z, f64::INFINITY);
    for _ in 0..200 {
        let (w, j) = iterate_with_jacobian(h, z, n);
        let r = (w.0 - z.0, w.1 - z.1);
        let res = max_norm(r);
        if !res.is_finite() {
            break;
        }
        if res < best.1 {
            best = (z, res);
        }
        // Already exact to round-off: near degenerate orbits further steps only
        // slide along the almost-kernel of `J - I`.
        if res <= 4.0 * f64::EPSILON * (1.0 + max_norm(z)) {
            break;
        }
        let a = [[j[0][0] - one, j[0][1]], [j[1][0], j[1][1] - one]];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det.norm() == 0.0 {
            break;
        }
        let dx = (-r.0 * a[1][1] + r.1 * a[0][1]) / det;
        let dy = (-r.1 * a[0][0] + r.0 * a[1][0]) / det;
        z = (z.0 + dx, z.1 + dy);
        if max_norm((dx, dy)) <= 1e-15 * (1.0 + max_norm(z)) {
            let (w, _) = iterate_with_jacobian(h, z, n);
            let res = max_norm((w.0 - z.0, w.1 - z.1));
            if res < best.1 {
                best = (z, res);
            }
            break;
        }
    }
    best
}

fn close(a: Point, b: Point, tol: f64) -> bool {
    max_norm((a.0 - b.0, a.1 - b.1)) <= tol * (1.0 + max_norm(a).max(max_norm(b)))
}

/// Roots of the resultant with multiplicities. Multiple roots are split off
/// exactly first, so the numeric root finder only sees simple roots; whatever
/// still lies within the cluster tolerance is merged afterwards.
fn resultant_roots(res: &UPoly) -> Result<Vec<(Complex64, usize)>> {
    let parts = if res.degree().unwrap_or(0) <= MAX_EXACT_SQUAREFREE_DEGREE {
        res.squarefree_decomposition()?
    } else {
        vec![(res.clone(), 1)]
    };
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for (part, mult) in parts {
        for (x, m) in cluster_roots(poly_roots(&part.to_complex())?) {
            match out.iter_mut().find(|(y, _)| (x - *y).norm() <= CLUSTER_TOL * (1.0 + x.norm())) {
                Some(entry) => entry.1 += m * mult,
                None => out.push((x, m * mult)),
            }
        }
    }
    Ok(out)
}

/// Groups roots within the cluster tolerance: `(mean, multiplicity)`.
fn cluster_roots(mut roots: Vec<Complex64>) -> Vec<(Complex64, usize)> {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<(Complex64, usize, Complex64)> = Vec::new();
    'next: for r in roots {
        for c in out.iter_mut() {
            if (c.0 - r).norm() <= CLUSTER_TOL * (1.0 + r.norm()) {
                c.1 += 1;
                c.2 += r;
                continue 'next;
            }
        }
        out.push((r, 1, r));
    }
    out.into_iter().map(|(_, m, sum)| (sum / m as f64, m)).collect()
}

/// Candidate `y` values above `x`, best first.
fn back_substitute(f: &PlanePoly, g: &PlanePoly, x: Complex64) -> Result<Vec<Complex64>> {
    let at_x = |p: &PlanePoly| {
        let mut c = vec![Complex64::new(0.0, 0.0); p.degree_in_y() as usize + 1];
        for (e, v) in p.terms() {
            c[e.j as usize] += v.embed() * x.powu(e.i);
        }
        c
    };
    let (fc, gc) = (at_x(f), at_x(g));
    if fc.len() <= 1 && gc.len() <= 1 {
        return Err(Error::IllConditioned("closing equations do not involve y".into()));
    }
    // Roots of both equations: above a clustered x, one of them alone may be too inaccurate.
    let mut ys = Vec::new();
    for c in [&fc, &gc] {
        if c.len() > 1 {
            ys.extend(poly_roots(c)?);
        }
    }
    let score = |y: &Complex64| {
        crate::roots::horner(&fc, *y).norm() + crate::roots::horner(&gc, *y).norm()
    };
    ys.sort_by(|a, b| score(a).total_cmp(&score(b)));
    Ok(ys)
}

/// `y`-roots of both closing equations over an exact rational `x`: the roots of
/// their gcd, each found from a square-free factor so degenerate orbits keep full accuracy.
fn exact_fibre(f: &PlanePoly, g: &PlanePoly, x: &BigRational) -> Result<Vec<Complex64>> {
    let k = f.field();
    let x = FieldElement::from_rational(k, x.clone());
    let restrict = |p: &PlanePoly| {
        let mut c = vec![FieldElement::zero(k); p.degree_in_y() as usize + 1];
        for (e, v) in p.terms() {
            c[e.j as usize] = &c[e.j as usize] + &(v * &x.pow(e.i as i64).expect("nonnegative power"));
        }
        UPoly::new(k, c)
    };
    let common = restrict(f).gcd(&restrict(g))?;
    let mut ys = Vec::new();
    if common.degree().unwrap_or(0) == 0 {
        return Ok(ys);
    }
    for (part, _) in common.squarefree_decomposition()? {
        if part.degree().unwrap_or(0) > 0 {
            ys.extend(poly_roots(&part.to_complex())?);
        }
    }
    Ok(ys)
}

/// All orbits of minimal period dividing `n`.
pub fn periodic_points(h: &HenonForm, n: u32) -> Result<Vec<PeriodicOrbit>> {
    if n == 0 {
        return Err(Error::InvalidInput("period must be at least 1".into()));
    }
    let count = (h.lambda1() as f64).powi(n as i32);
    if count > MAX_PERIODIC_COUNT as f64 {
        return Err(Error::ResourceCap(format!("{count} periodic points exceeds the cap {MAX_PERIODIC_COUNT}")));
    }
    let (f, g) = closing_equations(h, n)?;
    let res = resultant_y(&f, &g)?;
    if res.is_zero() {
        return Err(Error::IllConditioned("identically vanishing resultant".into()));
    }
    let res = res.monic()?;
    let num = NumericHenon::from_form(h);

    // refined solutions with multiplicities
    let mut sols: Vec<(Point, f64, usize)> = Vec::new();
    let mut failures = Vec::new();
    // Multiple roots belong to degenerate orbits, where Newton converges slowly;
    // rational ones are resolved exactly instead.
    let rational = res.rational_roots().unwrap_or_default();
    for (x, mult) in resultant_roots(&res)? {
        let exact = (mult > 1)
            .then(|| rational.iter().find(|r| (Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0) - x).norm() <= CLUSTER_TOL * (1.0 + x.norm())))
            .flatten();
        let (x, ys) = match exact {
            Some(r) => {
                let mut ys = exact_fibre(&f, &g, r)?;
                ys.extend(back_substitute(&f, &g, x)?);
                (Complex64::new(r.to_f64().unwrap_or(x.re), 0.0), ys)
            }
            None => (x, back_substitute(&f, &g, x)?),
        };
        let mut found: Vec<(Point, f64)> = Vec::new();
        let mut best_miss: Option<(Point, f64)> = None;
        for y in ys {
            if found.len() == mult {
                break;
            }
            let (z, r) = newton_periodic(&num, (x, y), n);
            // Newton may wander to a different orbit; keep only points above this root.
            if (z.0 - x).norm() > 1e-3 * (1.0 + x.norm()) || found.iter().any(|(w, _)| close(*w, z, CLUSTER_TOL)) {
                continue;
            }
            // A multiple root may carry a single degenerate point; spare candidates
            // above it need not converge.
            if r > RESIDUAL_TOL * max_norm(z).max(1.0) {
                if best_miss.is_none_or(|(_, b)| r < b) {
                    best_miss = Some((z, r));
                }
                continue;
            }
            found.push((z, r));
        }
        if found.is_empty() {
            if let Some((z, r)) = best_miss {
                failures.push(format!("({}, {}) residual {r:e}", z.0, z.1));
            } else {
                failures.push(format!("no point above x = {x}"));
            }
            continue;
        }
        let per_point = mult / found.len();
        for (z, r) in found {
            if let Some(s) = sols.iter_mut().find(|s| close(s.0, z, CLUSTER_TOL)) {
                s.2 += per_point;
            } else {
                sols.push((z, r, per_point));
            }
        }
    }
    if !failures.is_empty() {
        return Err(Error::IllConditioned(format!("unrefined periodic points: {}", failures.join("; "))));
    }

    let to_source: NumericMap = invert_map(&h.conjugator)?.to_numeric();
    let mut used = vec![false; sols.len()];
    let mut orbits = Vec::new();
    for i in 0..sols.len() {
        if used[i] {
            continue;
        }
        let start = sols[i].0;
        let mut pts = vec![start];
        let mut z = start;
        let mut period = n;
        for step in 1..=n {
            z = num.apply(z);
            if close(z, start, CLUSTER_TOL) {
                period = step;
                break;
            }
            let snapped = sols.iter().position(|s| close(s.0, z, CLUSTER_TOL));
            if let Some(k) = snapped {
                used[k] = true;
                z = sols[k].0;
            }
            pts.push(z);
        }
        used[i] = true;
        pts.truncate(period as usize);
        let (_, jac) = iterate_with_jacobian(&num, start, period);
        let (l1, l2) = eig2(jac);
        let residual = pts
            .iter()
            .map(|&p| {
                let (w, _) = iterate_with_jacobian(&num, p, period);
                max_norm((w.0 - p.0, w.1 - p.1))
            })
            .fold(0.0, f64::max);
        orbits.push(PeriodicOrbit {
            period,
            points: pts.into_iter().map(|p| to_source.apply(p)).collect(),
            multipliers: (l1, l2),
            kind: OrbitType::from_multipliers(l1, l2),
            residual,
            multiplicity: sols[i].2,
        });
    }
    orbits.sort_by(|a, b| a.period.cmp(&b.period).then_with(|| canonical_cmp(a.multipliers, b.multipliers)));
    Ok(orbits)
}

/// Multiplier pair of one orbit with its minimal period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub period: u32,
    pub multipliers: (Complex64, Complex64),
}

fn rounded_key(l: Complex64) -> (f64, f64) {
    let r = (l.norm() * 1e8).round() / 1e8;
    let a = if l.norm() == 0.0 { 0.0 } else { (l.arg() * 1e8).round() / 1e8 };
    (r, a)
}

fn canonical_pair(p: (Complex64, Complex64)) -> (Complex64, Complex64) {
    let (a, b) = (rounded_key(p.0), rounded_key(p.1));
    if a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)) == Ordering::Less {
        (p.0, p.1)
    } else {
        (p.1, p.0)
    }
}

fn canonical_cmp(p: (Complex64, Complex64), q: (Complex64, Complex64)) -> Ordering {
    let (p, q) = (canonical_pair(p), canonical_pair(q));
    let key = |x: (Complex64, Complex64)| {
        let (a, b) = (rounded_key(x.0), rounded_key(x.1));
        [a.0, a.1, b.0, b.1]
    };
    key(p).iter().zip(key(q).iter()).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Multiplier pairs of all orbits with minimal period `<= max_period`, repeated by
/// multiplicity and canonically sorted.
pub fn multiplier_spectrum(h: &HenonForm, max_period: u32) -> Result<Vec<SpectrumEntry>> {
    let mut out = Vec::new();
    for n in 1..=max_period {
        for o in periodic_points(h, n)?.into_iter().filter(|o| o.period == n) {
            // Degenerate orbits count once per merged root, so multiplicity is part of the invariant.
            for _ in 0..o.multiplicity.max(1) {
                out.push(SpectrumEntry { period: n, multipliers: canonical_pair(o.multipliers) });
            }
        }
    }
    out.sort_by(|a, b| a.period.cmp(&b.period).then_with(|| canonical_cmp(a.multipliers, b.multipliers)));
    Ok(out)
}

fn pair_distance(p: (Complex64, Complex64), q: (Complex64, Complex64)) -> f64 {
    let direct = (p.0 - q.0).norm().max((p.1 - q.1).norm());
    let crossed = (p.0 - q.1).norm().max((p.1 - q.0).norm());
    direct.min(crossed)
}

/// Multiset equality up to `tol` (relative to `max(1, |λ|)`), matched greedily per period.
pub fn spectra_match(a: &[SpectrumEntry], b: &[SpectrumEntry], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for e in a {
        let scale = 1f64.max(e.multipliers.0.norm()).max(e.multipliers.1.norm());
        let hit = b.iter().enumerate().position(|(k, f)| {
            !used[k] && f.period == e.period && pair_distance(e.multipliers, f.multipliers) <= tol * scale
        });
        match hit {
            Some(k) => used[k] = true,
            None => return false,
        }
    }
    true
}
