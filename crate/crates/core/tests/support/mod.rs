//! Shared generators and independent oracles for the integration tests.
#![allow(dead_code)]

use planeauto::automorphism::PolyMap;
use planeauto::{FieldElement, FieldSpec, PlanePoly};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn nonzero(rng: &mut TestRng, lo: i64, hi: i64) -> i64 {
    loop {
        let v = rng.gen_range(lo..=hi);
        if v != 0 {
            return v;
        }
    }
}

/// Integer affine automorphism with small entries.
pub fn random_affine(rng: &mut TestRng) -> PolyMap {
    let q = FieldSpec::rationals();
    loop {
        let m: Vec<i64> = (0..4).map(|_| rng.gen_range(-3..=3)).collect();
        if m[0] * m[3] - m[1] * m[2] == 0 {
            continue;
        }
        let (c1, c2) = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        let x = PlanePoly::from_terms(&q, [(1, 0, FieldElement::from_int(&q, m[0])), (0, 1, FieldElement::from_int(&q, m[1])), (0, 0, FieldElement::from_int(&q, c1))]);
        let y = PlanePoly::from_terms(&q, [(1, 0, FieldElement::from_int(&q, m[2])), (0, 1, FieldElement::from_int(&q, m[3])), (0, 0, FieldElement::from_int(&q, c2))]);
        return PolyMap::new(x, y).unwrap();
    }
}

/// Coefficients of a univariate polynomial of exact degree `d`, ascending.
pub fn random_univariate(rng: &mut TestRng, d: u32) -> Vec<i64> {
    let mut c: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..=2)).collect();
    c.push(nonzero(rng, -2, 2));
    c
}

/// `(alpha x + q(y), beta y + gamma)` with `deg q = d`.
pub fn random_elementary(rng: &mut TestRng, d: u32) -> PolyMap {
    let k = FieldSpec::rationals();
    let qc = random_univariate(rng, d);
    let alpha = nonzero(rng, -2, 2);
    let beta = nonzero(rng, -2, 2);
    let gamma = rng.gen_range(-2..=2);
    let mut x: Vec<(u32, u32, FieldElement)> = qc.iter().enumerate().map(|(j, &c)| (0, j as u32, FieldElement::from_int(&k, c))).collect();
    x.push((1, 0, FieldElement::from_int(&k, alpha)));
    let y = vec![(0, 1, FieldElement::from_int(&k, beta)), (0, 0, FieldElement::from_int(&k, gamma))];
    PolyMap::new(PlanePoly::from_terms(&k, x), PlanePoly::from_terms(&k, y)).unwrap()
}

/// `(y + p(x), x)`-type single Hénon factor with `deg p = d`, written as `(a y + p(x), x)`.
pub fn random_henon(rng: &mut TestRng, d: u32) -> PolyMap {
    let k = FieldSpec::rationals();
    let pc = random_univariate(rng, d);
    let a = nonzero(rng, -2, 2);
    let mut x: Vec<(u32, u32, FieldElement)> = pc.iter().enumerate().map(|(i, &c)| (i as u32, 0, FieldElement::from_int(&k, c))).collect();
    x.push((0, 1, FieldElement::from_int(&k, a)));
    PolyMap::new(PlanePoly::from_terms(&k, x), PlanePoly::x(&k)).unwrap()
}

/// One factor of a generated word, kept in raw form for the oracle.
#[derive(Debug, Clone)]
pub enum RawFactor {
    Affine(PolyMap),
    Elementary { map: PolyMap, degree: u32 },
}

impl RawFactor {
    pub fn map(&self) -> &PolyMap {
        match self {
            RawFactor::Affine(m) | RawFactor::Elementary { map: m, .. } => m,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedWord {
    /// Outermost factor first.
    pub factors: Vec<RawFactor>,
    /// Built as `w ∘ e ∘ w^{-1}`; elliptic by construction.
    pub conjugate_of_one: bool,
}

impl GeneratedWord {
    pub fn compose(&self) -> PolyMap {
        let k = FieldSpec::rationals();
        self.factors.iter().rev().fold(PolyMap::identity(&k), |acc, f| f.map().compose(&acc).unwrap())
    }

    /// Upper bound for `deg f` (product of elementary degrees).
    pub fn degree_bound(&self) -> u64 {
        self.factors
            .iter()
            .map(|f| match f {
                RawFactor::Affine(_) => 1,
                RawFactor::Elementary { degree, .. } => *degree as u64,
            })
            .product()
    }
}

/// Random alternating words with at most six factors and factor degrees at most four.
/// About a third are conjugates `w ∘ e ∘ w^{-1}` of one elementary factor.
pub fn random_word(rng: &mut TestRng) -> GeneratedWord {
    if rng.gen_bool(0.3) {
        let de = rng.gen_range(1..=2);
        let e = random_elementary(rng, de);
        let a = random_affine(rng);
        let d = rng.gen_range(2..=4);
        let core = random_elementary(rng, d);
        let el = |m: PolyMap| RawFactor::Elementary { degree: m.degree(), map: m };
        let factors = vec![
            el(e.clone()),
            RawFactor::Affine(a.clone()),
            el(core),
            RawFactor::Affine(planeauto::invert_map(&a).unwrap()),
            el(planeauto::invert_map(&e).unwrap()),
        ];
        return GeneratedWord { factors, conjugate_of_one: true };
    }
    let len = rng.gen_range(1..=6);
    let start_affine = rng.gen_bool(0.5);
    let factors = (0..len)
        .map(|i| {
            if (i % 2 == 0) == start_affine {
                RawFactor::Affine(random_affine(rng))
            } else {
                let d = rng.gen_range(2..=4);
                RawFactor::Elementary { map: random_elementary(rng, d), degree: d }
            }
        })
        .collect();
    GeneratedWord { factors, conjugate_of_one: false }
}

// ---------------------------------------------------------------------------
// Degree oracle: restrict to a random line and count the degree in t, mod 2^61 - 1.

pub const P61: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P61 as u128) as u64
}

fn addmod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P61 {
        s - P61
    } else {
        s
    }
}

fn to_mod(c: &FieldElement) -> u64 {
    let q = c.as_rational().expect("rational coefficients");
    let reduce = |n: &num_bigint::BigInt| -> u64 {
        let r = n % num_bigint::BigInt::from(P61);
        let r = if r < num_bigint::BigInt::from(0) { r + num_bigint::BigInt::from(P61) } else { r };
        u64::try_from(r).unwrap()
    };
    let (n, d) = (reduce(q.numer()), reduce(q.denom()));
    mulmod(n, powmod(d, P61 - 2))
}

fn powmod(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b);
        }
        b = mulmod(b, b);
        e >>= 1;
    }
    r
}

/// Dense univariate polynomial mod p.
#[derive(Clone, Debug)]
struct Dense(Vec<u64>);

impl Dense {
    fn trim(mut self) -> Self {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
        self
    }

    fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn add(&self, o: &Dense) -> Dense {
        let n = self.0.len().max(o.0.len());
        Dense((0..n).map(|i| addmod(*self.0.get(i).unwrap_or(&0), *o.0.get(i).unwrap_or(&0))).collect()).trim()
    }

    fn mul(&self, o: &Dense) -> Dense {
        if self.0.is_empty() || o.0.is_empty() {
            return Dense(Vec::new());
        }
        let mut out = vec![0u128; self.0.len() + o.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.0.iter().enumerate() {
                let v = out[i + j] + a as u128 * b as u128;
                out[i + j] = if v >= (P61 as u128) << 64 { v % P61 as u128 } else { v };
            }
        }
        Dense(out.into_iter().map(|v| (v % P61 as u128) as u64).collect()).trim()
    }

    fn scalar(c: u64) -> Dense {
        Dense(vec![c]).trim()
    }
}

fn eval_plane(p: &PlanePoly, x: &Dense, y: &Dense) -> Dense {
    let dx = p.degree_in_x() as usize;
    let dy = p.degree_in_y() as usize;
    let mut xp = vec![Dense::scalar(1)];
    for _ in 0..dx {
        xp.push(xp.last().unwrap().mul(x));
    }
    let mut yp = vec![Dense::scalar(1)];
    for _ in 0..dy {
        yp.push(yp.last().unwrap().mul(y));
    }
    let mut acc = Dense(Vec::new());
    for (e, c) in p.terms() {
        let term = xp[e.i as usize].mul(&yp[e.j as usize]).mul(&Dense::scalar(to_mod(c)));
        acc = acc.add(&term);
    }
    acc
}

/// `deg f^n` for `n = 1..=max_n`, stopping before the next iterate could exceed
/// `max_degree`; computed along a random line modulo `2^61 - 1`.
pub fn degree_sequence(word: &GeneratedWord, max_n: u32, max_degree: u64, rng: &mut TestRng) -> Vec<u64> {
    let line = |rng: &mut TestRng| (rng.gen_range(1..P61), rng.gen_range(0..P61));
    let (a, b) = line(rng);
    let (c, d) = line(rng);
    let mut x = Dense(vec![b, a]).trim();
    let mut y = Dense(vec![d, c]).trim();
    let mut out: Vec<u64> = Vec::new();
    let bound = word.degree_bound();
    for _ in 0..max_n {
        if out.last().copied().unwrap_or(1).saturating_mul(bound) > max_degree {
            break;
        }
        for f in word.factors.iter().rev() {
            let m = f.map();
            let (nx, ny) = (eval_plane(m.p(), &x, &y), eval_plane(m.q(), &x, &y));
            x = nx;
            y = ny;
        }
        out.push(x.degree().unwrap_or(0).max(y.degree().unwrap_or(0)) as u64);
    }
    out
}

/// Growth rate of `log deg f^n` per step, measured between the last iterate and
/// the one two steps earlier (one step when only two are known). Degree drops
/// from cancellation come with period at most two for rational words, so the
/// two-step secant is exact both for bounded and for geometric degree sequences.
pub fn log_degree_slope(degrees: &[u64]) -> Option<f64> {
    let ln = |d: u64| (d.max(1) as f64).ln();
    match degrees.len() {
        0 | 1 => None,
        2 => Some(ln(degrees[1]) - ln(degrees[0])),
        n => Some((ln(degrees[n - 1]) - ln(degrees[n - 3])) / 2.0),
    }
}
