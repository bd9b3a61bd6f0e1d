mod support;

use std::sync::OnceLock;

use planeauto::automorphism::{invert_map, jung_decompose, PolyMap};
use planeauto::conjugacy::{
    certify, dedup_modulo_centralizer, screen_invariants, solve_bounded_degree, ConjugacyCertificate, Screen, SolveOptions,
    SolveOutcome,
};
use planeauto::FieldSpec;
use proptest::prelude::*;
use rand::Rng;
use support::*;

/// A random automorphism of degree at most 6: affine maps around one or two elementary factors.
fn conjugator(rng: &mut TestRng) -> PolyMap {
    let (d1, d2) = match rng.gen_range(0..3) {
        0 => (rng.gen_range(1..=6), 1),
        1 => (2, rng.gen_range(1..=3)),
        _ => (3, 2),
    };
    let e1 = random_elementary(rng, d1);
    let e2 = random_elementary(rng, d2);
    let [a, b, c] = [random_affine(rng), random_affine(rng), random_affine(rng)];
    a.compose(&e1).unwrap().compose(&b).unwrap().compose(&e2).unwrap().compose(&c).unwrap()
}

fn conjugate(a: &PolyMap, f: &PolyMap) -> PolyMap {
    a.compose(f).unwrap().compose(&invert_map(a).unwrap()).unwrap()
}

/// Self-conjugacies of `(y, x + y^3)`: `±f^k` for small `k`.
fn self_conjugacy_pool() -> &'static (PolyMap, Vec<ConjugacyCertificate>) {
    static POOL: OnceLock<(PolyMap, Vec<ConjugacyCertificate>)> = OnceLock::new();
    POOL.get_or_init(|| {
        let k = FieldSpec::rationals();
        let f = PolyMap::parse("y", "x + y^3", &k).unwrap();
        let finv = invert_map(&f).unwrap();
        let neg = PolyMap::parse("-x", "-y", &k).unwrap();
        let mut certs = Vec::new();
        for base in [PolyMap::identity(&k), f.clone(), finv.clone(), f.compose(&f).unwrap()] {
            for psi in [base.clone(), neg.compose(&base).unwrap()] {
                certs.push(certify(&psi, &f, &f).unwrap().expect("self-conjugacy"));
            }
        }
        (f, certs)
    })
}

fn psis(certs: &[ConjugacyCertificate]) -> Vec<PolyMap> {
    certs.iter().map(|c| c.psi.clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exact_screens_never_refute_conjugate_pairs(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let f = random_henon(&mut rng, 2);
        let a = conjugator(&mut rng);
        prop_assume!(a.degree() <= 6);
        let g = conjugate(&a, &f);
        match screen_invariants(&f, &g, 0, 1e-6).unwrap() {
            Screen::Pass { .. } => {}
            Screen::Refuted(r) => prop_assert!(false, "refuted by {:?} with a = {}", r.reason, a),
        }
    }

    #[test]
    fn planted_conjugacies_are_certified(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let df = rng.gen_range(2..=3);
        let f = random_henon(&mut rng, df);
        let a = if rng.gen_bool(0.5) {
            random_affine(&mut rng)
        } else {
            let e = random_elementary(&mut rng, 2);
            random_affine(&mut rng).compose(&e).unwrap()
        };
        let g = conjugate(&a, &f);
        match solve_bounded_degree(&f, &g, 2, &SolveOptions::default()).unwrap() {
            SolveOutcome::Certificate(c) => {
                prop_assert!(c.checked_identity);
                let k = c.field().clone();
                prop_assert_eq!(c.psi.compose(&f.lift(&k).unwrap()).unwrap(), g.lift(&k).unwrap().compose(&c.psi).unwrap());
                prop_assert!(jung_decompose(&c.psi).is_ok());
                prop_assert_eq!(c.automorphism_witness.recompose().unwrap(), c.psi);
            }
            other => prop_assert!(false, "f = {}, a = {}: {:?}", f, a, other),
        }
    }

    #[test]
    fn dedup_is_idempotent(picks in prop::collection::vec(0usize..8, 1..10), cap in prop::sample::select(vec![1u32, 3])) {
        let (f, pool) = self_conjugacy_pool();
        let list: Vec<ConjugacyCertificate> = picks.iter().map(|&i| pool[i].clone()).collect();
        let once = dedup_modulo_centralizer(&list, f, cap);
        let twice = dedup_modulo_centralizer(&once, f, cap);
        prop_assert_eq!(psis(&once), psis(&twice));
        prop_assert!(once.len() <= list.len());
        if cap == 3 && picks.iter().all(|&i| i < 4) {
            // ±f lie in the degree-3 part of the centralizer, so ±id and ±f form one class.
            prop_assert_eq!(once.len(), 1);
        }
    }
}

#[test]
fn certify_rejects_non_conjugacies() {
    let k = FieldSpec::rationals();
    let f = PolyMap::parse("y", "x + y^2", &k).unwrap();
    let g = PolyMap::parse("y", "x + y^2 - 1", &k).unwrap();
    assert!(certify(&PolyMap::identity(&k), &f, &g).unwrap().is_none());
    assert!(certify(&PolyMap::swap(&k), &f, &f).unwrap().is_none());
}
