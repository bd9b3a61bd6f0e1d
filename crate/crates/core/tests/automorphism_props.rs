mod support;

use planeauto::automorphism::{classify, henon_normal_form, invert_map, jacobian_det, jung_decompose, PolyMap};
use planeauto::FieldSpec;
use proptest::prelude::*;
use rand::Rng;
use support::*;

fn conjugate(a: &PolyMap, f: &PolyMap) -> PolyMap {
    a.compose(f).unwrap().compose(&invert_map(a).unwrap()).unwrap()
}

/// `a ∘ e ∘ b` with affine `a, b` and an elementary `e` of degree at most 3.
fn small_automorphism(rng: &mut TestRng) -> PolyMap {
    let d = rng.gen_range(1..=3);
    let e = random_elementary(rng, d);
    random_affine(rng).compose(&e).unwrap().compose(&random_affine(rng)).unwrap()
}

/// A generated word whose degree stays small enough for repeated exact composition.
fn moderate_word(rng: &mut TestRng, max_degree: u64) -> PolyMap {
    loop {
        let w = random_word(rng);
        if w.degree_bound() <= max_degree {
            return w.compose();
        }
    }
}

#[test]
fn jung_round_trip_on_word_corpus() {
    let mut rng = rng(31);
    for idx in 0..120 {
        let w = random_word(&mut rng);
        let f = w.compose();
        let word = jung_decompose(&f).unwrap_or_else(|e| panic!("word {idx}: {e}"));
        assert_eq!(word.recompose().unwrap(), f, "word {idx} does not recompose");
        assert!(word.factors.windows(2).all(|p| p[0].kind() != p[1].kind()), "word {idx} is not reduced");
    }
}

#[test]
fn inverse_is_two_sided() {
    let mut rng = rng(32);
    let k = FieldSpec::rationals();
    for idx in 0..40 {
        let f = moderate_word(&mut rng, 16);
        let g = invert_map(&f).unwrap();
        assert!(f.compose(&g).unwrap() == PolyMap::identity(&k), "word {idx}: f ∘ f⁻¹ ≠ id");
        assert!(g.compose(&f).unwrap() == PolyMap::identity(&k), "word {idx}: f⁻¹ ∘ f ≠ id");
    }
}

#[test]
fn henon_iterates_have_full_degree() {
    let mut rng = rng(33);
    for (d, max_n) in [(2u32, 5u32), (3, 4)] {
        for _ in 0..3 {
            let f = random_henon(&mut rng, d);
            let mut it = f.clone();
            for n in 1..=max_n {
                assert_eq!(it.degree() as u64, (d as u64).pow(n), "deg f^{n} for {f}");
                if n < max_n {
                    it = f.compose(&it).unwrap();
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lambda1_is_conjugation_invariant(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let f = random_word(&mut rng).compose();
        let a = random_affine(&mut rng);
        let g = conjugate(&a, &f);
        prop_assert_eq!(classify(&g).unwrap().lambda1, classify(&f).unwrap().lambda1);
    }

    #[test]
    fn lambda1_is_multiplicative_on_iterates(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let d = rng.gen_range(2..=3);
        let a = random_affine(&mut rng);
        let f = conjugate(&a, &random_henon(&mut rng, d));
        let l = classify(&f).unwrap().lambda1;
        for n in 1..=3u32 {
            let fnn = f.pow(n).unwrap();
            prop_assert_eq!(classify(&fnn).unwrap().lambda1, l.pow(n));
        }
    }

    #[test]
    fn jacobian_chain_rule(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let f = small_automorphism(&mut rng);
        let g = small_automorphism(&mut rng);
        let lhs = jacobian_det(&f.compose(&g).unwrap()).det;
        let jf = jacobian_det(&f).det.compose(g.p(), g.q()).unwrap();
        let rhs = jf.mul(&jacobian_det(&g).det).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn normal_form_conjugates_back(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let d = rng.gen_range(2..=3);
        let a = random_affine(&mut rng);
        let f = conjugate(&a, &random_henon(&mut rng, d));
        let h = henon_normal_form(&f).unwrap();
        // φ ∘ f = H ∘ φ
        prop_assert_eq!(h.conjugator.compose(&f).unwrap(), h.map().unwrap().compose(&h.conjugator).unwrap());
        prop_assert_eq!(h.lambda1(), d as u64);
    }
}
