use planeauto::groebner::{groebner_basis, is_trivial, normal_form, GroebnerConfig, MPoly, Mono};
use planeauto::{FieldElement, FieldSpec};
use proptest::prelude::*;

const NVARS: usize = 3;

fn monomial() -> impl Strategy<Value = Vec<u16>> {
    prop::collection::vec(0u16..=2, NVARS).prop_filter("total degree at most 2", |e| e.iter().sum::<u16>() <= 2)
}

fn polynomial() -> impl Strategy<Value = Vec<(Vec<u16>, i64)>> {
    prop::collection::vec((monomial(), -5i64..=5), 1..=4)
}

fn build(terms: &[(Vec<u16>, i64)]) -> MPoly {
    let k = FieldSpec::rationals();
    MPoly::from_terms(&k, NVARS, terms.iter().map(|(e, c)| (Mono(e.clone()), FieldElement::from_int(&k, *c))))
}

/// `lcm/lt(f) · f / lc(f) − lcm/lt(g) · g / lc(g)`, written out independently of the library.
fn s_polynomial(f: &MPoly, g: &MPoly) -> MPoly {
    let (fm, fc) = f.lt().unwrap();
    let (gm, gc) = g.lt().unwrap();
    let l = fm.lcm(gm);
    let zero = MPoly::zero(f.field(), f.nvars());
    zero.add_scaled(f, &fc.inv().unwrap(), &l.div(fm)).add_scaled(g, &-&gc.inv().unwrap(), &l.div(gm))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_reduces_generators_and_s_pairs(system in prop::collection::vec(polynomial(), 1..=3)) {
        let input: Vec<MPoly> = system.iter().map(|t| build(t)).filter(|p| !p.is_zero()).collect();
        prop_assume!(!input.is_empty());
        let (basis, _) = groebner_basis(&input, &GroebnerConfig::default()).unwrap();
        for g in &input {
            prop_assert!(normal_form(g, &basis).is_zero(), "generator {:?} does not reduce to 0", g);
        }
        for i in 0..basis.len() {
            for j in i + 1..basis.len() {
                let s = s_polynomial(&basis[i], &basis[j]);
                prop_assert!(normal_form(&s, &basis).is_zero(), "S({:?}, {:?}) does not reduce to 0", basis[i], basis[j]);
            }
        }
    }

    #[test]
    fn products_of_generators_stay_in_the_ideal(system in prop::collection::vec(polynomial(), 2..=3), mult in polynomial()) {
        let input: Vec<MPoly> = system.iter().map(|t| build(t)).filter(|p| !p.is_zero()).collect();
        prop_assume!(input.len() >= 2);
        let (basis, _) = groebner_basis(&input, &GroebnerConfig::default()).unwrap();
        let combo = input[0].mul(&build(&mult)).add(&input[1]);
        prop_assert!(normal_form(&combo, &basis).is_zero());
    }

    #[test]
    fn systems_with_a_rational_point_are_consistent(point in prop::collection::vec(-3i64..=3, NVARS), system in prop::collection::vec(polynomial(), 1..=3)) {
        let k = FieldSpec::rationals();
        let at: Vec<FieldElement> = point.iter().map(|&v| FieldElement::from_int(&k, v)).collect();
        // Shift every generator so that it vanishes at `point`.
        let input: Vec<MPoly> = system
            .iter()
            .map(|t| {
                let p = build(t);
                p.sub(&MPoly::constant(p.eval(&at), NVARS))
            })
            .filter(|p| !p.is_zero())
            .collect();
        prop_assume!(!input.is_empty());
        let (basis, _) = groebner_basis(&input, &GroebnerConfig::default()).unwrap();
        prop_assert!(!is_trivial(&basis));
        for g in &basis {
            prop_assert!(g.eval(&at).is_zero());
        }
    }
}
