//! Randomized algebraic invariants of the exact-arithmetic layers.

use hecke_massey::lattice::Lattice2;
use hecke_massey::numeric::{rat, Cyclo, Rat};
use hecke_massey::qseries::QSeries;
use proptest::prelude::*;

fn small_rat() -> impl Strategy<Value = Rat> {
    (-12i64..=12, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn cyclo() -> impl Strategy<Value = Cyclo> {
    (1u64..=12)
        .prop_flat_map(|order| {
            let phi = hecke_massey::numeric::euler_phi(order) as usize;
            (
                Just(order),
                proptest::collection::vec(small_rat(), phi..=phi),
            )
        })
        .prop_map(|(order, coeffs)| Cyclo::from_coeffs(order, coeffs).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cyclo_field_axioms(x in cyclo(), y in cyclo(), z in cyclo()) {
        prop_assert_eq!(x.add(&y).add(&z), x.add(&y.add(&z)));
        prop_assert_eq!(x.add(&y), y.add(&x));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        if !x.is_zero() {
            prop_assert_eq!(x.mul(&x.inverse().unwrap()), Cyclo::one());
        }
        prop_assert_eq!(x.add(&x.neg()), Cyclo::zero());
    }

    #[test]
    fn cyclo_embed_is_an_injective_ring_map(
        x in cyclo(),
        y in cyclo(),
        k in 1u64..=4,
    ) {
        // embed into a common multiple of the orders
        let target = num::integer::lcm(x.order(), y.order()) * k;
        let ex = x.embed(target).unwrap();
        let ey = y.embed(target).unwrap();
        prop_assert_eq!(ex.add(&ey), x.add(&y).embed(target).unwrap());
        prop_assert_eq!(ex.mul(&ey), x.mul(&y).embed(target).unwrap());
        prop_assert_eq!(ex == ey, x == y);
    }
}

fn small_series() -> impl Strategy<Value = QSeries> {
    // nonnegative half-integer exponents, small integer coefficients
    proptest::collection::vec((0i64..=6, -3i64..=3), 0..=5).prop_map(|terms| {
        let mut s = QSeries::zero(rat(9, 2));
        for (e2, c) in terms {
            s.add_term(rat(e2, 2), Cyclo::from_int(c));
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qseries_ring_axioms_up_to_truncation(
        x in small_series(),
        y in small_series(),
        z in small_series(),
    ) {
        let dist = x.mul(&y.add(&z)).unwrap();
        let expanded = x.mul(&y).unwrap().add(&x.mul(&z).unwrap());
        let upto = dist.truncation().clone().min(expanded.truncation().clone());
        prop_assert!(dist.eq_upto(&expanded, &upto).unwrap());

        let comm = x.mul(&y).unwrap();
        prop_assert_eq!(comm.clone(), y.mul(&x).unwrap());

        let assoc1 = x.mul(&y).unwrap().mul(&z).unwrap();
        let assoc2 = x.mul(&y.mul(&z).unwrap()).unwrap();
        prop_assert_eq!(assoc1, assoc2);
    }

    #[test]
    fn shift_commutes_with_multiplication(
        x in small_series(),
        y in small_series(),
        e2 in 0i64..=4,
    ) {
        let e = rat(e2, 2);
        let lhs = x.mul(&y).unwrap().shift(&e);
        let rhs = x.shift(&e).mul(&y).unwrap();
        let upto = lhs.truncation().clone().min(rhs.truncation().clone());
        prop_assert!(lhs.eq_upto(&rhs, &upto).unwrap());
    }

    #[test]
    fn shift_round_trips(x in small_series(), e2 in -4i64..=4) {
        let e = rat(e2, 2);
        prop_assert_eq!(x.shift(&e).shift(&-e), x);
    }
}

fn integer_lattice() -> impl Strategy<Value = Lattice2> {
    (-4i64..=4, -4i64..=4, -4i64..=4, -4i64..=4)
        .prop_filter("nonsingular", |(a, b, c, d)| a * d - b * c != 0)
        .prop_map(|(a, b, c, d)| {
            Lattice2::from_generators(&[
                [rat(a, 1), rat(c, 1)],
                [rat(b, 1), rat(d, 1)],
            ])
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lattice_index_product_is_swap_invariant(l1 in integer_lattice(), l2 in integer_lattice()) {
        let meet = l1.intersect(&l2);
        let join = l1.sum(&l2);
        let one = meet.index_in(&l1).unwrap() * l1.index_in(&join).unwrap();
        let two = meet.index_in(&l2).unwrap() * l2.index_in(&join).unwrap();
        prop_assert_eq!(one, two);
    }

    #[test]
    fn canonicalization_is_idempotent(l in integer_lattice()) {
        let again = Lattice2::from_basis(l.basis().clone()).unwrap();
        prop_assert_eq!(again, l);
    }
}
