use ncgeom::coeff::{q, rationalize, Coefficient, Q};
use ncgeom::logk::{reconstruct_products, split_sym_antisym, BasisWord, CurvatureExpression};
use ncgeom::par::{map_with, Strategy as Run};
use ncgeom::rearrange::{FSpec, SpectralFunction};
use ncgeom::symbols::{delta, Atom, MultiIndex, SymbolExpr, Word};
use proptest::prelude::*;

fn atom() -> impl Strategy<Value = Atom> + Clone {
    prop_oneof![(-2i32..4).prop_map(Atom::KPow), (0usize..3).prop_map(|j| Atom::DK(MultiIndex::unit(j))),]
}

fn kpow_atom() -> impl Strategy<Value = Atom> + Clone {
    (-3i32..4).prop_map(Atom::KPow)
}

fn expr_from(atoms: impl Strategy<Value = Atom> + Clone) -> impl Strategy<Value = SymbolExpr> {
    let term = ((-5i128..6), (1i128..4), prop::array::uniform3(0u8..3), prop::collection::vec(atoms, 0..4));
    prop::collection::vec(term, 1..4).prop_map(|ts| {
        let mut e = SymbolExpr::zero();
        for (n, d, xi, w) in ts {
            e.add_term(q(n, d), xi, Word::from_atoms(w));
        }
        e
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta_obeys_leibniz(a in expr_from(atom()), b in expr_from(atom()), j in 0usize..3) {
        let lhs = delta(j, &(&a * &b)).unwrap();
        let rhs = &(&delta(j, &a).unwrap() * &b) + &(&a * &delta(j, &b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivations_commute(e in expr_from(kpow_atom()), i in 0usize..3, j in 0usize..3) {
        let ij = delta(i, &delta(j, &e).unwrap()).unwrap();
        let ji = delta(j, &delta(i, &e).unwrap()).unwrap();
        prop_assert_eq!(ij, ji);
    }

    #[test]
    fn canonical_words_are_associative(a in prop::collection::vec(atom(), 0..5), b in prop::collection::vec(atom(), 0..5)) {
        let joined = Word::from_atoms(a.iter().chain(&b).copied());
        prop_assert_eq!(joined, Word::from_atoms(a.clone()).concat(&Word::from_atoms(b.clone())));
    }

    #[test]
    fn kpow_inverse_cancels(w in prop::collection::vec(atom(), 0..5), r in 1i32..4) {
        let base = Word::from_atoms(w);
        let mut x = base.clone();
        x.push(Atom::KPow(r));
        x.push(Atom::KPow(-r));
        prop_assert_eq!(x, base);
    }

    #[test]
    fn rationalize_recovers_small_fractions(n in -200i128..200, d in 1i128..97) {
        let x = n as f64 / d as f64;
        prop_assert_eq!(rationalize(x, 96, 1e-9), Some(Q::new(n, d)));
    }

    #[test]
    fn basis_keys_round_trip(i in 0usize..3, j in 0usize..3) {
        let mut words = vec![BasisWord::One(MultiIndex::unit(i)), BasisWord::One(MultiIndex::pair(i, j)), BasisWord::Prod(i, j)];
        words.push(BasisWord::Anti(i.min(j), i.max(j)));
        if i != j {
            words.push(BasisWord::Comm(i.max(j), i.min(j)));
        }
        for w in words {
            prop_assert_eq!(BasisWord::parse(&w.key()), Some(w));
        }
    }

    #[test]
    fn strategies_give_identical_output(xs in prop::collection::vec(-1e3f64..1e3, 0..200)) {
        let f = |x: &f64| x.sin() * x.exp().min(1e6);
        let a = map_with(Run::Sequential, &xs, f);
        let b = map_with(Run::Parallel, &xs, f);
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn split_then_reconstruct_is_identity(
        words in prop::collection::vec((0usize..3, 0usize..3, -3i128..4, 0usize..3), 1..5),
        s in -2.0f64..2.0,
        t in -2.0f64..2.0,
    ) {
        let specs = [FSpec::conformal(&[1, 1, 1]), FSpec::conformal(&[2, 1, 1]), FSpec::nonconformal(2, &[1, 2, 1])];
        let mut c = CurvatureExpression::zero();
        for (i, j, n, k) in words {
            if n != 0 {
                c.add_term(0, BasisWord::Prod(i, j), &SpectralFunction::leaf(Coefficient::rational(Q::from_integer(n)), specs[k].clone()));
            }
        }
        let back = reconstruct_products(&split_sym_antisym(&c));
        for (p, w) in c.words().into_iter().chain(back.words()) {
            let (x, y) = (c.eval(p, w, &[s, t]), back.eval(p, w, &[s, t]));
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{:?}: {} vs {}", w, x, y);
        }
    }
}
