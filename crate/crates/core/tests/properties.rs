use proptest::prelude::*;

use triaut::deriv::random_derivation;
use triaut::liealg::lie_closure;
use triaut::poly::{integer, rational};
use triaut::text::{parse_automorphism, parse_derivation, parse_polynomial};
use triaut::triaut::random_triangular;
use triaut::witness::GeneratorTable;
use triaut::{
    DegreeClass, GroupWord, Letter, Monomial, Polynomial, Rational, TriangularAutomorphism,
    TriangularDerivation,
};

fn poly(nvars: usize) -> impl Strategy<Value = Polynomial> {
    let term = (prop::collection::vec(0u32..3, nvars), -4i64..=4, 1i64..=3);
    prop::collection::vec(term, 0..5).prop_map(move |terms| {
        Polynomial::from_terms(
            terms
                .into_iter()
                .map(|(e, n, d)| (Monomial::new(e), rational(n, d))),
            nvars,
        )
    })
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| rational(n, d))
}

fn automorphism() -> impl Strategy<Value = TriangularAutomorphism> {
    (1usize..=4, 1u32..=3, any::<u64>())
        .prop_map(|(n, m, seed)| random_triangular(n, m, seed, 3, 0.5))
}

fn same_n_automorphisms(k: usize) -> impl Strategy<Value = Vec<TriangularAutomorphism>> {
    (1usize..=3, 1u32..=2, prop::collection::vec(any::<u64>(), k)).prop_map(|(n, m, seeds)| {
        seeds
            .into_iter()
            .map(|s| random_triangular(n, m, s, 2, 0.5))
            .collect()
    })
}

fn same_n_derivations(k: usize) -> impl Strategy<Value = Vec<TriangularDerivation>> {
    (1usize..=4, prop::collection::vec(any::<u64>(), k)).prop_map(|(n, seeds)| {
        seeds
            .into_iter()
            .map(|s| random_derivation(n, 2, s, 3, 0.4))
            .collect()
    })
}

fn fold(factors: &[TriangularAutomorphism], n: usize) -> TriangularAutomorphism {
    factors
        .iter()
        .fold(TriangularAutomorphism::identity(n), |acc, f| {
            acc.compose(f).unwrap()
        })
}

/// Sets the variables past `n` to zero.
fn restrict(p: &Polynomial, n: usize) -> Polynomial {
    let imgs: Vec<Polynomial> = (1..=p.nvars())
        .map(|i| {
            if i <= n {
                Polynomial::var(i, n)
            } else {
                Polynomial::zero(n)
            }
        })
        .collect();
    p.substitute(&imgs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(p in poly(3), q in poly(3), r in poly(3)) {
        prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
        prop_assert_eq!(&p * &Polynomial::one(3), p.clone());
    }

    #[test]
    fn degree_of_product(p in poly(3), q in poly(3)) {
        let prod = &p * &q;
        match (p.total_degree().finite(), q.total_degree().finite()) {
            (Some(a), Some(b)) => prop_assert_eq!(prod.total_degree().finite(), Some(a + b)),
            _ => prop_assert!(prod.is_zero()),
        }
    }

    #[test]
    fn substitution_is_a_homomorphism(p in poly(3), q in poly(3), imgs in prop::collection::vec(poly(2), 3)) {
        let sub = |x: &Polynomial| x.substitute(&imgs).unwrap();
        prop_assert_eq!(sub(&(&p + &q)), &sub(&p) + &sub(&q));
        prop_assert_eq!(sub(&(&p * &q)), &sub(&p) * &sub(&q));
    }

    #[test]
    fn partials_commute(p in poly(3)) {
        let a = p.partial(1).unwrap().partial(3).unwrap();
        let b = p.partial(3).unwrap().partial(1).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn composition_is_substitution(pair in same_n_automorphisms(2), p in poly(4)) {
        let (phi, psi) = (&pair[0], &pair[1]);
        let n = phi.n();
        let both = phi.compose(psi).unwrap();
        for i in 1..=n {
            let direct = phi.coordinate(i).substitute(&psi.coordinates()).unwrap();
            prop_assert_eq!(both.coordinate(i), direct);
        }
        let p = restrict(&p, n);
        let twice = p.substitute(&phi.coordinates()).unwrap().substitute(&psi.coordinates()).unwrap();
        prop_assert_eq!(p.substitute(&both.coordinates()).unwrap(), twice);
    }

    #[test]
    fn group_laws(triple in same_n_automorphisms(3), a in -3i64..=3, b in -3i64..=3) {
        let (f, g, h) = (&triple[0], &triple[1], &triple[2]);
        let n = f.n();
        let id = TriangularAutomorphism::identity(n);
        prop_assert_eq!(f.compose(g).unwrap().compose(h).unwrap(), f.compose(&g.compose(h).unwrap()).unwrap());
        prop_assert!(f.compose(&f.inverse()).unwrap().is_identity());
        prop_assert!(f.inverse().compose(f).unwrap().is_identity());
        prop_assert_eq!(f.compose(&id).unwrap(), f.clone());
        prop_assert_eq!(f.inverse().inverse(), f.clone());
        prop_assert_eq!(f.pow(a + b), f.pow(a).compose(&f.pow(b)).unwrap());
        prop_assert_eq!(f.pow(-a), f.pow(a).inverse());
        prop_assert_eq!(f.compose(g).unwrap().inverse(), g.inverse().compose(&f.inverse()).unwrap());
        let c = f.commutator(g).unwrap();
        prop_assert!(c.is_unitriangular());
        prop_assert_eq!(c.inverse(), g.commutator(f).unwrap());
    }

    #[test]
    fn inverse_degree_is_bounded(phi in automorphism()) {
        let m = phi.degree();
        let bound = DegreeClass::new(phi.n(), m).unwrap().generated_bound();
        prop_assert!(phi.inverse().degree() <= bound);
    }

    #[test]
    fn elementary_factors_rebuild(phi in automorphism()) {
        let n = phi.n();
        let factors: Vec<TriangularAutomorphism> = phi
            .elementary_factorization()
            .iter()
            .map(|e| e.to_automorphism(n))
            .collect();
        prop_assert_eq!(fold(&factors, n), phi);
    }

    #[test]
    fn leibniz_rule(ds in same_n_derivations(1), p in poly(4), q in poly(4)) {
        let d = &ds[0];
        let n = d.n();
        let (p, q) = (restrict(&p, n), restrict(&q, n));
        let lhs = d.apply(&(&p * &q)).unwrap();
        let rhs = &(&d.apply(&p).unwrap() * &q) + &(&p * &d.apply(&q).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bracket_is_a_lie_bracket(ds in same_n_derivations(3), c in small_rational()) {
        let (x, y, z) = (&ds[0], &ds[1], &ds[2]);
        let br = |a: &TriangularDerivation, b: &TriangularDerivation| a.bracket(b).unwrap();
        prop_assert!(br(x, x).is_zero());
        prop_assert_eq!(br(x, y), br(y, x).scale(&integer(-1)));
        let jacobi = br(x, &br(y, z)).add(&br(y, &br(z, x))).unwrap().add(&br(z, &br(x, y))).unwrap();
        prop_assert!(jacobi.is_zero());
        let lhs = br(&x.scale(&c).add(y).unwrap(), z);
        let rhs = br(x, z).scale(&c).add(&br(y, z)).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert!(br(x, y).is_triangular());
    }

    #[test]
    fn exponential_flows(ds in same_n_derivations(1), s in small_rational(), t in small_rational(), p in poly(4)) {
        let d = &ds[0];
        let n = d.n();
        let es = d.exp(&s).unwrap();
        let et = d.exp(&t).unwrap();
        prop_assert!(es.is_unitriangular());
        prop_assert_eq!(d.exp(&(&s + &t)).unwrap(), es.compose(&et).unwrap());
        prop_assert!(d.exp(&(-&s)).unwrap().compose(&es).unwrap().is_identity());
        let p = restrict(&p, n);
        prop_assert_eq!(d.exp_apply(&s, &p).unwrap(), p.substitute(&es.coordinates()).unwrap());
    }

    #[test]
    fn evaluation_is_a_homomorphism(gens in same_n_automorphisms(2), w in prop::collection::vec((0usize..2, any::<bool>()), 0..5), v in prop::collection::vec((0usize..2, any::<bool>()), 0..5)) {
        let n = gens[0].n();
        let mut table = GeneratorTable::new(n);
        table.insert("f", gens[0].clone()).unwrap();
        table.insert("g", gens[1].clone()).unwrap();
        let word = |letters: &[(usize, bool)]| {
            GroupWord::new(letters.iter().map(|&(i, inv)| Letter::new(["f", "g"][i], inv)).collect())
        };
        let (w, v) = (word(&w), word(&v));
        let lhs = table.evaluate(&w.concat(&v)).unwrap();
        let rhs = table.evaluate(&w).unwrap().compose(&table.evaluate(&v).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert!(table.evaluate(&GroupWord::empty()).unwrap().is_identity());
    }

    #[test]
    fn printing_then_parsing_is_identity(phi in automorphism(), ds in same_n_derivations(1), p in poly(3)) {
        prop_assert_eq!(parse_polynomial(&p.to_string()).unwrap(), p.clone());
        prop_assert_eq!(parse_automorphism(&phi.to_string()).unwrap(), phi.clone());
        prop_assert_eq!(parse_derivation(&ds[0].to_string()).unwrap(), ds[0].clone());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closure_is_canonical(ds in same_n_derivations(2), c in (1i64..=4, 1i64..=3)) {
        let basis = lie_closure(&ds, 50).unwrap();
        prop_assert!(basis.is_bracket_closed().unwrap());
        for d in &ds {
            prop_assert!(basis.contains(d));
        }
        prop_assume!(basis.dim() > 0);
        let again = lie_closure(basis.elements(), 50).unwrap();
        prop_assert_eq!(again.dim(), basis.dim());

        let swapped = [ds[1].clone(), ds[0].clone()];
        let scaled = [ds[0].scale(&rational(-c.0, c.1)), ds[1].clone()];
        for other in [lie_closure(&swapped, 50).unwrap(), lie_closure(&scaled, 50).unwrap()] {
            prop_assert_eq!(other.dim(), basis.dim());
            prop_assert!(other.elements().iter().all(|e| basis.contains(e)));
        }
    }

    #[test]
    fn linear_generators_close_in_degree_one(n in 1usize..=4, seeds in prop::collection::vec(any::<u64>(), 1..=3)) {
        let ds: Vec<TriangularDerivation> = seeds.iter().map(|&s| random_derivation(n, 1, s, 3, 0.5)).collect();
        let basis = lie_closure(&ds, 50).unwrap();
        prop_assert!(basis.elements().iter().all(|e| e.degree().at_most(1)));
        prop_assert!(basis.dim() <= n * (n + 1) / 2);
    }
}
