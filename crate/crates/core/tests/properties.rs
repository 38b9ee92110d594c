//! Property tests for the algebraic and numerical invariants.

use std::f64::consts::PI;
use std::sync::Arc;

use additive_lab::domain::{GridSpec, Parallelepiped};
use additive_lab::estimator::{classify, mean_value_estimate, AlphaSearchPolicy, LinearityVerdict};
use additive_lab::hamel::{
    period_check, AdditiveMap, ExactEvaluator, HamelBasisSpec, HamelDocument, HamelFunction, QVector, Symbol,
};
use additive_lab::oracle::{FnComplexOracle, FnOracle, Probe};
use additive_lab::quadrature::midpoint_quadrature;
use additive_lab::rational::Rational;
use additive_lab::torus::{torsion_vanishing, GridSubgroup, TorsionVerdict, ValuesTable};
use num_complex::Complex64;
use proptest::prelude::*;

fn rational(h: i64) -> impl Strategy<Value = Rational> {
    (-h..=h, 1..=h).prop_map(|(p, q)| Rational::new(p, q).unwrap())
}

fn qvector(n: usize) -> impl Strategy<Value = QVector> {
    prop::collection::vec(rational(100), n).prop_map(|c| QVector::from_pairs(c.into_iter().enumerate()))
}

fn additive_map(n: usize) -> impl Strategy<Value = AdditiveMap> {
    prop::collection::vec(rational(100), n).prop_map(move |c| AdditiveMap::new(n, c.into_iter().enumerate()).unwrap())
}

fn sqrt2_basis() -> Arc<HamelBasisSpec> {
    Arc::new(
        HamelBasisSpec::new(vec![
            Symbol {
                label: "e1".into(),
                embedding: 1.0,
            },
            Symbol {
                label: "e2".into(),
                embedding: 2f64.sqrt(),
            },
        ])
        .unwrap(),
    )
}

proptest! {
    #[test]
    fn rational_field_laws(a in rational(1000), b in rational(1000), c in rational(1000)) {
        prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
        prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
        prop_assert_eq!(a.clone() - a.clone(), Rational::zero());
    }

    #[test]
    fn rational_text_round_trip(a in rational(10_000)) {
        let back: Rational = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn additive_maps_are_q_homogeneous(
        (f, x, y) in (1usize..=4).prop_flat_map(|n| (additive_map(n), qvector(n), qvector(n))),
        r in rational(100),
    ) {
        prop_assert_eq!(f.evaluate(&x.add(&y)).unwrap(), f.evaluate(&x).unwrap() + f.evaluate(&y).unwrap());
        prop_assert_eq!(f.evaluate(&x.scale(&r)).unwrap(), r * f.evaluate(&x).unwrap());
    }

    #[test]
    fn periods_form_a_subgroup(
        a in rational(50),
        b in rational(50),
        r in rational(50),
        s in rational(50),
    ) {
        // e3 is zero-assigned, so every multiple of e3 is a period; e1 and e2 are not.
        let f = AdditiveMap::new(3, [(0, Rational::one()), (1, a)]).unwrap();
        let p1 = QVector::unit(2).scale(&r);
        let p2 = QVector::unit(2).scale(&s);
        prop_assert!(period_check(&f, &p1).unwrap());
        prop_assert!(period_check(&f, &p1.add(&p2)).unwrap());
        prop_assert!(period_check(&f, &p1.sub(&p2)).unwrap());
        prop_assert!(period_check(&f, &p1.scale(&b)).unwrap());
        prop_assert!(!period_check(&f, &QVector::unit(0)).unwrap());
    }

    #[test]
    fn quadrature_is_linear(a in -5.0..5.0f64, b in -5.0..5.0f64, k in 1..6u32, m in 1..64usize) {
        let domain = Parallelepiped::interval(-1.0, 2.0).unwrap();
        let grid = GridSpec::new(vec![m]).unwrap();
        let zero = Probe::origin(1);
        let u = FnComplexOracle::new(1, move |x: &[f64]| Complex64::new((k as f64 * x[0]).cos(), x[0] * x[0]));
        let v = FnComplexOracle::new(1, |x: &[f64]| Complex64::new(x[0].exp(), 0.0));
        let w = FnComplexOracle::new(1, move |x: &[f64]| {
            Complex64::new((k as f64 * x[0]).cos(), x[0] * x[0]) * a + Complex64::new(x[0].exp(), 0.0) * b
        });
        let qu = midpoint_quadrature(&u, &domain, &grid, &zero).unwrap();
        let qv = midpoint_quadrature(&v, &domain, &grid, &zero).unwrap();
        let qw = midpoint_quadrature(&w, &domain, &grid, &zero).unwrap();
        let scale = 1.0 + qu.norm() * a.abs() + qv.norm() * b.abs();
        prop_assert!((qw - (qu * a + qv * b)).norm() <= 1e-12 * scale);
    }

    #[test]
    fn mean_value_scales_with_the_function(lambda in -20.0..20.0f64, y in -3.0..3.0f64) {
        let domain = Parallelepiped::interval(0.0, 1.0).unwrap();
        let grid = GridSpec::new(vec![256]).unwrap();
        let at = Probe::real(vec![y]).unwrap();
        let g = FnOracle::new(1, |x: &[f64]| 3.0 * x[0] + x[0].sin());
        let lg = FnOracle::new(1, move |x: &[f64]| lambda * (3.0 * x[0] + x[0].sin()));
        let base = mean_value_estimate(&g, &domain, &at, &grid).unwrap();
        let scaled = mean_value_estimate(&lg, &domain, &at, &grid).unwrap();
        prop_assert!((scaled - lambda * base).abs() <= 1e-10 * (1.0 + lambda.abs() * base.abs()));
    }

    #[test]
    fn torus_tables_vanish_only_when_zero(
        (n, q) in prop_oneof![(Just(1usize), 1u32..=12), (Just(2usize), 1u32..=6)],
        picks in prop::collection::vec((any::<prop::sample::Index>(), 1e-3..10.0f64), 0..4),
    ) {
        let group = GridSubgroup::new(n, q).unwrap();
        let points = group.points();
        prop_assert_eq!(points.len(), (q as usize).pow(n as u32));
        prop_assert!(points.iter().all(|p| group.contains(p)));
        let hit: Vec<usize> = picks.iter().map(|(i, _)| i.index(points.len())).collect();
        let table = ValuesTable::from_fn(&group, |x| {
            let k = points.iter().position(|p| p == x).unwrap();
            hit.iter().zip(&picks).filter(|(h, _)| **h == k).map(|(_, (_, v))| v).sum()
        });
        let zero = table.iter().all(|(_, v)| v == 0.0);
        let verdict = torsion_vanishing(&table, q).unwrap();
        prop_assert_eq!(verdict == TorsionVerdict::Zero, zero);
    }

    #[test]
    fn canonical_json_is_a_fixed_point(a in rational(100), b in rational(100), scale in 0.5..10.0f64) {
        let f = HamelFunction::from_labels(sqrt2_basis(), [("e1", a), ("e2", b)], scale).unwrap();
        let once = HamelDocument::from_function(&f).canonical_json();
        let twice = HamelDocument::parse(&once).unwrap().canonical_json();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn farey_candidates_increase(d in 1u64..40) {
        let p = AlphaSearchPolicy::new(d, 0.1).unwrap();
        let c = p.candidates();
        let key = |r: &Rational| (r.denom().clone(), r.numer().clone());
        prop_assert!(c.windows(2).all(|w| key(&w[0]) < key(&w[1])));
        prop_assert!(c.iter().all(|r| r.is_positive() && *r <= Rational::one()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_linear_maps_are_never_refuted(c in prop::collection::vec(-10.0..10.0f64, 1..=2)) {
        let n = c.len();
        let cc = c.clone();
        let f = FnOracle::new(n, move |x: &[f64]| x.iter().zip(&cc).map(|(a, b)| a * b).sum());
        let domain = Parallelepiped::unit_cube(n).unwrap();
        let grid = GridSpec::uniform(n, 32).unwrap();
        let mut probes = domain.generator_probes();
        probes.push(Probe::real(vec![0.37; n]).unwrap());
        probes.push(Probe::real(vec![-1.9; n]).unwrap());
        let result = classify(&f, &domain, &grid, &AlphaSearchPolicy::default(), &probes);
        match result.verdict {
            LinearityVerdict::Linear { c: got } => {
                for (g, e) in got.iter().zip(&c) {
                    prop_assert!((g - e).abs() <= 1e-9);
                }
            }
            other => prop_assert!(false, "c = {:?} gave {:?}", c, other),
        }
    }

    #[test]
    fn wild_hamel_functions_are_caught(
        p in (-20i64..=20).prop_filter("nonzero", |p| *p != 0),
        q in 1i64..=12,
        a1 in rational(10),
    ) {
        let a2 = Rational::new(p, q).unwrap();
        let basis = sqrt2_basis();
        let f = HamelFunction::from_labels(basis.clone(), [("e1", a1), ("e2", a2)], 2.0 * PI).unwrap();
        let domain = Parallelepiped::exact_interval(basis.clone(), 0, &Rational::zero(), &Rational::one()).unwrap();
        let grid = GridSpec::new(vec![256]).unwrap();
        let probes: Vec<Probe> = [1, 7, 49]
            .iter()
            .map(|&d| f.point(QVector::unit(1).scale(&Rational::new(1, d).unwrap())))
            .collect();
        let result = classify(&f, &domain, &grid, &AlphaSearchPolicy::default(), &probes);
        prop_assert!(result.verdict.is_nonlinear(), "{:?}", result.verdict);
    }
}
