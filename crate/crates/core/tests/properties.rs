use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;

use orthotree_core::farey::{fraction_of_path, path_of_fraction, FareyPair, Fraction, Step};
use orthotree_core::identities::{basmajian_partial, Frontier};
use orthotree_core::orthotree::SectorSpec;
use orthotree_core::relations::{
    geodesic_ptolemy_next, mixed_next, mixed_residual, mixed_supported, quadruplet_residual, triple_gap, triple_gap_excess,
    stable_radius, CurvaturePattern, Root,
};
use orthotree_core::topograph::{discriminant_residual, enumerate_topograph, parallelogram_next, QuadraticForm};
use orthotree_core::verify::{evaluate_sample, Family};
use orthotree_core::weights::{propagate, SeedSpec, SurfaceKind};
use orthotree_core::{Exact, Real, Scalar, F128};

fn big(v: f64) -> F128 {
    F128::from_f64(v)
}

fn weight() -> impl Strategy<Value = f64> {
    (1.0001f64..60.0).prop_map(|v| (v * 1e4).round() / 1e4)
}

fn steps(max: usize) -> impl Strategy<Value = Vec<Step>> {
    prop::collection::vec(prop_oneof![Just(Step::L), Just(Step::R)], 0..max)
}

fn tight(r: f64, tol: f64) -> bool {
    r.is_finite() && r < tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn triple_gap_symmetric_and_sandwiched(x in weight(), y in weight(), z in weight()) {
        let (x, y, z) = (big(x), big(y), big(z));
        let g = triple_gap(&x, &y, &z).unwrap();
        let h = triple_gap(&x, &z, &y).unwrap();
        prop_assert!(tight((g.clone() - h).abs().to_f64(), 1e-30));
        // the gap exceeds the two stable radii it contains
        let excess = triple_gap_excess(&x, &y, &z).unwrap();
        prop_assert!(excess > F128::zero());
        let split = stable_radius(&y).unwrap() + stable_radius(&z).unwrap() + excess;
        prop_assert!(tight(((g.clone() - split) / g).abs().to_f64(), 1e-28));
    }

    #[test]
    fn both_ptolemy_roots_satisfy_quadruplet(x in weight(), y in weight(), z in weight(), yy in weight(), zz in weight()) {
        let v = [x, y, z, yy, zz].map(big);
        for root in [Root::Plus, Root::Minus] {
            let xx = geodesic_ptolemy_next(&v[0], &v[1], &v[2], &v[3], &v[4], root).unwrap();
            let r = quadruplet_residual(&v[0], &v[1], &v[2], &xx, &v[3], &v[4]);
            prop_assert!(tight(r.relative_f64(), 1e-28), "{root:?} residual {}", r.relative_f64());
        }
    }

    #[test]
    fn mixed_next_solves_its_relation(
        pick in 0usize..13,
        x in weight(), y in weight(), z in weight(), yy in weight(), zz in weight(),
    ) {
        let mut supported: Vec<_> = CurvaturePattern::enumerate(4).into_iter().filter(mixed_supported).collect();
        prop_assert_eq!(supported.len(), 13);
        let pattern = supported.swap_remove(pick);
        let v = [x, y, z, yy, zz].map(big);
        if let Ok(xx) = mixed_next(&pattern, &v[0], &v[1], &v[2], &v[3], &v[4]) {
            let r = mixed_residual(&pattern, &v[0], &v[1], &v[2], &xx, &v[3], &v[4]).unwrap();
            prop_assert!(tight(r.relative_f64(), 1e-25), "{pattern} residual {}", r.relative_f64());
        }
    }

    #[test]
    fn moved_configurations_agree(pick in 0usize..32, index in 0u64..10_000, seed in 0u64..1000) {
        let family = Family::all().swap_remove(pick);
        let base = evaluate_sample(family, 128, seed, index, false).unwrap();
        let moved = evaluate_sample(family, 128, seed, index, true).unwrap();
        prop_assert!(tight(base, 1e-9) && tight(moved, 1e-9), "{}: {base:e} {moved:e}", family.name());
    }

    #[test]
    fn mobius_invariance(index in 0u64..100_000, seed in any::<u64>()) {
        let r = evaluate_sample(Family::MobiusInvariance, 128, seed, index, false).unwrap();
        prop_assert!(tight(r, 1e-20), "{r:e}");
    }

    #[test]
    fn farey_paths_round_trip(path in steps(40)) {
        let f = fraction_of_path(&path);
        prop_assert_eq!(path_of_fraction(&f).unwrap(), path.clone());
        let mut pair = FareyPair::unit();
        for s in &path {
            pair = pair.child(*s);
        }
        let (l, r) = (pair.left(), pair.right());
        // neighbours: qm - pn = 1
        let det = BigUint::from(r.numer() * l.denom()) - BigUint::from(l.numer() * r.denom());
        prop_assert!(det.is_one());
        let m = pair.mediant();
        prop_assert!(l.to_f64() < m.to_f64() && m.to_f64() < r.to_f64());
        prop_assert!(Fraction::new(m.numer().clone(), m.denom().clone()).is_ok());
    }

    #[test]
    fn topograph_edges_balance(a in -100i128..=100, b in -100i128..=100, c in -100i128..=100) {
        let form = QuadraticForm::new(a, b, c);
        let t = enumerate_topograph(&form, 6).unwrap();
        prop_assert!(t.passed());
    }

    #[test]
    fn parallelogram_rule(a in -100i128..=100, b in -100i128..=100, c in -100i128..=100,
                          u in (-30i128..30, -30i128..30), v in (-30i128..30, -30i128..30)) {
        let form = QuadraticForm::new(a, b, c);
        let f = |w: (i128, i128)| form.value(w).unwrap();
        let plus = (u.0 + v.0, u.1 + v.1);
        let minus = (u.0 - v.0, u.1 - v.1);
        prop_assert_eq!(parallelogram_next(f(u), f(v), f(minus)).unwrap(), f(plus));
        let det = u.0 * v.1 - u.1 * v.0;
        if det.abs() == 1 {
            prop_assert_eq!(discriminant_residual(f(u), f(v), f(plus), f(minus), &form).unwrap(), 0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_frontier_certificate(a in 2i64..40, b in 2i64..40, c in 2i64..40, depth in 0u32..6) {
        let seed = SeedSpec::<Exact>::from_ints(SurfaceKind::Pants, [a, b, c]).unwrap();
        let sector = SectorSpec::all_six()[0];
        let tree = propagate(&seed, sector, depth).unwrap();
        let cert = basmajian_partial::<Exact, F128>(&tree, &Frontier::Depth(depth)).unwrap();
        prop_assert!(tight(cert.residual().abs().to_f64(), 1e-30));
        for r in tree.vertex_residuals() {
            prop_assert!(r.diff.is_zero());
        }
    }

    #[test]
    fn exact_and_float_trees_agree(kind in prop_oneof![Just(SurfaceKind::Pants), Just(SurfaceKind::Torus)],
                                   a in 2i64..40, b in 2i64..40, c in 2i64..40) {
        let exact = SeedSpec::<Exact>::from_ints(kind, [a, b, c]).unwrap();
        let float = exact.cast::<F128>();
        let sector = SectorSpec::all_six()[1];
        let te = propagate(&exact, sector, 6).unwrap();
        let tf = propagate(&float, sector, 6).unwrap();
        for r in 0..te.topology.regions.len() as u32 {
            let e = F128::from_ratio(te.weight(r));
            let rel = ((e.clone() - tf.weight(r).clone()) / e).abs().to_f64();
            prop_assert!(tight(rel, 1e-30), "region {} rel {rel:e}", te.topology.region_word(r));
        }
        prop_assert!(tight(te.dual_derivation_deviation::<F128>().unwrap(), 1e-25));
    }
}
