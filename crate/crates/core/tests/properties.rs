mod common;

use std::collections::{BTreeMap, BTreeSet};

use chaindiff::combinatorics::{bell, complement, partitions, stirling2, subsets};
use chaindiff::diff::{faa_di_bruno, nth_chain_diff, substitute};
use chaindiff::dsl::parse_expr;
use chaindiff::numeric::{
    chain_diff_numeric, eval, fixtures, gateaux_numeric, nth_diff_numeric, SequenceScheme, Value,
};
use chaindiff::serialize::{from_json, to_json};
use chaindiff::{canonicalize, structural_equal, Expr};
use common::{random_expr, rel_close, scalar_context, value_close};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn expr_from_seed(seed: u64, depth: u32) -> Expr {
    random_expr(&mut ChaCha8Rng::seed_from_u64(seed), depth)
}

fn point() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonicalize_is_idempotent(seed in any::<u64>()) {
        let c = canonicalize(&expr_from_seed(seed, 3)).unwrap();
        prop_assert_eq!(canonicalize(&c).unwrap(), c);
    }

    #[test]
    fn structural_equal_is_an_equivalence(a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (expr_from_seed(a, 3), expr_from_seed(b, 3));
        // the same value written as a different tree
        let x2 = Expr::sum(vec![Expr::product(vec![Expr::one(), x.clone()]), Expr::zero()]);
        let x3 = canonicalize(&x).unwrap();
        prop_assert!(structural_equal(&x, &x));
        prop_assert!(structural_equal(&x, &x2) && structural_equal(&x2, &x));
        prop_assert!(structural_equal(&x2, &x3) && structural_equal(&x, &x3));
        prop_assert_eq!(structural_equal(&x, &y), structural_equal(&y, &x));
        if structural_equal(&x, &y) {
            prop_assert!(structural_equal(&x2, &y));
        }
    }

    #[test]
    fn canonicalize_preserves_value(
        seed in any::<u64>(), x in point(), y in point(),
        d1 in point(), d2 in point(), d3 in point(),
    ) {
        let e = expr_from_seed(seed, 3);
        let ctx = scalar_context(x, y, [d1, d2, d3]);
        let raw = eval(&e, &ctx).unwrap().scalar().unwrap();
        let canon = eval(&canonicalize(&e).unwrap(), &ctx).unwrap().scalar().unwrap();
        prop_assume!(raw.is_finite() && raw.abs() < 1e12);
        prop_assert!(rel_close(canon, raw, 1e-9), "{} vs {} for {}", canon, raw, e);
    }

    #[test]
    fn text_and_json_round_trip(seed in any::<u64>()) {
        let c = canonicalize(&expr_from_seed(seed, 3)).unwrap();
        let text = c.to_string();
        prop_assert_eq!(&parse_expr(&text, &["x", "y"]).unwrap(), &c, "text: {}", text);
        prop_assert_eq!(from_json(&to_json(&c)).unwrap(), c);
    }

    #[test]
    fn differentials_are_symmetric_in_directions(seed in any::<u64>(), perm in Just([3u32, 1, 2]).prop_shuffle()) {
        let e = expr_from_seed(seed, 2);
        // directions 4..6 are fresh for generated expressions
        let dirs: Vec<u32> = perm.iter().map(|d| d + 3).collect();
        let a = nth_chain_diff(&e, "x", &[4, 5, 6]).unwrap();
        let b = nth_chain_diff(&e, "x", &dirs).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn closed_form_is_symmetric_in_directions(perm in Just([1u32, 2, 3, 4]).prop_shuffle()) {
        let (f, g) = (Expr::func("f"), Expr::func("g"));
        prop_assert_eq!(
            faa_di_bruno(&f, &g, "x", &[1, 2, 3, 4]).unwrap(),
            faa_di_bruno(&f, &g, "x", &perm).unwrap()
        );
    }

    #[test]
    fn differentials_are_linear_in_each_direction(
        seed in any::<u64>(), alpha in -2.0..2.0f64, beta in -2.0..2.0f64,
        x in point(), y in point(), eta in point(), xi in point(), other in point(),
    ) {
        let e = expr_from_seed(seed, 2);
        let d = nth_chain_diff(&e, "x", &[4, 5]).unwrap();
        let at = |slot4: f64| {
            let ctx = scalar_context(x, y, [0.3, -0.7, 1.1]).direction(4, slot4).direction(5, other);
            eval(&d, &ctx).unwrap().scalar().unwrap()
        };
        let combined = at(alpha * eta + beta * xi);
        let split = alpha * at(eta) + beta * at(xi);
        prop_assume!(combined.is_finite() && split.is_finite() && split.abs() < 1e10);
        prop_assert!(rel_close(combined, split, 1e-8), "{} vs {}", combined, split);
        // symbolic linearity: substituting a combination of fresh directions
        let mix = Expr::sum(vec![
            Expr::product(vec![Expr::int(2), Expr::dir(7)]),
            Expr::product(vec![Expr::int(-3), Expr::dir(8)]),
        ]);
        let one = |m: Expr| canonicalize(&substitute(&d, &BTreeMap::new(), &BTreeMap::from([(4, m)]))).unwrap();
        let lhs = one(mix);
        let rhs = canonicalize(&Expr::sum(vec![
            Expr::product(vec![Expr::int(2), one(Expr::dir(7))]),
            Expr::product(vec![Expr::int(-3), one(Expr::dir(8))]),
        ])).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn exact_differentials_are_homogeneous(idx in 0usize..10, alpha in -3.0..3.0f64) {
        let (f, x, eta) = fixtures::smooth_catalog().swap_remove(idx);
        let base = f.exact_differential(std::slice::from_ref(&x), &[(1, eta.clone())]).unwrap();
        let scaled = f.exact_differential(&[x], &[(1, eta.scale(alpha))]).unwrap();
        prop_assert!(value_close(&scaled, &base.scale(alpha), 1e-12));
    }

    #[test]
    fn numeric_differentials_converge_on_smooth_fixtures(idx in 0usize..10, seed in any::<u64>()) {
        let (f, x, eta) = fixtures::smooth_catalog().swap_remove(idx);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jitter = |v: &Value, rng: &mut ChaCha8Rng| {
            let mut out = v.clone();
            match &mut out {
                Value::Scalar(s) => *s += rng.gen_range(-0.2..0.2),
                Value::Vector(xs) => xs.iter_mut().for_each(|c| *c += rng.gen_range(-0.2..0.2)),
            }
            out
        };
        let (x, eta) = (jitter(&x, &mut rng), jitter(&eta, &mut rng));
        let report = chain_diff_numeric(&f, &x, &eta, &SequenceScheme::defaults()).unwrap().with_tolerance(1e-5);
        prop_assert!(report.converged, "{:?}", report);
        prop_assert_eq!(report.converged, report.max_scheme_disagreement <= report.tolerance_used);
        let exact = f.exact_differential(&[x], &[(1, eta)]).unwrap();
        prop_assert!(value_close(&report.estimate, &exact, 1e-5));
    }

    #[test]
    fn numeric_second_differential_is_symmetric(idx in 0usize..10) {
        let (f, x, eta) = fixtures::smooth_catalog().swap_remove(idx);
        let xi = eta.map(|c| 0.5 - c);
        let ab = nth_diff_numeric(&f, &x, &[eta.clone(), xi.clone()], 2).unwrap();
        let ba = nth_diff_numeric(&f, &x, &[xi, eta], 2).unwrap();
        prop_assert!(value_close(&ab, &ba, 1e-6));
    }

    #[test]
    fn gateaux_report_invariant(idx in 0usize..10, theta0 in 0.01..1.0f64) {
        let (f, x, eta) = fixtures::smooth_catalog().swap_remove(idx);
        let scheme = SequenceScheme {
            theta: chaindiff::numeric::ThetaSequence::Geometric { theta0 },
            ..SequenceScheme::geometric()
        };
        let r = gateaux_numeric(&f, &x, &eta, &scheme).unwrap();
        prop_assert_eq!(r.converged, r.max_scheme_disagreement <= r.tolerance_used);
    }
}

fn canonical_blocks(p: &chaindiff::combinatorics::Partition) -> BTreeSet<Vec<usize>> {
    p.blocks().iter().map(|b| b.elements().to_vec()).collect()
}

#[test]
fn partitions_satisfy_their_invariants() {
    for n in 0..=10 {
        let ps = partitions(n).unwrap();
        assert_eq!(ps.len() as u64, bell(n).unwrap(), "n = {n}");
        let by_k: u64 = (0..=n).map(|k| stirling2(n, k).unwrap()).sum();
        assert_eq!(by_k, bell(n).unwrap());
        let mut seen = BTreeSet::new();
        for p in &ps {
            let mut covered = Vec::new();
            for b in p.blocks() {
                assert!(!b.is_empty());
                covered.extend_from_slice(b.elements());
            }
            covered.sort_unstable();
            assert_eq!(covered, (1..=n).collect::<Vec<_>>());
            assert!(seen.insert(canonical_blocks(p)), "duplicate partition {p}");
        }
    }
}

#[test]
fn subsets_and_complements() {
    for n in 0..=8 {
        let ss = subsets(n);
        assert_eq!(ss.len(), 1 << n);
        let distinct: BTreeSet<Vec<usize>> = ss.iter().map(|s| s.elements().to_vec()).collect();
        assert_eq!(distinct.len(), 1 << n);
        for s in &ss {
            assert_eq!(&complement(&complement(s)), s);
            assert_eq!(complement(s).len() + s.len(), n);
        }
    }
}
