use proptest::prelude::*;

use prodtail::dist::{sample_x, x_from_increments, Method, SimParams};
use prodtail::harness::{Cell, Table};
use prodtail::tail::{
    asymptotic_lower, asymptotic_upper, poisson_ge_bound, poisson_ge_exact, tail_bound_optimal,
    tail_exact, PoissonPair, TailQuery,
};
use prodtail::tree::{log_phi_all, top_k_central, GrowingTree, Tree};
use prodtail::Stream;

fn arb_parents(max_n: usize) -> impl Strategy<Value = Vec<usize>> {
    (1..max_n).prop_flat_map(|m| {
        (0..m)
            .map(|i| 1..=(i + 1))
            .collect::<Vec<_>>()
    })
}

proptest! {
    #[test]
    fn samples_lie_in_unit_interval(seed in any::<u64>(), lambda in 0.05f64..8.0, beta in 0.05f64..=1.0, m in 0usize..3) {
        let method = [Method::Direct, Method::Compound, Method::Beta][m];
        let params = SimParams::new(lambda, seed).unwrap().with_beta_shape(beta).unwrap();
        let mut rng = params.stream();
        for _ in 0..50 {
            let x = sample_x(method, &params, &mut rng).unwrap();
            prop_assert!(x.value > 0.0 && x.value <= 1.0);
            prop_assert!((x.log_value.exp() - x.value).abs() <= 1e-12 * x.value.max(1e-300) || x.value < 1e-300);
        }
    }

    #[test]
    fn increments_product_matches_partial_sums(incs in prop::collection::vec(0.0f64..0.6, 1..20)) {
        let mut incs = incs;
        incs.push(2.0);
        let x = x_from_increments(incs.iter().copied()).unwrap();
        let mut s = 0.0;
        let mut prod = 1.0;
        let mut count = 0;
        for e in &incs {
            s += e;
            if s >= 1.0 {
                break;
            }
            prod *= s;
            count += 1;
        }
        prop_assert_eq!(x.factor_count, count);
        prop_assert!((x.value - prod).abs() <= 1e-12 * prod.max(1e-300));
    }

    #[test]
    fn tail_is_monotone_in_t(lambda in 0.1f64..6.0, a in 1e-10f64..0.999, b in 1e-10f64..0.999) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let p_lo = tail_exact(&TailQuery::new(lo, lambda)).unwrap().ln_p;
        let p_hi = tail_exact(&TailQuery::new(hi, lambda)).unwrap().ln_p;
        prop_assert!(p_lo <= p_hi + 1e-12);
    }

    #[test]
    fn tail_is_monotone_in_lambda(t in 1e-10f64..0.999, a in 0.1f64..6.0, b in 0.1f64..6.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let p_lo = tail_exact(&TailQuery::new(t, lo)).unwrap().ln_p;
        let p_hi = tail_exact(&TailQuery::new(t, hi)).unwrap().ln_p;
        prop_assert!(p_lo <= p_hi + 1e-12);
    }

    #[test]
    fn bounds_bracket_exact(t in 1e-14f64..0.999, lambda in 0.05f64..8.0) {
        let q = TailQuery::new(t, lambda);
        let exact = tail_exact(&q).unwrap().ln_p;
        prop_assert!(exact <= tail_bound_optimal(&q).unwrap().ln_p + 1e-12);
        prop_assert!(asymptotic_lower(&q).unwrap().ln_p <= exact + 1e-12);
        prop_assert!(exact <= asymptotic_upper(&q).unwrap().ln_p + 1e-12);
    }

    #[test]
    fn poisson_comparison_is_bounded(mu in 0.0f64..20.0, nu in 0.0f64..20.0) {
        let pair = PoissonPair::new(mu, nu);
        let ge = poisson_ge_exact(&pair, false).unwrap();
        let gt = poisson_ge_exact(&pair, true).unwrap();
        prop_assert!(gt.ln_p <= ge.ln_p + 1e-12);
        prop_assert!(ge.ln_p <= poisson_ge_bound(&pair).unwrap().ln_p + 1e-12);
        let swapped = poisson_ge_exact(&PoissonPair::new(nu, mu), true).unwrap();
        prop_assert!((ge.p + swapped.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rerooting_matches_direct(parents in arb_parents(48)) {
        let tree = GrowingTree::from_parents(parents).unwrap();
        let table = log_phi_all(&tree);
        for v in 1..=tree.len() {
            let direct = prodtail::tree::log_phi_direct(&tree, v).unwrap();
            prop_assert!((table.get(v).unwrap() - direct).abs() <= 1e-9 * direct.max(1.0));
        }
    }

    #[test]
    fn centrality_ignores_labels(parents in arb_parents(40), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let tree = GrowingTree::from_parents(parents).unwrap();
        let n = tree.len();
        let mut perm: Vec<usize> = (1..=n).collect();
        perm.shuffle(&mut Stream::new(seed));
        let relabel = |v: usize| perm[v - 1];
        let moved = Tree::from_edges(n, tree.edges().map(|(a, b)| (relabel(a), relabel(b)))).unwrap();
        let before = log_phi_all(&tree);
        let after = moved.log_phi_all();
        for v in 1..=n {
            prop_assert!((before.get(v).unwrap() - after.get(relabel(v)).unwrap()).abs() < 1e-9);
        }
        let best = top_k_central(&before, 1).unwrap()[0];
        let min = (1..=n).map(|v| before.get(v).unwrap()).fold(f64::INFINITY, f64::min);
        prop_assert!(before.get(best).unwrap() <= min + 1e-9);
    }

    #[test]
    fn table_formats_agree(values in prop::collection::vec(-1e6f64..1e6, 1..10)) {
        let mut t = Table::new(&["x"]);
        for v in &values {
            t.push(vec![Cell::Num(*v)]);
        }
        let csv = t.to_csv().unwrap();
        let json = t.to_json_value();
        for (line, obj) in csv.lines().skip(1).zip(json.as_array().unwrap()) {
            prop_assert_eq!(line.parse::<f64>().unwrap(), obj["x"].as_f64().unwrap());
        }
    }
}
