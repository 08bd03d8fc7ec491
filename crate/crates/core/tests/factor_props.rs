//! Algebraic laws of the factor operations.

use exactbp::factor::{self, Factor};
use exactbp::model::VarId;
use proptest::prelude::*;

const CARDS: [usize; 5] = [2, 3, 2, 3, 4];

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

/// A factor over a random subset of five variables with fixed cardinalities.
fn arb_factor() -> impl Strategy<Value = Factor> {
    proptest::sample::subsequence((0..CARDS.len()).collect::<Vec<_>>(), 0..=4)
        .prop_flat_map(|vars| {
            let n: usize = vars.iter().map(|&v| CARDS[v]).product();
            (Just(vars), proptest::collection::vec(0.0f64..1.0, n))
        })
        .prop_map(|(vars, values)| {
            let scope: Vec<(VarId, usize)> = vars.iter().map(|&v| (VarId(v), CARDS[v])).collect();
            Factor::new(&scope, values).unwrap()
        })
}

/// Value of `f` at a full assignment of all five variables.
fn eval(f: &Factor, x: &[usize]) -> f64 {
    let a: Vec<usize> = f.scope().iter().map(|v| x[v.0]).collect();
    f.get(&a) * f.log_scale().exp()
}

fn all_assignments() -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &c in &CARDS {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..c).map(move |s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_is_pointwise(f in arb_factor(), g in arb_factor()) {
        let h = factor::multiply(&f, &g).unwrap();
        for x in all_assignments() {
            prop_assert!(close(eval(&h, &x), eval(&f, &x) * eval(&g, &x)));
        }
    }

    #[test]
    fn product_commutes_and_associates(f in arb_factor(), g in arb_factor(), h in arb_factor()) {
        let fg = factor::multiply(&f, &g).unwrap();
        let gf = factor::multiply(&g, &f).unwrap();
        prop_assert_eq!(fg.scope(), gf.scope());
        prop_assert_eq!(fg.values(), gf.values());
        let left = factor::multiply(&fg, &h).unwrap();
        let right = factor::multiply(&f, &factor::multiply(&g, &h).unwrap()).unwrap();
        for (a, b) in left.values().iter().zip(right.values()) {
            prop_assert!(close(*a, *b));
        }
    }

    #[test]
    fn summing_out_in_any_order(f in arb_factor()) {
        let scope = f.scope().to_vec();
        prop_assume!(scope.len() >= 2);
        let (a, b) = (scope[0], scope[scope.len() - 1]);
        let ab = f.marginalize_sum(&[a]).unwrap().marginalize_sum(&[b]).unwrap();
        let ba = f.marginalize_sum(&[b]).unwrap().marginalize_sum(&[a]).unwrap();
        let both = f.marginalize_sum(&[a, b]).unwrap();
        for ((x, y), z) in ab.values().iter().zip(ba.values()).zip(both.values()) {
            prop_assert!(close(*x, *y) && close(*x, *z));
        }
        prop_assert!(close(both.sum(), f.sum()));
    }

    #[test]
    fn max_out_dominates_every_entry(f in arb_factor()) {
        prop_assume!(!f.scope().is_empty());
        let v = f.scope()[0];
        let m = f.marginalize_max(&[v]).unwrap();
        for x in all_assignments() {
            prop_assert!(eval(&m, &x) >= eval(&f, &x));
        }
        prop_assert_eq!(m.max_value(), f.max_value());
    }

    #[test]
    fn division_undoes_product(f in arb_factor(), g in arb_factor()) {
        let g = Factor::new(&g.scope_with_cards(), g.values().iter().map(|x| x + 0.5).collect()).unwrap();
        let back = factor::divide(&factor::multiply(&f, &g).unwrap(), &g).unwrap();
        for x in all_assignments() {
            prop_assert!(close(eval(&back, &x), eval(&f, &x)));
        }
    }

    #[test]
    fn rescaling_keeps_the_function(f in arb_factor()) {
        let mut r = f.clone();
        r.rescale_max();
        for (a, b) in r.scaled_values().iter().zip(f.values()) {
            prop_assert!(close(*a, *b));
        }
        prop_assert!(r.max_value() == 0.0 || r.max_value() == 1.0);
    }

    #[test]
    fn restriction_is_an_indicator_product(f in arb_factor(), keep in proptest::collection::vec(any::<bool>(), 4)) {
        prop_assume!(!f.scope().is_empty());
        let v = f.scope()[0];
        let card = f.cards()[0];
        let allowed: Vec<usize> = (0..card).filter(|&s| keep[s]).collect();
        let r = factor::restrict_var(&f, v, &allowed);
        let ind = Factor::new(&[(v, card)], (0..card).map(|s| if keep[s] { 1.0 } else { 0.0 }).collect()).unwrap();
        let p = factor::multiply(&f, &ind).unwrap();
        prop_assert_eq!(r.values(), p.values());
        let again = factor::restrict_var(&r, v, &allowed);
        prop_assert_eq!(again.values(), r.values());
    }

    #[test]
    fn reversed_layout_round_trips(f in arb_factor()) {
        let mut order = f.scope().to_vec();
        order.reverse();
        let table = f.layout_for(&order);
        let scope: Vec<(VarId, usize)> = order.iter().map(|&v| (v, f.card_of(v).unwrap())).collect();
        let g = Factor::new(&scope, table).unwrap();
        prop_assert_eq!(g.scope(), f.scope());
        prop_assert_eq!(g.values(), f.values());
    }

    #[test]
    fn reduction_reads_the_slice(f in arb_factor(), s in 0usize..2) {
        prop_assume!(!f.scope().is_empty());
        let v = f.scope()[f.scope().len() - 1];
        let r = f.reduce(&[(v, s)]);
        for x in all_assignments().into_iter().filter(|x| x[v.0] == s) {
            prop_assert!(close(eval(&r, &x), eval(&f, &x)));
        }
    }

    #[test]
    fn normalizing_keeps_the_mass(f in arb_factor()) {
        prop_assume!(f.sum() > 0.0);
        let (n, log_mass) = factor::normalize(&f).unwrap();
        prop_assert!((n.sum() - 1.0).abs() < 1e-12);
        prop_assert!(close(log_mass.exp(), f.sum()));
    }
}
