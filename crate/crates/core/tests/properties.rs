use proptest::prelude::*;

use grig_core::boundary::{act_beta, EvPeriodicWord};
use grig_core::graph::{delta, isomorphic, verify_schreier, DyadicDistance, MarkedGraph};
use grig_core::group::{apply_fast, Bit};
use grig_core::{Generator, GroupElement, ImplicitGraph, Sheet};

fn generator() -> impl Strategy<Value = Generator> {
    prop::sample::select(Generator::ALL.to_vec())
}

fn element(max_len: usize) -> impl Strategy<Value = GroupElement> {
    prop::collection::vec(generator(), 0..=max_len).prop_map(GroupElement::reduce)
}

fn bits(max_len: usize) -> impl Strategy<Value = Vec<Bit>> {
    prop::collection::vec(0u8..2, 0..=max_len)
}

fn point() -> impl Strategy<Value = EvPeriodicWord> {
    (bits(6), prop::collection::vec(0u8..2, 1..4))
        .prop_map(|(pre, per)| EvPeriodicWord::new(pre, per).unwrap())
}

fn limit_or_cover() -> impl Strategy<Value = ImplicitGraph> {
    (0u8..4).prop_map(|i| {
        if i < 3 {
            ImplicitGraph::limit_graph(i).unwrap()
        } else {
            ImplicitGraph::cover_graph()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reduction_is_idempotent(g in element(16)) {
        prop_assert_eq!(GroupElement::reduce(g.letters().iter().copied()), g);
    }

    #[test]
    fn inverse_cancels(g in element(16)) {
        prop_assert!(g.mul(&g.inverse()).is_trivial());
        prop_assert!(g.inverse().inverse() == g);
    }

    #[test]
    fn generators_are_involutions_on_words(s in generator(), x in bits(14)) {
        let e = GroupElement::generator(s);
        prop_assert_eq!(e.apply(&e.apply(&x)), x);
    }

    #[test]
    fn action_law_on_words(g in element(10), h in element(10), x in bits(14)) {
        prop_assert_eq!(g.mul(&h).apply(&x), g.apply(&h.apply(&x)));
    }

    #[test]
    fn action_preserves_prefixes(g in element(10), x in bits(12), cut in 0usize..12) {
        let cut = cut.min(x.len());
        prop_assert_eq!(&g.apply(&x)[..cut], &g.apply(&x[..cut])[..]);
    }

    #[test]
    fn section_composition(f in element(10), h in element(10), u in bits(6)) {
        let lhs = f.mul(&h).section(&u);
        let rhs = f.section(&h.apply(&u)).mul(&h.section(&u));
        prop_assert!(lhs.same_element(&rhs));
    }

    #[test]
    fn sections_contract(g in element(20), x in 0u8..2) {
        let (_, s) = g.split(x);
        prop_assert!(s.len() <= g.len().div_ceil(2) + 1);
    }

    #[test]
    fn fast_rule_matches_recursion(s in prop::sample::select(vec![Generator::B, Generator::C, Generator::D]), x in bits(16)) {
        prop_assert_eq!(apply_fast(s, &x), GroupElement::generator(s).apply(&x));
    }

    #[test]
    fn boundary_action_matches_prefix_action(g in element(12), xi in point()) {
        let image = act_beta(&g, &xi);
        let n = 24;
        prop_assert_eq!(image.prefix(n), g.apply(&xi.prefix(n)));
    }

    #[test]
    fn boundary_action_law(g in element(8), h in element(8), xi in point()) {
        prop_assert_eq!(act_beta(&g.mul(&h), &xi), act_beta(&g, &act_beta(&h, &xi)));
    }

    #[test]
    fn order_kills_element(g in element(6)) {
        let n = g.order(1 << 16).unwrap();
        prop_assert!(g.pow(n).is_trivial());
        prop_assert!(n.is_power_of_two());
    }

    #[test]
    fn neighbor_rule_is_involutive(graph in limit_or_cover(), g in element(12), s in generator()) {
        let v = graph.trace(graph.marked(), &g);
        prop_assert_eq!(graph.neighbor(&graph.neighbor(&v, s), s), v);
    }

    #[test]
    fn sheets_change_only_over_xi0(graph in limit_or_cover(), g in element(14), s in generator()) {
        let v = graph.trace(graph.marked(), &g);
        let w = graph.neighbor(&v, s);
        if v.sheet != w.sheet {
            prop_assert!(v.point.is_base() && w.point.is_base());
            prop_assert!(v.sheet != Sheet::None);
        }
    }

    #[test]
    fn balls_satisfy_schreier_conditions(xi in point(), r in 0usize..10) {
        let ball = ImplicitGraph::orbit_graph(&xi).ball(r).unwrap();
        prop_assert_eq!(verify_schreier(&ball, 12, Some(r)), Ok(()));
    }

    #[test]
    fn delta_is_an_ultrametric(x in point(), y in point(), z in point()) {
        // Agreement radii r satisfy r(x, z) >= min(r(x, y), r(y, z)).
        let graphs: Vec<ImplicitGraph> = [&x, &y, &z].iter().map(|p| ImplicitGraph::orbit_graph(p)).collect();
        let radius = 8;
        let agree = |a: &ImplicitGraph, b: &ImplicitGraph| -> i64 {
            match delta(a, b, radius).unwrap() {
                DyadicDistance::Exact(n) => n as i64 - 1,
                _ => radius as i64,
            }
        };
        let xy = agree(&graphs[0], &graphs[1]);
        let yz = agree(&graphs[1], &graphs[2]);
        let xz = agree(&graphs[0], &graphs[2]);
        prop_assert!(xz >= xy.min(yz));
        prop_assert_eq!(xy, agree(&graphs[1], &graphs[0]));
    }

    #[test]
    fn json_round_trip(xi in point(), g in element(6), r in 0usize..8) {
        let ball = ImplicitGraph::orbit_graph(&xi).act(&g).ball(r).unwrap();
        let back = MarkedGraph::from_json(&ball.to_json()).unwrap();
        prop_assert!(isomorphic(&ball, &back));
        let dot = MarkedGraph::from_dot(&ball.to_dot()).unwrap();
        prop_assert_eq!(dot.to_json(), ball.to_json());
    }
}
