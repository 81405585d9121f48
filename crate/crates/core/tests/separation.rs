use grig_core::boundary::{in_neighborhood_stabilizer, in_stabilizer, separating_element};
use grig_core::EvPeriodicWord;

const CORPUS: [&str; 10] = [
    "(1)^w",
    "(0)^w",
    "(01)^w",
    "0(1)^w",
    "1110(1)^w",
    "(001)^w",
    "10(110)^w",
    "0110(0)^w",
    "(0111)^w",
    "11011(10)^w",
];

/// For every ordered pair of distinct corpus points, the witness fixes a
/// neighborhood of the first and moves the second. Prints the longest
/// witness per common-prefix length.
#[test]
fn corpus_points_are_separated() {
    let points: Vec<EvPeriodicWord> = CORPUS.iter().map(|s| s.parse().unwrap()).collect();
    let mut longest = std::collections::BTreeMap::<usize, usize>::new();
    for xi in &points {
        for eta in points.iter().filter(|eta| *eta != xi) {
            let g = separating_element(xi, eta).unwrap();
            assert!(in_neighborhood_stabilizer(&g, xi), "{g} vs {xi}");
            assert!(!in_stabilizer(&g, eta), "{g} fixes {eta}");
            let common = xi.common_prefix_len(eta).unwrap();
            let entry = longest.entry(common).or_default();
            *entry = (*entry).max(g.len());
        }
    }
    for (common, len) in &longest {
        println!("common prefix {common}: longest witness {len}");
    }
}

#[test]
fn deep_separation_lengths() {
    // Points agreeing on ever longer prefixes of (01)^w.
    let base: EvPeriodicWord = "(01)^w".parse().unwrap();
    for m in 0..12 {
        let mut pre = base.prefix(m);
        pre.push(1 - base.letter(m));
        let eta = EvPeriodicWord::new(pre, vec![1]).unwrap();
        let g = separating_element(&base, &eta).unwrap();
        assert!(in_neighborhood_stabilizer(&g, &base));
        assert!(!in_stabilizer(&g, &eta));
        println!("common prefix {m}: witness length {}", g.len());
    }
}
