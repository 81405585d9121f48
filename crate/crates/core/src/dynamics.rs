//! Finite-resolution experiments on the space of marked Schreier graphs.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{act_beta, EvPeriodicWord};
use crate::error::{Error, Result};
use crate::graph::{delta, isomorphic, DyadicDistance, MarkedGraph};
use crate::group::{enumerate_elements, Generator, GroupElement};
use crate::oracle::SubgroupOracle;
use crate::schreier::{ImplicitGraph, Vertex};

/// `1^(z-1) 0 1^w`.
pub fn single_zero_point(z: usize) -> Result<EvPeriodicWord> {
    EvPeriodicWord::single_zero(z)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTerm {
    pub z: usize,
    pub target: u8,
    /// `2^(z-2)`.
    pub required_radius: usize,
    pub probed_radius: usize,
    pub distance: Option<DyadicDistance>,
    /// Distances to the other two limit graphs, probed at radius 1.
    pub wrong_targets: Vec<(u8, Option<DyadicDistance>)>,
    /// Balls agree with the target up to the required radius.
    pub bound_ok: bool,
    /// Both wrong targets already differ at radius 0 or 1.
    pub wrong_targets_ok: bool,
    /// Set when the radius budget or a resource cap cut the term short.
    pub exhausted: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub radius_budget: usize,
    pub terms: Vec<ConvergenceTerm>,
}

impl ConvergenceReport {
    pub fn all_ok(&self) -> bool {
        self.terms.iter().all(|t| t.bound_ok && t.wrong_targets_ok)
    }
}

/// Compares `F(1^(z-1) 0 1^w)` with each marked limit graph.
pub fn convergence_experiment(z_list: &[usize], radius_budget: usize) -> Result<ConvergenceReport> {
    if let Some(&z) = z_list.iter().find(|&&z| z < 3) {
        return Err(Error::InvalidArgument(format!(
            "sequence terms need z >= 3, got {z}"
        )));
    }
    let terms = z_list
        .par_iter()
        .map(|&z| convergence_term(z, radius_budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        radius_budget,
        terms,
    })
}

fn convergence_term(z: usize, radius_budget: usize) -> Result<ConvergenceTerm> {
    let eta = single_zero_point(z)?;
    let f = ImplicitGraph::orbit_graph(&eta);
    let target = (z % 3) as u8;
    let required_radius = 1usize << (z - 2);
    let probed_radius = radius_budget.min(required_radius + 1);
    let mut exhausted = (probed_radius < required_radius)
        .then(|| format!("radius budget {radius_budget} below required radius {required_radius}"));
    let distance = match delta(&f, &ImplicitGraph::limit_graph(target)?, probed_radius) {
        Ok(d) => Some(d),
        Err(e @ Error::ResourceCap { .. }) => {
            exhausted = Some(e.to_string());
            None
        }
        Err(e) => return Err(e),
    };
    let bound_ok = distance
        .and_then(|d| d.agreement_radius())
        .is_some_and(|r| r as usize >= required_radius);
    let mut wrong_targets = Vec::new();
    for j in (0..3u8).filter(|&j| j != target) {
        wrong_targets.push((j, Some(delta(&f, &ImplicitGraph::limit_graph(j)?, 1)?)));
    }
    let wrong_targets_ok = wrong_targets
        .iter()
        .all(|(_, d)| matches!(d, Some(DyadicDistance::Exact(n)) if *n <= 1));
    Ok(ConvergenceTerm {
        z,
        target,
        required_radius,
        probed_radius,
        distance,
        wrong_targets,
        bound_ok,
        wrong_targets_ok,
        exhausted,
    })
}

/// The nearest limit graph at `radius`, if strictly nearer than the others.
pub fn nearest_limit_graph(f: &ImplicitGraph, radius: usize) -> Result<Option<u8>> {
    let mut scored = Vec::new();
    for i in 0..3u8 {
        let d = delta(f, &ImplicitGraph::limit_graph(i)?, radius)?;
        // Larger agreement radius means closer.
        let closeness = d
            .agreement_radius()
            .map_or(-1, |r| r.min(radius as u32) as i64);
        scored.push((closeness, i));
    }
    scored.sort_by(|a, b| b.cmp(a));
    Ok((scored[0].0 > scored[1].0).then_some(scored[0].1))
}

fn triple_looped(g: &MarkedGraph, v: usize) -> bool {
    let loops = g.loops_at(v);
    [Generator::B, Generator::C, Generator::D]
        .iter()
        .all(|s| loops.contains(s))
}

#[derive(Clone, Debug, Serialize)]
pub struct IsolationReport {
    /// The triple-loop pattern occurs only at `xi_0`.
    pub isolated: bool,
    pub scanned_vertices: usize,
    pub witness: String,
}

/// Scans every vertex within `radius` of the marks of the orbit graphs of
/// `corpus` and of the three limit graphs for the radius-0 pattern of
/// `F(xi_0)`: loops labeled `b`, `c` and `d`. The pattern may only occur at
/// the orbit-graph vertex `xi_0` itself.
pub fn isolated_point_check(corpus: &[EvPeriodicWord], radius: usize) -> Result<IsolationReport> {
    let xi0_name = EvPeriodicWord::ones().to_string();
    let mut graphs: Vec<ImplicitGraph> = corpus.iter().map(ImplicitGraph::orbit_graph).collect();
    for i in 0..3 {
        graphs.push(ImplicitGraph::limit_graph(i)?);
    }
    let mut scanned = 0;
    let mut found_at_xi0 = false;
    for g in &graphs {
        let ball = g.ball(radius)?;
        for v in 0..ball.vertex_count() {
            scanned += 1;
            if !triple_looped(&ball, v) {
                continue;
            }
            if ball.name(v) == xi0_name {
                found_at_xi0 = true;
            } else {
                return Ok(IsolationReport {
                    isolated: false,
                    scanned_vertices: scanned,
                    witness: format!("triple loop at {} in {g}", ball.name(v)),
                });
            }
        }
    }
    let witness = if found_at_xi0 {
        format!("triple loop only at {xi0_name}")
    } else {
        "triple loop not reached within the scanned balls".to_string()
    };
    Ok(IsolationReport {
        isolated: true,
        scanned_vertices: scanned,
        witness,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NonIsolationWitness {
    pub resolution: usize,
    /// A boundary point `u 1^w` with `delta(F(point), F(xi)) <= 2^-resolution`.
    pub point: Option<String>,
    pub distance: Option<DyadicDistance>,
}

/// For every resolution `1..=budget` searches for `eta = u 1^w` with `u`
/// a prefix of `xi` of length at most `max_prefix` such that `F(eta)` is a
/// different graph within `2^-resolution` of `F(xi)`.
pub fn non_isolation_witnesses(
    xi: &EvPeriodicWord,
    budget: usize,
    max_prefix: usize,
) -> Result<Vec<NonIsolationWitness>> {
    let f = ImplicitGraph::orbit_graph(xi);
    (1..=budget)
        .into_par_iter()
        .map(|r| {
            for m in 0..=max_prefix {
                let eta = EvPeriodicWord::new(xi.prefix(m), vec![1])?;
                if crate::boundary::same_orbit(&eta, xi) {
                    continue;
                }
                let d = delta(&ImplicitGraph::orbit_graph(&eta), &f, r)?;
                if d.at_most_pow2(r as i64) {
                    return Ok(NonIsolationWitness {
                        resolution: r,
                        point: Some(eta.to_string()),
                        distance: Some(d),
                    });
                }
            }
            Ok(NonIsolationWitness {
                resolution: r,
                point: None,
                distance: None,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub enum ProbeOutcome {
    /// `act_A(word, start)` matches the target ball.
    Found {
        word: String,
        vertex: String,
    },
    Exhausted {
        visited: usize,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeResult {
    pub start: String,
    pub target: usize,
    pub outcome: ProbeOutcome,
}

/// Breadth-first search over moves of the mark (generators in the order
/// `a, b, c, d`) for a vertex of `start` whose ball of radius `r` is
/// isomorphic to the target ball of radius `r`. Each target is a pair
/// `(ball, r)`. The visited set is kept on vertices of `start`, which
/// identifies exactly the marked graphs reachable by the action.
pub fn minimality_probe(
    starts: &[ImplicitGraph],
    targets: &[(MarkedGraph, usize)],
    step_budget: usize,
) -> Result<Vec<ProbeResult>> {
    let jobs: Vec<(usize, usize)> = (0..starts.len())
        .flat_map(|i| (0..targets.len()).map(move |j| (i, j)))
        .collect();
    jobs.par_iter()
        .map(|&(i, j)| {
            let (target, r) = &targets[j];
            let outcome = probe_one(&starts[i], target, *r, step_budget)?;
            Ok(ProbeResult {
                start: starts[i].to_string(),
                target: j,
                outcome,
            })
        })
        .collect()
}

fn probe_one(
    start: &ImplicitGraph,
    target: &MarkedGraph,
    r: usize,
    budget: usize,
) -> Result<ProbeOutcome> {
    let root = start.marked().clone();
    let mut parent: HashMap<Vertex, Option<(Vertex, Generator)>> =
        HashMap::from([(root.clone(), None)]);
    let mut queue = VecDeque::from([root]);
    let mut visited = 0;
    while let Some(v) = queue.pop_front() {
        if visited >= budget {
            break;
        }
        visited += 1;
        if isomorphic(&start.remarked(v.clone()).ball(r)?, target) {
            // Steps taken first act first, so they end up rightmost.
            let mut letters = Vec::new();
            let mut cur = v.clone();
            while let Some(Some((prev, s))) = parent.get(&cur) {
                letters.push(*s);
                cur = prev.clone();
            }
            let word = GroupElement::reduce(letters);
            return Ok(ProbeOutcome::Found {
                word: word.to_string(),
                vertex: v.name(),
            });
        }
        for s in Generator::ALL {
            let w = start.neighbor(&v, s);
            if !parent.contains_key(&w) {
                parent.insert(w.clone(), Some((v.clone(), s)));
                queue.push_back(w);
            }
        }
    }
    Ok(ProbeOutcome::Exhausted { visited })
}

/// Fraction of the points `g(xi)`, `|g| <= L`, that start with `w`. The set
/// of such points is the vertex set of the radius-`L` ball of `F(xi)`.
pub fn ergodic_average(xi: &EvPeriodicWord, w: &[u8], word_length: usize) -> Result<f64> {
    let ball = ImplicitGraph::orbit_graph(xi).ball(word_length)?;
    let hits = ball
        .names()
        .iter()
        .map(|name| name.parse::<EvPeriodicWord>())
        .collect::<Result<Vec<_>>>()?
        .iter()
        .filter(|p| p.prefix(w.len()) == w)
        .count();
    Ok(hits as f64 / ball.vertex_count() as f64)
}

/// Distance between subgroups: `2^-n` for the first 1-based index `n` in the
/// enumeration up to `enum_cap` where membership differs.
pub fn subgroup_distance(
    h1: &SubgroupOracle,
    h2: &SubgroupOracle,
    enum_cap: usize,
) -> (DyadicDistance, Option<GroupElement>) {
    let elements = enumerate_elements(enum_cap);
    for (i, g) in elements.iter().enumerate() {
        if h1.contains(g) != h2.contains(g) {
            return (DyadicDistance::Exact(i as u32 + 1), Some(g.clone()));
        }
    }
    (DyadicDistance::Bound(elements.len() as u32), None)
}

/// `g H g^-1`.
pub fn stabilizer_conjugation(g: &GroupElement, h: &SubgroupOracle) -> SubgroupOracle {
    h.conjugate(g)
}

#[derive(Clone, Debug, Serialize)]
pub struct SubgroupMetricTable {
    pub enum_cap: usize,
    pub names: Vec<String>,
    pub distances: Vec<Vec<DyadicDistance>>,
}

impl SubgroupMetricTable {
    pub fn build(oracles: &[SubgroupOracle], enum_cap: usize) -> Self {
        let n = oracles.len();
        let distances = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| subgroup_distance(&oracles[i], &oracles[j], enum_cap).0)
                    .collect()
            })
            .collect();
        Self {
            enum_cap,
            names: oracles.iter().map(|o| o.name().to_string()).collect(),
            distances,
        }
    }

    /// First disagreement index, with agreement on the whole enumeration
    /// counted as one past its end.
    fn index(d: DyadicDistance) -> u64 {
        match d {
            DyadicDistance::Exact(n) => n as u64,
            DyadicDistance::Bound(r) => r as u64 + 1,
            DyadicDistance::Zero => u64::MAX,
        }
    }

    /// Symmetry and the strong triangle inequality on the sampled set.
    pub fn is_ultrametric(&self) -> bool {
        let n = self.names.len();
        let idx = |i: usize, j: usize| Self::index(self.distances[i][j]);
        (0..n).all(|i| {
            (0..n).all(|j| {
                idx(i, j) == idx(j, i) && (0..n).all(|k| idx(i, k) >= idx(i, j).min(idx(j, k)))
            })
        })
    }
}

/// `F(g(xi))` and `act_A(g, F(xi))` have isomorphic balls of `radius`.
pub fn equivariance_check(g: &GroupElement, xi: &EvPeriodicWord, radius: usize) -> Result<bool> {
    let moved = ImplicitGraph::orbit_graph(&act_beta(g, xi)).ball(radius)?;
    let acted = ImplicitGraph::orbit_graph(xi).act(g).ball(radius)?;
    Ok(isomorphic(&moved, &acted))
}

/// Checks `delta(A_s G1, A_s G2) <= 2 delta(G1, G2)` at probe radius
/// `radius`, returning the two measured distances.
pub fn lipschitz_check(
    g1: &ImplicitGraph,
    g2: &ImplicitGraph,
    s: Generator,
    radius: usize,
) -> Result<(bool, DyadicDistance, DyadicDistance)> {
    let before = delta(g1, g2, radius)?;
    let t = GroupElement::generator(s);
    let after = delta(&g1.act(&t), &g2.act(&t), radius)?;
    let ok = match before {
        DyadicDistance::Zero => after == DyadicDistance::Zero || after.at_most_pow2(radius as i64),
        DyadicDistance::Exact(n) => after.at_most_pow2(n as i64 - 1),
        DyadicDistance::Bound(r) => after.at_most_pow2(r as i64),
    };
    Ok((ok, before, after))
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionDegreeReport {
    /// `delta` between the marked limit graphs `i < j`, probed at radius 1.
    pub pairwise: Vec<(u8, u8, DyadicDistance)>,
    /// `delta` between `F(xi_0)` and each marked limit graph.
    pub against_isolated: Vec<(u8, DyadicDistance)>,
    pub degree: usize,
}

/// Counts the distinct marked graphs over `xi_0` other than the isolated
/// `F(xi_0)`.
pub fn extension_degree_check() -> Result<ExtensionDegreeReport> {
    let limits: Vec<ImplicitGraph> = (0..3)
        .map(ImplicitGraph::limit_graph)
        .collect::<Result<_>>()?;
    let mut pairwise = Vec::new();
    let mut classes: Vec<usize> = Vec::new();
    for i in 0..3 {
        let mut new_class = true;
        for j in 0..i {
            let d = delta(&limits[j], &limits[i], 1)?;
            pairwise.push((j as u8, i as u8, d));
            if !matches!(d, DyadicDistance::Exact(_)) {
                new_class = false;
            }
        }
        if new_class {
            classes.push(i);
        }
    }
    let f0 = ImplicitGraph::orbit_graph(&EvPeriodicWord::ones());
    let against_isolated = (0..3u8)
        .map(|i| Ok((i, delta(&f0, &limits[i as usize], 1)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExtensionDegreeReport {
        pairwise,
        against_isolated,
        degree: classes.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &str) -> EvPeriodicWord {
        s.parse().unwrap()
    }

    #[test]
    fn short_convergence_run() {
        let report = convergence_experiment(&[3, 4, 5], 64).unwrap();
        assert!(report.all_ok(), "{report:?}");
        assert!(convergence_experiment(&[2], 8).is_err());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let report = convergence_experiment(&[7], 4).unwrap();
        let term = &report.terms[0];
        assert!(term.exhausted.is_some());
        assert!(!term.bound_ok);
        assert_eq!(term.distance, Some(DyadicDistance::Bound(4)));
    }

    #[test]
    fn xi0_is_isolated() {
        let corpus = [
            EvPeriodicWord::ones(),
            word("(01)^w"),
            word("0(1)^w"),
            word("(0)^w"),
        ];
        let report = isolated_point_check(&corpus, 6).unwrap();
        assert!(report.isolated, "{report:?}");
        let limit = ImplicitGraph::limit_graph(0).unwrap().ball(0).unwrap();
        assert!(!triple_looped(&limit, 0));
    }

    #[test]
    fn alternating_point_is_not_isolated() {
        let witnesses = non_isolation_witnesses(&word("(01)^w"), 6, 24).unwrap();
        assert!(witnesses.iter().all(|w| w.point.is_some()), "{witnesses:?}");
        let none = non_isolation_witnesses(&EvPeriodicWord::ones(), 2, 8).unwrap();
        assert!(none.iter().all(|w| w.point.is_none()));
    }

    #[test]
    fn probe_from_target_itself_gives_empty_word() {
        let f = ImplicitGraph::orbit_graph(&word("(01)^w"));
        let target = f.ball(3).unwrap();
        let out = minimality_probe(&[f], &[(target, 3)], 10).unwrap();
        assert!(matches!(&out[0].outcome, ProbeOutcome::Found { word, .. } if word == "1"));
    }

    #[test]
    fn probe_word_reaches_the_matching_vertex() {
        let start = ImplicitGraph::limit_graph(0).unwrap();
        let target = ImplicitGraph::orbit_graph(&word("(01)^w")).ball(3).unwrap();
        let out = minimality_probe(
            std::slice::from_ref(&start),
            &[(target.clone(), 3)],
            100_000,
        )
        .unwrap();
        let ProbeOutcome::Found { word, .. } = &out[0].outcome else {
            panic!("{out:?}")
        };
        let moved = start.act(&word.parse().unwrap());
        assert!(isomorphic(&moved.ball(3).unwrap(), &target));
    }

    #[test]
    fn ergodic_trivial_cylinder() {
        assert_eq!(ergodic_average(&word("(01)^w"), &[], 6).unwrap(), 1.0);
    }

    #[test]
    fn stabilizer_distances() {
        let xi0 = EvPeriodicWord::ones();
        let st = SubgroupOracle::stabilizer(&xi0);
        let st_o = SubgroupOracle::neighborhood_stabilizer(&xi0);
        assert_eq!(
            subgroup_distance(&st, &st, 3).0,
            DyadicDistance::Bound(enumerate_elements(3).len() as u32)
        );
        let (d, witness) = subgroup_distance(&st, &st_o, 3);
        assert!(matches!(d, DyadicDistance::Exact(_)));
        let witness = witness.unwrap();
        assert!(st.contains(&witness) && !st_o.contains(&witness));
    }

    #[test]
    fn metric_table_is_ultrametric() {
        let oracles = vec![
            SubgroupOracle::stabilizer(&EvPeriodicWord::ones()),
            SubgroupOracle::neighborhood_stabilizer(&EvPeriodicWord::ones()),
            SubgroupOracle::stabilizer(&word("(01)^w")),
            SubgroupOracle::stabilizer(&word("0(1)^w")),
            SubgroupOracle::trivial(),
        ];
        let table = SubgroupMetricTable::build(&oracles, 4);
        assert!(table.is_ultrametric());
    }

    #[test]
    fn extension_degree_is_three() {
        let report = extension_degree_check().unwrap();
        assert_eq!(report.degree, 3);
        assert!(report
            .against_isolated
            .iter()
            .all(|(_, d)| matches!(d, DyadicDistance::Exact(0))));
    }
}
