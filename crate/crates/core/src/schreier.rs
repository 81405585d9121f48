//! Implicit infinite Schreier graphs: orbit graphs of boundary points, the
//! two-sheeted limit graphs and their four-sheeted Klein cover, together
//! with coset graphs of subgroup oracles.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::boundary::{EvPeriodicWord, OrbitPoint};
use crate::error::{Error, Result};
use crate::graph::{BallSource, MarkedGraph};
use crate::group::{Generator, GroupElement, Klein};
use crate::oracle::SubgroupOracle;

pub const DEFAULT_RESOURCE_CAP: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sheet {
    None,
    Pair(u8),
    Klein(Klein),
}

impl fmt::Display for Sheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sheet::None => Ok(()),
            Sheet::Pair(i) => write!(f, "#{i}"),
            Sheet::Klein(k) => write!(f, "#{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub point: OrbitPoint,
    pub sheet: Sheet,
}

impl Vertex {
    /// The vertex id used in materialized balls: the boundary word followed
    /// by `#sheet` when there are sheets.
    pub fn name(&self) -> String {
        format!("{}{}", self.point, self.sheet)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GraphKind {
    /// `F(xi)`, the orbital Schreier graph.
    Orbit,
    /// `Delta_i` for `i` in `0..3`.
    Limit(u8),
    /// `Delta`, the Klein cover of the limit graphs.
    Cover,
}

/// The label kept as a loop at the `xi_0` fiber of `Delta_i`.
pub fn retained_label(i: u8) -> Generator {
    match i {
        0 => Generator::B,
        1 => Generator::D,
        2 => Generator::C,
        _ => panic!("limit graph index {i} out of range"),
    }
}

/// An infinite marked graph described by its neighbor rule.
#[derive(Clone, Debug)]
pub struct ImplicitGraph {
    kind: GraphKind,
    base: Arc<EvPeriodicWord>,
    marked: Vertex,
    resource_cap: usize,
}

impl ImplicitGraph {
    pub fn orbit_graph(xi: &EvPeriodicWord) -> Self {
        let base = Arc::new(xi.clone());
        let marked = Vertex {
            point: OrbitPoint::new(base.clone()),
            sheet: Sheet::None,
        };
        Self {
            kind: GraphKind::Orbit,
            base,
            marked,
            resource_cap: DEFAULT_RESOURCE_CAP,
        }
    }

    /// `Delta*_i`, marked at `(xi_0, 0)`.
    pub fn limit_graph(i: u8) -> Result<Self> {
        if i > 2 {
            return Err(Error::InvalidArgument(format!(
                "limit graph index must be 0, 1 or 2, got {i}"
            )));
        }
        let base = Arc::new(EvPeriodicWord::ones());
        let marked = Vertex {
            point: OrbitPoint::new(base.clone()),
            sheet: Sheet::Pair(0),
        };
        Ok(Self {
            kind: GraphKind::Limit(i),
            base,
            marked,
            resource_cap: DEFAULT_RESOURCE_CAP,
        })
    }

    /// `Delta`, marked at `(xi_0, 1)`.
    pub fn cover_graph() -> Self {
        let base = Arc::new(EvPeriodicWord::ones());
        let marked = Vertex {
            point: OrbitPoint::new(base.clone()),
            sheet: Sheet::Klein(Klein::One),
        };
        Self {
            kind: GraphKind::Cover,
            base,
            marked,
            resource_cap: DEFAULT_RESOURCE_CAP,
        }
    }

    pub fn with_resource_cap(mut self, cap: usize) -> Self {
        self.resource_cap = cap;
        self
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn base(&self) -> &Arc<EvPeriodicWord> {
        &self.base
    }

    pub fn marked(&self) -> &Vertex {
        &self.marked
    }

    pub fn resource_cap(&self) -> usize {
        self.resource_cap
    }

    /// The vertices over `xi_0` (all sheets); for an orbit graph of the
    /// `xi_0` orbit the single point `xi_0`, otherwise empty.
    pub fn fiber(&self) -> Vec<Vertex> {
        let point = OrbitPoint::new(self.base.clone());
        match self.kind {
            GraphKind::Orbit => OrbitPoint::from_word(self.base.clone(), &EvPeriodicWord::ones())
                .map(|p| Vertex {
                    point: p,
                    sheet: Sheet::None,
                })
                .into_iter()
                .collect(),
            GraphKind::Limit(_) => (0..2)
                .map(|i| Vertex {
                    point: point.clone(),
                    sheet: Sheet::Pair(i),
                })
                .collect(),
            GraphKind::Cover => Klein::ALL
                .iter()
                .map(|&k| Vertex {
                    point: point.clone(),
                    sheet: Sheet::Klein(k),
                })
                .collect(),
        }
    }

    pub fn neighbor(&self, v: &Vertex, s: Generator) -> Vertex {
        let on_fiber = s.is_klein() && v.point.is_base() && self.kind != GraphKind::Orbit;
        if on_fiber {
            let sheet = match (self.kind, v.sheet) {
                (GraphKind::Limit(i), Sheet::Pair(x)) => {
                    if s == retained_label(i) {
                        Sheet::Pair(x)
                    } else {
                        Sheet::Pair(1 - x)
                    }
                }
                (GraphKind::Cover, Sheet::Klein(x)) => {
                    Sheet::Klein(Klein::from_generator(s).expect("Klein generator") * x)
                }
                _ => panic!("vertex {v} does not belong to this graph"),
            };
            return Vertex {
                point: v.point.clone(),
                sheet,
            };
        }
        Vertex {
            point: v.point.apply_generator(s),
            sheet: v.sheet,
        }
    }

    /// Image of `v` under the word `g`, rightmost letter first.
    pub fn trace(&self, v: &Vertex, g: &GroupElement) -> Vertex {
        g.letters()
            .iter()
            .rev()
            .fold(v.clone(), |u, &s| self.neighbor(&u, s))
    }

    /// The same graph with the mark moved along `g`.
    pub fn act(&self, g: &GroupElement) -> Self {
        Self {
            marked: self.trace(&self.marked, g),
            ..self.clone()
        }
    }

    /// Moves the mark to `v`.
    pub fn remarked(&self, v: Vertex) -> Self {
        Self {
            marked: v,
            ..self.clone()
        }
    }

    /// Closed ball around the mark.
    pub fn ball(&self, radius: usize) -> Result<MarkedGraph> {
        self.ball_around(std::slice::from_ref(&self.marked), radius)
    }

    /// Union of the balls of `radius` around every fiber vertex, marked at
    /// the mark. For the limit graphs and the cover this region is invariant
    /// under all sheet permutations.
    pub fn symmetric_ball(&self, radius: usize) -> Result<MarkedGraph> {
        self.ball_around(&self.fiber(), radius)
    }

    /// Materializes all vertices within `radius` of the mark or of some
    /// center, with every edge between them. Vertex 0 is the mark.
    pub fn ball_around(&self, centers: &[Vertex], radius: usize) -> Result<MarkedGraph> {
        let mut index: HashMap<Vertex, usize> = HashMap::new();
        let mut order: Vec<Vertex> = Vec::new();
        let mut queue = VecDeque::new();
        for c in std::iter::once(&self.marked).chain(centers) {
            if !index.contains_key(c) {
                index.insert(c.clone(), order.len());
                order.push(c.clone());
                queue.push_back((c.clone(), 0));
            }
        }
        let mut edges = BTreeSet::new();
        while let Some((v, d)) = queue.pop_front() {
            let i = index[&v];
            for s in Generator::ALL {
                let w = self.neighbor(&v, s);
                if !index.contains_key(&w) && d < radius {
                    if order.len() >= self.resource_cap {
                        return Err(Error::ResourceCap {
                            cap: self.resource_cap,
                        });
                    }
                    index.insert(w.clone(), order.len());
                    order.push(w.clone());
                    queue.push_back((w.clone(), d + 1));
                }
                if let Some(&j) = index.get(&w) {
                    edges.insert((i.min(j), i.max(j), s));
                }
            }
        }
        let names = order.iter().map(Vertex::name).collect();
        MarkedGraph::new(names, edges.into_iter().collect(), 0)
    }
}

impl BallSource for ImplicitGraph {
    fn ball(&self, radius: usize) -> Result<MarkedGraph> {
        ImplicitGraph::ball(self, radius)
    }
}

impl fmt::Display for ImplicitGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GraphKind::Orbit => write!(f, "orbit:{}", self.base)?,
            GraphKind::Limit(i) => write!(f, "limit:{i}")?,
            GraphKind::Cover => write!(f, "cover")?,
        }
        write!(f, " marked at {}", self.marked)
    }
}

/// Partition of a materialized cover ball into the orbits of the sheet
/// multiplication by `subgroup`: `(p, x) ~ (p, x k)`. The ball must be
/// closed under that multiplication, as a symmetric ball is.
pub fn sheet_partition(ball: &MarkedGraph, subgroup: &[Klein]) -> Result<Vec<Vec<usize>>> {
    let mut seen = vec![false; ball.vertex_count()];
    let mut classes = Vec::new();
    for v in 0..ball.vertex_count() {
        if seen[v] {
            continue;
        }
        let (point, sheet) = ball.name(v).rsplit_once('#').ok_or_else(|| {
            Error::InvalidGraph(format!("vertex {:?} carries no sheet", ball.name(v)))
        })?;
        let x: Klein = sheet.parse()?;
        let mut class = Vec::new();
        for &k in subgroup {
            let name = format!("{point}#{}", x * k);
            let w = ball.vertex(&name).ok_or_else(|| {
                Error::IllFormedPartition(format!("ball lacks the sheet image {name}"))
            })?;
            if !seen[w] {
                seen[w] = true;
                class.push(w);
            }
        }
        classes.push(class);
    }
    Ok(classes)
}

/// Ball of the Schreier coset graph of `H`, marked at the coset `H`.
/// Cosets are left cosets `gH`; generators act by left multiplication.
/// Representatives are the first elements reached by breadth-first search
/// in generator order, hence of minimal length. Fails with `CapTooSmall`
/// when a representative longer than `length_cap` would be needed.
pub fn coset_graph_ball(
    h: &SubgroupOracle,
    radius: usize,
    length_cap: usize,
) -> Result<MarkedGraph> {
    let mut reps: Vec<GroupElement> = vec![GroupElement::identity()];
    let mut dist: Vec<usize> = vec![0];
    let mut edges = BTreeSet::new();
    let find = |reps: &[GroupElement], g: &GroupElement| {
        reps.iter().position(|r| h.contains(&r.inverse().mul(g)))
    };
    let mut next = 0;
    while next < reps.len() {
        let i = next;
        next += 1;
        for s in Generator::ALL {
            let g = GroupElement::generator(s).mul(&reps[i]);
            let j = match find(&reps, &g) {
                Some(j) => j,
                None if dist[i] < radius => {
                    if g.len() > length_cap {
                        return Err(Error::CapTooSmall {
                            needed: g.len(),
                            cap: length_cap,
                        });
                    }
                    reps.push(g);
                    dist.push(dist[i] + 1);
                    reps.len() - 1
                }
                None => continue,
            };
            edges.insert((i.min(j), i.max(j), s));
        }
    }
    let names = reps.iter().map(|r| r.to_string()).collect();
    MarkedGraph::new(names, edges.into_iter().collect(), 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{automorphism_group, isomorphic, quotient, verify_schreier};
    use Generator::{A, B, C, D};

    fn word(s: &str) -> EvPeriodicWord {
        s.parse().unwrap()
    }

    #[test]
    fn xi0_has_three_loops() {
        let f = ImplicitGraph::orbit_graph(&EvPeriodicWord::ones());
        let m = f.marked().clone();
        for s in [B, C, D] {
            assert_eq!(f.neighbor(&m, s), m);
        }
        assert_eq!(f.neighbor(&m, A).point.to_word(), word("0(1)^w"));
        assert_eq!(f.act(&GroupElement::generator(A)).marked().name(), "0(1)^w");
    }

    #[test]
    fn neighbor_is_involutive() {
        let graphs = [
            ImplicitGraph::orbit_graph(&word("(01)^w")),
            ImplicitGraph::limit_graph(0).unwrap(),
            ImplicitGraph::limit_graph(1).unwrap(),
            ImplicitGraph::cover_graph(),
        ];
        for g in &graphs {
            let ball = g.ball(6).unwrap();
            assert!(ball.vertex_count() > 1);
            let mut v = g.marked().clone();
            for step in 0..40 {
                let s = Generator::ALL[(step * 7 + 3) % 4];
                let w = g.neighbor(&v, s);
                assert_eq!(g.neighbor(&w, s), v);
                v = w;
            }
        }
    }

    #[test]
    fn generic_radius_one_ball() {
        let f = ImplicitGraph::orbit_graph(&word("(01)^w"));
        assert_eq!(f.ball(1).unwrap().vertex_count(), 3);
    }

    #[test]
    fn limit_graph_fiber_rule() {
        let d0 = ImplicitGraph::limit_graph(0).unwrap();
        let m = d0.marked().clone();
        assert_eq!(d0.neighbor(&m, C).sheet, Sheet::Pair(1));
        assert_eq!(d0.neighbor(&m, D).sheet, Sheet::Pair(1));
        assert_eq!(d0.neighbor(&m, B), m);
        let d1 = ImplicitGraph::limit_graph(1).unwrap();
        let eta = Vertex {
            point: d1.marked().point.apply_generator(A),
            sheet: Sheet::Pair(0),
        };
        for s in Generator::ALL {
            assert_eq!(d1.neighbor(&eta, s).sheet, Sheet::Pair(0));
        }
        assert!(ImplicitGraph::limit_graph(3).is_err());
    }

    #[test]
    fn cover_fiber_rule() {
        let cover = ImplicitGraph::cover_graph();
        let m = cover.marked().clone();
        assert_eq!(cover.neighbor(&m, B).sheet, Sheet::Klein(Klein::B));
        let at_b = cover.neighbor(&m, B);
        assert_eq!(cover.neighbor(&at_b, C).sheet, Sheet::Klein(Klein::D));
    }

    #[test]
    fn balls_are_schreier() {
        for g in [
            ImplicitGraph::orbit_graph(&EvPeriodicWord::ones()),
            ImplicitGraph::orbit_graph(&word("1110(1)^w")),
            ImplicitGraph::limit_graph(2).unwrap(),
            ImplicitGraph::cover_graph(),
        ] {
            let ball = g.ball(10).unwrap();
            assert_eq!(verify_schreier(&ball, 12, Some(10)), Ok(()), "{g}");
        }
    }

    #[test]
    fn symmetric_ball_automorphisms() {
        let line = ImplicitGraph::orbit_graph(&EvPeriodicWord::ones())
            .symmetric_ball(12)
            .unwrap();
        assert_eq!(automorphism_group(&line, true).len(), 1);
        let d2 = ImplicitGraph::limit_graph(2)
            .unwrap()
            .symmetric_ball(12)
            .unwrap();
        assert_eq!(automorphism_group(&d2, true).len(), 2);
        let cover = ImplicitGraph::cover_graph().symmetric_ball(12).unwrap();
        assert_eq!(automorphism_group(&cover, true).len(), 4);
    }

    #[test]
    fn resource_cap_is_enforced() {
        let g = ImplicitGraph::orbit_graph(&word("(01)^w")).with_resource_cap(5);
        assert_eq!(g.ball(10).unwrap_err(), Error::ResourceCap { cap: 5 });
    }

    #[test]
    fn coset_ball_of_stabilizer_matches_orbit_ball() {
        let xi = word("0(1)^w");
        let coset = coset_graph_ball(&SubgroupOracle::stabilizer(&xi), 5, 5).unwrap();
        let orbit = ImplicitGraph::orbit_graph(&xi).ball(5).unwrap();
        assert!(isomorphic(&coset, &orbit));
        assert_eq!(
            coset_graph_ball(&SubgroupOracle::stabilizer(&xi), 5, 2).unwrap_err(),
            Error::CapTooSmall { needed: 3, cap: 2 }
        );
    }

    #[test]
    fn cover_quotients_to_limit_graphs() {
        let cover = ImplicitGraph::cover_graph().symmetric_ball(8).unwrap();
        for (i, k) in [(0u8, Klein::B), (1, Klein::D), (2, Klein::C)] {
            let q = quotient(&cover, &sheet_partition(&cover, &[Klein::One, k]).unwrap()).unwrap();
            assert!(q.is_k_fold(2));
            let limit = ImplicitGraph::limit_graph(i)
                .unwrap()
                .symmetric_ball(8)
                .unwrap();
            assert!(isomorphic(&q.graph, &limit), "limit {i}");
        }
        let q = quotient(&cover, &sheet_partition(&cover, &Klein::ALL).unwrap()).unwrap();
        assert!(q.is_k_fold(4));
        let line = ImplicitGraph::orbit_graph(&EvPeriodicWord::ones())
            .ball(8)
            .unwrap();
        assert!(isomorphic(&q.graph, &line));
    }

    #[test]
    fn coset_ball_of_whole_group_is_a_point() {
        let ball = coset_graph_ball(&SubgroupOracle::whole_group(), 4, 4).unwrap();
        assert_eq!(ball.vertex_count(), 1);
        assert_eq!(ball.loops_at(0).len(), 4);
    }
}
