//! Finite marked graphs with edges labeled by generators.
//!
//! Edges are undirected, since every generator is an involution. A loop
//! occupies a single slot in the incidence list of its vertex, so a Schreier
//! graph has exactly one incident edge per label at every vertex.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::{self, Write as _};
use std::sync::{Arc, LazyLock};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{reduced_words, Generator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub label: Generator,
}

impl Edge {
    fn normalized(u: usize, v: usize, label: Generator) -> Self {
        Self {
            u: u.min(v),
            v: u.max(v),
            label,
        }
    }

    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

/// A finite marked graph. Immutable once built.
#[derive(Clone, Debug)]
pub struct MarkedGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    marked: usize,
    incident: Vec<Vec<(Generator, usize)>>,
    edge_set: HashSet<Edge>,
}

impl MarkedGraph {
    /// Builds a graph from vertex names and index-based edges. Names must be
    /// unique and two edges may not share both endpoints and label.
    pub fn new(
        names: Vec<String>,
        edges: Vec<(usize, usize, Generator)>,
        marked: usize,
    ) -> Result<Self> {
        let n = names.len();
        if marked >= n {
            return Err(Error::InvalidGraph(format!(
                "marked vertex {marked} out of range"
            )));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex id {name:?}")));
            }
        }
        let mut edge_set = HashSet::with_capacity(edges.len());
        let mut incident = vec![Vec::new(); n];
        let mut list = Vec::with_capacity(edges.len());
        for (u, v, label) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge endpoint out of range: ({u}, {v})"
                )));
            }
            let e = Edge::normalized(u, v, label);
            if !edge_set.insert(e) {
                return Err(Error::InvalidGraph(format!(
                    "repeated edge {label} between {:?} and {:?}",
                    names[e.u], names[e.v]
                )));
            }
            incident[e.u].push((label, e.v));
            if !e.is_loop() {
                incident[e.v].push((label, e.u));
            }
            list.push(e);
        }
        list.sort();
        for inc in &mut incident {
            inc.sort();
        }
        Ok(Self {
            names,
            index,
            edges: list,
            marked,
            incident,
            edge_set,
        })
    }

    /// Builds a graph from named vertices and edges.
    pub fn from_named<S: AsRef<str>>(
        vertices: &[S],
        edges: &[(S, S, Generator)],
        marked: &str,
    ) -> Result<Self> {
        let names: Vec<String> = vertices.iter().map(|s| s.as_ref().to_string()).collect();
        let lookup: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let find = |s: &str| {
            lookup
                .get(s)
                .copied()
                .ok_or_else(|| Error::InvalidGraph(format!("unknown vertex id {s:?}")))
        };
        let edges = edges
            .iter()
            .map(|(u, v, l)| Ok((find(u.as_ref())?, find(v.as_ref())?, *l)))
            .collect::<Result<Vec<_>>>()?;
        let marked = find(marked)?;
        Self::new(names, edges, marked)
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn marked(&self) -> usize {
        self.marked
    }

    pub fn with_mark(&self, v: usize) -> MarkedGraph {
        assert!(v < self.vertex_count());
        MarkedGraph {
            marked: v,
            ..self.clone()
        }
    }

    /// `(label, other endpoint)` pairs at `v`; a loop appears once.
    pub fn incident(&self, v: usize) -> &[(Generator, usize)] {
        &self.incident[v]
    }

    pub fn label_count(&self, v: usize, s: Generator) -> usize {
        self.incident[v].iter().filter(|(l, _)| *l == s).count()
    }

    /// The unique `s`-neighbor of `v`, if there is exactly one.
    pub fn neighbor(&self, v: usize, s: Generator) -> Option<usize> {
        let mut it = self.incident[v].iter().filter(|(l, _)| *l == s);
        match (it.next(), it.next()) {
            (Some(&(_, w)), None) => Some(w),
            _ => None,
        }
    }

    pub fn has_edge(&self, u: usize, v: usize, s: Generator) -> bool {
        self.edge_set.contains(&Edge::normalized(u, v, s))
    }

    /// At most one incident edge per label at every vertex.
    pub fn is_deterministic(&self) -> bool {
        (0..self.vertex_count())
            .all(|v| Generator::ALL.iter().all(|&s| self.label_count(v, s) <= 1))
    }

    pub fn loops_at(&self, v: usize) -> Vec<Generator> {
        self.incident[v]
            .iter()
            .filter(|(_, w)| *w == v)
            .map(|(l, _)| *l)
            .collect()
    }

    /// Breadth-first distances from `center`; `None` for unreachable vertices.
    pub fn distances_from(&self, center: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        dist[center] = Some(0);
        let mut queue = VecDeque::from([center]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &(_, w) in &self.incident[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.distances_from(self.marked).iter().all(Option::is_some)
    }

    /// Subgraph induced on `keep` (which must contain `marked`), preserving
    /// vertex order.
    pub fn induced(&self, keep: &[bool], marked: usize) -> MarkedGraph {
        let mut remap = vec![usize::MAX; self.vertex_count()];
        let mut names = Vec::new();
        for (v, &k) in keep.iter().enumerate() {
            if k {
                remap[v] = names.len();
                names.push(self.names[v].clone());
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| keep[e.u] && keep[e.v])
            .map(|e| (remap[e.u], remap[e.v], e.label))
            .collect();
        MarkedGraph::new(names, edges, remap[marked]).expect("subgraph of a valid graph")
    }

    /// The closed ball of radius `radius` around `center`, marked at `center`.
    pub fn closed_ball(&self, center: usize, radius: usize) -> MarkedGraph {
        let dist = self.distances_from(center);
        let keep: Vec<bool> = dist
            .iter()
            .map(|d| d.is_some_and(|d| d <= radius))
            .collect();
        self.induced(&keep, center)
    }

    /// Largest distance from the marked vertex to a reachable vertex.
    pub fn eccentricity(&self) -> usize {
        self.distances_from(self.marked)
            .into_iter()
            .flatten()
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphJson::from(self)).expect("graph serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&GraphJson::from(self)).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<MarkedGraph> {
        let raw: GraphJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        raw.try_into()
    }

    /// Graphviz rendering: edge labels carry generators, the marked vertex is
    /// drawn as a double circle.
    pub fn to_dot(&self) -> String {
        let json = GraphJson::from(self);
        let mut out = String::from("graph G {\n");
        for v in &json.vertices {
            let shape = if *v == json.marked {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(out, "  {} [shape={shape}];", quote(v));
        }
        for (u, v, l) in &json.edges {
            let _ = writeln!(out, "  {} -- {} [label=\"{l}\"];", quote(u), quote(v));
        }
        out.push_str("}\n");
        out
    }

    /// Reads back the dialect written by [`MarkedGraph::to_dot`].
    pub fn from_dot(text: &str) -> Result<MarkedGraph> {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        let mut marked = None;
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with("graph") || line == "}" {
                continue;
            }
            let line = line.trim_end_matches(';');
            let (head, attrs) = line
                .split_once('[')
                .ok_or_else(|| Error::Parse(format!("unexpected DOT line {line:?}")))?;
            let attrs = attrs.trim_end_matches(']');
            let mut rest = head.trim();
            let first = unquote(&mut rest)?;
            rest = rest.trim_start();
            if let Some(after) = rest.strip_prefix("--") {
                let mut after = after.trim_start();
                let second = unquote(&mut after)?;
                let label = attrs
                    .trim()
                    .strip_prefix("label=\"")
                    .and_then(|s| s.strip_suffix('"'))
                    .ok_or_else(|| Error::Parse(format!("edge without label: {line:?}")))?;
                edges.push((first, second, label.parse::<Generator>()?));
            } else {
                if attrs.contains("doublecircle") {
                    marked = Some(first.clone());
                }
                vertices.push(first);
            }
        }
        let marked = marked.ok_or_else(|| Error::Parse("no marked vertex in DOT input".into()))?;
        MarkedGraph::from_named(&vertices, &edges, &marked)
    }
}

impl fmt::Display for MarkedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn unquote(rest: &mut &str) -> Result<String> {
    let s = rest
        .strip_prefix('"')
        .ok_or_else(|| Error::Parse(format!("expected quoted id at {rest:?}")))?;
    let mut out = String::new();
    let mut chars = s.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => {
                if let Some((_, c)) = chars.next() {
                    out.push(c);
                }
            }
            '"' => {
                *rest = &s[i + 1..];
                return Ok(out);
            }
            c => out.push(c),
        }
    }
    Err(Error::Parse("unterminated quoted id".into()))
}

/// Serialized form: `{vertices: [id...], edges: [[u, v, label]...], marked: id}`
/// with vertices sorted and each edge written `u <= v`, edges sorted.
#[derive(Debug, Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<String>,
    edges: Vec<(String, String, String)>,
    marked: String,
}

impl From<&MarkedGraph> for GraphJson {
    fn from(g: &MarkedGraph) -> Self {
        let mut vertices = g.names.clone();
        vertices.sort();
        let mut edges: Vec<(String, String, String)> = g
            .edges
            .iter()
            .map(|e| {
                let (a, b) = (g.names[e.u].clone(), g.names[e.v].clone());
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                (a, b, e.label.to_string())
            })
            .collect();
        edges.sort();
        Self {
            vertices,
            edges,
            marked: g.names[g.marked].clone(),
        }
    }
}

impl TryFrom<GraphJson> for MarkedGraph {
    type Error = Error;

    fn try_from(raw: GraphJson) -> Result<Self> {
        let edges = raw
            .edges
            .iter()
            .map(|(u, v, l)| Ok((u.clone(), v.clone(), l.parse::<Generator>()?)))
            .collect::<Result<Vec<_>>>()?;
        MarkedGraph::from_named(&raw.vertices, &edges, &raw.marked)
    }
}

/// A vertex bijection, `map[v]` is the image of `v`.
pub type VertexMap = Vec<usize>;

fn signature(g: &MarkedGraph, v: usize) -> Vec<(Generator, bool)> {
    let mut sig: Vec<(Generator, bool)> = g.incident[v].iter().map(|&(l, w)| (l, w == v)).collect();
    sig.sort();
    sig
}

/// Simultaneous traversal of two deterministic graphs from `start1` and
/// `start2`. Returns the unique label-preserving map if it is an
/// isomorphism of the components containing the start vertices.
fn parallel_traversal(
    g1: &MarkedGraph,
    g2: &MarkedGraph,
    start1: usize,
    start2: usize,
) -> Option<VertexMap> {
    let mut forward = vec![usize::MAX; g1.vertex_count()];
    let mut backward = vec![usize::MAX; g2.vertex_count()];
    forward[start1] = start2;
    backward[start2] = start1;
    let mut queue = VecDeque::from([start1]);
    while let Some(u) = queue.pop_front() {
        let v = forward[u];
        for s in Generator::ALL {
            match (g1.neighbor(u, s), g2.neighbor(v, s)) {
                (None, None) => {}
                (Some(x), Some(y)) => {
                    if forward[x] == usize::MAX && backward[y] == usize::MAX {
                        forward[x] = y;
                        backward[y] = x;
                        queue.push_back(x);
                    } else if forward[x] != y || backward[y] != x {
                        return None;
                    }
                }
                _ => return None,
            }
        }
    }
    Some(forward)
}

/// Backtracking search for label-preserving isomorphisms with an optional
/// pinned pair, pruned by loop/label signatures. Stops after `limit` hits.
fn backtrack(
    g1: &MarkedGraph,
    g2: &MarkedGraph,
    pin: Option<(usize, usize)>,
    limit: usize,
) -> Vec<VertexMap> {
    let n = g1.vertex_count();
    let mut found = Vec::new();
    if n != g2.vertex_count() || g1.edge_count() != g2.edge_count() || n == 0 {
        return found;
    }
    let sig1: Vec<_> = (0..n).map(|v| signature(g1, v)).collect();
    let sig2: Vec<_> = (0..n).map(|v| signature(g2, v)).collect();
    let mut sorted1 = sig1.clone();
    let mut sorted2 = sig2.clone();
    sorted1.sort();
    sorted2.sort();
    if sorted1 != sorted2 {
        return found;
    }
    // Assign vertices in breadth-first order so each new vertex touches
    // already-assigned ones whenever possible.
    let root = pin.map_or(g1.marked, |(u, _)| u);
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in std::iter::once(root).chain(0..n) {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(_, w) in &g1.incident[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }

    struct State<'a> {
        g1: &'a MarkedGraph,
        g2: &'a MarkedGraph,
        sig1: &'a [Vec<(Generator, bool)>],
        sig2: &'a [Vec<(Generator, bool)>],
        order: Vec<usize>,
        forward: Vec<usize>,
        used: Vec<bool>,
        pin: Option<(usize, usize)>,
        limit: usize,
        found: Vec<VertexMap>,
    }

    fn consistent(st: &State, u: usize, v: usize) -> bool {
        if st.sig1[u] != st.sig2[v] {
            return false;
        }
        if let Some((pu, pv)) = st.pin {
            if (u == pu) != (v == pv) {
                return false;
            }
        }
        for &(l, w) in &st.g1.incident[u] {
            let image = if w == u { v } else { st.forward[w] };
            if image != usize::MAX && !st.g2.has_edge(v, image, l) {
                return false;
            }
        }
        for &(l, y) in &st.g2.incident[v] {
            if y == v {
                continue;
            }
            // y must be the image of an assigned neighbor of u, if assigned at all.
            if st.used[y] {
                let pre = st.forward.iter().position(|&f| f == y).unwrap();
                if !st.g1.has_edge(u, pre, l) {
                    return false;
                }
            }
        }
        true
    }

    fn search(st: &mut State, depth: usize) {
        if st.found.len() >= st.limit {
            return;
        }
        if depth == st.order.len() {
            st.found.push(st.forward.clone());
            return;
        }
        let u = st.order[depth];
        for v in 0..st.g2.vertex_count() {
            if st.used[v] || !consistent(st, u, v) {
                continue;
            }
            st.forward[u] = v;
            st.used[v] = true;
            search(st, depth + 1);
            st.forward[u] = usize::MAX;
            st.used[v] = false;
            if st.found.len() >= st.limit {
                return;
            }
        }
    }

    let mut st = State {
        g1,
        g2,
        sig1: &sig1,
        sig2: &sig2,
        order,
        forward: vec![usize::MAX; n],
        used: vec![false; n],
        pin,
        limit,
        found: Vec::new(),
    };
    search(&mut st, 0);
    found.append(&mut st.found);
    found
}

fn deterministic_connected(g: &MarkedGraph) -> bool {
    g.is_deterministic() && g.is_connected()
}

/// A mark-preserving, label-preserving isomorphism, if one exists.
pub fn find_isomorphism(g1: &MarkedGraph, g2: &MarkedGraph) -> Option<VertexMap> {
    if g1.vertex_count() != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return None;
    }
    if deterministic_connected(g1) && deterministic_connected(g2) {
        return parallel_traversal(g1, g2, g1.marked, g2.marked);
    }
    backtrack(g1, g2, Some((g1.marked, g2.marked)), 1).pop()
}

pub fn isomorphic(g1: &MarkedGraph, g2: &MarkedGraph) -> bool {
    find_isomorphism(g1, g2).is_some()
}

/// All automorphisms; with `as_unmarked` the marked vertex may move.
pub fn automorphism_group(g: &MarkedGraph, as_unmarked: bool) -> Vec<VertexMap> {
    if deterministic_connected(g) {
        let root = g.marked;
        let root_sig = signature(g, root);
        let candidates: Vec<usize> = if as_unmarked {
            (0..g.vertex_count())
                .filter(|&v| signature(g, v) == root_sig)
                .collect()
        } else {
            vec![root]
        };
        return candidates
            .into_iter()
            .filter_map(|v| parallel_traversal(g, g, root, v))
            .collect();
    }
    let pin = (!as_unmarked).then_some((g.marked, g.marked));
    backtrack(g, g, pin, usize::MAX)
}

/// Orbits of the group generated by `maps` as a vertex partition.
pub fn orbit_partition(vertex_count: usize, maps: &[VertexMap]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..vertex_count).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for map in maps {
        for (v, &w) in map.iter().enumerate() {
            let (a, b) = (find(&mut parent, v), find(&mut parent, w));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut classes: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..vertex_count {
        let r = find(&mut parent, v);
        classes.entry(r).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = classes.into_values().collect();
    out.sort();
    out
}

/// Result of collapsing a graph along a vertex partition.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub graph: MarkedGraph,
    /// Class index of every original vertex.
    pub class_of: Vec<usize>,
    pub class_sizes: Vec<usize>,
}

impl Quotient {
    /// Whether every class has exactly `k` vertices.
    pub fn is_k_fold(&self, k: usize) -> bool {
        self.class_sizes.iter().all(|&s| s == k)
    }
}

/// Collapses every class of `partition` to one vertex named after its
/// smallest member. Parallel edges with equal label collapse as well; for
/// each class and label all members must lead into the same class.
pub fn quotient(g: &MarkedGraph, partition: &[Vec<usize>]) -> Result<Quotient> {
    let n = g.vertex_count();
    let mut class_of = vec![usize::MAX; n];
    for (c, class) in partition.iter().enumerate() {
        if class.is_empty() {
            return Err(Error::IllFormedPartition("empty class".into()));
        }
        for &v in class {
            if v >= n || class_of[v] != usize::MAX {
                return Err(Error::IllFormedPartition(format!(
                    "vertex {v} is out of range or repeated"
                )));
            }
            class_of[v] = c;
        }
    }
    if let Some(v) = class_of.iter().position(|&c| c == usize::MAX) {
        return Err(Error::IllFormedPartition(format!(
            "vertex {:?} is in no class",
            g.names[v]
        )));
    }
    let mut target: HashMap<(usize, Generator), usize> = HashMap::new();
    for v in 0..n {
        for &(l, w) in &g.incident[v] {
            let (cv, cw) = (class_of[v], class_of[w]);
            if let Some(&prev) = target.get(&(cv, l)) {
                if prev != cw {
                    return Err(Error::IllFormedPartition(format!(
                        "label {l} leads from class of {:?} into two different classes",
                        g.names[v]
                    )));
                }
            }
            target.insert((cv, l), cw);
        }
    }
    let names = partition
        .iter()
        .map(|class| class.iter().map(|&v| g.names[v].clone()).min().unwrap())
        .collect();
    let mut edges: Vec<Edge> = g
        .edges
        .iter()
        .map(|e| Edge::normalized(class_of[e.u], class_of[e.v], e.label))
        .collect();
    edges.sort();
    edges.dedup();
    let graph = MarkedGraph::new(
        names,
        edges.into_iter().map(|e| (e.u, e.v, e.label)).collect(),
        class_of[g.marked],
    )?;
    Ok(Quotient {
        graph,
        class_of,
        class_sizes: partition.iter().map(Vec::len).collect(),
    })
}

/// Distance in the space of marked graphs, reported exactly when a
/// distinguishing radius was found and as a certified bound otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n", rename_all = "lowercase")]
pub enum DyadicDistance {
    /// The graphs are isomorphic.
    Zero,
    /// `2^-n`: balls of radius `n - 1` agree, balls of radius `n` do not.
    Exact(u32),
    /// At most `2^-(R + 1)`: balls agree up to radius `R`.
    Bound(u32),
}

impl DyadicDistance {
    /// Largest radius at which balls are known to agree (`None` when even
    /// radius-0 balls differ; `u32::MAX` for `Zero`).
    pub fn agreement_radius(&self) -> Option<u32> {
        match *self {
            DyadicDistance::Zero => Some(u32::MAX),
            DyadicDistance::Exact(0) => None,
            DyadicDistance::Exact(n) => Some(n - 1),
            DyadicDistance::Bound(r) => Some(r),
        }
    }

    /// Upper bound on the distance as a float.
    pub fn upper_bound(&self) -> f64 {
        match *self {
            DyadicDistance::Zero => 0.0,
            DyadicDistance::Exact(n) => 2f64.powi(-(n as i32)),
            DyadicDistance::Bound(r) => 2f64.powi(-(r as i32) - 1),
        }
    }

    pub fn exact_value(&self) -> Option<f64> {
        match *self {
            DyadicDistance::Zero => Some(0.0),
            DyadicDistance::Exact(n) => Some(2f64.powi(-(n as i32))),
            DyadicDistance::Bound(_) => None,
        }
    }

    /// Certifies `self <= 2^-n`.
    pub fn at_most_pow2(&self, n: i64) -> bool {
        match *self {
            DyadicDistance::Zero => true,
            DyadicDistance::Exact(m) => m as i64 >= n,
            DyadicDistance::Bound(r) => r as i64 + 1 >= n,
        }
    }
}

impl fmt::Display for DyadicDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DyadicDistance::Zero => write!(f, "zero"),
            DyadicDistance::Exact(n) => write!(f, "exact {n} (distance 2^-{n})"),
            DyadicDistance::Bound(r) => write!(f, "bound {r} (distance <= 2^-{})", r + 1),
        }
    }
}

/// Anything that can hand out closed balls around its marked vertex.
pub trait BallSource {
    fn ball(&self, radius: usize) -> Result<MarkedGraph>;

    /// Total number of vertices for finite graphs.
    fn finite_size(&self) -> Option<usize> {
        None
    }
}

impl BallSource for MarkedGraph {
    fn ball(&self, radius: usize) -> Result<MarkedGraph> {
        Ok(self.closed_ball(self.marked, radius))
    }

    fn finite_size(&self) -> Option<usize> {
        Some(self.vertex_count())
    }
}

/// `delta` between marked graphs, probing balls up to `max_radius`.
pub fn delta<G1: BallSource + ?Sized, G2: BallSource + ?Sized>(
    g1: &G1,
    g2: &G2,
    max_radius: usize,
) -> Result<DyadicDistance> {
    let big1 = g1.ball(max_radius)?;
    let big2 = g2.ball(max_radius)?;
    let d1 = big1.distances_from(big1.marked);
    let d2 = big2.distances_from(big2.marked);
    for n in 0..=max_radius {
        let keep1: Vec<bool> = d1.iter().map(|d| d.is_some_and(|d| d <= n)).collect();
        let keep2: Vec<bool> = d2.iter().map(|d| d.is_some_and(|d| d <= n)).collect();
        let b1 = big1.induced(&keep1, big1.marked);
        let b2 = big2.induced(&keep2, big2.marked);
        if !isomorphic(&b1, &b2) {
            return Ok(DyadicDistance::Exact(n as u32));
        }
        // Both balls already exhausted finite graphs: the graphs themselves agree.
        if let (Some(s1), Some(s2)) = (g1.finite_size(), g2.finite_size()) {
            if b1.vertex_count() == s1 && b2.vertex_count() == s2 {
                return Ok(DyadicDistance::Zero);
            }
        }
    }
    Ok(DyadicDistance::Bound(max_radius as u32))
}

/// Why a graph fails to be a Schreier graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "lowercase")]
pub enum SchreierViolation {
    /// Condition (ii): a vertex lacks, or has several, edges with one label.
    Determinism {
        vertex: String,
        label: Generator,
        count: usize,
    },
    /// Condition (iii): a relator traced from a vertex does not return.
    Relator { vertex: String, word: String },
}

impl fmt::Display for SchreierViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchreierViolation::Determinism {
                vertex,
                label,
                count,
            } => {
                write!(
                    f,
                    "fail(ii): vertex {vertex} has {count} edges labeled {label}"
                )
            }
            SchreierViolation::Relator { vertex, word } => {
                write!(
                    f,
                    "fail(iii): relator {word} from vertex {vertex} is not closed"
                )
            }
        }
    }
}

/// Relators checked for condition (iii): generator squares, the six Klein
/// words `bcd`, and all nonempty trivial normal-form words up to `cap`.
/// Tracing an arbitrary word reduces to these once the short relators hold.
pub fn relators(cap: usize) -> Arc<Vec<Vec<Generator>>> {
    type RelatorCache = Mutex<HashMap<usize, Arc<Vec<Vec<Generator>>>>>;
    static CACHE: LazyLock<RelatorCache> = LazyLock::new(|| Mutex::new(HashMap::new()));
    if let Some(found) = CACHE.lock().get(&cap) {
        return found.clone();
    }
    use Generator::{B, C, D};
    let mut list: Vec<Vec<Generator>> = Vec::new();
    if cap >= 2 {
        list.extend(Generator::ALL.iter().map(|&s| vec![s, s]));
    }
    if cap >= 3 {
        for p in [
            [B, C, D],
            [B, D, C],
            [C, B, D],
            [C, D, B],
            [D, B, C],
            [D, C, B],
        ] {
            list.push(p.to_vec());
        }
    }
    list.extend(
        reduced_words(cap)
            .into_iter()
            .filter(|w| !w.is_empty() && w.is_trivial())
            .map(|w| w.letters().to_vec()),
    );
    let list = Arc::new(list);
    CACHE.lock().insert(cap, list.clone());
    list
}

/// Checks the Schreier conditions. Labels are generators by construction,
/// so condition (i) always holds. With `complete_within = Some(r)` only
/// vertices closer than `r` to the mark need a full set of labels (the
/// right check for a ball of radius `r`); elsewhere at most one edge per
/// label is required and relator paths that leave the graph are skipped.
pub fn verify_schreier(
    g: &MarkedGraph,
    relator_cap: usize,
    complete_within: Option<usize>,
) -> Result<(), SchreierViolation> {
    let dist = g.distances_from(g.marked);
    for (v, dv) in dist.iter().enumerate() {
        let must_be_complete = match complete_within {
            None => true,
            Some(r) => dv.is_some_and(|d| d < r),
        };
        for s in Generator::ALL {
            let count = g.label_count(v, s);
            if count > 1 || (must_be_complete && count != 1) {
                return Err(SchreierViolation::Determinism {
                    vertex: g.names[v].clone(),
                    label: s,
                    count,
                });
            }
        }
    }
    for word in relators(relator_cap).iter() {
        for v in 0..g.vertex_count() {
            let mut cur = Some(v);
            for &s in word.iter().rev() {
                cur = cur.and_then(|u| g.neighbor(u, s));
            }
            if cur.is_some_and(|end| end != v) {
                return Err(SchreierViolation::Relator {
                    vertex: g.names[v].clone(),
                    word: word.iter().map(|s| s.to_char()).collect(),
                });
            }
        }
    }
    Ok(())
}
