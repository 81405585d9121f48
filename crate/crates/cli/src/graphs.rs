//! Graph addresses on the command line.
//!
//! `orbit:<word>`, `limit:<i>`, `cover`, `coset:<subgroup>` or `file:<path>`
//! (JSON, or DOT when the path ends in `.dot`), optionally followed by
//! `@<g>` to move the mark along `g`.

use std::fs;

use anyhow::{bail, Context, Result};
use grig_core::graph::BallSource;
use grig_core::{coset_graph_ball, GroupElement, ImplicitGraph, MarkedGraph, SubgroupOracle};

#[derive(Clone, Debug)]
pub enum GraphSource {
    Implicit(ImplicitGraph),
    Coset(SubgroupOracle),
    File(MarkedGraph),
}

impl GraphSource {
    pub fn parse(address: &str) -> Result<Self> {
        let (body, action) = match address.rsplit_once('@') {
            Some((body, g)) => (body, Some(g.parse::<GroupElement>()?)),
            None => (address, None),
        };
        let source = if let Some(word) = body.strip_prefix("orbit:") {
            GraphSource::Implicit(ImplicitGraph::orbit_graph(&word.parse()?))
        } else if let Some(i) = body.strip_prefix("limit:") {
            let i: u8 = i.parse().with_context(|| format!("limit index {i:?}"))?;
            GraphSource::Implicit(ImplicitGraph::limit_graph(i)?)
        } else if body == "cover" {
            GraphSource::Implicit(ImplicitGraph::cover_graph())
        } else if let Some(h) = body.strip_prefix("coset:") {
            GraphSource::Coset(h.parse()?)
        } else if let Some(path) = body.strip_prefix("file:") {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let graph = if path.ends_with(".dot") {
                MarkedGraph::from_dot(&text)?
            } else {
                MarkedGraph::from_json(&text)?
            };
            GraphSource::File(graph)
        } else {
            bail!(grig_core::Error::Parse(format!(
                "unknown graph {address:?}; expected orbit:<word>, limit:<i>, cover, coset:<subgroup> or file:<path>"
            )));
        };
        match action {
            Some(g) => source.act(&g),
            None => Ok(source),
        }
    }

    fn act(self, g: &GroupElement) -> Result<Self> {
        Ok(match self {
            GraphSource::Implicit(graph) => GraphSource::Implicit(graph.act(g)),
            // Marking the coset gH of H gives the coset graph of g H g^-1.
            GraphSource::Coset(h) => GraphSource::Coset(h.conjugate(g)),
            GraphSource::File(graph) => {
                let mut v = graph.marked();
                for &s in g.letters().iter().rev() {
                    v = graph.neighbor(v, s).with_context(|| {
                        format!("vertex {} has no unique {s}-edge", graph.name(v))
                    })?;
                }
                GraphSource::File(graph.with_mark(v))
            }
        })
    }

    /// Ball around the mark; for limit graphs and the cover with
    /// `symmetric` set, the union of balls around the whole fiber.
    pub fn ball_with(&self, radius: usize, symmetric: bool) -> Result<MarkedGraph> {
        Ok(match self {
            GraphSource::Implicit(g) if symmetric => g.symmetric_ball(radius)?,
            _ => self.ball(radius)?,
        })
    }
}

impl BallSource for GraphSource {
    fn ball(&self, radius: usize) -> grig_core::Result<MarkedGraph> {
        match self {
            GraphSource::Implicit(g) => g.ball(radius),
            GraphSource::Coset(h) => coset_graph_ball(h, radius, radius),
            GraphSource::File(g) => Ok(g.closed_ball(g.marked(), radius)),
        }
    }

    fn finite_size(&self) -> Option<usize> {
        match self {
            GraphSource::File(g) => Some(g.vertex_count()),
            _ => None,
        }
    }
}
