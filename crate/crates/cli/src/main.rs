mod config;
mod graphs;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use grig_core::boundary::{act_beta, in_neighborhood_stabilizer, in_stabilizer, klein_coset};
use grig_core::dynamics::{
    convergence_experiment, ergodic_average, isolated_point_check, minimality_probe,
    non_isolation_witnesses, subgroup_distance, ProbeOutcome,
};
use grig_core::graph::{
    automorphism_group, delta, isomorphic, orbit_partition, quotient, verify_schreier,
};
use grig_core::group::{format_bits, parse_bits};
use grig_core::{
    coset_graph_ball, sheet_partition, EvPeriodicWord, GroupElement, ImplicitGraph, Klein,
    MarkedGraph, SubgroupOracle,
};

use crate::config::{parse_int_list, Config};
use crate::graphs::GraphSource;

#[derive(Parser)]
#[command(
    name = "grig",
    version,
    about = "Grigorchuk group, boundary action and Schreier graph experiments"
)]
struct Cli {
    /// Emit JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for parallel experiments (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normal form of a word.
    Reduce(ElementArg),
    /// Action on a finite binary word.
    Apply {
        #[arg(long)]
        g: String,
        #[arg(long)]
        w: String,
    },
    /// Section at a vertex, or the wreath recursion when no vertex is given.
    Section {
        #[arg(long)]
        g: String,
        #[arg(long)]
        u: Option<String>,
    },
    /// Word problem.
    Trivial(ElementArg),
    /// Element order.
    Order {
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 1 << 16)]
        cap: u64,
    },
    /// Action on an eventually periodic boundary word such as `10(01)^w`.
    ActBeta(PointArgs),
    /// Membership in the stabilizer of a boundary point.
    Stab(PointArgs),
    /// Membership in the neighborhood stabilizer of a boundary point.
    StabO(PointArgs),
    /// Coset of a stabilizer element of `1^w` modulo the neighborhood stabilizer.
    KleinCoset(ElementArg),
    /// Closed ball of a graph as JSON.
    Ball(BallArgs),
    /// Distance between two marked graphs.
    Delta {
        #[arg(long)]
        g1: String,
        #[arg(long)]
        g2: String,
        #[arg(long, default_value_t = 16)]
        max_radius: usize,
    },
    /// Check the Schreier graph conditions.
    Verify {
        #[arg(long)]
        graph: String,
        /// Ball radius for implicit graphs; for files, treat the graph as a
        /// ball of this radius (vertices at the boundary may miss labels).
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long, default_value_t = 12)]
        relator_cap: usize,
    },
    /// Count automorphisms of a ball.
    Autos {
        #[arg(long)]
        graph: String,
        #[arg(long, default_value_t = 8)]
        radius: usize,
        /// Use the union of balls around every fiber vertex.
        #[arg(long)]
        symmetric: bool,
        /// Only count automorphisms fixing the mark.
        #[arg(long)]
        marked: bool,
    },
    /// Quotient of a ball by automorphism orbits or cover sheets.
    Quotient {
        #[arg(long)]
        graph: String,
        #[arg(long, default_value_t = 8)]
        radius: usize,
        #[arg(long, value_enum)]
        by: QuotientBy,
        /// Compare against the symmetric ball of this graph.
        #[arg(long)]
        expect: Option<String>,
    },
    /// Ball of a limit graph.
    Limit {
        #[arg(long)]
        i: u8,
        #[command(flatten)]
        ball: BallOpts,
    },
    /// Ball of the four-sheeted cover.
    Cover {
        #[command(flatten)]
        ball: BallOpts,
    },
    /// Ball of a Schreier coset graph.
    CosetBall {
        /// `stab:<word>`, `stab-o:<word>`, `whole` or `trivial`.
        #[arg(long)]
        subgroup: String,
        #[arg(long, default_value_t = 4)]
        radius: usize,
        /// Longest coset representative allowed (default: the radius).
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Orbit graphs of 1^(z-1)01^w against the limit graphs.
    Converge {
        /// `3..9` or `3,5,8`.
        #[arg(long)]
        z: Option<String>,
        #[arg(long)]
        radius_budget: Option<usize>,
        /// Config file with keys `z` and `radius_budget`.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Isolation of F(1^w) among corpus graphs, or non-isolation witnesses
    /// for a given point.
    Isolated {
        #[arg(long, default_value_t = 8)]
        radius: usize,
        /// Boundary words to scan besides the limit graphs.
        #[arg(long, num_args = 1..)]
        corpus: Vec<String>,
        /// Search witnesses that this point is not isolated.
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 32)]
        max_prefix: usize,
    },
    /// Search moves of the mark bringing starts close to targets.
    Minimality {
        #[arg(long, num_args = 1..)]
        start: Vec<String>,
        /// `<graph>:<radius>`, for instance `orbit:(01)^w:3`.
        #[arg(long, num_args = 1..)]
        target: Vec<String>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Frequency of a cylinder among the points g(xi), |g| <= L.
    Ergodic {
        #[arg(long)]
        xi: String,
        #[arg(long, default_value = "")]
        cylinder: String,
        #[arg(long, default_value_t = 10)]
        length: usize,
        /// Fail when the deviation from 2^-|w| exceeds this.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Distance between two subgroups in the enumeration metric.
    Subdist {
        #[arg(long)]
        h1: String,
        #[arg(long)]
        h2: String,
        #[arg(long, default_value_t = 6)]
        cap: usize,
    },
    /// Graphviz export of a ball.
    ExportDot(BallArgs),
}

#[derive(Args)]
struct ElementArg {
    #[arg(long)]
    g: String,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    g: String,
    #[arg(long)]
    xi: String,
}

#[derive(Args)]
struct BallOpts {
    #[arg(long, default_value_t = 4)]
    radius: usize,
    #[arg(long)]
    symmetric: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BallArgs {
    #[arg(long)]
    graph: String,
    #[command(flatten)]
    ball: BallOpts,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuotientBy {
    /// Orbits of the unmarked automorphism group.
    Autos,
    /// Cover sheets modulo {1, b}.
    B,
    /// Cover sheets modulo {1, c}.
    C,
    /// Cover sheets modulo {1, d}.
    D,
    /// All four cover sheets.
    Klein,
}

/// What a command produced: text for humans, JSON for machines, and
/// whether a verification it performed passed.
struct Report {
    text: String,
    json: Value,
    ok: bool,
}

impl Report {
    fn ok(text: impl Into<String>, json: Value) -> Self {
        Self {
            text: text.into(),
            json,
            ok: true,
        }
    }

    fn check(ok: bool, text: impl Into<String>, json: Value) -> Self {
        Self {
            text: text.into(),
            json,
            ok,
        }
    }
}

fn element(s: &str) -> Result<GroupElement> {
    Ok(s.parse()?)
}

fn point(s: &str) -> Result<EvPeriodicWord> {
    Ok(s.parse()?)
}

fn write_or_return(graph_text: String, out: &Option<PathBuf>, summary: String) -> Result<String> {
    match out {
        Some(path) => {
            fs::write(path, &graph_text).with_context(|| format!("writing {}", path.display()))?;
            Ok(summary)
        }
        None => Ok(graph_text.trim_end().to_string()),
    }
}

fn ball_report(graph: &MarkedGraph, out: &Option<PathBuf>) -> Result<Report> {
    let summary = format!(
        "{} vertices, {} edges",
        graph.vertex_count(),
        graph.edge_count()
    );
    let text = write_or_return(graph.to_json_pretty(), out, summary)?;
    let value: Value = serde_json::from_str(&graph.to_json())?;
    Ok(Report::ok(text, value))
}

fn run(cli: Cli) -> Result<Report> {
    Ok(match cli.command {
        Command::Reduce(ElementArg { g }) => {
            let e = element(&g)?;
            Report::ok(
                e.to_string(),
                json!({ "normal_form": e.to_string(), "length": e.len() }),
            )
        }
        Command::Apply { g, w } => {
            let image = format_bits(&element(&g)?.apply(&parse_bits(&w)?));
            Report::ok(image.clone(), json!({ "image": image }))
        }
        Command::Section { g, u } => {
            let e = element(&g)?;
            match u {
                Some(u) => {
                    let s = e.section(&parse_bits(&u)?);
                    Report::ok(s.to_string(), json!({ "section": s.to_string() }))
                }
                None => {
                    let r = e.recursion();
                    let perm = if r.root_swap { "(01)" } else { "" };
                    let text = format!("{e} = {perm}({}, {})", r.section0, r.section1);
                    Report::ok(
                        text,
                        json!({ "root_swap": r.root_swap, "section0": r.section0.to_string(), "section1": r.section1.to_string() }),
                    )
                }
            }
        }
        Command::Trivial(ElementArg { g }) => {
            let t = element(&g)?.is_trivial();
            Report::ok(t.to_string(), json!({ "trivial": t }))
        }
        Command::Order { g, cap } => {
            let n = element(&g)?.order(cap)?;
            Report::ok(n.to_string(), json!({ "order": n }))
        }
        Command::ActBeta(PointArgs { g, xi }) => {
            let image = act_beta(&element(&g)?, &point(&xi)?);
            Report::ok(image.to_string(), json!({ "image": image.to_string() }))
        }
        Command::Stab(PointArgs { g, xi }) => {
            let t = in_stabilizer(&element(&g)?, &point(&xi)?);
            Report::ok(t.to_string(), json!({ "member": t }))
        }
        Command::StabO(PointArgs { g, xi }) => {
            let t = in_neighborhood_stabilizer(&element(&g)?, &point(&xi)?);
            Report::ok(t.to_string(), json!({ "member": t }))
        }
        Command::KleinCoset(ElementArg { g }) => match klein_coset(&element(&g)?) {
            Some(k) => Report::ok(k.to_string(), json!({ "coset": k.to_string() })),
            None => Report::check(
                false,
                format!("{g} does not fix 1^w"),
                json!({ "coset": null }),
            ),
        },
        Command::Ball(BallArgs { graph, ball }) => {
            let source = GraphSource::parse(&graph)?;
            ball_report(&source.ball_with(ball.radius, ball.symmetric)?, &ball.out)?
        }
        Command::Delta { g1, g2, max_radius } => {
            let d = delta(
                &GraphSource::parse(&g1)?,
                &GraphSource::parse(&g2)?,
                max_radius,
            )?;
            Report::ok(
                d.to_string(),
                json!({ "distance": d, "upper_bound": d.upper_bound() }),
            )
        }
        Command::Verify {
            graph,
            radius,
            relator_cap,
        } => {
            let source = GraphSource::parse(&graph)?;
            let (ball, within) = match (&source, radius) {
                (GraphSource::File(g), r) => (g.clone(), r),
                (_, Some(r)) => (grig_core::BallSource::ball(&source, r)?, Some(r)),
                (_, None) => anyhow::bail!(grig_core::Error::InvalidArgument(
                    "implicit graphs need --radius".into()
                )),
            };
            match verify_schreier(&ball, relator_cap, within) {
                Ok(()) => Report::ok("pass", json!({ "result": "pass" })),
                Err(v) => Report::check(
                    false,
                    v.to_string(),
                    json!({ "result": "fail", "violation": v }),
                ),
            }
        }
        Command::Autos {
            graph,
            radius,
            symmetric,
            marked,
        } => {
            let ball = GraphSource::parse(&graph)?.ball_with(radius, symmetric)?;
            let n = automorphism_group(&ball, !marked).len();
            Report::ok(
                n.to_string(),
                json!({ "automorphisms": n, "vertices": ball.vertex_count() }),
            )
        }
        Command::Quotient {
            graph,
            radius,
            by,
            expect,
        } => {
            let ball = GraphSource::parse(&graph)?.ball_with(radius, true)?;
            let partition = match by {
                QuotientBy::Autos => {
                    orbit_partition(ball.vertex_count(), &automorphism_group(&ball, true))
                }
                QuotientBy::B => sheet_partition(&ball, &[Klein::One, Klein::B])?,
                QuotientBy::C => sheet_partition(&ball, &[Klein::One, Klein::C])?,
                QuotientBy::D => sheet_partition(&ball, &[Klein::One, Klein::D])?,
                QuotientBy::Klein => sheet_partition(&ball, &Klein::ALL)?,
            };
            let q = quotient(&ball, &partition)?;
            let sizes: std::collections::BTreeSet<usize> = q.class_sizes.iter().copied().collect();
            let fold = if sizes.len() == 1 {
                sizes.first().copied()
            } else {
                None
            };
            let mut text = format!(
                "{} vertices -> {} classes, fold {}",
                ball.vertex_count(),
                q.graph.vertex_count(),
                fold.map_or("mixed".to_string(), |k| k.to_string())
            );
            let mut value = json!({ "fold": fold, "quotient": serde_json::from_str::<Value>(&q.graph.to_json())? });
            let mut ok = true;
            if let Some(address) = expect {
                let target = GraphSource::parse(&address)?.ball_with(radius, true)?;
                ok = isomorphic(&q.graph, &target);
                text.push_str(&format!("\nisomorphic to {address}: {ok}"));
                value["isomorphic"] = json!(ok);
            }
            Report::check(ok, text, value)
        }
        Command::Limit { i, ball } => {
            let g = ImplicitGraph::limit_graph(i)?;
            let b = if ball.symmetric {
                g.symmetric_ball(ball.radius)?
            } else {
                g.ball(ball.radius)?
            };
            ball_report(&b, &ball.out)?
        }
        Command::Cover { ball } => {
            let g = ImplicitGraph::cover_graph();
            let b = if ball.symmetric {
                g.symmetric_ball(ball.radius)?
            } else {
                g.ball(ball.radius)?
            };
            ball_report(&b, &ball.out)?
        }
        Command::CosetBall {
            subgroup,
            radius,
            cap,
            out,
        } => {
            let h: SubgroupOracle = subgroup.parse()?;
            ball_report(&coset_graph_ball(&h, radius, cap.unwrap_or(radius))?, &out)?
        }
        Command::Converge {
            z,
            radius_budget,
            config,
        } => {
            let cfg = config
                .map(|p| Config::load(&p))
                .transpose()?
                .unwrap_or_default();
            let z = z
                .or_else(|| cfg.get_str("z").map(str::to_string))
                .unwrap_or_else(|| "3..9".into());
            let budget = match radius_budget {
                Some(b) => b,
                None => cfg.get("radius_budget")?.unwrap_or(256),
            };
            let report = convergence_experiment(&parse_int_list(&z)?, budget)?;
            let mut text = String::from(
                "z  target  required  distance                      bound  wrong-targets\n",
            );
            for t in &report.terms {
                let d = t
                    .distance
                    .map_or("exhausted".to_string(), |d| d.to_string());
                text.push_str(&format!(
                    "{:<2} {:<7} {:<9} {:<29} {:<6} {}\n",
                    t.z,
                    format!("D{}", t.target),
                    t.required_radius,
                    d,
                    if t.bound_ok { "ok" } else { "FAIL" },
                    if t.wrong_targets_ok { "ok" } else { "FAIL" },
                ));
            }
            Report::check(
                report.all_ok(),
                text.trim_end(),
                serde_json::to_value(&report)?,
            )
        }
        Command::Isolated {
            radius,
            corpus,
            point: target,
            max_prefix,
        } => match target {
            Some(p) => {
                let witnesses = non_isolation_witnesses(&point(&p)?, radius, max_prefix)?;
                let mut text = String::new();
                for w in &witnesses {
                    let found = w.point.as_deref().unwrap_or("none found");
                    text.push_str(&format!("2^-{}: {found}\n", w.resolution));
                }
                let ok = witnesses.iter().all(|w| w.point.is_some());
                text.push_str(if ok {
                    "not isolated"
                } else {
                    "no witness at some resolution"
                });
                Report::check(ok, text, serde_json::to_value(&witnesses)?)
            }
            None => {
                let corpus = if corpus.is_empty() {
                    ["(1)^w", "(0)^w", "(01)^w", "0(1)^w", "1110(1)^w", "(001)^w"]
                        .iter()
                        .map(|s| point(s))
                        .collect::<Result<Vec<_>>>()?
                } else {
                    corpus
                        .iter()
                        .map(|s| point(s))
                        .collect::<Result<Vec<_>>>()?
                };
                let report = isolated_point_check(&corpus, radius)?;
                let text = format!("isolated: {} ({})", report.isolated, report.witness);
                Report::check(report.isolated, text, serde_json::to_value(&report)?)
            }
        },
        Command::Minimality {
            start,
            target,
            budget,
            config,
        } => {
            let cfg = config
                .map(|p| Config::load(&p))
                .transpose()?
                .unwrap_or_default();
            let budget = match budget {
                Some(b) => b,
                None => cfg.get("budget")?.unwrap_or(100_000),
            };
            let mut starts = start;
            if starts.is_empty() {
                starts = cfg
                    .get_str("start")
                    .map(|s| s.split_whitespace().map(str::to_string).collect())
                    .unwrap_or_default();
            }
            let mut targets = target;
            if targets.is_empty() {
                targets = cfg
                    .get_str("target")
                    .map(|s| s.split_whitespace().map(str::to_string).collect())
                    .unwrap_or_default();
            }
            let starts = starts
                .iter()
                .map(|s| match GraphSource::parse(s)? {
                    GraphSource::Implicit(g) => Ok(g),
                    _ => anyhow::bail!(grig_core::Error::InvalidArgument(format!(
                        "start {s:?} must be an orbit, limit or cover graph"
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            let targets = targets
                .iter()
                .map(|t| {
                    let (address, r) = t.rsplit_once(':').ok_or_else(|| {
                        grig_core::Error::Parse(format!(
                            "target {t:?} needs the form <graph>:<radius>"
                        ))
                    })?;
                    let r: usize = r.parse().with_context(|| format!("radius in {t:?}"))?;
                    Ok((
                        grig_core::BallSource::ball(&GraphSource::parse(address)?, r)?,
                        r,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let results = minimality_probe(&starts, &targets, budget)?;
            let mut text = String::new();
            let mut ok = true;
            for r in &results {
                let line = match &r.outcome {
                    ProbeOutcome::Found { word, vertex } => {
                        format!("found {word} (vertex {vertex})")
                    }
                    ProbeOutcome::Exhausted { visited } => {
                        ok = false;
                        format!("exhausted after {visited} vertices")
                    }
                };
                text.push_str(&format!("{} -> target {}: {line}\n", r.start, r.target));
            }
            Report::check(ok, text.trim_end(), serde_json::to_value(&results)?)
        }
        Command::Ergodic {
            xi,
            cylinder,
            length,
            tolerance,
        } => {
            let w = parse_bits(&cylinder)?;
            let freq = ergodic_average(&point(&xi)?, &w, length)?;
            let expected = 0.5f64.powi(w.len() as i32);
            let deviation = (freq - expected).abs();
            let ok = tolerance.is_none_or(|t| deviation <= t);
            Report::check(
                ok,
                format!("{freq:.6} (uniform {expected:.6}, deviation {deviation:.6})"),
                json!({ "frequency": freq, "uniform": expected, "deviation": deviation }),
            )
        }
        Command::Subdist { h1, h2, cap } => {
            let (d, witness) = subgroup_distance(&h1.parse()?, &h2.parse()?, cap);
            let w = witness.map(|g| g.to_string());
            let text = match &w {
                Some(g) => format!("{d}; first disagreement at {g}"),
                None => d.to_string(),
            };
            Report::ok(text, json!({ "distance": d, "witness": w }))
        }
        Command::ExportDot(BallArgs { graph, ball }) => {
            let b = GraphSource::parse(&graph)?.ball_with(ball.radius, ball.symmetric)?;
            let summary = format!("{} vertices, {} edges", b.vertex_count(), b.edge_count());
            let text = write_or_return(b.to_dot(), &ball.out, summary)?;
            Report::ok(text, json!({ "dot": b.to_dot() }))
        }
    })
}

fn is_usage_error(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<grig_core::Error>(),
            Some(grig_core::Error::Parse(_) | grig_core::Error::InvalidArgument(_))
        ) || cause.is::<std::num::ParseIntError>()
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let json = cli.json;
    match run(cli) {
        Ok(report) => {
            let body = if json {
                serde_json::to_string_pretty(&report.json).expect("JSON value")
            } else {
                report.text
            };
            // A closed pipe (`grig ... | head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout().lock(), "{body}");
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_usage_error(&err) { 2 } else { 1 })
        }
    }
}
