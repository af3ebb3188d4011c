//! `pgse`: file-driven front end for the schema engine.
//!
//! Every command reads JSON or DDL files, makes the corresponding library
//! call and prints JSON. Exit status is 0 on success, 1 when the result
//! reports violations and 2 on unreadable or inconsistent input.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pgse_core::ddl::{
    check_graph_type, graph_type_to_schema_with, interpretation_diagnostics, parse_ddl, parse_ddl_unchecked, print_ddl,
    schema_to_graph_type, GraphType, TypeIndex,
};
use pgse_core::propagation::{controlled_propagate_to_instance, controlled_propagate_to_schema};
use pgse_core::{
    apply_rule, check_homomorphism, compose, emit_clone_query, emit_merge_query, emit_rule_query, find_homomorphisms,
    find_matchings, AuditTrail, Hierarchy, Homomorphism, ObjectId, PropagationRelation, PropertyGraph, QueryText, Rule,
    SchemaManipulation, Selector, ValueMode,
};
use serde_json::{json, Value as Json};

#[derive(Parser)]
#[command(name = "pgse", version, about = "Property-graph schemas: validation, rewriting and propagation")]
struct Cli {
    /// Pretty-print the output (plain text for DDL and queries).
    #[arg(long, global = true)]
    pretty: bool,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Graph-type DDL tools.
    #[command(subcommand)]
    Ddl(DdlCommand),
    /// Check a typing of an instance by a schema.
    Validate {
        #[command(flatten)]
        typed: Typed,
    },
    /// List the matchings of a rule's left-hand side.
    Match {
        #[arg(long)]
        rule: PathBuf,
        /// Graph to match into.
        #[arg(long)]
        host: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Apply a rule to one graph, without propagation.
    Rewrite {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long)]
        host: PathBuf,
        /// Defaults to the first matching found.
        #[arg(long)]
        matching: Option<PathBuf>,
    },
    /// Rewrite one side of a typing and repair the other.
    #[command(subcommand)]
    Propagate(PropagateCommand),
    /// Schema manipulation operations.
    #[command(subcommand)]
    Smo(SmoCommand),
    /// Emit Cypher for elementary transformations.
    #[command(subcommand)]
    Emit(EmitCommand),
    /// Audit-trail tools.
    #[command(subcommand)]
    Trail(TrailCommand),
}

#[derive(Subcommand)]
enum DdlCommand {
    /// Parse and check a DDL file.
    Check { file: PathBuf },
    /// Interpret a DDL file as a schema graph.
    ToGraph {
        file: PathBuf,
        #[arg(long, default_value = "symbolic")]
        mode: ValueMode,
        /// Resolve edge-type collisions by keeping the first declaration.
        #[arg(long)]
        force: bool,
        /// Also write the label index here.
        #[arg(long)]
        index: Option<PathBuf>,
    },
    /// Read a schema graph back as DDL.
    FromGraph {
        #[arg(long, required_unless_present = "trail")]
        schema: Option<PathBuf>,
        #[arg(long, required_unless_present = "trail")]
        index: Option<PathBuf>,
        /// Read inheritance off this trail; schema and index default to its head.
        #[arg(long)]
        trail: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Typed {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, required_unless_present = "infer")]
    hom: Option<PathBuf>,
    /// Search for a typing instead of reading one.
    #[arg(long, conflicts_with = "hom")]
    infer: bool,
    #[arg(long, default_value = "symbolic")]
    mode: ValueMode,
}

#[derive(Args)]
struct Propagation {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    hom: PathBuf,
    #[arg(long)]
    rule: PathBuf,
    #[arg(long)]
    matching: PathBuf,
    /// Clones to keep or schema nodes to merge into. Clone targets may name
    /// nodes of the rule's preserved graph.
    #[arg(long)]
    relation: Option<PathBuf>,
    #[arg(long, default_value = "symbolic")]
    mode: ValueMode,
}

#[derive(Subcommand)]
enum PropagateCommand {
    /// Rewrite the schema; the instance follows.
    ToInstance(Propagation),
    /// Rewrite the instance; the schema follows.
    ToSchema(Propagation),
}

#[derive(Subcommand)]
enum SmoCommand {
    /// Apply manipulations in order and print the resulting hierarchy.
    Apply {
        /// Manipulation files, applied in the order given.
        #[arg(long = "smo", required = true)]
        smos: Vec<PathBuf>,
        /// Start from this trail.
        #[arg(long, conflicts_with_all = ["ddl", "schema"])]
        trail: Option<PathBuf>,
        /// Start from this DDL file's schema.
        #[arg(long, conflicts_with = "schema")]
        ddl: Option<PathBuf>,
        /// Start from this schema; needs `--index`.
        #[arg(long, requires = "index")]
        schema: Option<PathBuf>,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        hom: PathBuf,
        #[arg(long, default_value = "symbolic")]
        mode: ValueMode,
        /// Also write the new trail here.
        #[arg(long)]
        trail_out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EmitCommand {
    /// Query cloning the node with the given id.
    Clone {
        #[arg(long)]
        id: String,
        #[arg(long)]
        sections: bool,
    },
    /// Query merging node `b` into node `a`.
    Merge {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Keep parallel edges instead of collapsing them.
        #[arg(long)]
        multigraph: bool,
        #[arg(long)]
        sections: bool,
    },
    /// Query applying a rule; nodes are selected by the ids of their images.
    Rule {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long)]
        matching: PathBuf,
        #[arg(long)]
        sections: bool,
    },
}

#[derive(Subcommand)]
enum TrailCommand {
    /// Replay a trail from its origin.
    Replay {
        #[arg(long)]
        trail: PathBuf,
        /// Exit 1 unless the replayed head equals this schema.
        #[arg(long)]
        schema: Option<PathBuf>,
    },
}

struct Failure(String);

impl Failure {
    fn at(path: &Path, e: impl Display) -> Self {
        Failure(format!("{}: {e}", path.display()))
    }
}

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

enum Output {
    Json(Json),
    /// Printed as JSON `{key: text}`, or as the bare text under `--pretty`.
    Text(&'static str, String),
}

struct Outcome {
    output: Output,
    ok: bool,
}

impl Outcome {
    fn ok(value: Json) -> Self {
        Outcome { output: Output::Json(value), ok: true }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::at(path, e))
}

fn load<T, E: Display>(path: &Path, parse: impl Fn(&str) -> Result<T, E>) -> Result<T, Failure> {
    parse(&read(path)?).map_err(|e| Failure::at(path, e))
}

/// Loads a graph; `PGSE_SEED` fixes where its generated ids start.
fn graph(path: &Path) -> Result<PropertyGraph, Failure> {
    let mut g = load(path, PropertyGraph::from_json)?;
    if let Ok(seed) = std::env::var("PGSE_SEED") {
        let seed = seed.parse().map_err(|_| Failure(format!("PGSE_SEED must be an integer, got `{seed}`")))?;
        g.set_id_counter(seed);
    }
    Ok(g)
}

fn hom(path: &Path) -> Result<Homomorphism, Failure> {
    load(path, Homomorphism::from_json)
}

fn rule(path: &Path) -> Result<Rule, Failure> {
    load(path, Rule::from_json)
}

fn ddl(path: &Path) -> Result<GraphType, Failure> {
    load(path, parse_ddl)
}

fn to_json(v: impl serde::Serialize) -> Json {
    serde_json::to_value(v).expect("output serializes")
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Ddl(c) => run_ddl(c),
        Command::Validate { typed } => validate(typed),
        Command::Match { rule: r, host, limit } => {
            let r = rule(r)?;
            let mut ms = find_matchings(&r, &graph(host)?);
            if let Some(n) = limit {
                ms.truncate(*n);
            }
            Ok(Outcome::ok(to_json(ms)))
        }
        Command::Rewrite { rule: r, host, matching } => {
            let (r, g) = (rule(r)?, graph(host)?);
            let m = match matching {
                Some(p) => hom(p)?,
                None => find_matchings(&r, &g)
                    .into_iter()
                    .next()
                    .ok_or_else(|| Failure::at(host, "the rule's left-hand side does not match"))?,
            };
            let app = apply_rule(&g, &r, &m)?;
            Ok(Outcome::ok(json!({
                "graph": app.graph(),
                "matching": m,
                "restricted": app.restricted.graph,
                "back_map": app.restricted.back_map,
                "fwd_map": app.expanded.fwd_map,
            })))
        }
        Command::Propagate(PropagateCommand::ToInstance(p)) => to_instance(p),
        Command::Propagate(PropagateCommand::ToSchema(p)) => to_schema(p),
        Command::Smo(SmoCommand::Apply { smos, trail, ddl: d, schema, index, instance, hom: h, mode, trail_out }) => {
            let (g, h) = (graph(instance)?, hom(h)?);
            let mut hierarchy = if let Some(t) = trail {
                Hierarchy::with_trail(g, h, *mode, load(t, AuditTrail::from_json)?)?
            } else if let Some(d) = d {
                let gt = ddl(d)?;
                let (s, idx) = graph_type_to_schema_with(&gt, *mode, false).map_err(|e| Failure::at(d, e))?;
                Hierarchy::new(g, s, h, idx, *mode, Some(gt))?
            } else {
                let (s, i) = (schema.as_ref(), index.as_ref());
                let (s, i) = s.zip(i).ok_or_else(|| Failure("one of --trail, --ddl or --schema is required".into()))?;
                Hierarchy::new(g, graph(s)?, h, load(i, TypeIndex::from_json)?, *mode, None)?
            };
            for path in smos {
                let smo = load(path, SchemaManipulation::from_json)?;
                hierarchy.apply(&smo).map_err(|e| Failure::at(path, e))?;
            }
            if let Some(p) = trail_out {
                fs::write(p, hierarchy.trail.to_json()).map_err(|e| Failure::at(p, e))?;
            }
            let report = hierarchy.validate()?;
            Ok(Outcome {
                ok: report.is_empty(),
                output: Output::Json(json!({
                    "instance": hierarchy.instance,
                    "schema": hierarchy.schema,
                    "hom": hierarchy.hom,
                    "index": hierarchy.index,
                    "report": report,
                })),
            })
        }
        Command::Emit(c) => emit(c),
        Command::Trail(TrailCommand::Replay { trail, schema }) => {
            let t = load(trail, AuditTrail::from_json)?;
            let head = t.replay().map_err(|e| Failure::at(trail, e))?;
            let matches = match schema {
                Some(p) => Some(graph(p)? == head),
                None => None,
            };
            Ok(Outcome {
                ok: matches.unwrap_or(true),
                output: Output::Json(json!({
                    "schema": head,
                    "index": t.head_index(),
                    "entries": t.len(),
                    "matches": matches,
                })),
            })
        }
    }
}

fn run_ddl(c: &DdlCommand) -> Result<Outcome, Failure> {
    match c {
        DdlCommand::Check { file } => {
            let gt = load(file, parse_ddl_unchecked)?;
            let diagnostics = check_graph_type(&gt);
            Ok(Outcome {
                ok: diagnostics.is_empty(),
                output: Output::Json(json!({
                    "name": gt.name,
                    "element_types": gt.element_types.len() + gt.implicit_edge_labels().len(),
                    "node_types": gt.node_types.len(),
                    "edge_types": gt.edge_types.len(),
                    "diagnostics": diagnostics,
                    "interpretation": interpretation_diagnostics(&gt),
                })),
            })
        }
        DdlCommand::ToGraph { file, mode, force, index } => {
            let gt = ddl(file)?;
            let (s, idx) = graph_type_to_schema_with(&gt, *mode, *force).map_err(|e| Failure::at(file, e))?;
            if let Some(p) = index {
                fs::write(p, idx.to_json()).map_err(|e| Failure::at(p, e))?;
            }
            Ok(Outcome::ok(s.to_json_value()))
        }
        DdlCommand::FromGraph { schema, index, trail } => {
            let trail = trail.as_deref().map(|p| load(p, AuditTrail::from_json)).transpose()?;
            let s = match (schema, &trail) {
                (Some(p), _) => graph(p)?,
                (None, Some(t)) => t.head()?,
                (None, None) => unreachable!("clap requires --schema or --trail"),
            };
            let idx = match (index, &trail) {
                (Some(p), _) => load(p, TypeIndex::from_json)?,
                (None, Some(t)) => t.head_index().clone(),
                (None, None) => unreachable!("clap requires --index or --trail"),
            };
            let gt = schema_to_graph_type(&s, &idx, trail.as_ref())?;
            Ok(Outcome { output: Output::Text("ddl", print_ddl(&gt)), ok: true })
        }
    }
}

fn validate(t: &Typed) -> Result<Outcome, Failure> {
    let (s, g) = (graph(&t.schema)?, graph(&t.instance)?);
    let h = match &t.hom {
        Some(p) => hom(p)?,
        None => match find_homomorphisms(&g, &s, t.mode, Some(1)).into_iter().next() {
            Some(h) => h,
            None => {
                return Ok(Outcome {
                    ok: false,
                    output: Output::Json(json!({"valid": false, "violations": [], "hom": null})),
                })
            }
        },
    };
    let report = check_homomorphism(&g, &s, &h, t.mode)?;
    let mut out = to_json(&report);
    if t.infer {
        out["hom"] = to_json(&h);
    }
    Ok(Outcome { ok: report.is_empty(), output: Output::Json(out) })
}

fn relation(p: &Propagation) -> Result<PropagationRelation, Failure> {
    match &p.relation {
        Some(path) => load(path, PropagationRelation::from_json),
        None => Ok(PropagationRelation::default()),
    }
}

fn to_instance(p: &Propagation) -> Result<Outcome, Failure> {
    let (s, g, h) = (graph(&p.schema)?, graph(&p.instance)?, hom(&p.hom)?);
    let app = apply_rule(&s, &rule(&p.rule)?, &hom(&p.matching)?)?;
    let mut rel = relation(p)?;
    let restricted = &app.restricted;
    // clone targets may be given as ids of the rule's preserved graph
    rel.keep = rel.keep.into_iter().map(|(n, t)| (n, restricted.matching.get(&t).cloned().unwrap_or(t))).collect();
    let out = controlled_propagate_to_instance(&g, &h, &restricted.graph, &restricted.back_map, p.mode, &rel)?;
    let h_plus = compose(&out.hom, &app.expanded.fwd_map)?;
    let report = check_homomorphism(&out.graph, app.graph(), &h_plus, p.mode)?;
    Ok(Outcome {
        ok: report.is_empty(),
        output: Output::Json(json!({"schema": app.graph(), "instance": out.graph, "hom": h_plus, "report": report})),
    })
}

fn to_schema(p: &Propagation) -> Result<Outcome, Failure> {
    let (s, g, h) = (graph(&p.schema)?, graph(&p.instance)?, hom(&p.hom)?);
    let app = apply_rule(&g, &rule(&p.rule)?, &hom(&p.matching)?)?;
    let h_minus = compose(&app.restricted.back_map, &h)?;
    let out = controlled_propagate_to_schema(&s, app.graph(), &h_minus, &app.expanded.fwd_map, p.mode, &relation(p)?)?;
    let report = check_homomorphism(app.graph(), &out.graph, &out.hom, p.mode)?;
    Ok(Outcome {
        ok: report.is_empty(),
        output: Output::Json(json!({
            "schema": out.graph,
            "instance": app.graph(),
            "hom": out.hom,
            "schema_map": out.schema_map,
            "report": report,
        })),
    })
}

fn emit(c: &EmitCommand) -> Result<Outcome, Failure> {
    let (q, sections): (QueryText, bool) = match c {
        EmitCommand::Clone { id, sections } => (emit_clone_query(&Selector::id(id)), *sections),
        EmitCommand::Merge { a, b, multigraph, sections } => {
            (emit_merge_query(&Selector::id(a), &Selector::id(b), !multigraph), *sections)
        }
        EmitCommand::Rule { rule: r, matching, sections } => {
            let m = hom(matching)?;
            let selectors: BTreeMap<ObjectId, Selector> =
                m.iter().map(|(x, n)| (x.clone(), Selector::id(n.as_str()))).collect();
            (emit_rule_query(&rule(r)?, &selectors)?, *sections)
        }
    };
    let output = if sections { Output::Json(q.sections_json()) } else { Output::Text("query", q.text) };
    Ok(Outcome { output, ok: true })
}

fn render(output: Output, pretty: bool) -> String {
    match (output, pretty) {
        (Output::Text(_, text), true) => text,
        (Output::Text(key, text), false) => json!({ key: text }).to_string(),
        (Output::Json(v), true) => serde_json::to_string_pretty(&v).expect("json renders"),
        (Output::Json(v), false) => v.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let mut text = render(outcome.output, cli.pretty);
            if !text.ends_with('\n') {
                text.push('\n');
            }
            let written = match &cli.out {
                Some(p) => fs::write(p, text).map_err(|e| Failure::at(p, e)),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Err(Failure(msg)) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(2)
                }
                Ok(()) if outcome.ok => ExitCode::SUCCESS,
                Ok(()) => ExitCode::from(1),
            }
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
