//! Command-line interface: validate, match, rewrite, flatten, run and
//! export-dot over model documents.
//!
//! Exit codes: 0 success, 1 validation or strategy failure (including
//! unparsable or invalid documents), 2 usage errors.

use ahp_cli::document::Document;
use ahp_cli::{emit_document, export_dot, parse_document};
use ahp_core::hierarchy::AhpGraph;
use ahp_core::matching::find_matches;
use ahp_core::rewriting::apply;
use ahp_core::strategy::{run, RunStatus, DEFAULT_BUDGET};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ahp",
    about = "Attributed hierarchical port graph engine",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a document and check every structural invariant.
    Validate { file: PathBuf },
    /// List the matches of a rule's left-hand side in a graph.
    Match {
        file: PathBuf,
        #[arg(long)]
        rule: String,
        #[arg(long)]
        graph: String,
        /// Emit the matches as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Apply a rule at one match and write the result document.
    Rewrite {
        file: PathBuf,
        #[arg(long)]
        rule: String,
        #[arg(long)]
        graph: String,
        /// Index into the canonical match list.
        #[arg(long = "match", default_value_t = 0)]
        match_index: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Flatten a hierarchical graph and write the result document.
    Flatten {
        file: PathBuf,
        #[arg(long)]
        graph: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a strategy on a graph and write the final document.
    Run {
        file: PathBuf,
        #[arg(long)]
        strategy: String,
        #[arg(long)]
        graph: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u32,
        #[arg(short, long)]
        output: PathBuf,
        /// Directory receiving one document per step plus a manifest.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Render a graph as DOT on stdout.
    ExportDot {
        file: PathBuf,
        #[arg(long)]
        graph: String,
        /// How many ladder levels to expand before badging.
        #[arg(long, default_value_t = 1)]
        depth: u32,
    },
}

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Failure(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_FAILURE)
        }
        Err(CmdError::Usage(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

enum CmdError {
    /// Content problems: unparsable documents, failed validation, failed
    /// strategies.
    Failure(String),
    /// Caller problems: missing files, unknown names, bad indices.
    Usage(String),
}

fn load(path: &Path) -> Result<Document, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_document(&text).map_err(|e| CmdError::Failure(format!("{}:{e}", path.display())))
}

fn subject_graph(doc: &Document, name: &str) -> Result<AhpGraph, CmdError> {
    let graph = doc
        .graph(name)
        .ok_or_else(|| CmdError::Usage(format!("no graph named `{name}`")))?;
    if graph.has_variables() {
        return Err(CmdError::Failure(format!(
            "graph `{name}` contains variables and cannot be rewritten"
        )));
    }
    Ok(graph.clone())
}

fn write_result_doc(
    doc: &Document,
    graph_name: &str,
    graph: AhpGraph,
    output: &Path,
) -> Result<(), CmdError> {
    let out_doc = Document {
        signature: doc.signature.clone(),
        graphs: vec![(graph_name.to_string(), graph)],
        rules: Vec::new(),
        strategies: Vec::new(),
    };
    std::fs::write(output, emit_document(&out_doc))
        .map_err(|e| CmdError::Usage(format!("cannot write {}: {e}", output.display())))?;
    Ok(())
}

fn dispatch(command: Command) -> Result<(), CmdError> {
    match command {
        Command::Validate { file } => {
            let doc = load(&file)?;
            let violations = doc.validate();
            if violations.is_empty() {
                println!(
                    "ok: {} graph(s), {} rule(s), {} strateg(ies)",
                    doc.graphs.len(),
                    doc.rules.len(),
                    doc.strategies.len()
                );
                Ok(())
            } else {
                for v in &violations {
                    eprintln!("{v}");
                }
                Err(CmdError::Failure(format!(
                    "{} violation(s)",
                    violations.len()
                )))
            }
        }

        Command::Match {
            file,
            rule,
            graph,
            json,
        } => {
            let doc = load(&file)?;
            let r = doc
                .rule(&rule)
                .ok_or_else(|| CmdError::Usage(format!("no rule named `{rule}`")))?;
            let g = subject_graph(&doc, &graph)?;
            let matches = find_matches(r, &g);
            if json {
                let value = serde_json::json!({
                    "rule": rule,
                    "graph": graph,
                    "count": matches.len(),
                    "matches": matches.iter().map(ahp_cli::json::match_to_json).collect::<Vec<_>>(),
                });
                println!("{}", serde_json::to_string_pretty(&value).unwrap());
            } else {
                println!(
                    "{} match(es) of rule {rule} in graph {graph}",
                    matches.len()
                );
                for (i, m) in matches.iter().enumerate() {
                    let fmt_map = |pairs: Vec<(String, String)>| -> String {
                        pairs
                            .into_iter()
                            .map(|(a, b)| format!("{a}->{b}"))
                            .collect::<Vec<_>>()
                            .join(", ")
                    };
                    let nodes = fmt_map(
                        m.morphism
                            .nodes
                            .iter()
                            .map(|(a, b)| (a.to_string(), b.to_string()))
                            .collect(),
                    );
                    let ports = fmt_map(
                        m.morphism
                            .ports
                            .iter()
                            .map(|(a, b)| (a.to_string(), b.to_string()))
                            .collect(),
                    );
                    let edges = fmt_map(
                        m.morphism
                            .edges
                            .iter()
                            .map(|(a, b)| (a.to_string(), b.to_string()))
                            .collect(),
                    );
                    let bindings: Vec<String> = m
                        .morphism
                        .bindings
                        .values
                        .iter()
                        .map(|(k, v)| format!("{k}={v}"))
                        .chain(
                            m.morphism
                                .bindings
                                .attrs
                                .iter()
                                .map(|(k, v)| format!("{k}={v}")),
                        )
                        .chain(
                            m.morphism
                                .bindings
                                .graphs
                                .keys()
                                .map(|k| format!("{k}=<graph>")),
                        )
                        .collect();
                    let extra = if bindings.is_empty() {
                        String::new()
                    } else {
                        format!(" where {}", bindings.join(", "))
                    };
                    println!(
                        "match {i}: nodes {{{nodes}}} ports {{{ports}}} edges {{{edges}}}{extra}"
                    );
                }
            }
            Ok(())
        }

        Command::Rewrite {
            file,
            rule,
            graph,
            match_index,
            output,
        } => {
            let doc = load(&file)?;
            let r = doc
                .rule(&rule)
                .ok_or_else(|| CmdError::Usage(format!("no rule named `{rule}`")))?;
            let g = subject_graph(&doc, &graph)?;
            let matches = find_matches(r, &g);
            if matches.is_empty() {
                return Err(CmdError::Failure(format!(
                    "rule `{rule}` does not match graph `{graph}`"
                )));
            }
            if match_index >= matches.len() {
                return Err(CmdError::Usage(format!(
                    "match index {match_index} out of range, {} match(es) exist",
                    matches.len()
                )));
            }
            let applied = apply(r, &g, &matches[match_index])
                .map_err(|e| CmdError::Failure(format!("apply failed: {e}")))?;
            write_result_doc(&doc, &graph, applied.result, &output)?;
            println!(
                "applied {rule} at match {match_index}: {} rewiring action(s), wrote {}",
                applied.rewirings.len(),
                output.display()
            );
            Ok(())
        }

        Command::Flatten {
            file,
            graph,
            output,
        } => {
            let doc = load(&file)?;
            let g = subject_graph(&doc, &graph)?;
            let flat = g
                .flatten()
                .map_err(|e| CmdError::Failure(format!("flatten failed: {e}")))?;
            write_result_doc(&doc, &graph, AhpGraph::flat(flat), &output)?;
            println!("flattened {graph}, wrote {}", output.display());
            Ok(())
        }

        Command::Run {
            file,
            strategy,
            graph,
            seed,
            budget,
            output,
            trace,
        } => {
            let doc = load(&file)?;
            let s = doc
                .strategy(&strategy)
                .ok_or_else(|| CmdError::Usage(format!("no strategy named `{strategy}`")))?;
            let g = subject_graph(&doc, &graph)?;
            let rules = doc.rule_map();
            let derivation = run(s, &g, &rules, seed, budget).map_err(|e| match e {
                ahp_core::strategy::RunError::UnknownRule(_)
                | ahp_core::strategy::RunError::BadBudget => {
                    CmdError::Usage(format!("run failed: {e}"))
                }
                other => CmdError::Failure(format!("run failed: {other}")),
            })?;

            if let Some(dir) = &trace {
                write_trace(&doc, &graph, &derivation, dir)?;
            }
            match derivation.status {
                RunStatus::Success => {
                    write_result_doc(&doc, &graph, derivation.final_graph.clone(), &output)?;
                    println!(
                        "strategy {strategy} succeeded: {} step(s), budget used {}, wrote {}",
                        derivation.steps.len(),
                        derivation.budget_used,
                        output.display()
                    );
                    Ok(())
                }
                RunStatus::Failure => Err(CmdError::Failure(format!(
                    "strategy {strategy} failed after {} step(s), budget used {}",
                    derivation.steps.len(),
                    derivation.budget_used
                ))),
            }
        }

        Command::ExportDot { file, graph, depth } => {
            let doc = load(&file)?;
            let g = doc
                .graph(&graph)
                .ok_or_else(|| CmdError::Usage(format!("no graph named `{graph}`")))?;
            print!("{}", export_dot(g, depth));
            Ok(())
        }
    }
}

fn write_trace(
    doc: &Document,
    graph_name: &str,
    derivation: &ahp_core::strategy::Derivation,
    dir: &Path,
) -> Result<(), CmdError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CmdError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let mut manifest_steps = Vec::new();
    let initial = dir.join("step_000.ahp");
    write_result_doc(doc, graph_name, derivation.initial.clone(), &initial)?;
    for (i, step) in derivation.steps.iter().enumerate() {
        let path = dir.join(format!("step_{:03}.ahp", i + 1));
        write_result_doc(doc, graph_name, step.after.clone(), &path)?;
        manifest_steps.push(serde_json::json!({
            "step": i + 1,
            "rule": step.rule,
            "file": path.file_name().unwrap().to_string_lossy(),
            "rewirings": step.rewirings.len(),
        }));
    }
    let manifest = serde_json::json!({
        "graph": graph_name,
        "status": match derivation.status {
            RunStatus::Success => "success",
            RunStatus::Failure => "failure",
        },
        "steps": manifest_steps,
        "budget_used": derivation.budget_used,
    });
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).unwrap(),
    )
    .map_err(|e| CmdError::Usage(format!("cannot write manifest: {e}")))?;
    Ok(())
}
