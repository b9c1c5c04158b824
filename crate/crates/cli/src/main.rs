use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use operad_core::apps::parse::parse_rational;
use operad_core::apps::report::{run, RunOptions, Source};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Gb,
    Normal,
    Hilbert,
    Resolve,
    Homology,
    Minmodel,
    CheckPbw,
    FromAlgebra,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Gb => "gb",
            Command::Normal => "normal",
            Command::Hilbert => "hilbert",
            Command::Resolve => "resolve",
            Command::Homology => "homology",
            Command::Minmodel => "minmodel",
            Command::CheckPbw => "check-pbw",
            Command::FromAlgebra => "from-algebra",
        }
    }
}

/// Gröbner bases, resolutions and Quillen homology for shuffle operads.
#[derive(Debug, Parser)]
#[command(name = "operad", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Built-in presentation: rb, ncrb, bv, grav, odd-assoc, free.
    #[arg(long, conflicts_with = "file")]
    builtin: Option<String>,
    /// Presentation file, or an algebra file for from-algebra.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    arity: usize,
    /// Keep only monomials of this weight in normal and hilbert.
    #[arg(long)]
    weight: Option<i64>,
    /// Monomial order, e.g. `path_lex:P>m`.
    #[arg(long)]
    order: Option<String>,
    /// Parameter override `name=value` with a rational value.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// k for the odd (2k+1)-associative operad.
    #[arg(long)]
    k: Option<usize>,
    /// Vertex bound for resolution generators.
    #[arg(long)]
    vertices: Option<usize>,
}

fn options(cli: &Cli) -> anyhow::Result<RunOptions> {
    let source = match (&cli.builtin, &cli.file) {
        (Some(name), None) => Source::Builtin(name.clone()),
        (None, Some(path)) => Source::Text(std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?),
        _ => bail!("exactly one of --builtin and --file is required"),
    };
    let mut params = BTreeMap::new();
    for p in &cli.params {
        let (name, value) = p.split_once('=').with_context(|| format!("expected name=value, got {p}"))?;
        let v = parse_rational(value.trim()).map_err(|e| anyhow::anyhow!("parameter {name}: {e}"))?;
        params.insert(name.trim().to_string(), v);
    }
    let mut o = RunOptions::new(source, cli.arity);
    o.weight = cli.weight;
    o.order = cli.order.clone();
    o.params = params;
    o.seed = cli.seed;
    o.k = cli.k;
    o.vertices = cli.vertices;
    Ok(o)
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let report = run(cli.command.name(), &options(&cli)?);
    let text = serde_json::to_string_pretty(&report.document)? + "\n";
    match &cli.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::from(report.exit_code as u8))
}
