//! Argument parsing and dispatch.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use hopfharm_core::quaddiff::ANGLE_TOL;
use hopfharm_core::Point2;

use crate::commands::{self, TraceRequest};
use crate::error::CliError;
use crate::formats::KindName;
use crate::gallery;
use crate::report::{GlobalFlags, RunReport, Session};

#[derive(Debug, Parser)]
#[command(name = "hopfharm", version, about = "Harmonic extensions, Hopf products and quadratic-differential trajectories")]
pub struct Cli {
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Harmonic extension of boundary data, with injectivity checks.
    Extend {
        domain: PathBuf,
        target: PathBuf,
        boundary: PathBuf,
        /// Target mesh edge length.
        #[arg(long, default_value_t = 0.05)]
        edge: f64,
    },
    /// Alternating harmonic replacement over two convex cells.
    Alternate { domain: PathBuf, cell1: PathBuf, cell2: PathBuf, boundary: PathBuf, config: PathBuf },
    /// Hopf product and its holomorphy residual over refined meshes.
    HopfCheck {
        map: PathBuf,
        #[arg(long, default_value_t = 3)]
        refinements: usize,
        /// Edge length of the coarsest level.
        #[arg(long, default_value_t = 0.2)]
        edge: f64,
    },
    /// Trajectories of a quadratic differential.
    Trace {
        spec: PathBuf,
        /// Start point `x,y`; repeat for several trajectories.
        #[arg(long = "start", value_parser = parse_point, allow_hyphen_values = true)]
        starts: Vec<Point2>,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Step limit in each direction.
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        /// Overrides the kind given in the spec.
        #[arg(long, value_enum)]
        kind: Option<KindName>,
        /// Random competitor curves per trajectory; 0 skips the check.
        #[arg(long, default_value_t = 100)]
        competitors: usize,
        /// Largest accepted |Im(tau^2 phi)| / |phi| per step.
        #[arg(long, default_value_t = ANGLE_TOL)]
        angle_tol: f64,
    },
    /// Douglas sums of boundary data on the unit circle.
    Douglas {
        boundary: PathBuf,
        /// Sample counts, comma separated.
        #[arg(long = "n", value_delimiter = ',', default_values_t = [256, 512, 1024, 2048])]
        n: Vec<usize>,
    },
    /// Lists or extracts the example files.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum GalleryAction {
    /// Prints the manifest. Without names, the default examples.
    List { names: Vec<String> },
    /// Writes example files and `manifest.json` into `--out`.
    Extract { names: Vec<String> },
}

fn parse_point(s: &str) -> Result<Point2, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok(Point2::new(p(x)?, p(y)?))
}

/// The report plus anything the command prints instead of it.
pub struct Outcome {
    pub report: RunReport,
    pub stdout: Option<String>,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Extend { .. } => "extend",
        Command::Alternate { .. } => "alternate",
        Command::HopfCheck { .. } => "hopf-check",
        Command::Trace { .. } => "trace",
        Command::Douglas { .. } => "douglas",
        Command::Gallery { action: GalleryAction::List { .. } } => "gallery list",
        Command::Gallery { action: GalleryAction::Extract { .. } } => "gallery extract",
    }
}

pub fn run(cli: Cli) -> Outcome {
    let global = GlobalFlags { out: cli.out.clone(), seed: cli.seed, threads: cli.threads };
    let mut s = Session::new(command_name(&cli.command), &global);
    let mut stdout = None;
    let result = if cli.threads == 0 { Err(CliError::Config("threads must be at least 1".into())) } else { dispatch(&mut s, &cli, &mut stdout) };
    Outcome { report: s.finish(result), stdout }
}

fn dispatch(s: &mut Session, cli: &Cli, stdout: &mut Option<String>) -> Result<(), CliError> {
    match &cli.command {
        Command::Extend { domain, target, boundary, edge } => commands::extend(s, domain, target, boundary, *edge),
        Command::Alternate { domain, cell1, cell2, boundary, config } => commands::alternate(s, domain, [cell1, cell2], boundary, config),
        Command::HopfCheck { map, refinements, edge } => commands::hopf_check(s, map, *refinements, *edge),
        Command::Trace { spec, starts, step, max_steps, kind, competitors, angle_tol } => {
            let req = TraceRequest { starts: starts.clone(), step: *step, max_steps: *max_steps, kind: *kind, competitors: *competitors, angle_tol: *angle_tol };
            commands::trace_cmd(s, spec, &req, cli.seed)
        }
        Command::Douglas { boundary, n } => commands::douglas(s, boundary, n),
        Command::Gallery { action: GalleryAction::List { names } } => {
            let m = gallery::list(s, names)?;
            *stdout = Some(serde_json::to_string_pretty(&m).expect("manifest serializes"));
            Ok(())
        }
        Command::Gallery { action: GalleryAction::Extract { names } } => gallery::extract(s, names),
    }
}
