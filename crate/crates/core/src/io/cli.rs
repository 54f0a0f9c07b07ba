//! Command-line experiment runner: one simulation per (protocol, seed) pair,
//! each writing its own rounds and summary CSV files.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;
use rayon::prelude::*;
use tempfile::NamedTempFile;

use super::config::parse_config;
use super::csv::{write_round_csv, write_summary_csv, OutputError, RunSummary};
use crate::engine::run_simulation;
use crate::protocols::ProtocolKind;

#[derive(Debug, Parser)]
#[command(
    name = "wsn-routing",
    about = "Round-based energy-aware WSN routing simulator",
    version
)]
struct Cli {
    /// Experiment config (`key = value` lines).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Protocol override; a comma list runs each one.
    #[arg(long, value_name = "NAME[,NAME...]", value_delimiter = ',', value_parser = parse_protocol)]
    protocol: Vec<ProtocolKind>,

    /// Seed override.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,

    /// Inclusive seed sweep, e.g. `1..20`.
    #[arg(long, value_name = "N..M", value_parser = parse_seed_range)]
    seeds: Option<(u64, u64)>,

    /// Output directory for CSV files.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Print a comparison table to standard output.
    #[arg(long)]
    summary: bool,
}

fn parse_protocol(s: &str) -> Result<ProtocolKind, String> {
    s.trim().parse().map_err(|_| {
        format!(
            "unknown protocol `{s}` (accepted: {})",
            ProtocolKind::accepted_names()
        )
    })
}

fn parse_seed_range(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected N..M, got `{s}`"))?;
    let lo: u64 = lo.trim().parse().map_err(|_| format!("bad seed `{lo}`"))?;
    let hi: u64 = hi.trim().parse().map_err(|_| format!("bad seed `{hi}`"))?;
    if lo > hi {
        return Err(format!("empty seed range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

/// Parses `args` (program name first), runs the sweep and returns the process
/// exit code. Errors are reported on standard error.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(summaries) => {
            if cli.summary {
                print!("{}", render_table(&summaries));
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<RunSummary>> {
    let text = fs::read_to_string(&cli.config)
        .with_context(|| format!("cannot read config `{}`", cli.config.display()))?;
    let base = parse_config(&text).with_context(|| format!("in `{}`", cli.config.display()))?;

    let protocols = if cli.protocol.is_empty() {
        vec![base.protocol]
    } else {
        let mut p = cli.protocol.clone();
        p.sort();
        p.dedup();
        p
    };
    let seeds: Vec<u64> = match (cli.seed, cli.seeds) {
        (Some(_), Some(_)) => bail!("--seed and --seeds are mutually exclusive"),
        (Some(s), None) => vec![s],
        (None, Some((lo, hi))) => (lo..=hi).collect(),
        (None, None) => vec![base.seed],
    };

    fs::create_dir_all(&cli.out)
        .with_context(|| format!("cannot create output directory `{}`", cli.out.display()))?;

    let jobs: Vec<(ProtocolKind, u64)> = protocols
        .iter()
        .flat_map(|&p| seeds.iter().map(move |&s| (p, s)))
        .collect();

    let mut summaries = jobs
        .par_iter()
        .map(|&(protocol, seed)| {
            let mut cfg = base.clone();
            cfg.protocol = protocol;
            cfg.seed = seed;
            let result = run_simulation(&cfg)
                .with_context(|| format!("simulating {protocol} with seed {seed}"))?;
            let summary = RunSummary::from_result(&result);
            let stem = format!("{protocol}_seed{seed}");
            write_atomically(&cli.out.join(format!("{stem}_rounds.csv")), |w| {
                write_round_csv(&result.reports, w)
            })?;
            write_atomically(&cli.out.join(format!("{stem}_summary.csv")), |w| {
                write_summary_csv(std::slice::from_ref(&summary), w)
            })?;
            Ok(summary)
        })
        .collect::<Result<Vec<_>>>()?;
    summaries.sort_by_key(|s| (s.protocol, s.seed));
    Ok(summaries)
}

/// Writes into a temp file next to `path` and renames it into place only
/// after the writer succeeds.
fn write_atomically(
    path: &Path,
    write: impl FnOnce(&mut dyn Write) -> Result<(), OutputError>,
) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a file in `{}`", dir.display()))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        write(&mut w).with_context(|| format!("writing `{}`", path.display()))?;
        w.flush()
            .with_context(|| format!("writing `{}`", path.display()))?;
    }
    tmp.persist(path)
        .with_context(|| format!("cannot move output into `{}`", path.display()))?;
    Ok(())
}

/// Aligned comparison table; censored milestones carry a trailing `+`.
pub fn render_table(rows: &[RunSummary]) -> String {
    let cell =
        |m: crate::metrics::Milestone| format!("{}{}", m.round, if m.censored { "+" } else { "" });
    let mut out = format!(
        "{:<18} {:>6} {:>12} {:>12} {:>20}\n",
        "protocol", "seed", "first_death", "50pct_dead", "ctrl_per_node_round"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<18} {:>6} {:>12} {:>12} {:>20.6}\n",
            r.protocol.as_str(),
            r.seed,
            cell(r.lifetime.first_death),
            cell(r.lifetime.pct50_dead),
            r.overhead.ctrl_per_node_round,
        ));
    }
    out
}
