use std::fs::File;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

use hypernibble::nibble::{read_csv, traces_from_parts, trajectory_check, GlobalsFile, RoundTrace};

use crate::{io, Outcome};

#[derive(Args)]
pub struct StatsArgs {
    /// Trace CSV written by `color --trace`.
    #[arg(long)]
    trace: PathBuf,
    /// Globals JSON written by `color --globals`.
    #[arg(long)]
    globals: PathBuf,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct RoundStats {
    pub round: usize,
    pub vertices: usize,
    pub zeta: f64,
    pub mean_d: Option<f64>,
    pub max_d: Option<f64>,
    /// Nearest-rank quantiles 0, 0.25, 0.5, 0.75, 1 of the palette sizes.
    pub palette_quantiles: Option<[usize; 5]>,
    pub d_fraction: f64,
    pub palette_fraction: f64,
}

fn quantile(sorted: &[usize], q: f64) -> usize {
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

pub fn summarize(traces: &[RoundTrace], globals: &GlobalsFile) -> Vec<RoundStats> {
    let report = trajectory_check(traces, &globals.params);
    traces
        .iter()
        .zip(report.rounds)
        .map(|(t, check)| {
            let ds: Vec<f64> = t.vertices.iter().map(|v| v.d).collect();
            let mut sizes: Vec<usize> = t.vertices.iter().map(|v| v.palette_size).collect();
            sizes.sort_unstable();
            let nonempty = !ds.is_empty();
            RoundStats {
                round: t.globals.round,
                vertices: ds.len(),
                zeta: t.globals.zeta,
                mean_d: nonempty.then(|| ds.iter().sum::<f64>() / ds.len() as f64),
                max_d: nonempty.then(|| ds.iter().copied().fold(f64::MIN, f64::max)),
                palette_quantiles: nonempty.then(|| [0.0, 0.25, 0.5, 0.75, 1.0].map(|q| quantile(&sizes, q))),
                d_fraction: check.d_fraction,
                palette_fraction: check.palette_fraction,
            }
        })
        .collect()
}

pub fn run(a: StatsArgs) -> Result<Outcome> {
    let file = File::open(&a.trace).with_context(|| format!("opening {}", a.trace.display()))?;
    let rows = read_csv(file).with_context(|| format!("parsing {}", a.trace.display()))?;
    let globals: GlobalsFile = io::read_json(&a.globals)?;
    let traces = traces_from_parts(&rows, &globals.rounds);
    let stats = summarize(&traces, &globals);
    match &a.out {
        Some(p) => io::write_json(p, &stats)?,
        None => println!("{}", serde_json::to_string_pretty(&stats)?),
    }
    Ok(Outcome::Ok)
}
