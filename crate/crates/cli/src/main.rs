//! `hypernibble`: generate, reduce, color, verify and summarize hypergraph
//! list colorings.
//!
//! Exit codes: 0 success, 1 verification found violations, 2 input error,
//! 3 algorithmic failure.

mod io;
mod stats;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hypernibble::completion::{complete, CompletionConfig, Fallback};
use hypernibble::instances::{gen_linear, gen_lists, gen_mixed, gen_uniform, make_triangle_free};
use hypernibble::nibble::{
    init_state, observed_delta, run_to_termination, write_csv, GlobalsFile, NibbleConfig, Params, QMethod, Relaxation,
    RunStatus,
};
use hypernibble::reduction::{balanced_reduce, f_reduce_with, ContractionMode, PolicyFile, ReductionPolicy};
use hypernibble::verify::{brute_max_codegree, verify_list, verify_proper};
use hypernibble::{ColorNames, Coloring, ColoringFile, Hypergraph, ListAssignment};

#[derive(Parser)]
#[command(
    name = "hypernibble",
    version,
    about = "Semi-random list coloring of rank-k hypergraphs"
)]
struct Cli {
    /// Worker threads for the parallel parts of each round.
    #[arg(long, global = true, env = "NIBBLE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and optional color lists.
    Generate(GenerateArgs),
    /// Apply codegree reduction to an instance.
    Reduce(ReduceArgs),
    /// Run the iterative coloring and the completion phase.
    Color(ColorArgs),
    /// Check a coloring or an instance against the requested properties.
    Verify(VerifyArgs),
    /// Per-round aggregates of a trace.
    Stats(stats::StatsArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    /// Edge size, or the rank with --mixed.
    #[arg(long)]
    k: usize,
    /// Number of edges (ignored with --mixed).
    #[arg(long, default_value_t = 0)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Delete edges until no triangle is left.
    #[arg(long)]
    triangle_free: bool,
    /// Pairwise intersections of at most one vertex.
    #[arg(long, conflicts_with = "mixed")]
    linear: bool,
    /// Edge counts per size, e.g. `2:100,3:400`.
    #[arg(long)]
    mixed: Option<String>,
    /// Also write random lists of this many colors.
    #[arg(long)]
    lists_size: Option<usize>,
    /// Size of the color pool the lists draw from (defaults to the list size).
    #[arg(long, requires = "lists_size")]
    pool: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the lists (defaults to `<out>.lists.json`).
    #[arg(long)]
    lists_out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("how").required(true).args(["policy", "balanced"]))]
struct ReduceArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Threshold table `{"rank": k, "thresholds": [{"s":..,"l":..,"f":..}]}`.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Adaptive thresholds derived from the observed degrees.
    #[arg(long)]
    balanced: bool,
    #[arg(long, value_enum, default_value_t = Mode::Snapshot)]
    mode: Mode,
    #[arg(long)]
    out: PathBuf,
    /// Per-round contractions as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// With --balanced, the thresholds used, as a policy table.
    #[arg(long)]
    policy_out: Option<PathBuf>,
    #[arg(long)]
    allow_dup: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Snapshot,
    Sequential,
}

#[derive(Args)]
struct ColorArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Color lists; without it every vertex gets the colors c0..c{C-1}.
    #[arg(long)]
    lists: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use user constants instead of the asymptotic ones.
    #[arg(long)]
    relax: bool,
    /// φ1 (relaxed mode; default 0.25).
    #[arg(long, requires = "relax")]
    phi1: Option<f64>,
    /// φ2 (relaxed mode; default 1/k^4).
    #[arg(long, requires = "relax")]
    phi2: Option<f64>,
    /// Palette size C (relaxed mode; default the smallest list size).
    #[arg(long, requires = "relax")]
    colors: Option<usize>,
    /// ε (relaxed mode; default from Δ).
    #[arg(long, requires = "relax")]
    epsilon: Option<f64>,
    /// Degree scale Δ (default read off the instance).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    max_rounds: usize,
    #[arg(long)]
    deterministic_tiebreak: bool,
    #[arg(long, value_enum, default_value_t = QKind::Auto)]
    q_method: QKind,
    /// Samples for the Monte Carlo q estimate.
    #[arg(long, default_value_t = 10_000)]
    q_samples: usize,
    #[arg(long, default_value_t = 100_000)]
    max_resamples: usize,
    #[arg(long, value_enum, default_value_t = FallbackKind::Greedy)]
    fallback: FallbackKind,
    #[arg(long)]
    out: PathBuf,
    /// Per-vertex trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Per-round globals JSON.
    #[arg(long)]
    globals: Option<PathBuf>,
    /// Run summary JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    allow_dup: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum QKind {
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Clone, Copy, ValueEnum)]
enum FallbackKind {
    Greedy,
    Fail,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    coloring: Option<PathBuf>,
    #[arg(long, requires = "coloring")]
    lists: Option<PathBuf>,
    #[arg(long)]
    triangle_free: bool,
    /// Check δ_{s,l} <= f(s,l) for every entry of this policy table.
    #[arg(long)]
    codegree_bounds: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    allow_dup: bool,
}

enum Outcome {
    Ok,
    Violations,
    Failure,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Reduce(a) => reduce(a),
        Command::Color(a) => color(a),
        Command::Verify(a) => verify(a),
        Command::Stats(a) => stats::run(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violations) => ExitCode::from(1),
        Ok(Outcome::Failure) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_mixed(spec: &str) -> Result<Vec<(usize, usize)>> {
    spec.split(',')
        .map(|part| {
            let (k, m) = part
                .split_once(':')
                .ok_or_else(|| anyhow!("expected size:count, got {part:?}"))?;
            Ok((k.trim().parse()?, m.trim().parse()?))
        })
        .collect()
}

fn generate(a: GenerateArgs) -> Result<Outcome> {
    let mut h = if let Some(spec) = &a.mixed {
        gen_mixed(a.n, &parse_mixed(spec)?, a.k, a.seed)?
    } else if a.linear {
        let out = gen_linear(a.n, a.k, a.m, a.seed)?;
        if !out.reached {
            log::warn!(
                "packed only {} of {} edges after {} attempts",
                out.hypergraph.num_edges(),
                a.m,
                out.attempts
            );
        }
        out.hypergraph
    } else {
        gen_uniform(a.n, a.k, a.m, a.seed)?
    };
    if a.triangle_free {
        let before = h.num_edges();
        h = make_triangle_free(&h, a.seed);
        log::info!("removed {} edges to break triangles", before - h.num_edges());
    }
    io::write_json(&a.out, &h)?;
    if let Some(size) = a.lists_size {
        let lists = gen_lists(a.n, size, a.pool.unwrap_or(size), a.seed)?;
        let path = a.lists_out.unwrap_or_else(|| a.out.with_extension("lists.json"));
        io::write_json(&path, &lists.to_file())?;
    }
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct BalancedTrace<'a> {
    delta: f64,
    lambdas: &'a std::collections::BTreeMap<usize, f64>,
    rounds: &'a [hypernibble::reduction::ReductionRound],
}

fn reduce(a: ReduceArgs) -> Result<Outcome> {
    let h = io::read_instance(&a.instance, a.allow_dup)?;
    if a.balanced {
        let out = balanced_reduce(&h)?;
        io::write_json(&a.out, &out.result)?;
        if let Some(path) = &a.trace {
            let trace = BalancedTrace {
                delta: out.delta,
                lambdas: &out.lambdas,
                rounds: &out.rounds,
            };
            io::write_json(path, &trace)?;
        }
        if let Some(path) = &a.policy_out {
            io::write_json(path, &out.policy()?.to_file())?;
        }
        return Ok(Outcome::Ok);
    }
    let path = a.policy.as_ref().expect("clap enforces policy or balanced");
    let file: PolicyFile = io::read_json(path)?;
    let policy = ReductionPolicy::from_file(&file).context("invalid policy")?;
    let mode = match a.mode {
        Mode::Snapshot => ContractionMode::Snapshot,
        Mode::Sequential => ContractionMode::Sequential,
    };
    let trace = f_reduce_with(&h, &policy, mode)?;
    io::write_json(&a.out, &trace.result)?;
    if let Some(path) = &a.trace {
        io::write_json(path, &trace)?;
    }
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct ColorReport {
    status: &'static str,
    rounds: usize,
    zeta: f64,
    colored_in_rounds: usize,
    deferred: Vec<usize>,
    resamples: usize,
    greedy: Vec<usize>,
    monochromatic: usize,
    off_list: usize,
    failure: Option<String>,
}

fn build_params(a: &ColorArgs, h: &Hypergraph, lists: Option<&ListAssignment>) -> Result<Params> {
    let k = h.rank();
    if a.relax {
        let colors = match (a.colors, lists) {
            (Some(c), _) => c,
            (None, Some(l)) => l.min_list_size(),
            (None, None) => bail!("relaxed mode needs --colors or --lists"),
        };
        let phi1 = a.phi1.unwrap_or(0.25);
        let delta = match (a.delta, lists) {
            (Some(d), _) => d,
            (None, Some(l)) => observed_delta(h, l, k, colors, phi1),
            (None, None) => observed_delta(h, &io::uniform_lists(h.num_vertices(), colors), k, colors, phi1),
        };
        let relax = Relaxation {
            phi1: Some(phi1),
            phi2: a.phi2,
            colors: Some(colors),
            epsilon: a.epsilon,
        };
        Ok(Params::relaxed(k, delta, relax)?)
    } else {
        let delta = a.delta.unwrap_or_else(|| {
            let profile = h.degree_profile();
            let top = (2..=k).map(|l| profile.max_degree(l)).max().unwrap_or(0) as f64;
            top.max(std::f64::consts::E)
        });
        Ok(Params::theoretical(k, delta)?)
    }
}

fn color(a: ColorArgs) -> Result<Outcome> {
    let h = io::read_instance(&a.instance, a.allow_dup)?;
    let given = a
        .lists
        .as_ref()
        .map(|p| io::read_lists(p, h.num_vertices()))
        .transpose()?;
    let params = build_params(&a, &h, given.as_ref())?;
    let lists = given.unwrap_or_else(|| io::uniform_lists(h.num_vertices(), params.colors));
    let q_method = match a.q_method {
        QKind::Auto => QMethod::Auto { samples: a.q_samples },
        QKind::Exact => QMethod::Exact,
        QKind::MonteCarlo => QMethod::MonteCarlo { samples: a.q_samples },
    };
    let config = NibbleConfig {
        q_method,
        deterministic_tiebreak: a.deterministic_tiebreak,
    };
    let state = init_state(&h, &lists, &params, config, a.seed)?;

    let mut report = ColorReport {
        status: "ok",
        rounds: 0,
        zeta: state.round_params().zeta,
        colored_in_rounds: 0,
        deferred: Vec::new(),
        resamples: 0,
        greedy: Vec::new(),
        monochromatic: 0,
        off_list: 0,
        failure: None,
    };
    let run = match run_to_termination(state, a.max_rounds) {
        Ok(run) => run,
        Err(e) => {
            eprintln!("iterative phase failed: {e}");
            report.status = "failed";
            report.failure = Some(e.to_string());
            write_report(a.report.as_deref(), &report)?;
            return Ok(Outcome::Failure);
        }
    };
    let state = &run.state;
    report.rounds = state.round();
    report.zeta = state.round_params().zeta;
    report.colored_in_rounds = state.partial().colored_count();
    report.deferred = state.deferred().to_vec();
    if run.status == RunStatus::MaxRounds {
        report.status = "max-rounds";
    }
    if let Some(path) = &a.trace {
        let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_csv(&run.traces, h.num_vertices(), std::io::BufWriter::new(file))?;
    }
    if let Some(path) = &a.globals {
        io::write_json(path, &GlobalsFile::new(&params, &run.traces))?;
    }

    let cfg = CompletionConfig {
        max_resample_rounds: a.max_resamples,
        fallback: match a.fallback {
            FallbackKind::Greedy => Fallback::Greedy,
            FallbackKind::Fail => Fallback::Fail,
        },
    };
    let done = match complete(state, &cfg) {
        Ok(done) => done,
        Err(e) => {
            eprintln!("completion failed: {e}");
            if !state.deferred().is_empty() {
                eprintln!("deferred vertices: {:?}", state.deferred());
            }
            io::write_json(&a.out, &state.partial().to_file(lists.names()))?;
            report.status = "failed";
            report.failure = Some(e.to_string());
            write_report(a.report.as_deref(), &report)?;
            return Ok(Outcome::Failure);
        }
    };
    report.resamples = done.resamples;
    report.greedy = done.greedy.clone();
    io::write_json(&a.out, &done.coloring.to_file(lists.names()))?;

    let check = verify_list(&h, &lists, &done.coloring);
    report.monochromatic = check.proper.monochromatic.len();
    report.off_list = check.off_list.len();
    if !check.is_clean() {
        eprintln!(
            "coloring is not a proper list coloring: {} monochromatic edges, {} off-list colors",
            report.monochromatic, report.off_list
        );
        report.status = "failed";
        write_report(a.report.as_deref(), &report)?;
        return Ok(Outcome::Failure);
    }
    write_report(a.report.as_deref(), &report)?;
    Ok(Outcome::Ok)
}

fn write_report<T: Serialize>(path: Option<&Path>, report: &T) -> Result<()> {
    match path {
        Some(p) => io::write_json(p, report),
        None => Ok(()),
    }
}

#[derive(Serialize, Default)]
struct VerifyReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    coloring: Option<hypernibble::verify::ListReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    triangle: Option<Option<hypernibble::TriangleWitness>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    codegree_violations: Vec<CodegreeViolation>,
    clean: bool,
}

#[derive(Serialize)]
struct CodegreeViolation {
    s: usize,
    l: usize,
    observed: usize,
    bound: f64,
}

fn verify(a: VerifyArgs) -> Result<Outcome> {
    let h = io::read_instance(&a.instance, a.allow_dup)?;
    let mut report = VerifyReport {
        clean: true,
        ..Default::default()
    };
    if let Some(path) = &a.coloring {
        let file: ColoringFile = io::read_json(path)?;
        let lists = a
            .lists
            .as_ref()
            .map(|p| io::read_lists(p, h.num_vertices()))
            .transpose()?;
        let names = match &lists {
            Some(l) => l.names().clone(),
            None => ColorNames::new(file.colors.values().cloned()),
        };
        let coloring = Coloring::from_file(&file, h.num_vertices(), &names)?;
        let r = match &lists {
            Some(l) => verify_list(&h, l, &coloring),
            None => hypernibble::verify::ListReport {
                proper: verify_proper(&h, &coloring),
                off_list: Vec::new(),
            },
        };
        for e in &r.proper.monochromatic {
            eprintln!("monochromatic edge {e:?}");
        }
        for v in &r.off_list {
            eprintln!("vertex {} colored {} outside its list", v.vertex, names.name(v.color));
        }
        report.clean &= r.is_clean();
        report.coloring = Some(r);
    }
    if a.triangle_free {
        let t = h.find_triangle();
        if let Some(w) = &t {
            eprintln!("triangle {:?} on vertices {:?}", w.edges, w.vertices);
        }
        report.clean &= t.is_none();
        report.triangle = Some(t);
    }
    if let Some(path) = &a.codegree_bounds {
        let file: PolicyFile = io::read_json(path)?;
        let policy = ReductionPolicy::from_file(&file).context("invalid policy")?;
        for l in 3..=policy.rank().min(h.rank()) {
            for s in 2..l {
                let observed = brute_max_codegree(&h, s, l);
                let bound = policy.threshold(s, l);
                if observed as f64 > bound {
                    eprintln!("codegree ({s},{l}) is {observed}, above {bound}");
                    report
                        .codegree_violations
                        .push(CodegreeViolation { s, l, observed, bound });
                }
            }
        }
        report.clean &= report.codegree_violations.is_empty();
    }
    match &a.report {
        Some(p) => io::write_json(p, &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(if report.clean { Outcome::Ok } else { Outcome::Violations })
}
