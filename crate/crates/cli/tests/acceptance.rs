//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hypernibble::coloring::{ColorId, Coloring, ColoringFile};
use hypernibble::instances::{gen_uniform, make_triangle_free};
use hypernibble::nibble::{
    init_state, observed_delta, run_round_audited, NibbleConfig, NibbleState, Params, QMethod, Relaxation,
};
use hypernibble::reduction::{lambda_to_degree, solve_lambda};
use hypernibble::verify::{brute_has_subsumption, brute_max_codegree, brute_triangles, verify_list};
use hypernibble::{
    check_soundness, f_reduce, Edge, Hypergraph, InstanceFile, ListAssignment, ListsFile, ReductionPolicy,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use tempfile::TempDir;

struct Verdict {
    pass: bool,
    detail: String,
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypernibble"))
}

fn cli(args: &[&str]) -> i32 {
    let out = bin().args(args).output().expect("binary runs");
    if !out.status.success() {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    out.status.code().unwrap_or(-1)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn random_hypergraph(rng: &mut StdRng, max_n: usize, max_rank: usize, max_edges: usize) -> Hypergraph {
    let n = rng.random_range(3..=max_n);
    let k = rng.random_range(2..=max_rank.min(n));
    let m = rng.random_range(0..=max_edges);
    let edges = (0..m).map(|_| {
        let size = rng.random_range(2..=k);
        rand::seq::index::sample(rng, n, size).into_iter().collect::<Edge>()
    });
    Hypergraph::new_dedup(n, k, edges).unwrap()
}

fn named(n: usize, edges: &[&str]) -> Hypergraph {
    let edges = edges
        .iter()
        .map(|e| e.bytes().map(|b| (b - b'a') as usize).collect::<Edge>());
    Hypergraph::new(n, 3, edges).unwrap()
}

fn triangle_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let mut mismatches = 0;
    let mut with_triangle = 0;
    for _ in 0..200 {
        let h = random_hypergraph(&mut rng, 12, 4, 30);
        let all = brute_triangles(&h);
        let ok = match h.find_triangle() {
            None => all.is_empty(),
            Some(w) => {
                with_triangle += 1;
                w.is_valid() && all.contains(&w)
            }
        };
        mismatches += usize::from(!ok);
    }
    let examples = [
        (named(6, &["abc", "cde", "efa"]), true),
        (named(5, &["abc", "bcd", "aed"]), true),
        (named(4, &["abc", "bcd", "abd"]), true),
        (named(5, &["abc", "bcd", "ace"]), false),
    ];
    let named_ok = examples
        .iter()
        .filter(|(h, want)| h.find_triangle().is_some() == *want && brute_triangles(h).is_empty() != *want)
        .count();
    let elapsed = start.elapsed();
    Verdict {
        pass: mismatches == 0 && named_ok == 4 && elapsed < Duration::from_secs(5),
        detail: format!(
            "200 random ({with_triangle} with triangles), {mismatches} mismatches; named {named_ok}/4; {elapsed:.2?}"
        ),
    }
}

fn bounded(h: &Hypergraph, policy: &ReductionPolicy) -> bool {
    (3..=h.rank()).all(|l| (2..l).all(|s| brute_max_codegree(h, s, l) as f64 <= policy.threshold(s, l)))
}

fn all_colorings(n: usize, colors: u32, mut f: impl FnMut(&Coloring)) {
    let mut code = vec![0u32; n];
    loop {
        f(&Coloring::from_colors(code.iter().map(|&c| ColorId(c))));
        let mut i = 0;
        while i < n && code[i] == colors - 1 {
            code[i] = 0;
            i += 1;
        }
        if i == n {
            return;
        }
        code[i] += 1;
    }
}

fn reduction_guarantees() -> Verdict {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2);
    let mut over = 0;
    for _ in 0..100 {
        let h = random_hypergraph(&mut rng, 12, 4, 40);
        let policy = ReductionPolicy::geometric(h.rank(), rng.random_range(1.1..3.0)).unwrap();
        over += usize::from(!bounded(&f_reduce(&h, &policy).unwrap().result, &policy));
    }
    let mut triangles = 0;
    for seed in 0..30 {
        let h = make_triangle_free(&gen_uniform(12, 3, 40, seed).unwrap(), seed);
        let policy = ReductionPolicy::geometric(3, 1.5).unwrap();
        triangles += usize::from(!f_reduce(&h, &policy).unwrap().result.is_triangle_free());
    }
    let mut unsound = 0;
    let mut checked = 0u64;
    for seed in 0..6 {
        let n = 5 + seed as usize;
        let h = gen_uniform(n, 3, 2 * n, seed).unwrap();
        let reduced = f_reduce(&h, &ReductionPolicy::geometric(3, 1.5).unwrap())
            .unwrap()
            .result;
        all_colorings(n, 4, |c| {
            checked += 1;
            unsound += usize::from(!check_soundness(&h, &reduced, c));
        });
    }
    let elapsed = start.elapsed();
    Verdict {
        pass: over == 0 && triangles == 0 && unsound == 0 && elapsed < Duration::from_secs(60),
        detail: format!(
            "codegree violations {over}/100, new triangles {triangles}/30, unsound {unsound} of {checked} colorings; {elapsed:.2?}"
        ),
    }
}

fn recurrences() -> Verdict {
    let mut drift = 0;
    let mut over = Vec::new();
    let mut over_ceiling = 0;
    for k in 3..=5 {
        for delta in [1e3, 1e4, 1e6] {
            let p = Params::theoretical(k, delta).unwrap();
            let t = p.round_count(10_000_000).expect("schedule terminates");
            let z0 = p.initial_round().zeta;
            let step = p.zeta_step();
            for r in p.schedule().take(t + 1) {
                let want = z0 - r.i as f64 * step;
                if (r.zeta - want).abs() > 1e-9 * want.abs().max(step) {
                    drift += 1;
                }
            }
            let bound = p.round_bound();
            if t as f64 > bound {
                over.push(format!("k={k} Δ=1e{} T={t} bound={bound:.3}", delta.log10() as i32));
            }
            if t as f64 > bound + 1.0 {
                over_ceiling += 1;
            }
        }
    }
    Verdict {
        pass: drift == 0 && over.is_empty(),
        detail: format!(
            "ζ drift {drift}; T above bound in {}/9 cells [{}]; above bound+1 in {over_ceiling}/9",
            over.len(),
            over.join("; ")
        ),
    }
}

fn calibration() -> Verdict {
    let start = Instant::now();
    let h = Hypergraph::new(7, 3, vec![vec![0, 1, 2], vec![0, 3, 4], vec![0, 5, 6]]).unwrap();
    let lists = ListAssignment::uniform(7, hypernibble::ColorNames::new(["c"]));
    let relax = Relaxation {
        phi1: Some(1.0),
        phi2: Some(0.4),
        colors: Some(8),
        epsilon: None,
    };
    let params = Params::relaxed(3, 2.0, relax).unwrap();
    let beta = params.beta;
    let replays = 10_000u64;
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, method) in [
        ("exact", QMethod::Exact),
        ("monte-carlo", QMethod::MonteCarlo { samples: 10_000 }),
    ] {
        let config = NibbleConfig {
            q_method: method,
            deterministic_tiebreak: false,
        };
        let hits: u64 = (0..replays)
            .into_par_iter()
            .map(|seed| {
                let state = init_state(&h, &lists, &params, config, seed).unwrap();
                let out = run_round_audited(&state).unwrap();
                u64::from(out.audit.temporary[0].contains(&ColorId(0)))
            })
            .sum();
        let freq = hits as f64 / replays as f64;
        let se = (beta * (1.0 - beta) / replays as f64).sqrt();
        let z = (freq - beta) / se;
        pass &= z.abs() <= 3.0;
        lines.push(format!("{name} {freq:.4} (z {z:+.2})"));
    }
    let elapsed = start.elapsed();
    Verdict {
        pass: pass && elapsed < Duration::from_secs(120),
        detail: format!("β = {beta}; {}; {elapsed:.2?}", lines.join(", ")),
    }
}

struct Run {
    dir: TempDir,
    instance: PathBuf,
    lists: PathBuf,
}

fn generate(seed: u64) -> Run {
    let dir = TempDir::new().unwrap();
    let instance = dir.path().join("h.json");
    let lists = dir.path().join("h.lists.json");
    let seed = seed.to_string();
    let code = cli(&[
        "generate",
        "--n",
        "2000",
        "--k",
        "3",
        "--m",
        "2000",
        "--seed",
        &seed,
        "--triangle-free",
        "--lists-size",
        "40",
        "--pool",
        "50",
        "--out",
        s(&instance),
    ]);
    assert_eq!(code, 0, "generate failed");
    Run { dir, instance, lists }
}

fn load(run: &Run) -> (Hypergraph, ListAssignment) {
    let file: InstanceFile = serde_json::from_slice(&std::fs::read(&run.instance).unwrap()).unwrap();
    let h = Hypergraph::from_instance(file, false).unwrap();
    let lists: ListsFile = serde_json::from_slice(&std::fs::read(&run.lists).unwrap()).unwrap();
    let lists = ListAssignment::from_file(&lists, h.num_vertices()).unwrap();
    (h, lists)
}

fn relaxed_state(h: &Hypergraph, lists: &ListAssignment, seed: u64) -> NibbleState {
    let delta = observed_delta(h, lists, 3, 40, 0.25);
    let relax = Relaxation {
        phi1: Some(0.25),
        phi2: None,
        colors: Some(40),
        epsilon: None,
    };
    let params = Params::relaxed(3, delta, relax).unwrap();
    init_state(h, lists, &params, NibbleConfig::default(), seed).unwrap()
}

#[derive(Default)]
struct Tally {
    rounds: usize,
    edges0: usize,
    cdegree: usize,
    palette: usize,
    dhat: usize,
    codegree: usize,
    subsumption: usize,
    spot: usize,
    errors: Vec<String>,
}

fn audit_run(seed: u64, run: &Run) -> Tally {
    let (h, lists) = load(run);
    let mut state = relaxed_state(&h, &lists, seed);
    let mut t = Tally {
        edges0: state.constraints().total_edges(),
        ..Default::default()
    };
    let threshold = state.params().termination_threshold();
    let total = state.params().round_count(100_000).unwrap_or(1).max(1);
    let mut rng = StdRng::seed_from_u64(seed ^ 0x5eed);
    let mut spots: HashMap<usize, Vec<ColorId>> = HashMap::new();
    for _ in 0..10 {
        let round = rng.random_range(1..=total);
        let color = ColorId(rng.random_range(0..state.constraints().num_colors() as u32));
        spots.entry(round).or_default().push(color);
    }
    while state.round_params().zeta > threshold && !state.uncolored().is_empty() {
        let out = match run_round_audited(&state) {
            Ok(out) => out,
            Err(e) => {
                t.errors.push(format!("seed {seed}: {e}"));
                return t;
            }
        };
        t.rounds += 1;
        let next = &out.state;
        let r = next.round_params();
        let dhat: HashMap<(usize, ColorId), f64> = out.audit.filtered.iter().map(|&(u, c, d)| ((u, c), d)).collect();
        for &u in next.uncolored() {
            t.palette += usize::from(next.palette(u).len() as f64 > r.palette);
            for &c in next.palette(u) {
                let d = next.weighted_cdegree(u, c);
                t.cdegree += usize::from(d > 2.0 * r.cdegree * (1.0 + 1e-12));
                t.dhat += usize::from(dhat.get(&(u, c)).is_none_or(|&b| d > b * (1.0 + 1e-12)));
            }
        }
        let w = next.weight();
        for (_, hc) in next.constraints().iter() {
            t.subsumption += usize::from(!hc.is_subsumption_free());
        }
        for &c in spots.get(&next.round()).into_iter().flatten() {
            let hc = next.constraints().color(c);
            // k = 3, so (2, 3) is the only pair with s < l.
            t.codegree += usize::from(brute_max_codegree(hc, 2, 3) as f64 > w);
            t.subsumption += usize::from(brute_has_subsumption(hc));
            t.spot += 1;
        }
        state = out.state;
    }
    t
}

fn invariants(runs: &[Run]) -> Verdict {
    let start = Instant::now();
    let tallies: Vec<Tally> = runs
        .par_iter()
        .enumerate()
        .map(|(i, r)| audit_run(i as u64, r))
        .collect();
    let sum = |f: fn(&Tally) -> usize| tallies.iter().map(f).sum::<usize>();
    let violations = sum(|t| t.cdegree + t.palette + t.dhat + t.codegree + t.subsumption);
    let errors: Vec<&String> = tallies.iter().flat_map(|t| &t.errors).collect();
    let edges = sum(|t| t.edges0) as f64 / tallies.len() as f64;
    Verdict {
        pass: violations == 0 && errors.is_empty(),
        detail: format!(
            "{} runs, {} rounds, mean initial constraint edges {edges:.0}; violations d≤2t {} |P|≤p {} d≤d̂ {} codegree {} subsumption {}; {} spot checks; errors {:?}; {:.2?}",
            tallies.len(),
            sum(|t| t.rounds),
            sum(|t| t.cdegree),
            sum(|t| t.palette),
            sum(|t| t.dhat),
            sum(|t| t.codegree),
            sum(|t| t.subsumption),
            sum(|t| t.spot),
            errors,
            start.elapsed()
        ),
    }
}

fn end_to_end(runs: &[Run]) -> Verdict {
    let mut bad_exit = 0;
    let mut dirty = 0;
    let mut slowest = Duration::ZERO;
    for (seed, run) in runs.iter().enumerate() {
        let out = run.dir.path().join("coloring.json");
        let seed = seed.to_string();
        let start = Instant::now();
        let code = cli(&[
            "color",
            "--instance",
            s(&run.instance),
            "--lists",
            s(&run.lists),
            "--seed",
            &seed,
            "--relax",
            "--colors",
            "40",
            "--out",
            s(&out),
        ]);
        slowest = slowest.max(start.elapsed());
        if code != 0 {
            bad_exit += 1;
            continue;
        }
        let (h, lists) = load(run);
        let file: ColoringFile = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
        let coloring = Coloring::from_file(&file, h.num_vertices(), lists.names()).unwrap();
        dirty += usize::from(!verify_list(&h, &lists, &coloring).is_clean());
    }
    Verdict {
        pass: bad_exit == 0 && dirty == 0 && slowest < Duration::from_secs(60),
        detail: format!(
            "{} runs, non-zero exits {bad_exit}, unclean colorings {dirty}, slowest {slowest:.2?}",
            runs.len()
        ),
    }
}

fn determinism() -> Verdict {
    let dir = TempDir::new().unwrap();
    let p = |name: &str| dir.path().join(name);
    let twice = |make: &dyn Fn(&str) -> Vec<String>, outputs: &[&str]| -> Vec<(String, bool)> {
        for tag in ["a", "b"] {
            let args = make(tag);
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            assert!(cli(&args) <= 1, "command failed: {args:?}");
        }
        outputs
            .iter()
            .map(|o| {
                let a = std::fs::read(p(&format!("a.{o}"))).unwrap();
                let b = std::fs::read(p(&format!("b.{o}"))).unwrap();
                (o.to_string(), a == b)
            })
            .collect()
    };
    let path = |tag: &str, o: &str| p(&format!("{tag}.{o}")).to_str().unwrap().to_owned();
    let owned = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();

    let mut checks = Vec::new();
    checks.extend(twice(
        &|t| {
            let mut v = owned(&[
                "generate",
                "--n",
                "300",
                "--k",
                "3",
                "--m",
                "400",
                "--seed",
                "5",
                "--triangle-free",
            ]);
            v.extend(owned(&[
                "--lists-size",
                "12",
                "--pool",
                "15",
                "--out",
                &path(t, "h.json"),
            ]));
            v
        },
        &["h.json", "h.lists.json"],
    ));
    let inst = path("a", "h.json");
    let lists = path("a", "h.lists.json");
    checks.extend(twice(
        &|t| {
            owned(&[
                "reduce",
                "--instance",
                &inst,
                "--balanced",
                "--out",
                &path(t, "r.json"),
                "--trace",
                &path(t, "rt.json"),
            ])
        },
        &["r.json", "rt.json"],
    ));
    checks.extend(twice(
        &|t| {
            owned(&[
                "color",
                "--instance",
                &inst,
                "--lists",
                &lists,
                "--seed",
                "3",
                "--relax",
                "--phi1",
                "1",
                "--phi2",
                "0.05",
                "--out",
                &path(t, "c.json"),
                "--trace",
                &path(t, "c.csv"),
                "--globals",
                &path(t, "g.json"),
                "--report",
                &path(t, "cr.json"),
            ])
        },
        &["c.json", "c.csv", "g.json", "cr.json"],
    ));
    let coloring = path("a", "c.json");
    checks.extend(twice(
        &|t| {
            owned(&[
                "verify",
                "--instance",
                &inst,
                "--coloring",
                &coloring,
                "--lists",
                &lists,
                "--report",
                &path(t, "v.json"),
            ])
        },
        &["v.json"],
    ));
    let (csv, globals) = (path("a", "c.csv"), path("a", "g.json"));
    checks.extend(twice(
        &|t| {
            owned(&[
                "stats",
                "--trace",
                &csv,
                "--globals",
                &globals,
                "--out",
                &path(t, "s.json"),
            ])
        },
        &["s.json"],
    ));

    let differing: BTreeSet<&str> = checks
        .iter()
        .filter(|(_, same)| !same)
        .map(|(o, _)| o.as_str())
        .collect();
    Verdict {
        pass: checks.len() == 10 && differing.is_empty(),
        detail: format!("{} files compared, differing {differing:?}", checks.len()),
    }
}

fn lambda_solver() -> Verdict {
    let mut rng = StdRng::seed_from_u64(8);
    let cells: Vec<(usize, usize)> = (3..=5).flat_map(|k| (0..=k - 2).map(move |i| (k, i))).collect();
    let mut worst: f64 = 0.0;
    for n in 0..100 {
        let (k, i) = cells[n % cells.len()];
        let lambda = rng.random_range(1.0f64..30.0).exp();
        let back = solve_lambda(lambda_to_degree(lambda, k, i), k, i).lambda;
        worst = worst.max(((back - lambda) / lambda).abs());
    }
    Verdict {
        pass: worst <= 1e-6,
        detail: format!(
            "100 round trips over {} (k, i) cells, worst relative error {worst:.2e}",
            cells.len()
        ),
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Verdict)> = Vec::new();
    let mut report = |n: usize, name: &'static str, v: Verdict| {
        println!("{} {n} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((n, name, v));
    };
    report(1, "triangle oracle", triangle_oracle());
    report(2, "reduction guarantees", reduction_guarantees());
    report(3, "parameter recurrences", recurrences());
    report(4, "temporary-palette calibration", calibration());
    let runs: Vec<Run> = (0..50).map(generate).collect();
    report(5, "round invariants", invariants(&runs));
    report(6, "end-to-end soundness", end_to_end(&runs));
    report(7, "determinism", determinism());
    report(8, "lambda solver", lambda_solver());
    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {}/{} passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
