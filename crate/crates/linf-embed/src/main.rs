//! Command-line surface over the library: generate, embed, verify, color,
//! exact minimal dimension, and the two-color impossibility check.
//!
//! Exit codes: 0 success / verified; 1 verification failure, unmet gain, or
//! counterexample (details on stdout); 2 malformed input or usage error.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Signed;

use linf_embed::coloring::{
    color_quadruple, find_monochromatic, impossibility_certificate, mono_color, QuadColor,
};
use linf_embed::embedder::{embed_with_gain, EmbedError, Strategy};
use linf_embed::files::{
    parse_metric, parse_rational, write_cover, write_embedding, write_metric,
};
use linf_embed::lipschitz::verify_embedding;
use linf_embed::metric::{generate, MetricSpace, SpaceKind};
use linf_embed::oracle::{exact_m, ExactM};

#[derive(Parser)]
#[command(
    name = "linf-embed",
    about = "Exact isometric embeddings of finite metric spaces into l-infinity"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ColorArg {
    #[value(name = "321")]
    C321,
    #[value(name = "132")]
    C132,
    #[value(name = "123")]
    C123,
    #[value(name = "231")]
    C231,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Construction,
    Greedy,
    Frechet,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Construction => Strategy::Construction,
            StrategyArg::Greedy => Strategy::Greedy,
            StrategyArg::Frechet => Strategy::Frechet,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a metric space and write it to a file.
    Gen {
        /// Quadruple color of the generated space, or `random`.
        #[arg(long)]
        color: ColorArg,
        /// Number of points.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed a metric space into l-infinity with a requested dimension gain.
    Embed {
        /// Metric space file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Target gain c: aim for n - c coordinates.
        #[arg(long)]
        gain: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Construction)]
        strategy: StrategyArg,
        /// Perturbation size for non-generic inputs (rational, e.g. 1/1000);
        /// default is a thousandth of the minimum distance.
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Embedding output file.
        #[arg(long)]
        out: PathBuf,
        /// Optional cover dump (two lines per coordinate function).
        #[arg(long = "cover-out")]
        cover_out: Option<PathBuf>,
    },
    /// Check a metric file against an embedding file, exactly.
    Verify {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        embedding: PathBuf,
    },
    /// Report quadruple colors of a space.
    Color {
        #[arg(long = "in")]
        input: PathBuf,
        /// Four point indices: color just this quadruple.
        #[arg(long, num_args = 4, conflicts_with = "find_mono")]
        quad: Option<Vec<usize>>,
        /// Search for a monochromatic subset of this size.
        #[arg(long = "find-mono")]
        find_mono: Option<usize>,
    },
    /// Exact minimal number of coordinates, by exhaustive search (n <= 7).
    ExactM {
        #[arg(long = "in")]
        input: PathBuf,
        /// Give up beyond this many coordinates; default n - 1.
        #[arg(long = "max-k")]
        max_k: Option<usize>,
    },
    /// Verify that colors 213 and 312 cannot fill five generic points:
    /// symbolic certificate plus a randomized search for counterexamples.
    Impossibility {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// `Err` means malformed input or an I/O problem (exit 2); verification
/// verdicts travel through the `Ok` exit code.
fn run(cmd: Cmd) -> Result<ExitCode, String> {
    match cmd {
        Cmd::Gen {
            color,
            n,
            seed,
            out,
        } => {
            let kind = match color {
                ColorArg::C321 => SpaceKind::Mono(QuadColor::C321),
                ColorArg::C132 => SpaceKind::Mono(QuadColor::C132),
                ColorArg::C123 => SpaceKind::Mono(QuadColor::C123),
                ColorArg::C231 => SpaceKind::Mono(QuadColor::C231),
                ColorArg::Random => SpaceKind::Random,
            };
            let ms = generate(kind, n, seed).map_err(|e| e.to_string())?;
            write_file(&out, &write_metric(&ms))?;
            println!("wrote {n}-point space to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Embed {
            input,
            gain,
            strategy,
            epsilon,
            seed,
            out,
            cover_out,
        } => {
            if gain == 0 {
                return Err("gain must be at least 1".to_string());
            }
            let ms = read_metric(&input)?;
            let eps = epsilon
                .map(|s| {
                    let e = parse_rational(&s)?;
                    if e.is_positive() {
                        Ok(e)
                    } else {
                        Err("epsilon must be positive".to_string())
                    }
                })
                .transpose()?;
            let outcome = match embed_with_gain(&ms, gain, strategy.into(), eps.as_ref(), seed) {
                Ok(outcome) => outcome,
                Err(EmbedError::Perturbation(p)) => return Err(p.to_string()),
                Err(e @ EmbedError::Verification { .. }) => {
                    println!("{e}");
                    return Ok(ExitCode::from(1));
                }
            };
            write_file(&out, &write_embedding(&outcome.embedding))?;
            if let Some(path) = cover_out {
                let text = write_cover(&outcome.metric, &outcome.cover)
                    .expect("returned covers are total");
                write_file(&path, &text)?;
            }
            print!("{}", outcome.report);
            println!("wrote embedding to {}", out.display());
            if outcome.report.gain_achieved {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Cmd::Verify { metric, embedding } => {
            let ms = read_metric(&metric)?;
            let text = read_file(&embedding)?;
            let emb = linf_embed::files::parse_embedding(&text)
                .map_err(|e| format!("{}: {e}", embedding.display()))?;
            match verify_embedding(&ms, &emb) {
                Ok(report) if report.isometric => {
                    println!("isometric, k={}, n={}", emb.k(), emb.n());
                    Ok(ExitCode::SUCCESS)
                }
                Ok(report) => {
                    let w = report.witness.expect("failure carries a witness");
                    println!(
                        "not isometric: pair ({}, {}) embeds at distance {}, metric says {}",
                        w.pair.0,
                        w.pair.1,
                        linf_embed::files::format_rational(&w.achieved),
                        linf_embed::files::format_rational(&w.expected)
                    );
                    Ok(ExitCode::from(1))
                }
                Err(e) => {
                    println!("not comparable: {e}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Cmd::Color {
            input,
            quad,
            find_mono,
        } => {
            let ms = read_metric(&input)?;
            if let Some(points) = quad {
                return color_one_quad(&ms, &points);
            }
            if let Some(k) = find_mono {
                return find_mono_subset(&ms, k);
            }
            match mono_color(&ms) {
                Ok(report) => {
                    println!("{report}");
                    Ok(ExitCode::SUCCESS)
                }
                Err(tie) => {
                    println!("no color: {tie}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Cmd::ExactM { input, max_k } => {
            let ms = read_metric(&input)?;
            let k_max = max_k.unwrap_or_else(|| ms.n().saturating_sub(1));
            match exact_m(&ms, k_max).map_err(|e| e.to_string())? {
                ExactM::Exact { m, parts, fns } => {
                    println!("m = {m}");
                    for (i, (part, f)) in parts.iter().zip(&fns).enumerate() {
                        let pairs: Vec<String> = part
                            .iter()
                            .map(|(a, b)| format!("({a},{b})"))
                            .collect();
                        let values: Vec<String> = f
                            .dense_values(ms.n())
                            .expect("oracle functions are total")
                            .iter()
                            .map(linf_embed::files::format_rational)
                            .collect();
                        println!(
                            "part {}: {}; f = {}",
                            i + 1,
                            pairs.join(" "),
                            values.join(" ")
                        );
                    }
                    Ok(ExitCode::SUCCESS)
                }
                ExactM::ExceedsKMax { k_max } => {
                    println!("m > {k_max}: no partition into {k_max} feasible parts");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Cmd::Impossibility { trials, seed } => impossibility(trials, seed),
    }
}

fn read_file(path: &PathBuf) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &PathBuf, content: &str) -> Result<(), String> {
    fs::write(path, content).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_metric(path: &PathBuf) -> Result<MetricSpace, String> {
    let text = read_file(path)?;
    parse_metric(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn color_one_quad(ms: &MetricSpace, points: &[usize]) -> Result<ExitCode, String> {
    let mut q = [points[0], points[1], points[2], points[3]];
    q.sort_unstable();
    if q.windows(2).any(|w| w[0] == w[1]) {
        return Err("quadruple points must be distinct".to_string());
    }
    if q[3] >= ms.n() {
        return Err(format!("point {} outside space of {} points", q[3], ms.n()));
    }
    let sums = ms.quad_sums(q);
    let [a, b, c, d] = q;
    match color_quadruple(ms, q) {
        Ok(color) => {
            println!("{color}");
            let labels = [
                format!("d({a},{b}) + d({c},{d})"),
                format!("d({a},{c}) + d({b},{d})"),
                format!("d({a},{d}) + d({b},{c})"),
            ];
            for (i, label) in labels.iter().enumerate() {
                println!(
                    "R{} = {label} = {}",
                    i + 1,
                    linf_embed::files::format_rational(&sums[i])
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(tie) => {
            println!("no color: {tie}");
            Ok(ExitCode::from(1))
        }
    }
}

fn find_mono_subset(ms: &MetricSpace, k: usize) -> Result<ExitCode, String> {
    if !(4 <= k && k <= ms.n()) {
        return Err(format!(
            "subset size must be between 4 and {}, got {k}",
            ms.n()
        ));
    }
    let search = find_monochromatic(ms, k);
    match search.subset {
        Some((points, color)) => {
            let labels: Vec<String> = points.iter().map(usize::to_string).collect();
            println!("color {color} on subset {{{}}}", labels.join(", "));
            Ok(ExitCode::SUCCESS)
        }
        None => {
            println!(
                "no monochromatic subset of size {k} found ({})",
                if search.exhaustive {
                    "exhaustive: none exists"
                } else {
                    "heuristic search"
                }
            );
            Ok(ExitCode::from(1))
        }
    }
}

/// Prints the symbolic certificates for the two impossible colors, then
/// scans seeded random generic 5-point spaces for counterexamples.
fn impossibility(trials: usize, seed: u64) -> Result<ExitCode, String> {
    let mut out = String::new();
    let mut sound = true;
    for color in [QuadColor::C213, QuadColor::C312] {
        let cert = impossibility_certificate(color);
        let ok = cert.verify();
        sound &= ok;
        writeln!(out, "{cert}").unwrap();
        writeln!(
            out,
            "certificate for {color}: {}",
            if ok { "verified" } else { "FAILED" }
        )
        .unwrap();
    }
    print!("{out}");

    let mut hits = 0usize;
    for t in 0..trials {
        let ms = generate(SpaceKind::Random, 5, seed.wrapping_add(t as u64))
            .map_err(|e| e.to_string())?;
        if let Ok(report) = mono_color(&ms) {
            if matches!(
                report.mono,
                linf_embed::coloring::MonoStatus::Mono(QuadColor::C213)
                    | linf_embed::coloring::MonoStatus::Mono(QuadColor::C312)
            ) {
                hits += 1;
                println!("counterexample at seed {}", seed.wrapping_add(t as u64));
            }
        }
    }
    println!("{hits}/{trials} random 5-point spaces monochromatic 213/312");
    if sound && hits == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
