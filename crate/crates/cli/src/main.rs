mod bench;
mod labels_file;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};

use treelabel::scheme::{encode, Decoder, Params, SchemeKind};
use treelabel::tree::{gen_tree, parse_tree, Tree, TreeKind};

use bench::{BenchMode, Grid};
use verify::Mode;

/// Routing and ancestry labels for rooted trees.
#[derive(Parser)]
#[command(name = "treelabel", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    /// Rounding base of the bounds (ancestry, bd, prelim, interm).
    #[arg(long)]
    b: Option<u32>,
    /// Level window of big children (prelim).
    #[arg(long)]
    c: Option<u32>,
}

impl From<ParamArgs> for Params {
    fn from(p: ParamArgs) -> Params {
        Params { b: p.b, c: p.c }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated tree.
    Gen {
        /// path, star, caterpillar, complete_binary, random or lower_bound:<i>.
        #[arg(long)]
        kind: TreeKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Encode a tree file into a labels file.
    Encode {
        #[arg(long)]
        scheme: SchemeKind,
        tree: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Print the answer to one query: the first-hop port from U towards W,
    /// or 1/0 for ancestry labels.
    Route { labels: PathBuf, u: usize, w: usize },
    /// Check decoded answers against the brute-force oracle.
    Verify {
        /// Scheme to encode with; read from the labels file when one is given.
        #[arg(long)]
        scheme: Option<SchemeKind>,
        tree: PathBuf,
        /// Verify this labels file instead of encoding afresh.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
        /// exhaustive or sample:<k>.
        #[arg(long, default_value = "exhaustive")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Measure label lengths over a grid and write CSV.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        scheme: Vec<SchemeKind>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "random")]
        kind: Vec<TreeKind>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        seed: Vec<u64>,
        #[command(flatten)]
        params: ParamArgs,
        /// none, exhaustive or sample:<k>.
        #[arg(long, default_value = "sample:1000")]
        mode: BenchMode,
        /// CSV output; stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Plot data output (whitespace-separated columns).
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    Mismatch,
}

fn read_tree(path: &Path) -> Result<Tree> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_tree(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn run(cmd: Cmd) -> Result<Status> {
    match cmd {
        Cmd::Gen { kind, n, seed, o } => {
            let t = gen_tree(kind, n, seed)?;
            emit(o.as_deref(), &t.to_text())?;
        }
        Cmd::Encode { scheme, tree, params, o } => {
            let t = read_tree(&tree)?;
            let e = encode(scheme, &t, params.into(), false)?;
            emit(o.as_deref(), &labels_file::render(&e, &t))?;
        }
        Cmd::Route { labels, u, w } => {
            let text = fs::read_to_string(&labels).with_context(|| format!("reading {}", labels.display()))?;
            let f = labels_file::parse(&text)?;
            let d = Decoder::new(f.header, &f.labels, &f.locals)?;
            println!("{}", d.query(u, w)?);
        }
        Cmd::Verify { scheme, tree, labels, params, mode, seed } => {
            let t = read_tree(&tree)?;
            let (d, ports, labels) = match labels {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    let f = labels_file::parse(&text)?;
                    if let Some(s) = scheme {
                        ensure!(s == f.header.kind, "labels file holds {} labels, not {s}", f.header.kind);
                    }
                    let ports = f.port_assignment(&t)?;
                    (Decoder::new(f.header, &f.labels, &f.locals)?, ports, f.labels)
                }
                None => {
                    let Some(s) = scheme else { bail!("--scheme is required without --labels") };
                    let e = encode(s, &t, params.into(), false)?;
                    (Decoder::from_encoding(&e)?, e.ports, e.labels)
                }
            };
            let h = *d.header();
            let out = verify::verify(&t, &ports, &d, mode, seed);
            match out.first {
                None => println!("PASS scheme={} n={} mode={mode} pairs={}", h.kind, h.n, out.pairs),
                Some(m) => {
                    let got = match &m.got {
                        Ok(p) => p.to_string(),
                        Err(e) => format!("error({e})"),
                    };
                    let show = |v: usize| format!("len:{} {}", labels[v].len(), labels[v].to_hex());
                    println!(
                        "FAIL scheme={} n={} mode={mode} u={} w={} got={got} want={} label_u=[{}] label_w=[{}]",
                        h.kind,
                        h.n,
                        m.u,
                        m.w,
                        m.want,
                        show(m.u),
                        show(m.w)
                    );
                    return Ok(Status::Mismatch);
                }
            }
        }
        Cmd::Bench { scheme, n, kind, seed, params, mode, csv, plot } => {
            let grid = Grid { schemes: scheme, sizes: n, kinds: kind, seeds: seed, params: params.into(), mode };
            let rows = bench::run(&grid)?;
            match csv {
                Some(p) => {
                    let f = fs::File::create(&p).with_context(|| format!("writing {}", p.display()))?;
                    bench::write_csv(&rows, f)?;
                }
                None => bench::write_csv(&rows, std::io::stdout())?,
            }
            if let Some(p) = plot {
                emit(Some(&p), &bench::plot_data(&rows))?;
            }
            if rows.iter().any(|r| r.verify == "fail") {
                return Ok(Status::Mismatch);
            }
        }
    }
    Ok(Status::Ok)
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TREELABEL_THREADS") {
        let k: usize = v.parse().ok().filter(|&k| k > 0).context("TREELABEL_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|()| run(cli.cmd)) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Mismatch) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
