use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use reconv::aiger::{read_aiger_file, write_aiger_file, AigerError};
use reconv::cec::{check_equivalence, CecResult};
use reconv::cone::{reconvergence_driven_cut, DEFAULT_MAX_LEAVES};
use reconv::exact::ExactCache;
use reconv::learn::{
    generate_dataset, mlp_train, train_q, Dataset, EpisodeParams, MlpError, MlpModel, MlpParams, QError, QTable,
    Selector,
};
use reconv::pass::{dse, run, Engines, PassOptions, Strategy};
use reconv::{Action, AigNetwork};

#[derive(Parser)]
#[command(name = "reconv", version, about = "Reconvergence-driven AIG rewriting with strategy selection")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Isop,
    Exact,
    Npn,
    Random,
    Adaptive,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one rewriting pass and write the result.
    Opt {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum, default_value = "adaptive")]
        strategy: StrategyArg,
        /// MLP model for the adaptive strategy; the size rule is used without one.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        preserve_depth: bool,
        #[arg(long)]
        zero_gain: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        revisit_new: bool,
        /// Persistent exact-synthesis cache.
        #[arg(long)]
        exact_cache: Option<PathBuf>,
    },
    /// Random-strategy design space exploration; CSV on stdout or --out.
    Dse {
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        exact_cache: Option<PathBuf>,
    },
    /// Q-learning episodes; writes the Q-table and the labelled dataset.
    TrainQ {
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        epsilon0: f64,
        #[arg(long, default_value_t = 0.995)]
        decay: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_qtable: PathBuf,
        #[arg(long)]
        out_dataset: PathBuf,
        #[arg(long)]
        exact_cache: Option<PathBuf>,
    },
    /// Train the strategy classifier on a dataset CSV.
    TrainMlp {
        dataset: PathBuf,
        #[arg(long)]
        out_model: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        epochs: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 0.2)]
        dropout: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Size, depth and the cut-size histogram.
    Stats { input: PathBuf },
    /// Simulation-based equivalence check. Exit 0 equivalent, 1 counterexample, 2 interface mismatch.
    Cec {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        vectors: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn circuit_name(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "circuit".into())
}

fn read(p: &Path) -> Result<AigNetwork> {
    read_aiger_file(p).with_context(|| format!("reading {}", p.display()))
}

fn engines(cache: Option<&Path>) -> Result<Engines> {
    let c = match cache {
        Some(p) => ExactCache::open(p).with_context(|| format!("opening {}", p.display()))?,
        None => ExactCache::new(),
    };
    Ok(Engines::with_cache(c))
}

fn write(p: &Path, text: &str) -> Result<()> {
    std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))
}

fn run_cmd(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Opt { input, output, strategy, model, preserve_depth, zero_gain, seed, revisit_new, exact_cache } => {
            let net = read(&input)?;
            let strategy = match strategy {
                StrategyArg::Isop => Strategy::Fixed(Action::Isop),
                StrategyArg::Exact => Strategy::Fixed(Action::Exact),
                StrategyArg::Npn => Strategy::Fixed(Action::Npn),
                StrategyArg::Random => Strategy::Random(seed),
                StrategyArg::Adaptive => Strategy::Adaptive(match &model {
                    Some(p) => {
                        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                        Selector::Model(MlpModel::parse(&text)?)
                    }
                    None => Selector::Rule,
                }),
            };
            let opts = PassOptions { preserve_depth, zero_gain, revisit_new, ..Default::default() };
            let mut eng = engines(exact_cache.as_deref())?;
            let (out, report) = run(&circuit_name(&input), &net, &mut eng, &strategy, &opts);
            write_aiger_file(&output, &out).with_context(|| format!("writing {}", output.display()))?;
            println!("{report}");
            println!("{}", report.result_line());
            Ok(0)
        }
        Cmd::Dse { input, runs, seed, out, exact_cache } => {
            let net = read(&input)?;
            let mut eng = engines(exact_cache.as_deref())?;
            let rows = dse(&net, &mut eng, runs, seed, &PassOptions::default());
            let mut csv = String::from("run_id,size,depth\n");
            for r in rows {
                csv += &format!("{},{},{}\n", r.run, r.size, r.depth);
            }
            match out {
                Some(p) => write(&p, &csv)?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Cmd::TrainQ { input, episodes, alpha, gamma, epsilon0, decay, seed, out_qtable, out_dataset, exact_cache } => {
            if !(0.0..=1.0).contains(&alpha) {
                bail!("alpha must lie in [0, 1]");
            }
            let net = read(&input)?;
            let mut eng = engines(exact_cache.as_deref())?;
            let mut q = QTable::new(alpha, gamma);
            let params = EpisodeParams { epsilon: epsilon0, decay };
            let costs = train_q(&net, &mut eng, &mut q, episodes, params, &PassOptions::default(), seed);
            println!("episode,cost");
            for (i, c) in costs.iter().enumerate() {
                println!("{},{c}", i + 1);
            }
            write(&out_qtable, &q.to_text())?;
            let data = generate_dataset(&q)?;
            write(&out_dataset, &data.to_csv())?;
            eprintln!("{} states, {} dataset rows", q.len(), data.len());
            Ok(0)
        }
        Cmd::TrainMlp { dataset, out_model, epochs, lr, dropout, seed } => {
            let text = std::fs::read_to_string(&dataset).with_context(|| format!("reading {}", dataset.display()))?;
            let data = Dataset::from_csv(&text)?;
            let params = MlpParams { epochs, lr, dropout, seed, ..Default::default() };
            let (model, acc) = mlp_train(&data, &params)?;
            write(&out_model, &model.to_text())?;
            println!("test_accuracy={acc:.4}");
            Ok(0)
        }
        Cmd::Stats { input } => {
            let mut net = read(&input)?;
            net.remove_dead_nodes();
            println!("circuit={} inputs={} outputs={}", circuit_name(&input), net.num_inputs(), net.num_outputs());
            println!("size={} depth={}", net.num_live_ands(), net.depth());
            let mut hist = [0usize; 17];
            for n in net.topological_order() {
                if net.is_and(n) {
                    let k = reconvergence_driven_cut(&net, n, DEFAULT_MAX_LEAVES).input_size();
                    hist[k.min(16)] += 1;
                }
            }
            println!("input_size,count");
            for (k, c) in hist.iter().enumerate().skip(2) {
                println!("{k},{c}");
            }
            println!("rewritable={}", hist[2..=10].iter().sum::<usize>());
            Ok(0)
        }
        Cmd::Cec { a, b, vectors, seed } => {
            let (na, nb) = (read(&a)?, read(&b)?);
            match check_equivalence(&na, &nb, vectors, seed) {
                Err(e) => {
                    println!("{e}");
                    Ok(2)
                }
                Ok(CecResult::Equivalent) => {
                    println!("equivalent (exhaustive)");
                    Ok(0)
                }
                Ok(CecResult::LikelyEquivalent { vectors }) => {
                    println!("no difference in {vectors} random vectors");
                    Ok(0)
                }
                Ok(CecResult::Counterexample { assignment, output }) => {
                    let bits: String = assignment.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    println!("counterexample on output {output}: inputs {bits}");
                    Ok(1)
                }
            }
        }
    }
}

/// 3 I/O, 4 malformed input, 5 model or table format, 6 anything else.
fn error_code(e: &anyhow::Error) -> u8 {
    for c in e.chain() {
        if let Some(a) = c.downcast_ref::<AigerError>() {
            return if matches!(a, AigerError::Io(_)) { 3 } else { 4 };
        }
        if c.is::<std::io::Error>() {
            return 3;
        }
        if c.is::<MlpError>() || c.is::<QError>() {
            return 5;
        }
    }
    6
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run_cmd(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
