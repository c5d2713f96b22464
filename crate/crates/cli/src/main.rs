use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hypercomm::experiments::{run_campaign, summarize, write_outputs, ExperimentConfig};
use hypercomm::io::{parse_layer_triple, HypergraphFile};
use hypercomm::model::{contract, sample_hsbm};
use hypercomm::sdp::{algorithm3_sdp, SdpOptions};
use hypercomm::spectral::{algorithm1_adjacency, algorithm2_laplacian, SpectralOptions};
use hypercomm::thresholds::divergences;
use hypercomm::{Error, LabelVector, ModelSpec, PartitionResult};

/// Community detection on non-uniform hypergraph stochastic block models.
#[derive(Parser)]
#[command(name = "hypercomm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the recovery divergences of a model.
    Threshold {
        /// Layer as m:a:b; repeat for several arities.
        #[arg(long = "layers", required = true, value_parser = layer_arg)]
        layers: Vec<(usize, f64, f64)>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// Sample a hypergraph with planted labels.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long = "layers", required = true, value_parser = layer_arg)]
        layers: Vec<(usize, f64, f64)>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover the two communities of a hypergraph file.
    Detect {
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long = "in")]
        input: PathBuf,
        /// JSON array of ±1 labels; overrides labels stored in the input.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Seed of the power-iteration start vector.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Run a Monte-Carlo campaign and write results.csv and summary.json.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        threads: Option<usize>,
        /// Record wall-clock times (makes the CSV run-dependent).
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Adjacency,
    Laplacian,
    Sdp,
}

fn layer_arg(s: &str) -> Result<(usize, f64, f64), String> {
    parse_layer_triple(s).map_err(|e| e.to_string())
}

/// Usage and configuration problems exit with 2, everything else with 1.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::SizeLimit { .. } | Error::Json(_) => 2,
        Error::Io(_) | Error::Convergence { .. } | Error::DegenerateGraph(_) => 1,
    }
}

fn threshold(layers: &[(usize, f64, f64)], n: usize, json: bool) -> hypercomm::Result<()> {
    let spec = ModelSpec::scaled(n, layers)?;
    let report = divergences(&spec)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    println!("d_gh   {:.6}", report.d_gh);
    println!("d_sdp  {:.6}", report.d_sdp);
    for (m, gh) in &report.per_layer_gh {
        let sdp = report.per_layer_sdp.get(m).copied().unwrap_or(f64::NAN);
        println!("layer {m}: d_gh {gh:.6}  d_sdp {sdp:.6}");
    }
    println!("t*_gh  {:.6}", report.t_star_gh);
    println!("t*_sdp {:.6}", report.t_star_sdp);
    Ok(())
}

fn sample(n: usize, layers: &[(usize, f64, f64)], seed: u64, out: &Path) -> hypercomm::Result<()> {
    let spec = ModelSpec::scaled(n, layers)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = LabelVector::sample(n, &mut rng)?;
    let hypergraph = sample_hsbm(&spec, &labels, &mut rng)?;
    info!("sampled {} hyperedges", hypergraph.edge_count());
    HypergraphFile {
        hypergraph,
        labels: Some(labels),
    }
    .write(out)
}

fn read_labels(path: &Path) -> hypercomm::Result<LabelVector> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn print_partition(r: &PartitionResult) {
    let plus = r.labels_hat.iter().filter(|&&x| x > 0).count();
    println!("algorithm  {}", r.algorithm.as_str());
    println!("n          {}", r.labels_hat.len());
    println!("sizes      +1: {plus}, -1: {}", r.labels_hat.len() - plus);
    if let Some(e) = &r.eigen {
        println!("eigenvalue {:.6}", e.value);
    }
    if !r.converged {
        println!("converged  false");
    }
    if let (Some(m), Some(x)) = (r.mismatch, r.exact) {
        println!("mismatch   {m:.6}");
        println!("exact      {x}");
    }
    let signs: String = r.labels_hat.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect();
    println!("labels     {signs}");
}

fn detect(algo: Algo, input: &Path, truth: Option<&Path>, seed: u64, json: bool) -> hypercomm::Result<()> {
    let file = HypergraphFile::read(input)?;
    let truth = match truth {
        Some(p) => Some(read_labels(p)?),
        None => file.labels,
    };
    let a = contract(&file.hypergraph);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut result = match algo {
        Algo::Adjacency => algorithm1_adjacency(&a, &SpectralOptions::default(), &mut rng)?,
        Algo::Laplacian => algorithm2_laplacian(&a, &SpectralOptions::default(), &mut rng)?,
        Algo::Sdp => algorithm3_sdp(&a, &SdpOptions::default())?,
    };
    if let Some(t) = &truth {
        result = result.with_truth(t)?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&result)?);
    } else {
        print_partition(&result);
    }
    Ok(())
}

fn experiment(config: &Path, out: &Path, threads: Option<usize>, timing: bool) -> hypercomm::Result<()> {
    let mut cfg = ExperimentConfig::read(config)?;
    cfg.timing |= timing;
    let records = run_campaign(&cfg, threads)?;
    write_outputs(&cfg, &records, out)?;
    let summary = summarize(&cfg, &records);
    println!(
        "{} records over {} pixel cells written to {}",
        records.len(),
        summary.pixels.len(),
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HYPERCOMM_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Threshold { layers, n, json } => threshold(layers, *n, *json),
        Command::Sample { n, layers, seed, out } => sample(*n, layers, *seed, out),
        Command::Detect {
            algo,
            input,
            truth,
            seed,
            json,
        } => detect(*algo, input, truth.as_deref(), *seed, *json),
        Command::Experiment {
            config,
            out,
            threads,
            timing,
        } => experiment(config, out, *threads, *timing),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
