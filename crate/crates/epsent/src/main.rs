//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 instance/invariant error,
//! 3 codec precondition failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use epsent::curve::{approx_function_bound, lipschitz_bound, rate_curve};
use epsent::entropy::{solve_entropy, DEFAULT_MAX_ITER, DEFAULT_TOL};
use epsent::error::Error;
use epsent::hypergraph::build_hypergraph;
use epsent::model::{load_instance, Distribution, ProblemInstance};
use epsent::modular::modular_pipeline;
use epsent::polar::{design_for_instance, polar_encode, run_polar, DEFAULT_DESIGN_SAMPLES};
use epsent::rng::{derive_seed, sample_pmf};
use epsent::sim::{reproduce_reference, simulate, Codec, OutputFormat, SimConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Parser)]
#[command(
    name = "epsent",
    version,
    about = "Coding-for-computing toolkit under a per-symbol distortion cap",
    long_about = "Builds characteristic hypergraphs, solves for the minimum \
description rate, traces rate curves, and runs the bundled codecs. Exit \
codes: 0 success, 1 usage error, 2 instance/invariant error, 3 codec \
precondition failure."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file (JSON; see README for the schema).
    #[arg(long)]
    instance: PathBuf,
    /// Override the instance's fidelity cap.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate the maximal hyperedges of the characteristic hypergraph.
    Hypergraph {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize I(W;X|Y) over hyperedge-supported quantizers.
    Entropy {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Stop when the objective decrease falls below this.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace the piecewise-constant rate curve R(epsilon).
    #[command(long_about = "Trace the piecewise-constant rate curve R(epsilon).\n\n\
CSV columns: eps_lo, eps_hi, rate — one row per constant interval \
[eps_lo, eps_hi); the final row ends at inf.")]
    Curve {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rate upper bounds for partially known functions.
    #[command(long_about = "Rate upper bounds for partially known functions.\n\n\
With --lipschitz L, the instance is read as the source embedding (an \
identity-function instance) and the bound at fidelity epsilon/L is \
printed. With --delta D, the instance is read as a surrogate within D of \
the true function and the bound at fidelity epsilon - 2D is printed. \
Exactly one of the two must be given.")]
    Bounds {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Lipschitz constant of the unknown true function.
        #[arg(long)]
        lipschitz: Option<f64>,
        /// Surrogate accuracy delta.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a seeded i.i.d. block and run the quantize-plus-LZW codec.
    EncodeModular {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        blocklength: usize,
        #[arg(long, default_value_t = 1)]
        blocks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the X marginal, e.g. --pmf 0.2,0.3,0.5 (Y marginal kept).
        #[arg(long)]
        pmf: Option<String>,
        /// Write the coded block(s) here (header + bit stream per block).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Design a polar code for the instance and encode seeded blocks.
    EncodePolar {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Block length N (a power of 2).
        #[arg(long)]
        blocklength: usize,
        #[arg(long, default_value_t = 1)]
        blocks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Code rate |I|/N; defaults to I(W;X) + 0.1.
        #[arg(long)]
        rate: Option<f64>,
        /// Monte-Carlo samples for the reliability estimate.
        #[arg(long, default_value_t = DEFAULT_DESIGN_SAMPLES)]
        samples: usize,
        /// Write the design JSON here.
        #[arg(long)]
        design_out: Option<PathBuf>,
        /// Write the coded block(s) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// End-to-end simulation: empirical rate and error next to theory.
    #[command(long_about = "End-to-end simulation: seeded i.i.d. source blocks \
through the chosen codec.\n\nCSV columns: theoretical_rate, empirical_rate, \
n, violations, p_avg.")]
    Simulate {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_enum)]
        codec: CodecArg,
        #[arg(long)]
        blocklength: usize,
        #[arg(long, default_value_t = 1)]
        blocks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Polar code rate; defaults to I(W;X) + 0.1.
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-derive a bundled fixture's reference table with pass/fail lines.
    Reproduce {
        /// One of: example1, example2, fig4, fig5.
        #[arg(long)]
        fixture: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodecArg {
    Modular,
    Polar,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            std::process::exit(1);
        }
        Err(CliError::Lib(err)) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}

enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

/// Writes to the given path, or stdout when absent.
fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| CliError::Lib(e.into())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load(inst: &InstanceArgs) -> Result<ProblemInstance, CliError> {
    let loaded = load_instance(&inst.instance)?;
    Ok(match inst.epsilon {
        Some(e) => loaded.with_epsilon(e)?,
        None => loaded,
    })
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Hypergraph { inst, out } => {
            let instance = load(&inst)?;
            let graph = build_hypergraph(&instance)?;
            emit(&out, &graph.to_json())
        }
        Cmd::Entropy { inst, tol, max_iter, out } => {
            let instance = load(&inst)?;
            let graph = build_hypergraph(&instance)?;
            let sol = solve_entropy(&instance, &graph, tol, max_iter)?;
            if !sol.converged {
                eprintln!(
                    "warning: solver stopped at max_iter = {max_iter} without reaching tol = {tol}"
                );
            }
            emit(&out, &sol.to_json())
        }
        Cmd::Curve { inst, format, out } => {
            let instance = load(&inst)?;
            let curve = rate_curve(&instance)?;
            let content = match format {
                Format::Csv => curve.to_csv(),
                Format::Json => curve.to_json(),
            };
            emit(&out, &content)
        }
        Cmd::Bounds { inst, lipschitz, delta, out } => {
            let instance = load(&inst)?;
            let epsilon = instance.epsilon;
            let bound = match (lipschitz, delta) {
                (Some(l), None) => {
                    if instance.ny != 1 {
                        return Err(CliError::Usage(
                            "the Lipschitz bound reads the instance as a source embedding; it must have ny = 1".into(),
                        ));
                    }
                    let points: Vec<Vec<f64>> =
                        (0..instance.nx).map(|x| instance.point(x, 0).to_vec()).collect();
                    let px = Distribution::new((0..instance.nx).map(|x| instance.px(x)).collect())?;
                    lipschitz_bound(&points, &px, l, epsilon)?
                }
                (None, Some(d)) => approx_function_bound(&instance, d, epsilon)?,
                _ => {
                    return Err(CliError::Usage(
                        "pass exactly one of --lipschitz or --delta".into(),
                    ))
                }
            };
            emit(&out, &format!("{bound}\n"))
        }
        Cmd::EncodeModular { inst, blocklength, blocks, seed, pmf, out } => {
            if blocklength == 0 || blocks == 0 {
                return Err(CliError::Usage("blocklength and blocks must be at least 1".into()));
            }
            let mut instance = load(&inst)?;
            if let Some(raw) = pmf {
                let values = parse_pmf(&raw)?;
                instance = epsent::sim::with_x_pmf(&instance, &values)?;
            }
            let joint: Vec<f64> = instance.p.iter().flatten().copied().collect();
            let mut files = Vec::new();
            let mut total_bits = 0usize;
            let mut violations = 0usize;
            for b in 0..blocks {
                let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, b as u64));
                let mut xs = Vec::with_capacity(blocklength);
                let mut ys = Vec::with_capacity(blocklength);
                for _ in 0..blocklength {
                    let cell = sample_pmf(&mut rng, &joint);
                    xs.push(cell / instance.ny);
                    ys.push(cell % instance.ny);
                }
                let (block, _recon, report) = modular_pipeline(&instance, &xs, &ys)?;
                total_bits += block.bit_len;
                violations += report.violations;
                files.extend_from_slice(&block.to_bytes());
            }
            if let Some(path) = &out {
                std::fs::write(path, &files).map_err(|e| CliError::Lib(e.into()))?;
            }
            let n = blocklength * blocks;
            println!(
                "{}",
                serde_json::json!({
                    "codec": "modular",
                    "n": n,
                    "blocks": blocks,
                    "empirical_rate": total_bits as f64 / n as f64,
                    "p_avg": violations as f64 / n as f64,
                })
            );
            Ok(())
        }
        Cmd::EncodePolar {
            inst,
            blocklength,
            blocks,
            seed,
            rate,
            samples,
            design_out,
            out,
        } => {
            if blocklength == 0 || blocks == 0 {
                return Err(CliError::Usage("blocklength and blocks must be at least 1".into()));
            }
            if !blocklength.is_power_of_two() {
                return Err(CliError::Usage(format!(
                    "polar blocklength must be a power of 2, got {blocklength}"
                )));
            }
            let instance = load(&inst)?;
            let n_log = blocklength.trailing_zeros();
            let (design, recon) =
                design_for_instance(&instance, n_log, rate, samples, derive_seed(seed, 0xD))?;
            if let Some(path) = &design_out {
                std::fs::write(path, design.to_json()).map_err(|e| CliError::Lib(e.into()))?;
            }
            if let Some(path) = &out {
                let px = design.px();
                let mut bytes = Vec::new();
                for b in 0..blocks {
                    let block_seed = derive_seed(derive_seed(seed, 0xE), b as u64);
                    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(block_seed, 0));
                    let xs: Vec<usize> =
                        (0..blocklength).map(|_| sample_pmf(&mut rng, &px)).collect();
                    let enc = polar_encode(&design, &xs, derive_seed(block_seed, 1))?;
                    let mut writer = epsent::bits::BitWriter::new();
                    for &bit in &enc.message {
                        writer.push_bit(bit == 1);
                    }
                    let (packed, bit_len) = writer.into_parts();
                    bytes.extend_from_slice(
                        &epsent::bits::EncodedBlock::new(packed, bit_len, blocklength, 2)
                            .to_bytes(),
                    );
                }
                std::fs::write(path, &bytes).map_err(|e| CliError::Lib(e.into()))?;
            }
            let report = run_polar(&instance, &design, &recon, blocks, derive_seed(seed, 0xE))?;
            println!(
                "{}",
                serde_json::json!({
                    "codec": "polar",
                    "n": blocklength,
                    "blocks": blocks,
                    "rate": report.rate,
                    "distortion": report.distortion,
                    "info_bits": design.info_set.len(),
                })
            );
            Ok(())
        }
        Cmd::Simulate { inst, codec, blocklength, blocks, seed, rate, format, out } => {
            let instance = load(&inst)?;
            let cfg = SimConfig {
                instance: inst.instance.display().to_string(),
                codec: match codec {
                    CodecArg::Modular => Codec::Modular,
                    CodecArg::Polar => Codec::Polar,
                },
                blocklength,
                blocks,
                seed,
                epsilon: None, // the override is already applied by load()
                target_rate: rate,
                out: out.as_ref().map(|p| p.display().to_string()),
                format: match format {
                    Format::Json => OutputFormat::Json,
                    Format::Csv => OutputFormat::Csv,
                },
            };
            let result = simulate(&cfg, &instance)?;
            eprintln!("runtime: {} ms", result.runtime_ms);
            let content = match format {
                Format::Json => result.to_json(),
                Format::Csv => result.to_csv(),
            };
            emit(&out, &content)
        }
        Cmd::Reproduce { fixture, seed, out } => {
            let report = reproduce_reference(&fixture, seed)?;
            emit(&out, &report)
        }
    }
}

fn parse_pmf(raw: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| CliError::Usage(format!("bad --pmf value: {e}")))?;
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(CliError::Usage(format!("--pmf must sum to 1, got {sum}")));
    }
    Ok(values)
}
