//! Command-line front end. Every subcommand is a thin adapter over the
//! library; outputs are the same bytes the library's JSON/CSV writers emit.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::bounds::{find_mu_linear_only, find_mu_qubo, find_mu_spin, LinearAdjustRule, PrecisionConfig};
use crate::encodings::{self, IntEncoding, Scheme};
use crate::error::{Error, Result};
use crate::model::{read_json, to_canonical_json, write_text, IsingModel, UiqpProblem};
use crate::resilience::experiment::{run_experiment, ExperimentConfig};
use crate::resilience::generate::{gen_convex_instance, gen_uniform_instance, Family, InstanceSpec};
use crate::solver::{ground_states, DEFAULT_TOL};
use crate::transform::{uiqp_to_ising, uiqp_to_qubo};

#[derive(Debug, Parser)]
#[command(name = "bcenc", version, about = "Bounded-coefficient integer encodings for Ising and QUBO models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundsTarget {
    Spin,
    Qubo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelTarget {
    Ising,
    Qubo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Bounded,
    Binary,
    Unary,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Bounded => Scheme::Bounded,
            SchemeArg::Binary => Scheme::Binary,
            SchemeArg::Unary => Scheme::Unary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    /// Lower the bound by one.
    Decrement,
    /// Drop the bound just below the minimizing coefficient.
    BelowMinimizer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Convex,
    Uniform,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the coefficient list encoding 0..=KAPPA.
    Encode {
        /// Upper bound of the integer variable (≥ 1).
        #[arg(long)]
        kappa: u64,
        /// Largest coefficient allowed (≥ 1, bounded scheme only).
        #[arg(long)]
        mu: Option<u64>,
        #[arg(long, value_enum, default_value = "bounded")]
        scheme: SchemeArg,
    },
    /// Compute per-variable coefficient bounds meeting precision thresholds.
    Bounds {
        /// Problem JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Minimum ratio of smallest to largest local field, in (0, 1].
        #[arg(long)]
        epsilon_l: f64,
        /// Minimum ratio of smallest to largest coupler, in (0, 1].
        #[arg(long)]
        epsilon_c: f64,
        #[arg(long, value_enum, default_value = "spin")]
        target: BoundsTarget,
        /// Update rule of the QUBO linear-term adjustment.
        #[arg(long, value_enum, default_value = "decrement")]
        rule: RuleArg,
        /// Write the result here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Encode a problem and emit its Ising or QUBO model.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        target: ModelTarget,
        #[arg(long, value_enum, default_value = "bounded")]
        encoding: SchemeArg,
        /// Bounds for the bounded scheme: a bounds JSON file (with a "mu"
        /// array) or `uniform:<int>`.
        #[arg(long)]
        mu_from: Option<String>,
        /// Also write the encoding's coefficient JSON here.
        #[arg(long)]
        encoding_out: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact ground states of an Ising model (at most 30 spins).
    Solve {
        /// Ising model JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Absolute energy tolerance for ties.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a seeded benchmark problem.
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Number of integer variables.
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Upper bound shared by every variable.
        #[arg(long, default_value_t = 12)]
        kappa: u64,
        /// Seed of the generator (required).
        #[arg(long)]
        seed: u64,
        /// Quadratic entries are drawn from {0, ±1, …, ±ALPHA_Q}.
        #[arg(long, default_value_t = 2)]
        alpha_q: u32,
        /// Linear entries are drawn from {0, ±1, …, ±ALPHA_L} (uniform family).
        #[arg(long, default_value_t = 0)]
        alpha_l: u32,
        /// Probability that an off-diagonal entry is zero, in [0, 1].
        #[arg(long, default_value_t = 0.5)]
        sparsity: f64,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the planted minimizer (convex family) as JSON here.
        #[arg(long)]
        planted: Option<PathBuf>,
    },
    /// Run a resilience experiment and write CSV reports.
    Resilience {
        /// Experiment config JSON; omit to run the built-in desk-scale suite.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed (required); overrides the seed in the config.
        #[arg(long)]
        seed: u64,
        /// Directory receiving trials.csv, summary.csv and cells.csv.
        #[arg(long)]
        out_dir: PathBuf,
        /// Worker threads; results do not depend on this.
        #[arg(long)]
        workers: Option<usize>,
        /// Override the number of trials per cell.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the noise grid (comma separated standard deviations).
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
    },
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

#[derive(Deserialize)]
struct BoundsFile {
    mu: Vec<u64>,
}

fn parse_mu(spec: &str, n: usize) -> Result<Vec<u64>> {
    if let Some(v) = spec.strip_prefix("uniform:") {
        let mu: u64 = v
            .parse()
            .map_err(|_| Error::parse(format!("invalid uniform bound '{v}'")))?;
        return Ok(vec![mu; n]);
    }
    let file: BoundsFile = read_json(spec.as_ref())?;
    Ok(file.mu)
}

/// Runs one command, writing its primary output to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Encode { kappa, mu, scheme } => {
            let coeffs = match scheme {
                SchemeArg::Bounded => {
                    let mu = mu.ok_or_else(|| Error::domain("--mu is required for the bounded scheme"))?;
                    encodings::bounded_coefficient_encoding(kappa, mu)?
                }
                SchemeArg::Binary => encodings::binary_encoding(kappa)?,
                SchemeArg::Unary => encodings::unary_encoding(kappa)?,
            };
            emit(out, None, &to_canonical_json(&coeffs))
        }
        Command::Bounds {
            input,
            epsilon_l,
            epsilon_c,
            target,
            rule,
            output,
        } => {
            let p = UiqpProblem::load(&input)?;
            let cfg = PrecisionConfig::new(epsilon_l, epsilon_c)?;
            let linear_only = p.quad().iter().flatten().all(|v| *v == 0.0);
            let result = match target {
                _ if linear_only => find_mu_linear_only(p.linear(), p.kappa(), epsilon_l)?,
                BoundsTarget::Spin => find_mu_spin(&p, &cfg)?,
                BoundsTarget::Qubo => {
                    let rule = match rule {
                        RuleArg::Decrement => LinearAdjustRule::Decrement,
                        RuleArg::BelowMinimizer => LinearAdjustRule::BelowMinimizer,
                    };
                    find_mu_qubo(&p, &cfg, rule)?
                }
            };
            for w in &result.warnings {
                log::warn!("{w}");
            }
            emit(out, output.as_ref(), &result.to_json())
        }
        Command::Convert {
            input,
            target,
            encoding,
            mu_from,
            encoding_out,
            output,
        } => {
            let p = UiqpProblem::load(&input)?;
            let mu = match (encoding, mu_from) {
                (SchemeArg::Bounded, None) => {
                    return Err(Error::domain("--mu-from is required for the bounded encoding"))
                }
                (_, Some(spec)) => Some(parse_mu(&spec, p.n())?),
                (_, None) => None,
            };
            let enc = IntEncoding::for_problem(&p, encoding.into(), mu.as_deref())?;
            if let Some(path) = encoding_out {
                enc.store(path)?;
            }
            let text = match target {
                ModelTarget::Ising => uiqp_to_ising(&p, &enc)?.to_json(),
                ModelTarget::Qubo => uiqp_to_qubo(&p, &enc)?.to_json(),
            };
            emit(out, output.as_ref(), &text)
        }
        Command::Solve { input, tol, output } => {
            let m = IsingModel::load(&input)?;
            emit(out, output.as_ref(), &ground_states(&m, tol)?.to_json())
        }
        Command::Gen {
            family,
            n,
            kappa,
            seed,
            alpha_q,
            alpha_l,
            sparsity,
            output,
            planted,
        } => {
            let spec = InstanceSpec {
                family: match family {
                    FamilyArg::Convex => Family::Convex,
                    FamilyArg::Uniform => Family::Uniform,
                },
                n,
                kappa,
                sparsity,
                alpha_quad: alpha_q,
                alpha_linear: alpha_l,
                seed: Some(seed),
                id: None,
            };
            let problem = match spec.family {
                Family::Convex => {
                    let (p, x) = gen_convex_instance(&spec)?;
                    if let Some(path) = planted {
                        write_text(&path, &to_canonical_json(&x))?;
                    }
                    p
                }
                Family::Uniform => {
                    if planted.is_some() {
                        return Err(Error::domain("--planted applies to the convex family only"));
                    }
                    gen_uniform_instance(&spec)?
                }
            };
            emit(out, output.as_ref(), &problem.to_json())
        }
        Command::Resilience {
            config,
            seed,
            out_dir,
            workers,
            trials,
            epsilons,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::desk_scale(seed),
            };
            cfg.seed = seed;
            if let Some(t) = trials {
                cfg.n_trials = t;
            }
            if let Some(e) = epsilons {
                cfg.epsilons = e;
            }
            let report = run_experiment(&cfg, workers)?;
            report.write(&out_dir)?;
            emit(out, None, &report.summary_csv())
        }
    }
}
