//! End-to-end resilience experiment: generate or load instances, encode each
//! with every requested scheme, scale, and measure `R` on an ε grid.
//!
//! Cells are computed in parallel but every random draw comes from a stream
//! keyed by the cell's coordinates, and results are collected in
//! `(instance, encoding, ε)` order, so reports are identical for any worker
//! count.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{gen_instance, InstanceSpec};
use super::noise::{resilience_from, NoiseSpec, NoiseTarget, ResilienceOutcome};
use super::rng::{cell_seed, derive_seed};
use crate::bounds::{find_mu_spin, PrecisionConfig};
use crate::encodings::{IntEncoding, Scheme};
use crate::error::{Error, Result};
use crate::model::{read_text, write_text, IsingModel, UiqpProblem};
use crate::solver::{ground_states, GroundStateResult, DEFAULT_TOL};
use crate::transform::{scale_ising, uiqp_to_ising};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSource {
    Spec(InstanceSpec),
    /// Problem JSON file; relative paths are resolved against the config
    /// file's directory by [`ExperimentConfig::load`].
    Path(PathBuf),
}

fn default_encodings() -> Vec<Scheme> {
    vec![Scheme::Bounded, Scheme::Binary]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instances: Vec<InstanceSource>,
    #[serde(default = "default_encodings")]
    pub encodings: Vec<Scheme>,
    pub epsilons: Vec<f64>,
    pub n_trials: usize,
    pub epsilon_l: f64,
    pub epsilon_c: f64,
    pub seed: u64,
    #[serde(default)]
    pub noise_target: NoiseTarget,
}

/// `ε ∈ {0.001, 0.002, …, 0.01}`.
pub fn standard_epsilon_grid() -> Vec<f64> {
    (1..=10).map(|k| k as f64 / 1000.0).collect()
}

impl ExperimentConfig {
    /// Five convex instances and one instance of each uniform pair
    /// `(U_2,U_200), (U_5,U_200), (U_5,U_10), (U_5,U_100), (U_10,U_0)`, all
    /// with `n = 3`, `κ = 12`.
    pub fn desk_scale(seed: u64) -> Self {
        let (n, kappa) = (3, 12);
        let mut instances: Vec<InstanceSource> = (0..5)
            .map(|k| {
                let mut s = InstanceSpec::convex(n, kappa, derive_seed(seed, k));
                s.id = Some(format!("convex-{k}"));
                InstanceSource::Spec(s)
            })
            .collect();
        let pairs = [(2, 200), (5, 200), (5, 10), (5, 100), (10, 0)];
        for (k, (aq, al)) in pairs.into_iter().enumerate() {
            let mut s = InstanceSpec::uniform(n, kappa, aq, al, derive_seed(seed, 5 + k as u64));
            s.id = Some(format!("uniform-q{aq}-l{al}"));
            instances.push(InstanceSource::Spec(s));
        }
        ExperimentConfig {
            instances,
            encodings: default_encodings(),
            epsilons: standard_epsilon_grid(),
            n_trials: 10,
            epsilon_l: 0.01,
            epsilon_c: 0.01,
            seed,
            noise_target: NoiseTarget::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a config, resolving relative instance paths against its
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_json(&read_text(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for src in &mut cfg.instances {
            if let InstanceSource::Path(p) = src {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<PrecisionConfig> {
        if self.instances.is_empty() {
            return Err(Error::domain("experiment lists no instances"));
        }
        if self.encodings.is_empty() {
            return Err(Error::domain("experiment lists no encodings"));
        }
        if self.epsilons.is_empty() {
            return Err(Error::domain("experiment lists no noise levels"));
        }
        for &e in &self.epsilons {
            if !(e >= 0.0) || !e.is_finite() {
                return Err(Error::domain(format!("noise level {e} must be finite and ≥ 0")));
            }
        }
        if self.n_trials == 0 {
            return Err(Error::domain("n_trials must be ≥ 1"));
        }
        PrecisionConfig::new(self.epsilon_l, self.epsilon_c)
    }

    /// `(id, problem)` for every instance, in config order.
    pub fn resolve_instances(&self) -> Result<Vec<(String, UiqpProblem)>> {
        self.instances
            .iter()
            .enumerate()
            .map(|(k, src)| match src {
                InstanceSource::Spec(spec) => {
                    let mut spec = spec.clone();
                    spec.seed.get_or_insert(derive_seed(self.seed, k as u64));
                    let id = spec
                        .id
                        .clone()
                        .unwrap_or_else(|| format!("{:?}-{k}", spec.family).to_lowercase());
                    Ok((id, gen_instance(&spec)?))
                }
                InstanceSource::Path(p) => {
                    let id = p
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| format!("instance-{k}"));
                    Ok((id, UiqpProblem::load(p)?))
                }
            })
            .collect()
    }
}

/// Ising model of `p` under `scheme`, scaled to `max |J| = 1`.
pub fn encoded_model(p: &UiqpProblem, scheme: Scheme, prec: &PrecisionConfig) -> Result<IsingModel> {
    let enc = match scheme {
        Scheme::Bounded => {
            let mu = find_mu_spin(p, prec)?.mu;
            IntEncoding::for_problem(p, scheme, Some(&mu))?
        }
        _ => IntEncoding::for_problem(p, scheme, None)?,
    };
    Ok(scale_ising(&uiqp_to_ising(p, &enc)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub instance: String,
    pub encoding: Scheme,
    pub epsilon: f64,
    pub num_spins: Option<usize>,
    pub outcome: Option<ResilienceOutcome>,
    /// Why the cell has no outcome.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub encoding: Scheme,
    pub epsilon: f64,
    /// Mean `R` over the instances whose cell was not skipped.
    pub mean_r: Option<f64>,
    pub n_instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResilienceReport {
    pub cells: Vec<CellResult>,
    pub summary: Vec<SummaryRow>,
}

/// Runs the experiment on `workers` threads (the rayon default when
/// `None`).
pub fn run_experiment(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ResilienceReport> {
    let prec = cfg.validate()?;
    let instances = cfg.resolve_instances()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::domain("workers must be ≥ 1"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_cells(cfg, &prec, &instances))
}

type Prepared = std::result::Result<(IsingModel, GroundStateResult), String>;

fn run_cells(
    cfg: &ExperimentConfig,
    prec: &PrecisionConfig,
    instances: &[(String, UiqpProblem)],
) -> Result<ResilienceReport> {
    let n_enc = cfg.encodings.len();
    let prepared: Vec<Prepared> = (0..instances.len() * n_enc)
        .into_par_iter()
        .map(|k| {
            let p = &instances[k / n_enc].1;
            let scheme = cfg.encodings[k % n_enc];
            let m = encoded_model(p, scheme, prec).map_err(|e| e.to_string())?;
            let g = ground_states(&m, DEFAULT_TOL).map_err(|e| e.to_string())?;
            Ok((m, g))
        })
        .collect();

    let n_eps = cfg.epsilons.len();
    let cells: Vec<CellResult> = (0..prepared.len() * n_eps)
        .into_par_iter()
        .map(|k| {
            let (pk, ek) = (k / n_eps, k % n_eps);
            let (ik, sk) = (pk / n_enc, pk % n_enc);
            let id = &instances[ik].0;
            let mut cell = CellResult {
                instance: id.clone(),
                encoding: cfg.encodings[sk],
                epsilon: cfg.epsilons[ek],
                num_spins: None,
                outcome: None,
                skipped: None,
            };
            let (m, base) = match &prepared[pk] {
                Ok(v) => v,
                Err(reason) => {
                    cell.skipped = Some(reason.clone());
                    return cell;
                }
            };
            cell.num_spins = Some(m.num_spins());
            let spec = NoiseSpec {
                epsilon: cfg.epsilons[ek],
                n_trials: cfg.n_trials,
                seed: cell_seed(cfg.seed, id, sk, ek),
                target: cfg.noise_target,
            };
            match resilience_from(m, base, &spec) {
                Ok(o) => cell.outcome = Some(o),
                Err(e) => cell.skipped = Some(e.to_string()),
            }
            cell
        })
        .collect();

    let mut summary = Vec::new();
    for &encoding in &cfg.encodings {
        for &epsilon in &cfg.epsilons {
            let rs: Vec<f64> = cells
                .iter()
                .filter(|c| c.encoding == encoding && c.epsilon == epsilon)
                .filter_map(|c| c.outcome.as_ref().map(|o| o.r))
                .collect();
            summary.push(SummaryRow {
                encoding,
                epsilon,
                mean_r: (!rs.is_empty()).then(|| rs.iter().sum::<f64>() / rs.len() as f64),
                n_instances: rs.len(),
            });
        }
    }
    Ok(ResilienceReport { cells, summary })
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("writes to memory");
    for row in rows {
        w.write_record(&row).expect("writes to memory");
    }
    String::from_utf8(w.into_inner().expect("flushes to memory")).expect("ASCII fields")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ResilienceReport {
    /// One row per trial of every cell that ran.
    pub fn trials_csv(&self) -> String {
        let rows = self.cells.iter().flat_map(|c| {
            c.outcome.iter().flat_map(move |o| {
                o.trials.iter().map(move |t| {
                    vec![
                        c.instance.clone(),
                        c.encoding.to_string(),
                        c.epsilon.to_string(),
                        t.trial.to_string(),
                        u8::from(t.same).to_string(),
                    ]
                })
            })
        });
        csv_string(&["instance", "encoding", "epsilon", "trial", "same"], rows)
    }

    pub fn summary_csv(&self) -> String {
        let rows = self.summary.iter().map(|s| {
            vec![
                s.encoding.to_string(),
                s.epsilon.to_string(),
                opt(s.mean_r),
                s.n_instances.to_string(),
            ]
        });
        csv_string(&["encoding", "epsilon", "mean_r", "n_instances"], rows)
    }

    pub fn cells_csv(&self) -> String {
        let rows = self.cells.iter().map(|c| {
            vec![
                c.instance.clone(),
                c.encoding.to_string(),
                c.epsilon.to_string(),
                opt(c.num_spins),
                opt(c.outcome.as_ref().map(|o| o.r)),
                opt(c.outcome.as_ref().map(|o| o.n_same)),
                opt(c.outcome.as_ref().map(|o| o.n_trials)),
                c.skipped.clone().map_or_else(|| "ok".to_string(), |r| format!("skipped: {r}")),
            ]
        });
        csv_string(
            &["instance", "encoding", "epsilon", "num_spins", "r", "n_same", "n_trials", "status"],
            rows,
        )
    }

    /// Writes `trials.csv`, `summary.csv` and `cells.csv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_text(&dir.join("trials.csv"), &self.trials_csv())?;
        write_text(&dir.join("summary.csv"), &self.summary_csv())?;
        write_text(&dir.join("cells.csv"), &self.cells_csv())
    }

    /// Mean of the per-ε averages of `encoding` over noise levels accepted
    /// by `keep`.
    pub fn grand_average(&self, encoding: Scheme, keep: impl Fn(f64) -> bool) -> Option<f64> {
        let means: Vec<f64> = self
            .summary
            .iter()
            .filter(|s| s.encoding == encoding && keep(s.epsilon))
            .filter_map(|s| s.mean_r)
            .collect();
        (!means.is_empty()).then(|| means.iter().sum::<f64>() / means.len() as f64)
    }

    pub fn skipped_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.skipped.is_some()).count()
    }
}
