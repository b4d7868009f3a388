//! Seeded benchmark instances.
//!
//! Both families draw a symmetric `Q` from its upper triangle: each
//! off-diagonal entry is zero with probability `sparsity` and otherwise
//! uniform on `{±1, …, ±α_Q}`; each diagonal entry is uniform on
//! `{0, ±1, …, ±α_Q}`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::{stream, unit};
use crate::error::{Error, Result};
use crate::model::UiqpProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Positive-definite `Q` with a planted unique minimizer.
    Convex,
    /// `Q` and `q` drawn independently from `U_{α_Q}` and `U_{α_q}`.
    Uniform,
}

fn default_sparsity() -> f64 {
    0.5
}

fn default_alpha_quad() -> u32 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub family: Family,
    pub n: usize,
    /// Upper bound shared by every variable.
    pub kappa: u64,
    #[serde(default = "default_sparsity")]
    pub sparsity: f64,
    #[serde(default = "default_alpha_quad")]
    pub alpha_quad: u32,
    /// Ignored by the convex family, whose `q` is `−2Qx*`.
    #[serde(default)]
    pub alpha_linear: u32,
    /// Falls back to a seed derived from the experiment seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl InstanceSpec {
    pub fn convex(n: usize, kappa: u64, seed: u64) -> Self {
        InstanceSpec {
            family: Family::Convex,
            n,
            kappa,
            sparsity: default_sparsity(),
            alpha_quad: default_alpha_quad(),
            alpha_linear: 0,
            seed: Some(seed),
            id: None,
        }
    }

    pub fn uniform(n: usize, kappa: u64, alpha_quad: u32, alpha_linear: u32, seed: u64) -> Self {
        InstanceSpec {
            family: Family::Uniform,
            n,
            kappa,
            sparsity: default_sparsity(),
            alpha_quad,
            alpha_linear,
            seed: Some(seed),
            id: None,
        }
    }

    fn validate(&self) -> Result<u64> {
        if self.n == 0 {
            return Err(Error::domain("n must be ≥ 1"));
        }
        if self.kappa == 0 {
            return Err(Error::domain("kappa must be ≥ 1"));
        }
        if !(0.0..=1.0).contains(&self.sparsity) {
            return Err(Error::domain(format!(
                "sparsity must lie in [0, 1], got {}",
                self.sparsity
            )));
        }
        self.seed
            .ok_or_else(|| Error::domain("instance spec has no seed"))
    }
}

/// Uniform on `{−α, …, α}`.
fn symmetric_int(rng: &mut impl Rng, alpha: u32) -> f64 {
    let a = i64::from(alpha);
    rng.random_range(-a..=a) as f64
}

/// Uniform on `{±1, …, ±α}`.
fn nonzero_int(rng: &mut impl Rng, alpha: u32) -> f64 {
    let v = rng.random_range(1..=i64::from(alpha)) as f64;
    if rng.random_bool(0.5) {
        v
    } else {
        -v
    }
}

fn draw_quad(rng: &mut impl Rng, n: usize, alpha: u32, sparsity: f64) -> Vec<Vec<f64>> {
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        q[i][i] = symmetric_int(rng, alpha);
        for j in (i + 1)..n {
            let v = if alpha == 0 || rng.random_bool(sparsity) {
                0.0
            } else {
                nonzero_int(rng, alpha)
            };
            q[i][j] = v;
            q[j][i] = v;
        }
    }
    q
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(q: &[Vec<f64>]) -> f64 {
    let n = q.len();
    let m = DMatrix::from_fn(n, n, |i, j| q[i][j]);
    m.symmetric_eigenvalues().min()
}

/// Convex instance `(Q + λI, −2(Q + λI)x*)` with planted minimizer `x*`,
/// where `λ = ⌈|min(λ_min, 0)| + r⌉` and `r` is uniform on `(0, 1)`.
pub fn gen_convex_instance(spec: &InstanceSpec) -> Result<(UiqpProblem, Vec<u64>)> {
    if spec.family != Family::Convex {
        return Err(Error::domain("spec is not of the convex family"));
    }
    let seed = spec.validate()?;
    let mut rng = stream(seed);
    let mut q = draw_quad(&mut rng, spec.n, spec.alpha_quad, spec.sparsity);
    let r = loop {
        let u = unit(&mut rng);
        if u > 0.0 {
            break u;
        }
    };
    let lambda = (min_eigenvalue(&q).min(0.0).abs() + r).ceil();
    for (i, row) in q.iter_mut().enumerate() {
        row[i] += lambda;
    }
    let planted: Vec<u64> = (0..spec.n)
        .map(|_| {
            if rng.random_bool(0.5) {
                0
            } else {
                rng.random_range(1..=spec.kappa)
            }
        })
        .collect();
    let linear: Vec<f64> = q
        .iter()
        .map(|row| -2.0 * row.iter().zip(&planted).map(|(a, &x)| a * x as f64).sum::<f64>())
        .collect();
    let p = UiqpProblem::new(q, linear, vec![spec.kappa; spec.n])?;
    Ok((p, planted))
}

pub fn gen_uniform_instance(spec: &InstanceSpec) -> Result<UiqpProblem> {
    if spec.family != Family::Uniform {
        return Err(Error::domain("spec is not of the uniform family"));
    }
    let seed = spec.validate()?;
    let mut rng = stream(seed);
    let q = draw_quad(&mut rng, spec.n, spec.alpha_quad, spec.sparsity);
    let linear = (0..spec.n)
        .map(|_| symmetric_int(&mut rng, spec.alpha_linear))
        .collect();
    UiqpProblem::new(q, linear, vec![spec.kappa; spec.n])
}

/// Generates an instance of either family, dropping the planted point.
pub fn gen_instance(spec: &InstanceSpec) -> Result<UiqpProblem> {
    match spec.family {
        Family::Convex => gen_convex_instance(spec).map(|(p, _)| p),
        Family::Uniform => gen_uniform_instance(spec),
    }
}
