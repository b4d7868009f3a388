//! Problem and model types: the bounded-integer quadratic program, Ising and
//! QUBO models, their energy functions, and canonical JSON persistence.
//!
//! Canonical JSON means compact output, keys in sorted order, couplers sorted
//! by `(i, j)`, and floats in shortest round-trip form, so that storing a
//! loaded file reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spin value, always `-1` or `+1`.
pub type Spin = i8;

/// Asymmetry above this magnitude is reported when a matrix is symmetrized.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-12;

/// Returns `(Q + Qᵗ) / 2`.
pub fn symmetrize(matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = matrix.len();
    check_square(matrix, "matrix")?;
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = if i == j {
                matrix[i][i]
            } else {
                (matrix[i][j] + matrix[j][i]) / 2.0
            };
        }
    }
    Ok(out)
}

fn check_square(matrix: &[Vec<f64>], what: &str) -> Result<()> {
    let n = matrix.len();
    if let Some((i, row)) = matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::shape(format!(
            "{what} is not square: row {i} has {} entries, expected {n}",
            row.len()
        )));
    }
    Ok(())
}

fn max_asymmetry(matrix: &[Vec<f64>]) -> f64 {
    let n = matrix.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((matrix[i][j] - matrix[j][i]).abs());
        }
    }
    worst
}

fn check_finite<'a>(values: impl IntoIterator<Item = &'a f64>, what: &str) -> Result<()> {
    if values.into_iter().any(|v| !v.is_finite()) {
        return Err(Error::parse(format!("{what} contains a non-finite value")));
    }
    Ok(())
}

/// Unconstrained integer quadratic program
/// `min xᵗQx + qᵗx` subject to `x_i ∈ {0, …, κ_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UiqpProblem {
    quad: Vec<Vec<f64>>,
    linear: Vec<f64>,
    kappa: Vec<u64>,
    asymmetric_input: bool,
}

impl UiqpProblem {
    /// Validates and symmetrizes the quadratic matrix.
    pub fn new(quad: Vec<Vec<f64>>, linear: Vec<f64>, kappa: Vec<u64>) -> Result<Self> {
        let n = quad.len();
        if n == 0 {
            return Err(Error::shape("problem must have at least one variable"));
        }
        check_square(&quad, "Q")?;
        if linear.len() != n {
            return Err(Error::shape(format!("q has length {}, expected {n}", linear.len())));
        }
        if kappa.len() != n {
            return Err(Error::shape(format!("kappa has length {}, expected {n}", kappa.len())));
        }
        check_finite(quad.iter().flatten(), "Q")?;
        check_finite(&linear, "q")?;
        if let Some(i) = kappa.iter().position(|&k| k == 0) {
            return Err(Error::domain(format!("kappa must be ≥ 1 (variable {i} has kappa 0)")));
        }
        let asymmetric_input = max_asymmetry(&quad) > ASYMMETRY_TOLERANCE;
        if asymmetric_input {
            log::warn!("Q is not symmetric; replacing it with (Q + Qᵗ)/2");
        }
        let quad = symmetrize(&quad)?;
        Ok(UiqpProblem {
            quad,
            linear,
            kappa,
            asymmetric_input,
        })
    }

    pub fn n(&self) -> usize {
        self.linear.len()
    }

    /// Symmetric quadratic matrix `Q`.
    pub fn quad(&self) -> &[Vec<f64>] {
        &self.quad
    }

    /// Linear vector `q`.
    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn kappa(&self) -> &[u64] {
        &self.kappa
    }

    /// True when the input matrix differed from its transpose by more than
    /// [`ASYMMETRY_TOLERANCE`] and was replaced by its symmetric part.
    pub fn was_symmetrized(&self) -> bool {
        self.asymmetric_input
    }

    /// The vector `Qκ + q`.
    pub fn local_field_vector(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                let dot: f64 = self.quad[i]
                    .iter()
                    .zip(&self.kappa)
                    .map(|(a, &k)| a * k as f64)
                    .sum();
                dot + self.linear[i]
            })
            .collect()
    }

    /// Checks that `x` lies in the box `0 ≤ x_i ≤ κ_i`.
    pub fn check_point(&self, x: &[u64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::shape(format!(
                "point has length {}, expected {}",
                x.len(),
                self.n()
            )));
        }
        if let Some(i) = (0..x.len()).find(|&i| x[i] > self.kappa[i]) {
            return Err(Error::domain(format!(
                "x[{i}] = {} exceeds its bound {}",
                x[i], self.kappa[i]
            )));
        }
        Ok(())
    }

    /// Objective `xᵗQx + qᵗx`.
    pub fn evaluate(&self, x: &[u64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &[u64]) -> f64 {
        let n = self.n();
        let mut total = 0.0;
        for i in 0..n {
            let xi = x[i] as f64;
            let mut row = 0.0;
            for j in 0..n {
                row += self.quad[i][j] * x[j] as f64;
            }
            total += xi * row + self.linear[i] * xi;
        }
        total
    }

    pub fn to_json(&self) -> String {
        let file = ProblemFile {
            quad: self.quad.clone(),
            kappa: self.kappa.clone(),
            n: self.n(),
            linear: self.linear.clone(),
        };
        to_canonical_json(&file)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)?;
        if file.n != file.linear.len() {
            return Err(Error::shape(format!(
                "n = {} but q has {} entries",
                file.n,
                file.linear.len()
            )));
        }
        UiqpProblem::new(file.quad, file.linear, file.kappa)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&read_text(path.as_ref())?)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_json())
    }
}

/// Field order is the sorted key order of the canonical form.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    #[serde(rename = "Q")]
    quad: Vec<Vec<f64>>,
    kappa: Vec<u64>,
    n: usize,
    #[serde(rename = "q")]
    linear: Vec<f64>,
}

/// Ising model `Σ_{i<j} J_ij s_i s_j + Σ h_i s_i + offset`.
///
/// Couplers are stored sparsely with `i < j`; a coupler that is present in the
/// map is structurally present even if its value is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    h: Vec<f64>,
    couplers: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl IsingModel {
    /// Builds a model; `(j, i)` keys are normalized to `(i, j)` and duplicate
    /// keys are summed.
    pub fn new(
        h: Vec<f64>,
        couplers: impl IntoIterator<Item = ((usize, usize), f64)>,
        offset: f64,
    ) -> Result<Self> {
        let n = h.len();
        if n == 0 {
            return Err(Error::shape("an Ising model needs at least one spin"));
        }
        check_finite(&h, "h")?;
        if !offset.is_finite() {
            return Err(Error::parse("offset is not finite"));
        }
        let mut map = BTreeMap::new();
        for ((a, b), v) in couplers {
            if a == b {
                return Err(Error::domain(format!("coupler ({a},{a}) lies on the diagonal")));
            }
            let key = (a.min(b), a.max(b));
            if key.1 >= n {
                return Err(Error::shape(format!(
                    "coupler ({a},{b}) references a spin outside 0..{n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::parse(format!("coupler ({a},{b}) is not finite")));
            }
            *map.entry(key).or_insert(0.0) += v;
        }
        Ok(IsingModel {
            h,
            couplers: map,
            offset,
        })
    }

    pub fn num_spins(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn couplers(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplers
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Applies `f` to every local field, coupler and the offset.
    pub(crate) fn map_values(
        &self,
        mut field: impl FnMut(usize, f64) -> f64,
        mut coupler: impl FnMut((usize, usize), f64) -> f64,
        offset: impl FnOnce(f64) -> f64,
    ) -> IsingModel {
        IsingModel {
            h: self.h.iter().enumerate().map(|(i, &v)| field(i, v)).collect(),
            couplers: self
                .couplers
                .iter()
                .map(|(&k, &v)| (k, coupler(k, v)))
                .collect(),
            offset: offset(self.offset),
        }
    }

    pub fn check_spins(&self, s: &[Spin]) -> Result<()> {
        if s.len() != self.num_spins() {
            return Err(Error::shape(format!(
                "spin vector has length {}, expected {}",
                s.len(),
                self.num_spins()
            )));
        }
        if let Some(i) = s.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::domain(format!("s[{i}] = {} is not a spin value", s[i])));
        }
        Ok(())
    }

    pub fn evaluate(&self, s: &[Spin]) -> Result<f64> {
        self.check_spins(s)?;
        Ok(self.evaluate_unchecked(s))
    }

    /// Energy in a fixed summation order: couplers by `(i, j)`, then fields,
    /// then the offset.
    pub(crate) fn evaluate_unchecked(&self, s: &[Spin]) -> f64 {
        let mut e = 0.0;
        for (&(i, j), &v) in &self.couplers {
            e += v * f64::from(s[i] * s[j]);
        }
        for (hi, &si) in self.h.iter().zip(s) {
            e += hi * f64::from(si);
        }
        e + self.offset
    }

    pub fn to_json(&self) -> String {
        let file = IsingFile {
            couplers: self.couplers.iter().map(|(&(i, j), &v)| (i, j, v)).collect(),
            h: self.h.clone(),
            num_spins: self.num_spins(),
            offset: self.offset,
        };
        to_canonical_json(&file)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: IsingFile = serde_json::from_str(text)?;
        if file.num_spins != file.h.len() {
            return Err(Error::shape(format!(
                "num_spins = {} but h has {} entries",
                file.num_spins,
                file.h.len()
            )));
        }
        IsingModel::new(
            file.h,
            file.couplers.into_iter().map(|(i, j, v)| ((i, j), v)),
            file.offset,
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&read_text(path.as_ref())?)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_json())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IsingFile {
    #[serde(rename = "J")]
    couplers: Vec<(usize, usize, f64)>,
    h: Vec<f64>,
    num_spins: usize,
    offset: f64,
}

/// QUBO model `yᵗ Q_B y + offset` over `y ∈ {0,1}ⁿ`; the diagonal of `Q_B`
/// holds the linear coefficients because `y_i² = y_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    qb: Vec<Vec<f64>>,
    offset: f64,
}

impl QuboModel {
    pub fn new(qb: Vec<Vec<f64>>, offset: f64) -> Result<Self> {
        if qb.is_empty() {
            return Err(Error::shape("a QUBO model needs at least one variable"));
        }
        check_square(&qb, "QB")?;
        check_finite(qb.iter().flatten(), "QB")?;
        if !offset.is_finite() {
            return Err(Error::parse("offset is not finite"));
        }
        if max_asymmetry(&qb) > ASYMMETRY_TOLERANCE {
            log::warn!("QB is not symmetric; replacing it with (QB + QBᵗ)/2");
        }
        Ok(QuboModel {
            qb: symmetrize(&qb)?,
            offset,
        })
    }

    pub fn num_bits(&self) -> usize {
        self.qb.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.qb
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn evaluate(&self, y: &[u8]) -> Result<f64> {
        if y.len() != self.num_bits() {
            return Err(Error::shape(format!(
                "binary vector has length {}, expected {}",
                y.len(),
                self.num_bits()
            )));
        }
        if let Some(i) = y.iter().position(|&v| v > 1) {
            return Err(Error::domain(format!("y[{i}] = {} is not binary", y[i])));
        }
        let mut e = 0.0;
        for (i, row) in self.qb.iter().enumerate() {
            if y[i] == 0 {
                continue;
            }
            for (j, &v) in row.iter().enumerate() {
                if y[j] == 1 {
                    e += v;
                }
            }
        }
        Ok(e + self.offset)
    }

    pub fn to_json(&self) -> String {
        let file = QuboFile {
            qb: self.qb.clone(),
            num_bits: self.num_bits(),
            offset: self.offset,
        };
        to_canonical_json(&file)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: QuboFile = serde_json::from_str(text)?;
        if file.num_bits != file.qb.len() {
            return Err(Error::shape(format!(
                "num_bits = {} but QB has {} rows",
                file.num_bits,
                file.qb.len()
            )));
        }
        QuboModel::new(file.qb, file.offset)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&read_text(path.as_ref())?)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_json())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuboFile {
    #[serde(rename = "QB")]
    qb: Vec<Vec<f64>>,
    num_bits: usize,
    offset: f64,
}

/// Compact JSON plus a trailing newline. Struct fields must be declared in
/// sorted key order for the output to be canonical.
pub(crate) fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("in-memory values serialize");
    s.push('\n');
    s
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}
