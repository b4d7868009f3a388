//! Integer-to-binary encodings `x = Σ_j c_j y_j`.
//!
//! Three schemes are provided: the bounded-coefficient encoding (binary
//! prefix, repeated copies of the bound `μ`, then a residual), the
//! κ-complete binary encoding, and the unary encoding. All three produce
//! coefficient sequences summing to `κ` that represent exactly `{0, …, κ}`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{read_text, to_canonical_json, write_text, UiqpProblem};

fn floor_log2(x: u64) -> u32 {
    debug_assert!(x > 0);
    63 - x.leading_zeros()
}

/// Intermediate quantities of the repeated-μ branch of the bounded encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundedConstruction {
    /// Length of the binary prefix, `⌊log₂ μ⌋ + 1`.
    pub rho: u32,
    /// `κ − (2^ρ − 1)`, the amount left after the prefix.
    pub nu: u64,
    /// Number of coefficients equal to `μ`, `⌊ν / μ⌋`.
    pub eta: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Bounded,
    Binary,
    Unary,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Bounded => "bounded",
            Scheme::Binary => "binary",
            Scheme::Unary => "unary",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounded" => Ok(Scheme::Bounded),
            "binary" => Ok(Scheme::Binary),
            "unary" => Ok(Scheme::Unary),
            other => Err(Error::domain(format!("unknown encoding scheme `{other}`"))),
        }
    }
}

/// Encoding of a single integer variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarEncoding {
    coeffs: Vec<u64>,
    kappa: u64,
    mu: Option<u64>,
    construction: Option<BoundedConstruction>,
}

impl VarEncoding {
    /// Wraps an arbitrary positive coefficient sequence; `κ` is taken to be
    /// the coefficient sum.
    pub fn from_coefficients(coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::domain("an encoding needs at least one coefficient"));
        }
        if coeffs.contains(&0) {
            return Err(Error::domain("encoding coefficients must be ≥ 1"));
        }
        let kappa = coeffs
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or_else(|| Error::domain("coefficient sum overflows"))?;
        Ok(VarEncoding {
            coeffs,
            kappa,
            mu: None,
            construction: None,
        })
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn kappa(&self) -> u64 {
        self.kappa
    }

    pub fn mu(&self) -> Option<u64> {
        self.mu
    }

    pub fn construction(&self) -> Option<BoundedConstruction> {
        self.construction
    }

    pub fn width(&self) -> usize {
        self.coeffs.len()
    }

    pub fn decode(&self, y: &[u8]) -> Result<u64> {
        decode(&self.coeffs, y)
    }
}

/// Bounded-coefficient encoding of `κ` with all coefficients at most `μ`,
/// keeping the construction record.
pub fn bounded_coefficient(kappa: u64, mu: u64) -> Result<VarEncoding> {
    check_kappa_mu(kappa, mu)?;
    let (coeffs, construction) = if kappa < 1u64 << (floor_log2(mu) + 1) {
        (binary_coefficients(kappa), None)
    } else {
        let rho = floor_log2(mu) + 1;
        let nu = kappa - ((1u64 << rho) - 1);
        let eta = nu / mu;
        let mut c: Vec<u64> = (0..rho).map(|i| 1u64 << i).collect();
        c.extend(std::iter::repeat_n(mu, eta as usize));
        let residual = nu - eta * mu;
        if residual != 0 {
            c.push(residual);
        }
        (c, Some(BoundedConstruction { rho, nu, eta }))
    };
    Ok(VarEncoding {
        coeffs,
        kappa,
        mu: Some(mu),
        construction,
    })
}

pub fn bounded_coefficient_encoding(kappa: u64, mu: u64) -> Result<Vec<u64>> {
    Ok(bounded_coefficient(kappa, mu)?.coeffs)
}

fn check_kappa_mu(kappa: u64, mu: u64) -> Result<()> {
    if kappa < 1 {
        return Err(Error::domain("kappa must be ≥ 1"));
    }
    if mu < 1 {
        return Err(Error::domain("mu must be ≥ 1"));
    }
    if mu > kappa {
        return Err(Error::domain(format!("mu = {mu} exceeds kappa = {kappa}")));
    }
    Ok(())
}

// [1, 2, …, 2^(k−1), κ − (2^k − 1)] with k = ⌊log₂ κ⌋; the residual is
// always in 1..=2^k so nothing is ever dropped.
fn binary_coefficients(kappa: u64) -> Vec<u64> {
    let k = floor_log2(kappa);
    let mut c: Vec<u64> = (0..k).map(|i| 1u64 << i).collect();
    let residual = kappa - ((1u64 << k) - 1);
    if residual != 0 {
        c.push(residual);
    }
    c
}

/// κ-complete binary encoding: powers of two with a truncated last term.
pub fn binary_encoding(kappa: u64) -> Result<Vec<u64>> {
    if kappa < 1 {
        return Err(Error::domain("kappa must be ≥ 1"));
    }
    Ok(binary_coefficients(kappa))
}

pub fn unary_encoding(kappa: u64) -> Result<Vec<u64>> {
    if kappa < 1 {
        return Err(Error::domain("kappa must be ≥ 1"));
    }
    Ok(vec![1; kappa as usize])
}

/// Width of the bounded-coefficient encoding computed from the closed form.
pub fn width_formula(kappa: u64, mu: u64) -> Result<usize> {
    check_kappa_mu(kappa, mu)?;
    let log_mu = floor_log2(mu);
    if kappa < 1u64 << (log_mu + 1) {
        return Ok(floor_log2(kappa) as usize + 1);
    }
    let rho = u64::from(log_mu) + 1;
    let nu = kappa - ((1u64 << rho) - 1);
    let eta = nu / mu;
    let tail = u64::from(nu - eta * mu != 0);
    Ok((rho + eta + tail) as usize)
}

pub fn decode(coeffs: &[u64], y: &[u8]) -> Result<u64> {
    if coeffs.len() != y.len() {
        return Err(Error::shape(format!(
            "binary vector has length {}, encoding has width {}",
            y.len(),
            coeffs.len()
        )));
    }
    if let Some(i) = y.iter().position(|&b| b > 1) {
        return Err(Error::domain(format!("y[{i}] = {} is not binary", y[i])));
    }
    Ok(coeffs.iter().zip(y).filter(|(_, &b)| b == 1).map(|(&c, _)| c).sum())
}

/// True iff the subset sums of `coeffs` are exactly `{0, …, κ}`.
///
/// Uses a reachability bitset of `κ + 1` bits; a sequence whose sum differs
/// from `κ` either misses `κ` or reaches past it.
pub fn is_kappa_complete(coeffs: &[u64], kappa: u64) -> bool {
    if coeffs.contains(&0) {
        return false;
    }
    let total: Option<u64> = coeffs.iter().try_fold(0u64, |a, &c| a.checked_add(c));
    if total != Some(kappa) {
        return false;
    }
    let bits = kappa as usize + 1;
    let mut reach = vec![0u64; bits.div_ceil(64)];
    reach[0] = 1;
    for &c in coeffs {
        shift_or(&mut reach, c as usize);
    }
    let full_words = bits / 64;
    if reach[..full_words].iter().any(|&w| w != u64::MAX) {
        return false;
    }
    let rem = bits % 64;
    rem == 0 || reach[full_words] == (1u64 << rem) - 1
}

// reach |= reach << shift, truncated to the existing length.
fn shift_or(reach: &mut [u64], shift: usize) {
    let words = shift / 64;
    let bits = shift % 64;
    for i in (0..reach.len()).rev() {
        if i < words {
            break;
        }
        let src = i - words;
        let mut v = reach[src] << bits;
        if bits != 0 && src > 0 {
            v |= reach[src - 1] >> (64 - bits);
        }
        reach[i] |= v;
    }
}

/// Number of binary vectors decoding to each value `χ ∈ {0, …, Σc}`, by
/// counting convolution (exact).
pub fn code_word_counts(coeffs: &[u64]) -> Result<Vec<u128>> {
    if coeffs.contains(&0) {
        return Err(Error::domain("encoding coefficients must be ≥ 1"));
    }
    if coeffs.len() > 127 {
        return Err(Error::Capacity(format!(
            "{} coefficients give more than 2^127 code words",
            coeffs.len()
        )));
    }
    let total: u64 = coeffs.iter().sum();
    let mut counts = vec![0u128; total as usize + 1];
    counts[0] = 1;
    let mut reached = 0usize;
    for &c in coeffs {
        let c = c as usize;
        for v in (0..=reached).rev() {
            counts[v + c] += counts[v];
        }
        reached += c;
    }
    Ok(counts)
}

/// Right-hand-side term of a uniqueness constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhsTerm {
    /// `coef · y_var`
    Linear(i64, usize),
    /// `coef · y_a · y_b`
    Quadratic(i64, (usize, usize)),
}

/// `Σ lhs ≥ Σ rhs` over the binary variables of one encoded integer, with
/// 0-based variable indices inside the variable's block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub lhs: Vec<(i64, usize)>,
    pub relation: String,
    pub rhs: Vec<RhsTerm>,
}

impl Constraint {
    fn ge(lhs: Vec<(i64, usize)>, rhs: Vec<RhsTerm>) -> Self {
        Constraint {
            lhs,
            relation: ">=".to_string(),
            rhs,
        }
    }

    pub fn is_satisfied(&self, y: &[u8]) -> bool {
        let lhs: i64 = self.lhs.iter().map(|&(c, v)| c * i64::from(y[v])).sum();
        let rhs: i64 = self
            .rhs
            .iter()
            .map(|t| match *t {
                RhsTerm::Linear(c, v) => c * i64::from(y[v]),
                RhsTerm::Quadratic(c, (a, b)) => c * i64::from(y[a] * y[b]),
            })
            .sum();
        lhs >= rhs
    }
}

/// Linear constraints on the binary variables of a bounded-coefficient
/// encoding under which every value in `{0, …, κ}` has exactly one code word:
///
/// * the binary prefix must cover `2^ρ − μ` before the first `μ` is used,
/// * the `μ` copies (and the residual) switch on in order,
/// * the prefix must cover `2^ρ − c_d` before the last coefficient is used;
///   when that amount exceeds `μ` it is split as
///   `μ·y_{d−1}y_d + (2^ρ − μ − c_d)·y_d`.
pub fn uniqueness_constraints(enc: &VarEncoding) -> Result<Vec<Constraint>> {
    let (construction, mu) = match (enc.construction, enc.mu) {
        (Some(c), Some(mu)) if c.eta >= 1 => (c, mu),
        _ => {
            return Err(Error::UnsupportedEncoding(
                "uniqueness constraints need a bounded-coefficient encoding with at least one \
                 repeated μ coefficient"
                    .into(),
            ))
        }
    };
    let c = &enc.coeffs;
    let rho = construction.rho as usize;
    let d = c.len();
    let pow = 1i64 << rho;
    let mu = mu as i64;
    let prefix: Vec<(i64, usize)> = (0..rho).map(|j| (c[j] as i64, j)).collect();

    let mut out = vec![Constraint::ge(
        prefix.clone(),
        vec![RhsTerm::Linear(pow - mu, rho)],
    )];
    for i in rho..d - 1 {
        out.push(Constraint::ge(vec![(1, i)], vec![RhsTerm::Linear(1, i + 1)]));
    }
    let last = d - 1;
    let cd = c[last] as i64;
    let rhs = if pow - cd > mu {
        vec![
            RhsTerm::Quadratic(mu, (last - 1, last)),
            RhsTerm::Linear(pow - mu - cd, last),
        ]
    } else {
        vec![RhsTerm::Linear(pow - cd, last)]
    };
    out.push(Constraint::ge(prefix, rhs));
    Ok(out)
}

/// Encodings for every variable of a problem, in problem order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntEncoding {
    vars: Vec<VarEncoding>,
}

impl IntEncoding {
    pub fn new(vars: Vec<VarEncoding>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::domain("an encoding needs at least one variable"));
        }
        Ok(IntEncoding { vars })
    }

    /// Encodes every variable of `problem` with `scheme`. Bounded encodings
    /// take per-variable bounds from `mu`; bounds above `κ_i` are clamped
    /// to `κ_i`.
    pub fn for_problem(problem: &UiqpProblem, scheme: Scheme, mu: Option<&[u64]>) -> Result<Self> {
        let kappa = problem.kappa();
        let vars = match scheme {
            Scheme::Bounded => {
                let mu = mu.ok_or_else(|| {
                    Error::domain("the bounded encoding needs coefficient bounds")
                })?;
                if mu.len() != kappa.len() {
                    return Err(Error::shape(format!(
                        "{} coefficient bounds for {} variables",
                        mu.len(),
                        kappa.len()
                    )));
                }
                kappa
                    .iter()
                    .zip(mu)
                    .map(|(&k, &m)| bounded_coefficient(k, m.min(k)))
                    .collect::<Result<Vec<_>>>()?
            }
            Scheme::Binary => kappa
                .iter()
                .map(|&k| VarEncoding::from_coefficients(binary_encoding(k)?))
                .collect::<Result<Vec<_>>>()?,
            Scheme::Unary => kappa
                .iter()
                .map(|&k| VarEncoding::from_coefficients(unary_encoding(k)?))
                .collect::<Result<Vec<_>>>()?,
        };
        IntEncoding::new(vars)
    }

    pub fn vars(&self) -> &[VarEncoding] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Total number of binary (or spin) variables.
    pub fn total_width(&self) -> usize {
        self.vars.iter().map(VarEncoding::width).sum()
    }

    /// Start offset of each variable's block in the flattened bit vector.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.vars
            .iter()
            .map(|v| {
                let start = acc;
                acc += v.width();
                start
            })
            .collect()
    }

    /// Block-diagonal encoding matrix `C` (`n × Σ d_i`).
    pub fn encoding_matrix(&self) -> Vec<Vec<u64>> {
        let total = self.total_width();
        let offsets = self.offsets();
        self.vars
            .iter()
            .zip(offsets)
            .map(|(v, start)| {
                let mut row = vec![0u64; total];
                row[start..start + v.width()].copy_from_slice(&v.coeffs);
                row
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let file = EncodingFile {
            coefficients: self.vars.iter().map(|v| v.coeffs.clone()).collect(),
        };
        to_canonical_json(&file)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EncodingFile = serde_json::from_str(text)?;
        IntEncoding::new(
            file.coefficients
                .into_iter()
                .map(VarEncoding::from_coefficients)
                .collect::<Result<Vec<_>>>()?,
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
struct EncodingFile {
    coefficients: Vec<Vec<u64>>,
}
