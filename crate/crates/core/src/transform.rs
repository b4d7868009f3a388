//! Substitution of encoded integers into a [`UiqpProblem`].
//!
//! With `x = ½(κ + Cs)` the objective becomes an Ising model; with `x = Cy`
//! it becomes a QUBO. Coefficients that evaluate to exactly zero are not
//! stored, so every ratio below ranges over appearing coefficients only.

use serde::Serialize;

use crate::encodings::{self, IntEncoding};
use crate::error::{Error, Result};
use crate::model::{IsingModel, QuboModel, Spin, UiqpProblem};
use crate::bounds::qubo_linear_coefficient;

/// Relative slack applied when comparing a computed ratio against a
/// threshold, absorbing rounding in the products `½ Q_ij c_k c_l`.
pub const RATIO_SLACK: f64 = 1e-12;

/// Largest local field magnitude a scaled model may carry without being
/// flagged.
pub const FIELD_RANGE: f64 = 2.0;

/// `(variable, coefficient)` for every spin or bit, in encoding order.
fn spin_layout(enc: &IntEncoding) -> Vec<(usize, u64)> {
    enc.vars()
        .iter()
        .enumerate()
        .flat_map(|(i, v)| v.coefficients().iter().map(move |&c| (i, c)))
        .collect()
}

fn check_covers(p: &UiqpProblem, enc: &IntEncoding) -> Result<()> {
    if enc.num_vars() != p.n() {
        return Err(Error::shape(format!(
            "encoding covers {} variables, problem has {}",
            enc.num_vars(),
            p.n()
        )));
    }
    Ok(())
}

fn check_sums(p: &UiqpProblem, enc: &IntEncoding) -> Result<()> {
    check_covers(p, enc)?;
    for (i, (v, &k)) in enc.vars().iter().zip(p.kappa()).enumerate() {
        if v.kappa() != k {
            return Err(Error::EncodingMismatch(format!(
                "coefficients of variable {i} sum to {}, but κ = {k}",
                v.kappa()
            )));
        }
    }
    Ok(())
}

/// Ising model whose energy at the spins of an encoded `x` equals `f(x)`.
pub fn uiqp_to_ising(p: &UiqpProblem, enc: &IntEncoding) -> Result<IsingModel> {
    check_sums(p, enc)?;
    let q = p.quad();
    let fields = p.local_field_vector();
    let layout = spin_layout(enc);

    let h: Vec<f64> = layout
        .iter()
        .map(|&(i, c)| 0.5 * fields[i] * c as f64)
        .collect();
    let mut couplers = Vec::new();
    for (a, &(i, ca)) in layout.iter().enumerate() {
        for (b, &(j, cb)) in layout.iter().enumerate().skip(a + 1) {
            let v = 0.5 * q[i][j] * (ca as f64 * cb as f64);
            if v != 0.0 {
                couplers.push(((a, b), v));
            }
        }
    }

    let kappa: Vec<f64> = p.kappa().iter().map(|&k| k as f64).collect();
    let mut quad_form = 0.0;
    for (i, row) in q.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            quad_form += kappa[i] * v * kappa[j];
        }
    }
    let diag: f64 = layout
        .iter()
        .map(|&(i, c)| q[i][i] * (c as f64 * c as f64))
        .sum();
    let lin: f64 = p.linear().iter().zip(&kappa).map(|(a, b)| a * b).sum();
    let offset = 0.25 * (quad_form + diag + 2.0 * lin);

    IsingModel::new(h, couplers, offset)
}

/// QUBO whose energy at `y` equals `f(Cy)`. The encoding need not be
/// κ-complete.
pub fn uiqp_to_qubo(p: &UiqpProblem, enc: &IntEncoding) -> Result<QuboModel> {
    check_covers(p, enc)?;
    let q = p.quad();
    let layout = spin_layout(enc);
    let qb: Vec<Vec<f64>> = layout
        .iter()
        .enumerate()
        .map(|(a, &(i, ca))| {
            layout
                .iter()
                .enumerate()
                .map(|(b, &(j, cb))| {
                    if a == b {
                        qubo_linear_coefficient(q[i][i], p.linear()[i], ca)
                    } else {
                        q[i][j] * (ca as f64 * cb as f64)
                    }
                })
                .collect()
        })
        .collect();
    QuboModel::new(qb, 0.0)
}

/// `x_i = ½(κ_i + Σ_j c_j s_j)`, evaluated as the sum of coefficients whose
/// spin is `+1`.
pub fn decode_spins(enc: &IntEncoding, s: &[Spin]) -> Result<Vec<u64>> {
    if s.len() != enc.total_width() {
        return Err(Error::shape(format!(
            "spin vector has length {}, encoding width is {}",
            s.len(),
            enc.total_width()
        )));
    }
    if let Some(k) = s.iter().position(|&v| v != 1 && v != -1) {
        return Err(Error::domain(format!("s[{k}] = {} is not a spin value", s[k])));
    }
    let y: Vec<u8> = s.iter().map(|&v| u8::from(v == 1)).collect();
    decode_binaries(enc, &y)
}

/// `x = Cy`, block by block.
pub fn decode_binaries(enc: &IntEncoding, y: &[u8]) -> Result<Vec<u64>> {
    if y.len() != enc.total_width() {
        return Err(Error::shape(format!(
            "binary vector has length {}, encoding width is {}",
            y.len(),
            enc.total_width()
        )));
    }
    let mut rest = y;
    enc.vars()
        .iter()
        .map(|v| {
            let (block, tail) = rest.split_at(v.width());
            rest = tail;
            encodings::decode(v.coefficients(), block)
        })
        .collect()
}

/// Divides every coefficient and the offset by `max |J_ij|` (by `max |h_i|`
/// when there are no couplers). Argmin sets are unchanged.
pub fn scale_ising(m: &IsingModel) -> IsingModel {
    let max_abs = |it: &mut dyn Iterator<Item = f64>| it.map(f64::abs).fold(0.0, f64::max);
    let mut factor = max_abs(&mut m.couplers().values().copied());
    if factor == 0.0 {
        factor = max_abs(&mut m.h().iter().copied());
    }
    if factor == 0.0 || factor == 1.0 {
        return m.clone();
    }
    let scaled = m.map_values(|_, v| v / factor, |_, v| v / factor, |o| o / factor);
    if scaled.h().iter().any(|v| v.abs() > FIELD_RANGE) {
        log::warn!("scaled model has local fields outside [-{FIELD_RANGE}, {FIELD_RANGE}]");
    }
    scaled
}

/// Magnitude extremes and ratios of the linear and quadratic coefficients
/// of a model. An empty category reports ratio 1 and sets its `*_empty`
/// flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformReport {
    pub min_h: Option<f64>,
    pub max_h: Option<f64>,
    #[serde(rename = "min_J")]
    pub min_j: Option<f64>,
    #[serde(rename = "max_J")]
    pub max_j: Option<f64>,
    pub ratio_h: f64,
    #[serde(rename = "ratio_J")]
    pub ratio_j: f64,
    pub h_empty: bool,
    #[serde(rename = "J_empty")]
    pub j_empty: bool,
    /// Some `|h_i|` exceeds [`FIELD_RANGE`].
    pub h_out_of_range: bool,
    pub num_spins: usize,
    pub num_couplers: usize,
}

impl TransformReport {
    fn build(
        linear: impl IntoIterator<Item = f64>,
        quadratic: impl IntoIterator<Item = f64>,
        num_spins: usize,
        num_couplers: usize,
    ) -> Self {
        let extremes = |vals: Vec<f64>| {
            let nz: Vec<f64> = vals.into_iter().filter(|v| *v != 0.0).map(f64::abs).collect();
            if nz.is_empty() {
                return (None, None, 1.0, true);
            }
            let lo = nz.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = nz.iter().copied().fold(0.0, f64::max);
            (Some(lo), Some(hi), lo / hi, false)
        };
        let (min_h, max_h, ratio_h, h_empty) = extremes(linear.into_iter().collect());
        let (min_j, max_j, ratio_j, j_empty) = extremes(quadratic.into_iter().collect());
        TransformReport {
            min_h,
            max_h,
            min_j,
            max_j,
            ratio_h,
            ratio_j,
            h_empty,
            j_empty,
            h_out_of_range: max_h.is_some_and(|v| v > FIELD_RANGE),
            num_spins,
            num_couplers,
        }
    }

    /// Both ratios reach their thresholds up to [`RATIO_SLACK`].
    pub fn meets(&self, epsilon_l: f64, epsilon_c: f64) -> bool {
        self.ratio_h >= epsilon_l * (1.0 - RATIO_SLACK)
            && self.ratio_j >= epsilon_c * (1.0 - RATIO_SLACK)
    }
}

pub fn ising_ratios(m: &IsingModel) -> TransformReport {
    TransformReport::build(
        m.h().iter().copied(),
        m.couplers().values().copied(),
        m.num_spins(),
        m.couplers().values().filter(|v| **v != 0.0).count(),
    )
}

/// Ratios of a QUBO: the diagonal plays the role of `h`, the strict upper
/// triangle that of `J`.
pub fn qubo_ratios(m: &QuboModel) -> TransformReport {
    let qb = m.matrix();
    let n = m.num_bits();
    let upper: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| qb[i][j]))
        .collect();
    let count = upper.iter().filter(|v| **v != 0.0).count();
    TransformReport::build((0..n).map(|i| qb[i][i]), upper, n, count)
}
