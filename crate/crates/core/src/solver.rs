//! Exact ground states by exhaustive enumeration.
//!
//! Spin vectors are visited in Gray-code order so that each step flips one
//! spin and updates the energy through its local field. Candidates within a
//! widened window of the running minimum are kept and re-evaluated exactly
//! at the end, so the result does not depend on how the search was split
//! across threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{IsingModel, Spin, UiqpProblem};

pub const MAX_SPINS: usize = 30;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const MAX_GRID_POINTS: u128 = 2_000_000;

/// Flips between exact recomputations of energy and local fields.
const RESYNC_INTERVAL: u64 = 1024;
/// Spins left to the sequential Gray-code walk inside one partition.
const INNER_BITS: usize = 12;
const MAX_PARTITION_BITS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundStateResult {
    pub degeneracy: usize,
    pub energy: f64,
    /// Argmin spin vectors, sorted lexicographically with `-1 < +1`.
    pub states: Vec<Vec<Spin>>,
    pub tolerance: f64,
}

impl GroundStateResult {
    pub fn to_json(&self) -> String {
        crate::model::to_canonical_json(self)
    }
}

struct Dense {
    n: usize,
    h: Vec<f64>,
    j: Vec<f64>,
}

impl Dense {
    fn new(m: &IsingModel) -> Self {
        let n = m.num_spins();
        let mut j = vec![0.0; n * n];
        for (&(a, b), &v) in m.couplers() {
            j[a * n + b] = v;
            j[b * n + a] = v;
        }
        Dense {
            n,
            h: m.h().to_vec(),
            j,
        }
    }

    fn spin(bits: u32, k: usize) -> f64 {
        if bits >> k & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    fn fields(&self, bits: u32) -> Vec<f64> {
        (0..self.n)
            .map(|k| {
                let row = &self.j[k * self.n..(k + 1) * self.n];
                self.h[k] + (0..self.n).map(|l| row[l] * Self::spin(bits, l)).sum::<f64>()
            })
            .collect()
    }
}

fn to_spins(bits: u32, n: usize) -> Vec<Spin> {
    (0..n).map(|k| if bits >> k & 1 == 1 { 1 } else { -1 }).collect()
}

/// Walks all settings of the low `inner` bits with the high bits fixed to
/// `prefix`, returning every state whose running energy came within
/// `window` of the running minimum.
fn scan_partition(
    m: &IsingModel,
    d: &Dense,
    inner: usize,
    prefix: u32,
    window: f64,
) -> Vec<u32> {
    let mut bits = prefix << inner;
    let mut energy = m.evaluate_unchecked(&to_spins(bits, d.n));
    let mut fields = d.fields(bits);
    let mut best = energy;
    let mut cands: Vec<(u32, f64)> = vec![(bits, energy)];
    let mut prune_at = 64usize;

    for step in 1..(1u64 << inner) {
        let k = step.trailing_zeros() as usize;
        let s_old = Dense::spin(bits, k);
        energy -= 2.0 * s_old * fields[k];
        bits ^= 1 << k;
        let delta = -2.0 * s_old;
        let row = &d.j[k * d.n..(k + 1) * d.n];
        for (f, &jv) in fields.iter_mut().zip(row) {
            *f += jv * delta;
        }
        if step % RESYNC_INTERVAL == 0 {
            energy = m.evaluate_unchecked(&to_spins(bits, d.n));
            fields = d.fields(bits);
        }
        if energy < best {
            best = energy;
        }
        if energy <= best + window {
            cands.push((bits, energy));
            if cands.len() >= prune_at {
                cands.retain(|&(_, e)| e <= best + window);
                prune_at = 2 * cands.len() + 64;
            }
        }
    }
    cands
        .into_iter()
        .filter(|&(_, e)| e <= best + window)
        .map(|(b, _)| b)
        .collect()
}

/// All spin vectors whose energy lies within `tol` of the minimum.
pub fn ground_states(m: &IsingModel, tol: f64) -> Result<GroundStateResult> {
    let n = m.num_spins();
    if n > MAX_SPINS {
        return Err(Error::Capacity(format!(
            "{n} spins exceed the exact-solver limit of {MAX_SPINS}; reduce the problem size or use smaller κ"
        )));
    }
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::domain(format!("tolerance must be finite and ≥ 0, got {tol}")));
    }
    let d = Dense::new(m);
    let scale: f64 = m.h().iter().map(|v| v.abs()).sum::<f64>()
        + m.couplers().values().map(|v| v.abs()).sum::<f64>()
        + m.offset().abs();
    let window = tol + 1e-10 * scale + f64::MIN_POSITIVE;

    let outer = n.saturating_sub(INNER_BITS).min(MAX_PARTITION_BITS);
    let inner = n - outer;
    let cands: Vec<u32> = (0..1u32 << outer)
        .into_par_iter()
        .map(|prefix| scan_partition(m, &d, inner, prefix, window))
        .flatten()
        .collect();

    let exact: Vec<(Vec<Spin>, f64)> = cands
        .into_iter()
        .map(|b| {
            let s = to_spins(b, n);
            let e = m.evaluate_unchecked(&s);
            (s, e)
        })
        .collect();
    let energy = exact
        .iter()
        .map(|(_, e)| *e)
        .fold(f64::INFINITY, f64::min);
    let mut states: Vec<Vec<Spin>> = exact
        .into_iter()
        .filter(|(_, e)| *e <= energy + tol)
        .map(|(s, _)| s)
        .collect();
    states.sort();
    states.dedup();
    Ok(GroundStateResult {
        degeneracy: states.len(),
        energy,
        states,
        tolerance: tol,
    })
}

/// Minimum of `f` over the whole integer box and every point within `1e-9`
/// of it, in lexicographic order.
pub fn brute_force_uiqp(p: &UiqpProblem) -> Result<(f64, Vec<Vec<u64>>)> {
    let size = p
        .kappa()
        .iter()
        .try_fold(1u128, |acc, &k| acc.checked_mul(k as u128 + 1))
        .filter(|&s| s <= MAX_GRID_POINTS)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "integer box exceeds {MAX_GRID_POINTS} points; use smaller κ"
            ))
        })?;
    let mut x = vec![0u64; p.n()];
    let mut values = Vec::with_capacity(size as usize);
    for _ in 0..size {
        values.push(p.evaluate_unchecked(&x));
        advance(&mut x, p.kappa());
    }
    let energy = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut argmin = Vec::new();
    x.iter_mut().for_each(|v| *v = 0);
    for &v in &values {
        if v <= energy + DEFAULT_TOL {
            argmin.push(x.clone());
        }
        advance(&mut x, p.kappa());
    }
    Ok((energy, argmin))
}

/// Lexicographic odometer step, last variable fastest.
fn advance(x: &mut [u64], kappa: &[u64]) {
    for i in (0..x.len()).rev() {
        if x[i] < kappa[i] {
            x[i] += 1;
            return;
        }
        x[i] = 0;
    }
}
