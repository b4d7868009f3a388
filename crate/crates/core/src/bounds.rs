//! Per-variable coefficient bounds `μ_i` derived from precision thresholds.
//!
//! For the spin (Ising) target every local field of variable `i` is
//! `½ [Qκ+q]_i c_j` and every coupler is `½ Q_ij c_k c_l`, so the field and
//! coupler ratios are met when
//!
//! ```text
//! μ_i      ≤ m_l / (|[Qκ+q]_i| ε_l)
//! μ_i      ≤ √(m_c / (|Q_ii| ε_c))
//! μ_i μ_j  ≤ m_c / (|Q_ij| ε_c)
//! ```
//!
//! The first two bounds initialize `μ`; a greedy loop then lowers one side of
//! the most violated pair at a time, picking the side whose estimated
//! combined width `κ_i/μ_i + κ_j/μ_j` grows less.
//!
//! For the binary (QUBO) target the linear coefficient of bit `c` is
//! `Q_ii c² + q_i c`, which need not be monotone in `c`; see
//! [`find_mu_qubo`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::UiqpProblem;

/// Required minimum ratios of smallest to largest coefficient magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub epsilon_l: f64,
    pub epsilon_c: f64,
}

impl PrecisionConfig {
    pub fn new(epsilon_l: f64, epsilon_c: f64) -> Result<Self> {
        for (name, v) in [("epsilon_l", epsilon_l), ("epsilon_c", epsilon_c)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::domain(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        Ok(PrecisionConfig {
            epsilon_l,
            epsilon_c,
        })
    }
}

/// Update rule used when the linear-term adjustment raises a minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearAdjustRule {
    /// `μ_k ← μ_k − 1`.
    #[default]
    Decrement,
    /// `μ_k ← c_min − 1`, dropping the minimizing coefficient at once.
    BelowMinimizer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjustBranch {
    /// Lowered `μ` to remove the smallest linear coefficient.
    RaiseMin,
    /// Lowered `μ` to remove the largest linear coefficient.
    LowerMax,
}

/// One step of a greedy bound-lowering loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceStep {
    /// A coupler pair violated `μ_i μ_j ≤ m_c / (|Q_ij| ε_c)`. `xi_i`/`xi_j`
    /// are the width estimates after lowering `μ_i`/`μ_j` (absent when that
    /// option was unavailable because the bound was already 1).
    Pair {
        pair: (usize, usize),
        xi_i: Option<f64>,
        xi_j: Option<f64>,
        lowered: usize,
        new_mu: u64,
    },
    /// The linear-term ratio was violated.
    Linear {
        branch: AdjustBranch,
        index: usize,
        new_mu: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuResult {
    pub m_c: Option<f64>,
    pub m_l: Option<f64>,
    pub mu: Vec<u64>,
    pub trace: Vec<TraceStep>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl MuResult {
    pub fn to_json(&self) -> String {
        crate::model::to_canonical_json(self)
    }
}

fn min_nonzero_abs(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    values
        .into_iter()
        .filter(|v| *v != 0.0)
        .map(f64::abs)
        .min_by(f64::total_cmp)
}

/// Smallest nonzero magnitude among `Q_ii` and `Q_ij` (`i < j`).
fn coupler_minimum(p: &UiqpProblem) -> Option<f64> {
    let q = p.quad();
    let n = p.n();
    min_nonzero_abs((0..n).flat_map(|i| (i..n).map(move |j| q[i][j])))
}

/// `(m_l, m_c)` for the spin target: the smallest nonzero magnitudes of
/// `Qκ + q` and of the entries of `Q`.
pub fn compute_ml_mc_spin(p: &UiqpProblem) -> Result<(f64, f64)> {
    let m_l = min_nonzero_abs(p.local_field_vector())
        .ok_or_else(|| Error::Structural("every entry of Qκ + q is zero".into()))?;
    let m_c = coupler_minimum(p).ok_or_else(|| Error::Structural("no quadratic terms".into()))?;
    Ok((m_l, m_c))
}

/// True when the unencoded problem (every `μ_i = 1`) already meets both
/// ratio conditions.
pub fn spin_preconditions_hold(p: &UiqpProblem, cfg: &PrecisionConfig) -> bool {
    let fields = p.local_field_vector();
    let fields_ok = match min_nonzero_abs(fields.iter().copied()) {
        Some(m_l) => fields.iter().all(|f| m_l >= f.abs() * cfg.epsilon_l),
        None => true,
    };
    let q = p.quad();
    let couplers_ok = match coupler_minimum(p) {
        Some(m_c) => q.iter().flatten().all(|v| m_c >= v.abs() * cfg.epsilon_c),
        None => true,
    };
    fields_ok && couplers_ok
}

fn floor_bound(bound: f64, kappa: u64, index: usize, warnings: &mut Vec<String>) -> u64 {
    if bound.is_infinite() {
        return kappa;
    }
    let v = bound.floor();
    if v < 1.0 {
        warnings.push(format!(
            "bound for variable {index} floors to {v}; clamped to 1"
        ));
        1
    } else if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v as u64
    }
}

/// Greedy loop enforcing `μ_i μ_j ≤ m_c / (|Q_ij| ε_c)` on every pair with
/// `Q_ij ≠ 0`. The most violated pair (lowest `(i, j)` on ties) is handled
/// first; the side whose width estimate grows less is lowered, `i` on ties.
fn enforce_pair_bounds(
    p: &UiqpProblem,
    m_c: f64,
    epsilon_c: f64,
    mu: &mut [u64],
    trace: &mut Vec<TraceStep>,
) -> Result<()> {
    let q = p.quad();
    let kappa = p.kappa();
    let n = p.n();
    let pairs: Vec<((usize, usize), f64)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| q[i][j] != 0.0)
        .map(|(i, j)| ((i, j), m_c / q[i][j].abs() / epsilon_c))
        .collect();

    loop {
        let mut worst: Option<((usize, usize), f64)> = None;
        for &((i, j), bound) in &pairs {
            let excess = mu[i] as f64 * mu[j] as f64 - bound;
            if excess > 0.0 && worst.is_none_or(|(_, w)| excess > w) {
                worst = Some(((i, j), excess));
            }
        }
        let Some(((i, j), _)) = worst else {
            return Ok(());
        };
        let (ki, kj) = (kappa[i] as f64, kappa[j] as f64);
        let (mi, mj) = (mu[i] as f64, mu[j] as f64);
        let xi_i = (mu[i] > 1).then(|| ki / (mi - 1.0) + kj / mj);
        let xi_j = (mu[j] > 1).then(|| ki / mi + kj / (mj - 1.0));
        let lowered = match (xi_i, xi_j) {
            (None, None) => {
                return Err(Error::Infeasible(format!(
                    "pair ({i}, {j}) violates its coupler bound with both μ at 1"
                )))
            }
            (Some(_), None) => i,
            (None, Some(_)) => j,
            (Some(a), Some(b)) => {
                if a <= b {
                    i
                } else {
                    j
                }
            }
        };
        mu[lowered] -= 1;
        trace.push(TraceStep::Pair {
            pair: (i, j),
            xi_i,
            xi_j,
            lowered,
            new_mu: mu[lowered],
        });
    }
}

/// Coefficient bounds for the spin target.
pub fn find_mu_spin(p: &UiqpProblem, cfg: &PrecisionConfig) -> Result<MuResult> {
    let fields = p.local_field_vector();
    let m_l = min_nonzero_abs(fields.iter().copied());
    let m_c = coupler_minimum(p);
    if m_l.is_none() && m_c.is_none() {
        return Err(Error::Structural("objective is constant".into()));
    }
    let q = p.quad();
    let mut warnings = Vec::new();
    let mut mu: Vec<u64> = (0..p.n())
        .map(|i| {
            let mut bound = f64::INFINITY;
            if let (Some(m_l), true) = (m_l, fields[i] != 0.0) {
                bound = bound.min(m_l / fields[i].abs() / cfg.epsilon_l);
            }
            if let (Some(m_c), true) = (m_c, q[i][i] != 0.0) {
                bound = bound.min((m_c / q[i][i].abs() / cfg.epsilon_c).sqrt());
            }
            floor_bound(bound, p.kappa()[i], i, &mut warnings)
        })
        .collect();
    let mut trace = Vec::new();
    if let Some(m_c) = m_c {
        enforce_pair_bounds(p, m_c, cfg.epsilon_c, &mut mu, &mut trace)?;
    }
    Ok(MuResult {
        m_c,
        m_l,
        mu,
        trace,
        warnings,
    })
}

/// Closed-form bounds `⌊m_l / (|q_i| ε_l)⌋` for a purely linear objective.
/// Variables with `q_i = 0` are unconstrained and get `μ_i = κ_i`.
pub fn find_mu_linear_only(linear: &[f64], kappa: &[u64], epsilon_l: f64) -> Result<MuResult> {
    if linear.len() != kappa.len() {
        return Err(Error::shape("q and kappa differ in length"));
    }
    if !(epsilon_l > 0.0 && epsilon_l <= 1.0) {
        return Err(Error::domain(format!("epsilon_l must lie in (0, 1], got {epsilon_l}")));
    }
    let m_l = min_nonzero_abs(linear.iter().copied())
        .ok_or_else(|| Error::Structural("objective is constant".into()))?;
    let mut warnings = Vec::new();
    let mu = linear
        .iter()
        .zip(kappa)
        .enumerate()
        .map(|(i, (&qi, &k))| {
            let bound = if qi == 0.0 {
                f64::INFINITY
            } else {
                m_l / qi.abs() / epsilon_l
            };
            floor_bound(bound, k, i, &mut warnings)
        })
        .collect();
    Ok(MuResult {
        m_c: None,
        m_l: Some(m_l),
        mu,
        trace: Vec::new(),
        warnings,
    })
}

/// Common bound `min_i μ_i` for encodings that share one `μ`.
pub fn uniform_mu(mu: &[u64]) -> Result<u64> {
    mu.iter()
        .copied()
        .min()
        .ok_or_else(|| Error::domain("no coefficient bounds given"))
}

/// Bounds meeting the quadratic-term ratio of the binary target:
/// `μ_i ≤ √(m_c / (|Q_ii| ε_c))` and the pair bounds.
pub fn find_mu_qubo_quadratic(p: &UiqpProblem, cfg: &PrecisionConfig) -> Result<MuResult> {
    let m_c = coupler_minimum(p).ok_or_else(|| Error::Structural("no quadratic terms".into()))?;
    let q = p.quad();
    let mut warnings = Vec::new();
    let mut mu: Vec<u64> = (0..p.n())
        .map(|i| {
            let bound = if q[i][i] == 0.0 {
                f64::INFINITY
            } else {
                (m_c / q[i][i].abs() / cfg.epsilon_c).sqrt()
            };
            floor_bound(bound, p.kappa()[i], i, &mut warnings)
        })
        .collect();
    let mut trace = Vec::new();
    enforce_pair_bounds(p, m_c, cfg.epsilon_c, &mut mu, &mut trace)?;
    Ok(MuResult {
        m_c: Some(m_c),
        m_l: None,
        mu,
        trace,
        warnings,
    })
}

/// Linear coefficient `Q_ii c² + q_i c` of a bit with encoding coefficient
/// `c`. Shared with the QUBO builder so ratios are computed from identical
/// floating-point values.
pub fn qubo_linear_coefficient(qii: f64, qi: f64, c: u64) -> f64 {
    let c = c as f64;
    qii * (c * c) + qi * c
}

/// Where the smallest nonzero linear coefficient of a variable occurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MinClass {
    /// At `c = 2` (the coefficient vanishes at `c = 1`).
    AtTwo,
    /// At `c = 1`.
    AtOne,
    /// At `⌊−q/Q⌋` or `⌈−q/Q⌉`.
    NearRoot,
}

/// Where the largest linear coefficient of a variable occurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MaxClass {
    /// At `c = μ`.
    AtMu,
    /// At `μ` or at `round(−q / 2Q)`.
    MuOrVertex,
}

/// Index sets `𝓘₀ᵐ, 𝓘₁ᵐ, 𝓘₂ᵐ` and `𝓘₁ᴹ, 𝓘₂ᴹ`, each sorted ascending.
/// Variables whose linear coefficients vanish identically (`Q_ii = q_i = 0`)
/// belong to none of them; variables with `Q_ii = 0` have monotone
/// coefficients and fall in `𝓘₁ᵐ` and `𝓘₁ᴹ`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IndexSets {
    pub min_at_two: Vec<usize>,
    pub min_at_one: Vec<usize>,
    pub min_near_root: Vec<usize>,
    pub max_at_mu: Vec<usize>,
    pub max_mu_or_vertex: Vec<usize>,
}

fn classify_one(qii: f64, qi: f64, mu: u64) -> Option<(MinClass, MaxClass)> {
    if qii == 0.0 {
        return (qi != 0.0).then_some((MinClass::AtOne, MaxClass::AtMu));
    }
    if qi != 0.0 && qii.signum() == qi.signum() {
        return Some((MinClass::AtOne, MaxClass::AtMu));
    }
    // opposite signs (or q_i = 0): the coefficient vanishes at c = −q/Q ≥ 0
    let root = -qi / qii;
    let min = if root == 1.0 {
        MinClass::AtTwo
    } else if root < 1.0 || (mu as f64) < root.floor() || root.fract() == 0.0 {
        MinClass::AtOne
    } else {
        MinClass::NearRoot
    };
    let vertex = root / 2.0;
    let max = if vertex < 0.5 || (mu as f64) <= vertex.round() {
        MaxClass::AtMu
    } else {
        MaxClass::MuOrVertex
    };
    Some((min, max))
}

pub fn classify_indices(p: &UiqpProblem, mu: &[u64]) -> Result<IndexSets> {
    if mu.len() != p.n() {
        return Err(Error::shape("one coefficient bound per variable is required"));
    }
    if mu.contains(&0) {
        return Err(Error::domain("coefficient bounds must be ≥ 1"));
    }
    let q = p.quad();
    let mut sets = IndexSets::default();
    for i in 0..p.n() {
        let Some((min, max)) = classify_one(q[i][i], p.linear()[i], mu[i]) else {
            continue;
        };
        match min {
            MinClass::AtTwo => sets.min_at_two.push(i),
            MinClass::AtOne => sets.min_at_one.push(i),
            MinClass::NearRoot => sets.min_near_root.push(i),
        }
        match max {
            MaxClass::AtMu => sets.max_at_mu.push(i),
            MaxClass::MuOrVertex => sets.max_mu_or_vertex.push(i),
        }
    }
    Ok(sets)
}

/// `(value, c, variable)`: an extreme linear coefficient magnitude, the
/// encoding coefficient where it occurs, and the variable index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extreme {
    pub value: f64,
    pub at: u64,
    pub index: usize,
}

/// Per-variable minimum (`vᵐ`) and maximum (`vᴹ`) linear coefficient
/// magnitudes over `c ∈ {1, …, μ_i}`, in variable order. Variables without
/// any nonzero linear coefficient are omitted.
pub fn build_vm_vmax(p: &UiqpProblem, mu: &[u64]) -> Result<(Vec<Extreme>, Vec<Extreme>)> {
    let sets = classify_indices(p, mu)?;
    let q = p.quad();
    let mut vmin = Vec::new();
    let mut vmax = Vec::new();
    let value = |i: usize, c: u64| qubo_linear_coefficient(q[i][i], p.linear()[i], c).abs();
    for i in 0..p.n() {
        let (qii, qi) = (q[i][i], p.linear()[i]);
        let Some((min_class, max_class)) = classify_one(qii, qi, mu[i]) else {
            continue;
        };
        debug_assert!(sets.min_at_one.contains(&i) == (min_class == MinClass::AtOne));
        let root = -qi / qii;
        let min_at = match min_class {
            MinClass::AtTwo if mu[i] >= 2 => Some(2),
            MinClass::AtTwo => None,
            MinClass::AtOne => Some(1),
            MinClass::NearRoot => {
                let lo = root.floor() as u64;
                let hi = root.ceil() as u64;
                let mut best = lo;
                if hi <= mu[i] && value(i, hi) < value(i, lo) {
                    best = hi;
                }
                Some(best)
            }
        };
        let max_at = match max_class {
            MaxClass::AtMu => mu[i],
            MaxClass::MuOrVertex => {
                let vertex = (root / 2.0).round() as u64;
                if value(i, vertex) >= value(i, mu[i]) {
                    vertex
                } else {
                    mu[i]
                }
            }
        };
        if let Some(at) = min_at {
            let v = value(i, at);
            if v != 0.0 {
                vmin.push(Extreme { value: v, at, index: i });
            }
        }
        let v = value(i, max_at);
        if v != 0.0 {
            vmax.push(Extreme {
                value: v,
                at: max_at,
                index: i,
            });
        }
    }
    Ok((vmin, vmax))
}

/// Lowers bounds until the linear-term ratio of the binary target holds for
/// every coefficient value `1..=μ_i` that could appear.
///
/// Each round the smallest and largest linear coefficient are located. When
/// the smallest sits near a root of `Q_ii c² + q_i c` and removing it gives a
/// better ratio than removing the largest, that variable's bound is lowered
/// to drop the minimizer; otherwise the bound of the variable holding the
/// largest coefficient is lowered, jumping below the parabola vertex when
/// the maximum sits there. Index sets are recomputed from the current bounds
/// every round.
pub fn adjust_mu_for_linear(
    p: &UiqpProblem,
    mu: &[u64],
    cfg: &PrecisionConfig,
    rule: LinearAdjustRule,
) -> Result<MuResult> {
    let mut mu = mu.to_vec();
    let mut trace = Vec::new();
    let q = p.quad();
    loop {
        let (mut vmin, mut vmax) = build_vm_vmax(p, &mu)?;
        if vmin.is_empty() || vmax.is_empty() {
            return Ok(MuResult {
                m_c: coupler_minimum(p),
                m_l: None,
                mu,
                trace,
                warnings: Vec::new(),
            });
        }
        vmin.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.index.cmp(&b.index)));
        vmax.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.index.cmp(&b.index)));
        let (lo, hi) = (vmin[0], vmax[0]);
        if lo.value / hi.value >= cfg.epsilon_l {
            return Ok(MuResult {
                m_c: coupler_minimum(p),
                m_l: Some(lo.value),
                mu,
                trace,
                warnings: Vec::new(),
            });
        }
        // a missing runner-up counts as unbounded
        let second = |v: &[Extreme]| v.get(1).map_or(f64::INFINITY, |e| e.value);
        let k = lo.index;
        let near_root = matches!(
            classify_one(q[k][k], p.linear()[k], mu[k]),
            Some((MinClass::NearRoot, _))
        );
        let (branch, index, new_mu) =
            if near_root && second(&vmin) * second(&vmax) > lo.value * hi.value {
                let new = match rule {
                    LinearAdjustRule::Decrement => mu[k].checked_sub(1),
                    LinearAdjustRule::BelowMinimizer => lo.at.checked_sub(1),
                };
                (AdjustBranch::RaiseMin, k, new)
            } else {
                let k = hi.index;
                let vertex_max = matches!(
                    classify_one(q[k][k], p.linear()[k], mu[k]),
                    Some((_, MaxClass::MuOrVertex))
                ) && hi.at != mu[k];
                let new = if vertex_max {
                    hi.at.checked_sub(1)
                } else {
                    mu[k].checked_sub(1)
                };
                (AdjustBranch::LowerMax, k, new)
            };
        let new_mu = match new_mu {
            Some(v) if v >= 1 => v,
            _ => {
                return Err(Error::Infeasible(format!(
                    "linear ratio needs μ of variable {index} below 1"
                )))
            }
        };
        if new_mu >= mu[index] {
            return Err(Error::Stalled(format!(
                "no progress lowering μ of variable {index} (trace has {} steps)",
                trace.len()
            )));
        }
        mu[index] = new_mu;
        trace.push(TraceStep::Linear {
            branch,
            index,
            new_mu,
        });
    }
}

/// True when every linear coefficient attains its minimum at `c = 1`, i.e.
/// `−q_i / Q_ii < 1` for all `i` (including `Q_ii = 0` or `q_i = 0`).
pub fn qubo_fast_path_applies(p: &UiqpProblem) -> bool {
    let q = p.quad();
    (0..p.n()).all(|i| {
        let (qii, qi) = (q[i][i], p.linear()[i]);
        qii == 0.0 || qi == 0.0 || qii.signum() == qi.signum() || -qi / qii < 1.0
    })
}

/// A variable with κ ≥ 2 holds a self-coupler of magnitude at least
/// `2|Q_ii|` for every μ ≥ 1, so `|Q_ii| > m_c/ε_c` can never be repaired.
fn check_diagonal_couplers(p: &UiqpProblem, cfg: &PrecisionConfig) -> Result<()> {
    let Some(m_c) = coupler_minimum(p) else {
        return Ok(());
    };
    let q = p.quad();
    for i in 0..p.n() {
        if p.kappa()[i] >= 2 && q[i][i] != 0.0 && m_c / q[i][i].abs() / cfg.epsilon_c < 1.0 {
            return Err(Error::Infeasible(format!(
                "self-coupling of variable {i} breaks the coupler ratio even at μ = 1"
            )));
        }
    }
    Ok(())
}

/// Coefficient bounds for the binary target.
///
/// When every linear coefficient is increasing in `c` the spin algorithm is
/// reused with initialization `⌊min(μ̃_i, √(m_c/(|Q_ii| ε_c)))⌋`, where `μ̃_i`
/// solves `|Q_ii| μ² + sgn(q_i Q_ii)|q_i| μ = m_l / ε_l`. Otherwise the
/// quadratic bounds are found first and then adjusted for the linear ratio.
pub fn find_mu_qubo(
    p: &UiqpProblem,
    cfg: &PrecisionConfig,
    rule: LinearAdjustRule,
) -> Result<MuResult> {
    check_diagonal_couplers(p, cfg)?;
    if !qubo_fast_path_applies(p) {
        let quad = find_mu_qubo_quadratic(p, cfg)?;
        let mut adjusted = adjust_mu_for_linear(p, &quad.mu, cfg, rule)?;
        let mut trace = quad.trace;
        trace.append(&mut adjusted.trace);
        adjusted.trace = trace;
        adjusted.warnings = quad.warnings;
        return Ok(adjusted);
    }

    let q = p.quad();
    let n = p.n();
    let m_l = min_nonzero_abs((0..n).map(|i| q[i][i] + p.linear()[i]));
    let m_c = coupler_minimum(p);
    if m_l.is_none() && m_c.is_none() {
        return Err(Error::Structural("objective is constant".into()));
    }
    let mut warnings = Vec::new();
    let mut mu: Vec<u64> = (0..n)
        .map(|i| {
            let (qii, qi) = (q[i][i], p.linear()[i]);
            let mut bound = f64::INFINITY;
            if let Some(m_l) = m_l {
                let target = m_l / cfg.epsilon_l;
                if qii != 0.0 {
                    let sign = if qi == 0.0 { 0.0 } else { (qi * qii).signum() };
                    bound = (-sign * qi.abs() + (qi * qi + 4.0 * qii.abs() * target).sqrt())
                        / (2.0 * qii.abs());
                } else if qi != 0.0 {
                    bound = target / qi.abs();
                }
            }
            // the c = 1 linear term always appears, so clamping would break the ratio
            if bound < 1.0 {
                return Err(Error::Infeasible(format!(
                    "linear term of variable {i} needs a coefficient bound of {bound:.4} < 1"
                )));
            }
            if let (Some(m_c), true) = (m_c, qii != 0.0) {
                bound = bound.min((m_c / qii.abs() / cfg.epsilon_c).sqrt());
            }
            Ok(floor_bound(bound, p.kappa()[i], i, &mut warnings))
        })
        .collect::<Result<_>>()?;
    let mut trace = Vec::new();
    if let Some(m_c) = m_c {
        enforce_pair_bounds(p, m_c, cfg.epsilon_c, &mut mu, &mut trace)?;
    }
    Ok(MuResult {
        m_c,
        m_l,
        mu,
        trace,
        warnings,
    })
}
