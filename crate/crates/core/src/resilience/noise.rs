use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::rng::{derive_seed, standard_normal, stream};
use crate::error::{Error, Result};
use crate::model::IsingModel;
use crate::solver::{ground_states, GroundStateResult, DEFAULT_TOL};

/// Which coefficients receive noise. Couplers absent from the model never
/// do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseTarget {
    #[default]
    FieldsAndCouplers,
    CouplersOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation of every perturbation.
    pub epsilon: f64,
    pub n_trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub target: NoiseTarget,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::domain(format!("epsilon must be ≥ 0, got {}", self.epsilon)));
        }
        if self.n_trials == 0 {
            return Err(Error::domain("n_trials must be ≥ 1"));
        }
        Ok(())
    }
}

/// Adds independent `N(0, ε)` draws to every `h_i` (ascending), then to every
/// stored coupler (ascending by `(i, j)`). The offset is untouched.
pub fn perturb(
    m: &IsingModel,
    epsilon: f64,
    target: NoiseTarget,
    rng: &mut impl RngCore,
) -> IsingModel {
    if epsilon == 0.0 {
        return m.clone();
    }
    let fields: Vec<f64> = match target {
        NoiseTarget::FieldsAndCouplers => (0..m.num_spins())
            .map(|_| epsilon * standard_normal(rng))
            .collect(),
        NoiseTarget::CouplersOnly => vec![0.0; m.num_spins()],
    };
    let couplers: Vec<f64> = (0..m.couplers().len())
        .map(|_| epsilon * standard_normal(rng))
        .collect();
    let mut next = couplers.into_iter();
    m.map_values(
        |i, v| v + fields[i],
        |_, v| v + next.next().expect("one draw per coupler"),
        |o| o,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub same: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResilienceOutcome {
    pub r: f64,
    pub n_same: usize,
    pub n_trials: usize,
    pub trials: Vec<TrialRecord>,
}

/// Fraction of noisy trials whose ground-state set shares a state with the
/// unperturbed ground-state set.
pub fn resilience(m: &IsingModel, spec: &NoiseSpec) -> Result<ResilienceOutcome> {
    let base = ground_states(m, DEFAULT_TOL)?;
    resilience_from(m, &base, spec)
}

/// As [`resilience`] with the unperturbed ground states already known.
pub fn resilience_from(
    m: &IsingModel,
    base: &GroundStateResult,
    spec: &NoiseSpec,
) -> Result<ResilienceOutcome> {
    spec.validate()?;
    let mut trials = Vec::with_capacity(spec.n_trials);
    for trial in 0..spec.n_trials {
        let seed = derive_seed(spec.seed, trial as u64);
        let noisy = perturb(m, spec.epsilon, spec.target, &mut stream(seed));
        let found = ground_states(&noisy, DEFAULT_TOL)?;
        let same = found
            .states
            .iter()
            .any(|s| base.states.binary_search(s).is_ok());
        trials.push(TrialRecord { trial, seed, same });
    }
    let n_same = trials.iter().filter(|t| t.same).count();
    Ok(ResilienceOutcome {
        r: n_same as f64 / spec.n_trials as f64,
        n_same,
        n_trials: spec.n_trials,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> IsingModel {
        IsingModel::new(vec![0.3, -0.2, 0.0], [((0, 1), 1.0), ((1, 2), -0.5)], 0.7).unwrap()
    }

    #[test]
    fn zero_noise_is_identity() {
        let m = model();
        assert_eq!(perturb(&m, 0.0, NoiseTarget::default(), &mut stream(3)), m);
    }

    #[test]
    fn perturbation_is_seeded_and_keeps_structure() {
        let m = model();
        let a = perturb(&m, 0.1, NoiseTarget::default(), &mut stream(9));
        let b = perturb(&m, 0.1, NoiseTarget::default(), &mut stream(9));
        assert_eq!(a, b);
        assert_ne!(a, m);
        assert_eq!(
            a.couplers().keys().collect::<Vec<_>>(),
            m.couplers().keys().collect::<Vec<_>>()
        );
        assert_eq!(a.offset(), m.offset());
        let c = perturb(&m, 0.1, NoiseTarget::CouplersOnly, &mut stream(9));
        assert_eq!(c.h(), m.h());
    }

    #[test]
    fn perturbation_std_matches_epsilon() {
        let eps = 0.01;
        let n = 100_000;
        let m = IsingModel::new(vec![0.0; n], [], 0.0).unwrap();
        let p = perturb(&m, eps, NoiseTarget::default(), &mut stream(1));
        let mean = p.h().iter().sum::<f64>() / n as f64;
        let sd = (p.h().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((sd / eps - 1.0).abs() < 0.02, "{sd}");
    }

    #[test]
    fn resilience_examples() {
        let spec = NoiseSpec {
            epsilon: 0.0,
            n_trials: 5,
            seed: 1,
            target: NoiseTarget::default(),
        };
        assert_eq!(resilience(&model(), &spec).unwrap().r, 1.0);

        let single = IsingModel::new(vec![1.0], [], 0.0).unwrap();
        let spec = NoiseSpec {
            epsilon: 0.001,
            n_trials: 20,
            ..spec
        };
        let out = resilience(&single, &spec).unwrap();
        assert_eq!((out.r, out.n_same), (1.0, 20));

        let bad = NoiseSpec { n_trials: 0, ..spec };
        assert!(resilience(&single, &bad).is_err());
    }
}
