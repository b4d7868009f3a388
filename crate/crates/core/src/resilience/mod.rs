//! Noise resilience of encoded Ising models.

pub mod experiment;
pub mod generate;
pub mod noise;
pub mod rng;

pub use experiment::{run_experiment, ExperimentConfig, ResilienceReport};
pub use generate::{gen_convex_instance, gen_uniform_instance, Family, InstanceSpec};
pub use noise::{perturb, resilience, NoiseSpec, NoiseTarget};
