//! Seeded coefficient and state draws shared by the integration tests.

#![allow(dead_code)]

use bilinear_oscillator::algebra::{MasterEqCoefficients, ValidationMode};
use bilinear_oscillator::evolution::GaussianParams;
use bilinear_oscillator::stationary::stationary_params;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Physically valid coefficients whose stationary state exists and has μ_st > 0.
pub fn stable_coefficients(rng: &mut ChaCha8Rng) -> MasterEqCoefficients {
    loop {
        let gamma = rng.random_range(0.5..2.0);
        let theta0 = rng.random_range(0.5..3.0);
        let theta1 = rng.random_range(-0.99..0.99) * theta0;
        let theta2 = rng.random_range(-2.0..2.0);
        let eta0: f64 = rng.random_range(-3.0..-0.2);
        let eta1 = rng.random_range(-1.0..1.0) * eta0.abs();
        let eta2 = rng.random_range(-2.0..2.0);
        let c = MasterEqCoefficients::new(gamma, [theta0, theta1, theta2], [eta0, eta1, eta2]);
        if c.validate(ValidationMode::Physical).is_err() {
            continue;
        }
        let r = stationary_params(&c);
        if r.exists && r.well_behaved.is_some_and(|v| v.satisfied()) {
            return c;
        }
    }
}

pub fn initial_state(rng: &mut ChaCha8Rng) -> GaussianParams {
    GaussianParams::new(rng.random_range(0.2..2.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0))
}
