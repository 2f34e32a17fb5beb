//! Fixtures shared by the benchmarks.

use cmlab_core::asep::stationary_sample;
use cmlab_core::rng::rng_from_seed;
use cmlab_core::{AsepConfig, AsepParams, GaussMatrixState, KacChainState, SymMatrix, ThermostatParams};

pub const FIXTURE_SEED: u64 = 0x5eed;

pub fn goe(n: usize) -> SymMatrix {
    SymMatrix::goe(n, &mut rng_from_seed(FIXTURE_SEED))
}

pub fn kac_state(n: usize) -> KacChainState {
    KacChainState::stationary(&goe(n), &mut rng_from_seed(FIXTURE_SEED + 1))
        .expect("GOE seed is finite")
}

pub fn thermostat_state(n: usize) -> (ThermostatParams, GaussMatrixState) {
    let p = ThermostatParams::new(n, 1.0, 1.0).expect("valid parameters");
    let g = GaussMatrixState::stationary(&p, &mut rng_from_seed(FIXTURE_SEED + 2));
    (p, g)
}

/// Half-filled stationary ASEP configuration with `q = 1 - 1/sqrt(n)`.
pub fn asep_state(n: usize) -> (AsepParams, AsepConfig) {
    let q = 1.0 - 1.0 / (n as f64).sqrt();
    let p = AsepParams::new(n, q).expect("valid parameters");
    let cfg = stationary_sample(n, n / 2, q, &mut rng_from_seed(FIXTURE_SEED + 3))
        .expect("valid particle count");
    (p, cfg)
}
