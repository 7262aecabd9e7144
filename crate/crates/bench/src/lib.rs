//! Shared fixtures for the criterion benches.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wiretap_core::channel::{self, ChannelState, CompoundSet};
use wiretap_core::construction_a::NestedPair;

/// Seeded generator used by every fixture.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The 2x2, T = 2 smoke configuration: `p = 5`, `k_b = 2`, `k_e = 0`,
/// `σ_s = 10`, Bob at 24 dB on an isotropic channel.
pub fn smoke() -> (Arc<NestedPair>, CompoundSet, ChannelState) {
    let mut r = rng(1);
    let pair = Arc::new(NestedPair::sample(5, 2, 2, 2, 0, &mut r).expect("pair"));
    let power = 100.0;
    let rho_b = 10f64.powf(2.4);
    let set = CompoundSet {
        n_a: 2,
        n_b: 2,
        n_e: 2,
        power,
        sigma_b: (power / rho_b).sqrt(),
        sigma_e: (power / 10.0).sqrt(),
        c_b: 2.0 * (1.0 + rho_b).ln(),
        c_e: 2.0 * 5f64.ln(),
    };
    let state = channel::isotropic_state(&set).expect("state");
    (pair, set, state)
}
