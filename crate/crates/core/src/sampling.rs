//! Seeded random states.
//!
//! Every random object is drawn from a ChaCha stream selected by a
//! `(seed, stream)` pair, so parallel work items never share generator state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{DensityMatrix, StateVector, C64};

/// SplitMix64 finaliser, used to decorrelate derived seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for restart `i` of an optimisation seeded with `seed`.
pub fn restart_seed(seed: u64, i: u64) -> u64 {
    seed ^ splitmix64(i)
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// I.i.d. standard complex Gaussian entries (real and imaginary parts ~ N(0, 1)).
pub fn complex_gaussian(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect()
}

/// Haar-random pure state: a normalised complex Gaussian vector is uniform on the sphere.
pub fn random_pure_state(rng: &mut impl Rng, dims: &[usize]) -> Result<StateVector> {
    let n = dims.iter().product();
    StateVector::normalized(complex_gaussian(rng, n), dims.to_vec())
}

/// Mixed state from the induced measure: the marginal on the first
/// `dims.len()` factors of a random pure state on `dims ⊗ dims`.
pub fn random_mixed_state(rng: &mut impl Rng, dims: &[usize]) -> Result<DensityMatrix> {
    let doubled: Vec<usize> = dims.iter().chain(dims).copied().collect();
    let psi = random_pure_state(rng, &doubled)?;
    let keep: Vec<usize> = (0..dims.len()).collect();
    psi.reduced(&keep)
}

/// Product of independent Haar-random pure states, one per factor.
pub fn random_product_state(rng: &mut impl Rng, dims: &[usize]) -> Result<StateVector> {
    let mut factors = dims.iter().map(|&d| random_pure_state(rng, &[d]));
    let first = factors.next().expect("at least one factor")?;
    factors.try_fold(first, |acc, f| Ok(acc.tensor(&f?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a = complex_gaussian(&mut stream_rng(42, 0), 5);
        let b = complex_gaussian(&mut stream_rng(42, 0), 5);
        let c = complex_gaussian(&mut stream_rng(42, 1), 5);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn restart_seeds_differ() {
        let seeds: Vec<u64> = (0..100).map(|i| restart_seed(7, i)).collect();
        let mut dedup = seeds.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), seeds.len());
    }

    #[test]
    fn mixed_states_are_valid() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..20 {
            let rho = random_mixed_state(&mut rng, &[2, 2]).unwrap();
            assert_eq!(rho.subsystem_dims(), &[2, 2]);
            assert!(rho.purity() < 1.0);
        }
    }

    #[test]
    fn product_state_is_unentangled() {
        let mut rng = stream_rng(2, 0);
        let psi = random_product_state(&mut rng, &[3, 3]).unwrap();
        let rho_a = psi.reduced(&[0]).unwrap();
        assert!((rho_a.purity() - 1.0).abs() < 1e-12);
    }
}
