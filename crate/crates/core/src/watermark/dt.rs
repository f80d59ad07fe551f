//! Distribution transformer: a seeded scrambler that balances the density
//! of ones in the payload. Applying it twice with the same seed is the
//! identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn scrambling_sequence(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random::<bool>() as u8).collect()
}

pub fn dt_forward(bits: &[u8], seed: u64) -> Vec<u8> {
    bits.iter()
        .zip(scrambling_sequence(bits.len(), seed))
        .map(|(b, s)| b ^ s)
        .collect()
}

pub fn dt_inverse(bits: &[u8], seed: u64) -> Vec<u8> {
    dt_forward(bits, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zeros_give_the_sequence() {
        assert_eq!(dt_forward(&[0; 64], 5), scrambling_sequence(64, 5));
    }

    #[test]
    fn ones_density_is_balanced() {
        let bits = vec![1u8; 64];
        let ones: usize = (0..10_000u64)
            .map(|seed| dt_forward(&bits, seed).iter().filter(|&&b| b == 1).count())
            .sum();
        let density = ones as f64 / (64.0 * 10_000.0);
        assert!((0.45..=0.55).contains(&density), "{density}");
    }

    proptest! {
        #[test]
        fn involution(bits in proptest::collection::vec(0u8..2, 0..200), seed in any::<u64>()) {
            prop_assert_eq!(dt_inverse(&dt_forward(&bits, seed), seed), bits);
        }
    }
}
