use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives an independent stream seed from a master seed: the splitmix64
/// output at offset stream+1 from state `master`. Injective in each
/// argument, so trial and purpose streams never share state no matter how
/// much randomness each one consumes.
pub fn mix_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic generator for a derived seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
