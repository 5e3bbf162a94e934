use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for one work unit, a pure function of
/// (seed, stratum, cycle, block). Scheduling order cannot affect the draws.
pub fn unit_rng(seed: u64, stratum: u64, cycle: u64, block: u64) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for x in [stratum, cycle, block] {
        h = splitmix(h ^ splitmix(x));
    }
    let mut key = [0u8; 32];
    let mut s = h;
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
