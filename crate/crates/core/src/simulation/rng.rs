use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator behind every stream.
pub const ALGORITHM: &str = "chacha8";

pub type RngStream = ChaCha8Rng;

/// Stream `index` of the generator keyed by `master_seed`. Streams share the
/// key and differ in the stream word, so their sequences never overlap.
pub fn stream(master_seed: u64, index: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_key_same_draws() {
        let a: Vec<u64> = stream(7, 3).random_iter().take(8).collect();
        let b: Vec<u64> = stream(7, 3).random_iter().take(8).collect();
        let c: Vec<u64> = stream(7, 4).random_iter().take(8).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
