use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default seed used across the toolkit.
pub const DEFAULT_SEED: u64 = 42;

/// Independent, reproducible RNG stream for task `stream` under `seed`.
/// Results never depend on the order in which streams are consumed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
