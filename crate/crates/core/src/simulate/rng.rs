use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const STREAMS_PER_PATH: u64 = 8;

/// Independent random streams used within one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stream {
    Increments = 0,
    Bridge = 1,
    Signs = 2,
    RestartIncrements = 3,
    RestartBridge = 4,
}

/// ChaCha8 keyed by the master seed, positioned on the stream of `(path, purpose)`.
pub(crate) fn substream(master_seed: u64, path: u64, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(
        path.wrapping_mul(STREAMS_PER_PATH)
            .wrapping_add(purpose as u64),
    );
    rng
}
