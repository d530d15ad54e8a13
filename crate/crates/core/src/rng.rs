//! Seed splitting.
//!
//! Every random draw derives from one master seed. A consumer asks for the
//! ChaCha stream `(domain << 32) | index`, where `domain` identifies the
//! subsystem and `index` the work item (sample, configuration, ...). Streams
//! are independent of scheduling, so parallel sweeps stay reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DOMAIN_BOUNDARY: u64 = 1;
pub const DOMAIN_POINTS: u64 = 2;
pub const DOMAIN_FAMILY: u64 = 3;
pub const DOMAIN_CERTIFY: u64 = 4;
pub const DOMAIN_THM2: u64 = 5;
pub const DOMAIN_PEAK: u64 = 6;
pub const DOMAIN_K: u64 = 7;

pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 32) | (index & 0xffff_ffff));
    rng
}
