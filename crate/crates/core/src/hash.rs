//! Seeded 64-bit hashing shared by every strategy.

use xxhash_rust::xxh3::xxh3_64_with_seed;

/// XXH3-64 of `payload` under `seed`. Stable across platforms and releases.
#[inline]
pub fn hash64(payload: &[u8], seed: u64) -> u64 {
    xxh3_64_with_seed(payload, seed)
}

/// Joint hash `h(s, r)` over `server || 0x00 || request`.
pub fn hash_pair(server: &[u8], request: &[u8], seed: u64) -> u64 {
    let len = server.len() + 1 + request.len();
    let mut stack = [0u8; 256];
    let mut heap = Vec::new();
    let buf: &mut [u8] = if len <= stack.len() {
        &mut stack[..len]
    } else {
        heap.resize(len, 0);
        &mut heap
    };
    buf[..server.len()].copy_from_slice(server);
    buf[server.len() + 1..].copy_from_slice(request);
    hash64(buf, seed)
}
