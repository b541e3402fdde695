use std::hash::{DefaultHasher, Hash, Hasher};

pub(crate) fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(a << 6)
        .wrapping_add(a >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn hash_of<T: Hash + ?Sized>(x: &T) -> u64 {
    let mut h = DefaultHasher::new();
    x.hash(&mut h);
    h.finish()
}

/// One bit of a 64-bit bloom filter over names.
pub(crate) fn name_bit(name: &str) -> u64 {
    1u64 << (hash_of(name) % 64)
}

/// Appends primes to `base` until `taken` rejects it no more.
pub(crate) fn prime_until(base: &str, mut taken: impl FnMut(&str) -> bool) -> String {
    let mut name = base.to_string();
    while taken(&name) {
        name.push('\'');
    }
    name
}

/// Strips the `%n` suffix used by generated binder names.
pub(crate) fn display_hint(name: &str) -> &str {
    match name.find('%') {
        Some(0) => "v",
        Some(i) => &name[..i],
        None => name,
    }
}
