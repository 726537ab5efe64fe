//! FNV-1a hashing, used for lexicon fallback groups and snapshot header checksums.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::fnv1a64;

    #[test]
    fn known_vectors() {
        // Reference values for the 64-bit FNV-1a parameters.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn single_byte_changes_always_change_the_hash() {
        let base = b"ISO1 header bytes".to_vec();
        let h0 = fnv1a64(&base);
        for i in 0..base.len() {
            for delta in [0x01u8, 0x80, 0xff] {
                let mut corrupt = base.clone();
                corrupt[i] ^= delta;
                assert_ne!(fnv1a64(&corrupt), h0, "byte {i} xor {delta:#x}");
            }
        }
    }
}
