//! Point serialization: a fixed little-endian byte layout wrapped in
//! standard padded base-64. The layout is the coordinate count as a 32-bit
//! unsigned, then all keys as 32-bit unsigneds, then all values as 32-bit
//! floats. Decoding validates every construction invariant, so the codec is
//! a total inverse on valid points.

use std::fmt;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;

use crate::point::SparsePoint;

#[derive(Debug)]
pub enum DecodeError {
    InvalidBase64(base64::DecodeError),
    Truncated { needed: usize, got: usize },
    TrailingData { extra: usize },
    UnsortedKeys { position: usize },
    ZeroValue { position: usize },
    NonFinite { position: usize },
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::InvalidBase64(e) => write!(f, "invalid base-64: {e}"),
            DecodeError::Truncated { needed, got } => {
                write!(f, "payload truncated: need {needed} bytes, got {got}")
            }
            DecodeError::TrailingData { extra } => {
                write!(f, "{extra} unexpected trailing bytes")
            }
            DecodeError::UnsortedKeys { position } => {
                write!(f, "keys not strictly increasing at position {position}")
            }
            DecodeError::ZeroValue { position } => {
                write!(f, "explicit zero value at position {position}")
            }
            DecodeError::NonFinite { position } => {
                write!(f, "non-finite value at position {position}")
            }
        }
    }
}

impl std::error::Error for DecodeError {}

/// Raw byte layout of a point.
pub fn point_to_bytes(p: &SparsePoint) -> Vec<u8> {
    let nnz = p.nnz() as u32;
    let mut out = Vec::with_capacity(4 + 8 * p.nnz());
    out.extend_from_slice(&nnz.to_le_bytes());
    for k in p.keys() {
        out.extend_from_slice(&k.to_le_bytes());
    }
    for v in p.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Inverse of [`point_to_bytes`], validating every invariant.
pub fn point_from_bytes(bytes: &[u8]) -> Result<SparsePoint, DecodeError> {
    if bytes.len() < 4 {
        return Err(DecodeError::Truncated { needed: 4, got: bytes.len() });
    }
    let nnz = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let needed = 4 + 8 * nnz;
    if bytes.len() < needed {
        return Err(DecodeError::Truncated { needed, got: bytes.len() });
    }
    if bytes.len() > needed {
        return Err(DecodeError::TrailingData { extra: bytes.len() - needed });
    }
    let mut keys = Vec::with_capacity(nnz);
    for i in 0..nnz {
        let at = 4 + 4 * i;
        let k = u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        if let Some(&prev) = keys.last() {
            if k <= prev {
                return Err(DecodeError::UnsortedKeys { position: i });
            }
        }
        keys.push(k);
    }
    let mut vals = Vec::with_capacity(nnz);
    for i in 0..nnz {
        let at = 4 + 4 * nnz + 4 * i;
        let v = f32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        if v == 0.0 {
            return Err(DecodeError::ZeroValue { position: i });
        }
        if !v.is_finite() {
            return Err(DecodeError::NonFinite { position: i });
        }
        vals.push(v);
    }
    Ok(SparsePoint::from_sorted_unchecked(keys, vals))
}

/// Base-64 text form of a point (RFC 4648, padded).
pub fn encode_point(p: &SparsePoint) -> String {
    BASE64.encode(point_to_bytes(p))
}

/// Inverse of [`encode_point`].
pub fn decode_point(s: &str) -> Result<SparsePoint, DecodeError> {
    let bytes = BASE64.decode(s).map_err(DecodeError::InvalidBase64)?;
    point_from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(pairs: &[(u32, f32)]) -> SparsePoint {
        SparsePoint::from_pairs(pairs.to_vec()).unwrap()
    }

    #[test]
    fn empty_point_is_four_zero_bytes() {
        assert_eq!(encode_point(&SparsePoint::empty()), "AAAAAA==");
        assert!(decode_point("AAAAAA==").unwrap().is_empty());
    }

    #[test]
    fn single_coordinate_layout() {
        let p = pt(&[(1, 1.0)]);
        let bytes = point_to_bytes(&p);
        assert_eq!(
            bytes,
            vec![0x01, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x80, 0x3F]
        );
        assert_eq!(encode_point(&p), "AQAAAAEAAAAAAIA/");
    }

    #[test]
    fn decode_rejects_malformed_inputs() {
        assert!(matches!(decode_point("!!!"), Err(DecodeError::InvalidBase64(_))));

        // Unsorted keys: nnz=2, keys 5 then 3.
        let mut bytes = 2u32.to_le_bytes().to_vec();
        bytes.extend(5u32.to_le_bytes());
        bytes.extend(3u32.to_le_bytes());
        bytes.extend(1.0f32.to_le_bytes());
        bytes.extend(1.0f32.to_le_bytes());
        assert!(matches!(
            point_from_bytes(&bytes),
            Err(DecodeError::UnsortedKeys { position: 1 })
        ));

        // Truncated value array.
        let mut bytes = 1u32.to_le_bytes().to_vec();
        bytes.extend(0u32.to_le_bytes());
        assert!(matches!(point_from_bytes(&bytes), Err(DecodeError::Truncated { .. })));

        // Explicit zero.
        let mut bytes = 1u32.to_le_bytes().to_vec();
        bytes.extend(0u32.to_le_bytes());
        bytes.extend(0.0f32.to_le_bytes());
        assert!(matches!(point_from_bytes(&bytes), Err(DecodeError::ZeroValue { position: 0 })));

        // Trailing garbage.
        let mut bytes = point_to_bytes(&pt(&[(2, 4.0)]));
        bytes.push(0xAB);
        assert!(matches!(
            point_from_bytes(&bytes),
            Err(DecodeError::TrailingData { extra: 1 })
        ));
    }

    prop_compose! {
        fn arb_point()
            (keys in proptest::collection::btree_set(0u32..100_000, 0..64))
            (vals in proptest::collection::vec(any::<f32>().prop_filter("finite non-zero", |v| v.is_finite() && *v != 0.0), keys.len()),
             keys in Just(keys))
            -> SparsePoint
        {
            SparsePoint::new(keys.into_iter().collect(), vals).unwrap()
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(p in arb_point()) {
            let decoded = decode_point(&encode_point(&p)).unwrap();
            prop_assert_eq!(decoded.keys(), p.keys());
            for (a, b) in decoded.values().iter().zip(p.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
