//! Columnar integer compression: delta, zigzag and varint encoding.
//!
//! Value streams are transformed in three steps before hitting the final
//! general-purpose codec: differences between consecutive values (delta),
//! signed-to-unsigned interleaving (zigzag), and base-128 variable-length
//! bytes (varint). Every step has an exact inverse; the composition is
//! lossless for any `i64` sequence, including wraparound deltas.

/// Decode failure for a varint byte stream.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("truncated varint at byte offset {offset}")]
    Truncated { offset: usize },
    #[error("varint exceeds 64 bits at byte offset {offset}")]
    Overflow { offset: usize },
    #[error("{remaining} trailing byte(s) after final value")]
    Trailing { remaining: usize },
}

/// Delta-encode a value sequence. The first output is the first input;
/// every following output is the difference to its predecessor.
/// Differences wrap in two's complement so any `i64` sequence is encodable.
pub fn delta_encode(values: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(values.len());
    let mut prev = 0i64;
    for (i, &v) in values.iter().enumerate() {
        out.push(if i == 0 { v } else { v.wrapping_sub(prev) });
        prev = v;
    }
    out
}

/// Inverse of [`delta_encode`], applying matching wraparound.
pub fn delta_decode(deltas: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(deltas.len());
    let mut acc = 0i64;
    for (i, &d) in deltas.iter().enumerate() {
        acc = if i == 0 { d } else { acc.wrapping_add(d) };
        out.push(acc);
    }
    out
}

/// Interleave signed values into unsigned ones: 0, -1, 1, -2 map to 0, 1, 2, 3.
#[inline]
pub fn zigzag(n: i64) -> u64 {
    ((n << 1) ^ (n >> 63)) as u64
}

/// Inverse of [`zigzag`].
#[inline]
pub fn unzigzag(u: u64) -> i64 {
    ((u >> 1) as i64) ^ -((u & 1) as i64)
}

/// Append the minimal base-128 little-endian encoding of `u`.
/// All bytes except the last carry a continuation bit.
pub fn varint_encode(mut u: u64, out: &mut Vec<u8>) {
    loop {
        let byte = (u & 0x7f) as u8;
        u >>= 7;
        if u == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

/// Decode one varint starting at `offset`. Returns the value and the offset
/// just past its final byte.
pub fn varint_decode(bytes: &[u8], offset: usize) -> Result<(u64, usize), CodecError> {
    let mut value = 0u64;
    let mut shift = 0u32;
    let mut pos = offset;
    loop {
        let &byte = bytes.get(pos).ok_or(CodecError::Truncated { offset })?;
        if shift == 63 && byte > 1 {
            return Err(CodecError::Overflow { offset });
        }
        value |= u64::from(byte & 0x7f) << shift;
        pos += 1;
        if byte & 0x80 == 0 {
            return Ok((value, pos));
        }
        shift += 7;
        if shift > 63 {
            return Err(CodecError::Overflow { offset });
        }
    }
}

/// Run the full pipeline: delta, then zigzag, then varint.
pub fn encode_stream(values: &[i64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len());
    let mut prev = 0i64;
    for (i, &v) in values.iter().enumerate() {
        let delta = if i == 0 { v } else { v.wrapping_sub(prev) };
        varint_encode(zigzag(delta), &mut out);
        prev = v;
    }
    out
}

/// Inverse of [`encode_stream`]: decodes exactly `count` values and requires
/// the input to be fully consumed.
pub fn decode_stream(bytes: &[u8], count: usize) -> Result<Vec<i64>, CodecError> {
    let mut out = Vec::with_capacity(count);
    let mut pos = 0usize;
    let mut acc = 0i64;
    for i in 0..count {
        let (u, next) = varint_decode(bytes, pos)?;
        pos = next;
        let delta = unzigzag(u);
        acc = if i == 0 {
            delta
        } else {
            acc.wrapping_add(delta)
        };
        out.push(acc);
    }
    if pos != bytes.len() {
        return Err(CodecError::Trailing {
            remaining: bytes.len() - pos,
        });
    }
    Ok(out)
}

/// Encode a plain unsigned sequence (no delta/zigzag), used for ID streams.
pub fn encode_unsigned_stream(values: &[u64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len());
    for &v in values {
        varint_encode(v, &mut out);
    }
    out
}

/// Inverse of [`encode_unsigned_stream`].
pub fn decode_unsigned_stream(bytes: &[u8], count: usize) -> Result<Vec<u64>, CodecError> {
    let mut out = Vec::with_capacity(count);
    let mut pos = 0usize;
    for _ in 0..count {
        let (u, next) = varint_decode(bytes, pos)?;
        pos = next;
        out.push(u);
    }
    if pos != bytes.len() {
        return Err(CodecError::Trailing {
            remaining: bytes.len() - pos,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: base-128 expansion via repeated division on a
    /// big-ish integer (u128) so none of the encoder's shift logic is shared.
    fn varint_oracle(value: u64) -> Vec<u8> {
        let mut groups = Vec::new();
        let mut v = value as u128;
        loop {
            groups.push((v % 128) as u8);
            v /= 128;
            if v == 0 {
                break;
            }
        }
        let last = groups.len() - 1;
        groups
            .iter()
            .enumerate()
            .map(|(i, &g)| if i == last { g } else { g | 0x80 })
            .collect()
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_encode(&[5001, 5001, 5002]), vec![5001, 0, 1]);
        assert_eq!(delta_encode(&[]), Vec::<i64>::new());
        assert_eq!(delta_encode(&[7]), vec![7]);
    }

    #[test]
    fn zigzag_examples() {
        assert_eq!(zigzag(0), 0);
        assert_eq!(zigzag(-1), 1);
        assert_eq!(zigzag(1), 2);
        assert_eq!(zigzag(-2), 3);
        assert_eq!(zigzag(150), 300);
        assert_eq!(unzigzag(zigzag(i64::MIN)), i64::MIN);
        assert_eq!(unzigzag(zigzag(i64::MAX)), i64::MAX);
    }

    #[test]
    fn varint_examples() {
        let mut out = Vec::new();
        varint_encode(0, &mut out);
        assert_eq!(out, vec![0x00]);
        out.clear();
        varint_encode(300, &mut out);
        assert_eq!(out, vec![0xac, 0x02]);
        // 2^63 requires ten groups; checked against the independent expansion.
        out.clear();
        varint_encode(1u64 << 63, &mut out);
        assert_eq!(out.len(), 10);
        assert_eq!(out, varint_oracle(1u64 << 63));
    }

    #[test]
    fn varint_truncation_and_trailing() {
        assert_eq!(
            varint_decode(&[0x80], 0),
            Err(CodecError::Truncated { offset: 0 })
        );
        assert_eq!(
            decode_stream(&[0x00, 0x07], 1),
            Err(CodecError::Trailing { remaining: 1 })
        );
    }

    #[test]
    fn varint_rejects_non_minimal_overflow() {
        // Eleven continuation groups cannot fit in 64 bits.
        let bytes = [
            0x80, 0x80, 0x80, 0x80, 0x80, 0x80, 0x80, 0x80, 0x80, 0x80, 0x01,
        ];
        assert!(matches!(
            varint_decode(&bytes, 0),
            Err(CodecError::Overflow { .. })
        ));
    }

    #[test]
    fn pipeline_roundtrip_small() {
        let values = [-3i64, 0, 3];
        let bytes = encode_stream(&values);
        assert_eq!(decode_stream(&bytes, 3).unwrap(), values);
    }

    #[test]
    fn constant_step_sequences_stay_small() {
        for step in 0..64i64 {
            let values: Vec<i64> = (0..1000).map(|i| 1_000_000 + i * step).collect();
            let bytes = encode_stream(&values);
            assert!(
                bytes.len() <= 2 * values.len(),
                "step {step}: {} bytes for {} values",
                bytes.len(),
                values.len()
            );
        }
    }

    proptest! {
        #[test]
        fn roundtrip_any_i64(values in proptest::collection::vec(any::<i64>(), 0..200)) {
            let bytes = encode_stream(&values);
            prop_assert_eq!(decode_stream(&bytes, values.len()).unwrap(), values);
        }

        #[test]
        fn varint_matches_oracle(v in any::<u64>()) {
            let mut out = Vec::new();
            varint_encode(v, &mut out);
            prop_assert_eq!(&out, &varint_oracle(v));
            let (decoded, used) = varint_decode(&out, 0).unwrap();
            prop_assert_eq!(decoded, v);
            prop_assert_eq!(used, out.len());
        }

        #[test]
        fn delta_roundtrip_extremes(values in proptest::collection::vec(
            prop_oneof![any::<i64>(), Just(i64::MIN), Just(i64::MAX), Just(0i64)], 0..100)) {
            prop_assert_eq!(delta_decode(&delta_encode(&values)), values);
        }
    }
}
