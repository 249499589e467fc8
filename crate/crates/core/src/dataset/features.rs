//! Binary feature files: a labeled set of real vectors.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset          size        field
//! 0               4           magic b"CDFT"
//! 4               4           u32 version (1)
//! 8               8           u64 count
//! 16              8           u64 dim
//! 24              8·count·dim f64 values, row-major (IEEE-754 binary64)
//! 24+8·count·dim  4·count     u32 labels
//! …               4           u32 provenance byte length L
//! …               L           provenance, compact UTF-8 JSON object of strings
//! ```
//!
//! Nothing may follow the provenance block.

use std::collections::BTreeMap;
use std::path::Path;

use super::LabeledSet;
use crate::error::{Error, Result};
use crate::math::Vector;

pub const FEATURE_MAGIC: [u8; 4] = *b"CDFT";
pub const FEATURE_VERSION: u32 = 1;

pub fn encode_features(set: &LabeledSet) -> Result<Vec<u8>> {
    let count = set.len();
    let dim = set.dim();
    let provenance = serde_json::to_vec(&set.provenance)?;
    let mut out = Vec::with_capacity(28 + count * (8 * dim + 4) + provenance.len());
    out.extend_from_slice(&FEATURE_MAGIC);
    out.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
    out.extend_from_slice(&(count as u64).to_le_bytes());
    out.extend_from_slice(&(dim as u64).to_le_bytes());
    for x in &set.samples {
        for v in x.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    for &l in &set.labels {
        let l = u32::try_from(l).map_err(|_| Error::Data(format!("label {l} exceeds u32")))?;
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.extend_from_slice(&(provenance.len() as u32).to_le_bytes());
    out.extend_from_slice(&provenance);
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).ok_or(Error::Length {
            expected: usize::MAX,
            found: self.bytes.len(),
        })?;
        let s = self.bytes.get(self.at..end).ok_or(Error::Length {
            expected: end,
            found: self.bytes.len(),
        })?;
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_features(bytes: &[u8]) -> Result<LabeledSet> {
    let mut c = Cursor { bytes, at: 0 };
    let magic = c.take(4)?;
    if magic != FEATURE_MAGIC {
        return Err(Error::Format {
            expected: u32::from_le_bytes(FEATURE_MAGIC),
            found: u32::from_le_bytes(magic.try_into().unwrap()),
        });
    }
    let version = c.u32()?;
    if version != FEATURE_VERSION {
        return Err(Error::Data(format!("unsupported feature file version {version}")));
    }
    let count = usize::try_from(c.u64()?).map_err(|_| Error::Data("count overflow".into()))?;
    let dim = usize::try_from(c.u64()?).map_err(|_| Error::Data("dim overflow".into()))?;
    let values = count
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::Data("feature block size overflows".into()))?;
    let block = c.take(values)?;
    let row_bytes = 8 * dim;
    let samples: Vec<Vector> = (0..count)
        .map(|r| {
            block[r * row_bytes..(r + 1) * row_bytes]
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect()
        })
        .collect();
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        labels.push(c.u32()? as usize);
    }
    let plen = c.u32()? as usize;
    let provenance: BTreeMap<String, String> = serde_json::from_slice(c.take(plen)?)?;
    if c.at != bytes.len() {
        return Err(Error::Data(format!(
            "{} trailing bytes after provenance",
            bytes.len() - c.at
        )));
    }
    LabeledSet::new(samples, labels, provenance)
}

pub fn write_features(path: impl AsRef<Path>, set: &LabeledSet) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_features(set)?).map_err(|e| Error::io(path, e))
}

pub fn read_features(path: impl AsRef<Path>) -> Result<LabeledSet> {
    let path = path.as_ref();
    decode_features(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small() -> LabeledSet {
        let mut p = BTreeMap::new();
        p.insert("source".to_string(), "unit".to_string());
        LabeledSet::new(
            vec![Vector::from(vec![0.5, -1.0]), Vector::from(vec![1e-300, f64::MAX])],
            vec![3, 9],
            p,
        )
        .unwrap()
    }

    #[test]
    fn byte_layout() {
        let bytes = encode_features(&small()).unwrap();
        assert_eq!(&bytes[..4], b"CDFT");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..16], &2u64.to_le_bytes());
        assert_eq!(&bytes[16..24], &2u64.to_le_bytes());
        assert_eq!(&bytes[24..32], &0.5f64.to_le_bytes());
        assert_eq!(&bytes[56..60], &3u32.to_le_bytes());
        assert_eq!(&bytes[60..64], &9u32.to_le_bytes());
        let json = br#"{"source":"unit"}"#;
        assert_eq!(&bytes[64..68], &(json.len() as u32).to_le_bytes());
        assert_eq!(&bytes[68..], json);
    }

    #[test]
    fn errors() {
        let bytes = encode_features(&small()).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_features(&bad), Err(Error::Format { .. })));
        assert!(matches!(decode_features(&bytes[..40]), Err(Error::Length { .. })));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(decode_features(&long), Err(Error::Data(_))));
        let mut v2 = bytes;
        v2[4] = 2;
        assert!(decode_features(&v2).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            rows in proptest::collection::vec(proptest::collection::vec(any::<f64>(), 3), 0..6),
            tag in "[a-z]{0,8}",
        ) {
            let labels: Vec<usize> = (0..rows.len()).map(|i| i % 10).collect();
            let mut p = BTreeMap::new();
            p.insert("tag".to_string(), tag);
            let set = LabeledSet::new(rows.into_iter().map(Vector::from).collect(), labels, p).unwrap();
            let back = decode_features(&encode_features(&set).unwrap()).unwrap();
            prop_assert_eq!(back.labels.clone(), set.labels.clone());
            prop_assert_eq!(&back.provenance, &set.provenance);
            for (a, b) in back.samples.iter().zip(&set.samples) {
                let ab: Vec<u64> = a.iter().map(|v| v.to_bits()).collect();
                let bb: Vec<u64> = b.iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(ab, bb);
            }
        }
    }
}
