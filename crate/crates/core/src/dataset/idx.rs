//! IDX container parsing (MNIST distribution format).
//!
//! Headers are big-endian: a `u32` magic, then one `u32` per dimension.
//! Images use magic 2051 and dimensions `count, rows, cols`; labels use
//! magic 2049 and a single `count`. Gzip input is detected by its
//! `1f 8b` prefix and inflated transparently.

use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 2051;
pub const LABEL_MAGIC: u32 = 2049;
pub const IMAGE_SIDE: usize = 28;
pub const IMAGE_PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;

/// Unnormalized images, row-major bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct RawImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
    /// SHA-256 of the file as stored on disk.
    pub sha256: String,
}

impl RawImages {
    pub fn image(&self, i: usize) -> &[u8] {
        let d = self.rows * self.cols;
        &self.pixels[i * d..(i + 1) * d]
    }

    /// Image `i` scaled to `[0, 1]` by `/255`.
    pub fn normalized(&self, i: usize) -> Vec<f64> {
        self.image(i).iter().map(|&p| f64::from(p) / 255.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawLabels {
    pub labels: Vec<u8>,
    pub sha256: String,
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    let b = bytes.get(at..at + 4).ok_or(Error::Length {
        expected: at + 4,
        found: bytes.len(),
    })?;
    Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

fn inflate(bytes: Vec<u8>) -> Result<Vec<u8>> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&bytes[..])
            .read_to_end(&mut out)
            .map_err(|e| Error::Data(format!("gzip: {e}")))?;
        Ok(out)
    } else {
        Ok(bytes)
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_file(path: &Path) -> Result<(Vec<u8>, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let digest = sha256_hex(&bytes);
    Ok((inflate(bytes)?, digest))
}

/// Parses an image file already in memory (plain or gzip).
pub fn parse_idx_images(bytes: &[u8]) -> Result<RawImages> {
    let digest = sha256_hex(bytes);
    let bytes = inflate(bytes.to_vec())?;
    parse_images_inflated(&bytes, digest)
}

fn parse_images_inflated(bytes: &[u8], sha256: String) -> Result<RawImages> {
    let magic = be_u32(bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::Format {
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    if rows != IMAGE_SIDE || cols != IMAGE_SIDE {
        return Err(Error::Shape(format!(
            "expected {IMAGE_SIDE}x{IMAGE_SIDE} images, found {rows}x{cols}"
        )));
    }
    let expected = 16 + count * rows * cols;
    if bytes.len() < expected {
        return Err(Error::Length {
            expected,
            found: bytes.len(),
        });
    }
    Ok(RawImages {
        count,
        rows,
        cols,
        pixels: bytes[16..expected].to_vec(),
        sha256,
    })
}

/// Parses a label file already in memory (plain or gzip).
pub fn parse_idx_labels(bytes: &[u8]) -> Result<RawLabels> {
    let digest = sha256_hex(bytes);
    let bytes = inflate(bytes.to_vec())?;
    parse_labels_inflated(&bytes, digest)
}

fn parse_labels_inflated(bytes: &[u8], sha256: String) -> Result<RawLabels> {
    let magic = be_u32(bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(Error::Format {
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(bytes, 4)? as usize;
    let expected = 8 + count;
    if bytes.len() < expected {
        return Err(Error::Length {
            expected,
            found: bytes.len(),
        });
    }
    Ok(RawLabels {
        labels: bytes[8..expected].to_vec(),
        sha256,
    })
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<RawImages> {
    let (bytes, digest) = read_file(path.as_ref())?;
    parse_images_inflated(&bytes, digest)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<RawLabels> {
    let (bytes, digest) = read_file(path.as_ref())?;
    parse_labels_inflated(&bytes, digest)
}

/// Serializes 28×28 images into an uncompressed IDX image file.
pub fn encode_idx_images(images: &[Vec<u8>]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(16 + images.len() * IMAGE_PIXELS);
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&(IMAGE_SIDE as u32).to_be_bytes());
    out.extend_from_slice(&(IMAGE_SIDE as u32).to_be_bytes());
    for img in images {
        if img.len() != IMAGE_PIXELS {
            return Err(Error::Shape(format!(
                "image has {} pixels, expected {IMAGE_PIXELS}",
                img.len()
            )));
        }
        out.extend_from_slice(img);
    }
    Ok(out)
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::write::GzEncoder;
    use flate2::Compression;
    use std::io::Write;

    fn two_images() -> Vec<Vec<u8>> {
        vec![vec![0u8; IMAGE_PIXELS], vec![255u8; IMAGE_PIXELS]]
    }

    #[test]
    fn round_trip_and_normalization() {
        let bytes = encode_idx_images(&two_images()).unwrap();
        let raw = parse_idx_images(&bytes).unwrap();
        assert_eq!((raw.count, raw.rows, raw.cols), (2, 28, 28));
        assert!(raw.normalized(0).iter().all(|&p| p == 0.0));
        assert!(raw.normalized(1).iter().all(|&p| p == 1.0));
        let labels = parse_idx_labels(&encode_idx_labels(&[3, 7])).unwrap();
        assert_eq!(labels.labels, [3, 7]);
    }

    #[test]
    fn gzip_is_detected() {
        let plain = encode_idx_labels(&[1, 2, 3]);
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(&plain).unwrap();
        let gz = enc.finish().unwrap();
        assert_eq!(parse_idx_labels(&gz).unwrap().labels, [1, 2, 3]);
        // Digest is of the stored bytes, so it differs between encodings.
        assert_ne!(
            parse_idx_labels(&gz).unwrap().sha256,
            parse_idx_labels(&plain).unwrap().sha256
        );
    }

    #[test]
    fn wrong_magic() {
        let labels = encode_idx_labels(&[1]);
        match parse_idx_images(&labels).unwrap_err() {
            Error::Format { expected, found } => assert_eq!((expected, found), (2051, 2049)),
            e => panic!("{e}"),
        }
        let images = encode_idx_images(&two_images()).unwrap();
        assert!(matches!(
            parse_idx_labels(&images),
            Err(Error::Format { expected: 2049, found: 2051 })
        ));
    }

    #[test]
    fn truncation() {
        let bytes = encode_idx_images(&two_images()).unwrap();
        assert!(matches!(
            parse_idx_images(&bytes[..bytes.len() - 1]),
            Err(Error::Length { .. })
        ));
        assert!(matches!(parse_idx_images(&bytes[..3]), Err(Error::Length { .. })));
        let labels = encode_idx_labels(&[1, 2]);
        assert!(matches!(parse_idx_labels(&labels[..9]), Err(Error::Length { .. })));
    }

    #[test]
    fn non_28_side_is_shape_error() {
        let mut bytes = encode_idx_images(&two_images()).unwrap();
        bytes[11] = 27;
        assert!(matches!(parse_idx_images(&bytes), Err(Error::Shape(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_idx_images("/nonexistent/idx"),
            Err(Error::Io { .. })
        ));
    }
}
