use std::path::Path;

use ndarray::Array2;

use super::{DataError, Dataset};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Loads an IDX image file and its label file. Pixels are scaled to `[0, 1]`.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset, DataError> {
    let read = |p: &Path| {
        std::fs::read(p).map_err(|source| DataError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let images = parse_idx_images(&read(images_path)?)?;
    let labels = parse_idx_labels(&read(labels_path)?)?;
    if images.nrows() != labels.len() {
        return Err(DataError::CountMismatch {
            images: images.nrows(),
            labels: labels.len(),
        });
    }
    let name = images_path
        .file_name()
        .map_or_else(|| "idx".to_string(), |s| s.to_string_lossy().into_owned());
    Dataset::new(name, images, labels.into_iter().map(f64::from).collect())
}

/// Rank-3 unsigned-byte IDX: one flattened, `/255`-scaled row per image.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Array2<f64>, DataError> {
    let magic = be_u32(bytes, 0, "image header")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(DataError::BadMagic {
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(bytes, 4, "image header")? as usize;
    let rows = be_u32(bytes, 8, "image header")? as usize;
    let cols = be_u32(bytes, 12, "image header")? as usize;
    if count == 0 || rows == 0 || cols == 0 {
        return Err(DataError::BadHeader { what: "image" });
    }
    let pixels = rows
        .checked_mul(cols)
        .and_then(|p| p.checked_mul(count).map(|total| (p, total)));
    let (per_image, total) = pixels.ok_or(DataError::BadHeader { what: "image" })?;
    let body = body(bytes, 16, total, "image data")?;
    Array2::from_shape_vec(
        (count, per_image),
        body.iter().map(|&b| f64::from(b) / 255.0).collect(),
    )
    .map_err(|_| DataError::BadHeader { what: "image" })
}

/// Rank-1 unsigned-byte IDX.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DataError> {
    let magic = be_u32(bytes, 0, "label header")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(DataError::BadMagic {
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(bytes, 4, "label header")? as usize;
    if count == 0 {
        return Err(DataError::BadHeader { what: "label" });
    }
    Ok(body(bytes, 8, count, "label data")?.to_vec())
}

fn be_u32(bytes: &[u8], at: usize, what: &'static str) -> Result<u32, DataError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(DataError::Truncated {
            what,
            expected: at + 4,
            found: bytes.len(),
        })
}

fn body<'a>(
    bytes: &'a [u8],
    offset: usize,
    len: usize,
    what: &'static str,
) -> Result<&'a [u8], DataError> {
    let expected = offset
        .checked_add(len)
        .ok_or(DataError::BadHeader { what })?;
    if bytes.len() != expected {
        return Err(DataError::Truncated {
            what,
            expected,
            found: bytes.len(),
        });
    }
    Ok(&bytes[offset..])
}
