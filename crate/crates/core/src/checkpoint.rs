//! Versioned, digest-protected checkpoint files.
//!
//! Layout (UTF-8 text):
//!
//! ```text
//! cflab-checkpoint v1
//! sha256 <64 hex digits of the payload bytes>
//! <JSON payload>
//! ```
//!
//! Files are written to a temporary sibling and renamed, so a crash never
//! leaves a half-written checkpoint in place.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MAGIC: &str = "cflab-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint file (bad header)")]
    BadHeader,
    #[error("checkpoint version {found} is not supported (expected {VERSION})")]
    VersionMismatch { found: String },
    #[error("checkpoint digest mismatch: file is corrupted")]
    DigestMismatch,
    #[error("checkpoint payload: {0}")]
    Payload(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn encode<T: Serialize>(payload: &T) -> Result<String, CheckpointError> {
    let body = serde_json::to_string(payload)?;
    Ok(format!("{MAGIC} v{VERSION}\nsha256 {}\n{body}", sha256_hex(body.as_bytes())))
}

pub fn decode<T: DeserializeOwned>(text: &str) -> Result<T, CheckpointError> {
    let mut parts = text.splitn(3, '\n');
    let header = parts.next().ok_or(CheckpointError::BadHeader)?;
    let version = header
        .strip_prefix(MAGIC)
        .and_then(|v| v.strip_prefix(" v"))
        .ok_or(CheckpointError::BadHeader)?;
    if version != VERSION.to_string() {
        return Err(CheckpointError::VersionMismatch {
            found: version.to_string(),
        });
    }
    let digest = parts
        .next()
        .and_then(|l| l.strip_prefix("sha256 "))
        .ok_or(CheckpointError::BadHeader)?;
    let body = parts.next().ok_or(CheckpointError::BadHeader)?;
    if sha256_hex(body.as_bytes()) != digest {
        return Err(CheckpointError::DigestMismatch);
    }
    Ok(serde_json::from_str(body)?)
}

pub fn write<T: Serialize>(path: &Path, payload: &T) -> Result<(), CheckpointError> {
    let text = encode(payload)?;
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T, CheckpointError> {
    decode(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclid::QuotientStream;
    use num_bigint::BigUint;

    #[test]
    fn roundtrip_stream_state() {
        let mut s = QuotientStream::new(BigUint::from(651u32), BigUint::from(331u32));
        s.next();
        let text = encode(&s).unwrap();
        assert!(text.starts_with("cflab-checkpoint v1\nsha256 "));
        let back: QuotientStream = decode(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn detects_corruption_and_version() {
        let text = encode(&vec![1u32, 2, 3]).unwrap();
        let corrupted = text.replace("[1,2,3]", "[1,2,4]");
        assert!(matches!(decode::<Vec<u32>>(&corrupted), Err(CheckpointError::DigestMismatch)));
        let future = text.replacen("v1", "v9", 1);
        assert!(matches!(
            decode::<Vec<u32>>(&future),
            Err(CheckpointError::VersionMismatch { .. })
        ));
        assert!(matches!(decode::<Vec<u32>>("hello"), Err(CheckpointError::BadHeader)));
    }

    #[test]
    fn digest_matches_reference() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
