//! Content hashes and fingerprints.
//!
//! Artifacts written by the pipeline (datasets, models, reports) are tied
//! together by SHA-256 digests: a codebook fingerprint travels with both the
//! dataset manifest and the trained model so evaluation can refuse mismatched
//! pairs, and report bundles echo the hashes of their inputs.

use sha2::{Digest, Sha256};

/// Hex-encoded SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Hex-encoded SHA-256 of a file's contents.
pub fn sha256_file(path: &std::path::Path) -> crate::Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}
