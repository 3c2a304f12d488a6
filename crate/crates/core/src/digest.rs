//! SHA-256 helpers used for artifact digests and the provenance chain.

use sha2::{Digest, Sha256};

/// Name recorded alongside every digest this crate writes.
pub const ALGORITHM: &str = "sha256";

pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}

#[cfg(test)]
mod tests {
    #[test]
    fn known_vector() {
        assert_eq!(
            super::sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
