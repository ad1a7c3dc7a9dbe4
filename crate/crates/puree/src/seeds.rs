//! Child seeds derived from the master seed and a component path, so any
//! stage can be re-run on its own and still see the same randomness.

use sha2::{Digest, Sha256};

/// First 8 bytes (little-endian) of `SHA-256(master_le ‖ path)`.
pub fn derive_seed(master: u64, path: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(path.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_and_path_sensitive() {
        assert_eq!(
            derive_seed(7, "pretrain/net0"),
            derive_seed(7, "pretrain/net0")
        );
        assert_ne!(
            derive_seed(7, "pretrain/net0"),
            derive_seed(7, "pretrain/net1")
        );
        assert_ne!(
            derive_seed(7, "pretrain/net0"),
            derive_seed(8, "pretrain/net0")
        );
    }

    #[test]
    fn known_value() {
        // SHA-256 of eight zero bytes starts with af 55 70 f5 a1 81 0b 7a.
        assert_eq!(
            derive_seed(0, ""),
            u64::from_le_bytes([0xaf, 0x55, 0x70, 0xf5, 0xa1, 0x81, 0x0b, 0x7a])
        );
    }
}
