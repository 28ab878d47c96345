//! `E_S`: AES-128 in GCM mode. Ciphertexts are `nonce(12) || body || tag(16)`.

use aes_gcm::aead::{Aead, KeyInit};
use aes_gcm::{Aes128Gcm, Nonce as GcmNonce};
use rand::RngCore;

use super::CryptoError;

pub const SYM_KEY_LEN: usize = 16;
pub const SYM_NONCE_LEN: usize = 12;
pub const SYM_TAG_LEN: usize = 16;
/// Ciphertext expansion over the plaintext.
pub const SYM_OVERHEAD: usize = SYM_NONCE_LEN + SYM_TAG_LEN;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymKey(pub [u8; SYM_KEY_LEN]);

impl SymKey {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut k = [0u8; SYM_KEY_LEN];
        rng.fill_bytes(&mut k);
        SymKey(k)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self, CryptoError> {
        bytes
            .try_into()
            .map(SymKey)
            .map_err(|_| CryptoError::Encoding("symmetric key width"))
    }
}

impl std::fmt::Debug for SymKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SymKey(..)")
    }
}

pub fn sym_encrypt<R: RngCore + ?Sized>(key: &SymKey, plaintext: &[u8], rng: &mut R) -> Vec<u8> {
    let cipher = Aes128Gcm::new(&key.0.into());
    let mut nonce = [0u8; SYM_NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let body = cipher
        .encrypt(GcmNonce::from_slice(&nonce), plaintext)
        .expect("in-memory encryption cannot fail");
    let mut out = Vec::with_capacity(SYM_OVERHEAD + plaintext.len());
    out.extend_from_slice(&nonce);
    out.extend_from_slice(&body);
    out
}

pub fn sym_decrypt(key: &SymKey, ciphertext: &[u8]) -> Result<Vec<u8>, CryptoError> {
    if ciphertext.len() < SYM_OVERHEAD {
        return Err(CryptoError::Authentication);
    }
    let (nonce, body) = ciphertext.split_at(SYM_NONCE_LEN);
    Aes128Gcm::new(&key.0.into())
        .decrypt(GcmNonce::from_slice(nonce), body)
        .map_err(|_| CryptoError::Authentication)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn roundtrip_and_wrong_key() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let k = SymKey::random(&mut rng);
        let mut m = [0u8; 16];
        rng.fill_bytes(&mut m);
        let c = sym_encrypt(&k, &m, &mut rng);
        assert_eq!(sym_decrypt(&k, &c).unwrap(), m);
        let k2 = SymKey::random(&mut rng);
        assert_eq!(sym_decrypt(&k2, &c), Err(CryptoError::Authentication));
    }

    #[test]
    fn every_single_bit_flip_is_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let k = SymKey::random(&mut rng);
        let c = sym_encrypt(&k, b"tiny", &mut rng);
        for byte in 0..c.len() {
            for bit in 0..8 {
                let mut t = c.clone();
                t[byte] ^= 1 << bit;
                assert!(sym_decrypt(&k, &t).is_err(), "flip {byte}:{bit} accepted");
            }
        }
    }

    #[test]
    fn fresh_nonce_per_encryption() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let k = SymKey::random(&mut rng);
        let a = sym_encrypt(&k, b"same", &mut rng);
        let b = sym_encrypt(&k, b"same", &mut rng);
        assert_ne!(a, b);
    }

    #[test]
    fn truncated_ciphertext_is_rejected() {
        let k = SymKey([1; 16]);
        assert!(sym_decrypt(&k, &[0u8; SYM_OVERHEAD - 1]).is_err());
    }
}
