//! Finite-field Diffie-Hellman between CI and TI, and the derivation of the
//! shared `(a, b)` coefficients from the agreed value.

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::{CryptoRng, RngCore};

use super::hash::{HashAlg, SystemHash};
use super::{Binding, IndexError, SharedSecret};

/// RFC 2409 Oakley group 2 (1024-bit MODP).
const MODP_1024: &str = "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1\
29024E088A67CC74020BBEA63B139B22514A08798E3404DD\
EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245\
E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED\
EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE65381\
FFFFFFFFFFFFFFFF";

/// RFC 3526 group 14 (2048-bit MODP).
const MODP_2048: &str = "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1\
29024E088A67CC74020BBEA63B139B22514A08798E3404DD\
EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245\
E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED\
EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D\
C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F\
83655D23DCA3AD961C62F356208552BB9ED529077096966D\
670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B\
E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9\
DE2BCBF6955817183995497CEA956AE515D2261898FA0510\
15728E5A8AACAA68FFFFFFFFFFFFFFFF";

const KDF_A: &[u8] = b"kdf-a";
const KDF_B: &[u8] = b"kdf-b";

/// Domain parameters `(p, g)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DhGroup {
    p: BigUint,
    g: BigUint,
}

impl DhGroup {
    pub fn modp_1024() -> Self {
        Self {
            p: BigUint::parse_bytes(MODP_1024.as_bytes(), 16).unwrap(),
            g: BigUint::from(2u32),
        }
    }

    pub fn modp_2048() -> Self {
        Self {
            p: BigUint::parse_bytes(MODP_2048.as_bytes(), 16).unwrap(),
            g: BigUint::from(2u32),
        }
    }

    /// Custom parameters, e.g. a small group for tests.
    pub fn custom(p: BigUint, g: BigUint) -> Result<Self, IndexError> {
        if p.bits() < 16 || !p.bit(0) {
            return Err(IndexError::InvalidGroup("p must be an odd prime of at least 16 bits"));
        }
        if g <= BigUint::one() || g >= &p - 1u32 {
            return Err(IndexError::InvalidGroup("g must lie in [2, p-2]"));
        }
        Ok(Self { p, g })
    }

    /// Name of a standard group, if this is one.
    pub fn name(&self) -> Option<&'static str> {
        if self == &Self::modp_1024() {
            Some("modp1024")
        } else if self == &Self::modp_2048() {
            Some("modp2048")
        } else {
            None
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "modp1024" => Some(Self::modp_1024()),
            "modp2048" => Some(Self::modp_2048()),
            _ => None,
        }
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn bits(&self) -> u64 {
        self.p.bits()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DhPrivate {
    group: DhGroup,
    x: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DhPublic {
    group: DhGroup,
    y: BigUint,
}

impl DhPrivate {
    pub fn from_parts(group: DhGroup, x: BigUint) -> Self {
        Self { group, x }
    }

    pub fn group(&self) -> &DhGroup {
        &self.group
    }

    pub fn exponent(&self) -> &BigUint {
        &self.x
    }

    pub fn public(&self) -> DhPublic {
        DhPublic {
            group: self.group.clone(),
            y: self.group.g.modpow(&self.x, &self.group.p),
        }
    }
}

impl DhPublic {
    pub fn from_parts(group: DhGroup, y: BigUint) -> Self {
        Self { group, y }
    }

    pub fn group(&self) -> &DhGroup {
        &self.group
    }

    pub fn value(&self) -> &BigUint {
        &self.y
    }
}

pub fn dh_keypair<R: RngCore + CryptoRng>(group: &DhGroup, rng: &mut R) -> (DhPrivate, DhPublic) {
    let two = BigUint::from(2u32);
    let x = rng.gen_biguint_range(&two, &(&group.p - 1u32));
    let private = DhPrivate {
        group: group.clone(),
        x,
    };
    let public = private.public();
    (private, public)
}

/// Agrees on `g^{xy}` and hashes it into `(a, b) ∈ Z_n²`.
pub fn dh_derive(
    private: &DhPrivate,
    peer: &DhPublic,
    n: &BigUint,
    hash: HashAlg,
    binding: Binding,
) -> Result<SharedSecret, IndexError> {
    if private.group != peer.group {
        return Err(IndexError::GroupMismatch);
    }
    let p = &private.group.p;
    if peer.y <= BigUint::one() || peer.y >= p - 1u32 {
        return Err(IndexError::InvalidPeerValue);
    }
    let shared = peer.y.modpow(&private.x, p);
    let width = p.bits().div_ceil(8) as usize;
    let mut bytes = vec![0u8; width.saturating_sub(shared.to_bytes_be().len())];
    bytes.extend(shared.to_bytes_be());

    let kdf = SystemHash::new(hash, n.clone());
    Ok(SharedSecret::new(
        kdf.tagged(KDF_A, &bytes),
        kdf.tagged(KDF_B, &bytes),
        binding,
    ))
}
