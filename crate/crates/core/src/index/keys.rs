//! System setup: the CI's key material and the reduced key handed to the SPU.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::One;
use rand::{CryptoRng, RngCore};

use super::hash::{HashAlg, SystemHash};
use super::IndexError;
use crate::paillier::{self, mod_inverse, KeygenParams, PaillierPublic, PaillierSecret};

/// Descriptor of the `L` function carried in the SPU key.
pub const L_DESCRIPTOR: &str = "paillier";

/// Default security parameter `k`.
pub const DEFAULT_SECURITY: u32 = 128;

/// `pk = (1^k, g, H, P, n, β, L)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicParams {
    security: u32,
    paillier: PaillierPublic,
    hash: HashAlg,
    base_point: BigUint,
    beta: BigUint,
}

/// `sk = (σ, γ, λ)` plus the Paillier factorisation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretParams {
    paillier: PaillierSecret,
    sigma: BigUint,
    gamma: BigUint,
    l_g_lambda: BigUint,
    lambda_inv: BigUint,
    phi_n_squared: BigUint,
}

/// `spk = (1^k, β, L, n)`: everything the SPU needs and nothing more.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpuKey {
    security: u32,
    beta: BigUint,
    n: BigUint,
    n_squared: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemKeys {
    pk: PublicParams,
    sk: SecretParams,
}

/// Runs Paillier keygen and derives the system keys.
pub fn setup<R: RngCore + CryptoRng>(
    security: u32,
    keygen: &KeygenParams,
    hash: HashAlg,
    rng: &mut R,
) -> Result<SystemKeys, IndexError> {
    let (ppk, psk) = paillier::keygen(keygen, rng)?;
    setup_with_paillier(security, ppk, psk, hash, rng)
}

/// Derives system keys from an existing Paillier key pair.
pub fn setup_with_paillier<R: RngCore + CryptoRng>(
    security: u32,
    ppk: PaillierPublic,
    psk: PaillierSecret,
    hash: HashAlg,
    rng: &mut R,
) -> Result<SystemKeys, IndexError> {
    let n = ppk.n().clone();
    let sigma = loop {
        let s = rng.gen_biguint_range(&BigUint::one(), &n);
        if s.gcd(&n).is_one() {
            break s;
        }
    };
    let base_point = rng.gen_biguint_range(&BigUint::one(), &n);
    SystemKeys::from_parts(security, ppk, psk, hash, base_point, sigma)
}

impl SystemKeys {
    /// Assembles keys from their stored components, recomputing `β` and `γ`.
    pub fn from_parts(
        security: u32,
        ppk: PaillierPublic,
        psk: PaillierSecret,
        hash: HashAlg,
        base_point: BigUint,
        sigma: BigUint,
    ) -> Result<Self, IndexError> {
        let n = ppk.n();
        if base_point == BigUint::ZERO || &base_point >= n {
            return Err(IndexError::InvalidKey("base point must lie in [1, n)"));
        }
        if sigma == BigUint::ZERO {
            return Err(IndexError::InvalidKey("sigma must be positive"));
        }
        let phi_n_squared = psk.phi_n_squared();
        let beta = &sigma * psk.lambda() % &phi_n_squared;
        let l_g_lambda = psk.l_of_g_lambda(&ppk);
        let gamma = &sigma * &l_g_lambda % n;
        let lambda_inv = mod_inverse(psk.lambda(), n)
            .ok_or(IndexError::InvalidKey("lambda is not invertible mod n"))?;
        Ok(Self {
            pk: PublicParams {
                security,
                paillier: ppk,
                hash,
                base_point,
                beta,
            },
            sk: SecretParams {
                paillier: psk,
                sigma,
                gamma,
                l_g_lambda,
                lambda_inv,
                phi_n_squared,
            },
        })
    }

    pub fn public(&self) -> &PublicParams {
        &self.pk
    }

    pub fn secret(&self) -> &SecretParams {
        &self.sk
    }

    /// The reduced key sent to the SPU.
    pub fn spu_key(&self) -> SpuKey {
        SpuKey::new(self.pk.security, self.pk.beta.clone(), self.pk.paillier.n().clone())
    }

    pub fn n(&self) -> &BigUint {
        self.pk.paillier.n()
    }

    pub fn hash(&self) -> SystemHash {
        self.pk.hash()
    }
}

impl PublicParams {
    /// Rebuilds a public key from stored fields. `β` cannot be checked
    /// without the secret key.
    pub fn from_stored(
        security: u32,
        paillier: PaillierPublic,
        hash: HashAlg,
        base_point: BigUint,
        beta: BigUint,
    ) -> Result<Self, IndexError> {
        if base_point == BigUint::ZERO || &base_point >= paillier.n() {
            return Err(IndexError::InvalidKey("base point must lie in [1, n)"));
        }
        if beta == BigUint::ZERO {
            return Err(IndexError::InvalidKey("beta must be positive"));
        }
        Ok(Self {
            security,
            paillier,
            hash,
            base_point,
            beta,
        })
    }

    pub fn security(&self) -> u32 {
        self.security
    }

    pub fn paillier(&self) -> &PaillierPublic {
        &self.paillier
    }

    pub fn hash_alg(&self) -> HashAlg {
        self.hash
    }

    pub fn hash(&self) -> SystemHash {
        SystemHash::new(self.hash, self.paillier.n().clone())
    }

    /// Generator `P` of the order-`n` group, modelled as `Z_n`.
    pub fn base_point(&self) -> &BigUint {
        &self.base_point
    }

    pub fn beta(&self) -> &BigUint {
        &self.beta
    }

    pub fn n(&self) -> &BigUint {
        self.paillier.n()
    }
}

impl SecretParams {
    pub fn paillier(&self) -> &PaillierSecret {
        &self.paillier
    }

    pub fn sigma(&self) -> &BigUint {
        &self.sigma
    }

    /// `γ = σ · L(g^λ mod n²) mod n`. Also serves as `γ₀`.
    pub fn gamma(&self) -> &BigUint {
        &self.gamma
    }

    pub fn lambda(&self) -> &BigUint {
        self.paillier.lambda()
    }

    /// `L(g^λ mod n²)`.
    pub fn l_g_lambda(&self) -> &BigUint {
        &self.l_g_lambda
    }

    /// `λ⁻¹ mod n`.
    pub fn lambda_inv(&self) -> &BigUint {
        &self.lambda_inv
    }

    pub fn phi(&self) -> BigUint {
        self.paillier.phi()
    }

    pub fn phi_n_squared(&self) -> &BigUint {
        &self.phi_n_squared
    }
}

impl SpuKey {
    pub fn new(security: u32, beta: BigUint, n: BigUint) -> Self {
        let n_squared = &n * &n;
        Self {
            security,
            beta,
            n,
            n_squared,
        }
    }

    pub fn security(&self) -> u32 {
        self.security
    }

    pub fn beta(&self) -> &BigUint {
        &self.beta
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn n_squared(&self) -> &BigUint {
        &self.n_squared
    }

    pub fn l_descriptor(&self) -> &'static str {
        L_DESCRIPTOR
    }
}
