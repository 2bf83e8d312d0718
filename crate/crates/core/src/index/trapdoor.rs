//! Per-letter searchable trapdoors.
//!
//! Basic: `b = ρ·H0(ηP)`, `s = ρ·γ·H(W)·H0(ηP)`.
//!
//! Hardened: `s = (ρ·γ₀·H0(ηP) + γ_j·z_j)·H'(W, s_j)` and `k = a_j·z_j`
//! with `γ_j = a_j·L(g^λ)·λ⁻¹ mod n`. The blinding term only cancels inside
//! the SPU's exponent when `z_j` is a multiple of `λ`, so `z_j = λ·z'_j`.
//! Consequently every published `k` is a multiple of `λ`; see
//! [`crate::attacks::lambda_leak_probe`].

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::{CryptoRng, RngCore};

use super::keys::SystemKeys;
use super::{IndexError, SharedSecret};
use crate::haplotype::Letter;

/// One trapdoor `(b, s[, k])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LetterTrapdoor {
    pub b: BigUint,
    pub s: BigUint,
    pub k: Option<BigUint>,
}

impl LetterTrapdoor {
    pub fn is_hardened(&self) -> bool {
        self.k.is_some()
    }
}

/// Per-trapdoor randomness of the hardened construction.
#[derive(Clone, Debug)]
pub struct HardenedRandomness {
    pub rho: BigUint,
    pub eta: BigUint,
    pub a: BigUint,
    pub z_prime: BigUint,
}

fn nonzero_below<R: RngCore + CryptoRng>(n: &BigUint, rng: &mut R) -> BigUint {
    rng.gen_biguint_range(&BigUint::one(), n)
}

/// `H0(η·P)` with the group modelled additively as `Z_n`.
fn h0_of(keys: &SystemKeys, eta: &BigUint) -> BigUint {
    let point = eta * keys.public().base_point() % keys.n();
    keys.hash().h0(&point)
}

pub fn gen_trapdoor_basic<R: RngCore + CryptoRng>(
    keys: &SystemKeys,
    w: Letter,
    rng: &mut R,
) -> LetterTrapdoor {
    let rho = nonzero_below(keys.n(), rng);
    let eta = nonzero_below(keys.n(), rng);
    gen_trapdoor_basic_with(keys, w, &rho, &eta)
}

/// Basic trapdoor with pinned `ρ` and `η`.
pub fn gen_trapdoor_basic_with(
    keys: &SystemKeys,
    w: Letter,
    rho: &BigUint,
    eta: &BigUint,
) -> LetterTrapdoor {
    let n = keys.n();
    let b = rho * h0_of(keys, eta) % n;
    let s = &b * keys.secret().gamma() % n * keys.hash().letter(w) % n;
    LetterTrapdoor { b, s, k: None }
}

pub fn gen_trapdoor_hardened<R: RngCore + CryptoRng>(
    keys: &SystemKeys,
    w: Letter,
    secret: &SharedSecret,
    position: u64,
    rng: &mut R,
) -> Result<LetterTrapdoor, IndexError> {
    let n = keys.n();
    let randomness = HardenedRandomness {
        rho: nonzero_below(n, rng),
        eta: nonzero_below(n, rng),
        a: nonzero_below(n, rng),
        z_prime: nonzero_below(n, rng),
    };
    gen_trapdoor_hardened_with(keys, w, secret, position, &randomness)
}

/// Hardened trapdoor with pinned randomness.
pub fn gen_trapdoor_hardened_with(
    keys: &SystemKeys,
    w: Letter,
    secret: &SharedSecret,
    position: u64,
    r: &HardenedRandomness,
) -> Result<LetterTrapdoor, IndexError> {
    if position == 0 {
        return Err(IndexError::ZeroPosition);
    }
    let n = keys.n();
    let sk = keys.secret();
    let hash = keys.hash();

    let b = &r.rho * h0_of(keys, &r.eta) % n;
    let z = sk.lambda() * &r.z_prime;
    let gamma_j = &r.a * sk.l_g_lambda() % n * sk.lambda_inv() % n;
    let salt = secret.derive_position_secret(&hash, position, w);
    let blinded = (&b * sk.gamma() + gamma_j * (&z % n)) % n;
    let s = blinded * hash.salted_letter(w, &salt) % n;
    let k = &r.a * z % sk.phi_n_squared();
    Ok(LetterTrapdoor { b, s, k: Some(k) })
}
