//! Paillier cryptosystem.
//!
//! Keys default to the base `g = n + 1`, for which `L(g^λ mod n²) = λ mod n`.
//! Arbitrary bases are accepted through [`PaillierPublic::with_base`] as long
//! as `L(g^λ mod n²)` is invertible modulo `n`.

pub mod prime;

use std::time::{Duration, Instant};

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};
use thiserror::Error;

/// Smallest modulus accepted by [`keygen`].
pub const MIN_TEST_BITS: u64 = 128;
/// Modulus size for full-size (non-test) keys.
pub const FULL_BITS: u64 = 2048;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PaillierError {
    #[error("invalid modulus size: {0} bits")]
    InvalidBits(u64),
    #[error("prime generation timed out")]
    PrimeGenerationTimeout,
    #[error("invalid key: {0}")]
    InvalidKey(&'static str),
    #[error("plaintext out of range [0, n)")]
    PlaintextOutOfRange,
    #[error("randomness r is not a unit modulo n")]
    DegenerateRandomness,
    #[error("L-function input is not congruent to 1 mod n")]
    NotOneModN,
    #[error("ciphertext is not a valid element of Z*_(n^2) for this key")]
    ModulusMismatch,
    #[error("scalar must be at least 1")]
    ZeroScalar,
}

/// Public half of a Paillier key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaillierPublic {
    n: BigUint,
    n_squared: BigUint,
    g: BigUint,
    bits: u64,
}

/// Secret half of a Paillier key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaillierSecret {
    p: BigUint,
    q: BigUint,
    p_prime: Option<BigUint>,
    q_prime: Option<BigUint>,
    lambda: BigUint,
    mu: BigUint,
}

/// A Paillier ciphertext, an element of `Z*_{n²}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PaillierCiphertext(BigUint);

impl PaillierCiphertext {
    pub fn from_value(value: BigUint) -> Self {
        Self(value)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_value(self) -> BigUint {
        self.0
    }
}

/// Parameters for [`keygen`].
#[derive(Clone, Debug)]
pub struct KeygenParams {
    pub bits: u64,
    pub safe_primes: bool,
    pub timeout: Option<Duration>,
}

impl KeygenParams {
    /// Fast keys for tests: plain random primes.
    pub fn test(bits: u64) -> Self {
        Self {
            bits,
            safe_primes: false,
            timeout: None,
        }
    }

    /// 2048-bit modulus built from safe primes.
    pub fn full() -> Self {
        Self {
            bits: FULL_BITS,
            safe_primes: true,
            timeout: None,
        }
    }
}

impl Default for KeygenParams {
    fn default() -> Self {
        Self::full()
    }
}

/// `L(x) = (x - 1) / n`, defined for `x ≡ 1 (mod n)`.
pub fn l_function(x: &BigUint, n: &BigUint) -> Result<BigUint, PaillierError> {
    if x.is_zero() {
        return Err(PaillierError::NotOneModN);
    }
    let (quot, rem) = (x - 1u32).div_rem(n);
    if !rem.is_zero() {
        return Err(PaillierError::NotOneModN);
    }
    Ok(quot)
}

/// Carmichael's function for `n = pq` with distinct odd primes.
pub fn carmichael(p: &BigUint, q: &BigUint) -> BigUint {
    (p - 1u32).lcm(&(q - 1u32))
}

/// Modular inverse via the extended Euclidean algorithm.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    let a = BigInt::from(a % m);
    let m_int = BigInt::from(m.clone());
    let egcd = a.extended_gcd(&m_int);
    if !egcd.gcd.is_one() {
        return None;
    }
    let inv = egcd.x.mod_floor(&m_int);
    inv.to_biguint()
}

/// Generates a Paillier key pair with `g = n + 1`.
pub fn keygen<R: RngCore + CryptoRng>(
    params: &KeygenParams,
    rng: &mut R,
) -> Result<(PaillierPublic, PaillierSecret), PaillierError> {
    let bits = params.bits;
    if bits < MIN_TEST_BITS || !bits.is_multiple_of(2) {
        return Err(PaillierError::InvalidBits(bits));
    }
    let deadline = params.timeout.map(|t| Instant::now() + t);
    let half = bits / 2;
    loop {
        let (p, p_prime, q, q_prime) = if params.safe_primes {
            let (p, pp) = prime::random_safe_prime(half, deadline, rng)?;
            let (q, qp) = prime::random_safe_prime(half, deadline, rng)?;
            (p, Some(pp), q, Some(qp))
        } else {
            let p = prime::random_prime(half, deadline, rng)?;
            let q = prime::random_prime(half, deadline, rng)?;
            (p, None, q, None)
        };
        if p == q || (&p * &q).bits() != bits {
            continue;
        }
        match PaillierSecret::assemble(p, q, p_prime, q_prime, None) {
            Ok(pair) => return Ok(pair),
            // gcd(λ, n) ≠ 1 only for pathological prime pairs; draw again.
            Err(PaillierError::InvalidKey(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

impl PaillierPublic {
    /// Public key for modulus `n` with the default base `n + 1`.
    pub fn new(n: BigUint) -> Result<Self, PaillierError> {
        if n.is_even() || n < BigUint::from(15u32) {
            return Err(PaillierError::InvalidKey("modulus must be an odd composite"));
        }
        let g = &n + 1u32;
        Ok(Self::from_parts(n, g))
    }

    /// Public key with an explicit base. The base is checked against the
    /// secret key in [`PaillierSecret::from_primes_with_base`]; here only
    /// range and unit-ness are validated.
    pub fn with_base(n: BigUint, g: BigUint) -> Result<Self, PaillierError> {
        let pk = Self::new(n)?;
        if g.is_zero() || g >= pk.n_squared || !g.gcd(&pk.n_squared).is_one() {
            return Err(PaillierError::InvalidKey("base is not a unit modulo n^2"));
        }
        Ok(Self::from_parts(pk.n, g))
    }

    fn from_parts(n: BigUint, g: BigUint) -> Self {
        let n_squared = &n * &n;
        let bits = n.bits();
        Self {
            n,
            n_squared,
            g,
            bits,
        }
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn n_squared(&self) -> &BigUint {
        &self.n_squared
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    fn uses_default_base(&self) -> bool {
        self.g == &self.n + 1u32
    }

    /// `g^x mod n²`, using the binomial shortcut for `g = n + 1`.
    fn g_pow(&self, x: &BigUint) -> BigUint {
        if self.uses_default_base() {
            (x * &self.n + 1u32) % &self.n_squared
        } else {
            self.g.modpow(x, &self.n_squared)
        }
    }

    /// Draws `r` uniformly from the units of `Z_n`.
    pub fn random_unit<R: RngCore + CryptoRng>(&self, rng: &mut R) -> BigUint {
        loop {
            let r = rng.gen_biguint_range(&BigUint::one(), &self.n);
            if r.gcd(&self.n).is_one() {
                return r;
            }
        }
    }

    /// Encrypts `x` with fresh randomness.
    pub fn encrypt<R: RngCore + CryptoRng>(
        &self,
        x: &BigUint,
        rng: &mut R,
    ) -> Result<PaillierCiphertext, PaillierError> {
        let r = self.random_unit(rng);
        self.encrypt_with(x, &r)
    }

    /// Encrypts `x` as `g^x · r^n mod n²` with caller-supplied `r`.
    pub fn encrypt_with(&self, x: &BigUint, r: &BigUint) -> Result<PaillierCiphertext, PaillierError> {
        if x >= &self.n {
            return Err(PaillierError::PlaintextOutOfRange);
        }
        if r.is_zero() || r >= &self.n || !r.gcd(&self.n).is_one() {
            return Err(PaillierError::DegenerateRandomness);
        }
        let value = self.g_pow(x) * r.modpow(&self.n, &self.n_squared) % &self.n_squared;
        Ok(PaillierCiphertext(value))
    }

    /// Checks `0 < y < n²` and `gcd(y, n²) = 1`.
    pub fn validate(&self, y: &PaillierCiphertext) -> Result<(), PaillierError> {
        let v = &y.0;
        if v.is_zero() || v >= &self.n_squared || !v.gcd(&self.n).is_one() {
            return Err(PaillierError::ModulusMismatch);
        }
        Ok(())
    }

    /// Ciphertext of `x1 + x2 mod n`.
    pub fn hom_add(
        &self,
        y1: &PaillierCiphertext,
        y2: &PaillierCiphertext,
    ) -> Result<PaillierCiphertext, PaillierError> {
        self.validate(y1)?;
        self.validate(y2)?;
        Ok(PaillierCiphertext(&y1.0 * &y2.0 % &self.n_squared))
    }

    /// Ciphertext of `sigma · x mod n`.
    pub fn hom_scale(
        &self,
        y: &PaillierCiphertext,
        sigma: &BigUint,
    ) -> Result<PaillierCiphertext, PaillierError> {
        self.validate(y)?;
        if sigma.is_zero() {
            return Err(PaillierError::ZeroScalar);
        }
        Ok(PaillierCiphertext(y.0.modpow(sigma, &self.n_squared)))
    }
}

impl PaillierSecret {
    /// Builds a key pair from explicit primes with the default base.
    pub fn from_primes(
        p: BigUint,
        q: BigUint,
    ) -> Result<(PaillierPublic, PaillierSecret), PaillierError> {
        Self::assemble(p, q, None, None, None)
    }

    /// Builds a key pair from explicit primes and an explicit base `g`.
    pub fn from_primes_with_base(
        p: BigUint,
        q: BigUint,
        g: BigUint,
    ) -> Result<(PaillierPublic, PaillierSecret), PaillierError> {
        Self::assemble(p, q, None, None, Some(g))
    }

    fn assemble(
        p: BigUint,
        q: BigUint,
        p_prime: Option<BigUint>,
        q_prime: Option<BigUint>,
        g: Option<BigUint>,
    ) -> Result<(PaillierPublic, PaillierSecret), PaillierError> {
        if p == q || p.is_even() || q.is_even() {
            return Err(PaillierError::InvalidKey("p and q must be distinct odd primes"));
        }
        let n = &p * &q;
        let pk = match g {
            Some(g) => PaillierPublic::with_base(n.clone(), g)?,
            None => PaillierPublic::new(n.clone())?,
        };
        let lambda = carmichael(&p, &q);
        if !lambda.gcd(&n).is_one() {
            return Err(PaillierError::InvalidKey("gcd(lambda, n) != 1"));
        }
        let g_lambda = pk.g.modpow(&lambda, &pk.n_squared);
        let l_val = l_function(&g_lambda, &n)
            .map_err(|_| PaillierError::InvalidKey("base order is not a multiple of n"))?;
        let mu = mod_inverse(&l_val, &n)
            .ok_or(PaillierError::InvalidKey("L(g^lambda) is not invertible mod n"))?;
        let sk = PaillierSecret {
            p,
            q,
            p_prime,
            q_prime,
            lambda,
            mu,
        };
        Ok((pk, sk))
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn p_prime(&self) -> Option<&BigUint> {
        self.p_prime.as_ref()
    }

    pub fn q_prime(&self) -> Option<&BigUint> {
        self.q_prime.as_ref()
    }

    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }

    pub fn mu(&self) -> &BigUint {
        &self.mu
    }

    /// `φ(n) = (p - 1)(q - 1)`.
    pub fn phi(&self) -> BigUint {
        (&self.p - 1u32) * (&self.q - 1u32)
    }

    /// `φ(n²) = n · φ(n)`.
    pub fn phi_n_squared(&self) -> BigUint {
        &self.p * &self.q * self.phi()
    }

    /// Restores a secret key from stored fields, re-deriving `λ` and `μ` and
    /// checking them against `pk`.
    pub fn restore(
        pk: &PaillierPublic,
        p: BigUint,
        q: BigUint,
        p_prime: Option<BigUint>,
        q_prime: Option<BigUint>,
    ) -> Result<Self, PaillierError> {
        let (derived_pk, sk) = Self::assemble(p, q, p_prime, q_prime, Some(pk.g.clone()))?;
        if &derived_pk != pk {
            return Err(PaillierError::InvalidKey("secret primes do not match public modulus"));
        }
        Ok(sk)
    }

    /// Recovers the plaintext `x < n`.
    pub fn decrypt(
        &self,
        pk: &PaillierPublic,
        y: &PaillierCiphertext,
    ) -> Result<BigUint, PaillierError> {
        pk.validate(y)?;
        let u = y.0.modpow(&self.lambda, &pk.n_squared);
        let l_val = l_function(&u, &pk.n)?;
        Ok(l_val * &self.mu % &pk.n)
    }

    /// `L(g^λ mod n²)`, the scalar that scales every decryption.
    pub fn l_of_g_lambda(&self, pk: &PaillierPublic) -> BigUint {
        let u = pk.g.modpow(&self.lambda, &pk.n_squared);
        l_function(&u, &pk.n).expect("validated at key construction")
    }
}
