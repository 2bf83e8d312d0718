//! Probable-prime and safe-prime generation.
//!
//! Candidates are sieved incrementally against a table of small primes so
//! that only survivors pay for a Miller-Rabin round.

use std::sync::OnceLock;
use std::time::Instant;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{CryptoRng, RngCore};

use super::PaillierError;

const SIEVE_LIMIT: usize = 1 << 14;
const MR_ROUNDS: usize = 40;
/// Width of the incremental search window before a fresh random start.
const WINDOW: u64 = 1 << 16;

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut composite = vec![false; SIEVE_LIMIT];
        let mut out = Vec::new();
        for i in 2..SIEVE_LIMIT {
            if !composite[i] {
                out.push(i as u64);
                let mut j = i * i;
                while j < SIEVE_LIMIT {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        out
    })
}

/// Miller-Rabin with `rounds` random bases after trial division.
pub fn is_probable_prime<R: RngCore + CryptoRng>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for &p in small_primes().iter().take(256) {
        let p_big = BigUint::from(p);
        if n == &p_big {
            return true;
        }
        if (n % p).is_zero() {
            return false;
        }
    }
    miller_rabin(n, rounds, rng)
}

fn miller_rabin<R: RngCore + CryptoRng>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;

    let witness = |a: &BigUint| -> bool {
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            return true;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                return true;
            }
        }
        false
    };

    if !witness(&two) {
        return false;
    }
    let upper = n - &two;
    for _ in 1..rounds {
        let a = rng.gen_biguint_range(&two, &upper);
        if !witness(&a) {
            return false;
        }
    }
    true
}

fn random_odd_with_top_bit<R: RngCore + CryptoRng>(bits: u64, rng: &mut R) -> BigUint {
    let mut c = rng.gen_biguint(bits);
    c.set_bit(bits - 1, true);
    c.set_bit(0, true);
    c
}

fn residues(c: &BigUint) -> Vec<u64> {
    small_primes()
        .iter()
        .map(|&p| (c % p).to_u64().expect("residue fits in u64"))
        .collect()
}

fn check_deadline(deadline: Option<Instant>) -> Result<(), PaillierError> {
    match deadline {
        Some(d) if Instant::now() > d => Err(PaillierError::PrimeGenerationTimeout),
        _ => Ok(()),
    }
}

/// Random probable prime with exactly `bits` bits.
pub fn random_prime<R: RngCore + CryptoRng>(
    bits: u64,
    deadline: Option<Instant>,
    rng: &mut R,
) -> Result<BigUint, PaillierError> {
    if bits < 8 {
        return Err(PaillierError::InvalidBits(bits));
    }
    loop {
        let base = random_odd_with_top_bit(bits, rng);
        let res = residues(&base);
        let mut delta = 0u64;
        while delta < WINDOW {
            let clean = small_primes()
                .iter()
                .zip(&res)
                .all(|(&p, &r)| !(r + delta).is_multiple_of(p));
            if clean {
                check_deadline(deadline)?;
                let cand = &base + delta;
                if cand.bits() == bits && miller_rabin(&cand, MR_ROUNDS, rng) {
                    return Ok(cand);
                }
            }
            delta += 2;
        }
        check_deadline(deadline)?;
    }
}

/// Random safe prime `p = 2p' + 1` with `p` of exactly `bits` bits.
/// Returns `(p, p')`.
pub fn random_safe_prime<R: RngCore + CryptoRng>(
    bits: u64,
    deadline: Option<Instant>,
    rng: &mut R,
) -> Result<(BigUint, BigUint), PaillierError> {
    if bits < 8 {
        return Err(PaillierError::InvalidBits(bits));
    }
    loop {
        let base = random_odd_with_top_bit(bits - 1, rng);
        let res = residues(&base);
        let mut delta = 0u64;
        while delta < WINDOW {
            // Reject when either p' or 2p'+1 has a small factor. The small
            // primes themselves are far below the candidate range.
            let clean = small_primes().iter().zip(&res).all(|(&sp, &r)| {
                let q = (r + delta) % sp;
                q != 0 && !(2 * q + 1).is_multiple_of(sp)
            });
            if clean {
                check_deadline(deadline)?;
                let sophie = &base + delta;
                let safe: BigUint = (&sophie << 1u32) + 1u32;
                if safe.bits() == bits
                    && miller_rabin(&sophie, 1, rng)
                    && miller_rabin(&safe, 1, rng)
                    && miller_rabin(&sophie, MR_ROUNDS, rng)
                    && miller_rabin(&safe, MR_ROUNDS, rng)
                {
                    return Ok((safe, sophie));
                }
            }
            delta += 2;
        }
        check_deadline(deadline)?;
    }
}

/// True when `p` is prime and `(p - 1) / 2` is prime.
pub fn is_safe_prime<R: RngCore + CryptoRng>(p: &BigUint, rng: &mut R) -> bool {
    if p.is_even() || p < &BigUint::from(5u32) {
        return false;
    }
    let sophie: BigUint = (p - 1u32) >> 1u32;
    is_probable_prime(p, MR_ROUNDS, rng) && is_probable_prime(&sophie, MR_ROUNDS, rng)
}
