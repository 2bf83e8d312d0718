//! CI- and TI-side cryptography: setup, letter trapdoors, encrypted
//! databases and queries, and the Diffie-Hellman shared secret.

pub mod dh;
pub mod edb;
pub mod hash;
pub mod keys;
pub mod trapdoor;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use thiserror::Error;

use crate::haplotype::{HaplotypeError, Letter};
use crate::paillier::PaillierError;
use hash::SystemHash;

pub use edb::{gen_edb, gen_query, Edb, EdbEntry, EncryptedIndex, EncryptedQuery};
pub use keys::{setup, setup_with_paillier, PublicParams, SecretParams, SpuKey, SystemKeys};
pub use trapdoor::{gen_trapdoor_basic, gen_trapdoor_hardened, LetterTrapdoor};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error(transparent)]
    Paillier(#[from] PaillierError),
    #[error(transparent)]
    Haplotype(#[from] HaplotypeError),
    #[error("invalid key: {0}")]
    InvalidKey(&'static str),
    #[error("hardened mode requires a shared secret")]
    MissingSecret,
    #[error("mode {mode} does not match the supplied secret")]
    ModeMismatch { mode: Mode },
    #[error("empty haplotype database")]
    EmptyDatabase,
    #[error("positions are 1-based")]
    ZeroPosition,
    #[error("index arrays are inconsistent: {0}")]
    MalformedIndex(&'static str),
    #[error("Diffie-Hellman group parameters differ")]
    GroupMismatch,
    #[error("invalid Diffie-Hellman public value")]
    InvalidPeerValue,
    #[error("invalid Diffie-Hellman group: {0}")]
    InvalidGroup(&'static str),
}

/// How the per-position hash salt is bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Binding {
    /// `x_j = H(W_j)`: a letter matches at any position. Needed for LCS and
    /// edit distance, which compare across positions.
    LetterOnly,
    /// `x_j = H(p_j ‖ W_j)`: a letter matches only at the same position.
    PositionAndLetter,
}

/// Index/query construction mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Basic,
    Hardened(Binding),
}

impl Mode {
    pub fn is_hardened(self) -> bool {
        matches!(self, Mode::Hardened(_))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Basic => "basic",
            Mode::Hardened(Binding::LetterOnly) => "hardened-letter",
            Mode::Hardened(Binding::PositionAndLetter) => "hardened-position",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "basic" => Ok(Mode::Basic),
            "hardened-letter" => Ok(Mode::Hardened(Binding::LetterOnly)),
            "hardened-position" | "hardened" => Ok(Mode::Hardened(Binding::PositionAndLetter)),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Binding::LetterOnly => "letter",
            Binding::PositionAndLetter => "position",
        })
    }
}

impl FromStr for Binding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "letter" | "letter-only" => Ok(Binding::LetterOnly),
            "position" | "position-and-letter" => Ok(Binding::PositionAndLetter),
            other => Err(format!("unknown binding {other:?}")),
        }
    }
}

/// The `(a, b)` coefficients the CI shares with a permitted TI.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedSecret {
    a: BigUint,
    b: BigUint,
    binding: Binding,
}

impl SharedSecret {
    pub fn new(a: BigUint, b: BigUint, binding: Binding) -> Self {
        Self { a, b, binding }
    }

    /// Uniform `(a, b)` in `Z_n`, for tests and demos without a key exchange.
    pub fn random<R: rand::RngCore + rand::CryptoRng>(n: &BigUint, binding: Binding, rng: &mut R) -> Self {
        use num_bigint::RandBigInt;
        Self::new(rng.gen_biguint_below(n), rng.gen_biguint_below(n), binding)
    }

    pub fn a(&self) -> &BigUint {
        &self.a
    }

    pub fn b(&self) -> &BigUint {
        &self.b
    }

    pub fn binding(&self) -> Binding {
        self.binding
    }

    pub fn with_binding(&self, binding: Binding) -> Self {
        Self {
            binding,
            ..self.clone()
        }
    }

    /// The salt `s_j = a · x_j + b mod n` for the letter at `position`.
    pub fn derive_position_secret(&self, hash: &SystemHash, position: u64, w: Letter) -> BigUint {
        let x = match self.binding {
            Binding::LetterOnly => hash.letter(w),
            Binding::PositionAndLetter => hash.position_letter(position, w),
        };
        (&self.a * x + &self.b) % hash.modulus()
    }
}
