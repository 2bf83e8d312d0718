//! Domain-separated hashes onto `Z_n`.
//!
//! `H`, `H0` and `H'` are one expandable hash with distinct tags. Digest
//! blocks `D(len(tag) ‖ tag ‖ ctr ‖ input)` are concatenated until they
//! cover `bits(n) + 128` bits, then reduced modulo `n`.

use std::fmt;
use std::str::FromStr;

use digest::Digest;
use md5::Md5;
use num_bigint::BigUint;
use sha2::Sha256;

use crate::haplotype::Letter;

const TAG_H: &[u8] = b"H";
const TAG_H0: &[u8] = b"H0";
const TAG_H_PRIME: &[u8] = b"Hp";

/// Underlying digest.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum HashAlg {
    #[default]
    Sha256,
    /// Compatibility with the MD5-based reference evaluation.
    Md5,
}

impl fmt::Display for HashAlg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HashAlg::Sha256 => "sha256",
            HashAlg::Md5 => "md5",
        })
    }
}

impl FromStr for HashAlg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sha256" => Ok(HashAlg::Sha256),
            "md5" => Ok(HashAlg::Md5),
            other => Err(format!("unknown hash {other:?}")),
        }
    }
}

/// The public hash family bound to a modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemHash {
    alg: HashAlg,
    n: BigUint,
    width: usize,
}

impl SystemHash {
    pub fn new(alg: HashAlg, n: BigUint) -> Self {
        let width = n.bits().div_ceil(8) as usize;
        Self { alg, n, width }
    }

    pub fn alg(&self) -> HashAlg {
        self.alg
    }

    pub fn modulus(&self) -> &BigUint {
        &self.n
    }

    /// `H(W)`.
    pub fn letter(&self, w: Letter) -> BigUint {
        self.expand(TAG_H, &[w.byte()])
    }

    /// `H(p ‖ W)` with a 1-based position.
    pub fn position_letter(&self, position: u64, w: Letter) -> BigUint {
        let mut input = position.to_be_bytes().to_vec();
        input.push(w.byte());
        self.expand(TAG_H, &input)
    }

    /// `H0(x)` for a group element `x ∈ Z_n`.
    pub fn h0(&self, point: &BigUint) -> BigUint {
        self.expand(TAG_H0, &self.fixed_width(point))
    }

    /// `H'(W, salt)`.
    pub fn salted_letter(&self, w: Letter, salt: &BigUint) -> BigUint {
        let mut input = vec![w.byte()];
        input.extend(self.fixed_width(salt));
        self.expand(TAG_H_PRIME, &input)
    }

    /// Hash of arbitrary bytes under a caller-chosen tag.
    pub fn tagged(&self, tag: &[u8], input: &[u8]) -> BigUint {
        self.expand(tag, input)
    }

    fn fixed_width(&self, x: &BigUint) -> Vec<u8> {
        let bytes = x.to_bytes_be();
        let mut out = vec![0u8; self.width.saturating_sub(bytes.len())];
        out.extend(bytes);
        out
    }

    fn expand(&self, tag: &[u8], input: &[u8]) -> BigUint {
        let need = (self.n.bits() as usize + 128).div_ceil(8);
        let mut out = Vec::with_capacity(need + 32);
        let mut ctr = 0u32;
        while out.len() < need {
            match self.alg {
                HashAlg::Sha256 => out.extend(block::<Sha256>(tag, ctr, input)),
                HashAlg::Md5 => out.extend(block::<Md5>(tag, ctr, input)),
            }
            ctr += 1;
        }
        out.truncate(need);
        BigUint::from_bytes_be(&out) % &self.n
    }
}

fn block<D: Digest>(tag: &[u8], ctr: u32, input: &[u8]) -> Vec<u8> {
    let mut d = D::new();
    d.update([tag.len() as u8]);
    d.update(tag);
    d.update(ctr.to_be_bytes());
    d.update(input);
    d.finalize().to_vec()
}
