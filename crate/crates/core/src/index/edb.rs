//! Encrypted database (CI side) and encrypted queries (TI side).

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};

use super::keys::{PublicParams, SystemKeys};
use super::trapdoor::{gen_trapdoor_basic, gen_trapdoor_hardened, LetterTrapdoor};
use super::{IndexError, Mode, SharedSecret};
use crate::haplotype::{Haplotype, OtpKey};
use crate::paillier::PaillierCiphertext;

/// Searchable encoding of one haplotype: the `(B, S[, K])` arrays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedIndex {
    mode: Mode,
    trapdoors: Vec<LetterTrapdoor>,
}

impl EncryptedIndex {
    pub fn new(mode: Mode, trapdoors: Vec<LetterTrapdoor>) -> Result<Self, IndexError> {
        if trapdoors.is_empty() {
            return Err(IndexError::MalformedIndex("empty index"));
        }
        if trapdoors.iter().any(|t| t.is_hardened() != mode.is_hardened()) {
            return Err(IndexError::MalformedIndex("K array presence disagrees with mode"));
        }
        Ok(Self { mode, trapdoors })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn trapdoors(&self) -> &[LetterTrapdoor] {
        &self.trapdoors
    }

    /// `t`, the indexed haplotype length.
    pub fn len(&self) -> usize {
        self.trapdoors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trapdoors.is_empty()
    }

    pub fn b_values(&self) -> impl Iterator<Item = &BigUint> {
        self.trapdoors.iter().map(|t| &t.b)
    }

    pub fn s_values(&self) -> impl Iterator<Item = &BigUint> {
        self.trapdoors.iter().map(|t| &t.s)
    }

    pub fn k_values(&self) -> impl Iterator<Item = &BigUint> {
        self.trapdoors.iter().filter_map(|t| t.k.as_ref())
    }
}

/// One `(ind_i, Z_i)` pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdbEntry {
    pub index: EncryptedIndex,
    pub payload: Vec<u8>,
}

/// The outsourced database.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edb {
    mode: Mode,
    n: BigUint,
    entries: Vec<EdbEntry>,
}

impl Edb {
    pub fn new(mode: Mode, n: BigUint, entries: Vec<EdbEntry>) -> Result<Self, IndexError> {
        if entries.is_empty() {
            return Err(IndexError::EmptyDatabase);
        }
        if entries.iter().any(|e| e.index.mode() != mode) {
            return Err(IndexError::MalformedIndex("entry mode disagrees with database mode"));
        }
        Ok(Self { mode, n, entries })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn entries(&self) -> &[EdbEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `C = (c_1, …, c_m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedQuery {
    mode: Mode,
    ciphertexts: Vec<PaillierCiphertext>,
}

impl EncryptedQuery {
    pub fn new(mode: Mode, ciphertexts: Vec<PaillierCiphertext>) -> Result<Self, IndexError> {
        if ciphertexts.is_empty() {
            return Err(IndexError::MalformedIndex("empty query"));
        }
        Ok(Self { mode, ciphertexts })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn ciphertexts(&self) -> &[PaillierCiphertext] {
        &self.ciphertexts
    }

    pub fn len(&self) -> usize {
        self.ciphertexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ciphertexts.is_empty()
    }
}

fn check_mode(mode: Mode, secret: Option<&SharedSecret>) -> Result<(), IndexError> {
    match (mode, secret) {
        (Mode::Basic, None) => Ok(()),
        (Mode::Hardened(_), None) => Err(IndexError::MissingSecret),
        (Mode::Hardened(binding), Some(s)) if s.binding() == binding => Ok(()),
        _ => Err(IndexError::ModeMismatch { mode }),
    }
}

/// Builds the searchable index of one haplotype.
pub fn gen_index<R: RngCore + CryptoRng>(
    keys: &SystemKeys,
    h: &Haplotype,
    mode: Mode,
    secret: Option<&SharedSecret>,
    rng: &mut R,
) -> Result<EncryptedIndex, IndexError> {
    check_mode(mode, secret)?;
    let trapdoors = h
        .letters()
        .iter()
        .enumerate()
        .map(|(j, &w)| match secret {
            None => Ok(gen_trapdoor_basic(keys, w, rng)),
            Some(s) => gen_trapdoor_hardened(keys, w, s, j as u64 + 1, rng),
        })
        .collect::<Result<Vec<_>, _>>()?;
    EncryptedIndex::new(mode, trapdoors)
}

/// Encrypts a haplotype database. Returns the EDB and the one-time pads,
/// which stay with the CI.
pub fn gen_edb<R: RngCore + CryptoRng>(
    keys: &SystemKeys,
    gdb: &[Haplotype],
    mode: Mode,
    secret: Option<&SharedSecret>,
    rng: &mut R,
) -> Result<(Edb, Vec<OtpKey>), IndexError> {
    if gdb.is_empty() {
        return Err(IndexError::EmptyDatabase);
    }
    check_mode(mode, secret)?;
    let mut entries = Vec::with_capacity(gdb.len());
    let mut pads = Vec::with_capacity(gdb.len());
    for h in gdb {
        let index = gen_index(keys, h, mode, secret, rng)?;
        let pad = OtpKey::random(h.len(), rng);
        let payload = pad.encrypt(h)?;
        entries.push(EdbEntry { index, payload });
        pads.push(pad);
    }
    Ok((Edb::new(mode, keys.n().clone(), entries)?, pads))
}

/// Encrypts a query haplotype under the public key.
pub fn gen_query<R: RngCore + CryptoRng>(
    pk: &PublicParams,
    x: &Haplotype,
    mode: Mode,
    secret: Option<&SharedSecret>,
    rng: &mut R,
) -> Result<EncryptedQuery, IndexError> {
    check_mode(mode, secret)?;
    let hash = pk.hash();
    let paillier = pk.paillier();
    let ciphertexts = x
        .letters()
        .iter()
        .enumerate()
        .map(|(j, &w)| {
            let plaintext = match secret {
                None => hash.letter(w),
                Some(s) => {
                    let salt = s.derive_position_secret(&hash, j as u64 + 1, w);
                    hash.salted_letter(w, &salt)
                }
            };
            paillier.encrypt(&plaintext, rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    EncryptedQuery::new(mode, ciphertexts)
}
