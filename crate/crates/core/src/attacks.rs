//! Attacks on the basic scheme and the negative controls showing the
//! hardened construction resists them.
//!
//! * [`ratio_identifier_attack`]: a basic trapdoor leaks `δ = s·b⁻¹ = γ·H(W)`.
//!   Guessing the first letter fixes `γ`, after which every other `δ_j`
//!   decodes by table lookup. Recovering `γ` with an integer gcd does not
//!   work over `Z_n`, so the attack walks the (small) candidate table instead.
//! * [`offline_dictionary_attack`]: the SPU encrypts its own single-letter
//!   queries and runs the match predicate against each trapdoor.
//! * [`lambda_leak_probe`]: every hardened `k` is a multiple of `λ`, so the
//!   gcd of enough of them tends to `λ` itself.

use num_bigint::BigUint;
use num_integer::Integer;
use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::haplotype::{Haplotype, Letter};
use crate::index::hash::SystemHash;
use crate::index::{EncryptedIndex, LetterTrapdoor, PublicParams, SpuKey};
use crate::matcher::{MatchError, MatchPredicate, PaillierMatch};
use crate::paillier::{mod_inverse, PaillierError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("the ratio attack needs at least 2 trapdoors, got {0}")]
    TooFewTrapdoors(usize),
    #[error("empty candidate alphabet")]
    EmptyAlphabet,
    #[error("index is not hardened")]
    NotHardened,
    #[error("need at least 2 k values, got {0}")]
    TooFewKValues(usize),
    #[error(transparent)]
    Paillier(#[from] PaillierError),
    #[error(transparent)]
    Match(#[from] MatchError),
}

/// Outcome of the ratio attack.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioRecovery {
    /// Best guess per position. Positions that did not decode fall back to
    /// the first alphabet letter.
    pub letters: Vec<Letter>,
    /// Which positions decoded consistently under the chosen `γ`.
    pub decoded: Vec<bool>,
    /// Fraction of decoded positions.
    pub confidence: f64,
}

impl RatioRecovery {
    pub fn haplotype(&self) -> Haplotype {
        Haplotype::new(self.letters.clone()).expect("non-empty by construction")
    }
}

/// Recovers a basic-mode haplotype from its trapdoors alone.
pub fn ratio_identifier_attack(
    trapdoors: &[LetterTrapdoor],
    hash: &SystemHash,
    alphabet: &[Letter],
) -> Result<RatioRecovery, AttackError> {
    if trapdoors.len() < 2 {
        return Err(AttackError::TooFewTrapdoors(trapdoors.len()));
    }
    if alphabet.is_empty() {
        return Err(AttackError::EmptyAlphabet);
    }
    let n = hash.modulus();
    let deltas: Vec<Option<BigUint>> = trapdoors
        .iter()
        .map(|t| mod_inverse(&t.b, n).map(|inv| &t.s * inv % n))
        .collect();
    let hashes: Vec<(Letter, BigUint)> = alphabet.iter().map(|&w| (w, hash.letter(w))).collect();

    let mut best: Option<(usize, Vec<Option<Letter>>)> = None;
    if let Some(delta0) = &deltas[0] {
        for (_, h0) in &hashes {
            let Some(h0_inv) = mod_inverse(h0, n) else { continue };
            let gamma = delta0 * h0_inv % n;
            let guess: Vec<Option<Letter>> = deltas
                .iter()
                .map(|d| {
                    let d = d.as_ref()?;
                    hashes
                        .iter()
                        .find(|(_, hw)| &(&gamma * hw % n) == d)
                        .map(|(w, _)| *w)
                })
                .collect();
            let hits = guess.iter().filter(|g| g.is_some()).count();
            if best.as_ref().is_none_or(|(b, _)| hits > *b) {
                best = Some((hits, guess));
            }
        }
    }
    let guess = best.map(|(_, g)| g).unwrap_or_else(|| vec![None; trapdoors.len()]);
    let decoded: Vec<bool> = guess.iter().map(Option::is_some).collect();
    let confidence = decoded.iter().filter(|&&d| d).count() as f64 / trapdoors.len() as f64;
    Ok(RatioRecovery {
        letters: guess.into_iter().map(|g| g.unwrap_or(alphabet[0])).collect(),
        decoded,
        confidence,
    })
}

/// Outcome of the dictionary attack.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DictionaryRecovery {
    /// The letter whose encryption matched each trapdoor, if any did.
    pub letters: Vec<Option<Letter>>,
    pub predicate_calls: usize,
    pub hits: usize,
}

impl DictionaryRecovery {
    pub fn recovered_positions(&self) -> usize {
        self.letters.iter().filter(|l| l.is_some()).count()
    }
}

/// SPU-side dictionary attack: for each trapdoor, encrypt every candidate
/// letter as a basic single-letter query and test it. Uses only public
/// material and stops at the first hit per position, so a basic index of
/// length `t` costs at most `|alphabet|·t` predicate evaluations.
pub fn offline_dictionary_attack<R: RngCore + CryptoRng>(
    spk: &SpuKey,
    pk: &PublicParams,
    ind: &EncryptedIndex,
    alphabet: &[Letter],
    rng: &mut R,
) -> Result<DictionaryRecovery, AttackError> {
    let hash = pk.hash();
    let predicate = PaillierMatch::new(spk);
    let mut probes = Vec::with_capacity(alphabet.len());
    for &w in alphabet {
        probes.push((w, pk.paillier().encrypt(&hash.letter(w), rng)?));
    }
    let mut out = DictionaryRecovery {
        letters: Vec::with_capacity(ind.len()),
        predicate_calls: 0,
        hits: 0,
    };
    for trap in ind.trapdoors() {
        let mut found = None;
        for (w, c) in &probes {
            out.predicate_calls += 1;
            if predicate.evaluate(c, trap)? {
                found = Some(*w);
                out.hits += 1;
                break;
            }
        }
        out.letters.push(found);
    }
    Ok(out)
}

/// Result of [`lambda_leak_probe`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaLeak {
    pub k_count: usize,
    pub gcd: BigUint,
    /// `gcd / λ`; always an integer because each `k` is a multiple of `λ`.
    pub ratio: BigUint,
}

impl LambdaLeak {
    /// True when the gcd pins `λ` down to a small multiple.
    pub fn leaks(&self, bound: u32) -> bool {
        self.ratio <= BigUint::from(bound)
    }
}

/// gcd of every published `k` divided by `λ`. `λ` is used only to report
/// the ratio; the gcd itself is computable by anyone holding the EDB.
pub fn lambda_leak_probe(
    indexes: &[EncryptedIndex],
    lambda: &BigUint,
) -> Result<LambdaLeak, AttackError> {
    let mut ks = Vec::new();
    for ind in indexes {
        if !ind.mode().is_hardened() {
            return Err(AttackError::NotHardened);
        }
        ks.extend(ind.k_values());
    }
    if ks.len() < 2 {
        return Err(AttackError::TooFewKValues(ks.len()));
    }
    let gcd = ks.iter().fold(BigUint::ZERO, |acc, k| acc.gcd(k));
    let ratio = &gcd / lambda;
    Ok(LambdaLeak {
        k_count: ks.len(),
        gcd,
        ratio,
    })
}

/// Fraction of positions where `guess` agrees with `truth`.
pub fn accuracy(guess: &[Letter], truth: &[Letter]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = guess.iter().zip(truth).filter(|(g, t)| g == t).count();
    hits as f64 / truth.len() as f64
}

/// The one-line machine-readable summary printed by the `attack` command.
pub fn summary_line(name: &str, mode: impl std::fmt::Display, success_rate: f64) -> String {
    format!("attack={name} mode={mode} success_rate={success_rate:.4}")
}
