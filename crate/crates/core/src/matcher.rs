//! SPU-side matching over encrypted data.
//!
//! Everything here takes a [`SpuKey`] and never sees secret key material.
//! The equality test between a query ciphertext `c` and a trapdoor
//! `(b, s[, k])` is
//!
//! ```text
//! L(c^(β·b [+ k]) mod n²) == s (mod n)
//! ```
//!
//! which holds exactly when both encode the same (salted) letter hash.
//!
//! Index conventions are 0-based. In [`pp_lcs`] rows range over trapdoors
//! and columns over query letters; [`pp_edit`] swaps the roles, matching the
//! published pseudocode for each algorithm.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_bigint::BigUint;
use thiserror::Error;

use crate::index::{Binding, Edb, EncryptedIndex, EncryptedQuery, LetterTrapdoor, Mode, SpuKey};
use crate::paillier::{l_function, PaillierCiphertext};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchError {
    #[error("please input equal length segments (t = {t}, m = {m})")]
    LengthMismatch { t: usize, m: usize },
    #[error("index mode {index} does not match query mode {query}")]
    ModeMismatch { index: Mode, query: Mode },
    #[error("position-bound salts cannot be compared across positions")]
    PositionBinding,
    #[error("exponentiated ciphertext is not congruent to 1 mod n")]
    LPrecondition,
    #[error("database modulus differs from the SPU key modulus")]
    KeyMismatch,
    #[error("ciphertext outside Z*_(n^2)")]
    InvalidCiphertext,
}

/// Stable short codes used in result files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    LengthMismatch,
    ModeMismatch,
    PositionBinding,
    LPrecondition,
    KeyMismatch,
    InvalidCiphertext,
}

impl MatchError {
    pub fn code(&self) -> ErrorCode {
        match self {
            MatchError::LengthMismatch { .. } => ErrorCode::LengthMismatch,
            MatchError::ModeMismatch { .. } => ErrorCode::ModeMismatch,
            MatchError::PositionBinding => ErrorCode::PositionBinding,
            MatchError::LPrecondition => ErrorCode::LPrecondition,
            MatchError::KeyMismatch => ErrorCode::KeyMismatch,
            MatchError::InvalidCiphertext => ErrorCode::InvalidCiphertext,
        }
    }
}

impl ErrorCode {
    const ALL: [(ErrorCode, &'static str); 6] = [
        (ErrorCode::LengthMismatch, "length-mismatch"),
        (ErrorCode::ModeMismatch, "mode-mismatch"),
        (ErrorCode::PositionBinding, "position-binding"),
        (ErrorCode::LPrecondition, "l-precondition"),
        (ErrorCode::KeyMismatch, "key-mismatch"),
        (ErrorCode::InvalidCiphertext, "invalid-ciphertext"),
    ];

    pub fn as_str(self) -> &'static str {
        Self::ALL.iter().find(|(c, _)| *c == self).unwrap().1
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .find(|(_, name)| *name == s)
            .map(|(c, _)| *c)
            .ok_or_else(|| format!("unknown error code {s:?}"))
    }
}

/// Shared-length algorithm run by the SPU.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Lcs,
    Hamming,
    Edit,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Lcs, Algorithm::Hamming, Algorithm::Edit];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Lcs => "lcs",
            Algorithm::Hamming => "hamming",
            Algorithm::Edit => "edit",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lcs" => Ok(Algorithm::Lcs),
            "hamming" => Ok(Algorithm::Hamming),
            "edit" => Ok(Algorithm::Edit),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

/// The keyword-search `Test` abstraction: decides whether an encrypted
/// query element and a trapdoor embed the same keyword.
pub trait MatchPredicate {
    type Query;
    type Trapdoor;

    fn evaluate(&self, query: &Self::Query, trapdoor: &Self::Trapdoor) -> Result<bool, MatchError>;
}

/// The Paillier-based instantiation.
#[derive(Clone, Copy, Debug)]
pub struct PaillierMatch<'a> {
    spk: &'a SpuKey,
}

impl<'a> PaillierMatch<'a> {
    pub fn new(spk: &'a SpuKey) -> Self {
        Self { spk }
    }
}

impl MatchPredicate for PaillierMatch<'_> {
    type Query = PaillierCiphertext;
    type Trapdoor = LetterTrapdoor;

    fn evaluate(&self, c: &PaillierCiphertext, trap: &LetterTrapdoor) -> Result<bool, MatchError> {
        match_predicate(self.spk, c, trap)
    }
}

fn check_ciphertext(spk: &SpuKey, c: &PaillierCiphertext) -> Result<(), MatchError> {
    let v = c.value();
    if v == &BigUint::ZERO || v >= spk.n_squared() {
        return Err(MatchError::InvalidCiphertext);
    }
    Ok(())
}

fn compare(spk: &SpuKey, raised: &BigUint, s: &BigUint) -> Result<bool, MatchError> {
    let l = l_function(raised, spk.n()).map_err(|_| MatchError::LPrecondition)?;
    Ok(l % spk.n() == s % spk.n())
}

/// Evaluates `L(c^(β·b + k) mod n²) == s (mod n)` directly.
pub fn match_predicate(
    spk: &SpuKey,
    c: &PaillierCiphertext,
    trap: &LetterTrapdoor,
) -> Result<bool, MatchError> {
    check_ciphertext(spk, c)?;
    let mut exponent = spk.beta() * &trap.b;
    if let Some(k) = &trap.k {
        exponent += k;
    }
    let raised = c.value().modpow(&exponent, spk.n_squared());
    compare(spk, &raised, &trap.s)
}

/// Fixed-base exponentiation with 4-bit digits: stores `base^(16^i)` so
/// that raising the same base to many exponents costs roughly one modular
/// multiplication per nonzero digit plus 30, instead of a full square-and-
/// multiply chain.
#[derive(Clone, Debug)]
struct FixedBase {
    table: Vec<BigUint>,
    modulus: BigUint,
}

impl FixedBase {
    fn new(base: &BigUint, modulus: &BigUint, max_bits: u64) -> Self {
        let digits = max_bits.div_ceil(4) as usize;
        let mut table = Vec::with_capacity(digits);
        let mut cur = base % modulus;
        for _ in 0..digits {
            // Four plain squarings; modpow would redo its Montgomery setup
            // for every entry.
            let mut next = &cur * &cur % modulus;
            for _ in 0..3 {
                next = &next * &next % modulus;
            }
            table.push(cur);
            cur = next;
        }
        Self {
            table,
            modulus: modulus.clone(),
        }
    }

    fn pow(&self, e: &BigUint) -> BigUint {
        let digits = e.to_radix_le(16);
        if digits.len() > self.table.len() {
            return self.table[0].modpow(e, &self.modulus);
        }
        let m = &self.modulus;
        let mut acc: Option<BigUint> = None;
        let mut result: Option<BigUint> = None;
        for d in (1..16u8).rev() {
            for (i, _) in digits.iter().enumerate().filter(|(_, &x)| x == d) {
                acc = Some(match acc {
                    None => self.table[i].clone(),
                    Some(a) => a * &self.table[i] % m,
                });
            }
            if let Some(a) = &acc {
                result = Some(match result {
                    None => a.clone(),
                    Some(r) => r * a % m,
                });
            }
        }
        result.unwrap_or_else(|| BigUint::from(1u32) % m)
    }
}

/// A query ciphertext prepared for repeated matching. Each query letter is
/// compared against many trapdoors in the DP algorithms, so `c^β` is paid
/// once per letter and the per-trapdoor exponentiations run against
/// fixed-base tables.
#[derive(Clone, Debug)]
pub struct PreparedCiphertext {
    c: BigUint,
    c_beta: FixedBase,
    c_table: Option<FixedBase>,
}

impl PreparedCiphertext {
    /// Prepares for both basic and hardened trapdoors.
    pub fn new(spk: &SpuKey, c: &PaillierCiphertext) -> Result<Self, MatchError> {
        Self::build(spk, c, true)
    }

    /// Prepares for trapdoors without a `k` component only; hardened
    /// trapdoors still work but take the slow path.
    pub fn basic(spk: &SpuKey, c: &PaillierCiphertext) -> Result<Self, MatchError> {
        Self::build(spk, c, false)
    }

    fn build(spk: &SpuKey, c: &PaillierCiphertext, hardened: bool) -> Result<Self, MatchError> {
        check_ciphertext(spk, c)?;
        let n2 = spk.n_squared();
        let c_beta = c.value().modpow(spk.beta(), n2);
        Ok(Self {
            c: c.value().clone(),
            c_beta: FixedBase::new(&c_beta, n2, spk.n().bits()),
            c_table: hardened.then(|| FixedBase::new(c.value(), n2, n2.bits())),
        })
    }

    /// Same result as [`match_predicate`] on the original ciphertext.
    pub fn matches(&self, spk: &SpuKey, trap: &LetterTrapdoor) -> Result<bool, MatchError> {
        let n2 = spk.n_squared();
        let mut raised = self.c_beta.pow(&trap.b);
        if let Some(k) = &trap.k {
            let ck = match &self.c_table {
                Some(table) => table.pow(k),
                None => self.c.modpow(k, n2),
            };
            raised = raised * ck % n2;
        }
        compare(spk, &raised, &trap.s)
    }
}

/// A whole query prepared for matching.
#[derive(Clone, Debug)]
pub struct PreparedQuery {
    mode: Mode,
    letters: Vec<PreparedCiphertext>,
}

impl PreparedQuery {
    pub fn new(spk: &SpuKey, query: &EncryptedQuery) -> Result<Self, MatchError> {
        let letters = query
            .ciphertexts()
            .iter()
            .map(|c| PreparedCiphertext::build(spk, c, query.mode().is_hardened()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            mode: query.mode(),
            letters,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

fn check_modes(ind: &EncryptedIndex, query: &PreparedQuery, cross_position: bool) -> Result<(), MatchError> {
    if ind.mode() != query.mode {
        return Err(MatchError::ModeMismatch {
            index: ind.mode(),
            query: query.mode,
        });
    }
    if cross_position && ind.mode() == Mode::Hardened(Binding::PositionAndLetter) {
        return Err(MatchError::PositionBinding);
    }
    Ok(())
}

/// LCS length over an abstract equality oracle; `eq(i, j)` compares
/// trapdoor `i` with query letter `j`.
pub fn lcs_with<F>(t: usize, m: usize, mut eq: F) -> Result<usize, MatchError>
where
    F: FnMut(usize, usize) -> Result<bool, MatchError>,
{
    let mut w = vec![vec![0usize; m + 1]; t + 1];
    for i in 1..=t {
        for j in 1..=m {
            w[i][j] = if eq(i - 1, j - 1)? {
                1 + w[i - 1][j - 1]
            } else if w[i - 1][j] >= w[i][j - 1] {
                w[i - 1][j]
            } else {
                w[i][j - 1]
            };
        }
    }
    Ok(w[t][m])
}

/// Positional match count; `eq(i)` compares trapdoor `i` with query letter `i`.
pub fn hamming_with<F>(t: usize, m: usize, mut eq: F) -> Result<usize, MatchError>
where
    F: FnMut(usize) -> Result<bool, MatchError>,
{
    if t != m {
        return Err(MatchError::LengthMismatch { t, m });
    }
    let mut seg = 0;
    for i in 0..t {
        if eq(i)? {
            seg += 1;
        }
    }
    Ok(seg)
}

/// `max(m, t)` minus edit distance; `eq(i, j)` compares query letter `i`
/// with trapdoor `j`.
pub fn edit_with<F>(m: usize, t: usize, mut eq: F) -> Result<usize, MatchError>
where
    F: FnMut(usize, usize) -> Result<bool, MatchError>,
{
    let (len1, len2) = (m, t);
    let len = if len1 < len2 { len2 } else { len1 };
    let mut dp = vec![vec![0usize; len2 + 1]; len1 + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in dp[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 0..len1 {
        for j in 0..len2 {
            if eq(i, j)? {
                dp[i + 1][j + 1] = dp[i][j];
            } else {
                let replace = dp[i][j] + 1;
                let insert = dp[i][j + 1] + 1;
                let delete = dp[i + 1][j] + 1;
                let mut min = if replace > insert { insert } else { replace };
                min = if delete > min { min } else { delete };
                dp[i + 1][j + 1] = min;
            }
        }
    }
    Ok(len - dp[len1][len2])
}

/// Privacy-preserving LCS length.
pub fn pp_lcs(spk: &SpuKey, ind: &EncryptedIndex, query: &PreparedQuery) -> Result<usize, MatchError> {
    check_modes(ind, query, true)?;
    let traps = ind.trapdoors();
    lcs_with(traps.len(), query.len(), |i, j| query.letters[j].matches(spk, &traps[i]))
}

/// Privacy-preserving Hamming shared length. Requires `t == m`.
pub fn pp_hamming(spk: &SpuKey, ind: &EncryptedIndex, query: &PreparedQuery) -> Result<usize, MatchError> {
    check_modes(ind, query, false)?;
    let traps = ind.trapdoors();
    hamming_with(traps.len(), query.len(), |i| query.letters[i].matches(spk, &traps[i]))
}

/// Privacy-preserving edit shared length.
pub fn pp_edit(spk: &SpuKey, ind: &EncryptedIndex, query: &PreparedQuery) -> Result<usize, MatchError> {
    check_modes(ind, query, true)?;
    let traps = ind.trapdoors();
    edit_with(query.len(), traps.len(), |i, j| query.letters[i].matches(spk, &traps[j]))
}

/// Runs one algorithm on one entry.
pub fn run_algorithm(
    spk: &SpuKey,
    ind: &EncryptedIndex,
    query: &PreparedQuery,
    algo: Algorithm,
) -> Result<usize, MatchError> {
    match algo {
        Algorithm::Lcs => pp_lcs(spk, ind, query),
        Algorithm::Hamming => pp_hamming(spk, ind, query),
        Algorithm::Edit => pp_edit(spk, ind, query),
    }
}

/// One row of a test run: which entry, which algorithm, and the shared
/// length or an error code. Carries no positions or subsequences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryResult {
    pub entry: usize,
    pub algorithm: Algorithm,
    pub outcome: Result<usize, ErrorCode>,
}

/// `QL`: one result per EDB entry, in entry order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryResultList {
    results: Vec<QueryResult>,
}

impl QueryResultList {
    pub fn new(results: Vec<QueryResult>) -> Self {
        Self { results }
    }

    pub fn results(&self) -> &[QueryResult] {
        &self.results
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }
}

/// Default worker count for [`test_all`].
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Runs `algo` between the query and every EDB entry using up to
/// `workers` threads. Per-entry failures are recorded in the result list;
/// only a key/database mismatch or a malformed query aborts the batch.
pub fn test_all(
    spk: &SpuKey,
    edb: &Edb,
    query: &EncryptedQuery,
    algo: Algorithm,
    workers: usize,
) -> Result<QueryResultList, MatchError> {
    if edb.n() != spk.n() {
        return Err(MatchError::KeyMismatch);
    }
    let prepared = PreparedQuery::new(spk, query)?;
    let entries = edb.entries();
    let run = |z: usize| QueryResult {
        entry: z,
        algorithm: algo,
        outcome: run_algorithm(spk, &entries[z].index, &prepared, algo).map_err(|e| e.code()),
    };

    let workers = workers.clamp(1, entries.len());
    if workers == 1 {
        return Ok(QueryResultList::new((0..entries.len()).map(run).collect()));
    }

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<QueryResult>>> = Mutex::new(vec![None; entries.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let z = next.fetch_add(1, Ordering::Relaxed);
                if z >= entries.len() {
                    break;
                }
                let result = run(z);
                slots.lock().unwrap()[z] = Some(result);
            });
        }
    });
    let results = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every entry is evaluated"))
        .collect();
    Ok(QueryResultList::new(results))
}
