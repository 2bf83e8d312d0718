//! Segment-wise timing of plaintext and privacy-preserving algorithms.
//!
//! Two random haplotypes of `segments × seg_len` letters are cut into
//! segments; one side is indexed as a CI database entry, the other
//! encrypted as a TI query, segment by segment. A repeat runs the chosen
//! algorithm over every segment pair. PP timings cover only the SPU side
//! (query preparation plus the DP), not key generation or encryption.
//! Plaintext rows get one untimed warm-up repeat first; a plaintext repeat
//! is under a millisecond, so the first cold pass would otherwise skew
//! whichever algorithm happens to run first.
//!
//! The plaintext LCS baseline recovers the subsequence itself, as the
//! original non-private routine does; the PP variant returns the length only.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{CryptoRng, RngCore};

use crate::distance::{edit_shared, hamming_shared, lcs_sequence};
use crate::haplotype::{segment, Haplotype, Letter};
use crate::index::edb::gen_index;
use crate::index::{gen_query, EncryptedIndex, IndexError, Mode, SharedSecret, SystemKeys};
use crate::matcher::{run_algorithm, Algorithm, MatchError, PreparedQuery};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchConfig {
    pub segments: usize,
    pub seg_len: usize,
    pub algorithms: Vec<Algorithm>,
    pub repeat: usize,
    pub mode: Mode,
}

impl BenchConfig {
    /// 36 × 50 letters, mean of 10.
    pub fn desk() -> Self {
        Self {
            segments: 50,
            seg_len: 36,
            algorithms: Algorithm::ALL.to_vec(),
            repeat: 10,
            mode: Mode::Basic,
        }
    }

    /// 36 × 500 letters, mean of 100. Hours of CPU time.
    pub fn full() -> Self {
        Self {
            segments: 500,
            repeat: 100,
            ..Self::desk()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Plaintext,
    PrivacyPreserving,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Plaintext => "plain",
            Variant::PrivacyPreserving => "pp",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub variant: Variant,
    pub samples: Vec<Duration>,
    /// Sum of shared lengths over all segments, identical across repeats.
    pub shared: usize,
}

impl BenchRow {
    pub fn mean(&self) -> Duration {
        let total: Duration = self.samples.iter().sum();
        total / self.samples.len().max(1) as u32
    }

    pub fn min(&self) -> Duration {
        self.samples.iter().copied().min().unwrap_or_default()
    }

    pub fn max(&self) -> Duration {
        self.samples.iter().copied().max().unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn row(&self, algorithm: Algorithm, variant: Variant) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.variant == variant)
    }

    pub fn to_table(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "{} segments x {} letters, mode {}, {} repeat(s)\n",
            c.segments, c.seg_len, c.mode, c.repeat
        );
        let _ = writeln!(
            out,
            "{:<8} {:<6} {:>14} {:>14} {:>14} {:>8}",
            "algo", "kind", "mean_ms", "min_ms", "max_ms", "shared"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} {:<6} {:>14.4} {:>14.4} {:>14.4} {:>8}",
                r.algorithm.to_string(),
                r.variant.to_string(),
                ms(r.mean()),
                ms(r.min()),
                ms(r.max()),
                r.shared
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("algorithm,variant,segments,seg_len,repeat,mean_ms,min_ms,max_ms,shared\n");
        let c = &self.config;
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.6},{:.6},{:.6},{}",
                r.algorithm,
                r.variant,
                c.segments,
                c.seg_len,
                c.repeat,
                ms(r.mean()),
                ms(r.min()),
                ms(r.max()),
                r.shared
            );
        }
        out
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("segments, seg_len and repeat must all be positive")]
    EmptyWorkload,
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error("PP and plaintext disagree for {0}")]
    Disagreement(Algorithm),
}

/// Encrypted segment pairs ready for timing.
pub struct Workload {
    pub db: Vec<Haplotype>,
    pub query: Vec<Haplotype>,
    pub indexes: Vec<EncryptedIndex>,
    pub queries: Vec<crate::index::EncryptedQuery>,
}

impl Workload {
    pub fn generate<R: RngCore + CryptoRng>(
        keys: &SystemKeys,
        config: &BenchConfig,
        secret: Option<&SharedSecret>,
        rng: &mut R,
    ) -> Result<Self, BenchError> {
        if config.segments == 0 || config.seg_len == 0 || config.repeat == 0 {
            return Err(BenchError::EmptyWorkload);
        }
        let total = config.segments * config.seg_len;
        let x = Haplotype::random(total, &Letter::ALPHABET, rng);
        let y = Haplotype::random(total, &Letter::ALPHABET, rng);
        let db = segment(&x, config.seg_len).map_err(IndexError::from)?.segments().to_vec();
        let query = segment(&y, config.seg_len).map_err(IndexError::from)?.segments().to_vec();
        let indexes = db
            .iter()
            .map(|h| gen_index(keys, h, config.mode, secret, rng))
            .collect::<Result<Vec<_>, _>>()?;
        let queries = query
            .iter()
            .map(|h| gen_query(keys.public(), h, config.mode, secret, rng))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            db,
            query,
            indexes,
            queries,
        })
    }
}

fn plaintext(algo: Algorithm, x: &Haplotype, y: &Haplotype) -> usize {
    match algo {
        Algorithm::Lcs => lcs_sequence(x, y).len(),
        Algorithm::Hamming => hamming_shared(x, y).expect("segments have equal length"),
        Algorithm::Edit => edit_shared(y, x),
    }
}

/// Times every configured algorithm on `work`, plaintext first.
pub fn run(keys: &SystemKeys, config: &BenchConfig, work: &Workload) -> Result<BenchReport, BenchError> {
    let spk = keys.spu_key();
    let mut rows = Vec::new();
    let plain_pass = |algo| -> usize {
        work.db
            .iter()
            .zip(&work.query)
            .map(|(x, y)| plaintext(algo, std::hint::black_box(x), std::hint::black_box(y)))
            .sum()
    };
    for &algo in &config.algorithms {
        std::hint::black_box(plain_pass(algo));
    }
    for &algo in &config.algorithms {
        let mut samples = Vec::with_capacity(config.repeat);
        let mut shared = 0;
        for _ in 0..config.repeat {
            let start = Instant::now();
            shared = plain_pass(algo);
            samples.push(start.elapsed());
        }
        rows.push(BenchRow {
            algorithm: algo,
            variant: Variant::Plaintext,
            samples,
            shared,
        });
    }
    for &algo in &config.algorithms {
        let mut samples = Vec::with_capacity(config.repeat);
        let mut shared = 0;
        for _ in 0..config.repeat {
            let start = Instant::now();
            let mut sum = 0;
            for (ind, q) in work.indexes.iter().zip(&work.queries) {
                let prepared = PreparedQuery::new(&spk, q)?;
                sum += run_algorithm(&spk, ind, &prepared, algo)?;
            }
            samples.push(start.elapsed());
            shared = sum;
        }
        let plain = rows
            .iter()
            .find(|r: &&BenchRow| r.algorithm == algo && r.variant == Variant::Plaintext)
            .map(|r| r.shared);
        if plain != Some(shared) {
            return Err(BenchError::Disagreement(algo));
        }
        rows.push(BenchRow {
            algorithm: algo,
            variant: Variant::PrivacyPreserving,
            samples,
            shared,
        });
    }
    Ok(BenchReport {
        config: config.clone(),
        rows,
    })
}
