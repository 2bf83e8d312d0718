use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ppgrt::index::hash::HashAlg;
use ppgrt::index::{Binding, Mode};
use ppgrt::matcher::Algorithm;

/// Privacy-preserving genetic relatedness testing.
///
/// Roles: the certified institution (CI) runs `setup` and `encrypt-db`, the
/// test issuer (TI) runs `gen-query` and `send`, the storage/processing unit
/// (SPU) runs `test` or `serve` with the reduced key only.
#[derive(Debug, Parser)]
#[command(name = "ppgrt", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CI: generate pk.keys, sk.keys and spk.keys.
    Setup(SetupArgs),
    /// CI: encrypt a haplotype file into an EDB.
    EncryptDb(EncryptDbArgs),
    /// TI: encrypt a query haplotype.
    GenQuery(GenQueryArgs),
    /// SPU: run a query against an EDB from files.
    Test(TestArgs),
    /// SPU: serve queries over TCP.
    Serve(ServeArgs),
    /// TI: send a query to a running SPU service.
    Send(SendArgs),
    /// Time plaintext and privacy-preserving algorithms.
    Bench(BenchArgs),
    /// Run an attack demonstration on freshly generated data.
    Attack(AttackArgs),
    /// Plaintext reference results in the result file format.
    Oracle(OracleArgs),
    /// Diffie-Hellman exchange of the CI/TI shared secret.
    #[command(subcommand)]
    Keyexchange(KeyexchangeCommand),
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Seed for reproducible randomness; falls back to PPGRT_SEED, then OS entropy.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KeyMode {
    /// Plain random primes.
    Test,
    /// Safe primes p = 2p'+1, q = 2q'+1.
    Safe,
}

#[derive(Debug, Args)]
pub struct SetupArgs {
    #[arg(long, default_value_t = 2048)]
    pub bits: u64,
    #[arg(long, value_enum, default_value_t = KeyMode::Safe)]
    pub mode: KeyMode,
    #[arg(long, default_value_t = HashAlg::Sha256, value_parser = parse_hash)]
    pub hash: HashAlg,
    #[arg(long, default_value_t = ppgrt::index::keys::DEFAULT_SECURITY)]
    pub security: u32,
    /// Abort prime generation after this many seconds.
    #[arg(long)]
    pub timeout: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct EncryptDbArgs {
    /// Haplotype file, one per line, `#` comments allowed.
    #[arg(long)]
    pub gdb: PathBuf,
    /// The CI's sk.keys.
    #[arg(long)]
    pub keys: PathBuf,
    #[arg(long, default_value_t = Mode::Basic, value_parser = parse_mode)]
    pub mode: Mode,
    /// Shared secret file; required in hardened modes.
    #[arg(long)]
    pub secret: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to keep the one-time pads (hex, one per line).
    #[arg(long)]
    pub pads_out: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct GenQueryArgs {
    /// Query letters, e.g. AGCT*.
    #[arg(long, conflicts_with = "haplotype_file", required_unless_present = "haplotype_file")]
    pub haplotype: Option<String>,
    /// File whose first haplotype line is the query.
    #[arg(long)]
    pub haplotype_file: Option<PathBuf>,
    /// pk.keys (sk.keys is refused).
    #[arg(long)]
    pub keys: PathBuf,
    #[arg(long, default_value_t = Mode::Basic, value_parser = parse_mode)]
    pub mode: Mode,
    #[arg(long)]
    pub secret: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub edb: PathBuf,
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long)]
    pub spk: PathBuf,
    #[arg(long, value_parser = parse_algo)]
    pub algo: Algorithm,
    /// Result file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub edb: PathBuf,
    #[arg(long)]
    pub spk: PathBuf,
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub addr: SocketAddr,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = ppgrt::net::DEFAULT_MAX_FRAME)]
    pub max_frame: u32,
}

#[derive(Debug, Args)]
pub struct SendArgs {
    #[arg(long)]
    pub addr: String,
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long, value_parser = parse_algo)]
    pub algo: Algorithm,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Preset {
    /// 36 x 50 letters, 10 repeats.
    Desk,
    /// 36 x 500 letters, 100 repeats.
    Full,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    pub preset: Preset,
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long)]
    pub seg_len: Option<usize>,
    /// Comma-separated, e.g. lcs,hamming,edit.
    #[arg(long, value_delimiter = ',', value_parser = parse_algo)]
    pub algos: Option<Vec<Algorithm>>,
    #[arg(long)]
    pub repeat: Option<usize>,
    #[arg(long, default_value_t = 512)]
    pub bits: u64,
    #[arg(long, default_value_t = Mode::Basic, value_parser = parse_mode)]
    pub mode: Mode,
    /// Also write CSV here; otherwise CSV follows the table on stdout.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AttackKind {
    /// Trapdoor ratio table lookup.
    Ratio,
    /// SPU encrypts its own guesses.
    Dictionary,
    /// gcd of published k values.
    Lambda,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(value_enum)]
    pub kind: AttackKind,
    #[arg(long, default_value_t = Mode::Basic, value_parser = parse_mode)]
    pub mode: Mode,
    /// Letters per target haplotype.
    #[arg(long, default_value_t = 100)]
    pub length: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 512)]
    pub bits: u64,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub gdb: PathBuf,
    #[arg(long, conflicts_with = "haplotype_file", required_unless_present = "haplotype_file")]
    pub haplotype: Option<String>,
    #[arg(long)]
    pub haplotype_file: Option<PathBuf>,
    #[arg(long, value_parser = parse_algo)]
    pub algo: Algorithm,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum KeyexchangeCommand {
    /// Create a private exponent and the public message for the peer.
    Init {
        #[arg(long, default_value = "modp1024")]
        group: String,
        #[arg(long)]
        out_private: PathBuf,
        #[arg(long)]
        out_public: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Combine our private exponent with the peer's message into a shared secret.
    Derive {
        #[arg(long)]
        private: PathBuf,
        #[arg(long)]
        peer: PathBuf,
        /// pk.keys, for the modulus and hash.
        #[arg(long)]
        keys: PathBuf,
        #[arg(long, default_value_t = Binding::PositionAndLetter, value_parser = parse_binding)]
        binding: Binding,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn parse_hash(s: &str) -> Result<HashAlg, String> {
    s.parse()
}

fn parse_binding(s: &str) -> Result<Binding, String> {
    s.parse()
}
