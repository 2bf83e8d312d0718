use std::fs;
use std::io::Write;
use std::net::TcpListener;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use ppgrt::attacks::{
    accuracy, lambda_leak_probe, offline_dictionary_attack, ratio_identifier_attack, summary_line,
};
use ppgrt::bench::{self, BenchConfig, Workload};
use ppgrt::distance::{edit_shared, hamming_shared, lcs_len};
use ppgrt::format::TextFormat;
use ppgrt::haplotype::{parse_haplotype, parse_haplotype_file, Haplotype, Letter};
use ppgrt::index::dh::{dh_derive, dh_keypair, DhGroup, DhPrivate, DhPublic};
use ppgrt::index::edb::gen_index;
use ppgrt::index::hash::HashAlg;
use ppgrt::index::keys::{setup, DEFAULT_SECURITY};
use ppgrt::index::{gen_edb, gen_query, Edb, EncryptedQuery, Mode, PublicParams, SharedSecret, SpuKey, SystemKeys};
use ppgrt::matcher::{default_workers, Algorithm, ErrorCode, QueryResult, QueryResultList};
use ppgrt::net::{self, Server, SpuService};
use ppgrt::paillier::KeygenParams;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::args::*;
use crate::error::CliError;

pub const SEED_ENV: &str = "PPGRT_SEED";

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Setup(a) => cmd_setup(a),
        Command::EncryptDb(a) => cmd_encrypt_db(a),
        Command::GenQuery(a) => cmd_gen_query(a),
        Command::Test(a) => cmd_test(a),
        Command::Serve(a) => cmd_serve(a),
        Command::Send(a) => cmd_send(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Keyexchange(c) => cmd_keyexchange(c),
    }
}

fn rng(seed: &SeedArg) -> Result<ChaCha20Rng, CliError> {
    let seed = match seed.seed {
        Some(s) => Some(s),
        None => match std::env::var(SEED_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}")))?,
            ),
            Err(_) => None,
        },
    };
    Ok(match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    })
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn load<T: TextFormat>(path: &Path) -> Result<T, CliError> {
    T::from_text(&read(path)?).map_err(|e| CliError::from(e).in_file(path))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn load_secret(mode: Mode, path: Option<&Path>) -> Result<Option<SharedSecret>, CliError> {
    match (mode, path) {
        (Mode::Basic, None) => Ok(None),
        (Mode::Basic, Some(_)) => Err(CliError::Usage("--secret is only used in hardened modes".into())),
        (Mode::Hardened(_), None) => Err(CliError::Usage(format!("mode {mode} requires --secret"))),
        (Mode::Hardened(binding), Some(p)) => {
            let s: SharedSecret = load(p)?;
            if s.binding() != binding {
                return Err(CliError::Usage(format!(
                    "{}: secret is bound to {}, mode {mode} needs {binding}",
                    p.display(),
                    s.binding()
                )));
            }
            Ok(Some(s))
        }
    }
}

fn query_haplotype(literal: Option<&str>, file: Option<&Path>) -> Result<Haplotype, CliError> {
    match (literal, file) {
        (Some(s), _) => Ok(parse_haplotype(s)?),
        (None, Some(p)) => {
            let all = parse_haplotype_file(&read(p)?).map_err(|e| CliError::from(e).in_file(p))?;
            all.into_iter()
                .next()
                .ok_or_else(|| CliError::Usage(format!("{}: no haplotype found", p.display())))
        }
        (None, None) => Err(CliError::Usage("give --haplotype or --haplotype-file".into())),
    }
}

fn cmd_setup(a: SetupArgs) -> Result<(), CliError> {
    let mut rng = rng(&a.seed)?;
    let params = KeygenParams {
        bits: a.bits,
        safe_primes: matches!(a.mode, KeyMode::Safe),
        timeout: a.timeout.map(Duration::from_secs),
    };
    let keys = setup(a.security, &params, a.hash, &mut rng)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    write(&a.out_dir.join("pk.keys"), &keys.public().to_text())?;
    write(&a.out_dir.join("sk.keys"), &keys.to_text())?;
    write(&a.out_dir.join("spk.keys"), &keys.spu_key().to_text())?;
    println!(
        "wrote pk.keys, sk.keys, spk.keys to {} ({}-bit n)",
        a.out_dir.display(),
        keys.n().bits()
    );
    Ok(())
}

fn cmd_encrypt_db(a: EncryptDbArgs) -> Result<(), CliError> {
    let keys: SystemKeys = load(&a.keys)?;
    let secret = load_secret(a.mode, a.secret.as_deref())?;
    let gdb = parse_haplotype_file(&read(&a.gdb)?).map_err(|e| CliError::from(e).in_file(&a.gdb))?;
    let mut rng = rng(&a.seed)?;
    let (edb, pads) = gen_edb(&keys, &gdb, a.mode, secret.as_ref(), &mut rng)?;
    write(&a.out, &edb.to_text())?;
    if let Some(p) = &a.pads_out {
        let text: String = pads.iter().map(|k| format!("{}\n", hex::encode(k.pad()))).collect();
        write(p, &text)?;
    }
    eprintln!("encrypted {} haplotypes ({})", edb.len(), a.mode);
    Ok(())
}

fn cmd_gen_query(a: GenQueryArgs) -> Result<(), CliError> {
    let pk: PublicParams = load(&a.keys)?;
    let secret = load_secret(a.mode, a.secret.as_deref())?;
    let x = query_haplotype(a.haplotype.as_deref(), a.haplotype_file.as_deref())?;
    let mut rng = rng(&a.seed)?;
    let q = gen_query(&pk, &x, a.mode, secret.as_ref(), &mut rng)?;
    write(&a.out, &q.to_text())
}

fn cmd_test(a: TestArgs) -> Result<(), CliError> {
    let spk: SpuKey = load(&a.spk)?;
    let edb: Edb = load(&a.edb)?;
    let query: EncryptedQuery = load(&a.query)?;
    let workers = a.workers.unwrap_or_else(default_workers);
    let text = net::evaluate(&spk, &edb, &query, a.algo, workers)?;
    emit(a.out.as_deref(), &text)
}

fn cmd_serve(a: ServeArgs) -> Result<(), CliError> {
    let spk: SpuKey = load(&a.spk)?;
    let edb: Edb = load(&a.edb)?;
    let workers = a.workers.unwrap_or_else(default_workers);
    let service = Arc::new(SpuService::new(spk, edb, workers, a.max_frame));
    let listener = TcpListener::bind(a.addr).map_err(|e| CliError::Io(format!("bind {}: {e}", a.addr)))?;
    let server = Server::start(listener, service).map_err(|e| CliError::Io(e.to_string()))?;
    println!("listening on {}", server.addr());
    std::io::stdout().flush().ok();
    server.join();
    Ok(())
}

fn cmd_send(a: SendArgs) -> Result<(), CliError> {
    let text = read(&a.query)?;
    // Parse locally first so a bad file fails before touching the network.
    EncryptedQuery::from_text(&text).map_err(|e| CliError::from(e).in_file(&a.query))?;
    let results = net::send(a.addr.as_str(), a.algo, &text)?;
    emit(a.out.as_deref(), &results)
}

fn demo_keys(bits: u64, rng: &mut ChaCha20Rng) -> Result<SystemKeys, CliError> {
    Ok(setup(DEFAULT_SECURITY, &KeygenParams::test(bits), HashAlg::Sha256, rng)?)
}

fn demo_secret(keys: &SystemKeys, mode: Mode, rng: &mut ChaCha20Rng) -> Option<SharedSecret> {
    match mode {
        Mode::Basic => None,
        Mode::Hardened(b) => Some(SharedSecret::random(keys.n(), b, rng)),
    }
}

fn cmd_bench(a: BenchArgs) -> Result<(), CliError> {
    let mut config = match a.preset {
        Preset::Desk => BenchConfig::desk(),
        Preset::Full => BenchConfig::full(),
    };
    config.segments = a.segments.unwrap_or(config.segments);
    config.seg_len = a.seg_len.unwrap_or(config.seg_len);
    config.repeat = a.repeat.unwrap_or(config.repeat);
    config.mode = a.mode;
    if let Some(algos) = a.algos {
        config.algorithms = algos;
    }
    let mut rng = rng(&a.seed)?;
    let keys = demo_keys(a.bits, &mut rng)?;
    let secret = demo_secret(&keys, config.mode, &mut rng);
    let work = Workload::generate(&keys, &config, secret.as_ref(), &mut rng)?;
    let report = bench::run(&keys, &config, &work)?;
    print!("{}", report.to_table());
    match &a.csv {
        Some(p) => write(p, &report.to_csv()),
        None => {
            println!();
            print!("{}", report.to_csv());
            Ok(())
        }
    }
}

fn cmd_attack(a: AttackArgs) -> Result<(), CliError> {
    if a.trials == 0 || a.length == 0 {
        return Err(CliError::Usage("--trials and --length must be positive".into()));
    }
    let mut rng = rng(&a.seed)?;
    let keys = demo_keys(a.bits, &mut rng)?;
    let secret = demo_secret(&keys, a.mode, &mut rng);
    let (name, rate) = match a.kind {
        AttackKind::Ratio => {
            let mut total = 0.0;
            for trial in 0..a.trials {
                let x = Haplotype::random(a.length, &Letter::ALPHABET, &mut rng);
                let ind = gen_index(&keys, &x, a.mode, secret.as_ref(), &mut rng)?;
                let r = ratio_identifier_attack(ind.trapdoors(), &keys.hash(), &Letter::ALPHABET)?;
                let acc = accuracy(&r.letters, x.letters());
                println!(
                    "trial {trial}: accuracy {acc:.3}, decoded {:.3} of positions",
                    r.confidence
                );
                total += acc;
            }
            ("ratio", total / a.trials as f64)
        }
        AttackKind::Dictionary => {
            let spk = keys.spu_key();
            let (mut correct, mut letters) = (0usize, 0usize);
            for trial in 0..a.trials {
                let x = Haplotype::random(a.length, &Letter::ALPHABET, &mut rng);
                let ind = gen_index(&keys, &x, a.mode, secret.as_ref(), &mut rng)?;
                let r = offline_dictionary_attack(&spk, keys.public(), &ind, &Letter::ALPHABET, &mut rng)?;
                let hits = r
                    .letters
                    .iter()
                    .zip(x.letters())
                    .filter(|(g, t)| g.as_ref() == Some(t))
                    .count();
                println!(
                    "trial {trial}: recovered {hits}/{} letters with {} predicate calls ({} matches)",
                    x.len(),
                    r.predicate_calls,
                    r.hits
                );
                correct += hits;
                letters += x.len();
            }
            ("dictionary", correct as f64 / letters as f64)
        }
        AttackKind::Lambda => {
            if !a.mode.is_hardened() {
                return Err(CliError::Usage("the lambda probe needs a hardened --mode".into()));
            }
            let indexes = (0..a.trials)
                .map(|_| {
                    let x = Haplotype::random(a.length, &Letter::ALPHABET, &mut rng);
                    gen_index(&keys, &x, a.mode, secret.as_ref(), &mut rng)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let probe = lambda_leak_probe(&indexes, keys.secret().lambda())?;
            println!(
                "gcd of {} k values = {} * lambda ({} bits vs {}-bit lambda)",
                probe.k_count,
                probe.ratio,
                probe.gcd.bits(),
                keys.secret().lambda().bits()
            );
            ("lambda", if probe.leaks(1000) { 1.0 } else { 0.0 })
        }
    };
    println!("{}", summary_line(name, a.mode, rate));
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<(), CliError> {
    let gdb = parse_haplotype_file(&read(&a.gdb)?).map_err(|e| CliError::from(e).in_file(&a.gdb))?;
    let y = query_haplotype(a.haplotype.as_deref(), a.haplotype_file.as_deref())?;
    let results = gdb
        .iter()
        .enumerate()
        .map(|(entry, x)| QueryResult {
            entry,
            algorithm: a.algo,
            outcome: match a.algo {
                Algorithm::Lcs => Ok(lcs_len(x, &y)),
                Algorithm::Hamming => hamming_shared(x, &y).map_err(|_| ErrorCode::LengthMismatch),
                Algorithm::Edit => Ok(edit_shared(&y, x)),
            },
        })
        .collect();
    emit(a.out.as_deref(), &QueryResultList::new(results).to_text())
}

fn cmd_keyexchange(c: KeyexchangeCommand) -> Result<(), CliError> {
    match c {
        KeyexchangeCommand::Init {
            group,
            out_private,
            out_public,
            seed,
        } => {
            let group = DhGroup::by_name(&group)
                .ok_or_else(|| CliError::Usage(format!("unknown group {group:?} (modp1024, modp2048)")))?;
            let (x, y) = dh_keypair(&group, &mut rng(&seed)?);
            write(&out_private, &x.to_text())?;
            write(&out_public, &y.to_text())
        }
        KeyexchangeCommand::Derive {
            private,
            peer,
            keys,
            binding,
            out,
        } => {
            let x: DhPrivate = load(&private)?;
            let y: DhPublic = load(&peer)?;
            let pk: PublicParams = load(&keys)?;
            let secret = dh_derive(&x, &y, pk.n(), pk.hash_alg(), binding)?;
            write(&out, &secret.to_text())
        }
    }
}
