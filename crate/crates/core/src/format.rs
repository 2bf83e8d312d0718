//! Text file formats for keys, databases, queries and results.
//!
//! Every file starts with a magic line and continues with `field=value`
//! lines in a fixed order. Big integers are lowercase big-endian hex without
//! leading zeros, byte strings are lowercase hex, small integers decimal.
//! Parsing is strict so that `to_text(from_text(s)) == s` for every accepted
//! `s`, which is what makes file and socket pipelines byte-comparable.
//!
//! ```text
//! PPGRT1-SPK
//! k=128
//! beta=3f0a…
//! l=paillier
//! n=c5d1…
//! ```

use num_bigint::BigUint;
use thiserror::Error;

use crate::index::dh::{DhGroup, DhPrivate, DhPublic};
use crate::index::hash::HashAlg;
use crate::index::keys::L_DESCRIPTOR;
use crate::index::{
    Binding, Edb, EdbEntry, EncryptedIndex, EncryptedQuery, IndexError, LetterTrapdoor, Mode,
    PublicParams, SharedSecret, SpuKey, SystemKeys,
};
use crate::matcher::{QueryResult, QueryResultList};
use crate::paillier::{PaillierCiphertext, PaillierError, PaillierPublic, PaillierSecret};

pub const MAGIC_PK: &str = "PPGRT1-PK";
pub const MAGIC_SK: &str = "PPGRT1-SK";
pub const MAGIC_SPK: &str = "PPGRT1-SPK";
pub const MAGIC_EDB: &str = "PPGRT1-EDB";
pub const MAGIC_QUERY: &str = "PPGRT1-QRY";
pub const MAGIC_RESULTS: &str = "PPGRT1-RES";
pub const MAGIC_SECRET: &str = "PPGRT1-SEC";
pub const MAGIC_DH_PUBLIC: &str = "PPGRT1-DH";
pub const MAGIC_DH_PRIVATE: &str = "PPGRT1-DHX";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("expected a {expected} file, found header {found:?}")]
    WrongMagic { expected: &'static str, found: String },
    #[error("line {line}: expected field {expected:?}")]
    MissingField { line: usize, expected: &'static str },
    #[error("line {line}: bad value for {field}: {message}")]
    BadValue {
        line: usize,
        field: &'static str,
        message: String,
    },
    #[error("line {line}: unexpected trailing content")]
    Trailing { line: usize },
    #[error("input must end with a single newline")]
    MissingNewline,
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Paillier(#[from] PaillierError),
}

/// A value with a documented text encoding.
pub trait TextFormat: Sized {
    const MAGIC: &'static str;

    fn to_text(&self) -> String;
    fn from_text(text: &str) -> Result<Self, FormatError>;
}

/// Reads only the magic line, e.g. to dispatch on file kind.
pub fn magic_of(text: &str) -> Option<&str> {
    text.lines().next()
}

pub fn hex_int(v: &BigUint) -> String {
    v.to_str_radix(16)
}

fn parse_hex_int(s: &str) -> Option<BigUint> {
    let canonical = !s.is_empty()
        && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
        && (s == "0" || !s.starts_with('0'));
    if canonical {
        BigUint::parse_bytes(s.as_bytes(), 16)
    } else {
        None
    }
}

fn parse_decimal(s: &str) -> Option<usize> {
    let canonical = !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'));
    if canonical {
        s.parse().ok()
    } else {
        None
    }
}

struct Writer(String);

impl Writer {
    fn new(magic: &str) -> Self {
        Writer(format!("{magic}\n"))
    }

    fn field(&mut self, name: &str, value: impl std::fmt::Display) -> &mut Self {
        self.0.push_str(name);
        self.0.push('=');
        self.0.push_str(&value.to_string());
        self.0.push('\n');
        self
    }

    fn int(&mut self, name: &str, v: &BigUint) -> &mut Self {
        self.field(name, hex_int(v))
    }

    fn ints<'a>(&mut self, name: &str, vs: impl Iterator<Item = &'a BigUint>) -> &mut Self {
        let joined: Vec<String> = vs.map(hex_int).collect();
        self.field(name, joined.join(" "))
    }

    fn finish(&mut self) -> String {
        std::mem::take(&mut self.0)
    }
}

struct Reader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str, magic: &'static str) -> Result<Self, FormatError> {
        let body = text.strip_suffix('\n').ok_or(FormatError::MissingNewline)?;
        let lines: Vec<&str> = body.split('\n').collect();
        if lines[0] != magic {
            return Err(FormatError::WrongMagic {
                expected: magic,
                found: lines[0].chars().take(32).collect(),
            });
        }
        Ok(Self { lines, pos: 1 })
    }

    /// 1-based line number of the next unread line.
    fn line_no(&self) -> usize {
        self.pos + 1
    }

    fn peek_field(&self, name: &str) -> bool {
        self.lines
            .get(self.pos)
            .and_then(|l| l.strip_prefix(name))
            .is_some_and(|rest| rest.starts_with('='))
    }

    fn raw(&mut self, name: &'static str) -> Result<(usize, &'a str), FormatError> {
        let line = self.line_no();
        let value = self
            .lines
            .get(self.pos)
            .and_then(|l| l.strip_prefix(name))
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or(FormatError::MissingField { line, expected: name })?;
        self.pos += 1;
        Ok((line, value))
    }

    fn parsed<T>(
        &mut self,
        name: &'static str,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Result<T, FormatError> {
        let (line, value) = self.raw(name)?;
        parse(value).map_err(|message| FormatError::BadValue {
            line,
            field: name,
            message,
        })
    }

    fn int(&mut self, name: &'static str) -> Result<BigUint, FormatError> {
        self.parsed(name, |v| parse_hex_int(v).ok_or_else(|| format!("not canonical hex: {v:?}")))
    }

    fn opt_int(&mut self, name: &'static str) -> Result<Option<BigUint>, FormatError> {
        if self.peek_field(name) {
            self.int(name).map(Some)
        } else {
            Ok(None)
        }
    }

    fn ints(&mut self, name: &'static str) -> Result<Vec<BigUint>, FormatError> {
        self.parsed(name, |v| {
            v.split(' ')
                .map(|s| parse_hex_int(s).ok_or_else(|| format!("not canonical hex: {s:?}")))
                .collect()
        })
    }

    fn decimal(&mut self, name: &'static str) -> Result<usize, FormatError> {
        self.parsed(name, |v| parse_decimal(v).ok_or_else(|| format!("not a decimal count: {v:?}")))
    }

    fn named<T: std::str::FromStr<Err = String>>(&mut self, name: &'static str) -> Result<T, FormatError> {
        self.parsed(name, |v| v.parse())
    }

    fn bytes(&mut self, name: &'static str) -> Result<Vec<u8>, FormatError> {
        self.parsed(name, |v| {
            if v.bytes().any(|b| b.is_ascii_uppercase()) {
                return Err("hex must be lowercase".into());
            }
            hex::decode(v).map_err(|e| e.to_string())
        })
    }

    fn literal(&mut self, name: &'static str, expected: &str) -> Result<(), FormatError> {
        self.parsed(name, |v| {
            if v == expected {
                Ok(())
            } else {
                Err(format!("expected {expected:?}"))
            }
        })
    }

    fn end(&self) -> Result<(), FormatError> {
        if self.pos < self.lines.len() {
            return Err(FormatError::Trailing { line: self.line_no() });
        }
        Ok(())
    }
}

fn security_of(r: &mut Reader<'_>, name: &'static str) -> Result<u32, FormatError> {
    r.parsed(name, |v| {
        parse_decimal(v)
            .and_then(|k| u32::try_from(k).ok())
            .ok_or_else(|| format!("not a security parameter: {v:?}"))
    })
}

fn write_public(w: &mut Writer, pk: &PublicParams) {
    w.field("security", pk.security())
        .field("hash", pk.hash_alg())
        .int("n", pk.n())
        .int("g", pk.paillier().g())
        .int("base_point", pk.base_point())
        .int("beta", pk.beta());
}

struct PublicFields {
    security: u32,
    hash: HashAlg,
    paillier: PaillierPublic,
    base_point: BigUint,
    beta: BigUint,
}

fn read_public(r: &mut Reader<'_>) -> Result<PublicFields, FormatError> {
    let security = security_of(r, "security")?;
    let hash = r.named("hash")?;
    let n = r.int("n")?;
    let g = r.int("g")?;
    Ok(PublicFields {
        security,
        hash,
        paillier: PaillierPublic::with_base(n, g)?,
        base_point: r.int("base_point")?,
        beta: r.int("beta")?,
    })
}

/// The public key alone carries no secret, so it cannot be re-derived from
/// primes; it is checked against the secret key when both are loaded.
impl TextFormat for PublicParams {
    const MAGIC: &'static str = MAGIC_PK;

    fn to_text(&self) -> String {
        let mut w = Writer::new(Self::MAGIC);
        write_public(&mut w, self);
        w.finish()
    }

    fn from_text(text: &str) -> Result<Self, FormatError> {
        let mut r = Reader::new(text, Self::MAGIC)?;
        let f = read_public(&mut r)?;
        r.end()?;
        Ok(PublicParams::from_stored(f.security, f.paillier, f.hash, f.base_point, f.beta)?)
    }
}

impl TextFormat for SystemKeys {
    const MAGIC: &'static str = MAGIC_SK;

    fn to_text(&self) -> String {
        let mut w = Writer::new(Self::MAGIC);
        write_public(&mut w, self.public());
        let sk = self.secret();
        let psk = sk.paillier();
        w.int("p", psk.p()).int("q", psk.q());
        if let (Some(pp), Some(qp)) = (psk.p_prime(), psk.q_prime()) {
            w.int("p_prime", pp).int("q_prime", qp);
        }
        w.int("lambda", psk.lambda())
            .int("mu", psk.mu())
            .int("sigma", sk.sigma())
            .int("gamma", sk.gamma())
            .finish()
    }

    fn from_text(text: &str) -> Result<Self, FormatError> {
        let mut r = Reader::new(text, Self::MAGIC)?;
        let f = read_public(&mut r)?;
        let p = r.int("p")?;
        let q = r.int("q")?;
        let p_prime = r.opt_int("p_prime")?;
        let q_prime = if p_prime.is_some() { Some(r.int("q_prime")?) } else { None };
        let lambda_line = r.line_no();
        let lambda = r.int("lambda")?;
        let mu = r.int("mu")?;
        let sigma = r.int("sigma")?;
        let gamma = r.int("gamma")?;
        r.end()?;

        let psk = PaillierSecret::restore(&f.paillier, p, q, p_prime, q_prime)?;
        let keys = SystemKeys::from_parts(f.security, f.paillier, psk, f.hash, f.base_point, sigma)?;
        let derived = [
            ("lambda", keys.secret().lambda() == &lambda),
            ("mu", keys.secret().paillier().mu() == &mu),
            ("gamma", keys.secret().gamma() == &gamma),
            ("beta", keys.public().beta() == &f.beta),
        ];
        if let Some((field, _)) = derived.iter().find(|(_, ok)| !ok) {
            return Err(FormatError::BadValue {
                line: lambda_line,
                field,
                message: "inconsistent with the stored primes".into(),
            });
        }
        Ok(keys)
    }
}

impl TextFormat for SpuKey {
    const MAGIC: &'static str = MAGIC_SPK;

    fn to_text(&self) -> String {
        Writer::new(Self::MAGIC)
            .field("k", self.security())
            .int("beta", self.beta())
            .field("l", self.l_descriptor())
            .int("n", self.n())
            .finish()
    }

    fn from_text(text: &str) -> Result<Self, FormatError> {
        let mut r = Reader::new(text, Self::MAGIC)?;
        let security = security_of(&mut r, "k")?;
        let beta = r.int("beta")?;
        r.literal("l", L_DESCRIPTOR)?;
        let n = r.int("n")?;
        r.end()?;
        Ok(SpuKey::new(security, beta, n))
    }
}

impl TextFormat for SharedSecret {
    const MAGIC: &'static str = MAGIC_SECRET;

    fn to_text(&self) -> String {
        Writer::new(Self::MAGIC)
            .field("binding", self.binding())
            .int("a", self.a())
            .int("b", self.b())
            .finish()
    }

    fn from_text(text: &str) -> Result<Self, FormatError> {
        let mut r = Reader::new(text, Self::MAGIC)?;
        let binding: Binding = r.named("binding")?;
        let a = r.int("a")?;
        let b = r.int("b")?;
        r.end()?;
        Ok(SharedSecret::new(a, b, binding))
    }
}

fn write_group(w: &mut Writer, group: &DhGroup) {
    match group.name() {
        Some(name) => {
            w.field("group", name);
        }
        None => {
            w.field("group", "custom").int("p", group.p()).int("g", group.g());
        }
    }
}

fn read_group(r: &mut Reader<'_>) -> Result<DhGroup, FormatError> {
    let (line, name) = r.raw("group")?;
    if name == "custom" {
        let p = r.int("p")?;
        let g = r.int("g")?;
        return Ok(DhGroup::custom(p, g)?);
    }
    DhGroup::by_name(name).ok_or(FormatError::BadValue {
        line,
        field: "group",
        message: format!("unknown group {name:?}"),
    })
}

impl TextFormat for DhPublic {
    const MAGIC: &'static str = MAGIC_DH_PUBLIC;

    fn to_text(&self) -> String {
        let mut w = Writer::new(Self::MAGIC);
        write_group(&mut w, self.group());
        w.int("y", self.value()).finish()
    }

    fn from_text(text: &str) -> Result<Self, FormatError> {
        let mut r = Reader::new(text, Self::MAGIC)?;
        let group = read_group(&mut r)?;
        let y = r.int("y")?;
        r.end()?;
        Ok(DhPublic::from_parts(group, y))
    }
}

impl TextFormat for DhPrivate {
    const MAGIC: &'static str = MAGIC_DH_PRIVATE;

    fn to_text(&self) -> String {
        let mut w = Writer::new(Self::MAGIC);
        write_group(&mut w, self.group());
        w.int("x", self.exponent()).finish()
    }

    fn from_text(text: &str) -> Result<Self, FormatError> {
        let mut r = Reader::new(text, Self::MAGIC)?;
        let group = read_group(&mut r)?;
        let x = r.int("x")?;
        r.end()?;
        Ok(DhPrivate::from_parts(group, x))
    }
}

impl TextFormat for Edb {
    const MAGIC: &'static str = MAGIC_EDB;

    fn to_text(&self) -> String {
        let mut w = Writer::new(Self::MAGIC);
        let lengths: Vec<String> = self.entries().iter().map(|e| e.index.len().to_string()).collect();
        w.field("mode", self.mode())
            .int("n", self.n())
            .field("d", self.len())
            .field("t", lengths.join(" "));
        for entry in self.entries() {
            w.ints("b", entry.index.b_values()).ints("s", entry.index.s_values());
            if self.mode().is_hardened() {
                w.ints("k", entry.index.k_values());
            }
            w.field("z", hex::encode(&entry.payload));
        }
        w.finish()
    }

    fn from_text(text: &str) -> Result<Self, FormatError> {
        let mut r = Reader::new(text, Self::MAGIC)?;
        let mode: Mode = r.named("mode")?;
        let n = r.int("n")?;
        let d = r.decimal("d")?;
        let lengths: Vec<usize> = r.parsed("t", |v| {
            let ts: Option<Vec<usize>> = v.split(' ').map(parse_decimal).collect();
            match ts {
                Some(ts) if ts.len() == d => Ok(ts),
                _ => Err(format!("expected {d} decimal lengths")),
            }
        })?;
        let mut entries = Vec::with_capacity(d);
        for &t in &lengths {
            let line = r.line_no();
            let b = r.ints("b")?;
            let s = r.ints("s")?;
            let k = if mode.is_hardened() { Some(r.ints("k")?) } else { None };
            let payload = r.bytes("z")?;
            let consistent = b.len() == t && s.len() == t && k.as_ref().is_none_or(|k| k.len() == t);
            if !consistent {
                return Err(FormatError::BadValue {
                    line,
                    field: "b",
                    message: format!("trapdoor arrays must all have length {t}"),
                });
            }
            let mut k = k.map(Vec::into_iter);
            let trapdoors = b
                .into_iter()
                .zip(s)
                .map(|(b, s)| LetterTrapdoor {
                    b,
                    s,
                    k: k.as_mut().and_then(Iterator::next),
                })
                .collect();
            entries.push(EdbEntry {
                index: EncryptedIndex::new(mode, trapdoors)?,
                payload,
            });
        }
        r.end()?;
        Ok(Edb::new(mode, n, entries)?)
    }
}

impl TextFormat for EncryptedQuery {
    const MAGIC: &'static str = MAGIC_QUERY;

    fn to_text(&self) -> String {
        Writer::new(Self::MAGIC)
            .field("mode", self.mode())
            .field("m", self.len())
            .ints("c", self.ciphertexts().iter().map(PaillierCiphertext::value))
            .finish()
    }

    fn from_text(text: &str) -> Result<Self, FormatError> {
        let mut r = Reader::new(text, Self::MAGIC)?;
        let mode: Mode = r.named("mode")?;
        let m = r.decimal("m")?;
        let line = r.line_no();
        let cs = r.ints("c")?;
        r.end()?;
        if cs.len() != m {
            return Err(FormatError::BadValue {
                line,
                field: "c",
                message: format!("expected {m} ciphertexts, found {}", cs.len()),
            });
        }
        let cs = cs.into_iter().map(PaillierCiphertext::from_value).collect();
        Ok(EncryptedQuery::new(mode, cs)?)
    }
}

/// Header line followed by `entry<TAB>algo<TAB>length` or
/// `entry<TAB>algo<TAB>ERROR:<code>` rows.
impl TextFormat for QueryResultList {
    const MAGIC: &'static str = MAGIC_RESULTS;

    fn to_text(&self) -> String {
        let mut out = format!("{}\n", Self::MAGIC);
        for r in self.results() {
            match r.outcome {
                Ok(len) => out.push_str(&format!("{}\t{}\t{}\n", r.entry, r.algorithm, len)),
                Err(code) => out.push_str(&format!("{}\t{}\tERROR:{}\n", r.entry, r.algorithm, code)),
            }
        }
        out
    }

    fn from_text(text: &str) -> Result<Self, FormatError> {
        let r = Reader::new(text, Self::MAGIC)?;
        let mut results = Vec::new();
        for (i, row) in r.lines[1..].iter().enumerate() {
            let line = i + 2;
            let bad = |message: String| FormatError::BadValue {
                line,
                field: "result",
                message,
            };
            let cols: Vec<&str> = row.split('\t').collect();
            let [entry, algo, value] = cols[..] else {
                return Err(bad(format!("expected 3 tab-separated columns, found {}", cols.len())));
            };
            let entry = parse_decimal(entry).ok_or_else(|| bad(format!("bad entry id {entry:?}")))?;
            let algorithm = algo.parse().map_err(bad)?;
            let outcome = match value.strip_prefix("ERROR:") {
                Some(code) => Err(code.parse().map_err(bad)?),
                None => Ok(parse_decimal(value).ok_or_else(|| bad(format!("bad length {value:?}")))?),
            };
            results.push(QueryResult {
                entry,
                algorithm,
                outcome,
            });
        }
        Ok(QueryResultList::new(results))
    }
}
