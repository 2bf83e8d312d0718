//! Haplotype strings over `{A, G, C, T, *}`, segmentation and the one-time
//! pad used for EDB payloads.

use std::fmt;
use std::str::FromStr;

use rand::{CryptoRng, RngCore};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HaplotypeError {
    #[error("empty haplotype")]
    Empty,
    #[error("invalid character {ch:?} at position {position}")]
    InvalidChar { position: usize, ch: char },
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<HaplotypeError>,
    },
    #[error("segment length must be at least 1")]
    ZeroSegmentLength,
    #[error("pad length {pad} does not match message length {message}")]
    PadLength { pad: usize, message: usize },
    #[error("invalid letter byte {0:#04x}")]
    InvalidByte(u8),
}

/// One SNP letter. `Unknown` is the `*` marker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    G,
    C,
    T,
    Unknown,
}

impl Letter {
    pub const ALPHABET: [Letter; 5] = [Letter::A, Letter::G, Letter::C, Letter::T, Letter::Unknown];

    /// The letter's 8-bit encoding (ASCII).
    pub fn byte(self) -> u8 {
        match self {
            Letter::A => b'A',
            Letter::G => b'G',
            Letter::C => b'C',
            Letter::T => b'T',
            Letter::Unknown => b'*',
        }
    }

    pub fn from_byte(b: u8) -> Option<Letter> {
        match b.to_ascii_uppercase() {
            b'A' => Some(Letter::A),
            b'G' => Some(Letter::G),
            b'C' => Some(Letter::C),
            b'T' => Some(Letter::T),
            b'*' => Some(Letter::Unknown),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        self.byte() as char
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A non-empty letter string.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Haplotype(Vec<Letter>);

impl Haplotype {
    pub fn new(letters: Vec<Letter>) -> Result<Self, HaplotypeError> {
        if letters.is_empty() {
            return Err(HaplotypeError::Empty);
        }
        Ok(Self(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Byte encoding, one byte per letter.
    pub fn encode(&self) -> Vec<u8> {
        self.0.iter().map(|l| l.byte()).collect()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, HaplotypeError> {
        let letters = bytes
            .iter()
            .map(|&b| match b {
                b'A' | b'G' | b'C' | b'T' | b'*' => Ok(Letter::from_byte(b).unwrap()),
                _ => Err(HaplotypeError::InvalidByte(b)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(letters)
    }

    /// Uniformly random haplotype of `len` letters drawn from `alphabet`.
    pub fn random<R: RngCore>(len: usize, alphabet: &[Letter], rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        assert!(len > 0 && !alphabet.is_empty());
        Self((0..len).map(|_| *alphabet.choose(rng).unwrap()).collect())
    }
}

impl fmt::Display for Haplotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Haplotype {
    type Err = HaplotypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_haplotype(s)
    }
}

/// Parses a haplotype. Surrounding whitespace is trimmed and lowercase
/// letters are folded to uppercase. Positions in errors are 1-based.
pub fn parse_haplotype(text: &str) -> Result<Haplotype, HaplotypeError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(HaplotypeError::Empty);
    }
    let letters = text
        .chars()
        .enumerate()
        .map(|(i, ch)| {
            u8::try_from(ch)
                .ok()
                .and_then(Letter::from_byte)
                .ok_or(HaplotypeError::InvalidChar { position: i + 1, ch })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Haplotype::new(letters)
}

/// Parses a haplotype file: one haplotype per line, `#` comments and blank
/// lines skipped. Line numbers in errors are 1-based.
pub fn parse_haplotype_file(text: &str) -> Result<Vec<Haplotype>, HaplotypeError> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| {
            let t = line.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, line)| {
            parse_haplotype(line).map_err(|e| HaplotypeError::Line {
                line: i + 1,
                source: Box::new(e),
            })
        })
        .collect()
}

/// A haplotype cut into fixed-length pieces; the last piece is padded with `*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentedHaplotype {
    segments: Vec<Haplotype>,
    segment_length: usize,
    original_len: usize,
}

impl SegmentedHaplotype {
    pub fn segments(&self) -> &[Haplotype] {
        &self.segments
    }

    pub fn segment_length(&self) -> usize {
        self.segment_length
    }

    /// Rejoins the segments and strips the padding.
    pub fn concat(&self) -> Haplotype {
        let letters: Vec<Letter> = self
            .segments
            .iter()
            .flat_map(|s| s.letters().iter().copied())
            .take(self.original_len)
            .collect();
        Haplotype(letters)
    }
}

pub fn segment(h: &Haplotype, seg_len: usize) -> Result<SegmentedHaplotype, HaplotypeError> {
    if seg_len == 0 {
        return Err(HaplotypeError::ZeroSegmentLength);
    }
    let segments = h
        .letters()
        .chunks(seg_len)
        .map(|chunk| {
            let mut v = chunk.to_vec();
            v.resize(seg_len, Letter::Unknown);
            Haplotype(v)
        })
        .collect();
    Ok(SegmentedHaplotype {
        segments,
        segment_length: seg_len,
        original_len: h.len(),
    })
}

/// One-time pad key, as long as the encoded haplotype it protects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OtpKey {
    pad: Vec<u8>,
}

impl OtpKey {
    pub fn from_bytes(pad: Vec<u8>) -> Self {
        Self { pad }
    }

    pub fn random<R: RngCore + CryptoRng>(len: usize, rng: &mut R) -> Self {
        let mut pad = vec![0u8; len];
        rng.fill_bytes(&mut pad);
        Self { pad }
    }

    pub fn pad(&self) -> &[u8] {
        &self.pad
    }

    pub fn encrypt(&self, h: &Haplotype) -> Result<Vec<u8>, HaplotypeError> {
        let msg = h.encode();
        self.xor(&msg)
    }

    pub fn decrypt(&self, ciphertext: &[u8]) -> Result<Haplotype, HaplotypeError> {
        Haplotype::decode(&self.xor(ciphertext)?)
    }

    fn xor(&self, data: &[u8]) -> Result<Vec<u8>, HaplotypeError> {
        if data.len() != self.pad.len() {
            return Err(HaplotypeError::PadLength {
                pad: self.pad.len(),
                message: data.len(),
            });
        }
        Ok(data.iter().zip(&self.pad).map(|(d, k)| d ^ k).collect())
    }
}
