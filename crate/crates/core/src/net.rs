//! Framed TCP transport between a TI client and the SPU service.
//!
//! Frame: `u32` big-endian length of (type + payload), one type byte, then
//! the payload. A request payload is an `algo=<name>` line followed by the
//! query file verbatim; a response payload is the result file verbatim. So
//! socket and file pipelines produce the same bytes.
//!
//! Malformed frames (truncated, oversized, unknown type) get an error frame
//! and the connection is closed. Malformed requests get an error frame and
//! the connection stays open.

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use thiserror::Error;

use crate::format::{FormatError, TextFormat};
use crate::index::{Edb, EncryptedQuery, SpuKey};
use crate::matcher::{test_all, Algorithm, QueryResultList};

/// Default cap on a single frame, type byte included.
pub const DEFAULT_MAX_FRAME: u32 = 64 * 1024 * 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum FrameType {
    Request = 0x01,
    Response = 0x02,
    Error = 0x7f,
}

impl FrameType {
    fn from_byte(b: u8) -> Option<Self> {
        match b {
            0x01 => Some(FrameType::Request),
            0x02 => Some(FrameType::Response),
            0x7f => Some(FrameType::Error),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameType,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: FrameType, payload: impl Into<Vec<u8>>) -> Self {
        Self {
            kind,
            payload: payload.into(),
        }
    }

    pub fn error(code: &str, message: impl std::fmt::Display) -> Self {
        Self::new(FrameType::Error, format!("{code}\t{message}"))
    }

    pub fn encode(&self) -> Vec<u8> {
        let len = u32::try_from(self.payload.len() + 1).expect("frame exceeds u32 length");
        let mut out = Vec::with_capacity(self.payload.len() + 5);
        out.extend_from_slice(&len.to_be_bytes());
        out.push(self.kind as u8);
        out.extend_from_slice(&self.payload);
        out
    }
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("frame of {len} bytes exceeds the {cap}-byte cap")]
    FrameTooLarge { len: u32, cap: u32 },
    #[error("connection closed mid-frame")]
    Truncated,
    #[error("zero-length frame")]
    EmptyFrame,
    #[error("unknown frame type 0x{0:02x}")]
    UnknownType(u8),
    #[error("unexpected {0:?} frame")]
    UnexpectedFrame(FrameType),
    #[error("server error {code}: {message}")]
    Remote { code: String, message: String },
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Format(#[from] FormatError),
}

impl NetError {
    /// Short code carried in error frames.
    pub fn code(&self) -> &str {
        match self {
            NetError::Io(_) => "io",
            NetError::FrameTooLarge { .. } => "frame-too-large",
            NetError::Truncated => "truncated-frame",
            NetError::EmptyFrame => "empty-frame",
            NetError::UnknownType(_) => "unknown-frame-type",
            NetError::UnexpectedFrame(_) => "unexpected-frame",
            NetError::Remote { code, .. } => code,
            NetError::BadRequest(_) => "bad-request",
            NetError::Format(_) => "bad-query",
        }
    }
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<bool, NetError> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(false),
            Ok(0) => return Err(NetError::Truncated),
            Ok(k) => filled += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(true)
}

/// Reads one frame. `Ok(None)` on a clean close between frames.
pub fn read_frame<R: Read>(r: &mut R, max_frame: u32) -> Result<Option<Frame>, NetError> {
    let mut header = [0u8; 4];
    if !read_full(r, &mut header)? {
        return Ok(None);
    }
    let len = u32::from_be_bytes(header);
    if len == 0 {
        return Err(NetError::EmptyFrame);
    }
    if len > max_frame {
        return Err(NetError::FrameTooLarge { len, cap: max_frame });
    }
    let mut body = vec![0u8; len as usize];
    if !read_full(r, &mut body)? {
        return Err(NetError::Truncated);
    }
    let kind = FrameType::from_byte(body[0]).ok_or(NetError::UnknownType(body[0]))?;
    body.remove(0);
    Ok(Some(Frame { kind, payload: body }))
}

pub fn write_frame<W: Write>(w: &mut W, frame: &Frame) -> Result<(), NetError> {
    w.write_all(&frame.encode())?;
    w.flush()?;
    Ok(())
}

pub fn encode_request(algo: Algorithm, query_text: &str) -> Vec<u8> {
    format!("algo={algo}\n{query_text}").into_bytes()
}

pub fn decode_request(payload: &[u8]) -> Result<(Algorithm, EncryptedQuery), NetError> {
    let text = std::str::from_utf8(payload).map_err(|_| NetError::BadRequest("payload is not UTF-8".into()))?;
    let (first, rest) = text
        .split_once('\n')
        .ok_or_else(|| NetError::BadRequest("missing algo line".into()))?;
    let algo = first
        .strip_prefix("algo=")
        .ok_or_else(|| NetError::BadRequest("missing algo line".into()))?
        .parse()
        .map_err(NetError::BadRequest)?;
    Ok((algo, EncryptedQuery::from_text(rest)?))
}

/// Runs a test and renders the result file. Shared by the `test` command
/// and the socket service.
pub fn evaluate(
    spk: &SpuKey,
    edb: &Edb,
    query: &EncryptedQuery,
    algo: Algorithm,
    workers: usize,
) -> Result<String, crate::matcher::MatchError> {
    test_all(spk, edb, query, algo, workers).map(|r| r.to_text())
}

/// State loaded once at startup and shared read-only by all connections.
#[derive(Debug)]
pub struct SpuService {
    spk: SpuKey,
    edb: Edb,
    workers: usize,
    max_frame: u32,
}

impl SpuService {
    pub fn new(spk: SpuKey, edb: Edb, workers: usize, max_frame: u32) -> Self {
        Self {
            spk,
            edb,
            workers,
            max_frame,
        }
    }

    pub fn max_frame(&self) -> u32 {
        self.max_frame
    }

    /// Answers one request payload.
    pub fn respond(&self, payload: &[u8]) -> Frame {
        let (algo, query) = match decode_request(payload) {
            Ok(r) => r,
            Err(e) => return Frame::error(e.code(), &e),
        };
        match evaluate(&self.spk, &self.edb, &query, algo, self.workers) {
            Ok(text) => Frame::new(FrameType::Response, text),
            Err(e) => Frame::error(e.code().as_str(), e),
        }
    }

    /// Serves one connection until the peer closes it or sends garbage.
    pub fn handle_connection(&self, mut stream: TcpStream) -> Result<(), NetError> {
        loop {
            match read_frame(&mut stream, self.max_frame) {
                Ok(None) => return Ok(()),
                Ok(Some(frame)) if frame.kind == FrameType::Request => {
                    write_frame(&mut stream, &self.respond(&frame.payload))?;
                }
                Ok(Some(frame)) => {
                    let err = NetError::UnexpectedFrame(frame.kind);
                    write_frame(&mut stream, &Frame::error(err.code(), &err))?;
                    return Err(err);
                }
                Err(NetError::Io(e)) => return Err(NetError::Io(e)),
                Err(err) => {
                    // Best effort: the peer may already be gone.
                    let _ = write_frame(&mut stream, &Frame::error(err.code(), &err));
                    let _ = stream.shutdown(std::net::Shutdown::Both);
                    return Err(err);
                }
            }
        }
    }
}

/// A running service: one accept thread, one thread per connection.
pub struct Server {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept: Option<JoinHandle<()>>,
}

impl Server {
    pub fn start(listener: TcpListener, service: Arc<SpuService>) -> io::Result<Self> {
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let accept = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let service = Arc::clone(&service);
                std::thread::spawn(move || {
                    let _ = service.handle_connection(stream);
                });
            }
        });
        Ok(Self {
            addr,
            stop,
            accept: Some(accept),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the accept loop exits.
    pub fn join(mut self) {
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept.
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        if self.accept.is_some() {
            self.shutdown();
        }
    }
}

/// A TI-side connection to the service.
pub struct Client {
    stream: TcpStream,
    max_frame: u32,
}

impl Client {
    pub fn connect<A: ToSocketAddrs>(addr: A) -> Result<Self, NetError> {
        Ok(Self {
            stream: TcpStream::connect(addr)?,
            max_frame: DEFAULT_MAX_FRAME,
        })
    }

    /// Sends a query file and returns the result file text.
    pub fn test(&mut self, algo: Algorithm, query_text: &str) -> Result<String, NetError> {
        let frame = Frame::new(FrameType::Request, encode_request(algo, query_text));
        write_frame(&mut self.stream, &frame)?;
        let reply = read_frame(&mut self.stream, self.max_frame)?.ok_or(NetError::Truncated)?;
        match reply.kind {
            FrameType::Response => {
                String::from_utf8(reply.payload).map_err(|_| NetError::BadRequest("response is not UTF-8".into()))
            }
            FrameType::Error => {
                let text = String::from_utf8_lossy(&reply.payload);
                let (code, message) = text.split_once('\t').unwrap_or((&text, ""));
                Err(NetError::Remote {
                    code: code.to_string(),
                    message: message.to_string(),
                })
            }
            FrameType::Request => Err(NetError::UnexpectedFrame(reply.kind)),
        }
    }

    /// Like [`Client::test`] but parses the result file.
    pub fn test_parsed(&mut self, algo: Algorithm, query: &EncryptedQuery) -> Result<QueryResultList, NetError> {
        let text = self.test(algo, &query.to_text())?;
        Ok(QueryResultList::from_text(&text)?)
    }
}

/// One-shot helper: connect, send, return the result file text.
pub fn send<A: ToSocketAddrs>(addr: A, algo: Algorithm, query_text: &str) -> Result<String, NetError> {
    Client::connect(addr)?.test(algo, query_text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haplotype::parse_haplotype;
    use crate::index::hash::HashAlg;
    use crate::index::keys::{setup, DEFAULT_SECURITY};
    use crate::index::{gen_edb, gen_query, Mode, SystemKeys};
    use crate::paillier::KeygenParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::io::Cursor;

    struct Setup {
        keys: SystemKeys,
        service: Arc<SpuService>,
        rng: ChaCha20Rng,
    }

    fn service(max_frame: u32) -> Setup {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let keys = setup(DEFAULT_SECURITY, &KeygenParams::test(256), HashAlg::Sha256, &mut rng).unwrap();
        let gdb: Vec<_> = ["AGCT", "AGC", "TTTT"].iter().map(|s| parse_haplotype(s).unwrap()).collect();
        let (edb, _) = gen_edb(&keys, &gdb, Mode::Basic, None, &mut rng).unwrap();
        let service = Arc::new(SpuService::new(keys.spu_key(), edb, 2, max_frame));
        Setup { keys, service, rng }
    }

    fn start(service: &Arc<SpuService>) -> Server {
        Server::start(TcpListener::bind("127.0.0.1:0").unwrap(), Arc::clone(service)).unwrap()
    }

    #[test]
    fn frame_codec() {
        let f = Frame::new(FrameType::Response, b"abc".to_vec());
        let bytes = f.encode();
        assert_eq!(bytes, [0, 0, 0, 4, 2, b'a', b'b', b'c']);
        assert_eq!(read_frame(&mut Cursor::new(&bytes), 16).unwrap(), Some(f));
        assert!(matches!(read_frame(&mut Cursor::new(&bytes[..6]), 16), Err(NetError::Truncated)));
        assert!(matches!(read_frame(&mut Cursor::new(&bytes[..2]), 16), Err(NetError::Truncated)));
        assert!(matches!(read_frame(&mut Cursor::new(Vec::new()), 16), Ok(None)));
        assert!(matches!(
            read_frame(&mut Cursor::new(&bytes), 3),
            Err(NetError::FrameTooLarge { len: 4, cap: 3 })
        ));
        assert!(matches!(
            read_frame(&mut Cursor::new([0, 0, 0, 1, 9]), 16),
            Err(NetError::UnknownType(9))
        ));
        assert!(matches!(read_frame(&mut Cursor::new([0, 0, 0, 0]), 16), Err(NetError::EmptyFrame)));
    }

    #[test]
    fn loopback_matches_file_pipeline() {
        let mut s = service(DEFAULT_MAX_FRAME);
        let server = start(&s.service);
        let q = gen_query(s.keys.public(), &parse_haplotype("AGCA").unwrap(), Mode::Basic, None, &mut s.rng).unwrap();
        let mut client = Client::connect(server.addr()).unwrap();
        for algo in Algorithm::ALL {
            let direct = evaluate(&s.keys.spu_key(), &s.service.edb, &q, algo, 1).unwrap();
            assert_eq!(client.test(algo, &q.to_text()).unwrap(), direct);
        }
        server.stop();
    }

    #[test]
    fn truncated_frame_gets_error_and_server_survives() {
        let mut s = service(DEFAULT_MAX_FRAME);
        let server = start(&s.service);

        let mut raw = TcpStream::connect(server.addr()).unwrap();
        raw.write_all(&[0, 0, 0, 100, 1, b'a']).unwrap();
        raw.shutdown(std::net::Shutdown::Write).unwrap();
        let reply = read_frame(&mut raw, DEFAULT_MAX_FRAME).unwrap().unwrap();
        assert_eq!(reply.kind, FrameType::Error);
        assert!(reply.payload.starts_with(b"truncated-frame\t"));
        assert!(read_frame(&mut raw, DEFAULT_MAX_FRAME).unwrap().is_none());

        let q = gen_query(s.keys.public(), &parse_haplotype("AG").unwrap(), Mode::Basic, None, &mut s.rng).unwrap();
        let text = send(server.addr(), Algorithm::Lcs, &q.to_text()).unwrap();
        assert_eq!(text, "PPGRT1-RES\n0\tlcs\t2\n1\tlcs\t2\n2\tlcs\t0\n");
    }

    #[test]
    fn oversized_frame_rejected() {
        let s = service(64);
        let server = start(&s.service);
        let mut raw = TcpStream::connect(server.addr()).unwrap();
        raw.write_all(&[0, 0, 1, 0, 1]).unwrap();
        let reply = read_frame(&mut raw, DEFAULT_MAX_FRAME).unwrap().unwrap();
        assert_eq!(reply.kind, FrameType::Error);
        assert!(reply.payload.starts_with(b"frame-too-large\t"));
    }

    #[test]
    fn bad_request_keeps_connection_open() {
        let mut s = service(DEFAULT_MAX_FRAME);
        let server = start(&s.service);
        let mut client = Client::connect(server.addr()).unwrap();
        match client.test(Algorithm::Lcs, "PPGRT1-SK\n") {
            Err(NetError::Remote { code, .. }) => assert_eq!(code, "bad-query"),
            other => panic!("unexpected {other:?}"),
        }
        let q = gen_query(s.keys.public(), &parse_haplotype("AGCT").unwrap(), Mode::Basic, None, &mut s.rng).unwrap();
        let results = client.test_parsed(Algorithm::Hamming, &q).unwrap();
        assert_eq!(results.results()[0].outcome, Ok(4));
    }

    #[test]
    fn concurrent_clients_match_serial() {
        let mut s = service(DEFAULT_MAX_FRAME);
        let server = start(&s.service);
        let queries: Vec<_> = ["AGCT", "TTGA", "A", "CCCC"]
            .iter()
            .map(|x| gen_query(s.keys.public(), &parse_haplotype(x).unwrap(), Mode::Basic, None, &mut s.rng).unwrap())
            .collect();
        let serial: Vec<String> = queries
            .iter()
            .map(|q| evaluate(&s.keys.spu_key(), &s.service.edb, q, Algorithm::Edit, 1).unwrap())
            .collect();
        let addr = server.addr();
        let parallel: Vec<String> = std::thread::scope(|scope| {
            let handles: Vec<_> = queries
                .iter()
                .map(|q| scope.spawn(move || send(addr, Algorithm::Edit, &q.to_text()).unwrap()))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert_eq!(parallel, serial);
    }
}
