//! TCP transport: one process per worker, full mesh, static host list.
//!
//! Worker i listens on the i-th `host:port` of the config, dials every
//! higher index and accepts from every lower one. Each connection starts
//! with a 20-byte hello (magic, protocol version, model hash, worker
//! count, sender index); any mismatch aborts both sides before the run
//! starts. After the handshake every frame travels as a 4-byte big-endian
//! length prefix followed by the frame bytes.
//!
//! One reader thread per peer socket decodes frames into a shared inbox;
//! the worker event loop is the only consumer. Blocking on an empty inbox
//! is guarded by a watchdog that turns protocol stalls into errors.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::{Duration, Instant};

use mapcheck_core::model::TransitionSystem;
use mapcheck_core::store::fnv1a64;

use crate::wire::{decode_frame, encode_frame, Frame, StatsMsg};
use crate::worker::{
    FrameSink, Mode, RunResult, Verdict, Worker, WorkerConfig, WorkerStats,
};
use crate::DistError;

const MAGIC: &[u8; 4] = b"MAPC";
pub const PROTOCOL_VERSION: u32 = 1;
/// Frames larger than this are treated as corruption.
const MAX_FRAME_BYTES: u32 = 64 << 20;

#[derive(Debug, Clone)]
pub struct TcpConfig {
    /// `host:port` per worker; line i of the hosts file is worker i.
    pub hosts: Vec<String>,
    pub self_index: usize,
    /// Model fingerprint checked in the handshake.
    pub model_hash: u64,
    pub connect_timeout: Duration,
    /// Max time to wait for a message before declaring a stall.
    pub watchdog: Duration,
}

impl TcpConfig {
    pub fn new(hosts: Vec<String>, self_index: usize, model_hash: u64) -> Self {
        TcpConfig {
            hosts,
            self_index,
            model_hash,
            connect_timeout: Duration::from_secs(30),
            watchdog: Duration::from_secs(60),
        }
    }
}

/// Parse a hosts file: one `host:port` per line, `#` comments.
pub fn parse_hosts(text: &str) -> Result<Vec<String>, DistError> {
    let mut hosts = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !line.contains(':') {
            return Err(DistError::Config(format!(
                "hosts file line {}: `{line}` is not host:port",
                i + 1
            )));
        }
        hosts.push(line.to_string());
    }
    if hosts.is_empty() {
        return Err(DistError::Config("hosts file lists no workers".into()));
    }
    Ok(hosts)
}

/// Structural fingerprint of a model for the handshake: hashes the state
/// width, the initial states, and a bounded BFS probe of the transition
/// structure (acceptance bits and successor lists of the first 64 states).
/// Drivers should additionally mix in their model descriptor.
pub fn model_fingerprint(model: &dyn TransitionSystem) -> u64 {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&(model.state_width() as u64).to_be_bytes());
    let mut queue: std::collections::VecDeque<_> = model.initial_states().into();
    let mut seen: std::collections::HashSet<_> = queue.iter().cloned().collect();
    for s in &queue {
        bytes.extend_from_slice(s.as_bytes());
    }
    let mut probed = 0;
    while let Some(s) = queue.pop_front() {
        if probed >= 64 {
            break;
        }
        probed += 1;
        bytes.push(match model.is_accepting(&s) {
            Ok(true) => 1,
            Ok(false) => 0,
            Err(_) => 2,
        });
        if let Ok(succs) = model.successors(&s) {
            for t in succs {
                bytes.extend_from_slice(t.as_bytes());
                if seen.insert(t.clone()) {
                    queue.push_back(t);
                }
            }
        }
    }
    fnv1a64(&bytes)
}

type InboxItem = Result<(usize, Frame), String>;

/// Connected mesh endpoint for one worker.
pub struct TcpEndpoint {
    self_index: usize,
    width: usize,
    peers: Vec<Option<TcpStream>>,
    inbox: Receiver<InboxItem>,
    loopback: Sender<InboxItem>,
    watchdog: Duration,
    frames_sent: u64,
    frames_received: u64,
}

fn transport_err(context: &str, err: std::io::Error) -> DistError {
    DistError::Transport(format!("{context}: {err}"))
}

fn hello_bytes(cfg: &TcpConfig) -> [u8; 20] {
    let mut out = [0u8; 20];
    out[0..4].copy_from_slice(MAGIC);
    out[4..8].copy_from_slice(&PROTOCOL_VERSION.to_be_bytes());
    out[8..16].copy_from_slice(&cfg.model_hash.to_be_bytes());
    out[16..18].copy_from_slice(&(cfg.hosts.len() as u16).to_be_bytes());
    out[18..20].copy_from_slice(&(cfg.self_index as u16).to_be_bytes());
    out
}

/// Exchange hellos on a fresh socket and return the peer's index.
fn handshake(stream: &mut TcpStream, cfg: &TcpConfig) -> Result<usize, DistError> {
    stream
        .set_read_timeout(Some(Duration::from_secs(10)))
        .map_err(|e| transport_err("set handshake timeout", e))?;
    stream
        .write_all(&hello_bytes(cfg))
        .map_err(|e| transport_err("send hello", e))?;
    let mut peer = [0u8; 20];
    stream
        .read_exact(&mut peer)
        .map_err(|e| transport_err("read hello", e))?;
    if &peer[0..4] != MAGIC {
        return Err(DistError::Handshake("bad magic; not a mapcheck peer".into()));
    }
    let version = u32::from_be_bytes(peer[4..8].try_into().unwrap());
    if version != PROTOCOL_VERSION {
        return Err(DistError::Handshake(format!(
            "protocol version mismatch: ours {PROTOCOL_VERSION}, peer {version}"
        )));
    }
    let hash = u64::from_be_bytes(peer[8..16].try_into().unwrap());
    if hash != cfg.model_hash {
        return Err(DistError::Handshake(format!(
            "model hash mismatch: ours {:016x}, peer {hash:016x} (peers must check the same model)",
            cfg.model_hash
        )));
    }
    let count = u16::from_be_bytes(peer[16..18].try_into().unwrap()) as usize;
    if count != cfg.hosts.len() {
        return Err(DistError::Handshake(format!(
            "worker count mismatch: ours {}, peer {count}",
            cfg.hosts.len()
        )));
    }
    let index = u16::from_be_bytes(peer[18..20].try_into().unwrap()) as usize;
    if index >= cfg.hosts.len() {
        return Err(DistError::Handshake(format!("peer claims index {index} out of range")));
    }
    stream
        .set_read_timeout(None)
        .map_err(|e| transport_err("clear handshake timeout", e))?;
    Ok(index)
}

fn resolve(host: &str) -> Result<SocketAddr, DistError> {
    host.to_socket_addrs()
        .map_err(|e| DistError::Config(format!("cannot resolve `{host}`: {e}")))?
        .next()
        .ok_or_else(|| DistError::Config(format!("`{host}` resolves to no address")))
}

/// Establish the full mesh. Lower indexes dial higher ones; worker count 1
/// short-circuits to a pure loopback endpoint with no sockets.
pub fn tcp_connect(cfg: &TcpConfig, state_width: usize) -> Result<TcpEndpoint, DistError> {
    let n = cfg.hosts.len();
    if cfg.self_index >= n {
        return Err(DistError::Config(format!(
            "worker index {} out of range for {n} hosts",
            cfg.self_index
        )));
    }
    let (tx, rx) = mpsc::channel::<InboxItem>();
    let mut endpoint = TcpEndpoint {
        self_index: cfg.self_index,
        width: state_width,
        peers: (0..n).map(|_| None).collect(),
        inbox: rx,
        loopback: tx.clone(),
        watchdog: cfg.watchdog,
        frames_sent: 0,
        frames_received: 0,
    };
    if n == 1 {
        return Ok(endpoint);
    }

    let listener = TcpListener::bind(resolve(&cfg.hosts[cfg.self_index])?)
        .map_err(|e| transport_err(&format!("bind {}", cfg.hosts[cfg.self_index]), e))?;
    listener
        .set_nonblocking(true)
        .map_err(|e| transport_err("listener nonblocking", e))?;
    let deadline = Instant::now() + cfg.connect_timeout;

    // Dial every higher index, retrying until the peer's listener is up.
    for dst in cfg.self_index + 1..n {
        let addr = resolve(&cfg.hosts[dst])?;
        let mut stream = loop {
            match TcpStream::connect_timeout(&addr, Duration::from_millis(500)) {
                Ok(s) => break s,
                Err(e) => {
                    if Instant::now() >= deadline {
                        return Err(transport_err(&format!("connect to worker {dst}"), e));
                    }
                    thread::sleep(Duration::from_millis(50));
                }
            }
        };
        let peer = handshake(&mut stream, cfg)?;
        if peer != dst {
            return Err(DistError::Handshake(format!(
                "dialed worker {dst} but peer identifies as {peer}"
            )));
        }
        stream.set_nodelay(true).ok();
        endpoint.peers[dst] = Some(stream);
    }

    // Accept one connection from every lower index.
    let mut accepted = 0;
    while accepted < cfg.self_index {
        match listener.accept() {
            Ok((mut stream, _)) => {
                stream
                    .set_nonblocking(false)
                    .map_err(|e| transport_err("stream blocking", e))?;
                let peer = handshake(&mut stream, cfg)?;
                if peer >= cfg.self_index {
                    return Err(DistError::Handshake(format!(
                        "unexpected connection from worker {peer} (higher indexes are dialed)"
                    )));
                }
                if endpoint.peers[peer].is_some() {
                    return Err(DistError::Handshake(format!(
                        "duplicate connection from worker {peer}"
                    )));
                }
                stream.set_nodelay(true).ok();
                endpoint.peers[peer] = Some(stream);
                accepted += 1;
            }
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                if Instant::now() >= deadline {
                    return Err(DistError::Transport(format!(
                        "timed out waiting for {} inbound connections",
                        cfg.self_index - accepted
                    )));
                }
                thread::sleep(Duration::from_millis(10));
            }
            Err(e) => return Err(transport_err("accept", e)),
        }
    }

    // Reader thread per peer socket.
    for (peer, slot) in endpoint.peers.iter().enumerate() {
        if let Some(stream) = slot {
            let read_half = stream
                .try_clone()
                .map_err(|e| transport_err("clone socket", e))?;
            let tx = tx.clone();
            let width = state_width;
            thread::Builder::new()
                .name(format!("mapcheck-rx-{peer}"))
                .spawn(move || read_loop(read_half, peer, width, tx))
                .map_err(|e| transport_err("spawn reader", e))?;
        }
    }
    Ok(endpoint)
}

fn read_loop(mut stream: TcpStream, peer: usize, width: usize, tx: Sender<InboxItem>) {
    loop {
        let mut len_buf = [0u8; 4];
        match stream.read_exact(&mut len_buf) {
            Ok(()) => {}
            // Peer closed: normal at end of run.
            Err(_) => return,
        }
        let len = u32::from_be_bytes(len_buf);
        if len > MAX_FRAME_BYTES {
            let _ = tx.send(Err(format!("frame of {len} bytes from worker {peer}")));
            return;
        }
        let mut payload = vec![0u8; len as usize];
        if stream.read_exact(&mut payload).is_err() {
            let _ = tx.send(Err(format!("worker {peer} closed mid-frame")));
            return;
        }
        match decode_frame(&payload, width) {
            Ok(frame) => {
                if tx.send(Ok((peer, frame))).is_err() {
                    return; // endpoint dropped
                }
            }
            Err(e) => {
                let _ = tx.send(Err(format!("undecodable frame from worker {peer}: {e}")));
                return;
            }
        }
    }
}

impl TcpEndpoint {
    pub fn workers(&self) -> usize {
        self.peers.len()
    }

    /// Drain everything currently available without blocking.
    pub fn poll(&mut self) -> Result<Vec<Frame>, DistError> {
        let mut out = Vec::new();
        loop {
            match self.inbox.try_recv() {
                Ok(Ok((_, frame))) => {
                    self.frames_received += 1;
                    out.push(frame);
                }
                Ok(Err(msg)) => return Err(DistError::Transport(msg)),
                Err(_) => return Ok(out),
            }
        }
    }

    /// Wait for the next frame, up to the watchdog limit.
    pub fn block_for_frame(&mut self) -> Result<Frame, DistError> {
        match self.inbox.recv_timeout(self.watchdog) {
            Ok(Ok((_, frame))) => {
                self.frames_received += 1;
                Ok(frame)
            }
            Ok(Err(msg)) => Err(DistError::Transport(msg)),
            Err(RecvTimeoutError::Timeout) => Err(DistError::Stall(format!(
                "no message within {:?}; a peer likely crashed or the protocol wedged",
                self.watchdog
            ))),
            Err(RecvTimeoutError::Disconnected) => {
                Err(DistError::Transport("all peer connections closed".into()))
            }
        }
    }

    pub fn frames_sent(&self) -> u64 {
        self.frames_sent
    }

    pub fn frames_received(&self) -> u64 {
        self.frames_received
    }
}

impl FrameSink for TcpEndpoint {
    fn send(&mut self, dst: usize, frame: Frame) -> Result<(), DistError> {
        self.frames_sent += 1;
        if dst == self.self_index {
            self.loopback
                .send(Ok((dst, frame)))
                .map_err(|_| DistError::Transport("loopback closed".into()))?;
            return Ok(());
        }
        let payload = encode_frame(&frame, self.width)?;
        let stream = self.peers[dst]
            .as_mut()
            .ok_or_else(|| DistError::Transport(format!("no connection to worker {dst}")))?;
        stream
            .write_all(&(payload.len() as u32).to_be_bytes())
            .and_then(|_| stream.write_all(&payload))
            .map_err(|e| transport_err(&format!("send to worker {dst}"), e))
    }
}

#[derive(Debug, Clone)]
pub struct TcpRunOptions {
    pub mode: Mode,
    pub batch_size: usize,
    pub state_cap: u64,
}

impl Default for TcpRunOptions {
    fn default() -> Self {
        TcpRunOptions {
            mode: Mode::Map,
            batch_size: 64,
            state_cap: u64::MAX,
        }
    }
}

/// Run one worker of a multi-process TCP search.
///
/// Worker 0 returns the globally aggregated verdict (the other workers
/// report their statistics to it after TERMINATE); workers > 0 return a
/// verdict whose per-worker details cover only themselves.
pub fn run_tcp(
    model: &dyn TransitionSystem,
    cfg: &TcpConfig,
    opts: &TcpRunOptions,
) -> Result<Verdict, DistError> {
    let n = cfg.hosts.len();
    let mut endpoint = tcp_connect(cfg, model.state_width())?;
    let mut worker = Worker::new(
        &WorkerConfig {
            id: cfg.self_index,
            workers: n,
            mode: opts.mode,
            batch_size: opts.batch_size,
            state_cap: opts.state_cap,
        },
        model,
    );

    let mut late_stats: Vec<StatsMsg> = Vec::new();
    loop {
        for frame in endpoint.poll()? {
            route(frame, &mut worker, &mut late_stats)?;
        }
        let report = worker.step(&mut endpoint)?;
        match report.status {
            crate::worker::StepStatus::Finished => break,
            crate::worker::StepStatus::Progress => {}
            crate::worker::StepStatus::Blocked => {
                let frame = endpoint.block_for_frame()?;
                route(frame, &mut worker, &mut late_stats)?;
            }
        }
    }

    let (result, iterations) = worker.outcome().expect("loop exits only when finished");
    if cfg.self_index == 0 {
        let mut stats: Vec<StatsMsg> = vec![worker.stats_msg()];
        stats.extend(late_stats);
        while stats.len() < n {
            match endpoint.block_for_frame()? {
                Frame::Stats(msg) => stats.push(msg),
                // Nothing else can legitimately arrive after TERMINATE.
                other => {
                    return Err(DistError::Corruption(format!(
                        "expected STATS after termination, got {}",
                        other.label()
                    )))
                }
            }
        }
        stats.sort_by_key(|s| s.worker);
        let per_worker: Vec<WorkerStats> = stats
            .iter()
            .map(|s| WorkerStats {
                worker: s.worker as usize,
                owned_states: s.owned_states,
                transitions: s.transitions,
                sent_states: s.sent_states,
                received_states: s.received_states,
                excluded: s.excluded,
            })
            .collect();
        Ok(Verdict {
            result,
            iterations,
            states: per_worker.iter().map(|s| s.owned_states).sum(),
            transitions: per_worker.iter().map(|s| s.transitions).sum(),
            messages: per_worker.iter().map(|s| s.sent_states).sum(),
            excluded_total: per_worker.iter().map(|s| s.excluded).sum(),
            excluded_states: worker.excluded_states(),
            per_worker,
        })
    } else {
        endpoint.send(0, Frame::Stats(worker.stats_msg()))?;
        let stats = worker.stats();
        Ok(Verdict {
            result,
            iterations,
            states: stats.owned_states,
            transitions: stats.transitions,
            messages: stats.sent_states,
            excluded_total: stats.excluded,
            excluded_states: worker.excluded_states(),
            per_worker: vec![stats],
        })
    }
}

fn route(
    frame: Frame,
    worker: &mut Worker,
    late_stats: &mut Vec<StatsMsg>,
) -> Result<(), DistError> {
    match frame {
        // Stats can only arrive at worker 0, and only once peers saw
        // TERMINATE; buffer them for aggregation.
        Frame::Stats(msg) => {
            late_stats.push(msg);
            Ok(())
        }
        other => worker.on_frame(other),
    }
}

/// Convenience check used by drivers: print-worthy result order.
pub fn is_violation(result: &RunResult) -> bool {
    matches!(result, RunResult::Cycle { .. })
}
