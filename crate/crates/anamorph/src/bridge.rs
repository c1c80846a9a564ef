//! Client for an external detector process speaking the line protocol in [`crate::protocol`].
//!
//! The bridge is launched through `sh -c`, so any shell command line works. Images travel by
//! path: each request writes a temporary PNG the bridge reads. A request that gets no answer
//! within the deadline restarts the bridge and is retried once before failing with a timeout.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use anamorph_core::oracle::{DetectionSet, Detector, OracleError};
use anamorph_core::RasterImage;

use crate::imageio;
use crate::protocol::{self, Frame};

pub const DEFAULT_DEADLINE: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeConfig {
    pub command: String,
    /// Per-call limit for the handshake and for each detect request.
    pub deadline: Duration,
    /// Extra attempts after a timed-out or crashed request.
    pub retries: u32,
}

impl BridgeConfig {
    pub fn new(command: impl Into<String>) -> Self {
        Self { command: command.into(), deadline: DEFAULT_DEADLINE, retries: 1 }
    }
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl Process {
    fn spawn(command: &str) -> Result<Self, OracleError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| OracleError::Handshake(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self { child, stdin, lines })
    }

    fn send(&mut self, frame: &[u8]) -> std::io::Result<()> {
        self.stdin.write_all(frame)?;
        self.stdin.flush()
    }

    fn recv_until(&self, deadline: Instant) -> Result<String, RecvTimeoutError> {
        self.lines.recv_timeout(deadline.saturating_duration_since(Instant::now()))
    }
}

impl Drop for Process {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// A connected detector bridge. Hold one per thread; requests are matched to responses by
/// image id, and stray frames for other ids are discarded.
pub struct BridgeDetector {
    cfg: BridgeConfig,
    process: Option<Process>,
    model: String,
    scratch: tempfile::TempDir,
}

impl BridgeDetector {
    /// Starts the bridge and performs the handshake.
    pub fn connect(cfg: BridgeConfig) -> Result<Self, OracleError> {
        let scratch = tempfile::Builder::new()
            .prefix("anamorph-bridge-")
            .tempdir()
            .map_err(|e| OracleError::Io(e.to_string()))?;
        let mut bridge = Self { cfg, process: None, model: String::new(), scratch };
        bridge.start()?;
        Ok(bridge)
    }

    /// Model identifier announced in the `ready` frame.
    pub fn model(&self) -> &str {
        &self.model
    }

    fn start(&mut self) -> Result<(), OracleError> {
        self.process = None;
        let mut p = Process::spawn(&self.cfg.command)?;
        p.send(&protocol::encode_hello()).map_err(|e| OracleError::Handshake(format!("bridge closed its input: {e}")))?;
        let line = p.recv_until(Instant::now() + self.cfg.deadline).map_err(|e| match e {
            RecvTimeoutError::Timeout => OracleError::Handshake("no ready frame before the deadline".into()),
            RecvTimeoutError::Disconnected => OracleError::Handshake("bridge exited before the ready frame".into()),
        })?;
        self.model = protocol::decode_ready(line.as_bytes()).map_err(|e| OracleError::Handshake(e.to_string()))?;
        log::debug!("bridge ready, model {}", self.model);
        self.process = Some(p);
        Ok(())
    }

    /// One request/response exchange. `Ok(None)` means the attempt timed out or the bridge
    /// died, which the caller may retry.
    fn attempt(&mut self, path: &str, image_id: &str) -> Result<Option<DetectionSet>, OracleError> {
        if self.process.is_none() {
            self.start()?;
        }
        let p = self.process.as_mut().expect("started above");
        if p.send(&protocol::encode_request(path, image_id)).is_err() {
            self.process = None;
            return Ok(None);
        }
        let deadline = Instant::now() + self.cfg.deadline;
        loop {
            let line = match p.recv_until(deadline) {
                Ok(line) => line,
                Err(_) => {
                    self.process = None;
                    return Ok(None);
                }
            };
            let frame = Frame::decode(line.as_bytes())?;
            match frame {
                Frame::Result { image_id: id, detections } if id == image_id => {
                    return Ok(Some(DetectionSet { detections, image_id: id }))
                }
                Frame::Error { image_id: id, message } if id == image_id => {
                    return Err(OracleError::Remote { image_id: id, message })
                }
                other => log::debug!("discarding unmatched frame {other:?}"),
            }
        }
    }
}

fn file_stem(image_id: &str) -> String {
    image_id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

impl Detector for BridgeDetector {
    fn detect(&mut self, image: &RasterImage, image_id: &str) -> Result<DetectionSet, OracleError> {
        let path = self.scratch.path().join(format!("{}.png", file_stem(image_id)));
        imageio::write_image(&path, image).map_err(|e| OracleError::Io(e.to_string()))?;
        let path_str = path.to_string_lossy().into_owned();
        let mut result = Err(OracleError::Timeout { image_id: image_id.into() });
        for attempt in 0..=self.cfg.retries {
            if attempt > 0 {
                log::warn!("bridge gave no answer for {image_id}, restarting and retrying");
            }
            match self.attempt(&path_str, image_id) {
                Ok(Some(set)) => {
                    result = Ok(set);
                    break;
                }
                Ok(None) => continue,
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        let _ = std::fs::remove_file(&path);
        result
    }
}
