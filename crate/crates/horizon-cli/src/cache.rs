//! Disk cache of radial solutions. Each record is one file: a JSON header
//! line (key, checksum, counts) followed by the hex encoding of the
//! little-endian `f64` payload.

use crate::error::{CliError, Result};
use horizon_core::geometry::BlackHole;
use horizon_core::ode::{State, Trajectory};
use horizon_core::radial::RadialSolution;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "HORIZON_LAB_CACHE_DIR";
const EXTENSION: &str = "rec";

/// Parameters that determine a radial solution, printed as canonical
/// shortest round-trip decimals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheKey {
    pub omega: f64,
    pub lambda: f64,
    pub m: f64,
    pub mass: f64,
    pub tol: f64,
    pub u_start_over_m: f64,
    pub u_max_over_m: f64,
}

impl CacheKey {
    pub fn text(&self) -> String {
        format!(
            "omega={};lambda={};m={};M={};tol={};u_start={};u_max={}",
            self.omega, self.lambda, self.m, self.mass, self.tol, self.u_start_over_m, self.u_max_over_m
        )
    }

    fn file_name(&self) -> String {
        let digest = Sha256::digest(self.text().as_bytes());
        format!("{}.{EXTENSION}", &hex::encode(digest)[..32])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheRecord {
    pub key: String,
    pub u: Vec<f64>,
    pub y: Vec<State>,
    pub dy: Vec<State>,
    pub f0: State,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub key: String,
    pub checksum: String,
    pub nodes: usize,
    pub payload_bytes: usize,
}

fn push_state(out: &mut Vec<u8>, s: &State) {
    for c in s {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
}

fn read_f64(bytes: &[u8], at: &mut usize) -> f64 {
    let v = f64::from_le_bytes(bytes[*at..*at + 8].try_into().expect("8 bytes"));
    *at += 8;
    v
}

fn read_state(bytes: &[u8], at: &mut usize) -> State {
    let mut s = [C64::new(0.0, 0.0); 2];
    for c in s.iter_mut() {
        let re = read_f64(bytes, at);
        let im = read_f64(bytes, at);
        *c = C64::new(re, im);
    }
    s
}

impl CacheRecord {
    pub fn from_solution(key: &CacheKey, sol: &RadialSolution) -> Self {
        Self {
            key: key.text(),
            u: sol.traj.u.clone(),
            y: sol.traj.y.clone(),
            dy: sol.traj.dy.clone(),
            f0: sol.f0,
        }
    }

    pub fn to_solution(&self, key: &CacheKey) -> Result<RadialSolution> {
        let bh = BlackHole::new(key.mass)?;
        Ok(RadialSolution {
            omega: key.omega,
            lambda: key.lambda,
            m: key.m,
            bh,
            traj: Trajectory {
                u: self.u.clone(),
                y: self.y.clone(),
                dy: self.dy.clone(),
            },
            f0: self.f0,
            tol: key.tol,
        })
    }

    fn payload(&self) -> Vec<u8> {
        let n = self.u.len();
        let mut out = Vec::with_capacity(8 * (n * 9 + 4));
        for u in &self.u {
            out.extend_from_slice(&u.to_le_bytes());
        }
        for s in self.y.iter().chain(&self.dy) {
            push_state(&mut out, s);
        }
        push_state(&mut out, &self.f0);
        out
    }

    pub fn encode(&self) -> Result<String> {
        let payload = self.payload();
        let header = RecordHeader {
            key: self.key.clone(),
            checksum: hex::encode(Sha256::digest(&payload)),
            nodes: self.u.len(),
            payload_bytes: payload.len(),
        };
        Ok(format!("{}\n{}\n", serde_json::to_string(&header)?, hex::encode(payload)))
    }

    pub fn decode(text: &str, origin: &str) -> Result<Self> {
        let bad = |message: String| CliError::Cache {
            path: origin.to_string(),
            message,
        };
        let mut lines = text.lines();
        let header: RecordHeader =
            serde_json::from_str(lines.next().ok_or_else(|| bad("empty file".into()))?).map_err(|e| bad(format!("header: {e}")))?;
        let payload = hex::decode(lines.next().unwrap_or("").trim()).map_err(|e| bad(format!("payload: {e}")))?;
        if hex::encode(Sha256::digest(&payload)) != header.checksum {
            return Err(bad("checksum mismatch".into()));
        }
        let n = header.nodes;
        if payload.len() != header.payload_bytes || payload.len() != 8 * (9 * n + 4) {
            return Err(bad(format!("payload has {} bytes for {n} nodes", payload.len())));
        }
        let mut at = 0;
        let u = (0..n).map(|_| read_f64(&payload, &mut at)).collect();
        let y = (0..n).map(|_| read_state(&payload, &mut at)).collect();
        let dy = (0..n).map(|_| read_state(&payload, &mut at)).collect();
        let f0 = read_state(&payload, &mut at);
        Ok(Self {
            key: header.key,
            u,
            y,
            dy,
            f0,
        })
    }
}

/// Summary line for `cache ls`.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub path: PathBuf,
    pub key: Option<String>,
    pub nodes: usize,
    pub valid: bool,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `HORIZON_LAB_CACHE_DIR` if set, else `fallback`.
    pub fn locate(fallback: &Path) -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::new(PathBuf::from(d)),
            _ => Self::new(fallback),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn load(&self, key: &CacheKey) -> Result<Option<CacheRecord>> {
        let path = self.dir.join(key.file_name());
        if !path.exists() {
            return Ok(None);
        }
        let rec = CacheRecord::decode(&fs::read_to_string(&path)?, &path.display().to_string())?;
        if rec.key != key.text() {
            return Err(CliError::Cache {
                path: path.display().to_string(),
                message: format!("holds `{}`, expected `{}`", rec.key, key.text()),
            });
        }
        Ok(Some(rec))
    }

    /// Writes to a temporary file in the cache directory, then renames.
    pub fn store(&self, key: &CacheKey, rec: &CacheRecord) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(key.file_name());
        let tmp = self.dir.join(format!(".{}.tmp-{}", key.file_name(), std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(rec.encode()?.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    pub fn list(&self) -> Result<Vec<CacheEntry>> {
        let mut out = Vec::new();
        if !self.dir.exists() {
            return Ok(out);
        }
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some(EXTENSION) {
                continue;
            }
            let decoded = fs::read_to_string(&path)
                .map_err(CliError::from)
                .and_then(|t| CacheRecord::decode(&t, &path.display().to_string()));
            out.push(match decoded {
                Ok(r) => CacheEntry {
                    path,
                    key: Some(r.key),
                    nodes: r.u.len(),
                    valid: true,
                },
                Err(_) => CacheEntry {
                    path,
                    key: None,
                    nodes: 0,
                    valid: false,
                },
            });
        }
        out.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(out)
    }

    /// Removes leftover temporary files and records that fail to decode.
    /// Returns the removed paths.
    pub fn gc(&self) -> Result<Vec<PathBuf>> {
        let mut removed = Vec::new();
        if !self.dir.exists() {
            return Ok(removed);
        }
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
            if name.starts_with('.') && name.contains(".tmp-") {
                fs::remove_file(&path)?;
                removed.push(path);
            }
        }
        for e in self.list()? {
            if !e.valid {
                fs::remove_file(&e.path)?;
                removed.push(e.path);
            }
        }
        removed.sort();
        Ok(removed)
    }
}
