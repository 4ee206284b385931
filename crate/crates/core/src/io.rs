//! Run manifests, CSV tables and binary field snapshots.
//!
//! Snapshot layout: a 64-byte little-endian header
//!
//! | bytes  | content              |
//! |--------|----------------------|
//! | 0..4   | magic `RLXF`         |
//! | 4..8   | version (u32)        |
//! | 8..12  | dimension (u32)      |
//! | 12..16 | points per axis (u32)|
//! | 16..20 | field count (u32)    |
//! | 20..24 | zero                 |
//! | 24..32 | sample index (u64)   |
//! | 32..40 | sample time (f64)    |
//! | 40..64 | zero                 |
//!
//! followed by the fields, each row-major as little-endian `f64`.

use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::SweepReport;
use crate::grid::Grid;
use crate::models::MixtureState;
use crate::trajectory::{Trajectory, LEDGER_COLUMNS};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"RLXF";
pub const SNAPSHOT_VERSION: u32 = 1;
pub const SNAPSHOT_HEADER_BYTES: usize = 64;

/// Hex SHA-256 of the compact JSON serialization.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let bytes = serde_json::to_vec(config).map_err(|e| Error::Config(e.to_string()))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Round-trip formatting with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with a trailing `config_hash` column on every row.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>], hash: &str) -> String {
    let mut s = header.join(",");
    s.push_str(",config_hash\n");
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| fmt_f64(*v)).collect();
        s.push_str(&cells.join(","));
        s.push(',');
        s.push_str(hash);
        s.push('\n');
    }
    s
}

pub fn ledger_csv(traj: &Trajectory, hash: &str) -> String {
    let rows: Vec<Vec<f64>> = traj.ledger.iter().map(|r| r.values().to_vec()).collect();
    csv_table(&LEDGER_COLUMNS, &rows, hash)
}

/// Columns `value, epsilon, tau` followed by the error columns in name order.
pub fn sweep_csv(report: &SweepReport, hash: &str) -> String {
    let mut names: Vec<&String> = report.rows.iter().flat_map(|r| r.errors.keys()).collect();
    names.sort();
    names.dedup();
    let mut header = vec!["value", "epsilon", "tau"];
    header.extend(names.iter().map(|s| s.as_str()));
    let rows: Vec<Vec<f64>> = report
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![r.value, r.epsilon, r.tau];
            v.extend(names.iter().map(|n| r.errors.get(*n).copied().unwrap_or(f64::NAN)));
            v
        })
        .collect();
    csv_table(&header, &rows, hash)
}

#[derive(Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub config: &'a C,
    pub config_hash: &'a str,
    pub code_version: &'a str,
    pub seed: u64,
    pub status: &'a str,
    pub samples: usize,
    /// Seconds since the Unix epoch; the only time-dependent output.
    pub created_unix: u64,
}

pub fn manifest_json<C: Serialize>(config: &C, hash: &str, seed: u64, status: &str, samples: usize) -> Result<String> {
    let created_unix =
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let m = Manifest {
        config,
        config_hash: hash,
        code_version: env!("CARGO_PKG_VERSION"),
        seed,
        status,
        samples,
        created_unix,
    };
    serde_json::to_string_pretty(&m).map_err(|e| Error::Io(e.to_string()))
}

/// Header fields of a snapshot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotHeader {
    pub version: u32,
    pub dim: u32,
    pub n: u32,
    pub field_count: u32,
    pub sample_index: u64,
    pub time: f64,
}

/// Fields `α₊, ρ₊, ρ₋, u₁…u_d` of a state.
pub fn state_fields(state: &MixtureState) -> Vec<&[f64]> {
    let mut v: Vec<&[f64]> = vec![&state.alpha_plus, &state.rho_plus, &state.rho_minus];
    v.extend(state.u.iter().map(|c| c.as_slice()));
    v
}

pub fn write_snapshot<W: Write>(w: &mut W, grid: Grid, sample_index: u64, time: f64, fields: &[&[f64]]) -> Result<()> {
    for f in fields {
        if f.len() != grid.len() {
            return Err(Error::Shape("snapshot field does not match the grid".into()));
        }
    }
    let mut h = [0u8; SNAPSHOT_HEADER_BYTES];
    h[0..4].copy_from_slice(SNAPSHOT_MAGIC);
    h[4..8].copy_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    h[8..12].copy_from_slice(&(grid.dim() as u32).to_le_bytes());
    h[12..16].copy_from_slice(&(grid.n() as u32).to_le_bytes());
    h[16..20].copy_from_slice(&(fields.len() as u32).to_le_bytes());
    h[24..32].copy_from_slice(&sample_index.to_le_bytes());
    h[32..40].copy_from_slice(&time.to_le_bytes());
    w.write_all(&h)?;
    let mut buf = Vec::with_capacity(fields.len() * grid.len() * 8);
    for f in fields {
        for v in f.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(r: &mut R) -> Result<(SnapshotHeader, Vec<Vec<f64>>)> {
    let mut h = [0u8; SNAPSHOT_HEADER_BYTES];
    r.read_exact(&mut h)?;
    if &h[0..4] != SNAPSHOT_MAGIC {
        return Err(Error::Io("not a snapshot file (bad magic)".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(h[o..o + 4].try_into().unwrap());
    let header = SnapshotHeader {
        version: u32_at(4),
        dim: u32_at(8),
        n: u32_at(12),
        field_count: u32_at(16),
        sample_index: u64::from_le_bytes(h[24..32].try_into().unwrap()),
        time: f64::from_le_bytes(h[32..40].try_into().unwrap()),
    };
    if header.version != SNAPSHOT_VERSION {
        return Err(Error::Io(format!("unsupported snapshot version {}", header.version)));
    }
    let len = (header.n as usize).pow(header.dim);
    let mut fields = Vec::with_capacity(header.field_count as usize);
    let mut bytes = vec![0u8; len * 8];
    for _ in 0..header.field_count {
        r.read_exact(&mut bytes)?;
        fields.push(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect());
    }
    Ok((header, fields))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes `manifest.json`, `ledger.csv` and, if requested, one snapshot per
/// sample under `snapshots/`.
pub fn write_run_outputs<C: Serialize>(
    dir: &Path,
    config: &C,
    seed: u64,
    traj: &Trajectory,
    status: &str,
    snapshots: bool,
) -> Result<String> {
    std::fs::create_dir_all(dir)?;
    let hash = config_hash(config)?;
    write_file(&dir.join("manifest.json"), &manifest_json(config, &hash, seed, status, traj.len())?)?;
    write_file(&dir.join("ledger.csv"), &ledger_csv(traj, &hash))?;
    if snapshots {
        let sdir = dir.join("snapshots");
        std::fs::create_dir_all(&sdir)?;
        for (i, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
            let path = sdir.join(format!("sample_{i:05}_{}.rlxf", &hash[..12]));
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
            write_snapshot(&mut f, traj.grid, i as u64, *t, &state_fields(s))?;
            f.flush()?;
        }
    }
    Ok(hash)
}
