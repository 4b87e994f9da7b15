//! On-disk formats: binary matrices, snapshot files, model directories and
//! CSV rasters.
//!
//! A matrix file is the 4-byte magic `DMDM`, a `u32` version (1), `u64` rows,
//! `u64` cols, a `u8` dtype (0 real, 1 complex) and the row-major payload,
//! all little-endian. Complex entries are stored as `(re, im)` pairs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::dmd::{DmdModel, ModeKind};
use crate::linalg::{ComplexMatrix, DenseMatrix};
use crate::swe::{FieldKind, SnapshotSet, SphericalGrid};

const MAGIC: &[u8; 4] = b"DMDM";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 1;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, IoError>;

fn format_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixData {
    Real(DenseMatrix),
    Complex(ComplexMatrix),
}

fn header(rows: usize, cols: usize, dtype: u8, payload: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + payload);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    out.push(dtype);
    out
}

pub fn encode_real(m: &DenseMatrix) -> Vec<u8> {
    let mut out = header(m.rows(), m.cols(), 0, m.as_slice().len() * 8);
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_complex(m: &ComplexMatrix) -> Vec<u8> {
    let mut out = header(m.rows(), m.cols(), 1, m.as_slice().len() * 16);
    for z in m.as_slice() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn f64_at(bytes: &[u8], offset: usize) -> f64 {
    f64::from_le_bytes(bytes[offset..offset + 8].try_into().expect("8 bytes"))
}

/// Parses a matrix file image. `origin` only labels errors.
pub fn decode(bytes: &[u8], origin: &Path) -> Result<MatrixData> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(format_err(origin, "not a DMDM matrix file"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(format_err(origin, format!("unsupported version {version}")));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let cols = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    let dtype = bytes[24];
    let width: u64 = match dtype {
        0 => 8,
        1 => 16,
        other => return Err(format_err(origin, format!("unknown dtype {other}"))),
    };
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(width))
        .ok_or_else(|| format_err(origin, "dimensions overflow"))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() as u64 != expected {
        return Err(format_err(
            origin,
            format!("payload is {} bytes, expected {expected} for {rows}x{cols}", payload.len()),
        ));
    }
    let (rows, cols) = (rows as usize, cols as usize);
    if dtype == 0 {
        let data = (0..rows * cols).map(|i| f64_at(payload, 8 * i)).collect();
        let m = DenseMatrix::new(rows, cols, data).map_err(|e| format_err(origin, e.to_string()))?;
        Ok(MatrixData::Real(m))
    } else {
        let data = (0..rows * cols)
            .map(|i| Complex64::new(f64_at(payload, 16 * i), f64_at(payload, 16 * i + 8)))
            .collect();
        let m = ComplexMatrix::new(rows, cols, data).map_err(|e| format_err(origin, e.to_string()))?;
        Ok(MatrixData::Complex(m))
    }
}

pub fn write_real(path: &Path, m: &DenseMatrix) -> Result<()> {
    write_file(path, &encode_real(m))
}

pub fn write_complex(path: &Path, m: &ComplexMatrix) -> Result<()> {
    write_file(path, &encode_complex(m))
}

pub fn read_matrix(path: &Path) -> Result<MatrixData> {
    decode(&read_file(path)?, path)
}

pub fn read_real(path: &Path) -> Result<DenseMatrix> {
    match read_matrix(path)? {
        MatrixData::Real(m) => Ok(m),
        MatrixData::Complex(_) => Err(format_err(path, "expected a real matrix")),
    }
}

pub fn read_complex(path: &Path) -> Result<ComplexMatrix> {
    match read_matrix(path)? {
        MatrixData::Complex(m) => Ok(m),
        MatrixData::Real(m) => Ok(m.to_complex()),
    }
}

fn write_cvec(path: &Path, v: &[Complex64]) -> Result<()> {
    let m = ComplexMatrix::new(v.len(), 1, v.to_vec()).expect("column shape");
    write_complex(path, &m)
}

fn read_cvec(path: &Path) -> Result<Vec<Complex64>> {
    let m = read_complex(path)?;
    if m.cols() != 1 {
        return Err(format_err(path, format!("expected a column vector, got {}x{}", m.rows(), m.cols())));
    }
    Ok(m.column(0))
}

/// `key = value` lines, `#` comments ignored.
pub fn parse_key_values(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format_err(origin, format!("line {}: expected 'key = value'", no + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn take<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str, origin: &Path) -> Result<T> {
    let raw = map
        .get(key)
        .ok_or_else(|| format_err(origin, format!("missing key '{key}'")))?;
    raw.parse()
        .map_err(|_| format_err(origin, format!("bad value '{raw}' for key '{key}'")))
}

/// Sidecar metadata path for a snapshot file: `<path>.meta`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub const SNAPSHOT_ORDER: &str = "theta-major";

pub fn write_snapshots(path: &Path, snaps: &SnapshotSet) -> Result<()> {
    write_real(path, &snaps.x)?;
    let g = &snaps.grid;
    let t0 = snaps.times.first().copied().unwrap_or(0.0);
    let mut meta = String::new();
    let _ = writeln!(meta, "grid = {}x{}", g.n_phi, g.n_theta);
    let _ = writeln!(meta, "lat_min_deg = {}", g.lat_min_deg());
    let _ = writeln!(meta, "lat_max_deg = {}", g.lat_max_deg());
    let _ = writeln!(meta, "field = {}", snaps.field);
    let _ = writeln!(meta, "dt_sample_sec = {}", snaps.dt_sample());
    let _ = writeln!(meta, "t0_sec = {t0}");
    let _ = writeln!(meta, "order = {SNAPSHOT_ORDER}");
    write_file(&sidecar_path(path), meta.as_bytes())
}

pub fn read_snapshots(path: &Path) -> Result<SnapshotSet> {
    let x = read_real(path)?;
    let meta_path = sidecar_path(path);
    let text = String::from_utf8(read_file(&meta_path)?).map_err(|_| format_err(&meta_path, "not UTF-8"))?;
    let map = parse_key_values(&text, &meta_path)?;
    let grid_spec: String = take(&map, "grid", &meta_path)?;
    let (a, b) = grid_spec
        .split_once('x')
        .ok_or_else(|| format_err(&meta_path, format!("bad grid '{grid_spec}'")))?;
    let n_phi: usize = a.trim().parse().map_err(|_| format_err(&meta_path, format!("bad grid '{grid_spec}'")))?;
    let n_theta: usize = b.trim().parse().map_err(|_| format_err(&meta_path, format!("bad grid '{grid_spec}'")))?;
    let order: String = take(&map, "order", &meta_path)?;
    if order != SNAPSHOT_ORDER {
        return Err(format_err(&meta_path, format!("unsupported order '{order}'")));
    }
    if n_phi * n_theta != x.rows() {
        return Err(format_err(
            &meta_path,
            format!("grid {n_phi}x{n_theta} does not match {} rows", x.rows()),
        ));
    }
    let grid = SphericalGrid::new(
        n_phi,
        n_theta,
        take(&map, "lat_min_deg", &meta_path)?,
        take(&map, "lat_max_deg", &meta_path)?,
    )
    .map_err(|e| format_err(&meta_path, e.to_string()))?;
    let field: FieldKind = take(&map, "field", &meta_path)?;
    let dt: f64 = take(&map, "dt_sample_sec", &meta_path)?;
    let t0: f64 = take(&map, "t0_sec", &meta_path)?;
    let times = (0..x.cols()).map(|k| t0 + k as f64 * dt).collect();
    Ok(SnapshotSet { x, times, field, grid })
}

/// Writes `meta.txt`, `psi.cmat`, `lambda.cvec` and `b.cvec` into `dir`.
pub fn save_model(dir: &Path, model: &DmdModel, provenance: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| IoError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut meta = String::new();
    let _ = writeln!(meta, "n = {}", model.n());
    let _ = writeln!(meta, "q = {}", model.q());
    let _ = writeln!(meta, "dt_sec = {}", model.dt);
    let _ = writeln!(meta, "mode_kind = {}", model.mode_kind);
    let _ = writeln!(meta, "n_snapshots = {}", model.n_snapshots);
    let _ = writeln!(meta, "provenance = {}", provenance.replace(['\n', '#'], " "));
    write_file(&dir.join("meta.txt"), meta.as_bytes())?;
    write_complex(&dir.join("psi.cmat"), &model.modes)?;
    write_cvec(&dir.join("lambda.cvec"), &model.lambda)?;
    write_cvec(&dir.join("b.cvec"), &model.b)
}

pub fn load_model(dir: &Path) -> Result<DmdModel> {
    let meta_path = dir.join("meta.txt");
    let text = String::from_utf8(read_file(&meta_path)?).map_err(|_| format_err(&meta_path, "not UTF-8"))?;
    let map = parse_key_values(&text, &meta_path)?;
    let n: usize = take(&map, "n", &meta_path)?;
    let q: usize = take(&map, "q", &meta_path)?;
    let dt: f64 = take(&map, "dt_sec", &meta_path)?;
    let kind: ModeKind = take(&map, "mode_kind", &meta_path)?;
    let m: usize = take(&map, "n_snapshots", &meta_path)?;
    let modes = read_complex(&dir.join("psi.cmat"))?;
    let lambda = read_cvec(&dir.join("lambda.cvec"))?;
    let b = read_cvec(&dir.join("b.cvec"))?;
    if modes.shape() != (n, q) || lambda.len() != q || b.len() != q {
        return Err(format_err(dir, "stored arrays disagree with meta.txt"));
    }
    DmdModel::new(modes, lambda, b, dt, kind, m).map_err(|e| format_err(dir, e.to_string()))
}

/// `lon_deg,lat_deg,value` rows for one column of a grid field, in storage order.
pub fn export_csv(grid: &SphericalGrid, values: &[f64]) -> String {
    assert_eq!(values.len(), grid.len(), "field length matches grid");
    let mut out = String::with_capacity(values.len() * 32 + 24);
    out.push_str("lon_deg,lat_deg,value\n");
    for j in 0..grid.n_theta {
        let lat = grid.theta[j].to_degrees();
        for i in 0..grid.n_phi {
            let _ = writeln!(out, "{},{},{:e}", grid.phi[i].to_degrees(), lat, values[grid.index(i, j)]);
        }
    }
    out
}
