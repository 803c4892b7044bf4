//! File helpers: atomic writes, JSON envelopes and OBJ meshes.

use std::io::Write;
use std::path::{Path, PathBuf};

use lorentz_core::grid::Domain;
use lorentz_core::pe4::Vec4;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: &str = "1";
pub const OUT_DIR_ENV: &str = "LORENTZ4_OUT_DIR";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Resolves an output path: explicit paths are used as given, otherwise
/// `default_name` goes into `$LORENTZ4_OUT_DIR` (or the working directory).
pub fn output_path(explicit: Option<&PathBuf>, default_name: &str) -> PathBuf {
    match explicit {
        Some(p) => p.clone(),
        None => match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(default_name),
            _ => PathBuf::from(default_name),
        },
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err(&dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

/// Artifact wrapper: the payload's own fields plus the schema version and
/// the resolved configuration, so artifacts load directly as core types.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: &'static str,
    pub config: &'a Value,
    #[serde(flatten)]
    pub payload: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, config: &Value, payload: &T) -> Result<()> {
    let env = Envelope { schema_version: SCHEMA_VERSION, config, payload };
    let mut text = serde_json::to_string_pretty(&env).expect("artifacts serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_value(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

/// Parses `value` as `T`, or its `key` member when present (for artifacts
/// that nest the payload).
pub fn parse_payload<T: DeserializeOwned>(path: &Path, value: &Value, key: Option<&str>) -> Result<T> {
    let inner = key.and_then(|k| value.get(k)).unwrap_or(value);
    T::deserialize(inner).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

/// A sampled position grid `z[i][j]`; reconstruction artifacts qualify.
#[derive(Debug, Clone, Deserialize)]
pub struct ZGrid {
    pub domain: Domain,
    pub nu: usize,
    pub nv: usize,
    pub z: Vec<Vec<Vec4>>,
}

impl ZGrid {
    pub fn flat(&self) -> Result<Vec<Vec4>> {
        if self.z.len() != self.nu || self.z.iter().any(|r| r.len() != self.nv) {
            return Err(CliError::Usage(format!("z grid does not have shape {} x {}", self.nu, self.nv)));
        }
        Ok(self.z.iter().flatten().copied().collect())
    }
}

/// Projects onto three ambient coordinates (0-based) and triangulates every
/// grid cell into two triangles.
pub fn obj_mesh(grid: &ZGrid, projection: [usize; 3]) -> String {
    use std::fmt::Write as _;
    let coord = |p: Vec4, k: usize| [p.x1, p.x2, p.x3, p.x4][k];
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# lorentz4 mesh: {} x {} nodes, coordinates (x{}, x{}, x{})",
        grid.nu,
        grid.nv,
        projection[0] + 1,
        projection[1] + 1,
        projection[2] + 1
    );
    for p in grid.z.iter().flatten() {
        let _ = writeln!(s, "v {} {} {}", coord(*p, projection[0]), coord(*p, projection[1]), coord(*p, projection[2]));
    }
    let idx = |i: usize, j: usize| i * grid.nv + j + 1;
    for i in 0..grid.nu.saturating_sub(1) {
        for j in 0..grid.nv.saturating_sub(1) {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            let _ = writeln!(s, "f {a} {b} {c}");
            let _ = writeln!(s, "f {a} {c} {d}");
        }
    }
    s
}
