//! Run configuration and deterministic file output: 16-bit PGM images with
//! JSON sidecars, CSV tables, and JSON documents.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{BeamFrame, ComplexField2D, GridSpec};
use crate::scalar::Scalar;

/// Smallest accepted grid resolution.
pub const MIN_RESOLUTION: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    pub w0: f64,
    pub k0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub l: i32,
    pub p: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereConfig {
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Samples per axis.
    pub resolution: usize,
    /// Half width of the square window; `null` picks `4 w0 sqrt(N+1)`.
    pub half_extent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub stem: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub wigner_rel: f64,
    pub symplectic: f64,
    pub transformation: f64,
    pub overlap: f64,
    pub generators: f64,
    pub phase_space: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            wigner_rel: 1e-6,
            symplectic: 1e-12,
            transformation: 1e-10,
            overlap: 1e-4,
            generators: 1e-10,
            phase_space: 1e-4,
        }
    }
}

impl Tolerances {
    fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("wigner_rel", self.wigner_rel),
            ("symplectic", self.symplectic),
            ("transformation", self.transformation),
            ("overlap", self.overlap),
            ("generators", self.generators),
            ("phase_space", self.phase_space),
        ]
    }
}

/// Everything a CLI run needs. Serialized with a fixed key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub frame: FrameConfig,
    pub mode: ModeConfig,
    pub sphere: SphereConfig,
    pub z: f64,
    pub grid: GridConfig,
    pub output: OutputConfig,
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            frame: FrameConfig { w0: 1.0, k0: 100.0 },
            mode: ModeConfig { l: 1, p: 0 },
            sphere: SphereConfig { theta: 0.0, phi: 0.0 },
            z: 0.0,
            grid: GridConfig {
                resolution: 256,
                half_extent: None,
            },
            output: OutputConfig {
                dir: PathBuf::from("."),
                stem: "mode".into(),
            },
            tolerances: Tolerances::default(),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("frame.w0", self.frame.w0)?;
        positive("frame.k0", self.frame.k0)?;
        for (name, v) in self.tolerances.entries() {
            positive(&format!("tolerances.{name}"), v)?;
        }
        if self.grid.resolution < MIN_RESOLUTION {
            return Err(Error::Config(format!(
                "grid.resolution must be at least {MIN_RESOLUTION}, got {}",
                self.grid.resolution
            )));
        }
        if let Some(h) = self.grid.half_extent {
            positive("grid.half_extent", h)?;
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.sphere.theta) || !self.sphere.phi.is_finite() {
            return Err(Error::Config(format!(
                "sphere point needs theta in [0, pi] and finite phi, got ({}, {})",
                self.sphere.theta, self.sphere.phi
            )));
        }
        if !self.z.is_finite() {
            return Err(Error::Config("z must be finite".into()));
        }
        if self.output.stem.is_empty() {
            return Err(Error::Config("output.stem must not be empty".into()));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical pretty JSON with a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("RunConfig always serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_bytes(path, self.to_json_string().as_bytes())
    }

    pub fn beam_frame(&self) -> Result<BeamFrame<f64>> {
        BeamFrame::new(self.frame.w0, self.frame.k0)
    }

    pub fn grid_spec(&self, order: u32) -> Result<GridSpec<f64>> {
        let frame = self.beam_frame()?;
        let half = self
            .grid
            .half_extent
            .unwrap_or_else(|| GridSpec::default_for(&frame, order).half_extent);
        GridSpec::new(self.grid.resolution, self.grid.resolution, half)
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Pretty JSON of any serializable value, newline terminated.
pub fn write_json<S: Serialize>(value: &S, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Intensity,
    Phase,
}

/// Sidecar stored next to each image as `<image>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgmSidecar {
    pub channel: String,
    pub width: usize,
    pub height: usize,
    pub half_extent_x: f64,
    pub half_extent_y: f64,
    /// Physical value mapped to grey level 0.
    pub value_at_zero: f64,
    /// Physical value mapped to grey level 65535.
    pub value_at_max: f64,
    /// Extra description, e.g. the plane of a phase-space slice.
    pub note: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

const MAX_GREY: f64 = 65535.0;

fn grey(v: f64) -> u16 {
    (v.clamp(0.0, 1.0) * MAX_GREY).round() as u16
}

/// Writes a binary 16-bit PGM. `rows[0]` is the top image row.
fn write_pgm_raw(path: &Path, width: usize, height: usize, levels: &[u16]) -> Result<()> {
    let mut bytes = format!("P5\n{width} {height}\n65535\n").into_bytes();
    bytes.reserve(levels.len() * 2);
    for v in levels {
        bytes.extend_from_slice(&v.to_be_bytes());
    }
    write_bytes(path, &bytes)
}

/// Reorders row-major samples with `y` increasing by row so that `+y` is the top row.
fn flip_rows<V: Copy>(values: &[V], width: usize, height: usize) -> Vec<V> {
    (0..height)
        .rev()
        .flat_map(|iy| values[iy * width..(iy + 1) * width].iter().copied())
        .collect()
}

/// Renders one channel of a field as a 16-bit PGM plus JSON sidecar.
///
/// Intensity is scaled so its maximum maps to 65535; phase maps `[-pi, pi]`
/// linearly onto `[0, 65535]`.
pub fn write_field_pgm<T: Scalar>(field: &ComplexField2D<T>, channel: Channel, path: &Path) -> Result<PgmSidecar> {
    let (nx, ny) = (field.grid.nx, field.grid.ny);
    if field.samples.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Domain("field contains non-finite samples".into()));
    }
    let (levels, lo, hi) = match channel {
        Channel::Intensity => {
            let values: Vec<f64> = field.intensity().iter().map(|v| v.to_f64_lossy()).collect();
            let max = values.iter().copied().fold(0.0, f64::max);
            let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
            (values.iter().map(|v| grey(v * scale)).collect::<Vec<_>>(), 0.0, max)
        }
        Channel::Phase => {
            let pi = std::f64::consts::PI;
            let values: Vec<f64> = field.phase().iter().map(|v| v.to_f64_lossy()).collect();
            (values.iter().map(|v| grey((v + pi) / (2.0 * pi))).collect(), -pi, pi)
        }
    };
    let levels = flip_rows(&levels, nx, ny);
    write_pgm_raw(path, nx, ny, &levels)?;
    let sidecar = PgmSidecar {
        channel: match channel {
            Channel::Intensity => "intensity".into(),
            Channel::Phase => "phase".into(),
        },
        width: nx,
        height: ny,
        half_extent_x: field.grid.half_extent.to_f64_lossy(),
        half_extent_y: field.grid.half_extent.to_f64_lossy(),
        value_at_zero: lo,
        value_at_max: hi,
        note: String::new(),
    };
    write_json(&sidecar, &sidecar_path(path))?;
    Ok(sidecar)
}

/// Renders a real 2D array (row-major, `y` increasing by row) with a
/// symmetric scale `[-m, m] -> [0, 65535]`, `m = max |value|`.
pub fn write_scalar_pgm(
    values: &[f64],
    width: usize,
    height: usize,
    half_extents: [f64; 2],
    note: &str,
    path: &Path,
) -> Result<PgmSidecar> {
    if values.len() != width * height {
        return Err(Error::Config(format!(
            "image needs {} samples, got {}",
            width * height,
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("image contains non-finite samples".into()));
    }
    let m = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = if m > 0.0 { 0.5 / m } else { 0.0 };
    let levels: Vec<u16> = values.iter().map(|v| grey(0.5 + v * scale)).collect();
    write_pgm_raw(path, width, height, &flip_rows(&levels, width, height))?;
    let sidecar = PgmSidecar {
        channel: "signed".into(),
        width,
        height,
        half_extent_x: half_extents[0],
        half_extent_y: half_extents[1],
        value_at_zero: -m,
        value_at_max: m,
        note: note.into(),
    };
    write_json(&sidecar, &sidecar_path(path))?;
    Ok(sidecar)
}

/// Column-named table of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Config(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// CSV text with a header row and 17 significant digits per value.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:.16e}")))
                .map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("CSV output is ASCII"))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Config(format!("CSV encoding failed: {e}"))
}

pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    write_bytes(path, table.to_csv_string()?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{sample_lg, ModeIndex};

    fn read_pgm(path: &Path) -> (usize, usize, Vec<u16>) {
        let bytes = std::fs::read(path).unwrap();
        let header_end = bytes
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == b'\n')
            .nth(2)
            .map(|(i, _)| i + 1)
            .unwrap();
        let header = std::str::from_utf8(&bytes[..header_end]).unwrap();
        let mut parts = header.split_whitespace();
        assert_eq!(parts.next(), Some("P5"));
        let w: usize = parts.next().unwrap().parse().unwrap();
        let h: usize = parts.next().unwrap().parse().unwrap();
        assert_eq!(parts.next(), Some("65535"));
        let data = bytes[header_end..]
            .chunks(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        (w, h, data)
    }

    fn frame() -> BeamFrame<f64> {
        BeamFrame::new(1.0, 50.0).unwrap()
    }

    #[test]
    fn config_round_trip_is_byte_identical() {
        let cfg = RunConfig::default();
        let text = cfg.to_json_string();
        let back = RunConfig::from_json_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_json_string(), text);
    }

    #[test]
    fn config_validation() {
        let mut cfg = RunConfig::default();
        cfg.grid.resolution = 16;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.tolerances.overlap = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.sphere.theta = 4.0;
        assert!(cfg.validate().is_err());
        assert!(RunConfig::from_json_str(r#"{"frame": 1}"#).is_err());
    }

    #[test]
    fn gaussian_image_peaks_at_centre() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.pgm");
        let f = frame();
        let field = sample_lg(ModeIndex::new(0, 0), &f, GridSpec::new(65, 65, 3.0).unwrap(), 0.0);
        let side = write_field_pgm(&field, Channel::Intensity, &path).unwrap();
        let (w, h, data) = read_pgm(&path);
        assert_eq!((w, h), (65, 65));
        assert_eq!(data[32 * 65 + 32], 65535);
        // radially monotone along the central row
        for ix in 33..65 {
            assert!(data[32 * 65 + ix] <= data[32 * 65 + ix - 1]);
        }
        assert!((side.value_at_max - 2.0 / std::f64::consts::PI).abs() < 1e-12);
        let meta: PgmSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(meta, side);
    }

    #[test]
    fn vortex_has_dark_centre_and_one_phase_turn() {
        let dir = tempfile::tempdir().unwrap();
        let f = frame();
        let grid = GridSpec::new(65, 65, 3.0).unwrap();
        let donut = sample_lg(ModeIndex::new(2, 0), &f, grid, 0.0);
        let p = dir.path().join("i.pgm");
        write_field_pgm(&donut, Channel::Intensity, &p).unwrap();
        assert_eq!(read_pgm(&p).2[32 * 65 + 32], 0);

        let vortex = sample_lg(ModeIndex::new(1, 0), &f, grid, 0.0);
        let p = dir.path().join("phase.pgm");
        write_field_pgm(&vortex, Channel::Phase, &p).unwrap();
        let (_, _, data) = read_pgm(&p);
        // walk a ring of radius 10 pixels and count wraps
        let mut wraps = 0i32;
        let samples = 64;
        let level = |k: i32| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            let ix = (32.0 + 10.0 * a.cos()).round() as usize;
            let row = (32.0 - 10.0 * a.sin()).round() as usize;
            data[row * 65 + ix] as f64 / MAX_GREY * 2.0 * std::f64::consts::PI
        };
        for k in 0..samples {
            let d = level(k + 1) - level(k);
            if d < -std::f64::consts::PI {
                wraps += 1;
            } else if d > std::f64::consts::PI {
                wraps -= 1;
            }
        }
        assert_eq!(wraps, 1);
    }

    #[test]
    fn images_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let f = frame();
        let field = sample_lg(ModeIndex::new(1, 1), &f, GridSpec::new(40, 40, 4.0).unwrap(), 0.3);
        let a = dir.path().join("a.pgm");
        let b = dir.path().join("b.pgm");
        write_field_pgm(&field, Channel::Phase, &a).unwrap();
        write_field_pgm(&field, Channel::Phase, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn scalar_image_is_symmetric() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.pgm");
        let values = vec![-2.0, 0.0, 1.0, 2.0];
        let side = write_scalar_pgm(&values, 2, 2, [1.0, 1.0], "x-px plane", &p).unwrap();
        let (_, _, data) = read_pgm(&p);
        // top row is the second stored row
        assert_eq!(data, vec![49151, 65535, 0, 32768]);
        assert_eq!(side.value_at_zero, -2.0);
        assert!(write_scalar_pgm(&values, 3, 2, [1.0, 1.0], "", &p).is_err());
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let empty = Table::new(["x", "W"]);
        write_csv(&empty, &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "x,W\r\n");

        let mut t = Table::new(["x", "W"]);
        for i in 0..4096 {
            t.push(vec![i as f64 * 0.1, 1.0 / 3.0]).unwrap();
        }
        write_csv(&t, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 4097);
        let mut reader = csv::Reader::from_path(&p).unwrap();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.unwrap();
            let w: f64 = rec[1].parse().unwrap();
            assert_eq!(w, 1.0 / 3.0);
            let x: f64 = rec[0].parse().unwrap();
            assert_eq!(x, i as f64 * 0.1);
        }
        assert!(t.push(vec![1.0]).is_err());
    }

    #[test]
    fn io_errors_carry_the_path() {
        let t = Table::new(["a"]);
        let bad = Path::new("/nonexistent-dir/x.csv");
        match write_csv(&t, bad) {
            Err(Error::Io { path, .. }) => assert_eq!(path, bad),
            other => panic!("unexpected {other:?}"),
        }
    }
}
