//! Dataset files: a JSON header next to a raw or CSV payload.
//!
//! `name.json` describes the data and points at a sidecar `name.bin`
//! (little-endian `f64`) or `name.csv` (one record per line, shortest
//! round-trip decimal form). Payload order:
//!
//! * images: row-major, row 0 at the top;
//! * sinograms: offset-fastest, one projection after another;
//! * trace bundles: every cell trace in sinogram order, then the reference.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use thztomo::beam::MaterialParams;
use thztomo::radon::{DensityImage, ImageGrid, ScanGeometry, Sinogram};
use thztomo::signal::{DataMode, PulseTrace, RawDataSet};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Image,
    Sinogram,
    Traces,
}

/// What a sinogram payload holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Density,
    /// `P/P_ref` or `I/I_ref`.
    Ratio,
    /// Line integrals `Rf`.
    LineIntegral,
    Traces,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    P,
    I,
    #[serde(rename = "raw-traces")]
    RawTraces,
}

impl From<DataMode> for Mode {
    fn from(m: DataMode) -> Self {
        match m {
            DataMode::P => Mode::P,
            DataMode::I => Mode::I,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadFormat {
    F64Le,
    Csv,
}

impl PayloadFormat {
    fn extension(self) -> &'static str {
        match self {
            PayloadFormat::F64Le => "bin",
            PayloadFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Payload {
    pub format: PayloadFormat,
    /// Sidecar file name, relative to the header.
    pub file: String,
    pub len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub extent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub angles: Vec<f64>,
    pub offsets: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis {
    pub t0: f64,
    pub dt: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    /// `full-beam`, `single-ray` or `time-domain`.
    pub model: String,
    pub fwhm: Option<f64>,
    pub oversampling: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    /// Every flag as given on the command line.
    pub args: Vec<String>,
    pub inputs: Vec<InputDigest>,
    /// Processing steps applied so far, oldest first.
    pub steps: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema_version: String,
    pub kind: Kind,
    pub quantity: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_axis: Option<TimeAxis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<MaterialParams<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam: Option<BeamSpec>,
    /// Noise level `δ` in the weighted sinogram norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub provenance: Provenance,
    pub payload: Payload,
}

impl Header {
    fn base(kind: Kind, quantity: Quantity, provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            kind,
            quantity,
            mode: None,
            grid: None,
            geometry: None,
            time_axis: None,
            material: None,
            beam: None,
            delta: None,
            provenance,
            payload: Payload {
                format: PayloadFormat::F64Le,
                file: String::new(),
                len: 0,
            },
        }
    }

    pub fn for_image(grid: &ImageGrid<f64>, provenance: Provenance) -> Self {
        let mut h = Self::base(Kind::Image, Quantity::Density, provenance);
        h.grid = Some(GridSpec {
            n: grid.n_pixels(),
            extent: grid.extent(),
        });
        h
    }

    pub fn for_sinogram(geometry: &ScanGeometry<f64>, quantity: Quantity, provenance: Provenance) -> Self {
        let mut h = Self::base(Kind::Sinogram, quantity, provenance);
        h.geometry = Some(GeometrySpec {
            angles: geometry.angles().to_vec(),
            offsets: geometry.offsets().to_vec(),
        });
        h
    }

    pub fn for_traces(data: &RawDataSet<f64>, provenance: Provenance) -> Self {
        let mut h = Self::base(Kind::Traces, Quantity::Traces, provenance);
        let g = data.geometry();
        h.geometry = Some(GeometrySpec {
            angles: g.angles().to_vec(),
            offsets: g.offsets().to_vec(),
        });
        let r = data.reference();
        h.time_axis = Some(TimeAxis {
            t0: r.t0(),
            dt: r.dt(),
            n_samples: r.len(),
        });
        h.mode = Some(Mode::RawTraces);
        h
    }

    /// Number of payload values the header describes.
    pub fn expected_len(&self) -> Result<usize, CliError> {
        match self.kind {
            Kind::Image => {
                let g = self.grid.ok_or_else(|| CliError::format("image header lacks a grid"))?;
                Ok(g.n * g.n)
            }
            Kind::Sinogram => {
                let g = self.geometry_spec()?;
                Ok(g.angles.len() * g.offsets.len())
            }
            Kind::Traces => {
                let g = self.geometry_spec()?;
                let t = self
                    .time_axis
                    .ok_or_else(|| CliError::format("trace header lacks a time axis"))?;
                Ok((g.angles.len() * g.offsets.len() + 1) * t.n_samples)
            }
        }
    }

    fn geometry_spec(&self) -> Result<&GeometrySpec, CliError> {
        self.geometry
            .as_ref()
            .ok_or_else(|| CliError::format("header lacks a scan geometry"))
    }

    pub fn image_grid(&self) -> Result<ImageGrid<f64>, CliError> {
        let g = self.grid.ok_or_else(|| CliError::format("header lacks a grid"))?;
        Ok(ImageGrid::new(g.n, g.extent)?)
    }

    pub fn scan_geometry(&self) -> Result<ScanGeometry<f64>, CliError> {
        let g = self.geometry_spec()?;
        Ok(ScanGeometry::new(g.angles.clone(), g.offsets.clone())?)
    }

    /// Values per CSV line.
    fn record_len(&self) -> usize {
        match self.kind {
            Kind::Image => self.grid.map_or(1, |g| g.n),
            Kind::Sinogram => self.geometry.as_ref().map_or(1, |g| g.offsets.len()),
            Kind::Traces => self.time_axis.map_or(1, |t| t.n_samples),
        }
        .max(1)
    }
}

/// A header with its payload in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: Header,
    pub values: Vec<f64>,
}

fn sidecar_path(header_path: &Path, format: PayloadFormat) -> PathBuf {
    header_path.with_extension(format.extension())
}

impl Dataset {
    pub fn image(image: &DensityImage<f64>, provenance: Provenance) -> Self {
        Self {
            header: Header::for_image(image.grid(), provenance),
            values: image.values().to_vec(),
        }
    }

    pub fn sinogram(sino: &Sinogram<f64>, quantity: Quantity, provenance: Provenance) -> Self {
        Self {
            header: Header::for_sinogram(sino.geometry(), quantity, provenance),
            values: sino.values().to_vec(),
        }
    }

    pub fn traces(data: &RawDataSet<f64>, provenance: Provenance) -> Self {
        let mut values = Vec::new();
        for t in data.traces() {
            values.extend_from_slice(t.samples());
        }
        values.extend_from_slice(data.reference().samples());
        Self {
            header: Header::for_traces(data, provenance),
            values,
        }
    }

    pub fn to_image(&self) -> Result<DensityImage<f64>, CliError> {
        self.expect_kind(Kind::Image)?;
        Ok(DensityImage::new(self.header.image_grid()?, self.values.clone())?)
    }

    pub fn to_sinogram(&self) -> Result<Sinogram<f64>, CliError> {
        self.expect_kind(Kind::Sinogram)?;
        Ok(Sinogram::new(self.header.scan_geometry()?, self.values.clone())?)
    }

    pub fn to_traces(&self) -> Result<RawDataSet<f64>, CliError> {
        self.expect_kind(Kind::Traces)?;
        let axis = self
            .header
            .time_axis
            .ok_or_else(|| CliError::format("trace header lacks a time axis"))?;
        let geometry = self.header.scan_geometry()?;
        let mut traces = self
            .values
            .chunks(axis.n_samples)
            .map(|c| PulseTrace::new(axis.t0, axis.dt, c.to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        let reference = traces
            .pop()
            .ok_or_else(|| CliError::format("empty trace bundle"))?;
        Ok(RawDataSet::new(geometry, traces, reference)?)
    }

    fn expect_kind(&self, kind: Kind) -> Result<(), CliError> {
        if self.header.kind == kind {
            Ok(())
        } else {
            Err(CliError::Mismatch(format!(
                "expected a {kind:?} dataset, found {:?}",
                self.header.kind
            )))
        }
    }

    /// Writes `path` and its sidecar payload.
    pub fn write(&self, path: &Path, format: PayloadFormat) -> Result<(), CliError> {
        let sidecar = sidecar_path(path, format);
        if sidecar == path {
            return Err(CliError::Usage(format!(
                "header path {} collides with its payload; use a .json name",
                path.display()
            )));
        }
        let mut header = self.header.clone();
        header.payload = Payload {
            format,
            file: sidecar
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            len: self.values.len(),
        };
        let expected = header.expected_len()?;
        if expected != self.values.len() {
            return Err(CliError::format(format!(
                "header describes {expected} values but payload has {}",
                self.values.len()
            )));
        }
        let bytes = match format {
            PayloadFormat::F64Le => encode_f64le(&self.values),
            PayloadFormat::Csv => encode_csv(&self.values, header.record_len()).into_bytes(),
        };
        write_file(&sidecar, &bytes)?;
        let mut json = serde_json::to_string_pretty(&header)
            .map_err(|e| CliError::format(format!("cannot encode header: {e}")))?;
        json.push('\n');
        write_file(path, json.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let header: Header = serde_json::from_str(&text)
            .map_err(|e| CliError::format(format!("{}: bad header: {e}", path.display())))?;
        if header.schema_version != SCHEMA_VERSION {
            return Err(CliError::format(format!(
                "unsupported schema version {:?}",
                header.schema_version
            )));
        }
        let sidecar = path
            .parent()
            .unwrap_or_else(|| Path::new(""))
            .join(&header.payload.file);
        let bytes = fs::read(&sidecar).map_err(|e| CliError::io(&sidecar, e))?;
        let values = match header.payload.format {
            PayloadFormat::F64Le => decode_f64le(&bytes)?,
            PayloadFormat::Csv => decode_csv(&bytes)?,
        };
        let expected = header.expected_len()?;
        if values.len() != expected || header.payload.len != expected {
            return Err(CliError::format(format!(
                "{}: header describes {expected} values, payload holds {}",
                path.display(),
                values.len()
            )));
        }
        Ok(Self { header, values })
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn encode_f64le(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode_f64le(bytes: &[u8]) -> Result<Vec<f64>, CliError> {
    if !bytes.len().is_multiple_of(8) {
        return Err(CliError::format(format!(
            "binary payload of {} bytes is not a whole number of f64 values",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

/// Rust's `Display` for `f64` is the shortest string that parses back to
/// the same value.
pub fn encode_csv(values: &[f64], record_len: usize) -> String {
    let mut out = String::with_capacity(values.len() * 20);
    for record in values.chunks(record_len) {
        let line: Vec<String> = record.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn decode_csv(bytes: &[u8]) -> Result<Vec<f64>, CliError> {
    let text = std::str::from_utf8(bytes).map_err(|_| CliError::format("CSV payload is not UTF-8"))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .flat_map(|l| l.split(','))
        .map(|field| {
            field
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::format(format!("bad CSV value {field:?}")))
        })
        .collect()
}

/// Hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Digest of a header together with its payload.
pub fn digest_dataset(path: &Path, ds: &Dataset) -> Result<InputDigest, CliError> {
    let mut hasher = Sha256::new();
    hasher.update(fs::read(path).map_err(|e| CliError::io(path, e))?);
    hasher.update(encode_f64le(&ds.values));
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hasher.finalize().iter().map(|b| format!("{b:02x}")).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_image() -> DensityImage<f64> {
        let grid = ImageGrid::new(5, 1.0).unwrap();
        DensityImage::from_fn(grid, |x, y| (3.0 * x).sin() + y / 7.0 + 1e-300)
    }

    #[test]
    fn binary_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.json");
        let ds = Dataset::image(&sample_image(), Provenance::default());
        ds.write(&path, PayloadFormat::F64Le).unwrap();
        let back = Dataset::read(&path).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.values), bits(&ds.values));
        assert_eq!(back.header.payload.file, "img.bin");
        assert_eq!(back.to_image().unwrap(), sample_image());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let geom = ScanGeometry::uniform(3, 4, 1.0).unwrap();
        let sino = Sinogram::from_fn(geom, |s: f64, t: f64| (s + 0.1).exp() * t.cos() / 3.0);
        let ds = Dataset::sinogram(&sino, Quantity::LineIntegral, Provenance::default());
        ds.write(&path, PayloadFormat::Csv).unwrap();
        let text = fs::read_to_string(dir.path().join("s.csv")).unwrap();
        assert_eq!(text.lines().count(), 3);
        let back = Dataset::read(&path).unwrap();
        for (a, b) in back.values.iter().zip(&ds.values) {
            assert!((a - b).abs() <= 1e-15 * b.abs());
        }
        assert_eq!(back.to_sinogram().unwrap(), sino);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.json");
        let ds = Dataset::image(&sample_image(), Provenance::default());
        ds.write(&path, PayloadFormat::F64Le).unwrap();
        fs::write(dir.path().join("img.bin"), encode_f64le(&[1.0, 2.0])).unwrap();
        assert!(Dataset::read(&path).is_err());

        let mut bad = ds.clone();
        bad.values.pop();
        assert!(bad.write(&path, PayloadFormat::F64Le).is_err());
    }

    #[test]
    fn schema_version_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.json");
        Dataset::image(&sample_image(), Provenance::default())
            .write(&path, PayloadFormat::F64Le)
            .unwrap();
        let text = fs::read_to_string(&path).unwrap().replace("\"1\"", "\"2\"");
        fs::write(&path, text).unwrap();
        assert!(Dataset::read(&path).is_err());
    }

    #[test]
    fn traces_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        let geom = ScanGeometry::uniform(2, 3, 1.0).unwrap();
        let mk = |a: f64| PulseTrace::from_fn(0.0, 0.5, 4, |t| a * t).unwrap();
        let data = RawDataSet::new(geom, (0..6).map(|k| mk(k as f64)).collect(), mk(-1.0)).unwrap();
        Dataset::traces(&data, Provenance::default())
            .write(&path, PayloadFormat::F64Le)
            .unwrap();
        let back = Dataset::read(&path).unwrap().to_traces().unwrap();
        assert_eq!(back.traces(), data.traces());
        assert_eq!(back.reference(), data.reference());
    }

    #[test]
    fn kind_mismatch() {
        let ds = Dataset::image(&sample_image(), Provenance::default());
        assert!(matches!(ds.to_sinogram(), Err(CliError::Mismatch(_))));
    }

    #[test]
    fn digest_is_hex() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
