//! State files, CSV tables and run manifests.
//!
//! States are JSON documents with every complex number written as a
//! `[re, im]` pair. Floats go through the shortest representation that
//! parses back to the same `f64`, so save/load round-trips are exact.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{outer, ComplexMatrix, DensityMatrix, StateVector, C64};
use crate::monogamy::{Counterexample, GammaPoint, ScanRecord};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, message: impl std::fmt::Display) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateFile {
    Pure {
        subsystem_dims: Vec<usize>,
        data: Vec<C64>,
    },
    Mixed {
        subsystem_dims: Vec<usize>,
        data: Vec<Vec<C64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl State {
    pub fn density_matrix(&self) -> DensityMatrix {
        match self {
            State::Pure(psi) => outer(psi),
            State::Mixed(rho) => rho.clone(),
        }
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        match self {
            State::Pure(psi) => psi.subsystem_dims(),
            State::Mixed(rho) => rho.subsystem_dims(),
        }
    }
}

impl StateFile {
    pub fn from_pure(psi: &StateVector) -> Self {
        StateFile::Pure {
            subsystem_dims: psi.subsystem_dims().to_vec(),
            data: psi.amplitudes().to_vec(),
        }
    }

    pub fn from_mixed(rho: &DensityMatrix) -> Self {
        StateFile::Mixed {
            subsystem_dims: rho.subsystem_dims().to_vec(),
            data: rho.matrix().to_rows(),
        }
    }

    /// Validates the contents; amplitudes are taken as given, not renormalised.
    pub fn to_state(&self) -> Result<State> {
        match self {
            StateFile::Pure { subsystem_dims, data } => {
                StateVector::new(data.clone(), subsystem_dims.clone()).map(State::Pure)
            }
            StateFile::Mixed { subsystem_dims, data } => {
                let m = ComplexMatrix::from_rows(data)?;
                DensityMatrix::new(m, subsystem_dims.clone()).map(State::Mixed)
            }
        }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state files always serialise")
    }
}

pub fn read_state_file(path: &Path) -> Result<StateFile> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    StateFile::from_json(&text).map_err(|e| parse_err(path, e))
}

/// Reads and validates a state. Validation failures carry the path.
pub fn load_state(path: &Path) -> Result<State> {
    read_state_file(path)?
        .to_state()
        .map_err(|e| parse_err(path, e))
}

pub fn save_state(path: &Path, state: &StateFile) -> Result<()> {
    let mut text = state.to_json();
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

/// Dicke coefficients: a JSON array of `[re, im]` pairs, `m` ascending.
pub fn load_coefficients(path: &Path) -> Result<Vec<C64>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| parse_err(path, e))?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// `printf("%.12g")`: 12 significant digits, trailing zeros dropped,
/// exponent form outside `1e-4 <= |x| < 1e12`.
pub fn format_sig12(x: f64) -> String {
    const P: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // Rounding to P digits first fixes the decimal exponent.
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => parse_err(path, format!("{other:?}")),
    }
}

pub const SCAN_COLUMNS: [&str; 6] = ["index", "seed", "b_ab", "b_bc", "b_ac", "violations"];
pub const GAMMA_COLUMNS: [&str; 4] = ["gamma", "b_ab", "b_bc", "b_ac"];

/// Scan table writer; each row is flushed as soon as it is written so an
/// interrupted scan leaves a readable prefix.
pub struct ScanCsv<W: Write> {
    path: PathBuf,
    writer: csv::Writer<W>,
    rows: usize,
}

impl ScanCsv<File> {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(io_err(path))?;
        Self::from_writer(file, path)
    }
}

impl<W: Write> ScanCsv<W> {
    /// `label` names the destination in error messages.
    pub fn from_writer(w: W, label: &Path) -> Result<Self> {
        let mut writer = csv_writer(w);
        writer.write_record(SCAN_COLUMNS).map_err(|e| csv_err(label, e))?;
        Ok(Self {
            path: label.to_path_buf(),
            writer,
            rows: 0,
        })
    }

    pub fn write(&mut self, r: &ScanRecord) -> Result<()> {
        let row = [
            r.index.to_string(),
            r.seed.to_string(),
            format_sig12(r.b_ab),
            format_sig12(r.b_bc),
            format_sig12(r.b_ac),
            r.violations.to_string(),
        ];
        self.writer.write_record(&row).map_err(|e| csv_err(&self.path, e))?;
        self.writer.flush().map_err(io_err(&self.path))?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}

pub fn write_scan_csv(path: &Path, records: &[ScanRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no scan records to write".into()));
    }
    let mut out = ScanCsv::create(path)?;
    for r in records {
        out.write(r)?;
    }
    Ok(())
}

pub fn write_gamma_csv(path: &Path, points: &[GammaPoint]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_gamma_csv_to(file, path, points)
}

pub fn write_gamma_csv_to<W: Write>(w: W, label: &Path, points: &[GammaPoint]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no sweep points to write".into()));
    }
    let mut w = csv_writer(w);
    w.write_record(GAMMA_COLUMNS).map_err(|e| csv_err(label, e))?;
    for p in points {
        let row = [p.gamma, p.b_ab, p.b_bc, p.b_ac].map(format_sig12);
        w.write_record(&row).map_err(|e| csv_err(label, e))?;
    }
    w.flush().map_err(io_err(label))
}

pub fn write_counterexamples(path: &Path, found: &[Counterexample]) -> Result<()> {
    write_json(path, &found)
}

/// Everything needed to regenerate one data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub master_seed: u64,
    pub tool_version: String,
    pub wall_time_seconds: f64,
    pub record_count: usize,
    pub data_file: String,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, master_seed: u64, data_file: &Path) -> Self {
        Self {
            command: command.into(),
            parameters: BTreeMap::new(),
            master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_seconds: 0.0,
            record_count: 0,
            data_file: data_file
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn write_for(&self, data_file: &Path) -> Result<PathBuf> {
        let path = manifest_path(data_file);
        write_json(&path, self)?;
        Ok(path)
    }
}

/// `<out>.manifest.json`
pub fn manifest_path(data_file: &Path) -> PathBuf {
    let mut s = data_file.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// `<out>.counterexamples.json`
pub fn counterexample_path(data_file: &Path) -> PathBuf {
    let mut s = data_file.as_os_str().to_owned();
    s.push(".counterexamples.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::phi_plus;

    #[test]
    fn sig12_matches_printf() {
        let cases = [
            (2.0, "2"),
            (2.914854215512676, "2.91485421551"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333"),
            (-1.5e-7, "-1.5e-07"),
            (1e-4, "0.0001"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (9.9999999999999e-5, "0.0001"),
            (0.0, "0"),
            (f64::NAN, "nan"),
        ];
        for (x, s) in cases {
            assert_eq!(format_sig12(x), s, "{x:e}");
        }
    }

    #[test]
    fn state_file_roundtrip_is_exact() {
        let s = 1.0 / 3f64.sqrt();
        let psi = StateVector::new(
            vec![C64::new(s, 0.0), C64::new(0.0, s), C64::new(-s, 0.0), C64::new(0.0, 0.0)],
            vec![2, 2],
        )
        .unwrap();
        let file = StateFile::from_pure(&psi);
        let back = StateFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        match back.to_state().unwrap() {
            State::Pure(p) => assert_eq!(p, psi),
            State::Mixed(_) => panic!("kind changed"),
        }

        let rho = phi_plus();
        let file = StateFile::from_mixed(&rho);
        let back = StateFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back.to_state().unwrap(), State::Mixed(rho));
    }

    #[test]
    fn state_file_format() {
        let text = r#"{"kind": "pure", "subsystem_dims": [2], "data": [[1.0, 0.0], [0.0, 0.0]]}"#;
        let st = StateFile::from_json(text).unwrap().to_state().unwrap();
        assert_eq!(st.subsystem_dims(), [2]);
        assert!(StateFile::from_json(r#"{"kind": "tensor", "subsystem_dims": [2], "data": []}"#).is_err());
        assert!(StateFile::from_json(r#"{"kind": "pure", "subsystem_dims": [2], "data": [[1.0, 0.0], [0.0, 0.0]], "x": 1}"#).is_err());
        // not normalised
        let bad = r#"{"kind": "pure", "subsystem_dims": [2], "data": [[1.0, 0.0], [1.0, 0.0]]}"#;
        assert!(StateFile::from_json(bad).unwrap().to_state().is_err());
    }

    #[test]
    fn load_errors_carry_path() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("missing.json");
        let err = load_state(&missing).unwrap_err();
        assert!(err.to_string().contains("missing.json"));

        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, r#"{"kind": "mixed", "subsystem_dims": [2], "data": [[[1,0],[0,0]],[[0,0],[1,0]]]}"#).unwrap();
        let err = load_state(&bad).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(err.to_string().contains("bad.json"), "{err}");
    }

    fn record(i: u64) -> ScanRecord {
        ScanRecord {
            index: i,
            seed: 7,
            b_ab: 1.25,
            b_bc: 0.5 + i as f64 / 3.0,
            b_ac: 2.0000001,
            violations: 0,
            double_violation: false,
            distribution_residual: 0.0,
        }
    }

    #[test]
    fn scan_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let one = dir.path().join("one.csv");
        write_scan_csv(&one, &[record(0)]).unwrap();
        let text = std::fs::read_to_string(&one).unwrap();
        assert_eq!(text, "index,seed,b_ab,b_bc,b_ac,violations\n0,7,1.25,0.5,2.0000001,0\n");

        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let recs: Vec<_> = (0..5).map(record).collect();
        write_scan_csv(&a, &recs).unwrap();
        write_scan_csv(&b, &recs).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert!(write_scan_csv(&a, &[]).is_err());
    }

    #[test]
    fn gamma_csv_has_header_plus_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let pts: Vec<GammaPoint> = crate::monogamy::linspace(0.0, 2.0, 41)
            .into_iter()
            .map(|gamma| GammaPoint {
                gamma,
                b_ab: 0.0,
                b_bc: 0.0,
                b_ac: 0.0,
                violations: 0,
                distribution_residual: 0.0,
            })
            .collect();
        write_gamma_csv(&path, &pts).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 42);
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().nth(2).unwrap(), "0.05,0,0,0");
    }

    #[test]
    fn manifest_sits_next_to_data() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("scan.csv");
        let mut m = RunManifest::new("scan monogamy", 7, &data).param("states", 10);
        m.record_count = 10;
        let path = m.write_for(&data).unwrap();
        assert_eq!(path, dir.path().join("scan.csv.manifest.json"));
        let back: RunManifest = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.data_file, "scan.csv");
    }

    #[test]
    fn coefficients_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, "[[1, 0], [0, 0], [0, 0], [0, 0]]").unwrap();
        let c = load_coefficients(&path).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c[0], C64::new(1.0, 0.0));
    }
}
