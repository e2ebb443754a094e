//! Scheme and signal CSV files and the fit JSON record.
//!
//! All b-values are in ms/µm², diffusivities in µm²/ms. Scheme files carry
//! the plain tensor components `bxx..bxy`; Mandel scaling only appears in
//! the `mean` and `cov` arrays of fit records.

use std::io::{Read, Write};
use std::path::Path;

use dtd_moments_core::encoding::BTensor;
use dtd_moments_core::{AcqScheme, Descriptors, MomentPair, SymTensor3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEME_HEADER: [&str; 11] = [
    "n_acq", "b", "b_delta", "theta", "phi", "bxx", "byy", "bzz", "byz", "bxz", "bxy",
];
pub const SIGNAL_HEADER: [&str; 2] = ["n_acq", "signal"];

/// Relative tolerance between a row's `b` and the trace of its tensor.
const TRACE_TOL: f64 = 1e-6;

#[derive(Debug, Serialize, Deserialize)]
struct SchemeRow {
    n_acq: usize,
    b: f64,
    b_delta: f64,
    theta: f64,
    phi: f64,
    bxx: f64,
    byy: f64,
    bzz: f64,
    byz: f64,
    bxz: f64,
    bxy: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SignalRow {
    n_acq: usize,
    signal: f64,
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    if e.is_io_error() {
        if let csv::ErrorKind::Io(source) = e.into_kind() {
            return Error::io(path, source);
        }
        unreachable!("is_io_error implies an Io kind");
    }
    parse_error(path, line, e.to_string())
}

fn check_header(path: &Path, got: &csv::StringRecord, want: &[&str]) -> Result<()> {
    if got.iter().map(str::trim).ne(want.iter().copied()) {
        return Err(parse_error(
            path,
            1,
            format!("expected header `{}`, found `{}`", want.join(","), got.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(())
}

fn rows<R: Read, T: for<'de> Deserialize<'de>>(
    path: &Path,
    reader: R,
    header: &[&str],
) -> Result<Vec<(u64, T)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    check_header(path, &rdr.headers().map_err(|e| csv_error(path, e))?.clone(), header)?;
    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                let row = record.deserialize(None).map_err(|e| parse_error(path, line, e.to_string()))?;
                out.push((line, row));
            }
            Err(e) => return Err(csv_error(path, e)),
        }
    }
    Ok(out)
}

fn check_index(path: &Path, line: u64, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(parse_error(path, line, format!("n_acq = {got}, expected {expected}")));
    }
    Ok(())
}

/// Parses a scheme CSV; `path` is only used in diagnostics.
pub fn parse_scheme<R: Read>(path: &Path, reader: R) -> Result<AcqScheme> {
    let mut points = Vec::new();
    for (k, (line, r)) in rows::<_, SchemeRow>(path, reader, &SCHEME_HEADER)?.into_iter().enumerate() {
        check_index(path, line, r.n_acq, k)?;
        let values = [r.b, r.b_delta, r.theta, r.phi, r.bxx, r.byy, r.bzz, r.byz, r.bxz, r.bxy];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_error(path, line, "non-finite value"));
        }
        if r.b < 0.0 || !(-0.5..=1.0).contains(&r.b_delta) {
            return Err(parse_error(
                path,
                line,
                format!("b = {} must be >= 0 and b_delta = {} within [-0.5, 1]", r.b, r.b_delta),
            ));
        }
        let tensor = SymTensor3::new(r.bxx, r.byy, r.bzz, r.byz, r.bxz, r.bxy);
        if (tensor.trace() - r.b).abs() > TRACE_TOL * r.b.max(1.0) {
            return Err(parse_error(
                path,
                line,
                format!("tensor trace {} does not match b = {}", tensor.trace(), r.b),
            ));
        }
        points.push(BTensor::from_parts(r.b, r.b_delta, r.theta, r.phi, tensor));
    }
    if points.is_empty() {
        return Err(parse_error(path, 1, "scheme has no acquisition points"));
    }
    Ok(AcqScheme::new(points))
}

pub fn read_scheme(path: &Path) -> Result<AcqScheme> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_scheme(path, std::io::BufReader::new(file))
}

/// CSV writer that emits `header` even when no rows follow.
pub fn csv_writer<W: Write>(writer: W, header: &[&str]) -> csv::Writer<W> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(header).expect("header fits in the writer");
    w
}

pub fn write_scheme_to<W: Write>(scheme: &AcqScheme, writer: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(SCHEME_HEADER)?;
    for (n_acq, p) in scheme.iter().enumerate() {
        let t = &p.tensor;
        w.serialize(SchemeRow {
            n_acq,
            b: p.b,
            b_delta: p.b_delta,
            theta: p.theta,
            phi: p.phi,
            bxx: t.xx(),
            byy: t.yy(),
            bzz: t.zz(),
            byz: t.yz(),
            bxz: t.xz(),
            bxy: t.xy(),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn scheme_to_string(scheme: &AcqScheme) -> String {
    let mut buf = Vec::new();
    write_scheme_to(scheme, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

pub fn write_scheme(scheme: &AcqScheme, path: &Path) -> Result<()> {
    write_text(path, &scheme_to_string(scheme))
}

pub fn parse_signals<R: Read>(path: &Path, reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, (line, r)) in rows::<_, SignalRow>(path, reader, &SIGNAL_HEADER)?.into_iter().enumerate() {
        check_index(path, line, r.n_acq, k)?;
        if !r.signal.is_finite() {
            return Err(parse_error(path, line, "non-finite signal"));
        }
        out.push(r.signal);
    }
    Ok(out)
}

pub fn read_signals(path: &Path) -> Result<Vec<f64>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_signals(path, std::io::BufReader::new(file))
}

pub fn signals_to_string(signals: &[f64]) -> String {
    let mut w = csv_writer(Vec::new(), &SIGNAL_HEADER);
    for (n_acq, &signal) in signals.iter().enumerate() {
        w.serialize(SignalRow { n_acq, signal }).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("CSV output is UTF-8")
}

pub fn write_signals(signals: &[f64], path: &Path) -> Result<()> {
    write_text(path, &signals_to_string(signals))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Mean tensor and covariance in Mandel notation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MandelMoments {
    pub mean: [f64; 6],
    pub cov: [[f64; 6]; 6],
}

impl From<&MomentPair> for MandelMoments {
    fn from(m: &MomentPair) -> Self {
        MandelMoments {
            mean: dtd_moments_core::mandel_vec(&m.mean).0,
            cov: std::array::from_fn(|i| std::array::from_fn(|j| m.cov[(i, j)])),
        }
    }
}

/// Model-specific fitted parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum FitParameters {
    Mvgamma {
        s0: f64,
        kappa: f64,
        psi_eigs: [f64; 3],
        h_eigs: [f64; 3],
        theta_eigs: [f64; 3],
        euler: [f64; 3],
    },
    Cov {
        s0: f64,
    },
    Dti {
        s0: f64,
        /// Plain components `xx, yy, zz, yz, xz, xy`.
        tensor: [f64; 6],
    },
}

/// One fit, as written by `dtdm fit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub parameters: FitParameters,
    pub moments: Option<MandelMoments>,
    pub descriptors: Option<Descriptors>,
    pub residual_norm: f64,
    pub converged: bool,
    pub start_index: Option<usize>,
    pub iterations: Option<usize>,
}
