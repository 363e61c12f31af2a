//! File formats: volumes (JSON sidecar plus raw little-endian samples),
//! coefficient, Gramian and rate tables as CSV, reports as JSON.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use amol_core::approx::RateRow;
use amol_core::frame::{CoefficientSet, CoefficientStore, FrameSpec};
use amol_core::gramian::{GramianRow, GramianTable};
use amol_core::parametrization::ShearletIndex;
use amol_core::volume::{Domain, SampledVolume, Samples};
use amol_core::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] amol_core::Error),
}

pub type IoResult<T> = std::result::Result<T, IoError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F64,
    C128,
}

/// Sidecar describing a raw volume file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeHeader {
    pub dims: [usize; 3],
    pub dtype: Dtype,
    pub domain: Domain,
}

/// The raw sample file next to a sidecar: same stem, `.bin` extension.
pub fn raw_path(sidecar: &Path) -> PathBuf {
    sidecar.with_extension("bin")
}

pub fn write_volume(sidecar: &Path, vol: &SampledVolume) -> IoResult<()> {
    let (dtype, bytes) = match &vol.data {
        Samples::Real(v) => (
            Dtype::F64,
            v.iter().flat_map(|x| x.to_le_bytes()).collect::<Vec<u8>>(),
        ),
        Samples::Complex(v) => (
            Dtype::C128,
            v.iter()
                .flat_map(|c| c.re.to_le_bytes().into_iter().chain(c.im.to_le_bytes()))
                .collect(),
        ),
    };
    let header = VolumeHeader {
        dims: vol.dims,
        dtype,
        domain: vol.domain,
    };
    write_json(sidecar, &header)?;
    let raw = raw_path(sidecar);
    fs::write(&raw, bytes).map_err(io_err(&raw))
}

pub fn read_volume(sidecar: &Path) -> IoResult<SampledVolume> {
    let text = fs::read_to_string(sidecar).map_err(io_err(sidecar))?;
    let header: VolumeHeader = serde_json::from_str(&text)?;
    let raw = raw_path(sidecar);
    let mut bytes = Vec::new();
    fs::File::open(&raw)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_err(&raw))?;
    let count: usize = header.dims.iter().product();
    let width = match header.dtype {
        Dtype::F64 => 8,
        Dtype::C128 => 16,
    };
    if bytes.len() != count * width {
        return Err(IoError::Format(format!(
            "{}: expected {} bytes, found {}",
            raw.display(),
            count * width,
            bytes.len()
        )));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8-byte chunk"));
    let data = match header.dtype {
        Dtype::F64 => Samples::Real(bytes.chunks_exact(8).map(f).collect()),
        Dtype::C128 => Samples::Complex(
            bytes
                .chunks_exact(16)
                .map(|c| Complex64::new(f(&c[..8]), f(&c[8..])))
                .collect(),
        ),
    };
    Ok(SampledVolume::new(header.dims, data, header.domain)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct CoefficientRecord {
    epsilon: usize,
    j: u32,
    l1: i64,
    l2: i64,
    k1: i64,
    k2: i64,
    k3: i64,
    re: f64,
    im: f64,
}

fn split(idx: &ShearletIndex) -> IoResult<([i64; 2], [i64; 3])> {
    match (idx.ell.as_slice(), idx.k.as_slice()) {
        (&[l1, l2], &[k1, k2, k3]) => Ok(([l1, l2], [k1, k2, k3])),
        _ => Err(IoError::Format(format!(
            "{idx:?} is not a 3D shearlet index"
        ))),
    }
}

/// CSV "epsilon,j,l1,l2,k1,k2,k3,re,im" in storage order.
pub fn write_coefficients<W: Write>(out: W, set: &CoefficientSet) -> IoResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for (idx, c) in set.entries() {
        let ([l1, l2], [k1, k2, k3]) = split(&idx)?;
        w.serialize(CoefficientRecord {
            epsilon: idx.epsilon,
            j: idx.j,
            l1,
            l2,
            k1,
            k2,
            k3,
            re: c.re,
            im: c.im,
        })?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

/// Reads a coefficient CSV as a sparse set of `spec`.
pub fn read_coefficients<R: Read>(
    input: R,
    spec: FrameSpec,
    truncated: bool,
) -> IoResult<CoefficientSet> {
    let mut entries = Vec::new();
    for rec in csv::Reader::from_reader(input).deserialize() {
        let r: CoefficientRecord = rec?;
        entries.push((
            ShearletIndex::new(r.epsilon, r.j, vec![r.l1, r.l2], vec![r.k1, r.k2, r.k3]),
            Complex64::new(r.re, r.im),
        ));
    }
    Ok(CoefficientSet {
        spec,
        store: CoefficientStore::Sparse(entries),
        truncated,
    })
}

pub const GRAMIAN_HEADER: [&str; 17] = [
    "a_eps", "a_j", "a_l1", "a_l2", "a_k1", "a_k2", "a_k3", "b_eps", "b_j", "b_l1", "b_l2", "b_k1",
    "b_k2", "b_k3", "re", "im", "omega",
];

pub fn write_gramian<W: Write>(out: W, table: &GramianTable) -> IoResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GRAMIAN_HEADER)?;
    for row in &table.rows {
        let (la, ka) = split(&row.a)?;
        let (lb, kb) = split(&row.b)?;
        let mut rec: Vec<String> = Vec::with_capacity(17);
        for (eps, j, l, k) in [
            (row.a.epsilon, row.a.j, la, ka),
            (row.b.epsilon, row.b.j, lb, kb),
        ] {
            rec.extend([eps.to_string(), j.to_string()]);
            rec.extend(l.iter().chain(&k).map(|v| v.to_string()));
        }
        rec.extend(
            [row.value.re, row.value.im, row.omega]
                .iter()
                .map(|v| format!("{v:?}")),
        );
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

pub fn read_gramian<R: Read>(input: R) -> IoResult<GramianTable> {
    let mut rows = Vec::new();
    for rec in csv::Reader::from_reader(input).records() {
        let rec = rec?;
        if rec.len() != 17 {
            return Err(IoError::Format(format!(
                "gramian row has {} fields",
                rec.len()
            )));
        }
        let int = |i: usize| {
            rec[i]
                .parse::<i64>()
                .map_err(|e| IoError::Format(format!("field {i}: {e}")))
        };
        let real = |i: usize| {
            rec[i]
                .parse::<f64>()
                .map_err(|e| IoError::Format(format!("field {i}: {e}")))
        };
        let idx = |o: usize| -> IoResult<ShearletIndex> {
            Ok(ShearletIndex::new(
                int(o)? as usize,
                int(o + 1)? as u32,
                vec![int(o + 2)?, int(o + 3)?],
                vec![int(o + 4)?, int(o + 5)?, int(o + 6)?],
            ))
        };
        rows.push(GramianRow {
            a: idx(0)?,
            b: idx(7)?,
            value: Complex64::new(real(14)?, real(15)?),
            omega: real(16)?,
        });
    }
    Ok(GramianTable { rows })
}

#[derive(Debug, Serialize, Deserialize)]
struct RateRecord {
    #[serde(rename = "N")]
    n: usize,
    err2: f64,
    tail2: f64,
}

/// CSV "N,err2,tail2".
pub fn write_rates<W: Write>(out: W, rows: &[RateRow]) -> IoResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(RateRecord {
            n: r.n,
            err2: r.err2,
            tail2: r.tail2,
        })?;
    }
    w.flush().map_err(|e| IoError::Csv(e.into()))?;
    Ok(())
}

pub fn read_rates<R: Read>(input: R) -> IoResult<Vec<RateRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| {
            r.map(|r: RateRecord| RateRow {
                n: r.n,
                err2: r.err2,
                tail2: r.tail2,
            })
            .map_err(IoError::from)
        })
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> IoResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Creates (or truncates) a file for writing.
pub fn create(path: &Path) -> IoResult<fs::File> {
    fs::File::create(path).map_err(io_err(path))
}
