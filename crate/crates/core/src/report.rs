//! Binary grid reports.
//!
//! Layout, all integers and floats little-endian:
//!
//! | bytes  | field                          |
//! |--------|--------------------------------|
//! | 4      | magic `TPIC`                   |
//! | 4      | format version (`u32`, = 1)    |
//! | 1      | name length `n` (`u8`)         |
//! | n      | name, UTF-8                    |
//! | 8      | step index (`u64`)             |
//! | 4      | `nx` (`u32`)                   |
//! | 4      | `ny` (`u32`)                   |
//! | 8      | `dx` (`f64`)                   |
//! | 8      | `dy` (`f64`)                   |
//! | 8      | simulation time (`f64`)        |
//! | 8·nx·ny| payload, `f64`, row-major, x fastest, interior cells only |
//!
//! The fixed part of the header is 49 bytes.

use std::io::{Read, Write};
use std::path::PathBuf;

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"TPIC";
pub const VERSION: u32 = 1;
pub const FIXED_HEADER_LEN: usize = 49;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic {0:?}, expected \"TPIC\"")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}, expected {VERSION}")]
    Version(u32),
    #[error("truncated {what}: expected {expected} bytes, got {got}")]
    Truncated { what: &'static str, expected: usize, got: usize },
    #[error("report name is not valid UTF-8")]
    Name,
    #[error("report name longer than 255 bytes")]
    NameTooLong,
    #[error("payload has {got} values, expected nx·ny = {expected}")]
    PayloadShape { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A named 2D scalar field at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub name: String,
    pub step: u64,
    pub nx: u32,
    pub ny: u32,
    pub dx: f64,
    pub dy: f64,
    pub time: f64,
    /// Row-major, x fastest.
    pub data: Vec<f64>,
}

impl GridReport {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.data[iy * self.nx as usize + ix]
    }

    pub fn encoded_len(&self) -> usize {
        FIXED_HEADER_LEN + self.name.len() + 8 * self.data.len()
    }

    /// Bitwise equality, treating NaNs with equal payloads as equal.
    pub fn bit_eq(&self, other: &GridReport) -> bool {
        self.name == other.name
            && self.step == other.step
            && self.nx == other.nx
            && self.ny == other.ny
            && self.dx.to_bits() == other.dx.to_bits()
            && self.dy.to_bits() == other.dy.to_bits()
            && self.time.to_bits() == other.time.to_bits()
            && self.data.len() == other.data.len()
            && self.data.iter().zip(&other.data).all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Largest absolute difference between two same-shaped reports.
    pub fn max_abs_diff(&self, other: &GridReport) -> f64 {
        assert_eq!((self.nx, self.ny), (other.nx, other.ny), "report shapes differ");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

pub fn write_report<W: Write>(mut w: W, r: &GridReport) -> Result<(), FormatError> {
    if r.data.len() != r.nx as usize * r.ny as usize {
        return Err(FormatError::PayloadShape { expected: r.nx as usize * r.ny as usize, got: r.data.len() });
    }
    let name_len = u8::try_from(r.name.len()).map_err(|_| FormatError::NameTooLong)?;
    let mut buf = Vec::with_capacity(r.encoded_len());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(name_len);
    buf.extend_from_slice(r.name.as_bytes());
    buf.extend_from_slice(&r.step.to_le_bytes());
    buf.extend_from_slice(&r.nx.to_le_bytes());
    buf.extend_from_slice(&r.ny.to_le_bytes());
    buf.extend_from_slice(&r.dx.to_le_bytes());
    buf.extend_from_slice(&r.dy.to_le_bytes());
    buf.extend_from_slice(&r.time.to_le_bytes());
    for v in &r.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn encode_report(r: &GridReport) -> Result<Vec<u8>, FormatError> {
    let mut out = Vec::with_capacity(r.encoded_len());
    write_report(&mut out, r)?;
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], FormatError> {
        let rest = &self.bytes[self.pos..];
        if rest.len() < n {
            return Err(FormatError::Truncated { what, expected: n, got: rest.len() });
        }
        self.pos += n;
        Ok(&rest[..n])
    }

    fn array<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N], FormatError> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }
}

pub fn decode_report(bytes: &[u8]) -> Result<GridReport, FormatError> {
    let mut c = Cursor { bytes, pos: 0 };
    let magic = c.array::<4>("magic")?;
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = u32::from_le_bytes(c.array("version")?);
    if version != VERSION {
        return Err(FormatError::Version(version));
    }
    let name_len = c.array::<1>("name length")?[0] as usize;
    let name = std::str::from_utf8(c.take(name_len, "name")?).map_err(|_| FormatError::Name)?.to_owned();
    let step = u64::from_le_bytes(c.array("step")?);
    let nx = u32::from_le_bytes(c.array("nx")?);
    let ny = u32::from_le_bytes(c.array("ny")?);
    let dx = f64::from_le_bytes(c.array("dx")?);
    let dy = f64::from_le_bytes(c.array("dy")?);
    let time = f64::from_le_bytes(c.array("time")?);
    let n = nx as usize * ny as usize;
    let payload = c.take(8 * n, "payload")?;
    let data = payload.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8"))).collect();
    Ok(GridReport { name, step, nx, ny, dx, dy, time, data })
}

pub fn read_report<R: Read>(mut r: R) -> Result<GridReport, FormatError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode_report(&bytes)
}

/// Writes every report to `<dir>/<name>_<step>.tpic`.
#[derive(Debug, Clone)]
pub struct DirSink {
    pub dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl DirSink {
    pub fn new(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(DirSink { dir, written: Vec::new() })
    }

    pub fn file_name(r: &GridReport) -> String {
        format!("{}_{:06}.tpic", r.name, r.step)
    }
}

impl crate::engine::ReportSink for DirSink {
    fn emit(&mut self, report: &GridReport) -> crate::error::Result<()> {
        let path = self.dir.join(Self::file_name(report));
        let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        write_report(file, report)?;
        self.written.push(path);
        Ok(())
    }
}

/// CSV rendering: header `ix,iy,value`, then one row per cell.
pub fn report_to_csv<W: Write>(mut w: W, r: &GridReport) -> std::io::Result<()> {
    writeln!(w, "ix,iy,value")?;
    for iy in 0..r.ny as usize {
        for ix in 0..r.nx as usize {
            writeln!(w, "{ix},{iy},{:?}", r.value(ix, iy))?;
        }
    }
    Ok(())
}
