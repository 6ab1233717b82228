//! Coefficient checkpoints: a short text header followed by one coefficient
//! per line as an exact hexadecimal float, `-0x1a2bp-300`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use rug::{Float, Integer};

use crate::chebyshev::ChebEvenSeries;
use crate::error::{Error, Result};
use crate::gsolver::RungCache;
use crate::mpnum::BigReal;

pub const FORMAT_VERSION: u32 = 1;
pub const BASIS_TAG: &str = "cheb-even-halved";
const MAGIC: &str = "feigen-checkpoint";

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientCheckpoint {
    pub version: u32,
    pub n: usize,
    pub precision_bits: u32,
    pub basis: String,
    pub series: ChebEvenSeries,
}

/// Exact hexadecimal text for `x`.
pub fn to_hex_float(x: &BigReal) -> String {
    match x.float().to_integer_exp() {
        None => "0x0p0".to_string(),
        Some((m, e)) => {
            let sign = if m < 0 { "-" } else { "" };
            let mut m = m.abs();
            let tz = m.find_one(0).unwrap_or(0);
            m >>= tz;
            format!("{sign}0x{m:x}p{}", i64::from(e) + i64::from(tz))
        }
    }
}

/// Parses the output of [`to_hex_float`] at `bits` precision; `None` if the
/// text is malformed or does not fit in `bits`.
pub fn from_hex_float(s: &str, bits: u32) -> Option<BigReal> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let body = body.strip_prefix("0x")?;
    let (mant, exp) = body.split_once('p')?;
    if mant.is_empty() || !mant.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    let mut m = Integer::from_str_radix(mant, 16).ok()?;
    let e: i32 = exp.parse().ok()?;
    if m.significant_bits() > bits {
        return None;
    }
    if neg {
        m = -m;
    }
    let mut f = Float::with_val(bits, &m);
    f <<= e;
    Some(BigReal::from_float(f))
}

fn bad(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Checkpoint {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

pub fn save_checkpoint(path: &Path, series: &ChebEvenSeries) -> Result<()> {
    let bits = series
        .coeffs()
        .iter()
        .map(BigReal::precision_bits)
        .max()
        .expect("series is non-empty");
    let mut out = String::new();
    out.push_str(&format!("{MAGIC} {FORMAT_VERSION}\n"));
    out.push_str(&format!("n {}\n", series.len()));
    out.push_str(&format!("precision_bits {bits}\n"));
    out.push_str(&format!("basis {BASIS_TAG}\n"));
    for c in series.coeffs() {
        out.push_str(&to_hex_float(c));
        out.push('\n');
    }
    // write-then-rename so a crash never leaves a truncated checkpoint behind
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(out.as_bytes())?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn header_field<'a>(path: &Path, line: usize, text: Option<&'a str>, key: &str) -> Result<&'a str> {
    let text = text.ok_or_else(|| bad(path, line, "truncated header"))?;
    match text.split_once(' ') {
        Some((k, v)) if k == key => Ok(v.trim()),
        _ => Err(bad(path, line, format!("expected `{key} <value>`, found {text:?}"))),
    }
}

pub fn load_checkpoint(path: &Path) -> Result<CoefficientCheckpoint> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();

    let version: u32 = header_field(path, 1, lines.next(), MAGIC)?
        .parse()
        .map_err(|_| bad(path, 1, "unreadable format version"))?;
    if version != FORMAT_VERSION {
        return Err(bad(path, 1, format!("unsupported format version {version}")));
    }
    let n: usize = header_field(path, 2, lines.next(), "n")?
        .parse()
        .map_err(|_| bad(path, 2, "unreadable size"))?;
    let precision_bits: u32 = header_field(path, 3, lines.next(), "precision_bits")?
        .parse()
        .map_err(|_| bad(path, 3, "unreadable precision"))?;
    if precision_bits < crate::mpnum::MIN_PRECISION_BITS {
        return Err(bad(path, 3, format!("precision {precision_bits} too small")));
    }
    let basis = header_field(path, 4, lines.next(), "basis")?.to_string();
    if basis != BASIS_TAG {
        return Err(bad(path, 4, format!("basis {basis:?} is not {BASIS_TAG:?}")));
    }
    if n == 0 {
        return Err(bad(path, 2, "empty series"));
    }

    let mut coeffs = Vec::with_capacity(n);
    for i in 0..n {
        let line = 5 + i;
        let s = lines
            .next()
            .ok_or_else(|| bad(path, line, format!("truncated: expected {n} coefficients, found {i}")))?;
        let c = from_hex_float(s.trim(), precision_bits)
            .ok_or_else(|| bad(path, line, format!("malformed hex float {s:?}")))?;
        coeffs.push(c);
    }
    if let Some((i, extra)) = lines.enumerate().find(|(_, l)| !l.trim().is_empty()) {
        return Err(bad(path, 5 + n + i, format!("unexpected trailing data {extra:?}")));
    }
    Ok(CoefficientCheckpoint {
        version,
        n,
        precision_bits,
        basis,
        series: ChebEvenSeries::new(coeffs)?,
    })
}

/// Rung cache backed by `rung-<n>.ckpt` files in a directory.
#[derive(Clone, Debug)]
pub struct DirCache {
    dir: PathBuf,
}

impl DirCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(DirCache { dir })
    }

    pub fn path_for(&self, n: usize) -> PathBuf {
        self.dir.join(format!("rung-{n}.ckpt"))
    }
}

impl RungCache for DirCache {
    fn load(&self, n: usize, min_bits: u32) -> Result<Option<ChebEvenSeries>> {
        let path = self.path_for(n);
        if !path.exists() {
            return Ok(None);
        }
        let ck = load_checkpoint(&path)?;
        if ck.n != n {
            return Err(bad(&path, 2, format!("holds n = {}, expected {n}", ck.n)));
        }
        if ck.precision_bits < min_bits {
            info!(
                "checkpoint {} has {} bits, {min_bits} needed; recomputing",
                path.display(),
                ck.precision_bits
            );
            return Ok(None);
        }
        Ok(Some(ck.series))
    }

    fn store(&self, n: usize, series: &ChebEvenSeries) -> Result<()> {
        save_checkpoint(&self.path_for(n), series)
    }
}
