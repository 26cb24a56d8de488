//! Binary on-disk cache for complete-sum tables and checkpoint matrices.
//!
//! Format (all integers little-endian):
//!
//! ```text
//! magic   b"BMAX"
//! version u32           (currently 1)
//! tag     u8            (0 birch, 1 kloosterman, 2 odd polynomial)
//! p       u64
//! L       u32           (0 for a complete table)
//! [tag 2 only] ncoeff u32, then ncoeff i64 coefficients
//! payload
//! ```
//!
//! Complete-table payload: p re values then p im values, f64 bits.
//! Matrix payload: L+1 cutoffs (u64), then L+1 rows of p interleaved
//! (re, im) pairs. Round-trips are bit-exact, which is what makes cached
//! and freshly built runs byte-identical downstream.
//!
//! Writes go to a sibling temp file and are renamed into place, so a
//! crashed run never leaves a half-written cache entry under the real name.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::engine::{self, CheckpointMatrix, CompleteSumTable, Limits};
use crate::error::{Error, Result};
use crate::field::{FieldContext, TraceFamily};

const MAGIC: &[u8; 4] = b"BMAX";
const VERSION: u32 = 1;

pub fn cache_path_complete(dir: &Path, family: &TraceFamily, p: u64) -> PathBuf {
    dir.join(format!("complete_{}_p{p}_v{VERSION}.bmax", family.slug()))
}

pub fn cache_path_matrix(dir: &Path, family: &TraceFamily, p: u64, l: u32) -> PathBuf {
    dir.join(format!("ckpt_{}_p{p}_L{l}_v{VERSION}.bmax", family.slug()))
}

fn write_header(w: &mut impl Write, family: &TraceFamily, p: u64, l: u32) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[family.tag()])?;
    w.write_all(&p.to_le_bytes())?;
    w.write_all(&l.to_le_bytes())?;
    if let TraceFamily::OddPolynomial { coeffs } = family {
        w.write_all(&(coeffs.len() as u32).to_le_bytes())?;
        for c in coeffs {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_bits(u64::from_le_bytes(b)))
}

/// Checks magic, version, family, p, and L; errors describe the first mismatch.
fn check_header(r: &mut impl Read, family: &TraceFamily, p: u64, l: u32) -> Result<()> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Cache(format!("version {version}, expected {VERSION}")));
    }
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    if tag[0] != family.tag() {
        return Err(Error::Cache(format!(
            "family tag {} does not match requested {}",
            tag[0],
            family.tag()
        )));
    }
    let fp = read_u64(r)?;
    if fp != p {
        return Err(Error::Cache(format!("prime {fp} does not match requested {p}")));
    }
    let fl = read_u32(r)?;
    if fl != l {
        return Err(Error::Cache(format!(
            "checkpoint count {fl} does not match requested {l}"
        )));
    }
    if let TraceFamily::OddPolynomial { coeffs } = family {
        let n = read_u32(r)? as usize;
        if n != coeffs.len() {
            return Err(Error::Cache("coefficient count mismatch".into()));
        }
        for expected in coeffs {
            let got = read_u64(r)? as i64;
            if got != *expected {
                return Err(Error::Cache("coefficient mismatch".into()));
            }
        }
    }
    Ok(())
}

/// Writes through a temp file in the same directory, then renames.
fn atomic_write(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().unwrap_or_default().to_string_lossy(),
        std::process::id()
    ));
    let mut w = BufWriter::new(File::create(&tmp)?);
    let res = write(&mut w).and_then(|()| w.flush().map_err(Error::from));
    drop(w);
    match res {
        Ok(()) => {
            fs::rename(&tmp, path)?;
            Ok(())
        }
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

pub fn save_complete(path: &Path, table: &CompleteSumTable) -> Result<()> {
    atomic_write(path, |w| {
        write_header(w, &table.family, table.p, 0)?;
        for z in &table.complex {
            w.write_all(&z.re.to_bits().to_le_bytes())?;
        }
        for z in &table.complex {
            w.write_all(&z.im.to_bits().to_le_bytes())?;
        }
        Ok(())
    })
}

pub fn load_complete(path: &Path, family: &TraceFamily, p: u64) -> Result<CompleteSumTable> {
    let mut r = BufReader::new(File::open(path)?);
    check_header(&mut r, family, p, 0)?;
    let n = p as usize;
    let mut re = Vec::with_capacity(n);
    for _ in 0..n {
        re.push(read_f64(&mut r)?);
    }
    let mut complex = Vec::with_capacity(n);
    for re_v in re {
        complex.push(Complex64::new(re_v, 0.0));
    }
    for z in complex.iter_mut() {
        z.im = read_f64(&mut r)?;
    }
    expect_eof(&mut r)?;
    let values: Vec<f64> = complex.iter().map(|z| z.re).collect();
    let max_imag = complex.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(CompleteSumTable {
        family: family.clone(),
        p,
        values,
        complex,
        max_imag,
    })
}

pub fn save_matrix(path: &Path, matrix: &CheckpointMatrix) -> Result<()> {
    atomic_write(path, |w| {
        write_header(w, &matrix.family, matrix.p, matrix.l)?;
        for c in &matrix.cutoffs {
            w.write_all(&c.to_le_bytes())?;
        }
        for row in &matrix.rows {
            for z in row {
                w.write_all(&z.re.to_bits().to_le_bytes())?;
                w.write_all(&z.im.to_bits().to_le_bytes())?;
            }
        }
        Ok(())
    })
}

pub fn load_matrix(path: &Path, family: &TraceFamily, p: u64, l: u32) -> Result<CheckpointMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    check_header(&mut r, family, p, l)?;
    let rows_n = l as usize + 1;
    let mut cutoffs = Vec::with_capacity(rows_n);
    for _ in 0..rows_n {
        cutoffs.push(read_u64(&mut r)?);
    }
    let mut rows = Vec::with_capacity(rows_n);
    for _ in 0..rows_n {
        let mut row = Vec::with_capacity(p as usize);
        for _ in 0..p {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            row.push(Complex64::new(re, im));
        }
        rows.push(row);
    }
    expect_eof(&mut r)?;
    Ok(CheckpointMatrix {
        family: family.clone(),
        p,
        l,
        cutoffs,
        rows,
    })
}

fn expect_eof(r: &mut impl Read) -> Result<()> {
    let mut b = [0u8; 1];
    match r.read(&mut b)? {
        0 => Ok(()),
        _ => Err(Error::Cache("trailing bytes after payload".into())),
    }
}

/// Loads the table if a valid cache entry exists, otherwise builds and saves
/// it. Returns (table, hit). A corrupt or stale entry is rebuilt in place.
pub fn load_or_build_complete(
    dir: &Path,
    family: &TraceFamily,
    ctx: &FieldContext,
    limits: &Limits,
) -> Result<(CompleteSumTable, bool)> {
    let path = cache_path_complete(dir, family, ctx.p());
    if path.exists() {
        match load_complete(&path, family, ctx.p()) {
            Ok(table) => {
                log::info!("cache hit: {}", path.display());
                return Ok((table, true));
            }
            Err(e) => log::warn!("cache entry {} unusable ({e}); rebuilding", path.display()),
        }
    }
    let table = engine::complete_sums_limited(family, ctx, limits)?;
    save_complete(&path, &table)?;
    Ok((table, false))
}

pub fn load_or_build_matrix(
    dir: &Path,
    family: &TraceFamily,
    ctx: &FieldContext,
    l: u32,
    limits: &Limits,
) -> Result<(CheckpointMatrix, bool)> {
    let path = cache_path_matrix(dir, family, ctx.p(), l);
    if path.exists() {
        match load_matrix(&path, family, ctx.p(), l) {
            Ok(m) => {
                log::info!("cache hit: {}", path.display());
                return Ok((m, true));
            }
            Err(e) => log::warn!("cache entry {} unusable ({e}); rebuilding", path.display()),
        }
    }
    let matrix = engine::checkpoint_matrix_limited(family, ctx, l, limits)?;
    save_matrix(&path, &matrix)?;
    Ok((matrix, false))
}
