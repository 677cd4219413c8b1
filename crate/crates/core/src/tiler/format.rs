//! Versioned little-endian binary layout for tile tables.
//!
//! ```text
//! magic        4 bytes  "TFTB"
//! version      u32      1
//! map kind     u8       0 = stable, 1 = Mittag-Leffler
//! params       4 x f64  alpha, beta, gamma, delta (ML: alpha, 0, 1, 0)
//! level        u32
//! est_reject   f64
//! converged    u8       0 or 1
//! intervals    u32      count, then per interval:
//!   lo kind    u8       0 = unbounded, 1 = closed, 2 = open
//!   lo         f64      ignored when unbounded
//!   hi kind    u8
//!   hi         f64
//! blocks       u64      count, then per block:
//!   depth      u8
//!   i          u32
//!   j          u32
//!   flag       u8       1 = intersected
//! ```

use std::io::{self, Read, Write};
use std::ops::Bound;

use thiserror::Error;

use super::{Block, TableError, TileTable};
use crate::region::{Interval, RegionSpec};
use crate::transforms::{MlParams, StableParams, TransformMap};

pub const FORMAT_MAGIC: [u8; 4] = *b"TFTB";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a tile table (bad magic)")]
    Magic,
    #[error("unsupported table format version {0}")]
    Version(u32),
    #[error("corrupt table: {0}")]
    Corrupt(String),
    #[error("corrupt table: {0}")]
    Table(#[from] TableError),
}

fn put_bound<W: Write>(w: &mut W, b: Bound<f64>) -> io::Result<()> {
    let (kind, x) = match b {
        Bound::Unbounded => (0u8, 0.0),
        Bound::Included(x) => (1, x),
        Bound::Excluded(x) => (2, x),
    };
    w.write_all(&[kind])?;
    w.write_all(&x.to_le_bytes())
}

pub fn write_table<W: Write>(table: &TileTable, mut w: W) -> io::Result<()> {
    w.write_all(&FORMAT_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    let (kind, params) = match table.map() {
        TransformMap::Stable(p) => (0u8, [p.alpha(), p.beta(), p.gamma(), p.delta()]),
        TransformMap::MittagLeffler(p) => (1u8, [p.alpha(), 0.0, 1.0, 0.0]),
    };
    w.write_all(&[kind])?;
    for x in params {
        w.write_all(&x.to_le_bytes())?;
    }
    w.write_all(&table.level().to_le_bytes())?;
    w.write_all(&table.est_rejection().to_le_bytes())?;
    w.write_all(&[u8::from(table.converged())])?;
    let intervals = table.region().intervals();
    w.write_all(&(intervals.len() as u32).to_le_bytes())?;
    for iv in intervals {
        put_bound(&mut w, iv.lo())?;
        put_bound(&mut w, iv.hi())?;
    }
    w.write_all(&(table.block_count() as u64).to_le_bytes())?;
    for b in table.blocks() {
        w.write_all(&[b.depth as u8])?;
        w.write_all(&b.i.to_le_bytes())?;
        w.write_all(&b.j.to_le_bytes())?;
        w.write_all(&[u8::from(b.intersected)])?;
    }
    w.flush()
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> io::Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf)?;
        Ok(buf)
    }

    fn u8(&mut self) -> io::Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u32(&mut self) -> io::Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> io::Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> io::Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn bound(&mut self) -> Result<Bound<f64>, FormatError> {
        let kind = self.u8()?;
        let x = self.f64()?;
        match kind {
            0 => Ok(Bound::Unbounded),
            1 => Ok(Bound::Included(x)),
            2 => Ok(Bound::Excluded(x)),
            k => Err(FormatError::Corrupt(format!("endpoint kind {k}"))),
        }
    }
}

pub fn read_table<R: Read>(inner: R) -> Result<TileTable, FormatError> {
    let mut r = Reader { inner };
    if r.bytes::<4>()? != FORMAT_MAGIC {
        return Err(FormatError::Magic);
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(FormatError::Version(version));
    }
    let kind = r.u8()?;
    let [a, b, g, d] = [r.f64()?, r.f64()?, r.f64()?, r.f64()?];
    let corrupt = |e: &dyn std::fmt::Display| FormatError::Corrupt(e.to_string());
    let map = match kind {
        0 => TransformMap::Stable(StableParams::new(a, b, g, d).map_err(|e| corrupt(&e))?),
        1 => TransformMap::MittagLeffler(MlParams::new(a).map_err(|e| corrupt(&e))?),
        k => return Err(FormatError::Corrupt(format!("map kind {k}"))),
    };
    let level = r.u32()?;
    let est = r.f64()?;
    let converged = match r.u8()? {
        0 => false,
        1 => true,
        c => return Err(FormatError::Corrupt(format!("converged flag {c}"))),
    };
    let n_intervals = r.u32()?;
    let mut intervals = Vec::new();
    for _ in 0..n_intervals {
        let lo = r.bound()?;
        let hi = r.bound()?;
        intervals.push(Interval::new(lo, hi).map_err(|e| corrupt(&e))?);
    }
    let region = RegionSpec::new(intervals).map_err(|e| corrupt(&e))?;
    let n_blocks = r.u64()?;
    let mut blocks = Vec::with_capacity(n_blocks.min(1 << 24) as usize);
    for _ in 0..n_blocks {
        let depth = u32::from(r.u8()?);
        let i = r.u32()?;
        let j = r.u32()?;
        let intersected = match r.u8()? {
            0 => false,
            1 => true,
            f => return Err(FormatError::Corrupt(format!("block flag {f}"))),
        };
        blocks.push(Block {
            depth,
            i,
            j,
            intersected,
        });
    }
    let mut probe = [0u8; 1];
    if r.inner.read(&mut probe)? != 0 {
        return Err(FormatError::Corrupt("trailing bytes".into()));
    }
    Ok(TileTable::from_blocks(map, region, level, est, converged, blocks)?)
}
