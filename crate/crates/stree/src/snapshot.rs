//! Whole-tree snapshots: a self-describing little-endian binary stream with
//! a magic prefix, a checksummed header, and node records in pre-order.
//!
//! Layout:
//!
//! ```text
//! magic        b"ISO1"
//! version      u8 (currently 1)
//! dim          u32
//! capacity     u32
//! split_mode   u8 (0 greedy, 1 brute force, 2 auto)
//! brute_cutoff u32
//! geom_eps     f64
//! point_count  u64
//! height       u32
//! checksum     u64, FNV-1a over every preceding header byte
//! records      pre-order node records when point_count > 0
//! ```
//!
//! A node record is a kind byte (0 leaf, 1 inner), the bounding ball
//! (center at full 64-bit precision, then the radius), the statistics
//! (count, mean through the 32-bit point layout, sum of squares), the entry
//! count, and the entries themselves — raw point records for leaves, nested
//! node records for inner nodes. Ball centers keep their full width so a
//! reloaded tree prunes exactly like the original.

use std::fmt;
use std::io::{Read, Write};

use crate::error::Error;
use crate::geometry::Ball;
use crate::hash::fnv1a64;
use crate::point::{SparsePoint, SparseVector};
use crate::stats::StatSummary;
use crate::tree::node_io::{NodeReader, NodeWriter};
use crate::tree::{SplitMode, Tree, TreeConfig};

pub(crate) const MAGIC: [u8; 4] = *b"ISO1";
pub(crate) const VERSION: u8 = 1;

#[derive(Debug)]
pub enum SnapshotError {
    BadMagic,
    UnsupportedVersion(u8),
    HeaderChecksum,
    Truncated,
    Corrupt(&'static str),
    CountMismatch { header: u64, actual: u64 },
    HeightMismatch { header: u32, actual: u32 },
}

impl fmt::Display for SnapshotError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnapshotError::BadMagic => write!(f, "not a tree snapshot (bad magic)"),
            SnapshotError::UnsupportedVersion(v) => write!(f, "unsupported format version {v}"),
            SnapshotError::HeaderChecksum => write!(f, "header checksum mismatch"),
            SnapshotError::Truncated => write!(f, "snapshot ends mid-record"),
            SnapshotError::Corrupt(what) => write!(f, "corrupt snapshot: {what}"),
            SnapshotError::CountMismatch { header, actual } => {
                write!(f, "header records {header} points, stream holds {actual}")
            }
            SnapshotError::HeightMismatch { header, actual } => {
                write!(f, "header records height {header}, stream holds {actual}")
            }
        }
    }
}

impl std::error::Error for SnapshotError {}

/// Writes a snapshot of the tree. Identical trees produce identical bytes.
pub fn save_tree<W: Write>(tree: &Tree, mut sink: W) -> Result<(), Error> {
    let cfg = tree.config();
    let mut header = Vec::with_capacity(38);
    header.extend_from_slice(&MAGIC);
    header.push(VERSION);
    header.extend_from_slice(&cfg.dim.to_le_bytes());
    header.extend_from_slice(&(cfg.capacity as u32).to_le_bytes());
    header.push(split_mode_byte(cfg.split_mode));
    header.extend_from_slice(&(cfg.brute_cutoff as u32).to_le_bytes());
    header.extend_from_slice(&cfg.geom_eps.to_le_bytes());
    header.extend_from_slice(&tree.len().to_le_bytes());
    header.extend_from_slice(&(tree.height() as u32).to_le_bytes());
    let checksum = fnv1a64(&header);
    header.extend_from_slice(&checksum.to_le_bytes());
    sink.write_all(&header)?;

    if let Some(root) = tree.root() {
        NodeWriter { sink: &mut sink }.write_node(root)?;
    }
    Ok(())
}

/// Reads a snapshot back into a tree, validating the header checksum, the
/// record structure, and the point count and height against the header.
pub fn load_tree<R: Read>(mut source: R) -> Result<Tree, Error> {
    let mut header = [0u8; 38];
    read_exact(&mut source, &mut header)?;
    if header[0..4] != MAGIC {
        return Err(SnapshotError::BadMagic.into());
    }
    if header[4] != VERSION {
        return Err(SnapshotError::UnsupportedVersion(header[4]).into());
    }
    let dim = u32::from_le_bytes(header[5..9].try_into().unwrap());
    let capacity = u32::from_le_bytes(header[9..13].try_into().unwrap()) as usize;
    let split_mode = match header[13] {
        0 => SplitMode::Greedy,
        1 => SplitMode::BruteForce,
        2 => SplitMode::Auto,
        _ => return Err(SnapshotError::Corrupt("unknown split mode").into()),
    };
    let brute_cutoff = u32::from_le_bytes(header[14..18].try_into().unwrap()) as usize;
    let geom_eps = f64::from_le_bytes(header[18..26].try_into().unwrap());
    let point_count = u64::from_le_bytes(header[26..34].try_into().unwrap());
    let height = u32::from_le_bytes(header[34..38].try_into().unwrap());

    let mut checksum = [0u8; 8];
    read_exact(&mut source, &mut checksum)?;
    if u64::from_le_bytes(checksum) != fnv1a64(&header) {
        return Err(SnapshotError::HeaderChecksum.into());
    }

    let config = TreeConfig { dim, capacity, split_mode, brute_cutoff, geom_eps };
    let mut tree = Tree::new(config)?;

    if point_count > 0 {
        let root = NodeReader { source: &mut source, dim }.read_node()?;
        tree.set_root(Some(root));
    }

    // Anything after the last record is corruption.
    let mut probe = [0u8; 1];
    match source.read(&mut probe)? {
        0 => {}
        _ => return Err(SnapshotError::Corrupt("trailing bytes after last record").into()),
    }

    if tree.len() != point_count {
        return Err(SnapshotError::CountMismatch { header: point_count, actual: tree.len() }.into());
    }
    if tree.height() as u32 != height {
        return Err(
            SnapshotError::HeightMismatch { header: height, actual: tree.height() as u32 }.into(),
        );
    }
    Ok(tree)
}

fn split_mode_byte(mode: SplitMode) -> u8 {
    match mode {
        SplitMode::Greedy => 0,
        SplitMode::BruteForce => 1,
        SplitMode::Auto => 2,
    }
}

fn read_exact<R: Read>(source: &mut R, buf: &mut [u8]) -> Result<(), Error> {
    source.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Snapshot(SnapshotError::Truncated)
        } else {
            Error::Io(e)
        }
    })
}

// Shared low-level record helpers, also used by the node reader/writer.

pub(crate) fn write_f64_vector<W: Write>(sink: &mut W, v: &SparseVector<f64>) -> Result<(), Error> {
    sink.write_all(&(v.nnz() as u32).to_le_bytes())?;
    for k in v.keys() {
        sink.write_all(&k.to_le_bytes())?;
    }
    for val in v.values() {
        sink.write_all(&val.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn read_f64_vector<R: Read>(source: &mut R) -> Result<SparseVector<f64>, Error> {
    let nnz = read_u32(source)? as usize;
    let mut keys = Vec::with_capacity(nnz.min(1 << 20));
    for _ in 0..nnz {
        keys.push(read_u32(source)?);
    }
    let mut vals = Vec::with_capacity(keys.len());
    for _ in 0..nnz {
        let mut buf = [0u8; 8];
        read_exact(source, &mut buf)?;
        vals.push(f64::from_le_bytes(buf));
    }
    SparseVector::new(keys, vals)
        .map_err(|_| SnapshotError::Corrupt("invalid sparse vector record").into())
}

pub(crate) fn write_point<W: Write>(sink: &mut W, p: &SparsePoint) -> Result<(), Error> {
    sink.write_all(&crate::codec::point_to_bytes(p))?;
    Ok(())
}

pub(crate) fn read_point<R: Read>(source: &mut R, dim: u32) -> Result<SparsePoint, Error> {
    let nnz = read_u32(source)? as usize;
    let mut keys = Vec::with_capacity(nnz.min(1 << 20));
    for _ in 0..nnz {
        keys.push(read_u32(source)?);
    }
    let mut vals = Vec::with_capacity(keys.len());
    for _ in 0..nnz {
        let mut buf = [0u8; 4];
        read_exact(source, &mut buf)?;
        vals.push(f32::from_le_bytes(buf));
    }
    if keys.last().is_some_and(|&k| k >= dim) {
        return Err(SnapshotError::Corrupt("point key beyond dimensionality").into());
    }
    SparsePoint::new(keys, vals)
        .map_err(|_| SnapshotError::Corrupt("invalid point record").into())
}

pub(crate) fn write_ball<W: Write>(sink: &mut W, ball: &Ball) -> Result<(), Error> {
    write_f64_vector(sink, ball.center())?;
    sink.write_all(&ball.radius().to_le_bytes())?;
    Ok(())
}

pub(crate) fn read_ball<R: Read>(source: &mut R) -> Result<Ball, Error> {
    let center = read_f64_vector(source)?;
    let radius = read_f64(source)?;
    if !radius.is_finite() || radius < 0.0 {
        return Err(SnapshotError::Corrupt("invalid ball radius").into());
    }
    Ok(Ball::new(center, radius))
}

pub(crate) fn write_stats<W: Write>(sink: &mut W, stats: &StatSummary) -> Result<(), Error> {
    sink.write_all(&stats.n().to_le_bytes())?;
    write_point(sink, &stats.mean_point())?;
    sink.write_all(&stats.sumsq().to_le_bytes())?;
    Ok(())
}

pub(crate) fn read_stats<R: Read>(source: &mut R, dim: u32) -> Result<StatSummary, Error> {
    let mut buf = [0u8; 8];
    read_exact(source, &mut buf)?;
    let n = u64::from_le_bytes(buf);
    let mean = read_point(source, dim)?;
    let sumsq = read_f64(source)?;
    if !sumsq.is_finite() || sumsq < 0.0 {
        return Err(SnapshotError::Corrupt("invalid sum of squares").into());
    }
    Ok(StatSummary::from_parts(n, mean.widened(), sumsq))
}

pub(crate) fn read_u32<R: Read>(source: &mut R) -> Result<u32, Error> {
    let mut buf = [0u8; 4];
    read_exact(source, &mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

pub(crate) fn read_f64<R: Read>(source: &mut R) -> Result<f64, Error> {
    let mut buf = [0u8; 8];
    read_exact(source, &mut buf)?;
    Ok(f64::from_le_bytes(buf))
}
