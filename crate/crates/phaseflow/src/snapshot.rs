//! `PFLD` field snapshots.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "PFLD"            4 bytes magic
//! version           u8 (= 1)
//! dimension d       u8
//! nodes per axis    d × u32
//! extents           d × f64
//! time t            f64
//! values            N × f64, row-major
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

const MAGIC: &[u8; 4] = b"PFLD";
const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub time: f64,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn new(field: &Field, time: f64) -> Self {
        Snapshot {
            grid: (**field.grid()).clone(),
            time,
            values: field.values().to_vec(),
        }
    }

    pub fn into_field(self) -> Result<Field> {
        Field::new(Arc::new(self.grid), self.values)
    }

    pub fn encode(&self) -> Vec<u8> {
        let d = self.grid.dim();
        let mut out = Vec::with_capacity(6 + 12 * d + 8 + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(d as u8);
        for &n in self.grid.nodes() {
            out.extend_from_slice(&(n as u32).to_le_bytes());
        }
        for &l in self.grid.extents() {
            out.extend_from_slice(&l.to_le_bytes());
        }
        out.extend_from_slice(&self.time.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(mut bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Io(format!("malformed PFLD data: {m}"));
        let mut take = |n: usize| -> Result<&[u8]> {
            if bytes.len() < n {
                return Err(bad("truncated"));
            }
            let (head, tail) = bytes.split_at(n);
            bytes = tail;
            Ok(head)
        };
        if take(4)? != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = take(1)?[0];
        if version != VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let d = take(1)?[0] as usize;
        let mut nodes = Vec::with_capacity(d);
        for _ in 0..d {
            nodes.push(u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize);
        }
        let mut extents = Vec::with_capacity(d);
        for _ in 0..d {
            extents.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
        }
        let time = f64::from_le_bytes(take(8)?.try_into().unwrap());
        let grid = Grid::new(extents, nodes)?;
        let n = grid.len();
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
        }
        if !take(0)?.is_empty() || !bytes.is_empty() {
            return Err(bad("trailing bytes"));
        }
        Ok(Snapshot { grid, time, values })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.encode())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let mut buf = Vec::new();
        fs::File::open(path)?.read_to_end(&mut buf)?;
        Self::decode(&buf)
    }
}
