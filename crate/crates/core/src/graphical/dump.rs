//! Binary dump of a system realization.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      8 bytes   "RCPSYSDM"
//! version    u32
//! hdr_len    u32
//! header     hdr_len bytes of JSON (lattice, horizon, law, lambda_max, seed, start_policy)
//! edges      u64 count, then per edge: from u64, to u64, n u64, n × (time f64, mark f64)
//! sites      u64 count, then per site: start f64, horizon f64, n u64, n × mark f64
//! ```

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use super::system::{Arrow, HarrisSystem, StartPolicy, Window};
use crate::error::{Error, Result};
use crate::renewal::{InterarrivalLaw, RenewalTrain};

pub const DUMP_MAGIC: &[u8; 8] = b"RCPSYSDM";
pub const DUMP_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    lattice: Lattice,
    horizon: Window,
    law: InterarrivalLaw,
    lambda_max: f64,
    seed: u64,
    start_policy: StartPolicy,
}

fn io_err(e: std::io::Error) -> Error {
    Error::DumpFormat(e.to_string())
}

pub fn write_dump<W: Write>(system: &HarrisSystem, out: &mut W) -> Result<()> {
    let header = Header {
        lattice: system.lattice.clone(),
        horizon: system.horizon,
        law: system.law,
        lambda_max: system.lambda_max,
        seed: system.seed,
        start_policy: system.start_policy.clone(),
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::DumpFormat(e.to_string()))?;
    let mut buf = Vec::with_capacity(64 + json.len() + 16 * system.num_events());
    buf.extend_from_slice(DUMP_MAGIC);
    buf.extend_from_slice(&DUMP_VERSION.to_le_bytes());
    buf.extend_from_slice(&(json.len() as u32).to_le_bytes());
    buf.extend_from_slice(&json);
    buf.extend_from_slice(&(system.edges.len() as u64).to_le_bytes());
    for (e, &(from, to)) in system.edges.iter().enumerate() {
        buf.extend_from_slice(&(from as u64).to_le_bytes());
        buf.extend_from_slice(&(to as u64).to_le_bytes());
        buf.extend_from_slice(&(system.arrows[e].len() as u64).to_le_bytes());
        for a in &system.arrows[e] {
            buf.extend_from_slice(&a.time.to_le_bytes());
            buf.extend_from_slice(&a.mark.to_le_bytes());
        }
    }
    buf.extend_from_slice(&(system.trains.len() as u64).to_le_bytes());
    for t in &system.trains {
        buf.extend_from_slice(&t.start.to_le_bytes());
        buf.extend_from_slice(&t.horizon.to_le_bytes());
        buf.extend_from_slice(&(t.len() as u64).to_le_bytes());
        for m in t.marks() {
            buf.extend_from_slice(&m.to_le_bytes());
        }
    }
    out.write_all(&buf).map_err(io_err)
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(Error::DumpFormat(format!(
                "truncated: needed {n} bytes at offset {}, {} left",
                self.pos,
                self.data.len() - self.pos
            )));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Element count, refusing counts the remaining bytes cannot hold.
    fn count(&mut self, elem_size: usize) -> Result<usize> {
        let n = self.u64()? as usize;
        if n.saturating_mul(elem_size) > self.data.len() - self.pos {
            return Err(Error::DumpFormat(format!(
                "truncated: count {n} at offset {}",
                self.pos - 8
            )));
        }
        Ok(n)
    }
}

pub fn read_dump<R: Read>(input: &mut R) -> Result<HarrisSystem> {
    let mut data = Vec::new();
    input.read_to_end(&mut data).map_err(io_err)?;
    let mut c = Cursor {
        data: &data,
        pos: 0,
    };
    if c.take(8)? != DUMP_MAGIC {
        return Err(Error::DumpFormat("bad magic".into()));
    }
    let version = c.u32()?;
    if version != DUMP_VERSION {
        return Err(Error::DumpVersion {
            found: version.to_string(),
            supported: DUMP_VERSION.to_string(),
        });
    }
    let hdr_len = c.u32()? as usize;
    let header: Header = serde_json::from_slice(c.take(hdr_len)?)
        .map_err(|e| Error::DumpFormat(format!("header: {e}")))?;

    let n_edges = c.count(24)?;
    let mut arrows = Vec::with_capacity(n_edges);
    for _ in 0..n_edges {
        let from = c.u64()? as usize;
        let to = c.u64()? as usize;
        let n = c.count(16)?;
        let mut list = Vec::with_capacity(n);
        for _ in 0..n {
            list.push(Arrow {
                time: c.f64()?,
                mark: c.f64()?,
            });
        }
        arrows.push((from, to, list));
    }
    let n_sites = c.count(24)?;
    let mut trains = Vec::with_capacity(n_sites);
    for _ in 0..n_sites {
        let start = c.f64()?;
        let horizon = c.f64()?;
        let n = c.count(8)?;
        let marks = (0..n).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
        trains.push(RenewalTrain::from_marks(start, horizon, marks)?);
    }
    if c.pos != data.len() {
        return Err(Error::DumpFormat(format!(
            "{} trailing bytes",
            data.len() - c.pos
        )));
    }
    HarrisSystem::from_parts(
        header.lattice,
        header.horizon,
        header.law,
        header.lambda_max,
        header.seed,
        header.start_policy,
        trains,
        arrows,
    )
}
