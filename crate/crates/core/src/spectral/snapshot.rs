//! `QTF1` binary field snapshots.
//!
//! Layout: the magic bytes `QTF1`; `n1, n2, n3` and the component count as
//! little-endian `u32`; `box_length` and `time` as little-endian `f64`; then
//! each component as a contiguous little-endian `f64` array in x-fastest order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::field::{Field, Layout};
use super::SpectralError;
use crate::scalar::Real;

const MAGIC: &[u8; 4] = b"QTF1";

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub dims: [usize; 3],
    pub box_length: f64,
    pub time: f64,
    pub components: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn from_fields<T: Real>(
        box_length: T,
        time: T,
        parts: &[&[Vec<T>]],
    ) -> Result<Self, SpectralError> {
        let mut components = Vec::new();
        for part in parts {
            for c in part.iter() {
                components.push(c.iter().map(|v| v.to_f64_lossy()).collect::<Vec<f64>>());
            }
        }
        let len = components.first().map_or(0, Vec::len);
        if components.iter().any(|c| c.len() != len) {
            return Err(SpectralError::Snapshot(
                "components differ in length".into(),
            ));
        }
        Ok(Self {
            dims: [0; 3],
            box_length: box_length.to_f64_lossy(),
            time: time.to_f64_lossy(),
            components,
        })
    }

    pub fn with_dims(mut self, dims: [usize; 3]) -> Self {
        self.dims = dims;
        self
    }

    /// Reinterprets components `start..start + L::COMPONENTS` as a field.
    pub fn field<T: Real, L: Layout>(&self, start: usize) -> Result<Field<T, L>, SpectralError> {
        let end = start + L::COMPONENTS;
        if end > self.components.len() {
            return Err(SpectralError::Snapshot(format!(
                "needs components {start}..{end}, file has {}",
                self.components.len()
            )));
        }
        let comps = self.components[start..end]
            .iter()
            .map(|c| c.iter().map(|&v| T::lit(v)).collect())
            .collect();
        Field::from_components(self.dims, comps)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), SpectralError> {
        let n: usize = self.dims.iter().product();
        if self.components.iter().any(|c| c.len() != n) {
            return Err(SpectralError::Snapshot(
                "component length does not match dims".into(),
            ));
        }
        w.write_all(MAGIC)?;
        for d in self
            .dims
            .iter()
            .chain(std::iter::once(&self.components.len()))
        {
            let d = u32::try_from(*d)
                .map_err(|_| SpectralError::Snapshot("dimension exceeds u32".into()))?;
            w.write_all(&d.to_le_bytes())?;
        }
        w.write_all(&self.box_length.to_le_bytes())?;
        w.write_all(&self.time.to_le_bytes())?;
        for c in &self.components {
            for v in c {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self, SpectralError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SpectralError::Snapshot("bad magic bytes".into()));
        }
        let mut u = [0u8; 4];
        let mut header = [0usize; 4];
        for h in header.iter_mut() {
            r.read_exact(&mut u)?;
            *h = u32::from_le_bytes(u) as usize;
        }
        let mut f = [0u8; 8];
        r.read_exact(&mut f)?;
        let box_length = f64::from_le_bytes(f);
        r.read_exact(&mut f)?;
        let time = f64::from_le_bytes(f);
        let dims = [header[0], header[1], header[2]];
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| SpectralError::Snapshot("grid too large".into()))?;
        let mut components = Vec::with_capacity(header[3]);
        let mut buf = vec![0u8; n * 8];
        for _ in 0..header[3] {
            r.read_exact(&mut buf)?;
            components.push(
                buf.chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
                    .collect(),
            );
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(SpectralError::Snapshot(
                "trailing bytes after last component".into(),
            ));
        }
        Ok(Self {
            dims,
            box_length,
            time,
            components,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SpectralError> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SpectralError> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}
