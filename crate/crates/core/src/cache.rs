//! On-disk cache of operator tables.
//!
//! One file per table, named by a SHA-256 of everything the table depends
//! on. Files start with a magic tag, the format version and the key, so a
//! stale or foreign file is detected and rebuilt rather than trusted.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray as nd;
use num_complex::Complex64 as C64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spectrum::BoundSpectrum;
use crate::table::{OperatorTable, TableData, TableKind};

const MAGIC: &[u8; 4] = b"CVOT";
pub const FORMAT_VERSION: u32 = 2;

#[derive(Clone, Debug)]
pub struct TableCache {
    dir: PathBuf,
}

/// Everything a cached table depends on.
#[derive(Clone, Copy, Debug)]
pub struct TableKey {
    pub kind: TableKind,
    pub n_eff: usize,
    pub half_range: f64,
    pub min_samples: usize,
    pub tolerance: f64,
}

fn digest(spectrum: &BoundSpectrum, key: &TableKey) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(MAGIC);
    h.update(FORMAT_VERSION.to_le_bytes());
    for w in spectrum.params().fingerprint() {
        h.update(w.to_le_bytes());
    }
    h.update(spectrum.grid().half_width().to_bits().to_le_bytes());
    h.update((spectrum.grid().n_points() as u64).to_le_bytes());
    h.update([key.kind as u8]);
    h.update((key.n_eff as u64).to_le_bytes());
    h.update(key.half_range.to_bits().to_le_bytes());
    h.update((key.min_samples as u64).to_le_bytes());
    h.update(key.tolerance.to_bits().to_le_bytes());
    h.finalize().into()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, spectrum: &BoundSpectrum, key: &TableKey) -> PathBuf {
        let d = digest(spectrum, key);
        self.dir
            .join(format!("{}-{}.tbl", key.kind.name(), hex(&d[..16])))
    }

    /// Load the table for `key`, building and storing it on a miss.
    pub fn get_or_build(&self, spectrum: &BoundSpectrum, key: TableKey) -> Result<OperatorTable> {
        let path = self.path_for(spectrum, &key);
        if let Ok(t) = self.load(&path, spectrum, &key) {
            return Ok(t);
        }
        let t = OperatorTable::build_adaptive(
            spectrum,
            key.n_eff,
            key.kind,
            key.half_range,
            key.min_samples,
            key.tolerance,
        )?;
        self.store(&path, spectrum, &key, &t)?;
        Ok(t)
    }

    fn store(
        &self,
        path: &Path,
        spectrum: &BoundSpectrum,
        key: &TableKey,
        t: &OperatorTable,
    ) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&digest(spectrum, key));
        buf.extend_from_slice(&(t.n_stored() as u64).to_le_bytes());
        buf.extend_from_slice(&t.worst_probe_error.to_le_bytes());
        match &t.data {
            TableData::Boost(ms) => {
                for m in ms {
                    for c in m.iter() {
                        buf.extend_from_slice(&c.re.to_le_bytes());
                        buf.extend_from_slice(&c.im.to_le_bytes());
                    }
                }
            }
            TableData::Frame(ms) => {
                for m in ms {
                    for x in m.iter() {
                        buf.extend_from_slice(&x.to_le_bytes());
                    }
                }
            }
        }
        let tmp = path.with_extension("tmp");
        fs::File::create(&tmp)?.write_all(&buf)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    fn load(&self, path: &Path, spectrum: &BoundSpectrum, key: &TableKey) -> Result<OperatorTable> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut r = Reader {
            bytes: &bytes,
            pos: 0,
        };
        if r.take(4)? != MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        if u32::from_le_bytes(r.take(4)?.try_into().unwrap()) != FORMAT_VERSION {
            return Err(Error::Cache("format version mismatch".into()));
        }
        if r.take(32)? != digest(spectrum, key) {
            return Err(Error::Cache("key mismatch".into()));
        }
        let stored = r.u64()? as usize;
        let worst = r.f64()?;
        let n = key.n_eff;
        let data = match key.kind {
            TableKind::Boost => TableData::Boost(
                (0..stored)
                    .map(|_| {
                        let v = (0..n * n)
                            .map(|_| Ok(C64::new(r.f64()?, r.f64()?)))
                            .collect::<Result<Vec<_>>>()?;
                        Ok(nd::Array2::from_shape_vec((n, n), v).expect("length checked"))
                    })
                    .collect::<Result<_>>()?,
            ),
            TableKind::Frame => TableData::Frame(
                (0..stored)
                    .map(|_| {
                        let v = (0..n * n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
                        Ok(nd::Array2::from_shape_vec((n, n), v).expect("length checked"))
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        if r.pos != bytes.len() {
            return Err(Error::Cache("trailing bytes".into()));
        }
        Ok(OperatorTable {
            kind: key.kind,
            n_eff: n,
            params: *spectrum.params(),
            half_range: key.half_range,
            data,
            worst_probe_error: worst,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Cache("truncated file".into()));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{PhysicalParams, SpatialGrid};

    #[test]
    fn round_trip_and_invalidation() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::new(dir.path()).unwrap();
        let p = PhysicalParams::reference();
        let s = BoundSpectrum::compute(&p, &SpatialGrid::default_for(&p)).unwrap();
        let key = TableKey {
            kind: TableKind::Boost,
            n_eff: 10,
            half_range: 0.005,
            min_samples: 60,
            tolerance: 1e-6,
        };
        let built = cache.get_or_build(&s, key).unwrap();
        let path = cache.path_for(&s, &key);
        assert!(path.exists());
        let loaded = cache.load(&path, &s, &key).unwrap();
        assert_eq!(loaded.n_stored(), built.n_stored());
        for k in 0..built.n_stored() {
            assert_eq!(loaded.boost_node(k), built.boost_node(k));
        }

        let p2 = PhysicalParams::rb87(250.0).unwrap();
        let s2 = BoundSpectrum::compute(&p2, &SpatialGrid::default_for(&p2)).unwrap();
        assert!(cache.load(&path, &s2, &key).is_err());
        assert_ne!(cache.path_for(&s2, &key), path);

        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        fs::write(&path, bytes).unwrap();
        assert!(cache.load(&path, &s, &key).is_err());
        let rebuilt = cache.get_or_build(&s, key).unwrap();
        assert_eq!(rebuilt.n_stored(), built.n_stored());
    }
}
