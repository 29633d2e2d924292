//! Binary field snapshots and solver checkpoints.
//!
//! Snapshot layout, all little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 4 | magic `MHD2` |
//! | 4 | version `u32` (1) |
//! | 4 | `n` as `u32` |
//! | 8 | box length `L` as `f64` |
//! | 8 | time as `f64` |
//! | 4 | field count `u32` |
//! | 8 n² per field | physical values as `f64`, row-major, `x1` index first |
//!
//! State snapshots hold four fields: `u1, u2, b1, b2`.
//!
//! A checkpoint is a state snapshot followed by a metadata block: magic
//! `CKPT`, version `u32`, `t0 f64`, `step_index u64`, `dt f64`,
//! `cumulative_dissipation f64`, `initial_energy f64`, a `u32`-length-prefixed
//! UTF-8 config hash, then the Fourier coefficients of `z+_1, z+_2, z-_1,
//! z-_2` as `(re, im)` `f64` pairs. Restarts read the coefficients, so they
//! continue bit-for-bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::solver::Checkpoint;
use crate::spectral::{Grid, MHDState, SpectralField, VectorField};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"MHD2";
pub const SNAPSHOT_VERSION: u32 = 1;
pub const CHECKPOINT_MAGIC: [u8; 4] = *b"CKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n: usize,
    pub length: f64,
    pub time: f64,
    pub fields: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn from_state<T: Real>(state: &MHDState<T>) -> Self {
        let g = state.grid();
        let fields = [&state.u.c1, &state.u.c2, &state.b.c1, &state.b.c2]
            .iter()
            .map(|f| f.to_physical().into_iter().map(|v| v.to_f64_lossy()).collect())
            .collect();
        Self {
            n: g.n(),
            length: g.length().to_f64_lossy(),
            time: state.time.to_f64_lossy(),
            fields,
        }
    }

    pub fn grid<T: Real>(&self) -> Result<Grid<T>> {
        Grid::new(self.n, T::lit(self.length))
    }

    /// Transforms the four fields back; the state must pass validation.
    pub fn to_state<T: Real>(&self) -> Result<MHDState<T>> {
        if self.fields.len() != 4 {
            return Err(Error::Snapshot(format!(
                "a state needs 4 fields, file has {}",
                self.fields.len()
            )));
        }
        let g = self.grid::<T>()?;
        let f: Vec<SpectralField<T>> = self
            .fields
            .iter()
            .map(|v| {
                let v: Vec<T> = v.iter().map(|&x| T::lit(x)).collect();
                SpectralField::from_physical(&g, &v)
            })
            .collect::<Result<_>>()?;
        let [u1, u2, b1, b2]: [SpectralField<T>; 4] = f.try_into().expect("four fields");
        MHDState::new(VectorField::new(u1, u2)?, VectorField::new(b1, b2)?, T::lit(self.time))
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let n = u32::try_from(self.n).map_err(|_| Error::Snapshot("n does not fit in u32".into()))?;
        w.write_all(&SNAPSHOT_MAGIC)?;
        w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&self.length.to_le_bytes())?;
        w.write_all(&self.time.to_le_bytes())?;
        w.write_all(&(self.fields.len() as u32).to_le_bytes())?;
        for f in &self.fields {
            if f.len() != self.n * self.n {
                return Err(Error::Snapshot(format!("field has {} values, expected n² = {}", f.len(), self.n * self.n)));
            }
            for v in f {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if magic != SNAPSHOT_MAGIC {
            return Err(Error::Snapshot(format!("bad magic {magic:?}")));
        }
        let version = read_u32(r)?;
        if version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let n = read_u32(r)? as usize;
        let length = read_f64(r)?;
        let time = read_f64(r)?;
        let count = read_u32(r)? as usize;
        if n == 0 || n > 1 << 16 || count > 64 {
            return Err(Error::Snapshot(format!("implausible header: n = {n}, fields = {count}")));
        }
        let fields = (0..count)
            .map(|_| (0..n * n).map(|_| read_f64(r)).collect::<Result<Vec<f64>>>())
            .collect::<Result<_>>()?;
        Ok(Self { n, length, time, fields })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Snapshot("file is truncated".into())
    } else {
        Error::Io(e)
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn write_checkpoint<T: Real>(w: &mut impl Write, cp: &Checkpoint<T>, config_hash: &str) -> Result<()> {
    Snapshot::from_state(&cp.state()).write_to(w)?;
    w.write_all(&CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&cp.t0.to_le_bytes())?;
    w.write_all(&cp.step_index.to_le_bytes())?;
    w.write_all(&cp.dt.to_le_bytes())?;
    w.write_all(&cp.cumulative_dissipation.to_le_bytes())?;
    w.write_all(&cp.initial_energy.to_le_bytes())?;
    w.write_all(&(config_hash.len() as u32).to_le_bytes())?;
    w.write_all(config_hash.as_bytes())?;
    for f in [&cp.zplus.c1, &cp.zplus.c2, &cp.zminus.c1, &cp.zminus.c2] {
        for c in f.coeffs() {
            w.write_all(&c.re.to_f64_lossy().to_le_bytes())?;
            w.write_all(&c.im.to_f64_lossy().to_le_bytes())?;
        }
    }
    Ok(())
}

/// A checkpoint and the config hash it was written under.
pub fn read_checkpoint<T: Real>(r: &mut impl Read) -> Result<(Checkpoint<T>, String)> {
    let snap = Snapshot::read_from(r)?;
    let g = snap.grid::<T>()?;
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Snapshot("snapshot has no checkpoint block".into()));
    }
    let version = read_u32(r)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Snapshot(format!("unsupported checkpoint version {version}")));
    }
    let t0 = read_f64(r)?;
    let step_index = read_u64(r)?;
    let dt = read_f64(r)?;
    let cumulative_dissipation = read_f64(r)?;
    let initial_energy = read_f64(r)?;
    let len = read_u32(r)? as usize;
    if len > 1024 {
        return Err(Error::Snapshot("implausible config hash length".into()));
    }
    let mut hash = vec![0u8; len];
    r.read_exact(&mut hash).map_err(truncated)?;
    let hash = String::from_utf8(hash).map_err(|_| Error::Snapshot("config hash is not UTF-8".into()))?;
    let mut field = || -> Result<SpectralField<T>> {
        let coeffs = (0..g.len())
            .map(|_| Ok(Complex::new(T::lit(read_f64(r)?), T::lit(read_f64(r)?))))
            .collect::<Result<Vec<_>>>()?;
        SpectralField::from_coeffs(&g, coeffs, true)
    };
    let zplus = VectorField::new(field()?, field()?)?;
    let zminus = VectorField::new(field()?, field()?)?;
    Ok((
        Checkpoint {
            zplus,
            zminus,
            t0,
            step_index,
            dt,
            cumulative_dissipation,
            initial_energy,
        },
        hash,
    ))
}

/// Writes through a temporary file so a crash never leaves a torn checkpoint.
pub fn save_checkpoint<T: Real>(path: &Path, cp: &Checkpoint<T>, config_hash: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        write_checkpoint(&mut w, cp, config_hash)?;
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint<T: Real>(path: &Path) -> Result<(Checkpoint<T>, String)> {
    read_checkpoint(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ic::{generate, IcKind};
    use crate::solver::{Integrator, SolverOptions};

    fn state() -> MHDState<f64> {
        let g = Grid::new(16, 3.0).unwrap();
        let mut s = generate(&IcKind::decay_data(0.3, 0.1, 4), &g).unwrap();
        s.time = 0.25;
        s
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let snap = Snapshot::from_state(&state());
        let mut buf = Vec::new();
        snap.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 4 * 8 * 256);
        assert_eq!(&buf[..4], b"MHD2");
        let back = Snapshot::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, snap);
        let bits = |s: &Snapshot| s.fields.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&snap));
        let s2: MHDState<f64> = back.to_state().unwrap();
        assert_eq!(s2.time, 0.25);
        assert!((&s2.u - &state().u).c1.max_coeff() < 1e-16);
    }

    #[test]
    fn header_layout() {
        let snap = Snapshot::from_state(&state());
        let mut buf = Vec::new();
        snap.write_to(&mut buf).unwrap();
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(buf[12..20].try_into().unwrap()), 3.0);
        assert_eq!(f64::from_le_bytes(buf[20..28].try_into().unwrap()), 0.25);
        assert_eq!(u32::from_le_bytes(buf[28..32].try_into().unwrap()), 4);
        assert_eq!(f64::from_le_bytes(buf[32..40].try_into().unwrap()), snap.fields[0][0]);
    }

    #[test]
    fn rejects_corrupt_files() {
        let mut buf = Vec::new();
        Snapshot::from_state(&state()).write_to(&mut buf).unwrap();
        assert!(Snapshot::read_from(&mut &buf[..100]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(Snapshot::read_from(&mut bad.as_slice()).is_err());
        assert!(read_checkpoint::<f64>(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn checkpoint_restart_is_bit_exact() {
        let opts = SolverOptions {
            dt: 0.01,
            t_end: 0.2,
            ..SolverOptions::default()
        };
        let mut full = Integrator::new(&state(), &opts).unwrap();
        for _ in 0..10 {
            full.step().unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.bin");
        save_checkpoint(&path, &full.checkpoint(), "abc").unwrap();
        let (cp, hash) = load_checkpoint::<f64>(&path).unwrap();
        assert_eq!(hash, "abc");
        let mut resumed = Integrator::resume(&cp, &opts).unwrap();
        for _ in 0..10 {
            full.step().unwrap();
            resumed.step().unwrap();
        }
        let (a, b) = (full.state(), resumed.state());
        assert_eq!(a.time, b.time);
        assert_eq!(a.u.c1.coeffs(), b.u.c1.coeffs());
        assert_eq!(a.b.c2.coeffs(), b.b.c2.coeffs());
        assert_eq!(full.cumulative_dissipation(), resumed.cumulative_dissipation());
    }
}
