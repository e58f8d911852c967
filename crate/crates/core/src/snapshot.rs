//! Self-describing binary field snapshots.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! b"WKBF"  u16 version  u16 dim
//! f64 × dim lengths   u32 × dim n_x   u32 n_theta   f64 t
//! u16 field count, then per field:
//!   u16 name length, UTF-8 name, u8 kind, payload
//! ```
//! Kinds: 0 spatial scalar (n_space values), 1 loop field (n_space × n_theta
//! collocation values, x-axes outer and θ innermost, θⱼ = 2πj/n_theta),
//! 2 phase (i64 × dim winding, then n_space values of the periodic part).
//! Spatial indices are row-major with the last axis fastest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::extension::ExtendedState;
use crate::lbep::BaseState;
use crate::torus_field::{LoopField, PhaseField, ScalarField, TorusGrid};
use crate::wave_mean_flow::MeanWaveState;

pub const MAGIC: &[u8; 4] = b"WKBF";
pub const VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum SnapshotField {
    Scalar(ScalarField),
    Loop(LoopField),
    Phase(PhaseField),
}

impl SnapshotField {
    fn kind(&self) -> u8 {
        match self {
            SnapshotField::Scalar(_) => 0,
            SnapshotField::Loop(_) => 1,
            SnapshotField::Phase(_) => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub grid: TorusGrid,
    pub t: f64,
    pub fields: Vec<(String, SnapshotField)>,
}

impl Snapshot {
    pub fn new(grid: TorusGrid, t: f64) -> Self {
        Snapshot { grid, t, fields: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, field: SnapshotField) -> &mut Self {
        self.fields.push((name.into(), field));
        self
    }

    pub fn get(&self, name: &str) -> Option<&SnapshotField> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    pub fn from_base(s: &BaseState) -> Self {
        let mut snap = Snapshot::new(*s.grid(), s.t);
        snap.push("rho", SnapshotField::Scalar(s.rho.clone()));
        for (a, c) in s.p.comps().iter().enumerate() {
            snap.push(format!("p{a}"), SnapshotField::Scalar(c.clone()));
        }
        for (a, c) in s.h.comps().iter().enumerate() {
            snap.push(format!("h{a}"), SnapshotField::Scalar(c.clone()));
        }
        snap.push("chi", SnapshotField::Scalar(s.chi.clone()));
        snap
    }

    pub fn from_extended(s: &ExtendedState) -> Self {
        let mut snap = Snapshot::new(*s.grid(), s.t);
        snap.push("rho", SnapshotField::Loop(s.rho.clone()));
        for (a, c) in s.p.comps().iter().enumerate() {
            snap.push(format!("p{a}"), SnapshotField::Loop(c.clone()));
        }
        for (a, c) in s.h.comps().iter().enumerate() {
            snap.push(format!("h{a}"), SnapshotField::Loop(c.clone()));
        }
        snap.push("chi", SnapshotField::Loop(s.chi.clone()));
        snap.push("S", SnapshotField::Phase(s.phase.clone()));
        snap
    }

    pub fn from_mean(s: &MeanWaveState) -> Self {
        let mut snap = Snapshot::new(*s.grid(), s.t);
        snap.push("rho", SnapshotField::Scalar(s.rho.clone()));
        for (a, c) in s.p.comps().iter().enumerate() {
            snap.push(format!("p{a}"), SnapshotField::Scalar(c.clone()));
        }
        snap.push("chi", SnapshotField::Scalar(s.chi.clone()));
        snap.push("action", SnapshotField::Scalar(s.action.clone()));
        snap.push("S", SnapshotField::Phase(s.phase.clone()));
        snap
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let g = &self.grid;
        w.write_all(MAGIC)?;
        w.write_u16::<LE>(VERSION)?;
        w.write_u16::<LE>(g.dim() as u16)?;
        for &l in g.lengths() {
            w.write_f64::<LE>(l)?;
        }
        for &n in g.n_x() {
            w.write_u32::<LE>(n as u32)?;
        }
        w.write_u32::<LE>(g.n_theta() as u32)?;
        w.write_f64::<LE>(self.t)?;
        w.write_u16::<LE>(self.fields.len() as u16)?;
        for (name, field) in &self.fields {
            w.write_u16::<LE>(name.len() as u16)?;
            w.write_all(name.as_bytes())?;
            w.write_u8(field.kind())?;
            let values = match field {
                SnapshotField::Scalar(f) => f.values().to_vec(),
                SnapshotField::Loop(f) => f.values(),
                SnapshotField::Phase(f) => {
                    for &m in f.winding() {
                        w.write_i64::<LE>(m)?;
                    }
                    f.periodic().values().to_vec()
                }
            };
            for v in values {
                w.write_f64::<LE>(v)?;
            }
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = r.read_u16::<LE>()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let dim = r.read_u16::<LE>()? as usize;
        if !(1..=2).contains(&dim) {
            return Err(Error::Format(format!("dimension {dim}")));
        }
        let lengths = (0..dim).map(|_| r.read_f64::<LE>()).collect::<std::io::Result<Vec<_>>>()?;
        let n_x = (0..dim)
            .map(|_| r.read_u32::<LE>().map(|n| n as usize))
            .collect::<std::io::Result<Vec<_>>>()?;
        let n_theta = r.read_u32::<LE>()? as usize;
        let grid = TorusGrid::new(&lengths, &n_x, n_theta)?;
        let t = r.read_f64::<LE>()?;
        let count = r.read_u16::<LE>()?;
        let read_values = |r: &mut dyn Read, n: usize| -> Result<Vec<f64>> {
            let mut v = vec![0.0; n];
            r.read_f64_into::<LE>(&mut v)?;
            Ok(v)
        };
        let mut snap = Snapshot::new(grid, t);
        for _ in 0..count {
            let len = r.read_u16::<LE>()? as usize;
            let mut name = vec![0u8; len];
            r.read_exact(&mut name)?;
            let name = String::from_utf8(name).map_err(|e| Error::Format(e.to_string()))?;
            let field = match r.read_u8()? {
                0 => SnapshotField::Scalar(ScalarField::new(grid, read_values(&mut r, grid.n_space())?)?),
                1 => SnapshotField::Loop(LoopField::from_values(grid, &read_values(&mut r, grid.n_space() * n_theta)?)?),
                2 => {
                    let winding = (0..dim).map(|_| r.read_i64::<LE>()).collect::<std::io::Result<Vec<_>>>()?;
                    let periodic = ScalarField::new(grid, read_values(&mut r, grid.n_space())?)?;
                    SnapshotField::Phase(PhaseField::new(&winding, periodic)?)
                }
                k => return Err(Error::Format(format!("unknown field kind {k}"))),
            };
            snap.fields.push((name, field));
        }
        Ok(snap)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Snapshot::read_from(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_all_kinds() {
        let g = TorusGrid::new(&[1.0, 2.0], &[8, 10], 8).unwrap();
        let mut snap = Snapshot::new(g, 0.25);
        snap.push("a", SnapshotField::Scalar(ScalarField::from_fn(g, |x| x[0] + 3.0 * x[1])));
        snap.push("b", SnapshotField::Loop(LoopField::from_fn(g, |x, t| (x[1] + t).sin())));
        snap.push("S", SnapshotField::Phase(PhaseField::new(&[2, -1], ScalarField::constant(g, 0.5)).unwrap()));
        let mut buf = Vec::new();
        snap.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], MAGIC);
        let back = Snapshot::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.grid, g);
        assert_eq!(back.t, 0.25);
        assert_eq!(back.get("a"), snap.get("a"));
        assert_eq!(back.get("S"), snap.get("S"));
        match (back.get("b").unwrap(), snap.get("b").unwrap()) {
            (SnapshotField::Loop(x), SnapshotField::Loop(y)) => assert!(x.sub(y).max_fluctuation() < 1e-14),
            _ => panic!("kind changed"),
        }
    }

    #[test]
    fn rejects_bad_magic() {
        assert!(matches!(Snapshot::read_from(&b"NOPE\x01\x00"[..]), Err(Error::Format(_))));
    }
}
