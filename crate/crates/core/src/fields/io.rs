//! FRF1 container: little-endian binary files for scalar, vector, tensor and
//! velocity fields, plus flow maps (vector file with a Jacobian extension).
//!
//! Header layout (byte offsets):
//!
//! | offset | content |
//! |-------:|---------|
//! | 0  | magic `FRF1` |
//! | 4  | version, u32 = 1 |
//! | 8  | kind, u32: 0 scalar, 1 vector, 2 tensor, 3 velocity |
//! | 12 | dims, 3 x u32 |
//! | 24 | bounds, 6 x f64 `(a1, b1, a2, b2, a3, b3)` |
//! | 72 | velocity only: horizon f64, time nodes u32, margin u32 |
//!
//! The payload follows as f64 values. Vector components are stored one after
//! another; tensors store six values per voxel `(xx, xy, xz, yy, yz, zz)`;
//! velocity snapshots are time-major with three component blocks each.

use std::fs;
use std::path::Path;

use super::{Grid, ScalarField, VectorField, VelocityField};
use crate::error::{Error, Result};
use crate::flow::{Direction, FlowMap};
use crate::spd::{Mat3, SymMat3, TensorImage};

pub const MAGIC: &[u8; 4] = b"FRF1";
pub const VERSION: u32 = 1;
const JAC_MAGIC: &[u8; 4] = b"JAC9";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Scalar = 0,
    Vector = 1,
    Tensor = 2,
    Velocity = 3,
}

impl FieldKind {
    fn from_tag(tag: u32) -> Option<Self> {
        Some(match tag {
            0 => FieldKind::Scalar,
            1 => FieldKind::Vector,
            2 => FieldKind::Tensor,
            3 => FieldKind::Velocity,
            _ => return None,
        })
    }
}

/// Any field that can live in an FRF1 file.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Scalar(ScalarField),
    Vector(VectorField),
    Tensor(TensorImage),
    Velocity(VelocityField),
}

impl Field {
    pub fn kind(&self) -> FieldKind {
        match self {
            Field::Scalar(_) => FieldKind::Scalar,
            Field::Vector(_) => FieldKind::Vector,
            Field::Tensor(_) => FieldKind::Tensor,
            Field::Velocity(_) => FieldKind::Velocity,
        }
    }

    pub fn grid(&self) -> &Grid {
        match self {
            Field::Scalar(f) => f.grid(),
            Field::Vector(f) => f.grid(),
            Field::Tensor(f) => f.grid(),
            Field::Velocity(f) => f.grid(),
        }
    }
}

impl From<ScalarField> for Field {
    fn from(f: ScalarField) -> Self {
        Field::Scalar(f)
    }
}

impl From<VectorField> for Field {
    fn from(f: VectorField) -> Self {
        Field::Vector(f)
    }
}

impl From<TensorImage> for Field {
    fn from(f: TensorImage) -> Self {
        Field::Tensor(f)
    }
}

impl From<VelocityField> for Field {
    fn from(f: VelocityField) -> Self {
        Field::Velocity(f)
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f64s(&mut self, vs: &[f64]) {
        for &v in vs {
            self.f64(v);
        }
    }

    fn header(&mut self, kind: FieldKind, grid: &Grid) {
        self.0.extend_from_slice(MAGIC);
        self.u32(VERSION);
        self.u32(kind as u32);
        for n in grid.dims() {
            self.u32(n as u32);
        }
        for (lo, hi) in grid.bounds() {
            self.f64(lo);
            self.f64(hi);
        }
    }

    fn vector(&mut self, v: &VectorField) {
        for c in v.components() {
            self.f64s(c.values());
        }
    }
}

/// Serializes a field to its FRF1 byte image.
pub fn encode_field(field: &Field) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.header(field.kind(), field.grid());
    match field {
        Field::Scalar(f) => w.f64s(f.values()),
        Field::Vector(f) => w.vector(f),
        Field::Tensor(t) => {
            for m in t.voxels() {
                w.f64s(&m.0);
            }
        }
        Field::Velocity(v) => {
            w.f64(v.horizon());
            w.u32(v.time_nodes() as u32);
            w.u32(v.margin() as u32);
            for s in v.snapshots() {
                w.vector(s);
            }
        }
    }
    w.0
}

pub fn write_field(path: impl AsRef<Path>, field: &Field) -> Result<()> {
    fs::write(path, encode_field(field))?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn fail(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Format { offset: offset as u64, message: message.into() }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(self.fail(
                self.pos,
                format!(
                    "unexpected end of file: need {n} bytes, {} remain",
                    self.bytes.len() - self.pos
                ),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        let at = self.pos;
        let v = f64::from_le_bytes(self.take(8)?.try_into().unwrap());
        if !v.is_finite() {
            return Err(self.fail(at, format!("non-finite value {v}")));
        }
        Ok(v)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    fn header(&mut self) -> Result<(FieldKind, Grid)> {
        let magic = self.take(4)?;
        if magic != MAGIC {
            return Err(self.fail(0, format!("bad magic {magic:?}, expected \"FRF1\"")));
        }
        let version = self.u32()?;
        if version != VERSION {
            return Err(self.fail(4, format!("unsupported version {version}, expected {VERSION}")));
        }
        let tag = self.u32()?;
        let kind = FieldKind::from_tag(tag).ok_or_else(|| self.fail(8, format!("unknown kind tag {tag}")))?;
        let mut dims = [0usize; 3];
        for d in &mut dims {
            *d = self.u32()? as usize;
        }
        let mut bounds = [(0.0, 0.0); 3];
        for b in &mut bounds {
            *b = (self.f64()?, self.f64()?);
        }
        let grid = Grid::new(bounds, dims).map_err(|e| self.fail(12, format!("invalid grid: {e}")))?;
        Ok((kind, grid))
    }

    fn scalar(&mut self, grid: Grid) -> Result<ScalarField> {
        Ok(ScalarField::from_vec_unchecked(grid, self.f64s(grid.len())?))
    }

    fn vector(&mut self, grid: Grid) -> Result<VectorField> {
        let comps = [self.scalar(grid)?, self.scalar(grid)?, self.scalar(grid)?];
        VectorField::new(comps)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(self.fail(
                self.pos,
                format!("{} trailing bytes after payload", self.bytes.len() - self.pos),
            ));
        }
        Ok(())
    }
}

/// Parses an FRF1 byte image.
pub fn decode_field(bytes: &[u8]) -> Result<Field> {
    let mut r = Reader { bytes, pos: 0 };
    let (kind, grid) = r.header()?;
    let field = match kind {
        FieldKind::Scalar => Field::Scalar(r.scalar(grid)?),
        FieldKind::Vector => Field::Vector(r.vector(grid)?),
        FieldKind::Tensor => {
            let at = r.pos;
            let raw = r.f64s(6 * grid.len())?;
            let voxels = raw
                .chunks_exact(6)
                .map(|c| SymMat3(c.try_into().unwrap()))
                .collect();
            Field::Tensor(TensorImage::new(grid, voxels).map_err(|e| match e {
                e @ Error::NotSpd { .. } => e,
                other => r.fail(at, other.to_string()),
            })?)
        }
        FieldKind::Velocity => {
            let at = r.pos;
            let horizon = r.f64()?;
            let nt = r.u32()? as usize;
            let margin = r.u32()? as usize;
            let snaps = (0..nt).map(|_| r.vector(grid)).collect::<Result<Vec<_>>>()?;
            Field::Velocity(
                VelocityField::new(grid, horizon, snaps, margin).map_err(|e| r.fail(at, e.to_string()))?,
            )
        }
    };
    r.finish()?;
    Ok(field)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    decode_field(&fs::read(path)?)
}

fn wrong_kind(expected: FieldKind, got: FieldKind) -> Error {
    Error::Format { offset: 8, message: format!("expected a {expected:?} field, found {got:?}") }
}

pub fn read_tensor_image(path: impl AsRef<Path>) -> Result<TensorImage> {
    match read_field(path)? {
        Field::Tensor(t) => Ok(t),
        other => Err(wrong_kind(FieldKind::Tensor, other.kind())),
    }
}

pub fn read_velocity(path: impl AsRef<Path>) -> Result<VelocityField> {
    match read_field(path)? {
        Field::Velocity(v) => Ok(v),
        other => Err(wrong_kind(FieldKind::Velocity, other.kind())),
    }
}

/// Flow map: vector file of positions followed by `JAC9`, direction (u32,
/// 0 forward, 1 inverse), step count (u32) and the nine Jacobian entries as
/// row-major scalar blocks.
pub fn encode_flow_map(map: &FlowMap) -> Vec<u8> {
    let mut w = Writer(encode_field(&Field::Vector(map.positions().clone())));
    w.0.extend_from_slice(JAC_MAGIC);
    w.u32(match map.direction() {
        Direction::Forward => 0,
        Direction::Inverse => 1,
    });
    w.u32(map.n_steps() as u32);
    for e in 0..9 {
        for j in map.jacobians() {
            w.f64(j.0[e]);
        }
    }
    w.0
}

pub fn decode_flow_map(bytes: &[u8]) -> Result<FlowMap> {
    let mut r = Reader { bytes, pos: 0 };
    let (kind, grid) = r.header()?;
    if kind != FieldKind::Vector {
        return Err(wrong_kind(FieldKind::Vector, kind));
    }
    let positions = r.vector(grid)?;
    let at = r.pos;
    if r.take(4)? != JAC_MAGIC {
        return Err(r.fail(at, "missing Jacobian block, expected \"JAC9\""));
    }
    let direction = match r.u32()? {
        0 => Direction::Forward,
        1 => Direction::Inverse,
        d => return Err(r.fail(at + 4, format!("unknown direction tag {d}"))),
    };
    let n_steps = r.u32()? as usize;
    let n = grid.len();
    let mut jac = vec![Mat3([0.0; 9]); n];
    for e in 0..9 {
        for j in jac.iter_mut() {
            j.0[e] = r.f64()?;
        }
    }
    r.finish()?;
    FlowMap::new(positions, jac, direction, n_steps).map_err(|e| r.fail(at, e.to_string()))
}

pub fn write_flow_map(path: impl AsRef<Path>, map: &FlowMap) -> Result<()> {
    fs::write(path, encode_flow_map(map))?;
    Ok(())
}

pub fn read_flow_map(path: impl AsRef<Path>) -> Result<FlowMap> {
    decode_flow_map(&fs::read(path)?)
}
