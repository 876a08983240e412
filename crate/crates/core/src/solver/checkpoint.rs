//! Binary checkpoint container.
//!
//! Layout, all little-endian: magic `NLSTORI\0`, `u32` version, `u64` grid_n,
//! `i64` K_alias, `f64` ω², `u128` a, `u128` b, `u8` torus kind (0 rational,
//! 1 irrational), `f64` time, `f64` s, `u64` seed, then `(2K+1)²` coefficients
//! as `(re, im)` `f64` pairs in row-major mode order.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::atomic_write;
use crate::lattice::{TorusKind, TorusSpec};
use crate::solver::field::SpectralField;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"NLSTORI\0";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub field: SpectralField,
    pub s: f64,
    pub seed: u64,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let f = &self.field;
        let t = f.torus();
        let mut out = Vec::with_capacity(96 + 16 * f.coeffs().len());
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(f.grid_n() as u64).to_le_bytes());
        out.extend_from_slice(&f.k_alias().to_le_bytes());
        out.extend_from_slice(&t.omega_sq().to_le_bytes());
        out.extend_from_slice(&t.numerator().to_le_bytes());
        out.extend_from_slice(&t.denominator().to_le_bytes());
        out.push(match t.kind() {
            TorusKind::Rational => 0,
            TorusKind::Irrational => 1,
        });
        out.extend_from_slice(&f.time.to_le_bytes());
        out.extend_from_slice(&self.s.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        for c in f.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != CHECKPOINT_MAGIC {
            return Err(Error::Format("not a checkpoint (bad magic)".into()));
        }
        let version = u32::from_le_bytes(r.array()?);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {version}")));
        }
        let grid_n = u64::from_le_bytes(r.array()?) as usize;
        let k_alias = i64::from_le_bytes(r.array()?);
        let omega_sq = f64::from_le_bytes(r.array()?);
        let a = u128::from_le_bytes(r.array()?);
        let b = u128::from_le_bytes(r.array()?);
        let kind = match r.take(1)?[0] {
            0 => TorusKind::Rational,
            1 => TorusKind::Irrational,
            k => return Err(Error::Format(format!("unknown torus kind {k}"))),
        };
        let torus = TorusSpec::new(omega_sq, kind)?;
        if (torus.numerator(), torus.denominator()) != (a, b) {
            return Err(Error::Format(format!(
                "stored fraction {a}/{b} does not match ω² = {omega_sq}"
            )));
        }
        let time = f64::from_le_bytes(r.array()?);
        let s = f64::from_le_bytes(r.array()?);
        let seed = u64::from_le_bytes(r.array()?);
        if !(1..=1 << 20).contains(&k_alias) {
            return Err(Error::Format(format!("implausible K_alias {k_alias}")));
        }
        let side = (2 * k_alias + 1) as usize;
        let count = side * side;
        if r.bytes.len() - r.pos != 16 * count {
            return Err(Error::Format(format!(
                "expected {} coefficient bytes, found {}",
                16 * count,
                r.bytes.len() - r.pos
            )));
        }
        let coeffs = (0..count)
            .map(|_| -> Result<Complex64> {
                let re = f64::from_le_bytes(r.array()?);
                let im = f64::from_le_bytes(r.array()?);
                Ok(Complex64::new(re, im))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut field = SpectralField::from_coeffs(torus, grid_n, k_alias, coeffs)
            .map_err(|e| Error::Format(e.to_string()))?;
        field.time = time;
        Ok(Self { field, s, seed })
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
            return Err(Error::Format("checkpoint truncated".into()));
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
}

/// Writes the container to `path` and, if given, a JSON sidecar next to it
/// (`<path>.json`).
pub fn write_checkpoint(
    path: &Path,
    checkpoint: &Checkpoint,
    sidecar: Option<&serde_json::Value>,
) -> Result<()> {
    atomic_write(path, &checkpoint.to_bytes())?;
    if let Some(meta) = sidecar {
        let mut name = path.as_os_str().to_owned();
        name.push(".json");
        atomic_write(Path::new(&name), serde_json::to_string_pretty(meta)?.as_bytes())?;
    }
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::from_bytes(&std::fs::read(path)?)
}
