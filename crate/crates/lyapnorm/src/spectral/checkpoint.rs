//! Binary checkpoint format for spectral fields ("LYNF").
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic  b"LYNF"
//! 4       4     format version, u32 (currently 1)
//! 8       4     grid size N, u32
//! 12      1     rank, u8: 1 = scalar, 2 = vector
//! 13      ...   coefficients, f64 pairs (re, im), component-major:
//!               for each component, k1 = −N/2..N/2 outer, k2 inner,
//!               including the k = 0 slot (written as zeros).
//! ```
//!
//! Reads validate the header, the byte length, the mean-zero slots, and
//! Hermitian symmetry, so a checkpoint round-trips to the exact field that
//! produced it or fails loudly.

use super::{Rank, SpectralField, SpectralGrid};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"LYNF";
const VERSION: u32 = 1;

/// Serialize a field into the LYNF byte layout.
pub fn write_field<W: Write>(mut out: W, field: &SpectralField) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(field.grid().n() as u32).to_le_bytes())?;
    out.write_all(&[field.rank().components() as u8])?;
    let side = field.grid().side();
    for comp in 0..field.rank().components() {
        for i in 0..side * side {
            let c = field.component_slice(comp)[i];
            out.write_all(&c.re.to_le_bytes())?;
            out.write_all(&c.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Deserialize a field, re-attaching the standard dealias fraction for its N.
pub fn read_field<R: Read>(mut input: R) -> Result<SpectralField> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 13 {
        return Err(Error::Checkpoint("file shorter than the header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Checkpoint("bad magic (expected LYNF)".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {version} (expected {VERSION})"
        )));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let rank = match bytes[12] {
        1 => Rank::Scalar,
        2 => Rank::Vector,
        other => {
            return Err(Error::Checkpoint(format!(
                "rank byte must be 1 or 2, got {other}"
            )))
        }
    };
    let grid = SpectralGrid::standard(n)
        .map_err(|e| Error::Checkpoint(format!("invalid grid size N = {n}: {e}")))?;
    let side = grid.side();
    let expected = 13 + side * side * rank.components() * 16;
    if bytes.len() != expected {
        return Err(Error::Checkpoint(format!(
            "payload length {} does not match N = {n}, rank {} (expected {expected})",
            bytes.len(),
            rank.components()
        )));
    }
    let mut field = SpectralField::zero(grid, rank);
    let mut cursor = 13;
    for comp in 0..rank.components() {
        let slice = field.component_slice_mut(comp);
        for coeff in slice.iter_mut() {
            let re = f64::from_le_bytes(bytes[cursor..cursor + 8].try_into().unwrap());
            let im = f64::from_le_bytes(bytes[cursor + 8..cursor + 16].try_into().unwrap());
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Checkpoint("non-finite coefficient".into()));
            }
            *coeff = Complex64::new(re, im);
            cursor += 16;
        }
    }
    for comp in 0..rank.components() {
        let zero = field.coeff(comp, (0, 0));
        if zero.norm() != 0.0 {
            return Err(Error::Checkpoint(
                "k = 0 slot must be zero (fields are mean-zero)".into(),
            ));
        }
    }
    let res = field.hermitian_residual();
    if res > 1e-9 {
        return Err(Error::Checkpoint(format!(
            "coefficients are not Hermitian-symmetric (residual {res:.2e})"
        )));
    }
    Ok(field)
}

/// Write a field to a file path.
pub fn save(path: &std::path::Path, field: &SpectralField) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_field(std::io::BufWriter::new(file), field)
}

/// Read a field from a file path.
pub fn load(path: &std::path::Path) -> Result<SpectralField> {
    let file = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    fn sample_scalar() -> SpectralField {
        let grid = SpectralGrid::standard(16).unwrap();
        let mut rng = SeedStream::new(7).stream("checkpoint-test", 0);
        SpectralField::random_scalar(grid, &mut rng, 5, 1.0)
    }

    #[test]
    fn roundtrip_preserves_every_coefficient() {
        let f = sample_scalar();
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        let g = read_field(buf.as_slice()).unwrap();
        assert_eq!(f.grid(), g.grid());
        assert_eq!(f.rank(), g.rank());
        for k in f.grid().modes() {
            assert_eq!(f.coeff(0, k), g.coeff(0, k));
        }
    }

    #[test]
    fn roundtrip_vector_field() {
        let u = sample_scalar().biot_savart().unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        let v = read_field(buf.as_slice()).unwrap();
        for comp in 0..2 {
            for k in u.grid().modes() {
                assert_eq!(u.coeff(comp, k), v.coeff(comp, k));
            }
        }
    }

    #[test]
    fn header_layout_is_fixed() {
        let f = sample_scalar();
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(&buf[0..4], b"LYNF");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 16);
        assert_eq!(buf[12], 1);
        assert_eq!(buf.len(), 13 + 17 * 17 * 16);
    }

    #[test]
    fn corrupted_inputs_are_rejected() {
        let f = sample_scalar();
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();

        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            read_field(bad_magic.as_slice()),
            Err(Error::Checkpoint(_))
        ));

        let mut bad_version = buf.clone();
        bad_version[4] = 9;
        assert!(read_field(bad_version.as_slice()).is_err());

        let truncated = &buf[..buf.len() - 8];
        assert!(read_field(truncated).is_err());

        // Breaking one coefficient's conjugate partner must fail symmetry.
        let mut asymmetric = buf.clone();
        let idx = 13 + 16 * 40;
        asymmetric[idx..idx + 8].copy_from_slice(&1.0f64.to_le_bytes());
        assert!(read_field(asymmetric.as_slice()).is_err());

        assert!(read_field(&b"LYNF"[..]).is_err());
    }

    #[test]
    fn file_save_and_load() {
        let dir = std::env::temp_dir().join("lyapnorm-checkpoint-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.lynf");
        let f = sample_scalar();
        save(&path, &f).unwrap();
        let g = load(&path).unwrap();
        assert_eq!(f.coeff(0, (2, 1)), g.coeff(0, (2, 1)));
        std::fs::remove_dir_all(&dir).ok();
    }
}
