//! Parameter checkpoints: flat binary `(name, shape, values)` records.
//!
//! Values round-trip bit-exactly; a load validates names and shapes
//! against the receiving parameters.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::param::Param;
use super::tensor::Tensor;
use super::NnError;

const MAGIC: &[u8; 8] = b"CKPT\x00\x01\x00\x00";

pub fn save(path: &Path, params: &[Param]) -> Result<(), NnError> {
    let file = File::create(path).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    let mut w = BufWriter::new(file);
    let io = |e: std::io::Error| NnError::Checkpoint(e.to_string());
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&(params.len() as u32).to_le_bytes()).map_err(io)?;
    for p in params {
        let name = p.name();
        let bytes = name.as_bytes();
        w.write_all(&(bytes.len() as u32).to_le_bytes()).map_err(io)?;
        w.write_all(bytes).map_err(io)?;
        let value = p.value();
        let shape = value.shape();
        w.write_all(&(shape.len() as u32).to_le_bytes()).map_err(io)?;
        for &d in shape {
            w.write_all(&(d as u64).to_le_bytes()).map_err(io)?;
        }
        for &v in value.data() {
            w.write_all(&v.to_bits().to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn load(path: &Path) -> Result<Vec<(String, Tensor)>, NnError> {
    let file = File::open(path).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    let mut r = BufReader::new(file);
    let io = |e: std::io::Error| NnError::Checkpoint(e.to_string());

    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(NnError::Checkpoint("bad checkpoint magic".into()));
    }
    let count = read_u32(&mut r)? as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name).map_err(io)?;
        let name = String::from_utf8(name).map_err(|e| NnError::Checkpoint(e.to_string()))?;
        let ndim = read_u32(&mut r)? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(io)?;
            shape.push(u64::from_le_bytes(b) as usize);
        }
        let n: usize = shape.iter().product();
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(io)?;
            data.push(f64::from_bits(u64::from_le_bytes(b)));
        }
        out.push((name, Tensor::new(shape, data)));
    }
    Ok(out)
}

/// Load a checkpoint into existing parameters, matched by name.
pub fn load_into(path: &Path, params: &[Param]) -> Result<(), NnError> {
    let records = load(path)?;
    for p in params {
        let name = p.name();
        let rec = records
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| NnError::Checkpoint(format!("missing parameter {name}")))?;
        if rec.1.shape() != p.shape().as_slice() {
            return Err(NnError::Checkpoint(format!(
                "shape mismatch for {name}: {:?} vs {:?}",
                rec.1.shape(),
                p.shape()
            )));
        }
        p.set_value(rec.1.clone());
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, NnError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roundtrip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = Param::new("net.w", Tensor::randn(&[4, 3], &mut rng));
        let b = Param::new("net.b", Tensor::randn(&[3], &mut rng));
        let dir = std::env::temp_dir().join(format!("ckpt-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.ckpt");
        save(&path, &[a.clone(), b.clone()]).unwrap();

        let a2 = Param::new("net.w", Tensor::zeros(&[4, 3]));
        let b2 = Param::new("net.b", Tensor::zeros(&[3]));
        load_into(&path, &[a2.clone(), b2.clone()]).unwrap();
        // Bit-exact: compare the raw bits, not approximate equality.
        let bits = |t: Tensor| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a.value()), bits(a2.value()));
        assert_eq!(bits(b.value()), bits(b2.value()));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn missing_name_is_an_error() {
        let a = Param::new("x", Tensor::zeros(&[2]));
        let dir = std::env::temp_dir().join(format!("ckpt-test2-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("miss.ckpt");
        save(&path, &[a]).unwrap();
        let other = Param::new("y", Tensor::zeros(&[2]));
        assert!(load_into(&path, &[other]).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
