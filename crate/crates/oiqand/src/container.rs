//! Flat tensor container: `OIQW`, a little-endian `u64` header length, a JSON
//! header, then the raw little-endian `f32` payload.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use oiqa_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"OIQW";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: String,
    pub offset: u64,
    pub nbytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    #[serde(default)]
    pub meta: serde_json::Value,
    pub tensors: Vec<TensorEntry>,
}

pub fn write_container(path: &Path, meta: serde_json::Value, tensors: &[(String, Tensor)]) -> Result<()> {
    let mut offset = 0u64;
    let entries = tensors
        .iter()
        .map(|(name, t)| {
            let nbytes = (t.len() * 4) as u64;
            let e = TensorEntry {
                name: name.clone(),
                shape: t.shape().to_vec(),
                dtype: "f32".into(),
                offset,
                nbytes,
            };
            offset += nbytes;
            e
        })
        .collect();
    let header = serde_json::to_vec(&Header { meta, tensors: entries })?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(header.len() as u64).to_le_bytes())?;
    w.write_all(&header)?;
    for (_, t) in tensors {
        for v in t.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_container(path: &Path) -> Result<(serde_json::Value, BTreeMap<String, Tensor>)> {
    let bad = |msg: String| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        message: msg,
    };
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a tensor container".into()));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    let mut header = vec![0u8; len];
    r.read_exact(&mut header)?;
    let header: Header = serde_json::from_slice(&header)?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    let mut out = BTreeMap::new();
    for e in header.tensors {
        if e.dtype != "f32" {
            return Err(bad(format!("tensor {} has unsupported dtype {}", e.name, e.dtype)));
        }
        let n: usize = e.shape.iter().product();
        let (start, end) = (e.offset as usize, (e.offset + e.nbytes) as usize);
        if e.nbytes as usize != n * 4 || end > payload.len() {
            return Err(bad(format!("tensor {} has inconsistent extent", e.name)));
        }
        let data = payload[start..end]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        if out.insert(e.name.clone(), Tensor::from_vec(&e.shape, data)?).is_some() {
            return Err(bad(format!("duplicate tensor {}", e.name)));
        }
    }
    Ok((header.meta, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.oiqw");
        let tensors = vec![
            ("a".to_string(), Tensor::from_vec(&[2, 2], vec![1.0, -2.5, 3.0, f32::MIN_POSITIVE]).unwrap()),
            ("b".to_string(), Tensor::zeros(&[3])),
        ];
        write_container(&p, serde_json::json!({"k": 1}), &tensors).unwrap();
        let (meta, back) = read_container(&p).unwrap();
        assert_eq!(meta["k"], 1);
        assert_eq!(back["a"], tensors[0].1);
        assert_eq!(back["b"], tensors[1].1);
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x");
        std::fs::write(&p, b"PNG\0garbage").unwrap();
        assert!(read_container(&p).is_err());
    }
}
