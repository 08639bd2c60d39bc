//! Parameter checkpoints: a flat file of named f64 arrays behind a JSON
//! header.
//!
//! Layout: the 8-byte magic `PUGNNCK1`, the header length as a little-endian
//! u64, the UTF-8 JSON header, then the array data. Offsets in the header
//! count bytes from the start of the data section.

use std::path::Path;

use pugnn_core::{DenseMatrix, ParamStore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"PUGNNCK1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayEntry {
    pub name: String,
    pub shape: [usize; 2],
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub endianness: String,
    pub dtype: String,
    pub arrays: Vec<ArrayEntry>,
    /// Epoch the parameters come from and whether the run finished.
    pub epoch: usize,
    pub complete: bool,
}

pub fn encode(params: &ParamStore, epoch: usize, complete: bool) -> Vec<u8> {
    let mut arrays = Vec::new();
    let mut data = Vec::new();
    for (name, p) in params.iter() {
        arrays.push(ArrayEntry {
            name: name.to_string(),
            shape: [p.value.rows(), p.value.cols()],
            offset: data.len(),
        });
        for x in p.value.as_slice() {
            data.extend_from_slice(&x.to_le_bytes());
        }
    }
    let header = Header {
        endianness: "little".into(),
        dtype: "f64".into(),
        arrays,
        epoch,
        complete,
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + header.len() + data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&data);
    out
}

fn corrupt(msg: impl std::fmt::Display) -> Error {
    Error::Data(format!("checkpoint: {msg}"))
}

pub fn decode(bytes: &[u8]) -> Result<(Header, ParamStore)> {
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(corrupt("missing magic"));
    }
    let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let data_start = 16usize
        .checked_add(header_len)
        .filter(|&s| s <= bytes.len())
        .ok_or_else(|| corrupt("header runs past the end of the file"))?;
    let header: Header = serde_json::from_slice(&bytes[16..data_start]).map_err(corrupt)?;
    if header.endianness != "little" || header.dtype != "f64" {
        return Err(corrupt(format!(
            "unsupported layout {} {}",
            header.endianness, header.dtype
        )));
    }
    let data = &bytes[data_start..];
    let mut named = Vec::new();
    for a in &header.arrays {
        let len = a.shape[0] * a.shape[1];
        let end = a.offset + 8 * len;
        let chunk = data
            .get(a.offset..end)
            .ok_or_else(|| corrupt(format!("array {} runs past the end of the file", a.name)))?;
        let values = chunk
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        named.push((a.name.as_str(), DenseMatrix::from_vec(a.shape[0], a.shape[1], values)?));
    }
    let params = ParamStore::from_named(named)?;
    Ok((header, params))
}

pub fn write(path: &Path, params: &ParamStore, epoch: usize, complete: bool) -> Result<()> {
    std::fs::write(path, encode(params, epoch, complete)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<(Header, ParamStore)> {
    decode(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
