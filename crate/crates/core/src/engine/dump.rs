//! Binary state dump: `"QTVM"`, `u32` version (LE), `u8` qubit count, then
//! `2^L` little-endian `f64` reals followed by `2^L` imaginaries.

use std::io::{Read, Write};

use super::{EngineError, StateVector};

pub const DUMP_MAGIC: &[u8; 4] = b"QTVM";
pub const DUMP_VERSION: u32 = 1;

pub fn write_dump<W: Write>(state: &StateVector, mut w: W) -> Result<(), EngineError> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&DUMP_VERSION.to_le_bytes())?;
    w.write_all(&[state.num_qubits() as u8])?;
    let mut buf = Vec::with_capacity(8 * 4096);
    for part in [state.reals(), state.imags()] {
        for chunk in part.chunks(4096) {
            buf.clear();
            for v in chunk {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_dump<R: Read>(mut r: R) -> Result<StateVector, EngineError> {
    let mut header = [0u8; 9];
    r.read_exact(&mut header)?;
    if &header[..4] != DUMP_MAGIC {
        return Err(EngineError::Dump("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != DUMP_VERSION {
        return Err(EngineError::Dump(format!("unsupported version {version}")));
    }
    let num_qubits = header[8] as usize;
    if num_qubits == 0 || num_qubits > 40 {
        return Err(EngineError::Dump(format!("bad qubit count {num_qubits}")));
    }
    let len = 1usize << num_qubits;
    let mut read_part = || -> Result<Vec<f64>, EngineError> {
        let mut bytes = vec![0u8; 8 * len];
        r.read_exact(&mut bytes)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect())
    };
    let re = read_part()?;
    let im = read_part()?;
    StateVector::from_parts(num_qubits, re, im)
}
