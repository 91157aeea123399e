//! Binary table cache.
//!
//! Layout of a `.pauc` file: the magic `PAUC1`, a one-byte kind tag, the two
//! exponents as little-endian `u32`, the bound as `u64`, the entry count as
//! `u64`, then the sorted `(key, count)` pairs as little-endian `i128`/`u64`
//! records. Round-trips are bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tables::{FreqTable, TableKind};

const MAGIC: &[u8; 5] = b"PAUC1";

fn kind_byte(kind: TableKind) -> u8 {
    match kind {
        TableKind::LeadingU => 0,
        TableKind::TrailingV => 1,
        TableKind::MomentM => 2,
    }
}

fn kind_from_byte(b: u8) -> Result<TableKind> {
    match b {
        0 => Ok(TableKind::LeadingU),
        1 => Ok(TableKind::TrailingV),
        2 => Ok(TableKind::MomentM),
        other => Err(Error::CacheCorrupt(format!("unknown kind byte {other}"))),
    }
}

/// Canonical file name for a cached table: `{kind}_{k}_{mn}_{B}.pauc`.
pub fn table_file_name(kind: TableKind, k: u32, second: u32, bound: u64) -> String {
    format!("{}_{k}_{second}_{bound}.pauc", kind.tag())
}

pub fn write_table(path: &Path, table: &FreqTable) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&[kind_byte(table.kind)])?;
    w.write_all(&table.exponents.0.to_le_bytes())?;
    w.write_all(&table.exponents.1.to_le_bytes())?;
    w.write_all(&table.bound.to_le_bytes())?;
    w.write_all(&(table.entries().len() as u64).to_le_bytes())?;
    for &(key, count) in table.entries() {
        w.write_all(&key.to_le_bytes())?;
        w.write_all(&count.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<FreqTable> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 5];
    read_exact(&mut r, &mut magic)?;
    if magic != *MAGIC {
        if magic[..4] == MAGIC[..4] {
            return Err(Error::CacheVersion {
                found: String::from_utf8_lossy(&magic).into_owned(),
            });
        }
        return Err(Error::CacheCorrupt("bad magic".into()));
    }
    let mut byte = [0u8; 1];
    read_exact(&mut r, &mut byte)?;
    let kind = kind_from_byte(byte[0])?;
    let mut u32buf = [0u8; 4];
    read_exact(&mut r, &mut u32buf)?;
    let k = u32::from_le_bytes(u32buf);
    read_exact(&mut r, &mut u32buf)?;
    let second = u32::from_le_bytes(u32buf);
    let mut u64buf = [0u8; 8];
    read_exact(&mut r, &mut u64buf)?;
    let bound = u64::from_le_bytes(u64buf);
    read_exact(&mut r, &mut u64buf)?;
    let len = u64::from_le_bytes(u64buf) as usize;

    let mut entries = Vec::with_capacity(len);
    let mut i128buf = [0u8; 16];
    for _ in 0..len {
        read_exact(&mut r, &mut i128buf)?;
        let key = i128::from_le_bytes(i128buf);
        read_exact(&mut r, &mut u64buf)?;
        let count = u64::from_le_bytes(u64buf);
        if count == 0 {
            return Err(Error::CacheCorrupt("zero count stored".into()));
        }
        if let Some(&(prev, _)) = entries.last() {
            if prev >= key {
                return Err(Error::CacheCorrupt("keys not strictly ascending".into()));
            }
        }
        entries.push((key, count));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::CacheCorrupt("trailing bytes".into()));
    }
    Ok(FreqTable::from_sorted_entries(
        kind,
        (k, second),
        bound,
        entries,
    ))
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::CacheCorrupt("truncated file".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::build_v_table;
    use crate::triple::BoxConfig;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let table = build_v_table(3, 1, &BoxConfig::new(12)).unwrap();
        let path = dir
            .path()
            .join(table_file_name(table.kind, 3, 1, 12));
        write_table(&path, &table).unwrap();
        let back = read_table(&path).unwrap();
        assert_eq!(table, back);
        // writing the read-back table reproduces the same bytes
        let path2 = dir.path().join("again.pauc");
        write_table(&path2, &back).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn version_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("old.pauc");
        std::fs::write(&path, b"PAUC0junkjunkjunkjunkjunk").unwrap();
        assert!(matches!(
            read_table(&path),
            Err(Error::CacheVersion { .. })
        ));
    }

    #[test]
    fn corruption_detected() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.pauc");
        std::fs::write(&bad, b"NOTAPAUCFILE").unwrap();
        assert!(matches!(read_table(&bad), Err(Error::CacheCorrupt(_))));

        let table = build_v_table(3, 1, &BoxConfig::new(6)).unwrap();
        let trunc = dir.path().join("trunc.pauc");
        write_table(&trunc, &table).unwrap();
        let bytes = std::fs::read(&trunc).unwrap();
        std::fs::write(&trunc, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(read_table(&trunc), Err(Error::CacheCorrupt(_))));
    }

    #[test]
    fn file_name_shape() {
        assert_eq!(
            table_file_name(TableKind::TrailingV, 3, 1, 10),
            "v_3_1_10.pauc"
        );
        assert_eq!(
            table_file_name(TableKind::LeadingU, 4, 3, 64),
            "u_4_3_64.pauc"
        );
    }
}
