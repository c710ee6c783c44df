//! Minimal ZIP reader: central directory walk plus stored/deflate
//! entry extraction. Every real APK uses only these two methods.

use super::ApkError;

pub const LOCAL_FILE_HEADER_SIGNATURE: u32 = 0x0403_4b50;
pub const CENTRAL_DIRECTORY_SIGNATURE: u32 = 0x0201_4b50;
pub const EOCD_SIGNATURE: u32 = 0x0605_4b50;

/// Max EOCD search window: 22-byte record + 65535-byte comment.
const EOCD_SEARCH_WINDOW: usize = 22 + 65_535;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompressionMethod {
    Stored,
    Deflate,
}

#[derive(Debug, Clone)]
pub struct ZipEntry {
    pub name: String,
    pub compression_method: CompressionMethod,
    pub compressed_size: u64,
    pub uncompressed_size: u64,
    pub local_header_offset: u64,
    pub crc32: u32,
}

fn read_u16(bytes: &[u8], at: usize) -> Result<u16, ApkError> {
    let b = bytes
        .get(at..at + 2)
        .ok_or(ApkError::OffsetOutOfBounds(at))?;
    Ok(u16::from_le_bytes([b[0], b[1]]))
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32, ApkError> {
    let b = bytes
        .get(at..at + 4)
        .ok_or(ApkError::OffsetOutOfBounds(at))?;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

/// Locate the EOCD record and walk the central directory.
pub fn read_central_directory(archive: &[u8]) -> Result<Vec<ZipEntry>, ApkError> {
    let eocd = find_eocd(archive).ok_or(ApkError::MissingEocd)?;
    let entry_count = read_u16(archive, eocd + 10)? as usize;
    let dir_offset = read_u32(archive, eocd + 16)? as usize;

    let mut entries = Vec::with_capacity(entry_count);
    let mut at = dir_offset;
    for parsed in 0..entry_count {
        let truncated = ApkError::TruncatedDirectory {
            expected: entry_count,
            parsed,
        };
        let Ok(sig) = read_u32(archive, at) else {
            return Err(truncated);
        };
        if sig != CENTRAL_DIRECTORY_SIGNATURE {
            return Err(truncated);
        }
        let method = read_u16(archive, at + 10)?;
        let crc32 = read_u32(archive, at + 16)?;
        let compressed_size = read_u32(archive, at + 20)? as u64;
        let uncompressed_size = read_u32(archive, at + 24)? as u64;
        let name_len = read_u16(archive, at + 28)? as usize;
        let extra_len = read_u16(archive, at + 30)? as usize;
        let comment_len = read_u16(archive, at + 32)? as usize;
        let local_header_offset = read_u32(archive, at + 42)? as u64;
        let name_bytes = archive
            .get(at + 46..at + 46 + name_len)
            .ok_or(ApkError::OffsetOutOfBounds(at + 46))?;
        let name = String::from_utf8_lossy(name_bytes).into_owned();
        let compression_method = match method {
            0 => CompressionMethod::Stored,
            8 => CompressionMethod::Deflate,
            other => return Err(ApkError::UnsupportedCompression(other)),
        };
        entries.push(ZipEntry {
            name,
            compression_method,
            compressed_size,
            uncompressed_size,
            local_header_offset,
            crc32,
        });
        at += 46 + name_len + extra_len + comment_len;
    }
    Ok(entries)
}

fn find_eocd(archive: &[u8]) -> Option<usize> {
    if archive.len() < 22 {
        return None;
    }
    let floor = archive.len().saturating_sub(EOCD_SEARCH_WINDOW);
    let mut at = archive.len() - 22;
    loop {
        if read_u32(archive, at).ok()? == EOCD_SIGNATURE {
            return Some(at);
        }
        if at == floor {
            return None;
        }
        at -= 1;
    }
}

/// Extract one entry's bytes, verifying the local header and CRC-32.
pub fn decompress_entry(archive: &[u8], entry: &ZipEntry) -> Result<Vec<u8>, ApkError> {
    let at = entry.local_header_offset as usize;
    let sig = read_u32(archive, at)?;
    if sig != LOCAL_FILE_HEADER_SIGNATURE {
        return Err(ApkError::HeaderMismatch(entry.name.clone()));
    }
    let method = read_u16(archive, at + 8)?;
    let expected_method = match entry.compression_method {
        CompressionMethod::Stored => 0,
        CompressionMethod::Deflate => 8,
    };
    if method != expected_method {
        return Err(ApkError::HeaderMismatch(entry.name.clone()));
    }
    let name_len = read_u16(archive, at + 26)? as usize;
    let extra_len = read_u16(archive, at + 28)? as usize;
    let name_bytes = archive
        .get(at + 30..at + 30 + name_len)
        .ok_or(ApkError::OffsetOutOfBounds(at + 30))?;
    if name_bytes != entry.name.as_bytes() {
        return Err(ApkError::HeaderMismatch(entry.name.clone()));
    }
    let data_start = at + 30 + name_len + extra_len;
    let data = archive
        .get(data_start..data_start + entry.compressed_size as usize)
        .ok_or(ApkError::OffsetOutOfBounds(data_start))?;

    let out = match entry.compression_method {
        CompressionMethod::Stored => data.to_vec(),
        CompressionMethod::Deflate => {
            miniz_oxide::inflate::decompress_to_vec(data).map_err(|_| ApkError::CorruptStream)?
        }
    };
    if out.len() as u64 != entry.uncompressed_size {
        return Err(ApkError::HeaderMismatch(entry.name.clone()));
    }
    let actual = crc32fast::hash(&out);
    if actual != entry.crc32 {
        return Err(ApkError::CrcMismatch {
            expected: entry.crc32,
            actual,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Single-entry archive with a stored payload, built by hand.
    pub fn stored_archive(name: &str, payload: &[u8]) -> Vec<u8> {
        let crc = crc32fast::hash(payload);
        let mut out = Vec::new();
        // local file header
        out.extend_from_slice(&LOCAL_FILE_HEADER_SIGNATURE.to_le_bytes());
        out.extend_from_slice(&[20, 0, 0, 0, 0, 0]); // version, flags, method=0
        out.extend_from_slice(&[0, 0, 0, 0]); // mod time/date
        out.extend_from_slice(&crc.to_le_bytes());
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(&0u16.to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(payload);
        let dir_offset = out.len() as u32;
        // central directory
        out.extend_from_slice(&CENTRAL_DIRECTORY_SIGNATURE.to_le_bytes());
        out.extend_from_slice(&[20, 0, 20, 0, 0, 0, 0, 0]);
        out.extend_from_slice(&[0, 0, 0, 0]);
        out.extend_from_slice(&crc.to_le_bytes());
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(&[0u8; 12]); // extra/comment len, disk, attrs
        out.extend_from_slice(&0u32.to_le_bytes()); // local header offset
        out.extend_from_slice(name.as_bytes());
        let dir_size = out.len() as u32 - dir_offset;
        // EOCD
        out.extend_from_slice(&EOCD_SIGNATURE.to_le_bytes());
        out.extend_from_slice(&[0, 0, 0, 0]);
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&dir_size.to_le_bytes());
        out.extend_from_slice(&dir_offset.to_le_bytes());
        out.extend_from_slice(&0u16.to_le_bytes());
        out
    }

    fn empty_archive() -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&EOCD_SIGNATURE.to_le_bytes());
        out.extend_from_slice(&[0u8; 18]);
        out
    }

    #[test]
    fn empty_archive_yields_no_entries() {
        let archive = empty_archive();
        assert_eq!(archive.len(), 22);
        assert!(read_central_directory(&archive).unwrap().is_empty());
    }

    #[test]
    fn missing_eocd_is_rejected() {
        let err = read_central_directory(b"not a zip at all, no signature here").unwrap_err();
        assert!(matches!(err, ApkError::MissingEocd));
    }

    #[test]
    fn stored_entry_round_trips() {
        let archive = stored_archive("hello.txt", b"hello");
        let entries = read_central_directory(&archive).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].name, "hello.txt");
        assert_eq!(entries[0].compressed_size, entries[0].uncompressed_size);
        assert_eq!(decompress_entry(&archive, &entries[0]).unwrap(), b"hello");
    }

    #[test]
    fn corrupted_payload_fails_crc() {
        let mut archive = stored_archive("f", b"hello");
        // flip a payload byte: payload starts right after the 30-byte
        // local header plus the 1-byte name
        archive[31] ^= 0xff;
        let entries = read_central_directory(&archive).unwrap();
        let err = decompress_entry(&archive, &entries[0]).unwrap_err();
        assert!(matches!(err, ApkError::CrcMismatch { .. }));
    }

    #[test]
    fn unsupported_method_is_rejected() {
        let mut archive = stored_archive("f", b"x");
        // method field of the central directory record
        let dir_offset = u32::from_le_bytes(
            archive[archive.len() - 6..archive.len() - 2]
                .try_into()
                .unwrap(),
        ) as usize;
        archive[dir_offset + 10] = 12; // bzip2
        let err = read_central_directory(&archive).unwrap_err();
        assert!(matches!(err, ApkError::UnsupportedCompression(12)));
    }
}
