//! DEX string table scanner. Only the `string_ids` table is read: it
//! holds every identifier and literal in the bytecode, which is where
//! API-call and command tokens surface without disassembly.

use std::collections::BTreeSet;

use super::ApkError;

const HEADER_SIZE: usize = 0x70;
const STRING_IDS_SIZE_OFFSET: usize = 0x38;
const STRING_IDS_OFF_OFFSET: usize = 0x3c;

fn read_u32(bytes: &[u8], at: usize) -> Result<u32, ApkError> {
    let b = bytes
        .get(at..at + 4)
        .ok_or(ApkError::OffsetOutOfBounds(at))?;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

fn check_magic(bytes: &[u8]) -> Result<(), ApkError> {
    let magic = bytes.get(..8).ok_or(ApkError::BadMagic("DEX header"))?;
    // accept versions 035 through 039
    let ok = magic.starts_with(b"dex\n")
        && magic[7] == 0
        && matches!(&magic[4..7], b"035" | b"036" | b"037" | b"038" | b"039");
    if ok {
        Ok(())
    } else {
        Err(ApkError::BadMagic("DEX header"))
    }
}

/// Decode every entry of the `string_ids` table into a set.
///
/// Individual strings whose modified-UTF-8 payload fails to decode are
/// skipped; structural problems (bad offsets, unterminated data) are
/// errors.
pub fn scan_dex_strings(bytes: &[u8]) -> Result<BTreeSet<String>, ApkError> {
    check_magic(bytes)?;
    if bytes.len() < HEADER_SIZE {
        return Err(ApkError::OffsetOutOfBounds(bytes.len()));
    }
    let count = read_u32(bytes, STRING_IDS_SIZE_OFFSET)? as usize;
    let table_off = read_u32(bytes, STRING_IDS_OFF_OFFSET)? as usize;

    let mut out = BTreeSet::new();
    for i in 0..count {
        let data_off = read_u32(bytes, table_off + i * 4)? as usize;
        if data_off >= bytes.len() {
            return Err(ApkError::OffsetOutOfBounds(data_off));
        }
        let (utf16_len, payload_at) = read_uleb128(bytes, data_off)?;
        if let Some(s) = decode_mutf8(bytes, payload_at, utf16_len as usize)? {
            out.insert(s);
        }
    }
    Ok(out)
}

/// ULEB128 decode; returns (value, offset past the encoding).
fn read_uleb128(bytes: &[u8], at: usize) -> Result<(u32, usize), ApkError> {
    let mut value: u32 = 0;
    let mut shift = 0;
    for i in 0..5 {
        let b = *bytes
            .get(at + i)
            .ok_or(ApkError::OffsetOutOfBounds(at + i))?;
        value |= ((b & 0x7f) as u32) << shift;
        if b & 0x80 == 0 {
            return Ok((value, at + i + 1));
        }
        shift += 7;
    }
    Err(ApkError::MalformedUleb128(at))
}

/// Modified UTF-8: like CESU-8, NUL encoded as 0xc0 0x80, data is
/// NUL-terminated. Returns None (skip) on a decode error within the
/// string; structural overruns are hard errors.
fn decode_mutf8(bytes: &[u8], start: usize, utf16_len: usize) -> Result<Option<String>, ApkError> {
    // utf16_len comes from the file; cap the allocation by what could
    // actually be encoded in the remaining bytes
    let mut units: Vec<u16> = Vec::with_capacity(utf16_len.min(bytes.len() - start));
    let mut at = start;
    loop {
        let b = *bytes.get(at).ok_or(ApkError::OffsetOutOfBounds(at))?;
        if b == 0 {
            break;
        }
        if b & 0x80 == 0 {
            units.push(b as u16);
            at += 1;
        } else if b & 0xe0 == 0xc0 {
            let b2 = *bytes
                .get(at + 1)
                .ok_or(ApkError::OffsetOutOfBounds(at + 1))?;
            if b2 & 0xc0 != 0x80 {
                return Ok(None);
            }
            units.push((((b & 0x1f) as u16) << 6) | (b2 & 0x3f) as u16);
            at += 2;
        } else if b & 0xf0 == 0xe0 {
            let b2 = *bytes
                .get(at + 1)
                .ok_or(ApkError::OffsetOutOfBounds(at + 1))?;
            let b3 = *bytes
                .get(at + 2)
                .ok_or(ApkError::OffsetOutOfBounds(at + 2))?;
            if b2 & 0xc0 != 0x80 || b3 & 0xc0 != 0x80 {
                return Ok(None);
            }
            units.push(
                (((b & 0x0f) as u16) << 12) | (((b2 & 0x3f) as u16) << 6) | (b3 & 0x3f) as u16,
            );
            at += 3;
        } else {
            // 4-byte sequences are not valid modified UTF-8
            return Ok(None);
        }
    }
    match String::from_utf16(&units) {
        Ok(s) if !s.is_empty() => Ok(Some(s)),
        Ok(_) => Ok(None),
        Err(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimal DEX with the given string table, correct enough for the
    /// scanner: magic, string_ids_size/off, ULEB128 + MUTF-8 data.
    pub fn build_dex(strings: &[&str]) -> Vec<u8> {
        let mut data = Vec::new();
        let mut offsets = Vec::new();
        let data_base = HEADER_SIZE + strings.len() * 4;
        for s in strings {
            offsets.push((data_base + data.len()) as u32);
            let units: Vec<u16> = s.encode_utf16().collect();
            // uleb128 utf16 length (all fixtures are short)
            let mut len = units.len() as u32;
            loop {
                let byte = (len & 0x7f) as u8;
                len >>= 7;
                if len == 0 {
                    data.push(byte);
                    break;
                }
                data.push(byte | 0x80);
            }
            data.extend_from_slice(s.as_bytes()); // ASCII fixtures only
            data.push(0);
        }
        let mut out = vec![0u8; HEADER_SIZE];
        out[..8].copy_from_slice(b"dex\n035\0");
        out[STRING_IDS_SIZE_OFFSET..STRING_IDS_SIZE_OFFSET + 4]
            .copy_from_slice(&(strings.len() as u32).to_le_bytes());
        out[STRING_IDS_OFF_OFFSET..STRING_IDS_OFF_OFFSET + 4]
            .copy_from_slice(&(HEADER_SIZE as u32).to_le_bytes());
        for off in offsets {
            out.extend_from_slice(&off.to_le_bytes());
        }
        out.extend_from_slice(&data);
        out
    }

    #[test]
    fn string_table_is_decoded() {
        let dex = build_dex(&["getDeviceId", "a"]);
        let strings = scan_dex_strings(&dex).unwrap();
        assert!(strings.contains("getDeviceId"));
        assert!(strings.contains("a"));
        assert_eq!(strings.len(), 2);
    }

    #[test]
    fn zero_strings_yields_empty_set() {
        let dex = build_dex(&[]);
        assert!(scan_dex_strings(&dex).unwrap().is_empty());
    }

    #[test]
    fn truncated_string_data_errors() {
        let mut dex = build_dex(&["getDeviceId"]);
        dex.truncate(dex.len() - 6);
        let err = scan_dex_strings(&dex).unwrap_err();
        assert!(matches!(err, ApkError::OffsetOutOfBounds(_)));
    }

    #[test]
    fn bad_magic_is_rejected() {
        let err = scan_dex_strings(b"cafebabe not a dex").unwrap_err();
        assert!(matches!(err, ApkError::BadMagic(_)));
    }

    #[test]
    fn version_039_is_accepted() {
        let mut dex = build_dex(&["x"]);
        dex[4..7].copy_from_slice(b"039");
        assert!(scan_dex_strings(&dex).is_ok());
    }
}
