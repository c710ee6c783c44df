//! Parser for Android's binary XML encoding (the `AndroidManifest.xml`
//! inside every APK). Chunked format: a string pool followed by
//! namespace/element events that reference pool indices.

use super::ApkError;

const CHUNK_XML: u16 = 0x0003;
const CHUNK_STRING_POOL: u16 = 0x0001;
const CHUNK_RESOURCE_MAP: u16 = 0x0180;
const CHUNK_START_NAMESPACE: u16 = 0x0100;
const CHUNK_END_NAMESPACE: u16 = 0x0101;
const CHUNK_START_ELEMENT: u16 = 0x0102;
const CHUNK_END_ELEMENT: u16 = 0x0103;
const CHUNK_CDATA: u16 = 0x0104;

const FLAG_UTF8: u32 = 1 << 8;

const TYPE_STRING: u8 = 0x03;
const TYPE_INT_DEC: u8 = 0x10;
const TYPE_INT_HEX: u8 = 0x11;
const TYPE_INT_BOOLEAN: u8 = 0x12;

/// Decoded attribute value. Only string and integer flavors matter for
/// manifest mining; everything else keeps its raw type/data pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrValue {
    /// Index into the string pool.
    Str(u32),
    Int(i32),
    Bool(bool),
    Raw {
        data_type: u8,
        data: u32,
    },
}

#[derive(Debug, Clone)]
pub struct Attribute {
    pub namespace: Option<u32>,
    pub name: u32,
    pub value: AttrValue,
}

#[derive(Debug, Clone)]
pub struct Element {
    pub name: u32,
    pub depth: usize,
    pub attributes: Vec<Attribute>,
}

#[derive(Debug, Clone, Default)]
pub struct AxmlDocument {
    pub string_pool: Vec<String>,
    /// Elements in document order; `depth` encodes the tree shape.
    pub elements: Vec<Element>,
}

impl AxmlDocument {
    pub fn string(&self, index: u32) -> Option<&str> {
        self.string_pool.get(index as usize).map(String::as_str)
    }
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

/// Parse a complete binary-XML document.
pub fn parse_axml(bytes: &[u8]) -> Result<AxmlDocument, ApkError> {
    if read_u16(bytes, 0).map_err(|_| ApkError::BadMagic("binary XML header"))? != CHUNK_XML {
        return Err(ApkError::BadMagic("binary XML header"));
    }
    let file_size = read_u32(bytes, 4)? as usize;
    let end = file_size.min(bytes.len());

    let mut doc = AxmlDocument::default();
    let mut stack: Vec<u32> = Vec::new();
    let mut at = 8usize;
    while at + 8 <= end {
        let chunk_type = read_u16(bytes, at)?;
        let chunk_size = read_u32(bytes, at + 4)? as usize;
        if chunk_size < 8 || at + chunk_size > end {
            return Err(ApkError::OffsetOutOfBounds(at));
        }
        match chunk_type {
            CHUNK_STRING_POOL => {
                doc.string_pool = parse_string_pool(&bytes[at..at + chunk_size])?;
            }
            CHUNK_START_ELEMENT => {
                let element = parse_start_element(bytes, at, chunk_size, stack.len())?;
                check_index(element.name, &doc)?;
                for attr in &element.attributes {
                    check_index(attr.name, &doc)?;
                    if let AttrValue::Str(idx) = attr.value {
                        check_index(idx, &doc)?;
                    }
                }
                stack.push(element.name);
                doc.elements.push(element);
            }
            CHUNK_END_ELEMENT => {
                let name = read_u32(bytes, at + 20)?;
                match stack.pop() {
                    Some(open) if open == name => {}
                    _ => return Err(ApkError::UnbalancedElements),
                }
            }
            // Namespaces, the resource map and CDATA carry nothing we mine.
            CHUNK_START_NAMESPACE | CHUNK_END_NAMESPACE | CHUNK_RESOURCE_MAP | CHUNK_CDATA => {}
            _ => {}
        }
        at += chunk_size;
    }
    if !stack.is_empty() {
        return Err(ApkError::UnbalancedElements);
    }
    Ok(doc)
}

fn check_index(index: u32, doc: &AxmlDocument) -> Result<(), ApkError> {
    // 0xffffffff means "no string" and is legal.
    if index != u32::MAX && index as usize >= doc.string_pool.len() {
        return Err(ApkError::StringIndexOutOfRange {
            index,
            pool_size: doc.string_pool.len(),
        });
    }
    Ok(())
}

fn parse_start_element(
    bytes: &[u8],
    at: usize,
    chunk_size: usize,
    depth: usize,
) -> Result<Element, ApkError> {
    let header_size = read_u16(bytes, at + 2)? as usize;
    let ext = at + header_size;
    let name = read_u32(bytes, ext + 4)?;
    let attribute_start = read_u16(bytes, ext + 8)? as usize;
    let attribute_size = read_u16(bytes, ext + 10)? as usize;
    let attribute_count = read_u16(bytes, ext + 12)? as usize;
    if attribute_size < 20 {
        return Err(ApkError::OffsetOutOfBounds(ext + 10));
    }
    let mut attributes = Vec::with_capacity(attribute_count);
    for i in 0..attribute_count {
        let base = ext + attribute_start + i * attribute_size;
        if base + 20 > at + chunk_size {
            return Err(ApkError::OffsetOutOfBounds(base));
        }
        let namespace = read_u32(bytes, base)?;
        let attr_name = read_u32(bytes, base + 4)?;
        let raw_value = read_u32(bytes, base + 8)?;
        let data_type = *bytes
            .get(base + 15)
            .ok_or(ApkError::OffsetOutOfBounds(base + 15))?;
        let data = read_u32(bytes, base + 16)?;
        let value = match data_type {
            TYPE_STRING => {
                // prefer the typed data; fall back to rawValue
                let idx = if data != u32::MAX { data } else { raw_value };
                AttrValue::Str(idx)
            }
            TYPE_INT_DEC | TYPE_INT_HEX => AttrValue::Int(data as i32),
            TYPE_INT_BOOLEAN => AttrValue::Bool(data != 0),
            other => AttrValue::Raw {
                data_type: other,
                data,
            },
        };
        attributes.push(Attribute {
            namespace: (namespace != u32::MAX).then_some(namespace),
            name: attr_name,
            value,
        });
    }
    Ok(Element {
        name,
        depth,
        attributes,
    })
}

/// Decode a string pool chunk (both UTF-8 and UTF-16 flavors).
fn parse_string_pool(chunk: &[u8]) -> Result<Vec<String>, ApkError> {
    let string_count = read_u32(chunk, 8)? as usize;
    let flags = read_u32(chunk, 16)?;
    let strings_start = read_u32(chunk, 20)? as usize;
    let utf8 = flags & FLAG_UTF8 != 0;

    // the offset table must fit inside the chunk; this also bounds the
    // allocation below against a hostile count
    if string_count > chunk.len().saturating_sub(28) / 4 {
        return Err(ApkError::OffsetOutOfBounds(8));
    }
    let mut strings = Vec::with_capacity(string_count);
    for i in 0..string_count {
        let offset = read_u32(chunk, 28 + i * 4)? as usize;
        let at = strings_start + offset;
        let s = if utf8 {
            decode_utf8_entry(chunk, at)?
        } else {
            decode_utf16_entry(chunk, at)?
        };
        strings.push(s);
    }
    Ok(strings)
}

fn decode_utf8_entry(chunk: &[u8], at: usize) -> Result<String, ApkError> {
    // two length fields: char count then byte count, each 1 or 2 bytes
    let (_, at) = read_utf8_len(chunk, at)?;
    let (byte_len, at) = read_utf8_len(chunk, at)?;
    let data = chunk
        .get(at..at + byte_len)
        .ok_or(ApkError::OffsetOutOfBounds(at))?;
    Ok(String::from_utf8_lossy(data).into_owned())
}

fn read_utf8_len(chunk: &[u8], at: usize) -> Result<(usize, usize), ApkError> {
    let first = *chunk.get(at).ok_or(ApkError::OffsetOutOfBounds(at))? as usize;
    if first & 0x80 != 0 {
        let second = *chunk
            .get(at + 1)
            .ok_or(ApkError::OffsetOutOfBounds(at + 1))? as usize;
        Ok((((first & 0x7f) << 8) | second, at + 2))
    } else {
        Ok((first, at + 1))
    }
}

fn decode_utf16_entry(chunk: &[u8], at: usize) -> Result<String, ApkError> {
    let first = read_u16(chunk, at)? as usize;
    let (char_len, data_at) = if first & 0x8000 != 0 {
        let second = read_u16(chunk, at + 2)? as usize;
        (((first & 0x7fff) << 16) | second, at + 4)
    } else {
        (first, at + 2)
    };
    if char_len > chunk.len().saturating_sub(data_at) / 2 {
        return Err(ApkError::OffsetOutOfBounds(data_at));
    }
    let mut units = Vec::with_capacity(char_len);
    for i in 0..char_len {
        units.push(read_u16(chunk, data_at + i * 2)?);
    }
    Ok(String::from_utf16_lossy(&units))
}
