#!/usr/bin/env python3
"""Regenerate the binary test fixtures under crates/permsentry/tests/fixtures.

The AXML and DEX writers here are implemented independently from the
Rust parsers, straight from the published format layouts, so the checked
in fixtures double as a cross-implementation oracle. Alongside each APK
the script writes .permissions.txt / .strings.txt files with the exact
sets a correct parser must recover.

Run from the repository root:  python3 tools/gen_fixtures.py
"""

import os
import struct
import zipfile

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "permsentry", "tests", "fixtures")

RES_AUTO = 0xFFFFFFFF  # "no value" sentinel used throughout AXML


# ---------------------------------------------------------------- AXML

def _pad4(b: bytes) -> bytes:
    return b + b"\x00" * (-len(b) % 4)


def _utf8_len(n: int) -> bytes:
    if n < 0x80:
        return bytes([n])
    return bytes([0x80 | (n >> 8), n & 0xFF])


def string_pool(strings, utf8=True):
    offsets = []
    data = b""
    for s in strings:
        offsets.append(len(data))
        if utf8:
            enc = s.encode("utf-8")
            data += _utf8_len(len(s)) + _utf8_len(len(enc)) + enc + b"\x00"
        else:
            units = s.encode("utf-16-le")
            assert len(units) // 2 < 0x8000
            data += struct.pack("<H", len(units) // 2) + units + b"\x00\x00"
    data = _pad4(data)
    header_size = 28
    strings_start = header_size + 4 * len(strings)
    size = strings_start + len(data)
    flags = 1 << 8 if utf8 else 0
    head = struct.pack(
        "<HHIIIII", 0x0001, header_size, size, len(strings), 0, flags, strings_start
    ) + struct.pack("<I", 0)  # styles_start
    # header is type,headerSize,size then stringCount,styleCount,flags,
    # stringsStart,stylesStart = 28 bytes total
    assert len(head) == header_size
    return head + b"".join(struct.pack("<I", o) for o in offsets) + data


def start_element(name_idx, attrs):
    """attrs: list of (ns_idx_or_None, name_idx, value_str_idx)."""
    size = 16 + 20 + 20 * len(attrs)
    out = struct.pack("<HHI", 0x0102, 16, size)
    out += struct.pack("<II", 1, RES_AUTO)  # line, comment
    out += struct.pack("<II", RES_AUTO, name_idx)
    out += struct.pack("<HHHHHH", 20, 20, len(attrs), 0, 0, 0)
    for ns, aname, vidx in attrs:
        out += struct.pack("<III", RES_AUTO if ns is None else ns, aname, vidx)
        out += struct.pack("<HBB", 8, 0, 0x03)  # size, res0, TYPE_STRING
        out += struct.pack("<I", vidx)
    return out


def end_element(name_idx):
    return struct.pack("<HHI", 0x0103, 16, 24) + struct.pack(
        "<IIII", 1, RES_AUTO, RES_AUTO, name_idx
    )


def build_manifest(permissions, utf8=True):
    strings = ["name", "manifest", "uses-permission"] + list(permissions)
    pool = string_pool(strings, utf8=utf8)
    body = pool
    body += start_element(1, [])
    for i, _ in enumerate(permissions):
        body += start_element(2, [(None, 0, 3 + i)])
        body += end_element(2)
    body += end_element(1)
    return struct.pack("<HHI", 0x0003, 8, 8 + len(body)) + body


# ----------------------------------------------------------------- DEX

def _uleb128(n: int) -> bytes:
    out = b""
    while True:
        b = n & 0x7F
        n >>= 7
        if n:
            out += bytes([b | 0x80])
        else:
            return out + bytes([b])


def build_dex(strings):
    header_size = 0x70
    table_off = header_size
    data_off = table_off + 4 * len(strings)
    data = b""
    offsets = []
    for s in strings:
        offsets.append(data_off + len(data))
        utf16_len = len(s.encode("utf-16-le")) // 2
        data += _uleb128(utf16_len) + s.encode("utf-8") + b"\x00"
    total = data_off + len(data)
    header = bytearray(header_size)
    header[0:8] = b"dex\n035\x00"
    struct.pack_into("<I", header, 0x20, total)       # file_size
    struct.pack_into("<I", header, 0x24, header_size)
    struct.pack_into("<I", header, 0x28, 0x12345678)  # endian_tag
    struct.pack_into("<I", header, 0x38, len(strings))
    struct.pack_into("<I", header, 0x3C, table_off)
    return bytes(header) + b"".join(struct.pack("<I", o) for o in offsets) + data


# ----------------------------------------------------------------- APK

def write_apk(path, entries):
    """entries: list of (name, bytes, compressed: bool)."""
    with zipfile.ZipFile(path, "w") as z:
        for name, payload, compressed in entries:
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            z.writestr(
                info,
                payload,
                compress_type=zipfile.ZIP_DEFLATED if compressed else zipfile.ZIP_STORED,
            )


def write_lines(path, lines):
    with open(path, "w") as f:
        for line in lines:
            f.write(line + "\n")


def main():
    os.makedirs(OUT, exist_ok=True)

    permissions = [
        "android.permission.INTERNET",
        "android.permission.READ_PHONE_STATE",
        "android.permission.SEND_SMS",
        "android.permission.VIBRATE",
    ]
    dex1 = [
        "Landroid/telephony/SmsManager;",
        "chmod 777 /data/local/tmp/a",
        "getDeviceId",
        "getSubscriberId",
        "sendTextMessage",
    ]
    dex2 = [
        "getSimSerialNumber",
        "pm install -r payload.apk",
    ]

    manifest = build_manifest(permissions, utf8=True)
    write_apk(
        os.path.join(OUT, "fixture.apk"),
        [
            ("AndroidManifest.xml", manifest, True),
            ("classes.dex", build_dex(dex1), False),
            ("classes2.dex", build_dex(dex2), True),
            ("res/raw/filler.txt", b"filler payload, ignored by the scanner\n", True),
        ],
    )
    write_lines(os.path.join(OUT, "fixture.apk.permissions.txt"), permissions)
    write_lines(os.path.join(OUT, "fixture.apk.strings.txt"), sorted(dex1 + dex2))

    # one-element manifest, no permissions, no dex
    write_apk(
        os.path.join(OUT, "minimal.apk"),
        [("AndroidManifest.xml", build_manifest([], utf8=True), False)],
    )

    # raw manifests in both string pool flavors, identical content
    with open(os.path.join(OUT, "manifest_utf8.axml"), "wb") as f:
        f.write(build_manifest(permissions, utf8=True))
    with open(os.path.join(OUT, "manifest_utf16.axml"), "wb") as f:
        f.write(build_manifest(permissions, utf8=False))

    # raw dex, including a non-ASCII string
    with open(os.path.join(OUT, "strings.dex"), "wb") as f:
        f.write(build_dex(dex1 + ["café"]))

    print("fixtures written to", os.path.normpath(OUT))


if __name__ == "__main__":
    main()
