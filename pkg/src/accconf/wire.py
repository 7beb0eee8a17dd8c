"""Big-endian binary helpers for the file formats."""

import os
import struct
import tempfile

from .errors import FormatError


def int_width(modulus):
    return max(1, (modulus.bit_length() + 7) // 8)


def pack_int(value, width=None):
    """u32 length prefix + big-endian bytes (minimal, or exactly ``width``)."""
    if value < 0:
        raise ValueError("negative integers are not encodable")
    if width is None:
        width = max(1, (value.bit_length() + 7) // 8)
    return struct.pack(">I", width) + value.to_bytes(width, "big")


def pack_bytes(data):
    return struct.pack(">I", len(data)) + data


class Reader:
    def __init__(self, data):
        self.data = bytes(data)
        self.pos = 0

    def take(self, n):
        if n < 0 or self.pos + n > len(self.data):
            raise FormatError("truncated input")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def magic(self, expected):
        if self.take(len(expected)) != expected:
            raise FormatError(f"bad magic, expected {expected!r}")

    def u8(self):
        return self.take(1)[0]

    def u16(self):
        return struct.unpack(">H", self.take(2))[0]

    def u32(self):
        return struct.unpack(">I", self.take(4))[0]

    def u64(self):
        return struct.unpack(">Q", self.take(8))[0]

    def blob(self):
        return self.take(self.u32())

    def integer(self, width=None, below=None):
        """Read a length-prefixed integer, rejecting non-canonical encodings."""
        raw = self.blob()
        if not raw:
            raise FormatError("empty integer field")
        if width is not None:
            if len(raw) != width:
                raise FormatError(f"integer field has {len(raw)} bytes, expected {width}")
        elif len(raw) > 1 and raw[0] == 0:
            raise FormatError("integer has leading zero bytes")
        value = int.from_bytes(raw, "big")
        if below is not None and value >= below:
            raise FormatError("integer out of range")
        return value

    def done(self):
        if self.pos != len(self.data):
            raise FormatError(f"{len(self.data) - self.pos} trailing bytes")


def atomic_write(path, data):
    """Write bytes via a temp file in the same directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
