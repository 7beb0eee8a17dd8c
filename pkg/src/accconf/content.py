"""Content encryption, hierarchical chunk naming, chunking and an on-disk chunk store."""

import enum
import hashlib
import hmac
import json
import os
import struct
from dataclasses import dataclass
from urllib.parse import quote, unquote

from .errors import AuthenticationError, FormatError
from .rng import DeterministicRNG
from .wire import Reader, atomic_write, pack_bytes

DEFAULT_CHUNK_SIZE = 1436
TAG_BYTES = 32
FIRST_CHUNK_ID = "001"
CONTENT_MAGIC = b"ACFC"


class Numbering(str, enum.Enum):
    SEQUENTIAL = "sequential"
    RANDOM = "random"


@dataclass(frozen=True)
class ContentName:
    """/provider/type-or-service/category-or-group/title/V<version>/<chunk_id>."""

    provider: str
    kind: str
    group: str
    title: str
    version: int = 1
    chunk_id: str = ""

    def __post_init__(self):
        for part in (self.provider, self.kind, self.group, self.title):
            if not part or "/" in part:
                raise ValueError(f"bad name component {part!r}")
        if "/" in self.chunk_id:
            raise ValueError("chunk id may not contain '/'")
        if self.version < 0:
            raise ValueError("version must be non-negative")

    @property
    def prefix(self):
        return f"/{self.provider}/{self.kind}/{self.group}/{self.title}/V{self.version}"

    def with_chunk(self, chunk_id):
        return ContentName(self.provider, self.kind, self.group, self.title, self.version, chunk_id)

    def __str__(self):
        return f"{self.prefix}/{self.chunk_id}" if self.chunk_id else self.prefix

    @classmethod
    def parse(cls, text):
        parts = text.strip("/").split("/")
        if len(parts) not in (5, 6) or not parts[4].startswith("V"):
            raise ValueError(f"not a content name: {text!r}")
        try:
            version = int(parts[4][1:])
        except ValueError:
            raise ValueError(f"bad version component {parts[4]!r}") from None
        return cls(parts[0], parts[1], parts[2], parts[3], version, parts[5] if len(parts) == 6 else "")


@dataclass(frozen=True)
class Chunk:
    name: ContentName
    payload: bytes
    seq_index: int
    next_chunk_id: str = None


@dataclass(frozen=True)
class EncryptedContent:
    object_name: str
    nonce: bytes
    ciphertext: bytes  # body followed by TAG_BYTES of authentication tag
    key_id: int = 0


def serialize_encrypted(enc):
    name = enc.object_name.encode()
    return (CONTENT_MAGIC + bytes([1]) + struct.pack(">Q", enc.key_id)
            + pack_bytes(enc.nonce) + pack_bytes(name) + enc.ciphertext)


def deserialize_encrypted(data):
    r = Reader(data)
    r.magic(CONTENT_MAGIC)
    if r.u8() != 1:
        raise FormatError("unsupported content format version")
    key_id = r.u64()
    nonce = r.blob()
    try:
        name = r.blob().decode()
    except UnicodeDecodeError:
        raise FormatError("object name is not UTF-8") from None
    return EncryptedContent(name, nonce, r.data[r.pos:], key_id)


def _subkeys(key_bytes):
    return (hashlib.sha256(b"accconf-enc\x00" + key_bytes).digest(),
            hashlib.sha256(b"accconf-mac\x00" + key_bytes).digest())


def keystream(enc_key, nonce, length, start_block=0):
    blocks = (length + 31) // 32
    stream = b"".join(hashlib.sha256(enc_key + nonce + struct.pack(">Q", start_block + i)).digest()
                      for i in range(blocks))
    return stream[:length]


def _xor(data, stream):
    if not data:
        return b""
    return (int.from_bytes(data, "big") ^ int.from_bytes(stream, "big")).to_bytes(len(data), "big")


def _tag(mac_key, object_name, nonce, key_id, body):
    header = object_name.encode() + b"\x00" + struct.pack(">Q", key_id) + nonce
    return hmac.new(mac_key, struct.pack(">I", len(header)) + header + body, hashlib.sha256).digest()


def encrypt_content(plaintext, key_bytes, nonce, object_name="", key_id=0):
    """Hash-counter keystream XOR plus an HMAC tag; deterministic for a fixed nonce."""
    if not key_bytes:
        raise ValueError("key must be non-empty")
    enc_key, mac_key = _subkeys(key_bytes)
    body = _xor(plaintext, keystream(enc_key, nonce, len(plaintext)))
    return EncryptedContent(object_name, nonce, body + _tag(mac_key, object_name, nonce, key_id, body), key_id)


def decrypt_content(encrypted, key_bytes):
    if not key_bytes:
        raise ValueError("key must be non-empty")
    if len(encrypted.ciphertext) < TAG_BYTES:
        raise AuthenticationError("ciphertext shorter than its tag")
    enc_key, mac_key = _subkeys(key_bytes)
    body, tag = encrypted.ciphertext[:-TAG_BYTES], encrypted.ciphertext[-TAG_BYTES:]
    expected = _tag(mac_key, encrypted.object_name, encrypted.nonce, encrypted.key_id, body)
    if not hmac.compare_digest(tag, expected):
        raise AuthenticationError("authentication tag mismatch")
    return _xor(body, keystream(enc_key, encrypted.nonce, len(body)))


def chunk_object(name_prefix, payload, chunk_size=DEFAULT_CHUNK_SIZE, numbering=Numbering.SEQUENTIAL, seed=0):
    """Split ``payload`` into named chunks; an empty payload still yields one (empty) chunk."""
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    numbering = Numbering(numbering)
    pieces = [payload[i:i + chunk_size] for i in range(0, len(payload), chunk_size)] or [b""]
    if numbering is Numbering.SEQUENTIAL:
        width = max(3, len(str(len(pieces))))
        ids = [str(i + 1).zfill(width) for i in range(len(pieces))]
    else:
        rng = DeterministicRNG(seed, f"chunk-ids:{name_prefix}")
        ids, seen = [FIRST_CHUNK_ID], {FIRST_CHUNK_ID}
        while len(ids) < len(pieces):
            token = f"{rng.getrandbits(64):016x}"
            if token not in seen:
                seen.add(token)
                ids.append(token)
    chunks = []
    for i, piece in enumerate(pieces):
        nxt = ids[i + 1] if numbering is Numbering.RANDOM and i + 1 < len(ids) else None
        chunks.append(Chunk(name_prefix.with_chunk(ids[i]), piece, i, nxt))
    return chunks


def reassemble(chunks, numbering=Numbering.SEQUENTIAL):
    """Inverse of chunk_object. Random mode follows the next-id chain from the first chunk."""
    if Numbering(numbering) is Numbering.SEQUENTIAL:
        return b"".join(c.payload for c in sorted(chunks, key=lambda c: c.seq_index))
    by_id = {c.name.chunk_id: c for c in chunks}
    out, cid, seen = [], FIRST_CHUNK_ID, set()
    while cid is not None:
        if cid in seen or cid not in by_id:
            raise FormatError(f"broken chunk chain at {cid!r}")
        seen.add(cid)
        out.append(by_id[cid].payload)
        cid = by_id[cid].next_chunk_id
    if len(seen) != len(by_id):
        raise FormatError("chunks outside the chain")
    return b"".join(out)


# -- on-disk chunk store ------------------------------------------------------------

def chunk_filename(name):
    return quote(str(name), safe="")


def manifest_filename(prefix):
    return quote(str(prefix), safe="") + ".manifest.json"


def write_chunks(directory, chunks, numbering, key_id=0):
    """One file per chunk (u8 next-id length, next id, payload) plus a JSON manifest."""
    numbering = Numbering(numbering)
    for c in chunks:
        nxt = (c.next_chunk_id or "").encode()
        atomic_write(os.path.join(directory, chunk_filename(c.name)), bytes([len(nxt)]) + nxt + c.payload)
    prefix = chunks[0].name.with_chunk("")
    manifest = {
        "object_name": str(prefix),
        "chunk_count": len(chunks),
        "numbering": numbering.value,
        "first_chunk_id": chunks[0].name.chunk_id,
        "key_id": key_id,
    }
    path = os.path.join(directory, manifest_filename(prefix))
    atomic_write(path, (json.dumps(manifest, indent=2) + "\n").encode())
    return path


def read_chunks(directory, manifest_path):
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    prefix = ContentName.parse(manifest["object_name"])
    numbering = Numbering(manifest["numbering"])
    chunks = []
    width = max(3, len(str(manifest["chunk_count"])))
    cid = manifest["first_chunk_id"]
    for i in range(manifest["chunk_count"]):
        if numbering is Numbering.SEQUENTIAL:
            cid = str(i + 1).zfill(width)
        elif cid is None:
            raise FormatError("chunk chain ended early")
        name = prefix.with_chunk(cid)
        try:
            with open(os.path.join(directory, chunk_filename(name)), "rb") as fh:
                raw = fh.read()
        except FileNotFoundError:
            raise FormatError(f"missing chunk {name}") from None
        if not raw or len(raw) < 1 + raw[0]:
            raise FormatError(f"corrupt chunk file for {name}")
        nxt = raw[1:1 + raw[0]].decode() or None
        chunks.append(Chunk(name, raw[1 + raw[0]:], i, nxt))
        cid = nxt
    return manifest, reassemble(chunks, numbering)
