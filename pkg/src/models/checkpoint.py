"""
Binary checkpoint files.

Layout (little-endian):
    b"SKRD" | u32 version | u16 len + kind | 32-byte vocab hash
    | u32 len + JSON header {"architecture", "config", "manifest"}
    | f64 blobs in manifest order | u32 CRC32 of everything before it

Loading checks the magic, then the version, then the checksum, so a file
written by another format version is reported as such even if its layout
differs.
"""

import json
import logging
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from src.errors import CheckpointIntegrityError, CheckpointVersionError
from src.models.base import Network
from src.models.bow import BoWClassifier
from src.models.decision import DecisionNet
from src.models.lstm import LSTMClassifier

logger = logging.getLogger(__name__)

MAGIC = b"SKRD"
FORMAT_VERSION = 1
HASH_BYTES = 32

MODEL_KINDS: dict[str, type] = {
    "bow": BoWClassifier,
    "lstm": LSTMClassifier,
    "decision": DecisionNet,
}


@dataclass
class Checkpoint:
    kind: str
    model: Network
    vocab_hash: bytes = b"\x00" * HASH_BYTES
    config: dict = field(default_factory=dict)
    version: int = FORMAT_VERSION


def encode_checkpoint(model: Network, vocab_hash: Optional[bytes] = None, config: Optional[dict] = None) -> bytes:
    vocab_hash = vocab_hash or b"\x00" * HASH_BYTES
    if len(vocab_hash) != HASH_BYTES:
        raise ValueError(f"vocab hash must be {HASH_BYTES} bytes, got {len(vocab_hash)}")
    arrays = model.named_arrays()
    header = {
        "architecture": model.architecture(),
        "config": config or {},
        "manifest": [{"name": name, "shape": list(value.shape)} for name, value in arrays.items()],
    }
    kind = model.kind.encode("utf-8")
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        struct.pack("<H", len(kind)), kind,
        vocab_hash,
        struct.pack("<I", len(header_bytes)), header_bytes,
    ]
    parts.extend(np.ascontiguousarray(value, dtype="<f8").tobytes() for value in arrays.values())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def save_checkpoint(path, model: Network, vocab_hash: Optional[bytes] = None,
                    config: Optional[dict] = None) -> Path:
    """Write `model` to `path`; returns the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(model, vocab_hash, config))
    logger.debug("Saved %s checkpoint to %s", model.kind, path)
    return path


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointIntegrityError("checkpoint is truncated")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))[0]


def decode_checkpoint(data: bytes) -> Checkpoint:
    """
    Rebuild a checkpoint from bytes.

    Raises:
        CheckpointVersionError: written by another format version.
        CheckpointIntegrityError: bad magic, checksum mismatch or malformed body.
    """
    if len(data) < 8 or data[:4] != MAGIC:
        raise CheckpointIntegrityError("not a skimread checkpoint (bad magic)")
    version = struct.unpack("<I", data[4:8])[0]
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"checkpoint format version {version}, expected {FORMAT_VERSION}")
    if len(data) < 12:
        raise CheckpointIntegrityError("checkpoint is truncated")
    body, stored = data[:-4], struct.unpack("<I", data[-4:])[0]
    if zlib.crc32(body) != stored:
        raise CheckpointIntegrityError("checksum mismatch")

    reader = _Reader(body)
    reader.take(8)
    kind = reader.take(reader.unpack("<H")).decode("utf-8")
    vocab_hash = reader.take(HASH_BYTES)
    try:
        header = json.loads(reader.take(reader.unpack("<I")).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointIntegrityError(f"unreadable header: {e}") from e
    if kind not in MODEL_KINDS:
        raise CheckpointIntegrityError(f"unknown model kind {kind!r}")

    arrays = {}
    for entry in header["manifest"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        blob = reader.take(8 * count)
        arrays[entry["name"]] = np.frombuffer(blob, dtype="<f8").reshape(shape).astype(np.float64)
    if reader.pos != len(body):
        raise CheckpointIntegrityError(f"{len(body) - reader.pos} trailing bytes after the last blob")

    model = MODEL_KINDS[kind].from_architecture(header["architecture"])
    model.load_arrays(arrays)
    return Checkpoint(kind, model, vocab_hash, header.get("config", {}), version)


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    try:
        return decode_checkpoint(path.read_bytes())
    except (CheckpointVersionError, CheckpointIntegrityError) as e:
        raise type(e)(f"{path}: {e}") from e
