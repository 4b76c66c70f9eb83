"""Bit-exact hologram file format.

Layout (little-endian throughout):

    magic    8 bytes  b"QAMNET1\\0"
    version  u32      1
    N        u32
    P        u32
    matrix   N·N complex entries (f64 real, f64 imag), row-major
    stored   P·N complex entries, one pattern after another
    labels   P × (u32 length, UTF-8 bytes); length 0 means no label
    crc32    u32      CRC-32 of every preceding byte
"""

import logging
import struct
import zlib
from pathlib import Path
from typing import List, Optional

import numpy as np

from qamnet.tools.memory import Hologram
from qamnet.validation import validate_hologram

logger = logging.getLogger(__name__)

MAGIC = b"QAMNET1\x00"
VERSION = 1
HEADER = struct.Struct("<III")
U32 = struct.Struct("<I")
COMPLEX_LE = np.dtype("<c16")


class HologramFileError(ValueError):
    """Raised when a hologram file cannot be read back faithfully."""

    pass


class BadMagicError(HologramFileError):
    pass


class VersionMismatchError(HologramFileError):
    pass


class ChecksumError(HologramFileError):
    pass


class TruncatedFileError(HologramFileError):
    pass


class InvariantViolationError(HologramFileError):
    """The payload decoded but describes an impossible hologram."""

    pass


def to_bytes(h: Hologram) -> bytes:
    """Serialize a hologram into the versioned, checksummed byte layout."""
    parts = [
        MAGIC,
        HEADER.pack(VERSION, h.dimension, h.pattern_count),
        h.matrix.astype(COMPLEX_LE).tobytes(order="C"),
        h.stored.astype(COMPLEX_LE).tobytes(order="C"),
    ]
    for label in h.labels:
        encoded = (label or "").encode("utf-8")
        parts.append(U32.pack(len(encoded)))
        parts.append(encoded)

    body = b"".join(parts)
    return body + U32.pack(zlib.crc32(body))


def _take(data: bytes, offset: int, size: int, what: str) -> bytes:
    if offset + size > len(data):
        raise TruncatedFileError(f"file ends inside {what}")
    return data[offset : offset + size]


def from_bytes(data: bytes, verify: bool = True) -> Hologram:
    """Decode a hologram and, by default, verify its invariants.

    Raises:
        BadMagicError: If the file does not start with the format magic
        ChecksumError: If the CRC-32 does not match
        VersionMismatchError: If the version is not supported
        TruncatedFileError: If the declared sizes do not fit the payload
        InvariantViolationError: If the decoded hologram is not Hermitian, has the
            wrong trace or disagrees with its stored patterns
    """
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise BadMagicError(f"bad magic {data[:len(MAGIC)]!r}; not a hologram file")
    if len(data) < len(MAGIC) + HEADER.size + U32.size:
        raise TruncatedFileError(f"file too short for a header ({len(data)} bytes)")

    body, (expected_crc,) = data[:-U32.size], U32.unpack(data[-U32.size :])
    actual_crc = zlib.crc32(body)
    if actual_crc != expected_crc:
        raise ChecksumError(f"checksum mismatch: stored {expected_crc:08x}, computed {actual_crc:08x}")

    version, n, p = HEADER.unpack_from(body, len(MAGIC))
    if version != VERSION:
        raise VersionMismatchError(f"unsupported version {version} (expected {VERSION})")
    if n < 1 or p < 1:
        raise InvariantViolationError(f"invalid sizes N={n}, P={p}")

    offset = len(MAGIC) + HEADER.size
    matrix_bytes = _take(body, offset, n * n * COMPLEX_LE.itemsize, "matrix")
    offset += len(matrix_bytes)
    stored_bytes = _take(body, offset, p * n * COMPLEX_LE.itemsize, "stored patterns")
    offset += len(stored_bytes)

    labels: List[Optional[str]] = []
    for k in range(p):
        (length,) = U32.unpack(_take(body, offset, U32.size, f"label {k} length"))
        offset += U32.size
        raw = _take(body, offset, length, f"label {k}")
        offset += length
        try:
            labels.append(raw.decode("utf-8") if length else None)
        except UnicodeDecodeError as e:
            raise HologramFileError(f"label {k} is not valid UTF-8: {e}")

    if offset != len(body):
        raise HologramFileError(f"{len(body) - offset} unexpected trailing bytes")

    matrix = np.frombuffer(matrix_bytes, dtype=COMPLEX_LE).reshape(n, n).astype(np.complex128)
    stored = np.frombuffer(stored_bytes, dtype=COMPLEX_LE).reshape(p, n).astype(np.complex128)
    hologram = Hologram(matrix=matrix, stored=stored, labels=tuple(labels))

    if verify:
        result = validate_hologram(hologram)
        if result.is_critical():
            failed = "; ".join(c.message for c in result.get_failed_checks() if c.message)
            raise InvariantViolationError(f"hologram invariants violated: {failed}")

    return hologram


def save(h: Hologram, path: Path) -> None:
    """Write a hologram file, creating parent directories as needed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = to_bytes(h)
    with open(path, "wb") as f:
        f.write(payload)
    logger.info(f"Saved hologram N={h.dimension}, P={h.pattern_count} to {path} ({len(payload)} bytes)")


def load(path: Path) -> Hologram:
    """Read and verify a hologram file.

    Raises:
        FileNotFoundError: If the file does not exist
        HologramFileError: If the file is corrupt or not a hologram file
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    with open(path, "rb") as f:
        data = f.read()
    try:
        hologram = from_bytes(data)
    except HologramFileError as e:
        raise type(e)(f"{path}: {e}") from e
    logger.info(f"Loaded hologram N={hologram.dimension}, P={hologram.pattern_count} from {path}")
    return hologram
