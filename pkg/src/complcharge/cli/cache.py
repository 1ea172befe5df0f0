"""Binary cache files for stage results.

Layout (all integers and floats little-endian)::

    bytes 0..7    magic b"CMPLCHG1"
    bytes 8..15   uint64 length L of the JSON header
    next L bytes  UTF-8 JSON header, keys sorted, no whitespace
    remainder     float64 payload

The header carries ``fingerprint``, ``n``, ``kind``, ``layout`` and ``count``
(number of payload floats) plus stage-specific ``meta``. Nothing
time-dependent is written, so equal inputs give byte-identical files.
"""
from __future__ import annotations

import contextlib
import json
import os
import struct
from pathlib import Path

import numpy as np

MAGIC = b"CMPLCHG1"
_LEN = struct.Struct("<Q")


class CacheFormatError(ValueError):
    pass


def encode(kind: str, fingerprint: str, n: int, layout: str, payload, meta=None) -> bytes:
    data = np.ascontiguousarray(payload, dtype="<f8").ravel()
    header = {"kind": kind, "fingerprint": fingerprint, "n": int(n), "layout": layout,
              "count": int(data.size), "meta": meta or {}}
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return MAGIC + _LEN.pack(len(blob)) + blob + data.tobytes()


def decode(raw: bytes):
    """Return ``(header, payload)`` from cache bytes."""
    if raw[:8] != MAGIC:
        raise CacheFormatError("bad magic; not a complcharge cache file")
    if len(raw) < 16:
        raise CacheFormatError("truncated cache header")
    (length,) = _LEN.unpack(raw[8:16])
    end = 16 + length
    try:
        header = json.loads(raw[16:end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CacheFormatError(f"corrupt cache header: {exc}") from None
    body = raw[end:]
    if len(body) != 8 * header["count"]:
        raise CacheFormatError(
            f"payload holds {len(body)} bytes, header announces {header['count']} floats")
    return header, np.frombuffer(body, dtype="<f8").astype(np.float64)


def write(path, kind, fingerprint, n, layout, payload, meta=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(encode(kind, fingerprint, n, layout, payload, meta))
    os.replace(tmp, path)
    return path


def read(path, fingerprint: str | None = None):
    """Load a cache entry; ``None`` when absent or built from another config."""
    path = Path(path)
    if not path.exists():
        return None
    header, payload = decode(path.read_bytes())
    if fingerprint is not None and header.get("fingerprint") != fingerprint:
        return None
    return header, payload


@contextlib.contextmanager
def locked(cache_dir):
    """Advisory exclusive lock on ``cache_dir/.lock`` for the duration of a stage."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    try:
        import fcntl
    except ImportError:  # pragma: no cover - non-POSIX
        yield
        return
    with open(cache_dir / ".lock", "w") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)
