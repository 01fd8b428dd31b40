"""Binary field container with a JSON metadata sidecar.

Layout of a ``.cwf`` file::

    bytes 0..3    magic  b"CWF1"
    bytes 4..7    header length (uint32, little-endian)
    header        UTF-8 JSON: format_version, blocks, extents, counts, side
    payload       complex128 values, little-endian, row-major node order

The sidecar ``<path>.json`` repeats the header and records payload size and
a SHA-256 checksum of the payload bytes.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .lattice import BlockPartition, Grid, LatticeError, SampledField, make_grid

__all__ = ["save_field", "load_field", "FieldIOError"]

MAGIC = b"CWF1"
FORMAT_VERSION = 1


class FieldIOError(IOError):
    """Raised on malformed or inconsistent field containers."""


def _header(f: SampledField) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "blocks": [list(b) for b in f.grid.partition.blocks],
        "extents": list(f.grid.extents),
        "counts": list(f.grid.counts),
        "side": f.side,
    }


def save_field(f: SampledField, path) -> Path:
    """Write field + sidecar; returns the container path."""
    path = Path(path)
    header = json.dumps(_header(f), sort_keys=True).encode("utf-8")
    payload = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(payload)
    sidecar = _header(f)
    sidecar["payload_bytes"] = len(payload)
    sidecar["sha256"] = hashlib.sha256(payload).hexdigest()
    with open(path.with_suffix(path.suffix + ".json"), "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def load_field(path) -> SampledField:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise FieldIOError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        (hlen,) = struct.unpack("<I", fh.read(4))
        try:
            header = json.loads(fh.read(hlen).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FieldIOError(f"{path}: unreadable header: {exc}") from exc
        if header.get("format_version") != FORMAT_VERSION:
            raise FieldIOError(
                f"{path}: unsupported format_version {header.get('format_version')}"
            )
        payload = fh.read()
    try:
        grid = make_grid(BlockPartition(header["blocks"]),
                         header["extents"], header["counts"])
    except (KeyError, LatticeError) as exc:
        raise FieldIOError(f"{path}: bad grid header: {exc}") from exc
    expected = int(np.prod(grid.shape)) * 16
    if len(payload) != expected:
        raise FieldIOError(
            f"{path}: payload has {len(payload)} bytes, expected {expected}"
        )
    values = np.frombuffer(payload, dtype="<c16").reshape(grid.shape)
    return SampledField(grid, header["side"], values.copy())
