"""Shared binary container for checkpoints, replay buffers, and traces.

Byte layout (all integers little-endian):

    offset  size  field
    0       4     artifact magic (ASCII, identifies the payload type)
    4       4     u32 format version
    8       4     u32 header length H
    12      4     u32 CRC-32 of header+payload (everything after this field)
    16      H     UTF-8 JSON header: {"meta": {...}, "arrays": [{"name",
                  "shape"}, ...]}
    16+H    ...   array payloads, concatenated float64 little-endian in
                  C order, in header order

Arrays are always stored as float64; callers convert integer fields on
the way in/out.
"""

import json
import struct
import zlib

import numpy as np

from .errors import CheckpointError

_PREFIX = struct.Struct("<4sIII")


def pack(magic: bytes, version: int, meta: dict, arrays) -> bytes:
    """`arrays` is an ordered list of (name, ndarray)."""
    descriptors = []
    chunks = []
    for name, arr in arrays:
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        descriptors.append({"name": name, "shape": list(arr.shape)})
        chunks.append(arr.astype("<f8").tobytes())
    header = json.dumps({"meta": meta, "arrays": descriptors},
                        sort_keys=True).encode()
    body = header + b"".join(chunks)
    crc = zlib.crc32(body) & 0xFFFFFFFF
    return _PREFIX.pack(magic, version, len(header), crc) + body


def unpack(data: bytes, magic: bytes, max_version: int):
    """Returns (version, meta, {name: ndarray})."""
    if len(data) < _PREFIX.size:
        raise CheckpointError("payload truncated (missing prefix)")
    got_magic, version, header_len, crc = _PREFIX.unpack_from(data, 0)
    if got_magic != magic:
        raise CheckpointError(
            f"wrong payload type: expected {magic!r}, got {got_magic!r}")
    if version > max_version:
        raise CheckpointError(
            f"payload format version {version} is newer than supported "
            f"version {max_version}")
    body = data[_PREFIX.size:]
    if len(body) < header_len:
        raise CheckpointError("payload truncated (incomplete header)")
    if zlib.crc32(body) & 0xFFFFFFFF != crc:
        raise CheckpointError("payload corrupt (checksum mismatch)")
    try:
        header = json.loads(body[:header_len].decode())
        meta = header["meta"]
        descriptors = header["arrays"]
    except (ValueError, KeyError) as exc:
        raise CheckpointError(f"payload header unreadable: {exc}") from exc

    arrays = {}
    offset = header_len
    for desc in descriptors:
        shape = tuple(int(s) for s in desc["shape"])
        count = 1
        for s in shape:
            count *= s
        nbytes = count * 8
        if offset + nbytes > len(body):
            raise CheckpointError("payload truncated (incomplete array data)")
        arrays[desc["name"]] = np.frombuffer(
            body, dtype="<f8", count=count, offset=offset
        ).astype(np.float64).reshape(shape)
        offset += nbytes
    if offset != len(body):
        raise CheckpointError("payload has trailing bytes")
    return version, meta, arrays
