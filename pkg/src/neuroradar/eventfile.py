"""NRAD event-stream file format (uncompressed interchange form).

Layout, little-endian:

    offset  size  field
    0       4     magic 'NRAD'
    4       1     version (1)
    5       1     flags (0)
    6       8     tick_rate, u64 Hz
    14      8     duration_ticks, u64
    22      4     event_count, u32
    26      ...   event_count records of:
                    u64 t_ticks, i8 polarity, 3 pad bytes (12 bytes each)

Timestamps must strictly increase. Reads are validated field by field
and failures name the offending byte offset.
"""

from __future__ import annotations

import struct

import numpy as np

from .encoder import EventStream
from .errors import ContractError, FormatError

NRAD_MAGIC = b"NRAD"
NRAD_VERSION = 1
HEADER_SIZE = 26
RECORD_SIZE = 12

_RECORD_DTYPE = np.dtype([("t", "<u8"), ("p", "i1"), ("pad", "V3")])


def stream_to_bytes(stream: EventStream) -> bytes:
    stream.validate()
    tick_rate = round(stream.tick_rate)
    if abs(tick_rate - stream.tick_rate) > 1e-6:
        raise ContractError("NRAD stores integer tick rates")
    head = struct.pack(
        "<4sBBQQI",
        NRAD_MAGIC,
        NRAD_VERSION,
        0,
        tick_rate,
        stream.duration_ticks,
        stream.count,
    )
    rec = np.zeros(stream.count, dtype=_RECORD_DTYPE)
    rec["t"] = stream.t_ticks
    rec["p"] = stream.polarity
    return head + rec.tobytes()


def stream_from_bytes(blob: bytes) -> EventStream:
    if len(blob) < HEADER_SIZE:
        raise FormatError("NRAD header truncated", offset=len(blob))
    if blob[0:4] != NRAD_MAGIC:
        raise FormatError(f"bad magic {blob[0:4]!r}, expected {NRAD_MAGIC!r}", offset=0)
    if blob[4] != NRAD_VERSION:
        raise FormatError(f"unsupported version {blob[4]}", offset=4)
    tick_rate, duration_ticks, count = struct.unpack_from("<QQI", blob, 6)
    expected = HEADER_SIZE + count * RECORD_SIZE
    if len(blob) != expected:
        raise FormatError(
            f"event_count {count} implies {expected} bytes, file has {len(blob)}",
            offset=22,
        )
    rec = np.frombuffer(blob, dtype=_RECORD_DTYPE, count=count, offset=HEADER_SIZE)
    t = rec["t"].astype(np.uint64)
    p = rec["p"].astype(np.int8)
    if count:
        diffs = np.diff(t.astype(np.int64))
        if np.any(diffs <= 0):
            bad = int(np.flatnonzero(diffs <= 0)[0]) + 1
            raise FormatError(
                "timestamps not strictly increasing",
                offset=HEADER_SIZE + bad * RECORD_SIZE,
            )
        if int(t[-1]) > duration_ticks:
            raise FormatError(
                "timestamp beyond duration_ticks",
                offset=HEADER_SIZE + (count - 1) * RECORD_SIZE,
            )
        bad_pol = np.flatnonzero(np.abs(p.astype(np.int64)) != 1)
        if len(bad_pol):
            raise FormatError(
                f"polarity {int(p[bad_pol[0]])} not in {{-1, +1}}",
                offset=HEADER_SIZE + int(bad_pol[0]) * RECORD_SIZE + 8,
            )
    return EventStream(
        tick_rate=float(tick_rate),
        t_ticks=t,
        polarity=p,
        duration_ticks=int(duration_ticks),
    )


def write_stream(stream: EventStream, path) -> int:
    blob = stream_to_bytes(stream)
    with open(path, "wb") as fh:
        fh.write(blob)
    return len(blob)


def read_stream(path) -> EventStream:
    with open(path, "rb") as fh:
        return stream_from_bytes(fh.read())
