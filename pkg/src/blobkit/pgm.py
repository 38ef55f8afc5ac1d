"""Binary PGM (P5) reading and writing for masks.

Wire rule: any nonzero sample is foreground. Emission writes 255 for
foreground, 0 for background, maxval 255. Comments (# ...) in the header
are tolerated on read, never written.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError
from .geometry import BinaryMask


def write_pgm(mask: BinaryMask) -> bytes:
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    body = np.where(mask.array, 255, 0).astype(np.uint8).tobytes()
    return header + body


def read_pgm(data: bytes) -> BinaryMask:
    """Parse a binary PGM; raises ParseError on any malformation."""
    if not data.startswith(b"P5"):
        raise ParseError("not a binary PGM: missing P5 magic")
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        # Skip whitespace and comment lines between header tokens.
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError("truncated PGM header")
        try:
            tokens.append(int(data[start:pos]))
        except ValueError:
            raise ParseError(f"bad PGM header token {data[start:pos]!r}") from None
    width, height, maxval = tokens
    if width < 1 or height < 1:
        raise ParseError(f"bad PGM dimensions {width}x{height}")
    if not (0 < maxval < 256):
        raise ParseError(f"unsupported PGM maxval {maxval} (need 1..255)")
    pos += 1  # exactly one whitespace byte after maxval
    expected = width * height
    body = data[pos : pos + expected]
    if len(body) != expected:
        raise ParseError(f"PGM body has {len(body)} bytes, expected {expected}")
    arr = np.frombuffer(body, dtype=np.uint8).reshape(height, width)
    return BinaryMask(arr != 0)
