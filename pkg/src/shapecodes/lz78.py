"""LZ78 compression to a bit sequence.

Token ``t`` (0-based) is the dictionary index of the longest known phrase,
written in ``t.bit_length()`` bits, followed by the next input byte in 8
bits.  When the input ends inside a known phrase the last token carries
the index only.  Bit sequences are ``uint8`` arrays of 0/1 values.
"""

from __future__ import annotations

import numpy as np

from .errors import CorruptStream


def bits_to_str(bits) -> str:
    arr = np.asarray(bits, dtype=np.uint8)
    return (arr + ord("0")).tobytes().decode("ascii")


def str_to_bits(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0")


def lz78_tokens(data: bytes):
    """Parse ``data`` into ``(index, byte)`` pairs; the last byte may be None."""
    table = {}
    tokens = []
    node = 0
    for b in data:
        nxt = table.get((node, b))
        if nxt is None:
            tokens.append((node, b))
            table[(node, b)] = len(tokens)
            node = 0
        else:
            node = nxt
    if node:
        tokens.append((node, None))
    return tokens


def lz78_compress(data: bytes) -> np.ndarray:
    parts = []
    for t, (idx, b) in enumerate(lz78_tokens(bytes(data))):
        w = t.bit_length()
        if w:
            parts.append(format(idx, f"0{w}b"))
        if b is not None:
            parts.append(format(b, "08b"))
    return str_to_bits("".join(parts))


def lz78_decompress(bits) -> bytes:
    s = bits_to_str(bits)
    n = len(s)
    phrases = [b""]
    out = []
    pos = 0
    t = 0
    while pos < n:
        w = t.bit_length()
        if pos + w > n:
            raise CorruptStream(f"truncated index in token {t}")
        idx = int(s[pos:pos + w], 2) if w else 0
        pos += w
        if idx >= len(phrases):
            raise CorruptStream(f"token {t} refers to unknown phrase {idx}")
        if pos == n:
            if idx == 0:
                raise CorruptStream("final token has neither phrase nor byte")
            out.append(phrases[idx])
            break
        if pos + 8 > n:
            raise CorruptStream(f"truncated byte in token {t}")
        phrase = phrases[idx] + bytes((int(s[pos:pos + 8], 2),))
        pos += 8
        phrases.append(phrase)
        out.append(phrase)
        t += 1
    return b"".join(out)
