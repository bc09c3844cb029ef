"""8-bit PGM reading (P2 and P5) and writing (P5)."""

import re
from pathlib import Path

import numpy as np


def _tokens(data: bytes, count: int, start: int = 0):
    """First ``count`` header tokens, skipping comments; returns (tokens, offset after)."""
    toks = []
    pos = start
    pattern = re.compile(rb"\s*(#[^\n]*\n|\S+)")
    while len(toks) < count:
        m = pattern.match(data, pos)
        if not m:
            raise ValueError("truncated PGM header")
        pos = m.end()
        if not m.group(1).startswith(b"#"):
            toks.append(m.group(1))
    return toks, pos


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    (magic, w, h, maxval), pos = _tokens(data, 4)
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a P2/P5 PGM file")
    w, h, maxval = int(w), int(h), int(maxval)
    if not 0 < maxval < 256:
        raise ValueError(f"{path}: only 8-bit PGM is supported (maxval {maxval})")
    if magic == b"P5":
        raw = data[pos + 1:pos + 1 + w * h]
        if len(raw) != w * h:
            raise ValueError(f"{path}: expected {w * h} pixels, found {len(raw)}")
        pixels = np.frombuffer(raw, dtype=np.uint8)
    else:
        values = data[pos:].split()
        if len(values) < w * h:
            raise ValueError(f"{path}: expected {w * h} pixels, found {len(values)}")
        pixels = np.array([int(x) for x in values[:w * h]], dtype=np.uint8)
    return pixels.reshape(h, w).astype(float)


def write_pgm(path, image, plain: bool = False) -> None:
    """Write an image, rounding and clipping to 0..255."""
    img = np.clip(np.rint(np.asarray(image, dtype=float)), 0, 255).astype(np.uint8)
    h, w = img.shape
    if plain:
        lines = "\n".join(" ".join(str(int(x)) for x in row) for row in img)
        Path(path).write_text(f"P2\n{w} {h}\n255\n{lines}\n")
    else:
        Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode() + img.tobytes())
