"""Readers and writers for the on-disk interchange formats.

All binary files are little-endian:

* sample embeddings: magic ``SEMB``, u32 version=1, u32 M, u32 d, then
  M*d float32 row-major;
* token embeddings:  magic ``SEMT``, u32 version=1, u32 M, u32 d, then per
  sample a u32 token count n_i followed by n_i*d float32;
* layout cache:      magic ``SEML``, u32 version=1, u64 seed, u32 M, then
  M*2 float32 positions, then a u32-length-prefixed JSON parameter block.

Text files (corpus, lexicon, external importance) are JSON lines; parse
errors report the 1-based line number.
"""

from __future__ import annotations

import json
import struct
from typing import Iterator

import numpy as np

from .errors import FormatError

SAMPLE_MAGIC = b"SEMB"
TOKEN_MAGIC = b"SEMT"
LAYOUT_MAGIC = b"SEML"
FORMAT_VERSION = 1


class _Reader:
    """Cursor over a byte buffer that reports offsets in error messages."""

    def __init__(self, data: bytes, path: str):
        self.data = data
        self.path = path
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(
                f"{self.path}: truncated at offset {self.pos} "
                f"(needed {n} bytes, {len(self.data) - self.pos} left)"
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def f32_array(self, count: int) -> np.ndarray:
        raw = self.take(4 * count)
        return np.frombuffer(raw, dtype="<f4", count=count)

    def expect_magic(self, magic: bytes) -> None:
        got = self.take(4)
        if got != magic:
            raise FormatError(
                f"{self.path}: bad magic at offset 0: expected {magic!r}, got {got!r}"
            )

    def expect_version(self, version: int) -> None:
        offset = self.pos
        got = self.u32()
        if got != version:
            raise FormatError(
                f"{self.path}: unsupported version {got} at offset {offset} "
                f"(expected {version})"
            )

    def done(self) -> None:
        if self.pos != len(self.data):
            raise FormatError(
                f"{self.path}: {len(self.data) - self.pos} trailing bytes at offset {self.pos}"
            )


def read_sample_embeddings(path) -> np.ndarray:
    """Load a SEMB file as an (M, d) float64 matrix."""
    reader = _Reader(open(path, "rb").read(), str(path))
    reader.expect_magic(SAMPLE_MAGIC)
    reader.expect_version(FORMAT_VERSION)
    m = reader.u32()
    d = reader.u32()
    if d == 0:
        raise FormatError(f"{path}: embedding dimension is zero")
    matrix = reader.f32_array(m * d).reshape(m, d).astype(np.float64)
    reader.done()
    return matrix


def write_sample_embeddings(path, matrix: np.ndarray) -> None:
    matrix = np.asarray(matrix)
    with open(path, "wb") as fh:
        fh.write(SAMPLE_MAGIC)
        fh.write(struct.pack("<III", FORMAT_VERSION, matrix.shape[0], matrix.shape[1]))
        fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def read_token_embeddings(path) -> list[np.ndarray]:
    """Load a SEMT file as a ragged list of (n_i, d) float64 matrices."""
    reader = _Reader(open(path, "rb").read(), str(path))
    reader.expect_magic(TOKEN_MAGIC)
    reader.expect_version(FORMAT_VERSION)
    m = reader.u32()
    d = reader.u32()
    if d == 0:
        raise FormatError(f"{path}: embedding dimension is zero")
    matrices = []
    for i in range(m):
        offset = reader.pos
        n_i = reader.u32()
        if n_i == 0:
            raise FormatError(f"{path}: sample {i} has zero tokens (offset {offset})")
        matrices.append(reader.f32_array(n_i * d).reshape(n_i, d).astype(np.float64))
    reader.done()
    return matrices


def write_token_embeddings(path, matrices) -> None:
    dims = {m.shape[1] for m in matrices}
    if len(dims) > 1:
        raise ValueError(f"inconsistent token embedding dimensions: {sorted(dims)}")
    d = dims.pop() if dims else 0
    with open(path, "wb") as fh:
        fh.write(TOKEN_MAGIC)
        fh.write(struct.pack("<III", FORMAT_VERSION, len(matrices), d))
        for m in matrices:
            fh.write(struct.pack("<I", m.shape[0]))
            fh.write(np.ascontiguousarray(m, dtype="<f4").tobytes())


def read_layout_cache(path) -> tuple[np.ndarray, int, dict]:
    """Load a SEML file: (positions, seed, params dict)."""
    reader = _Reader(open(path, "rb").read(), str(path))
    reader.expect_magic(LAYOUT_MAGIC)
    reader.expect_version(FORMAT_VERSION)
    seed = reader.u64()
    m = reader.u32()
    positions = reader.f32_array(m * 2).reshape(m, 2).astype(np.float64)
    block_len = reader.u32()
    block = reader.take(block_len)
    try:
        params = json.loads(block.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: invalid parameter block: {exc}") from exc
    reader.done()
    return positions, seed, params


def write_layout_cache(path, positions: np.ndarray, seed: int, params: dict) -> None:
    block = json.dumps(params, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(LAYOUT_MAGIC)
        fh.write(struct.pack("<IQI", FORMAT_VERSION, seed, positions.shape[0]))
        fh.write(np.ascontiguousarray(positions, dtype="<f4").tobytes())
        fh.write(struct.pack("<I", len(block)))
        fh.write(block)


def iter_jsonl(path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, object) for each non-blank line of a JSONL file."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise FormatError(f"{path}: line {lineno}: expected a JSON object")
            yield lineno, obj


def write_jsonl(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
