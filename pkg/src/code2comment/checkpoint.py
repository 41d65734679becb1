"""Binary checkpoint format.

Layout (little-endian)::

    b"C2C1"  u32 format version
    u32 src_vocab, tgt_vocab, embed, hidden, layers, attn   u8-prefixed mode
    u32-prefixed UTF-8 JSON metadata (vocabularies, training state, ...)
    u32 tensor count, then per tensor:
        u16-prefixed name, u8 ndim, u32 dims..., u64 element count,
        float64 data in row-major order

Loading then saving a checkpoint reproduces it byte for byte.
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path

import numpy as np

from .model import ContextMode, ModelConfig, ModelParams

MAGIC = b"C2C1"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def dumps(params: ModelParams, metadata: dict | None = None) -> bytes:
    cfg = params.config
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", FORMAT_VERSION))
    buf.write(struct.pack("<6I", cfg.src_vocab, cfg.tgt_vocab, cfg.embed, cfg.hidden,
                          cfg.layers, cfg.attn))
    mode = cfg.mode.value.encode()
    buf.write(struct.pack("<B", len(mode)) + mode)
    meta = json.dumps(metadata or {}, sort_keys=True, separators=(",", ":")).encode()
    buf.write(struct.pack("<I", len(meta)) + meta)
    buf.write(struct.pack("<I", len(params.tensors)))
    for name, arr in params.tensors.items():
        raw = name.encode()
        buf.write(struct.pack("<H", len(raw)) + raw)
        buf.write(struct.pack("<B", arr.ndim))
        buf.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        buf.write(struct.pack("<Q", arr.size))
        buf.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return buf.getvalue()


class _Reader:
    def __init__(self, data: bytes):
        self.data, self.pos = data, 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError("truncated checkpoint")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def loads(data: bytes) -> tuple[ModelParams, dict]:
    try:
        return _loads(data)
    except CheckpointError:
        raise
    except ValueError as exc:  # bad mode, JSON or UTF-8
        raise CheckpointError(f"corrupt checkpoint: {exc}") from None


def _loads(data: bytes) -> tuple[ModelParams, dict]:
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    (version,) = r.unpack("<I")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    src_v, tgt_v, embed, hidden, layers, attn = r.unpack("<6I")
    (n,) = r.unpack("<B")
    mode = ContextMode(r.take(n).decode())
    (n,) = r.unpack("<I")
    metadata = json.loads(r.take(n).decode())
    (count,) = r.unpack("<I")
    # six GRU tensors per layer on each side plus eight shared ones; checked
    # before any shape table is built from a possibly corrupted layer count
    if layers < 1 or count != 12 * layers + 8:
        raise CheckpointError(f"tensor count {count} does not fit {layers} layers")
    tensors = {}
    for _ in range(count):
        (n,) = r.unpack("<H")
        name = r.take(n).decode()
        (ndim,) = r.unpack("<B")
        shape = r.unpack(f"<{ndim}I")
        (size,) = r.unpack("<Q")
        if size != int(np.prod(shape, dtype=np.int64)):
            raise CheckpointError(f"{name}: element count does not match shape")
        arr = np.frombuffer(r.take(8 * size), dtype="<f8").reshape(shape)
        tensors[name] = arr.astype(np.float64, copy=True)
    if r.pos != len(data):
        raise CheckpointError("trailing bytes after last tensor")
    cfg = ModelConfig(src_v, tgt_v, embed, hidden, layers, attn, mode)
    try:
        return ModelParams(cfg, tensors), metadata
    except ValueError as exc:
        raise CheckpointError(str(exc)) from None


def save(path: str | Path, params: ModelParams, metadata: dict | None = None) -> None:
    Path(path).write_bytes(dumps(params, metadata))


def load(path: str | Path) -> tuple[ModelParams, dict]:
    return loads(Path(path).read_bytes())
