"""Named trainable tensors with gradients and portable serialization.

Weight file layout, all integers little-endian unsigned 32-bit:
magic ``NKDW`` | version | tensor count | per tensor: name length, UTF-8
name, rank, one dim per rank, then the row-major float64 payload
(little-endian). Payload order follows insertion order of the bank.
"""

from __future__ import annotations

import struct

import numpy as np


MAGIC = b"NKDW"
VERSION = 1


class NNError(ValueError):
    """Bad tensor data, dimensions, or serialized weight stream."""


class ParamBank:
    """Ordered map of named float64 arrays plus parallel gradient buffers."""

    def __init__(self) -> None:
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def add(self, name: str, shape: tuple[int, ...], rng: np.random.Generator | None = None) -> np.ndarray:
        """Create a tensor: Glorot-uniform for matrices, zeros for vectors."""
        if name in self.params:
            raise NNError(f"duplicate tensor name {name!r}")
        if any(d <= 0 for d in shape):
            raise NNError(f"non-positive dimension in {name!r}: {shape}")
        if len(shape) >= 2:
            if rng is None:
                raise NNError(f"matrix tensor {name!r} needs an rng to initialize")
            fan_in, fan_out = shape[-1], shape[0]
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            value = rng.uniform(-bound, bound, size=shape)
        else:
            value = np.zeros(shape)
        self.params[name] = np.asarray(value, dtype=np.float64)
        self.grads[name] = np.zeros(shape, dtype=np.float64)
        return self.params[name]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name]

    def __contains__(self, name: str) -> bool:
        return name in self.params

    def grad(self, name: str) -> np.ndarray:
        return self.grads[name]

    def names(self) -> list[str]:
        return list(self.params)

    def size(self) -> int:
        return sum(p.size for p in self.params.values())

    def zero_grads(self) -> None:
        for g in self.grads.values():
            g.fill(0.0)

    def grad_norm(self) -> float:
        total = 0.0
        for g in self.grads.values():
            total += float(np.sum(g * g))
        return float(np.sqrt(total))

    def step(self, lr: float, clip: float | None = 5.0) -> None:
        """One SGD update from the accumulated gradients."""
        scale = 1.0
        if clip is not None:
            norm = self.grad_norm()
            if norm > clip:
                scale = clip / norm
        for name, p in self.params.items():
            p -= lr * scale * self.grads[name]

    def snapshot_grads(self) -> dict[str, np.ndarray]:
        return {name: g.copy() for name, g in self.grads.items()}

    def equal(self, other: "ParamBank") -> bool:
        if self.names() != other.names():
            return False
        return all(
            p.shape == other.params[n].shape
            and p.tobytes() == other.params[n].tobytes()
            for n, p in self.params.items()
        )


def save_params(bank: ParamBank) -> bytes:
    out = [MAGIC, struct.pack("<II", VERSION, len(bank.params))]
    for name, tensor in bank.params.items():
        if not np.all(np.isfinite(tensor)):
            raise NNError(f"tensor {name!r} holds non-finite values")
        encoded = name.encode("utf-8")
        out.append(struct.pack("<I", len(encoded)))
        out.append(encoded)
        out.append(struct.pack("<I", tensor.ndim))
        out.append(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
        out.append(tensor.astype("<f8", copy=False).tobytes(order="C"))
    return b"".join(out)


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise NNError("truncated weight stream")
        piece = self.blob[self.pos : self.pos + n]
        self.pos += n
        return piece

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def load_params(blob: bytes) -> ParamBank:
    """Decode a weight stream; any corruption fails without a partial bank."""
    reader = _Reader(blob)
    if reader.take(4) != MAGIC:
        raise NNError("not a weight file (bad magic)")
    version = reader.u32()
    if version != VERSION:
        raise NNError(f"unsupported weight format version {version}")
    count = reader.u32()
    bank = ParamBank()
    for _ in range(count):
        name = reader.take(reader.u32()).decode("utf-8")
        rank = reader.u32()
        if rank > 8:
            raise NNError(f"implausible rank {rank} for {name!r}")
        shape = tuple(reader.u32() for _ in range(rank))
        n = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(reader.take(n * 8), dtype="<f8").reshape(shape)
        if not np.all(np.isfinite(data)):
            raise NNError(f"tensor {name!r} holds non-finite values")
        if name in bank.params:
            raise NNError(f"duplicate tensor name {name!r}")
        bank.params[name] = data.astype(np.float64).copy()
        bank.grads[name] = np.zeros(shape, dtype=np.float64)
    if reader.pos != len(blob):
        raise NNError("trailing bytes after last tensor")
    return bank
