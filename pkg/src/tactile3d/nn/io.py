"""Binary weights file format.

Layout: magic "NNWT", then little-endian u32 fields: version (1), kind
(0 = fully-connected, 1 = encoder-decoder), tensor count; then per tensor a
u32 rank, u32 dims[rank], and float32 data. Tensors appear in a fixed order
(weight then bias per layer), so save -> load -> save is byte-identical.
"""

import struct

import numpy as np

from ..errors import CorruptWeightsError, WeightsKindError
from .encdec import EncDecWeights, _layout
from .mlp import MlpWeights

MAGIC = b"NNWT"
VERSION = 1
KIND_MLP = 0
KIND_ENCDEC = 1


def _tensor_list(weights):
    if isinstance(weights, MlpWeights):
        kind = KIND_MLP
        pairs = weights.layers
    elif isinstance(weights, EncDecWeights):
        kind = KIND_ENCDEC
        pairs = [weights.tensors[name] for name, _, _ in _layout(weights.channels)]
    else:
        raise TypeError(f"cannot serialize {type(weights).__name__}")
    tensors = []
    for w, b in pairs:
        tensors.append(w)
        tensors.append(b)
    return kind, tensors


def weights_save(path, weights):
    kind, tensors = _tensor_list(weights)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, kind, len(tensors)))
        for t in tensors:
            t = np.ascontiguousarray(t, dtype="<f4")
            fh.write(struct.pack("<I", t.ndim))
            fh.write(struct.pack(f"<{t.ndim}I", *t.shape))
            fh.write(t.tobytes())


def _read_exact(fh, n, path, what):
    data = fh.read(n)
    if len(data) != n:
        raise CorruptWeightsError(f"{path}: truncated while reading {what}")
    return data


def weights_load(path, expect=None):
    """Load a weights file; `expect` may be 'mlp' or 'encdec' to enforce kind."""
    with open(path, "rb") as fh:
        if _read_exact(fh, 4, path, "magic") != MAGIC:
            raise CorruptWeightsError(f"{path}: bad magic")
        version, kind, count = struct.unpack("<III", _read_exact(fh, 12, path, "header"))
        if version != VERSION:
            raise CorruptWeightsError(f"{path}: unsupported version {version}")
        if kind not in (KIND_MLP, KIND_ENCDEC):
            raise CorruptWeightsError(f"{path}: unknown kind {kind}")
        if count == 0 or count % 2:
            raise CorruptWeightsError(f"{path}: bad tensor count {count}")
        tensors = []
        for i in range(count):
            (rank,) = struct.unpack("<I", _read_exact(fh, 4, path, f"tensor {i} rank"))
            if rank == 0 or rank > 4:
                raise CorruptWeightsError(f"{path}: tensor {i} has bad rank {rank}")
            dims = struct.unpack(f"<{rank}I", _read_exact(fh, 4 * rank, path, f"tensor {i} dims"))
            n = int(np.prod(dims))
            if n == 0 or n > 1 << 28:
                raise CorruptWeightsError(f"{path}: tensor {i} has bad size {dims}")
            raw = _read_exact(fh, 4 * n, path, f"tensor {i} data")
            tensors.append(np.frombuffer(raw, dtype="<f4").reshape(dims).copy())
        if fh.read(1):
            raise CorruptWeightsError(f"{path}: trailing bytes")

    name = {KIND_MLP: "mlp", KIND_ENCDEC: "encdec"}[kind]
    if expect is not None and expect != name:
        raise WeightsKindError(f"{path}: holds {name} weights, expected {expect}")
    try:
        if kind == KIND_MLP:
            return _build_mlp(tensors)
        return _build_encdec(tensors)
    except (ValueError, IndexError) as exc:
        raise CorruptWeightsError(f"{path}: inconsistent tensors: {exc}") from exc


def _pairs(tensors):
    for i in range(0, len(tensors), 2):
        w, b = tensors[i], tensors[i + 1]
        if b.ndim != 1:
            raise ValueError(f"tensor {i + 1}: bias must be rank 1")
        yield w, b


def _build_mlp(tensors):
    layers = []
    for w, b in _pairs(tensors):
        if w.ndim != 2:
            raise ValueError("fully-connected weight must be rank 2")
        layers.append((w.astype(np.float64), b.astype(np.float64)))
    return MlpWeights(layers)


def _build_encdec(tensors):
    pairs = list(_pairs(tensors))
    if len(pairs) != 11:
        raise ValueError(f"expected 11 layers, got {len(pairs)}")
    c1 = pairs[0][0].shape[1]
    c2 = pairs[2][0].shape[1]
    c3 = pairs[4][0].shape[1]
    named = {name: pairs[i] for i, (name, _, _) in enumerate(_layout((c1, c2, c3)))}
    return EncDecWeights(named, (c1, c2, c3))
