"""Binary matrix dump format and AGSP serialization.

Matrix files carry a 16-byte header (8-byte magic, uint32 rows, uint32
cols, little-endian) followed by row-major float64 entries with real and
imaginary parts interleaved, little-endian.  AGSPs serialize as a matrix
file plus a JSON sidecar (same path with ``.json`` appended) carrying the
certified shrink factor, the exact operator-Schmidt rank, the bipartition,
and the generating seed.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .agsp import BipartiteAgsp
from .errors import ParameterError

MAGIC = b"AGLABM1\x00"
_HEADER = struct.Struct("<8sII")


def save_matrix(path, matrix) -> None:
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2:
        raise ParameterError(f"expected a 2-D array, got shape {m.shape}")
    rows, cols = m.shape
    interleaved = np.empty((rows, cols, 2), dtype="<f8")
    interleaved[:, :, 0] = m.real
    interleaved[:, :, 1] = m.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows, cols))
        fh.write(interleaved.tobytes())


def load_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ParameterError(f"{path}: truncated header")
    magic, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ParameterError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + rows * cols * 16
    if len(raw) != expected:
        raise ParameterError(f"{path}: expected {expected} bytes, found {len(raw)}")
    flat = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(rows, cols, 2)
    return (flat[:, :, 0] + 1j * flat[:, :, 1]).astype(np.complex128)


def _sidecar(path) -> Path:
    return Path(str(path) + ".json")


def save_agsp(path, bip: BipartiteAgsp, seed: int | None = None) -> None:
    save_matrix(path, bip.base.operator)
    meta = {
        "shrink": bip.base.shrink_certified,
        "rank_exact": bip.rank_exact,
        "dims": list(bip.dims),
        "seed": seed,
    }
    _sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_agsp(path) -> tuple[np.ndarray, dict]:
    """Operator matrix plus the sidecar metadata.

    Revalidation against a target space is the caller's job; the sidecar
    records measurements, it does not certify them.
    """
    matrix = load_matrix(path)
    meta = json.loads(_sidecar(path).read_text())
    return matrix, meta
