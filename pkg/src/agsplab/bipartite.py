"""Bipartite-space utilities.

Schmidt decomposition and entanglement entropy of pure states, reduced
overlap of a left-factor subspace onto a target in the product space
(computed without materializing the tensor extension), the Schmidt tail
bound implied by approximate left support, and the dyadic partial-sum
entropy bound.

Entropy is measured in bits throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    MembershipError,
    NormalizationError,
    ParameterError,
    UndefinedOverlapError,
)
from .subspace import (
    TOL_NUM,
    OverlapReport,
    Subspace,
    _frozen,
    _report_from_trig,
)

# Squared Schmidt coefficients below this are clamped to zero before
# entropy evaluation to avoid log-underflow noise.
LAMBDA_CLAMP = 1e-14


def entropy_term(x: float) -> float:
    """h(x) = x * log2(1/x) with h(0) = 0 and an underflow-safe branch."""
    if x < 1e-300:
        return 0.0
    return -x * math.log2(x)


def spectrum_entropy(lambdas) -> float:
    """Shannon entropy (bits) of a nonnegative sequence, term by term."""
    return float(sum(entropy_term(float(x)) for x in np.asarray(lambdas).reshape(-1)))


@dataclass(frozen=True, eq=False)
class SchmidtData:
    """Schmidt decomposition of a unit bipartite vector.

    ``lambdas`` are the squared Schmidt coefficients in nonincreasing order;
    ``left_vectors`` (dL x r) and ``right_vectors`` (dR x r) hold the
    orthonormal Schmidt bases as columns, so the state is
    sum_k sqrt(lambda_k) * kron(left[:, k], right[:, k]).
    """

    lambdas: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lambdas", _frozen(np.asarray(self.lambdas, dtype=float)))
        object.__setattr__(
            self, "left_vectors", _frozen(np.asarray(self.left_vectors, dtype=np.complex128))
        )
        object.__setattr__(
            self, "right_vectors", _frozen(np.asarray(self.right_vectors, dtype=np.complex128))
        )

    def reconstruct(self) -> np.ndarray:
        coeff = np.sqrt(self.lambdas)
        m = (self.left_vectors * coeff) @ self.right_vectors.T
        return m.reshape(-1)


def _split_dims(length: int, dims) -> tuple[int, int]:
    dl, dr = int(dims[0]), int(dims[1])
    if dl < 1 or dr < 1 or dl * dr != length:
        raise DimensionMismatchError(
            f"dims {dl}x{dr} do not factor a vector of length {length}"
        )
    return dl, dr


def schmidt(psi, dims) -> SchmidtData:
    """Schmidt decomposition of a unit vector across the given bipartition.

    The input must be normalized within TOL_NUM; there is no silent
    renormalization.
    """
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    dl, dr = _split_dims(psi.shape[0], dims)
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > TOL_NUM:
        raise NormalizationError(f"state norm is {norm!r}, expected 1")
    u, s, vh = np.linalg.svd(psi.reshape(dl, dr), full_matrices=False)
    return SchmidtData(lambdas=s * s, left_vectors=u, right_vectors=vh.T)


def entanglement_entropy(psi, dims) -> float:
    """Entanglement entropy in bits across the given bipartition."""
    lambdas = schmidt(psi, dims).lambdas.copy()
    lambdas[lambdas < LAMBDA_CLAMP] = 0.0
    return spectrum_entropy(lambdas)


def left_compare(v: Subspace, z: Subspace) -> OverlapReport:
    """Overlap of (v tensor H_R) onto ``z`` without materializing the tensor.

    ``v`` lives on the left factor; ``z`` in the product space whose ambient
    dimension must be a multiple of v's.  mu is the smallest eigenvalue of
    the Gram matrix of (P_v tensor id) applied to z's basis.
    """
    n = z.ambient_dim
    dl = v.ambient_dim
    if n % dl:
        raise DimensionMismatchError(
            f"product dimension {n} is not a multiple of the left dimension {dl}"
        )
    if z.dim == 0:
        raise UndefinedOverlapError("overlap onto a zero-dimensional subspace is undefined")
    dr = n // dl
    stacked = z.basis.reshape(dl, dr * z.dim)
    coords = (v.basis.conj().T @ stacked).reshape(v.dim * dr, z.dim)
    gram = coords.conj().T @ coords
    cos = np.sqrt(np.clip(np.linalg.eigvalsh(gram), 0.0, 1.0))
    comp = v.orthogonal_complement()
    if comp.dim:
        perp_coords = (comp.basis.conj().T @ stacked).reshape(comp.dim * dr, z.dim)
        perp_gram = perp_coords.conj().T @ perp_coords
        sin = np.sqrt(np.clip(np.linalg.eigvalsh(perp_gram), 0.0, 1.0))
    else:
        sin = np.zeros(z.dim)
    return _report_from_trig(cos, sin, z.dim)


class TailBound:
    """Result of tail_bound_check."""

    __slots__ = ("tail", "bound", "holds")

    def __init__(self, tail: float, bound: float, holds: bool):
        self.tail = tail
        self.bound = bound
        self.holds = holds

    def __iter__(self):
        return iter((self.tail, self.bound, self.holds))


def tail_bound_check(z: Subspace, v: Subspace, psi, dims) -> TailBound:
    """Check the Schmidt tail of a target state against sqrt(delta).

    ``v`` is a left-factor subspace with left viability error delta < 1 onto
    ``z``; the Schmidt coefficients of any unit psi in z beyond index dim(v)
    must sum to at most sqrt(delta).
    """
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    dl, dr = _split_dims(psi.shape[0], dims)
    if z.ambient_dim != dl * dr or v.ambient_dim != dl:
        raise DimensionMismatchError("subspaces do not match the stated bipartition")
    if not z.contains(psi):
        raise MembershipError("state does not lie in the target space")
    rep = left_compare(v, z)
    if rep.delta >= 1.0:
        raise ParameterError("left viability error is 1; the tail bound needs delta < 1")
    data = schmidt(psi, dims)
    tail = float(np.sum(data.lambdas[v.dim:]))
    bound = math.sqrt(rep.delta)
    return TailBound(tail=tail, bound=bound, holds=tail <= bound + TOL_NUM)


@dataclass(frozen=True)
class EntropyPartition:
    """Dyadic partition of spectrum indices with per-block tail bounds.

    ``block_sizes[0]`` is the head block; every block needs size >= 3 (with a
    smaller block the per-block Jensen step fails: a single index of mass 1/e
    already beats log2 of the block size).  ``gammas[i]`` bounds the spectrum
    mass falling in ``block_sizes[i + 1]``.
    """

    block_sizes: tuple[int, ...]
    gammas: tuple[float, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.block_sizes)
        gammas = tuple(float(g) for g in self.gammas)
        if not sizes:
            raise ParameterError("partition needs at least the head block")
        if len(gammas) != len(sizes) - 1:
            raise ParameterError(
                f"need one tail bound per non-head block: {len(sizes) - 1} blocks, {len(gammas)} bounds"
            )
        for s in sizes:
            if s < 3:
                raise ParameterError(f"blocks need size >= 3, got {s}")
        for g in gammas:
            if not 0.0 <= g <= 1.0:
                raise ParameterError(f"tail bounds must lie in [0, 1], got {g}")
        object.__setattr__(self, "block_sizes", sizes)
        object.__setattr__(self, "gammas", gammas)


def dyadic_entropy_bound(partition: EntropyPartition) -> float:
    """Entropy bound from per-block partial sums.

    log2 of the head-block size, plus gamma_n * log2(block size) + h(gamma_n)
    for every later block; terms below 1e-15 are dropped.
    """
    total = math.log2(partition.block_sizes[0])
    for size, gamma in zip(partition.block_sizes[1:], partition.gammas):
        term = gamma * math.log2(size) + entropy_term(gamma)
        if term >= 1e-15:
            total += term
    return total
