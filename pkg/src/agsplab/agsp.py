"""Approximate ground-space projectors (AGSPs).

An AGSP for a target subspace commutes with the target projector, acts as a
dilation on the target (no vector shrinks), and contracts the orthogonal
complement to norm at most sqrt(shrink).  The module validates candidate
operators, synthesizes block-form operators with an exact shrink factor,
builds Chebyshev spectral filters from gapped Hermitian matrices, applies
operators to subspaces, verifies the sharp error-reduction inequalities,
computes operator-Schmidt decompositions across a bipartition, and extracts
the span of left factors (a partial approximate projector).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import chebyshev

from .errors import (
    DegenerateGapError,
    DimensionMismatchError,
    NoCoverError,
    NotAgspError,
    NotDilationError,
    ParameterError,
)
from .subspace import (
    DEFAULT_TOL_RANK,
    TOL_COVER,
    TOL_NUM,
    Subspace,
    _as_matrix,
    _frozen,
    compare,
    complex_gaussian,
    delta_close,
    haar_unitary,
    operator_norm,
    orthonormalize,
)

log = logging.getLogger(__name__)

# Validation headroom: synthetic constructions land near 1e-12, spectral
# constructions may use the rest.
TOL_AGSP = 1e-8
# Relative cutoff for the operator-Schmidt rank count.
TOL_RANK_OP = 1e-10


@dataclass(frozen=True, eq=False)
class Agsp:
    """An operator certified against its target subspace.

    ``shrink_certified`` is the measured squared operator norm on the
    orthogonal complement; ``dilation_margin`` the smallest eigenvalue of
    the operator's Gram restricted to the target (must be >= 1);
    ``commutation_residual`` the spectral norm of the commutator with the
    target projector.
    """

    operator: np.ndarray
    target: Subspace
    shrink_certified: float
    dilation_margin: float
    commutation_residual: float

    def __post_init__(self):
        object.__setattr__(self, "operator", _frozen(_as_matrix(self.operator)))


@dataclass(frozen=True, eq=False)
class BipartiteAgsp:
    """An AGSP together with its operator-Schmidt data across a bipartition.

    ``schmidt_values`` is the full nonincreasing singular-value list of the
    reshuffled operator; ``rank_exact`` counts values above TOL_RANK_OP
    relative to the largest.  ``left_factors``/``right_factors`` hold the
    rank_exact product terms (lefts carry the singular values), so their
    tensor sum reconstructs the operator.  Truncation is a reported metric
    only; the operator itself is never truncated.
    """

    base: Agsp
    dims: tuple[int, int]
    schmidt_values: np.ndarray
    rank_exact: int
    left_factors: tuple[np.ndarray, ...]
    right_factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "schmidt_values", _frozen(np.asarray(self.schmidt_values, dtype=float)))
        object.__setattr__(self, "left_factors", tuple(_frozen(_as_matrix(m)) for m in self.left_factors))
        object.__setattr__(self, "right_factors", tuple(_frozen(_as_matrix(m)) for m in self.right_factors))

    def reconstruct(self) -> np.ndarray:
        dl, dr = self.dims
        out = np.zeros((dl * dr, dl * dr), dtype=np.complex128)
        for lf, rf in zip(self.left_factors, self.right_factors):
            out += np.kron(lf, rf)
        return out


@dataclass(frozen=True, eq=False)
class Pap:
    """Span of left factors of a bipartite AGSP (partial approximate
    projector), orthonormalized in the Hilbert-Schmidt inner product.

    ``shrink`` records the source AGSP's certified shrink factor; the
    bootstrap needs it to check its parameter precondition.
    """

    left_factors: tuple[np.ndarray, ...]
    dim_pap: int
    shrink: float

    def __post_init__(self):
        object.__setattr__(self, "left_factors", tuple(_frozen(_as_matrix(m)) for m in self.left_factors))

    @property
    def left_dim(self) -> int:
        if not self.left_factors:
            raise ParameterError("empty operator span has no left dimension")
        return self.left_factors[0].shape[0]


def validate_agsp(operator, z: Subspace, tol_agsp: float = TOL_AGSP) -> Agsp:
    """Measure the certificates of a candidate operator and accept or reject.

    Raises NotAgspError when the operator fails to commute with the target
    projector and NotDilationError when some target vector shrinks.
    """
    a = _as_matrix(operator)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"operator must be square, got shape {a.shape}")
    if a.shape[0] != z.ambient_dim:
        raise DimensionMismatchError(
            f"operator dimension {a.shape[0]} does not match ambient {z.ambient_dim}"
        )
    p = z.projector()
    residual = operator_norm(a @ p - p @ a)
    if residual > tol_agsp:
        raise NotAgspError(
            f"operator does not commute with the target projector (residual {residual:.3e})",
            residual=residual,
        )
    if z.dim:
        margin = float(np.min(np.linalg.svd(a @ z.basis, compute_uv=False)) ** 2)
    else:
        margin = math.inf
    if margin < 1.0 - tol_agsp:
        raise NotDilationError(
            f"operator is not a dilation on the target (margin {margin!r})", margin=margin
        )
    comp = z.orthogonal_complement()
    shrink = operator_norm(a @ comp.basis) ** 2 if comp.dim else 0.0
    return Agsp(
        operator=a,
        target=z,
        shrink_certified=shrink,
        dilation_margin=margin,
        commutation_residual=residual,
    )


def synth_agsp(z: Subspace, shrink: float, dilation_max: float = 1.0, rng_seed: int = 0) -> Agsp:
    """Random block-form AGSP with the requested shrink factor, exactly.

    The block on the target is the identity when ``dilation_max`` is 1 and a
    random operator with singular values in [1, dilation_max] otherwise; the
    complement block is a random contraction rescaled so its top singular
    value is exactly sqrt(shrink).  Assembled in a basis adapted to the
    target, so commutation is exact by construction.
    """
    if shrink < 0:
        raise ParameterError(f"shrink must be nonnegative, got {shrink}")
    if dilation_max < 1:
        raise ParameterError(f"dilation_max must be >= 1, got {dilation_max}")
    rng = np.random.default_rng(rng_seed)
    k = z.dim
    comp = z.orthogonal_complement()
    m = comp.dim
    if dilation_max == 1.0 or k == 0:
        block_z = np.eye(k, dtype=np.complex128)
    else:
        values = rng.uniform(1.0, dilation_max, size=k)
        block_z = (haar_unitary(rng, k) * values) @ haar_unitary(rng, k).conj().T
    if m:
        g = complex_gaussian(rng, (m, m))
        top = float(np.linalg.svd(g, compute_uv=False)[0])
        block_p = (math.sqrt(shrink) / top) * g if shrink > 0 else np.zeros((m, m), dtype=np.complex128)
    else:
        block_p = np.zeros((0, 0), dtype=np.complex128)
    frame = np.hstack([z.basis, comp.basis])
    block = np.zeros((k + m, k + m), dtype=np.complex128)
    block[:k, :k] = block_z
    block[k:, k:] = block_p
    return validate_agsp(frame @ block @ frame.conj().T, z)


def chebyshev_shrink_estimate(gap: float, lam_max: float, degree: int) -> float:
    """Textbook decay estimate 4 * exp(-4 k sqrt(gap / lam_max)) for the
    squared Chebyshev filter norm on the excited band (reported only)."""
    if degree == 0 or lam_max <= 0:
        return 1.0
    return 4.0 * math.exp(-4.0 * degree * math.sqrt(min(1.0, gap / lam_max)))


def chebyshev_agsp(h, z: Subspace, degree: int) -> Agsp:
    """Spectral AGSP: a rescaled Chebyshev polynomial applied to ``h``.

    ``z`` must span the lowest eigenspace of the Hermitian matrix ``h``
    (within the covering tolerance) and the spectral gap above it must be
    positive.  The polynomial maps the ground energy to 1 and the excited
    band into [-1, 1] / T_degree(mapped ground energy), so the operator
    commutes with the spectral projector exactly by construction.
    """
    h = _as_matrix(h)
    if h.shape[0] != h.shape[1] or h.shape[0] != z.ambient_dim:
        raise DimensionMismatchError("matrix shape does not match the target's ambient space")
    if operator_norm(h - h.conj().T) > TOL_NUM * max(1.0, operator_norm(h)):
        raise ParameterError("matrix is not Hermitian")
    if degree < 0:
        raise ParameterError("degree must be nonnegative")
    if z.dim == 0:
        raise ParameterError("target must be nonzero")
    w, u = np.linalg.eigh(h)
    d = z.dim
    if d >= h.shape[0]:
        raise DegenerateGapError("target is the full space; there is no excited band")
    eigenspace = Subspace(z.ambient_dim, u[:, :d])
    if not delta_close(z, eigenspace, TOL_COVER):
        raise ParameterError("target does not span the lowest eigenspace of the matrix")
    gap = float(w[d] - w[0])
    if gap <= TOL_COVER:
        raise DegenerateGapError(f"spectral gap {gap!r} is below the covering tolerance")
    ratios = np.ones(h.shape[0])
    if degree > 0:
        lo, hi = float(w[d]), float(w[-1])
        spread = hi - lo
        if spread > 1e-12 * max(1.0, hi - float(w[0])):
            coeffs = np.zeros(degree + 1)
            coeffs[degree] = 1.0
            mapped = (2.0 * w[d:] - lo - hi) / spread
            denom = chebyshev.chebval((2.0 * w[0] - lo - hi) / spread, coeffs)
            ratios[d:] = chebyshev.chebval(mapped, coeffs) / denom
        else:
            # Collapsed excited band: one eigenvalue, a monomial filter.
            ratios[d:] = ((w[d:] - lo) / (w[0] - lo)) ** degree
    a = (u * ratios) @ u.conj().T
    return validate_agsp(a, z)


def apply_to_subspace(a: Agsp, v: Subspace, tol_rank: float = DEFAULT_TOL_RANK) -> Subspace:
    """Orthonormalized image of a subspace under the operator.

    The operator need not be invertible off the target; rank drops are legal
    and logged.
    """
    if v.ambient_dim != a.target.ambient_dim:
        raise DimensionMismatchError("subspace does not live in the operator's space")
    out = orthonormalize((a.operator @ v.basis).T, tol_rank=tol_rank, ambient_dim=v.ambient_dim)
    if out.dim < v.dim:
        log.debug("operator image dropped rank: %d -> %d", v.dim, out.dim)
    return out


class ErrorReduction(NamedTuple):
    epsilon_before: float
    epsilon_after: float
    bound_holds: bool


def error_reduction_check(a: Agsp, v: Subspace) -> ErrorReduction:
    """Verify the sharp error-reduction inequalities on one instance.

    Checks both the error-ratio form (epsilon' <= shrink * epsilon) and the
    viability form (delta' <= shrink * delta / mu), each with TOL_NUM slack.
    """
    z = a.target
    before = compare(z, v)
    if not before.covers:
        raise NoCoverError(
            f"subspace does not cover the target (mu = {before.mu:.3e})", mu=before.mu
        )
    after = compare(z, apply_to_subspace(a, v))
    shrink = a.shrink_certified
    ratio_ok = after.epsilon <= shrink * before.epsilon + TOL_NUM
    viability_ok = after.delta <= shrink * before.delta / before.mu + TOL_NUM
    return ErrorReduction(
        epsilon_before=before.epsilon,
        epsilon_after=after.epsilon,
        bound_holds=bool(ratio_ok and viability_ok),
    )


def operator_schmidt(a: Agsp, dims) -> BipartiteAgsp:
    """Operator-Schmidt decomposition of the AGSP across a bipartition.

    Singular values of the reshuffled dL^2 x dR^2 matrix; the left factors
    are the left singular vectors reshaped to dL x dL and scaled by the
    singular values, so the kept terms reconstruct the operator.
    """
    dl, dr = int(dims[0]), int(dims[1])
    n = a.operator.shape[0]
    if dl < 1 or dr < 1 or dl * dr != n:
        raise DimensionMismatchError(f"dims {dl}x{dr} do not factor the ambient dimension {n}")
    shuffled = (
        a.operator.reshape(dl, dr, dl, dr).transpose(0, 2, 1, 3).reshape(dl * dl, dr * dr)
    )
    u, s, vh = np.linalg.svd(shuffled, full_matrices=False)
    if s.size and s[0] > 0:
        rank = int(np.count_nonzero(s > TOL_RANK_OP * s[0]))
    else:
        rank = 0
    lefts = tuple((s[r] * u[:, r]).reshape(dl, dl) for r in range(rank))
    rights = tuple(vh[r, :].reshape(dr, dr) for r in range(rank))
    return BipartiteAgsp(
        base=a,
        dims=(dl, dr),
        schmidt_values=s,
        rank_exact=rank,
        left_factors=lefts,
        right_factors=rights,
    )


def pap_from_agsp(b: BipartiteAgsp) -> Pap:
    """Hilbert-Schmidt-orthonormalized span of the left factors."""
    dl = b.dims[0]
    if b.rank_exact == 0:
        return Pap(left_factors=(), dim_pap=0, shrink=b.base.shrink_certified)
    stacked = np.column_stack([m.reshape(-1) for m in b.left_factors])
    span = orthonormalize(stacked.T, ambient_dim=dl * dl)
    factors = tuple(span.basis[:, i].reshape(dl, dl) for i in range(span.dim))
    return Pap(left_factors=factors, dim_pap=span.dim, shrink=b.base.shrink_certified)


def pap_apply(k: Pap, v: Subspace, tol_rank: float = DEFAULT_TOL_RANK) -> Subspace:
    """Span of every left factor applied to every basis vector of ``v``."""
    if k.dim_pap == 0:
        return Subspace.zero(v.ambient_dim)
    if v.ambient_dim != k.left_dim:
        raise DimensionMismatchError(
            f"subspace dimension {v.ambient_dim} does not match the left factor size {k.left_dim}"
        )
    if v.dim == 0:
        return Subspace.zero(v.ambient_dim)
    images = np.hstack([op @ v.basis for op in k.left_factors])
    return orthonormalize(images.T, tol_rank=tol_rank, ambient_dim=v.ambient_dim)
