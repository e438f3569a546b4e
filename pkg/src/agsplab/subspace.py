"""Subspace geometry on finite-dimensional complex Hilbert spaces.

Subspaces are represented by column-orthonormal bases.  The module provides
construction (SVD-based orthonormalization with rank truncation), transition
maps between subspaces, principal angles, overlap / viability-error /
error-ratio reports, covering tests, lifting operators, and closeness checks
for pairs of equal-dimensional subspaces.

All values are immutable after construction and all operations are pure
functions of their inputs (plus explicit seeds), so everything here is safe
for concurrent use.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    NoCoverError,
    ParameterError,
    UndefinedOverlapError,
)

log = logging.getLogger(__name__)

# Numerical policy: two orders of magnitude above double-precision SVD
# accuracy at desk-scale dimensions.
TOL_ORTHO = 1e-10
TOL_NUM = 1e-9
TOL_COVER = 1e-8
DEFAULT_TOL_RANK = 1e-12


def _as_matrix(a) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(a, dtype=np.complex128))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def operator_norm(m) -> float:
    """Spectral (largest-singular-value) norm; 0.0 for empty matrices."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex Gaussian array (unit variance per complex entry)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed n x n unitary via phase-fixed QR of a Ginibre matrix."""
    q, r = np.linalg.qr(complex_gaussian(rng, (n, n)))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace given by a column-orthonormal basis.

    ``basis`` has shape ``(ambient_dim, k)`` with ``0 <= k <= ambient_dim``;
    the Gram matrix of its columns must equal the identity within TOL_ORTHO.
    """

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        basis = _as_matrix(self.basis)
        if basis.ndim != 2 or basis.shape[0] != self.ambient_dim:
            raise DimensionMismatchError(
                f"basis shape {basis.shape} does not match ambient dimension {self.ambient_dim}"
            )
        k = basis.shape[1]
        if k > self.ambient_dim:
            raise DimensionMismatchError(
                f"subspace dimension {k} exceeds ambient dimension {self.ambient_dim}"
            )
        if k:
            gram = basis.conj().T @ basis
            err = operator_norm(gram - np.eye(k))
            if err > TOL_ORTHO:
                raise ParameterError(f"basis columns are not orthonormal (residual {err:.3e})")
        object.__setattr__(self, "basis", _frozen(basis))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim, dtype=np.complex128))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.zeros((ambient_dim, 0), dtype=np.complex128))

    def projector(self) -> np.ndarray:
        """Orthogonal projector onto the subspace, as an ambient operator."""
        return self.basis @ self.basis.conj().T

    def orthogonal_complement(self) -> "Subspace":
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        if self.dim == self.ambient_dim:
            return Subspace.zero(self.ambient_dim)
        u = np.linalg.svd(self.basis, full_matrices=True)[0]
        return Subspace(self.ambient_dim, u[:, self.dim:])

    def project(self, vectors) -> np.ndarray:
        """Apply the orthogonal projector to a vector or column stack."""
        v = np.asarray(vectors, dtype=np.complex128)
        return self.basis @ (self.basis.conj().T @ v)

    def contains(self, vector, tol: float = TOL_NUM) -> bool:
        v = np.asarray(vector, dtype=np.complex128).reshape(-1)
        if v.shape[0] != self.ambient_dim:
            raise DimensionMismatchError("vector does not live in the ambient space")
        return float(np.linalg.norm(v - self.project(v))) <= tol * max(
            1.0, float(np.linalg.norm(v))
        )


@dataclass(frozen=True, eq=False)
class TransitionMap:
    """Restricted orthogonal projection from one subspace into another.

    ``matrix`` has shape ``(dim target, dim source)``; its singular values
    are cosines of principal angles and never exceed 1 (within TOL_NUM).
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        if m.size:
            top = operator_norm(m)
            if top > 1.0 + TOL_NUM:
                raise ParameterError(f"transition map has singular value {top} > 1")
        object.__setattr__(self, "matrix", _frozen(m))


@dataclass(frozen=True, eq=False)
class OverlapReport:
    """Overlap mu, viability error delta = 1 - mu, error ratio
    epsilon = delta / mu (+inf when mu = 0), the full principal-angle
    spectrum (nonincreasing, radians), and the covering flag."""

    mu: float
    delta: float
    epsilon: float
    angles: np.ndarray
    covers: bool

    def __post_init__(self):
        object.__setattr__(self, "angles", _frozen(np.asarray(self.angles, dtype=float)))


@dataclass(frozen=True, eq=False)
class LiftingOperator:
    """Right-inverse of the transition map: sends coordinates of the target
    space to the unique preimage in the covering subspace.

    ``matrix`` has shape ``(ambient_dim, dim target)``; its columns lie in
    the covering subspace and project back to the target basis.
    """

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(_as_matrix(self.matrix)))

    @property
    def norm(self) -> float:
        return operator_norm(self.matrix)


def _check_ambient(a: Subspace, b: Subspace):
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatchError(
            f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}"
        )


def orthonormalize(vectors, tol_rank: float = DEFAULT_TOL_RANK, ambient_dim: int | None = None) -> Subspace:
    """Span of the given vectors with SVD-based rank truncation.

    Singular values above ``tol_rank`` times the largest one count toward the
    numerical rank.  An empty input yields the zero-dimensional subspace
    (``ambient_dim`` must then be supplied).
    """
    cols = [np.asarray(v, dtype=np.complex128).reshape(-1) for v in vectors]
    if not cols:
        if ambient_dim is None:
            raise ParameterError("ambient_dim is required for an empty vector list")
        return Subspace.zero(ambient_dim)
    n = cols[0].shape[0]
    for v in cols:
        if v.shape[0] != n:
            raise DimensionMismatchError(
                f"vectors of mixed dimensions: {n} vs {v.shape[0]}"
            )
    if ambient_dim is not None and ambient_dim != n:
        raise DimensionMismatchError(f"vectors have dimension {n}, expected {ambient_dim}")
    m = np.column_stack(cols)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        return Subspace.zero(n)
    rank = int(np.count_nonzero(s > tol_rank * s[0]))
    return Subspace(n, u[:, :rank])


def transition_map(src: Subspace, dst: Subspace) -> TransitionMap:
    """Transition map from ``src`` into ``dst``: project, then restrict.

    In the stored bases the matrix is ``dst_basis^dagger @ src_basis``.
    """
    _check_ambient(src, dst)
    return TransitionMap(dst.basis.conj().T @ src.basis)


def _report_from_trig(cosines: np.ndarray, sines: np.ndarray, target_dim: int) -> OverlapReport:
    """Build an OverlapReport from paired principal cosines and sines.

    Angles come from atan2, which stays accurate at both ends of [0, pi/2]
    (arccos alone loses half the digits near angle 0).  Cosines are
    zero-padded to the target dimension so mu = cos^2(largest angle) holds
    even when the compared subspace is too small to cover.
    """
    cos_full = np.zeros(target_dim)
    k = min(cosines.size, target_dim)
    cos_full[:k] = np.clip(np.sort(cosines)[::-1][:k], 0.0, 1.0)
    sin_full = np.ones(target_dim)
    k = min(sines.size, target_dim)
    sin_full[:k] = np.clip(np.sort(sines)[:k], 0.0, 1.0)
    # cosines descending pair with sines ascending, direction by direction
    angles = np.sort(np.arctan2(sin_full, cos_full))[::-1]
    if target_dim:
        c_worst, s_worst = cos_full[-1], sin_full[-1]
        denom = c_worst * c_worst + s_worst * s_worst
        mu = float(c_worst * c_worst / denom) if denom > 0.0 else 0.0
    else:
        mu = 1.0
    delta = 1.0 - mu
    epsilon = delta / mu if mu > 0.0 else math.inf
    return OverlapReport(mu=mu, delta=delta, epsilon=epsilon, angles=angles, covers=mu > TOL_COVER)


def compare(z: Subspace, v: Subspace) -> OverlapReport:
    """Overlap of ``v`` onto ``z`` (asymmetric in general).

    mu is the smallest eigenvalue of T^dagger T for the transition map
    T from z into v, i.e. the minimum of <z|P_V|z> over unit z; the angle
    spectrum is that of the singular values of T (arccos), padded with zeros
    when dim v < dim z, with the small-angle end computed through the
    explicit perpendicular components for full accuracy.
    """
    _check_ambient(z, v)
    if z.dim == 0:
        raise UndefinedOverlapError("overlap onto a zero-dimensional subspace is undefined")
    t = transition_map(z, v)
    if v.dim == 0:
        cos = np.zeros(0)
    else:
        cos = np.linalg.svd(t.matrix, compute_uv=False)
    perp = z.basis - v.project(z.basis)
    sin = np.linalg.svd(perp, compute_uv=False)
    return _report_from_trig(cos, sin, z.dim)


class SymmetryCheck:
    """Result of overlap_symmetry_check; ``symmetric`` is None when either
    overlap is below the covering threshold (not applicable)."""

    __slots__ = ("mu_vz", "mu_zv", "symmetric")

    def __init__(self, mu_vz: float, mu_zv: float, symmetric: bool | None):
        self.mu_vz = mu_vz
        self.mu_zv = mu_zv
        self.symmetric = symmetric

    def __iter__(self):
        return iter((self.mu_vz, self.mu_zv, self.symmetric))


def overlap_symmetry_check(z: Subspace, v: Subspace) -> SymmetryCheck:
    """Compare the two mutual overlaps; they agree whenever both are positive."""
    if z.dim == 0 or v.dim == 0:
        raise UndefinedOverlapError("symmetry check needs two nonzero subspaces")
    mu_vz = compare(z, v).mu
    mu_zv = compare(v, z).mu
    if mu_vz > TOL_COVER and mu_zv > TOL_COVER:
        symmetric = abs(mu_vz - mu_zv) <= TOL_NUM
    else:
        symmetric = None
    return SymmetryCheck(mu_vz, mu_zv, symmetric)


def projected_image(v: Subspace, z: Subspace, tol_rank: float = DEFAULT_TOL_RANK) -> Subspace:
    """Orthonormalized image of ``z`` under the projector onto ``v``.

    When v covers z, the image is mutually mu-overlapping with z at the same
    mu as the overlap of v onto z.  The image may have lower dimension than
    z when v does not cover it.
    """
    _check_ambient(v, z)
    if z.dim == 0:
        return Subspace.zero(z.ambient_dim)
    image = v.project(z.basis)
    out = orthonormalize(image.T, tol_rank=tol_rank, ambient_dim=z.ambient_dim)
    if out.dim < z.dim:
        log.debug("projected_image dropped rank: %d -> %d", z.dim, out.dim)
    return out


def lifting_operator(z: Subspace, v: Subspace) -> LiftingOperator:
    """Lifting operator from ``z`` into a covering subspace ``v``.

    Realizes the right-inverse of the transition map from v into z: the
    column for each z-basis vector is the unique vector of v whose
    projection onto z reproduces it.  Operator norm is at most mu^(-1/2)
    and the component orthogonal to z has norm at most sqrt(epsilon).
    """
    rep = compare(z, v)
    if not rep.covers:
        raise NoCoverError(f"subspace does not cover the target (mu = {rep.mu:.3e})", mu=rep.mu)
    t = transition_map(z, v).matrix  # (dim v, dim z)
    u, s, wh = np.linalg.svd(t, full_matrices=False)
    if np.any(s * s <= TOL_COVER):
        # Restricted projection is numerically singular; never truncate it.
        raise NoCoverError(
            f"restricted projection is singular (smallest squared value {float((s * s).min()):.3e})",
            mu=rep.mu,
        )
    coords = (u / s) @ wh  # t @ (t^dagger t)^(-1)
    return LiftingOperator(v.basis @ coords)


def delta_close(a: Subspace, b: Subspace, delta: float) -> bool:
    """True iff the two subspaces are mutually (1 - delta)-overlapping.

    Mutual overlap above 1 - delta with delta < 1 forces equal dimensions,
    so unequal dimensions are rejected outright.
    """
    _check_ambient(a, b)
    if a.dim != b.dim:
        raise DimensionMismatchError(
            f"delta-closeness needs equal dimensions, got {a.dim} and {b.dim}"
        )
    if delta < 0:
        raise ParameterError("delta must be nonnegative")
    if a.dim == 0:
        return True
    threshold = 1.0 - delta - TOL_NUM
    return compare(a, b).mu >= threshold and compare(b, a).mu >= threshold


def rotate_subspace(z: Subspace, delta: float, rng_seed: int) -> Subspace:
    """Rotate ``z`` into random complement directions so that the mutual
    overlap with the original is exactly 1 - delta.

    Each basis direction (as many as the orthogonal complement allows) is
    tilted by the angle arcsin(sqrt(delta)); the worst principal angle is
    that angle, hence the overlap.  Deterministic in the seed.
    """
    if not 0.0 <= delta < 1.0:
        raise ParameterError(f"delta must lie in [0, 1), got {delta}")
    if z.dim == 0:
        raise ParameterError("cannot rotate a zero-dimensional subspace")
    if z.ambient_dim < z.dim + 1:
        raise DimensionMismatchError(
            "ambient space too small: rotation needs at least one complement direction"
        )
    if delta == 0.0:
        return z
    comp = z.orthogonal_complement()
    j = min(z.dim, comp.dim)
    rng = np.random.default_rng(rng_seed)
    frame = np.linalg.qr(complex_gaussian(rng, (comp.dim, j)))[0]
    tilt = comp.basis @ frame
    theta = math.asin(math.sqrt(delta))
    new_basis = np.array(z.basis)
    new_basis[:, :j] = math.cos(theta) * z.basis[:, :j] + math.sin(theta) * tilt
    return Subspace(z.ambient_dim, new_basis)
