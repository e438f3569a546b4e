"""Toy-model generators and exact-diagonalization plumbing.

Dense matrices only; the default chain-length cap keeps eigendecompositions
at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousSpectrumError, ParameterError
from .subspace import TOL_NUM, Subspace, _as_matrix, _frozen, complex_gaussian, operator_norm

N_MAX_QUBITS = 12
# Relative eigenvalue-clustering threshold (times the spectral range).
TOL_CLUSTER = 1e-8


@dataclass(frozen=True, eq=False)
class ToyHamiltonian:
    """A Hermitian matrix with its ground space, gap, and provenance."""

    matrix: np.ndarray
    ground_space: Subspace
    gap: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(_as_matrix(self.matrix)))

    def validate(self):
        """Re-check the stored certificate: unit Rayleigh spread and gap > 0."""
        if self.gap <= 0:
            raise ParameterError(f"gap must be positive, got {self.gap}")
        basis = self.ground_space.basis
        if basis.shape[1] == 0:
            raise ParameterError("ground space is empty")
        rayleigh = np.real(np.einsum("ij,ij->j", basis.conj(), self.matrix @ basis))
        spread = float(rayleigh.max() - rayleigh.min())
        scale = max(1.0, operator_norm(self.matrix))
        if spread > TOL_NUM * scale:
            raise ParameterError(f"ground basis Rayleigh quotients spread {spread:.3e}")


def ising_chain(n: int, n_max: int = N_MAX_QUBITS) -> ToyHamiltonian:
    """Ferromagnetic Ising chain sum_i (1 - Z_i Z_{i+1}) / 2 on n qubits.

    The matrix is diagonal in the computational basis and counts domain
    walls; the kernel is spanned by the two aligned product states and the
    gap is exactly 1.
    """
    if not 2 <= n <= n_max:
        raise ParameterError(f"chain length must lie in [2, {n_max}], got {n}")
    states = np.arange(2 ** n, dtype=np.uint64)
    walls = np.zeros(2 ** n, dtype=np.int64)
    for i in range(n - 1):
        hi = (states >> np.uint64(n - 1 - i)) & np.uint64(1)
        lo = (states >> np.uint64(n - 2 - i)) & np.uint64(1)
        walls += (hi ^ lo).astype(np.int64)
    matrix = np.diag(walls.astype(np.complex128))
    kernel = np.zeros((2 ** n, 2), dtype=np.complex128)
    kernel[0, 0] = 1.0
    kernel[-1, 1] = 1.0
    return ToyHamiltonian(
        matrix=matrix,
        ground_space=Subspace(2 ** n, kernel),
        gap=1.0,
        metadata={"model": "ising", "n": n, "local_dim": 2},
    )


def ising_bond_projectors(n: int) -> list[np.ndarray]:
    """Diagonals of the local bond terms (1 - Z_i Z_{i+1}) / 2, one per bond.

    Returned as length-2^n vectors since every term is diagonal.
    """
    states = np.arange(2 ** n, dtype=np.uint64)
    terms = []
    for i in range(n - 1):
        hi = (states >> np.uint64(n - 1 - i)) & np.uint64(1)
        lo = (states >> np.uint64(n - 2 - i)) & np.uint64(1)
        terms.append((hi ^ lo).astype(float))
    return terms


def random_degenerate_target(dL: int, dR: int, D: int, rng_seed: int = 0) -> ToyHamiltonian:
    """Identity minus the projector onto a Haar-random D-dimensional target.

    Gap is exactly 1 and the kernel is the sampled target space.
    """
    if dL < 1 or dR < 1:
        raise ParameterError("factor dimensions must be positive")
    n = dL * dR
    if not 1 <= D < n:
        raise ParameterError(f"degeneracy must lie in [1, {n - 1}], got {D}")
    rng = np.random.default_rng(rng_seed)
    g = complex_gaussian(rng, (n, D))
    basis = np.linalg.svd(g, full_matrices=False)[0]
    target = Subspace(n, basis)
    matrix = np.eye(n, dtype=np.complex128) - target.projector()
    return ToyHamiltonian(
        matrix=matrix,
        ground_space=target,
        gap=1.0,
        metadata={"model": "random-target", "dims": (dL, dR), "degeneracy": D, "seed": rng_seed},
    )


def ground_space(
    h, D_hint: int | None = None, tol_cluster: float = TOL_CLUSTER
) -> tuple[Subspace, float]:
    """Lowest eigenspace of a Hermitian matrix, by eigenvalue clustering.

    The ground cluster collects eigenvalues within ``tol_cluster`` times the
    spectral range of the smallest one.  Clustering is never silent: an
    eigenvalue in the gray zone just above the threshold, or a cluster that
    swallows the whole spectrum, raises AmbiguousSpectrumError unless
    ``D_hint`` forces the dimension.
    """
    h = _as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ParameterError("matrix must be square")
    if operator_norm(h - h.conj().T) > TOL_NUM * max(1.0, operator_norm(h)):
        raise ParameterError("matrix is not Hermitian")
    w, u = np.linalg.eigh(h)
    n = w.size
    if D_hint is not None:
        if not 1 <= D_hint < n:
            raise ParameterError(f"forced dimension must lie in [1, {n - 1}], got {D_hint}")
        d = D_hint
    else:
        spectral_range = float(w[-1] - w[0])
        threshold = tol_cluster * spectral_range
        gaps = w - w[0]
        d = int(np.count_nonzero(gaps <= threshold))
        if d >= n:
            raise AmbiguousSpectrumError(
                f"all {n} eigenvalues fall within the clustering threshold {threshold:.3e}; "
                f"spectrum head: {w[: min(n, 6)].tolist()}",
                spectrum=w,
            )
        # A nonzero excitation within a factor 10 of the threshold, on either
        # side, cannot be assigned to the cluster with confidence.
        gray = (gaps >= threshold / 10.0) & (gaps <= 10.0 * threshold) & (gaps > 0)
        if np.any(gray):
            edge = w[max(0, d - 2) : min(n, d + 3)]
            raise AmbiguousSpectrumError(
                f"eigenvalues within a factor 10 of the clustering threshold "
                f"{threshold:.3e}; spectrum near the edge: {edge.tolist()}",
                spectrum=w,
            )
    gap = float(w[d] - w[0])
    if gap <= 0:
        raise AmbiguousSpectrumError(
            f"no positive gap above the forced cluster; spectrum near the edge: "
            f"{w[max(0, d - 2): min(n, d + 3)].tolist()}",
            spectrum=w,
        )
    return Subspace(n, u[:, :d]), gap
