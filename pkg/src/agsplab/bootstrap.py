"""Constructive bootstrap: overlap amplification alternated with random
dimension reduction, plus the explicit entanglement-bound evaluator.

Dimension-reduction guarantee
-----------------------------
For a subspace of dimension W with overlap mu onto a D-dimensional target, a
Haar-random V-dimensional subspace keeps overlap nu = (V / 8W) * mu except
with probability eta = (1 + 2 / sqrt(nu))^D * W * exp(-V / 16), loosened to
eta < (9 / nu)^(D/2) * W * exp(-V / 16) when nu < 1.  Requesting overlap nu
therefore succeeds at dimension

    V = ceil(8 * max(W * nu / mu, D * ln(9 / nu) + 2 * ln W))  capped at W,

which makes the log of the loosened failure probability nonpositive.  At
desk scale the probability bound is usually vacuous (eta > 1), so
``reduce_dimension`` keeps the formula as its dimension contract while the
bootstrap loop itself searches for the smallest empirically viable
dimension.

Derivation of the dimension constant
------------------------------------
The fixed-point dimension of the bootstrap at level n (shrink^n, rank^n)
with post-amplification overlap 1/2 and target overlap nu_n = 1/(32 rank^n)
satisfies

    V_n <= V_n / 2 + 8 * (D * ln(288 rank^n) + 2 * ln(rank^n * V_n)) + 1,

i.e. V_n <= 16 * (D * ln(288 rank^n) + 2 * ln(rank^n * V_n)) + 2.  The
doubly amplified space has dimension at most rank^(2n) * V_n, and
``derived_dim_constant`` returns the supremum over n of

    rank^(2n) * V_n / (D * rank^(3n)) = V_n / (D * rank^n),

solving the fixed point numerically per level.  The supremum is attained at
small n because V_n grows at most linearly in n.  The constant is a
configuration value derived here, not an asserted one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .agsp import BipartiteAgsp, Pap, pap_apply, pap_from_agsp
from .bipartite import entropy_term, left_compare, spectrum_entropy
from .errors import (
    DimensionMismatchError,
    ParameterError,
    PreconditionError,
    ReductionFailureError,
)
from .subspace import (
    TOL_NUM,
    OverlapReport,
    Subspace,
    compare,
    complex_gaussian,
    delta_close,
)

# Entropy ascent stops when the Riemannian gradient norm drops below this.
GRAD_TOL = 1e-9
# Series terms below this are truncated in the explicit bound.
SERIES_EPS = 1e-15
# Stagnation cap for series convergence checks.
SERIES_MAX_TERMS = 100_000


@dataclass(frozen=True)
class BootstrapParams:
    """Knobs of the bootstrap loop.

    ``nu_target`` of None means the canonical 1 / (32 * dim of the operator
    span).  ``sample_budget`` bounds the Haar draws spent per reduction.
    """

    nu_target: float | None = None
    sample_budget: int = 200
    max_iters: int = 50
    rng_seed: int = 0

    def __post_init__(self):
        if self.nu_target is not None and not 0.0 < self.nu_target <= 1.0:
            raise ParameterError(f"nu_target must lie in (0, 1], got {self.nu_target}")
        if self.sample_budget < 1 or self.max_iters < 1:
            raise ParameterError("budgets must be at least 1")


@dataclass(frozen=True, eq=False)
class TraceRecord:
    iteration: int
    action: str  # "pap_apply" or "reduce"
    dim_v: int
    mu: float
    delta: float
    epsilon: float
    subspace: Subspace


@dataclass(frozen=True, eq=False)
class BootstrapTrace:
    records: tuple[TraceRecord, ...]
    final: Subspace
    final_viable: Subspace | None
    converged: bool


def haar_subspace(w: Subspace, v_dim: int, rng_seed) -> Subspace:
    """Haar-uniformly random ``v_dim``-dimensional subspace of ``w``.

    Gaussian coordinates followed by orthonormalization; the distribution of
    the span is invariant under unitaries of ``w``.  ``rng_seed`` may be an
    integer or a Generator.  Deterministic in the seed.
    """
    if not 1 <= v_dim <= w.dim:
        raise ParameterError(f"requested dimension {v_dim} outside [1, {w.dim}]")
    if v_dim == w.dim:
        return w
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    g = complex_gaussian(rng, (w.dim, v_dim))
    frame = np.linalg.svd(g, full_matrices=False)[0]
    return Subspace(w.ambient_dim, w.basis @ frame)


class RandParams(NamedTuple):
    nu: float
    eta: float
    eta_loose: float


def randlem_params(w_dim: int, v_dim: int, mu: float, d_target: int) -> RandParams:
    """Formula values of the random-subspace overlap guarantee.

    nu = (V / 8W) * mu; eta and its loosened form as in the module
    docstring.  The loosening is checked whenever nu < 1.
    """
    if w_dim < 1 or v_dim < 1 or d_target < 1:
        raise ParameterError("dimensions must be positive")
    if not 0.0 < mu <= 1.0:
        raise ParameterError(f"mu must lie in (0, 1], got {mu}")
    nu = v_dim / (8.0 * w_dim) * mu
    decay = w_dim * math.exp(-v_dim / 16.0)
    eta = (1.0 + 2.0 / math.sqrt(nu)) ** d_target * decay
    eta_loose = (9.0 / nu) ** (d_target / 2.0) * decay
    if nu < 1.0:
        assert eta <= eta_loose * (1.0 + 1e-12), "loosened failure bound fell below the exact one"
    return RandParams(nu=nu, eta=eta, eta_loose=eta_loose)


def reduction_dim(w_dim: int, mu: float, nu: float, d_target: int) -> int:
    """Reduced dimension sufficient for target overlap ``nu``, capped at W."""
    if not 0.0 < nu <= mu:
        raise ParameterError(f"need 0 < nu <= mu, got nu={nu}, mu={mu}")
    raw = 8.0 * max(w_dim * nu / mu, d_target * math.log(9.0 / nu) + 2.0 * math.log(w_dim))
    return min(int(math.ceil(raw)), w_dim)


def _overlap_onto(candidate: Subspace, z: Subspace) -> OverlapReport:
    """Overlap of ``candidate`` onto ``z``; left-factor overlap when the
    candidate lives on a tensor factor of z's space."""
    if candidate.ambient_dim == z.ambient_dim:
        return compare(z, candidate)
    if z.ambient_dim % candidate.ambient_dim == 0:
        return left_compare(candidate, z)
    raise DimensionMismatchError(
        f"candidate ambient {candidate.ambient_dim} matches neither the target ambient "
        f"{z.ambient_dim} nor a left factor of it"
    )


def _child_rng(root_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(root_seed, spawn_key=key))


def reduce_dimension(w: Subspace, z: Subspace, nu: float, params: BootstrapParams) -> Subspace:
    """Random reduction of ``w`` to the formula dimension, keeping overlap nu.

    Draws Haar subspaces of the contract dimension until one measures
    overlap at least ``nu`` onto ``z`` (left overlap when z lives in a
    product space).  Exhausting the budget raises ReductionFailureError
    carrying the best candidate seen.
    """
    mu = _overlap_onto(w, z).mu
    if mu < nu:
        raise ParameterError(f"current overlap {mu:.3e} is below the requested {nu:.3e}")
    v_dim = reduction_dim(w.dim, mu, nu, z.dim)
    if v_dim >= w.dim:
        return w
    best: Subspace | None = None
    best_mu = -1.0
    for trial in range(params.sample_budget):
        candidate = haar_subspace(w, v_dim, _child_rng(params.rng_seed, 0xD1, trial))
        cand_mu = _overlap_onto(candidate, z).mu
        if cand_mu >= nu:
            return candidate
        if cand_mu > best_mu:
            best, best_mu = candidate, cand_mu
    raise ReductionFailureError(
        f"no {v_dim}-dimensional subspace reached overlap {nu:.3e} in "
        f"{params.sample_budget} draws (best {best_mu:.3e})",
        best_candidate=best,
        best_overlap=best_mu,
    )


def _feasible_sample(
    w: Subspace, z: Subspace, dim: int, nu: float, tries: int, root_seed: int, level: int
) -> Subspace | None:
    for t in range(tries):
        candidate = haar_subspace(w, dim, _child_rng(root_seed, 0xB0, level, dim, t))
        if _overlap_onto(candidate, z).mu >= nu:
            return candidate
    return None


def _shrink_to_overlap(
    w: Subspace, z: Subspace, nu: float, params: BootstrapParams, level: int, cap: int
) -> Subspace:
    """Smallest-dimension subspace of ``w`` with overlap >= nu found by
    seeded Haar sampling and bisection over the dimension."""
    cap = min(cap, w.dim)
    levels = max(1, int(math.ceil(math.log2(max(2, cap)))) + 1)
    tries = max(1, params.sample_budget // levels)
    if _overlap_onto(w, z).mu < nu:
        raise ReductionFailureError(
            f"subspace of dimension {w.dim} has overlap below {nu:.3e}; nothing to shrink",
            best_candidate=w,
            best_overlap=_overlap_onto(w, z).mu,
        )
    best = w if cap >= w.dim else None
    if best is None:
        best = _feasible_sample(w, z, cap, nu, tries, params.rng_seed, level)
        if best is None:
            raise ReductionFailureError(
                f"no {cap}-dimensional subspace reached overlap {nu:.3e} within budget",
                best_candidate=w,
                best_overlap=None,
            )
    lo, hi = 1, best.dim
    while lo < hi:
        mid = (lo + hi) // 2
        found = _feasible_sample(w, z, mid, nu, tries, params.rng_seed, level)
        if found is not None:
            best, hi = found, mid
        else:
            lo = mid + 1
    return best


def bootstrap_run(k: Pap, z: Subspace, params: BootstrapParams | None = None) -> BootstrapTrace:
    """Fixed-point bootstrap: amplify overlap with the operator span, then
    shrink the dimension by random sampling, until the dimension stops
    decreasing.

    Requires shrink * dim of the span <= 1/32 so that the amplification step
    restores overlap 1/2 from the target overlap.  The returned trace also
    carries the doubly amplified final space, whose left viability error is
    at most the certified shrink factor.
    """
    params = params or BootstrapParams()
    if k.dim_pap == 0:
        raise PreconditionError("operator span is empty", report={"dim_pap": 0})
    budget = k.shrink * k.dim_pap
    if budget > 1.0 / 32.0 + TOL_NUM:
        raise PreconditionError(
            f"shrink * span dimension = {budget:.3e} exceeds 1/32",
            report={"shrink": k.shrink, "dim_pap": k.dim_pap, "product": budget},
        )
    if z.dim == 0:
        raise PreconditionError("target space is zero-dimensional", report={})
    dl = k.left_dim
    if z.ambient_dim % dl:
        raise DimensionMismatchError(
            f"target ambient {z.ambient_dim} is not a multiple of the left dimension {dl}"
        )
    nu = params.nu_target if params.nu_target is not None else 1.0 / (32.0 * k.dim_pap)
    records: list[TraceRecord] = []

    def record(iteration, action, sub):
        rep = left_compare(sub, z)
        records.append(
            TraceRecord(
                iteration=iteration,
                action=action,
                dim_v=sub.dim,
                mu=rep.mu,
                delta=rep.delta,
                epsilon=rep.epsilon,
                subspace=sub,
            )
        )

    v = Subspace.full(dl)
    converged = False
    for iteration in range(1, params.max_iters + 1):
        prev_dim = v.dim
        amplified = pap_apply(k, v)
        if amplified.dim == 0:
            raise PreconditionError(
                "operator span annihilated the working subspace",
                report={"iteration": iteration, "dim_before": prev_dim},
            )
        record(iteration, "pap_apply", amplified)
        try:
            v = _shrink_to_overlap(amplified, z, nu, params, iteration, cap=prev_dim)
        except ReductionFailureError as exc:
            # propagate with the partial trace attached
            exc.trace = BootstrapTrace(
                records=tuple(records), final=v, final_viable=None, converged=False
            )
            raise
        record(iteration, "reduce", v)
        if v.dim >= prev_dim:
            converged = True
            break
    final_viable = pap_apply(k, pap_apply(k, v))
    return BootstrapTrace(
        records=tuple(records), final=v, final_viable=final_viable, converged=converged
    )


def _entropy_bits(zbasis: np.ndarray, dl: int, dr: int, c: np.ndarray) -> float:
    m = (zbasis @ c).reshape(dl, dr)
    s = np.linalg.svd(m, compute_uv=False)
    return spectrum_entropy(np.clip(s * s, 0.0, None))


def _entropy_and_grad(zbasis, dl, dr, c):
    psi = zbasis @ c
    m = psi.reshape(dl, dr)
    rho = m @ m.conj().T
    w, u = np.linalg.eigh(rho)
    w = np.clip(w, 1e-18, None)
    entropy = float(-np.sum(w * np.log2(w)))
    log_rho = (u * np.log(w)) @ u.conj().T
    grad_m = -(log_rho @ m + m) / math.log(2.0)
    grad = zbasis.conj().T @ grad_m.reshape(-1)
    grad -= (np.vdot(c, grad)) * c
    return entropy, grad


def _ascend(zbasis, dl, dr, c0, max_steps=300):
    c = c0 / np.linalg.norm(c0)
    s, g = _entropy_and_grad(zbasis, dl, dr, c)
    for _ in range(max_steps):
        gnorm = float(np.linalg.norm(g))
        if gnorm < GRAD_TOL:
            break
        step = 1.0
        improved = False
        for _ in range(40):
            trial = c + step * g
            trial /= np.linalg.norm(trial)
            s_trial = _entropy_bits(zbasis, dl, dr, trial)
            if s_trial >= s + 1e-4 * step * gnorm ** 2:
                c = trial
                s, g = _entropy_and_grad(zbasis, dl, dr, c)
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return c, s


def max_entropy_estimate(
    z: Subspace, dims, restarts: int = 32, rng_seed: int = 0
) -> tuple[np.ndarray, float]:
    """Best entanglement entropy over unit vectors of ``z``, by multi-restart
    Riemannian gradient ascent in coordinate space.

    The returned value is a lower bound on the true maximum and is monotone
    non-decreasing in ``restarts`` for a fixed seed stream.
    """
    dl, dr = int(dims[0]), int(dims[1])
    if dl * dr != z.ambient_dim:
        raise DimensionMismatchError(f"dims {dl}x{dr} do not factor {z.ambient_dim}")
    if z.dim == 0:
        raise ParameterError("cannot maximize over a zero-dimensional subspace")
    if restarts < 1:
        raise ParameterError("need at least one restart")
    best_s = -1.0
    best_c = None
    for child in np.random.SeedSequence(rng_seed).spawn(restarts):
        rng = np.random.default_rng(child)
        c0 = complex_gaussian(rng, z.dim)
        c, s = _ascend(z.basis, dl, dr, c0)
        if s > best_s:
            best_s, best_c = s, c
    return z.basis @ best_c, best_s


def geometric_tail(shrink: float, tail_start: int) -> float:
    """Series remainder shrink^(m/2) / (1 - sqrt(shrink)); infinite at 1."""
    if shrink < 0:
        raise ParameterError("shrink must be nonnegative")
    if shrink == 0:
        return 0.0
    root = math.sqrt(shrink)
    if root >= 1.0:
        return math.inf
    return root ** tail_start / (1.0 - root)


def derived_dim_constant(degeneracy: int, rank: float) -> float:
    """Dimension constant for the explicit bound; see the module docstring."""
    if degeneracy < 1 or rank < 1:
        raise ParameterError("degeneracy and rank must be at least 1")
    best = 0.0
    for n in range(1, 400):
        rank_n = rank ** n
        if rank_n > 1e280:
            break
        v = 2.0
        for _ in range(200):
            v_new = 16.0 * (degeneracy * math.log(288.0 * rank_n) + 2.0 * math.log(rank_n * v)) + 2.0
            if abs(v_new - v) < 1e-9:
                v = v_new
                break
            v = v_new
        ratio = v / (degeneracy * rank_n)
        best = max(best, ratio)
        if n > 3 and ratio < best * 1e-6:
            break
    return best


@dataclass(frozen=True)
class BoundParams:
    """Parameters of the explicit entanglement bound.

    ``closeness_seq`` holds the per-level target-closeness errors (index 0
    is level 1); it may also be a callable mapping the level to the error.
    ``dim_constant`` of None derives the constant from the degeneracy and
    rank.  ``tail_start`` is the first level of the series (>= 5); the
    headline form uses 17.
    """

    degeneracy: int
    rank: float
    shrink: float
    tail_start: int = 17
    closeness_seq: Sequence[float] | Callable[[int], float] = ()
    dim_constant: float | None = None

    def __post_init__(self):
        if self.degeneracy < 1:
            raise ParameterError(f"degeneracy must be >= 1, got {self.degeneracy}")
        if self.rank < 1:
            raise ParameterError(f"rank must be >= 1, got {self.rank}")
        if self.shrink < 0:
            raise ParameterError("shrink must be nonnegative")
        if self.rank * self.shrink > 0.5 + TOL_NUM:
            raise ParameterError(
                f"rank * shrink = {self.rank * self.shrink:.3e} exceeds 1/2"
            )
        if self.tail_start < 5:
            raise ParameterError(f"tail_start must be >= 5, got {self.tail_start}")

    def closeness_at(self, level: int) -> float:
        if callable(self.closeness_seq):
            value = float(self.closeness_seq(level))
        else:
            seq = self.closeness_seq
            value = float(seq[level - 1]) if level - 1 < len(seq) else 0.0
        if not 0.0 <= value <= 1.0:
            raise ParameterError(f"closeness error at level {level} is {value}, outside [0, 1]")
        return value


def closeness_weight(p: BoundParams) -> float:
    """Sum over levels of sqrt(closeness); the bound's additive coefficient.

    Raises ParameterError when the partial sums fail to stagnate.
    """
    total = 0.0
    for n in range(1, SERIES_MAX_TERMS + 1):
        term = math.sqrt(p.closeness_at(n))
        total += term
        if term < SERIES_EPS and (callable(p.closeness_seq) or n >= len(p.closeness_seq)):
            return total
    raise ParameterError("closeness series did not stagnate; refusing a divergent family")


def explicit_bound(p: BoundParams) -> float:
    """Fully explicit entropy bound from the dyadic chain, in bits.

    log2(C * D * R^(3m)) plus, for each level n >= m, the clamped tail
    coefficient gamma_n = min(1, shrink^(n/2) + sqrt(closeness_n)) times
    log2(C * D * R^(3n+3)) plus h(gamma_n); the series is truncated once
    terms fall below 1e-15.
    """
    # Divergence check first: the weight must be finite.
    weight_terms = 0.0
    for n in range(1, SERIES_MAX_TERMS + 1):
        term = n * math.sqrt(p.closeness_at(n))
        weight_terms += term
        if term < SERIES_EPS and (callable(p.closeness_seq) or n >= len(p.closeness_seq)):
            break
    else:
        raise ParameterError("weighted closeness series did not stagnate")
    constant = p.dim_constant if p.dim_constant is not None else derived_dim_constant(p.degeneracy, p.rank)
    if constant <= 0:
        raise ParameterError("dimension constant must be positive")
    log_cd = math.log2(constant) + math.log2(p.degeneracy)
    log_r = math.log2(p.rank)
    total = log_cd + 3 * p.tail_start * log_r
    seq_len = 0 if callable(p.closeness_seq) else len(p.closeness_seq)
    n = p.tail_start
    while n <= SERIES_MAX_TERMS:
        gamma = min(1.0, p.shrink ** (n / 2.0) + math.sqrt(p.closeness_at(n)))
        term = gamma * (log_cd + (3 * n + 3) * log_r) + entropy_term(gamma)
        if term < SERIES_EPS and n >= p.tail_start + seq_len:
            break
        total += term
        n += 1
    else:
        raise ParameterError("bound series did not converge within the term cap")
    return total


@dataclass(frozen=True, eq=False)
class FrustratedLevel:
    level: int
    closeness: float
    shrink_level: float
    rank_level: int
    viability_target: float
    viability_measured: float
    within_bound: bool
    trace: BootstrapTrace


@dataclass(frozen=True, eq=False)
class FrustratedReport:
    levels: tuple[FrustratedLevel, ...]
    s_max: float
    bound_value: float
    entropy_within_bound: bool
    bound_params: BoundParams


def frustrated_run(
    z: Subspace,
    agsp_seq: Sequence[BipartiteAgsp],
    delta_seq: Sequence[float],
    params: BootstrapParams | None = None,
    bound_params: BoundParams | None = None,
    entropy_restarts: int = 16,
) -> FrustratedReport:
    """Bootstrap against a sequence of approximate targets and assemble the
    viability / entropy chain.

    Level n's AGSP must target a space delta_n-close to ``z`` with shrink at
    most the base shrink to the n-th power and rank at most the base rank to
    the n-th power (base values taken from the first entry).  Each level's
    doubly amplified space must be ((base shrink)^(n/2) + sqrt(delta_n))^2
    viable for ``z``; the report compares the measured entropy maximum
    against the explicit bound.
    """
    params = params or BootstrapParams()
    if not agsp_seq:
        raise ParameterError("need at least one operator level")
    if len(agsp_seq) != len(delta_seq):
        raise ParameterError("one closeness error per level is required")
    dims = agsp_seq[0].dims
    base_shrink = agsp_seq[0].base.shrink_certified
    base_rank = agsp_seq[0].rank_exact
    levels = []
    for n, (bip, delta_n) in enumerate(zip(agsp_seq, delta_seq), start=1):
        approx_target = bip.base.target
        if bip.dims != dims:
            raise ParameterError(f"level {n} uses a different bipartition {bip.dims}")
        if not delta_close(approx_target, z, delta_n):
            raise ParameterError(
                f"level {n} target is not {delta_n}-close to the reference space"
            )
        if bip.base.shrink_certified > base_shrink ** n * (1.0 + 1e-9) + 1e-15:
            raise ParameterError(
                f"level {n} shrink {bip.base.shrink_certified:.3e} exceeds the required power"
            )
        if bip.rank_exact > base_rank ** n:
            raise ParameterError(
                f"level {n} rank {bip.rank_exact} exceeds the required power {base_rank ** n}"
            )
        pap = pap_from_agsp(bip)
        trace = bootstrap_run(pap, approx_target, replace(params, rng_seed=params.rng_seed + n))
        measured = left_compare(trace.final_viable, z).delta
        target_viability = (base_shrink ** (n / 2.0) + math.sqrt(delta_n)) ** 2
        levels.append(
            FrustratedLevel(
                level=n,
                closeness=delta_n,
                shrink_level=bip.base.shrink_certified,
                rank_level=bip.rank_exact,
                viability_target=target_viability,
                viability_measured=measured,
                within_bound=measured <= target_viability + TOL_NUM,
                trace=trace,
            )
        )
    if bound_params is None:
        bound_params = BoundParams(
            degeneracy=z.dim,
            rank=max(1.0, float(base_rank)),
            shrink=base_shrink,
            closeness_seq=tuple(delta_seq),
        )
    _, s_max = max_entropy_estimate(z, dims, restarts=entropy_restarts, rng_seed=params.rng_seed)
    bound_value = explicit_bound(bound_params)
    return FrustratedReport(
        levels=tuple(levels),
        s_max=s_max,
        bound_value=bound_value,
        entropy_within_bound=s_max <= bound_value + TOL_NUM,
        bound_params=bound_params,
    )
