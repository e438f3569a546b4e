"""Haar sampling, dimension reduction, the bootstrap loop, entropy
maximization, and the explicit entanglement bound."""

import math

import numpy as np
import pytest
from scipy import stats

from agsplab.agsp import operator_schmidt, pap_from_agsp, synth_agsp, validate_agsp
from agsplab.bipartite import left_compare
from agsplab.bootstrap import (
    BootstrapParams,
    BoundParams,
    _shrink_to_overlap,
    bootstrap_run,
    closeness_weight,
    derived_dim_constant,
    explicit_bound,
    frustrated_run,
    geometric_tail,
    haar_subspace,
    max_entropy_estimate,
    randlem_params,
    reduce_dimension,
    reduction_dim,
)
from agsplab.errors import ParameterError, PreconditionError, ReductionFailureError
from agsplab.subspace import Subspace, compare, haar_unitary, orthonormalize
from conftest import random_subspace


class TestHaarSubspace:
    def test_full_dimension_returns_input(self, rng):
        w = random_subspace(rng, 6, 3)
        assert haar_subspace(w, 3, 0) is w

    def test_determinism(self, rng):
        w = random_subspace(rng, 8, 4)
        a = haar_subspace(w, 2, 123)
        b = haar_subspace(w, 2, 123)
        assert np.array_equal(a.basis, b.basis)

    def test_lies_inside_w(self, rng):
        w = random_subspace(rng, 10, 4)
        sample = haar_subspace(w, 2, 7)
        assert compare(sample, w).mu > 1 - 1e-12

    def test_line_overlap_mean_one_half(self):
        # two Haar lines in C^2: overlap is uniform on [0, 1], mean 1/2
        w = Subspace.full(2)
        line = orthonormalize([np.array([1.0, 0.0])])
        n = 10_000
        values = np.array(
            [compare(line, haar_subspace(w, 1, 10_000 + t)).mu for t in range(n)]
        )
        se = math.sqrt(1.0 / 12.0 / n)
        assert abs(values.mean() - 0.5) <= 3 * se

    def test_unitary_invariance_ks(self, rng):
        # replacing W's basis by basis x unitary leaves the overlap law alone
        w1 = random_subspace(rng, 4, 2)
        w2 = Subspace(4, w1.basis @ haar_unitary(rng, 2))
        line = haar_subspace(w1, 1, 99)
        n = 10_000
        s1 = np.array([compare(line, haar_subspace(w1, 1, 2 * t)).mu for t in range(n)])
        s2 = np.array([compare(line, haar_subspace(w2, 1, 2 * t + 1)).mu for t in range(n)])
        assert stats.ks_2samp(s1, s2).pvalue > 0.01

    def test_bad_dimension_rejected(self, rng):
        with pytest.raises(ParameterError):
            haar_subspace(random_subspace(rng, 5, 2), 3, 0)


class TestFormulas:
    def test_direct_evaluation(self):
        result = randlem_params(16, 2, 0.5, 1)
        assert abs(result.nu - 1.0 / 128.0) < 1e-15

    def test_loosening_on_grid(self):
        for w in (10, 100, 10_000):
            for v in (2, 8, 32):
                for mu in (0.05, 0.5, 1.0):
                    for d in (1, 3, 8):
                        r = randlem_params(w, v, mu, d)
                        if r.nu < 1.0:
                            assert r.eta <= r.eta_loose * (1 + 1e-12)

    def test_reduction_dim_contract(self):
        for w, mu, nu, d in [(300, 1.0, 1 / 16, 2), (64, 0.5, 1 / 64, 4), (10, 1.0, 0.9, 1)]:
            v = reduction_dim(w, mu, nu, d)
            raw = 8 * max(w * nu / mu, d * math.log(9 / nu) + 2 * math.log(w))
            assert v == min(int(math.ceil(raw)), w)

    def test_log_eta_nonpositive_when_unclamped(self, rng):
        for _ in range(300):
            w = int(round(10 ** rng.uniform(1, 6)))
            d = int(rng.integers(1, 9))
            mu = float(rng.uniform(1e-3, 1))
            nu = mu * float(rng.uniform(1e-6, 1))
            v = reduction_dim(w, mu, nu, d)
            if v < w:
                assert d / 2 * math.log(9 / nu) + math.log(w) - v / 16 <= 0


class TestReduceDimension:
    def test_no_reduction_returns_w(self, rng):
        # formula dimension hits the cap at desk scale: W comes back as is
        z = random_subspace(rng, 256, 2)
        w = Subspace.full(64)  # left factor of a 64 x 4 split
        out = reduce_dimension(w, z, 1.0 / 16.0, BootstrapParams(rng_seed=1))
        assert out is w

    def test_desk_instance_success_rate(self, rng):
        # left instance: dim H_L = 64, D = 2, target overlap mu/16
        z = random_subspace(rng, 256, 2)
        w = Subspace.full(64)
        successes = 0
        for seed in range(40):
            try:
                out = reduce_dimension(w, z, 1.0 / 16.0, BootstrapParams(rng_seed=seed))
                if left_compare(out, z).mu >= 1.0 / 16.0 - 1e-12:
                    successes += 1
            except ReductionFailureError:
                pass
        assert successes >= 38  # >= 95 percent of seeds

    def test_nontrivial_reduction_matches_formula(self, rng):
        z = random_subspace(rng, 300, 2)
        w = Subspace.full(300)
        nu = 1.0 / 16.0
        out = reduce_dimension(w, z, nu, BootstrapParams(rng_seed=3))
        assert out.dim == reduction_dim(300, 1.0, nu, 2)
        assert out.dim < 300
        assert compare(z, out).mu >= nu

    def test_overlap_below_target_rejected(self, rng):
        z = random_subspace(rng, 32, 2)
        w = random_subspace(rng, 32, 3)
        mu = compare(z, w).mu
        with pytest.raises(ParameterError):
            reduce_dimension(w, z, min(1.0, mu * 2 + 1e-6), BootstrapParams())

    def test_shrink_search_failure_carries_best(self, rng):
        z = random_subspace(rng, 32, 2)
        w = random_subspace(rng, 8, 2)
        with pytest.raises(ReductionFailureError) as err:
            _shrink_to_overlap(w, z, 1.0, BootstrapParams(), level=0, cap=2)
        assert err.value.best_candidate is not None


def product_basis_target(dl, dr):
    """Target spanned by two aligned product states."""
    z = np.zeros((dl * dr, 2), dtype=complex)
    z[0, 0] = 1.0
    z[(dl - 1) * dr + (dr - 1), 1] = 1.0
    return Subspace(dl * dr, z)


class TestBootstrapRun:
    def make_pap(self, z, shrink, seed, dims):
        a = synth_agsp(z, shrink, rng_seed=seed)
        return pap_from_agsp(operator_schmidt(a, dims))

    def test_product_basis_converges_to_degeneracy(self):
        dl = dr = 4
        z = product_basis_target(dl, dr)
        k = self.make_pap(z, 1e-4, seed=2, dims=(dl, dr))
        # a single left direction cannot hold overlap above 1/2 on two
        # orthogonal left supports, so the analytic optimum is the degeneracy
        params = BootstrapParams(nu_target=0.6, sample_budget=400, rng_seed=5)
        trace = bootstrap_run(k, z, params)
        assert trace.converged
        assert trace.final.dim == 2
        iterations = max(r.iteration for r in trace.records)
        assert iterations <= 2
        assert left_compare(trace.final, z).mu >= 0.6 - 1e-9

    def test_trace_monotone_and_recomputable(self, rng):
        z = random_subspace(rng, 64, 3)
        k = self.make_pap(z, 1e-4, seed=7, dims=(8, 8))
        trace = bootstrap_run(k, z, BootstrapParams(rng_seed=11))
        reduce_dims = [r.dim_v for r in trace.records if r.action == "reduce"]
        assert all(b <= a for a, b in zip(reduce_dims, reduce_dims[1:]))
        for record in trace.records:
            rep = left_compare(record.subspace, z)
            assert record.dim_v == record.subspace.dim
            assert abs(rep.mu - record.mu) <= 1e-9
            assert abs(rep.delta - record.delta) <= 1e-9

    def test_converged_overlap_and_viable_space(self, rng):
        z = random_subspace(rng, 64, 2)
        k = self.make_pap(z, 2e-4, seed=13, dims=(8, 8))
        trace = bootstrap_run(k, z, BootstrapParams(rng_seed=17))
        assert trace.converged
        nu = 1.0 / (32.0 * k.dim_pap)
        assert left_compare(trace.final, z).mu >= nu - 1e-9
        assert left_compare(trace.final_viable, z).delta <= k.shrink + 1e-9

    def test_precondition_refusal(self, rng):
        z = random_subspace(rng, 16, 2)
        k = self.make_pap(z, 0.1, seed=3, dims=(4, 4))
        assert k.shrink * k.dim_pap > 1.0 / 32.0
        with pytest.raises(PreconditionError) as err:
            bootstrap_run(k, z, BootstrapParams())
        assert "1/32" in str(err.value)
        assert err.value.report["product"] > 1.0 / 32.0

    def test_params_validation(self):
        with pytest.raises(ParameterError):
            BootstrapParams(nu_target=0.0)
        with pytest.raises(ParameterError):
            BootstrapParams(sample_budget=0)


class TestMaxEntropy:
    def test_singleton_bell(self):
        bell = np.zeros(4, dtype=complex)
        bell[0] = bell[3] = 2 ** -0.5
        z = Subspace(4, bell.reshape(4, 1))
        psi, s = max_entropy_estimate(z, (2, 2), restarts=2, rng_seed=0)
        assert abs(s - 1.0) < 1e-9
        assert abs(np.linalg.norm(psi) - 1.0) < 1e-9

    def test_aligned_pair_one_bit(self):
        z = product_basis_target(4, 4)
        _, s = max_entropy_estimate(z, (4, 4), restarts=8, rng_seed=1)
        assert abs(s - 1.0) <= 1e-6

    def test_beats_dense_random_sampling(self, rng):
        z = random_subspace(rng, 16, 2)
        _, s = max_entropy_estimate(z, (4, 4), restarts=16, rng_seed=2)
        # oracle: batched entropy over 10^5 random coordinate vectors
        n = 100_000
        coeff = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
        coeff /= np.linalg.norm(coeff, axis=1, keepdims=True)
        states = (coeff @ z.basis.T).reshape(n, 4, 4)
        lambdas = np.linalg.svd(states, compute_uv=False) ** 2
        lam = np.clip(lambdas, 1e-300, None)
        entropies = -(lam * np.log2(lam)).sum(axis=1)
        assert s >= entropies.max() - 1e-6

    def test_monotone_in_restarts(self, rng):
        z = random_subspace(rng, 16, 3)
        values = [
            max_entropy_estimate(z, (4, 4), restarts=r, rng_seed=9)[1] for r in (1, 2, 4, 8)
        ]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


class TestExplicitBound:
    def test_vanishing_series_floor(self):
        constant = derived_dim_constant(2, 4.0)
        p = BoundParams(degeneracy=2, rank=4.0, shrink=0.0)
        expected = math.log2(constant * 2 * 4.0 ** (3 * 17))
        assert abs(explicit_bound(p) - expected) < 1e-9

    def test_degenerate_floor(self):
        p = BoundParams(degeneracy=1, rank=1.0, shrink=0.0)
        assert abs(explicit_bound(p) - math.log2(derived_dim_constant(1, 1.0))) < 1e-12

    def test_headline_tail_coefficient(self):
        # m = 17 with shrink 1/2 puts the geometric remainder under 0.01
        assert geometric_tail(0.5, 17) <= 0.01
        assert abs(geometric_tail(0.5, 17) - 0.5 ** 8.5 / (1 - 0.5 ** 0.5)) < 1e-15

    def test_monotone_in_each_parameter(self):
        base = dict(degeneracy=4, rank=4.0, shrink=0.05, tail_start=17)
        b0 = explicit_bound(BoundParams(**base))
        assert explicit_bound(BoundParams(**{**base, "degeneracy": 8})) >= b0
        assert explicit_bound(BoundParams(**{**base, "rank": 8.0})) >= b0
        assert explicit_bound(BoundParams(**{**base, "shrink": 0.1})) >= b0
        with_closeness = BoundParams(**base, closeness_seq=tuple([1e-4] * 40))
        assert explicit_bound(with_closeness) >= b0

    def test_frozen_shape_constants(self):
        # kappa and kappa' extracted once from this grid and frozen
        kappa, kappa_prime = 54.0, 4.28
        for degeneracy in (1, 2, 4, 8, 16, 64, 256, 1024):
            for rank in (2, 4, 8, 16, 64, 256, 1024):
                p = BoundParams(degeneracy=degeneracy, rank=float(rank), shrink=0.5 / rank)
                assert explicit_bound(p) <= (
                    1.01 * math.log2(degeneracy) + kappa * math.log2(rank) + kappa_prime
                )

    def test_doubling_degeneracy_adds_one_block_of_bits(self):
        # finite difference in D: about (1 + eps_m + c_delta) bits per doubling
        eps_m = geometric_tail(0.1, 17)
        for degeneracy in (64, 256):
            lo = explicit_bound(BoundParams(degeneracy=degeneracy, rank=4.0, shrink=0.1))
            hi = explicit_bound(BoundParams(degeneracy=2 * degeneracy, rank=4.0, shrink=0.1))
            assert abs((hi - lo) - (1.0 + eps_m)) <= 0.1

    def test_geometric_closeness_weight(self):
        p = BoundParams(degeneracy=2, rank=2.0, shrink=0.1,
                        closeness_seq=lambda n: 4.0 ** -n)
        assert abs(closeness_weight(p) - 1.0) < 1e-14

    def test_divergent_family_rejected(self):
        p = BoundParams(degeneracy=2, rank=2.0, shrink=0.1,
                        closeness_seq=lambda n: 0.25)
        with pytest.raises(ParameterError):
            explicit_bound(p)

    def test_invariants_enforced(self):
        with pytest.raises(ParameterError):
            BoundParams(degeneracy=2, rank=4.0, shrink=0.2)  # rank * shrink > 1/2
        with pytest.raises(ParameterError):
            BoundParams(degeneracy=2, rank=2.0, shrink=0.1, tail_start=4)


class TestFrustratedRun:
    def test_exact_targets_reduce_to_plain_pipeline(self, rng):
        # powers of one operator with the exact target at every level
        dl = dr = 4
        z = random_subspace(rng, dl * dr, 2)
        base = synth_agsp(z, 1e-3, rng_seed=4)
        op = np.asarray(base.operator)
        seq = []
        for n in (1, 2, 3):
            a_n = validate_agsp(np.linalg.matrix_power(op, n), z)
            seq.append(operator_schmidt(a_n, (dl, dr)))
        report = frustrated_run(z, seq, [0.0, 0.0, 0.0],
                                BootstrapParams(rng_seed=6), entropy_restarts=4)
        for level in report.levels:
            assert level.within_bound
            assert level.viability_target <= base.shrink_certified ** level.level * (1 + 1e-6)
        assert report.entropy_within_bound

    def test_rotated_targets(self, rng):
        dl = dr = 4
        z = random_subspace(rng, dl * dr, 2)
        from agsplab.subspace import rotate_subspace

        seq = []
        closeness = []
        for n in (1, 2):
            delta_n = 4.0 ** -n
            approx = rotate_subspace(z, delta_n, rng_seed=50 + n)
            a = synth_agsp(approx, (1e-3) ** n, rng_seed=60 + n)
            seq.append(operator_schmidt(a, (dl, dr)))
            closeness.append(delta_n)
        report = frustrated_run(z, seq, closeness, BootstrapParams(rng_seed=8),
                                entropy_restarts=4)
        assert all(level.within_bound for level in report.levels)
        assert report.entropy_within_bound

    def test_closeness_precondition_enforced(self, rng):
        dl = dr = 4
        z = random_subspace(rng, dl * dr, 2)
        from agsplab.subspace import rotate_subspace

        far = rotate_subspace(z, 0.5, rng_seed=1)
        a = synth_agsp(far, 1e-4, rng_seed=2)
        with pytest.raises(ParameterError):
            frustrated_run(z, [operator_schmidt(a, (dl, dr))], [1e-4],
                           BootstrapParams(rng_seed=1))


def test_bootstrap_reduction_failure_carries_trace(rng, monkeypatch):
    # a failing reduction step surfaces the partial trace on the error
    import agsplab.bootstrap as bs

    z = random_subspace(rng, 16, 3)
    a = synth_agsp(z, 1e-4, rng_seed=31)
    k = pap_from_agsp(operator_schmidt(a, (4, 4)))

    def always_fail(*args, **kwargs):
        raise ReductionFailureError("forced failure", best_candidate=None, best_overlap=0.0)

    monkeypatch.setattr(bs, "_shrink_to_overlap", always_fail)
    with pytest.raises(ReductionFailureError) as err:
        bootstrap_run(k, z, BootstrapParams(rng_seed=1))
    trace = err.value.trace
    assert trace.converged is False
    assert trace.final_viable is None
    assert trace.records and trace.records[-1].action == "pap_apply"
