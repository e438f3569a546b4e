"""Acceptance suite: every criterion at its stated tolerance and scale.

Each test prints one PASS/FAIL line (visible with pytest -s or in captured
output on failure).  Stated runtime ceilings are asserted as generous upper
bounds; the pinned tolerances live in the asserts themselves.
"""

import math
import time

from agsplab.agsp import chebyshev_agsp, operator_schmidt, pap_from_agsp, synth_agsp
from agsplab.bipartite import left_compare
from agsplab.bootstrap import (
    BootstrapParams,
    BoundParams,
    bootstrap_run,
    explicit_bound,
    frustrated_run,
    max_entropy_estimate,
)
from agsplab.cli import main
from agsplab.config import SCHEMAS
from agsplab.hamiltonians import ising_chain, random_degenerate_target
from agsplab.subspace import rotate_subspace
from agsplab import suites

VERIFY_CFG = {
    "ambient_max": 32,
    "dimz_max": 6,
    "shrink_grid": (0.0, 1e-4, 0.1, 0.5, 0.99),
    "dilation_grid": (1.0, 2.0, 10.0),
    "tol_scale": 1.0,
}
SEED = 0


class Criterion:
    def __init__(self, number, label, limit_s):
        self.number = number
        self.label = label
        self.limit_s = limit_s
        self.start = None

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        verdict = "PASS" if exc_type is None else "FAIL"
        print(f"{verdict} criterion {self.number}: {self.label} [{elapsed:.2f} s]")
        if exc_type is None:
            assert elapsed < self.limit_s, f"criterion {self.number} exceeded {self.limit_s} s"
        return False


def run_suite(name, trials):
    rows = []
    for trial in range(trials):
        rows += suites.TRIAL_RUNNERS[name](trial, SEED, VERIFY_CFG)
    return rows


def test_criterion_1_sharpness_witness():
    with Criterion(1, "sharpness witness |eps' - shrink*eps| <= 1e-12", 1.0):
        rows = suites.sharpness_rows(shrink=0.25, error_ratio=1.0)
        for row in rows:
            assert row.tol == 1e-12
            assert row.passed, row
        eps_after = float(dict(
            pair.split("=") for pair in rows[0].quantities.split(";")
        )["epsilon_after"])
        assert abs(eps_after - 0.25) <= 1e-12


def test_criterion_2_error_reduction_suite():
    with Criterion(2, "sharp error reduction on 1000 seeded instances", 60.0):
        rows = run_suite("error_reduction", 1000)
        assert len(rows) == 2000
        assert all(row.passed for row in rows), [r for r in rows if not r.passed][:3]


def test_criterion_3_lifting_suite():
    with Criterion(3, "lifting operator bounds on 1000 instances + footnote", 60.0):
        rows = run_suite("lifting", 1000)
        assert len(rows) == 3000
        assert all(row.passed for row in rows), [r for r in rows if not r.passed][:3]
        footnote = suites.footnote_lifting_rows()
        assert footnote[0].tol == 1e-10
        assert all(row.passed for row in footnote)


def test_criterion_4_overlap_symmetry():
    with Criterion(4, "overlap symmetry within 1e-10 on 1000 covering pairs", 30.0):
        rows = run_suite("symmetry", 1000)
        assert len(rows) == 1000
        assert all(row.tol == 1e-10 for row in rows)
        assert all(row.passed for row in rows), [r for r in rows if not r.passed][:3]


def test_criterion_5_boundary_amplification():
    with Criterion(5, "overlap >= shrink amplifies to 1/2 on 500 boundary instances", 60.0):
        rows = run_suite("boundary", 500)
        assert len(rows) == 500
        assert all(row.passed for row in rows), [r for r in rows if not r.passed][:3]


def test_criterion_6_schmidt_tail():
    with Criterion(6, "Schmidt tail <= sqrt(delta) on 500 instances (8x8, D<=4)", 60.0):
        rows = run_suite("tail", 500)
        assert len(rows) == 500
        assert all(row.passed for row in rows), [r for r in rows if not r.passed][:3]


def test_criterion_7_dyadic_entropy():
    with Criterion(7, "dyadic entropy bound on 1000 spectra + uniform-4 equality", 10.0):
        rows = run_suite("dyadic", 1000)
        assert len(rows) == 1000
        assert all(row.passed for row in rows), [r for r in rows if not r.passed][:3]
        equality = suites.dyadic_equality_rows()
        assert equality[0].tol == 1e-12
        assert all(row.passed for row in equality)


def test_criterion_8_reduction_formulas():
    with Criterion(8, "dimension formula makes log eta <= 0 over a 10^3 grid", 5.0):
        rows = run_suite("formula", 1000)
        log_eta_rows = [r for r in rows if r.check == "reduction_dim_log_eta"]
        loosen_rows = [r for r in rows if r.check == "eta_loosening"]
        assert len(log_eta_rows) == 1000
        assert loosen_rows  # nu < 1 occurs throughout the grid
        assert all(row.passed for row in rows), [r for r in rows if not r.passed][:3]


def test_criterion_9_chain_pipeline():
    with Criterion(9, "end-to-end spin-chain pipeline (n=8, middle cut)", 600.0):
        toy = ising_chain(8)
        target = toy.ground_space
        dims = (16, 16)
        chosen = None
        for degree in range(1, 40):
            agsp = chebyshev_agsp(toy.matrix, target, degree)
            bip = operator_schmidt(agsp, dims)
            if agsp.shrink_certified * bip.rank_exact <= 1.0 / 32.0:
                chosen = (degree, agsp, bip)
                break
        assert chosen is not None, "no Chebyshev degree reached the feasibility target"
        degree, agsp, bip = chosen
        pap = pap_from_agsp(bip)
        trace = bootstrap_run(pap, target, BootstrapParams(rng_seed=SEED))
        assert trace.converged
        assert trace.final.dim <= 8
        implied = trace.final.dim / (target.dim * max(1.0, math.log(bip.rank_exact)))
        print(
            f"  degree {degree}: shrink {agsp.shrink_certified:.3e}, rank {bip.rank_exact}, "
            f"final dim {trace.final.dim}, implied dimension constant {implied:.3f}"
        )
        assert left_compare(trace.final_viable, target).delta <= agsp.shrink_certified + 1e-9
        _, s_max = max_entropy_estimate(target, dims, restarts=16, rng_seed=SEED)
        assert abs(s_max - 1.0) <= 1e-6
        bound = explicit_bound(
            BoundParams(
                degeneracy=target.dim,
                rank=max(1.0, float(bip.rank_exact)),
                shrink=agsp.shrink_certified,
            )
        )
        assert bound >= s_max


def test_criterion_10_frustrated_variant():
    with Criterion(10, "frustrated variant: rotated targets, 5 levels, c_delta = 1", 300.0):
        dl = dr = 8
        toy = random_degenerate_target(dl, dr, 2, rng_seed=SEED + 11)
        target = toy.ground_space
        base_shrink = 1.0 / 2048.0
        agsps = []
        closeness = []
        for level in range(1, 6):
            delta_n = 4.0 ** -level
            approx = rotate_subspace(target, delta_n, rng_seed=100 + level)
            agsp = synth_agsp(approx, base_shrink ** level, rng_seed=200 + level)
            agsps.append(operator_schmidt(agsp, (dl, dr)))
            closeness.append(delta_n)
        bound_params = BoundParams(
            degeneracy=2,
            rank=max(1.0, float(agsps[0].rank_exact)),
            shrink=base_shrink,
            closeness_seq=lambda n: 4.0 ** -n,
        )
        report = frustrated_run(
            target, agsps, closeness,
            params=BootstrapParams(rng_seed=SEED),
            bound_params=bound_params,
            entropy_restarts=8,
        )
        from agsplab.bootstrap import closeness_weight

        assert abs(closeness_weight(bound_params) - 1.0) <= 1e-12
        for level in report.levels:
            expected = (base_shrink ** (level.level / 2.0) + math.sqrt(level.closeness)) ** 2
            assert abs(level.viability_target - expected) <= 1e-15
            assert level.viability_measured <= expected + 1e-9
        assert report.s_max <= report.bound_value + 1e-9


def test_criterion_11_csv_determinism(tmp_path):
    with Criterion(11, "byte-identical CSV for every command under a fixed seed", 300.0):
        configs = {
            "verify-lemmas": (
                "trials_error_reduction = 10\ntrials_lifting = 10\ntrials_symmetry = 10\n"
                "trials_boundary = 6\ntrials_tail = 6\ntrials_dyadic = 10\ntrials_formula = 10\n"
            ),
            "sharpness-demo": "",
            "chain-experiment": (
                "chain_length = 5\ndegree_min = 4\ndegree_max = 6\nentropy_restarts = 2\n"
            ),
            "bound-table": (
                "degeneracy_grid = 1,2\nrank_grid = 2,4\nshrink_grid = 0,0.125\nm_grid = 17\n"
            ),
            "frustrated-run": (
                "left_dim = 4\nright_dim = 4\nlevels = 2\nentropy_restarts = 2\n"
                "base_shrink = 0.00048828125\n"
            ),
        }
        assert set(configs) == set(SCHEMAS)
        for command, text in configs.items():
            cfg_path = tmp_path / f"{command}.cfg"
            cfg_path.write_text(text)
            blobs = []
            for tag in ("a", "b"):
                out = tmp_path / command / tag
                status = main(
                    [command, "--config", str(cfg_path), "--out", str(out), "--seed", "7"]
                )
                assert status in (0, 1)
                files = sorted(out.glob("*.csv"))
                assert files, f"{command} wrote no CSV"
                blobs.append(b"".join(path.read_bytes() for path in files))
            assert blobs[0] == blobs[1], f"{command} output is not byte-identical"
