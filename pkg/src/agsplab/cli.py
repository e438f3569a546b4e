"""Batch-experiment command line.

Subcommands: verify-lemmas, sharpness-demo, chain-experiment, bound-table,
frustrated-run.  Every command reads a flat key-value config (all keys
optional; unknown keys are errors), runs from an explicit root seed, and
writes one CSV whose pass/fail flags are recomputable from the stored
lhs / rhs / tolerance columns (see scripts/check_results.py).

Exit-code policy: verification commands (verify-lemmas, sharpness-demo)
fail on any violated inequality; experiment commands report and succeed.

CSV output is byte-identical for identical config and seed; wall time is
reported on stderr only, never in the CSV.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import suites
from .agsp import chebyshev_agsp, chebyshev_shrink_estimate, operator_schmidt, pap_from_agsp, synth_agsp
from .bootstrap import (
    BootstrapParams,
    BoundParams,
    bootstrap_run,
    closeness_weight,
    derived_dim_constant,
    explicit_bound,
    frustrated_run,
    geometric_tail,
    max_entropy_estimate,
)
from .config import ExperimentConfig, load_config
from .errors import AgsplabError, ConfigError
from .hamiltonians import ground_space, ising_chain, random_degenerate_target
from .subspace import rotate_subspace
from .suites import Row, kv

CSV_SCHEMA = "# schema=1"
CSV_COLUMNS = ("experiment", "trial", "check", "params", "quantities", "lhs", "rhs", "tol", "passed")
FEASIBILITY = 1.0 / 32.0


def write_rows(path: Path, rows: list[Row]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(CSV_SCHEMA + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.experiment,
                    row.trial,
                    row.check,
                    row.params,
                    row.quantities,
                    repr(row.lhs),
                    repr(row.rhs),
                    repr(row.tol),
                    "true" if row.passed else "false",
                ]
            )


def write_trace_csv(path: Path, trace) -> None:
    """Per-iteration bootstrap records: iter, action, dim, mu, delta, epsilon."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(CSV_SCHEMA + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("iter", "action", "dim", "mu", "delta", "epsilon"))
        for rec in trace.records:
            writer.writerow(
                [rec.iteration, rec.action, rec.dim_v, repr(rec.mu), repr(rec.delta), repr(rec.epsilon)]
            )


def _pool_task(args) -> list[Row]:
    runner_name, trial, seed, cfg = args
    return suites.TRIAL_RUNNERS[runner_name](trial, seed, cfg)


def run_trials(runner_name: str, trials: int, seed: int, cfg: dict, workers: int) -> list[Row]:
    """Run a suite over trial indices; rows come back in trial order
    regardless of worker completion order."""
    tasks = [(runner_name, trial, seed, cfg) for trial in range(trials)]
    if workers <= 1:
        batches = [_pool_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_pool_task, tasks, chunksize=16))
    return [row for batch in batches for row in batch]


def _negate(rows: list[Row]) -> list[Row]:
    # Harness self-test: flip every verdict so the run must fail.
    return [replace(row, passed=not row.passed) for row in rows]


def _summarize(command: str, rows: list[Row], out_path: Path) -> int:
    failed = [row for row in rows if not row.passed]
    print(f"{command}: {len(rows) - len(failed)}/{len(rows)} checks passed -> {out_path}")
    for row in failed[:10]:
        print(f"  FAIL {row.check} trial={row.trial} lhs={row.lhs!r} rhs={row.rhs!r} tol={row.tol!r}")
    if len(failed) > 10:
        print(f"  ... and {len(failed) - 10} more failures")
    return 1 if failed else 0


def cmd_verify_lemmas(cfg: ExperimentConfig) -> int:
    values = dict(cfg.values)
    plan = [
        ("error_reduction", values["trials_error_reduction"]),
        ("lifting", values["trials_lifting"]),
        ("symmetry", values["trials_symmetry"]),
        ("boundary", values["trials_boundary"]),
        ("tail", values["trials_tail"]),
        ("dyadic", values["trials_dyadic"]),
        ("formula", values["trials_formula"]),
    ]
    rows: list[Row] = []
    rows += suites.sharpness_rows()
    rows += suites.footnote_lifting_rows()
    rows += suites.dyadic_equality_rows()
    for runner_name, trials in plan:
        rows += run_trials(runner_name, trials, cfg.seed, values, cfg.workers)
    if values["selftest_negate"]:
        rows = _negate(rows)
    out_path = cfg.out / "verify_lemmas.csv"
    write_rows(out_path, rows)
    return _summarize("verify-lemmas", rows, out_path)


def cmd_sharpness_demo(cfg: ExperimentConfig) -> int:
    rows = suites.sharpness_rows(cfg["shrink"], cfg["error_ratio"])
    out_path = cfg.out / "sharpness_demo.csv"
    write_rows(out_path, rows)
    return _summarize("sharpness-demo", rows, out_path)


def _chain_row(trial, params, quantities, lhs, rhs, tol, check) -> Row:
    return Row(
        experiment="chain-experiment",
        trial=trial,
        check=check,
        params=params,
        quantities=quantities,
        lhs=float(lhs),
        rhs=float(rhs),
        tol=float(tol),
        passed=bool(float(lhs) <= float(rhs) + float(tol)),
    )


def cmd_chain_experiment(cfg: ExperimentConfig) -> int:
    model = cfg["model"]
    if model == "ising":
        toy = ising_chain(cfg["chain_length"])
    elif model == "random-target":
        toy = random_degenerate_target(
            cfg["target_left_dim"], cfg["target_right_dim"], cfg["target_degeneracy"],
            rng_seed=cfg.seed,
        )
    else:
        raise ConfigError(f"unknown model {model!r}; registry: ising, random-target")
    target, gap = ground_space(toy.matrix)
    lam_max = float(np.linalg.eigvalsh(np.asarray(toy.matrix))[-1])
    n_sites = toy.metadata.get("n")
    cuts = list(cfg["cuts"])
    if not cuts:
        if model == "ising":
            cuts = [n_sites // 2]
        else:
            cuts = [0]
    if model == "ising":
        for cut in cuts:
            if not 1 <= cut <= n_sites - 1:
                raise ConfigError(f"cut {cut} outside [1, {n_sites - 1}] for n = {n_sites}")
    rows: list[Row] = []
    trial = 0
    for degree in range(cfg["degree_min"], cfg["degree_max"] + 1):
        agsp = chebyshev_agsp(toy.matrix, target, degree)
        for cut in cuts:
            if model == "ising":
                dl, dr = 2 ** cut, 2 ** (n_sites - cut)
            else:
                dl, dr = toy.metadata["dims"]
            bip = operator_schmidt(agsp, (dl, dr))
            product = agsp.shrink_certified * bip.rank_exact
            params = kv(model=model, n=n_sites, degree=degree, cut=cut, dl=dl, dr=dr)
            estimate = chebyshev_shrink_estimate(gap, max(gap, lam_max), degree)
            base_quant = dict(
                degeneracy=target.dim,
                gap=gap,
                shrink=agsp.shrink_certified,
                rank=bip.rank_exact,
                product=product,
                shrink_estimate=estimate,
            )
            if product > FEASIBILITY:
                rows.append(
                    _chain_row(trial, params, kv(**base_quant), product, FEASIBILITY, 0.0,
                               "precondition_unmet")
                )
                trial += 1
                continue
            pap = pap_from_agsp(bip)
            trace = bootstrap_run(
                pap,
                target,
                BootstrapParams(
                    sample_budget=cfg["sample_budget"],
                    max_iters=cfg["max_iters"],
                    rng_seed=cfg.seed + trial,
                ),
            )
            write_trace_csv(cfg.out / f"chain_trace_{trial}.csv", trace)
            _, s_max = max_entropy_estimate(
                target, (dl, dr), restarts=cfg["entropy_restarts"], rng_seed=cfg.seed + trial
            )
            bound_params = BoundParams(
                degeneracy=target.dim,
                rank=max(1.0, float(bip.rank_exact)),
                shrink=agsp.shrink_certified,
            )
            bound = explicit_bound(bound_params)
            quantities = kv(
                **base_quant,
                final_dim=trace.final.dim,
                converged=int(trace.converged),
                s_max=s_max,
                bound=bound,
            )
            rows.append(_chain_row(trial, params, quantities, s_max, bound, 1e-9, "entropy_vs_bound"))
            trial += 1
    out_path = cfg.out / "chain_experiment.csv"
    write_rows(out_path, rows)
    _summarize("chain-experiment", rows, out_path)
    return 0  # experiment commands report, they do not fail


def cmd_bound_table(cfg: ExperimentConfig) -> int:
    family = cfg["delta_family"]
    if family not in ("zero", "geometric"):
        raise ConfigError(f"unknown delta_family {family!r}; use zero or geometric")
    ratio = cfg["delta_ratio"]
    rows: list[Row] = []
    trial = 0
    for degeneracy in cfg["degeneracy_grid"]:
        for rank in cfg["rank_grid"]:
            for shrink in cfg["shrink_grid"]:
                for m in cfg["m_grid"]:
                    params = kv(degeneracy=degeneracy, rank=rank, shrink=shrink, m=m,
                                family=family, ratio=ratio if family == "geometric" else 0.0)
                    try:
                        if family == "zero":
                            closeness = ()
                        else:
                            closeness = _geometric_family(ratio)
                        bound_params = BoundParams(
                            degeneracy=degeneracy, rank=rank, shrink=shrink,
                            tail_start=m, closeness_seq=closeness,
                        )
                        value = explicit_bound(bound_params)
                        c_delta = closeness_weight(bound_params)
                        quantities = kv(
                            bound=value,
                            c_delta=c_delta,
                            eps_m=geometric_tail(shrink, m),
                            dim_constant=derived_dim_constant(degeneracy, rank),
                        )
                        rows.append(
                            Row("bound-table", trial, "bound_row", params, quantities,
                                float(rank * shrink), 0.5, 0.0, rank * shrink <= 0.5)
                        )
                    except AgsplabError as exc:
                        rows.append(
                            Row("bound-table", trial, "bound_row_rejected", params,
                                kv(reason=type(exc).__name__), 1.0, 0.0, 0.0, False)
                        )
                    trial += 1
    out_path = cfg.out / "bound_table.csv"
    write_rows(out_path, rows)
    _summarize("bound-table", rows, out_path)
    return 0


def _geometric_family(ratio: float):
    if not 0.0 <= ratio < 1.0:
        # Divergent family: surface it as a parameter error per row.
        from .errors import ParameterError

        raise ParameterError(f"geometric closeness ratio {ratio} does not converge")
    return lambda level: ratio ** level


def cmd_frustrated_run(cfg: ExperimentConfig) -> int:
    dl, dr = cfg["left_dim"], cfg["right_dim"]
    toy = random_degenerate_target(dl, dr, cfg["degeneracy"], rng_seed=cfg.seed)
    target = toy.ground_space
    base_shrink = cfg["base_shrink"]
    ratio = cfg["closeness_ratio"]
    agsps = []
    closeness = []
    for level in range(1, cfg["levels"] + 1):
        delta_n = ratio ** level
        approx = rotate_subspace(target, delta_n, rng_seed=cfg.seed + 1000 + level)
        agsp = synth_agsp(approx, base_shrink ** level, dilation_max=cfg["dilation_max"],
                          rng_seed=cfg.seed + 2000 + level)
        agsps.append(operator_schmidt(agsp, (dl, dr)))
        closeness.append(delta_n)
    params = BootstrapParams(
        sample_budget=cfg["sample_budget"], max_iters=cfg["max_iters"], rng_seed=cfg.seed
    )
    bound_params = BoundParams(
        degeneracy=target.dim,
        rank=max(1.0, float(agsps[0].rank_exact)),
        shrink=base_shrink,
        closeness_seq=_geometric_family(ratio),
    )
    report = frustrated_run(
        target, agsps, closeness, params=params, bound_params=bound_params,
        entropy_restarts=cfg["entropy_restarts"],
    )
    rows: list[Row] = []
    for lv in report.levels:
        write_trace_csv(cfg.out / f"frustrated_trace_{lv.level}.csv", lv.trace)
        params_s = kv(level=lv.level, closeness=lv.closeness, shrink=lv.shrink_level,
                      rank=lv.rank_level, dl=dl, dr=dr)
        quantities = kv(viability=lv.viability_measured, target=lv.viability_target,
                        final_dim=lv.trace.final.dim, converged=int(lv.trace.converged))
        rows.append(
            Row("frustrated-run", lv.level, "level_viability", params_s, quantities,
                lv.viability_measured, lv.viability_target, 1e-9,
                lv.viability_measured <= lv.viability_target + 1e-9)
        )
    quantities = kv(s_max=report.s_max, bound=report.bound_value,
                    c_delta=closeness_weight(report.bound_params))
    rows.append(
        Row("frustrated-run", len(report.levels) + 1, "entropy_vs_bound",
            kv(degeneracy=target.dim, dl=dl, dr=dr), quantities,
            report.s_max, report.bound_value, 1e-9, report.entropy_within_bound)
    )
    out_path = cfg.out / "frustrated_run.csv"
    write_rows(out_path, rows)
    _summarize("frustrated-run", rows, out_path)
    return 0


COMMANDS = {
    "verify-lemmas": cmd_verify_lemmas,
    "sharpness-demo": cmd_sharpness_demo,
    "chain-experiment": cmd_chain_experiment,
    "bound-table": cmd_bound_table,
    "frustrated-run": cmd_frustrated_run,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agsplab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", default=None, help="flat key=value config file")
        cmd.add_argument("--seed", type=int, default=None, help="root seed (overrides config)")
        cmd.add_argument("--out", default=None, help="output directory")
        cmd.add_argument("--workers", type=int, default=None, help="worker pool size")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(
            args.command,
            config_path=args.config,
            seed_override=args.seed,
            out_override=args.out,
            workers_override=args.workers,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        status = COMMANDS[args.command](cfg)
    except AgsplabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wall time: {time.perf_counter() - start:.2f} s", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
