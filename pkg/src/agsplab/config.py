"""Flat key-value experiment configuration.

One ``key = value`` pair per line; ``#`` starts a comment; blank lines are
ignored.  Unknown keys are errors (no silent defaults drift), and every
command runs from an explicit seed (no implicit entropy source).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


_PARSERS = {
    "int": int,
    "float": float,
    "str": str.strip,
    "bool": _parse_bool,
    "floats": _parse_float_list,
    "ints": _parse_int_list,
}

# Keys every command accepts.
_COMMON_KEYS = {
    "command": ("str", None),
    "seed": ("int", 0),
    "out": ("str", "results"),
    "workers": ("int", 1),
}

SCHEMAS: dict[str, dict[str, tuple[str, object]]] = {
    "verify-lemmas": {
        "trials_error_reduction": ("int", 1000),
        "trials_lifting": ("int", 1000),
        "trials_symmetry": ("int", 1000),
        "trials_boundary": ("int", 500),
        "trials_tail": ("int", 500),
        "trials_dyadic": ("int", 1000),
        "trials_formula": ("int", 1000),
        "ambient_max": ("int", 32),
        "dimz_max": ("int", 6),
        "shrink_grid": ("floats", (0.0, 1e-4, 0.1, 0.5, 0.99)),
        "dilation_grid": ("floats", (1.0, 2.0, 10.0)),
        "tol_scale": ("float", 1.0),
        "selftest_negate": ("bool", False),
    },
    "sharpness-demo": {
        "shrink": ("float", 0.25),
        "error_ratio": ("float", 1.0),
    },
    "chain-experiment": {
        "model": ("str", "ising"),
        "chain_length": ("int", 8),
        "target_left_dim": ("int", 8),      # random-target model only
        "target_right_dim": ("int", 8),
        "target_degeneracy": ("int", 2),
        "degree_min": ("int", 1),
        "degree_max": ("int", 12),
        "cuts": ("ints", ()),  # empty means the middle cut
        "sample_budget": ("int", 200),
        "max_iters": ("int", 50),
        "entropy_restarts": ("int", 8),
    },
    "bound-table": {
        "degeneracy_grid": ("ints", (1, 2, 4, 8, 16)),
        "rank_grid": ("floats", (1.0, 2.0, 4.0, 8.0)),
        "shrink_grid": ("floats", (0.0, 0.015625, 0.03125, 0.0625)),
        "m_grid": ("ints", (5, 9, 17)),
        "delta_family": ("str", "zero"),  # zero | geometric
        "delta_ratio": ("float", 0.25),
    },
    "frustrated-run": {
        "left_dim": ("int", 8),
        "right_dim": ("int", 8),
        "degeneracy": ("int", 2),
        "levels": ("int", 5),
        "base_shrink": ("float", 1.0 / 2048.0),
        "closeness_ratio": ("float", 0.25),
        "dilation_max": ("float", 1.0),
        "sample_budget": ("int", 200),
        "max_iters": ("int", 50),
        "entropy_restarts": ("int", 16),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved configuration for one command invocation."""

    command: str
    seed: int
    out: Path
    workers: int
    values: dict

    def __getitem__(self, key):
        return self.values[key]


def parse_kv_text(text: str, source: str = "<config>") -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in pairs:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        pairs[key] = value.strip()
    return pairs


def load_config(
    command: str,
    config_path: str | None = None,
    seed_override: int | None = None,
    out_override: str | None = None,
    workers_override: int | None = None,
) -> ExperimentConfig:
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    schema = dict(_COMMON_KEYS)
    schema.update(SCHEMAS[command])
    raw: dict[str, str] = {}
    source = config_path or "<defaults>"
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {config_path}")
        raw = parse_kv_text(path.read_text(), source=str(config_path))
    values: dict = {}
    for key, text in raw.items():
        if key not in schema:
            raise ConfigError(f"{source}: unknown key {key!r} for command {command!r}")
        kind, _ = schema[key]
        try:
            values[key] = _PARSERS[kind](text)
        except ValueError as exc:
            raise ConfigError(f"{source}: key {key!r}: {exc}") from None
    for key, (kind, default) in schema.items():
        values.setdefault(key, default)
    if values["command"] is not None and values["command"] != command:
        raise ConfigError(
            f"{source}: config is for command {values['command']!r}, invoked as {command!r}"
        )
    seed = seed_override if seed_override is not None else values["seed"]
    out = Path(out_override if out_override is not None else values["out"])
    workers = workers_override if workers_override is not None else values["workers"]
    if workers < 1:
        raise ConfigError("workers must be at least 1")
    for name in ("command", "seed", "out", "workers"):
        values.pop(name)
    return ExperimentConfig(command=command, seed=seed, out=out, workers=workers, values=values)
