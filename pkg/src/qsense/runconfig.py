"""Config-file parsing for the command-line runs.

Configs are human-readable key-value documents (YAML; JSON parses as a
YAML subset). Unknown keys are rejected rather than ignored, because a
silent typo in a physics parameter is the dominant user error; missing
keys fall back to documented defaults, and the fully resolved config is
echoed into every output file.
"""

from __future__ import annotations

from dataclasses import fields

import yaml

from .protocol import AdaptiveConfig

# Config-file key for the coupling strength; the dataclass attribute is
# `lam` because the canonical name is a Python keyword.
_LAMBDA_KEY = "lambda"

ADAPTIVE_KEYS = (
    "omega_true", "omega0", "delta_omega0", _LAMBDA_KEY, "nbar",
    "c_i", "kappa_i", "c", "kappa",
    "max_steps", "target_precision", "max_total_time", "seed",
    "span_sigmas", "n_points", "regrid_trigger_spacings", "regrid_halfwidth_sigmas",
)
HARNESS_KEYS = ("n_reps", "out_prefix", "fit_tail_fraction")
HARNESS_DEFAULTS = {"n_reps": 500, "out_prefix": "adapt", "fit_tail_fraction": 0.6}

COMPARE_KEYS = ("omega", _LAMBDA_KEY, "nbar", "t2", "k_factor")
COMPARE_DEFAULTS = {"nbar": 0.0, "k_factor": 1.0}

_REQUIRED_ADAPTIVE = ("omega_true", "omega0", "delta_omega0", _LAMBDA_KEY, "nbar")
_REQUIRED_COMPARE = ("omega", _LAMBDA_KEY, "t2")

_INT_FIELDS = {"max_steps", "seed", "n_points", "n_reps"}
_OPTIONAL_FIELDS = {"target_precision", "max_total_time"}


class ConfigError(Exception):
    """Invalid config with per-field diagnostics."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _load_mapping(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError([f"config root must be a mapping, got {type(doc).__name__}"])
    return doc


def _coerce(key: str, value, problems: list[str]):
    if value is None and key in _OPTIONAL_FIELDS:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        problems.append(f"{key}: expected a number, got {value!r}")
        return None
    try:
        num = float(value)
    except (TypeError, ValueError):
        problems.append(f"{key}: expected a number, got {value!r}")
        return None
    if key in _INT_FIELDS:
        if num != int(num):
            problems.append(f"{key}: expected an integer, got {value!r}")
            return None
        return int(num)
    return num


def load_adaptive_config(path: str, overrides: dict | None = None):
    """Parse an adaptive-run config file into (AdaptiveConfig, harness dict).

    overrides (from command-line flags) replace file values; unknown
    keys anywhere raise ConfigError with one message per offending
    field.
    """
    doc = _load_mapping(path)
    if overrides:
        doc = {**doc, **{k: v for k, v in overrides.items() if v is not None}}

    problems = []
    known = set(ADAPTIVE_KEYS) | set(HARNESS_KEYS)
    for key in sorted(set(doc) - known):
        problems.append(f"{key}: unknown key")
    for key in _REQUIRED_ADAPTIVE:
        if key not in doc:
            problems.append(f"{key}: required key missing")
    if problems:
        raise ConfigError(problems)

    values = {}
    for key in ADAPTIVE_KEYS:
        if key in doc:
            values[key] = _coerce(key, doc[key], problems)
    harness = dict(HARNESS_DEFAULTS)
    for key in HARNESS_KEYS:
        if key in doc:
            if key == "out_prefix":
                if not isinstance(doc[key], str) or not doc[key]:
                    problems.append(f"{key}: expected a nonempty string")
                else:
                    harness[key] = doc[key]
            else:
                val = _coerce(key, doc[key], problems)
                if val is not None:
                    harness[key] = val
    if problems:
        raise ConfigError(problems)

    kwargs = {("lam" if k == _LAMBDA_KEY else k): v for k, v in values.items()}
    try:
        cfg = AdaptiveConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc).split("; ")) from exc
    if not 0.0 < harness["fit_tail_fraction"] <= 1.0:
        raise ConfigError(["fit_tail_fraction: must lie in (0, 1]"])
    if harness["n_reps"] < 1:
        raise ConfigError(["n_reps: must be >= 1"])
    return cfg, harness


def load_compare_config(path: str, overrides: dict | None = None) -> dict:
    """Parse a controlled-vs-free comparison config into keyword arguments."""
    doc = _load_mapping(path)
    if overrides:
        doc = {**doc, **{k: v for k, v in overrides.items() if v is not None}}

    problems = []
    for key in sorted(set(doc) - set(COMPARE_KEYS)):
        problems.append(f"{key}: unknown key")
    for key in _REQUIRED_COMPARE:
        if key not in doc:
            problems.append(f"{key}: required key missing")
    if problems:
        raise ConfigError(problems)

    out = dict(COMPARE_DEFAULTS)
    for key in COMPARE_KEYS:
        if key in doc:
            val = _coerce(key, doc[key], problems)
            if val is not None:
                out[key] = val
    if problems:
        raise ConfigError(problems)
    return {("lam" if k == _LAMBDA_KEY else k): v for k, v in out.items()}


def adaptive_echo(cfg: AdaptiveConfig) -> dict:
    """Resolved config as a flat mapping under canonical key names."""
    out = {}
    for f in fields(cfg):
        key = _LAMBDA_KEY if f.name == "lam" else f.name
        out[key] = getattr(cfg, f.name)
    return out
