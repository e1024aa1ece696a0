"""
Settings for the leelbm command line tools.

Every subcommand has a TypedDict of settings with module-level defaults. A JSON
config file may hold one object per subcommand ("run", "stability",
"convergence", "moments-check", "end-times"); its values are merged over the
defaults and explicit command-line flags are merged over both.
"""

import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, TypedDict

THREADS_ENV = "LEE_LBM_THREADS"
LOG_LEVEL_ENV = "LEE_LBM_LOG_LEVEL"
SLOW_TESTS_ENV = "LEE_LBM_SLOW"

DEFAULT_TAU = 0.5
DEFAULT_KAPPA_CAP = 1e6
DEFAULT_PERTURBATION = 1e-3
DEFAULT_SEED = 20180517


class RunSettings(TypedDict):
    lattice: str
    ic: str
    n: int
    length: Optional[float]
    end_time: float
    tau: float
    snapshot_every: int
    output: str
    out: str
    threads: Optional[int]


class StabilitySettings(TypedDict):
    lattice: str
    resolution: int
    tau: float
    kappa_cap: float
    perturbation: float
    out: Optional[str]


class ConvergenceSettings(TypedDict):
    lattice: str
    ic: str
    resolutions: List[int]
    fine_n: Optional[int]
    length: Optional[float]
    end_time: float
    tau: float
    out: Optional[str]
    threads: Optional[int]


class MomentsCheckSettings(TypedDict):
    lattice: str
    trials: int
    seed: int
    out: Optional[str]


class EndTimesSettings(TypedDict):
    end_time: float
    length: float
    resolutions: List[int]


RUN_DEFAULTS: RunSettings = {
    "lattice": "d1q3",
    "ic": "gauss1d",
    "n": 100,
    "length": None,
    "end_time": 1.0,
    "tau": DEFAULT_TAU,
    "snapshot_every": 0,
    "output": "csv",
    "out": "snapshots",
    "threads": None,
}

STABILITY_DEFAULTS: StabilitySettings = {
    "lattice": "d1q3",
    "resolution": 32,
    "tau": DEFAULT_TAU,
    "kappa_cap": DEFAULT_KAPPA_CAP,
    "perturbation": DEFAULT_PERTURBATION,
    "out": None,
}

CONVERGENCE_DEFAULTS: ConvergenceSettings = {
    "lattice": "d1q3",
    "ic": "gauss1d",
    "resolutions": [50, 100, 200, 400],
    "fine_n": None,
    "length": None,
    "end_time": 1.0,
    "tau": DEFAULT_TAU,
    "out": None,
    "threads": None,
}

MOMENTS_CHECK_DEFAULTS: MomentsCheckSettings = {
    "lattice": "d2q5-diatomic",
    "trials": 1000,
    "seed": DEFAULT_SEED,
    "out": None,
}

# Dimensional diatomic case: unit background temperature scaled to 5/21.
END_TIMES_DEFAULTS: EndTimesSettings = {
    "end_time": math.sqrt(21 / 5),
    "length": 2.0,
    "resolutions": [25, 40, 80, 120],
}


def load_config(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    parsed = json.loads(Path(path).read_text() or "{}")
    assert isinstance(parsed, dict), "config file must hold a JSON object"
    return parsed


def merged(
    defaults: Mapping[str, Any],
    config: Mapping[str, Any],
    section: str,
    overrides: Mapping[str, Any],
) -> Dict[str, Any]:
    section_values = config.get(section, {})
    assert isinstance(section_values, dict), section
    unknown = set(section_values) - set(defaults)
    if unknown:
        raise KeyError(f"unknown {section} settings: {sorted(unknown)}")
    explicit = {k: v for k, v in overrides.items() if v is not None}
    return {**defaults, **section_values, **explicit}


def default_threads() -> Optional[int]:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return None
    return int(raw)


def default_log_level() -> int:
    name = os.environ.get(LOG_LEVEL_ENV, "WARNING").upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.WARNING
