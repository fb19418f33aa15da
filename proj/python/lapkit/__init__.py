"""Python front end to the lapkit core.

Configs and reports are plain dicts with the same schema as the CLI's
config files and report.json.
"""

from __future__ import annotations

import json
import os
from typing import Any, Mapping, Optional, Union

from . import _core

__all__ = [
    "load_config",
    "normalize_config",
    "run",
    "emit",
    "hs_demo",
    "classify_oscillating",
    "exit_code",
]

ConfigLike = Union[Mapping[str, Any], str, os.PathLike]


def _config_text(config: ConfigLike) -> str:
    # A path is loaded by the core so parse errors keep their line/column.
    if isinstance(config, (str, os.PathLike)):
        return _core.load_config(os.fspath(config))
    return json.dumps(config)


def load_config(path: Union[str, os.PathLike]) -> dict:
    """Parse and validate a config file; returns the fully defaulted echo."""
    return json.loads(_core.load_config(os.fspath(path)))


def normalize_config(config: Mapping[str, Any]) -> dict:
    """Validate a config dict and fill in defaults."""
    return json.loads(_core.normalize_config(json.dumps(config)))


def run(config: ConfigLike, command: str = "run", *, seed: Optional[int] = None,
        threads: Optional[int] = None) -> dict:
    """Run the pipeline stages selected by ``command`` and return the report."""
    return json.loads(_core.run(_config_text(config), command, seed, threads))


def emit(config: ConfigLike, out_dir: Union[str, os.PathLike], command: str = "run", *,
         seed: Optional[int] = None, threads: Optional[int] = None, gnuplot: bool = False) -> int:
    """Run and write report.json, sweep.csv, sup_per_lambda.csv into ``out_dir``.

    Returns the CLI exit code for the overall verdict.
    """
    return _core.emit(_config_text(config), os.fspath(out_dir), command, seed, threads, gnuplot)


def hs_demo(config: Optional[Mapping[str, Any]] = None) -> dict:
    """Helffer-Sjostrand demo record: phi, rho, k, closure_error, weighted_trend."""
    return json.loads(_core.hs_demo(json.dumps(dict(config or {}))))


def classify_oscillating(w: float, k: float, alpha: float, beta: float, n: int = 3) -> dict:
    """Branch verdicts for the oscillating family w sin(k r^alpha) / r^beta."""
    return json.loads(_core.classify_oscillating(w, k, alpha, beta, n))


def exit_code(verdict: str) -> int:
    return _core.exit_code(verdict)
