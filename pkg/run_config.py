"""
Run configuration for the command-line harness.

A configuration is a JSON document:

    {
      "schema_version": 1,
      "params": {"n": 3, "lambda": 0.0, "period": 6.283185307179586},
      "grid": {"n_t": 8, "n_x": 32, "box_edge": 16.0},
      "truncation": {"k_max": 48, "tail_tol": 1e-7},
      "eval": {...}, "solve": {...}, "decay": {...},
      "integrability": {...}, "verify": {...},
      "seed": 0, "threads": 1
    }

Every section is optional; missing keys take the dataclass defaults below.
Unknown keys, wrong types and invalid values raise ConfigError before any
computation starts.
"""

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from kernel_errors import ConfigError
from periodic_kernel import PERP_METHODS, TruncationSpec
from spectral_solver import GridSpec
from steady_kernels import KernelParams

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

EVAL_KERNELS = (
    "gamma_laplace", "gamma_stokes", "pressure_kernel", "psi_oseen", "gamma_oseen",
    "steady_velocity_kernel", "gamma_mode", "mode_kernel", "gamma_perp", "gamma_tp_velocity",
)
SCENARIOS = ("gaussian_bump", "bump", "solenoidal_bump", "manufactured", "zero", "file")


@dataclass
class ParamsSection:
    n: int = 3
    lam: float = 0.0
    period: float = 2.0 * np.pi


@dataclass
class GridSection:
    n_t: int = 8
    n_x: int = 32
    box_edge: float = 16.0


@dataclass
class TruncationSection:
    k_max: int = 48
    tail_tol: float = 1e-7


@dataclass
class EvalSection:
    kernel: str = "gamma_stokes"
    points: Optional[List] = None
    times: List = field(default_factory=lambda: [0.0])
    mode: int = 1
    backend: str = "auto"
    method: str = "modes"


@dataclass
class SolveSection:
    scenario: str = "gaussian_bump"
    forcing_file: Optional[str] = None
    width: float = 0.5
    radius: float = 1.0
    power: int = 8
    steady_weight: float = 0.0
    manufactured_modes: int = 4
    split: bool = True
    decay_fit: bool = False
    cross_check: bool = False
    cross_check_points: int = 10


@dataclass
class DecaySection:
    directions: Optional[List] = None
    radii: List = field(default_factory=lambda: [2.0, 2.83, 4.0, 5.66, 8.0])
    deriv_orders: List = field(default_factory=lambda: [0, 1])
    r: float = 2.0


@dataclass
class IntegrabilitySection:
    q_list: Optional[List] = None
    shells: List = field(default_factory=lambda: [0.4, 0.2, 0.1, 0.05, 0.025])
    deriv_order: int = 0


@dataclass
class VerifySection:
    only: List = field(default_factory=list)
    tolerances: Dict = field(default_factory=dict)


SECTIONS = {
    "params": ParamsSection,
    "grid": GridSection,
    "truncation": TruncationSection,
    "eval": EvalSection,
    "solve": SolveSection,
    "decay": DecaySection,
    "integrability": IntegrabilitySection,
    "verify": VerifySection,
}

# JSON spelling -> attribute name
RENAMED = {"lambda": "lam"}


@dataclass
class RunConfig:
    """Validated run configuration; build it with config_from_dict or load_config."""

    params: ParamsSection = field(default_factory=ParamsSection)
    grid: GridSection = field(default_factory=GridSection)
    truncation: TruncationSection = field(default_factory=TruncationSection)
    eval: EvalSection = field(default_factory=EvalSection)
    solve: SolveSection = field(default_factory=SolveSection)
    decay: DecaySection = field(default_factory=DecaySection)
    integrability: IntegrabilitySection = field(default_factory=IntegrabilitySection)
    verify: VerifySection = field(default_factory=VerifySection)
    seed: int = 0
    threads: int = 1

    def kernel_params(self) -> KernelParams:
        return KernelParams(n=self.params.n, lam=self.params.lam, period=self.params.period)

    def grid_spec(self) -> GridSpec:
        return GridSpec(n=self.params.n, n_t=self.grid.n_t, n_x=self.grid.n_x,
                        box_edge=self.grid.box_edge, period=self.params.period)

    def truncation_spec(self) -> TruncationSpec:
        return TruncationSpec(k_max=self.truncation.k_max, tail_tol=self.truncation.tail_tol)

    def to_dict(self) -> Dict:
        """JSON-ready echo of the configuration (as written in a config file)."""
        echo = {"schema_version": SCHEMA_VERSION, "seed": self.seed, "threads": self.threads}
        for name in SECTIONS:
            section = asdict(getattr(self, name))
            for json_key, attribute in RENAMED.items():
                if attribute in section:
                    section[json_key] = section.pop(attribute)
            echo[name] = section
        return echo


def _check_type(value: Any, default: Any, where: str):
    if default is None:
        if value is not None and not isinstance(value, (list, str)):
            raise ConfigError(f"{where}: expected a list or string, got {type(value).__name__}")
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, type(default)):
        raise ConfigError(f"{where}: expected {type(default).__name__}, got {type(value).__name__}")
    return value


def _build_section(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    defaults = cls()
    known = {f.name for f in fields(cls)}
    values = {}
    for key, value in data.items():
        attribute = RENAMED.get(key, key)
        if attribute not in known or key in RENAMED.values():
            raise ConfigError(f"{where}: unknown key {key!r}")
        values[attribute] = _check_type(value, getattr(defaults, attribute), f"{where}.{key}")
    return cls(**values)


def _validate(config: RunConfig):
    try:
        config.kernel_params()
        config.grid_spec()
        config.truncation_spec()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    n = config.params.n
    if config.eval.kernel not in EVAL_KERNELS:
        raise ConfigError(f"eval.kernel must be one of {EVAL_KERNELS}")
    if config.eval.method not in PERP_METHODS:
        raise ConfigError(f"eval.method must be one of {PERP_METHODS}")
    if config.eval.mode == 0:
        raise ConfigError("eval.mode must be nonzero")
    for name, points in (("eval.points", config.eval.points), ("decay.directions", config.decay.directions)):
        if points is None:
            continue
        array = np.asarray(points, dtype=float) if _is_numeric_nested(points) else None
        if array is None or array.ndim != 2 or array.shape[1] != n:
            raise ConfigError(f"{name} must be a list of {n}-component points")
    if config.solve.scenario not in SCENARIOS:
        raise ConfigError(f"solve.scenario must be one of {SCENARIOS}")
    if config.solve.scenario == "file" and not config.solve.forcing_file:
        raise ConfigError("solve.scenario 'file' needs solve.forcing_file")
    if config.solve.width <= 0 or config.solve.radius <= 0 or config.solve.power < 2:
        raise ConfigError("solve: width and radius must be positive, power >= 2")
    radii = config.decay.radii
    if len(radii) < 2 or any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise ConfigError("decay.radii must hold >= 2 strictly increasing positive values")
    if any(order not in (0, 1) for order in config.decay.deriv_orders):
        raise ConfigError("decay.deriv_orders entries must be 0 or 1")
    if config.decay.r < 1:
        raise ConfigError("decay.r must be >= 1")
    shells = config.integrability.shells
    if len(shells) < 2 or any(b >= a for a, b in zip(shells, shells[1:])) or shells[-1] <= 0:
        raise ConfigError("integrability.shells must hold >= 2 strictly decreasing positive values")
    if config.integrability.q_list is not None and any(q <= 1 for q in config.integrability.q_list):
        raise ConfigError("integrability.q_list entries must exceed 1")
    for name, tolerance in config.verify.tolerances.items():
        if isinstance(tolerance, bool) or not isinstance(tolerance, (int, float)) or tolerance < 0:
            raise ConfigError(f"verify.tolerances.{name} must be a nonnegative number")
    if config.threads < 1:
        raise ConfigError("threads must be >= 1")


def _is_numeric_nested(points) -> bool:
    try:
        np.asarray(points, dtype=float)
    except (TypeError, ValueError):
        return False
    return True


def config_from_dict(data: Dict) -> RunConfig:
    """Validate a parsed configuration document."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    sections = {}
    scalars = {}
    for key, value in data.items():
        if key == "schema_version":
            continue
        if key in SECTIONS:
            sections[key] = _build_section(SECTIONS[key], value, key)
        elif key in ("seed", "threads"):
            scalars[key] = _check_type(value, 0, key)
        else:
            raise ConfigError(f"unknown top-level key {key!r}")
    config = RunConfig(**sections, **scalars)
    _validate(config)
    return config


def load_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """Read and validate a configuration file; None gives the defaults."""
    if path is None:
        return config_from_dict({})
    try:
        with open(path) as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration {path} is not valid JSON: {exc}") from exc
    logger.debug("loaded configuration from %s", path)
    return config_from_dict(data)


def apply_overrides(config: RunConfig, seed: Optional[int] = None, threads: Optional[int] = None,
                    n: Optional[int] = None) -> RunConfig:
    """Command-line overrides, revalidated."""
    data = config.to_dict()
    if seed is not None:
        data["seed"] = seed
    if threads is not None:
        data["threads"] = threads
    if n is not None:
        data["params"]["n"] = n
    return config_from_dict(data)
