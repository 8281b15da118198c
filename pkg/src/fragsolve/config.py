"""Scenario files: TOML tables describing one run of the solvers.

A file holds either a single scenario at top level or several under
``[[scenario]]``.  Keys::

    name = "linear-growth-gaussian"
    solution = "standard"            # or "spurious"
    times = [0.0, 0.5]
    moments = [1.0, 2.0]
    validate = true

    [params]   family = "linear" | "constant", alpha, nu (linear only), k, a, mode
    [initial]  kind = "dirac" (x0) | "gaussian" (center, width, amplitude, support)
               | "exponential" (rate, amplitude, support)
    [x_eval]   x_min, x_max, n, spacing = "linear" | "log"
    [output]   path, format = "csv" | "json"
    [oracle]   x_min, x_max, n, dt
    [tolerance] l1, moment, order, residual, mass_anomaly
"""
from __future__ import annotations

import math
import sys
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from .errors import ConfigError, FragsolveError
from .model import DECAY, GROWTH, InitialCondition, PhysicalParams

FAMILIES = ("linear", "constant")
SOLUTIONS = ("standard", "spurious")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    x0: Optional[float] = None
    center: float = 1.0
    width: float = 1.0
    amplitude: float = 1.0
    rate: float = 1.0
    support: tuple = (0.0, 1.0)

    def build(self) -> InitialCondition:
        if self.kind == "dirac":
            return InitialCondition.monodisperse(self.x0)
        amp = self.amplitude
        if self.kind == "gaussian":
            c, w = self.center, self.width

            def func(x):
                return amp * np.exp(-(((np.asarray(x, dtype=float) - c) / w) ** 2))
        else:
            r = self.rate

            def func(x):
                return amp * np.exp(-r * np.asarray(x, dtype=float))
        return InitialCondition.analytic(func, self.support)


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n: int
    spacing: str = "linear"

    def points(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.x_min, self.x_max, self.n)
        return np.linspace(self.x_min, self.x_max, self.n)


@dataclass(frozen=True)
class OutputSpec:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class OracleSpec:
    x_min: float = 1e-4
    x_max: float = 12.0
    n: int = 512
    dt: float = 2e-3


@dataclass(frozen=True)
class Tolerances:
    l1: float = 1e-3
    moment: float = 1e-6
    order: float = 0.4
    residual: float = 1e-5
    mass_anomaly: float = 0.01


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    family: str
    params: PhysicalParams
    initial: InitialSpec
    times: tuple
    x_eval: GridSpec
    moments: tuple = ()
    validate: bool = False
    solution: str = "standard"
    output: OutputSpec = field(default_factory=OutputSpec)
    oracle: OracleSpec = field(default_factory=OracleSpec)
    tolerance: Tolerances = field(default_factory=Tolerances)

    @property
    def u0(self) -> InitialCondition:
        return self.initial.build()

    def with_output(self, path=None, fmt=None) -> "ScenarioConfig":
        out = OutputSpec(path if path is not None else self.output.path, fmt or self.output.format)
        return replace(self, output=out)

    def with_tolerance(self, tol: float) -> "ScenarioConfig":
        return replace(self, tolerance=replace(self.tolerance, l1=tol, moment=tol))


# --- parsing -----------------------------------------------------------------------------------


def _number(table, key, where, default=None, positive=False, integer=False):
    path = f"{where}.{key}" if where else key
    if key not in table:
        if default is None:
            raise ConfigError("missing required value", path)
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", path)
    if integer:
        if not isinstance(v, int):
            raise ConfigError(f"expected an integer, got {v!r}", path)
    elif not math.isfinite(v):
        raise ConfigError("must be finite", path)
    if positive and not v > 0:
        raise ConfigError(f"must be positive, got {v}", path)
    return v if integer else float(v)


def _table(doc, key, required=True):
    if key not in doc:
        if required:
            raise ConfigError("missing table", key)
        return {}
    v = doc[key]
    if not isinstance(v, dict):
        raise ConfigError("expected a table", key)
    return v


def _choice(table, key, where, options, default=None):
    path = f"{where}.{key}" if where else key
    v = table.get(key, default)
    if v is None:
        raise ConfigError("missing required value", path)
    if v not in options:
        raise ConfigError(f"must be one of {', '.join(options)}, got {v!r}", path)
    return v


def _float_list(doc, key, default=()):
    v = doc.get(key, list(default))
    if not isinstance(v, list):
        raise ConfigError("expected a list of numbers", key)
    out = []
    for i, item in enumerate(v):
        if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
            raise ConfigError(f"expected a finite number, got {item!r}", f"{key}[{i}]")
        out.append(float(item))
    return tuple(out)


def _params(doc):
    t = _table(doc, "params")
    family = _choice(t, "family", "params", FAMILIES)
    mode = _choice(t, "mode", "params", (GROWTH, DECAY))
    alpha = _number(t, "alpha", "params")
    k = _number(t, "k", "params", 1.0, positive=True)
    a = _number(t, "a", "params", 1.0, positive=True)
    if alpha == 0:
        raise ConfigError("must be nonzero", "params.alpha")
    try:
        if family == "linear":
            nu = _number(t, "nu", "params")
            if not -2 < nu <= 0:
                raise ConfigError(f"must lie in (-2, 0], got {nu}", "params.nu")
            return family, PhysicalParams.linear(alpha, nu, k=k, a=a, mode=mode)
        if "nu" in t:
            raise ConfigError("nu is fixed to alpha - 1 for the constant family", "params.nu")
        if not -1 < alpha:
            raise ConfigError(f"the constant family needs alpha > -1, got {alpha}", "params.alpha")
        return family, PhysicalParams.constant(alpha, k=k, a=a, mode=mode)
    except ConfigError:
        raise
    except FragsolveError as exc:
        raise ConfigError(str(exc), "params") from exc


def _initial(doc):
    t = _table(doc, "initial")
    kind = _choice(t, "kind", "initial", ("dirac", "gaussian", "exponential"))
    if kind == "dirac":
        return InitialSpec(kind, x0=_number(t, "x0", "initial", positive=True))
    sup = t.get("support")
    if (not isinstance(sup, list) or len(sup) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in sup)
            or not 0 <= sup[0] < sup[1] or not math.isfinite(sup[1])):
        raise ConfigError("expected [lo, hi] with 0 <= lo < hi < inf", "initial.support")
    support = (float(sup[0]), float(sup[1]))
    amp = _number(t, "amplitude", "initial", 1.0, positive=True)
    if kind == "gaussian":
        return InitialSpec(kind, center=_number(t, "center", "initial"),
                           width=_number(t, "width", "initial", positive=True),
                           amplitude=amp, support=support)
    return InitialSpec(kind, rate=_number(t, "rate", "initial", positive=True), amplitude=amp, support=support)


def _grid(doc):
    t = _table(doc, "x_eval")
    g = GridSpec(
        x_min=_number(t, "x_min", "x_eval", positive=True),
        x_max=_number(t, "x_max", "x_eval", positive=True),
        n=_number(t, "n", "x_eval", integer=True),
        spacing=_choice(t, "spacing", "x_eval", ("linear", "log"), "linear"),
    )
    if not g.x_max > g.x_min:
        raise ConfigError("must exceed x_eval.x_min", "x_eval.x_max")
    if g.n < 1:
        raise ConfigError("must be at least 1", "x_eval.n")
    return g


def _oracle(doc):
    t = _table(doc, "oracle", required=False)
    d = OracleSpec()
    spec = OracleSpec(
        x_min=_number(t, "x_min", "oracle", d.x_min, positive=True),
        x_max=_number(t, "x_max", "oracle", d.x_max, positive=True),
        n=_number(t, "n", "oracle", d.n, integer=True),
        dt=_number(t, "dt", "oracle", d.dt, positive=True),
    )
    if spec.n < 64:
        raise ConfigError("must be at least 64", "oracle.n")
    if not spec.x_max > spec.x_min:
        raise ConfigError("must exceed oracle.x_min", "oracle.x_max")
    return spec


def _tolerances(doc):
    t = _table(doc, "tolerance", required=False)
    d = Tolerances()
    return Tolerances(**{name: _number(t, name, "tolerance", getattr(d, name), positive=True)
                         for name in ("l1", "moment", "order", "residual", "mass_anomaly")})


def _output(doc):
    t = _table(doc, "output", required=False)
    path = t.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("expected a string", "output.path")
    return OutputSpec(path=path, format=_choice(t, "format", "output", FORMATS, "csv"))


def parse_scenario(doc: dict, default_name: str = "scenario") -> ScenarioConfig:
    """Validate one scenario table; raises ``ConfigError`` naming the bad key."""
    name = doc.get("name", default_name)
    if not isinstance(name, str) or not name:
        raise ConfigError("expected a nonempty string", "name")
    family, params = _params(doc)
    initial = _initial(doc)
    times = _float_list(doc, "times", (0.0,))
    if not times:
        raise ConfigError("need at least one time", "times")
    if any(t < 0 for t in times):
        raise ConfigError("times must be nonnegative", "times")
    if list(times) != sorted(times):
        raise ConfigError("times must be sorted ascending", "times")
    moments = _float_list(doc, "moments")
    if any(p < 0 for p in moments):
        raise ConfigError("moment orders must be nonnegative", "moments")
    validate = doc.get("validate", False)
    if not isinstance(validate, bool):
        raise ConfigError("expected true or false", "validate")
    solution = _choice(doc, "solution", "", SOLUTIONS, "standard")
    if solution == "spurious":
        if family != "linear" or params.alpha <= 0:
            raise ConfigError("the spurious family needs the linear family with alpha > 0", "solution")
        if initial.kind == "dirac":
            raise ConfigError("the spurious family needs a regular spectral density", "initial.kind")
    cfg = ScenarioConfig(
        name=name,
        family=family,
        params=params,
        initial=initial,
        times=times,
        x_eval=_grid(doc),
        moments=moments,
        validate=validate,
        solution=solution,
        output=_output(doc),
        oracle=_oracle(doc),
        tolerance=_tolerances(doc),
    )
    _warn_moment_orders(cfg)
    return cfg


def _warn_moment_orders(cfg: ScenarioConfig):
    p = cfg.params
    for q in cfg.moments:
        bad = False
        if cfg.solution == "spurious":
            bad = not -(1.0 + p.nu) < q < 1.0 + p.alpha
        elif cfg.family == "linear":
            bad = q + p.nu + 1.0 <= 0 if p.alpha > 0 else q <= 1.0 + p.alpha
        elif p.alpha < 0:
            bad = q <= 1.0 + p.alpha
        if bad:
            warnings.warn(f"{cfg.name}: moment of order {q} is infinite for these parameters",
                          RuntimeWarning, stacklevel=3)


def parse_document(doc: dict, default_name: str = "scenario") -> list:
    """All scenarios in a parsed TOML document."""
    if "scenario" in doc:
        items = doc["scenario"]
        if not isinstance(items, list) or not items:
            raise ConfigError("expected one or more [[scenario]] tables", "scenario")
        out = []
        for i, item in enumerate(items):
            try:
                out.append(parse_scenario(item, f"{default_name}-{i}"))
            except ConfigError as exc:
                raise ConfigError(str(exc).split(": ", 1)[-1], f"scenario[{i}].{exc.field}") from exc
        return out
    return [parse_scenario(doc, default_name)]


def load_config(path) -> list:
    """Read and validate a scenario file."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", "config") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}", "config") from exc
    return parse_document(doc, path.stem)


__all__ = [
    "InitialSpec",
    "GridSpec",
    "OutputSpec",
    "OracleSpec",
    "Tolerances",
    "ScenarioConfig",
    "parse_scenario",
    "parse_document",
    "load_config",
]
