"""Parameters, variable changes and initial data for the fragmentation model.

The physical problem is

    u_t + s (k x^gamma u)_x = -a x^alpha u + int_x^inf a y^alpha b(x, y) u(y) dy,
    b(x, y) = (nu + 2)/y (x/y)^nu,

with ``s = +1`` for growth and ``s = -1`` for decay.  The substitution
``z = a x^alpha``, ``v = z^(-nu/alpha) u`` turns the fragmentation part into a
pure antiderivative operator.  Two families then reduce further:

* ``gamma == 1`` (linear rates, exponent ``mu == 1``),
* ``alpha == 1 - gamma`` and ``gamma == -nu`` (constant rates, ``mu == theta == 0``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, UnsupportedConfigurationError, ValidityIntervalError

GROWTH = "growth"
DECAY = "decay"
LINEAR = "linear"
CONSTANT = "constant"
UNSUPPORTED = "unsupported"

# tolerance used to recognise the exact parameter families
_CLASS_TOL = 1e-12


def mode_sign(mode: str) -> int:
    """+1 for growth, -1 for decay."""
    if mode == GROWTH:
        return 1
    if mode == DECAY:
        return -1
    raise DomainError(f"mode must be '{GROWTH}' or '{DECAY}', got {mode!r}")


@dataclass(frozen=True)
class PhysicalParams:
    """Power-law coefficients ``r(x) = k x^gamma``, ``a(x) = a x^alpha``."""

    alpha: float
    nu: float
    gamma: float
    k: float
    a: float
    mode: str = GROWTH

    def __post_init__(self):
        for name in ("alpha", "nu", "gamma", "k", "a"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.alpha == 0:
            raise DomainError("alpha must be nonzero")
        if not -2 < self.nu <= 0:
            raise DomainError(f"nu must lie in (-2, 0], got {self.nu}")
        if self.gamma < 0:
            raise DomainError(f"gamma must be nonnegative, got {self.gamma}")
        if self.k <= 0:
            raise DomainError(f"k must be positive, got {self.k}")
        if self.a <= 0:
            raise DomainError(f"a must be positive, got {self.a}")
        mode_sign(self.mode)

    @property
    def s(self) -> int:
        return mode_sign(self.mode)

    @classmethod
    def linear(cls, alpha, nu, k=1.0, a=1.0, mode=GROWTH) -> "PhysicalParams":
        return cls(alpha=alpha, nu=nu, gamma=1.0, k=k, a=a, mode=mode)

    @classmethod
    def constant(cls, alpha, k=1.0, a=1.0, mode=DECAY) -> "PhysicalParams":
        """Constant-rate family: ``gamma = 1 - alpha`` and ``nu = alpha - 1``."""
        return cls(alpha=alpha, nu=alpha - 1.0, gamma=1.0 - alpha, k=k, a=a, mode=mode)


def classify(p: PhysicalParams) -> str:
    """Return ``'linear'``, ``'constant'`` or ``'unsupported'``."""
    if abs(p.gamma - 1.0) <= _CLASS_TOL:
        return LINEAR
    if abs(p.alpha - (1.0 - p.gamma)) <= _CLASS_TOL and abs(p.gamma + p.nu) <= _CLASS_TOL:
        if 0 <= p.gamma < 2 and -1 < p.alpha <= 1:
            return CONSTANT
    return UNSUPPORTED


@dataclass(frozen=True)
class DerivedParams:
    """Constants of the transformed equation.

    ``beta`` keeps the sign of ``alpha``; the drift of the transformed
    problem is ``s * beta`` (``drift`` below).
    """

    beta: float
    theta: float
    m: float
    mu: float
    sg: int
    s: int
    case: str
    params: PhysicalParams = field(repr=False)

    @property
    def drift(self) -> float:
        return self.s * self.beta

    @property
    def integer_m(self) -> Optional[int]:
        r = round(self.m)
        return int(r) if abs(self.m - r) <= 1e-9 and r >= 1 else None


def derive(p: PhysicalParams) -> DerivedParams:
    """Compute ``beta, theta, m, mu`` and classify the parameter set."""
    case = classify(p)
    if case == UNSUPPORTED:
        raise UnsupportedConfigurationError(
            "only gamma = 1 or (alpha = 1 - gamma, gamma = -nu) admit closed forms; "
            f"got alpha={p.alpha}, nu={p.nu}, gamma={p.gamma}"
        )
    scale = p.a ** ((1.0 - p.gamma) / p.alpha)
    beta = scale * p.k * p.alpha
    theta = scale * p.k * (p.gamma + p.nu)
    m = (p.nu + 2.0) / abs(p.alpha)
    mu = (p.gamma + p.alpha - 1.0) / p.alpha
    if case == LINEAR:
        mu = 1.0
    else:
        mu, theta = 0.0, 0.0
    return DerivedParams(
        beta=beta,
        theta=theta,
        m=m,
        mu=mu,
        sg=1 if p.alpha > 0 else -1,
        s=p.s,
        case=case,
        params=p,
    )


@dataclass(frozen=True)
class ConstantSubcase:
    """One row of the constant-rate case table."""

    label: str
    physical_boundary: bool
    transformed_boundary: bool


_SUBCASES = {
    (DECAY, -1): ConstantSubcase("i", physical_boundary=False, transformed_boundary=True),
    (GROWTH, -1): ConstantSubcase("ii", physical_boundary=False, transformed_boundary=False),
    (DECAY, 1): ConstantSubcase("iii", physical_boundary=False, transformed_boundary=False),
    (GROWTH, 1): ConstantSubcase("iv", physical_boundary=True, transformed_boundary=True),
}


def constant_subcase(mode: str, alpha_sign: int) -> ConstantSubcase:
    """Case (i)-(iv) for a constant-rate problem from the mode and sign of alpha."""
    mode_sign(mode)
    return _SUBCASES[(mode, 1 if alpha_sign > 0 else -1)]


# --- characteristic maps --------------------------------------------------------


@dataclass(frozen=True)
class LinearMaps:
    """Characteristics for ``gamma = 1``: ``z = xi exp(s beta t)``."""

    d: DerivedParams

    @property
    def tau_limit(self) -> float:
        """Supremum of the rescaled time (``inf`` when unbounded)."""
        return math.inf if self.d.drift > 0 else 1.0 / abs(self.d.beta)

    def tau(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValidityIntervalError("time must be nonnegative")
        sb = self.d.drift
        return self.d.s * np.expm1(sb * t) / self.d.beta

    def t_of_tau(self, tau):
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < 0) or np.any(tau >= self.tau_limit):
            raise ValidityIntervalError(f"rescaled time must lie in [0, {self.tau_limit})")
        return np.log1p(self.d.drift * tau) / self.d.drift

    def xi(self, x, t):
        p = self.d.params
        return p.a * np.asarray(x, dtype=float) ** p.alpha * np.exp(-self.d.drift * np.asarray(t, dtype=float))

    def x_of(self, xi, t):
        p = self.d.params
        xi = np.asarray(xi, dtype=float)
        if np.any(xi <= 0):
            raise ValidityIntervalError("characteristic label must be positive")
        z = xi * np.exp(self.d.drift * np.asarray(t, dtype=float))
        return (z / p.a) ** (1.0 / p.alpha)


@dataclass(frozen=True)
class ConstantMaps:
    """Characteristics for constant rates: ``z = xi + s beta t``."""

    d: DerivedParams

    tau_limit = math.inf

    def tau(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValidityIntervalError("time must be nonnegative")
        return t

    def t_of_tau(self, tau):
        return self.tau(tau)

    def z(self, xi, t):
        return np.asarray(xi, dtype=float) + self.d.drift * np.asarray(t, dtype=float)

    def xi(self, x, t):
        p = self.d.params
        return p.a * np.asarray(x, dtype=float) ** p.alpha - self.d.drift * np.asarray(t, dtype=float)

    def x_of(self, xi, t):
        p = self.d.params
        z = self.z(xi, t)
        if np.any(z <= 0):
            raise ValidityIntervalError("characteristic has left the positive half-line")
        return (z / p.a) ** (1.0 / p.alpha)


def characteristic_maps(d: DerivedParams):
    """Forward and inverse characteristic maps for a classified parameter set."""
    if d.case == LINEAR:
        return LinearMaps(d)
    if d.case == CONSTANT:
        return ConstantMaps(d)
    raise UnsupportedConfigurationError(f"no characteristic maps for case {d.case!r}")


# --- initial data -----------------------------------------------------------------


@dataclass(frozen=True)
class Dirac:
    """Point mass ``weight * delta(x - location)``."""

    location: float
    weight: float


class InitialCondition:
    """Initial datum: a Dirac mass, a sampled density, or an analytic density.

    Sampled data are interpolated linearly in ``ln x`` and extended by zero
    outside the grid.
    """

    def __init__(self, kind, *, x0=None, grid=None, values=None, func=None, support=None):
        self.kind = kind
        self.x0 = x0
        self.grid = grid
        self.values = values
        self._func = func
        self.support = support

    @classmethod
    def monodisperse(cls, x0: float) -> "InitialCondition":
        if not x0 > 0:
            raise DomainError(f"x0 must be positive, got {x0}")
        return cls("monodisperse", x0=float(x0), support=(float(x0), float(x0)))

    @classmethod
    def sampled(cls, grid, values) -> "InitialCondition":
        grid = np.array(grid, dtype=float)
        values = np.array(values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or grid.shape != values.shape:
            raise DomainError("sampled data need matching 1-D grid and values with at least 2 points")
        if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
            raise DomainError("sampling grid must be positive and strictly increasing")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DomainError("sampled values must be finite and nonnegative")
        grid.setflags(write=False)
        values.setflags(write=False)
        return cls("sampled", grid=grid, values=values, support=(grid[0], grid[-1]))

    @classmethod
    def analytic(cls, func: Callable, support) -> "InitialCondition":
        """Density given by a vectorised callable, zero outside ``support``."""
        lo, hi = float(support[0]), float(support[1])
        if not 0 <= lo < hi:
            raise DomainError("support must satisfy 0 <= lo < hi")
        return cls("analytic", func=func, support=(lo, hi))

    @property
    def is_dirac(self) -> bool:
        return self.kind == "monodisperse"

    def density(self, x):
        """Regular density at ``x`` (zero for a Dirac datum)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "monodisperse":
            return np.zeros_like(x)
        lo, hi = self.support
        inside = (x >= lo) & (x <= hi)
        out = np.zeros_like(x)
        if self.kind == "sampled":
            out[inside] = np.interp(np.log(x[inside]), np.log(self.grid), self.values)
        else:
            out[inside] = self._func(x[inside])
        return out

    def breakpoints(self):
        """Points where the density may have kinks (grid nodes or support ends)."""
        if self.kind == "sampled":
            return np.asarray(self.grid)
        return np.array(self.support, dtype=float)

    def __call__(self, x):
        return self.density(x)


@dataclass(frozen=True)
class TransformedDatum:
    """Initial datum in the variable ``z = a x^alpha``."""

    dirac: Optional[Dirac]
    density: Optional[Callable]
    support: tuple


def pushforward_initial(u0: InitialCondition, p: PhysicalParams) -> TransformedDatum:
    """Map ``u0`` to ``w0(xi) = xi^(-nu/alpha) u0((xi/a)^(1/alpha))``.

    A Dirac at ``x0`` becomes a Dirac at ``a x0^alpha`` with weight
    ``a^(1 - nu/alpha) |alpha| x0^(alpha - nu - 1)``.
    """
    if u0.is_dirac:
        x0 = u0.x0
        loc = p.a * x0**p.alpha
        weight = p.a ** (1.0 - p.nu / p.alpha) * abs(p.alpha) * x0 ** (p.alpha - p.nu - 1.0)
        return TransformedDatum(dirac=Dirac(loc, weight), density=None, support=(loc, loc))

    def w0(xi):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros_like(xi)
        pos = xi > 0
        x = (xi[pos] / p.a) ** (1.0 / p.alpha)
        out[pos] = xi[pos] ** (-p.nu / p.alpha) * u0.density(x)
        return out

    ends = sorted(p.a * np.asarray(u0.support, dtype=float) ** p.alpha)
    return TransformedDatum(dirac=None, density=w0, support=(ends[0], ends[1]))


# --- solution snapshots ----------------------------------------------------------------


@dataclass(frozen=True)
class DensitySnapshot:
    """Solution at a fixed time: optional Dirac part plus a regular density."""

    t: float
    dirac: Optional[Dirac]
    regular: Callable
    support: tuple

    def __post_init__(self):
        if self.dirac is not None and self.dirac.weight < 0:
            raise DomainError("Dirac weight must be nonnegative")

    def density(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        out = np.zeros(x.shape)
        inside = (x > lo) & (x <= hi)
        if np.any(inside):
            out[inside] = self.regular(x[inside])
        return out

    def __call__(self, x):
        return self.density(x)

    @property
    def is_empty(self) -> bool:
        return self.dirac is None and self.support[0] >= self.support[1]

    @classmethod
    def empty(cls, t: float) -> "DensitySnapshot":
        return cls(t=t, dirac=None, regular=lambda x: np.zeros_like(x), support=(0.0, 0.0))
