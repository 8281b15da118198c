"""Confluent hypergeometric, incomplete gamma and Hermite helpers.

Every closed-form solution in the package is built from the handful of
functions defined here:

``kummer_1f1``
    Kummer's function of the first kind, vectorised in the argument.
``tricomi_psi``
    Kummer's function of the second kind (Tricomi's ``U``).
``upper_incomplete_gamma``
    ``Gamma(s; x)`` and its regularised companion ``gamma_q``.
``hermite_basis``
    Probabilists' Hermite polynomial with its roots and derivative values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, QuadratureError
from .quadrature import gauss_jacobi_left, gauss_legendre

_EPS = 1e-16
_MAX_TERMS = 20000
# arrays up to this size are summed element by element in plain floats
_SCALAR_LOOP = 8
# exp() overflows just past this argument
_EXP_LIMIT = 709.0
# beyond this the large-argument expansion is used for 1F1
_ASYMPTOTIC_FROM = 600.0


def _nonpositive_integer(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def _as_array(z):
    arr = np.asarray(z, dtype=float)
    return arr, arr.ndim == 0


def _polynomial_1f1(n: int, b: float, z: np.ndarray) -> np.ndarray:
    # a = -n: exactly n + 1 terms
    term = np.ones_like(z)
    total = np.ones_like(z)
    for j in range(n):
        term = term * (j - n) * z / ((b + j) * (j + 1))
        total = total + term
    return total


def _series_1f1_scalar(a: float, b: float, z: float) -> float:
    term = total = 1.0
    small_run = 0
    if z == 0.0:
        return total
    for n in range(_MAX_TERMS):
        ratio = (a + n) * z / ((b + n) * (n + 1))
        term *= ratio
        total += term
        small_run = small_run + 1 if abs(term) <= _EPS * abs(total) else 0
        if small_run >= 3 and abs(ratio) < 1.0:
            return total
    raise QuadratureError(f"1F1({a}; {b}; z) series did not converge")


def _series_1f1(a: float, b: float, z: np.ndarray) -> np.ndarray:
    """Maclaurin series for moderate z >= 0."""
    if z.size <= _SCALAR_LOOP:
        # per-term array overhead dominates for a handful of points
        return np.array([_series_1f1_scalar(a, b, float(v)) for v in z.reshape(-1)]).reshape(z.shape)
    term = np.ones_like(z)
    total = np.ones_like(z)
    small_run = np.zeros(z.shape, dtype=int)
    done = z == 0.0
    for n in range(_MAX_TERMS):
        ratio = (a + n) * z / ((b + n) * (n + 1))
        term = term * ratio
        total = total + term
        tiny = np.abs(term) <= _EPS * np.abs(total)
        small_run = np.where(tiny, small_run + 1, 0)
        # stop only once the terms are also shrinking
        done = done | ((small_run >= 3) & (np.abs(ratio) < 1.0))
        if np.all(done):
            break
    else:
        raise QuadratureError(f"1F1({a}; {b}; z) series did not converge")
    return total


def _log_asymptotic_1f1(a: float, b: float, z: np.ndarray, drop_exp: bool = False):
    """Sign and log-magnitude of 1F1 for large positive z.

    Uses the leading exponential branch of the large-argument expansion;
    the algebraic branch is smaller by a factor exp(-z).  ``drop_exp``
    leaves out the ``exp(z)`` factor so callers that multiply by
    ``exp(-z)`` avoid cancelling two huge exponents.
    """
    term = np.ones_like(z)
    total = np.ones_like(z)
    for n in range(60):
        nxt = term * (1.0 - a + n) * (b - a + n) / ((n + 1) * z)
        if np.all(np.abs(nxt) >= np.abs(term)) and n > 0:
            break
        term = nxt
        total = total + term
        if np.all(np.abs(term) < _EPS * np.abs(total)):
            break
    sign = _gamma_sign(b) * _gamma_sign(a) * np.sign(total)
    log_mag = math.lgamma(b) - math.lgamma(a) + (a - b) * np.log(z) + np.log(np.abs(total))
    if not drop_exp:
        log_mag = log_mag + z
    return sign, log_mag


def _scaled_nonnegative(a: float, b: float, z: np.ndarray, log_scale: np.ndarray,
                        times_exp_minus_z: bool = False) -> np.ndarray:
    """exp(log_scale) * 1F1(a; b; z) for z >= 0 and a not a nonpositive integer.

    With ``times_exp_minus_z`` the result carries an extra ``exp(-z)``.
    """
    sign = np.empty_like(z)
    log_mag = np.empty_like(z)
    near = z <= _ASYMPTOTIC_FROM
    if np.any(near):
        series = _series_1f1(a, b, z[near])
        sign[near] = np.sign(series)
        with np.errstate(divide="ignore"):
            log_mag[near] = np.log(np.abs(series))
        if times_exp_minus_z:
            log_mag[near] -= z[near]
    if np.any(~near):
        sign[~near], log_mag[~near] = _log_asymptotic_1f1(a, b, z[~near], drop_exp=times_exp_minus_z)
    exponent = log_mag + log_scale
    if np.any(exponent > _EXP_LIMIT):
        raise OverflowError(f"1F1({a}; {b}; z) exceeds double precision range")
    return sign * np.exp(exponent)


def kummer_1f1(a: float, b: float, z, log_scale=0.0):
    """Kummer's confluent hypergeometric function ``1F1(a; b; z)``.

    ``z`` may be a scalar or an array; ``a`` and ``b`` are real scalars.
    Negative arguments go through the Kummer transformation
    ``1F1(a; b; z) = exp(z) 1F1(b - a; b; -z)`` so the summed series never
    alternates in ``z``.  When ``a`` is a nonpositive integer the series is
    a polynomial and is summed exactly.

    ``log_scale`` (broadcast against ``z``) returns
    ``exp(log_scale) * 1F1(a; b; z)`` without forming the unscaled value,
    which lets callers cancel an exponential prefactor for large ``|z|``.

    Raises
    ------
    DomainError
        If ``b`` is a nonpositive integer.
    OverflowError
        If the (scaled) result is not representable in double precision.
    """
    if _nonpositive_integer(b):
        raise DomainError(f"1F1 undefined for nonpositive integer b={b}")
    z_arr, scalar = _as_array(z)
    scale = np.broadcast_to(np.asarray(log_scale, dtype=float), z_arr.shape)
    z_flat = z_arr.reshape(-1)
    scale = scale.reshape(-1)
    out = np.empty_like(z_flat)
    if _nonpositive_integer(a):
        poly = _polynomial_1f1(int(-a), b, z_flat)
        if np.any(scale > _EXP_LIMIT):
            raise OverflowError("exp(log_scale) is not representable")
        out = poly * np.exp(scale)
    else:
        pos = z_flat >= 0
        if np.any(pos):
            out[pos] = _scaled_nonnegative(a, b, z_flat[pos], scale[pos])
        if np.any(~pos):
            zn = -z_flat[~pos]
            if _nonpositive_integer(b - a):
                out[~pos] = _polynomial_1f1(int(a - b), b, zn) * np.exp(scale[~pos] - zn)
            else:
                out[~pos] = _scaled_nonnegative(b - a, b, zn, scale[~pos], times_exp_minus_z=True)
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"1F1({a}; {b}; z) exceeds double precision range")
    out = out.reshape(z_arr.shape)
    return float(out) if scalar else out


# --- Tricomi function --------------------------------------------------------

_PSI_JACOBI_NODES = 40
_PSI_PANEL_NODES = 32


def _psi_integral(a: float, b: float, z: float) -> float:
    """int_0^inf exp(-u) u^(a-1) (1 + u/z)^(b-a-1) du for a > 0."""
    c = b - a - 1.0
    # first panel carries the u^(a-1) endpoint behaviour exactly
    h0 = min(0.5 * z, 1.0)
    s, w = gauss_jacobi_left(_PSI_JACOBI_NODES, a - 1.0)
    u = h0 * s
    total = h0**a * np.sum(w * np.exp(-u) * (1.0 + u / z) ** c)

    u_max = a + abs(c) + 60.0 + 10.0 * math.sqrt(a + abs(c))
    breaks = [h0]
    while breaks[-1] < u_max:
        step = min(breaks[-1], 2.0)
        breaks.append(breaks[-1] + step)
    breaks = np.asarray(breaks)
    x, wl = gauss_legendre(_PSI_PANEL_NODES)
    lo = breaks[:-1, None]
    half = 0.5 * np.diff(breaks)[:, None]
    u = lo + half * (x + 1.0)
    # log-space keeps large u^(a-1) from overflowing
    logf = -u + (a - 1.0) * np.log(u) + c * np.log1p(u / z)
    total += float(np.sum(half * wl * np.exp(logf)))
    if not math.isfinite(total):
        raise QuadratureError(f"Psi({a}; {b}; {z}) quadrature overflowed")
    return total


def tricomi_psi(a: float, b: float, z: float) -> float:
    """Kummer's function of the second kind ``Psi(a; b; z)`` for ``z > 0``.

    For ``a > 0`` it is evaluated from the Laplace-type integral
    ``Psi = z^(-a)/Gamma(a) int_0^inf e^(-u) u^(a-1) (1 + u/z)^(b-a-1) du``
    by a Gauss-Jacobi panel at the origin followed by composite
    Gauss-Legendre panels.  ``a = 0`` gives 1, negative integer ``a`` a
    polynomial, and other ``a < 0`` are reflected through
    ``Psi(a; b; z) = z^(1-b) Psi(a-b+1; 2-b; z)`` when that lands on a
    positive first parameter.
    """
    if not z > 0:
        raise DomainError(f"Psi requires z > 0, got {z}")
    if a == 0:
        return 1.0
    if _nonpositive_integer(a):
        # (-1)^n sum_k C(n, k) (b + k)_(n - k) (-z)^k, valid for every b
        n = int(-a)
        total = sum(
            math.comb(n, k) * math.prod(b + k + j for j in range(n - k)) * (-z) ** k
            for k in range(n + 1)
        )
        return float((-1) ** n * total)
    if a < 0:
        a2 = a - b + 1.0
        if a2 <= 0:
            raise DomainError(f"Psi({a}; {b}; z) outside the supported parameter region")
        return z ** (1.0 - b) * tricomi_psi(a2, 2.0 - b, z)
    log_pref = -a * math.log(z) - math.lgamma(a)
    return math.exp(log_pref) * _psi_integral(a, b, z)


# --- incomplete gamma ---------------------------------------------------------

_GAMMA_TOL = 1e-15
_GAMMA_ITERS = 1000


def _lower_series(s: float, x: float) -> float:
    """Regularised lower function P(s, x) by its power series."""
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(_GAMMA_ITERS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_TOL:
            return total * math.exp(-x + s * math.log(x) - math.lgamma(s))
    raise QuadratureError(f"incomplete gamma series failed for s={s}, x={x}")


def _upper_fraction(s: float, x: float) -> float:
    """Regularised upper function Q(s, x) by Lentz's continued fraction."""
    tiny = 1e-300
    bcoef = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / bcoef
    h = d
    for i in range(1, _GAMMA_ITERS):
        an = -i * (i - s)
        bcoef += 2.0
        d = an * d + bcoef
        if abs(d) < tiny:
            d = tiny
        c = bcoef + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_TOL:
            return math.exp(-x + s * math.log(x) - math.lgamma(s)) * h
    raise QuadratureError(f"incomplete gamma fraction failed for s={s}, x={x}")


def gamma_q(s: float, x: float) -> float:
    """Regularised upper incomplete gamma ``Gamma(s; x) / Gamma(s)``."""
    if not s > 0:
        raise DomainError(f"incomplete gamma requires s > 0, got {s}")
    if x < 0:
        raise DomainError(f"incomplete gamma requires x >= 0, got {x}")
    if x == 0:
        return 1.0
    if x < s + 1.0:
        return 1.0 - _lower_series(s, x)
    return _upper_fraction(s, x)


def upper_incomplete_gamma(s: float, x: float) -> float:
    """``Gamma(s; x) = int_x^inf exp(-t) t^(s-1) dt`` for ``s > 0, x >= 0``."""
    if not s > 0:
        raise DomainError(f"incomplete gamma requires s > 0, got {s}")
    if x < 0:
        raise DomainError(f"incomplete gamma requires x >= 0, got {x}")
    if x == 0:
        return math.gamma(s)
    if x < s + 1.0:
        return math.gamma(s) * (1.0 - _lower_series(s, x))
    return math.exp(math.lgamma(s)) * _upper_fraction(s, x)


def log_gamma_ratio(num: float, den: float) -> tuple[float, float]:
    """``(sign, log|Gamma(num)/Gamma(den)|)`` without forming either gamma."""
    sign = _gamma_sign(num) * _gamma_sign(den)
    return sign, math.lgamma(num) - math.lgamma(den)


def _gamma_sign(v: float) -> float:
    if _nonpositive_integer(v):
        raise DomainError(f"Gamma has a pole at {v}")
    if v > 0:
        return 1.0
    return -1.0 if math.ceil(-v) % 2 == 1 else 1.0


# --- Hermite polynomials --------------------------------------------------------

MAX_HERMITE_DEGREE = 30


def _hermite_values(m: int, zeta):
    """He_m and He_{m-1} at ``zeta`` by the three-term recurrence."""
    zeta = np.asarray(zeta, dtype=float)
    prev = np.zeros_like(zeta)
    cur = np.ones_like(zeta)
    for n in range(m):
        prev, cur = cur, zeta * cur - n * prev
    return cur, prev


@dataclass(frozen=True)
class HermiteBasis:
    """``He_m`` with exact integer coefficients and its simple real roots.

    ``coefficients[j]`` multiplies ``zeta**j``.
    """

    degree: int
    coefficients: tuple[int, ...]
    roots: tuple[float, ...]
    derivative_at_roots: tuple[float, ...]

    def __call__(self, zeta):
        return _hermite_values(self.degree, zeta)[0]

    def derivative(self, zeta):
        return self.degree * _hermite_values(self.degree, zeta)[1]


def hermite_coefficients(m: int) -> tuple[int, ...]:
    """Integer coefficients of ``He_m`` in ascending powers."""
    coeffs = [0] * (m + 1)
    for i in range(m // 2 + 1):
        num = math.factorial(m)
        den = math.factorial(i) * math.factorial(m - 2 * i) * 2**i
        coeffs[m - 2 * i] = (-1) ** i * (num // den)
    return tuple(coeffs)


def hermite_basis(m: int) -> HermiteBasis:
    """Build ``He_m`` for ``1 <= m <= 30``.

    Roots are the eigenvalues of the symmetric Jacobi matrix of the
    recurrence ``He_{n+1} = zeta He_n - n He_{n-1}``, polished by one Newton
    step and symmetrised about the origin.
    """
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= MAX_HERMITE_DEGREE:
        raise DomainError(f"Hermite degree must be an integer in [1, {MAX_HERMITE_DEGREE}], got {m}")
    m = int(m)
    off = np.sqrt(np.arange(1, m, dtype=float))
    jacobi = np.diag(off, 1) + np.diag(off, -1)
    roots = np.linalg.eigvalsh(jacobi)
    val, lower = _hermite_values(m, roots)
    roots = roots - val / (m * lower)
    roots = 0.5 * (roots - roots[::-1])
    deriv = m * _hermite_values(m, roots)[1]
    return HermiteBasis(
        degree=m,
        coefficients=hermite_coefficients(m),
        roots=tuple(float(r) for r in roots),
        derivative_at_roots=tuple(float(d) for d in deriv),
    )
