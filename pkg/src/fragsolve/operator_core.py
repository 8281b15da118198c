"""Antiderivative-operator calculus on grids.

The transformed equations all have the form

    w_t = m J[phi(+-t(. - x)) w](x),   phi(z) = exp(-sg z),

with ``J+ f(x) = int_x^inf f`` or ``J- f(x) = int_0^x f``.  This module builds
the coefficient sequences of the solution kernels, applies powers and
resolvents of ``J`` to functions sampled on grids, and provides a
time-marching Volterra solver used as an independent reference.

Every integral here is a composite Gauss-Legendre sum with a fixed number of
nodes per grid cell.  Kernels of the form ``d^j exp(c d)`` (``d`` the distance
to the evaluation point) are accumulated cell by cell with a binomial shift,
so a full sweep costs O(N).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import comb

from .errors import (
    DomainError,
    QuadratureError,
    SeriesTruncationError,
    SpectralConditionError,
    ValidityIntervalError,
)
from .quadrature import NODES_PER_CELL, cell_rule, gauss_legendre
from .specfun import kummer_1f1

PLUS = "plus"
MINUS = "minus"
INTERVAL = "interval"
_DIRECTIONS = (PLUS, MINUS, INTERVAL)

SERIES_ORDER = 64
_TAIL_TOL = 1e-12
# fall back to the confluent form when the series loses this many digits
_CANCELLATION_LIMIT = 1e4
# relative size of an integrand at the grid end that counts as unresolved
_TAIL_RESOLUTION = 1e-10


# --- kernels ------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesKernel:
    """Coefficients of the kernels ``phi``, ``Phi`` and ``F``.

    ``phi(z) = sum phi_coeffs[n] z^n / n!``, ``Phi(z) = sum Phi_coeffs[n] z^n``
    and ``F(z) = sum F_coeffs[n] z^n``.
    """

    m: float
    sg: int
    phi_coeffs: np.ndarray
    Phi_coeffs: np.ndarray
    F_coeffs: np.ndarray
    taylor: np.ndarray
    order: int = SERIES_ORDER

    @property
    def phi0(self) -> float:
        return float(self.phi_coeffs[0])

    def phi(self, z):
        return np.polynomial.polynomial.polyval(z, self.taylor)

    def F(self, z):
        """Evaluate ``F`` from its series, checking the truncated tail.

        If the alternating series would lose more than four digits to
        cancellation the equivalent confluent form
        ``m 1F1(1 - sg m; 2; -sg z)`` is used instead.
        """
        z = np.asarray(z, dtype=float)
        coeffs = self._trimmed
        total = np.polynomial.polynomial.polyval(z, coeffs)
        if coeffs.size < self.order:
            # the series terminates: exact polynomial
            return total
        az = np.abs(z)
        magnitude = np.polynomial.polynomial.polyval(az, np.abs(coeffs))
        tail = np.abs(coeffs[-1]) * az ** (coeffs.size - 1) + np.abs(coeffs[-2]) * az ** (coeffs.size - 2)
        ok = tail <= _TAIL_TOL * np.maximum(magnitude, np.finfo(float).tiny)
        ok &= magnitude <= _CANCELLATION_LIMIT * np.abs(total)
        if np.all(ok):
            return total
        if not self._has_confluent_form:
            raise SeriesTruncationError(f"F series not converged at |z| = {np.max(az):.3g}")
        out = np.array(total, dtype=float)
        bad = ~ok
        out[bad] = self.m * kummer_1f1(1.0 - self.sg * self.m, 2.0, -self.sg * z[bad])
        return out

    @property
    def _trimmed(self) -> np.ndarray:
        nz = np.nonzero(self.F_coeffs)[0]
        return self.F_coeffs[: nz[-1] + 1] if nz.size else self.F_coeffs[:1]

    @property
    def _has_confluent_form(self) -> bool:
        return np.array_equal(self.Phi_coeffs, _exp_coeffs(self.sg, self.order))


def _exp_coeffs(sg: int, order: int) -> np.ndarray:
    # phi(z) = exp(-sg z) has phi_n = (-sg)^n
    return (-float(sg)) ** np.arange(order + 1)


def build_kernel(phi_of_z: str, m: float, order: int = SERIES_ORDER) -> SeriesKernel:
    """Kernel coefficients for ``phi(z) = exp(-z)`` (``'exp_neg'``, sg=+1)
    or ``phi(z) = exp(z)`` (``'exp_pos'``, sg=-1).

    The Taylor coefficients ``c_n = phi_n / n!`` follow from the Cauchy
    product form of ``phi' = m Phi phi``:
    ``(n + 1) c_{n+1} = m sum_j Phi_j c_{n-j}``.
    """
    if phi_of_z in ("exp_neg", "+", 1):
        sg = 1
    elif phi_of_z in ("exp_pos", "-", -1):
        sg = -1
    else:
        raise DomainError(f"unknown kernel {phi_of_z!r}; expected 'exp_neg' or 'exp_pos'")
    if not m > 0:
        raise DomainError(f"m must be positive, got {m}")
    Phi = _exp_coeffs(sg, order)
    taylor = np.zeros(order + 1)
    taylor[0] = 1.0
    for n in range(order):
        taylor[n + 1] = m * np.dot(Phi[: n + 1], taylor[n::-1]) / (n + 1)
    factorials = np.array([math.factorial(n) for n in range(order + 1)], dtype=float)
    phi_coeffs = taylor * factorials
    F_coeffs = taylor[1:] / factorials[:-1]
    for arr in (phi_coeffs, Phi, F_coeffs, taylor):
        arr.setflags(write=False)
    return SeriesKernel(
        m=float(m),
        sg=sg,
        phi_coeffs=phi_coeffs,
        Phi_coeffs=Phi,
        F_coeffs=F_coeffs,
        taylor=taylor,
        order=order,
    )


# --- grid functions --------------------------------------------------------------------


class GridFunction:
    """A function sampled on a strictly increasing grid, zero outside it.

    When ``func`` is given it is used for evaluation away from the nodes
    (operator outputs carry such closures so they can be composed exactly);
    otherwise a cubic spline through ``values`` is used.
    """

    def __init__(self, grid, values, func: Optional[Callable] = None, extended: bool = False):
        grid = np.array(grid, dtype=float)
        values = np.array(values, dtype=complex if np.iscomplexobj(values) else float)
        if grid.ndim != 1 or grid.size < 2 or grid.shape != values.shape:
            raise DomainError("grid and values must be 1-D arrays of equal length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError("grid values must be finite")
        grid.setflags(write=False)
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self._func = func
        self._spline = None
        # operator outputs know their values beyond the grid as well
        self.extended = extended and func is not None

    @classmethod
    def from_function(cls, func: Callable, grid) -> "GridFunction":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, func(grid), func=func)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    @property
    def has_closure(self) -> bool:
        return self._func is not None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.extended:
            if x.shape == self.grid.shape and np.array_equal(x, self.grid):
                return self.values.copy()
            return np.asarray(self._func(x), dtype=self.values.dtype)
        inside = (x >= self.grid[0]) & (x <= self.grid[-1])
        out = np.zeros(x.shape, dtype=self.values.dtype)
        if not np.any(inside):
            return out
        if self._func is not None:
            out[inside] = self._func(x[inside])
        else:
            if self._spline is None:
                self._spline = CubicSpline(self.grid, self.values)
            out[inside] = self._spline(x[inside])
        return out

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)


def _output(grid, func, values=None) -> GridFunction:
    if values is None:
        values = func(grid)
    return GridFunction(grid, values, func=func, extended=True)


def _clip_grid(grid: np.ndarray, direction: str) -> np.ndarray:
    """Restrict the integration grid to the half-line the operator sees."""
    if direction == MINUS and grid[0] < 0:
        return np.concatenate(([0.0], grid[grid > 0]))
    if direction == INTERVAL and grid[-1] > 0:
        return np.concatenate((grid[grid < 0], [0.0]))
    return grid


class _Integrator:
    """Kernel integrals ``int d^j exp(c d) f(eta) d eta`` with ``d = |eta - x|``.

    ``plus`` and ``interval`` integrate over ``eta > x``, ``minus`` over
    ``0 < eta < x``.
    """

    def __init__(self, f: GridFunction, direction: str, nodes: int = NODES_PER_CELL):
        if direction not in _DIRECTIONS:
            raise DomainError(f"direction must be one of {_DIRECTIONS}, got {direction!r}")
        self.f = f
        self.direction = direction
        self.nodes = nodes
        grid = _clip_grid(f.grid, direction)
        self.grid = grid
        if grid.size < 2:
            self.empty = True
            return
        self.empty = False
        self.eta, self.w = cell_rule(grid, nodes)
        self.fvals = f(self.eta)
        self._check_tail()

    def _check_tail(self):
        if self.direction != PLUS or not self.f.has_closure:
            return
        scale = np.max(np.abs(self.fvals))
        if scale == 0:
            return
        end = self.grid[-1]
        probe = np.array([end + 1e-9 * max(1.0, abs(end))])
        beyond = self.f._func(probe)
        if np.abs(beyond[0]) > _TAIL_RESOLUTION * scale:
            raise QuadratureError(
                f"integrand tail not resolved: f({end:.4g}+) is {abs(beyond[0]):.3g}, "
                "extend the grid"
            )

    def at_nodes(self, j: int, c) -> np.ndarray:
        """Sums ``S[k, l]`` for ``l = 0..j`` at every node of the clipped grid."""
        dtype = np.result_type(self.fvals, c)
        grid = self.grid
        ncell = grid.size - 1
        out = np.zeros((grid.size, j + 1), dtype=dtype)
        powers = np.arange(j + 1)
        if self.direction == MINUS:
            d = grid[1:, None] - self.eta
            delta = np.diff(grid)
            order = range(ncell)
        else:
            d = self.eta - grid[:-1, None]
            delta = np.diff(grid)
            order = range(ncell - 1, -1, -1)
        ker = self.w * np.exp(c * d) * self.fvals
        local = np.einsum("kq,kql->kl", ker, d[..., None] ** powers)
        if j == 0 and self._vectorisable(c):
            return self._sweep_fast(local[:, 0], c)[:, None]
        binom = comb(powers[:, None], powers[None, :])
        for k in order:
            shift = binom * delta[k] ** np.clip(powers[:, None] - powers[None, :], 0, None)
            shift = np.tril(shift) * np.exp(c * delta[k])
            if self.direction == MINUS:
                out[k + 1] = local[k] + shift @ out[k]
            else:
                out[k] = local[k] + shift @ out[k + 1]
        return out

    def _vectorisable(self, c) -> bool:
        span = self.grid[-1] - self.grid[0]
        return abs(np.real(c)) * span < 600.0

    def _sweep_fast(self, local: np.ndarray, c) -> np.ndarray:
        # S_k = exp(-c x_k) * sum_{cells on the far side} local_i exp(c x_i')
        grid = self.grid
        x0 = grid[0]
        if self.direction == MINUS:
            scaled = local * np.exp(-c * (grid[1:] - x0))
            acc = np.concatenate(([0.0], np.cumsum(scaled)))
            return acc * np.exp(c * (grid - x0))
        scaled = local * np.exp(c * (grid[:-1] - x0))
        acc = np.concatenate((np.cumsum(scaled[::-1])[::-1], [0.0]))
        return acc * np.exp(-c * (grid - x0))

    def evaluate(self, x, j: int, c, node_sums: Optional[np.ndarray] = None) -> np.ndarray:
        """Kernel integral at arbitrary points ``x``."""
        x = np.asarray(x, dtype=float)
        dtype = np.result_type(float, c, self.f.values)
        out = np.zeros(x.shape, dtype=dtype)
        if self.empty:
            return out
        S = self.at_nodes(j, c) if node_sums is None else node_sums
        grid = self.grid
        powers = np.arange(j + 1)
        gx, gw = gauss_legendre(self.nodes)
        flat = x.reshape(-1)
        res = out.reshape(-1)
        if self.direction == MINUS:
            valid = flat > grid[0]
            idx = np.clip(np.searchsorted(grid, flat, side="right") - 1, 0, grid.size - 1)
            anchor = grid[idx]
        else:
            valid = flat < grid[-1]
            idx = np.clip(np.searchsorted(grid, flat, side="left"), 0, grid.size - 1)
            anchor = grid[idx]
        if not np.any(valid):
            return out
        xv, iv, av = flat[valid], idx[valid], anchor[valid]
        delta = np.abs(av - xv)
        # contribution carried from the anchor node
        binom = comb(j, powers)
        carried = np.exp(c * delta) * np.sum(binom * delta[:, None] ** (j - powers) * S[iv], axis=1)
        # partial cell between x and the anchor node (empty when x is a node)
        off = delta > 0
        if np.any(off):
            xo = xv[off]
            lo = np.minimum(xo, av[off])
            half = 0.5 * delta[off]
            eta = lo[:, None] + half[:, None] * (gx + 1.0)
            inner = self._inside(eta)
            fe = np.where(inner, self.f(eta), 0.0)
            dist = np.abs(eta - xo[:, None])
            carried[off] += np.sum(half[:, None] * gw * dist**j * np.exp(c * dist) * fe, axis=1)
        res[valid] = carried
        return out

    def _inside(self, eta):
        if self.direction == MINUS:
            return eta >= max(self.grid[0], 0.0)
        if self.direction == INTERVAL:
            return eta <= 0.0
        return np.ones(eta.shape, dtype=bool)


def kernel_integral(f: GridFunction, j: int, c, direction: str) -> GridFunction:
    """``int d^j exp(c d) f`` over the operator's range, ``d = |eta - x|``.

    The result keeps an exact evaluator so it can be fed to further
    operators.
    """
    integ = _Integrator(f, direction)
    sums = None if integ.empty else integ.at_nodes(j, c)

    def func(x):
        return integ.evaluate(x, j, c, node_sums=sums)

    return _output(f.grid, func)


def _check_power(n):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"operator power must be a positive integer, got {n}")


def apply_J_power(f: GridFunction, n: int, direction: str) -> GridFunction:
    """``(J)^n f`` in single-integral form ``1/(n-1)! int d^(n-1) f``."""
    _check_power(n)
    g = kernel_integral(f, n - 1, 0.0, direction)
    scale = 1.0 / math.factorial(n - 1)
    func = g._func
    return _output(g.grid, lambda x: scale * func(x))


def apply_J_nested(f: GridFunction, n: int, direction: str) -> GridFunction:
    """``(J)^n f`` by ``n`` successive single integrations."""
    _check_power(n)
    out = f
    for _ in range(n):
        out = apply_J_power(out, 1, direction)
    return out


def binomial_solution(u0: GridFunction, m: int, t: float, direction: str) -> GridFunction:
    """Closed form of ``(I + t J+)^m u0`` or ``(I - t J-)^(-m) u0`` for integer m.

    For ``plus`` (and ``interval``) the binomial sum
    ``sum_n C(m, n) t^n (J+)^n u0`` is used.  For ``minus`` the expansion
    ``u0 + sum_n C(m, n) t^n / (n-1)! int_0^x (x - s)^(n-1) e^(t (x - s)) u0(s) ds``
    is used.
    """
    _check_power(m)
    if t < 0:
        raise ValidityIntervalError("t must be nonnegative")
    c = t if direction == MINUS else 0.0
    integ = _Integrator(u0, direction)
    sums = None if integ.empty else integ.at_nodes(m - 1, c)
    coeffs = [comb(m, n, exact=True) * t**n / math.factorial(n - 1) for n in range(1, m + 1)]

    def func(x):
        x = np.asarray(x, dtype=float)
        total = np.array(u0(x), dtype=float)
        for n, coef in enumerate(coeffs, start=1):
            if coef == 0:
                continue
            sub = None if sums is None else sums[:, : n]
            total = total + coef * integ.evaluate(x, n - 1, c, node_sums=sub)
        return total

    return _output(u0.grid, func)


def lemma_solution(kernel: SeriesKernel, u0: GridFunction, t: float,
                   direction: Optional[str] = None, radius: float = 1.0) -> GridFunction:
    """``phi_0 u0(x) + t J[F(+-t(. - x)) u0](x)`` with the series kernel ``F``.

    ``direction`` defaults to ``plus`` for ``sg = +1`` and ``minus`` otherwise.
    For ``sg = -1`` the formula is only accepted for ``t < radius``.
    """
    if direction is None:
        direction = PLUS if kernel.sg > 0 else MINUS
    if t < 0:
        raise ValidityIntervalError("t must be nonnegative")
    if kernel.sg < 0 and t >= radius:
        raise ValidityIntervalError(f"t={t} outside the validity radius {radius}")
    if t == 0:
        return _output(u0.grid, lambda x: kernel.phi0 * u0(x))
    integ = _Integrator(u0, direction)

    def func(x):
        x = np.asarray(x, dtype=float)
        base = kernel.phi0 * u0(x)
        if integ.empty:
            return base
        flat = x.reshape(-1)
        acc = np.zeros(flat.shape)
        eta = integ.eta.reshape(-1)
        weights = (integ.w * integ.fvals).reshape(-1)
        # chunk the output points to bound memory
        for start in range(0, flat.size, 256):
            xs = flat[start:start + 256, None]
            if direction == MINUS:
                d = xs - eta
                mask = (d > 0) & (eta >= 0)
            else:
                d = eta - xs
                mask = d > 0
                if direction == INTERVAL:
                    mask &= eta <= 0
            d = np.where(mask, d, 0.0)
            vals = kernel.F(t * d)
            acc[start:start + 256] = np.sum(np.where(mask, vals, 0.0) * weights, axis=1)
        acc += _partial_cells(kernel, u0, integ, flat, t, direction)
        return base + t * acc.reshape(x.shape)

    values = None
    if not integ.empty and np.array_equal(integ.grid, u0.grid):
        fast = _lemma_on_uniform_nodes(kernel, integ, t, direction)
        if fast is not None:
            values = kernel.phi0 * np.asarray(u0(u0.grid), dtype=float) + t * fast
    return _output(u0.grid, func, values)


def _lemma_on_uniform_nodes(kernel, integ, t, direction):
    """Node values of the lemma integral on a uniform grid.

    The distance from a node to a Gauss node only depends on the cell offset
    and the node's position within the cell, so ``F`` is tabulated once and
    the sums become discrete correlations.  Returns ``None`` for
    non-uniform grids.
    """
    grid = integ.grid
    delta = np.diff(grid)
    h = delta.mean()
    if not np.allclose(delta, h, rtol=1e-10, atol=0.0):
        return None
    ncell = grid.size - 1
    offsets = integ.eta[0] - grid[0]
    weighted = integ.w * integ.fvals
    lags = np.arange(ncell)[:, None] * h
    out = np.zeros(grid.size)
    if direction == MINUS:
        table = kernel.F(t * (lags + (h - offsets)))
        for q in range(offsets.size):
            # node i collects cells k < i at lag i - 1 - k
            conv = np.convolve(weighted[:, q], table[:, q])[:ncell]
            out[1:] += conv
    else:
        table = kernel.F(t * (lags + offsets))
        if direction == INTERVAL:
            weighted = np.where(integ.eta <= 0.0, weighted, 0.0)
        for q in range(offsets.size):
            # node i collects cells k >= i at lag k - i
            corr = np.correlate(weighted[:, q], table[:, q], mode="full")[ncell - 1:]
            out[:ncell] += corr
    return out


def _partial_cells(kernel, u0, integ, x, t, direction):
    """Correction for the cell that contains each evaluation point."""
    grid = integ.grid
    gx, gw = gauss_legendre(integ.nodes)
    out = np.zeros(x.shape)
    interior = (x > grid[0]) & (x < grid[-1])
    if not np.any(interior):
        return out
    xi = x[interior]
    k = np.searchsorted(grid, xi, side="right") - 1
    lo, hi = grid[k], grid[k + 1]
    on_node = xi == lo
    # the full-cell sums already include [lo, hi]; swap in the correct piece
    if direction == MINUS:
        a, b = lo, xi
    else:
        a, b = xi, hi
    half = 0.5 * (b - a)
    eta = a[:, None] + half[:, None] * (gx + 1.0)
    d = np.abs(eta - xi[:, None])
    piece = np.sum(half[:, None] * gw * kernel.F(t * d) * u0(eta), axis=1)
    # remove the masked contribution of the same cell from the chunked sums
    cell_eta = integ.eta[k]
    cell_w = integ.w[k] * integ.fvals[k]
    if direction == MINUS:
        dc = xi[:, None] - cell_eta
    else:
        dc = cell_eta - xi[:, None]
    mask = dc > 0
    already = np.sum(np.where(mask, kernel.F(t * np.where(mask, dc, 0.0)), 0.0) * cell_w, axis=1)
    corr = np.where(on_node, 0.0, piece - already)
    out[interior] = corr
    return out


# --- resolvent --------------------------------------------------------------------------


def resolvent(g: GridFunction, t: float, lam, direction: str, rho: float = 1.0) -> GridFunction:
    """``(lam I - t J)^(-1) g = g / lam + (t / lam^2) int exp((t/lam) d) g``.

    ``rho`` is the exponential weight of the underlying space; the formula
    is accepted when ``rho |lam|^2 - t Re(lam) > 0``.
    """
    lam = complex(lam)
    if lam == 0:
        raise SpectralConditionError("lambda must be nonzero")
    if not rho * abs(lam) ** 2 - t * lam.real > 0:
        raise SpectralConditionError(
            f"rho |lambda|^2 - t Re(lambda) = {rho * abs(lam) ** 2 - t * lam.real:.3g} is not positive"
        )
    if lam.imag == 0:
        lam = lam.real
    c = t / lam
    integ = _Integrator(g, direction)
    sums = None if integ.empty else integ.at_nodes(0, c)

    def func(x):
        x = np.asarray(x, dtype=float)
        return g(x) / lam + (t / lam**2) * integ.evaluate(x, 0, c, node_sums=sums)

    return _output(g.grid, func)


# --- Volterra reference solver ----------------------------------------------------------


def _apply_generator(values: np.ndarray, grid: np.ndarray, m: float, t: float, direction: str) -> np.ndarray:
    """``m J[exp(-t(. - x)) u](x)`` at the grid nodes for spline data ``values``."""
    f = GridFunction(grid, values)
    integ = _Integrator(f, direction)
    if integ.empty:
        return np.zeros_like(values)
    c = t if direction == MINUS else -t
    node_vals = integ.at_nodes(0, c)[:, 0]
    if integ.grid.size == grid.size:
        return m * node_vals
    return m * integ.evaluate(grid, 0, c, node_sums=node_vals[:, None])


def volterra_oracle(kernel: SeriesKernel, u0: GridFunction, t_end: float, steps: int,
                    direction: Optional[str] = None, tol: float = 1e-12,
                    max_iter: int = 50) -> GridFunction:
    """Trapezoidal time marching of ``u_t = m J[exp(-t(. - x)) u]``.

    Each implicit step is solved by Picard iteration.  A ``RuntimeWarning``
    is issued if the iteration residual stops decreasing.
    """
    if direction is None:
        direction = PLUS if kernel.sg > 0 else MINUS
    if steps < 8:
        raise DomainError("at least 8 time steps are required")
    if t_end < 0:
        raise ValidityIntervalError("t_end must be nonnegative")
    grid = u0.grid
    u = np.array(u0(grid), dtype=float)
    if t_end == 0:
        return GridFunction(grid, u)
    h = t_end / steps
    m = kernel.m
    rhs_old = _apply_generator(u, grid, m, 0.0, direction)
    for n in range(steps):
        t_new = (n + 1) * h
        base = u + 0.5 * h * rhs_old
        guess = u + h * rhs_old
        prev_res = np.inf
        scale = max(np.max(np.abs(u)), 1e-300)
        for _ in range(max_iter):
            rhs_new = _apply_generator(guess, grid, m, t_new, direction)
            nxt = base + 0.5 * h * rhs_new
            res = np.max(np.abs(nxt - guess)) / scale
            guess = nxt
            if res < tol:
                break
            if res >= prev_res:
                warnings.warn(
                    f"Picard iteration not contracting at t={t_new:.4g} (residual {res:.3g})",
                    RuntimeWarning,
                    stacklevel=2,
                )
                break
            prev_res = res
        u = guess
        rhs_old = _apply_generator(u, grid, m, t_new, direction)
    return GridFunction(grid, u)


# --- norms --------------------------------------------------------------------------------


def l1_distance(f: Callable, g: Callable, grid) -> float:
    """``int |f - g|`` over the span of ``grid`` with a fixed composite rule."""
    nodes, weights = cell_rule(np.asarray(grid, dtype=float))
    return float(np.sum(weights * np.abs(f(nodes) - g(nodes))))


def l1_norm(f: Callable, grid) -> float:
    nodes, weights = cell_rule(np.asarray(grid, dtype=float))
    return float(np.sum(weights * np.abs(f(nodes))))
