"""Closed forms for linear transport rates (``gamma = 1``).

With ``r(x) = k x`` every characteristic is ``x e^(s k t)`` and the
fragmentation part reduces to ``(I + tau J)^m`` acting on the pushed-forward
datum.  Back in physical variables the solution is a transported copy of
``u0`` plus a Kummer-function integral over larger sizes.  Moments of the
monodisperse solution have closed forms in terms of ``1F1`` (``alpha > 0``)
and ``Psi`` (``alpha < 0``).

``s = +1`` denotes growth and ``s = -1`` decay throughout.
"""
from __future__ import annotations

import math
import numpy as np

from .errors import DomainError, MomentDivergenceError, QuadratureError, UnsupportedConfigurationError
from .model import (
    LINEAR,
    DensitySnapshot,
    DerivedParams,
    Dirac,
    InitialCondition,
    PhysicalParams,
    derive,
)
from .quadrature import cell_rule, gauss_legendre
from .specfun import gamma_q, kummer_1f1, log_gamma_ratio, tricomi_psi

# minimum number of quadrature cells laid over a datum's support
_MIN_CELLS = 256
# evaluation points handled per vectorised block
_BLOCK = 128


def _linear(params: PhysicalParams) -> DerivedParams:
    d = derive(params)
    if d.case != LINEAR:
        raise UnsupportedConfigurationError(f"expected gamma = 1, got gamma = {params.gamma}")
    return d


def _check_time(t):
    if not (math.isfinite(t) and t >= 0):
        raise DomainError(f"t must be finite and nonnegative, got {t}")


def _breaks(u0: InitialCondition) -> np.ndarray:
    """Cell boundaries resolving the support of a regular datum."""
    lo, hi = u0.support
    pts = np.unique(np.asarray(u0.breakpoints(), dtype=float))
    if pts.size - 1 >= _MIN_CELLS:
        return pts
    per = int(math.ceil(_MIN_CELLS / max(pts.size - 1, 1)))
    pieces = []
    for left, right in zip(pts[:-1], pts[1:]):
        if left > 0 and right / left > 4:
            pieces.append(np.geomspace(left, right, per + 1)[:-1])
        else:
            pieces.append(np.linspace(left, right, per + 1)[:-1])
    pieces.append([pts[-1]])
    return np.concatenate(pieces)


def datum_rule(u0: InitialCondition):
    """Gauss nodes, weights and datum values covering the support of ``u0``.

    Returned arrays have shape ``(ncells, nodes)``.
    """
    if u0.is_dirac:
        raise DomainError("a monodisperse datum has no density to integrate")
    eta, w = cell_rule(_breaks(u0))
    return eta, w, u0.density(eta)


def split_rule(u0: InitialCondition, cuts):
    """Quadrature for ``int_cut^inf g(eta) u0(eta) d eta`` at several cuts.

    Returns ``(eta, w, vals, full, p_eta, p_w, p_vals)``: the flattened full
    cell rule, a boolean mask ``full`` of shape ``(ncuts, nodes)`` selecting
    the cells entirely above each cut, and a fresh Gauss rule on the part of
    the cell that contains the cut (shape ``(ncuts, n)``).
    """
    breaks = _breaks(u0)
    eta, w = cell_rule(breaks)
    vals = u0.density(eta)
    n = eta.shape[1]
    cuts = np.asarray(cuts, dtype=float).reshape(-1)
    cell_lo = breaks[:-1]
    full = np.repeat(cell_lo[None, :] >= cuts[:, None], n, axis=1)
    idx = np.searchsorted(breaks, cuts, side="right") - 1
    inside = (idx >= 0) & (idx < breaks.size - 1)
    gx, gw = gauss_legendre(n)
    lo = np.where(inside, cuts, 0.0)
    hi = np.where(inside, breaks[np.clip(idx + 1, 0, breaks.size - 1)], 0.0)
    half = 0.5 * (hi - lo)
    p_eta = lo[:, None] + half[:, None] * (gx + 1.0)
    p_w = half[:, None] * gw
    p_vals = np.where(inside[:, None], u0.density(np.where(inside[:, None], p_eta, lo[:, None] + 1.0)), 0.0)
    return eta.reshape(-1), w.reshape(-1), vals.reshape(-1), full, p_eta, p_w, p_vals


# --- general data ----------------------------------------------------------------


def solve_linear(params: PhysicalParams, u0: InitialCondition, x, t: float):
    """Density ``u(x, t)`` for a regular initial datum.

    ``u = exp(P) [u0(x e^(-s k t)) + C int_x^inf 1F1(1 - m'; 2; Z) x^nu
    y^(alpha - nu - 1) u0(y e^(-s k t)) dy]`` with ``m' = (nu + 2)/alpha``,
    ``P = -s k t - s a x^alpha (1 - e^(-s k alpha t))/(k alpha)``,
    ``C = s a (nu + 2)(1 - e^(-s k alpha t))/(k alpha)`` and
    ``Z = -s a (1 - e^(-s k alpha t)) (y^alpha - x^alpha)/(k alpha)``.

    The integral is taken over the datum's support with a composite
    Gauss-Legendre rule (variable ``eta = y e^(-s k t)``); the exponential
    prefactor is folded into the Kummer evaluation so large arguments do
    not overflow.
    """
    _linear(params)
    _check_time(t)
    if u0.is_dirac:
        raise DomainError("use solve_linear_monodisperse for a Dirac datum")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise DomainError("x must be positive")
    alpha, nu, k, a, s = params.alpha, params.nu, params.k, params.a, params.s
    flat = x_arr.reshape(-1)
    if t == 0:
        return u0.density(x_arr)
    shrink = math.exp(-s * k * t)
    one_minus = -math.expm1(-s * k * alpha * t)
    c_exp = s * a * one_minus / (k * alpha)
    coef = c_exp * (nu + 2.0)
    kummer_a = 1.0 - (nu + 2.0) / alpha
    log_pref = -s * k * t - c_exp * flat**alpha
    out = np.exp(log_pref) * u0.density(flat * shrink)

    x_alpha = flat**alpha
    for start in range(0, flat.size, _BLOCK):
        stop = min(start + _BLOCK, flat.size)
        xs = flat[start:stop]
        eta, w, vals, full, p_eta, p_w, p_vals = split_rule(u0, xs * shrink)
        part = _linear_gain(eta[None, :], (w * vals)[None, :] * full, xs, x_alpha[start:stop],
                            log_pref[start:stop], shrink, c_exp, kummer_a, alpha, nu)
        part += _linear_gain(p_eta, p_w * p_vals, xs, x_alpha[start:stop],
                             log_pref[start:stop], shrink, c_exp, kummer_a, alpha, nu)
        out[start:stop] += coef * xs**nu * part
    if not np.all(np.isfinite(out)):
        raise QuadratureError("non-finite value in the closed-form quadrature")
    return out.reshape(x_arr.shape)


def _linear_gain(eta, weights, xs, x_alpha, log_pref, shrink, c_exp, kummer_a, alpha, nu):
    """Row sums of ``weights * 1F1(...) * y^(alpha - nu - 1) dy/deta``."""
    eta, weights = np.broadcast_arrays(eta, weights)
    eta = np.broadcast_to(eta, (xs.size, eta.shape[1]))
    weights = np.broadcast_to(weights, eta.shape)
    live = weights != 0
    y = np.where(live, eta, 1.0) / shrink
    z = np.where(live, -c_exp * (y**alpha - x_alpha[:, None]), 0.0)
    scale = np.broadcast_to(log_pref[:, None], z.shape)
    kum = kummer_1f1(kummer_a, 2.0, z, log_scale=scale)
    jac = np.where(live, weights / shrink * y ** (alpha - nu - 1.0), 0.0)
    return np.sum(kum * jac, axis=1)


# --- monodisperse data -----------------------------------------------------------


def _log_parent_weight(p: PhysicalParams, x0: float, t: float) -> float:
    return -p.s * p.a * x0**p.alpha * math.expm1(p.s * p.k * p.alpha * t) / (p.k * p.alpha)


def monodisperse_dirac(params: PhysicalParams, x0: float, t: float) -> Dirac:
    """Surviving parent: ``exp(-s a x0^alpha (e^(s k alpha t) - 1)/(k alpha))``
    at ``x0 e^(s k t)``."""
    p = params
    return Dirac(location=x0 * math.exp(p.s * p.k * t), weight=math.exp(_log_parent_weight(p, x0, t)))


def _daughters(p: PhysicalParams, x0, x, t: float) -> np.ndarray:
    """Daughter density at ``x`` from parents ``x0`` (elementwise, ``t > 0``)."""
    alpha, nu, k, a, s = p.alpha, p.nu, p.k, p.a, p.s
    kummer_b = 1.0 + (nu + 2.0) / alpha
    amp = s * a * (nu + 2.0) * math.expm1(s * k * alpha * t) / (k * alpha) * math.exp(-s * k * (nu + 1.0) * t)
    c_exp = s * a * -math.expm1(-s * k * alpha * t) / (k * alpha)
    top_a = x0**alpha * math.exp(s * k * alpha * t)
    # the weight itself may underflow long before the daughters do
    log_w = -s * a * x0**alpha * math.expm1(s * k * alpha * t) / (k * alpha)
    z = c_exp * (top_a - x**alpha)
    return amp * x0 ** (alpha - nu - 1.0) * x**nu * kummer_1f1(kummer_b, 2.0, z, log_scale=log_w)


def solve_linear_monodisperse(params: PhysicalParams, x0: float, t: float) -> DensitySnapshot:
    """Solution for ``u0 = delta(x - x0)``.

    The daughter density on ``(0, x0 e^(s k t)]`` is
    ``s A e^(-s k (nu + 1) t) x0^(alpha - nu - 1) x^nu W 1F1(1 + m'; 2; Z')``
    with ``A = a (nu + 2)(e^(s k alpha t) - 1)/(k alpha)``, ``W`` the parent
    weight and ``Z' = s a (1 - e^(-s k alpha t)) (x0^alpha e^(s k alpha t)
    - x^alpha)/(k alpha)``.  The factor ``e^(-s k (nu + 1) t)`` comes from
    substituting the Dirac into the general formula.
    """
    _linear(params)
    _check_time(t)
    if not x0 > 0:
        raise DomainError(f"x0 must be positive, got {x0}")
    p = params
    parent = monodisperse_dirac(p, x0, t)
    if t == 0:
        return DensitySnapshot(t=0.0, dirac=parent, regular=lambda x: np.zeros_like(x),
                               support=(0.0, 0.0))
    top = parent.location

    def regular(x):
        x = np.asarray(x, dtype=float)
        return _daughters(p, np.full(x.shape, float(x0)), x, t)

    return DensitySnapshot(t=float(t), dirac=parent, regular=regular, support=(0.0, top))


# --- moments ---------------------------------------------------------------------


def _moment_argument(p: PhysicalParams, x0: float, t: float) -> float:
    s = p.s
    return s * p.a * x0**p.alpha * math.expm1(s * p.k * p.alpha * t) / (p.k * p.alpha)


def check_moment_order(params: PhysicalParams, p: float) -> None:
    """Raise ``MomentDivergenceError`` when the ``p``-th moment is infinite."""
    if not p >= 0:
        raise DomainError(f"moment order must be nonnegative, got {p}")
    alpha, nu = params.alpha, params.nu
    if alpha > 0 and p + nu + 1.0 <= 0:
        raise MomentDivergenceError(
            f"moment of order {p} diverges at x = 0 (needs p > -1 - nu = {-1.0 - nu})"
        )
    if alpha < 0 and p <= 1.0 + alpha:
        raise MomentDivergenceError(f"moment of order {p} diverges (needs p > 1 + alpha = {1.0 + alpha})")


def moment_linear(params: PhysicalParams, p: float, t: float, x0: float) -> float:
    """``p``-th moment of the monodisperse solution.

    ``alpha > 0``: ``e^(s p k t - Z) x0^p 1F1(m'; (p + nu + 1)/alpha; Z)``.
    ``alpha < 0``: the same prefactor times
    ``Gamma((alpha - p + 1)/alpha) / Gamma((alpha - p - nu - 1)/alpha)
    Psi(m'; (p + nu + 1)/alpha; Z)``.
    Here ``Z = s a x0^alpha (e^(s k alpha t) - 1)/(k alpha) >= 0``.
    The mass (``p = 1``) reduces to ``e^(s k t) x0`` for ``alpha > 0`` and to
    ``e^(s k t) x0 Q(1 - m', Z)`` (regularised upper gamma) for ``alpha < 0``.
    """
    _linear(params)
    _check_time(t)
    if not x0 > 0:
        raise DomainError(f"x0 must be positive, got {x0}")
    check_moment_order(params, p)
    alpha, nu, k, s = params.alpha, params.nu, params.k, params.s
    if t == 0:
        return x0**p
    z = _moment_argument(params, x0, t)
    ratio = (nu + 2.0) / alpha
    if p == 1:
        if alpha > 0:
            return math.exp(s * k * t) * x0
        return math.exp(s * k * t) * x0 * gamma_q(1.0 - ratio, z)
    log_pref = s * p * k * t - z + p * math.log(x0)
    b = (p + nu + 1.0) / alpha
    if alpha > 0:
        return kummer_1f1(ratio, b, z, log_scale=log_pref)
    sign, log_g = log_gamma_ratio((alpha - p + 1.0) / alpha, (alpha - p - nu - 1.0) / alpha)
    return sign * math.exp(log_pref + log_g) * tricomi_psi(ratio, b, z)


def transport_mass(params: PhysicalParams, t: float, x0: float) -> float:
    """Mass carried by pure transport, ``e^(s k t) x0``."""
    return math.exp(params.s * params.k * t) * x0


# --- pure fragmentation ------------------------------------------------------------


def pure_fragmentation_monodisperse(m: float, sg: int, xi0: float, t: float) -> DensitySnapshot:
    """Pure fragmentation in the variable ``xi = a x^alpha`` from ``delta(xi - xi0)``.

    The parent keeps weight ``e^(-t xi0)``.  Daughters have density
    ``e^(-t xi) t F(t |xi - xi0|)`` with ``F(z) = m 1F1(1 - sg m; 2; -sg z)``,
    supported on ``xi < xi0`` when ``sg = +1`` and on ``xi > xi0`` when
    ``sg = -1``.
    """
    if not m > 0:
        raise DomainError(f"m must be positive, got {m}")
    if sg not in (1, -1):
        raise DomainError(f"sg must be +1 or -1, got {sg}")
    if not xi0 > 0:
        raise DomainError(f"xi0 must be positive, got {xi0}")
    _check_time(t)
    parent = Dirac(location=float(xi0), weight=math.exp(-t * xi0))
    if t == 0:
        return DensitySnapshot(t=0.0, dirac=parent, regular=lambda x: np.zeros_like(x),
                               support=(0.0, 0.0))

    def regular(xi):
        xi = np.asarray(xi, dtype=float)
        z = t * np.abs(xi - xi0)
        return m * t * kummer_1f1(1.0 - sg * m, 2.0, -sg * z, log_scale=-t * xi)

    support = (0.0, float(xi0)) if sg > 0 else (float(xi0), math.inf)
    return DensitySnapshot(t=float(t), dirac=parent, regular=regular, support=support)


# --- spurious family ------------------------------------------------------------------


def _spurious_setup(params: PhysicalParams):
    _linear(params)
    if not params.alpha > 0:
        raise DomainError("the spurious family requires alpha > 0")


def spurious_solution(params: PhysicalParams, u0_hat: InitialCondition, x, t: float):
    """Member of the non-unique family for ``alpha > 0``.

    ``u(x, t) = x^nu int_0^inf E(s', t) (s'/a + x^alpha e^(-s k alpha t))^(-(alpha + nu + 2)/alpha)
    u0_hat(s') ds'`` with ``E = exp(-s k (nu + 1) t + s s' (e^(s k alpha t) - 1)/(k alpha))``;
    ``s'`` is the spectral parameter and ``u0_hat`` a density in it.
    """
    _spurious_setup(params)
    _check_time(t)
    alpha, nu, k, a, s = params.alpha, params.nu, params.k, params.a, params.s
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise DomainError("x must be positive")
    flat = x_arr.reshape(-1)
    sp, w, vals = datum_rule(u0_hat)
    sp, w, vals = sp.reshape(-1), w.reshape(-1), vals.reshape(-1)
    growth = math.expm1(s * k * alpha * t) / (k * alpha)
    log_e = -s * k * (nu + 1.0) * t + s * sp * growth
    power = -(alpha + nu + 2.0) / alpha
    shift = math.exp(-s * k * alpha * t)
    out = np.empty(flat.shape)
    for start in range(0, flat.size, _BLOCK):
        xs = flat[start:start + _BLOCK, None]
        base = sp[None, :] / a + xs**alpha * shift
        out[start:start + _BLOCK] = np.sum(w * vals * np.exp(log_e + power * np.log(base)), axis=1)
    out *= flat**nu
    if not np.all(np.isfinite(out)):
        raise QuadratureError("non-finite value in the spurious-family quadrature")
    return out.reshape(x_arr.shape)


def spurious_moment(params: PhysicalParams, u0_hat: InitialCondition, p: float, t: float) -> float:
    """``p``-th moment of the spurious solution, ``-(1 + nu) < p < 1 + alpha``.

    ``(1/alpha) B((p + nu + 1)/alpha, (alpha - p + 1)/alpha)
    int (s'/a)^((p - 1 - alpha)/alpha) e^(s p k t + s s' (e^(s k alpha t) - 1)/(k alpha)) u0_hat(s') ds'``.
    """
    _spurious_setup(params)
    _check_time(t)
    alpha, nu, k, a, s = params.alpha, params.nu, params.k, params.a, params.s
    if not -(1.0 + nu) < p < 1.0 + alpha:
        raise MomentDivergenceError(f"spurious moments need {-(1.0 + nu)} < p < {1.0 + alpha}, got {p}")
    b1, b2 = (p + nu + 1.0) / alpha, (alpha - p + 1.0) / alpha
    log_beta = math.lgamma(b1) + math.lgamma(b2) - math.lgamma(b1 + b2)
    sp, w, vals = datum_rule(u0_hat)
    growth = math.expm1(s * k * alpha * t) / (k * alpha)
    expo = (p - 1.0 - alpha) / alpha * np.log(sp / a) + s * p * k * t + s * sp * growth
    return float(math.exp(log_beta) / alpha * np.sum(w * vals * np.exp(expo)))


def green_superposition(params: PhysicalParams, u0: InitialCondition, x, t: float) -> np.ndarray:
    """``int u0(x0) u_mono(x, t; x0) dx0``, an independent route to ``solve_linear``.

    Daughters at ``x`` come from parents ``x0 > x e^(-s k t)``, so the
    ``x0`` quadrature is split at that point.  Parents whose Dirac lands
    exactly at ``x`` contribute ``W(x0) e^(-s k t) u0(x0)``.
    """
    _linear(params)
    _check_time(t)
    x_arr = np.asarray(x, dtype=float)
    flat = x_arr.reshape(-1)
    shrink = math.exp(-params.s * params.k * t)
    parents = flat * shrink
    eta, w, vals, full, p_eta, p_w, p_vals = split_rule(u0, parents)
    out = np.zeros(flat.size)
    if t > 0:
        for i, xi in enumerate(flat):
            nodes = np.concatenate((eta[full[i]], p_eta[i]))
            weights = np.concatenate((w[full[i]] * vals[full[i]], p_w[i] * p_vals[i]))
            live = weights != 0
            out[i] = np.sum(weights[live] * _daughters(params, nodes[live], xi, t))
    weights = np.array([monodisperse_dirac(params, x0, t).weight for x0 in parents])
    out += weights * shrink * u0.density(parents)
    return out.reshape(x_arr.shape)


__all__ = [
    "datum_rule",
    "solve_linear",
    "monodisperse_dirac",
    "solve_linear_monodisperse",
    "check_moment_order",
    "moment_linear",
    "transport_mass",
    "pure_fragmentation_monodisperse",
    "spurious_solution",
    "spurious_moment",
    "green_superposition",
]
