"""Closed forms for constant transformed rates (``alpha = 1 - gamma``, ``nu = alpha - 1``).

In the variable ``z = a x^alpha`` characteristics are straight lines
``z = xi + s beta t`` and the transformed density
``w(xi, t) = exp(s beta t^2 / 2 + xi t) z^(-nu/alpha) u`` obeys

    w_t = m J[exp(-t(. - xi)) w](xi),

with ``J = J+`` for ``alpha > 0`` and ``J = J-`` for ``alpha < 0``.  Whether
characteristics reach ``xi < 0`` depends on the mode and on the sign of
``alpha`` (cases i-iv).  Growth with ``alpha > 0`` is the only case in which
a boundary datum matters; it is built here from Hermite polynomials for
integer ``m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import comb

from .errors import DomainError, MomentDivergenceError, QuadratureError, UnsupportedConfigurationError
from .linear_case import split_rule
from .model import (
    CONSTANT,
    DECAY,
    GROWTH,
    DensitySnapshot,
    DerivedParams,
    Dirac,
    InitialCondition,
    PhysicalParams,
    constant_subcase,
    derive,
    pushforward_initial,
)
from .operator_core import (
    MINUS,
    PLUS,
    GridFunction,
    binomial_solution,
    build_kernel,
    lemma_solution,
)
from .quadrature import cell_rule, gauss_legendre
from .specfun import HermiteBasis, gamma_q, hermite_basis, kummer_1f1, log_gamma_ratio, tricomi_psi

_BLOCK = 128
MAX_BOUNDARY_M = 10


def _constant(params: PhysicalParams) -> DerivedParams:
    d = derive(params)
    if d.case != CONSTANT:
        raise UnsupportedConfigurationError(
            "expected the constant-rate family alpha = 1 - gamma, nu = alpha - 1"
        )
    return d


def _check_time(t):
    if not (math.isfinite(t) and t >= 0):
        raise DomainError(f"t must be finite and nonnegative, got {t}")


def subcase(params: PhysicalParams):
    """Case label (i)-(iv) and boundary requirements for constant rates."""
    _constant(params)
    return constant_subcase(params.mode, 1 if params.alpha > 0 else -1)


def direction_of(d: DerivedParams) -> str:
    return PLUS if d.sg > 0 else MINUS


def _log_prefactor(d: DerivedParams, xi, t):
    """``log`` of ``exp(-s beta t^2/2 - xi t)``, the factor between ``w`` and ``u``."""
    return -d.drift * t * t / 2.0 - np.asarray(xi, dtype=float) * t


# --- general data in physical variables --------------------------------------------------


def solve_constant(params: PhysicalParams, u0: InitialCondition, x, t: float,
                   boundary: Optional["BoundaryCorrection"] = None):
    """Density ``u(x, t)`` for any constant-rate case.

    Where the label ``xi = a x^alpha - s beta t`` is positive,

    ``u = exp(-s beta t^2/2 - xi t) [(z/xi)^(nu/alpha) u0((xi/a)^(1/alpha))
    + a (alpha + 1) x^(alpha - 1) t int_Y^inf 1F1(-1/alpha; 2; t (xi - a y^alpha)) u0(y) dy]``

    with ``Y = (xi/a)^(1/alpha)``.  For ``xi <= 0`` the density is zero in the
    decay case with ``alpha < 0`` and is given by the boundary correction
    in the growth case with ``alpha > 0``.
    """
    d = _constant(params)
    _check_time(t)
    if u0.is_dirac:
        raise DomainError("use the monodisperse solvers for a Dirac datum")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise DomainError("x must be positive")
    if t == 0:
        return u0.density(x_arr)
    alpha, a = params.alpha, params.a
    flat = x_arr.reshape(-1)
    z = a * flat**alpha
    xi = z - d.drift * t
    out = np.zeros(flat.shape)
    inner = xi > 0
    if np.any(inner):
        out[inner] = _interior(d, u0, flat[inner], xi[inner], t)
    if np.any(~inner):
        case = constant_subcase(params.mode, d.sg)
        if case.physical_boundary:
            if boundary is None:
                boundary = boundary_from_datum(params, u0)
            xs = xi[~inner]
            logp = _log_prefactor(d, xs, t)
            out[~inner] = z[~inner] ** (params.nu / alpha) * np.exp(logp) * boundary.w(xs, t)
    return out.reshape(x_arr.shape)


def _interior(d: DerivedParams, u0: InitialCondition, x, xi, t):
    p = d.params
    alpha, nu, a = p.alpha, p.nu, p.a
    z = a * x**alpha
    logp = _log_prefactor(d, xi, t)
    origin = (xi / a) ** (1.0 / alpha)
    out = np.exp(logp) * (z / xi) ** (nu / alpha) * u0.density(origin)
    coef = a * (alpha + 1.0) * x ** (alpha - 1.0) * t
    for start in range(0, x.size, _BLOCK):
        stop = min(start + _BLOCK, x.size)
        eta, w, vals, full, p_eta, p_w, p_vals = split_rule(u0, origin[start:stop])
        part = _gain(eta[None, :], (w * vals)[None, :] * full, xi[start:stop], logp[start:stop], t, p)
        part += _gain(p_eta, p_w * p_vals, xi[start:stop], logp[start:stop], t, p)
        out[start:stop] += coef[start:stop] * part
    if not np.all(np.isfinite(out)):
        raise QuadratureError("non-finite value in the constant-case quadrature")
    return out


def _gain(y, weights, xi, logp, t, p: PhysicalParams):
    y, weights = np.broadcast_arrays(y, weights)
    y = np.broadcast_to(y, (xi.size, y.shape[1]))
    weights = np.broadcast_to(weights, y.shape)
    live = weights != 0
    ys = np.where(live, y, 1.0)
    arg = np.where(live, t * (xi[:, None] - p.a * ys**p.alpha), 0.0)
    kum = kummer_1f1(-1.0 / p.alpha, 2.0, arg, log_scale=np.broadcast_to(logp[:, None], arg.shape))
    return np.sum(np.where(live, kum * weights, 0.0), axis=1)


def solve_constant_decay(params: PhysicalParams, u0: InitialCondition, x, t: float):
    """Decay-mode density; zero beyond the limiting characteristic ``x^alpha < -k alpha t``."""
    if params.mode != DECAY:
        raise UnsupportedConfigurationError("solve_constant_decay needs mode='decay'")
    return solve_constant(params, u0, x, t)


# --- monodisperse data ----------------------------------------------------------------------


def decay_dirac(params: PhysicalParams, x0: float, t: float) -> Optional[Dirac]:
    """Parent particle in the decay case, or ``None`` after it has vanished."""
    alpha, k, a = params.alpha, params.k, params.a
    top = x0**alpha - k * alpha * t
    if top <= 0:
        return None
    loc = top ** (1.0 / alpha)
    return Dirac(loc, math.exp(-0.5 * k * a * alpha * t * t - a * loc**alpha * t))


def solve_constant_decay_monodisperse(params: PhysicalParams, x0: float, t: float) -> DensitySnapshot:
    """Decay solution for ``u0 = delta(x - x0)``.

    Parent at ``(x0^alpha - k alpha t)^(1/alpha)`` with weight
    ``exp(-k a alpha t^2/2 - a x^alpha t)`` taken at that location; daughters
    below it with density
    ``exp(-k a alpha t^2/2 - a x^alpha t) a (nu + 2) x^(alpha - 1) t
    1F1(-1/alpha; 2; a t (x^alpha + k alpha t - x0^alpha))``.
    Past the extinction time ``x0^alpha = k alpha t`` the snapshot is empty.
    """
    _constant(params)
    if params.mode != DECAY:
        raise UnsupportedConfigurationError("solve_constant_decay_monodisperse needs mode='decay'")
    _check_time(t)
    if not x0 > 0:
        raise DomainError(f"x0 must be positive, got {x0}")
    parent = decay_dirac(params, x0, t)
    if parent is None:
        return DensitySnapshot.empty(float(t))
    if t == 0:
        return DensitySnapshot(t=0.0, dirac=parent, regular=lambda x: np.zeros_like(x), support=(0.0, 0.0))
    alpha, nu, k, a = params.alpha, params.nu, params.k, params.a

    def regular(x):
        x = np.asarray(x, dtype=float)
        xa = x**alpha
        logp = -0.5 * k * a * alpha * t * t - a * xa * t
        arg = a * t * (xa + k * alpha * t - x0**alpha)
        return a * (nu + 2.0) * x ** (alpha - 1.0) * t * kummer_1f1(-1.0 / alpha, 2.0, arg, log_scale=logp)

    return DensitySnapshot(t=float(t), dirac=parent, regular=regular, support=(0.0, parent.location))


@dataclass(frozen=True)
class TransformedSnapshot:
    """Solution in the label variable ``xi``: a Dirac plus a regular part."""

    t: float
    dirac: Dirac
    regular: Callable
    support: tuple


def transformed_monodisperse(d: DerivedParams, xi0: float, weight: float, t: float) -> TransformedSnapshot:
    """``w(xi, t)`` for ``w0 = weight * delta(xi - xi0)``.

    Integer ``m`` uses the binomial expansion of ``(I + t J+)^m`` or of
    ``(I - t J-)^(-m)``; otherwise the kernel ``t F(t |xi - xi0|)``.
    Daughters lie below ``xi0`` for ``alpha > 0`` and above it otherwise.
    """
    m_int = d.integer_m
    sg = d.sg

    if m_int is not None:
        coeffs = [comb(m_int, n, exact=True) * t**n / math.factorial(n - 1) for n in range(1, m_int + 1)]

        def regular(xi):
            dist = np.abs(np.asarray(xi, dtype=float) - xi0)
            total = np.zeros(dist.shape)
            for n, c in enumerate(coeffs, start=1):
                total = total + c * dist ** (n - 1)
            if sg < 0:
                total = total * np.exp(t * dist)
            return weight * total
    else:
        kernel = build_kernel("exp_neg" if sg > 0 else "exp_pos", d.m)

        def regular(xi):
            dist = np.abs(np.asarray(xi, dtype=float) - xi0)
            return weight * t * kernel.m * kummer_1f1(1.0 - sg * kernel.m, 2.0, -sg * t * dist)

    support = (-math.inf, xi0) if sg > 0 else (xi0, math.inf)
    return TransformedSnapshot(t=float(t), dirac=Dirac(xi0, weight), regular=regular, support=support)


def monodisperse_via_transform(params: PhysicalParams, x0: float, t: float) -> DensitySnapshot:
    """Monodisperse solution assembled from the transformed problem.

    Pushes ``delta(x - x0)`` forward to ``xi``, evolves it with the operator
    solution and maps the result back.  Labels ``xi < 0`` are dropped, which
    is exact except in the growth case with ``alpha > 0`` (refused here).
    """
    d = _constant(params)
    _check_time(t)
    case = constant_subcase(params.mode, d.sg)
    if case.physical_boundary and t > 0:
        raise UnsupportedConfigurationError("growth with alpha > 0 needs boundary data; use solve_constant")
    p = params
    alpha, nu, a = p.alpha, p.nu, p.a
    datum = pushforward_initial(InitialCondition.monodisperse(x0), p)
    xi0, w0 = datum.dirac.location, datum.dirac.weight
    snap = transformed_monodisperse(d, xi0, w0, t)

    def x_of(xi):
        return ((np.asarray(xi, dtype=float) + d.drift * t) / a) ** (1.0 / alpha)

    def back(xi, values):
        z = np.asarray(xi, dtype=float) + d.drift * t
        return z ** (nu / alpha) * np.exp(_log_prefactor(d, xi, t)) * values

    z0 = xi0 + d.drift * t
    if z0 <= 0:
        return DensitySnapshot.empty(float(t))
    loc = float(x_of(xi0))
    # delta(xi - xi0) = delta(x - X) / |d xi/dx| at X
    jac = a * abs(alpha) * loc ** (alpha - 1.0)
    dirac = Dirac(loc, float(back(xi0, w0)) / jac)

    def regular(x):
        x = np.asarray(x, dtype=float)
        xi = a * x**alpha - d.drift * t
        out = np.zeros(x.shape)
        sel = (xi > 0) & sg_side(d.sg, xi, xi0)
        out[sel] = back(xi[sel], snap.regular(xi[sel]))
        return out

    return DensitySnapshot(t=float(t), dirac=dirac, regular=regular, support=(0.0, loc))


def sg_side(sg: int, xi, xi0: float):
    """Labels on the daughter side of the parent label."""
    xi = np.asarray(xi, dtype=float)
    return xi < xi0 if sg > 0 else xi > xi0


# --- moments ----------------------------------------------------------------------------------


def moments_constant_decay(params: PhysicalParams, p: float, t: float, x0: float) -> float:
    """``p``-th moment of the decay solution from ``delta(x - x0)``.

    ``alpha > 0``: ``e^(-k a alpha t^2/2) X^p 1F1((p - 1)/alpha; (p + alpha)/alpha; -a t X^alpha)``,
    ``X = (x0^alpha - k alpha t)^(1/alpha)``; zero after extinction.
    ``-1 < alpha < 0``, ``p > 1 + alpha``:
    ``Gamma((alpha - p + 1)/alpha) / Gamma(p/|alpha|) e^(k a alpha t^2/2 - a x0^alpha t) X^p
    Psi((alpha + 1)/alpha; (alpha + p)/alpha; a t X^alpha)``.
    """
    _constant(params)
    if params.mode != DECAY:
        raise UnsupportedConfigurationError("moments_constant_decay needs mode='decay'")
    _check_time(t)
    if not x0 > 0:
        raise DomainError(f"x0 must be positive, got {x0}")
    if not p >= 0:
        raise DomainError(f"moment order must be nonnegative, got {p}")
    alpha, k, a = params.alpha, params.k, params.a
    if alpha < 0 and p <= 1.0 + alpha:
        raise MomentDivergenceError(f"moment of order {p} diverges (needs p > 1 + alpha = {1.0 + alpha})")
    top = x0**alpha - k * alpha * t
    if top <= 0:
        return 0.0
    if t == 0:
        return x0**p
    log_x = math.log(top) / alpha
    arg = a * t * top
    if alpha > 0:
        log_pref = -0.5 * k * a * alpha * t * t + p * log_x
        return kummer_1f1((p - 1.0) / alpha, (p + alpha) / alpha, -arg, log_scale=log_pref)
    if p == 1:
        return math.exp(-0.5 * k * a * alpha * t * t + log_x) * gamma_q(1.0 / abs(alpha), arg)
    sign, log_g = log_gamma_ratio((alpha - p + 1.0) / alpha, p / abs(alpha))
    log_pref = 0.5 * k * a * alpha * t * t - a * x0**alpha * t + p * log_x + log_g
    return sign * math.exp(log_pref) * tricomi_psi((alpha + 1.0) / alpha, (alpha + p) / alpha, arg)


def transport_mass_constant(params: PhysicalParams, t: float, x0: float, nodes: int = 64) -> float:
    """Mass predicted by the transport term alone, ``x0 - k int_0^t M_(1-alpha)``.

    The transport term changes the mass at rate ``-k M_gamma``; any further
    loss is attributed to shattering.
    """
    _check_time(t)
    if t == 0:
        return x0
    gamma = params.gamma
    if params.alpha > 0 and params.k * params.alpha * t >= x0**params.alpha:
        # the parent has reached zero size and taken everything with it
        return 0.0
    # s = t (1 - v^2) clusters nodes at the upper end, where the rate has a
    # fractional-power zero close to extinction
    gx, gw = gauss_legendre(nodes)
    v = 0.5 * (gx + 1.0)
    ts = t * (1.0 - v * v)
    rate = np.array([moments_constant_decay(params, gamma, s, x0) for s in ts])
    return x0 - params.k * t * float(np.sum(gw * v * rate))


# --- transformed interior solutions -----------------------------------------------------


def solve_constant_growth_interior(params: PhysicalParams, v0: GridFunction, xi, t: float,
                                   radius: float = 1.0):
    """Transformed solution away from the boundary.

    ``alpha > 0``: ``(I + t J+)^m v0``; ``alpha < 0``: ``(I - t J-)^(-m) v0``,
    extended by zero to ``xi < 0``.  Integer ``m`` uses the binomial
    expansion, other ``m`` the series kernel (``radius`` applies for
    ``alpha < 0``).  For growth with ``alpha > 0`` only ``xi >= 0`` is
    accepted; the rest needs ``solve_constant_growth_boundary``.
    """
    d = _constant(params)
    _check_time(t)
    xi = np.asarray(xi, dtype=float)
    direction = direction_of(d)
    if d.sg > 0 and np.any(xi < 0):
        raise DomainError("labels xi < 0 lie in the boundary region")
    m_int = d.integer_m
    if m_int is not None:
        sol = binomial_solution(v0, m_int, t, direction)
    else:
        kernel = build_kernel("exp_neg" if d.sg > 0 else "exp_pos", d.m)
        sol = lemma_solution(kernel, v0, t, direction, radius=radius)
    out = np.asarray(sol(xi), dtype=float)
    if d.sg < 0:
        out = np.where(xi > 0, out, 0.0)
    return out


# --- boundary construction --------------------------------------------------------------


class GaussPoly:
    """``p(zeta) exp(sign * zeta^2)`` with ``sign`` in ``{+1/2, -1/2}``.

    Closed under differentiation: ``(p exp(s zeta^2))' = (p' + 2 s zeta p) exp(s zeta^2)``.
    """

    def __init__(self, coeffs, gauss_sign: float):
        if gauss_sign not in (0.5, -0.5):
            raise DomainError("gauss_sign must be +1/2 or -1/2")
        self.coeffs = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
        if self.coeffs.size == 0:
            self.coeffs = np.zeros(1)
        self.gauss_sign = gauss_sign

    def derivative(self) -> "GaussPoly":
        shifted = P.polymulx(self.coeffs) * (2.0 * self.gauss_sign)
        return GaussPoly(P.polyadd(P.polyder(self.coeffs), shifted), self.gauss_sign)

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        return P.polyval(zeta, self.coeffs) * np.exp(self.gauss_sign * zeta * zeta)


def datum_moments(w0: Callable, support, m: int, cells: int = 400) -> tuple:
    """``mu_j = int_0^inf eta^j w0(eta) d eta`` for ``j < m`` by composite Gauss-Legendre."""
    lo, hi = float(max(support[0], 0.0)), float(support[1])
    if not hi > lo:
        return tuple(0.0 for _ in range(m))
    nodes, weights = cell_rule(np.linspace(lo, hi, cells + 1))
    vals = np.asarray(w0(nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise MomentDivergenceError("datum is not finite on its support")
    return tuple(float(np.sum(weights * vals * nodes**j)) for j in range(m))


def boundary_polynomial(m: int, moments) -> np.ndarray:
    """Coefficients ``C[r, i]`` of ``F(xi, t) = sum C[r, i] t^r xi^i``.

    ``F(xi, t) = sum_r C(m, r) t^r/(r - 1)! int_0^inf (eta - xi)^(r - 1) w0(eta) d eta``,
    expanded binomially in ``xi`` with the datum moments.
    """
    C = np.zeros((m + 1, m))
    for r in range(1, m + 1):
        base = comb(m, r, exact=True) / math.factorial(r - 1)
        for j in range(r):
            # (eta - xi)^(r-1) = sum_j C(r-1, j) eta^j (-xi)^(r-1-j)
            C[r, r - 1 - j] += base * comb(r - 1, j, exact=True) * (-1.0) ** (r - 1 - j) * moments[j]
    return C


@dataclass(frozen=True)
class BoundaryCorrection:
    """Initial extension ``psi`` on ``xi < 0`` fixing the boundary condition.

    With ``zeta = xi / sqrt(beta)``, ``psi(xi) = beta^(-m/2) d^m/d zeta^m
    [exp(-zeta^2/2) y(zeta)]`` where ``y`` solves ``He_m(d/d zeta) y =
    exp(zeta^2/2) g`` with ``y(0) = ... = y^(m-1)(0) = 0`` and
    ``g(zeta) = -beta^(m/2) F(sqrt(beta) zeta, -zeta/sqrt(beta))``.  Writing
    ``E_i(zeta) = exp(-zeta^2/2) int_0^zeta exp(lambda_i (zeta - sigma))
    exp(sigma^2/2) g(sigma) d sigma`` over the Hermite roots ``lambda_i``,
    ``exp(-zeta^2/2) y = sum c_i E_i`` and every derivative is a polynomial
    combination of the ``E_i`` and ``g``, because
    ``E_i' = (lambda_i - zeta) E_i + g``.
    """

    m: int
    beta: float
    moments_w0: tuple
    basis: HermiteBasis = field(repr=False)
    F_coeffs: np.ndarray = field(repr=False)
    g_coeffs: np.ndarray = field(repr=False)
    panel_nodes: int = 24

    # -- data polynomial

    def F(self, xi, t):
        """``(I + t J+)^m [w0](xi) - w0(xi)``, a polynomial for ``xi <= 0``."""
        xi = np.asarray(xi, dtype=float)
        t = np.asarray(t, dtype=float)
        total = np.zeros(np.broadcast(xi, t).shape)
        for r in range(1, self.m + 1):
            total = total + t**r * P.polyval(xi, self.F_coeffs[r])
        return total

    def g(self, zeta):
        return P.polyval(np.asarray(zeta, dtype=float), self.g_coeffs)

    def h(self) -> GaussPoly:
        """Right-hand side ``exp(zeta^2/2) g`` of the Hermite equation."""
        return GaussPoly(self.g_coeffs, 0.5)

    # -- closed algebra

    def _E(self, zeta):
        """``E_i(zeta)`` for all roots; shape ``zeta.shape + (m,)``."""
        zeta = np.asarray(zeta, dtype=float)
        flat = zeta.reshape(-1)
        lam = np.asarray(self.basis.roots)
        gx, gw = gauss_legendre(self.panel_nodes)
        out = np.zeros((flat.size, lam.size))
        for idx, zt in enumerate(flat):
            if zt == 0:
                continue
            panels = max(2, int(math.ceil(abs(zt) * 2)))
            edges = np.linspace(0.0, zt, panels + 1)
            lo, hi = edges[:-1, None], edges[1:, None]
            sig = (0.5 * (lo + hi) + 0.5 * (hi - lo) * gx).reshape(-1)
            wts = (0.5 * (hi - lo) * gw).reshape(-1)
            expo = (zt - sig)[:, None] * (lam[None, :] - 0.5 * (zt + sig)[:, None])
            out[idx] = np.sum(wts[:, None] * np.exp(expo) * self.g(sig)[:, None], axis=0)
        return out.reshape(zeta.shape + (lam.size,))

    def _derivative_table(self, order: int):
        """Polynomials ``(P_ij, Q_j)`` with ``d^j/dzeta^j sum c_i E_i = sum_i P_ij E_i + Q_j``."""
        lam = np.asarray(self.basis.roots)
        c = 1.0 / np.asarray(self.basis.derivative_at_roots)
        Ps = [[np.array([ci]) for ci in c]]
        Qs = [np.zeros(1)]
        for _ in range(order):
            prev = Ps[-1]
            nxt = []
            q = P.polyder(Qs[-1]) if Qs[-1].size > 1 else np.zeros(1)
            for i, poly in enumerate(prev):
                # P' + (lambda_i - zeta) P
                step = P.polyadd(P.polyder(poly) if poly.size > 1 else np.zeros(1),
                                 P.polymul(poly, [lam[i], -1.0]))
                nxt.append(step)
                q = P.polyadd(q, P.polymul(self.g_coeffs, poly))
            Ps.append(nxt)
            Qs.append(q)
        return Ps, Qs

    def gauss_derivatives(self, zeta, order: int):
        """``d^j/dzeta^j [exp(-zeta^2/2) y(zeta)]`` for ``j = 0..order``."""
        zeta = np.asarray(zeta, dtype=float)
        E = self._E(zeta)
        Ps, Qs = self._derivative_table(order)
        out = []
        for j in range(order + 1):
            val = P.polyval(zeta, Qs[j])
            for i, poly in enumerate(Ps[j]):
                val = val + P.polyval(zeta, poly) * E[..., i]
            out.append(val)
        return out

    def Z_derivatives(self, xi, order: int):
        """``d^j/dxi^j [exp(-xi^2/(2 beta)) y(xi/sqrt beta)]`` for ``j = 0..order``."""
        xi = np.asarray(xi, dtype=float)
        rb = math.sqrt(self.beta)
        vals = self.gauss_derivatives(xi / rb, order)
        return [v * rb ** (-j) for j, v in enumerate(vals)]

    def psi(self, xi):
        """Initial extension; identically zero for ``xi >= 0``."""
        xi = np.asarray(xi, dtype=float)
        neg = np.minimum(xi, 0.0)
        val = self.Z_derivatives(neg, self.m)[self.m]
        return np.where(xi < 0, val, 0.0)

    def w(self, xi, t):
        """Transformed solution for ``xi <= 0``: ``F(xi, t) + (I + t J)^m psi``.

        ``J f(xi) = int_xi^0 f`` and ``J^n psi = (-1)^n Z^(m - n)``.
        """
        xi = np.asarray(xi, dtype=float)
        if np.any(xi > 0):
            raise DomainError("boundary solution is defined for xi <= 0")
        t = float(t)
        Zd = self.Z_derivatives(xi, self.m)
        total = self.F(xi, t)
        for n in range(self.m + 1):
            total = total + comb(self.m, n, exact=True) * (-t) ** n * Zd[self.m - n]
        return total

    def boundary_residual(self, xi):
        """``w(xi, -xi/beta)``, which must vanish for ``xi <= 0``."""
        xi = np.asarray(xi, dtype=float)
        return np.array([self.w(np.array([v]), -v / self.beta)[0] for v in xi.reshape(-1)]).reshape(xi.shape)

    # -- checks on y itself

    def y_derivatives(self, zeta, order: int):
        """``y^(j)(zeta)`` from ``Y_i' = lambda_i Y_i + h``, ``Y_i = exp(zeta^2/2) E_i``."""
        zeta = np.asarray(zeta, dtype=float)
        lam = np.asarray(self.basis.roots)
        c = 1.0 / np.asarray(self.basis.derivative_at_roots)
        Y = self._E(zeta) * np.exp(0.5 * zeta * zeta)[..., None]
        hs = [self.h()]
        for _ in range(order):
            hs.append(hs[-1].derivative())
        hv = [hh(zeta) for hh in hs]
        out = []
        for j in range(order + 1):
            val = np.sum(c * lam**j * Y, axis=-1)
            for l in range(j):
                val = val + np.sum(c * lam ** (j - 1 - l)) * hv[l]
            out.append(val)
        return out

    def hermite_residual(self, zeta):
        """``He_m(d/dzeta) y - exp(zeta^2/2) g`` relative to the right-hand side scale."""
        zeta = np.asarray(zeta, dtype=float)
        ys = self.y_derivatives(zeta, self.m)
        coeffs = self.basis.coefficients
        lhs = sum(coeffs[j] * ys[j] for j in range(self.m + 1))
        rhs = self.h()(zeta)
        scale = np.maximum(np.abs(rhs), np.max(np.abs(rhs)) if rhs.size else 1.0)
        scale = np.where(scale > 0, scale, 1.0)
        return (lhs - rhs) / scale

    def initial_derivatives(self):
        """``y^(j)(0)`` for ``j < m``; all vanish by construction."""
        return [float(v) for v in self.y_derivatives(np.array(0.0), self.m - 1)]


def boundary_correction(m: int, beta: float, moments) -> BoundaryCorrection:
    """Build ``psi`` for integer ``m`` (1..10), ``beta > 0`` and datum moments ``mu_0..mu_(m-1)``."""
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= MAX_BOUNDARY_M:
        raise UnsupportedConfigurationError(f"boundary construction supports integer m in 1..{MAX_BOUNDARY_M}, got {m}")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    moments = tuple(float(v) for v in moments)
    if len(moments) < m:
        raise DomainError(f"need {m} moments, got {len(moments)}")
    if not all(math.isfinite(v) for v in moments[:m]):
        raise MomentDivergenceError("datum moments must be finite")
    m = int(m)
    F_coeffs = boundary_polynomial(m, moments)
    # g(zeta) = -beta^(m/2) F(sqrt(beta) zeta, -zeta/sqrt(beta)); collect powers of zeta
    rb = math.sqrt(beta)
    g = np.zeros(2 * m + 1)
    for r in range(1, m + 1):
        for i in range(m):
            if F_coeffs[r, i] != 0:
                g[r + i] += F_coeffs[r, i] * (-1.0 / rb) ** r * rb**i
    g *= -(beta ** (m / 2.0))
    return BoundaryCorrection(
        m=m,
        beta=float(beta),
        moments_w0=moments[:m],
        basis=hermite_basis(m),
        F_coeffs=F_coeffs,
        g_coeffs=g,
    )


def boundary_from_datum(params: PhysicalParams, u0: InitialCondition) -> BoundaryCorrection:
    """Boundary correction for a physical datum (growth, ``alpha > 0``, integer ``m``)."""
    d = _constant(params)
    if params.mode != GROWTH or d.sg < 0:
        raise UnsupportedConfigurationError("the boundary construction applies to growth with alpha > 0")
    if d.integer_m is None:
        raise UnsupportedConfigurationError(f"boundary construction needs integer m, got m = {d.m}")
    datum = pushforward_initial(u0, params)
    if datum.dirac is not None:
        mom = tuple(datum.dirac.weight * datum.dirac.location**j for j in range(d.integer_m))
    else:
        mom = datum_moments(datum.density, datum.support, d.integer_m)
    return boundary_correction(d.integer_m, d.beta, mom)


def solve_constant_growth_boundary(params: PhysicalParams, v0: GridFunction, xi, t: float,
                                   correction: Optional[BoundaryCorrection] = None):
    """Transformed growth solution (``alpha > 0``) on the whole line.

    ``xi >= 0``: ``(I + t J+)^m v0``.  ``xi < 0``: ``F(xi, t) + (I + t J)^m psi``.
    """
    d = _constant(params)
    _check_time(t)
    if params.mode != GROWTH or d.sg < 0:
        raise UnsupportedConfigurationError("boundary case needs growth with alpha > 0")
    if d.integer_m is None:
        raise UnsupportedConfigurationError(f"boundary construction needs integer m, got m = {d.m}")
    if correction is None:
        correction = boundary_correction(d.integer_m, d.beta,
                                         datum_moments(v0, (v0.grid[0], v0.grid[-1]), d.integer_m))
    xi = np.asarray(xi, dtype=float)
    out = np.zeros(xi.shape)
    pos = xi >= 0
    if np.any(pos):
        out[pos] = solve_constant_growth_interior(params, v0, xi[pos], t)
    if np.any(~pos):
        out[~pos] = correction.w(xi[~pos], t)
    return out


__all__ = [
    "subcase",
    "solve_constant",
    "solve_constant_decay",
    "decay_dirac",
    "solve_constant_decay_monodisperse",
    "transformed_monodisperse",
    "monodisperse_via_transform",
    "moments_constant_decay",
    "transport_mass_constant",
    "solve_constant_growth_interior",
    "GaussPoly",
    "datum_moments",
    "boundary_polynomial",
    "BoundaryCorrection",
    "boundary_correction",
    "boundary_from_datum",
    "solve_constant_growth_boundary",
]
