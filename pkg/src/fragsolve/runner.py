"""Table and report builders behind the command-line interface.

Every function here is a pure computation from a ``ScenarioConfig`` to rows
or a report dictionary; file handling lives in ``cli``.
"""
from __future__ import annotations

import math
import warnings
from typing import Optional

import numpy as np

from . import constant_case as cc
from . import linear_case as lc
from .config import ScenarioConfig
from .errors import ConfigError, FragsolveError, MomentDivergenceError, UnsupportedConfigurationError
from .model import DECAY, GROWTH, DensitySnapshot, Dirac
from .quadrature import cell_rule
from .oracle import (
    OracleConfig,
    advance_characteristic,
    integrate_pde,
    mass_weighted_l1,
    moment_of_snapshot,
    pde_residual,
)

SOLVE_COLUMNS = ("t", "x", "density", "dirac_location", "dirac_weight")
MOMENT_COLUMNS = ("t", "p", "closed_form", "quadrature", "abs_diff", "shattering_flag")

# relative margin below the transport-only mass that counts as shattering
SHATTER_MARGIN = 1e-8


# --- closed-form snapshots ----------------------------------------------------------------


def _upper_support(cfg: ScenarioConfig, t: float) -> float:
    hi = cfg.u0.support[1]
    end = advance_characteristic(np.array([hi]), t, cfg.params)[0]
    return float(end) if math.isfinite(end) else math.inf


def closed_form_snapshot(cfg: ScenarioConfig, t: float) -> DensitySnapshot:
    """Exact solution at time ``t`` for the configured scenario."""
    p, u0 = cfg.params, cfg.u0
    if cfg.solution == "spurious":
        return DensitySnapshot(t=t, dirac=None, regular=lambda x: lc.spurious_solution(p, u0, x, t),
                               support=(0.0, math.inf))
    if u0.is_dirac:
        x0 = u0.x0
        if t == 0:
            return DensitySnapshot(t=0.0, dirac=Dirac(x0, 1.0), regular=lambda x: np.zeros_like(x),
                                   support=(0.0, 0.0))
        if cfg.family == "linear":
            return lc.solve_linear_monodisperse(p, x0, t)
        if p.mode == DECAY:
            return cc.solve_constant_decay_monodisperse(p, x0, t)
        return cc.monodisperse_via_transform(p, x0, t)
    hi = _upper_support(cfg, t)
    if t == 0:
        return DensitySnapshot(t=0.0, dirac=None, regular=u0.density, support=u0.support)
    solver = lc.solve_linear if cfg.family == "linear" else cc.solve_constant
    return DensitySnapshot(t=t, dirac=None, regular=lambda x: solver(p, u0, x, t), support=(0.0, hi))


def solve_rows(cfg: ScenarioConfig) -> list:
    xs = cfg.x_eval.points()
    rows = []
    for t in cfg.times:
        snap = closed_form_snapshot(cfg, t)
        dens = snap.density(xs)
        loc = snap.dirac.location if snap.dirac is not None else math.nan
        wt = snap.dirac.weight if snap.dirac is not None else math.nan
        rows.extend((t, float(x), float(d), loc, wt) for x, d in zip(xs, dens))
    return rows


# --- moments -----------------------------------------------------------------------------


# cells and Gauss nodes per cell for superposing monodisperse moments
SUPERPOSE_CELLS = 16
SUPERPOSE_NODES = 16


def _superpose_rule(cfg: ScenarioConfig, t: float):
    """Nodes and weights in ``x0`` over the datum support.

    Monodisperse moments are smooth in ``x0`` apart from the extinction
    point of constant-rate decay with ``alpha > 0``, which becomes a break.
    """
    u0, p = cfg.u0, cfg.params
    lo, hi = u0.support
    breaks = {lo, hi}
    if cfg.family == "constant" and p.mode == DECAY and p.alpha > 0 and t > 0:
        kink = (p.k * p.alpha * t) ** (1.0 / p.alpha)
        if lo < kink < hi:
            breaks.add(kink)
    edges = sorted(breaks)
    cells = np.concatenate([np.linspace(a, b, SUPERPOSE_CELLS + 1)[:-1] for a, b in zip(edges[:-1], edges[1:])]
                           + [np.array([edges[-1]])])
    nodes, weights = cell_rule(cells, SUPERPOSE_NODES)
    nodes, weights = nodes.reshape(-1), weights.reshape(-1)
    weights = weights * u0.density(nodes)
    live = weights != 0
    return nodes[live], weights[live]


def _superpose(cfg: ScenarioConfig, fn, t: float) -> float:
    """``fn(x0)`` for a Dirac datum, ``int fn(y) u0(y) dy`` otherwise."""
    u0 = cfg.u0
    if u0.is_dirac:
        return float(fn(u0.x0))
    nodes, weights = _superpose_rule(cfg, t)
    return float(sum(w * fn(float(y)) for y, w in zip(nodes, weights)))


def closed_form_moment(cfg: ScenarioConfig, q: float, t: float) -> float:
    """Moment from the moment formulas, or ``nan`` when the family has none."""
    p = cfg.params
    if cfg.solution == "spurious":
        return lc.spurious_moment(p, cfg.u0, q, t)
    if cfg.family == "linear":
        return _superpose(cfg, lambda y: lc.moment_linear(p, q, t, y), t)
    if p.mode == DECAY:
        return _superpose(cfg, lambda y: cc.moments_constant_decay(p, q, t, y), t)
    return math.nan


def transport_only_mass(cfg: ScenarioConfig, t: float) -> float:
    """Mass predicted by the transport term alone, or ``nan`` when unavailable."""
    p = cfg.params
    if cfg.solution == "spurious":
        return lc.spurious_moment(p, cfg.u0, 1.0, 0.0) * math.exp(p.s * p.k * t)
    if cfg.family == "linear":
        return _superpose(cfg, lambda y: lc.transport_mass(p, t, y), t)
    if p.mode == DECAY:
        return _superpose(cfg, lambda y: cc.transport_mass_constant(p, t, y), t)
    return math.nan


def shattering_flag(mass: float, transport: float) -> Optional[bool]:
    if math.isnan(mass) or math.isnan(transport):
        return None
    return bool(mass < transport * (1.0 - SHATTER_MARGIN))


def moment_rows(cfg: ScenarioConfig) -> list:
    rows = []
    for t in cfg.times:
        snap = closed_form_snapshot(cfg, t)
        mass = math.nan
        try:
            mass = closed_form_moment(cfg, 1.0, t)
            if math.isnan(mass):
                mass = float(moment_of_snapshot(snap, 1.0))
        except MomentDivergenceError:
            pass
        flag = shattering_flag(mass, transport_only_mass(cfg, t))
        for q in cfg.moments:
            try:
                exact = closed_form_moment(cfg, q, t)
                quadv = float(moment_of_snapshot(snap, q))
            except MomentDivergenceError:
                exact = quadv = math.nan
            rows.append((t, q, exact, quadv, abs(exact - quadv), flag))
    return rows


# --- validation --------------------------------------------------------------------------


def _check(name, value, tolerance, passed=None, **extra):
    ok = bool(value <= tolerance) if passed is None else bool(passed)
    entry = {"name": name, "value": value, "tolerance": tolerance, "pass": ok}
    entry.update(extra)
    return entry


def _oracle_errors(cfg: ScenarioConfig, n: int, dt: float, times) -> dict:
    o = cfg.oracle
    try:
        ocfg = OracleConfig(o.x_min, o.x_max, n, dt, max(times), times=list(times))
    except ConfigError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], f"oracle.{exc.field}") from exc
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        run = integrate_pde(cfg.params, cfg.u0, ocfg)
    errors = {}
    for snap, grid, vals in zip(run, run.grids, run.values):
        ref = closed_form_snapshot(cfg, snap.t).density(grid)
        errors[snap.t] = mass_weighted_l1(grid, vals, ref)
    return errors, run


def validate_report(cfg: ScenarioConfig) -> dict:
    """Cross-checks of the closed forms for one scenario."""
    tol = cfg.tolerance
    checks = []
    report = {"scenario": cfg.name}
    p = cfg.params

    # moments: formula against quadrature of the snapshot
    diffs = []
    for t, q, exact, quadv, diff, _flag in moment_rows(cfg):
        if math.isnan(exact) or math.isnan(quadv):
            continue
        rel = diff / max(abs(exact), 1e-300)
        diffs.append({"t": t, "p": q, "abs_diff": diff, "rel_diff": rel})
        checks.append(_check(f"moment p={q:g} t={t:g}", rel, tol.moment))
    report["moment_diffs"] = diffs

    if cfg.solution == "spurious":
        xs = np.linspace(0.3, 4.0, 20)
        res, anomalies = {}, {}
        m0 = lc.spurious_moment(p, cfg.u0, 1.0, 0.0)
        for t in cfg.times:
            if t <= 0.05:
                continue
            r = float(np.max(pde_residual(p, lambda x, s: lc.spurious_solution(p, cfg.u0, x, s), xs, t)))
            res[t] = r
            checks.append(_check(f"pde residual t={t:g}", r, tol.residual))
            dev = abs(lc.spurious_moment(p, cfg.u0, 1.0, t) / (m0 * math.exp(p.s * p.k * t)) - 1.0)
            anomalies[t] = dev
        report["pde_residual"] = res
        report["mass_deviation"] = anomalies
        report["mass_anomaly"] = any(v > tol.mass_anomaly for v in anomalies.values())
    elif not cfg.u0.is_dirac:
        times = [t for t in cfg.times if t > 0]
        if times:
            o = cfg.oracle
            coarse, _ = _oracle_errors(cfg, o.n, o.dt, times)
            fine, run = _oracle_errors(cfg, 2 * o.n, o.dt / 2, times)
            report["l1"] = {str(t): coarse[t] for t in times}
            report["l1_refined"] = {str(t): fine[t] for t in times}
            report["tail_outflow"] = run.outflow[-1]
            for t in times:
                checks.append(_check(f"l1 t={t:g}", coarse[t], tol.l1))
            t_end = times[-1]
            if fine[t_end] > 0 and coarse[t_end] > 0:
                order = math.log2(coarse[t_end] / fine[t_end])
                report["convergence_order"] = order
                checks.append(_check("convergence order", abs(order - 2.0), tol.order, order=order))

    if cfg.family == "constant" and p.mode == GROWTH and p.alpha > 0:
        try:
            corr = cc.boundary_from_datum(p, cfg.u0)
        except UnsupportedConfigurationError as exc:
            report["boundary"] = str(exc)
        else:
            xi = np.linspace(-5.0, 0.0, 51)
            r = float(np.max(np.abs(corr.boundary_residual(xi))))
            report["boundary_residual"] = r
            checks.append(_check("boundary residual", r, tol.residual))

    report["checks"] = checks
    report["pass"] = all(c["pass"] for c in checks)
    return report


__all__ = [
    "SOLVE_COLUMNS",
    "MOMENT_COLUMNS",
    "closed_form_snapshot",
    "solve_rows",
    "closed_form_moment",
    "transport_only_mass",
    "shattering_flag",
    "moment_rows",
    "validate_report",
    "FragsolveError",
]
