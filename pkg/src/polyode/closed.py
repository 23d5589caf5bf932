"""Closed solutions ``y(t0) = y(T)`` as fixed points of the end map, plus isolation tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .core import BlowUp, DomainError, PolyODE, Trajectory, integrate, reflect, solve_dense

__all__ = [
    "BracketInvalid", "BlowUpInsideBracket", "NoConvergence", "Isolation",
    "ClosedSolutionResult", "end_map", "find_closed", "find_closed_nonpositive",
    "isolation_exponent", "scan_closed",
]

MAX_ITER = 200
DEFAULT_TOL = 1e-10
ISOLATION_EPS = 1e-9
CONTINUUM_NOTE = "continuum suspected"


class BracketInvalid(ValueError):
    """``g = end_map - id`` does not have the required signs at the bracket ends."""


class BlowUpInsideBracket(RuntimeError):
    """A probed initial value escapes before the horizon."""

    def __init__(self, gamma: float, status):
        where = getattr(status, "t_escape", getattr(status, "t", float("nan")))
        super().__init__(f"solution from gamma={gamma:.12g} fails at t={where:.6g}")
        self.gamma = gamma
        self.status = status


class NoConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class Isolation:
    """``Yes(E)`` when ``|E|`` exceeds ``ISOLATION_EPS`` (a simple fixed point), else ``Unknown``."""

    certified: bool
    exponent: Optional[float]

    def __str__(self) -> str:
        if self.certified:
            return f"Yes({self.exponent:.6g})"
        return "Unknown"


@dataclass
class ClosedSolutionResult:
    gamma_star: float
    residual: float
    trajectory: Trajectory = field(repr=False)
    isolated: Isolation
    bracket_used: tuple
    note: str = ""

    def to_dict(self, embed_trajectory: bool = False) -> dict:
        out = {
            "gamma_star": self.gamma_star,
            "residual": self.residual,
            "isolated": str(self.isolated),
            "isolation_exponent": self.isolated.exponent,
            "bracket_used": [float(b) for b in self.bracket_used],
            "note": self.note,
        }
        if embed_trajectory:
            out["trajectory"] = [[float(t), float(y)] for t, y in self.trajectory.samples]
        return out


def _int_tol(tol: float) -> float:
    return min(1e-12, tol * 1e-2)


def end_map(ode: PolyODE, gamma: float, tol: float = 1e-12) -> Union[float, BlowUp, DomainError]:
    """``y(T)`` for the solution with ``y(t0) = gamma``, or the failure status."""
    traj = integrate(ode, ode.t0, float(gamma), ode.horizon, tol)
    if traj.reached_end:
        return traj.y_end
    return traj.status


def _g(ode, gamma, int_tol):
    p = end_map(ode, gamma, int_tol)
    if not isinstance(p, float):
        raise BlowUpInsideBracket(gamma, p)
    return p - gamma


def isolation_exponent(ode: PolyODE, closed: Trajectory, tol: float = 1e-12) -> float:
    """``E = int_t0^T sum_{k>=1} k a_k(t) y*(t)^(k-1) dt`` along the closed trajectory.

    The end map has slope ``exp(-E)`` at the closed solution, so ``E != 0``
    means the fixed point is simple.
    """
    ys = closed._dense.scalar
    fs = ode._scalar

    def f(s, _z):
        y = ys(s)
        acc, p = 0.0, 1.0
        for k in range(1, len(fs)):
            acc += k * fs[k](s) * p
            p *= y
        return np.array([acc])

    prof = solve_dense(f, float(closed.t[0]), np.zeros(1), float(closed.t[-1]), tol)
    return float(prof.y[-1, 0])


def _result(ode, gamma, lo, hi, tol, int_tol, note=""):
    traj = integrate(ode, ode.t0, gamma, ode.horizon, int_tol)
    if not traj.reached_end:
        raise BlowUpInsideBracket(gamma, traj.status)
    e = isolation_exponent(ode, traj)
    iso = Isolation(abs(e) > ISOLATION_EPS, e)
    return ClosedSolutionResult(float(gamma), abs(traj.y_end - gamma), traj, iso,
                                (float(lo), float(hi)), note)


def _root(ode, lo, hi, g_lo, g_hi, tol, int_tol):
    """Safeguarded secant on a sign change of ``g``; returns ``gamma``."""
    a, b, fa, fb = lo, hi, g_lo, g_hi
    x = a
    for _ in range(MAX_ITER):
        if fb != fa:
            x = b - fb * (b - a) / (fb - fa)
        mid = 0.5 * (a + b)
        if not (min(a, b) < x < max(a, b)) or abs(x - mid) > 0.45 * abs(b - a):
            x = mid
        fx = _g(ode, x, int_tol)
        if abs(fx) <= tol:
            return x
        if (fx > 0) == (fa > 0):
            a, fa = x, fx
        else:
            b, fb = x, fx
        if abs(b - a) <= 4 * np.finfo(float).eps * max(1.0, abs(a), abs(b)):
            break
    best, fbest = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    if abs(fbest) <= tol:
        return best
    raise NoConvergence(f"no fixed point within tolerance {tol:g} after {MAX_ITER} iterations "
                        f"(best |g| = {abs(fbest):.3g} at {best:.12g})")


def find_closed(ode: PolyODE, bracket: tuple, tol: float = DEFAULT_TOL) -> ClosedSolutionResult:
    """Closed solution with initial value in ``bracket = (lo, hi)``.

    Requires ``g(lo) >= -tol`` and ``g(hi) <= tol`` for ``g(gamma) = y(T; gamma) - gamma``.
    When ``g`` vanishes at ``lo`` (within ``tol``) ``lo`` is returned; if it
    also vanishes at ``hi`` and the midpoint the result notes a suspected
    continuum of closed solutions.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo <= hi:
        raise BracketInvalid(f"bracket ({lo}, {hi}) is reversed")
    int_tol = _int_tol(tol)
    g_lo = _g(ode, lo, int_tol)
    g_hi = _g(ode, hi, int_tol) if hi > lo else g_lo
    if g_lo < -tol or g_hi > tol:
        raise BracketInvalid(f"need g(lo) >= 0 >= g(hi); got g({lo:.6g}) = {g_lo:.3g}, "
                             f"g({hi:.6g}) = {g_hi:.3g}")
    if abs(g_lo) <= tol:
        note = ""
        if abs(g_hi) <= tol and abs(_g(ode, 0.5 * (lo + hi), int_tol)) <= tol:
            note = CONTINUUM_NOTE
        return _result(ode, lo, lo, hi, tol, int_tol, note)
    if abs(g_hi) <= tol:
        return _result(ode, hi, lo, hi, tol, int_tol)
    gamma = _root(ode, lo, hi, g_lo, g_hi, tol, int_tol)
    return _result(ode, gamma, lo, hi, tol, int_tol)


def find_closed_nonpositive(ode: PolyODE, bracket: tuple,
                            tol: float = DEFAULT_TOL) -> ClosedSolutionResult:
    """Closed solution via the reflected equation ``z(s) = -y(-s)`` on ``[-T, -t0]``.

    ``bracket`` applies to ``z``; the result is mapped back to ``y`` (so its
    initial value lies in ``[-hi, -lo]``).  The residual is that of the
    reflected problem; the isolation exponent is recomputed along ``y``.
    """
    r = reflect(ode)
    res = find_closed(r, bracket, tol)
    traj = res.trajectory.reversed_reflection()
    e = isolation_exponent(ode, traj)
    iso = Isolation(abs(e) > ISOLATION_EPS, e)
    return ClosedSolutionResult(-res.gamma_star, res.residual, traj, iso, res.bracket_used,
                                (res.note + "; " if res.note else "") + "reflected equation")


def _escape_edge(ode, ok, bad, int_tol, iters=60):
    """Last initial value that reaches the horizon between ``ok`` and ``bad``."""
    g_ok = _g(ode, ok, int_tol)
    for _ in range(iters):
        mid = 0.5 * (ok + bad)
        if mid in (ok, bad):
            break
        v = end_map(ode, mid, int_tol)
        if isinstance(v, float):
            ok, g_ok = mid, v - mid
        else:
            bad = mid
    return ok, g_ok


def _refine_escape_edges(ode, probes, gs, int_tol):
    """Insert a probe at each edge of a blow-up region.

    Unstable closed solutions sit next to the set of escaping initial values,
    where ``g`` grows without bound; probing at the edge exposes the sign change.
    """
    out_p, out_g = [probes[0]], [gs[0]]
    for p, g in zip(probes[1:], gs[1:]):
        q, h = out_p[-1], out_g[-1]
        if (h is None) != (g is None):
            ok, bad = (q, p) if g is None else (p, q)
            edge, g_edge = _escape_edge(ode, ok, bad, int_tol)
            if edge != ok:
                out_p.append(edge)
                out_g.append(g_edge)
        out_p.append(p)
        out_g.append(g)
    order = np.argsort(out_p, kind="stable")
    return [out_p[i] for i in order], [out_g[i] for i in order]


def scan_closed(ode: PolyODE, span: tuple, n_probe: int = 64,
                tol: float = DEFAULT_TOL) -> list[ClosedSolutionResult]:
    """All closed solutions found between sign changes of ``g`` on ``n_probe`` points.

    Probes that blow up split the range; fixed points of either stability
    are located, repelling ones through the reflected equation.  Results closer than ``10 tol`` are merged and returned in
    ascending order.  When ``g`` vanishes at every probe a single result at
    ``lo`` carries the continuum note.
    """
    lo, hi = float(span[0]), float(span[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError("scan range must be finite with lo < hi")
    if n_probe < 2:
        raise ValueError("need at least two probes")
    int_tol = _int_tol(tol)
    probes = np.linspace(lo, hi, n_probe)
    gs: list[Optional[float]] = []
    for p in probes:
        v = end_map(ode, float(p), int_tol)
        gs.append(v - float(p) if isinstance(v, float) else None)
    defined = [g for g in gs if g is not None]
    if defined and len(defined) == len(gs) and all(abs(g) <= tol for g in defined):
        return [_result(ode, lo, lo, hi, tol, int_tol, CONTINUUM_NOTE)]
    probes, gs = _refine_escape_edges(ode, list(map(float, probes)), gs, int_tol)
    found: list[ClosedSolutionResult] = []
    for i, (p, g) in enumerate(zip(probes, gs)):
        if g is None:
            continue
        if abs(g) <= tol:
            found.append(_result(ode, float(p), float(p), float(p), tol, int_tol))
            continue
        if i + 1 < len(gs) and gs[i + 1] is not None and abs(gs[i + 1]) > tol \
                and (g > 0) != (gs[i + 1] > 0):
            a, b = float(p), float(probes[i + 1])
            if g < 0:
                # repelling: the forward map amplifies integration error by its
                # slope, so solve the backward (reflected) problem instead
                try:
                    res = find_closed_nonpositive(ode, (-b, -a), tol)
                    found.append(replace(res, bracket_used=(a, b)))
                    continue
                except (BracketInvalid, BlowUpInsideBracket, NoConvergence):
                    pass
            try:
                gamma = _root(ode, a, b, g, gs[i + 1], tol, int_tol)
            except (BlowUpInsideBracket, NoConvergence):
                continue
            found.append(_result(ode, gamma, a, b, tol, int_tol))
    found.sort(key=lambda r: r.gamma_star)
    merged: list[ClosedSolutionResult] = []
    for r in found:
        if merged and abs(r.gamma_star - merged[-1].gamma_star) <= 10 * tol:
            continue
        merged.append(r)
    return merged
