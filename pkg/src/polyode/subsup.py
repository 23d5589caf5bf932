"""Explicit sub and super solution candidates and a checker for their inequalities.

A sub solution satisfies ``eta' + sum a_k eta^k >= 0`` and a super solution
``zeta' + sum a_k zeta^k <= 0``.  The builders below verify their hypotheses
on sampling grids before returning a candidate.

Most candidates share the linear form ``x(t) = offset + exp(-E(t)) [c - G(t)]``
with ``E' = kernel`` and ``G' = exp(E) a_0``, which solves
``x' = -kernel (x - offset) - a_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional

import numpy as np

from . import conditions as cond
from .conditions import Condition, DegenerateDenominator, HypothesisViolated
from .core import PolyODE, exp_weighted_profile, sample_extremum, sign_flipped
from .expr import ExprAST, Neg, Num, compile_expr, parse_coefficient

__all__ = [
    "CandidateFunction", "Margin", "build_m_star", "build_eta_star", "build_eta_c",
    "build_theta", "build_zeta_star", "eta_gamma", "zeta_gamma", "verify_differential_inequality", "user_candidate",
    "parse_split", "HypothesisViolated", "DegenerateDenominator",
    "SUB", "SUPER", "PLUS", "MINUS",
]

SUB = "Sub"
SUPER = "Super"
PLUS = "Plus"
MINUS = "Minus"

SUP_GRID = 4096
SAFETY = 1e-9
SPLIT_TOL = 1e-9
RESIDUAL_TOL = 1e-8

Split = Mapping[int, tuple[ExprAST, ExprAST]]


@dataclass(frozen=True)
class CandidateFunction:
    """A candidate ``eta`` (``Sub``) or ``zeta`` (``Super``) on ``interval``.

    ``derivative`` comes from the candidate's defining equation when known;
    on glued pieces beyond the gluing point it drops the nonnegative jump
    terms of the running maxima, which keeps residual margins conservative.
    """

    kind: str
    direction: str
    params: dict
    interval: tuple[float, float]
    fn: Callable = field(repr=False)
    dfn: Optional[Callable] = field(default=None, repr=False)
    checks: tuple = field(default=(), repr=False, compare=False)
    sfn: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __call__(self, t):
        if np.ndim(t) == 0:
            if self.sfn is not None:
                return float(self.sfn(float(t)))
            return float(self.fn(np.array([float(t)]))[0])
        return self.fn(np.asarray(t, dtype=float))

    def derivative(self, t):
        """Derivative from the defining equation, else central differences."""
        scalar = np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        if self.dfn is not None:
            out = self.dfn(ts)
        else:
            lo, hi = self.interval
            h = (hi - lo) / (10 * cond.DEFAULT_GRID)
            a = np.clip(ts - h, lo, hi)
            b = np.clip(ts + h, lo, hi)
            out = (self.fn(b) - self.fn(a)) / (b - a)
        return float(out[0]) if scalar else out


@dataclass(frozen=True)
class Margin:
    margin: float
    witness_t: float

    @property
    def passed(self) -> bool:
        return self.margin >= -RESIDUAL_TOL


def user_candidate(fn: Callable, direction: str, interval: tuple[float, float],
                   dfn: Optional[Callable] = None) -> CandidateFunction:
    """Wrap a vectorized function as a ``UserSupplied`` candidate."""
    return CandidateFunction("UserSupplied", direction, {}, tuple(map(float, interval)), fn, dfn)


def parse_split(split: Mapping) -> dict[int, tuple[ExprAST, ExprAST]]:
    """Accept ``{k: (c_k, d_k)}`` with strings or ASTs."""
    out = {}
    for k, (c, d) in split.items():
        out[int(k)] = (parse_coefficient(c) if isinstance(c, str) else c,
                       parse_coefficient(d) if isinstance(d, str) else d)
    return out


# -- helpers ---------------------------------------------------------------

def _poly_grid(a: np.ndarray, y: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(y)
    for k in range(a.shape[0] - 1, -1, -1):
        acc = acc * y + a[k]
    return acc


def _interval(ode: PolyODE, T: Optional[float]) -> float:
    T = ode.horizon if T is None else float(T)
    if not ode.t0 < T <= ode.horizon:
        raise ValueError(f"T={T} must lie in ({ode.t0}, {ode.horizon}]")
    return T


def _require(checks: list, c: Condition, degenerate: bool = False,
             tol: float = cond.DEFAULT_TOL) -> Condition:
    checks.append(c)
    if not c.passed(tol):
        exc = (DegenerateDenominator if degenerate else HypothesisViolated)(c)
        exc.checks = list(checks)
        raise exc
    return c


def _running(values: np.ndarray, floor: float) -> np.ndarray:
    return np.maximum(np.maximum.accumulate(values), floor)


def _glue(ts_tail: np.ndarray, tail: np.ndarray, T: float, const: float):
    """Piecewise function: ``const`` up to ``T``, interpolated running values after."""
    def f(t):
        out = np.full(np.shape(t), const, dtype=float)
        m = t > T
        if np.any(m):
            out[m] = np.interp(t[m], ts_tail, tail)
        return out
    return f


class _Linear:
    """``E, G`` profile for kernel ``k`` and weight ``a_0`` over the whole horizon."""

    def __init__(self, ode: PolyODE, kernel: Callable[[float], float], tol: float = 1e-11):
        self.ode = ode
        self.prof = exp_weighted_profile(kernel, ode.coeff_fn(0), ode.t0, ode.horizon, tol)

    def E(self, t):
        return self.prof(t)[..., 0]

    def G(self, t):
        return self.prof(t)[..., 1]

    def extremum(self, fn, lo, hi, mode):
        return sample_extremum(fn, lo, hi, mode, n=SUP_GRID)


def _alpha_scalar(ode: PolyODE) -> Callable[[float], float]:
    fs = ode._scalar

    def alpha(t):
        return sum(abs(f(t)) for f in fs[2:]) - fs[1](t)
    return alpha


def _alpha_grid(ode: PolyODE, ts: np.ndarray) -> np.ndarray:
    a = ode.coeff_grid(ts)
    return np.abs(a[2:]).sum(axis=0) - a[1]


# -- candidate builders ----------------------------------------------------

def build_m_star(ode: PolyODE, j: int, T: Optional[float] = None,
                 gamma: float = 0.0) -> CandidateFunction:
    """Constant bound ``M_{T,j} = max{1, max sum_{k<j}|a_k| / sum_{k>=j} a_k}`` (plus ``gamma``).

    Beyond ``T`` the constant becomes the running maximum ``M_{t,j}``.
    Requires ``a_k >= 0`` for ``k >= j`` and a nonvanishing denominator.
    """
    n = ode.n
    if not 2 <= j <= n:
        raise ValueError(f"j={j} must lie in [2, {n}]")
    T = _interval(ode, T)
    lo, hi = ode.t0, ode.horizon
    checks: list = []
    for k in range(j, n + 1):
        f = ode._vector[k]
        _require(checks, cond.pointwise(f"a_{k}>=0", f, lo, hi))

    def den(ts):
        return ode.coeff_grid(ts)[j:].sum(axis=0)

    def ratio(ts):
        a = ode.coeff_grid(ts)
        return np.abs(a[:j]).sum(axis=0) / a[j:].sum(axis=0)

    _require(checks, cond.pointwise(f"sum_{{k>={j}}} a_k>0", den, lo, hi, strict=True), degenerate=True)
    r_max, r_t = sample_extremum(ratio, lo, T, "max", n=SUP_GRID, inflate=SAFETY)
    m_T = max(1.0, r_max)
    const = m_T + gamma
    ts_tail = np.linspace(T, hi, SUP_GRID)
    tail = _running(ratio(ts_tail), m_T) + gamma
    fn = _glue(ts_tail, tail, T, const)
    params = {"j": j, "T": T, "gamma": float(gamma), "M": m_T, "argmax_t": r_t}
    return CandidateFunction("MStar", SUB, params, (lo, hi), fn,
                             lambda t: np.zeros(np.shape(t)), tuple(checks))


def _check_split(ode: PolyODE, split: Split, lo: float, hi: float, checks: list):
    """Consistency ``a_k = a_n c_k + d_k`` for ``2 <= k <= n - 1``; returns vector c, d."""
    n = ode.n
    cs, ds = {}, {}
    for k in range(2, n):
        c, d = split.get(k, (Num(0.0), Num(0.0)))
        cs[k] = compile_expr(c, True)
        ds[k] = compile_expr(d, True)
    extra = [k for k in split if not 2 <= k <= n - 1]
    if extra:
        raise ValueError(f"split given for k outside 2..{n - 1}: {extra}")

    def mismatch(ts):
        a = ode.coeff_grid(ts)
        worst = np.zeros(len(ts))
        for k in range(2, n):
            diff = np.abs(a[k] - (a[n] * cs[k](ts) + ds[k](ts)))
            worst = np.maximum(worst, diff - SPLIT_TOL * (1 + np.abs(a[k])))
        return -worst

    _require(checks, cond.pointwise("(2) a_k=a_n c_k+d_k", mismatch, lo, hi))
    return cs, ds


def _n_of(ode: PolyODE, cs) -> Callable[[np.ndarray], np.ndarray]:
    def total(ts):
        out = np.zeros(len(ts))
        for f in cs.values():
            out += np.abs(f(ts))
        return out
    return total


def _eta_glued(ode: PolyODE, T: float, n_fn, lin: _Linear, kind: str, direction: str,
               params: dict, sign: float = 1.0) -> CandidateFunction:
    """``N + exp(-A)[c - J]`` with running ``N`` and ``c`` beyond ``T``; ``sign`` negates."""
    lo, hi = ode.t0, ode.horizon
    n_max, _ = sample_extremum(n_fn, lo, T, "max", n=SUP_GRID, inflate=SAFETY)
    n_T = max(1.0, n_max)
    c_T, c_t = sample_extremum(lin.G, lo, T, "max", n=SUP_GRID, inflate=SAFETY)
    ts_tail = np.linspace(T, hi, SUP_GRID)
    n_tail = _running(n_fn(ts_tail), n_T)
    c_tail = _running(lin.G(ts_tail), c_T)
    n_of = _glue(ts_tail, n_tail, T, n_T)
    c_of = _glue(ts_tail, c_tail, T, c_T)
    a1 = ode._vector[1]
    a0 = ode._vector[0]

    def base(t):
        z = lin.prof(t)
        return n_of(t) + np.exp(-z[:, 0]) * (c_of(t) - z[:, 1])

    def dbase(t):
        return -a1(t) * (base(t) - n_of(t)) - a0(t)

    params = dict(params, T=T, N_T=n_T, c_T=c_T, argmax_c=c_t)
    return CandidateFunction(kind, direction, params, (lo, hi),
                             lambda t: sign * base(t), lambda t: sign * dbase(t))


def build_eta_star(ode: PolyODE, T: Optional[float] = None, split: Optional[Split] = None,
                   tol: float = 1e-11) -> CandidateFunction:
    """Glued sub solution ``eta*_T`` from a split ``a_k = a_n c_k + d_k``.

    Checks ``a_n >= 0``, the split consistency and ``sum d_k u^k >= 0`` for
    sampled ``u >= N_T``.  The returned candidate is then verified against the
    inequality itself; the construction is only guaranteed when the linear
    part does not fight the offset ``N_T`` (``a_1 >= 0`` is enough), so a
    failure there raises with label ``residual``.
    """
    T = _interval(ode, T)
    split = parse_split(split or {})
    lo, hi = ode.t0, ode.horizon
    n = ode.n
    if n < 2:
        raise ValueError("degree must be at least 2")
    checks: list = []
    _require(checks, cond.pointwise(f"(1) a_{n}>=0", ode._vector[n], lo, hi))
    cs, ds = _check_split(ode, split, lo, hi, checks)
    n_fn = _n_of(ode, cs)
    n_max, _ = sample_extremum(n_fn, lo, T, "max", n=SUP_GRID, inflate=SAFETY)
    n_T = max(1.0, n_max)

    def dpoly(ts):
        rows = [np.zeros(len(ts)) for _ in range(n)]
        for k in range(2, n):
            rows[k] = ds[k](ts)
        return np.stack(rows)

    _require(checks, cond.u_polynomial("(3) sum d_k u^k>=0", dpoly, n_T, lo, hi))
    lin = _Linear(ode, ode.coeff_fn(1), tol)
    cand = _eta_glued(ode, T, n_fn, lin, "EtaStar", SUB, {})
    _post_verify(cand, ode, checks)
    return replace(cand, checks=tuple(checks))


def _post_verify(cand: CandidateFunction, ode: PolyODE, checks: list):
    m = verify_differential_inequality(cand, ode)
    _require(checks, Condition("residual", m.margin, m.witness_t,
                               note="inequality of the built candidate"), tol=RESIDUAL_TOL)


def build_eta_c(ode: PolyODE, c: Optional[float] = None, T: Optional[float] = None,
                tol: float = 1e-11) -> CandidateFunction:
    """``eta_c = exp(-A)[c - J]`` with ``A = int a_1`` and ``J = int exp(A) a_0``.

    ``c`` defaults to the smallest admissible value ``max J`` (plus a safety
    margin).  Requires ``a_2 > 0`` and ``sum_{k>=3} |a_k| eta_c^(k-2) <= a_2``.
    """
    T = _interval(ode, T)
    lo = ode.t0
    if ode.n < 2:
        raise ValueError("degree must be at least 2")
    checks: list = []
    lin = _Linear(ode, ode.coeff_fn(1), tol)
    j_max, j_t = sample_extremum(lin.G, lo, T, "max", n=SUP_GRID)
    if c is None:
        c = j_max + SAFETY
    c = float(c)
    _require(checks, Condition("(5) c>=max J", c - j_max, j_t))
    a0, a1 = ode._vector[0], ode._vector[1]

    def fn(t):
        z = lin.prof(t)
        return np.exp(-z[:, 0]) * (c - z[:, 1])

    def sfn(t):
        e, j = lin.prof.scalar(t)
        return math.exp(-e) * (c - j)

    def dfn(t):
        return -a1(t) * fn(t) - a0(t)

    _require(checks, cond.pointwise("(4) a_2>0", ode._vector[2], lo, T, strict=True))

    def cond5(ts):
        a = ode.coeff_grid(ts)
        eta = fn(ts)
        acc = np.zeros(len(ts))
        for k in range(3, ode.n + 1):
            acc += np.abs(a[k]) * eta ** (k - 2)
        return a[2] - acc

    _require(checks, cond.pointwise("(5) sum |a_k| eta_c^(k-2)<=a_2", cond5, lo, T))
    _require(checks, cond.pointwise("eta_c>=0", fn, lo, T))
    return CandidateFunction("EtaC", SUB, {"c": c, "T": T, "max_J": j_max}, (lo, T), fn, dfn,
                             tuple(checks), sfn)


def build_theta(ode: PolyODE, c: Optional[float] = None, sign: str = PLUS,
                T: Optional[float] = None, tol: float = 1e-11) -> CandidateFunction:
    """Linear bound built on ``alpha = sum_{k>=2} |a_k| - a_1``.

    ``Plus``: ``theta_c = exp(A)[c - K]`` with ``A = int alpha`` and
    ``K = int exp(-A) a_0``, needs ``c >= max K`` and ``theta_c <= 1``; a sub
    solution.  ``Minus``: ``-exp(A)[c + K]``, needs ``c >= -min K`` and
    ``|theta| <= 1``; a super solution.  Both solve ``theta' - alpha theta + a_0 = 0``.
    """
    T = _interval(ode, T)
    lo = ode.t0
    checks: list = []
    lin = _Linear(ode, lambda s, _al=_alpha_scalar(ode): -_al(s), tol)
    if sign == PLUS:
        k_ext, k_t = sample_extremum(lin.G, lo, T, "max", n=SUP_GRID)
        bound = k_ext
    elif sign == MINUS:
        k_ext, k_t = sample_extremum(lin.G, lo, T, "min", n=SUP_GRID)
        bound = -k_ext
    else:
        raise ValueError(f"sign must be {PLUS!r} or {MINUS!r}")
    if c is None:
        c = bound + SAFETY
    c = float(c)
    _require(checks, Condition("c bound", c - bound, k_t))
    s = 1.0 if sign == PLUS else -1.0
    a0 = ode._vector[0]

    def fn(t):
        z = lin.prof(t)
        return s * np.exp(-z[:, 0]) * (c - s * z[:, 1])

    def sfn(t):
        e, k = lin.prof.scalar(t)
        return s * math.exp(-e) * (c - s * k)

    def dfn(t):
        return _alpha_grid(ode, t) * fn(t) - a0(t)

    if sign == PLUS:
        _require(checks, cond.pointwise("theta_c<=1", lambda t: 1.0 - fn(t), lo, T))
        _require(checks, cond.pointwise("theta_c>=0", fn, lo, T))
        kind, direction = "ThetaC", SUB
    else:
        _require(checks, cond.pointwise("|theta_c^-|<=1", lambda t: 1.0 - np.abs(fn(t)), lo, T))
        kind, direction = "ThetaCMinus", SUPER
    return CandidateFunction(kind, direction, {"c": c, "T": T, "sign": sign}, (lo, T), fn, dfn,
                             tuple(checks), sfn)


def build_zeta_star(ode: PolyODE, T: Optional[float] = None, split: Optional[Split] = None,
                    tol: float = 1e-11) -> CandidateFunction:
    """Glued super solution ``zeta*_T = -eta~*_T`` of the sign-flipped equation.

    Needs the conditions of :func:`build_eta_star` for both the equation and
    its sign flip ``a~_k = (-1)^(k+1) a_k``; the latter's condition (3) is
    ``sum (-1)^(k+1) d_k u^k >= 0``.  ``n`` must be odd.
    """
    T = _interval(ode, T)
    split = parse_split(split or {})
    n = ode.n
    lo = ode.t0
    eta = build_eta_star(ode, T, split, tol)
    checks: list = list(eta.checks)
    flipped_split = {k: (c if k % 2 else Neg(c), d if k % 2 else Neg(d))
                     for k, (c, d) in split.items()}
    flipped = sign_flipped(ode)
    cs, ds = {}, {}
    for k in range(2, n):
        c, d = flipped_split.get(k, (Num(0.0), Num(0.0)))
        cs[k], ds[k] = compile_expr(c, True), compile_expr(d, True)
    n_T = eta.params["N_T"]

    def kpoly(ts):
        rows = [np.zeros(len(ts)) for _ in range(n)]
        for k in range(2, n):
            rows[k] = ds[k](ts)
        return np.stack(rows)

    _require(checks, cond.u_polynomial("(K) sum (-1)^(k+1) d_k u^k>=0", kpoly, n_T, lo, ode.horizon))
    _require(checks, cond.parity("(L) n odd", n))
    lin = _Linear(flipped, flipped.coeff_fn(1), tol)
    zeta = _eta_glued(flipped, T, _n_of(flipped, cs), lin, "ZetaStar", SUPER, {}, sign=-1.0)
    gap = eta(lo) - zeta(lo)
    _require(checks, Condition("zeta*(t0)<=eta*(t0)", gap, lo))
    zeta = replace(zeta, params=dict(zeta.params, eta_t0=eta(lo)))
    _post_verify(zeta, ode, checks)
    return replace(zeta, checks=tuple(checks))


def eta_gamma(ode: PolyODE, gamma: float, T: Optional[float] = None,
              tol: float = 1e-11) -> CandidateFunction:
    """``eta_{gamma,T} = gamma + exp(-A)[c(T) - J]`` on ``[t0, T]``, ``c(T) = max J``.

    No hypotheses are checked here; callers verify the inequality.
    """
    T = _interval(ode, T)
    lin = _Linear(ode, ode.coeff_fn(1), tol)
    c_T, c_t = sample_extremum(lin.G, ode.t0, T, "max", n=SUP_GRID, inflate=SAFETY)
    a0, a1 = ode._vector[0], ode._vector[1]
    g = float(gamma)

    def fn(t):
        z = lin.prof(t)
        return g + np.exp(-z[:, 0]) * (c_T - z[:, 1])

    def sfn(t):
        e, j = lin.prof.scalar(t)
        return g + math.exp(-e) * (c_T - j)

    def dfn(t):
        return -a1(t) * (fn(t) - g) - a0(t)

    return CandidateFunction("EtaStar", SUB, {"gamma": g, "T": T, "c_T": c_T, "argmax_c": c_t},
                             (ode.t0, T), fn, dfn, sfn=sfn)


def zeta_gamma(ode: PolyODE, gamma: float, T: Optional[float] = None,
               tol: float = 1e-11) -> CandidateFunction:
    """``zeta_{gamma,T} = -gamma - exp(-A)[c~(T) + J]`` with ``c~(T) = max(-J)``."""
    T = _interval(ode, T)
    lin = _Linear(ode, ode.coeff_fn(1), tol)
    c_T, c_t = sample_extremum(lambda t: -lin.G(t), ode.t0, T, "max", n=SUP_GRID,
                               inflate=SAFETY)
    a0, a1 = ode._vector[0], ode._vector[1]
    g = float(gamma)

    def fn(t):
        z = lin.prof(t)
        return -g - np.exp(-z[:, 0]) * (c_T + z[:, 1])

    def sfn(t):
        e, j = lin.prof.scalar(t)
        return -g - math.exp(-e) * (c_T + j)

    def dfn(t):
        return -a1(t) * (fn(t) + g) - a0(t)

    return CandidateFunction("ZetaStar", SUPER, {"gamma": g, "T": T, "c_T": c_T, "argmax_c": c_t},
                             (ode.t0, T), fn, dfn, sfn=sfn)


# -- verification ----------------------------------------------------------

def verify_differential_inequality(cand: CandidateFunction, ode: PolyODE,
                                   interval: Optional[tuple[float, float]] = None,
                                   grid_n: int = cond.DEFAULT_GRID) -> Margin:
    """Minimal signed residual of the candidate's inequality on a grid.

    For ``Sub`` the residual is ``eta' + sum a_k eta^k``; for ``Super`` it is
    ``-(zeta' + sum a_k zeta^k)``.  Passing means ``margin >= -1e-8``.
    """
    lo, hi = interval if interval is not None else cand.interval
    ts = np.linspace(lo, hi, grid_n)
    y = cand(ts)
    res = cand.derivative(ts) + _poly_grid(ode.coeff_grid(ts), y)
    if cand.direction == SUPER:
        res = -res
    i = int(np.argmin(res))
    return Margin(float(res[i]), float(ts[i]))
