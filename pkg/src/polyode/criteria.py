"""Numerical checks of the comparison, global-solvability and closed-solution criteria.

Every driver evaluates a theorem's hypotheses on ``[t0, T]`` (the finite
horizon of the equation), collects one :class:`Condition` per hypothesis and
returns a :class:`CriterionReport`.  "For all t" statements are therefore
verified on the working interval only, and "for all u" statements on a
geometric sample of ``u``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from . import conditions as cond
from .conditions import Condition, HypothesisViolated
from .core import (ALL_POSITIVE_PARTS, EVEN_POSITIVE_PARTS, PolyODE, QuadratureOverflow,
                   StepSizeUnderflow, exp_weighted_profile, i_gamma, integrate,
                   majorant_from_coeffs, sample_extremum, solve_dense)
from .expr import compile_expr, parse_coefficient, unparse
from .subsup import (MINUS, PLUS, CandidateFunction, build_eta_c, build_eta_star, build_m_star,
                     build_theta, build_zeta_star, eta_gamma, parse_split, user_candidate,
                     verify_differential_inequality, zeta_gamma)

__all__ = [
    "THEOREMS", "SATISFIED", "VIOLATED", "INCONCLUSIVE", "SCHEMA_VERSION",
    "NON_NEGATIVE", "NON_POSITIVE", "Settings", "CriterionReport", "SegmentMargin",
    "check_integral_condition", "check_usable_sequence_condition",
    "check_pointwise_conditions", "check_boundary_conditions", "check_theorem",
]

THEOREMS = (
    "T2.3", "T3.1", "C3.1", "T3.2", "C3.2",
    "T4.1", "T4.2", "T4.3", "T4.4", "T4.5", "T4.6", "T4.7", "T4.8",
    "C4.1", "C4.2", "C4.3",
    "T5.1", "T5.2", "T5.3", "T5.4", "T5.5", "T5.6", "C5.1",
)
GLOBAL_SOLVABILITY = THEOREMS[5:16]
CLOSED = THEOREMS[16:]

SATISFIED = "Satisfied"
VIOLATED = "Violated"
INCONCLUSIVE = "Inconclusive"
SCHEMA_VERSION = 1

NON_NEGATIVE = "NonNegativeForAllT"
NON_POSITIVE = "NonPositiveForAllT"

DEG = "⁰"  # superscript zero in condition labels such as 7⁰
# parameters with no sensible default
REQUIRED = {"T3.1": ("b", "y1_0"), "T3.2": ("b", "e", "y1_0", "y2_0")}
GAMMA_SCAN = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 31)])


@dataclass(frozen=True)
class Settings:
    grid: int = cond.DEFAULT_GRID
    tol: float = cond.DEFAULT_TOL
    strict_eps: float = cond.STRICT_EPS
    quad_tol: float = 1e-10


@dataclass
class CriterionReport:
    """Outcome of one theorem driver.

    ``lower``/``upper`` are the bounds the theorem asserts for solutions
    starting in ``bracket`` (vectorized callables).  They and ``candidates``
    are kept out of the JSON form.
    """

    theorem: str
    verdict: str
    conditions: list
    params: dict
    interval: tuple
    grid: int
    conclusion: str = ""
    flags: dict = field(default_factory=dict)
    bracket: Optional[tuple] = None
    lower: Optional[Callable] = field(default=None, repr=False)
    upper: Optional[Callable] = field(default=None, repr=False)
    candidates: dict = field(default_factory=dict, repr=False)

    @property
    def satisfied(self) -> bool:
        return self.verdict == SATISFIED

    def condition(self, label: str) -> Condition:
        for c in self.conditions:
            if c.label == label:
                return c
        raise KeyError(label)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "theorem": self.theorem,
            "verdict": self.verdict,
            "conditions": [c.to_dict() for c in self.conditions],
            "params": _jsonable(self.params),
            "grid": self.grid,
            "interval": [float(self.interval[0]), float(self.interval[1])],
            "conclusion": self.conclusion,
            "flags": _jsonable(self.flags),
            "bracket": None if self.bracket is None else _jsonable(list(self.bracket)),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _jsonable(x):
    if isinstance(x, Mapping):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if x is None or isinstance(x, str):
        return x
    try:
        return unparse(x)
    except TypeError:
        return str(x)


def _verdict(conds: Sequence[Condition], tol: float) -> str:
    if any(not c.inconclusive and not c.passed(tol) for c in conds):
        return VIOLATED
    if any(c.inconclusive for c in conds):
        return INCONCLUSIVE
    return SATISFIED


# -- integral conditions ---------------------------------------------------

def _profile(kernel, weight, lo, hi, tol):
    return exp_weighted_profile(kernel, weight, lo, hi, tol)


def _g_extreme(prof, lo, hi, n, mode):
    """Max or min of ``G`` over ``[lo, hi]`` from the dense profile."""
    fn = (lambda t: -prof(t)[:, 1]) if mode == "max" else (lambda t: prof(t)[:, 1])
    m, t = cond.grid_min(fn, lo, hi, n)
    return (-m if mode == "max" else m), t


def check_integral_condition(ode: PolyODE, kernel: Callable[[float], float],
                             weight: Callable[[float], float], offset: float,
                             interval: Optional[tuple] = None, sense: str = NON_POSITIVE,
                             label: str = "integral", grid_n: int = cond.DEFAULT_GRID,
                             tol: float = 1e-10) -> Condition:
    """Sign of ``offset + int_lo^t exp{int_lo^tau kernel} weight dtau`` for all grid ``t``.

    ``NON_POSITIVE`` asks for ``<= 0`` and ``NON_NEGATIVE`` for ``>= 0``; the
    margin is the smallest signed distance from violation over the grid, with
    the worst ``t`` as witness.  Quadrature overflow gives an inconclusive
    condition.
    """
    lo, hi = interval if interval is not None else (ode.t0, ode.horizon)
    if lo < ode.t0 - 1e-12 or hi > ode.horizon + 1e-12:
        raise ValueError("interval must lie within the horizon")
    ts = np.linspace(lo, hi, grid_n)
    if not np.any([weight(float(t)) for t in ts]):
        margin = -offset if sense == NON_POSITIVE else offset
        return Condition(label, float(margin), float(lo), note="identically zero")
    try:
        prof = _profile(kernel, weight, lo, hi, tol)
    except QuadratureOverflow as exc:
        return cond.inconclusive(label, f"quadrature overflow: {exc}", exc.t)
    if sense == NON_POSITIVE:
        g, t = _g_extreme(prof, lo, hi, grid_n, "max")
        return Condition(label, -(offset + g), t)
    if sense == NON_NEGATIVE:
        g, t = _g_extreme(prof, lo, hi, grid_n, "min")
        return Condition(label, offset + g, t)
    raise ValueError(f"unknown sense {sense!r}")


@dataclass(frozen=True)
class SegmentMargin:
    """Margin of the nested usable-sequence inequality on one segment."""

    lo: float
    hi: float
    margin: float
    witness_t: float
    end_value: float

    def condition(self) -> Condition:
        return Condition(f"segment [{self.lo:.6g}, {self.hi:.6g}]", self.margin, self.witness_t,
                         note=f"G(t_l+1) = {self.end_value:.6g}")


def check_usable_sequence_condition(ode: PolyODE, partition: Sequence[float],
                                    grid_n: int = cond.DEFAULT_GRID,
                                    tol: float = 1e-10) -> list[SegmentMargin]:
    """Per-segment check of the nested integral inequality for a usable sequence.

    On ``[t_l, t_l+1]`` with ``K(s) = int_{t_l}^s exp{-int_xi^s a_1} a_0 dxi``,
    ``E(tau) = int_{t_l}^tau (a_1 - a_2 K)`` and ``G(t) = int_{t_l}^t exp(E) a_0``,
    the requirement is ``G(t) <= 0``; ``K, E, G`` are integrated together.
    Raises :class:`QuadratureOverflow` when ``E`` overflows.
    """
    pts = [float(p) for p in partition]
    if len(pts) < 2 or any(b <= a for a, b in zip(pts, pts[1:])):
        raise ValueError("partition must be strictly increasing with at least two points")
    if abs(pts[0] - ode.t0) > 1e-12 or abs(pts[-1] - ode.horizon) > 1e-12:
        raise ValueError("partition must start at t0 and end at the horizon")
    a0, a1, a2 = (ode.coeff_fn(k) if k <= ode.n else (lambda s: 0.0) for k in (0, 1, 2))

    def f(s, z):
        k, e, _ = z
        if e > 700.0:
            raise QuadratureOverflow(s, e)
        x0 = a0(s)
        return np.array([x0 - a1(s) * k, a1(s) - a2(s) * k, math.exp(e) * x0])

    out = []
    for lo, hi in zip(pts, pts[1:]):
        n = max(64, int(grid_n * (hi - lo) / (pts[-1] - pts[0])))
        prof = solve_dense(f, lo, np.zeros(3), hi, tol)
        g, t = _g_extreme(_Component(prof, 2), lo, hi, n, "max")
        out.append(SegmentMargin(lo, hi, -g, t, float(prof.y[-1, 2])))
    return out


class _Component:
    """Expose column ``j`` of a dense profile as column 1 for :func:`_g_extreme`."""

    def __init__(self, dense, j):
        self.dense, self.j = dense, j

    def __call__(self, t):
        z = self.dense(t)
        return np.stack([np.zeros(len(t)), z[:, self.j]], axis=1)


# -- pointwise and boundary conditions ---------------------------------------

def _coeff(ode, k):
    return ode._vector[k]


def _signed_sum(ode, ks, sign):
    def f(ts):
        a = ode.coeff_grid(ts)
        return sum(sign(k) * a[k] for k in ks)
    return f


def _split_conditions(ode, split, lo, hi, labels, flipped=False, n_T=None):
    """Conditions ``a_n >= 0``, split consistency and the ``u``-polynomial sign(s)."""
    n = ode.n
    out = [cond.pointwise(labels[0], _coeff(ode, n), lo, hi)]
    cs, ds = {}, {}
    for k in range(2, n):
        c, d = split.get(k, (parse_coefficient("0"), parse_coefficient("0")))
        cs[k], ds[k] = compile_expr(c, True), compile_expr(d, True)

    def mismatch(ts):
        a = ode.coeff_grid(ts)
        worst = np.zeros(len(ts))
        for k in range(2, n):
            diff = np.abs(a[k] - (a[n] * cs[k](ts) + ds[k](ts)))
            worst = np.maximum(worst, diff - 1e-9 * (1 + np.abs(a[k])))
        return -worst

    out.append(cond.pointwise(labels[1], mismatch, lo, hi))

    def nsum(ts):
        acc = np.zeros(len(ts))
        for f in cs.values():
            acc += np.abs(f(ts))
        return acc

    if n_T is None:
        n_T = max(1.0, sample_extremum(nsum, lo, hi, "max", n=4096, inflate=1e-9)[0])

    def dpoly(sign):
        def f(ts):
            rows = [np.zeros(len(ts)) for _ in range(n)]
            for k in range(2, n):
                rows[k] = sign(k) * ds[k](ts)
            return np.stack(rows)
        return f

    out.append(cond.u_polynomial(labels[2], dpoly(lambda k: 1.0), n_T, lo, hi))
    if flipped:
        out.append(cond.u_polynomial(labels[3], dpoly(lambda k: (-1.0) ** (k + 1)), n_T, lo, hi))
    return out, n_T


def check_pointwise_conditions(ode: PolyODE, theorem_id: str, params: Optional[dict] = None,
                               settings: Settings = Settings()) -> list[Condition]:
    """Coefficient sign and parity hypotheses of a theorem, on the working interval."""
    params = params or {}
    lo, hi = ode.t0, ode.horizon
    n = ode.n
    g = settings.grid
    eps = settings.strict_eps
    j = int(params.get("j", 2))
    out: list[Condition] = []

    def nonneg(label, f):
        out.append(cond.pointwise(label, f, lo, hi, g))

    def positive(label, f):
        out.append(cond.pointwise(label, f, lo, hi, g, strict=True, strict_eps=eps))

    if theorem_id in ("T2.3", "T4.3", "T5.2"):
        for k in range(2, n + 1):
            nonneg(f"(C) a_{k}>=0", _coeff(ode, k))
    elif theorem_id == "T4.4":
        for k in range(2, n + 1):
            nonneg(f"(F) (-1)^{k} a_{k}>=0", _signed_sum(ode, [k], lambda k: (-1.0) ** k))
    elif theorem_id == "T5.1":
        for k in range(j, n + 1):
            nonneg(f"1{DEG} a_{k}>=0", _coeff(ode, k))
        positive(f"1{DEG} sum_(k>={j}) a_k>0", _signed_sum(ode, range(j, n + 1), lambda k: 1.0))
    elif theorem_id == "C5.1":
        for k in range(j, n + 1):
            nonneg(f"(-1)^{k} a_{k}>=0", _signed_sum(ode, [k], lambda k: (-1.0) ** k))
        positive(f"sum_(k>={j}) (-1)^k a_k>0", _signed_sum(ode, range(j, n + 1),
                                                          lambda k: (-1.0) ** k))
        nonneg("a_0<=0", lambda ts: -_coeff(ode, 0)(ts))
    elif theorem_id == "C4.1":
        nonneg("a_0<=0", lambda ts: -_coeff(ode, 0)(ts))
    elif theorem_id == "C4.2":
        positive("(I) a_1<0", lambda ts: -_coeff(ode, 1)(ts))
    elif theorem_id == "C4.3":
        positive("a_1>0", _coeff(ode, 1))
    elif theorem_id == "T5.4":
        positive(f"8{DEG} a_2>0", _coeff(ode, 2) if n >= 2 else (lambda ts: np.zeros(len(ts))))
    elif theorem_id in ("T5.3", "T5.5"):
        split = parse_split(params.get("split") or {})
        if theorem_id == "T5.3":
            labels = [f"3{DEG} a_{n}>=0", f"4{DEG} a_k=a_n c_k+d_k", f"5{DEG} sum d_k u^k>=0"]
            conds, _ = _split_conditions(ode, split, lo, hi, labels)
        else:
            labels = [f"12{DEG} a_{n}>=0", f"13{DEG} a_k=a_n c_k+d_k",
                      f"14{DEG} sum d_k u^k>=0", f"15{DEG} sum (-1)^(k+1) d_k u^k>=0"]
            conds, _ = _split_conditions(ode, split, lo, hi, labels, flipped=True)
            conds.append(cond.parity(f"16{DEG} n odd", n))
        out.extend(conds)
    elif theorem_id == "T4.7":
        out.append(cond.parity("(L) n odd", n))
    return out


class _Linear:
    """``A(t) = int a_1`` and ``J(t) = int exp(A) a_0`` (or the alpha-weighted pair)."""

    def __init__(self, ode: PolyODE, kernel: Callable[[float], float], tol: float):
        self.prof = exp_weighted_profile(kernel, ode.coeff_fn(0), ode.t0, ode.horizon, tol)
        self.lo, self.hi = ode.t0, ode.horizon

    @property
    def end(self):
        return float(self.prof.y[-1, 0]), float(self.prof.y[-1, 1])

    def extreme(self, mode):
        return sample_extremum(lambda t: self.prof(t)[:, 1], self.lo, self.hi, mode, n=4096)


def _alpha(ode):
    fs = ode._scalar
    return lambda s: sum(abs(f(s)) for f in fs[2:]) - fs[1](s)


def check_boundary_conditions(ode: PolyODE, theorem_id: str, params: Optional[dict] = None,
                              settings: Settings = Settings()) -> list[Condition]:
    """Scalar endpoint inequalities (margin is RHS minus LHS, or the reverse for ``>=``)."""
    params = params or {}
    q = settings.quad_tol
    out: list[Condition] = []
    try:
        if theorem_id in ("T5.3", "T5.4", "T5.5"):
            lin = _Linear(ode, ode.coeff_fn(1), q)
            a_T, j_T = lin.end
            shrink = 1.0 - math.exp(a_T)
            j_max, t_max = lin.extreme("max")
            if theorem_id == "T5.3":
                out.append(Condition(f"6{DEG}", j_T - j_max * shrink, t_max))
            elif theorem_id == "T5.4":
                c = params.get("c")
                c = j_max + 1e-9 if c is None else float(c)
                out.append(Condition(f"11{DEG}", j_T - c * shrink, ode.horizon,
                                     note=f"c = {c:.6g}"))
            else:
                j_min, t_min = lin.extreme("min")
                out.append(Condition(f"17{DEG}", j_T - j_max * shrink, t_max))
                out.append(Condition(f"18{DEG}", j_min * shrink - j_T, t_min))
        elif theorem_id == "T5.6":
            lin = _Linear(ode, lambda s, al=_alpha(ode): -al(s), q)
            neg_a_T, k_T = lin.end
            shrink = 1.0 - math.exp(neg_a_T)
            c_plus, c_minus = _theta_constants(lin, params)
            out.append(Condition(f"20{DEG} upper", k_T - c_plus * shrink, ode.horizon,
                                 note=f"c+ = {c_plus:.6g}"))
            out.append(Condition(f"20{DEG} lower", -k_T - c_minus * shrink, ode.horizon,
                                 note=f"c- = {c_minus:.6g}; sign-corrected second line"))
    except QuadratureOverflow as exc:
        out.append(cond.inconclusive("boundary", f"quadrature overflow: {exc}", exc.t))
    return out


def _theta_constants(lin: _Linear, params: dict):
    c_plus = params.get("c_plus")
    c_minus = params.get("c_minus")
    if c_plus is None:
        c_plus = lin.extreme("max")[0] + 1e-9
    if c_minus is None:
        c_minus = -lin.extreme("min")[0] + 1e-9
    return float(c_plus), float(c_minus)


# -- candidates ------------------------------------------------------------

def _fd(fn: Callable, h: float = 1e-3) -> Callable:
    """Fourth-order central difference of a vectorized function."""
    def d(t):
        t = np.asarray(t, dtype=float)
        return (-fn(t + 2 * h) + 8 * fn(t + h) - 8 * fn(t - h) + fn(t - 2 * h)) / (12 * h)
    return d


def _expr_fn(text) -> Callable:
    ast = parse_coefficient(str(text)) if not callable(text) else None
    if ast is None:
        return text
    f = compile_expr(ast, True)
    return lambda t: np.broadcast_to(f(np.asarray(t, dtype=float)), np.shape(t)).astype(float)


def _build(ode: PolyODE, spec, direction: str, params: dict, conds: list,
           settings: Settings) -> Optional[CandidateFunction]:
    """Resolve a candidate spec, appending its hypothesis checks to ``conds``.

    A spec is an expression string (a user-supplied candidate, checked
    against its inequality) or a dict with ``kind`` among ``m_star``,
    ``eta_star``, ``eta_c``, ``theta``, ``theta_minus`` and ``zeta_star``.
    Returns ``None`` when the construction's hypotheses fail.
    """
    T = params.get("T")
    if isinstance(spec, (str, int, float)):
        fn = _expr_fn(spec)
        cand = user_candidate(fn, direction, (ode.t0, ode.horizon), _fd(fn))
        m = verify_differential_inequality(cand, ode, grid_n=settings.grid)
        label = "sub candidate" if direction == "Sub" else "super candidate"
        conds.append(Condition(label, m.margin, m.witness_t, note=str(spec)))
        return cand if m.passed else None
    kind = spec.get("kind")
    split = spec.get("split", params.get("split"))
    try:
        if kind == "m_star":
            cand = build_m_star(ode, int(spec.get("j", params.get("j", 2))), spec.get("T", T),
                                float(spec.get("gamma", 0.0)))
        elif kind == "eta_star":
            cand = build_eta_star(ode, spec.get("T", T), split)
        elif kind == "zeta_star":
            cand = build_zeta_star(ode, spec.get("T", T), split)
        elif kind == "eta_c":
            cand = build_eta_c(ode, spec.get("c", params.get("c")))
        elif kind == "theta":
            cand = build_theta(ode, spec.get("c", params.get("c")), PLUS)
        elif kind == "theta_minus":
            cand = build_theta(ode, spec.get("c", params.get("c_minus")), MINUS)
        else:
            raise ValueError(f"unknown candidate kind {kind!r}")
    except HypothesisViolated as exc:
        conds.extend(getattr(exc, "checks", [exc.condition]))
        return None
    except QuadratureOverflow as exc:
        conds.append(cond.inconclusive(f"{kind} construction", f"quadrature overflow: {exc}",
                                       exc.t))
        return None
    conds.extend(cand.checks)
    return cand


def _scalar(fn: Callable) -> Callable[[float], float]:
    if isinstance(fn, CandidateFunction):
        return fn
    if hasattr(fn, "_dense"):
        return fn._dense.scalar
    return lambda s: float(fn(np.array([s]))[0])


# -- comparison-type conditions ------------------------------------------------

def _select_mode(ode, zeta_fn, lo, hi, settings, forced=None):
    """D1 majorant and the condition (I) that justifies it."""
    zc = cond.pointwise("(I) via zeta>=0", zeta_fn, lo, hi, settings.grid)
    if forced == ALL_POSITIVE_PARTS or (forced is None and zc.passed(settings.tol)):
        return ALL_POSITIVE_PARTS, zc
    fs = [cond.pointwise(f"(F) (-1)^{k} a_{k}>=0",
                         _signed_sum(ode, [k], lambda k: (-1.0) ** k), lo, hi, settings.grid)
          for k in range(2, ode.n + 1)]
    worst = min(fs, key=lambda c: c.margin) if fs else Condition("(F)", 0.0)
    fc = Condition("(I) via (-1)^k a_k>=0", worst.margin, worst.witness_t, note=worst.label)
    if forced == EVEN_POSITIVE_PARTS or fc.passed(settings.tol):
        return EVEN_POSITIVE_PARTS, fc
    return ALL_POSITIVE_PARTS, Condition(zc.label, zc.margin, zc.witness_t,
                                         note="no majorant justified: zeta changes sign "
                                              "and (-1)^k a_k >= 0 fails")


def _comparison(ode: PolyODE, label: str, upper: CandidateFunction, zeta: Callable,
                weight: Callable[[float], float], mode: str, nu: Optional[float],
                lo: float, hi: float, settings: Settings, nu_label: str = "nu") -> tuple:
    """``zeta(t0) - nu + int exp{int D1(s, upper, zeta)} weight <= 0`` plus ``nu`` in range.

    The condition is affine in ``nu``; when ``nu`` is not given the smallest
    admissible value is used.  Returns ``(conditions, nu)``.
    """
    zeta_s = _scalar(zeta)
    upper_s = _scalar(upper)

    def kernel(s):
        return majorant_from_coeffs(ode.coeffs_at(s), upper_s(s), zeta_s(s), mode)

    z0, u0 = zeta_s(lo), upper_s(lo)
    out = [Condition("zeta(t0)<upper(t0)", u0 - z0 - settings.strict_eps, lo, strict=True)]
    try:
        prof = _profile(kernel, weight, lo, hi, settings.quad_tol)
    except QuadratureOverflow as exc:
        out.append(cond.inconclusive(label, f"quadrature overflow: {exc}", exc.t))
        return out, nu
    g_max, t_max = _g_extreme(prof, lo, hi, settings.grid, "max")
    if nu is None:
        nu = z0 + max(0.0, g_max)
        nu = min(max(nu, z0), max(u0, z0))
    nu = float(nu)
    out.append(Condition(label, -(z0 - nu + g_max), t_max, note=f"{nu_label} = {nu:.6g}"))
    out.append(Condition(f"{nu_label} in [zeta(t0), upper(t0)]", min(nu - z0, u0 - nu), lo))
    return out, nu


def _gamma_scan(label: str, make: Callable[[float], Condition], gammas, given=None):
    """Existential parameter: first admissible value in ascending order, else best margin.

    The kernels scanned here grow with gamma, so once the quadrature
    overflows every larger gamma would too and the scan stops.
    """
    if given is not None:
        return make(float(given)), float(given)
    best, best_g = None, None
    for g in gammas:
        c = make(float(g))
        if c.inconclusive:
            break
        if c.passed():
            c.note = (c.note + "; " if c.note else "") + f"gamma = {g:.6g} (scanned)"
            return c, float(g)
        if best is None or c.margin > best.margin:
            best, best_g = c, float(g)
    if best is None:
        return cond.inconclusive(label, "quadrature overflow for every scanned gamma"), None
    best.note = (best.note + "; " if best.note else "") + f"best scanned gamma = {best_g:.6g}"
    return best, best_g


# -- drivers ---------------------------------------------------------------

def _zeta_fn(params: dict) -> Callable:
    return _expr_fn(params.get("zeta", "0"))


def _report(tid, ode, conds, params, settings, **kw) -> CriterionReport:
    return CriterionReport(tid, _verdict(conds, settings.tol), conds, params,
                           (ode.t0, ode.horizon), settings.grid, **kw)


def _global_with_zeta(tid, ode, params, settings, upper_spec, mode=ALL_POSITIVE_PARTS,
                      require_nonneg=True, pre=()):
    """T4.1, T4.2, T4.4, T4.5, T4.6: a built sub solution plus a lower comparison."""
    lo, hi = ode.t0, ode.horizon
    conds = list(pre)
    upper = _build(ode, upper_spec, "Sub", params, conds, settings)
    zeta = _zeta_fn(params)
    if require_nonneg:
        conds.append(cond.pointwise("zeta>=0", zeta, lo, hi, settings.grid))
    used = dict(params)
    nu = params.get("nu")
    if upper is not None:
        dz = _fd(zeta)
        zs, dzs = _scalar(zeta), _scalar(dz)

        def weight(s):
            return dzs(s) + ode.poly(s, zs(s))

        label = {"T4.1": "(A)", "T4.2": "(B)", "T4.4": "(G)", "T4.5": "(H)"}.get(
            tid, "comparison integral")
        cs, nu = _comparison(ode, label, upper, zeta, weight, mode, nu, lo, hi, settings)
        conds.extend(cs)
        used.update(nu=nu, **{k: v for k, v in upper.params.items() if k in ("M", "N_T", "c")})
    rep = _report(tid, ode, conds, used, settings,
                  conclusion="every solution with y(t0) in [nu, upper(t0)] exists on [t0,T] "
                             "and zeta <= y <= upper")
    if upper is not None and nu is not None:
        rep.bracket = (nu, float(upper(lo)))
        rep.lower, rep.upper = zeta, upper
        rep.candidates["upper"] = upper
    return rep


def _t3_1(ode, params, settings, corollary=False):
    lo, hi = ode.t0, ode.horizon
    conds: list = []
    used = dict(params)
    eta = _build(ode, params.get("eta", {"kind": "m_star"}), "Sub", params, conds, settings)
    if corollary:
        y1 = _zeta_fn(params)
        dy1 = _fd(y1)
        ys, dys = _scalar(y1), _scalar(dy1)

        def weight(s):
            return dys(s) + ode.poly(s, ys(s))
    else:
        b = PolyODE.from_strings(ode.n, params["b"], lo, hi)
        traj = integrate(b, lo, float(params["y1_0"]), hi, 1e-10)
        conds.append(Condition("y1 exists on [t0,T]", 1.0 if traj.reached_end else -1.0,
                               traj.t_end, note=type(traj.status).__name__))
        if not traj.reached_end:
            return _report("T3.1", ode, conds, used, settings)
        y1 = traj
        ys = traj._dense.scalar

        def weight(s):
            # zeta' + sum a_k zeta^k for zeta = y1 equals -sum (b_k - a_k) y1^k
            y = ys(s)
            return ode.poly(s, y) - b.poly(s, y)

    mode, mc = _select_mode(ode, y1, lo, hi, settings, params.get("d1"))
    conds.append(mc)
    gamma = params.get("gamma")
    if eta is not None:
        label = "(II0)" if corollary else "(II)"
        cs, gamma = _comparison(ode, label, eta, y1, weight, mode, gamma, lo, hi, settings,
                                nu_label="gamma")
        conds.extend(cs)
        used.update(gamma=gamma, d1=mode)
    tid = "C3.1" if corollary else "T3.1"
    rep = _report(tid, ode, conds, used, settings,
                  conclusion="every solution with y(t0) in [gamma, eta*(t0)] exists on [t0,T] "
                             "and y1 <= y <= eta*")
    if eta is not None and gamma is not None:
        rep.bracket = (gamma, float(eta(lo)))
        rep.lower, rep.upper = y1, eta
    return rep


def _t3_2(ode, params, settings):
    lo, hi = ode.t0, ode.horizon
    b = PolyODE.from_strings(ode.n, params["b"], lo, hi)
    e = PolyODE.from_strings(ode.n, params["e"], lo, hi)
    y1 = integrate(b, lo, float(params["y1_0"]), hi, 1e-10)
    y2 = integrate(e, lo, float(params["y2_0"]), hi, 1e-10)
    conds = [Condition("y1 exists on [t0,T]", 1.0 if y1.reached_end else -1.0, y1.t_end),
             Condition("y2 exists on [t0,T]", 1.0 if y2.reached_end else -1.0, y2.t_end),
             Condition("y1(t0)<=y2(t0)", float(params["y2_0"]) - float(params["y1_0"]), lo)]
    if y1.reached_end and y2.reached_end:
        def diff(other, y):
            def f(ts):
                yy = y(ts)
                ca, cb = ode.coeff_grid(ts), other.coeff_grid(ts)
                acc = np.zeros(len(ts))
                for k in range(ode.n, -1, -1):
                    acc = acc * yy + (cb[k] - ca[k])
                return acc
            return f

        conds.append(cond.pointwise("(III)", diff(b, y1), lo, hi, settings.grid))
        conds.append(cond.pointwise("(IV)", lambda ts: -diff(e, y2)(ts), lo, hi, settings.grid))
    rep = _report("T3.2", ode, conds, dict(params), settings,
                  conclusion="every solution with y(t0) in [y1(t0), y2(t0)] exists on [t0,T] "
                             "and y1 <= y <= y2")
    if y1.reached_end and y2.reached_end:
        rep.bracket = (float(params["y1_0"]), float(params["y2_0"]))
        rep.lower, rep.upper = y1, y2
    return rep


def _c3_2(ode, params, settings):
    lo, hi = ode.t0, ode.horizon
    conds: list = []
    eta = _build(ode, params.get("eta", {"kind": "eta_star"}), "Sub", params, conds, settings)
    zeta = _build(ode, params.get("zeta", {"kind": "zeta_star"}), "Super", params, conds,
                  settings)
    rep_kw = {}
    if eta is not None and zeta is not None:
        conds.append(cond.pointwise("zeta*<=eta*", lambda t: eta(t) - zeta(t), lo, hi,
                                    settings.grid))
        rep_kw = dict(bracket=(float(zeta(lo)), float(eta(lo))), lower=zeta, upper=eta)
    return _report("C3.2", ode, conds, dict(params), settings,
                   conclusion="every solution with y(t0) in [zeta*(t0), eta*(t0)] exists on "
                              "[t0,T] and zeta* <= y <= eta*", **rep_kw)


def _t2_3(ode, params, settings):
    conds = check_pointwise_conditions(ode, "T2.3", params, settings)
    part = params.get("partition") or [ode.t0, ode.horizon]
    try:
        conds.extend(s.condition() for s in check_usable_sequence_condition(
            ode, part, settings.grid, settings.quad_tol))
    except QuadratureOverflow as exc:
        conds.append(cond.inconclusive("segment", f"quadrature overflow: {exc}", exc.t))
    return _report("T2.3", ode, conds, dict(params, partition=list(part)), settings,
                   conclusion="for every gamma >= 0 the inequality has a solution eta with "
                              "eta(t0) = gamma and 0 <= eta <= I_gamma")


def _e_condition(ode, gamma, settings, label="(E)"):
    try:
        ig = i_gamma(ode, gamma, settings.quad_tol)
    except QuadratureOverflow as exc:
        return cond.inconclusive(label, f"quadrature overflow: {exc}", exc.t), None
    ig_s = ig.value_at

    def kernel(s):
        a = ode.coeffs_at(s)
        u = ig_s(s)
        acc, p = a[1], 1.0
        for k in range(2, len(a)):
            p *= u
            acc += a[k] * p
        return acc

    c = check_integral_condition(ode, kernel, ode.coeff_fn(0), 0.0, None, NON_POSITIVE, label,
                                 settings.grid, settings.quad_tol)
    return c, ig


def _t4_3(ode, params, settings, tid="T4.3"):
    conds = check_pointwise_conditions(ode, "T4.3", params, settings)
    part = params.get("partition") or [ode.t0, ode.horizon]
    try:
        conds.extend(s.condition() for s in check_usable_sequence_condition(
            ode, part, settings.grid, settings.quad_tol))
    except QuadratureOverflow as exc:
        conds.append(cond.inconclusive("(D)", f"quadrature overflow: {exc}", exc.t))
    for c in conds:
        if c.label.startswith("segment"):
            c.label = "(D)" + c.label[len("segment"):]
    c, gamma = _gamma_scan("(E)", lambda g: _e_condition(ode, g, settings)[0], GAMMA_SCAN,
                           params.get("gamma"))
    conds.append(c)
    used = dict(params, partition=list(part), gamma=gamma)
    rep = _report(tid, ode, conds, used, settings,
                  conclusion="the solution with y(t0) = gamma exists on [t0,T] and "
                             "0 <= y <= I_gamma")
    if gamma is not None:
        ig = i_gamma(ode, gamma, settings.quad_tol)
        rep.bracket = (gamma, gamma)
        rep.lower = lambda t: np.zeros(np.shape(t))
        rep.upper = ig.value_at
    return rep


def _c4_1(ode, params, settings):
    conds = check_pointwise_conditions(ode, "C4.1", params, settings)
    trial: list = []
    upper = None
    if "split" not in params or "j" in params:
        upper = _build(ode, {"kind": "m_star", "gamma": params.get("gamma", 0.0)}, "Sub",
                       params, trial, settings)
    if upper is None and ode.n >= 2 and ("split" in params or ode.n == 2):
        lemma_24: list = []
        upper = _build(ode, {"kind": "eta_star"}, "Sub", params, lemma_24, settings)
        if upper is not None or not trial:
            trial = lemma_24
    conds.extend(trial)
    rep = _report("C4.1", ode, conds, dict(params), settings,
                  conclusion="every solution with y(t0) >= 0 exists on [t0,T] and is "
                             "nonnegative")
    if upper is not None:
        rep.bracket = (0.0, float(upper(ode.t0)))
        rep.lower = lambda t: np.zeros(np.shape(t))
        rep.upper = upper
    return rep


def _c4_2_3(ode, params, settings, tid):
    lo, hi = ode.t0, ode.horizon
    conds = check_pointwise_conditions(ode, tid, params, settings)
    eta = _build(ode, {"kind": "eta_c"}, "Sub", params, conds, settings)
    used = dict(params)
    if eta is None:
        return _report(tid, ode, conds, used, settings)
    e0 = float(eta(lo))
    sign = 1.0 if tid == "C4.2" else -1.0

    def small_enough(z0):
        def f(ts):
            a = ode.coeff_grid(ts)
            acc = np.zeros(len(ts))
            for k in range(2, ode.n + 1):
                acc += np.abs(a[k]) * abs(z0) ** (k - 1)
            return np.abs(a[1]) - acc if tid == "C4.2" else a[1] - acc
        return cond.pointwise("zeta0 bound", f, lo, hi, settings.grid)

    z0 = params.get("zeta0")
    if z0 is None:
        scale = e0 if tid == "C4.2" else 1.0
        for i in range(1, 40):
            cand = sign * scale * 0.5 ** i
            if small_enough(cand).passed(settings.tol):
                z0 = cand
                break
        else:
            z0 = sign * scale * 0.5 ** 39
    z0 = float(z0)
    conds.append(small_enough(z0))
    if tid == "C4.2":
        conds.append(Condition("zeta0 in (0, eta_c(t0))", min(z0, e0 - z0) - settings.strict_eps,
                               lo, strict=True))
    else:
        conds.append(Condition("zeta0<0", -z0 - settings.strict_eps, lo, strict=True))
    zeta = lambda t: np.full(np.shape(t), z0)  # noqa: E731
    cs, nu = _comparison(ode, "(J)" if tid == "C4.2" else "integral", eta, zeta,
                         ode.coeff_fn(0), ALL_POSITIVE_PARTS, params.get("nu"), lo, hi, settings)
    conds.extend(cs)
    used.update(zeta0=z0, nu=nu, c=eta.params["c"])
    rep = _report(tid, ode, conds, used, settings,
                  conclusion="every solution with y(t0) in [nu, eta_c(t0)] exists on [t0,T] "
                             "and zeta0 <= y <= eta_c")
    rep.bracket = (nu, e0)
    rep.lower, rep.upper = zeta, eta
    return rep


def _t4_7(ode, params, settings):
    conds = check_pointwise_conditions(ode, "T4.7", params, settings)
    zeta = _build(ode, {"kind": "zeta_star"}, "Super", params, conds, settings)
    rep = _report("T4.7", ode, conds, dict(params), settings,
                  conclusion="every solution with y(t0) in [zeta*(t0), eta*(t0)] exists on "
                             "[t0,T] and zeta* <= y <= eta*")
    if zeta is not None:
        eta = build_eta_star(ode, params.get("T"), params.get("split"))
        rep.bracket = (float(zeta(ode.t0)), float(eta(ode.t0)))
        rep.lower, rep.upper = zeta, eta
    return rep


def _t4_8(ode, params, settings):
    conds: list = []
    plus = _build(ode, {"kind": "theta", "c": params.get("c_plus")}, "Sub", params, conds,
                  settings)
    minus = _build(ode, {"kind": "theta_minus", "c": params.get("c_minus")}, "Super", params,
                   conds, settings)
    rep = _report("T4.8", ode, conds, dict(params), settings,
                  conclusion="every solution with y(t0) in [theta-(t0), theta+(t0)] exists on "
                             "[t0,T] and theta- <= y <= theta+")
    if plus is not None and minus is not None:
        rep.bracket = (float(minus(ode.t0)), float(plus(ode.t0)))
        rep.lower, rep.upper = minus, plus
        rep.params.update(c_plus=plus.params["c"], c_minus=minus.params["c"])
    return rep


def _a1_integral(ode, settings):
    return float(exp_weighted_profile(ode.coeff_fn(1), lambda s: 0.0, ode.t0, ode.horizon,
                                      settings.quad_tol).y[-1, 0])


def _t5_1(ode, params, settings):
    lo, hi = ode.t0, ode.horizon
    j = int(params.get("j", 2))
    conds = check_pointwise_conditions(ode, "T5.1", params, settings)
    used = dict(params, j=j)
    rep_kw: dict = {}
    if all(c.passed(settings.tol) for c in conds):
        m = build_m_star(ode, j, hi).params["M"]

        def make(g):
            mg = m + g

            def kernel(s):
                a = ode.coeffs_at(s)
                acc, p = a[1], 1.0
                for k in range(2, len(a)):
                    p *= mg
                    acc += max(a[k], 0.0) * p
                return acc

            return check_integral_condition(ode, kernel, ode.coeff_fn(0), 0.0, None,
                                            NON_POSITIVE, f"2{DEG}", settings.grid,
                                            settings.quad_tol)

        c, gamma = _gamma_scan(f"2{DEG}", make, GAMMA_SCAN, params.get("gamma"))
        c.note = (c.note + "; " if c.note else "") + "constant M_{T,j} + gamma reading"
        conds.append(c)
        used.update(M=m, gamma=gamma)
        if gamma is not None:
            rep_kw["bracket"] = (0.0, m + gamma)
    a0 = _coeff(ode, 0)
    a0_min = cond.grid_min(a0, lo, hi, settings.grid)[0]
    a0_max = -cond.grid_min(lambda t: -a0(t), lo, hi, settings.grid)[0]
    int_a1 = _a1_integral(ode, settings)
    flags = {"positive": bool(a0_min >= 0 and a0_max > 0),
             "isolated": bool(j == 2 and int_a1 > 0), "int_a1": int_a1}
    return _report("T5.1", ode, conds, used, settings, flags=flags,
                   conclusion="a nonnegative closed solution exists on [t0,T] with initial "
                              "value in the bracket", **rep_kw)


def _c5_1(ode, params, settings):
    from .core import reflect

    j = int(params.get("j", 2))
    conds = check_pointwise_conditions(ode, "C5.1", params, settings)
    rep_kw: dict = {}
    if all(c.passed(settings.tol) for c in conds):
        r = reflect(ode)
        m = build_m_star(r, j, r.horizon).params["M"]
        rep_kw["bracket"] = (-m, 0.0)
    return _report("C5.1", ode, conds, dict(params, j=j), settings,
                   conclusion="a nonpositive closed solution exists on [t0,T] with initial "
                              "value in the bracket", **rep_kw)


def _t5_2(ode, params, settings):
    rep = _t4_3(ode, params, settings, tid="T5.2")
    lo, hi = ode.t0, ode.horizon
    int_a1 = _a1_integral(ode, settings)

    def total(ts):
        return np.abs(ode.coeff_grid(ts)[2:].sum(axis=0)) if ode.n >= 2 else np.zeros(len(ts))

    sup_sum = -cond.grid_min(lambda t: -total(t), lo, hi, settings.grid)[0]
    margin = max(sup_sum, int_a1) - settings.strict_eps
    rep.conditions.append(Condition("sum a_k not identically 0 or int a_1>0", margin, None,
                                    note=f"sup|sum a_k| = {sup_sum:.6g}, int a_1 = {int_a1:.6g}",
                                    strict=True))
    rep.verdict = _verdict(rep.conditions, settings.tol)
    rep.flags = {"isolated": bool(int_a1 > 0), "int_a1": int_a1}
    rep.conclusion = "a nonnegative closed solution exists on [t0,T]"
    rep.bracket = (0.0, None)
    rep.lower = rep.upper = None
    return rep


def _eta_gamma_condition(ode, gamma, settings, label):
    try:
        eta = eta_gamma(ode, gamma, None, settings.quad_tol)
    except QuadratureOverflow as exc:
        return cond.inconclusive(label, f"quadrature overflow: {exc}", exc.t)
    es = _scalar(eta)

    def kernel(s):
        a = ode.coeffs_at(s)
        u = es(s)
        acc, p = a[1], 1.0
        for k in range(2, len(a)):
            p *= u
            acc += max(a[k], 0.0) * p
        return acc

    c = check_integral_condition(ode, kernel, ode.coeff_fn(0), 0.0, None, NON_POSITIVE, label,
                                 settings.grid, settings.quad_tol)
    m = verify_differential_inequality(eta, ode, grid_n=settings.grid)
    if not m.passed:
        c = Condition(label, min(c.margin, m.margin), m.witness_t,
                      note="eta_{gamma,T} fails its differential inequality")
    return c


def _t5_3(ode, params, settings):
    conds = check_pointwise_conditions(ode, "T5.3", params, settings)
    conds.extend(check_boundary_conditions(ode, "T5.3", params, settings))
    split = parse_split(params.get("split") or {})
    _, n_T = _split_conditions(ode, split, ode.t0, ode.horizon, ["", "", ""])
    used = dict(params, N_T=n_T)
    c, gamma = _gamma_scan(f"7{DEG}", lambda g: _eta_gamma_condition(ode, g, settings, f"7{DEG}"),
                           n_T + GAMMA_SCAN, params.get("gamma"))
    conds.append(c)
    used["gamma"] = gamma
    rep_kw = {}
    if gamma is not None:
        eta = eta_gamma(ode, gamma, None, settings.quad_tol)
        rep_kw["bracket"] = (0.0, float(eta(ode.t0)))
    return _report("T5.3", ode, conds, used, settings,
                   conclusion="a nonnegative closed solution exists on [t0,T] with initial "
                              "value in the bracket", **rep_kw)


def _t5_4(ode, params, settings):
    lo, hi = ode.t0, ode.horizon
    conds = check_pointwise_conditions(ode, "T5.4", params, settings)
    eta = _build(ode, {"kind": "eta_c", "c": params.get("c")}, "Sub", params, conds, settings)
    used = dict(params)
    rep_kw = {}
    if eta is not None:
        c = eta.params["c"]
        used["c"] = c
        es = _scalar(eta)

        def kernel(s):
            a = ode.coeffs_at(s)
            u = es(s)
            acc, p = a[1], 1.0
            for k in range(2, len(a)):
                p *= u
                acc += max(a[k], 0.0) * p
            return acc

        conds.append(check_integral_condition(ode, kernel, ode.coeff_fn(0), 0.0, None,
                                              NON_POSITIVE, f"10{DEG}", settings.grid,
                                              settings.quad_tol))
        conds.extend(check_boundary_conditions(ode, "T5.4", used, settings))
        rep_kw["bracket"] = (0.0, float(eta(lo)))
    return _report("T5.4", ode, conds, used, settings,
                   conclusion="a nonnegative closed solution exists on [t0,T] with initial "
                              "value in the bracket", **rep_kw)


def _t5_5(ode, params, settings):
    conds = check_pointwise_conditions(ode, "T5.5", params, settings)
    conds.extend(check_boundary_conditions(ode, "T5.5", params, settings))
    split = parse_split(params.get("split") or {})
    _, n_T = _split_conditions(ode, split, ode.t0, ode.horizon, ["", "", ""])
    used = dict(params, N_T=n_T)
    rep_kw = {}
    try:
        eta = eta_gamma(ode, n_T, None, settings.quad_tol)
        zeta = zeta_gamma(ode, n_T, None, settings.quad_tol)
    except QuadratureOverflow as exc:
        conds.append(cond.inconclusive("eta/zeta", f"quadrature overflow: {exc}", exc.t))
    else:
        for cand, label in ((eta, "sub eta_{N_T,T}"), (zeta, "super zeta_{N_T,T}")):
            m = verify_differential_inequality(cand, ode, grid_n=settings.grid)
            conds.append(Condition(label, m.margin + 1e-8 - settings.tol, m.witness_t,
                                   note="residual margin, tolerance 1e-8"))
        rep_kw = dict(bracket=(float(zeta(ode.t0)), float(eta(ode.t0))), lower=zeta, upper=eta)
    return _report("T5.5", ode, conds, used, settings,
                   conclusion="a closed solution exists on [t0,T] with initial value in the "
                              "bracket", **rep_kw)


def _t5_6(ode, params, settings):
    rep = _t4_8(ode, params, settings)
    used = dict(params)
    used.update({k: rep.params[k] for k in ("c_plus", "c_minus") if k in rep.params})
    conds = list(rep.conditions)
    conds.extend(check_boundary_conditions(ode, "T5.6", used, settings))
    out = _report("T5.6", ode, conds, used, settings,
                  conclusion="a closed solution exists on [t0,T] between theta- and theta+")
    out.bracket, out.lower, out.upper = rep.bracket, rep.lower, rep.upper
    return out


def check_theorem(ode: PolyODE, theorem_id: str, params: Optional[dict] = None,
                  settings: Settings = Settings()) -> CriterionReport:
    """Evaluate every hypothesis of ``theorem_id`` and assemble a report.

    ``params`` may carry ``j``, ``gamma``, ``nu``, ``c``, ``c_plus``,
    ``c_minus``, ``T`` (gluing point), ``split`` (``{k: [c_k, d_k]}``),
    ``partition``, ``zeta`` (expression), ``zeta0``, candidate specs ``eta`` /
    ``zeta``, comparison coefficients ``b``/``e`` with ``y1_0``/``y2_0``, and
    ``d1`` to force the majorant.  Hypothesis failures are reported, not raised.
    """
    tid = theorem_id.replace("_", ".").upper()
    if tid not in THEOREMS:
        raise ValueError(f"unknown theorem id {theorem_id!r}")
    params = dict(params or {})
    missing = [k for k in REQUIRED.get(tid, ()) if params.get(k) is None]
    if missing:
        raise ValueError(f"{tid} needs parameter(s) {', '.join(missing)}")
    if "split" in params:
        params["split"] = {int(k): tuple(v) for k, v in params["split"].items()}
    n = ode.n
    try:
        if tid == "T2.3":
            return _t2_3(ode, params, settings)
        if tid == "T3.1":
            return _t3_1(ode, params, settings)
        if tid == "C3.1":
            return _t3_1(ode, params, settings, corollary=True)
        if tid == "T3.2":
            return _t3_2(ode, params, settings)
        if tid == "C3.2":
            return _c3_2(ode, params, settings)
        if tid == "T4.1":
            spec = {"kind": "m_star", "gamma": params.get("gamma", 0.0)}
            return _global_with_zeta(tid, ode, params, settings, spec)
        if tid == "T4.2":
            return _global_with_zeta(tid, ode, params, settings, {"kind": "eta_star"})
        if tid == "T4.3":
            return _t4_3(ode, params, settings)
        if tid == "T4.4":
            pre = check_pointwise_conditions(ode, "T4.4", params, settings)
            return _global_with_zeta(tid, ode, params, settings, {"kind": "eta_star"},
                                     mode=EVEN_POSITIVE_PARTS, require_nonneg=False, pre=pre)
        if tid == "T4.5":
            return _global_with_zeta(tid, ode, params, settings, {"kind": "eta_c"})
        if tid == "T4.6":
            return _global_with_zeta(tid, ode, params, settings, {"kind": "theta"})
        if tid == "T4.7":
            return _t4_7(ode, params, settings)
        if tid == "T4.8":
            return _t4_8(ode, params, settings)
        if tid == "C4.1":
            return _c4_1(ode, params, settings)
        if tid in ("C4.2", "C4.3"):
            if n < 2:
                raise ValueError("degree must be at least 2")
            return _c4_2_3(ode, params, settings, tid)
        if tid == "T5.1":
            return _t5_1(ode, params, settings)
        if tid == "T5.2":
            return _t5_2(ode, params, settings)
        if tid == "T5.3":
            return _t5_3(ode, params, settings)
        if tid == "T5.4":
            return _t5_4(ode, params, settings)
        if tid == "T5.5":
            return _t5_5(ode, params, settings)
        if tid == "T5.6":
            return _t5_6(ode, params, settings)
        return _c5_1(ode, params, settings)
    except (QuadratureOverflow, StepSizeUnderflow) as exc:
        c = cond.inconclusive("numerics", f"{type(exc).__name__}: {exc}")
        return _report(tid, ode, [c], params, settings)
