"""Polynomial ODE model, difference kernels and the numerical integration layer.

The equation is ``y' + sum_{k=0}^n a_k(t) y^k = 0`` on ``[t0, horizon]``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .expr import (BinOp, ExprAST, ExprDomainError, Neg, Num, T, compile_expr,
                   parse_coefficient, substitute_t)

__all__ = [
    "PolyODE", "rhs", "s_poly", "d_kernel", "d1_majorant", "ALL_POSITIVE_PARTS",
    "EVEN_POSITIVE_PARTS", "integrate", "Trajectory", "ReachedEnd", "BlowUp",
    "DomainError", "Dense", "solve_dense", "exp_weighted_profile",
    "exp_weighted_integral", "cauchy_residual", "IGammaBound", "i_gamma",
    "QuadratureOverflow", "StepSizeUnderflow", "sample_extremum", "reflect",
    "ESCAPE_THRESHOLD", "LOG_OVERFLOW",
]

ESCAPE_THRESHOLD = 1e8
MIN_STEP_FRACTION = 1e-12
LOG_OVERFLOW = 700.0
MAX_STEPS = 500_000
RUNAWAY_FRACTION = 1e-4
STALL_FACTOR = 1e3
STALL_STEPS = 1000

ALL_POSITIVE_PARTS = "all_positive_parts"
EVEN_POSITIVE_PARTS = "even_positive_parts"


class QuadratureOverflow(ArithmeticError):
    """The inner integral of an exp-weighted quadrature passed the overflow threshold."""

    def __init__(self, t: float, value: float):
        super().__init__(f"inner integral reached {value:.3g} at t={t:.6g}")
        self.t = t
        self.value = value


class StepSizeUnderflow(RuntimeError):
    """Step size collapsed while the solution stayed bounded (stiffness or bad data)."""


# -- equation --------------------------------------------------------------

@dataclass(frozen=True)
class PolyODE:
    """``y' + sum a_k(t) y^k = 0``; ``coeffs[k]`` holds ``a_k``."""

    coeffs: tuple[ExprAST, ...]
    t0: float = 0.0
    horizon: float = 1.0
    _scalar: tuple = field(init=False, repr=False, compare=False)
    _vector: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.coeffs) < 2:
            raise ValueError("degree n must be at least 1")
        if not self.horizon > self.t0:
            raise ValueError(f"horizon {self.horizon} must exceed t0 {self.t0}")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        object.__setattr__(self, "_scalar", tuple(compile_expr(c) for c in self.coeffs))
        object.__setattr__(self, "_vector", tuple(compile_expr(c, True) for c in self.coeffs))

    @classmethod
    def from_strings(cls, n: int, coeffs: Mapping[int, str] | Sequence[str],
                     t0: float = 0.0, horizon: float = 1.0) -> "PolyODE":
        if not isinstance(coeffs, Mapping):
            coeffs = dict(enumerate(coeffs))
        bad = [k for k in coeffs if not 0 <= int(k) <= n]
        if bad:
            raise ValueError(f"coefficient index out of range 0..{n}: {bad}")
        text = {int(k): v for k, v in coeffs.items()}
        return cls(tuple(parse_coefficient(text.get(k, "0")) for k in range(n + 1)),
                   float(t0), float(horizon))

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    def with_horizon(self, horizon: float) -> "PolyODE":
        return PolyODE(self.coeffs, self.t0, horizon)

    def coeff(self, k: int, t: float) -> float:
        return self._scalar[k](t)

    def coeffs_at(self, t: float) -> list[float]:
        return [f(t) for f in self._scalar]

    def coeff_fn(self, k: int) -> Callable[[float], float]:
        return self._scalar[k]

    def coeff_grid(self, t: np.ndarray) -> np.ndarray:
        """Coefficients on a grid, shape ``(n + 1, len(t))``."""
        t = np.asarray(t, dtype=float)
        return np.stack([f(t) for f in self._vector])

    def poly(self, t: float, y: float) -> float:
        """``sum_k a_k(t) y^k`` by Horner's scheme."""
        acc = 0.0
        for f in reversed(self._scalar):
            acc = acc * y + f(t)
        return acc


def rhs(ode: PolyODE, t: float, y: float) -> float:
    """``y' = -sum a_k(t) y^k``."""
    return -ode.poly(t, y)


def reflect(ode: PolyODE) -> PolyODE:
    """The equation for ``z(s) = -y(-s)``: coefficients ``(-1)^k a_k(-s)`` on ``[-T, -t0]``."""
    coeffs = []
    for k, c in enumerate(ode.coeffs):
        c = substitute_t(c, Neg(T()))
        coeffs.append(Neg(c) if k % 2 else c)
    return PolyODE(tuple(coeffs), -ode.horizon, -ode.t0)


def sign_flipped(ode: PolyODE) -> PolyODE:
    """Coefficients ``(-1)^(k+1) a_k`` on the same interval (equation for ``-y``)."""
    coeffs = tuple(c if k % 2 else Neg(c) for k, c in enumerate(ode.coeffs))
    return PolyODE(coeffs, ode.t0, ode.horizon)


# -- kernels ---------------------------------------------------------------

def s_poly(k: int, u, v):
    """``S_k(u, v) = sum_{j<k} u^j v^(k-1-j)``, so that ``u^k - v^k = (u - v) S_k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    s = 1.0
    p = 1.0
    for _ in range(k - 1):
        p = p * v
        s = s * u + p
    return s


def _kernel_sum(a: Sequence[float], u, v, k_start: int, weight=None):
    # sum_{k>=k_start} w_k a_k S_k(u, v), building S_k incrementally:
    # S_{k+1} = u S_k + v^k
    total = 0.0
    s = 1.0
    vp = 1.0
    for k in range(1, len(a)):
        if k > 1:
            vp = vp * v
            s = s * u + vp
        if k >= k_start:
            ak = a[k] if weight is None else weight(k, a[k])
            total = total + ak * s
    return total


def d_kernel(ode: PolyODE, t: float, u, v):
    """``D(t, u, v) = sum_{k=1}^n a_k(t) S_k(u, v)``."""
    return _kernel_sum(ode.coeffs_at(t), u, v, 1)


def _all_pos(k, ak):
    return max(ak, 0.0)


def _even_pos(k, ak):
    return max(ak, 0.0) if k % 2 == 0 else 0.0


def majorant_from_coeffs(a: Sequence[float], u, v, mode: str):
    if mode == ALL_POSITIVE_PARTS:
        w = _all_pos
    elif mode == EVEN_POSITIVE_PARTS:
        w = _even_pos
    else:
        raise ValueError(f"unknown majorant mode {mode!r}")
    return _kernel_sum(a, u, v, 2, w) + a[1]


def d1_majorant(ode: PolyODE, t: float, u, v, mode: str = ALL_POSITIVE_PARTS):
    """Monotone-in-``u`` upper bound for ``D(t, u, v)``.

    ``ALL_POSITIVE_PARTS``: ``sum_{k>=2} a_k^+ S_k(u, v) + a_1`` (dominates D for ``v >= 0``).
    ``EVEN_POSITIVE_PARTS``: keeps only even ``k`` terms, which dominates D when
    ``(-1)^k a_k >= 0``.
    """
    return majorant_from_coeffs(ode.coeffs_at(t), u, v, mode)


# -- dense output ----------------------------------------------------------

class Dense:
    """Piecewise polynomial interpolant through accepted steps.

    ``t`` has shape (N,), ``y`` and ``dy`` shape (N,) or (N, m).  With
    ``coef`` of shape (N-1, 4[, m]) step ``i`` is the quartic
    ``y_i + sum_j coef[i, j] s^(j+1)`` in ``s = (q - t_i) / h`` (the stepper's
    continuous extension); otherwise cubic Hermite from ``y`` and ``dy``.
    """

    def __init__(self, t, y, dy, coef=None):
        self.t = np.asarray(t, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.dy = np.asarray(dy, dtype=float)
        self.coef = None if coef is None else np.asarray(coef, dtype=float)
        self._tl = self.t.tolist()
        if self.coef is not None and self.y.ndim == 1:
            self._cl = self.coef.tolist()
            self._yl = self.y.tolist()

    @property
    def lo(self) -> float:
        return self._tl[0]

    @property
    def hi(self) -> float:
        return self._tl[-1]

    def _check(self, lo, hi):
        span = self._tl[-1] - self._tl[0]
        slack = 1e-12 * max(1.0, abs(span), abs(self._tl[-1]))
        if lo < self._tl[0] - slack or hi > self._tl[-1] + slack:
            raise ValueError(f"query [{lo}, {hi}] outside covered range "
                             f"[{self._tl[0]}, {self._tl[-1]}]")

    def __call__(self, q):
        if np.ndim(q) == 0:
            return self.scalar(float(q))
        q = np.asarray(q, dtype=float)
        if q.size == 0:
            return np.empty(q.shape + self.y.shape[1:])
        self._check(q.min(), q.max())
        t = self.t
        if len(t) == 1:
            return np.broadcast_to(self.y[0], q.shape + self.y.shape[1:]).copy()
        i = np.clip(np.searchsorted(t, q, side="right") - 1, 0, len(t) - 2)
        h = t[i + 1] - t[i]
        s = (q - t[i]) / h
        if self.y.ndim == 2:
            s = s[..., None]
            h = h[..., None]
        if self.coef is not None:
            c = self.coef[i]
            if self.y.ndim == 2:
                return self.y[i] + s * (c[:, 0] + s * (c[:, 1] + s * (c[:, 2] + s * c[:, 3])))
            return self.y[i] + s * (c[..., 0] + s * (c[..., 1] + s * (c[..., 2] + s * c[..., 3])))
        s2 = s * s
        s3 = s2 * s
        return ((2 * s3 - 3 * s2 + 1) * self.y[i] + (s3 - 2 * s2 + s) * h * self.dy[i]
                + (-2 * s3 + 3 * s2) * self.y[i + 1] + (s3 - s2) * h * self.dy[i + 1])

    def scalar(self, q: float):
        tl = self._tl
        n = len(tl)
        if n == 1:
            return self.y[0]
        if q < tl[0] or q > tl[-1]:
            self._check(q, q)
        i = bisect.bisect_right(tl, q) - 1
        if i < 0:
            i = 0
        elif i > n - 2:
            i = n - 2
        h = tl[i + 1] - tl[i]
        s = (q - tl[i]) / h
        if self.coef is not None:
            if self.y.ndim == 1:
                c0, c1, c2, c3 = self._cl[i]
                return self._yl[i] + s * (c0 + s * (c1 + s * (c2 + s * c3)))
            c = self.coef[i]
            return self.y[i] + s * (c[0] + s * (c[1] + s * (c[2] + s * c[3])))
        s2 = s * s
        s3 = s2 * s
        return ((2 * s3 - 3 * s2 + 1) * self.y[i] + (s3 - 2 * s2 + s) * h * self.dy[i]
                + (-2 * s3 + 3 * s2) * self.y[i + 1] + (s3 - s2) * h * self.dy[i + 1])

    def component(self, j: int) -> "Dense":
        coef = None if self.coef is None else self.coef[:, :, j]
        return Dense(self.t, self.y[:, j], self.dy[:, j], coef)

    def reversed(self, sign: float = 1.0) -> "Dense":
        """Interpolant of ``sign * y(-q)`` on ``[-hi, -lo]``."""
        t = -self.t[::-1]
        y = sign * self.y[::-1]
        dy = -sign * self.dy[::-1]
        if self.coef is None:
            return Dense(t, y, dy)
        # p(1 - x) re-expanded in x, then steps reversed
        binom = np.array([[math.comb(j, k) * (-1.0) ** k if k <= j else 0.0
                           for j in range(1, 5)] for k in range(1, 5)])
        coef = np.tensordot(self.coef, binom, axes=([1], [1]))
        if coef.ndim == 3:
            coef = np.moveaxis(coef, 2, 1)
        return Dense(t, y, dy, sign * coef[::-1])


# -- Dormand-Prince 5(4) ---------------------------------------------------

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

# continuous extension of order 4: y(t + s h) = y + h sum_i k_i sum_j _P[i][j] s^(j+1)
_P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

_SAFETY = 0.9
_ALPHA = 0.7 / 5
_BETA = 0.4 / 5


def _err_norm(e, y, ynew, rtol, atol):
    if isinstance(e, float):
        return abs(e) / (atol + rtol * max(abs(y), abs(ynew)))
    return float(np.max(np.abs(e) / (atol + rtol * np.maximum(np.abs(y), np.abs(ynew)))))


def _dense_coef(ks, h, j):
    acc = 0.0 * ks[0]
    for row, k in zip(_P, ks):
        if row[j]:
            acc = acc + (h * row[j]) * k
    return acc


def _finite(x) -> bool:
    if isinstance(x, float):
        return math.isfinite(x)
    return bool(np.all(np.isfinite(x)))


def _magnitude(x) -> float:
    if isinstance(x, float):
        return abs(x)
    return float(np.max(np.abs(x)))


def _runaway(y, dy, span: float) -> bool:
    """Growing away from the origin on a time scale far below the horizon."""
    if np.ndim(y) or abs(y) <= 1.0 or y * dy <= 0.0:
        return False
    return abs(y) / abs(dy) < RUNAWAY_FRACTION * span


def _initial_step(f, t, y, f0, direction_span, rtol, atol):
    scale = atol + rtol * _magnitude(y)
    d0 = _magnitude(y) / scale
    d1 = _magnitude(f0) / scale
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    try:
        f1 = f(t + h0, y + h0 * f0)
        d2 = _magnitude(f1 - f0) / scale / h0
    except ExprDomainError:
        d2 = 0.0
    if not math.isfinite(d2):
        return h0 * 1e-3
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, direction_span)


@dataclass
class _Run:
    t: list
    y: list
    dy: list
    coef: list = field(default_factory=list)
    escaped_at: float | None = None
    failure: Exception | None = None
    failure_t: float | None = None


def _dopri(f, t0: float, y0, t1: float, rtol: float, atol: float,
           escape: float | None = None, h_floor_span: float | None = None) -> _Run:
    span = t1 - t0
    h_min = MIN_STEP_FRACTION * (h_floor_span if h_floor_span is not None else span)
    t = t0
    y = y0
    k1 = f(t, y)
    run = _Run([t], [y], [k1])
    # the heuristic can undershoot the floor when y0 is tiny but y' is not
    h = min(max(_initial_step(f, t, y, k1, span, rtol, atol), 100 * h_min), span)
    err_prev = 1.0
    rejected = False
    steps = 0
    tiny = 0
    domain_exc = None
    while t < t1:
        remaining = t1 - t
        if remaining <= max(h_min, 4 * math.ulp(abs(t1))):
            # close the final sliver without a full step
            lin = remaining * k1
            y = y + lin
            t = t1
            k1 = f(t, y)
            run.t.append(t); run.y.append(y); run.dy.append(k1)
            run.coef.append([lin, 0.0 * lin, 0.0 * lin, 0.0 * lin])
            break
        steps += 1
        tiny = tiny + 1 if h < STALL_FACTOR * h_min else 0
        if (escape is not None and tiny > STALL_STEPS
                and _runaway(y, k1, h_floor_span or span)):
            # crawling along a stiff escape route
            run.escaped_at = t
            return run
        if h < h_min or t + h == t or steps > MAX_STEPS:
            if escape is not None and (_magnitude(y) > escape
                                       or _runaway(y, k1, h_floor_span or span)):
                run.escaped_at = t
                return run
            if domain_exc is not None:
                run.failure, run.failure_t = domain_exc, t
                return run
            raise StepSizeUnderflow(f"step size {h:.3g} below floor at t={t:.10g}, |y|={_magnitude(y):.3g}")
        last = False
        if t + 1.1 * h >= t1:
            h = t1 - t
            last = True
        try:
            ks = [k1]
            for i in range(1, 6):
                yi = y
                for a, k in zip(_A[i], ks):
                    if a:
                        yi = yi + (h * a) * k
                ks.append(f(t + _C[i] * h, yi))
            ynew = y
            for b, k in zip(_B, ks):
                if b:
                    ynew = ynew + (h * b) * k
            k7 = f(t + h, ynew)
            ks.append(k7)
            e = 0.0 * y
            for c, k in zip(_E, ks):
                if c:
                    e = e + (h * c) * k
            err = _err_norm(e, y, ynew, rtol, atol)
        except (OverflowError, FloatingPointError):
            err = math.inf
            ynew = y
        except ExprDomainError as exc:
            domain_exc = exc
            err = math.inf
            ynew = y
        if not (_finite(ynew) and math.isfinite(err)):
            h *= 0.2
            rejected = True
            continue
        if err <= 1.0:
            run.coef.append([_dense_coef(ks, h, j) for j in range(4)])
            t = t1 if last else t + h
            y = ynew
            k1 = k7
            run.t.append(t); run.y.append(y); run.dy.append(k1)
            if err == 0.0:
                fac = 5.0
            else:
                fac = _SAFETY * err ** (-_ALPHA) * err_prev ** _BETA
                fac = min(5.0, max(0.2, fac))
            if rejected:
                fac = min(1.0, fac)
            h *= fac
            err_prev = max(err, 1e-4)
            rejected = False
            domain_exc = None
        else:
            h *= max(0.2, _SAFETY * err ** (-1 / 5))
            rejected = True
    return run


# -- trajectories ----------------------------------------------------------

@dataclass(frozen=True)
class ReachedEnd:
    pass


@dataclass(frozen=True)
class BlowUp:
    t_escape: float


@dataclass(frozen=True)
class DomainError:
    t: float
    message: str = ""


Status = Union[ReachedEnd, BlowUp, DomainError]


@dataclass(frozen=True)
class Trajectory:
    """Accepted steps of an integration plus termination status.

    Calling the trajectory evaluates the stepper's quartic dense output.
    """

    t: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    status: Status
    coef: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    _dense: Dense = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_dense", Dense(self.t, self.y, self.dy, self.coef))

    def __call__(self, t):
        return self._dense(t)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.y.tolist()))

    @property
    def reached_end(self) -> bool:
        return isinstance(self.status, ReachedEnd)

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def y_end(self) -> float:
        return float(self.y[-1])

    def reversed_reflection(self) -> "Trajectory":
        """Trajectory of ``y(t) = -z(-t)`` for this trajectory ``z``."""
        d = self._dense.reversed(-1.0)
        return Trajectory(d.t, d.y, d.dy, self.status, d.coef)


def integrate(ode: PolyODE, start_t: float, y0: float, end_t: float,
              tol: float = 1e-9) -> Trajectory:
    """Integrate from ``(start_t, y0)`` to ``end_t``.

    Stops with ``BlowUp`` once the step size has collapsed below
    ``1e-12 * (horizon - t0)`` while ``|y|`` exceeds ``ESCAPE_THRESHOLD`` or
    grows away from the origin with e-folding time under ``1e-4`` of the
    horizon span (the latter also after 1000 steps below ``1e-9`` of the
    span); stops with
    ``DomainError`` when a coefficient cannot be evaluated.
    """
    if not end_t > start_t:
        raise ValueError("end_t must exceed start_t")
    if tol <= 0:
        raise ValueError("tol must be positive")
    scalar = ode._scalar

    def f(t, y):
        acc = 0.0
        for c in reversed(scalar):
            acc = acc * y + c(t)
        return -acc

    try:
        run = _dopri(f, float(start_t), float(y0), float(end_t), tol, tol,
                     escape=ESCAPE_THRESHOLD, h_floor_span=ode.horizon - ode.t0)
    except ExprDomainError as exc:
        return Trajectory(np.array([float(start_t)]), np.array([float(y0)]), np.array([0.0]),
                          DomainError(float(start_t), str(exc)))
    if run.failure is not None:
        status = DomainError(run.failure_t, str(run.failure))
    elif run.escaped_at is not None:
        status = BlowUp(run.escaped_at)
    else:
        status = ReachedEnd()
    return Trajectory(np.array(run.t), np.array(run.y), np.array(run.dy), status,
                      _coef_array(run))


def _coef_array(run: _Run):
    if not run.coef:
        return None
    return np.array(run.coef, dtype=float)


def solve_dense(f, lo: float, y0, hi: float, tol: float) -> Dense:
    """Integrate a vector system with the same stepper and return its dense output."""
    run = _dopri(f, float(lo), np.asarray(y0, dtype=float), float(hi), tol, tol)
    if run.failure is not None:
        raise run.failure
    return Dense(run.t, np.array(run.y), np.array(run.dy), _coef_array(run))


# -- exp-weighted integrals ------------------------------------------------

def exp_weighted_profile(kernel: Callable[[float], float], weight: Callable[[float], float],
                         t_lo: float, t_hi: float, tol: float = 1e-10) -> Dense:
    """Dense output of ``(E(t), G(t))`` with ``E' = kernel``, ``G' = exp(E) weight``.

    So ``G(t) = int_{t_lo}^t exp{int_{t_lo}^tau kernel} weight(tau) dtau``.
    Raises :class:`QuadratureOverflow` if ``E`` passes ``LOG_OVERFLOW``.
    """
    def f(s, z):
        e = z[0]
        if e > LOG_OVERFLOW:
            raise QuadratureOverflow(s, e)
        return np.array([kernel(s), math.exp(e) * weight(s)])

    return solve_dense(f, t_lo, np.zeros(2), t_hi, tol)


def exp_weighted_integral(kernel: Callable[[float], float], weight: Callable[[float], float],
                          t_lo: float, t_hi: float, tol: float = 1e-10) -> float:
    """``int_{t_lo}^{t_hi} exp{int_{t_lo}^tau kernel(s) ds} weight(tau) dtau``."""
    prof = exp_weighted_profile(kernel, weight, t_lo, t_hi, tol)
    return float(prof.y[-1, 1])


def cauchy_residual(ode_a: PolyODE, ode_b: PolyODE, traj_a: Trajectory,
                    traj_b: Trajectory, t: float, tol: float = 1e-10) -> float:
    """``|LHS - RHS|`` of the variation-of-constants identity between two solutions.

    With ``y0`` solving ``ode_a`` and ``y1`` solving ``ode_b`` from a common start,
    ``y0(t) - y1(t) = exp{-int D} [y0(t1) - y1(t1) - int exp{int D} sum (a_k - b_k) y1^k]``
    where ``D`` is the kernel of ``ode_a`` along both trajectories.
    """
    if ode_a.n != ode_b.n:
        raise ValueError("equations must share the degree")
    t1 = float(max(traj_a.t[0], traj_b.t[0]))
    ya, yb = traj_a._dense.scalar, traj_b._dense.scalar
    lhs = ya(t) - yb(t)
    if t == t1:
        return abs(lhs - (ya(t1) - yb(t1)))

    def kernel(s):
        return _kernel_sum(ode_a.coeffs_at(s), ya(s), yb(s), 1)

    def weight(s):
        a = ode_a.coeffs_at(s)
        b = ode_b.coeffs_at(s)
        y1 = yb(s)
        acc = 0.0
        for ak, bk in zip(reversed(a), reversed(b)):
            acc = acc * y1 + (ak - bk)
        return acc

    prof = exp_weighted_profile(kernel, weight, t1, t, tol)
    e_int, g = prof.y[-1]
    rhs_val = math.exp(-e_int) * (ya(t1) - yb(t1) - g)
    return abs(lhs - rhs_val)


@dataclass(frozen=True)
class IGammaBound:
    """``I_gamma(t) = exp{-A(t)} [gamma + int exp{A} |a_0|]`` with ``A = int a_1``."""

    gamma: float
    profile: Dense

    def value_at(self, t):
        z = self.profile(t)
        if np.ndim(t) == 0:
            return math.exp(-z[0]) * (self.gamma + z[1])
        return np.exp(-z[:, 0]) * (self.gamma + z[:, 1])

    __call__ = value_at


def i_gamma(ode: PolyODE, gamma: float, tol: float = 1e-10) -> IGammaBound:
    a1, a0 = ode.coeff_fn(1), ode.coeff_fn(0)
    prof = exp_weighted_profile(a1, lambda s: abs(a0(s)), ode.t0, ode.horizon, tol)
    return IGammaBound(float(gamma), prof)


# -- sampled extrema -------------------------------------------------------

def sample_extremum(fn: Callable, lo: float, hi: float, mode: str = "max",
                    n: int = 4096, inflate: float = 0.0) -> tuple[float, float]:
    """Max (or min) of ``fn`` over ``[lo, hi]`` by dense sampling plus local refinement.

    ``fn`` must accept numpy arrays.  Returns ``(value, argument)``; the value is
    pushed outward by ``inflate``.
    """
    sign = 1.0 if mode == "max" else -1.0
    grid = np.linspace(lo, hi, n)
    vals = sign * np.asarray(fn(grid), dtype=float)
    i = int(np.argmax(vals))
    best_t, best = float(grid[i]), float(vals[i])
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, n - 1)]
    if b > a:
        res = minimize_scalar(lambda s: -sign * float(fn(np.array([s]))[0]),
                              bounds=(a, b), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, abs(hi - lo))})
        if res.success and -res.fun > best:
            best_t, best = float(res.x), float(-res.fun)
    return sign * best + sign * inflate, best_t
