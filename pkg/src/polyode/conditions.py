"""Grid-sampled hypothesis checks shared by the builders and the theorem drivers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

DEFAULT_GRID = 2048
STRICT_EPS = 1e-9
DEFAULT_TOL = 1e-9
U_SAMPLES = 41
U_RATIO = 1.25


@dataclass
class Condition:
    """One checked hypothesis.

    ``margin`` is signed distance from violation: the condition holds when
    ``margin >= -tol`` (or ``margin > 0`` when ``strict``).  A ``nan`` margin
    marks an inconclusive check.
    """

    label: str
    margin: float
    witness_t: Optional[float] = None
    witness_u: Optional[float] = None
    note: str = ""
    strict: bool = False

    @property
    def inconclusive(self) -> bool:
        return math.isnan(self.margin)

    def passed(self, tol: float = DEFAULT_TOL) -> bool:
        if self.inconclusive:
            return False
        return self.margin > 0 if self.strict else self.margin >= -tol

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "margin": None if self.inconclusive else float(self.margin),
            "witness_t": None if self.witness_t is None else float(self.witness_t),
            "witness_u": None if self.witness_u is None or not math.isfinite(self.witness_u)
            else float(self.witness_u),
            "note": self.note,
        }


class HypothesisViolated(ValueError):
    """A construction's hypotheses fail; carries the failing condition."""

    def __init__(self, condition: Condition, message: str = ""):
        wt = "" if condition.witness_t is None else f" at t={condition.witness_t:.6g}"
        wu = "" if condition.witness_u is None else f", u={condition.witness_u:.6g}"
        super().__init__(message or f"condition {condition.label} violated{wt}{wu} "
                                    f"(margin {condition.margin:.3g})")
        self.condition = condition

    @property
    def label(self) -> str:
        return self.condition.label

    @property
    def witness_t(self):
        return self.condition.witness_t


class DegenerateDenominator(HypothesisViolated):
    pass


def grid(lo: float, hi: float, n: int = DEFAULT_GRID) -> np.ndarray:
    return np.linspace(lo, hi, n)


def grid_min(fn: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
             n: int = DEFAULT_GRID, refine: int = 4) -> tuple[float, float]:
    """Minimum of a vectorized ``fn`` on a grid, refined ``refine``-fold near the worst sample."""
    ts = grid(lo, hi, n)
    vals = np.asarray(fn(ts), dtype=float)
    i = int(np.argmin(vals))
    best, best_t = float(vals[i]), float(ts[i])
    if refine > 1 and n > 1:
        a, b = ts[max(i - 1, 0)], ts[min(i + 1, n - 1)]
        fine = np.linspace(a, b, 8 * refine + 1)
        fv = np.asarray(fn(fine), dtype=float)
        j = int(np.argmin(fv))
        if fv[j] < best:
            best, best_t = float(fv[j]), float(fine[j])
    return best, best_t


def pointwise(label: str, fn: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
              n: int = DEFAULT_GRID, strict: bool = False, strict_eps: float = STRICT_EPS,
              note: str = "") -> Condition:
    """``fn(t) >= 0`` (or ``> 0`` when ``strict``) on ``[lo, hi]``."""
    m, t = grid_min(fn, lo, hi, n)
    if strict:
        m -= strict_eps
    return Condition(label, m, t, note=note, strict=strict)


def u_polynomial(label: str, coef_fn: Callable[[np.ndarray], np.ndarray], u_min: float,
                 lo: float, hi: float, n: int = DEFAULT_GRID, note: str = "") -> Condition:
    """``sum_k d_k(t) u^k >= 0`` for all ``u >= u_min``, sampled.

    ``coef_fn(ts)`` returns shape ``(K, len(ts))`` with row ``k`` the coefficient
    of ``u^k``.  The sampled values are scaled by ``u^(K-1)``; the sign of the
    highest nonvanishing coefficient is checked separately as the ``u -> inf``
    limit.  A pass is grid-verified only.
    """
    ts = grid(lo, hi, n)
    d = np.asarray(coef_fn(ts), dtype=float)
    deg = d.shape[0] - 1
    us = u_min * U_RATIO ** np.arange(U_SAMPLES)
    powers = us[:, None] ** np.arange(deg + 1)[None, :]  # (U, K)
    vals = (powers @ d) / us[:, None] ** max(deg, 0)     # (U, N)
    iu, it = np.unravel_index(int(np.argmin(vals)), vals.shape)
    margin, wt, wu = float(vals[iu, it]), float(ts[it]), float(us[iu])
    # leading-coefficient sign
    scale = np.max(np.abs(d), axis=0)
    thresh = 1e-12 * np.maximum(scale, 1e-300)
    lead = np.zeros(len(ts))
    found = np.zeros(len(ts), dtype=bool)
    for k in range(deg, -1, -1):
        take = (~found) & (np.abs(d[k]) > thresh)
        lead[take] = d[k][take]
        found |= take
    il = int(np.argmin(lead))
    if lead[il] < 0 and lead[il] < margin:
        margin, wt, wu = float(lead[il]), float(ts[il]), math.inf
    return Condition(label, margin, wt, wu, note=note or "grid-verified in u")


def parity(label: str, n: int, odd: bool = True) -> Condition:
    ok = (n % 2 == 1) == odd
    return Condition(label, 1.0 if ok else -1.0, note=f"n = {n}")


def scalar(label: str, margin: float, note: str = "") -> Condition:
    return Condition(label, float(margin), note=note)


def inconclusive(label: str, note: str, t: float | None = None) -> Condition:
    return Condition(label, math.nan, t, note=note)
