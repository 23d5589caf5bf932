"""Equation spec files: JSON with coefficient expressions, an optional split and parameters."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .core import PolyODE

FIXTURE_PACKAGE = "polyode.fixtures"
CORPUS = "corpus.json"


class SpecError(ValueError):
    """The spec file is missing, malformed or does not describe a valid equation."""


@dataclass
class EquationSpec:
    n: int
    t0: float
    T: float
    coefficients: dict
    split: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    description: str = ""
    name: Optional[str] = None

    def ode(self) -> PolyODE:
        try:
            return PolyODE.from_strings(self.n, self.coefficients, self.t0, self.T)
        except (ValueError, KeyError, TypeError) as exc:
            raise SpecError(f"invalid equation: {exc}") from exc

    def theorem_params(self, overrides: Optional[dict] = None) -> dict:
        """Spec parameters plus the split, with ``overrides`` taking precedence."""
        out = dict(self.params)
        if self.split:
            out.setdefault("split", self.split)
        out.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return out


def fixture_names() -> list[str]:
    names = []
    for entry in resources.files(FIXTURE_PACKAGE).iterdir():
        if entry.name.endswith(".json") and entry.name != CORPUS:
            names.append(entry.name[:-5])
    return sorted(names)


def _read_text(path_or_name: str) -> tuple[str, Optional[str]]:
    if os.path.exists(path_or_name):
        with open(path_or_name, encoding="utf-8") as f:
            return f.read(), None
    base = os.path.basename(path_or_name)
    name = base[:-5] if base.endswith(".json") else base
    res = resources.files(FIXTURE_PACKAGE).joinpath(f"{name}.json")
    if res.is_file():
        return res.read_text(encoding="utf-8"), name
    raise SpecError(f"no such spec file or bundled fixture: {path_or_name}")


def parse_spec(data: dict, name: Optional[str] = None) -> EquationSpec:
    if not isinstance(data, dict):
        raise SpecError("spec must be a JSON object")
    try:
        n = int(data["n"])
        t0 = float(data.get("t0", 0.0))
        T = float(data["T"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"spec needs numeric 'n' and 'T': {exc}") from exc
    coeffs = {}
    for k, v in (data.get("coefficients") or {}).items():
        try:
            kk = int(k)
        except ValueError as exc:
            raise SpecError(f"coefficient key {k!r} is not an integer") from exc
        if not 0 <= kk <= n:
            raise SpecError(f"coefficient index {kk} outside 0..{n}")
        coeffs[kk] = str(v)
    split = {}
    for k, v in (data.get("split") or {}).items():
        if not isinstance(v, (list, tuple)) or len(v) != 2:
            raise SpecError(f"split entry {k!r} must be a [c_k, d_k] pair")
        split[int(k)] = (str(v[0]), str(v[1]))
    params = dict(data.get("params") or {})
    spec = EquationSpec(n, t0, T, coeffs, split, params, str(data.get("description", "")), name)
    spec.ode()
    return spec


def load_spec(path_or_name: str) -> EquationSpec:
    """Load a spec from a path, falling back to a bundled fixture of that name."""
    text, name = _read_text(path_or_name)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from exc
    return parse_spec(data, name or os.path.splitext(os.path.basename(path_or_name))[0])


def load_corpus(path: Optional[str] = None) -> list[dict]:
    if path is None:
        text = resources.files(FIXTURE_PACKAGE).joinpath(CORPUS).read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    return json.loads(text)["entries"]
