import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from conftest import make_ode
from polyode.core import integrate
from polyode.criteria import (INCONCLUSIVE, NON_NEGATIVE, NON_POSITIVE, SATISFIED, THEOREMS,
                              VIOLATED, Settings, check_boundary_conditions,
                              check_integral_condition, check_pointwise_conditions,
                              check_theorem, check_usable_sequence_condition)
from polyode.specio import load_spec

# frozen on the degree-six fixture; converged to 1e-10 as quad_tol goes 1e-10 -> 1e-13
EX51_MARGIN_7 = -0.3076355502413378
EX51_MARGIN_6 = -0.16142481338425616


def failing(report):
    return sorted(c.label for c in report.conditions if not c.inconclusive and not c.passed())


class TestIntegralCondition:
    def test_negative_weight_holds(self):
        ode = make_ode(1, {})
        c = check_integral_condition(ode, lambda s: 0.0, lambda s: -1.0, 0.0, (0.0, 1.0))
        # worst case over the grid is the start point, where G = 0
        assert c.passed()
        assert c.margin == pytest.approx(0.0, abs=1e-12)
        assert c.witness_t == pytest.approx(0.0)

    def test_end_value_distance(self):
        ode = make_ode(1, {})
        c = check_integral_condition(ode, lambda s: 0.0, lambda s: -1.0, 0.0, (0.0, 1.0),
                                     sense=NON_NEGATIVE)
        assert c.margin == pytest.approx(-1.0, abs=1e-9)
        assert c.witness_t == pytest.approx(1.0)

    def test_zero_weight(self):
        c = check_integral_condition(make_ode(1, {}), lambda s: 1.0, lambda s: 0.0, 0.0)
        assert c.margin == 0.0
        assert c.note == "identically zero"

    def test_offset_shifts_margin(self):
        c = check_integral_condition(make_ode(1, {}), lambda s: 1.0, lambda s: 1.0, -5.0)
        assert c.margin == pytest.approx(5.0 - (math.e - 1), abs=1e-8)

    def test_overflow_is_inconclusive(self):
        c = check_integral_condition(make_ode(1, {}), lambda s: 1e4, lambda s: 1.0, 0.0)
        assert c.inconclusive

    def test_degree_six_fixture_condition_seven(self):
        spec = load_spec("ex51")
        rep = check_theorem(spec.ode(), "T5.3", spec.theorem_params())
        assert rep.condition("7⁰").margin == pytest.approx(EX51_MARGIN_7, abs=1e-8)
        assert rep.condition("6⁰").margin == pytest.approx(EX51_MARGIN_6, abs=1e-8)

    def test_bad_sense(self):
        with pytest.raises(ValueError):
            check_integral_condition(make_ode(1, {}), lambda s: 0.0, lambda s: 1.0, 0.0,
                                     sense="sideways")


class TestUsableSequence:
    def test_zero_forcing(self):
        segs = check_usable_sequence_condition(make_ode(2, {}), [0.0, 0.5, 1.0])
        assert [s.margin for s in segs] == [0.0, 0.0]

    def test_negative_forcing_against_quad(self):
        segs = check_usable_sequence_condition(make_ode(2, {0: -1, 2: 1}), [0.0, 1.0])
        # K = -s, E = tau^2 / 2
        want, _ = quad(lambda t: -math.exp(t * t / 2), 0, 1, epsabs=1e-14)
        assert segs[0].end_value == pytest.approx(want, abs=1e-9)
        assert segs[0].condition().passed()

    def test_positive_forcing(self):
        segs = check_usable_sequence_condition(make_ode(2, {0: 1}), [0.0, 1.0])
        assert segs[0].margin < 0
        assert segs[0].witness_t > 0

    @pytest.mark.parametrize("part", [[0.0], [0.0, 0.6, 0.5, 1.0], [0.1, 1.0], [0.0, 0.9]])
    def test_bad_partition(self, part):
        with pytest.raises(ValueError):
            check_usable_sequence_condition(make_ode(2, {}), part)


class TestPointwise:
    def test_corollary_on_degree_six_fixture(self):
        spec = load_spec("ex51")
        conds = {c.label: c for c in check_pointwise_conditions(spec.ode(), "C5.1", {"j": 2})}
        s = conds["sum_(k>=2) (-1)^k a_k>0"]
        assert s.margin == pytest.approx(1.0, abs=1e-9)
        assert all(conds[f"(-1)^{k} a_{k}>=0"].passed() for k in range(2, 7))
        assert conds["a_0<=0"].margin == pytest.approx(-1.0, abs=1e-6)

    def test_degree_seven_fixture(self):
        spec = load_spec("ex52")
        conds = check_pointwise_conditions(spec.ode(), "T5.5", spec.theorem_params())
        assert all(c.passed() for c in conds)
        assert {"12⁰ a_7>=0", "16⁰ n odd"} <= {c.label for c in conds}

    def test_parity(self):
        conds = check_pointwise_conditions(make_ode(2, {2: 1}), "T4.7")
        assert not conds[0].passed()


class TestBoundary:
    def test_weighted_forcing_vanishes(self):
        ode = make_ode(2, {0: "sin(t)"}, T=2 * math.pi)
        conds = check_boundary_conditions(ode, "T5.5")
        assert [c.label for c in conds] == ["17⁰", "18⁰"]
        assert all(c.passed() for c in conds)

    def test_zero_data(self):
        (c,) = check_boundary_conditions(make_ode(2, {}), "T5.4", {"c": 0.0})
        assert c.margin == 0.0

    def test_relaxation(self):
        (c,) = check_boundary_conditions(make_ode(2, {1: 1}), "T5.4", {"c": 1.0})
        assert c.margin == pytest.approx(math.e - 1, abs=1e-9)


class TestDrivers:
    def test_corollary_nonnegative_solutions(self):
        assert check_theorem(make_ode(2, {2: 1}, T=5), "C4.1").verdict == SATISFIED

    def test_two_sided_comparison(self):
        spec = load_spec("ex53")
        rep = check_theorem(spec.ode(), "T3.2", spec.theorem_params())
        assert rep.verdict == SATISFIED
        assert rep.condition("(III)").passed() and rep.condition("(IV)").passed()

    def test_first_condition_fails(self):
        rep = check_theorem(make_ode(2, {2: -1}, T=2), "T5.1")
        assert rep.verdict == VIOLATED
        bad = [c for c in rep.conditions if not c.passed()]
        assert bad and all(c.label.startswith("1⁰") for c in bad)
        assert bad[0].witness_t is not None

    def test_degree_seven_fixture(self):
        spec = load_spec("ex52")
        assert check_theorem(spec.ode(), "T5.5", spec.theorem_params()).satisfied

    def test_underscore_ids(self):
        a = check_theorem(make_ode(2, {2: 1}, T=5), "C4_1")
        assert a.theorem == "C4.1"

    def test_unknown_theorem(self):
        with pytest.raises(ValueError):
            check_theorem(make_ode(2, {2: 1}), "T9.9")

    def test_overflow_reports_inconclusive(self):
        rep = check_theorem(make_ode(2, {0: -1, 1: -800, 2: 1}, T=1), "T4.3", {"gamma": 1.0})
        assert rep.verdict in (INCONCLUSIVE, VIOLATED)

    def test_report_json_is_stable(self):
        spec = load_spec("ex53")
        a = check_theorem(spec.ode(), "T3.2", spec.theorem_params()).to_json()
        b = check_theorem(spec.ode(), "T3.2", spec.theorem_params()).to_json()
        assert a == b
        doc = json.loads(a)
        assert doc["schema_version"] == 1
        assert {"theorem", "verdict", "conditions", "params", "grid", "interval"} <= set(doc)

    def test_comparison_needs_coefficients(self):
        with pytest.raises(ValueError, match="y1_0"):
            check_theorem(make_ode(3, {3: 1}), "T3.1", {"b": {3: "1"}})

    @pytest.mark.parametrize("tid", [t for t in THEOREMS if t not in ("T3.1", "T3.2")])
    def test_every_driver_runs(self, tid):
        spec = load_spec("ex52")
        rep = check_theorem(spec.ode(), tid, spec.theorem_params(), Settings(grid=512))
        assert rep.verdict in (SATISFIED, VIOLATED, INCONCLUSIVE)
        assert rep.conditions


class TestSoundness:
    @settings(max_examples=15, deadline=None)
    @given(st.floats(0.0, 2.0), st.floats(0.2, 3.0), st.floats(0.0, 1.0), st.floats(0, 1))
    def test_corollary_bounds_hold(self, p, q, r, u):
        ode = make_ode(3, {0: f"-{p}*(1+sin(5*t))/2", 1: r, 2: q, 3: 0.5}, T=3.0)
        rep = check_theorem(ode, "C4.1", settings=Settings(grid=512))
        if rep.verdict != SATISFIED:
            return
        lo, hi = rep.bracket
        gamma = lo + u * (hi - lo)
        traj = integrate(ode, ode.t0, gamma, ode.horizon, 1e-10)
        assert traj.reached_end
        ts = np.linspace(ode.t0, ode.horizon, 200)
        ys = traj(ts)
        assert np.all(ys >= rep.lower(ts) - 1e-6)
        assert np.all(ys <= rep.upper(ts) + 1e-6)
