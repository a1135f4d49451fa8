import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from mpmath import mp

from entropy_rigidity.errors import CapabilityError, PreconditionError, ValidationError
from entropy_rigidity.geometry import (BilliardTable, Circle, Ellipse, FourierCircle, curvature, curve_eval,
                                       load_table, non_eclipse_check, symmetric_three_disks)


def test_unit_circle_position_and_tangent():
    P, T = curve_eval(Circle(["0", "0"], "1"), mp.mpf(0), 1)
    assert P == (1, 0)
    assert abs(T[0]) < 1e-70 and abs(T[1] - 1) < 1e-70


def test_circle_radius_two_quarter_turn():
    (P,) = curve_eval(Circle(["1", "-1"], "2"), +mp.pi, 0)
    assert abs(P[0] - 1) < 1e-70 and abs(P[1] - 1) < 1e-70


def test_fourier_circle_tangent_matches_finite_difference():
    c = FourierCircle(["0", "0"], "1", ["0.05"])
    P, T = curve_eval(c, mp.mpf(0), 1)
    h = mp.mpf("1e-20")
    Pp = curve_eval(c, h, 0)[0]
    Pm = curve_eval(c, c.length - h, 0)[0]
    fd = ((Pp[0] - Pm[0]) / (2 * h), (Pp[1] - Pm[1]) / (2 * h))
    assert max(abs(fd[0] - T[0]), abs(fd[1] - T[1])) < 1e-10


def test_curvature_conventions():
    assert abs(curvature(Circle(["0", "0"], "3"), mp.mpf("0.7")) - mp.mpf(1) / 3) < 1e-70
    # end of the major axis of a=2, b=1: a / b^2
    assert abs(curvature(Ellipse(["0", "0"], "2", "1"), mp.mpf(0)) - 2) < 1e-60
    # end of the minor axis: b / a^2
    e = Ellipse(["0", "0"], "2", "1")
    assert abs(curvature(e, e.length / 4) - mp.mpf(1) / 4) < 1e-60


def test_nonconvex_fourier_circle_rejected():
    with pytest.raises(ValidationError):
        FourierCircle(["0", "0"], "1", ["0.5"])


def test_jet_ceiling_is_a_capability_error():
    with pytest.raises(CapabilityError):
        curve_eval(Circle(["0", "0"], "1"), mp.mpf(0), 40)


def test_non_eclipse_margin_symmetric_table():
    t = symmetric_three_disks("6", "1")
    # third centre at height 3 sqrt 3 above the strip |y| <= 1 of the other two
    assert t.report.passed
    assert abs(t.report.margin - (3 * math.sqrt(3) - 2)) < 1e-3
    assert t.report.margin <= 3 * math.sqrt(3) - 2


def test_nearly_touching_disks_fail():
    with pytest.raises(ValidationError):
        symmetric_three_disks("2.05", "1")
    rep = non_eclipse_check(BilliardTable([Circle(["0", "0"], "1"), Circle(["2.05", "0"], "1"),
                                           Circle(["1.025", "1.775"], "1")], validate=False))
    assert not rep.passed and rep.witness is not None


def test_two_obstacles_is_a_precondition_error():
    with pytest.raises(PreconditionError):
        BilliardTable([Circle(["0", "0"], "1"), Circle(["4", "0"], "1")])


def test_bundled_tables_load(tables):
    for t in tables.values():
        assert t.m >= 3 and t.report.passed
        assert t.perimeter() > 0


def test_malformed_table_file(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("[table]\nname = x\n[obstacle 1]\nkind = square\ncenter = 0, 0\n")
    with pytest.raises(ValidationError):
        load_table(str(p))
    with pytest.raises(ValidationError):
        load_table(str(tmp_path / "missing.cfg"))


CURVES = [Circle(["0.5", "-1"], "1.3"), Ellipse(["0", "0"], "1.2", "0.9", "0.3"),
          FourierCircle(["6", "0"], "1", ["0.03", "0.01"], ["0.5", "0"])]


@given(k=st.integers(0, 2), u=st.floats(0, 1, exclude_max=True))
def test_unit_speed_and_curvature_agree(k, u):
    mp.prec = 128
    c = CURVES[k]
    s = c.length * mp.mpf(u)
    P, T, A = curve_eval(c, s, 2)
    assert abs(T[0] ** 2 + T[1] ** 2 - 1) < 1e-30
    assert abs((T[0] * A[1] - T[1] * A[0]) - curvature(c, s)) < 1e-10
    assert curvature(c, s) > 0


def test_arclength_inverse_roundtrip():
    c = CURVES[2]
    for t in np.linspace(0.1, 6.2, 7):
        t = mp.mpf(float(t))
        assert abs(c.t_of_s(c.s_of_t(t)) - t) < 1e-60
