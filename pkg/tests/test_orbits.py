import pytest
from mpmath import mp

from entropy_rigidity.errors import AdmissibilityError, ValidationError
from entropy_rigidity.geometry import symmetric_three_disks
from entropy_rigidity.orbits import find_homoclinic_segment, find_periodic_orbit, orbit_flow_exponent


def test_two_periodic_orbit_closed_form(three_disks):
    o = find_periodic_orbit(three_disks, "12")
    mu = 5 + 2 * mp.sqrt(6)
    assert abs(o.flow_period - 8) < 1e-70
    assert abs(o.lam - 1 / mu ** 2) < 1e-70
    assert abs(o.LE - mp.log(mu)) < 1e-70
    assert abs(orbit_flow_exponent(o) - mp.log(mu ** 2) / 8) < 1e-70
    assert abs(o.trace - 98) < 1e-60
    assert all(abs(ph) < 1e-70 for ph in o.collision_angles)


def test_inadmissible_word(three_disks):
    with pytest.raises(AdmissibilityError):
        find_periodic_orbit(three_disks, "11")


@pytest.mark.parametrize("word", ["123", "1213", "12123"])
def test_rotation_and_reversal_invariance(tables, word):
    for t in tables.values():
        base = find_periodic_orbit(t, word)
        rot = find_periodic_orbit(t, word[1:] + word[0])
        rev = find_periodic_orbit(t, word[::-1])
        for o in (rot, rev):
            assert abs(o.lam - base.lam) < 1e-50 * (1 + abs(base.lam))
            assert abs(o.flow_period - base.flow_period) < 1e-60


def test_area_preservation(tables):
    for t in tables.values():
        for word in ("12", "123", "1213"):
            o = find_periodic_orbit(t, word)
            assert abs(o.det - 1) < 1e-30
            assert abs(o.matrix_det - 1) < 1e-30


def test_exponent_scales_inversely_with_the_table():
    small = find_periodic_orbit(symmetric_three_disks("6", "1"), "123")
    big = find_periodic_orbit(symmetric_three_disks("12", "2"), "123")
    assert abs(big.lam - small.lam) < 1e-60
    assert abs(orbit_flow_exponent(big) * 2 - orbit_flow_exponent(small)) < 1e-60


def test_repeated_word_has_the_same_exponent(three_disks):
    o = find_periodic_orbit(three_disks, "12")
    oo = find_periodic_orbit(three_disks, "1212")
    assert abs(orbit_flow_exponent(oo) - orbit_flow_exponent(o)) < 1e-60
    assert abs(oo.lam - o.lam ** 2) < 1e-70


def test_odd_period_multiplier_is_signed(three_disks):
    # the 123 orbit flips orientation along the triangle: lambda < 0
    o = find_periodic_orbit(three_disks, "123")
    assert o.lam < 0 and abs(o.lam) < 1


def test_homoclinic_segment(flagship, three_disks):
    seg = flagship["seg"]
    assert seg.transversality_angle > 1e-2
    assert str(seg.word) == "12" * 6 + "13" + "12" * 6
    assert seg.residual < 1e-60
    deeper = find_homoclinic_segment(three_disks, "12", "13", 8, core=flagship["core"])
    a, b = seg.anchors[0], deeper.anchors[0]
    assert abs(a.s - b.s) < 1e-20 and abs(a.phi - b.phi) < 1e-20
    assert abs(seg.w_1 - deeper.w_1) < 1e-15


def test_homoclinic_rejects_trivial_connector(three_disks):
    with pytest.raises(ValidationError):
        find_homoclinic_segment(three_disks, "12", "12", 3)
    with pytest.raises(ValidationError):
        find_homoclinic_segment(three_disks, "12", "13", 0)
