import pytest
from hypothesis import given, strategies as st
from mpmath import mp

from entropy_rigidity.billiard import (PhasePoint, billiard_derivative, billiard_step, cycle_jet, iterate,
                                       jet_collision_step, random_phase_points)
from entropy_rigidity.errors import EscapeError, GrazingError, ValidationError
from entropy_rigidity.geometry import BilliardTable, Circle
from entropy_rigidity.orbits import find_periodic_orbit


@pytest.fixture(scope="module")
def corridor():
    # two disks on the x axis; the third sits far above the strip between them
    return BilliardTable([Circle(["0", "0"], "1"), Circle(["4", "0"], "1"), Circle(["2", "10"], "1")])


def test_head_on_bounce(corridor):
    y, tau = billiard_step(corridor, PhasePoint(0, mp.mpf(0), mp.mpf(0)))
    assert y.obstacle == 1
    assert abs(y.s - mp.pi) < 1e-70 and abs(y.phi) < 1e-70
    assert abs(tau - 2) < 1e-70
    D = billiard_derivative(corridor, PhasePoint(0, mp.mpf(0), mp.mpf(0)))
    assert abs(D[0][0] * D[1][1] - D[0][1] * D[1][0] - 1) < 1e-70


def test_bouncing_segment_of_word_12(three_disks):
    y, tau = billiard_step(three_disks, PhasePoint(0, mp.mpf(0), mp.mpf(0)))
    assert (y.obstacle, abs(y.s - mp.pi) < 1e-70, abs(y.phi) < 1e-70) == (1, True, True)
    assert abs(tau - 4) < 1e-70
    z, tau = billiard_step(three_disks, y)
    assert z.obstacle == 0 and abs(z.s) < 1e-70 and abs(tau - 4) < 1e-70


def test_escape_through_the_gap(three_disks):
    with pytest.raises(EscapeError) as err:
        billiard_step(three_disks, PhasePoint(0, 3 * mp.pi / 2, mp.mpf(0)))
    assert err.value.direction is not None


def test_grazing_guard(three_disks):
    with pytest.raises(GrazingError):
        billiard_step(three_disks, PhasePoint(0, mp.mpf(0), mp.pi / 2 - mp.mpf("1e-4")))
    with pytest.raises(ValidationError):
        billiard_step(three_disks, PhasePoint(7, mp.mpf(0), mp.mpf(0)))


def test_determinant_identity_sampled(tables, rng):
    mp.prec = 96
    for t in tables.values():
        for x in random_phase_points(t, 30, rng):
            x = PhasePoint(x.obstacle, mp.mpf(x.s), mp.mpf(x.phi))
            J, y, _ = jet_collision_step(t, x, 1, return_flight=True)
            D = J.linear_part()
            det = D[0][0] * D[1][1] - D[0][1] * D[1][0]
            assert abs(det - mp.cos(x.phi) / mp.cos(y.phi)) < 1e-20


def _fd_derivative(table, x, h):
    cols = []
    for dx in ((h, 0), (0, h)):
        yp, _ = billiard_step(table, PhasePoint(x.obstacle, x.s + dx[0], x.phi + dx[1]))
        ym, _ = billiard_step(table, PhasePoint(x.obstacle, x.s - dx[0], x.phi - dx[1]))
        cols.append(((yp.s - ym.s) / (2 * h), (yp.phi - ym.phi) / (2 * h)))
    return [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]


def test_derivative_matches_finite_differences(tables, rng):
    mp.prec = 96
    for t in tables.values():
        for x in random_phase_points(t, 5, rng, margin=0.1):
            x = PhasePoint(x.obstacle, mp.mpf(x.s), mp.mpf(x.phi))
            D = billiard_derivative(t, x)
            F = _fd_derivative(t, x, mp.mpf("1e-9"))
            assert max(abs(D[i][j] - F[i][j]) for i in range(2) for j in range(2)) < 1e-7


def test_second_order_jet_against_finite_differences(three_disks, rng):
    mp.prec = 128
    h = mp.mpf("1e-12")
    for x in random_phase_points(three_disks, 4, rng, margin=0.1):
        x = PhasePoint(x.obstacle, mp.mpf(x.s), mp.mpf(x.phi))
        J = jet_collision_step(three_disks, x, 2)
        y0, _ = billiard_step(three_disks, x)
        # d^2 s' / d s^2 by a central second difference; the jet stores half of it
        yp, _ = billiard_step(three_disks, PhasePoint(x.obstacle, x.s + h, x.phi))
        ym, _ = billiard_step(three_disks, PhasePoint(x.obstacle, x.s - h, x.phi))
        fd = (yp.s - 2 * y0.s + ym.s) / h ** 2
        assert abs(2 * J.comps[0].coeff(2, 0) - fd) < 1e-5


def test_jet_linear_part_is_the_derivative(three_disks):
    x = PhasePoint(0, mp.mpf("0.05"), mp.mpf("0.02"))
    J = jet_collision_step(three_disks, x, 4)
    D = billiard_derivative(three_disks, x)
    L = J.linear_part()
    assert max(abs(L[i][j] - D[i][j]) for i in range(2) for j in range(2)) < 1e-70
    y, _ = billiard_step(three_disks, x)
    assert abs(J.value[0] - y.s) < 1e-70 and abs(J.value[1] - y.phi) < 1e-70


def test_cycle_jet_linear_part_is_the_monodromy(three_disks):
    orb = find_periodic_orbit(three_disks, "1213")
    J = cycle_jet(three_disks, orb.points(), 1)
    L = J.linear_part()
    M = orb.monodromy
    assert max(abs(L[i][j] - M[i][j]) / (1 + abs(M[i][j])) for i in range(2) for j in range(2)) < 1e-60


def test_time_reversal(tables, rng):
    # start next to a period-3 orbit so ten collisions stay inside the table
    for t in tables.values():
        x0 = find_periodic_orbit(t, "123").point(0)
        for _ in range(3):
            d = rng.uniform(-1e-12, 1e-12, 2)
            x = PhasePoint(x0.obstacle, x0.s + d[0], x0.phi + d[1])
            pts, _ = iterate(t, x, 10)
            back, _ = iterate(t, pts[-1].reversed(), 10)
            for a, b in zip(pts[::-1], back):
                assert a.obstacle == b.obstacle
                assert abs(a.s - b.s) < 1e-40 and abs(a.phi + b.phi) < 1e-40


@given(st.floats(-1.2, 1.2))
def test_area_form_preserved_along_12_segment(three_disks, phi):
    # small tilts of the head-on bounce: det D F cos phi' = cos phi
    mp.prec = 96
    t = three_disks
    x = PhasePoint(0, mp.mpf(0), mp.mpf(phi) / 10)
    J, y, _ = jet_collision_step(t, x, 1, return_flight=True)
    D = J.linear_part()
    assert abs((D[0][0] * D[1][1] - D[0][1] * D[1][0]) * mp.cos(y.phi) - mp.cos(x.phi)) < 1e-25

