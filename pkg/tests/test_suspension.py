import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entropy_rigidity.config import bundled, load_sft
from entropy_rigidity.errors import DegenerateError, DomainError, InfeasibleError, ValidationError
from entropy_rigidity.suspension import (MarkovSystem, abramov, bernoulli, e_proof_sweep, equilibrium_measure,
                                         homotopy_modulus, markov_entropy, parry_measure, perron, pressure,
                                         pressure_curve, random_markov_measure, random_roof, separating_bump,
                                         sft_entropy, solve_flexibility, suspension_htop, variational_gap)

FULL2 = MarkovSystem(np.ones((2, 2), dtype=int))
GOLDEN = MarkovSystem(np.array([[1, 1], [1, 0]]))
PHI = (1 + math.sqrt(5)) / 2


def test_topological_entropies():
    assert abs(sft_entropy(FULL2) - math.log(2)) < 1e-14
    assert abs(sft_entropy(GOLDEN) - math.log(PHI)) < 1e-14
    assert abs(math.log(perron([[2, 1], [1, 1]])[0]) - math.log((3 + math.sqrt(5)) / 2)) < 1e-14
    cat = load_sft(bundled("sft/cat.cfg"))
    assert abs(sft_entropy(cat) - math.log((3 + math.sqrt(5)) / 2)) < 1e-13


def test_adjacency_validation():
    with pytest.raises(ValidationError):
        MarkovSystem(np.array([[2, 1], [1, 1]]))
    with pytest.raises(DomainError):
        MarkovSystem(np.array([[0, 1], [1, 0]]))
    with pytest.raises(DomainError):
        MarkovSystem(np.array([[1, 1], [0, 1]]))


def test_bernoulli_and_parry():
    assert abs(markov_entropy(bernoulli([0.9, 0.1])) - 0.3250829733914482) < 1e-14
    mu = parry_measure(GOLDEN)
    assert abs(markov_entropy(mu) - math.log(PHI)) < 1e-13
    assert abs(mu.pi[0] - PHI ** 2 / (1 + PHI ** 2)) < 1e-13


def test_pressure_of_a_constant():
    assert abs(pressure(GOLDEN, 0.7) - (math.log(PHI) + 0.7)) < 1e-13


@settings(max_examples=25)
@given(st.integers(0, 2 ** 31))
def test_variational_principle(seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=(2, 2))
    mu = random_markov_measure(GOLDEN, rng)
    assert variational_gap(GOLDEN, mu, psi) >= -1e-12
    assert abs(variational_gap(GOLDEN, equilibrium_measure(GOLDEN, psi), psi)) < 1e-11


def test_normalized_potential_has_zero_pressure():
    mu = random_markov_measure(FULL2, np.random.default_rng(3))
    logP = np.log(mu.P)
    assert abs(pressure(FULL2, logP)) < 1e-13


def test_suspension_of_constant_roofs():
    assert abs(suspension_htop(GOLDEN, 1.0) - math.log(PHI)) < 1e-12
    assert abs(suspension_htop(GOLDEN, 2.5) - math.log(PHI) / 2.5) < 1e-12
    with pytest.raises(ValidationError):
        suspension_htop(GOLDEN, -1.0)


@settings(max_examples=25)
@given(st.integers(0, 2 ** 31))
def test_abramov_below_topological(seed):
    rng = np.random.default_rng(seed)
    r = random_roof(GOLDEN, rng)
    mu = random_markov_measure(GOLDEN, rng)
    htop = suspension_htop(GOLDEN, r)
    assert abramov(mu, GOLDEN, r) <= htop + 1e-10
    # the flow MME is the equilibrium state of -htop r
    mme = equilibrium_measure(GOLDEN, -htop * r)
    assert abs(abramov(mme, GOLDEN, r) - htop) < 1e-9


def test_pressure_curve_is_convex():
    r = random_roof(GOLDEN, np.random.default_rng(11))
    vals = pressure_curve(GOLDEN, r, np.linspace(0, 3, 31))
    assert np.all(np.diff(vals, 2) >= -1e-12)
    assert np.all(np.diff(vals) < 0)


@pytest.mark.parametrize("target, region", [((0.3, math.log(PHI)), "I"), ((0.3, 0.4), "I"),
                                            ((0.3, 3 * math.log(PHI)), "II"), ((0.1, 0.9), "II")])
def test_flexibility(target, region):
    res = solve_flexibility(GOLDEN, target, region)
    assert res.residual < 1e-6
    assert abs(res.achieved[0] - target[0]) < 1e-6 and abs(res.achieved[1] - target[1]) < 1e-6
    assert abs(res.measure.integral(res.roof) - 1) < 1e-9


def test_flexibility_infeasible():
    with pytest.raises(InfeasibleError) as err:
        solve_flexibility(GOLDEN, (0.6, 1.0))
    assert err.value.achievable is not None
    with pytest.raises(InfeasibleError):
        solve_flexibility(GOLDEN, (0.3, 0.2))
    with pytest.raises(InfeasibleError):
        solve_flexibility(GOLDEN, (0.3, 1.0), region="I")


def test_bump_degenerate_shortcut():
    mu = parry_measure(FULL2)
    q = separating_bump(FULL2, mu, mu, mu, 1.0)
    assert q.N == 1 and q.minimum == 1.0


def test_bump_integrals():
    w = [bernoulli([0.5, 0.5]), bernoulli([0.7, 0.3]), bernoulli([0.2, 0.8])]
    q = separating_bump(FULL2, *w, 0.1)
    assert abs(q.integral(w[0]) - 1) < 1e-10
    assert abs(q.integral(w[1]) - 1) < 1e-10
    assert abs(q.integral(w[2]) - 0.1) < 1e-10
    assert q.minimum >= 0.05 - 1e-15
    assert q([0] * (q.N + 1)) >= q.minimum


def test_bump_rejects_bad_input():
    w = [bernoulli([0.5, 0.5]), bernoulli([0.7, 0.3])]
    with pytest.raises(ValidationError):
        separating_bump(FULL2, w[0], w[1], w[1], 0.0)
    with pytest.raises(DegenerateError):
        separating_bump(FULL2, w[0], w[1], w[1], 0.5)


def test_homotopy_between_constant_roofs():
    ts, vals, C = homotopy_modulus(GOLDEN, 1.0, 2.0, samples=21)
    h = math.log(PHI)
    assert abs(vals[0] - h) < 1e-12 and abs(vals[-1] - h / 2) < 1e-12
    assert np.all(np.diff(vals) < 0)
    # d/dr (h / r) is at most h at r = 1
    assert C <= h + 1e-6


def test_sweep_keeps_the_measure_entropy():
    rows = e_proof_sweep(GOLDEN, grid=20, gamma=0.5)
    h_mu = {round(r[2], 9) for r in rows}
    assert len(h_mu) == 1 and abs(rows[0][2] - 0.5 * math.log(PHI)) < 1e-6
    assert all(r[3] >= r[2] - 1e-9 for r in rows)
