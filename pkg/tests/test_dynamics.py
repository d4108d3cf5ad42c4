import csv
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from kcompound import DomainError
from kcompound.certify import hopfield_certify
from kcompound.compounds import additive_compound
from kcompound.dynamics import (
    EquilibriumNotFound,
    HopfieldModel,
    convergence_experiment,
    find_equilibrium,
    integrate,
    ltv_rotation_example,
    numerical_jacobian,
)
from kcompound.lognorms import mu


@pytest.fixture(scope="module")
def hopfield3():
    return HopfieldModel.uniform(3, 0.49)


@pytest.fixture(scope="module")
def e2_scalar():
    # symmetric equilibria s(1,1,1) solve -s/0.49 + 3 tanh(s) = 0
    return brentq(lambda s: -s / 0.49 + 3 * np.tanh(s), 0.5, 3.0, xtol=1e-15)


def test_rk4_scalar_decay():
    tr = integrate(lambda t, x: -x, [1.0], (0.0, 10.0), 1e-3)
    assert abs(tr.final[0] - math.exp(-10)) < 1e-8
    assert tr.times[0] == 0.0 and tr.times[-1] == pytest.approx(10.0)
    assert len(tr.times) == len(tr.states) == 10001


def test_rk4_fourth_order():
    errs = []
    for h in (0.1, 0.05):
        tr = integrate(lambda t, x: -x, [1.0], (0.0, 2.0), h)
        errs.append(abs(tr.final[0] - math.exp(-2)))
    assert 14 < errs[0] / errs[1] < 18


def test_integrate_errors_and_divergence():
    with pytest.raises(DomainError):
        integrate(lambda t, x: -x, [1.0], (0.0, 1.0), 0.0)
    with pytest.raises(DomainError):
        integrate(lambda t, x: -x, [1.0], (0.0, 1.0), 0.3)
    tr = integrate(lambda t, x: x ** 2, [1.0], (0.0, 2.0), 1e-2)
    assert tr.classification.kind == "diverged"


def test_jacobian_at_origin(hopfield3):
    np.testing.assert_allclose(hopfield3.jacobian(np.zeros(3)), -np.eye(3) / 0.49 + np.ones((3, 3)))


def test_jacobian_display_form(hopfield3, rng):
    x = rng.uniform(-2, 2, 3)
    expected = -np.eye(3) / 0.49 + np.ones((3, 1)) * (1 - np.tanh(x) ** 2)[None, :]
    np.testing.assert_allclose(hopfield3.jacobian(x), expected, atol=1e-15)


def test_jacobian_matches_finite_difference(rng):
    for _ in range(10):
        n = int(rng.integers(2, 6))
        model = HopfieldModel(r=rng.uniform(0.2, 2, n), W=rng.uniform(-2, 2, (n, n)),
                              u=rng.uniform(-1, 1, n), a=rng.uniform(0.5, 2, n), b=rng.uniform(0.5, 2, n))
        x = rng.uniform(-2, 2, n)
        np.testing.assert_allclose(model.jacobian(x), numerical_jacobian(model.field, x), atol=1e-6)


def test_field_is_batched(hopfield3, rng):
    X = rng.uniform(-1, 1, (5, 3))
    np.testing.assert_allclose(hopfield3.field(X), np.array([hopfield3.field(x) for x in X]))


def test_model_validation():
    with pytest.raises(DomainError):
        HopfieldModel(r=[-1.0, 1.0], W=np.eye(2))
    with pytest.raises(DomainError):
        HopfieldModel(r=1.0, W=np.eye(2), activation=np.sin)
    with pytest.raises(DomainError):
        HopfieldModel(r=1.0, W=np.eye(2), m=2.0, M=1.0)


def test_equilibria(hopfield3, e2_scalar):
    e1 = find_equilibrium(hopfield3.field, hopfield3.jacobian, np.zeros(3))
    e2 = find_equilibrium(hopfield3.field, hopfield3.jacobian, np.ones(3))
    e3 = find_equilibrium(hopfield3.field, hopfield3.jacobian, -np.ones(3))
    np.testing.assert_array_equal(e1, 0.0)
    np.testing.assert_allclose(e2, e2_scalar * np.ones(3), atol=1e-12)
    np.testing.assert_allclose(e3, -e2, atol=1e-12)
    assert np.max(np.abs(e2 - 1.2447)) < 1e-3
    assert np.max(np.abs(hopfield3.field(e2))) < 1e-10


def test_equilibrium_determinant_signs(hopfield3, e2_scalar):
    assert np.linalg.det(hopfield3.jacobian(np.zeros(3))) > 0
    J2 = hopfield3.jacobian(e2_scalar * np.ones(3))
    assert np.linalg.det(J2) < 0
    # closed form (-1/r)^2 ((-1/r) + 3 - sum tanh^2)
    c = -1 / 0.49
    assert np.linalg.det(J2) == pytest.approx(c * c * (c + 3 - 3 * np.tanh(e2_scalar) ** 2), rel=1e-12)


def test_newton_failure():
    with pytest.raises(EquilibriumNotFound):
        find_equilibrium(lambda x: x ** 2 + 1, lambda x: np.diag(2 * x), np.array([0.0]))


def test_convergence_experiment(hopfield3):
    s = convergence_experiment(hopfield3, 20, T=35, seed=3,
                               extra_ics=[[-8, -4, -6], [-4.5, -7.5, -5]])
    assert s.counts()["converged"] == 22
    assert len(s.equilibria) == 3
    np.testing.assert_array_equal(s.equilibria[0], 0.0)
    assert s.limits()[0] == 0 and sum(s.limits()) == 22
    assert all(c.distance < 1e-4 for c in s.classifications)


def test_experiment_start_at_equilibrium(hopfield3):
    s = convergence_experiment(hopfield3, 0, T=2, extra_ics=[[0.0, 0.0, 0.0]])
    assert s.classifications[0].kind == "converged"
    assert s.classifications[0].equilibrium == 0


def test_experiment_empty(hopfield3):
    s = convergence_experiment(hopfield3, 0)
    assert s.counts() == {"converged": 0, "bounded_nonconverged": 0, "diverged": 0}


def test_symmetric_initial_conditions(hopfield3, rng):
    x0 = rng.uniform(-3, 3, 3)
    s = convergence_experiment(hopfield3, 0, T=10, extra_ics=[x0, -x0])
    np.testing.assert_allclose(s.trajectories[0].states, -s.trajectories[1].states, atol=1e-12)
    a, b = s.classifications
    assert a.kind == b.kind == "converged"
    np.testing.assert_allclose(s.equilibria[a.equilibrium], -s.equilibria[b.equilibrium])


def test_experiment_is_deterministic(hopfield3):
    a = convergence_experiment(hopfield3, 4, T=5, seed=11)
    b = convergence_experiment(hopfield3, 4, T=5, seed=11)
    assert a.to_dict() == b.to_dict()


def test_csv_export(tmp_path):
    tr = integrate(lambda t, x: -x, [1.0, 2.0], (0.0, 0.01), 1e-3)
    path = tmp_path / "traj.csv"
    tr.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "x1", "x2"]
    assert len(rows) == 12
    assert float(rows[-1][2]) == tr.final[1]


def test_ltv_closed_form(rng):
    ex = ltv_rotation_example()
    for t in (0.0, 1.0, math.pi):
        assert ex.trace(t) == -1.5
    np.testing.assert_allclose(ex.transition(0.7, 0.7), np.eye(2), atol=1e-15)
    for t in (0.5, 3.0, 9.0):
        assert np.linalg.det(ex.transition(t, 0.0)) == pytest.approx(math.exp(-1.5 * t), rel=1e-12)
    x0 = rng.uniform(-1, 1, 2)
    tr = integrate(ex.field, x0, (0.0, 10.0), 1e-3)
    for i in range(0, 10001, 500):
        np.testing.assert_allclose(tr.states[i], ex.transition(tr.times[i], 0.0) @ x0, atol=1e-6)


def test_ltv_transition_is_bounded():
    ex = ltv_rotation_example()
    for t in np.linspace(0, 50, 26):
        assert np.linalg.norm(ex.transition(t, 0.0), 2) <= 1 + 1e-12


def test_ltv_stable_direction():
    ex = ltv_rotation_example()
    for t0 in (0.0, 1.3):
        tr = integrate(ex.field, ex.stable_direction(t0), (t0, t0 + 12.0), 1e-3)
        assert np.max(np.abs(tr.final)) < 1e-6


def test_variational_two_compound_contracts(hopfield3, rng):
    eta = hopfield_certify(hopfield3, 2).rate_eta
    assert eta > 0

    def field(t, z):
        x, y = z[:3], z[3:]
        return np.concatenate([hopfield3.field(x), additive_compound(hopfield3.jacobian(x), 2) @ y])

    for _ in range(3):
        z0 = np.concatenate([rng.uniform(-3, 3, 3), rng.uniform(-1, 1, 3)])
        tr = integrate(field, z0, (0.0, 5.0), 1e-2)
        logs = np.log(np.max(np.abs(tr.states[:, 3:]), axis=1))
        slopes = np.diff(logs) / np.diff(tr.times)
        assert np.max(slopes) <= -eta + 0.1
        assert logs[-1] - logs[0] <= -eta * 5 + 1e-9


def test_coppel_growth_bound(rng):
    for _ in range(5):
        A = rng.uniform(-1, 1, (3, 3)) - 1.5 * np.eye(3)
        x0 = rng.uniform(-1, 1, 3)
        tr = integrate(lambda t, x: A @ x, x0, (0.0, 3.0), 1e-2)
        for p in (1, 2, math.inf):
            ord_ = {1: 1, 2: 2, math.inf: np.inf}[p]
            bound = np.exp(mu(A, p) * tr.times) * np.linalg.norm(x0, ord_)
            norms = np.linalg.norm(tr.states, ord_, axis=1)
            assert np.all(norms <= bound * (1 + 1e-9))
