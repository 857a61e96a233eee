import itertools

import numpy as np
import pytest

from lcl.transport import (
    EmpiricalMeasure,
    TransportPlan,
    optimal_pairing,
    w2_exact,
    w2_entropic,
)


def brute_force_w2(x, y):
    """Exhaustive assignment minimum; first strict improvement in
    lexicographic permutation order, so ties break lexicographically."""
    n = len(x)
    best_cost, best_perm = np.inf, None
    for perm in itertools.permutations(range(n)):
        c = sum(float(np.sum((x[i] - y[perm[i]]) ** 2)) for i in range(n))
        if c < best_cost:
            best_cost, best_perm = c, perm
    return best_cost / n, np.array(best_perm)


def test_two_point_masses():
    d, plan = w2_exact(np.array([[0.0, 0, 0]]), np.array([[3.0, 4.0, 0]]))
    assert d == pytest.approx(5.0)
    assert plan.pairing.tolist() == [0]


def test_identity_on_equal_clouds():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(40, 3))
    d, plan = w2_exact(x, x)
    assert d == 0.0
    assert plan.pairing.tolist() == list(range(40))


def test_spec_two_atom_example():
    x = np.array([[0.0, 0, 0], [2.0, 0, 0]])
    y = np.array([[1.0, 0, 0], [3.0, 0, 0]])
    d, plan = w2_exact(x, y)
    assert d == pytest.approx(1.0)
    assert plan.pairing.tolist() == [0, 1]
    assert plan.cost == pytest.approx(1.0)


def test_matches_brute_force_small():
    rng = np.random.default_rng(33)
    for n in (2, 3, 4, 5, 6):
        for _ in range(10):
            x = rng.normal(size=(n, 3))
            y = rng.normal(size=(n, 3))
            d, plan = w2_exact(x, y)
            bc, bp = brute_force_w2(x, y)
            assert plan.cost == pytest.approx(bc, rel=1e-12)
            assert plan.pairing.tolist() == bp.tolist()


def test_lexicographic_tie_breaking():
    # duplicated atoms make every pairing optimal; lexicographic wins
    x = np.zeros((4, 3))
    y = np.tile(np.array([1.0, 0.0, 0.0]), (4, 1))
    _, plan = w2_exact(x, y)
    assert plan.pairing.tolist() == [0, 1, 2, 3]
    # symmetric two-atom tie
    x = np.array([[1.0, 0, 0], [-1.0, 0, 0]])
    y = np.array([[0.0, 1.0, 0], [0.0, -1.0, 0]])
    bc, bp = brute_force_w2(x, y)
    _, plan = w2_exact(x, y)
    assert plan.pairing.tolist() == bp.tolist()
    assert plan.cost == pytest.approx(bc, rel=1e-12)


def test_monotone_1d_matching():
    rng = np.random.default_rng(5)
    for n in (4, 6):
        xv = np.sort(rng.normal(size=n))
        yv = np.sort(rng.normal(size=n))
        x = np.zeros((n, 3)); x[:, 0] = xv
        y = np.zeros((n, 3)); y[:, 0] = yv
        plan = optimal_pairing(x, y)
        assert plan.pairing.tolist() == list(range(n))


def test_metric_axioms_sampled():
    rng = np.random.default_rng(11)
    for _ in range(40):
        x = rng.normal(size=(24, 3))
        y = rng.normal(size=(24, 3)) + rng.normal(size=3)
        z = rng.normal(size=(24, 3)) * 1.5
        dxy, _ = w2_exact(x, y)
        dyx, _ = w2_exact(y, x)
        assert abs(dxy - dyx) < 1e-12 * max(1.0, dxy)
        dxz, _ = w2_exact(x, z)
        dyz, _ = w2_exact(y, z)
        assert dxz <= dxy + dyz + 1e-9


def test_translation_covariance():
    rng = np.random.default_rng(21)
    x = rng.normal(size=(50, 3))
    c = np.array([0.3, -0.2, 0.7])
    d, plan = w2_exact(x, x + c)
    assert d == pytest.approx(np.linalg.norm(c), rel=1e-12)
    assert plan.pairing.tolist() == list(range(50))


def test_size_mismatch_raises():
    with pytest.raises(ValueError):
        w2_exact(np.zeros((3, 3)), np.zeros((4, 3)))
    with pytest.raises(ValueError):
        EmpiricalMeasure(np.array([[np.nan, 0, 0]]))
    with pytest.raises(ValueError):
        TransportPlan(pairing=np.array([0, 0]), cost=0.0)


def test_entropic_upper_bounds_exact_and_converges():
    rng = np.random.default_rng(13)
    x = rng.normal(size=(128, 3))
    y = rng.normal(size=(128, 3)) + [1.0, 0, 0]
    d_exact, _ = w2_exact(x, y)
    med = np.median(np.sum((x[:, None] - y[None]) ** 2, axis=-1))
    d_ent, converged = w2_entropic(x, y, reg=0.01 * med, max_iters=10000)
    assert converged
    assert d_ent >= d_exact - 1e-12
    assert abs(d_ent - d_exact) / d_exact < 0.05


def test_entropic_translation_and_floor():
    rng = np.random.default_rng(17)
    x = rng.normal(size=(96, 3))
    c = np.array([0.5, 0.5, 0.0])
    d_ent, _ = w2_entropic(x, x + c, reg=1e-3, max_iters=5000)
    assert abs(d_ent - np.linalg.norm(c)) / np.linalg.norm(c) < 0.02
    # identical clouds: estimate sits on a small reg-dependent floor >= 0
    d0, _ = w2_entropic(x, x, reg=1e-3, max_iters=5000)
    assert 0.0 <= d0 < 0.1


def test_nonconvergence_flagged():
    rng = np.random.default_rng(19)
    x = rng.normal(size=(64, 3))
    y = rng.normal(size=(64, 3))
    d, converged = w2_entropic(x, y, reg=1e-6, max_iters=3)
    assert not converged
    assert np.isfinite(d)
