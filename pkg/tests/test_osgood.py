import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from lcl.osgood import (
    OsgoodProblem,
    envelope,
    gamma_majorant,
    m_inverse,
    m_transform,
    psi,
    stability_certificate,
    validate_closed_forms,
)


def test_psi_values():
    assert psi(1.0) == 1.0
    np.testing.assert_allclose(psi(np.exp(-1.0)), 2.0 / np.e, rtol=1e-15)
    assert psi(4.0) == 4.0
    assert psi(0.0) == 0.0


def test_psi_increasing_continuous():
    x = np.geomspace(1e-12, 1e3, 4001)
    v = psi(x)
    assert np.all(np.diff(v) > 0)
    # continuity across the knee at 1
    np.testing.assert_allclose(psi(1.0 - 1e-12), psi(1.0 + 1e-12), rtol=1e-9)


def test_psi_square_inequality():
    x = np.geomspace(1e-8, 1e4, 2000)
    assert np.all(psi(x**2) >= x * psi(x) - 1e-15)


def test_psi_domain_error():
    with pytest.raises(ValueError):
        psi(-0.1)
    with pytest.raises(ValueError):
        gamma_majorant(-1.0)


def test_gamma_majorant_knee_and_bounds():
    lo = 0.5 * (1.0 - np.log(0.5))
    hi = 0.5 * np.log(2.0) + 0.5
    np.testing.assert_allclose(lo, hi, rtol=1e-15)
    np.testing.assert_allclose(gamma_majorant(0.5), (1.0 + np.log(2.0)) / 2.0, rtol=1e-15)
    assert gamma_majorant(0.0) == 0.0
    x = np.geomspace(1e-6, 1e3, 3000)
    g, p = gamma_majorant(x), psi(x)
    assert np.all(g >= 0.5 * p - 1e-15)
    assert np.all(g <= 2.0 * p + 1e-15)


def test_gamma_majorant_midpoint_concavity():
    x = np.geomspace(1e-6, 1e3, 400)
    for shift in (1.7, 13.0):
        y = x * shift
        lhs = gamma_majorant((x + y) / 2.0)
        rhs = 0.5 * (gamma_majorant(x) + gamma_majorant(y))
        assert np.all(lhs >= rhs - 1e-12)


def test_m_closed_form_against_quadrature():
    validate_closed_forms()
    for x in np.geomspace(1e-5, 50.0, 40):
        ref = quad(lambda y: 1.0 / psi(y), x, 1.0, limit=200, epsabs=1e-12, epsrel=1e-12)[0]
        assert abs(m_transform(x) - ref) < 1e-8


def test_m_values():
    assert m_transform(1.0) == 0.0
    np.testing.assert_allclose(m_transform(np.exp(-1.0)), np.log(2.0), rtol=1e-14)
    np.testing.assert_allclose(m_transform(np.e), -1.0, rtol=1e-14)


def test_m_monotone_and_divergent():
    x = np.geomspace(1e-12, 1e6, 2000)
    v = m_transform(x)
    assert np.all(np.diff(v) < 0)
    # M diverges at 0+ (M(1e-8) = log(1 + 8 log 10) ~ 2.97, still growing)
    assert m_transform(1e-8) > 2.9
    assert m_transform(1e-9) > 3.0
    with pytest.raises(ValueError):
        m_transform(0.0)


def test_m_inverse_round_trip():
    assert m_inverse(0.0) == 1.0
    np.testing.assert_allclose(m_inverse(np.log(2.0)), np.exp(-1.0), rtol=1e-14)
    # exp(1 - e^y) underflows float64 beyond y ~ 6.61, which bounds the
    # round-trippable range from above
    rng = np.random.default_rng(5)
    y = rng.uniform(-10, 6.5, size=10_000)
    np.testing.assert_allclose(m_transform(m_inverse(y)), y, atol=1e-10)


def _problem(a, t_knots, gammas, horizon):
    return OsgoodProblem(
        a=a, t_knots=np.asarray(t_knots, float), gamma_values=np.asarray(gammas, float), horizon=horizon
    )


def test_envelope_zero_gap():
    prob = _problem(0.0, [0.0, 0.3, 0.7], [5.0, 1.0, 9.0], 1.0)
    for t in np.linspace(0, 1, 11):
        assert envelope(prob, t) == 0.0


def test_envelope_zero_gamma():
    prob = _problem(0.37, [0.0], [0.0], 2.0)
    for t in np.linspace(0, 2, 9):
        np.testing.assert_allclose(envelope(prob, t), 0.37, rtol=1e-12)


def test_envelope_log2_example():
    # a = 1/e and int gamma = log 2 give M(rho) >= 0, i.e. rho <= 1
    prob = _problem(np.exp(-1.0), [0.0], [np.log(2.0)], 1.0)
    np.testing.assert_allclose(envelope(prob, 1.0), 1.0, rtol=1e-12)


def test_envelope_monotonicity():
    prob = _problem(0.05, [0.0, 0.5], [2.0, 0.5], 1.0)
    ts = np.linspace(0, 1, 21)
    vals = envelope(prob, ts)
    assert np.all(np.diff(vals) >= -1e-15)
    bigger_a = _problem(0.1, [0.0, 0.5], [2.0, 0.5], 1.0)
    assert np.all(envelope(bigger_a, ts) >= vals - 1e-15)
    bigger_g = _problem(0.05, [0.0, 0.5], [3.0, 0.7], 1.0)
    assert np.all(envelope(bigger_g, ts) >= vals - 1e-15)


def _ode_solution(prob, ts):
    """High-order reference integration of rho' = gamma(t) Psi(rho)."""
    edges = np.append(prob.t_knots, prob.horizon)
    rho = prob.a
    out = np.ones_like(ts) * np.nan
    done = ts == 0.0
    out[done] = prob.a
    for k, g in enumerate(prob.gamma_values):
        t0, t1 = edges[k], edges[k + 1]
        inside = (ts > t0) & (ts <= t1)
        t_eval = np.sort(ts[inside])
        sol = solve_ivp(
            lambda t, y: g * psi(max(y[0], 0.0)),
            (t0, t1),
            [rho],
            t_eval=np.unique(np.append(t_eval, t1)),
            rtol=1e-10,
            atol=1e-13,
            method="RK45",
            max_step=(t1 - t0) / 16,
        )
        for t, y in zip(sol.t, sol.y[0]):
            out[np.isclose(ts, t) & inside] = y
        rho = sol.y[0][-1]
    return out


def test_envelope_dominates_ode():
    rng = np.random.default_rng(42)
    for _ in range(5):
        a = rng.uniform(0.0, 0.5)
        knots = np.sort(np.append(0.0, rng.uniform(0.05, 0.95, size=3)))
        gammas = rng.uniform(0.0, 3.0, size=4)
        prob = _problem(a, knots, gammas, 1.0)
        ts = np.linspace(0, 1, 17)
        ode = _ode_solution(prob, ts)
        env = envelope(prob, ts)
        assert np.all(env >= ode - 1e-6)
        # the envelope is the exact maximal solution, so it also matches
        np.testing.assert_allclose(env, ode, rtol=1e-6, atol=1e-8)


def test_stability_certificate_values():
    assert stability_certificate([0.0], 5.0)[0] == 0.0
    # algebraic composition check; k + G must stay below log(745) so that
    # the gap itself is representable in float64
    G = 3.0
    for k in (0.0, 0.5, 1.0, 2.0):
        a_n = np.exp(1.0 - np.exp(k + G))
        bound = stability_certificate([a_n], G)[0]
        np.testing.assert_allclose(bound, np.exp(1.0 - np.exp(k)), rtol=1e-10)


def test_stability_certificate_monotone_to_zero():
    # bounds decrease monotonically as the gaps shrink; with a modest budget
    # they reach numerical zero well inside float64 range
    gaps = np.geomspace(1e-1, 1e-250, 24)
    bounds = stability_certificate(gaps, 1.0)
    assert np.all(np.diff(bounds) < 0)
    assert bounds[-1] < 1e-80
    # with a large budget the collapse needs gaps below exp(1 - e^G); every
    # representable positive gap keeps a positive bound, zero gap gives zero
    big = stability_certificate(np.append(np.geomspace(1e-1, 1e-300, 12), 0.0), 10.0)
    assert np.all(np.diff(big) < 0)
    assert big[-1] == 0.0


def test_problem_validation():
    with pytest.raises(ValueError):
        _problem(-0.1, [0.0], [1.0], 1.0)
    with pytest.raises(ValueError):
        _problem(0.1, [0.1], [1.0], 1.0)
    with pytest.raises(ValueError):
        _problem(0.1, [0.0], [-1.0], 1.0)
    with pytest.raises(ValueError):
        _problem(0.1, [0.0, 0.5], [1.0, np.inf], 1.0)


def test_gamma_integral_left_endpoint():
    prob = _problem(0.1, [0.0, 0.5], [2.0, 4.0], 1.0)
    np.testing.assert_allclose(prob.gamma_integral(0.25), 0.5)
    np.testing.assert_allclose(prob.gamma_integral(0.5), 1.0)
    np.testing.assert_allclose(prob.gamma_integral(1.0), 3.0)
