import math

import numpy as np
import pytest

from lcl.densities import isotropic_gaussian, mixture, uniform_ball
from lcl.oracles import (
    DivergentIntegralError,
    MarginalMismatchError,
    c_alpha,
    coupled_drift_bound,
    coupled_kernel_bound,
    coupled_kernel_sweep,
    double_moment_bound,
    log_tail_bound,
    log_tail_growth,
    moment_bound,
    near_singularity_bound,
    near_singularity_scaling,
)

BALL = uniform_ball(1.0)
GAUSS = isotropic_gaussian(variance=1.0)


def two_bumps(gap=10.0):
    return mixture(
        [
            (0.5, uniform_ball(1.0, (0, 0, 0))),
            (0.5, uniform_ball(1.0, (gap, 0, 0))),
        ]
    )


# ----------------------------------------------------------------- moment


def test_moment_bound_ball_center():
    # (3/(4pi)) 4pi int_0^1 r dr = 3/2 for the inverse-distance moment
    rep = moment_bound(BALL, -1.0, [0.0, 0, 0])
    assert rep.lhs == pytest.approx(1.5, abs=1e-10)
    assert rep.holds


def test_moment_bound_mass_at_alpha_zero():
    rep = moment_bound(BALL, 0.0, [0.3, 0, 0])
    assert rep.lhs == pytest.approx(1.0, abs=1e-10)


def test_moment_bound_far_field_newton():
    # outside a radial body the inverse-distance moment is exactly 1/|v|
    rep = moment_bound(BALL, -1.0, [100.0, 0, 0])
    assert rep.lhs == pytest.approx(0.01, rel=1e-9)
    rep = moment_bound(BALL, -1.0, [25.0, 0, 0])
    assert rep.lhs == pytest.approx(0.04, rel=1e-9)


def test_moment_bound_holds_across_alpha():
    for alpha in (-0.5, -1.0, -2.0, -2.5, -2.9):
        for v in ([0, 0, 0], [0.7, 0.1, 0], [1.5, 0, 0]):
            assert moment_bound(GAUSS, alpha, v).holds
            assert moment_bound(BALL, alpha, v).holds


def test_divergent_alpha_rejected():
    with pytest.raises(DivergentIntegralError):
        moment_bound(BALL, -3.0, [0, 0, 0])
    with pytest.raises(DivergentIntegralError):
        c_alpha(-3.2)


# ------------------------------------------------------- near singularity


def test_near_singularity_exact_disc_value():
    # w = v inside a flat region: lhs = ||g||_inf 2 pi eps^2 at alpha = -1,
    # which is exactly the budget C_-1 ||g||_inf eps^2: ratio 1
    for eps in (0.5, 0.25, 0.1):
        rep = near_singularity_bound(BALL, -1.0, eps, [0.0, 0, 0])
        assert rep.lhs == pytest.approx(BALL.linf * 2 * math.pi * eps**2, rel=1e-10)
        assert rep.ratio == pytest.approx(1.0, rel=1e-10)


def test_near_singularity_vanishes_with_eps():
    vals = [
        near_singularity_bound(BALL, -1.0, e, [0, 0, 0]).lhs for e in (0.5, 0.1, 0.02)
    ]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-3


def test_near_singularity_scaling_exponents():
    for alpha in (-1.0, -2.0):
        out = near_singularity_scaling(BALL, alpha, [0.0, 0, 0])
        assert abs(out["fitted_exponent"] - (3.0 + alpha)) < 0.1


def test_near_singularity_offcenter_w():
    # singularity off the ball center, checked against seeded Monte Carlo
    v = np.array([0.1, 0.0, 0.0])
    w = np.array([0.25, 0.05, 0.0])
    eps = 0.25
    rep = near_singularity_bound(BALL, -1.5, eps, v, w)
    rng = np.random.default_rng(0)
    u = rng.standard_normal((2_000_000, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    rad = eps * rng.random(2_000_000) ** (1.0 / 3.0)
    pts = v + u * rad[:, None]
    vol = 4.0 / 3.0 * math.pi * eps**3
    vals = np.linalg.norm(pts - w, axis=1) ** -1.5 * BALL.evaluate(pts) * vol
    mc, se = vals.mean(), vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(rep.lhs - mc) < 4 * se + 1e-4
    assert rep.holds


# ------------------------------------------------------------- log tail


def test_log_tail_exact_ball_value():
    # uniform unit ball at its center: 3 log(1/eps) for eps < 1
    for eps in (0.5, 0.25, 0.125):
        rep = log_tail_bound(BALL, eps, [0.0, 0, 0])
        assert rep.lhs == pytest.approx(3.0 * math.log(1.0 / eps), rel=1e-9)
        assert rep.holds


def test_log_tail_eps_one_mass_bound():
    for g, v in ((BALL, [0.0, 0, 0]), (GAUSS, [0.5, 0, 0])):
        rep = log_tail_bound(g, 1.0, v)
        assert rep.lhs <= 1.0 + 1e-12
        assert rep.holds


def test_log_tail_growth_regression():
    out = log_tail_growth(BALL, [0.0, 0, 0])
    assert out["r_squared"] > 0.99
    assert out["slope"] == pytest.approx(3.0, rel=1e-6)
    # doubling 1/eps adds a constant increment
    incs = np.diff(out["lhs"])
    np.testing.assert_allclose(incs, incs[0], rtol=1e-6)


# -------------------------------------------------------- double moment


def test_double_moment_alpha_zero_exact():
    rep = double_moment_bound(BALL, 0.0, n_pairs=1000, seed=3)
    assert rep.lhs == 1.0
    assert rep.stderr == 0.0


def test_double_moment_ball():
    # mean inverse distance of two uniform points in the unit ball is 6/5
    rep = double_moment_bound(BALL, -1.0, n_pairs=400_000, seed=1)
    assert abs(rep.lhs - 1.2) < 4 * rep.stderr
    assert rep.lhs <= 1.5 + 4 * rep.stderr
    assert rep.holds


def test_double_moment_disjoint_bumps():
    # same-bump pairs contribute 6/5, cross pairs exactly 1/10 (Newton twice):
    # 0.5 * 6/5 + 0.5 * 1/10 = 0.65
    rep = double_moment_bound(two_bumps(), -1.0, n_pairs=400_000, seed=2)
    assert abs(rep.lhs - 0.65) < 4 * rep.stderr
    assert rep.holds


# ------------------------------------------------- coupled kernel bounds


def test_coupled_kernel_zero_at_equal_points():
    rep = coupled_kernel_bound(GAUSS, [0.3, 0, 0], [0.3, 0, 0])
    assert rep.lhs_sigma == 0.0
    assert rep.lhs_b == 0.0


def test_coupled_kernel_far_branch_finite():
    rep = coupled_kernel_bound(GAUSS, [1.0, 0, 0], [-1.0, 0, 0], n_mu=48, n_phi=8)
    assert np.isfinite(rep.lhs_b) and rep.lhs_b > 0
    assert np.isfinite(rep.ratio_b)
    # the separation is in the x >= 1 branch: budget (1+linf) Psi(2)
    assert rep.budget_b == pytest.approx((1.0 + GAUSS.linf) * 2.0, rel=1e-12)


def test_coupled_kernel_quadrature_matches_monte_carlo():
    h = 0.5
    v, vt = np.array([h / 2, 0, 0.0]), np.array([-h / 2, 0, 0.0])
    rep = coupled_kernel_bound(GAUSS, v, vt, n_mu=48, n_phi=8)
    rng = np.random.default_rng(0)
    x = GAUSS.sample(1_500_000, rng)
    z, zt = v - x, vt - x
    r2 = np.einsum("ij,ij->i", z, z)
    rt2 = np.einsum("ij,ij->i", zt, zt)
    w = (r2**-0.75)[:, None] * z - (rt2**-0.75)[:, None] * zt
    sig = 2.0 * np.einsum("ij,ij->i", w, w)
    se = sig.std(ddof=1) / math.sqrt(len(sig))
    assert abs(rep.lhs_sigma - sig.mean()) < 4 * se


def test_coupled_kernel_sweep_ratio_stability():
    # the empirical constant stays within a factor 2 over two decades of
    # separations below 1: the log factor in Psi is the right modulus
    seps = np.geomspace(1e-4, 1e-2, 5)
    out = coupled_kernel_sweep(GAUSS, separations=seps, n_mu=48, n_phi=4, n_s=40)
    ratios_b = [r["ratio_b"] for r in out["rows"]]
    ratios_s = [r["ratio_sigma"] for r in out["rows"]]
    assert max(ratios_b) / min(ratios_b) < 2.0
    assert max(ratios_s) / min(ratios_s) < 2.0
    assert out["max_stability_change"] < 0.10
    assert np.isfinite(out["max_ratio_sigma"]) and np.isfinite(out["max_ratio_b"])


# --------------------------------------------------- coupled drift bound


def _translation_coupling(g, n, seed, shift):
    v = g.sample(n, seed)
    return v, v + np.asarray(shift, float)


def test_coupled_drift_zero_for_diagonal():
    v = GAUSS.sample(800, 11)
    rep = coupled_drift_bound(GAUSS, GAUSS, (v, v), (GAUSS.sample(800, 12),) * 2)
    assert rep.lhs == 0.0
    assert rep.ratio == 0.0


def test_coupled_drift_translation_pair():
    # same shift in Q and R cancels in the drift difference: lhs is 0 even
    # though the couplings are nontrivial
    shift = [0.3, 0, 0]
    gt = isotropic_gaussian(mean=shift, variance=1.0)
    q = _translation_coupling(GAUSS, 900, 5, shift)
    r = _translation_coupling(GAUSS, 900, 6, shift)
    rep = coupled_drift_bound(GAUSS, gt, q, r)
    assert rep.lhs == pytest.approx(0.0, abs=1e-12)


def test_coupled_drift_positive_for_mixed_couplings():
    # translation coupling against an independent product coupling
    shift = [0.3, 0, 0]
    gt = isotropic_gaussian(mean=shift, variance=1.0)
    q = _translation_coupling(GAUSS, 900, 5, shift)
    rng = np.random.default_rng(7)
    r = (GAUSS.sample(900, rng), gt.sample(900, rng))
    rep = coupled_drift_bound(GAUSS, gt, q, r)
    assert rep.lhs > 0
    assert np.isfinite(rep.ratio)


def test_coupled_drift_ratio_sweep_bounded():
    ratios = []
    for c in (1e-3, 1e-2, 1e-1, 1.0):
        shift = [c, 0.0, 0.0]
        gt = isotropic_gaussian(mean=shift, variance=1.0)
        q = _translation_coupling(GAUSS, 700, 5, shift)
        rng = np.random.default_rng(17)
        r = (GAUSS.sample(700, rng), gt.sample(700, rng))
        rep = coupled_drift_bound(GAUSS, gt, q, r)
        ratios.append(rep.ratio)
    assert all(np.isfinite(r) for r in ratios)
    assert max(ratios) < 50.0


def test_coupled_drift_marginal_validation():
    v = GAUSS.sample(800, 1)
    bad = v + 5.0
    with pytest.raises(MarginalMismatchError):
        coupled_drift_bound(GAUSS, GAUSS, (v, bad), (v, v))


def test_report_json_round_trip():
    import json

    rep = moment_bound(BALL, -1.0, [0.0, 0, 0])
    payload = json.loads(rep.to_json())
    assert payload["name"] == "moment_bound"
    assert payload["lhs"] == pytest.approx(1.5)
