import numpy as np
import pytest

from lcl import kernels
from lcl.kernels import (
    SingularInputError,
    a_matrix,
    b_drift,
    lipschitz_check,
    lipschitz_sweep,
    mollified_triple,
    sample_annulus,
    sigma_matrix,
)

RT8 = 2.0 ** -1.5


def test_a_matrix_axis_aligned():
    np.testing.assert_allclose(a_matrix([1.0, 0, 0]), np.diag([0.0, 1.0, 1.0]), atol=1e-15)
    np.testing.assert_allclose(a_matrix([0, 0, 2.0]), np.diag([0.5, 0.5, 0.0]), atol=1e-15)


def test_a_matrix_diagonal_direction():
    expected = RT8 * np.array([[1, -1, 0], [-1, 1, 0], [0, 0, 2]], dtype=float)
    np.testing.assert_allclose(a_matrix([1.0, 1.0, 0.0]), expected, rtol=1e-15)


def test_b_drift_values():
    np.testing.assert_allclose(b_drift([1.0, 0, 0]), [-2.0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(b_drift([0, 2.0, 0]), [0, -0.5, 0], atol=1e-15)


def test_oddness():
    rng = np.random.default_rng(11)
    z = sample_annulus(500, 1e-2, 1e2, rng)
    np.testing.assert_array_equal(b_drift(-z), -b_drift(z))
    np.testing.assert_array_equal(sigma_matrix(-z), -sigma_matrix(z))
    np.testing.assert_array_equal(a_matrix(-z), a_matrix(z))


def test_sigma_axis_aligned():
    s = sigma_matrix([1.0, 0, 0])
    np.testing.assert_allclose(s, [[0, 0, 0], [-1, 0, 0], [0, 1, 0]], atol=1e-15)
    np.testing.assert_allclose(s @ s.T, np.diag([0.0, 1.0, 1.0]), atol=1e-15)
    s2 = sigma_matrix([0, 0, 2.0])
    np.testing.assert_allclose(
        s2, RT8 * np.array([[0, -2, 0], [0, 0, 2], [0, 0, 0]], dtype=float), rtol=1e-15
    )
    np.testing.assert_allclose(s2 @ s2.T, np.diag([0.5, 0.5, 0.0]), atol=1e-15)


def test_sigma_sigma_t_equals_a_sweep():
    rng = np.random.default_rng(7)
    z = sample_annulus(100_000, 1e-2, 1e2, rng)
    a = a_matrix(z)
    s = sigma_matrix(z)
    res = s @ s.swapaxes(-1, -2) - a
    rel = np.linalg.norm(res, axis=(-2, -1)) / np.linalg.norm(a, axis=(-2, -1))
    assert rel.max() < 1e-12


def test_projection_and_eigenvalues():
    rng = np.random.default_rng(13)
    z = sample_annulus(50_000, 1e-3, 1e3, rng)
    r = np.linalg.norm(z, axis=1)
    a = a_matrix(z)
    az = np.einsum("nij,nj->ni", a, z)
    rel = np.linalg.norm(az, axis=1) / (np.linalg.norm(a, axis=(1, 2)) * r)
    assert rel.max() < 1e-12
    # spectrum is {0, 1/|z|, 1/|z|}: kernel direction z, double eigenvalue
    # 1/|z| on the orthogonal complement
    traces = np.einsum("nii->n", a)
    np.testing.assert_allclose(traces, 2.0 / r, rtol=1e-12)
    e1 = np.stack([-z[:, 1], z[:, 0], np.zeros(len(z))], axis=1)
    bad = np.linalg.norm(e1, axis=1) < 1e-12 * r
    e1[bad] = [1.0, 0.0, 0.0]
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(z / r[:, None], e1)
    q11 = np.einsum("ni,nij,nj->n", e1, a, e1)
    q22 = np.einsum("ni,nij,nj->n", e2, a, e2)
    q12 = np.einsum("ni,nij,nj->n", e1, a, e2)
    np.testing.assert_allclose(q11, 1.0 / r, rtol=1e-10)
    np.testing.assert_allclose(q22, 1.0 / r, rtol=1e-10)
    assert np.max(np.abs(q12) * r) < 1e-10


def test_homogeneity():
    rng = np.random.default_rng(17)
    z = sample_annulus(1000, 1e-1, 1e1, rng)
    for lam in (0.5, 2.0, 7.0):
        np.testing.assert_allclose(a_matrix(lam * z), a_matrix(z) / lam, rtol=1e-12)
        np.testing.assert_allclose(b_drift(lam * z), b_drift(z) / lam**2, rtol=1e-12)
        np.testing.assert_allclose(
            sigma_matrix(lam * z), sigma_matrix(z) / np.sqrt(lam), rtol=1e-12
        )


def test_pairwise_energy_identity():
    # trace a(z) = 2/|z| and b(z).z = -2/|z| cancel in the energy balance
    rng = np.random.default_rng(19)
    z = sample_annulus(1000, 1e-3, 1e3, rng)
    r = np.linalg.norm(z, axis=1)
    tr = np.einsum("nii->n", a_matrix(z))
    bz = np.einsum("ni,ni->n", b_drift(z), z)
    np.testing.assert_allclose(tr, 2.0 / r, rtol=1e-12)
    np.testing.assert_allclose(bz, -2.0 / r, rtol=1e-12)
    np.testing.assert_allclose(tr + bz, 0.0, atol=1e-12)


def test_singular_input_raises():
    for fn in (a_matrix, b_drift, sigma_matrix):
        with pytest.raises(SingularInputError):
            fn([0.0, 0.0, 0.0])
    with pytest.raises(SingularInputError):
        mollified_triple([0.0, 0.0, 0.0], 0.0)


def test_mollified_matches_exact_at_zero_epsilon():
    t = mollified_triple([1.0, 0, 0], 0.0)
    np.testing.assert_array_equal(t.a, a_matrix([1.0, 0, 0]))
    np.testing.assert_array_equal(t.sigma, sigma_matrix([1.0, 0, 0]))
    np.testing.assert_array_equal(t.b, b_drift([1.0, 0, 0]))
    assert t.sigma_identity_residual() < 1e-15


def test_mollified_at_origin():
    # with |z| -> sqrt(|z|^2 + eps^2) applied to every occurrence, the z
    # factors kill b and sigma at z = 0 while a keeps an isotropic eps^2 core
    t = mollified_triple([0.0, 0.0, 0.0], 1.0)
    np.testing.assert_array_equal(t.b, np.zeros(3))
    np.testing.assert_array_equal(t.sigma, np.zeros((3, 3)))
    np.testing.assert_allclose(t.a, np.eye(3), rtol=1e-15)


def test_mollified_b_value():
    # |z|_eps = sqrt(2) for z = e1, eps = 1, checked against a scalar rebuild
    t = mollified_triple([1.0, 0, 0], 1.0)
    np.testing.assert_allclose(t.b, [-2.0 * 2.0 ** -1.5, 0, 0], rtol=1e-15)
    scalar = -2.0 * (1.0 + 1.0) ** -1.5
    assert abs(t.b[0] - scalar) < 1e-16


def test_mollified_sigma_identity_residual_decays():
    z = np.array([1.0, -0.3, 0.2])
    prev = np.inf
    for eps in (0.5, 0.25, 0.125, 0.0625):
        t = mollified_triple(z, eps)
        res = t.sigma_identity_residual()
        u = z @ z + eps * eps
        np.testing.assert_allclose(res, np.sqrt(3.0) * eps**2 * u**-1.5, rtol=1e-12)
        assert res < prev
        prev = res
    assert prev < 1e-2


def test_lipschitz_check_identical_pair():
    rep = lipschitz_check([1.0, 0, 0], [1.0, 0, 0])
    assert rep.lhs_sigma_sq == 0.0
    assert rep.lhs_b == 0.0


def test_lipschitz_check_b_example():
    # b((1,0,0)) = (-2,0,0), b((2,0,0)) = (-1/2,0,0): the difference has
    # norm 3/2; cross-checked against direct evaluation of both drifts
    rep = lipschitz_check([1.0, 0, 0], [2.0, 0, 0])
    direct = np.linalg.norm(b_drift([1.0, 0, 0]) - b_drift([2.0, 0, 0]))
    np.testing.assert_allclose(rep.lhs_b, direct, rtol=1e-14)
    np.testing.assert_allclose(rep.lhs_b, 3.0 / 2.0, rtol=1e-14)
    # first min branch: |z-zt| (|z|^-3 + |zt|^-3) = 9/8, times modulus 8 gives 9
    assert kernels.B_DIFF_MODULUS * (1.0 + 1.0 / 8.0) >= rep.lhs_b
    np.testing.assert_allclose(rep.rhs_b_min, 9.0 / 8.0, rtol=1e-14)


def test_lipschitz_sweep_constants():
    report = lipschitz_sweep(200_000, seed=101)
    assert report["max_ratio_sigma_sq_frobenius"] <= 25.0
    assert report["max_ratio_b"] <= 16.0
    assert report["max_sigma_diff_modulus_frobenius"] <= (
        kernels.SIGMA_DIFF_MODULUS * kernels.NORM_GAP_SAFETY
    )
    assert report["max_b_diff_modulus"] <= kernels.B_DIFF_MODULUS


def test_sigma_operator_norm_bound():
    # |sigma(z)|_op = sqrt(max eig of a) = |z|^-1/2, via the spectrum identity
    rng = np.random.default_rng(23)
    z = sample_annulus(2000, 1e-3, 1e3, rng)
    r = np.linalg.norm(z, axis=1)
    s = sigma_matrix(z)
    op = np.linalg.norm(s, ord=2, axis=(1, 2))
    np.testing.assert_allclose(op, r**-0.5, rtol=1e-10)
    frob = np.linalg.norm(s, axis=(1, 2))
    np.testing.assert_allclose(frob, np.sqrt(2.0) * r**-0.5, rtol=1e-12)
    bmag = np.linalg.norm(b_drift(z), axis=1)
    np.testing.assert_allclose(bmag, 2.0 * r**-2.0, rtol=1e-12)
