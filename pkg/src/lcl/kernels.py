"""Coulomb collision kernels a, b, sigma and their structural identities.

For a relative velocity z in R^3 the kernels are

    a(z)     = |z|^-3 (|z|^2 I - z z^T)          (symmetric, PSD, a(z) z = 0)
    b_i(z)   = sum_j d_j a_ij(z) = -2 |z|^-3 z_i
    sigma(z) = |z|^-3/2 [[ z2, -z3,  0 ],
                         [-z1,   0, z3 ],
                         [  0,  z1, -z2]]         (sigma sigma^T = a)

All three are homogeneous (degrees -1, -2, -1/2) and odd in the sense
b(-z) = -b(z), sigma(-z) = -sigma(z), a(-z) = a(z).

The mollified variants replace every occurrence of |z| by
sqrt(|z|^2 + eps^2).  Mollifying a and sigma independently breaks the
identity sigma sigma^T = a: the residual is exactly

    a_eps(z) - sigma_eps(z) sigma_eps(z)^T = eps^2 (|z|^2 + eps^2)^{-3/2} I,

which vanishes as eps -> 0 for fixed z.

Everything here is a pure function of its arguments; all operations accept
either a single 3-vector or a batch of shape (..., 3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SingularInputError",
    "KernelTriple",
    "LipschitzReport",
    "a_matrix",
    "b_drift",
    "sigma_matrix",
    "mollified_triple",
    "lipschitz_check",
    "lipschitz_sweep",
    "identity_sweep",
    "sample_annulus",
]

# Modulus constants for the min-form difference bounds, in the norms where
# they are exact:
#   |sigma(z) - sigma(zt)|_op <= 5/2 |z - zt| (|z|^-3/2 + |zt|^-3/2)
#   |b(z) - b(zt)|            <=   8 |z - zt| (|z|^-3  + |zt|^-3)
# sigma differences are S(w) for a single vector w (S is linear in z), and
# |S(w)|_F = sqrt(2) |w| = sqrt(2) |S(w)|_op, so the Frobenius-norm check
# carries an extra factor of at most FROBENIUS_GAP (we allow a safety
# factor of 2 in the assertions).
SIGMA_DIFF_MODULUS = 2.5
B_DIFF_MODULUS = 8.0
FROBENIUS_GAP = np.sqrt(2.0)
NORM_GAP_SAFETY = 2.0


class SingularInputError(ValueError):
    """Raised when an exact kernel is evaluated at z = 0."""


def _as_batch(z):
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != 3:
        raise ValueError(f"expected 3-vectors, got shape {z.shape}")
    return z


def _norm_sq(z):
    return np.einsum("...i,...i->...", z, z)


def _require_nonsingular(r2):
    if np.any(r2 == 0.0):
        raise SingularInputError("kernel evaluated at z = 0; mollify or skip the pair")


def _skew_matrix(z):
    """The linear matrix S(z) with sigma(z) = |z|^{-3/2} S(z).

    S(z) w equals z x (w3, w2, w1), so S(z) w is always orthogonal to z.
    """
    z1, z2, z3 = z[..., 0], z[..., 1], z[..., 2]
    zero = np.zeros_like(z1)
    return np.stack(
        [
            np.stack([z2, -z3, zero], axis=-1),
            np.stack([-z1, zero, z3], axis=-1),
            np.stack([zero, z1, -z2], axis=-1),
        ],
        axis=-2,
    )


def a_matrix(z, epsilon=0.0):
    """Collision kernel matrix a(z), optionally mollified.

    Returns |z|_eps^-3 (|z|_eps^2 I - z z^T) with |z|_eps = sqrt(|z|^2 + eps^2),
    shape (..., 3, 3).  Raises SingularInputError at z = 0 when epsilon = 0.
    """
    z = _as_batch(z)
    r2 = _norm_sq(z)
    if epsilon == 0.0:
        _require_nonsingular(r2)
    u = r2 + epsilon * epsilon
    inv32 = np.where(u > 0.0, u ** -1.5, 0.0)
    eye = np.eye(3)
    outer = z[..., :, None] * z[..., None, :]
    return inv32[..., None, None] * (u[..., None, None] * eye - outer)


def b_drift(z, epsilon=0.0):
    """Drift vector b(z) = -2 |z|_eps^-3 z, shape (..., 3)."""
    z = _as_batch(z)
    r2 = _norm_sq(z)
    if epsilon == 0.0:
        _require_nonsingular(r2)
    u = r2 + epsilon * epsilon
    inv32 = np.where(u > 0.0, u ** -1.5, 0.0)
    return -2.0 * inv32[..., None] * z


def sigma_matrix(z, epsilon=0.0):
    """Noise factor sigma(z) = |z|_eps^-3/2 S(z), shape (..., 3, 3).

    At epsilon = 0 it satisfies sigma(z) sigma(z)^T = a(z) exactly.
    """
    z = _as_batch(z)
    r2 = _norm_sq(z)
    if epsilon == 0.0:
        _require_nonsingular(r2)
    u = r2 + epsilon * epsilon
    inv34 = np.where(u > 0.0, u ** -0.75, 0.0)
    return inv34[..., None, None] * _skew_matrix(z)


@dataclass(frozen=True)
class KernelTriple:
    """Kernels (a, sigma, b) evaluated at one relative velocity z.

    epsilon = 0 is the exact Coulomb kernel; epsilon > 0 the mollified one.
    """

    a: np.ndarray
    sigma: np.ndarray
    b: np.ndarray
    z: np.ndarray
    epsilon: float

    def sigma_identity_residual(self):
        """Frobenius norm of sigma sigma^T - a (0 at epsilon = 0, fp aside).

        For epsilon > 0 the residual is exactly
        eps^2 (|z|^2 + eps^2)^{-3/2} sqrt(3).
        """
        res = self.sigma @ self.sigma.swapaxes(-1, -2) - self.a
        return float(np.linalg.norm(res))


def mollified_triple(z, epsilon):
    """Evaluate (a, sigma, b) with |z| replaced by sqrt(|z|^2 + epsilon^2)."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    z = _as_batch(z)
    return KernelTriple(
        a=a_matrix(z, epsilon),
        sigma=sigma_matrix(z, epsilon),
        b=b_drift(z, epsilon),
        z=z,
        epsilon=float(epsilon),
    )


@dataclass(frozen=True)
class LipschitzReport:
    """Both sides of the min-form difference bounds for one pair (z, zt).

    lhs_sigma_sq is the squared Frobenius norm of sigma(z) - sigma(zt);
    lhs_b the Euclidean norm of b(z) - b(zt).  The rhs fields are the
    min-form budgets without any constant, so ratio_* are the empirical
    constants for this pair.
    """

    lhs_sigma_sq: float
    rhs_sigma_min: float
    ratio_sigma: float
    lhs_b: float
    rhs_b_min: float
    ratio_b: float


def _min_forms(z, zt):
    z = _as_batch(z)
    zt = _as_batch(zt)
    r2, rt2 = _norm_sq(z), _norm_sq(zt)
    _require_nonsingular(r2)
    _require_nonsingular(rt2)
    d2 = _norm_sq(z - zt)
    inv3 = r2 ** -1.5 + rt2 ** -1.5
    sigma_budget = np.minimum(d2 * inv3, r2 ** -0.5 + rt2 ** -0.5)
    b_budget = np.minimum(np.sqrt(d2) * inv3, 1.0 / r2 + 1.0 / rt2)

    # sigma(z) - sigma(zt) = S(w) with w = |z|^-3/2 z - |zt|^-3/2 zt and
    # |S(w)|_F^2 = 2 |w|^2; likewise |b(z)-b(zt)| = 2 ||z|^-3 z - |zt|^-3 zt|.
    w = (r2 ** -0.75)[..., None] * z - (rt2 ** -0.75)[..., None] * zt
    lhs_sigma_sq = 2.0 * _norm_sq(w)
    wb = (r2 ** -1.5)[..., None] * z - (rt2 ** -1.5)[..., None] * zt
    lhs_b = 2.0 * np.sqrt(_norm_sq(wb))
    return lhs_sigma_sq, sigma_budget, lhs_b, b_budget


def lipschitz_check(z, zt):
    """Evaluate the min-form difference bounds at a single pair."""
    lhs_s, rhs_s, lhs_b, rhs_b = _min_forms(z, zt)
    lhs_s, rhs_s, lhs_b, rhs_b = map(float, (lhs_s, rhs_s, lhs_b, rhs_b))
    return LipschitzReport(
        lhs_sigma_sq=lhs_s,
        rhs_sigma_min=rhs_s,
        ratio_sigma=lhs_s / rhs_s if rhs_s > 0 else 0.0,
        lhs_b=lhs_b,
        rhs_b_min=rhs_b,
        ratio_b=lhs_b / rhs_b if rhs_b > 0 else 0.0,
    )


def sample_annulus(n, r_min, r_max, rng):
    """n points uniform in direction, log-uniform in radius over [r_min, r_max]."""
    u = rng.standard_normal((n, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    r = np.exp(rng.uniform(np.log(r_min), np.log(r_max), size=n))
    return u * r[:, None]


def identity_sweep(n_samples, seed, r_min=1e-3, r_max=1e3, chunk=200_000):
    """Max relative errors of the structural identities over a seeded
    annulus sweep: sigma sigma^T = a, a z = 0, trace a = 2/|z|, spectrum
    {0, 1/|z|, 1/|z|}, and exact oddness of b and sigma."""
    rng = np.random.default_rng(seed)
    out = {
        "n_samples": n_samples,
        "seed": seed,
        "max_sigma_identity_rel": 0.0,
        "max_projection_rel": 0.0,
        "max_trace_rel": 0.0,
        "max_eigenvalue_rel": 0.0,
        "oddness_exact": True,
    }
    left = n_samples
    while left > 0:
        m = min(chunk, left)
        left -= m
        z = sample_annulus(m, r_min, r_max, rng)
        r = np.linalg.norm(z, axis=1)
        a = a_matrix(z)
        s = sigma_matrix(z)
        anorm = np.linalg.norm(a, axis=(1, 2))
        res = np.linalg.norm(s @ s.swapaxes(-1, -2) - a, axis=(1, 2)) / anorm
        out["max_sigma_identity_rel"] = max(out["max_sigma_identity_rel"], float(res.max()))
        az = np.linalg.norm(np.einsum("nij,nj->ni", a, z), axis=1) / (anorm * r)
        out["max_projection_rel"] = max(out["max_projection_rel"], float(az.max()))
        tr = np.abs(np.einsum("nii->n", a) - 2.0 / r) * r / 2.0
        out["max_trace_rel"] = max(out["max_trace_rel"], float(tr.max()))
        # spectrum via an explicit orthonormal frame adapted to z
        e1 = np.stack([-z[:, 1], z[:, 0], np.zeros(m)], axis=1)
        weak = np.linalg.norm(e1, axis=1) < 1e-9 * r
        e1[weak] = [1.0, 0.0, 0.0]
        e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
        e2 = np.cross(z / r[:, None], e1)
        q11 = np.abs(np.einsum("ni,nij,nj->n", e1, a, e1) - 1.0 / r) * r
        q22 = np.abs(np.einsum("ni,nij,nj->n", e2, a, e2) - 1.0 / r) * r
        q12 = np.abs(np.einsum("ni,nij,nj->n", e1, a, e2)) * r
        out["max_eigenvalue_rel"] = max(
            out["max_eigenvalue_rel"], float(q11.max()), float(q22.max()), float(q12.max())
        )
        if not (
            np.array_equal(b_drift(-z), -b_drift(z))
            and np.array_equal(sigma_matrix(-z), -s)
        ):
            out["oddness_exact"] = False
    return out


def lipschitz_sweep(n_pairs, seed, r_min=1e-3, r_max=1e3, chunk=200_000):
    """Empirical min-form constants over a random annulus sweep.

    Returns a dict with the max observed ratios for the two min-form bounds
    (Frobenius convention for sigma) and for the per-branch modulus bounds
    |sigma diff| / (|z-zt|(|z|^-3/2+|zt|^-3/2)) and
    |b diff| / (|z-zt|(|z|^-3+|zt|^-3)).
    """
    rng = np.random.default_rng(seed)
    max_ratio_sigma = 0.0
    max_ratio_b = 0.0
    max_sigma_modulus = 0.0
    max_b_modulus = 0.0
    left = n_pairs
    while left > 0:
        m = min(chunk, left)
        left -= m
        z = sample_annulus(m, r_min, r_max, rng)
        zt = sample_annulus(m, r_min, r_max, rng)
        lhs_s, rhs_s, lhs_b, rhs_b = _min_forms(z, zt)
        max_ratio_sigma = max(max_ratio_sigma, float(np.max(lhs_s / rhs_s)))
        max_ratio_b = max(max_ratio_b, float(np.max(lhs_b / rhs_b)))
        d = np.sqrt(_norm_sq(z - zt))
        nz = d > 0
        r2, rt2 = _norm_sq(z), _norm_sq(zt)
        branch_s = d * (r2 ** -0.75 + rt2 ** -0.75)
        branch_b = d * (r2 ** -1.5 + rt2 ** -1.5)
        max_sigma_modulus = max(
            max_sigma_modulus, float(np.max(np.sqrt(lhs_s[nz]) / branch_s[nz]))
        )
        max_b_modulus = max(max_b_modulus, float(np.max(lhs_b[nz] / branch_b[nz])))
    return {
        "n_pairs": n_pairs,
        "seed": seed,
        "r_min": r_min,
        "r_max": r_max,
        "max_ratio_sigma_sq_frobenius": max_ratio_sigma,
        "max_ratio_b": max_ratio_b,
        "max_sigma_diff_modulus_frobenius": max_sigma_modulus,
        "max_b_diff_modulus": max_b_modulus,
        "sigma_modulus_budget": SIGMA_DIFF_MODULUS * NORM_GAP_SAFETY,
        "b_modulus_budget": B_DIFF_MODULUS,
    }
