"""Osgood-Gronwall machinery: the modulus Psi, its concave majorant, and
the envelope of integral inequalities rho(t) <= a + int_0^t gamma Psi(rho).

The modulus is Psi(x) = x (1 - log x) for x <= 1 and Psi(x) = x beyond; it
is continuous, increasing, and not Lipschitz at 0, which is exactly what
makes the envelope collapse to zero when the initial gap a vanishes.  With

    M(x) = int_x^1 dy / Psi(y) = log(1 - log x)   (x <= 1)
                               = -log x           (x >= 1)

a bounded solution of the integral inequality satisfies
M(a) - M(rho(t)) <= int_0^t gamma, so

    rho(t) <= envelope(t) = M^{-1}( M(a) - int_0^t gamma ),

and the envelope is the exact maximal solution of rho' = gamma Psi(rho),
rho(0) = a.  Closed forms for M and M^{-1} are validated once against
adaptive quadrature before first use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

__all__ = [
    "psi",
    "gamma_majorant",
    "m_transform",
    "m_inverse",
    "OsgoodProblem",
    "envelope",
    "stability_certificate",
    "validate_closed_forms",
]


def _check_nonnegative(x):
    if np.any(np.asarray(x) < 0):
        raise ValueError("argument must be nonnegative")


def psi(x):
    """Osgood modulus Psi(x) = x (1 - log x) on [0, 1], x beyond."""
    x = np.asarray(x, dtype=float)
    _check_nonnegative(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        low = np.where(x > 0, x * (1.0 - np.log(np.where(x > 0, x, 1.0))), 0.0)
    out = np.where(x <= 1.0, low, x)
    return out if out.ndim else float(out)


def gamma_majorant(x):
    """Concave increasing majorant of Psi: x(1 - log x) on [0, 1/2],
    x log 2 + 1/2 beyond.  Satisfies Psi/2 <= Gamma <= 2 Psi."""
    x = np.asarray(x, dtype=float)
    _check_nonnegative(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        low = np.where(x > 0, x * (1.0 - np.log(np.where(x > 0, x, 1.0))), 0.0)
    out = np.where(x <= 0.5, low, x * np.log(2.0) + 0.5)
    return out if out.ndim else float(out)


_closed_forms_validated = False


def validate_closed_forms(n_grid=33, tol=1e-8):
    """Validate the closed forms of M against adaptive quadrature of
    int_x^1 dy/Psi(y), and the M/M^{-1} round trip.  Raises on failure."""
    xs = np.geomspace(1e-6, 1e3, n_grid)
    for x in xs:
        ref = quad(lambda y: 1.0 / psi(y), x, 1.0, limit=200, epsabs=1e-12, epsrel=1e-12)[0]
        if abs(_m_closed(x) - ref) > tol:
            raise AssertionError(
                f"closed form M({x}) = {_m_closed(x)} vs quadrature {ref}"
            )
    # M^{-1}(y) = exp(1 - e^y) underflows float64 for y > log(745) ~ 6.61,
    # so the round trip is checked on the representable range only
    ys = np.linspace(-10, 6.5, n_grid)
    err = np.max(np.abs(_m_closed(m_inverse(ys)) - ys))
    if err > 1e-10:
        raise AssertionError(f"M o M^-1 round-trip error {err}")
    return True


def _m_closed(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        low = np.log(1.0 - np.log(np.where(x > 0, x, 1.0)))
        high = -np.log(np.where(x > 0, x, 1.0))
    out = np.where(x <= 1.0, low, high)
    return out if out.ndim else float(out)


def _ensure_validated():
    global _closed_forms_validated
    if not _closed_forms_validated:
        validate_closed_forms()
        _closed_forms_validated = True


def m_transform(x):
    """M(x) = int_x^1 dy/Psi(y): log(1 - log x) for x in (0,1], -log x for x >= 1.

    Decreasing bijection from (0, inf) onto R; diverges at 0+.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("M(x) requires x > 0 (M diverges at 0+)")
    _ensure_validated()
    return _m_closed(x)


def m_inverse(y):
    """Inverse of M: exp(1 - exp(y)) for y >= 0, exp(-y) for y <= 0."""
    y = np.asarray(y, dtype=float)
    with np.errstate(over="ignore"):
        out = np.where(y >= 0.0, np.exp(1.0 - np.exp(y)), np.exp(-y))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class OsgoodProblem:
    """Integral-inequality data: initial gap a, rate gamma as a
    piecewise-constant sample sequence, and horizon.

    gamma(t) = gamma_values[k] on [t_knots[k], t_knots[k+1]), with the last
    value extended to the horizon; the running integral is the left-endpoint
    Riemann sum, which is exact for this step representation.
    """

    a: float
    t_knots: np.ndarray
    gamma_values: np.ndarray
    horizon: float
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.t_knots, dtype=float)
        g = np.asarray(self.gamma_values, dtype=float)
        if self.a < 0:
            raise ValueError("initial gap a must be nonnegative")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if t.ndim != 1 or g.shape != t.shape:
            raise ValueError("t_knots and gamma_values must be 1-d of equal length")
        if len(t) == 0 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("t_knots must start at 0 and increase strictly")
        if t[-1] > self.horizon:
            raise ValueError("t_knots must not exceed the horizon")
        if np.any(g < 0) or not np.all(np.isfinite(g)):
            raise ValueError("gamma must be nonnegative and finite")
        object.__setattr__(self, "t_knots", t)
        object.__setattr__(self, "gamma_values", g)
        edges = np.append(t, self.horizon)
        cum = np.concatenate([[0.0], np.cumsum(g * np.diff(edges))])
        object.__setattr__(self, "_cum", cum)
        if not np.isfinite(cum[-1]):
            raise ValueError("int_0^T gamma must be finite")

    def gamma_integral(self, t):
        """int_0^t gamma(s) ds for t in [0, horizon]."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.horizon):
            raise ValueError("t outside [0, horizon]")
        edges = np.append(self.t_knots, self.horizon)
        k = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(self.gamma_values) - 1)
        out = self._cum[k] + self.gamma_values[k] * (t - edges[k])
        return out if out.ndim else float(out)


def envelope(problem, t):
    """Largest value compatible with the integral inequality at time t.

    Returns 0 identically when the initial gap is 0; otherwise
    M^{-1}(M(a) - int_0^t gamma).  Nondecreasing in t, in a, and in gamma.
    """
    g = problem.gamma_integral(t)
    if problem.a == 0.0:
        return np.zeros_like(g) if np.ndim(g) else 0.0
    return m_inverse(m_transform(problem.a) - g)


def stability_certificate(initial_gaps, gamma_total):
    """Sup-bounds M^{-1}(M(a_n) - gamma_total) for a sequence of initial gaps.

    gamma_total is the measured budget int_0^T gamma; gaps of 0 give bound 0.
    The bounds tend to 0 whenever the gaps do.
    """
    if gamma_total < 0:
        raise ValueError("gamma_total must be nonnegative")
    gaps = np.asarray(initial_gaps, dtype=float)
    _check_nonnegative(gaps)
    out = np.zeros_like(gaps)
    pos = gaps > 0
    if np.any(pos):
        out[pos] = m_inverse(m_transform(gaps[pos]) - gamma_total)
    return out
