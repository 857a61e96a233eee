"""Probability densities on R^3 with exactly known sup norm and moments.

Three families: uniform balls, isotropic Gaussians truncated at a finite
radius, and finite mixtures of those with pairwise disjoint supports.  The
restriction to disjoint mixture supports keeps ||g||_inf exact (the max of
the component peaks) instead of an estimate; every family is compactly
supported, so singular-kernel quadratures get a finite outer radius.

Each component exposes its radial profile rho(s) (density at distance s
from the center) and the primitive P(s) = int_0^s t rho(t) dt, from which
the average of g over any sphere has the closed 1-d form

    avg_{|u|=r} g(v + u) = (P(d + r) - P(|d - r|)) / (2 d r),   d = |v - c|,

the workhorse of the radial singular integrals in the oracle module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erf

__all__ = ["BoundedDensity", "uniform_ball", "isotropic_gaussian", "mixture"]


@dataclass(frozen=True)
class _Ball:
    center: np.ndarray
    radius: float

    @property
    def peak(self):
        return 3.0 / (4.0 * math.pi * self.radius**3)

    @property
    def support_radius(self):
        return self.radius

    @property
    def second_central_moment(self):
        return 3.0 * self.radius**2 / 5.0

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(s <= self.radius, self.peak, 0.0)

    def shell_primitive(self, s):
        s = np.asarray(s, dtype=float)
        return self.peak * np.minimum(s, self.radius) ** 2 / 2.0

    def sample(self, n, rng):
        u = rng.standard_normal((n, 3))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = self.radius * rng.random(n) ** (1.0 / 3.0)
        return self.center + u * r[:, None]


@dataclass(frozen=True)
class _TruncatedGaussian:
    center: np.ndarray
    sigma: float
    truncation_radius: float

    @property
    def _inside_mass(self):
        # P(|X| <= R) for X ~ N(0, sigma^2 I3)
        x = self.truncation_radius / self.sigma
        return erf(x / math.sqrt(2.0)) - math.sqrt(2.0 / math.pi) * x * math.exp(-x * x / 2.0)

    @property
    def peak(self):
        return (2.0 * math.pi * self.sigma**2) ** -1.5 / self._inside_mass

    @property
    def support_radius(self):
        return self.truncation_radius

    @property
    def second_central_moment(self):
        val, _ = quad(
            lambda s: 4.0 * math.pi * s**4 * self.peak * math.exp(-s * s / (2 * self.sigma**2)),
            0.0,
            self.truncation_radius,
            limit=200,
        )
        return val

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(
            s <= self.truncation_radius,
            self.peak * np.exp(-s * s / (2.0 * self.sigma**2)),
            0.0,
        )

    def shell_primitive(self, s):
        s = np.asarray(s, dtype=float)
        sm = np.minimum(s, self.truncation_radius)
        return self.peak * self.sigma**2 * (1.0 - np.exp(-sm * sm / (2.0 * self.sigma**2)))

    def sample(self, n, rng):
        out = np.empty((n, 3))
        filled = 0
        while filled < n:
            draw = rng.standard_normal((n - filled, 3)) * self.sigma
            keep = draw[np.linalg.norm(draw, axis=1) <= self.truncation_radius]
            out[filled : filled + len(keep)] = keep
            filled += len(keep)
        return self.center + out


class BoundedDensity:
    """Mixture of radially symmetric compactly supported components with
    exact sup norm, mean, and second moment."""

    def __init__(self, components, weights, kind):
        weights = np.asarray(weights, dtype=float)
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must be positive and sum to 1")
        for i, ci in enumerate(components):
            for cj in components[i + 1 :]:
                gap = np.linalg.norm(ci.center - cj.center)
                if gap < ci.support_radius + cj.support_radius:
                    raise ValueError(
                        "mixture components must have disjoint supports so that "
                        "the sup norm stays exact"
                    )
        self.components = tuple(components)
        self.weights = weights
        self.kind = kind
        self._validate_mass()

    def _validate_mass(self, tol=1e-6):
        total = 0.0
        for w, c in zip(self.weights, self.components):
            val, _ = quad(
                lambda s, c=c: 4.0 * math.pi * s * s * float(c.profile(s)),
                0.0,
                c.support_radius,
                limit=200,
            )
            total += w * val
        if abs(total - 1.0) > tol:
            raise AssertionError(f"density mass {total} validated only to {abs(total-1.0)}")

    @property
    def linf(self):
        return float(max(w * c.peak for w, c in zip(self.weights, self.components)))

    @property
    def mean(self):
        return np.sum(self.weights[:, None] * np.stack([c.center for c in self.components]), axis=0)

    @property
    def m2(self):
        """Second moment int |v|^2 g(v) dv."""
        return float(
            sum(
                w * (c.center @ c.center + c.second_central_moment)
                for w, c in zip(self.weights, self.components)
            )
        )

    @property
    def energy(self):
        return self.m2

    def support_bound(self, origin=None):
        """Radius of a ball around origin (default 0) containing the support."""
        origin = np.zeros(3) if origin is None else np.asarray(origin, dtype=float)
        return float(
            max(np.linalg.norm(c.center - origin) + c.support_radius for c in self.components)
        )

    def evaluate(self, v):
        v = np.asarray(v, dtype=float)
        s = np.linalg.norm(
            v[..., None, :] - np.stack([c.center for c in self.components]), axis=-1
        )
        vals = np.stack(
            [c.profile(s[..., k]) for k, c in enumerate(self.components)], axis=-1
        )
        out = np.einsum("...k,k->...", vals, self.weights)
        return out if out.ndim else float(out)

    def shell_average(self, v, r):
        """Average of the density over the sphere of radius r centered at v."""
        v = np.asarray(v, dtype=float)
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape) if r.ndim else 0.0
        for w, c in zip(self.weights, self.components):
            d = float(np.linalg.norm(v - c.center))
            if d == 0.0:
                out = out + w * c.profile(r)
            else:
                with np.errstate(divide="ignore", invalid="ignore"):
                    num = c.shell_primitive(d + r) - c.shell_primitive(np.abs(d - r))
                    term = np.where(r > 0, num / (2.0 * d * np.where(r > 0, r, 1.0)), c.profile(d))
                out = out + w * term
        return out if np.ndim(out) else float(out)

    def radial_breakpoints(self, v):
        """Radii around v where shell_average has kinks (support edges)."""
        v = np.asarray(v, dtype=float)
        pts = []
        for c in self.components:
            d = float(np.linalg.norm(v - c.center))
            pts.extend([abs(d - c.support_radius), d + c.support_radius])
        return sorted(p for p in pts if p > 0)

    def sample(self, n, rng):
        """n deterministic-seeded samples; rng is a numpy Generator or a seed."""
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        if len(self.components) == 1:
            return self.components[0].sample(n, rng)
        counts = rng.multinomial(n, self.weights)
        parts = [c.sample(k, rng) for c, k in zip(self.components, counts)]
        out = np.concatenate(parts, axis=0)
        return out[rng.permutation(n)]


def uniform_ball(radius=1.0, center=(0.0, 0.0, 0.0)):
    if radius <= 0:
        raise ValueError("radius must be positive")
    comp = _Ball(center=np.asarray(center, dtype=float), radius=float(radius))
    return BoundedDensity([comp], [1.0], kind="uniform-ball")


def isotropic_gaussian(mean=(0.0, 0.0, 0.0), variance=1.0, truncation_radius=None):
    if variance <= 0:
        raise ValueError("variance must be positive")
    sigma = math.sqrt(variance)
    if truncation_radius is None:
        truncation_radius = 8.0 * sigma
    if truncation_radius <= 0:
        raise ValueError("truncation radius must be positive")
    comp = _TruncatedGaussian(
        center=np.asarray(mean, dtype=float),
        sigma=sigma,
        truncation_radius=float(truncation_radius),
    )
    return BoundedDensity([comp], [1.0], kind="isotropic-gaussian")


def mixture(pairs):
    """Finite mixture from (weight, BoundedDensity) pairs with disjoint supports."""
    comps, weights = [], []
    for w, dens in pairs:
        for wi, ci in zip(dens.weights, dens.components):
            comps.append(ci)
            weights.append(w * wi)
    return BoundedDensity(comps, weights, kind="finite-mixture")
