"""Interacting-particle discretization of the Landau-Coulomb dynamics.

One Euler-Maruyama step of the pairwise system reads

    V_i <- V_i + (dt/N) sum_{j != i} b_eps(V_i - V_j)
              + (1/sqrt N) sum_{j != i} sigma_eps(V_i - V_j) dB_ij,

where dB_ij is a 3-vector Gaussian increment of variance dt shared by the
(i, j) and (j, i) contributions.  Oddness of sigma and b then cancels the
pair contributions in the momentum sum exactly, and the projection identity
z . sigma(z) w = 0 makes the energy a martingale whose drift cancels
pointwise (trace of sigma_eps sigma_eps^T equals -b_eps . z).

Noise is counter-based: a Philox stream keyed by the run seed and counted
by step index supplies one increment per unordered pair, so serial sweeps,
thread-parallel sweeps, and coupled twin systems all consume bitwise
identical noise.  The serial pair sweep and the parallel per-particle sweep
accumulate partner contributions in the same order and are bitwise equal;
which one runs is chosen by the active numba thread count.

With epsilon = 0 the drift is not locally Lipschitz: the tamed scheme caps
each pair's drift contribution at half the pair distance and skips (and
counts) pairs closer than PAIR_SKIP_DISTANCE for that step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from numba import njit, prange

from . import diagnostics
from .transport import optimal_pairing, w2_exact

__all__ = [
    "SimulationError",
    "SimConfig",
    "Ensemble",
    "CoupledEnsemble",
    "Trajectory",
    "CoupledTrajectory",
    "init_ensemble",
    "step",
    "simulate",
    "simulate_coupled",
    "simulate_linear",
]

PAIR_SKIP_DISTANCE = 1e-8
SCHEMES = ("euler-maruyama", "tamed-euler")

_NOISE_STREAM = 0x9E3779B9
_INIT_STREAM = 0x85EBCA6B


class SimulationError(RuntimeError):
    """Numerical failure during stepping, with step diagnostics attached."""

    def __init__(self, message, step_index=None, min_pair_distance=None, max_drift=None):
        super().__init__(message)
        self.step_index = step_index
        self.min_pair_distance = min_pair_distance
        self.max_drift = max_drift


@dataclass(frozen=True)
class SimConfig:
    n_particles: int
    dt: float
    t_end: float
    epsilon: float = 0.1
    seed: int = 0
    scheme: str = "euler-maruyama"
    kde_bandwidth: float | None = None
    record_every: int = 10

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end < self.dt:
            raise ValueError("t_end must be at least one step")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.epsilon == 0.0 and self.scheme != "tamed-euler":
            raise ValueError("epsilon = 0 requires the tamed-euler scheme")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class Ensemble:
    velocities: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.velocities, dtype=float))
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError("velocities must have shape (N, 3)")
        if not np.all(np.isfinite(v)):
            raise ValueError("velocities must be finite")
        object.__setattr__(self, "velocities", v)

    @property
    def n(self):
        return len(self.velocities)


@dataclass(frozen=True)
class CoupledEnsemble:
    """Two same-size ensembles advanced with shared pair noise; particle i
    of the first is coupled to particle i of the second."""

    first: Ensemble
    second: Ensemble

    def __post_init__(self):
        if self.first.n != self.second.n:
            raise ValueError("coupled ensembles must have equal size")
        if self.first.time != self.second.time:
            raise ValueError("coupled ensembles must share their clock")

    @property
    def rho_hat(self):
        d = self.first.velocities - self.second.velocities
        return float(np.mean(np.sum(d * d, axis=1)))


def _philox_normals(seed, stream, counter, shape):
    bg = np.random.Philox(key=np.uint64(seed) ^ np.uint64(stream), counter=[0, 0, 0, counter])
    return np.random.Generator(bg).standard_normal(shape)


def _pair_count(n):
    return n * (n - 1) // 2


def init_ensemble(dist, n, seed):
    """Seeded ensemble from a density object (or an explicit (n, 3) array).

    For density inputs the sample moments are validated against the
    analytic ones at 4 standard errors (scale sqrt(m2/n) for the mean).
    """
    if isinstance(dist, np.ndarray) or (
        hasattr(dist, "__len__") and not hasattr(dist, "sample")
    ):
        v = np.asarray(dist, dtype=float)
        if v.shape != (n, 3):
            raise ValueError(f"explicit samples must have shape ({n}, 3)")
        return Ensemble(velocities=v, time=0.0)
    rng = np.random.Generator(
        np.random.Philox(key=np.uint64(seed) ^ np.uint64(_INIT_STREAM))
    )
    v = dist.sample(n, rng)
    if n >= 16:
        scale = math.sqrt(dist.m2 / n)
        if np.any(np.abs(v.mean(axis=0) - dist.mean) > 4.0 * scale):
            raise ValueError("sample mean deviates from the density mean at 4 sigma")
        e = np.sum(v * v, axis=1)
        se = e.std(ddof=1) / math.sqrt(n)
        if abs(e.mean() - dist.m2) > 4.0 * se:
            raise ValueError("sample energy deviates from the density energy at 4 sigma")
    return Ensemble(velocities=v, time=0.0)


# ------------------------------------------------------------ numba cores


@njit(cache=True)
def _sweep_pairs(V, noise, sqdt, dt, eps2, tamed, skip2, out):
    n = V.shape[0]
    root_n = np.sqrt(1.0 * n)
    acc = np.zeros((n, 3))
    skipped = 0
    for i in range(n):
        for j in range(i + 1, n):
            zx = V[i, 0] - V[j, 0]
            zy = V[i, 1] - V[j, 1]
            zz = V[i, 2] - V[j, 2]
            r2 = zx * zx + zy * zy + zz * zz
            if eps2 == 0.0 and r2 < skip2:
                skipped += 1
                continue
            u = r2 + eps2
            s = np.sqrt(u)
            p15 = 1.0 / (u * s)
            p075 = np.sqrt(p15)
            bf = -2.0 * p15 * dt / n
            if tamed and 2.0 * p15 * dt / n > 0.5:
                bf *= 0.25 * n / (dt * p15)
            k = i * n - (i * (i + 1)) // 2 + (j - i - 1)
            w1 = noise[k, 0] * sqdt
            w2 = noise[k, 1] * sqdt
            w3 = noise[k, 2] * sqdt
            c = p075 / root_n
            dx = bf * zx + c * (zy * w1 - zz * w2)
            dy = bf * zy + c * (-zx * w1 + zz * w3)
            dz = bf * zz + c * (zx * w2 - zy * w3)
            acc[i, 0] += dx
            acc[i, 1] += dy
            acc[i, 2] += dz
            acc[j, 0] -= dx
            acc[j, 1] -= dy
            acc[j, 2] -= dz
    for i in range(n):
        out[i, 0] = V[i, 0] + acc[i, 0]
        out[i, 1] = V[i, 1] + acc[i, 1]
        out[i, 2] = V[i, 2] + acc[i, 2]
    return skipped


@njit(parallel=True, cache=True)
def _sweep_per_particle(V, noise, sqdt, dt, eps2, tamed, skip2, out):
    n = V.shape[0]
    root_n = np.sqrt(1.0 * n)
    skipped = 0
    for i in prange(n):
        ax = 0.0
        ay = 0.0
        az = 0.0
        vx = V[i, 0]
        vy = V[i, 1]
        vz = V[i, 2]
        for j in range(n):
            if j == i:
                continue
            zx = vx - V[j, 0]
            zy = vy - V[j, 1]
            zz = vz - V[j, 2]
            r2 = zx * zx + zy * zy + zz * zz
            if eps2 == 0.0 and r2 < skip2:
                skipped += 1
                continue
            u = r2 + eps2
            s = np.sqrt(u)
            p15 = 1.0 / (u * s)
            p075 = np.sqrt(p15)
            bf = -2.0 * p15 * dt / n
            if tamed and 2.0 * p15 * dt / n > 0.5:
                bf *= 0.25 * n / (dt * p15)
            if i < j:
                k = i * n - (i * (i + 1)) // 2 + (j - i - 1)
            else:
                k = j * n - (j * (j + 1)) // 2 + (i - j - 1)
            w1 = noise[k, 0] * sqdt
            w2 = noise[k, 1] * sqdt
            w3 = noise[k, 2] * sqdt
            c = p075 / root_n
            ax += bf * zx + c * (zy * w1 - zz * w2)
            ay += bf * zy + c * (-zx * w1 + zz * w3)
            az += bf * zz + c * (zx * w2 - zy * w3)
        out[i, 0] = vx + ax
        out[i, 1] = vy + ay
        out[i, 2] = vz + az
    return skipped // 2


def _advance(V, noise, config):
    out = np.empty_like(V)
    sqdt = math.sqrt(config.dt)
    eps2 = config.epsilon * config.epsilon
    tamed = config.scheme == "tamed-euler"
    skip2 = PAIR_SKIP_DISTANCE * PAIR_SKIP_DISTANCE
    if numba.get_num_threads() == 1:
        skipped = _sweep_pairs(V, noise, sqdt, config.dt, eps2, tamed, skip2, out)
    else:
        skipped = _sweep_per_particle(V, noise, sqdt, config.dt, eps2, tamed, skip2, out)
    return out, int(skipped)


def _failure_diagnostics(V, config):
    n = len(V)
    d = V[:, None, :] - V[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    np.fill_diagonal(r, np.inf)
    u = r * r + config.epsilon**2
    drift = 2.0 / u
    np.fill_diagonal(drift, 0.0)
    return float(r.min()), float(drift.sum(axis=1).max() / n)


def step(state, config, step_index=None, noise=None):
    """One pairwise Euler-Maruyama step.  Returns (Ensemble, skipped_pairs).

    Noise defaults to the counter-based stream at the given step index
    (inferred from the ensemble clock if omitted); passing it explicitly
    allows shared-noise coupling and permutation experiments.
    """
    v = state.velocities
    if state.n == 1:
        return Ensemble(velocities=v.copy(), time=state.time + config.dt), 0
    if step_index is None:
        step_index = int(round(state.time / config.dt))
    if noise is None:
        noise = _philox_normals(
            config.seed, _NOISE_STREAM, step_index, (_pair_count(state.n), 3)
        )
    out, skipped = _advance(v, noise, config)
    if not np.all(np.isfinite(out)):
        min_dist, max_drift = _failure_diagnostics(v, config)
        raise SimulationError(
            f"non-finite velocities at step {step_index} "
            f"(min pair distance {min_dist:.3e}, max drift {max_drift:.3e})",
            step_index=step_index,
            min_pair_distance=min_dist,
            max_drift=max_drift,
        )
    return Ensemble(velocities=out, time=state.time + config.dt), skipped


@dataclass
class Trajectory:
    config: SimConfig
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def record(self, state, skipped_pairs, extra=None):
        v = state.velocities
        rep = diagnostics.moments(v)
        bw = self.config.kde_bandwidth
        row = {
            "t": state.time,
            "mass": rep.mass,
            "px": rep.momentum[0],
            "py": rep.momentum[1],
            "pz": rep.momentum[2],
            "energy": rep.energy,
            "entropy_est": diagnostics.entropy_estimate(v, bw) if state.n > 1 else np.nan,
            "linf_est": diagnostics.linf_estimate(v, bw) if state.n > 1 else np.nan,
            "rho_hat": np.nan,
            "w2_est": np.nan,
            "skipped_pairs": skipped_pairs,
        }
        if extra:
            row.update(extra)
        self.times.append(state.time)
        self.snapshots.append((state.time, v.copy()))
        self.rows.append(row)

    @property
    def final(self):
        return Ensemble(velocities=self.snapshots[-1][1], time=self.times[-1])


def simulate(config, f0, noise_fn=None):
    """Run a single system to the horizon, recording diagnostics every
    record_every steps (plus the initial and final states)."""
    state = init_ensemble(f0, config.n_particles, config.seed)
    traj = Trajectory(config=config)
    traj.record(state, 0)
    n_pairs = _pair_count(state.n)
    for k in range(config.n_steps):
        if noise_fn is not None:
            noise = noise_fn(k, n_pairs)
        else:
            noise = None
        state, skipped = step(state, config, step_index=k, noise=noise)
        if (k + 1) % config.record_every == 0 or k + 1 == config.n_steps:
            traj.record(state, skipped)
    return traj


@dataclass
class CoupledTrajectory:
    config: SimConfig
    times: list = field(default_factory=list)
    rho_hat: list = field(default_factory=list)
    w2_est: list = field(default_factory=list)
    linf_first: list = field(default_factory=list)
    linf_second: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    snapshots_first: list = field(default_factory=list)
    snapshots_second: list = field(default_factory=list)

    def envelope_overlay(self, constant=1.0):
        """Largest-gap envelope fed by the measured sup-norm estimates,
        gamma(s) = constant * (1 + linf_first + linf_second), started from
        the measured initial gap."""
        from .osgood import OsgoodProblem, envelope

        t = np.asarray(self.times)
        gam = constant * (1.0 + np.asarray(self.linf_first) + np.asarray(self.linf_second))
        prob = OsgoodProblem(
            a=self.rho_hat[0], t_knots=t, gamma_values=gam, horizon=float(t[-1]) + 1e-12
        )
        return np.array([envelope(prob, ti) for ti in t])

    @property
    def sup_rho_hat(self):
        return float(np.max(self.rho_hat))


def simulate_coupled(config, f0, f0_tilde, w2_every=None, keep_snapshots=False):
    """Advance two systems under shared pair noise from optimally paired
    initial ensembles; track the empirical coupling gap rho_hat and
    periodic exact W2 distances between the empirical laws."""
    first = init_ensemble(f0, config.n_particles, config.seed)
    if isinstance(f0_tilde, np.ndarray):
        second = init_ensemble(f0_tilde, config.n_particles, config.seed)
    else:
        second = init_ensemble(f0_tilde, config.n_particles, config.seed + 1)
    plan = optimal_pairing(first.velocities, second.velocities)
    second = Ensemble(velocities=second.velocities[plan.pairing], time=0.0)
    pair = CoupledEnsemble(first=first, second=second)
    if w2_every is None:
        w2_every = config.record_every

    traj = CoupledTrajectory(config=config)

    def record(pair, skipped, with_w2):
        v1, v2 = pair.first.velocities, pair.second.velocities
        bw = config.kde_bandwidth
        l1 = diagnostics.linf_estimate(v1, bw)
        l2 = diagnostics.linf_estimate(v2, bw)
        w2 = w2_exact(v1, v2)[0] if with_w2 else np.nan
        rep = diagnostics.moments(v1)
        traj.times.append(pair.first.time)
        traj.rho_hat.append(pair.rho_hat)
        traj.w2_est.append(w2)
        traj.linf_first.append(l1)
        traj.linf_second.append(l2)
        traj.rows.append(
            {
                "t": pair.first.time,
                "mass": rep.mass,
                "px": rep.momentum[0],
                "py": rep.momentum[1],
                "pz": rep.momentum[2],
                "energy": rep.energy,
                "entropy_est": diagnostics.entropy_estimate(v1, bw),
                "linf_est": l1,
                "rho_hat": pair.rho_hat,
                "w2_est": w2,
                "skipped_pairs": skipped,
            }
        )
        if keep_snapshots:
            traj.snapshots_first.append((pair.first.time, v1.copy()))
            traj.snapshots_second.append((pair.first.time, v2.copy()))

    record(pair, 0, with_w2=True)
    n_pairs = _pair_count(first.n)
    for k in range(config.n_steps):
        noise = _philox_normals(config.seed, _NOISE_STREAM, k, (n_pairs, 3))
        new_first, sk1 = step(pair.first, config, step_index=k, noise=noise)
        new_second, sk2 = step(pair.second, config, step_index=k, noise=noise)
        pair = CoupledEnsemble(first=new_first, second=new_second)
        if (k + 1) % config.record_every == 0 or k + 1 == config.n_steps:
            with_w2 = (k + 1) % w2_every == 0 or k + 1 == config.n_steps
            record(pair, sk1 + sk2, with_w2)
    return traj


def simulate_linear(background, x0, config, n_replicas=1, drift_only=False):
    """Test particles against a frozen background ensemble.

    Each replica m carries its own per-background-particle increments
    dB_mj; drift_only switches the noise off (deterministic flow).  Returns
    (times, positions) with positions of shape (n_steps+1, n_replicas, 3).
    """
    bg = background.velocities if isinstance(background, Ensemble) else np.asarray(background, float)
    if bg.ndim != 2 or len(bg) < 1:
        raise ValueError("background must be a nonempty (N, 3) ensemble")
    n_bg = len(bg)
    x = np.broadcast_to(np.asarray(x0, dtype=float), (n_replicas, 3)).copy()
    eps2 = config.epsilon**2
    tamed = config.scheme == "tamed-euler"
    sqdt = math.sqrt(config.dt)
    times = np.arange(config.n_steps + 1) * config.dt
    out = np.empty((config.n_steps + 1, n_replicas, 3))
    out[0] = x
    for k in range(config.n_steps):
        z = x[:, None, :] - bg[None, :, :]                      # (M, N, 3)
        r2 = np.einsum("mjk,mjk->mj", z, z)
        ok = np.ones_like(r2, dtype=bool)
        if eps2 == 0.0:
            ok = r2 >= PAIR_SKIP_DISTANCE**2
        u = np.where(ok, r2 + eps2, 1.0)
        p15 = u**-1.5
        bf = np.where(ok, -2.0 * p15 * config.dt / n_bg, 0.0)
        if tamed:
            over = 2.0 * p15 * config.dt / n_bg > 0.5
            bf = np.where(over, bf * 0.25 * n_bg / (config.dt * p15), bf)
        drift = np.einsum("mj,mjk->mk", bf, z)
        x = x + drift
        if not drift_only:
            w = _philox_normals(
                config.seed, _NOISE_STREAM, k, (n_replicas, n_bg, 3)
            ) * sqdt
            p075 = np.where(ok, u**-0.75, 0.0) / math.sqrt(n_bg)
            sx = z[..., 1] * w[..., 0] - z[..., 2] * w[..., 1]
            sy = -z[..., 0] * w[..., 0] + z[..., 2] * w[..., 2]
            sz = z[..., 0] * w[..., 1] - z[..., 1] * w[..., 2]
            x = x + np.stack(
                [
                    (p075 * sx).sum(axis=1),
                    (p075 * sy).sum(axis=1),
                    (p075 * sz).sum(axis=1),
                ],
                axis=-1,
            )
        if not np.all(np.isfinite(x)):
            raise SimulationError(f"non-finite test particle at step {k}", step_index=k)
        out[k + 1] = x
    return times, out
