"""Reproducible experiment driver.

Subcommands: check-kernels (structural identities and difference-bound
sweeps), oracles (integral-inequality reports on a reference density),
simulate (single system), couple (two systems under shared noise with
transport tracking), stability (coupled runs over a sequence of shrinking
initial translations), w2 (distance between two snapshot files).

Every run validates a flat JSON config against a strict schema (unknown
keys are errors), consumes all randomness from the single seed, writes its
outputs atomically, and emits exactly one manifest echoing the config so
the run can be reproduced bit for bit.

Exit codes: 0 success, 1 validation error, 2 numerical failure,
3 assertion failure in check modes.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__, densities, kernels, oracles
from .particle import SimConfig, SimulationError, init_ensemble, simulate, simulate_coupled

SCHEMA_VERSION = 1

TRAJECTORY_COLUMNS = (
    "t", "mass", "px", "py", "pz", "energy", "entropy_est", "linf_est",
    "rho_hat", "w2_est", "skipped_pairs",
)


class ValidationError(ValueError):
    pass


class CheckFailure(AssertionError):
    pass


# ------------------------------------------------------------- config


def _check_type(key, value, kind):
    ok = {
        "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
        "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
        "string": lambda v: isinstance(v, str),
        "list": lambda v: isinstance(v, list),
        "object": lambda v: isinstance(v, dict),
        "number_or_null": lambda v: v is None
        or (isinstance(v, (int, float)) and not isinstance(v, bool)),
    }[kind]
    if not ok(value):
        raise ValidationError(f"config key '{key}': expected {kind}, got {value!r}")
    return value


_COMMON = {"schema_version": "int", "seed": "int"}

_SCHEMAS = {
    "check-kernels": {
        **_COMMON,
        "n_samples": "int",
        "n_pairs": "int",
        "r_min": "number",
        "r_max": "number",
    },
    "oracles": {
        **_COMMON,
        "density": "object",
        "alphas": "list",
        "n_mc_pairs": "int",
        "separations": "list",
    },
    "simulate": {
        **_COMMON,
        "n_particles": "int",
        "dt": "number",
        "t_end": "number",
        "epsilon": "number",
        "scheme": "string",
        "record_every": "int",
        "kde_bandwidth": "number_or_null",
        "initial": "object",
    },
    "couple": {
        **_COMMON,
        "n_particles": "int",
        "dt": "number",
        "t_end": "number",
        "epsilon": "number",
        "scheme": "string",
        "record_every": "int",
        "kde_bandwidth": "number_or_null",
        "initial": "object",
        "initial_second": "object",
        "w2_every": "int",
    },
    "stability": {
        **_COMMON,
        "n_particles": "int",
        "dt": "number",
        "t_end": "number",
        "epsilon": "number",
        "scheme": "string",
        "record_every": "int",
        "kde_bandwidth": "number_or_null",
        "initial": "object",
        "shifts": "list",
        "w2_every": "int",
    },
    "w2": {**_COMMON, "file_x": "string", "file_y": "string"},
}

_DEFAULTS = {
    "check-kernels": {"n_samples": 1_000_000, "n_pairs": 1_000_000, "r_min": 1e-3, "r_max": 1e3},
    "oracles": {
        "density": {"kind": "uniform-ball", "radius": 1.0, "center": [0.0, 0.0, 0.0]},
        "alphas": [-1.0, -2.0],
        "n_mc_pairs": 400_000,
        "separations": [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0],
    },
    "simulate": {
        "epsilon": 0.1,
        "scheme": "euler-maruyama",
        "record_every": 10,
        "kde_bandwidth": None,
        "initial": {"kind": "gaussian", "variance": 1.0},
    },
    "couple": {
        "epsilon": 0.1,
        "scheme": "euler-maruyama",
        "record_every": 10,
        "kde_bandwidth": None,
        "initial": {"kind": "gaussian", "variance": 1.0},
        "initial_second": {"kind": "translate", "shift": [0.1, 0.0, 0.0]},
        "w2_every": 50,
    },
    "stability": {
        "epsilon": 0.1,
        "scheme": "euler-maruyama",
        "record_every": 10,
        "kde_bandwidth": None,
        "initial": {"kind": "gaussian", "variance": 1.0},
        "shifts": [0.2, 0.1, 0.05],
        "w2_every": 50,
    },
    "w2": {},
}


def load_config(subcommand, path):
    if subcommand not in _SCHEMAS:
        raise ValidationError(f"unknown subcommand '{subcommand}'")
    if path is None:
        cfg = {}
    else:
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except FileNotFoundError:
            raise ValidationError(f"config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}")
    if not isinstance(cfg, dict):
        raise ValidationError(f"{path}: config must be a flat JSON object")
    schema = _SCHEMAS[subcommand]
    for key in cfg:
        if key not in schema:
            raise ValidationError(f"config key '{key}' is not allowed for {subcommand}")
    merged = {"schema_version": SCHEMA_VERSION, "seed": 0}
    merged.update(_DEFAULTS[subcommand])
    merged.update(cfg)
    for key, value in merged.items():
        _check_type(key, value, schema[key])
    if merged["schema_version"] != SCHEMA_VERSION:
        raise ValidationError(
            f"schema_version {merged['schema_version']} unsupported (expected {SCHEMA_VERSION})"
        )
    missing = set(schema) - set(merged)
    if missing:
        raise ValidationError(f"missing config keys: {sorted(missing)}")
    return merged


def _density_from_spec(spec):
    kind = spec.get("kind")
    if kind == "gaussian":
        return densities.isotropic_gaussian(
            mean=spec.get("mean", (0.0, 0.0, 0.0)),
            variance=spec.get("variance", 1.0),
            truncation_radius=spec.get("truncation_radius"),
        )
    if kind == "uniform-ball":
        return densities.uniform_ball(
            radius=spec.get("radius", 1.0), center=spec.get("center", (0.0, 0.0, 0.0))
        )
    if kind == "mixture":
        comps = spec.get("components")
        if not comps:
            raise ValidationError("mixture density needs a 'components' list")
        return densities.mixture(
            [(c.get("weight", 1.0 / len(comps)), _density_from_spec(c)) for c in comps]
        )
    if kind == "file":
        path = spec.get("path")
        if not path or not os.path.exists(path):
            raise ValidationError(f"initial sample file not found: {path}")
        return _read_snapshot(path)
    raise ValidationError(f"unknown density kind {kind!r}")


# ------------------------------------------------------------- outputs


def _fmt(x):
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return format(x, ".17g")
    return str(x)


def _atomic_write(path, writer):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, columns, rows):
    def do(fh):
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c, "") if isinstance(row, dict) else row[i])
                        for i, c in enumerate(columns)])

    _atomic_write(path, do)


def write_json(path, payload):
    _atomic_write(path, lambda fh: json.dump(payload, fh, indent=2, sort_keys=True))


def _read_snapshot(path):
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except Exception as e:
        raise ValidationError(f"cannot read snapshot file {path}: {e}")
    if data.shape[1] != 3:
        raise ValidationError(f"snapshot file {path} must have 3 columns (vx,vy,vz)")
    return data


def write_snapshot(path, velocities):
    rows = [{"vx": float(v[0]), "vy": float(v[1]), "vz": float(v[2])} for v in velocities]
    write_csv(path, ("vx", "vy", "vz"), rows)


class RunContext:
    def __init__(self, subcommand, config, out_dir, quiet):
        self.subcommand = subcommand
        self.config = config
        self.out_dir = out_dir
        self.quiet = quiet
        self.outputs = []
        self.started = datetime.datetime.now(datetime.timezone.utc).isoformat()
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name):
        self.outputs.append(name)
        return os.path.join(self.out_dir, name)

    def say(self, msg):
        if not self.quiet:
            print(msg)

    def finish(self):
        manifest = {
            "subcommand": self.subcommand,
            "config": self.config,
            "seed": self.config["seed"],
            "started_utc": self.started,
            "finished_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "code_version": __version__,
            "threads": int(os.environ.get("NUMBA_NUM_THREADS", 0)) or None,
            "outputs": list(self.outputs),
        }
        path = os.path.join(self.out_dir, "manifest.json")
        write_json(path, manifest)


# --------------------------------------------------------- subcommands


def _run_check_kernels(ctx):
    cfg = ctx.config
    ids = kernels.identity_sweep(cfg["n_samples"], cfg["seed"], cfg["r_min"], cfg["r_max"])
    lip = kernels.lipschitz_sweep(cfg["n_pairs"], cfg["seed"] + 1, cfg["r_min"], cfg["r_max"])
    report = {"identities": ids, "lipschitz": lip}
    write_json(ctx.path("kernels_report.json"), report)
    failures = []
    if ids["max_sigma_identity_rel"] >= 1e-12:
        failures.append("sigma identity")
    for key in ("max_projection_rel", "max_trace_rel", "max_eigenvalue_rel"):
        if ids[key] >= 1e-10:
            failures.append(key)
    if not ids["oddness_exact"]:
        failures.append("oddness")
    if lip["max_ratio_sigma_sq_frobenius"] > 25.0 or lip["max_ratio_b"] > 16.0:
        failures.append("min-form ratios")
    if (
        lip["max_sigma_diff_modulus_frobenius"] > lip["sigma_modulus_budget"]
        or lip["max_b_diff_modulus"] > lip["b_modulus_budget"]
    ):
        failures.append("modulus constants")
    ctx.say(f"kernel identities: max rel {max(ids[k] for k in ids if k.startswith('max')):.3e}")
    if failures:
        raise CheckFailure("kernel checks failed: " + ", ".join(failures))


def _run_oracles(ctx):
    cfg = ctx.config
    g = _density_from_spec(cfg["density"])
    if isinstance(g, np.ndarray):
        raise ValidationError("oracles needs an analytic density, not a sample file")
    reports = []
    ratio_rows = []
    for alpha in cfg["alphas"]:
        rep = oracles.moment_bound(g, float(alpha), np.zeros(3)).check()
        reports.append(rep)
        ratio_rows.append({"name": "moment_bound", "x": alpha, "lhs": rep.lhs,
                           "budget": rep.budget, "ratio": rep.ratio})
        scal = oracles.near_singularity_scaling(g, float(alpha), np.zeros(3))
        for e, lhs in zip(scal["eps_grid"], scal["lhs"]):
            ratio_rows.append({"name": f"near_singularity_alpha{alpha}", "x": float(e),
                               "lhs": float(lhs), "budget": float("nan"), "ratio": float("nan")})
        if abs(scal["fitted_exponent"] - scal["expected_exponent"]) > 0.1:
            raise CheckFailure(
                f"near-singularity exponent {scal['fitted_exponent']} vs {scal['expected_exponent']}"
            )
    tail = oracles.log_tail_growth(g, np.zeros(3))
    if tail["r_squared"] <= 0.99:
        raise CheckFailure(f"log-tail regression R^2 {tail['r_squared']}")
    for e, lhs in zip(tail["eps_grid"], tail["lhs"]):
        ratio_rows.append({"name": "log_tail", "x": float(e), "lhs": float(lhs),
                           "budget": float("nan"), "ratio": float("nan")})
    dm = oracles.double_moment_bound(g, -1.0, n_pairs=cfg["n_mc_pairs"], seed=cfg["seed"]).check()
    reports.append(dm)
    ratio_rows.append({"name": "double_moment", "x": -1.0, "lhs": dm.lhs,
                       "budget": dm.budget, "ratio": dm.ratio})
    sweep = oracles.coupled_kernel_sweep(g, separations=np.asarray(cfg["separations"], float))
    for row in sweep["rows"]:
        ratio_rows.append({"name": "coupled_sigma", "x": row["separation"],
                           "lhs": row["lhs_sigma"], "budget": float("nan"),
                           "ratio": row["ratio_sigma"]})
        ratio_rows.append({"name": "coupled_b", "x": row["separation"],
                           "lhs": row["lhs_b"], "budget": float("nan"),
                           "ratio": row["ratio_b"]})
    if sweep["max_stability_change"] > 0.10:
        raise CheckFailure(f"coupled sweep unstable: {sweep['max_stability_change']:.3f}")
    _atomic_write(
        ctx.path("oracle_reports.jsonl"),
        lambda fh: fh.write("\n".join(r.to_json() for r in reports) + "\n"),
    )
    write_csv(ctx.path("oracle_ratios.csv"), ("name", "x", "lhs", "budget", "ratio"), ratio_rows)
    ctx.say(f"oracles: {len(reports)} reports, max coupled ratio "
            f"{max(sweep['max_ratio_sigma'], sweep['max_ratio_b']):.3f}")


def _sim_config(cfg):
    return SimConfig(
        n_particles=cfg["n_particles"],
        dt=float(cfg["dt"]),
        t_end=float(cfg["t_end"]),
        epsilon=float(cfg["epsilon"]),
        seed=cfg["seed"],
        scheme=cfg["scheme"],
        kde_bandwidth=cfg["kde_bandwidth"],
        record_every=cfg["record_every"],
    )


def _run_simulate(ctx):
    cfg = ctx.config
    sim = _sim_config(cfg)
    f0 = _density_from_spec(cfg["initial"])
    traj = simulate(sim, f0)
    write_csv(ctx.path("trajectory.csv"), TRAJECTORY_COLUMNS, traj.rows)
    write_snapshot(ctx.path("snapshot_final.csv"), traj.final.velocities)
    ctx.say(f"simulate: {sim.n_steps} steps, energy drift "
            f"{traj.rows[-1]['energy'] - traj.rows[0]['energy']:+.3e}")


def _second_initial(cfg, f0, sim):
    spec = cfg["initial_second"]
    if spec.get("kind") == "translate":
        shift = np.asarray(spec.get("shift", [0.0, 0.0, 0.0]), dtype=float)
        base = init_ensemble(f0, sim.n_particles, sim.seed).velocities
        return base, base + shift
    return None, _density_from_spec(spec)


def _run_couple(ctx):
    cfg = ctx.config
    sim = _sim_config(cfg)
    f0 = _density_from_spec(cfg["initial"])
    base, second = _second_initial(cfg, f0, sim)
    first = base if base is not None else f0
    traj = simulate_coupled(sim, first, second, w2_every=cfg["w2_every"])
    write_csv(ctx.path("coupling.csv"), TRAJECTORY_COLUMNS, traj.rows)
    env = traj.envelope_overlay()
    env_rows = [
        {
            "t": t,
            "linf_first": l1,
            "linf_second": l2,
            "gamma_c1": 1.0 + l1 + l2,
            "envelope_c1": e,
        }
        for t, l1, l2, e in zip(traj.times, traj.linf_first, traj.linf_second, env)
    ]
    write_csv(
        ctx.path("envelope.csv"),
        ("t", "linf_first", "linf_second", "gamma_c1", "envelope_c1"),
        env_rows,
    )
    ctx.say(f"couple: rho0 {traj.rho_hat[0]:.6g}, sup rho {traj.sup_rho_hat:.6g}")


def _run_stability(ctx):
    cfg = ctx.config
    sim = _sim_config(cfg)
    f0 = _density_from_spec(cfg["initial"])
    base = init_ensemble(f0, sim.n_particles, sim.seed).velocities
    rows = []
    for shift in cfg["shifts"]:
        c = np.array([float(shift), 0.0, 0.0])
        traj = simulate_coupled(sim, base, base + c, w2_every=cfg["w2_every"])
        w2s = [w for w in traj.w2_est if np.isfinite(w)]
        rows.append(
            {
                "shift": float(shift),
                "rho0": traj.rho_hat[0],
                "w2_0": traj.w2_est[0],
                "sup_rho_hat": traj.sup_rho_hat,
                "sup_w2": max(w2s),
                "final_rho_hat": traj.rho_hat[-1],
                "final_w2": w2s[-1],
            }
        )
        ctx.say(f"stability shift {shift}: sup rho {traj.sup_rho_hat:.6g}")
    write_csv(
        ctx.path("stability.csv"),
        ("shift", "rho0", "w2_0", "sup_rho_hat", "sup_w2", "final_rho_hat", "final_w2"),
        rows,
    )


def _run_w2(ctx):
    from .transport import w2_exact

    cfg = ctx.config
    for key in ("file_x", "file_y"):
        if not cfg.get(key):
            raise ValidationError(f"w2 config needs '{key}'")
    x = _read_snapshot(cfg["file_x"])
    y = _read_snapshot(cfg["file_y"])
    if len(x) != len(y):
        raise ValidationError(f"snapshot sizes differ: {len(x)} vs {len(y)}")
    d, plan = w2_exact(x, y)
    write_json(ctx.path("w2.json"), {"distance": d, "cost": plan.cost, "n": len(x)})
    print(format(d, ".17g"))


_RUNNERS = {
    "check-kernels": _run_check_kernels,
    "oracles": _run_oracles,
    "simulate": _run_simulate,
    "couple": _run_couple,
    "stability": _run_stability,
    "w2": _run_w2,
}


# ------------------------------------------------------------------ main


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def build_parser():
    p = _Parser(prog="lcl", description=__doc__, add_help=True)
    sub = p.add_subparsers(dest="subcommand")
    for name in _RUNNERS:
        sp = sub.add_parser(name, add_help=True)
        sp.add_argument("--config", default=None, help="flat JSON config file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override config seed")
        sp.add_argument("--threads", type=int, default=None, help="numba thread count")
        sp.add_argument("--quiet", action="store_true")
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.subcommand is None:
            raise ValidationError("missing subcommand")
        config = load_config(args.subcommand, args.config)
        if args.seed is not None:
            config["seed"] = args.seed
        threads = args.threads
        if threads is None and os.environ.get("LCL_THREADS"):
            try:
                threads = int(os.environ["LCL_THREADS"])
            except ValueError:
                raise ValidationError(
                    f"LCL_THREADS must be an integer, got {os.environ['LCL_THREADS']!r}"
                )
        if threads is not None:
            import numba

            if threads < 1:
                raise ValidationError("--threads must be >= 1")
            numba.set_num_threads(threads)
        ctx = RunContext(args.subcommand, config, args.out, args.quiet)
        _RUNNERS[args.subcommand](ctx)
        ctx.finish()
        return 0
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (SimulationError, FloatingPointError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 2
    except (CheckFailure, oracles.OracleViolationError) as e:
        print(f"check failed: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
