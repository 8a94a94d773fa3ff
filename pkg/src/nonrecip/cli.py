"""Command-line front end: canned experiments writing CSV plus a manifest.

``nonrecip run <experiment> --config <file> [--out DIR] [--seed N] [--jobs N]``
runs one experiment; ``nonrecip list`` shows what is available. Exit codes:
0 success, 2 configuration problem, 3 numerical failure (whatever rows were
already produced are still written and flagged in the manifest).

Config files are flat ``key = value`` lines; values are parsed as JSON when
possible (numbers, lists, booleans) and kept as strings otherwise. Blank
lines and ``#`` comments are ignored. Unknown keys are rejected. The same
config and seed always produce byte-identical CSV output.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, models, qcore
from .channels import (
    average_gate_fidelity,
    channel_from_matrix,
    conditional_reduced_channel,
    kraus_channel,
)
from .liouville import Lindbladian, liouvillian, propagate, vec
from .metrics import diamond_distance, isolation, log_negativity, target_isolation_bound
from .qcore import Ket, Operator, basis_ket, destroy, sigma, single_site


class ConfigError(Exception):
    """Bad experiment name, config file, or config value."""


def parse_config_file(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    out = {}
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def _resolve(name: str, overrides: dict) -> dict:
    spec = EXPERIMENTS[name]
    cfg = dict(spec.defaults)
    unknown = set(overrides) - set(cfg)
    if unknown:
        raise ConfigError(
            f"unknown config keys for {name}: {', '.join(sorted(unknown))}"
        )
    cfg.update(overrides)
    try:
        spec.validate(cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config for {name}: {exc}") from exc
    return cfg


def _pmap(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _rotation(theta: float) -> Operator:
    return Operator(single_site(2), qcore.expm(-1j * theta * sigma("z").data / 2))


def _positive_floats(cfg, keys):
    for k in keys:
        if not isinstance(cfg[k], (int, float)) or cfg[k] <= 0:
            raise ValueError(f"{k} must be a positive number")


def _float_list(cfg, key, minimum=None):
    v = cfg[key]
    if not isinstance(v, list) or not v:
        raise ValueError(f"{key} must be a nonempty list")
    for x in v:
        if not isinstance(x, (int, float)):
            raise ValueError(f"{key} entries must be numbers")
        if minimum is not None and x < minimum:
            raise ValueError(f"{key} entries must be >= {minimum}")


# -- experiments -------------------------------------------------------------------


def _exp_fig3a(cfg, seed, jobs):
    theta = float(cfg["theta_eff"])
    j = float(cfg["j"])

    def point(args):
        kappa_over_j, ell = args
        kappa = kappa_over_j * j
        lam_c = models.lambda_c_for_angle(theta, kappa)
        p = models.effective_params(j, kappa, lam_c)
        l = models.cavity_qubit_reservoir(
            j, kappa, lam_c, -p.lambda_eff, n_max_a=ell, n_max_c=ell
        )
        t = float(cfg["t_over_gamma"]) / p.gamma_eff
        ch = conditional_reduced_channel(
            l, {0: basis_ket(ell + 1, ell), 2: basis_ket(ell + 1, 0)}, 1, t
        )
        target = Operator(
            single_site(2), np.linalg.matrix_power(_rotation(theta).data, ell)
        )
        return {
            "kappa_over_J": kappa_over_j,
            "ell": ell,
            "infidelity": 1.0 - average_gate_fidelity(ch, target),
        }

    points = [(k, int(ell)) for k in cfg["kappa_over_j"] for ell in cfg["ells"]]
    yield from _pmap(point, points, jobs)


def _validate_fig3a(cfg):
    _positive_floats(cfg, ["j", "t_over_gamma"])
    _float_list(cfg, "kappa_over_j", minimum=1e-6)
    _float_list(cfg, "ells", minimum=1)
    if not -np.pi < cfg["theta_eff"] < np.pi:
        raise ValueError("theta_eff must lie inside (-pi, pi)")


def _exp_fig3b(cfg, seed, jobs):
    theta = float(cfg["theta_eff"])
    j = float(cfg["j"])
    restarts = int(cfg["optimizer_restarts"])

    def point(args):
        idx, (kappa_over_j, n_max) = args
        kappa = kappa_over_j * j
        lam_c = models.lambda_c_for_angle(theta, kappa)
        p = models.effective_params(j, kappa, lam_c)
        l = models.cavity_qubit_reservoir(
            j, kappa, lam_c, -p.lambda_eff, n_max_a=n_max, n_max_c=n_max
        )
        t = float(cfg["t_over_gamma"]) / p.gamma_eff
        vac = basis_ket(n_max + 1, 0)
        iso_cavity = isolation(
            l, probed=0, other=1, t=t, fixed_rest={2: vac},
            restarts=restarts, seed=seed + 7 * idx,
        ).value
        iso_qubit = isolation(
            l, probed=1, other=0, t=t, fixed_rest={2: vac}, mode="conditional",
            pair=(basis_ket(n_max + 1, 0), basis_ket(n_max + 1, n_max)),
        ).value
        return {
            "kappa_over_J": kappa_over_j,
            "n_max": n_max,
            "iso_cavity": iso_cavity,
            "iso_qubit_cond": iso_qubit,
        }

    points = list(enumerate(
        (k, int(n)) for k in cfg["kappa_over_j"] for n in cfg["n_maxes"]
    ))
    yield from _pmap(point, points, jobs)


def _validate_fig3b(cfg):
    _positive_floats(cfg, ["j", "t_over_gamma"])
    _float_list(cfg, "kappa_over_j", minimum=1e-6)
    _float_list(cfg, "n_maxes", minimum=1)
    if not -np.pi < cfg["theta_eff"] < np.pi:
        raise ValueError("theta_eff must lie inside (-pi, pi)")
    if not isinstance(cfg["optimizer_restarts"], int) or cfg["optimizer_restarts"] < 1:
        raise ValueError("optimizer_restarts must be a positive integer")


def _split_label(g1, g2):
    return f"{g1:g}:{g2:g}"


def _exp_fig4b(cfg, seed, jobs):
    theta, phi = float(cfg["theta"]), float(cfg["phi"])
    cutoff = int(cfg["cutoff"])
    plus_x = np.array([1.0, 1.0]) / np.sqrt(2)
    minus_x = np.array([1.0, -1.0]) / np.sqrt(2)
    for g1, g2 in cfg["gamma_splits"]:
        l = models.multi_dissipator_two_mode(theta, phi, g1, g2, cutoff=cutoff)
        lv = liouvillian(l).matrix

        def point(t, l=l, lv=lv, g1=g1, g2=g2):
            prop = qcore.expm(t * lv)
            c1 = conditional_reduced_channel(l, {2: plus_x}, (0, 1), t,
                                             propagator=prop)
            c2 = conditional_reduced_channel(l, {2: minus_x}, (0, 1), t,
                                             propagator=prop)
            d = diamond_distance(c1, c2, "ascent", restarts=4, seed=seed)
            return {
                "t": t,
                "gamma_split": _split_label(g1, g2),
                "iso_A_cond": float(np.clip(1 - 0.5 * d, 0.0, 1.0)),
            }

        yield from _pmap(point, list(cfg["times"]), jobs)


def _validate_fig4b(cfg):
    _float_list(cfg, "times", minimum=0.0)
    if not isinstance(cfg["cutoff"], int) or cfg["cutoff"] < 1:
        raise ValueError("cutoff must be a positive integer")
    splits = cfg["gamma_splits"]
    if (not isinstance(splits, list) or not splits
            or any(len(s) != 2 for s in splits)):
        raise ValueError("gamma_splits must be a list of [gamma1, gamma2] pairs")
    for g1, g2 in splits:
        if g1 < 0 or g2 < 0 or g1 + g2 == 0:
            raise ValueError("rates must be nonnegative and not both zero")


def _exp_fig4c(cfg, seed, jobs):
    theta, phi = float(cfg["theta"]), float(cfg["phi"])
    cutoff = int(cfg["cutoff"])
    times = [float(t) for t in cfg["times"]]
    for g1, g2 in cfg["gamma_splits"]:
        l = models.multi_dissipator_two_mode(theta, phi, g1, g2, cutoff=cutoff)
        v = np.zeros(l.space.dim, dtype=complex)
        v[l.space.index((1, 1, 0))] = 1 / np.sqrt(2)
        v[l.space.index((1, 1, 1))] = 1j / np.sqrt(2)
        rho0 = Ket(l.space, v).density()
        states = propagate(l, rho0, times)
        for t, state in zip(times, states):
            yield {
                "t": t,
                "gamma_split": _split_label(g1, g2),
                "log_negativity": log_negativity(state, (2,)),
            }


def _validate_fig4c(cfg):
    _validate_fig4b(cfg)
    if int(cfg["cutoff"]) < 2:
        raise ValueError("cutoff must be at least 2 to seat one photon per mode")


def _exp_bounds(cfg, seed, jobs):
    for theta in cfg["thetas"]:
        u = _rotation(float(theta))
        for ell in cfg["ells"]:
            rep = target_isolation_bound(u, int(ell))
            yield {
                "theta": theta,
                "ell": int(ell),
                "bound": rep.value,
                "bound_pairwise": rep.pairwise,
            }


def _validate_bounds(cfg):
    _float_list(cfg, "thetas")
    _float_list(cfg, "ells", minimum=0)


def _exp_gate_demo(cfg, seed, jobs):
    theta = float(cfg["theta"])
    n_max = int(cfg["n_max"])
    gamma = float(cfg["gamma"])
    l = models.directional(destroy(n_max + 1), _rotation(theta), gamma)
    t = float(cfg["t_over_gamma"]) / gamma
    for ell in range(1, n_max + 1):
        ch = conditional_reduced_channel(l, {0: basis_ket(n_max + 1, ell)}, 1, t)
        target = Operator(
            single_site(2), np.linalg.matrix_power(_rotation(theta).data, ell)
        )
        yield {
            "case": f"fock_{ell}",
            "ell": ell,
            "value": 1.0 - average_gate_fidelity(ch, target),
        }
    ch = conditional_reduced_channel(l, {0: basis_ket(n_max + 1, 0)}, 1, t)
    ident = Operator(single_site(2), np.eye(2))
    yield {
        "case": "dark",
        "ell": 0,
        "value": 1.0 - average_gate_fidelity(ch, ident),
    }


def _validate_gate_demo(cfg):
    _positive_floats(cfg, ["gamma", "t_over_gamma"])
    if not isinstance(cfg["n_max"], int) or cfg["n_max"] < 1:
        raise ValueError("n_max must be a positive integer")
    if not -np.pi < cfg["theta"] < np.pi:
        raise ValueError("theta must lie inside (-pi, pi)")


def _exp_suite(cfg, seed, jobs):
    rng = np.random.default_rng(seed)
    dim = int(cfg["dim"])
    sp = single_site(dim)

    def rand_op(scale=1.0):
        m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        return Operator(sp, scale * m / np.abs(m).max())

    h = rand_op()
    h = Operator(sp, 0.5 * (h.data + h.dag().data))
    jumps = tuple((float(rng.uniform(0.3, 1.5)), rand_op()) for _ in range(3))
    l = Lindbladian(sp, h, jumps)
    lv = liouvillian(l).matrix

    shifted = tuple(
        (r, Operator(sp, np.exp(1j * rng.uniform(0, 2 * np.pi)) * op.data))
        for r, op in jumps
    )
    res = np.abs(lv - liouvillian(Lindbladian(sp, h, shifted)).matrix).max()
    yield {"check": "gauge_invariance", "passed": bool(res < 1e-12),
           "residual": float(res)}

    u = qcore.random_sample("haar_unitary", 3, int(rng.integers(1 << 31))).data
    ops = [op for _, op in jumps]
    mixed = tuple(
        (1.0, Operator(sp, sum(u[k, m] * ops[m].data for m in range(3))))
        for k in range(3)
    )
    equal = tuple((1.0, op) for op in ops)
    res = np.abs(
        liouvillian(Lindbladian(sp, h, equal)).matrix
        - liouvillian(Lindbladian(sp, h, mixed)).matrix
    ).max()
    yield {"check": "unitary_mixing", "passed": bool(res < 1e-11),
           "residual": float(res)}

    res = np.abs(vec(np.eye(dim)).conj() @ lv).max()
    yield {"check": "trace_preservation", "passed": bool(res < 1e-10),
           "residual": float(res)}

    e1 = qcore.expm(0.4 * lv)
    e2 = qcore.expm(0.9 * lv)
    res = np.abs(e2 @ e1 - qcore.expm(1.3 * lv)).max()
    yield {"check": "semigroup", "passed": bool(res < 1e-9),
           "residual": float(res)}

    rho0 = qcore.random_sample("density", dim, int(rng.integers(1 << 31)))
    rho0 = Operator(sp, rho0.data)
    worst = 0.0
    for state in propagate(l, rho0, [0.3, 1.0, 3.0]):
        worst = max(worst, -float(np.linalg.eigvalsh(state.data).min()))
    yield {"check": "positivity_floor", "passed": bool(worst < 1e-10),
           "residual": worst}

    ch = channel_from_matrix(qcore.expm(0.8 * lv), sp, sp)
    res = np.abs(ch.superop_matrix() - qcore.expm(0.8 * lv)).max()
    yield {"check": "choi_roundtrip", "passed": bool(res < 1e-12),
           "residual": float(res)}
    yield {"check": "propagator_cptp", "passed": ch.is_cptp(),
           "residual": max(ch.cp_violation(), ch.tp_violation())}

    u1 = qcore.random_sample("haar_unitary", 2, int(rng.integers(1 << 31)))
    u2 = qcore.random_sample("haar_unitary", 2, int(rng.integers(1 << 31)))
    ca = kraus_channel([u1], u1.space)
    cb = kraus_channel([u2], u2.space)
    a = diamond_distance(ca, cb, "ascent", seed=int(rng.integers(1 << 31)))
    s = diamond_distance(ca, cb, "sdp")
    yield {"check": "diamond_agreement", "passed": bool(abs(a - s) < 1e-6),
           "residual": float(abs(a - s))}


def _validate_suite(cfg):
    if not isinstance(cfg["dim"], int) or not 2 <= cfg["dim"] <= 6:
        raise ValueError("dim must be an integer in [2, 6]")


@dataclass(frozen=True)
class Experiment:
    fn: object
    validate: object
    description: str
    defaults: dict
    fieldnames: tuple


_KAPPAS = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]

EXPERIMENTS = {
    "fig3a": Experiment(
        _exp_fig3a, _validate_fig3a,
        "gate infidelity of the microscopic model vs reservoir speed",
        {"theta_eff": np.pi / 6, "j": 1.0, "kappa_over_j": _KAPPAS,
         "ells": [1, 2], "t_over_gamma": 30.0},
        ("kappa_over_J", "ell", "infidelity"),
    ),
    "fig3b": Experiment(
        _exp_fig3b, _validate_fig3b,
        "isolation of cavity (optimized) and qubit (conditional) vs speed",
        {"theta_eff": np.pi / 6, "j": 1.0, "kappa_over_j": _KAPPAS,
         "n_maxes": [1, 2], "t_over_gamma": np.pi, "optimizer_restarts": 8},
        ("kappa_over_J", "n_max", "iso_cavity", "iso_qubit_cond"),
    ),
    "fig4b": Experiment(
        _exp_fig4b, _validate_fig4b,
        "two-mode conditional isolation for equal and split rates",
        {"theta": np.pi / 4, "phi": np.pi / 4, "cutoff": 2,
         "gamma_splits": [[1.0, 1.0], [2.0, 0.0]],
         "times": list(np.linspace(0.0, 5.0, 32))},
        ("t", "gamma_split", "iso_A_cond"),
    ),
    "fig4c": Experiment(
        _exp_fig4c, _validate_fig4c,
        "entanglement transient of the two-mode model",
        {"theta": np.pi / 4, "phi": np.pi / 4, "cutoff": 2,
         "gamma_splits": [[1.0, 1.0], [2.0, 0.0]],
         "times": list(np.linspace(0.0, 30.0, 61))},
        ("t", "gamma_split", "log_negativity"),
    ),
    "bounds": Experiment(
        _exp_bounds, _validate_bounds,
        "isolation ceilings from the conditioning unitary's spectrum",
        {"thetas": [np.pi / 6, np.pi / 3, np.pi / 2, np.pi], "ells": [1, 2]},
        ("theta", "ell", "bound", "bound_pairwise"),
    ),
    "gate-demo": Experiment(
        _exp_gate_demo, _validate_gate_demo,
        "dissipatively stabilized conditional rotations on the target",
        {"theta": np.pi / 6, "n_max": 2, "gamma": 1.0, "t_over_gamma": 30.0},
        ("case", "ell", "value"),
    ),
    "suite": Experiment(
        _exp_suite, _validate_suite,
        "seeded invariant battery over a random generator",
        {"dim": 3},
        ("check", "passed", "residual"),
    ),
}


# -- runner ------------------------------------------------------------------------


def _write_csv(path: Path, fieldnames, rows):
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames),
                                lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in fieldnames})


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _run(args) -> int:
    name = args.experiment
    if name not in EXPERIMENTS:
        print(f"unknown experiment: {name}; see 'nonrecip list'",
              file=sys.stderr)
        return 2
    try:
        overrides = parse_config_file(args.config) if args.config else {}
        cfg = _resolve(name, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = EXPERIMENTS[name]
    rows, status, error = [], "ok", None
    t0 = time.monotonic()
    try:
        for row in spec.fn(cfg, seed=args.seed, jobs=args.jobs):
            rows.append(row)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        status = "partial" if rows else "failed"
        error = f"{type(exc).__name__}: {exc}"
    runtime = time.monotonic() - t0
    csv_name = f"{name}.csv"
    _write_csv(out_dir / csv_name, spec.fieldnames, rows)
    manifest = {
        "experiment": name,
        "config": _jsonable(cfg),
        "seed": args.seed,
        "jobs": args.jobs,
        "csv": csv_name,
        "rows": len(rows),
        "status": status,
        "error": error,
        "runtime_seconds": round(runtime, 3),
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
            "package": __version__,
        },
    }
    with (out_dir / "manifest.json").open("w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if status != "ok":
        print(f"{name}: {status} after {len(rows)} rows: {error}",
              file=sys.stderr)
        return 3
    print(f"{name}: wrote {len(rows)} rows to {out_dir / csv_name}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonrecip",
        description="Directional open-quantum-system experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run one experiment")
    runp.add_argument("experiment", help="experiment name, see 'list'")
    runp.add_argument("--config", help="key=value config file", default=None)
    runp.add_argument("--out", help="output directory", default=".")
    runp.add_argument("--seed", type=int, default=1234,
                      help="seed for every stochastic component")
    runp.add_argument("--jobs", type=int, default=1,
                      help="worker threads for independent grid points")
    sub.add_parser("list", help="list experiments")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        width = max(len(n) for n in EXPERIMENTS)
        for name, spec in EXPERIMENTS.items():
            print(f"{name:<{width}}  {spec.description}")
        return 0
    return _run(args)


if __name__ == "__main__":
    sys.exit(main())
