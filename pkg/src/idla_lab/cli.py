"""Experiment orchestration: ensembles, analysis and property-gate reports.

Subcommands
-----------
simulate    grow independent clusters in parallel, write snapshots + a CSV
            of radii/deviation statistics
analyze     load snapshots, detect events over parameter grids, fit the
            max-deviation growth law against log r and r^(1/3)
kernel      property gates for the exact potential-kernel table
harmonic    property gates for the detector field and its region
martingale  drift/clock gates for the stopped-particle process
tower       shell/tower gates (worked example + exhaustive minima)

Every run is a pure function of its configuration: per-trial seeds are
derived from the master seed by counter, output rows are sorted, and
floats are written in shortest round-trip form, so reruns are
byte-identical regardless of worker count.  Exit code 0 means all gates
passed, 1 means a gate failed, 2 means usage or I/O trouble.

Configuration may come from a flat ``key = value`` file (``--config``);
command-line flags override it, and unknown keys are an error.
"""

from __future__ import annotations

import argparse
import functools
import json
import math
import os
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from ._rng import trial_seed
from .engine import SnapshotError, idla_grow, inner_radius, outer_radius, read_snapshot, write_snapshot
from .events import (
    EXAMPLE_SHELL_COUNTS,
    detect_early,
    detect_late,
    max_abs_lateness,
    min_tower_energy,
    tentacle_scan,
    tower_decompose,
    tower_energy,
)
from .harmonic_field import build_omega, h_vertex, make_pole, mean_value_sum
from .lattice import apply_inverse_dihedral
from .martingale import martingale_trace
from .potential_kernel import KernelValue, build_kernel_table, fit_lambda


class UsageError(Exception):
    pass


# -- provenance ----------------------------------------------------------------


@functools.cache
def build_identifier() -> str:
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=here,
            capture_output=True,
            text=True,
            timeout=10,
        )
        if out.returncode == 0:
            return f"idla-lab-{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"idla-lab-{__version__}"


def _meta(command: str, cfg: dict) -> dict:
    return {"build": build_identifier(), "command": command, "config": cfg}


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, meta: dict, header: list[str], rows: list[list]) -> None:
    def fmt(v):
        if isinstance(v, float):
            return repr(v)
        return str(v)

    with open(path, "w") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


# -- config file ----------------------------------------------------------------


def load_config(path: str) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in out:
            raise UsageError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def _apply_config(parser: argparse.ArgumentParser, args: argparse.Namespace, argv: list[str]) -> None:
    """Fold config-file values under explicit command-line flags.

    Config keys are the long option names with dashes replaced by
    underscores (as printed in ``--help``); unknown keys are an error.
    """
    if not args.config:
        return
    file_cfg = load_config(args.config)
    valid = {a.dest: a for a in parser._actions if a.dest not in ("help", "config", "command")}
    explicit = set()
    for a in parser._actions:
        if any(s in argv for s in a.option_strings):
            explicit.add(a.dest)
    for key, raw in file_cfg.items():
        if key not in valid:
            raise UsageError(f"unknown config key {key!r} (valid: {', '.join(sorted(valid))})")
        if key in explicit:
            continue
        action = valid[key]
        if isinstance(action, argparse._StoreTrueAction):
            lowered = raw.lower()
            if lowered not in ("true", "false", "0", "1"):
                raise UsageError(f"config key {key!r}: expected a boolean, got {raw!r}")
            setattr(args, key, lowered in ("true", "1"))
        else:
            setattr(args, key, action.type(raw) if action.type else raw)


# -- shared argument helpers -----------------------------------------------------


def _u64(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _int_list(s: str) -> list[int]:
    return [int(tok) for tok in s.split(",") if tok.strip()]


def _float_list(s: str) -> list[float]:
    return [float(tok) for tok in s.split(",") if tok.strip()]


def _point(s: str) -> tuple[int, int]:
    parts = [int(tok) for tok in s.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected 'x,y'")
    return parts[0], parts[1]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--seed", type=_u64, default=0, help="64-bit master seed (default 0)")
    p.add_argument("--out", type=Path, default=Path("idla_out"), help="output directory (default ./idla_out)")
    p.add_argument("--threads", type=int, default=0, help="worker processes; 0 = all cores (default 0)")


def _resolved(args: argparse.Namespace) -> dict:
    """Config echo for report headers.

    Excludes execution-environment knobs (worker count, output location):
    results must be byte-identical across them, per the determinism
    contract, so they cannot appear in emitted bytes.
    """
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in ("command", "config", "func", "_parser", "threads", "out"):
            continue
        if isinstance(v, Path):
            v = str(v)
        elif isinstance(v, tuple):
            v = list(v)
        cfg[k] = v
    return cfg


def _workers(args) -> int:
    return args.threads if args.threads > 0 else (os.cpu_count() or 1)


# -- simulate --------------------------------------------------------------------


def _simulate_one(task):
    n, trial, seed, snap_path = task
    h = idla_grow(n, seed)
    write_snapshot(h, snap_path)
    r = math.sqrt(n / math.pi)
    inner = inner_radius(h)
    outer = outer_radius(h)
    return [
        n,
        trial,
        seed,
        inner,
        outer,
        r - inner,
        outer - r,
        max_abs_lateness(h),
        h.total_steps,
    ]


def cmd_simulate(args) -> int:
    sizes = args.sizes
    if not sizes or any(n < 1 for n in sizes):
        raise UsageError("sizes must be positive integers")
    out: Path = args.out
    snaps = out / "snapshots"
    snaps.mkdir(parents=True, exist_ok=True)

    tasks = []
    index = 0
    for n in sorted(sizes):
        for trial in range(args.trials):
            seed = trial_seed(args.seed, index)
            tasks.append((n, trial, seed, str(snaps / f"n{n:09d}_t{trial:04d}.idla")))
            index += 1

    created = [Path(t[3]) for t in tasks] + [out / "simulate.csv"]
    try:
        if _workers(args) == 1:
            rows = [_simulate_one(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=_workers(args)) as pool:
                rows = list(pool.map(_simulate_one, tasks, chunksize=1))
    except BaseException:
        for p in created:
            p.unlink(missing_ok=True)
        raise

    rows.sort(key=lambda r: (r[0], r[1]))
    header = [
        "n",
        "trial",
        "trial_seed",
        "inner_radius",
        "outer_radius",
        "deviation_in",
        "deviation_out",
        "max_abs_lateness",
        "total_steps",
    ]
    _write_csv(out / "simulate.csv", _meta("simulate", _resolved(args)), header, rows)

    failures = []
    for row in rows:
        n, dev_in, dev_out = row[0], row[5], row[6]
        r = math.sqrt(n / math.pi)
        if not (dev_in < r and dev_out < r):
            failures.append(f"n={n} trial={row[1]}: deviation out of envelope")
        if n >= 10_000 and not (dev_in > 0 and dev_out > 0):
            failures.append(f"n={n} trial={row[1]}: nonpositive deviation")
    for msg in failures:
        print("simulate gate failure:", msg, file=sys.stderr)
    print(f"simulate: {len(rows)} runs -> {out / 'simulate.csv'}")
    return 1 if failures else 0


# -- analyze ---------------------------------------------------------------------


def _r_squared(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def cmd_analyze(args) -> int:
    out: Path = args.out
    snaps = sorted((out / "snapshots").glob("*.idla"))
    if not snaps:
        raise UsageError(f"no snapshots under {out / 'snapshots'}")

    event_rows = []
    by_size: dict[int, list[float]] = {}
    for path in snaps:
        h = read_snapshot(path)
        r = math.sqrt(h.n / math.pi)
        dev = max(r - inner_radius(h), outer_radius(h) - r)
        by_size.setdefault(h.n, []).append(dev)
        for m in args.m_grid:
            for (x, y), j in detect_early(h, m, h.n):
                event_rows.append([h.seed, h.n, "early", x, y, m, j])
        for ell in args.ell_grid:
            for x, y in detect_late(h, ell, h.n):
                event_rows.append([h.seed, h.n, "late", x, y, ell, h.join_at((x, y))])
        for x, y in tentacle_scan(h, h.n, args.b, args.tentacle_m):
            event_rows.append([h.seed, h.n, "tentacle", x, y, args.b, h.join_at((x, y))])

    event_rows.sort(key=lambda row: (row[1], row[0], row[2], row[5], row[3], row[4]))
    _write_csv(
        out / "events.csv",
        _meta("analyze", _resolved(args)),
        ["trial_seed", "n", "kind", "x", "y", "param", "join_index"],
        event_rows,
    )

    sizes = sorted(by_size)
    mean_dev = np.array([float(np.mean(by_size[n])) for n in sizes])
    radii = np.array([math.sqrt(n / math.pi) for n in sizes])
    per_size = [
        {
            "n": n,
            "r": float(r),
            "trials": len(by_size[n]),
            "mean_max_deviation": float(m_),
            "quantiles": {
                q: float(np.quantile(by_size[n], float(q))) for q in ("0.1", "0.5", "0.9")
            },
        }
        for n, r, m_ in zip(sizes, radii, mean_dev)
    ]
    report = {"meta": _meta("analyze", _resolved(args)), "per_size": per_size}
    if len(sizes) >= 2:
        x_log = np.log(radii)
        x_cube = radii ** (1.0 / 3.0)
        slope, intercept, r2_log = _r_squared(x_log, mean_dev)
        slope3, intercept3, r2_cube = _r_squared(x_cube, mean_dev)
        report["fit"] = {
            "log": {
                "slope": slope,
                "intercept": intercept,
                "r_squared": r2_log,
                "residuals": (mean_dev - (slope * x_log + intercept)).tolist(),
            },
            "cuberoot": {
                "slope": slope3,
                "intercept": intercept3,
                "r_squared": r2_cube,
                "residuals": (mean_dev - (slope3 * x_cube + intercept3)).tolist(),
            },
            "log_beats_cuberoot": bool(r2_log >= r2_cube),
        }
    _write_json(out / "analysis.json", report)
    print(f"analyze: {len(snaps)} snapshots -> {out / 'analysis.json'}")
    return 0


# -- kernel ----------------------------------------------------------------------


def _check(name: str, passed: bool, **details) -> dict:
    return {"name": name, "passed": bool(passed), **details}


def cmd_kernel(args) -> int:
    if args.r0 < 32:
        raise UsageError("kernel gates need --r0 >= 32 (the lambda fit ring)")
    table = build_kernel_table(args.r0)
    checks = []

    expected = {
        (0, 0): KernelValue(Fraction(0), Fraction(0)),
        (1, 0): KernelValue(Fraction(1), Fraction(0)),
        (1, 1): KernelValue(Fraction(0), Fraction(4)),
        (2, 0): KernelValue(Fraction(4), Fraction(-8)),
        (2, 2): KernelValue(Fraction(0), Fraction(16, 3)),
    }
    ok = all(table.exact_value(*z) == v for z, v in expected.items())
    checks.append(_check("exact_values_near_origin", ok))

    lap0 = table.laplacian_exact(0, 0)
    checks.append(_check("laplacian_origin_is_one", lap0.p == 1 and lap0.q == 0))

    rng = np.random.Generator(np.random.Philox(key=args.seed))
    pts = set()
    while len(pts) < min(500, (args.r0 - 1) * args.r0 // 2):
        x = int(rng.integers(-(args.r0 - 1), args.r0))
        y = int(rng.integers(-(args.r0 - 1), args.r0))
        if (x, y) != (0, 0):
            pts.add((x, y))
    ok = all(table.laplacian_exact(x, y) == KernelValue(Fraction(0), Fraction(0)) for x, y in pts)
    checks.append(_check("laplacian_zero_off_origin", ok, sampled=len(pts)))

    vals = table._vals
    checks.append(_check("positive_off_origin", bool((vals[0, 1:] > 0).all() and (vals[1:, :] > 0).all())))

    resid = table.asymptotic_residual_max()
    checks.append(
        _check("asymptotic_residual", resid <= args.max_asym_bound, max_r2_residual=resid)
    )

    lo = fit_lambda(table, args.r0 / 2, 3 * args.r0 / 4)
    hi = fit_lambda(table, 3 * args.r0 / 4, float(args.r0))
    drift = abs(lo.value - hi.value)
    checks.append(
        _check(
            "lambda_ring_stability",
            drift <= 1e-4,
            lambda_hat=table.lambda_hat,
            spread=table.lambda_spread,
            ring_drift=drift,
        )
    )

    args.out.mkdir(parents=True, exist_ok=True)
    report = {"meta": _meta("kernel", _resolved(args)), "checks": checks}
    _write_json(args.out / "kernel_report.json", report)
    bad = [c["name"] for c in checks if not c["passed"]]
    for name in bad:
        print("kernel gate failure:", name, file=sys.stderr)
    print(f"kernel: {len(checks) - len(bad)}/{len(checks)} gates pass -> {args.out / 'kernel_report.json'}")
    return 1 if bad else 0


# -- harmonic --------------------------------------------------------------------


def sweep_zetas(radii: list[float], directions: int) -> list[tuple[int, int]]:
    """Lattice targets near each radius, at half-step angles.

    The half-step offset keeps the swept points off the axes and exact
    diagonals, where the strict sign checks degenerate (on the diagonal the
    field vanishes exactly at the first exceptional point instead of being
    negative).
    """
    out = []
    seen = set()
    for rho in radii:
        for j in range(directions):
            theta = (j + 0.5) * 2.0 * math.pi / directions
            z = (round(rho * math.cos(theta)), round(rho * math.sin(theta)))
            if z != (0, 0) and z not in seen:
                seen.add(z)
                out.append(z)
    return out


def harmonic_checks_for_zeta(zeta, table, sandwich: float, mv_coeff: float) -> list[dict]:
    pole = make_pole(zeta)
    rho = pole.rho
    checks = []

    h_at_pole = h_vertex(pole, table, zeta)
    checks.append(_check("pole_value_in_unit_band", 1.0 <= h_at_pole <= 2.0, value=h_at_pole))

    sx, sy = pole.sector_zeta
    inv = pole.map_index
    p1 = apply_inverse_dihedral(inv, (sx + 1, sy))
    p2 = apply_inverse_dihedral(inv, (sx + 1, sy + 1))
    v1 = h_vertex(pole, table, p1)
    v2 = h_vertex(pole, table, p2)
    checks.append(_check("negative_at_exceptional_pair", v1 < 0 and v2 < 0, values=[v1, v2]))

    omega = build_omega(pole, table)
    h = omega.h
    lap = 0.25 * (h[2:, 1:-1] + h[:-2, 1:-1] + h[1:-1, 2:] + h[1:-1, :-2]) - h[1:-1, 1:-1]
    interior = omega.mask[1:-1, 1:-1]
    max_lap = float(np.abs(lap[interior]).max())
    checks.append(_check("grid_harmonic_inside", max_lap < 1e-10, max_abs_laplacian=max_lap))

    r2 = omega.r2_grid()
    inner_gap = rho - math.sqrt(float(r2[~omega.mask].min()))
    outer_gap = math.sqrt(float(r2[omega.mask].max())) - rho
    c2 = max(inner_gap, outer_gap)
    checks.append(
        _check("region_sandwich", c2 <= sandwich, inner_gap=inner_gap, outer_gap=outer_gap)
    )

    mv_ok = True
    mv = {}
    rho2 = zeta[0] ** 2 + zeta[1] ** 2
    for num, den in ((1, 4), (1, 2), (3, 4), (1, 1)):
        s = mean_value_sum(pole, table, Fraction(rho2 * num * num, den * den))
        mv[f"{num}/{den}"] = s
        mv_ok = mv_ok and abs(s) <= mv_coeff * math.log(rho)
    checks.append(_check("mean_value_sums", mv_ok, sums=mv, bound=mv_coeff * math.log(rho)))

    min_inside = float(h[omega.mask].min())
    checks.append(
        _check("minimum_principle", min_inside >= omega.threshold, min_inside=min_inside)
    )
    return checks


def cmd_harmonic(args) -> int:
    zetas = sweep_zetas(args.radii, args.directions)
    rho_max = max(math.hypot(*z) for z in zetas)
    r0 = args.r0 if args.r0 else int(math.ceil(2 * rho_max)) + 8
    table = build_kernel_table(r0)

    results = []
    bad = []
    for zeta in zetas:
        checks = harmonic_checks_for_zeta(zeta, table, args.sandwich, args.mean_value_coeff)
        results.append({"zeta": list(zeta), "checks": checks})
        for c in checks:
            if not c["passed"]:
                bad.append(f"zeta={zeta}: {c['name']}")

    args.out.mkdir(parents=True, exist_ok=True)
    report = {"meta": _meta("harmonic", _resolved(args)), "r0": r0, "zetas": results}
    _write_json(args.out / "harmonic_report.json", report)
    for msg in bad:
        print("harmonic gate failure:", msg, file=sys.stderr)
    print(f"harmonic: {len(zetas)} poles checked -> {args.out / 'harmonic_report.json'}")
    return 1 if bad else 0


# -- martingale ------------------------------------------------------------------


def _trace_worker(task):
    zeta, n, r0, seeds, n_checkpoints = task
    table = build_kernel_table(r0)
    pole = make_pole(zeta)
    omega = build_omega(pole, table)
    cps = checkpoint_indices(n, n_checkpoints)
    m_rows = []
    s_rows = []
    frozen_err = 0.0
    conserved = True
    for seed in seeds:
        tr = martingale_trace(zeta, n, seed, table, omega=omega)
        m_rows.append(tr.m[cps])
        s_rows.append(tr.s[cps])
        if tr.frozen_count:
            expected = omega.threshold - tr.h0
            err = np.abs(tr.delta_m[tr.kinds == 1] - expected).max()
            frozen_err = max(frozen_err, float(err))
        conserved = conserved and (tr.settled_count + tr.frozen_count + tr.pole_count == n)
    return np.array(m_rows), np.array(s_rows), frozen_err, conserved


def checkpoint_indices(n: int, count: int) -> np.ndarray:
    return np.unique(np.maximum(1, (np.arange(1, count + 1) * n) // count))


def martingale_gates(zeta, n, trials, master_seed, r0, n_checkpoints, qv_bound, workers=1):
    """Drift / frozen-value / conservation / clock-growth gates for one pole."""
    seeds = [trial_seed(master_seed, i) for i in range(trials)]
    share = max(1, math.ceil(len(seeds) / workers))
    tasks = [
        (zeta, n, r0, seeds[i : i + share], n_checkpoints) for i in range(0, len(seeds), share)
    ]
    if len(tasks) == 1:
        parts = [_trace_worker(tasks[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_trace_worker, tasks))
    m_all = np.concatenate([p[0] for p in parts])
    s_all = np.concatenate([p[1] for p in parts])
    frozen_err = max(p[2] for p in parts)
    conserved = all(p[3] for p in parts)
    cps = checkpoint_indices(n, n_checkpoints)

    mean = m_all.mean(axis=0)
    se = m_all.std(axis=0, ddof=1) / math.sqrt(m_all.shape[0])
    drift_ok = bool((np.abs(mean) <= 3.0 * se + 1e-15).all())
    s_mean = s_all.mean(axis=0)
    qv_ratio = float((s_mean / np.log(cps + 1.0)).max())

    checks = [
        _check(
            "zero_drift_at_checkpoints",
            drift_ok,
            checkpoints=cps.tolist(),
            mean=mean.tolist(),
            stderr=se.tolist(),
        ),
        _check("frozen_value_identity", frozen_err <= 1e-12, max_error=frozen_err),
        _check("particle_conservation", conserved),
        _check("clock_log_growth", qv_ratio <= qv_bound, max_s_over_log_t=qv_ratio),
    ]
    return checks


def cmd_martingale(args) -> int:
    pole = make_pole(args.zeta)
    n = args.n if args.n else int(math.pi * (pole.rho - 2.0) ** 2)
    r0 = args.r0 if args.r0 else max(32, int(math.ceil(2 * pole.rho)) + 8)
    checks = martingale_gates(
        args.zeta, n, args.trials, args.seed, r0, args.checkpoints, args.qv_bound, _workers(args)
    )
    args.out.mkdir(parents=True, exist_ok=True)
    if args.dump_trace:
        table = build_kernel_table(r0)
        tr = martingale_trace(args.zeta, n, trial_seed(args.seed, 0), table)
        tr.to_csv(args.out / "trace.csv")
    report = {
        "meta": _meta("martingale", _resolved(args)),
        "zeta": list(args.zeta),
        "n": n,
        "checks": checks,
    }
    _write_json(args.out / "martingale_report.json", report)
    bad = [c["name"] for c in checks if not c["passed"]]
    for name in bad:
        print("martingale gate failure:", name, file=sys.stderr)
    print(f"martingale: zeta={args.zeta} n={n} -> {args.out / 'martingale_report.json'}")
    return 1 if bad else 0


# -- tower -----------------------------------------------------------------------


def cmd_tower(args) -> int:
    checks = []
    decomp = tower_decompose(EXAMPLE_SHELL_COUNTS, c_prime=args.c_prime, d=2)
    checks.append(
        _check(
            "worked_example_blocks",
            decomp.beta == (5, 3, 2, 3)
            and decomp.step_sequence() == (5, 5, 5, 5, 5, 3, 3, 3, 2, 2, 3, 3, 3),
            beta=list(decomp.beta),
            steps=list(decomp.step_sequence()),
        )
    )
    checks.append(_check("worked_example_windows", decomp.windows_ok()))
    checks.append(_check("worked_example_energy", tower_energy(decomp) == 91, energy=tower_energy(decomp)))

    e2, _ = min_tower_energy(2)
    checks.append(_check("minimum_energy_m2", e2 == 6, value=e2))

    ratios = {}
    ok = True
    for m in range(args.m_min, args.m_max + 1):
        e, _ = min_tower_energy(m)
        ratio = e * math.log(m) / (m * m)
        ratios[m] = ratio
        ok = ok and ratio >= args.floor
    checks.append(
        _check(
            "energy_floor",
            ok,
            floor=args.floor,
            min_ratio=min(ratios.values()),
            m_range=[args.m_min, args.m_max],
        )
    )

    args.out.mkdir(parents=True, exist_ok=True)
    report = {"meta": _meta("tower", _resolved(args)), "checks": checks}
    _write_json(args.out / "tower_report.json", report)
    bad = [c["name"] for c in checks if not c["passed"]]
    for name in bad:
        print("tower gate failure:", name, file=sys.stderr)
    print(f"tower: {len(checks) - len(bad)}/{len(checks)} gates pass -> {args.out / 'tower_report.json'}")
    return 1 if bad else 0


# -- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="idla-lab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="grow cluster ensembles in parallel")
    _add_common(p)
    p.add_argument("--sizes", type=_int_list, default=[10_000], help="comma-separated particle counts")
    p.add_argument("--trials", type=int, default=4, help="independent runs per size (default 4)")
    p.set_defaults(func=cmd_simulate, _parser=p)

    p = sub.add_parser("analyze", help="event detection and deviation fits over snapshots")
    _add_common(p)
    p.add_argument("--m-grid", type=_float_list, default=[2.0], help="early thresholds")
    p.add_argument("--ell-grid", type=_float_list, default=[2.0], help="late thresholds")
    p.add_argument("--b", type=float, default=0.1, help="tentacle density parameter")
    p.add_argument("--tentacle-m", type=int, default=20, help="tentacle ball radius")
    p.set_defaults(func=cmd_analyze, _parser=p)

    p = sub.add_parser("kernel", help="potential-kernel property gates")
    _add_common(p)
    p.add_argument("--r0", type=int, default=64, help="exact table radius (default 64)")
    p.add_argument("--max-asym-bound", type=float, default=1.0, help="gate on |z|^2 residual")
    p.set_defaults(func=cmd_kernel, _parser=p)

    p = sub.add_parser("harmonic", help="detector-field property gates")
    _add_common(p)
    p.add_argument("--radii", type=_float_list, default=[10.0, 20.0, 50.0], help="pole radii")
    p.add_argument("--directions", type=int, default=16, help="directions per radius")
    p.add_argument("--r0", type=int, default=0, help="table radius override (0 = auto)")
    p.add_argument("--sandwich", type=float, default=5.0, help="region sandwich tolerance")
    p.add_argument("--mean-value-coeff", type=float, default=5.0, help="mean-value bound coefficient")
    p.set_defaults(func=cmd_harmonic, _parser=p)

    p = sub.add_parser("martingale", help="stopped-particle drift and clock gates")
    _add_common(p)
    p.add_argument("--zeta", type=_point, default=(30, 18), help="pole lattice point 'x,y'")
    p.add_argument("--n", type=int, default=0, help="particles per trace (0 = auto)")
    p.add_argument("--trials", type=int, default=200, help="independent traces (default 200)")
    p.add_argument("--r0", type=int, default=0, help="table radius override (0 = auto)")
    p.add_argument("--checkpoints", type=int, default=4, help="drift checkpoints (default 4)")
    p.add_argument("--qv-bound", type=float, default=50.0, help="bound on mean S(t)/log t")
    p.add_argument("--dump-trace", action="store_true", help="write trace.csv for the first seed")
    p.set_defaults(func=cmd_martingale, _parser=p)

    p = sub.add_parser("tower", help="shell/tower decomposition gates")
    _add_common(p)
    p.add_argument("--c-prime", type=float, default=0.5, help="window constant (default 0.5)")
    p.add_argument("--m-min", type=int, default=10)
    p.add_argument("--m-max", type=int, default=40)
    p.add_argument("--floor", type=float, default=0.3, help="lower bound on E log m / m^2")
    p.set_defaults(func=cmd_tower, _parser=p)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args._parser, args, argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SnapshotError as exc:
        print(f"snapshot error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
