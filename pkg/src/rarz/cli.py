"""Command-line driver: ``rarz <command> --config <path|name>``.

Each command writes its profiles or fields into ``--out`` together with a
``metrics.txt`` file of ``key = value`` lines, which is also echoed to
stdout.  Exit status is 0 on success, 2 for configuration errors and 3 for
numerical failures.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .config import COMMANDS, SCHEMES, ConfigError, ExperimentConfig, QuadrantSpec, load_config, override
from .micro import CollisionError, MicroParams, integrate, w_drift
from .model import DomainError, PrimitiveState, fd_curve, fd_density_samples, make_closure
from .riemann import exact_profile, solve
from .scheme1d import NumericalFailure, SchemeConfig, UnsupportedConfiguration, riemann_data, run_1d
from .solver2d import (
    Config2D,
    quadrants,
    run_2d,
    structure_metrics,
    write_field,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


@dataclass
class Result:
    files: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)


# -- output helpers ---------------------------------------------------------

def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _meta(config: ExperimentConfig, **extra):
    p = config.params
    meta = {"command": config.command, "name": config.name or "-", "rho_star": p.rho_star,
            "u_star": p.u_star, "gamma": p.gamma, "v_star": p.v_star,
            "resolution": config.scheme.resolution, "t_end": config.t_end, "scheme": config.scheme.name}
    meta.update(extra)
    return meta


def write_csv(path: Path, columns: dict, meta: dict):
    """CSV with ``# key = value`` metadata lines, a header row and full-precision values."""
    data = np.column_stack([np.asarray(v, dtype=float) for v in columns.values()])
    with open(path, "w") as fh:
        for k, v in meta.items():
            fh.write(f"# {k} = {_fmt(v)}\n")
        fh.write(",".join(columns) + "\n")
        np.savetxt(fh, data, delimiter=",", fmt="%.17g")
    return path


def read_csv(path):
    """Inverse of :func:`write_csv`: ``(meta, {column: array})``."""
    meta, header, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].partition("=")
                meta[k.strip()] = v.strip()
            elif header is None:
                header = line.strip().split(",")
            elif line.strip():
                rows.append([float(t) for t in line.split(",")])
    arr = np.array(rows).reshape(-1, len(header))
    return meta, {h: arr[:, i] for i, h in enumerate(header)}


def write_metrics(path: Path, metrics: dict):
    with open(path, "w") as fh:
        for k, v in metrics.items():
            fh.write(f"{k} = {_fmt(v)}\n")
    return path


def read_metrics(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            if "=" in line:
                k, _, v = line.partition("=")
                out[k.strip()] = v.strip()
    return out


# -- 1D helpers -------------------------------------------------------------

def _states(config):
    s = config.initial
    return PrimitiveState(s.rho_left, s.u_left), PrimitiveState(s.rho_right, s.u_right)


def _run_1d_metrics(config, model, scheme, out, prefix=""):
    L, R = _states(config)
    s = config.initial
    closure = make_closure(model, config.params)
    sc = SchemeConfig(scheme, config.scheme.cfl, config.t_end, config.params, model, config.scheme.boundary)
    extremes = {"rho_min": np.inf, "rho_max": -np.inf, "u_min": np.inf, "u_max": -np.inf}

    def track(grid):
        W = grid.primitive()
        extremes["rho_min"] = min(extremes["rho_min"], float(np.min(W.rho)))
        extremes["rho_max"] = max(extremes["rho_max"], float(np.max(W.rho)))
        extremes["u_min"] = min(extremes["u_min"], float(np.min(W.u)))
        extremes["u_max"] = max(extremes["u_max"], float(np.max(W.u)))

    initial = riemann_data((L.rho, L.u), (R.rho, R.u), s.x_split, s.x_min, s.x_max)
    n = config.scheme.resolution
    try:
        run = run_1d(initial, sc, n, config.snapshots, callback=track)
    except (NumericalFailure, UnsupportedConfiguration) as exc:
        raise NumericalFailure(f"{model}/{scheme}: {exc}", getattr(exc, "index", None)) from None
    if run.steps == 0:
        track(run.grid)
    snap = run.final
    fan = solve(L, R, closure)
    exact = exact_profile(fan, snap.x, snap.t, s.x_split)
    dx = run.grid.dx
    tag = f"{model}_{scheme}"
    files = []
    for sn in run.snapshots:
        suffix = "" if sn is snap else f"_t{sn.t:g}"
        files.append(write_csv(out / f"sim1d_{tag}{suffix}.csv", {"x": sn.x, "rho": sn.rho, "u": sn.u},
                               _meta(config, model=model, scheme=scheme, t=sn.t)))
    files.append(write_csv(out / f"exact_{model}.csv", {"x": snap.x, "rho": exact.rho, "u": exact.u},
                           _meta(config, model=model, scheme="exact", t=snap.t)))
    left_of_contact = fan.middle.rho if fan.middle.rho > 0 else L.rho
    m = {
        "steps": run.steps,
        "pattern": fan.pattern.value,
        "l1_rho": diag.l1_error(snap.rho, exact.rho, dx),
        "l1_u": diag.l1_error(snap.u, exact.u, dx),
        "contact_width": diag.transition_width(snap.rho, left_of_contact, R.rho, x=snap.x,
                                               window=diag.contact_window(fan, snap.t, s.x_split,
                                                                          s.x_min, s.x_max)),
        "mass_defect": run.mass_defect,
        **extremes,
    }
    return files, {f"{prefix}{k}": v for k, v in m.items()}


# -- commands ---------------------------------------------------------------

def cmd_fd(config: ExperimentConfig, out: Path) -> Result:
    """One ``rho,u,q`` file per (model, w, gamma)."""
    res = Result()
    fd = config.fd
    for g in fd.gamma:
        params = dataclasses.replace(config.params, gamma=g)
        rho = fd_density_samples(params, fd.samples, fd.margin)
        for model in fd.models:
            for w in fd.w:
                series = fd_curve(model, w, rho, params)
                name = f"fd_{model}_w{w:g}_gamma{g:g}.csv"
                res.files.append(write_csv(out / name, {"rho": series.rho, "u": series.u, "q": series.q},
                                           _meta(config, model=model, w=w, gamma=g)))
                key = f"{model}.w{w:g}.gamma{g:g}"
                res.metrics[f"{key}.u_min"] = float(series.u.min())
                res.metrics[f"{key}.u_last"] = float(series.u[-1])
                res.metrics[f"{key}.q_max"] = float(series.q.max())
    res.metrics["files"] = len(res.files)
    return res


def cmd_riemann(config: ExperimentConfig, out: Path) -> Result:
    """Exact solution sampled at cell centres at ``t_end``."""
    res = Result()
    L, R = _states(config)
    s = config.initial
    n = config.scheme.resolution
    x = s.x_min + (np.arange(n) + 0.5) * (s.x_max - s.x_min) / n
    for model in config.scheme.models:
        fan = solve(L, R, make_closure(model, config.params))
        W = exact_profile(fan, x, config.t_end, s.x_split)
        res.files.append(write_csv(out / f"riemann_{model}.csv", {"x": x, "rho": W.rho, "u": W.u},
                                   _meta(config, model=model, scheme="exact")))
        res.metrics[f"{model}.pattern"] = fan.pattern.value
        res.metrics[f"{model}.rho_mid"] = fan.middle.rho
        res.metrics[f"{model}.u_mid"] = fan.middle.u
        if fan.shock_speed is not None:
            res.metrics[f"{model}.shock_speed"] = fan.shock_speed
        if fan.fan_edges is not None:
            res.metrics[f"{model}.fan_left"], res.metrics[f"{model}.fan_right"] = fan.fan_edges
        res.metrics[f"{model}.contact_speed"] = fan.contact_speed
    return res


def cmd_sim1d(config: ExperimentConfig, out: Path) -> Result:
    res = Result()
    for model in config.scheme.models:
        files, m = _run_1d_metrics(config, model, config.scheme.name, out, f"{model}.")
        res.files += files
        res.metrics.update(m)
    return res


def _quadrants(spec: QuadrantSpec):
    return quadrants(spec.q1, spec.q2, spec.q3, spec.q4, x_split=spec.x_split, y_split=spec.y_split,
                     x_min=spec.x_min, x_max=spec.x_max, y_min=spec.y_min, y_max=spec.y_max)


def _run_2d_metrics(config, kind, out, prefix=""):
    Q = _quadrants(config.initial)
    p = config.params
    cfg = Config2D(kind, config.scheme.cfl, config.t_end, p, config.scheme.boundary)
    extremes = {"rho_min": np.inf, "rho_max": -np.inf, "u_min": np.inf, "u_max": -np.inf,
                "v_min": np.inf, "v_max": -np.inf}

    def track(grid):
        W = grid.primitive()
        for name, a in (("rho", W.rho), ("u", W.u), ("v", W.v)):
            extremes[f"{name}_min"] = min(extremes[f"{name}_min"], float(np.min(a)))
            extremes[f"{name}_max"] = max(extremes[f"{name}_max"], float(np.max(a)))

    n = config.scheme.resolution
    try:
        run = run_2d(Q, cfg, n, n, config.snapshots, callback=track)
    except NumericalFailure as exc:
        raise NumericalFailure(f"{kind}: {exc}", exc.index) from None
    if run.steps == 0:
        track(run.grid)
    files = []
    for fld in run.snapshots:
        suffix = "" if fld is run.final else f"_t{fld.t:g}"
        for name in ("rho", "u", "v"):
            path = out / f"sim2d_{kind}{suffix}_{name}.field"
            write_field(path, fld, getattr(fld, name))
            files.append(path)
    fld = run.final
    m = {"steps": run.steps, **extremes}
    st = structure_metrics(fld, Q, p)
    for name, width in st["widths"].items():
        m[f"width[{name}]"] = width
    for k, v in diag.pattern_counts(st["patterns"]).items():
        m[f"exact_{k}"] = v
    for k in "SRJ":
        m[f"waves_{k}_expected"] = st["expected"][k]
        m[f"waves_{k}_found"] = st["found"][k]
    return files, {f"{prefix}{k}": v for k, v in m.items()}


def cmd_sim2d(config: ExperimentConfig, out: Path) -> Result:
    files, m = _run_2d_metrics(config, config.scheme.name, out)
    return Result(files, m)


def cmd_micro(config: ExperimentConfig, out: Path) -> Result:
    pl = config.platoon
    p = config.params
    mp = MicroParams(p.gamma, p.u_star, p.v_star, pl.d, pl.dx_len, pl.dy_len, pl.d_x, pl.d_y)
    arrays = (pl.x, pl.y, pl.u, pl.v) if pl.is_2d else (pl.x, pl.u)
    traj = integrate(tuple(np.array(a) for a in arrays), mp, pl.dt, pl.steps, pl.store_every)
    nt, nv = traj.x.shape
    cols = {"t": np.repeat(traj.t, nv), "vehicle": np.tile(np.arange(nv), nt),
            "x": traj.x.ravel(), "u": traj.u.ravel()}
    if traj.is_2d:
        cols["y"] = traj.y.ravel()
        cols["v"] = traj.v.ravel()
    meta = _meta(config, dt=pl.dt, steps=pl.steps, store_every=pl.store_every, d=pl.d)
    path = write_csv(out / "micro_trajectory.csv", cols, meta)
    drift = w_drift(traj, mp)
    m = {"vehicles": nv, "steps": pl.steps, "dt": pl.dt,
         "w_drift_max": float(drift.w.max()), "w_drift_rel_max": float(drift.w_rel.max())}
    if drift.sigma is not None:
        m["sigma_drift_max"] = float(drift.sigma.max())
        m["sigma_drift_rel_max"] = float(drift.sigma_rel.max())
    return Result([path], m)


def cmd_compare(config: ExperimentConfig, out: Path) -> Result:
    """Godunov vs hybrid in 1D, HLL vs hybrid in 2D, on identical data."""
    res = Result()
    if config.is_2d:
        for kind in ("hll", "hybrid"):
            files, m = _run_2d_metrics(config, kind, out, f"{kind}.")
            res.files += files
            res.metrics.update(m)
        return res
    model = config.scheme.models[0]
    for scheme in ("godunov", "hybrid"):
        files, m = _run_1d_metrics(config, model, scheme, out, f"{scheme}.")
        res.files += files
        res.metrics.update(m)
    return res


COMMAND_FUNCS = {"fd": cmd_fd, "riemann": cmd_riemann, "sim1d": cmd_sim1d, "sim2d": cmd_sim2d,
                 "micro": cmd_micro, "compare": cmd_compare}


def run_experiment(config: ExperimentConfig, out) -> Result:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    res = COMMAND_FUNCS[config.command](config, out)
    res.files.append(write_metrics(out / "metrics.txt", res.metrics))
    return res


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rarz", description="RARZ traffic-flow experiments.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="TOML file or bundled experiment name")
    ap.add_argument("--out", default="out", help="output directory (default: ./out)")
    ap.add_argument("--resolution", type=int, help="override the number of cells per direction")
    ap.add_argument("--scheme", choices=SCHEMES, help="override the numerical scheme")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = override(load_config(args.config), args.command, args.scheme, args.resolution)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        res = run_experiment(config, args.out)
    except (NumericalFailure, CollisionError, DomainError, UnsupportedConfiguration) as exc:
        print(f"numerical failure in {config.command} ({config.name or args.config}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for k, v in res.metrics.items():
        print(f"{k} = {_fmt(v)}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
