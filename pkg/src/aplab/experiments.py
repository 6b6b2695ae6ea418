"""Config-driven experiment runner producing CSV artifacts with manifests.

Each experiment kind reproduces one family of result data: full-field runs,
point traces, eps sweeps, convergence tables, condition-number sweeps,
stability scans, and amplification-factor checks. Outputs are CSV files
with a fixed 17-significant-digit float format (byte-deterministic), a JSON
manifest with content checksums, and a gnuplot script that references the
CSVs but is never executed here.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
import time as _time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .aligned import AlignedModel, exact_aligned, ic_two_mode, limit_aligned
from .aligned_schemes import (AlignedScheme, AlignedSchemeConfig, run_aligned)
from .analysis import (ConvergenceTable, ErrorPair, cond_family_aligned,
                       cond_family_rotating, cond_sweep, error_eta,
                       error_gamma, fit_loglog_slope, measure_xi, xi_imex)
from .grid import make_grid2d
from .linalg import ConvergenceError, SingularMatrixError
from .rotating import RotatingModel, circle_average, ic_gaussian
from .rotating_schemes import RotatingScheme, RotatingSchemeConfig, run_rotating

__all__ = ["ExperimentConfig", "EXPERIMENT_KINDS", "default_params",
           "load_configs", "run_experiment"]


# ---------------------------------------------------------------------------
# initial conditions addressable from config files


def ic_one_d(x, y):
    """x-independent profile for the 1d sub-case (a = 0)."""
    return (np.cos(2.0 * y) + 1.0) + 0.0 * x


def ic_y_cosine(x, y):
    return (np.cos(y) + 1.0) + 0.0 * x


def ic_x_sine(x, y):
    return np.sin(x) + 0.0 * y


def ic_unit(x, y):
    return 1.0 + 0.0 * x + 0.0 * y


INITIAL_CONDITIONS = {
    "two-mode": ic_two_mode,
    "one-d": ic_one_d,
    "y-cos": ic_y_cosine,
    "x-sine": ic_x_sine,
    "gaussian": ic_gaussian,
    "constant": ic_unit,
}


# ---------------------------------------------------------------------------
# defaults per experiment kind

_ALIGNED_BASE = {
    "x_min": 0.0, "x_max": 2.0 * np.pi, "y_min": 0.0, "y_max": 2.0 * np.pi,
    "nx": 201, "ny": 201, "t_end": 1.0, "nt": 101,
    "a": 0.1, "b": 1.0, "ic": "two-mode",
}

_ROTATING_BASE = {
    "x_min": -3.0, "x_max": 3.0, "y_min": -3.0, "y_max": 3.0,
    "nx": 160, "ny": 160, "t_end": 1.0, "nt": 65,
    "gamma": 0.91, "ic": "gaussian",
}

_DEFAULTS = {
    "aligned-run": dict(_ALIGNED_BASE, schemes=["imex"], eps_list=[1.0]),
    "rotating-run": dict(_ROTATING_BASE, schemes=["imp"], eps_list=[1.0]),
    "point-trace": dict(_ALIGNED_BASE, nx=3, ny=201, t_end=10.0, nt=501,
                        a=0.0, ic="one-d",
                        schemes=["imex", "fourier", "micro-macro", "lagrange"],
                        eps_list=[1.0, 0.1, 0.01], point=[0, 0]),
    "eps-sweep": dict(_ALIGNED_BASE,
                      schemes=["imex", "fourier", "micro-macro", "lagrange"],
                      eps_list=[1.0, 0.1, 0.01, 0.001, 0.0001]),
    "convergence": dict(vary="dx", n_list=[101, 201, 401, 801],
                        schemes=["imex", "micro-macro", "lagrange"],
                        eps=1.0, b=1.0),
    "cond-sweep": {"toy": 1, "ny": 64, "beta": 10.0,
                   "rot_n": 40, "rot_dt": 1.0 / 63.0, "gamma": 0.91,
                   "eps_list": [10.0 ** e for e in
                                (-6.0, -5.5, -5.0, -4.5, -4.0, -3.5, -3.0, -2.5, -2.0)]},
    "stability-scan": {"n": 64, "eps": 1.0,
                       "alpha_list": [0.8, 0.9, 0.95, 1.0, 1.05, 1.1, 1.2]},
    "amplification-check": {"n": 64, "alpha": 0.5, "dt": 0.01,
                            "eps_list": [1.0, 0.001],
                            "schemes": ["imex", "lagrange"],
                            "modes": [0, 1, 3, 7, 15, 31]},
}

EXPERIMENT_KINDS = tuple(sorted(_DEFAULTS))


def default_params(kind: str) -> dict:
    if kind not in _DEFAULTS:
        raise ValueError(f"unknown experiment kind '{kind}'")
    return json.loads(json.dumps(_DEFAULTS[kind]))


class ExperimentConfig:
    """One validated experiment: kind, merged parameters, output directory."""

    def __init__(self, kind: str, params: dict, name: str | None = None):
        if kind not in _DEFAULTS:
            raise ValueError(f"unknown experiment kind '{kind}'")
        defaults = _DEFAULTS[kind]
        merged = dict(defaults)
        for key, value in params.items():
            if key not in defaults:
                raise ValueError(f"unknown key '{key}' for kind '{kind}'")
            base = defaults[key]
            if isinstance(base, bool) or isinstance(value, bool):
                raise ValueError(f"key '{key}': booleans are not used")
            if isinstance(base, (int, float)) and not isinstance(value, (int, float)):
                raise ValueError(f"key '{key}': expected a number")
            if isinstance(base, str) and not isinstance(value, str):
                raise ValueError(f"key '{key}': expected a string")
            if isinstance(base, list) and not isinstance(value, list):
                raise ValueError(f"key '{key}': expected a list")
            merged[key] = value
        self.kind = kind
        self.params = merged
        self.name = name or kind
        self._check()

    def _check(self) -> None:
        p = self.params
        for key in ("nx", "ny", "nt", "n", "rot_n"):
            if key in p and (int(p[key]) != p[key] or p[key] < 3):
                raise ValueError(f"key '{key}': must be an integer >= 3")
        for key in ("t_end", "dt", "rot_dt", "beta", "b"):
            if key in p and not (float(p[key]) > 0.0):
                raise ValueError(f"key '{key}': must be > 0")
        if "ic" in p and p["ic"] not in INITIAL_CONDITIONS:
            raise ValueError(f"key 'ic': unknown initial condition '{p['ic']}'")
        if "schemes" in p and not p["schemes"]:
            raise ValueError("key 'schemes': must not be empty")
        if "eps_list" in p:
            if not p["eps_list"] or any(not (e >= 0.0) for e in p["eps_list"]):
                raise ValueError("key 'eps_list': entries must be >= 0")
        if "vary" in p and p["vary"] not in ("dx", "dy", "dt"):
            raise ValueError(f"key 'vary': must be dx, dy or dt, got '{p['vary']}'")
        if "toy" in p and p["toy"] not in (1, 2):
            raise ValueError(f"key 'toy': must be 1 or 2, got {p['toy']}")
        if self.kind == "point-trace":
            point = p["point"]
            if len(point) != 2 or any(int(c) != c or c < 0 for c in point):
                raise ValueError("key 'point': expected two node indices >= 0")
            if point[0] >= p["nx"] - 1 or point[1] >= p["ny"] - 1:
                raise ValueError("key 'point': indices outside the stored nodes")


def load_configs(config_path: str) -> list:
    """Parse a JSON config file into a list of validated experiments."""
    text = Path(config_path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {config_path} is not valid JSON: {exc}") from exc
    entries = raw if isinstance(raw, list) else [raw]
    configs = []
    for idx, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ValueError(f"config entry {idx}: expected an object")
        entry = dict(entry)
        kind = entry.pop("kind", None)
        if kind is None:
            raise ValueError(f"config entry {idx}: missing key 'kind'")
        name = entry.pop("name", None)
        if len(entries) > 1 and name is None:
            name = f"{kind}-{idx}"
        configs.append(ExperimentConfig(kind, entry, name))
    return configs


# ---------------------------------------------------------------------------
# deterministic writers


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return f"{float(value):.16e}"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _field_rows(field):
    full = field.full_values()
    g = field.grid
    xs = g.x_min + g.dx * np.arange(g.nx)
    ys = g.y_min + g.dy * np.arange(g.ny)
    for i in range(g.nx):
        for j in range(g.ny):
            yield (xs[i], ys[j], full[i, j])


def _write_field(path: Path, field) -> None:
    _write_csv(path, ["x", "y", "value"], _field_rows(field))


def _write_diagnostics(path: Path, records) -> None:
    _write_csv(path, ["step", "t", "mass", "residual_norm", "iterations"],
               ((r.step, r.t, r.mass, r.residual_norm, r.iterations)
                for r in records))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _eps_tag(eps: float) -> str:
    return f"{eps:.0e}".replace("+", "").replace("-", "m")


def _gnuplot(path: Path, lines) -> None:
    path.write_text("set datafile separator \",\"\nset key outside\n"
                    + "\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# experiment kinds


def _aligned_config(p: dict, scheme: str, eps: float,
                    nx=None, ny=None, nt=None, a=None, ic=None):
    grid = make_grid2d(p["x_min"], p["x_max"], p["y_min"], p["y_max"],
                       int(nx or p["nx"]), int(ny or p["ny"]))
    model = AlignedModel(a=p["a"] if a is None else a, b=p["b"],
                         eps=eps, f_in=INITIAL_CONDITIONS[ic or p["ic"]])
    dt = p["t_end"] / (int(nt or p["nt"]) - 1)
    return AlignedSchemeConfig(model, grid, dt, AlignedScheme(scheme))


def _run_aligned_run(cfg: ExperimentConfig, out: Path) -> list:
    p = cfg.params
    files = []
    error_rows = []
    for scheme in p["schemes"]:
        for eps in p["eps_list"]:
            scfg = _aligned_config(p, scheme, eps)
            n_steps = int(p["nt"]) - 1
            result = run_aligned(scfg, n_steps)
            tag = f"{scheme}_eps{_eps_tag(eps)}"
            for idx, (t, fld) in enumerate(result.snapshots):
                path = out / f"field_{tag}_snap{idx}.csv"
                _write_field(path, fld)
                files.append(path)
            path = out / f"diagnostics_{tag}.csv"
            _write_diagnostics(path, result.diagnostics)
            files.append(path)
            t_end, final = result.snapshots[-1]
            if eps > 0.0:
                eta = error_eta(final, exact_aligned(scfg.model, t_end, scfg.grid))
            else:
                eta = float("nan")
            gamma = error_gamma(final, limit_aligned(scfg.model, t_end, scfg.grid))
            error_rows.append((scheme, eps, t_end, eta, gamma))
    path = out / "errors.csv"
    _write_csv(path, ["scheme", "eps", "t", "eta", "gamma"], error_rows)
    files.append(path)
    gp = out / "plot.gp"
    _gnuplot(gp, [f"splot \"{f.name}\" every ::1 using 1:2:3 with points palette"
                  for f in files if f.name.startswith("field_")][:4])
    files.append(gp)
    return files


def _run_rotating_run(cfg: ExperimentConfig, out: Path) -> list:
    p = cfg.params
    files = []
    summary = []
    for scheme in p["schemes"]:
        for eps in p["eps_list"]:
            grid = make_grid2d(p["x_min"], p["x_max"], p["y_min"], p["y_max"],
                               int(p["nx"]), int(p["ny"]))
            model = RotatingModel(eps, INITIAL_CONDITIONS[p["ic"]])
            dt = p["t_end"] / (int(p["nt"]) - 1)
            scfg = RotatingSchemeConfig(model, grid, dt, gamma=p["gamma"],
                                        scheme=RotatingScheme(scheme))
            result = run_rotating(scfg, int(p["nt"]) - 1)
            tag = f"{scheme}_eps{_eps_tag(eps)}"
            for idx, (t, fld) in enumerate(result.snapshots):
                path = out / f"field_{tag}_snap{idx}.csv"
                _write_field(path, fld)
                files.append(path)
            path = out / f"diagnostics_{tag}.csv"
            _write_diagnostics(path, result.diagnostics)
            files.append(path)
            t_end, final = result.snapshots[-1]
            # cut along the column nearest x = 0, as in the reference plots
            i_cut = int(np.argmin(np.abs(grid.x_nodes())))
            ys = grid.y_nodes()
            path = out / f"cut_{tag}.csv"
            _write_csv(path, ["y", "value"],
                       ((ys[j], final.values[i_cut, j]) for j in range(grid.ny - 1)))
            files.append(path)
            radius = min(1.0, 0.5 * min(grid.lx, grid.ly) / 2.0)
            summary.append((scheme, eps, t_end, float(final.values.max()),
                            circle_average(final, radius)))
    path = out / "summary.csv"
    _write_csv(path, ["scheme", "eps", "t", "peak", "circle_avg"], summary)
    files.append(path)
    gp = out / "plot.gp"
    _gnuplot(gp, [f"plot \"{f.name}\" skip 1 using 1:2 with lines title \"{f.stem}\""
                  for f in files if f.name.startswith("cut_")])
    files.append(gp)
    return files


def _run_point_trace(cfg: ExperimentConfig, out: Path) -> list:
    p = cfg.params
    i_pt, j_pt = int(p["point"][0]), int(p["point"][1])
    n_steps = int(p["nt"]) - 1
    dt = p["t_end"] / n_steps
    files = []
    for scheme in p["schemes"]:
        for eps in p["eps_list"]:
            scfg = _aligned_config(p, scheme, eps)
            times = [n * dt for n in range(n_steps + 1)]
            result = run_aligned(scfg, n_steps, snapshot_times=times)
            tag = f"{scheme}_eps{_eps_tag(eps)}"
            path = out / f"trace_{tag}.csv"
            _write_csv(path, ["t", "value"],
                       ((t, fld.values[i_pt, j_pt]) for t, fld in result.snapshots))
            files.append(path)
    gp = out / "plot.gp"
    _gnuplot(gp, [f"plot \"{f.name}\" skip 1 using 1:2 with lines title \"{f.stem}\""
                  for f in files])
    files.append(gp)
    return files


def _run_eps_sweep(cfg: ExperimentConfig, out: Path) -> list:
    p = cfg.params
    n_steps = int(p["nt"]) - 1
    files = []
    for scheme in p["schemes"]:
        rows = []
        for eps in p["eps_list"]:
            scfg = _aligned_config(p, scheme, eps)
            result = run_aligned(scfg, n_steps)
            t_end, final = result.snapshots[-1]
            eta = error_eta(final, exact_aligned(scfg.model, t_end, scfg.grid))
            gamma = error_gamma(final, limit_aligned(scfg.model, t_end, scfg.grid))
            pair = ErrorPair(eta, gamma, t_end, eps)
            rows.append((pair.eps, pair.t, pair.eta, pair.gamma))
        path = out / f"errors_{scheme}.csv"
        _write_csv(path, ["eps", "t", "eta", "gamma"], rows)
        files.append(path)
    gp = out / "plot.gp"
    _gnuplot(gp, ["set logscale x"]
             + [f"plot \"{f.name}\" skip 1 using 1:3 with linespoints title \"eta\", "
                f"\"{f.name}\" skip 1 using 1:4 with linespoints title \"gamma\""
                for f in files])
    files.append(gp)
    return files


_SWEEP_SETUPS = {
    # direction-isolating designs: the varied step's error dominates
    "dx": {"a": 1.0, "ic": "x-sine", "ny": 8, "nt": 3201, "t_end": 1.0},
    "dy": {"a": 0.0, "ic": "one-d", "nx": 3, "nt": 3201, "t_end": 1.0},
    "dt": {"a": 0.0, "ic": "y-cos", "nx": 3, "ny": 8001, "t_end": 4.0},
}
_FOURIER_DY_NT = 401


def _run_convergence(cfg: ExperimentConfig, out: Path) -> list:
    p = cfg.params
    vary = p["vary"]
    setup = dict(_SWEEP_SETUPS[vary])
    base = dict(_ALIGNED_BASE, b=p["b"], **setup)
    files = []
    slope_rows = []
    for scheme in p["schemes"]:
        rows = []
        for n in p["n_list"]:
            n = int(n)
            kw = {}
            if vary == "dx":
                kw["nx"] = n
            elif vary == "dy":
                kw["ny"] = n
                if scheme == "fourier":
                    kw["nt"] = _FOURIER_DY_NT
            else:
                kw["nt"] = n
            scfg = _aligned_config(base, scheme, p["eps"], **kw)
            n_steps = int(kw.get("nt", base["nt"])) - 1
            result = run_aligned(scfg, n_steps)
            t_end, final = result.snapshots[-1]
            eta = error_eta(final, exact_aligned(scfg.model, t_end, scfg.grid))
            step = {"dx": scfg.grid.dx, "dy": scfg.grid.dy, "dt": scfg.dt}[vary]
            rows.append((step, eta))
        path = out / f"errors_{vary}_{scheme}.csv"
        _write_csv(path, [vary, "eta"], rows)
        files.append(path)
        steps = np.array([r[0] for r in rows])
        errs = np.array([r[1] for r in rows])
        order = np.argsort(steps)[::-1]
        if scheme == "fourier":
            # spectral in y: the error is step-independent, no slope to fit
            flatness = float(errs.max() / errs.min() - 1.0)
            slope_rows.append((scheme, float("nan"), flatness))
        else:
            table = ConvergenceTable(steps[order], errs[order])
            fit_loglog_slope(table)
            slope_rows.append((scheme, table.fitted_slope,
                               float(errs.max() / errs.min() - 1.0)))
    path = out / "slopes.csv"
    _write_csv(path, ["scheme", "slope", "spread"], slope_rows)
    files.append(path)
    gp = out / "plot.gp"
    _gnuplot(gp, ["set logscale xy"]
             + [f"plot \"{f.name}\" skip 1 using 1:2 with linespoints title \"{f.stem}\""
                for f in files if f.name.startswith("errors_")])
    files.append(gp)
    return files


def _run_cond_sweep(cfg: ExperimentConfig, out: Path) -> list:
    p = cfg.params
    eps_list = sorted(p["eps_list"], reverse=True)
    families = []
    if p["toy"] == 1:
        m = int(p["ny"]) - 1
        for scheme in (AlignedScheme.IMEX, AlignedScheme.MICRO_MACRO,
                       AlignedScheme.LAGRANGE):
            families.append((scheme.value, cond_family_aligned(scheme, m, p["beta"])))
    else:
        grid = make_grid2d(-3.0, 3.0, -3.0, 3.0, int(p["rot_n"]), int(p["rot_n"]))
        for scheme in (RotatingScheme.IMP, RotatingScheme.LAGRANGE):
            families.append((scheme.value,
                             cond_family_rotating(scheme, grid, p["rot_dt"], p["gamma"])))
    files = []
    slope_rows = []
    for label, family in families:
        table = cond_sweep(family, eps_list)
        path = out / f"cond_{label}.csv"
        _write_csv(path, ["eps", "cond2"], table)
        files.append(path)
        vals = np.array([v for _, v in table])
        if np.all(np.isfinite(vals)):
            ct = ConvergenceTable(np.array(eps_list), vals)
            fit_loglog_slope(ct)
            slope_rows.append((label, ct.fitted_slope,
                               float(vals.max() / vals.min() - 1.0)))
        else:
            slope_rows.append((label, float("nan"), float("nan")))
    path = out / "slopes.csv"
    _write_csv(path, ["scheme", "slope", "spread"], slope_rows)
    files.append(path)
    gp = out / "plot.gp"
    _gnuplot(gp, ["set logscale xy"]
             + [f"plot \"{f.name}\" skip 1 using 1:2 with linespoints title \"{f.stem}\""
                for f in files if f.name.startswith("cond_")])
    files.append(gp)
    return files


def _run_stability_scan(cfg: ExperimentConfig, out: Path) -> list:
    p = cfg.params
    n = int(p["n"])
    grid = make_grid2d(0.0, 2.0 * np.pi, 0.0, 2.0 * np.pi, n, n)
    rows = []
    for alpha in p["alpha_list"]:
        # a = 1 fixed; dt = alpha * dx sets the advective ratio exactly
        dt = float(alpha) * grid.dx
        model = AlignedModel(a=1.0, b=1.0, eps=p["eps"], f_in=ic_unit)
        scfg = AlignedSchemeConfig(model, grid, dt, AlignedScheme.IMEX)
        worst = max(measure_xi(AlignedScheme.IMEX, scfg, k, 0)
                    for k in range(0, (grid.nx + 1) // 2))
        rows.append((float(alpha), worst))
    path = out / "stability.csv"
    _write_csv(path, ["alpha", "max_xi"], rows)
    gp = out / "plot.gp"
    _gnuplot(gp, [f"plot \"stability.csv\" skip 1 using 1:2 with linespoints, 1.0"])
    return [path, gp]


def _run_amplification_check(cfg: ExperimentConfig, out: Path) -> list:
    p = cfg.params
    n = int(p["n"])
    grid = make_grid2d(0.0, 2.0 * np.pi, 0.0, 2.0 * np.pi, n, n)
    dt = float(p["dt"])
    a = float(p["alpha"]) * grid.dx / dt
    rows = []
    for eps in p["eps_list"]:
        model = AlignedModel(a=a, b=1.0, eps=eps, f_in=ic_unit)
        scfg = AlignedSchemeConfig(model, grid, dt, AlignedScheme.IMEX)
        for scheme in p["schemes"]:
            for k in p["modes"]:
                for l in p["modes"]:
                    measured = measure_xi(AlignedScheme(scheme), scfg, int(k), int(l))
                    formula = xi_imex(scfg.alpha, scfg.beta, eps, int(k), int(l),
                                      grid.dx, grid.dy)
                    rows.append((scheme, eps, int(k), int(l), measured, formula,
                                 abs(measured - formula)))
    path = out / "amplification.csv"
    _write_csv(path, ["scheme", "eps", "k", "l", "measured", "formula", "abs_diff"],
               rows)
    gp = out / "plot.gp"
    _gnuplot(gp, ["plot \"amplification.csv\" skip 1 using 5:6 with points"])
    return [path, gp]


_RUNNERS = {
    "aligned-run": _run_aligned_run,
    "rotating-run": _run_rotating_run,
    "point-trace": _run_point_trace,
    "eps-sweep": _run_eps_sweep,
    "convergence": _run_convergence,
    "cond-sweep": _run_cond_sweep,
    "stability-scan": _run_stability_scan,
    "amplification-check": _run_amplification_check,
}


def _execute_one(task) -> tuple:
    kind, params, name, out_base = task
    cfg = ExperimentConfig(kind, params, name)
    out = Path(out_base) / name
    out.mkdir(parents=True, exist_ok=True)
    t0 = _time.perf_counter()
    files = _RUNNERS[kind](cfg, out)
    manifest = {
        "config": {"kind": kind, "name": name, **params},
        "outputs": [{"path": f.name, "sha256": _sha256(f)} for f in files],
        "wall_time_s": _time.perf_counter() - t0,
        "version": __version__,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return name, [str(f) for f in files]


def run_experiment(config_path: str, out_dir: str | None = None,
                   workers: int = 1) -> int:
    """Run every experiment in a config file; returns the process exit code.

    0 on success, 1 for config errors (the message names the offending key),
    2 for numerical failures inside an experiment.
    """
    try:
        configs = load_configs(config_path)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    out_base = Path(out_dir) if out_dir else Path(config_path).resolve().parent
    tasks = [(c.kind, c.params, c.name, str(out_base)) for c in configs]
    try:
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_execute_one, tasks))
        else:
            results = [_execute_one(t) for t in tasks]
    except (SingularMatrixError, ConvergenceError, FloatingPointError,
            ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    for name, files in results:
        print(f"{name}: {len(files)} files")
    return 0
