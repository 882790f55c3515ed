"""Scenario runner and parameter sweeps over the benchmark problems.

A scenario is a flat set of ``key=value`` settings (see :class:`Scenario`).
:func:`run_scenario` integrates one problem with one scheme, computes the
problem's error metric and optionally writes a trajectory CSV and a
one-row metrics CSV. :func:`sweep` runs the cartesian product of every
setting given as a comma-separated list.
"""

from __future__ import annotations

import csv
import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .errors import BorelLaplaceError, DomainError, RunFailure, ValidationError
from .integrator import BplConfig, anm_integrate, bpl_integrate
from .problems import (NON_STIFF_LV, Dahlquist, KdV, KdvParams, LotkaVolterra,
                       kdv_error_metric, kdv_exact, lv_first_integral, lv_params_for_ratio)
from .reference import (AdaptiveConfig, bdf4_integrate, etdrk4_integrate,
                        gauss_legendre10_integrate, rk4_fehlberg_integrate)
from .summation import default_degrees

__all__ = [
    "SCHEMES",
    "PROBLEMS",
    "Scenario",
    "RunMetrics",
    "parse_config",
    "read_config",
    "run_scenario",
    "sweep",
    "write_trajectory_csv",
    "write_metrics_csv",
]

SCHEMES = ("bpl", "anm", "rk4", "gau", "bdf", "etd")
PROBLEMS = ("dahlquist", "lotka", "kdv")

_REFERENCE = {
    "rk4": rk4_fehlberg_integrate,
    "gau": gauss_legendre10_integrate,
    "bdf": bdf4_integrate,
    "etd": etdrk4_integrate,
}

_DEFAULT_T = {"dahlquist": 10.0, "lotka": 1000.0}


@dataclass(frozen=True)
class Scenario:
    """One benchmark run.

    ``tol`` is the residue tolerance for ``bpl``/``anm`` and the local error
    tolerance for the reference schemes. ``r=None`` selects the non-stiff
    Lotka-Volterra rates. For KdV the horizon is ``periods`` temporal
    periods unless ``T`` is given.
    """

    problem: str = "lotka"
    scheme: str = "bpl"
    tol: float = 1e-8
    T: float | None = None
    periods: float = 1.0
    K: int = 10
    Ka: int | None = None
    Kb: int | None = None
    NG: int = 20
    residue_norm: str = "euclidean"
    fixed_step: float | None = None
    lam: float = -1.0
    u0: float = 1.0
    r: float | None = None
    D: int = 64
    samples_per_step: int = 20
    time_samples: int = 201
    out: str | None = None

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValidationError(f"unknown problem {self.problem!r}; choose from {', '.join(PROBLEMS)}")
        if self.scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if not self.tol > 0:
            raise ValidationError("tolerance must be positive")
        if self.T is not None and not self.T > 0:
            raise ValidationError("T must be positive")
        if not self.periods > 0:
            raise ValidationError("periods must be positive")
        if self.samples_per_step < 1 or self.time_samples < 2:
            raise ValidationError("sampling densities must be positive")
        if self.problem == "kdv" and (self.D < 2 or self.D % 2):
            raise ValidationError("D must be a positive even integer")
        if self.r is not None and not self.r > 0:
            raise ValidationError("r must be positive")
        if self.scheme in ("bpl", "anm"):
            try:
                BplConfig(K=self.K, Ka=self.degrees[0], Kb=self.degrees[1], N_G=self.NG,
                          eps=self.tol, residue_norm=self.residue_norm)
            except ValueError as exc:
                raise ValidationError(str(exc)) from None
            if not 1 <= self.NG <= 200:
                raise ValidationError("NG must be in 1..200")

    @property
    def degrees(self):
        """Padé degrees; by default near-diagonal with the extra degree on the numerator."""
        if self.Ka is not None and self.Kb is not None:
            return self.Ka, self.Kb
        Kb, Ka = default_degrees(self.K)
        return Ka, Kb

    @property
    def horizon(self) -> float:
        if self.T is not None:
            return float(self.T)
        if self.problem == "kdv":
            return self.periods * KdvParams.from_size(self.D).period
        return _DEFAULT_T[self.problem]

    def label(self) -> str:
        return f"{self.problem}/{self.scheme} tol={self.tol:g}"


@dataclass
class RunMetrics:
    scheme: str
    problem: str
    mean_error: float = math.nan
    mean_step: float = math.nan
    step_count: int = 0
    wall_time: float = math.nan
    tolerance_used: float = math.nan
    status: str = "ok"
    message: str = ""
    params: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


# -- configuration files ---------------------------------------------------

_FIELD_TYPES = {f.name: f.type for f in fields(Scenario)}
_ALIASES = {"eps": "tol", "N_G": "NG", "ng": "NG", "schemes": "scheme"}


def _convert(key, text):
    kind = _FIELD_TYPES[key]
    text = text.strip()
    if text.lower() in ("none", "") and "None" in kind:
        return None
    try:
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
    except ValueError:
        raise ValidationError(f"bad value {text!r} for {key}") from None
    return text


def parse_config(items) -> dict:
    """Parse ``key=value`` strings into a dict of lists of typed values.

    Blank lines and ``#`` comments are skipped. A comma-separated value
    gives a sweep axis; a single value gives a one-element list.
    """
    out = {}
    for raw in items:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in _FIELD_TYPES:
            raise ValidationError(f"unknown setting {key!r}")
        parts = [p for p in (s.strip() for s in value.split(",")) if p] if value.strip() else []
        out[key] = [_convert(key, p) for p in parts]
    return out


def read_config(path) -> dict:
    with open(path) as f:
        return parse_config(f)


# -- single runs -----------------------------------------------------------

def _build(sc: Scenario):
    """Problem, initial state and an error metric ``(trajectory sampler) -> float``."""
    if sc.problem == "dahlquist":
        problem = Dahlquist(sc.lam)
        u0 = np.array([sc.u0], dtype=float)

        def metric(ts, us):
            exact = sc.u0 * np.exp(sc.lam * ts)
            rel = np.abs(us[:, 0] - exact) / np.maximum(np.abs(exact), 1e-300)
            return float(np.trapezoid(rel, ts) / (ts[-1] - ts[0]))

        return problem, u0, metric
    if sc.problem == "lotka":
        params = NON_STIFF_LV if sc.r is None else lv_params_for_ratio(sc.r)
        problem = LotkaVolterra(params)
        u0 = np.array([2.0, 1.0])
        I0 = lv_first_integral(params, u0[0], u0[1])

        def metric(ts, us):
            I = lv_first_integral(params, us[:, 0], us[:, 1])
            return float(np.trapezoid(np.abs(I - I0), ts) / (ts[-1] - ts[0]))

        return problem, u0, metric
    params = KdvParams.from_size(sc.D)
    problem = KdV(params)
    return problem, problem.initial_modes(), None


def _integrate(sc: Scenario, problem, u0, T):
    if sc.scheme in ("bpl", "anm"):
        Ka, Kb = sc.degrees
        cfg = BplConfig(K=sc.K, Ka=Ka, Kb=Kb, N_G=sc.NG, eps=sc.tol, residue_norm=sc.residue_norm)
        run = bpl_integrate if sc.scheme == "bpl" else anm_integrate
        return run(problem, u0, T, cfg)
    cfg = AdaptiveConfig(tol=sc.tol, fixed_step=sc.fixed_step,
                         dt_init=min(1e-3, T) if sc.fixed_step is None else sc.fixed_step)
    return _REFERENCE[sc.scheme](problem, u0, T, cfg)


def _samples(sc: Scenario, result):
    """Output samples: dense per step for the series schemes, step ends otherwise."""
    if sc.scheme in ("bpl", "anm"):
        return result.sample(sc.samples_per_step)
    return np.asarray(result.times), np.asarray(result.states)


def write_trajectory_csv(path, ts, values) -> None:
    """Rows ``t, component_0, ...`` with 17 significant digits."""
    values = np.asarray(values)
    if np.iscomplexobj(values):
        raise ValueError("trajectory values must be real")
    header = ",".join(["t"] + [f"component_{j}" for j in range(values.shape[1])])
    np.savetxt(path, np.column_stack([ts, values]), fmt="%.17g", delimiter=",",
               header=header, comments="")


_METRIC_COLUMNS = ["scheme", "problem", "status", "mean_error", "mean_step", "step_count",
                   "wall_time", "tolerance_used", "message"]


def write_metrics_csv(path, rows) -> None:
    extra = []
    for m in rows:
        extra += [k for k in m.params if k not in extra and k not in _METRIC_COLUMNS]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["index"] + extra + _METRIC_COLUMNS)
        for i, m in enumerate(rows):
            d = asdict(m)
            vals = [m.params.get(k, "") for k in extra]
            vals += [repr(d[c]) if isinstance(d[c], float) else d[c] for c in _METRIC_COLUMNS]
            w.writerow([i] + vals)


def run_scenario(sc: Scenario, params: dict | None = None, raise_errors: bool = True) -> RunMetrics:
    """Run one scenario and write its CSV files when ``sc.out`` is set.

    ``sc.out`` is a directory receiving ``trajectory.csv`` and
    ``metrics.csv``. Solver failures are re-raised with the scenario label
    prepended, or recorded as a ``failed`` row when ``raise_errors`` is off.
    """
    metrics = RunMetrics(sc.scheme, sc.problem, tolerance_used=sc.tol, params=dict(params or {}))
    T = sc.horizon
    problem, u0, metric = _build(sc)
    start = time.perf_counter()
    try:
        result = _integrate(sc, problem, u0, T)
        metrics.wall_time = time.perf_counter() - start
        metrics.step_count = result.step_count
        metrics.mean_step = result.mean_step
        if sc.problem == "kdv":
            ts = np.linspace(0.0, T, sc.time_samples)
            x = problem.grid()
            computed = np.array([problem.to_physical(result.dense_output(t)) for t in ts])
            exact = np.array([kdv_exact(problem.params, x, t) for t in ts])
            metrics.mean_error = kdv_error_metric(ts, computed, exact)
            out_t, out_u = ts, computed
        else:
            out_t, out_u = _samples(sc, result)
            if not np.all(np.isfinite(out_u)):
                raise BorelLaplaceError("solution is not finite")
            metrics.mean_error = metric(out_t, out_u)
    except (BorelLaplaceError, DomainError, FloatingPointError) as exc:
        metrics.wall_time = time.perf_counter() - start
        metrics.status = "failed"
        metrics.message = f"{type(exc).__name__}: {exc}"
        if raise_errors:
            raise RunFailure(f"[{sc.label()}] {metrics.message}") from exc
        out_t = None
    if sc.out is not None:
        os.makedirs(sc.out, exist_ok=True)
        if out_t is not None:
            write_trajectory_csv(os.path.join(sc.out, "trajectory.csv"), out_t, out_u)
        write_metrics_csv(os.path.join(sc.out, "metrics.csv"), [metrics])
    return metrics


# -- sweeps ----------------------------------------------------------------

def _points(settings: dict):
    if "scheme" in settings and not settings["scheme"]:
        raise ValidationError("scheme list is empty")
    for key, values in settings.items():
        if not values and _FIELD_TYPES[key] != "str | None":
            raise ValidationError(f"setting {key!r} has no values")
    axes = {k: v for k, v in settings.items() if len(v) > 1}
    fixed = {k: v[0] for k, v in settings.items() if len(v) == 1}
    names = list(axes)
    points = []
    for combo in itertools.product(*(axes[k] for k in names)):
        swept = dict(zip(names, combo))
        points.append((Scenario(**fixed, **swept), swept))
    return points


def sweep(settings: dict, out: str | None = None, workers: int = 1) -> list:
    """Run every point of the cartesian product of the list-valued settings.

    ``settings`` maps :class:`Scenario` fields to lists of values, as
    returned by :func:`parse_config`. All points are validated before any
    run. Solver failures become ``failed`` rows. With ``out`` the metrics
    table goes to ``out/metrics.csv`` and each point writes its trajectory
    to ``out/point_<index>/``.
    """
    settings = dict(settings)
    settings.pop("out", None)
    points = _points(settings)
    if not points:
        raise ValidationError("sweep has no points")
    if out is not None:
        points = [(replace(sc, out=os.path.join(out, f"point_{i:03d}")), p)
                  for i, (sc, p) in enumerate(points)]

    def run(point):
        sc, swept = point
        return run_scenario(sc, swept, raise_errors=False)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(run, points))
    else:
        rows = [run(p) for p in points]
    if out is not None:
        write_metrics_csv(os.path.join(out, "metrics.csv"), rows)
    return rows
