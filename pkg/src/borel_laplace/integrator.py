"""Adaptive Borel-Padé-Laplace (BPL) and truncated-series (ANM) time stepping.

Each step expands the solution in a Taylor series at the current state,
sums it (BPL) or truncates it (ANM), and then searches for the largest step
``dt`` over which the relative residue ``||dS/dt - F(t, S)|| < eps ||S||``
holds at ``n_check`` sample points of ``(t0, t0 + dt]``. The end value of the
local solution seeds the next step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import OutOfRange, PoleOnRay, StepUnderflow
from .series import (SeriesProblem, TaylorSeries, evaluate_truncated,
                     evaluate_truncated_derivative, generate_series)
from .summation import BorelSum, borel_sum, default_degrees, gauss_laguerre_rule

__all__ = [
    "BplConfig",
    "StepRecord",
    "Trajectory",
    "bpl_step",
    "bpl_integrate",
    "anm_step",
    "anm_integrate",
    "dense_output",
    "check_fractions",
]

_NORM_FLOOR = 1e-300


@dataclass(frozen=True)
class BplConfig:
    """Order, summation and step-search parameters.

    ``dt_init=None`` means ``1e-3 * T`` when integrating up to ``T``.
    ``residue_norm="componentwise"`` tests every component against its own
    magnitude instead of the Euclidean norm of the state, which matters when
    components differ by many orders of magnitude.
    """

    K: int = 10
    Ka: int = 5
    Kb: int = 4
    N_G: int = 20
    eps: float = 1e-8
    step_growth: float = 2.0
    step_shrink: float = 0.5
    n_check: int = 5
    dt_init: float | None = None
    dt_min: float = 1e-10
    dt_max: float = math.inf
    max_growths: int = 8
    refine: int = 2
    rcond: float = 1e-14
    residue_norm: str = "euclidean"

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.Ka < 0 or self.Kb < 0 or self.Ka + self.Kb != self.K - 1:
            raise ValueError(f"Padé degrees must satisfy Ka + Kb = K - 1, got [{self.Ka}/{self.Kb}] for K={self.K}")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not 0 < self.step_shrink < 1 < self.step_growth:
            raise ValueError("need 0 < step_shrink < 1 < step_growth")
        if self.dt_min <= 0:
            raise ValueError("dt_min must be positive")
        if self.n_check < 1:
            raise ValueError("n_check must be >= 1")
        if self.residue_norm not in ("euclidean", "componentwise"):
            raise ValueError(f"unknown residue_norm {self.residue_norm!r}")

    @classmethod
    def for_order(cls, K: int, **kw) -> "BplConfig":
        """Config with near-diagonal Padé degrees for order ``K``."""
        Ka, Kb = default_degrees(K)
        return cls(K=K, Ka=Ka, Kb=Kb, **kw)


def check_fractions(n: int) -> np.ndarray:
    """Sample fractions of a candidate step, clustered at both ends, last one 1."""
    j = np.arange(1, n + 1)
    return 0.5 * (1 - np.cos(np.pi * j / n))


@dataclass(frozen=True)
class StepRecord:
    t_start: float
    t_end: float
    u_start: np.ndarray
    u_end: np.ndarray
    series: TaylorSeries
    borel: BorelSum | None = None
    fallback: bool = False

    def evaluate(self, t):
        if t == self.t_end:
            return self.u_end.copy()
        if self.borel is not None and not self.fallback:
            return self.borel.evaluate(t, check=False)
        return evaluate_truncated(self.series, t)


@dataclass
class Trajectory:
    records: list = field(default_factory=list)
    residue_evaluations: int = 0
    rejected: int = 0

    @property
    def step_count(self) -> int:
        return len(self.records)

    @property
    def times(self) -> np.ndarray:
        if not self.records:
            return np.empty(0)
        return np.array([self.records[0].t_start] + [r.t_end for r in self.records])

    @property
    def states(self) -> np.ndarray:
        return np.array([self.records[0].u_start] + [r.u_end for r in self.records])

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def mean_step(self) -> float:
        return float(np.mean(self.steps))

    @property
    def fallback_count(self) -> int:
        return sum(r.fallback for r in self.records)

    @property
    def final_state(self) -> np.ndarray:
        return self.records[-1].u_end

    def dense_output(self, t):
        return dense_output(self, t)

    def sample(self, per_step: int = 20):
        """Dense samples: ``per_step`` points per record plus the end point."""
        ts, us = [], []
        for r in self.records:
            for tt in np.linspace(r.t_start, r.t_end, per_step, endpoint=False):
                ts.append(tt)
                us.append(r.evaluate(tt) if tt != r.t_start else r.u_start)
        ts.append(self.records[-1].t_end)
        us.append(self.records[-1].u_end)
        return np.array(ts), np.array(us)


def dense_output(traj: Trajectory, t):
    """Solution at time ``t`` from the record covering it."""
    times = traj.times
    if not len(times) or t < times[0] or t > times[-1]:
        raise OutOfRange(f"t={t} outside [{times[0] if len(times) else None}, {times[-1] if len(times) else None}]")
    i = int(np.searchsorted(times, t, side="left"))
    if i < len(times) and times[i] == t:
        return traj.states[i].copy()
    return traj.records[i - 1].evaluate(t)


def _residue_ok(problem, t0, S, dS, taus, eps, norm="euclidean"):
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(dS))):
        return False
    for tau, s, ds in zip(taus, S, dS):
        r = ds - problem.rhs(t0 + tau, s)
        if norm == "componentwise":
            if not np.all(np.abs(r) < eps * np.maximum(np.abs(s), _NORM_FLOOR)):
                return False
        elif not np.linalg.norm(r) < eps * max(np.linalg.norm(s), _NORM_FLOOR):
            return False
    return True


class _Evaluator:
    """Residue test and end state for one local solution, BPL or ANM."""

    def __init__(self, problem, series, cfg, borel=None):
        self.problem = problem
        self.series = series
        self.borel = borel
        self.cfg = cfg
        self.fracs = check_fractions(cfg.n_check)
        self.evaluations = 0

    def uses_fallback(self, dt):
        if self.borel is None:
            return True
        return dt * self.borel.rule.nodes[-1] >= self.borel.first_ray_pole()

    def check(self, dt):
        """Return the end state if the residue passes at every sample, else ``None``."""
        taus = self.fracs * dt
        t0 = self.series.t0
        self.evaluations += len(taus)
        if self.uses_fallback(dt):
            S = np.array([evaluate_truncated(self.series, t0 + tau) for tau in taus])
            dS = np.array([evaluate_truncated_derivative(self.series, t0 + tau) for tau in taus])
        else:
            S, dS = self.borel.evaluate_many(taus)
        if _residue_ok(self.problem, t0, S, dS, taus, self.cfg.eps, self.cfg.residue_norm):
            return S[-1]
        return None


def _search(ev: _Evaluator, dt_guess, cap, cfg, t0):
    """Largest passing step up to ``cap``; returns ``(dt, end_state, rejections)``.

    The guess is grown or shrunk geometrically until the pass/fail boundary
    is bracketed, then the bracket is narrowed by ``cfg.refine`` geometric
    bisections.
    """
    cap = min(cap, cfg.dt_max)
    dt = min(dt_guess, cap)
    end = ev.check(dt)
    rejected = 0
    if end is not None:
        best, best_end, fail = dt, end, None
        for _ in range(cfg.max_growths):
            if best >= cap:
                break
            trial = min(best * cfg.step_growth, cap)
            end = ev.check(trial)
            if end is None:
                fail = trial
                break
            best, best_end = trial, end
    else:
        fail = dt
        rejected = 1
        while True:
            dt *= cfg.step_shrink
            if dt < cfg.dt_min:
                raise StepUnderflow(
                    f"no step >= dt_min={cfg.dt_min:g} meets eps={cfg.eps:g} at t={t0:.17g}", t=t0)
            end = ev.check(dt)
            if end is not None:
                best, best_end = dt, end
                break
            fail = dt
            rejected += 1
    if fail is not None:
        for _ in range(cfg.refine):
            trial = math.sqrt(best * fail)
            end = ev.check(trial)
            if end is None:
                fail = trial
            else:
                best, best_end = trial, end
    return best, best_end, rejected


def _step(problem, t0, u0, cfg, dt_guess, cap, summed):
    u0 = np.asarray(u0)
    series = generate_series(problem, t0, u0, cfg.K)
    borel = None
    if summed:
        rule = gauss_laguerre_rule(cfg.N_G)
        borel = borel_sum(series, cfg.Ka, cfg.Kb, rule, rcond=cfg.rcond)
    ev = _Evaluator(problem, series, cfg, borel)
    dt, end, rejected = _search(ev, dt_guess, cap, cfg, t0)
    fallback = summed and ev.uses_fallback(dt)
    t_end = t0 + dt if dt < cap else t0 + cap
    rec = StepRecord(t0, t_end, u0, end, series, borel, fallback)
    return rec, ev.evaluations, rejected


def bpl_step(problem: SeriesProblem, t0, u0, cfg: BplConfig, dt_guess, cap=math.inf):
    """One BPL step; returns ``(record, u(t_end))``.

    If the Padé continuation of some component has a pole on the part of
    the positive real axis used by the quadrature, the step is evaluated
    with the truncated series instead and flagged with ``fallback``.
    """
    rec, _, _ = _step(problem, t0, u0, cfg, dt_guess, cap, summed=True)
    return rec, rec.u_end


def anm_step(problem: SeriesProblem, t0, u0, cfg: BplConfig, dt_guess, cap=math.inf):
    rec, _, _ = _step(problem, t0, u0, cfg, dt_guess, cap, summed=False)
    return rec, rec.u_end


def _integrate(problem, u0, T, cfg, summed):
    if not T > 0:
        raise ValueError("T must be positive")
    traj = Trajectory()
    t = 0.0
    u = np.atleast_1d(np.asarray(u0))
    dt = cfg.dt_init if cfg.dt_init is not None else 1e-3 * T
    dt = max(dt, cfg.dt_min)
    while t < T:
        try:
            rec, nres, nrej = _step(problem, t, u, cfg, dt, T - t, summed)
        except StepUnderflow as exc:
            exc.t = t
            raise
        traj.records.append(rec)
        traj.residue_evaluations += nres
        traj.rejected += nrej
        dt = (rec.t_end - rec.t_start) * cfg.step_growth
        t, u = rec.t_end, rec.u_end
    return traj


def bpl_integrate(problem: SeriesProblem, u0, T: float, cfg: BplConfig = BplConfig()) -> Trajectory:
    """Chain BPL steps from ``t = 0`` to exactly ``T``."""
    return _integrate(problem, u0, T, cfg, summed=True)


def anm_integrate(problem: SeriesProblem, u0, T: float, cfg: BplConfig = BplConfig()) -> Trajectory:
    """Like :func:`bpl_integrate` but stepping with the truncated series."""
    return _integrate(problem, u0, T, cfg, summed=False)
