"""Reference integrators used as baselines.

* ``rk4``: Runge-Kutta-Fehlberg 4(5), advancing with the 4th order solution.
* ``gau``: 5-stage, 10th order Gauss-Legendre collocation.
* ``bdf``: 4-step backward differentiation formula, bootstrapped with RKF45.
* ``etd``: Cox-Matthews ETDRK4 for problems with a diagonal linear part.

All run adaptively on a tolerance ``tol`` for the local error estimate,
measured as ``max_i |e_i| / max(1, |u_i|)``, or with a fixed step when
``AdaptiveConfig.fixed_step`` is set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NewtonDivergence, StepUnderflow
from .series import SeriesProblem

__all__ = [
    "AdaptiveConfig",
    "StepperResult",
    "rk4_fehlberg_integrate",
    "gauss_legendre10_integrate",
    "bdf4_integrate",
    "etdrk4_integrate",
    "gauss_legendre_tableau",
    "finite_difference_jacobian",
    "etd_coefficients",
]


@dataclass(frozen=True)
class AdaptiveConfig:
    tol: float = 1e-8
    dt_init: float = 1e-3
    dt_min: float = 1e-12
    dt_max: float = math.inf
    safety: float = 0.9
    newton_tol: float = 1e-12
    newton_max_iters: int = 20
    fixed_step: float | None = None

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if not self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError("need dt_min <= dt_init <= dt_max")


@dataclass
class StepperResult:
    """Step endpoints of a reference run.

    ``bootstrap_steps`` counts BDF history intervals produced by the
    one-step starter; ``substeps`` counts the starter's own internal steps,
    which are not part of ``step_count``.
    """

    scheme: str
    problem: SeriesProblem
    times: np.ndarray
    states: np.ndarray
    error_estimates: np.ndarray
    rejected: int = 0
    bootstrap_steps: int = 0
    substeps: int = 0
    _derivs: np.ndarray | None = field(default=None, repr=False)

    @property
    def step_count(self) -> int:
        return len(self.times) - 1

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def mean_step(self) -> float:
        return float(np.mean(self.steps))

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def dense_output(self, t):
        """Cubic Hermite interpolation between step endpoints."""
        if self._derivs is None:
            self._derivs = np.array([self.problem.rhs(tt, u) for tt, u in zip(self.times, self.states)])
        i = int(np.clip(np.searchsorted(self.times, t) - 1, 0, len(self.times) - 2))
        t0, t1 = self.times[i], self.times[i + 1]
        h = t1 - t0
        s = (t - t0) / h
        h00 = 2 * s ** 3 - 3 * s ** 2 + 1
        h10 = s ** 3 - 2 * s ** 2 + s
        h01 = -2 * s ** 3 + 3 * s ** 2
        h11 = s ** 3 - s ** 2
        return (h00 * self.states[i] + h10 * h * self._derivs[i]
                + h01 * self.states[i + 1] + h11 * h * self._derivs[i + 1])


def _scaled_error(e, u_old, u_new):
    scale = np.maximum(1.0, np.maximum(np.abs(u_old), np.abs(u_new)))
    return float(np.max(np.abs(e) / scale))


def finite_difference_jacobian(f, t, u, f0=None):
    """Forward-difference Jacobian with increments ``sqrt(eps) (1 + |u_j|)``."""
    u = np.asarray(u)
    f0 = f(t, u) if f0 is None else f0
    n = len(u)
    J = np.empty((n, n), dtype=np.result_type(u, f0))
    h = np.sqrt(np.finfo(float).eps) * (1 + np.abs(u))
    for j in range(n):
        du = u.copy()
        du[j] = du[j] + h[j]
        J[:, j] = (f(t, du) - f0) / h[j]
    return J


# -- generic one-step driver ----------------------------------------------

class _NewtonFailure(Exception):
    pass


def _drive_one_step(name, problem, u0, T, cfg, advance, order):
    """Adaptive loop for a one-step ``advance(t, u, h) -> (u_new, err_vec)``."""
    t = 0.0
    u = np.atleast_1d(np.asarray(u0)).astype(np.result_type(np.asarray(u0), getattr(problem, "dtype", float), float))
    times, states, errs = [t], [u], []
    rejected = 0
    if cfg.fixed_step is not None:
        n = max(1, int(round(T / cfg.fixed_step)))
        h = T / n
        for i in range(n):
            u, e = advance(t, u, h)
            t = (i + 1) * h
            times.append(t)
            states.append(u)
            errs.append(_scaled_error(e, states[-2], u))
        return StepperResult(name, problem, np.array(times), np.array(states), np.array(errs))

    h = min(cfg.dt_init, cfg.dt_max)
    while t < T:
        h = min(h, T - t)
        last_t = h >= T - t
        try:
            u_new, e = advance(t, u, h)
            err = _scaled_error(e, u, u_new) if np.all(np.isfinite(u_new)) else math.inf
            newton_failed = False
        except _NewtonFailure:
            err, newton_failed = math.inf, True
        if err <= cfg.tol:
            t = T if last_t else t + h
            u = u_new
            times.append(t)
            states.append(u)
            errs.append(err)
            fac = 5.0 if err == 0 else min(5.0, cfg.safety * (cfg.tol / err) ** (1 / (order + 1)))
            h = min(max(h * fac, cfg.dt_min), cfg.dt_max)
        else:
            rejected += 1
            fac = 0.5 if not np.isfinite(err) else max(0.2, cfg.safety * (cfg.tol / err) ** (1 / (order + 1)))
            h *= fac
            if h < cfg.dt_min:
                if newton_failed:
                    raise NewtonDivergence(f"{name}: stage equations unsolvable at t={t:.17g}", t=t)
                raise StepUnderflow(f"{name}: step fell below dt_min at t={t:.17g}", t=t)
    return StepperResult(name, problem, np.array(times), np.array(states), np.array(errs), rejected)


# -- RK4 Fehlberg -----------------------------------------------------------

_F_A = [
    [],
    [1 / 4],
    [3 / 32, 9 / 32],
    [1932 / 2197, -7200 / 2197, 7296 / 2197],
    [439 / 216, -8, 3680 / 513, -845 / 4104],
    [-8 / 27, 2, -3544 / 2565, 1859 / 4104, -11 / 40],
]
_F_C = [0, 1 / 4, 3 / 8, 12 / 13, 1, 1 / 2]
_F_B4 = np.array([25 / 216, 0, 1408 / 2565, 2197 / 4104, -1 / 5, 0])
_F_B5 = np.array([16 / 135, 0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55])


def _rkf45_step(f, t, u, h):
    k = []
    for i in range(6):
        ui = u
        for j, a in enumerate(_F_A[i]):
            ui = ui + h * a * k[j]
        k.append(f(t + _F_C[i] * h, ui))
    k = np.array(k)
    u4 = u + h * np.tensordot(_F_B4, k, axes=1)
    e = h * np.tensordot(_F_B5 - _F_B4, k, axes=1)
    return u4, e


def rk4_fehlberg_integrate(problem, u0, T, cfg: AdaptiveConfig = AdaptiveConfig()) -> StepperResult:
    """Embedded Fehlberg 4(5) pair, propagating the 4th order solution."""
    return _drive_one_step("rk4", problem, u0, T, cfg,
                           lambda t, u, h: _rkf45_step(problem.rhs, t, u, h), order=4)


# -- Gauss-Legendre ---------------------------------------------------------

def gauss_legendre_tableau(s: int = 5):
    """Butcher tableau ``(A, b, c)`` of the ``s``-stage Gauss collocation method."""
    x, _ = np.polynomial.legendre.leggauss(s)
    c = (x + 1) / 2
    A = np.empty((s, s))
    b = np.empty(s)
    P = np.polynomial.Polynomial
    for j in range(s):
        others = np.delete(c, j)
        lj = P.fromroots(others) / np.prod(c[j] - others)
        Lj = lj.integ()
        b[j] = Lj(1.0) - Lj(0.0)
        A[:, j] = Lj(c) - Lj(0.0)
    return A, b, c


_GL_A, _GL_B, _GL_C = gauss_legendre_tableau(5)


def _gauss_step(problem, t, u, h, cfg):
    f = problem.rhs
    s = len(_GL_C)
    f0 = f(t, u)
    Z = np.outer(_GL_C * h, f0)
    scale = 1 + np.linalg.norm(u)

    def stage_f(Z):
        return np.array([f(t + _GL_C[i] * h, u + Z[i]) for i in range(s)])

    F = stage_f(Z)
    converged = False
    prev = math.inf
    for _ in range(10):
        Znew = h * _GL_A @ F
        delta = np.linalg.norm(Znew - Z)
        Z = Znew
        if not np.all(np.isfinite(Z)) or delta > prev:
            break
        prev = delta
        F = stage_f(Z)
        if delta <= cfg.newton_tol * scale:
            converged = True
            break
    if not converged:
        Z = np.outer(_GL_C * h, f0)
        J = finite_difference_jacobian(f, t, u, f0)
        n = len(u)
        M = np.eye(s * n) - h * np.kron(_GL_A, J)
        lu = _lu_factor(M)
        prev = math.inf
        for _ in range(cfg.newton_max_iters):
            F = stage_f(Z)
            G = Z - h * _GL_A @ F
            dZ = _lu_solve(lu, -G.reshape(-1)).reshape(s, n)
            Z = Z + dZ
            nd = np.linalg.norm(dZ)
            if not np.all(np.isfinite(Z)) or (nd > 2 * prev and nd > cfg.newton_tol * scale):
                raise _NewtonFailure
            prev = nd
            if nd <= cfg.newton_tol * scale:
                converged = True
                break
        if not converged:
            raise _NewtonFailure
        F = stage_f(Z)
    return u + h * _GL_B @ F


def _lu_factor(M):
    import scipy.linalg
    return scipy.linalg.lu_factor(M)


def _lu_solve(lu, r):
    import scipy.linalg
    return scipy.linalg.lu_solve(lu, r)


def _doubling(step, order):
    """Step doubling: two half steps are kept, their gap gives the error."""
    def advance(t, u, h):
        full = step(t, u, h)
        half = step(t, u, h / 2)
        two = step(t + h / 2, half, h / 2)
        return two, (two - full) / (2 ** order - 1)
    return advance


def gauss_legendre10_integrate(problem, u0, T, cfg: AdaptiveConfig = AdaptiveConfig()) -> StepperResult:
    """5-stage Gauss collocation; fixed-point stages with a Newton fallback."""
    step = lambda t, u, h: _gauss_step(problem, t, u, h, cfg)
    if cfg.fixed_step is not None:
        advance = lambda t, u, h: (step(t, u, h), np.zeros_like(u))
    else:
        advance = _doubling(step, 10)
    return _drive_one_step("gau", problem, u0, T, cfg, advance, order=10)


# -- ETDRK4 -----------------------------------------------------------------

def _phi_series(z, k, terms=30):
    out = np.zeros_like(z)
    for j in range(terms - 1, -1, -1):
        out = out * z + 1 / math.factorial(j + k)
    return out


def _phi(z, k, cutoff=1.0):
    """``phi_k(z) = sum_j z^j / (j + k)!`` elementwise, series near zero."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < cutoff
    out = np.empty_like(z)
    out[small] = _phi_series(z[small], k)
    zb = z[~small]
    direct = np.exp(zb)
    for j in range(k):
        direct = direct - zb ** j / math.factorial(j)
    out[~small] = direct / zb ** k
    return out


def etd_coefficients(L, h):
    """Cox-Matthews ETDRK4 weights for a diagonal linear part ``L``.

    Returns ``(E, E2, Q, f1, f2, f3)`` with the step size folded in.
    """
    z = np.asarray(L, dtype=complex) * h
    E = np.exp(z)
    E2 = np.exp(z / 2)
    Q = h / 2 * _phi(z / 2, 1)
    p1, p2, p3 = _phi(z, 1), _phi(z, 2), _phi(z, 3)
    f1 = h * (p1 - 3 * p2 + 4 * p3)
    f2 = h * (p2 - 2 * p3)
    f3 = h * (-p2 + 4 * p3)
    return E, E2, Q, f1, f2, f3


def _etd_step_factory(problem):
    L = problem.linear_part()
    if L is None:
        raise ValueError("ETDRK4 needs a problem with a diagonal linear part")
    L = np.asarray(L)
    real = not np.iscomplexobj(L) and getattr(problem, "dtype", float) is not complex
    cache = {}
    N = problem.nonlinear

    def step(t, u, h):
        co = cache.get(h)
        if co is None:
            co = etd_coefficients(L, h)
            if len(cache) > 64:
                cache.clear()
            cache[h] = co
        E, E2, Q, f1, f2, f3 = co
        Nu = N(t, u)
        a = E2 * u + Q * Nu
        Na = N(t + h / 2, a)
        b = E2 * u + Q * Na
        Nb = N(t + h / 2, b)
        c = E2 * a + Q * (2 * Nb - Nu)
        Nc = N(t + h, c)
        out = E * u + f1 * Nu + 2 * f2 * (Na + Nb) + f3 * Nc
        return out.real if real and not np.iscomplexobj(u) else out

    return step


def etdrk4_integrate(problem, u0, T, cfg: AdaptiveConfig = AdaptiveConfig()) -> StepperResult:
    """ETDRK4 on ``u' = L u + N(t, u)`` with diagonal ``L``; step doubling for error."""
    step = _etd_step_factory(problem)
    if cfg.fixed_step is not None:
        advance = lambda t, u, h: (step(t, u, h), np.zeros_like(u))
    else:
        advance = _doubling(step, 4)
    return _drive_one_step("etd", problem, u0, T, cfg, advance, order=4)


# -- BDF4 -------------------------------------------------------------------

# weights of u_{n-1} - u_n, u_{n-2} - u_n, u_{n-3} - u_n; difference form keeps
# a constant history exactly constant
_BDF4_DIFF = np.array([-3.0, 4 / 3, -1 / 4])
_BDF4_LEAD = 25 / 12
_EXTRAP_DIFF = np.array([-6.0, 4.0, -1.0])


def _history_terms(hist):
    """``(u_n, R, pred - u_n)`` for the last four history states."""
    un = hist[-1]
    diffs = np.array([hist[-2] - un, hist[-3] - un, hist[-4] - un])
    return un, _BDF4_DIFF @ diffs, _EXTRAP_DIFF @ diffs


def _rk_bootstrap(problem, t, u, h, tol):
    """Advance exactly ``h`` with adaptive RKF45 substeps; returns ``(u, substeps)``."""
    f = problem.rhs
    end = t + h
    sub = h
    n = 0
    while t < end:
        sub = min(sub, end - t)
        u_new, e = _rkf45_step(f, t, u, sub)
        err = _scaled_error(e, u, u_new) if np.all(np.isfinite(u_new)) else math.inf
        if err <= tol:
            t = end if sub >= end - t else t + sub
            u = u_new
            n += 1
            fac = 5.0 if err == 0 else min(5.0, 0.9 * (tol / err) ** 0.2)
            sub *= fac
        else:
            sub *= 0.5 if not np.isfinite(err) else max(0.2, 0.9 * (tol / err) ** 0.2)
            if sub < 1e-14 * max(1.0, abs(t)):
                raise StepUnderflow(f"bdf: starter step underflow at t={t:.17g}", t=t)
    return u, n


def _bdf4_solve(problem, t_new, hist, h, cfg):
    """Newton solve of ``25/12 d - h f(u_n + d) = R`` for ``d = y - u_n``.

    Returns ``(y, d - (pred - u_n))``, the latter being the corrector to
    predictor gap.
    """
    f = problem.rhs
    un, R, dpred = _history_terms(hist)
    d = dpred
    fy = f(t_new, un + d)
    J = finite_difference_jacobian(f, t_new, un + d, fy)
    n = len(un)
    lu = _lu_factor(_BDF4_LEAD * np.eye(n) - h * J)
    scale = 1 + np.linalg.norm(un + d)
    prev = math.inf
    for _ in range(cfg.newton_max_iters):
        G = _BDF4_LEAD * d - h * fy - R
        dd = _lu_solve(lu, -G)
        d = d + dd
        nd = np.linalg.norm(dd)
        if not np.all(np.isfinite(d)) or (nd > 2 * prev and nd > cfg.newton_tol * scale):
            raise _NewtonFailure
        prev = nd
        fy = f(t_new, un + d)
        if nd <= cfg.newton_tol * scale:
            return un + d, d - dpred
    raise _NewtonFailure


def bdf4_integrate(problem, u0, T, cfg: AdaptiveConfig = AdaptiveConfig()) -> StepperResult:
    """4-step BDF on a locally uniform mesh.

    The history is (re)built with three RKF45-bootstrapped intervals of the
    current step size. The local error is estimated by the gap between the
    corrector and the cubic extrapolation of the history; a step change
    (rejection, or a possible growth by at least 2) restarts the history.
    """
    u = np.atleast_1d(np.asarray(u0)).astype(np.result_type(np.asarray(u0), getattr(problem, "dtype", float), float))
    t = 0.0
    times, states, errs = [t], [u], []
    hist = [u]
    rejected = boots = subs = 0
    fixed = cfg.fixed_step is not None
    if fixed:
        n_steps = max(1, int(round(T / cfg.fixed_step)))
        h = T / n_steps
    else:
        h = min(cfg.dt_init, cfg.dt_max)
    boot_tol = cfg.tol if not fixed else 1e-14

    hist_h = h
    while t < T - 1e-14 * max(1.0, T):
        if not fixed:
            h = min(h, T - t)
        if len(hist) == 1:
            hist_h = h
        elif h != hist_h:
            hist = [hist[-1]]
            hist_h = h
        if len(hist) < 4:
            u_new, n_sub = _rk_bootstrap(problem, t, hist[-1], h, boot_tol)
            subs += n_sub
            boots += 1
            t = t + h
            hist.append(u_new)
            times.append(t)
            states.append(u_new)
            errs.append(0.0)
            continue
        t_new = t + h
        try:
            y, gap = _bdf4_solve(problem, t_new, hist, h, cfg)
            err = _scaled_error(gap, hist[-1], y)
            newton_failed = False
        except _NewtonFailure:
            err, newton_failed = math.inf, True
        if fixed:
            if newton_failed:
                raise NewtonDivergence(f"bdf: Newton failed at t={t:.17g}", t=t)
            t = t_new
            hist = hist[-3:] + [y]
            times.append(t)
            states.append(y)
            errs.append(err)
            continue
        if err <= cfg.tol:
            t = t_new
            hist = hist[-3:] + [y]
            times.append(t)
            states.append(y)
            errs.append(err)
            fac = math.inf if err == 0 else cfg.safety * (cfg.tol / err) ** 0.25
            if fac >= 2 and h < cfg.dt_max:
                h = min(h * min(fac, 4.0), cfg.dt_max)
                hist = [y]
        else:
            rejected += 1
            fac = 0.5 if newton_failed else max(0.2, cfg.safety * (cfg.tol / err) ** 0.25)
            h *= fac
            hist = [hist[-1]]
            if h < cfg.dt_min:
                if newton_failed:
                    raise NewtonDivergence(f"bdf: Newton failed at t={t:.17g}", t=t)
                raise StepUnderflow(f"bdf: step fell below dt_min at t={t:.17g}", t=t)
    return StepperResult("bdf", problem, np.array(times), np.array(states), np.array(errs),
                         rejected, bootstrap_steps=boots, substeps=subs)
