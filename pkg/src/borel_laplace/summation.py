"""Borel-Padé-Laplace summation of a truncated Taylor series.

The three stages are

1. Borel transform: ``u'_k = u_{k+1} / k!`` turns the time series into a
   series in the Borel variable ``xi`` with a factorially improved radius.
2. Continuation: a ``[Ka/Kb]`` Padé approximant ``P`` of the Borel series,
   computed with SVD rank reduction so that noisy or degenerate inputs lower
   the degrees instead of producing spurious pole/zero pairs.
3. Laplace transform along the positive real axis, discretised by an
   ``N_G``-point Gauss-Laguerre rule::

       S(t) = u0 + tau * sum_i P(tau * xi_i) * w_i,    tau = t - t0
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, DegenerateInput, PoleOnRay
from .series import TaylorSeries

__all__ = [
    "borel_transform",
    "PadeApproximant",
    "pade_approximant",
    "default_degrees",
    "QuadratureRule",
    "gauss_laguerre_rule",
    "BorelSum",
    "borel_sum",
    "pade_columns",
    "evaluate_borel_sum",
    "evaluate_borel_sum_derivative",
]

_TINY = 1e-300


def borel_transform(series: TaylorSeries) -> np.ndarray:
    """Borel coefficients ``u'_k = u_{k+1} / k!`` for ``k = 0..K-1``.

    Returns an array of shape ``(K, dim)``.
    """
    if series.K < 1:
        raise ValueError("Borel transform needs K >= 1")
    fact = np.array([math.factorial(k) for k in range(series.K)], dtype=float)
    return series.coeffs[1:] / fact[:, None]


def default_degrees(K: int) -> tuple[int, int]:
    """Near-diagonal Padé degrees ``Ka = floor((K-1)/2)``, ``Kb = K-1-Ka``."""
    Ka = (K - 1) // 2
    return Ka, K - 1 - Ka


@dataclass(frozen=True)
class PadeApproximant:
    """Rational function ``sum a_k x^k / sum b_k x^k`` with ``b_0 = 1``.

    Coefficients are stored in ascending powers. ``effective_Ka`` and
    ``effective_Kb`` are the degrees left after rank reduction.
    """

    numer: np.ndarray
    denom: np.ndarray

    @property
    def effective_Ka(self) -> int:
        return len(self.numer) - 1

    @property
    def effective_Kb(self) -> int:
        return len(self.denom) - 1

    def __call__(self, x):
        x = np.asarray(x)
        return _polyval(self.numer, x) / _polyval(self.denom, x)

    def derivative(self, x):
        x = np.asarray(x)
        n, dn = _polyval_with_derivative(self.numer, x)
        d, dd = _polyval_with_derivative(self.denom, x)
        return (dn * d - n * dd) / (d * d)

    def taylor(self, order: int) -> np.ndarray:
        """Maclaurin coefficients of the rational function through ``order``."""
        out = np.zeros(order + 1, dtype=np.result_type(self.numer, self.denom))
        a = np.zeros(order + 1, dtype=out.dtype)
        a[: min(len(self.numer), order + 1)] = self.numer[: order + 1]
        for k in range(order + 1):
            s = a[k]
            for j in range(1, min(k, self.effective_Kb) + 1):
                s = s - self.denom[j] * out[k - j]
            out[k] = s
        return out

    def positive_real_poles(self, rtol: float = 1e-8) -> np.ndarray:
        """Roots of the denominator lying on the positive real axis."""
        if self.effective_Kb == 0:
            return np.empty(0)
        roots = np.roots(self.denom[::-1])
        on_axis = (np.abs(roots.imag) <= rtol * np.abs(roots)) & (roots.real > 0)
        return np.sort(roots.real[on_axis])


def _first_positive_root(rows, rtol: float = 1e-8) -> float:
    """Smallest positive real root over polynomials stored row-wise in ascending order.

    Rows of equal degree share one stacked companion-matrix eigenvalue
    solve; the on-axis test matches :meth:`PadeApproximant.positive_real_poles`.
    """
    rows = np.asarray(rows)
    nz = np.abs(rows) > 0
    degree = np.where(nz.any(axis=1), rows.shape[1] - 1 - np.argmax(nz[:, ::-1], axis=1), 0)
    best = math.inf
    for d in np.unique(degree):
        if d < 1:
            continue
        p = rows[degree == d, : d + 1]
        monic = p[:, :d] / p[:, d:d + 1]
        comp = np.zeros((len(p), d, d), dtype=monic.dtype)
        comp[:, 1:, :-1] = np.eye(d - 1)
        comp[:, :, -1] = -monic
        roots = np.linalg.eigvals(comp).ravel()
        on_axis = (np.abs(roots.imag) <= rtol * np.abs(roots)) & (roots.real > 0)
        if on_axis.any():
            best = min(best, float(roots.real[on_axis].min()))
    return best


def _polyval(c, x):
    out = np.zeros_like(x, dtype=np.result_type(c, x)) + c[-1]
    for ck in c[-2::-1]:
        out = out * x + ck
    return out


def _polyval_with_derivative(c, x):
    dtype = np.result_type(c, x)
    p = np.zeros_like(x, dtype=dtype) + c[-1]
    dp = np.zeros_like(x, dtype=dtype)
    for ck in c[-2::-1]:
        dp = dp * x + p
        p = p * x + ck
    return p, dp


def _balance_scale(c):
    """Scale ``s`` making the first and last nonzero of ``c_k s^k`` equal in modulus.

    ``c`` has the series index on axis 0; one scale per column.
    """
    mag = np.abs(c)
    nz = mag > _TINY
    L = c.shape[0]
    k = np.arange(L).reshape((L,) + (1,) * (c.ndim - 1))
    first = np.where(nz.any(axis=0), np.argmax(nz, axis=0), 0)
    last = np.where(nz.any(axis=0), L - 1 - np.argmax(nz[::-1], axis=0), 0)
    with np.errstate(divide="ignore"):
        logm = np.log(np.where(nz, mag, 1.0))
    lf = np.take_along_axis(logm, first[None], axis=0)[0]
    ll = np.take_along_axis(logm, last[None], axis=0)[0]
    span = np.maximum(last - first, 1)
    logs = np.where(last > first, (lf - ll) / span, 0.0)
    # keep every scaled coefficient comfortably inside the float range
    logs = np.clip(logs, -300.0 / max(L - 1, 1), 300.0 / max(L - 1, 1))
    return np.exp(logs), k


def _unscale(p: PadeApproximant, s) -> PadeApproximant:
    if s == 1.0:
        return p
    numer = p.numer / s ** np.arange(len(p.numer))
    denom = p.denom / s ** np.arange(len(p.denom))
    return PadeApproximant(numer, denom)


def pade_approximant(coeffs, Ka: int, Kb: int, rcond: float = 1e-14,
                     allow_zero: bool = False, balance: bool = False) -> PadeApproximant:
    """Robust ``[Ka/Kb]`` Padé approximant of a scalar power series.

    The denominator is the null vector of the Toeplitz matching system,
    found by SVD. When that system is numerically rank deficient the
    denominator degree is lowered to the numerical rank (and the numerator
    degree by the same amount), so the result carries no spurious
    pole/zero pairs. Tolerances are relative to the 2-norm of ``coeffs``.

    Parameters
    ----------
    coeffs : array_like
        Maclaurin coefficients ``c_0, c_1, ...``; at least ``Ka + Kb + 1``.
    Ka, Kb : int
        Requested numerator and denominator degrees.
    rcond : float
        Relative threshold below which singular values count as zero.
    allow_zero : bool
        Return the zero function for an all-zero input instead of raising.
    balance : bool
        Rescale the variable so the outermost nonzero coefficients have equal
        modulus before the rank test, and undo it afterwards. The rank
        decision then no longer depends on the units of the variable, which
        keeps the high-order terms of exact, rapidly decaying series. Not
        suitable when small trailing coefficients are noise.

    Raises
    ------
    DegenerateInput
        If every coefficient is below ``1e-300`` and ``allow_zero`` is false.
    """
    c = np.asarray(coeffs)
    if c.ndim != 1:
        raise ValueError("pade_approximant expects a 1-D coefficient sequence")
    if Ka < 0 or Kb < 0 or Ka + Kb > len(c) - 1:
        raise ValueError(f"[{Ka}/{Kb}] needs at least {Ka + Kb + 1} coefficients, got {len(c)}")
    if not 0 < rcond < 1:
        raise ValueError("rcond must lie in (0, 1)")
    c = c[: Ka + Kb + 1]
    if balance:
        sc, k = _balance_scale(c)
        sc = float(sc)
        if sc != 1.0:
            return _unscale(pade_approximant(c * sc ** k, Ka, Kb, rcond, allow_zero, False), sc)
    dtype = np.result_type(c, float)
    one = np.ones(1, dtype=dtype)

    if np.all(np.abs(c) < _TINY):
        if not allow_zero:
            raise DegenerateInput("all Padé input coefficients vanish")
        return PadeApproximant(np.zeros(1, dtype=dtype), one)

    m, n = Ka, Kb
    ts = rcond * np.linalg.norm(c)
    if np.linalg.norm(c[: m + 1]) <= ts:
        return PadeApproximant(np.zeros(1, dtype=dtype), one)

    row = np.zeros(n + 1, dtype=dtype)
    row[0] = c[0]
    while True:
        if n == 0:
            return _trim(c[: m + 1].astype(dtype), one, ts, rcond)
        Z = scipy.linalg.toeplitz(c[: m + n + 1], row[: n + 1])
        C = Z[m + 1: m + n + 1, :]
        rho = int(np.sum(np.linalg.svd(C, compute_uv=False) > ts))
        if rho == n:
            break
        m, n = m - (n - rho), rho
        if m < 0:
            # rank collapse below the numerator degree; keep the constant term
            return _trim(c[:1].astype(dtype), one, ts, rcond)

    # null vector of C, then one reweighted QR pass for coefficient accuracy
    _, _, Vh = np.linalg.svd(C)
    b = Vh[-1].conj()
    D = np.abs(b) + np.sqrt(np.finfo(float).eps)
    Q, _ = np.linalg.qr((C * D).conj().T, mode="complete")
    b = D * Q[:, n]
    b = b / np.linalg.norm(b)
    a = Z[: m + 1, : n + 1] @ b

    lam = int(np.argmax(np.abs(b) > rcond))
    b, a = b[lam:], a[lam:]
    return _trim(a, b, ts, rcond)


def _trim(a, b, ts, rcond):
    nz_b = np.nonzero(np.abs(b) > rcond * np.abs(b).max())[0]
    b = b[: nz_b[-1] + 1]
    nz_a = np.nonzero(np.abs(a) > ts)[0]
    a = a[: nz_a[-1] + 1] if len(nz_a) else a[:1] * 0
    b0 = b[0]
    a = a / b0
    b = b / b0
    b[0] = 1
    return PadeApproximant(np.asarray(a), np.asarray(b))


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Laguerre nodes and weights for ``int_0^inf f(x) exp(-x) dx``."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n_points(self) -> int:
        return len(self.nodes)


def _laguerre_scaled(n, x):
    """Return ``(L_n, L_{n-1}, sum_{k<n} L_k^2)`` at ``x``, all rescaled.

    The common factor is irrelevant for Newton ratios; the sum of squares is
    returned together with its log-scale so Christoffel weights can be
    formed without overflow.
    """
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    ssq = np.zeros_like(x)
    logscale = np.zeros_like(x)
    for k in range(n):
        ssq = ssq + p * p
        p_next = ((2 * k + 1 - x) * p - k * p_prev) / (k + 1)
        p_prev, p = p, p_next
        big = np.maximum(np.abs(p), np.abs(p_prev))
        s = np.where(big > 1e100, 1.0 / big, 1.0)
        p, p_prev, ssq = p * s, p_prev * s, ssq * s * s
        logscale = logscale - np.log(s)
    return p, p_prev, ssq, logscale


@lru_cache(maxsize=16)
def _gauss_laguerre_cached(n):
    k = np.arange(n, dtype=float)
    diag = 2 * k + 1
    off = k[1:]
    try:
        x = scipy.linalg.eigh_tridiagonal(diag, off, eigvals_only=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ConvergenceFailure(f"tridiagonal eigensolver failed for N_G={n}") from exc
    x = np.sort(x)
    for _ in range(3):
        p, pm1, _, _ = _laguerre_scaled(n, x)
        x = x - x * p / (n * (p - pm1))
    _, _, ssq, logscale = _laguerre_scaled(n, x)
    w = np.exp(-2 * logscale) / ssq
    if not (np.all(np.isfinite(x)) and np.all(np.diff(x) > 0)):
        raise ConvergenceFailure(f"Laguerre root refinement failed for N_G={n}")
    x.flags.writeable = False
    w.flags.writeable = False
    return QuadratureRule(x, w)


def gauss_laguerre_rule(n: int) -> QuadratureRule:
    """``n``-point Gauss-Laguerre rule (weight ``exp(-x)`` on ``[0, inf)``).

    Nodes start from the eigenvalues of the Jacobi matrix of the Laguerre
    recurrence and are polished by Newton iterations on ``L_n``. Weights use
    the Christoffel formula ``1 / sum_{k<n} L_k(x_i)^2``, which keeps full
    relative accuracy on the far nodes where the weights are tiny.
    For large ``n`` the outermost weights underflow to zero.
    """
    if not 1 <= n <= 200:
        raise ValueError(f"N_G must lie in [1, 200], got {n}")
    return _gauss_laguerre_cached(int(n))


@dataclass(frozen=True)
class BorelSum:
    """Evaluable local solution built from one Taylor series.

    ``numer`` and ``denom`` stack the per-component Padé coefficients,
    zero-padded to common lengths, so evaluation is vectorised across
    components.
    """

    t0: float
    u0: np.ndarray
    pades: tuple
    rule: QuadratureRule
    numer: np.ndarray = field(repr=False)
    denom: np.ndarray = field(repr=False)

    @classmethod
    def from_pades(cls, t0, u0, pades, rule):
        na = max(p.effective_Ka for p in pades) + 1
        nb = max(p.effective_Kb for p in pades) + 1
        dtype = np.result_type(u0, *[p.numer for p in pades], *[p.denom for p in pades])
        numer = np.zeros((len(pades), na), dtype=dtype)
        denom = np.zeros((len(pades), nb), dtype=dtype)
        for j, p in enumerate(pades):
            numer[j, : len(p.numer)] = p.numer
            denom[j, : len(p.denom)] = p.denom
        return cls(t0, np.asarray(u0), tuple(pades), rule, numer, denom)

    @property
    def dim(self) -> int:
        return len(self.pades)

    def first_ray_pole(self) -> float:
        """Smallest positive real pole over all components (``inf`` if none)."""
        cached = self.__dict__.get("_first_pole")
        if cached is None:
            cached = _first_positive_root(self.denom)
            object.__setattr__(self, "_first_pole", cached)
        return cached

    def check_ray(self, tau: float) -> None:
        """Raise :class:`PoleOnRay` if a pole lies in ``[0, tau * max node]``."""
        if tau * self.rule.nodes[-1] >= self.first_ray_pole():
            raise PoleOnRay(
                f"Padé pole at xi={self.first_ray_pole():.6g} inside the quadrature support "
                f"for tau={tau:.6g}")

    def _values(self, x):
        # P and P' at every entry of x, shape (dim,) + x.shape
        x = x[None, ...]
        idx = (slice(None),) + (None,) * (x.ndim - 1)
        n = self.numer[:, -1][idx] + 0 * x
        dn = np.zeros_like(n)
        for k in range(self.numer.shape[1] - 2, -1, -1):
            dn = dn * x + n
            n = n * x + self.numer[:, k][idx]
        d = self.denom[:, -1][idx] + 0 * x
        dd = np.zeros_like(d)
        for k in range(self.denom.shape[1] - 2, -1, -1):
            dd = dd * x + d
            d = d * x + self.denom[:, k][idx]
        return n / d, (dn * d - n * dd) / (d * d)

    def evaluate(self, t, check: bool = True):
        tau = t - self.t0
        if tau == 0:
            return self.u0.copy()
        if check:
            self.check_ray(tau)
        P, _ = self._values(tau * self.rule.nodes)
        return self.u0 + tau * (P @ self.rule.weights)

    def evaluate_many(self, taus):
        """States and time derivatives at offsets ``taus`` from ``t0``.

        Returns two arrays of shape ``(len(taus), dim)``. No pole check.
        """
        taus = np.asarray(taus, dtype=float)
        x = taus[:, None] * self.rule.nodes[None, :]
        P, dP = self._values(x)
        w = self.rule.weights
        S = self.u0[None, :] + taus[:, None] * (P @ w).T
        dS = ((P + x[None] * dP) @ w).T
        return S, dS

    def evaluate_with_derivative(self, t, check: bool = True):
        """Return ``(S(t), dS/dt(t))`` sharing one rational evaluation."""
        tau = t - self.t0
        if check and tau != 0:
            self.check_ray(tau)
        S, dS = self.evaluate_many([tau])
        if tau == 0:
            return self.u0.copy(), dS[0]
        return S[0], dS[0]

    def derivative(self, t, check: bool = True):
        return self.evaluate_with_derivative(t, check)[1]


def pade_columns(coeffs, Ka: int, Kb: int, rcond: float = 1e-14, balance: bool = False) -> list:
    """:func:`pade_approximant` of every column of ``coeffs``, zero columns allowed.

    Columns whose matching system has full rank are solved together with
    stacked SVD and QR factorisations; the others go through the scalar
    routine. The result is the same as calling it column by column.
    """
    c = np.asarray(coeffs)
    if c.ndim != 2:
        raise ValueError("pade_columns expects a (length, columns) array")
    if Ka < 0 or Kb < 0 or Ka + Kb > c.shape[0] - 1:
        raise ValueError(f"[{Ka}/{Kb}] needs at least {Ka + Kb + 1} coefficients, got {c.shape[0]}")
    c = c[: Ka + Kb + 1]
    if balance:
        scales, k = _balance_scale(c)
        out = pade_columns(c * scales[None, :] ** k, Ka, Kb, rcond, balance=False)
        return [_unscale(p, float(sj)) for p, sj in zip(out, scales)]
    ncol = c.shape[1]
    out = [None] * ncol
    ts = rcond * np.linalg.norm(c, axis=0)
    easy = ~np.all(np.abs(c) < _TINY, axis=0) & (np.linalg.norm(c[: Ka + 1], axis=0) > ts)
    cols = np.nonzero(easy)[0] if Kb > 0 else np.empty(0, dtype=int)
    if len(cols):
        m, n = Ka, Kb
        # C[r, s] = c[m + 1 + r - s], zero for negative indices
        idx = m + 1 + np.arange(n)[:, None] - np.arange(n + 1)[None, :]
        cc = c[:, cols].T
        C = np.where(idx >= 0, cc[:, np.clip(idx, 0, None)], 0)
        _, sv, Vh = np.linalg.svd(C)
        full = np.sum(sv > ts[cols, None], axis=1) == n
        C, Vh, cc, sel = C[full], Vh[full], cc[full], cols[full]
        if len(sel):
            b = Vh[:, -1].conj()
            D = np.abs(b) + np.sqrt(np.finfo(float).eps)
            Q, _ = np.linalg.qr(np.swapaxes((C * D[:, None, :]).conj(), 1, 2), mode="complete")
            b = D * Q[:, :, n]
            b = b / np.linalg.norm(b, axis=1, keepdims=True)
            ia = np.arange(m + 1)[:, None] - np.arange(n + 1)[None, :]
            Za = np.where(ia >= 0, cc[:, np.clip(ia, 0, None)], 0)
            a = np.einsum("kij,kj->ki", Za, b)
            for bj, aj, j in zip(b, a, sel):
                lam = int(np.argmax(np.abs(bj) > rcond))
                out[j] = _trim(aj[lam:], bj[lam:], ts[j], rcond)
    for j in range(ncol):
        if out[j] is None:
            out[j] = pade_approximant(c[:, j], Ka, Kb, rcond=rcond, allow_zero=True,
                                      balance=False)
    return out


def borel_sum(series: TaylorSeries, Ka: int, Kb: int, rule: QuadratureRule,
              rcond: float = 1e-14) -> BorelSum:
    """Borel transform, per-component Padé continuation and Laplace assembly."""
    pades = pade_columns(borel_transform(series), Ka, Kb, rcond=rcond)
    return BorelSum.from_pades(series.t0, series.coeffs[0], pades, rule)


def evaluate_borel_sum(bs: BorelSum, t):
    """``u0 + tau * sum_i P(tau xi_i) w_i`` per component, ``tau = t - t0``.

    Raises
    ------
    PoleOnRay
        If a Padé denominator has a positive real root within the scaled
        quadrature support.
    """
    if t < bs.t0:
        raise ValueError("Borel sum is evaluated forward in time only")
    return bs.evaluate(t)


def evaluate_borel_sum_derivative(bs: BorelSum, t):
    """Exact time derivative of the quadrature formula for the Borel sum."""
    if t < bs.t0:
        raise ValueError("Borel sum is evaluated forward in time only")
    return bs.derivative(t)
