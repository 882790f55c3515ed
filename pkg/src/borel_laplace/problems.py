"""Benchmark problems with hand-coded Taylor recurrences.

* :class:`Dahlquist` -- ``u' = lambda u``.
* :class:`ZeroProblem` -- ``u' = 0``.
* :class:`QuadraticGrowth` -- ``u' = u^2``, blowing up at ``t = 1/u0``.
* :class:`LotkaVolterra` -- prey/predator system with a first integral.
* :class:`KdV` -- Fourier-Galerkin semi-discretisation of the Korteweg-de
  Vries equation on a periodic domain, modes ``m = -M..M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .errors import DomainError
from .series import SeriesProblem

__all__ = [
    "Dahlquist",
    "ZeroProblem",
    "QuadraticGrowth",
    "LotkaVolterraParams",
    "LotkaVolterra",
    "lv_problem",
    "lv_first_integral",
    "lv_stiffness_ratio",
    "lv_params_for_ratio",
    "NON_STIFF_LV",
    "spectral_convolution",
    "spectral_convolution_direct",
    "KdvParams",
    "KdV",
    "kdv_problem",
    "kdv_initial",
    "kdv_exact",
    "kdv_error_metric",
]


class Dahlquist(SeriesProblem):
    """Scalar linear test equation ``u' = lam * u``.

    ``split`` is the fraction of ``lam`` reported as the linear part; the
    rest is treated as the nonlinear remainder by exponential integrators.
    """

    def __init__(self, lam=-1.0, split=1.0):
        self.lam = lam
        self.split = split
        self.dim = 1
        self.dtype = np.result_type(lam, float)

    def rhs(self, t, u):
        return self.lam * u

    def taylor_rhs_coefficient(self, t0, coeffs, k):
        return self.lam * coeffs[k]

    def linear_part(self):
        return np.array([self.split * self.lam])

    def nonlinear(self, t, u):
        return (1 - self.split) * self.lam * u


class ZeroProblem(SeriesProblem):
    def __init__(self, dim=1):
        self.dim = dim

    def rhs(self, t, u):
        return np.zeros_like(u)

    def taylor_rhs_coefficient(self, t0, coeffs, k):
        return np.zeros_like(coeffs[0])

    def linear_part(self):
        return np.zeros(self.dim)

    def nonlinear(self, t, u):
        return np.zeros_like(u)


class QuadraticGrowth(SeriesProblem):
    """``u' = u^2``; exact solution ``u0 / (1 - u0 t)``."""

    dim = 1

    def rhs(self, t, u):
        return u * u

    def taylor_rhs_coefficient(self, t0, coeffs, k):
        return sum(coeffs[l] * coeffs[k - l] for l in range(k + 1))

    def linear_part(self):
        return np.zeros(1)

    def nonlinear(self, t, u):
        return u * u


@dataclass(frozen=True)
class LotkaVolterraParams:
    alpha: float
    beta: float
    delta: float
    gamma: float

    def __post_init__(self):
        if min(self.alpha, self.beta, self.delta, self.gamma) <= 0:
            raise DomainError("Lotka-Volterra rates must be strictly positive")


NON_STIFF_LV = LotkaVolterraParams(alpha=2 / 3, beta=4 / 3, delta=2.0, gamma=2.0)


class LotkaVolterra(SeriesProblem):
    """``u' = alpha u - beta u v``, ``v' = -delta v + gamma u v``; state ``[u, v]``."""

    dim = 2

    def __init__(self, params: LotkaVolterraParams = NON_STIFF_LV):
        self.params = params
        self._L = np.array([params.alpha, -params.delta])

    def rhs(self, t, y):
        p = self.params
        uv = y[0] * y[1]
        return np.array([p.alpha * y[0] - p.beta * uv, -p.delta * y[1] + p.gamma * uv])

    def taylor_rhs_coefficient(self, t0, coeffs, k):
        p = self.params
        u = coeffs[: k + 1, 0]
        v = coeffs[: k + 1, 1]
        cauchy = np.dot(u, v[::-1])
        return np.array([p.alpha * u[k] - p.beta * cauchy, -p.delta * v[k] + p.gamma * cauchy])

    def linear_part(self):
        return self._L

    def nonlinear(self, t, y):
        uv = y[0] * y[1]
        return np.array([-self.params.beta * uv, self.params.gamma * uv])


def lv_problem(params: LotkaVolterraParams = NON_STIFF_LV) -> LotkaVolterra:
    return LotkaVolterra(params)


def lv_first_integral(params: LotkaVolterraParams, u, v):
    """``beta v + gamma u - alpha ln v - delta ln u``; works elementwise."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u <= 0) or np.any(v <= 0):
        raise DomainError("first integral needs strictly positive populations")
    p = params
    return p.beta * v + p.gamma * u - p.alpha * np.log(v) - p.delta * np.log(u)


def lv_stiffness_ratio(params: LotkaVolterraParams) -> float:
    return max(params.alpha, params.delta) / min(params.alpha, params.delta)


def lv_params_for_ratio(r: float, base: LotkaVolterraParams = NON_STIFF_LV) -> LotkaVolterraParams:
    """Keep ``base`` and raise ``delta`` to ``r * alpha``."""
    return LotkaVolterraParams(base.alpha, base.beta, r * base.alpha, base.gamma)


# -- spectral KdV ---------------------------------------------------------

def _padded_size(M):
    return scipy.fft.next_fast_len(3 * M + 1)


def _to_physical(a, M, N):
    """Values on ``N`` equispaced points of the fields with modes ``a[..., m + M]``."""
    F = np.zeros(a.shape[:-1] + (N,), dtype=complex)
    F[..., : M + 1] = a[..., M:]
    F[..., N - M:] = a[..., :M]
    return scipy.fft.ifft(F, axis=-1) * N


def _to_modes(p, M, N):
    F = scipy.fft.fft(p, axis=-1) / N
    return np.concatenate([F[..., N - M:], F[..., : M + 1]], axis=-1)


def spectral_convolution(a, b, M: int):
    """Truncated convolution ``sum_{p} a_p b_{m-p}`` for ``|m| <= M``.

    The product is formed on a grid of at least ``3M + 1`` points so that
    quadratic aliases land outside the retained modes.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1] != 2 * M + 1 or b.shape[-1] != 2 * M + 1:
        raise ValueError("mode arrays must have length 2M + 1")
    N = _padded_size(M)
    return _to_modes(_to_physical(a, M, N) * _to_physical(b, M, N), M, N)


def spectral_convolution_direct(a, b, M: int):
    """O(M^2) reference implementation of :func:`spectral_convolution`."""
    out = np.zeros(2 * M + 1, dtype=complex)
    for m in range(-M, M + 1):
        for p in range(max(-M, m - M), min(M, m + M) + 1):
            out[m + M] += a[p + M] * b[m - p + M]
    return out


@dataclass(frozen=True)
class KdvParams:
    """Shallow-water KdV setup; derived coefficients are computed on creation."""

    g: float = 10.0
    d: float = 2.0
    X: float = 24 * math.pi
    M: int = 32
    U: float = 0.5
    c0: float = field(init=False)
    alpha: float = field(init=False)
    beta: float = field(init=False)
    omega: float = field(init=False)
    kappa: float = field(init=False)
    c: float = field(init=False)

    def __post_init__(self):
        c0 = math.sqrt(self.g * self.d)
        set_ = lambda k, v: object.__setattr__(self, k, v)
        set_("c0", c0)
        set_("alpha", 1.5 * math.sqrt(self.g / self.d))
        set_("beta", self.d ** 2 * c0 / 6)
        set_("omega", 2 * math.pi / self.X)
        set_("kappa", math.sqrt(3 * self.U / (4 * self.d ** 3)))
        set_("c", c0 * (1 + self.U / (2 * self.d)))

    @property
    def D(self) -> int:
        return 2 * self.M

    @property
    def period(self) -> float:
        return self.X / self.c

    @classmethod
    def from_size(cls, D: int, **kw):
        if D % 2:
            raise ValueError("D must be even")
        return cls(M=D // 2, **kw)


class KdV(SeriesProblem):
    """``du/dt = A u + N(u)`` over Fourier modes ``m = -M..M``.

    ``A`` is diagonal with entries ``-i c0 omega m + i beta omega^3 m^3`` and
    ``N_m(u) = -(i/2) alpha omega m (u * u)_m``.
    """

    dtype = complex

    def __init__(self, params: KdvParams):
        self.params = params
        M = params.M
        self.M = M
        self.dim = 2 * M + 1
        self.m = np.arange(-M, M + 1)
        w = params.omega
        self.A = -1j * params.c0 * w * self.m + 1j * params.beta * w ** 3 * self.m ** 3
        self.nl = -0.5j * params.alpha * w * self.m
        self._N = _padded_size(M)

    def rhs(self, t, u):
        return self.A * u + self.nonlinear(t, u)

    def nonlinear(self, t, u):
        phys = _to_physical(u, self.M, self._N)
        return self.nl * _to_modes(phys * phys, self.M, self._N)

    def linear_part(self):
        return self.A

    def taylor_rhs_coefficient(self, t0, coeffs, k):
        phys = _to_physical(np.asarray(coeffs[: k + 1]), self.M, self._N)
        prod = np.einsum("lj,lj->j", phys, phys[::-1])
        return self.A * coeffs[k] + self.nl * _to_modes(prod, self.M, self._N)

    # grid helpers -----------------------------------------------------
    def grid(self):
        """``2M + 1`` equispaced points of ``[-X/2, X/2)``."""
        X = self.params.X
        return -X / 2 + X * np.arange(self.dim) / self.dim

    def to_modes(self, values):
        """Fourier modes of samples taken on :meth:`grid`."""
        x = self.grid()
        E = np.exp(-1j * self.params.omega * np.outer(self.m, x))
        return E @ np.asarray(values, dtype=complex) / self.dim

    def to_physical(self, modes, x=None):
        """Real field ``sum_m u_m exp(i m omega x)`` at ``x`` (default :meth:`grid`)."""
        x = self.grid() if x is None else np.asarray(x)
        E = np.exp(1j * self.params.omega * np.outer(x, self.m))
        return (E @ np.asarray(modes)).real

    def initial_modes(self):
        return self.to_modes(kdv_initial(self.params, self.grid()))

    def derivative_modes(self, modes):
        return 1j * self.params.omega * self.m * modes


def kdv_problem(params: KdvParams) -> KdV:
    return KdV(params)


def _wrap(x, X):
    return (np.asarray(x) + X / 2) % X - X / 2


def kdv_initial(params: KdvParams, x):
    """Periodic prolongation of ``U sech^2(kappa x)`` with period ``X``.

    The profile is periodised by summing the nearest images, which agrees
    with the plain wrap of ``[-X/2, X/2)`` to ``4 U exp(-kappa X)`` but has
    no derivative jump at the cell edges.
    """
    xw = _wrap(x, params.X)
    return sum(params.U / np.cosh(params.kappa * (xw + n * params.X)) ** 2
               for n in (-2, -1, 0, 1, 2))


def kdv_exact(params: KdvParams, x, t):
    """Traveling wave ``u0(x - c t)``."""
    return kdv_initial(params, np.asarray(x) - params.c * t)


def kdv_error_metric(times, computed, exact) -> float:
    """Trapezoidal ``int ||u_c - u_e|| / ||u_e|| dt`` over a uniform time grid.

    ``computed`` and ``exact`` have shape ``(len(times), n_points)``.
    """
    times = np.asarray(times, dtype=float)
    computed = np.asarray(computed)
    exact = np.asarray(exact)
    rel = np.linalg.norm(computed - exact, axis=1) / np.linalg.norm(exact, axis=1)
    return float(np.trapezoid(rel, times))
