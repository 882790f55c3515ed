"""Truncated time Taylor series of the local solution of ``du/dt = F(t, u)``.

Coefficients are produced order by order from a problem-specific recurrence
``u_{k+1} = F_k(u_0, ..., u_k) / (k + 1)`` where ``F_k`` is the k-th Taylor
coefficient of ``t -> F(t, u(t))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteCoefficient

__all__ = ["SeriesProblem", "TaylorSeries", "generate_series", "evaluate_truncated",
           "evaluate_truncated_derivative"]


class SeriesProblem:
    """Interface every problem must provide to be integrated.

    Subclasses set ``dim`` and implement :meth:`rhs` and
    :meth:`taylor_rhs_coefficient`. Problems that can be split as
    ``F(t, u) = L * u + N(t, u)`` with a diagonal ``L`` also override
    :meth:`linear_part` and :meth:`nonlinear`; only the exponential
    integrator needs them.
    """

    dim: int
    dtype = float

    def rhs(self, t, u):
        raise NotImplementedError

    def taylor_rhs_coefficient(self, t0, coeffs, k):
        """Return ``F_k`` given the Taylor coefficients ``coeffs[0..k]``.

        ``coeffs`` is indexable by order and holds at least ``k + 1`` arrays.
        """
        raise NotImplementedError

    def linear_part(self):
        return None

    def nonlinear(self, t, u):
        L = self.linear_part()
        if L is None:
            raise NotImplementedError(f"{type(self).__name__} has no linear/nonlinear split")
        return self.rhs(t, u) - L * u


@dataclass(frozen=True)
class TaylorSeries:
    """Coefficients ``coeffs[k]`` of ``sum_k coeffs[k] (t - t0)^k``.

    ``coeffs`` has shape ``(K + 1, dim)``; row ``k`` is the order-k
    coefficient of every component.
    """

    t0: float
    coeffs: np.ndarray

    def __post_init__(self):
        if np.ndim(self.coeffs) != 2 or len(self.coeffs) < 1:
            raise ValueError("coeffs must have shape (K + 1, dim)")

    @property
    def K(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]


def generate_series(problem: SeriesProblem, t0: float, u0, K: int) -> TaylorSeries:
    """Compute the order-``K`` Taylor expansion of the solution through ``(t0, u0)``.

    Raises
    ------
    NonFiniteCoefficient
        If the recurrence produces a NaN or infinite coefficient.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    u0 = np.atleast_1d(np.asarray(u0))
    if u0.shape != (problem.dim,):
        raise ValueError(f"state has shape {u0.shape}, problem expects ({problem.dim},)")
    if not np.all(np.isfinite(u0)):
        raise NonFiniteCoefficient("initial state is not finite")
    dtype = np.result_type(u0.dtype, problem.dtype, float)
    coeffs = np.zeros((K + 1, problem.dim), dtype=dtype)
    coeffs[0] = u0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(K):
            Fk = problem.taylor_rhs_coefficient(t0, coeffs, k)
            coeffs[k + 1] = np.asarray(Fk) / (k + 1)
            if not np.all(np.isfinite(coeffs[k + 1])):
                raise NonFiniteCoefficient(f"coefficient of order {k + 1} is not finite at t0={t0}")
    coeffs.flags.writeable = False
    return TaylorSeries(t0=t0, coeffs=coeffs)


def evaluate_truncated(series: TaylorSeries, t):
    """Horner evaluation of the truncated series at time ``t``."""
    h = t - series.t0
    out = series.coeffs[-1].copy()
    for c in series.coeffs[-2::-1]:
        out = out * h + c
    return out


def evaluate_truncated_derivative(series: TaylorSeries, t):
    """Time derivative of the truncated series at ``t``."""
    h = t - series.t0
    K = series.K
    out = K * series.coeffs[K]
    for k in range(K - 1, 0, -1):
        out = out * h + k * series.coeffs[k]
    return out
