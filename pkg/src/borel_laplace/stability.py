"""Linear stability of the truncated-series (ANM) and Borel-Padé-Laplace schemes.

On ``u' = lambda u`` one step of size ``h`` multiplies the state by an
amplification factor ``R(z)``, ``z = lambda h``:

* truncated series: ``R(z) = sum_{k<=K} z^k / k!``
* Borel-Padé-Laplace: ``R(z) = 1 + z sum_i P(z xi_i) w_i`` where ``P`` is the
  Padé continuation of the Borel transform of ``exp`` (unit rate), since
  the rate only rescales the Borel variable.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .summation import (PadeApproximant, QuadratureRule, default_degrees,
                        gauss_laguerre_rule, pade_approximant)

__all__ = [
    "amplification_anm",
    "amplification_bpl",
    "exponential_borel_pade",
    "StabilityGrid",
    "region_mask",
    "region_size",
    "write_region_csv",
    "write_size_csv",
]

STABILITY_NODES = 100


def amplification_anm(z, K: int):
    """``|sum_{k=0}^K z^k / k!|``, vectorised over ``z``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    z = np.asarray(z, dtype=complex)
    out = np.full_like(z, 1 / math.factorial(K))
    for k in range(K - 1, -1, -1):
        out = out * z + 1 / math.factorial(k)
    return np.abs(out)


def exponential_borel_pade(K: int, Ka: int, Kb: int, rcond: float = 1e-14) -> PadeApproximant:
    """Padé approximant of the Borel transform of ``exp(t)`` truncated at order ``K``.

    Borel coefficients are ``1 / (k! (k+1)!)`` for ``k = 0..K-1``. They are
    exact, so the variable is balanced before the rank test; otherwise the
    superfactorial decay drops the top coefficients from ``K = 12`` on.
    """
    c = np.array([1 / (math.factorial(k) * math.factorial(k + 1)) for k in range(K)])
    return pade_approximant(c, Ka, Kb, rcond=rcond, balance=True)


def amplification_bpl(z, K: int, Ka: int | None = None, Kb: int | None = None,
                      rule: QuadratureRule | None = None):
    """``|1 + z sum_i P(z xi_i) w_i|`` for the ``[Ka/Kb]`` Borel-Padé continuation.

    Degrees default to the near-diagonal choice and the rule to 100 nodes.
    """
    if Ka is None or Kb is None:
        Ka, Kb = default_degrees(K)
    if rule is None:
        rule = gauss_laguerre_rule(STABILITY_NODES)
    pade = exponential_borel_pade(K, Ka, Kb)
    z = np.asarray(z, dtype=complex)
    zz = z.reshape(-1, 1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        s = pade(zz * rule.nodes[None, :]) @ rule.weights
        R = np.abs(1 + z.reshape(-1) * s)
    R = np.where(np.isnan(R), np.inf, R)
    return R.reshape(z.shape)


def _amplification(method, z, params):
    method = method.lower()
    if method == "anm":
        return amplification_anm(z, params["K"])
    if method == "bpl":
        return amplification_bpl(z, params["K"], params.get("Ka"), params.get("Kb"),
                                 params.get("rule"))
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class StabilityGrid:
    """Boolean stability mask over a rectangle; ``mask[i, j]`` is at ``(re[j], im[i])``."""

    re: np.ndarray
    im: np.ndarray
    mask: np.ndarray
    amplification: np.ndarray

    @property
    def re_range(self):
        return self.re[0], self.re[-1]

    @property
    def im_range(self):
        return self.im[0], self.im[-1]


def region_mask(method: str, params: dict, re_range=(-3.0, 1.0), im_range=(-3.0, 3.0),
                resolution: int = 200) -> StabilityGrid:
    """Evaluate ``|R(z)| <= 1`` on a ``resolution x resolution`` grid."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    re = np.linspace(*re_range, resolution)
    im = np.linspace(*im_range, resolution)
    Z = re[None, :] + 1j * im[:, None]
    amp = _amplification(method, Z, params)
    return StabilityGrid(re, im, amp <= 1, amp)


def region_size(method: str, params: dict, spacing: float = 1e-3, atol: float = 1e-6,
                max_d: float = 1e4, chunk: int = 20000) -> float:
    """Largest ``d`` with ``|R| <= 1`` on all of ``[-d, 0]``.

    The negative real axis is scanned with the given sample spacing over
    windows that double in length, starting from ``[-1, 0]``; the first
    exit is then refined by bisection to ``atol``. Returns ``max_d`` when no
    exit is found below it.
    """
    inside = lambda x: _amplification(method, -np.asarray(x, dtype=float) + 0j, params) <= 1 + 1e-12
    lo, hi = 0.0, 1.0
    a = b = None
    while b is None:
        xs = np.arange(lo, hi + spacing, spacing)
        for start in range(0, len(xs), chunk):
            part = xs[start:start + chunk]
            ok = inside(part)
            if not ok.all():
                first = int(np.argmin(ok))
                b = part[first]
                a = part[first - 1] if first else (xs[start - 1] if start else 0.0)
                break
        if b is None:
            if hi >= max_d:
                return float(max_d)
            lo, hi = hi, min(2 * hi, max_d)
    while b - a > atol:
        mid = 0.5 * (a + b)
        if inside(mid):
            a = mid
        else:
            b = mid
    return float(a)


def write_region_csv(grid: StabilityGrid, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["re", "im", "inside"])
        for i, y in enumerate(grid.im):
            for j, x in enumerate(grid.re):
                w.writerow([repr(float(x)), repr(float(y)), int(grid.mask[i, j])])


def write_size_csv(rows, path) -> None:
    """``rows`` are ``(K, Ka, Kb, size)`` tuples; Padé degrees may be empty for ANM."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["K", "Ka", "Kb", "size"])
        for K, Ka, Kb, size in rows:
            w.writerow([K, "" if Ka is None else Ka, "" if Kb is None else Kb, repr(float(size))])
