"""Closed-form analytics: entropy kernels, rate/exponent thresholds, stabilizable region.

Exponents ``beta`` are per channel use: a delay-``d`` error probability
bound ``eta * 2**(-beta*n*d)``.  Anything per system step multiplies by
``n`` explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .channel import ChannelKind, ChannelModel, bhattacharyya

__all__ = [
    "binary_entropy",
    "kl",
    "inv_entropy_smaller_root",
    "theta_star",
    "ThresholdResult",
    "RegionPoint",
    "union_bound_thresholds",
    "tighter_bsc_thresholds",
    "epsilon_star",
    "sahai_check",
    "stabilizable_lambda_max",
    "region_sweep",
    "R_GRID_POINTS",
]

R_GRID_POINTS = 512
_BISECT_TOL = 1e-10


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"entropy argument {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def kl(x: float, y: float) -> float:
    """Binary KL divergence ``D(x || y)`` in bits."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"kl first argument {x} outside [0, 1]")
    if not 0.0 < y < 1.0:
        raise ValueError(f"kl second argument {y} outside (0, 1)")
    out = 0.0
    if x > 0.0:
        out += x * math.log2(x / y)
    if x < 1.0:
        out += (1.0 - x) * math.log2((1.0 - x) / (1.0 - y))
    return out


def _bisect(f: Callable[[float], float], lo: float, hi: float, tol: float = _BISECT_TOL) -> float:
    """Root of a function that changes sign on ``[lo, hi]``; stops when the bracket is below ``tol``.

    Runs to float resolution if asked for ``tol=0``.
    """
    flo = f(lo)
    if flo == 0.0:
        return lo
    if (f(hi) > 0) == (flo > 0):
        raise ValueError("root is not bracketed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def inv_entropy_smaller_root(y: float) -> float:
    """The root of ``H(x) = y`` in ``[0, 1/2]``."""
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"entropy value {y} outside [0, 1]")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 0.5
    # H is steep near zero, so bisect to float resolution rather than a fixed x tolerance
    return _bisect(lambda x: binary_entropy(x) - y, 0.0, 0.5, tol=0.0)


def theta_star(R: float) -> float:
    """``log2(1 / (2**(1-R) - 1))``, the smallest admissible weight-growth exponent."""
    if not 0.0 < R < 1.0:
        raise ValueError("rate must lie in (0, 1)")
    return math.log2(1.0 / (2.0 ** (1.0 - R) - 1.0))


def _entropy_vec(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x)
    return np.where((x <= 0.0) | (x >= 1.0), 0.0, h)


def _inv_entropy_vec(y: np.ndarray) -> np.ndarray:
    """Elementwise smaller root of ``H(x) = y``; 64 halvings of ``[0, 1/2]`` reach float resolution."""
    lo = np.zeros_like(y)
    hi = np.full_like(y, 0.5)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = _entropy_vec(mid) < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return np.where(y >= 1.0, 0.5, np.where(y <= 0.0, 0.0, 0.5 * (lo + hi)))


def _kl_vec(x: np.ndarray, y: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(x > 0.0, x * np.log2(x / y), 0.0)
        b = np.where(x < 1.0, (1.0 - x) * np.log2((1.0 - x) / (1.0 - y)), 0.0)
    return a + b


def _as_output(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


@dataclass(frozen=True)
class ThresholdResult:
    """Largest admissible rate and the exponent bound as a function of rate.

    ``beta_of_R`` takes a float or an array of rates.
    """

    R_max: float
    beta_of_R: Callable = field(compare=False)
    provenance: str

    def beta_table(self, rates: Iterable[float]) -> list[tuple[float, float]]:
        rates = np.asarray(list(rates), dtype=float)
        return [(float(r), float(b)) for r, b in zip(rates, np.atleast_1d(self.beta_of_R(rates)))]


def union_bound_thresholds(zeta: float, p: float = 0.5) -> ThresholdResult:
    """Rate and exponent thresholds of the TZ_p ensemble under the union bound.

    ``R < 1 - log2(1+zeta)/log2(1/(1-p))`` and
    ``beta < H^{-1}(1-R) * (log2(1/zeta) + log2((1-p)^{-(1-R)} - 1))``.
    The exponent is reported as 0 at and beyond ``R_max``.
    """
    if not 0.0 < zeta < 1.0:
        raise ValueError("zeta must lie in (0, 1)")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    log_inv_q = math.log2(1.0 / (1.0 - p))
    r_max = 1.0 - math.log2(1.0 + zeta) / log_inv_q

    def beta(R):
        R = np.asarray(R, dtype=float)
        rc = np.clip(R, 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = np.log2((1.0 - p) ** (-(1.0 - rc)) - 1.0)
            val = _inv_entropy_vec(1.0 - rc) * (math.log2(1.0 / zeta) + inner)
        return _as_output(np.where(R >= r_max, 0.0, np.maximum(val, 0.0)))

    return ThresholdResult(max(r_max, 0.0), beta, "union-bound")


def tighter_bsc_thresholds(eps: float) -> ThresholdResult:
    """BSC thresholds ``R < 1 - H(2 eps)`` and ``beta < KL(H^{-1}(1-R)/2 || eps)``.

    They improve on the union bound only for ``eps < epsilon_star()``, but
    the formulas are evaluated for any ``eps < 1/4``.
    """
    if not 0.0 < eps < 0.25:
        raise ValueError("eps must lie in (0, 1/4)")
    r_max = 1.0 - binary_entropy(2.0 * eps)

    def beta(R):
        R = np.asarray(R, dtype=float)
        x = 0.5 * _inv_entropy_vec(1.0 - np.clip(R, 0.0, 1.0))
        val = np.where(x > eps, _kl_vec(x, eps), 0.0)
        return _as_output(np.where(R >= r_max, 0.0, val))

    return ThresholdResult(r_max, beta, "tighter-BSC")


def epsilon_star() -> float:
    """Crossover below which the BSC rate threshold ``1 - H(2 eps)`` beats the union bound's."""

    def gap(eps: float) -> float:
        return binary_entropy(2.0 * eps) - 2.0 * math.log2(math.sqrt(eps) + math.sqrt(1.0 - eps))

    return _bisect(gap, 1e-6, 0.25)


def sahai_check(lam: float, m: int, n: int, R: float, beta: float) -> bool:
    """Rate and exponent conditions for stabilizing the ``m``-th moment of a scalar plant with gain ``lam``."""
    if abs(lam) <= 1.0:
        raise ValueError("plant must be unstable, |lambda| > 1")
    if m < 1:
        raise ValueError("moment order must be >= 1")
    need = math.log2(abs(lam)) / n
    return R > need and beta > m * need


@dataclass(frozen=True)
class RegionPoint:
    channel_param: float
    lambda_max_nth_root: float
    R: float
    beta: float
    provenance: str

    @property
    def log2_lambda_max_per_use(self) -> float:
        return math.log2(self.lambda_max_nth_root)


def _best_on_grid(th: ThresholdResult, m: int, npoints: int) -> tuple[float, float, float]:
    if th.R_max <= 0.0:
        return 0.0, 0.0, 0.0
    rates = np.linspace(0.0, th.R_max, npoints + 2)[1:-1]
    betas = np.atleast_1d(th.beta_of_R(rates))
    vals = np.minimum(rates, betas / m)
    i = int(np.argmax(vals))
    return float(vals[i]), float(rates[i]), float(betas[i])


def stabilizable_lambda_max(
    channel: ChannelModel,
    p: float = 0.5,
    n: int = 1,
    m: int = 1,
    use_tighter: bool = False,
    npoints: int = R_GRID_POINTS,
) -> RegionPoint:
    """Largest ``|lambda|`` (reported as ``|lambda_max|**(1/n)``) stabilizable with the threshold codes.

    Maximizes ``min(n R, n beta(R) / m)`` over ``npoints`` rates strictly
    inside ``(0, R_max)``.  With ``use_tighter`` on a BSC below
    ``epsilon_star()``, the tighter thresholds are used when they do better.
    """
    if channel.epsilon == 0.0:
        return RegionPoint(0.0, 2.0, 1.0, math.inf, "noiseless")
    zeta = bhattacharyya(channel)
    candidates = [(_best_on_grid(union_bound_thresholds(zeta, p), m, npoints), "union-bound")]
    if use_tighter and channel.kind is ChannelKind.BSC and channel.epsilon < epsilon_star():
        th = tighter_bsc_thresholds(channel.epsilon)
        candidates.append((_best_on_grid(th, m, npoints), th.provenance))
    (val, R, b), prov = max(candidates, key=lambda c: c[0][0])
    log2_lam = n * max(val, 0.0)
    return RegionPoint(channel.epsilon, 2.0 ** (log2_lam / n), R, b, prov)


def region_sweep(
    kind: ChannelKind | str,
    params: Iterable[float],
    p: float = 0.5,
    n: int = 1,
    m: int = 2,
    use_tighter: bool = False,
    npoints: int = R_GRID_POINTS,
) -> list[RegionPoint]:
    kind = ChannelKind(kind)
    return [
        stabilizable_lambda_max(ChannelModel(kind, float(e)), p, n, m, use_tighter, npoints)
        for e in params
    ]
