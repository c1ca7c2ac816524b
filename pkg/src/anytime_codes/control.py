"""Scalar unstable plant driven over a coded erasure channel.

Plant ``x_{t+1} = lam x_t + u_t + w_t`` with measurement ``y_t = x_t + v_t``,
``w_t ~ U[-W/2, W/2]`` and ``v_t ~ U[-V/2, V/2]``.  The observer quantizes
``y_t`` to a bin label, the label is encoded as the step's message block, and
the controller applies the deadbeat law ``u_t = -lam * xhat_t``.

The controller only trusts labels the decoder has resolved.  Its estimate is
the bin center of the last resolved measurement, pushed forward through the
plant model with the controls it already applied.

Quantizer bins have width ``delta`` and edges at ``delta*(j - L/2)`` for
integer ``j``.  Two labelings are offered:

``static``
    bins ``0 .. L-1`` cover ``[-L delta/2, L delta/2]``; outside measurements
    clamp to the edge bins.
``lattice``
    every bin on the line gets label ``j mod L``; the controller picks the
    bin with that label nearest its own prediction of the measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelKind, ChannelModel, derive_seed, transmit
from .code import CodeParams, StreamEncoder, derive_generator, make_rng, sample_tz
from .decode import DecoderState

__all__ = [
    "PlantParams",
    "QuantizerConfig",
    "SimTrace",
    "quantize",
    "dequantize",
    "sizing",
    "closed_loop_sim",
    "open_loop_sim",
    "random_walk_demo",
    "RandomWalkResult",
    "performance_curve",
    "default_delta",
    "SUP_CAP",
    "TRACE_COLUMNS",
]

SUP_CAP = 1000.0
TRACE_COLUMNS = ("t", "x", "y", "u", "bin", "delay", "xhat", "clamped_flag")
_SIZING_SLACK = 1e-9


@dataclass(frozen=True)
class PlantParams:
    lam: float
    W: float
    V: float
    x0: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if abs(self.lam) <= 1.0:
            raise ValueError("plant gain must satisfy |lambda| > 1")
        if self.W < 0 or self.V < 0:
            raise ValueError("noise widths must be non-negative")


@dataclass(frozen=True)
class QuantizerConfig:
    delta: float
    L: int
    k: int
    mode: str = "static"

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("bin width must be positive")
        if self.L < 1 or 2**self.k < self.L:
            raise ValueError(f"need 1 <= L <= 2^k, got L={self.L}, k={self.k}")
        if self.mode not in ("static", "lattice"):
            raise ValueError(f"unknown quantizer mode {self.mode!r}")

    @property
    def half_range(self) -> float:
        return self.L * self.delta / 2


def _bin_index(y: float, cfg: QuantizerConfig) -> int:
    return math.floor((y + cfg.half_range) / cfg.delta)


def _center(j: int, cfg: QuantizerConfig) -> float:
    return (j + 0.5) * cfg.delta - cfg.half_range


def quantize(y: float, cfg: QuantizerConfig) -> tuple[int, bool]:
    """Bin label of ``y`` and whether ``y`` fell outside ``[-L delta/2, L delta/2)``."""
    j = _bin_index(y, cfg)
    outside = not 0 <= j < cfg.L
    if cfg.mode == "static":
        return min(max(j, 0), cfg.L - 1), outside
    return j % cfg.L, outside


def dequantize(label: int, cfg: QuantizerConfig, prediction: float = 0.0) -> float:
    """Bin center for ``label``; lattice labels resolve to the copy nearest ``prediction``."""
    if not 0 <= label < cfg.L:
        raise ValueError(f"label {label} outside 0..{cfg.L - 1}")
    if cfg.mode == "static":
        return _center(label, cfg)
    j_pred = (prediction + cfg.half_range) / cfg.delta - 0.5
    j = label + cfg.L * round((j_pred - label) / cfg.L)
    return _center(j, cfg)


def sizing(lam: float, W: float, V: float, delta: float, mode: str = "static") -> QuantizerConfig:
    """``L = ceil((V + W + 2|lam| delta) / delta)`` bins and ``k = ceil(log2 L)`` label bits.

    A tiny slack absorbs float error when the ratio is an integer.
    """
    if delta < V or delta <= 0:
        raise ValueError(f"bin width {delta} must be positive and at least the measurement noise width {V}")
    L = max(1, math.ceil((V + W + 2 * abs(lam) * delta) / delta - _SIZING_SLACK))
    k = max(1, math.ceil(math.log2(L)))
    return QuantizerConfig(delta, L, k, mode)


def default_delta(lam: float, W: float, V: float, k: int) -> float:
    """Smallest bin width that fits the sizing rule into ``k`` bits (never below ``V``)."""
    room = 2**k - 2 * abs(lam)
    if room <= 0:
        raise ValueError(f"k={k} bits cannot cover 2|lambda| bins")
    return max(V, (V + W) / room)


def _label_bits(label: int, k: int) -> np.ndarray:
    return np.array([(label >> i) & 1 for i in range(k)], dtype=np.int64)


def _bits_label(bits) -> int:
    return int(sum(int(b) << i for i, b in enumerate(bits)))


@dataclass(frozen=True)
class SimTrace:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    u: np.ndarray
    bin: np.ndarray
    delay: np.ndarray
    xhat: np.ndarray
    clamped: np.ndarray

    @property
    def sup_abs_x(self) -> float:
        return float(np.max(np.abs(self.x)))

    @property
    def clamped_count(self) -> int:
        return int(self.clamped.sum())

    def rows(self) -> list[tuple]:
        return [
            (int(t), float(x), float(y), float(u), int(b), int(d), float(xh), int(c))
            for t, x, y, u, b, d, xh, c in zip(
                self.t, self.x, self.y, self.u, self.bin, self.delay, self.xhat, self.clamped
            )
        ]


def _noise(plant: PlantParams, T: int) -> tuple[np.ndarray, np.ndarray]:
    rng = make_rng(plant.seed)
    w = (rng.random(T) - 0.5) * plant.W
    v = (rng.random(T) - 0.5) * plant.V
    return w, v


class _Controller:
    """Certainty-equivalent deadbeat controller fed by resolved labels."""

    def __init__(self, lam: float, cfg: QuantizerConfig, x0: float, T: int):
        self.lam, self.cfg, self.x0 = lam, cfg, x0
        self.est = np.zeros(T)  # measurement-based estimate of x_tau for resolved tau
        self.u = np.zeros(T)
        self.resolved = 0

    def absorb(self, labels: np.ndarray, upto: int) -> None:
        for tau in range(self.resolved, upto):
            pred = self.x0 if tau == 0 else self.lam * self.est[tau - 1] + self.u[tau - 1]
            self.est[tau] = dequantize(_bits_label(labels[tau]), self.cfg, pred)
        self.resolved = max(self.resolved, upto)

    def estimate(self, t: int) -> float:
        """``xhat_t`` from the last resolved step, propagated with known controls."""
        if self.resolved == 0:
            xh, start = self.x0, 0
        else:
            xh, start = self.est[self.resolved - 1], self.resolved - 1
        for s in range(start, t):
            xh = self.lam * xh + self.u[s]
        return xh


def closed_loop_sim(plant: PlantParams, cfg: QuantizerConfig, code, channel: ChannelModel, T: int, seed: int) -> SimTrace:
    """Run ``T`` steps of the coded loop; ``seed`` drives the channel, ``plant.seed`` the noise.

    ``code`` is a Toeplitz parity check with ``k = cfg.k`` and horizon ``>= T``.
    """
    if code.params.k != cfg.k:
        raise ValueError(f"code carries k={code.params.k} bits, quantizer needs {cfg.k}")
    if code.params.horizon < T:
        raise ValueError(f"code horizon {code.params.horizon} shorter than T={T}")
    if channel.kind is not ChannelKind.BEC:
        raise ValueError("closed loop decoding supports the erasure channel only")
    g = derive_generator(code)
    encoder, decoder = StreamEncoder(g), DecoderState(code, generator=g)
    ctrl = _Controller(plant.lam, cfg, plant.x0, T)
    ch_rng = make_rng(seed)
    w, v = _noise(plant, T)
    cols = {name: np.zeros(T) for name in ("x", "y", "u", "xhat")}
    bins = np.zeros(T, dtype=np.int64)
    delays = np.zeros(T, dtype=np.int64)
    clamped = np.zeros(T, dtype=bool)
    x = plant.x0
    for t in range(T):
        y = x + v[t]
        label, out = quantize(y, cfg)
        z = transmit(channel, encoder.push(_label_bits(label, cfg.k)), ch_rng)
        res = decoder.step(z)
        ctrl.absorb(res.estimates, res.resolved_through)
        xh = ctrl.estimate(t)
        u = -plant.lam * xh
        ctrl.u[t] = u
        cols["x"][t], cols["y"][t], cols["u"][t], cols["xhat"][t] = x, y, u, xh
        bins[t], delays[t], clamped[t] = label, res.delay, out
        x = plant.lam * x + u + w[t]
    return SimTrace(np.arange(T), cols["x"], cols["y"], cols["u"], bins, delays, cols["xhat"], clamped)


def open_loop_sim(plant: PlantParams, T: int) -> SimTrace:
    """Uncontrolled run (``u = 0``) on the same noise draws as :func:`closed_loop_sim`.

    Magnitudes grow like ``|lam|**t``; use ``log2`` of ``sup_abs_x`` for summaries.
    """
    w, v = _noise(plant, T)
    x = np.zeros(T)
    x[0] = plant.x0
    for t in range(1, T):
        x[t] = plant.lam * x[t - 1] + w[t - 1]
    nothing = np.zeros(T, dtype=np.int64)
    return SimTrace(np.arange(T), x, x + v, np.zeros(T), nothing - 1, nothing, np.full(T, np.nan), nothing.astype(bool))


@dataclass(frozen=True)
class RandomWalkResult:
    squared_error: np.ndarray
    """Mean over trials of ``(x_{t+1} - xhat_{t+1|t})**2``, one entry per step."""
    running_mean: np.ndarray
    delays: np.ndarray
    """Decoder delay per trial and step, shape ``(trials, T)``."""
    w: np.ndarray
    """Noise signs per trial and step."""


def random_walk_demo(lam: float, code, channel: ChannelModel, T: int, seed: int, trials: int = 1) -> RandomWalkResult:
    """Open-loop estimation of ``x_{t+1} = lam x_t + w_t`` with ``w_t = +-1`` sent one bit per step.

    The estimate is ``sum_j lam**(t-j) * what_j`` with decoded signs for
    resolved steps and 0 for the rest.  The error is summed term by term
    rather than as ``x - xhat``, which would lose everything to cancellation
    once ``lam**t`` is large.
    """
    if code.params.k != 1:
        raise ValueError("random walk sends one bit per step; need k = 1")
    g = derive_generator(code)
    sq = np.zeros((trials, T))
    delays = np.zeros((trials, T), dtype=np.int64)
    signs = np.zeros((trials, T))
    for i in range(trials):
        rng = make_rng(derive_seed(seed, i))
        bits = rng.integers(0, 2, T)
        w = 2.0 * bits - 1.0
        signs[i] = w
        encoder, decoder = StreamEncoder(g), DecoderState(code, generator=g)
        for t in range(T):
            res = decoder.step(transmit(channel, encoder.push([bits[t]]), rng))
            r = res.resolved_through
            w_hat = 2.0 * res.estimates[:, 0] - 1.0
            wrong = np.flatnonzero(w_hat != w[:r])
            err = float(np.sum((w[wrong] - w_hat[wrong]) * lam ** (t - wrong.astype(float))))
            err += float(np.sum(w[r : t + 1] * lam ** np.arange(t - r, -1, -1.0)))
            sq[i, t] = err * err
            delays[i, t] = res.delay
    mean = sq.mean(axis=0)
    return RandomWalkResult(mean, np.cumsum(mean) / np.arange(1, T + 1), delays, signs)


def performance_curve(
    k_values: Sequence[int],
    plant: PlantParams,
    channel: ChannelModel,
    n: int,
    T: int,
    trials: int,
    seed: int,
    deltas: dict[int, float] | None = None,
    p: float = 0.5,
    mode: str = "static",
) -> dict[int, np.ndarray]:
    """Sorted ``min(sup_t |x_t|, SUP_CAP)`` over ``trials`` random TZ_p codes for each ``k``.

    Trial ``i`` samples its code from ``derive_seed(seed, i)`` and reuses the
    same plant and channel seeds across ``k``, so curves for different rates
    see identical noise.
    """
    out = {}
    for k in k_values:
        delta = (deltas or {}).get(k, default_delta(plant.lam, plant.W, plant.V, k))
        cfg = sizing(plant.lam, plant.W, plant.V, delta, mode)
        if cfg.k > k:
            raise ValueError(f"delta={delta} needs {cfg.k} bits, more than k={k}")
        cfg = QuantizerConfig(cfg.delta, cfg.L, k, mode)
        sups = np.zeros(trials)
        for i in range(trials):
            trial_seed = derive_seed(seed, i)
            code = sample_tz(CodeParams(n, k, T), p, trial_seed)
            pl = PlantParams(plant.lam, plant.W, plant.V, plant.x0, derive_seed(trial_seed, 1))
            trace = closed_loop_sim(pl, cfg, code, channel, T, derive_seed(trial_seed, 2))
            sups[i] = min(trace.sup_abs_x, SUP_CAP)
        out[k] = np.sort(sups)
    return out
