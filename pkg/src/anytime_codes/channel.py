"""Memoryless binary-input channels (BEC and BSC) with seeded sampling.

Channel outputs are ``int8`` arrays holding 0, 1 or :data:`ERASED`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = ["ERASED", "ChannelKind", "ChannelModel", "transmit", "bhattacharyya", "derive_seed"]

ERASED = -1


class ChannelKind(str, Enum):
    BEC = "bec"
    BSC = "bsc"


@dataclass(frozen=True)
class ChannelModel:
    kind: ChannelKind
    epsilon: float

    def __post_init__(self):
        kind = ChannelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        upper = 1.0 if kind is ChannelKind.BEC else 0.5
        if not 0.0 <= self.epsilon < upper:
            raise ValueError(f"{kind.value} parameter must lie in [0, {upper}), got {self.epsilon}")

    @classmethod
    def bec(cls, epsilon: float) -> "ChannelModel":
        return cls(ChannelKind.BEC, epsilon)

    @classmethod
    def bsc(cls, epsilon: float) -> "ChannelModel":
        return cls(ChannelKind.BSC, epsilon)


def transmit(ch: ChannelModel, c, rng: np.random.Generator) -> np.ndarray:
    """Pass one block through the channel.

    Exactly ``len(c)`` uniform variates are drawn per call, so a trace depends
    only on the seed and the number of bits sent, not on how they are batched.
    """
    bits = np.asarray(c, dtype=np.int8)
    u = rng.random(bits.shape[0])
    hit = u < ch.epsilon
    if ch.kind is ChannelKind.BEC:
        return np.where(hit, np.int8(ERASED), bits).astype(np.int8)
    return (bits ^ hit.astype(np.int8)).astype(np.int8)


def bhattacharyya(ch: ChannelModel) -> float:
    """Pairwise ML error bound constant: ``eps`` for the BEC, ``2 sqrt(eps(1-eps))`` for the BSC."""
    if ch.kind is ChannelKind.BEC:
        return float(ch.epsilon)
    return 2.0 * math.sqrt(ch.epsilon * (1.0 - ch.epsilon))


def derive_seed(base_seed: int, index: int) -> int:
    """Per-trial 64-bit seed: numpy ``SeedSequence([base_seed, index])`` hashed to one word."""
    state = np.random.SeedSequence([int(base_seed), int(index)]).generate_state(1, np.uint64)
    return int(state[0])
