"""Counter-based random streams keyed by (seed, player, channel).

Every random draw consumed during a run is addressable as
``stream(seed, player, channel)[iteration]``: the value used at iteration k
never depends on what happened at earlier iterations.  This makes trajectories
replayable and, crucially, lets two runs that share a seed (e.g. a coupled
pair of adjacent games) consume identical trigger and quantizer randomness at
every (player, iteration) even when their trigger decisions diverge.

Philox generators (counter-based) are keyed through deterministic
SeedSequence spawn keys, so streams for different players and channels are
statistically independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CHANNEL_INIT",
    "CHANNEL_NOISE",
    "CHANNEL_QUANTIZER",
    "CHANNEL_TRIGGER",
    "RunStreams",
    "channel_uniforms",
    "laplace_from_uniform",
    "uniform_initials",
]

CHANNEL_TRIGGER = 0
CHANNEL_QUANTIZER = 1
CHANNEL_NOISE = 2
CHANNEL_INIT = 3


def channel_uniforms(seed: int, player: int, channel: int, count: int) -> np.ndarray:
    """Uniform [0,1) draws for one (seed, player, channel) stream; entry k is
    the draw reserved for iteration k."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(player), int(channel)))
    gen = np.random.Generator(np.random.Philox(ss))
    return gen.random(count)


@dataclass(frozen=True, eq=False)
class RunStreams:
    """All pre-drawn randomness for one run: arrays of shape (horizon, n)."""

    seed: int
    trigger: np.ndarray
    quantizer: np.ndarray
    noise: np.ndarray | None

    @classmethod
    def for_run(
        cls, seed: int, n_players: int, horizon: int, with_noise: bool = False
    ) -> "RunStreams":
        def block(channel: int) -> np.ndarray:
            cols = [
                channel_uniforms(seed, i, channel, horizon) for i in range(n_players)
            ]
            return np.column_stack(cols)

        return cls(
            seed=int(seed),
            trigger=block(CHANNEL_TRIGGER),
            quantizer=block(CHANNEL_QUANTIZER),
            noise=block(CHANNEL_NOISE) if with_noise else None,
        )


def uniform_initials(seed: int, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Per-player uniform initial decisions drawn from the init channel."""
    draws = np.array(
        [channel_uniforms(seed, i, CHANNEL_INIT, 1)[0] for i in range(lower.size)]
    )
    return lower + (upper - lower) * draws


def laplace_from_uniform(u: float, scale: float) -> float:
    """Inverse-CDF Laplace(0, scale) sample from a uniform [0,1) draw."""
    centered = u - 0.5
    tail = max(1.0 - 2.0 * abs(centered), 1e-300)
    mag = -scale * np.log(tail)
    return float(-mag if centered < 0.0 else mag)
