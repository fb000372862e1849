"""SplitMix64 generator used for every pseudo-random choice in the lab.

state <- state + 0x9E3779B97F4A7C15 (mod 2^64)
z <- (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
z <- (z ^ (z >> 27)) * 0x94D049BB133111EB
out <- z ^ (z >> 31)
uniform double in [0, 1) = (out >> 11) * 2^-53
"""
from __future__ import annotations

from typing import Iterator

MASK = (1 << 64) - 1


def splitmix64(seed: int) -> Iterator[int]:
    state = seed & MASK
    while True:
        state = (state + 0x9E3779B97F4A7C15) & MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        yield z ^ (z >> 31)


def uniforms(seed: int) -> Iterator[float]:
    for z in splitmix64(seed):
        yield (z >> 11) * 2.0**-53


def sample_box(count: int, low, high, seed: int) -> list[list[float]]:
    """``count`` points uniform in the box; coordinates drawn in order per point."""
    gen = uniforms(seed)
    return [[lo + next(gen) * (hi - lo) for lo, hi in zip(low, high)] for _ in range(count)]
