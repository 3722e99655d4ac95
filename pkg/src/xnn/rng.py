"""Deterministic random source.

All randomness in the package flows through :class:`SeededRng`, which wraps
the counter-based Philox bit generator: a given seed always reproduces the
same stream, independent of anything else happening in the process.  Normal
variates are produced with the Box-Muller transform of two uniforms instead
of numpy's ziggurat sampler, so the sampling algorithm itself is simple and
portable.
"""
from __future__ import annotations

import math

import numpy as np


class SeededRng:
    """Seeded stream of uniforms, normals, and permutations."""

    def __init__(self, seed: int):
        if not 0 <= int(seed) < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
        self._gen = np.random.Generator(np.random.Philox(key=int(seed)))

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None) -> np.ndarray:
        # gen.random() is the raw counter output scaled into [0, 1)
        return low + (high - low) * self._gen.random(size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None) -> np.ndarray:
        scalar = size is None
        shape = () if scalar else (size if isinstance(size, tuple) else (int(size),))
        n = int(np.prod(shape)) if not scalar else 1
        pairs = (n + 1) // 2
        # 1 - u maps [0, 1) onto (0, 1], keeping the log argument positive
        r = np.sqrt(-2.0 * np.log(1.0 - self._gen.random(pairs)))
        theta = 2.0 * math.pi * self._gen.random(pairs)
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        out = loc + scale * z
        return float(out[0]) if scalar else out.reshape(shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(int(n))
