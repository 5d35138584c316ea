"""Reproducible random streams.

Streams are built on the Philox counter-based generator, keyed by a SHA-256
hash of ``(seed, path)`` where ``path`` is a tuple of purpose tags and trial
indices. Two streams with different paths are independent; the same
``(seed, path)`` always reproduces the same draws, on any platform. Gaussian
variates go through the inverse normal CDF so they are a pure function of the
underlying uniforms (no rejection steps, no platform-dependent shortcuts).

A stream is single-owner: hand it to exactly one consumer. To give independent
randomness to sub-tasks, derive children with :meth:`RngStream.substream`.
"""

from __future__ import annotations

import hashlib

import numpy as np
from scipy.special import ndtri

_TWO53 = 1 << 53


def _philox_key(seed: int, path: tuple) -> np.ndarray:
    material = repr((int(seed), tuple(str(p) for p in path))).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return np.frombuffer(digest[:16], dtype=np.uint64).copy()


class RngStream:
    """One independent, reproducible stream of random variates.

    Parameters
    ----------
    seed : int
        Non-negative experiment seed.
    path : tuple, optional
        Purpose tags / indices identifying this stream, e.g.
        ``("trial-samples", 17)``. Defaults to the root path ``()``.
    """

    def __init__(self, seed: int, path: tuple = ()):
        if seed < 0:
            raise ValueError("seed must be a non-negative integer")
        self.seed = int(seed)
        self.path = tuple(path)
        self._gen = np.random.Generator(np.random.Philox(key=_philox_key(seed, self.path)))

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"RngStream(seed={self.seed}, path={self.path!r})"

    def substream(self, *tags) -> "RngStream":
        """Derive an independent child stream; does not consume from this one."""
        return RngStream(self.seed, self.path + tags)

    def uniform(self, count: int) -> np.ndarray:
        """Uniforms on the open interval (0, 1), each with 53-bit resolution."""
        raw = self._gen.integers(1, _TWO53, size=int(count), dtype=np.int64)
        return raw / _TWO53

    def normal(self, count: int, scale: float = 1.0) -> np.ndarray:
        """Centered Gaussians via the inverse CDF of the uniforms."""
        return ndtri(self.uniform(count)) * scale

    def integers(self, low: int, high: int, count: int) -> np.ndarray:
        return self._gen.integers(low, high, size=int(count))
