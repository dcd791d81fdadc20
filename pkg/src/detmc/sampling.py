"""Seeded random sources: Gaussian vectors, unit-sphere directions, chi radii.

Reproducibility contract: every draw is a pure function of ``(seed,
stream_id)``.  The generator is numpy's PCG64 keyed by
``SeedSequence(entropy=seed, spawn_key=(stream_id,))``; distinct stream ids
give statistically independent substreams, which is how the estimators hand
one stream to each parallel worker.  Gaussian variates come from numpy's
ziggurat (``Generator.standard_normal``); both choices are fixed for this
release, since changing either silently changes every seeded result.

Uniform sphere directions are normalized Gaussian vectors.  This matches the
polar decomposition x = s * r (direction times chi-distributed radius) that
the sphere estimator is derived from, and is dimension-generic.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "RngStream",
    "gaussian_vector",
    "gaussian_matrix",
    "unit_sphere",
    "unit_sphere_many",
    "chi_sample",
    "log_density_std_gaussian",
]

# norms below this are resampled rather than divided by; the probability of
# an n-dimensional Gaussian landing this close to the origin is ~1e-150^n
_DEGENERATE_NORM = 1e-150


class RngStream:
    """Single-owner random stream identified by (seed, stream_id).

    May be handed between threads but never shared concurrently; create one
    stream per worker with distinct ``stream_id`` values instead.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def gaussian_vector(rng: RngStream, n: int) -> np.ndarray:
    """n iid standard normal draws."""
    if n < 1:
        raise ValueError("dimension must be positive")
    return rng.generator.standard_normal(n)


def gaussian_matrix(rng: RngStream, k: int, n: int) -> np.ndarray:
    """(k, n) block of iid standard normals.

    Row i equals the i-th of k consecutive :func:`gaussian_vector` calls, so
    batched and per-vector callers consume the stream identically.
    """
    if k < 0 or n < 1:
        raise ValueError("need k >= 0 draws of positive dimension")
    return rng.generator.standard_normal((k, n))


def unit_sphere(rng: RngStream, n: int) -> np.ndarray:
    """One vector uniform on the unit sphere S^{n-1}."""
    return unit_sphere_many(rng, 1, n)[0]


def unit_sphere_many(rng: RngStream, k: int, n: int) -> np.ndarray:
    """(k, n) block of independent uniform unit-sphere samples."""
    g = gaussian_matrix(rng, k, n)
    norms = np.linalg.norm(g, axis=1)
    while (bad := np.flatnonzero(norms < _DEGENERATE_NORM)).size:
        for i in bad:
            g[i] = gaussian_vector(rng, n)
        norms[bad] = np.linalg.norm(g[bad], axis=1)
    return g / norms[:, np.newaxis]


def chi_sample(rng: RngStream, n: int) -> float:
    """Chi(n) draw, realized directly as the norm of an n-dim Gaussian."""
    return float(np.linalg.norm(gaussian_vector(rng, n)))


def log_density_std_gaussian(x: np.ndarray) -> np.ndarray | float:
    """Standard-normal log-density -(n/2) log(2 pi) - ||x||^2 / 2.

    Accepts a single vector or a (k, n) batch of row vectors; the vector
    axis is the last one.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    out = -0.5 * n * math.log(2.0 * math.pi) - 0.5 * np.sum(x * x, axis=-1)
    return float(out) if out.ndim == 0 else out
