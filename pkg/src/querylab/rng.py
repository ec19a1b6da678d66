"""Reproducible randomness.

Every trial draws from its own counter-based Philox stream keyed by
``hash64(seed, tag, index)``, so any single trial can be regenerated in
isolation.  Gaussians come from Box-Muller on the stream's uniforms.
"""
from __future__ import annotations

import hashlib
import os

import numpy as np

SEED_ENV = "QUERYLAB_SEED"


def hash64(seed: int, tag: str, index: int) -> int:
    """64-bit key derived with BLAKE2b from ``"{seed}:{tag}:{index}"``."""
    digest = hashlib.blake2b(f"{seed}:{tag}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def generator(key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=key))


def trial_rng(seed: int, tag: str, index: int) -> np.random.Generator:
    return generator(hash64(seed, tag, index))


def as_rng(source) -> np.random.Generator:
    """Accept a Generator, an integer seed, or ``None`` (falls back to $QUERYLAB_SEED, then 0)."""
    if isinstance(source, np.random.Generator):
        return source
    if source is None:
        source = int(os.environ.get(SEED_ENV, "0"))
    return generator(int(source))


def standard_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard Gaussians by the Box-Muller transform."""
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    n = int(np.prod(shape))
    pairs = (n + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1]
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:n]
    return z.reshape(shape)


def unit_sphere(rng: np.random.Generator, d: int, basis=None) -> np.ndarray:
    """Uniform draw on the unit sphere, optionally restricted to ``span(basis)``.

    ``basis`` is a ``(d, k)`` matrix with orthonormal columns.
    """
    if basis is None:
        g = standard_normal(rng, d)
    else:
        basis = np.asarray(basis, dtype=float)
        g = basis @ standard_normal(rng, basis.shape[1])
    return g / np.linalg.norm(g)
