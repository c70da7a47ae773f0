"""Deterministic counter-based random streams.

Every sampler takes an integer seed and derives per-replica (or per-vertex)
substreams from it with Philox, so replica-parallel runs aggregate to the same
result regardless of scheduling.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "substream_uniforms"]


def stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, *key)."""
    ss = np.random.SeedSequence([int(seed)] + [int(k) for k in key])
    return np.random.Generator(np.random.Philox(seed=ss))


def substream_uniforms(seed: int, replicas: int, width: int, *key: int) -> np.ndarray:
    """(replicas, width) uniforms; row r is replica r's private stream slice."""
    return stream(seed, *key).random((replicas, width))
