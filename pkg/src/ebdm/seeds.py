"""Seed-stream plumbing.

All randomness in the package flows from a single user-facing integer
seed, expanded into named per-purpose streams (bootstrap, simulation,
counterfactual, generation). Streams use the counter-based Philox
bit generator so draws can be partitioned across workers without
changing results for a fixed seed.
"""

import hashlib

import numpy as np


def stream_seed(seed: int, purpose: str) -> np.random.SeedSequence:
    """Derive a named, reproducible seed stream from a top-level seed.

    The purpose string is hashed (sha256) into extra entropy words, so
    distinct purposes give statistically independent streams and the
    mapping is stable across platforms and runs.
    """
    digest = hashlib.sha256(purpose.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.SeedSequence([int(seed), *words])


def make_rng(seed) -> np.random.Generator:
    """Build a Philox generator from an int seed or a SeedSequence."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(seed))


def spawn_rngs(ss: np.random.SeedSequence, k: int) -> list[np.random.Generator]:
    """Split a stream into k independent child generators (one per task)."""
    return [np.random.Generator(np.random.Philox(child)) for child in ss.spawn(k)]
