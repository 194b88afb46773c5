"""Seed management.

All randomness in the toolkit flows from one user-facing seed, split into
independent per-stage streams by a fixed text label. Splitting is a hash of
(seed, label), so adding a stage never perturbs the streams of the others.
"""

import hashlib

import numpy as np

__all__ = ["stage_seed", "stage_rng"]


def stage_seed(seed: int, label: str) -> int:
    """Derive a 64-bit child seed for a named stage."""
    h = hashlib.sha256()
    h.update(int(seed).to_bytes(8, "little", signed=True))
    h.update(label.encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "little")


def stage_rng(seed: int, label: str) -> np.random.Generator:
    """A numpy Generator seeded for one stage of a run."""
    return np.random.default_rng(stage_seed(seed, label))
