"""Numba kernels for the stochastic layout optimizer.

The sequential kernel is bit-reproducible for a fixed seed. The parallel
kernel races on the embedding array (like reference force-layout code) and
carries no determinism guarantee.
"""

import numpy as np
from numba import njit, prange, uint64

_SPLITMIX_GAMMA = uint64(0x9E3779B97F4A7C15)
_MIX1 = uint64(0xBF58476D1CE4E5B9)
_MIX2 = uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _next_u64(state):
    # splitmix64 step
    state = state + _SPLITMIX_GAMMA
    z = state
    z = (z ^ (z >> uint64(30))) * _MIX1
    z = (z ^ (z >> uint64(27))) * _MIX2
    z = z ^ (z >> uint64(31))
    return state, z


@njit(cache=True, inline="always")
def _clip(val):
    if val > 4.0:
        return 4.0
    if val < -4.0:
        return -4.0
    return val


@njit(cache=True, inline="always")
def _process_edge(
    embedding, head, tail, e, epoch, alpha, a, b, gamma,
    epochs_per_sample, epoch_of_next_sample,
    epochs_per_negative_sample, epoch_of_next_negative_sample,
    n_vertices, dim, state,
):
    j = head[e]
    k = tail[e]
    dist_squared = 0.0
    for d in range(dim):
        diff = embedding[j, d] - embedding[k, d]
        dist_squared += diff * diff
    if dist_squared > 0.0:
        grad_coeff = (-2.0 * a * b * dist_squared ** (b - 1.0)) / (
            a * dist_squared ** b + 1.0
        )
    else:
        grad_coeff = 0.0
    for d in range(dim):
        grad_d = _clip(grad_coeff * (embedding[j, d] - embedding[k, d]))
        embedding[j, d] += grad_d * alpha
        embedding[k, d] -= grad_d * alpha
    epoch_of_next_sample[e] += epochs_per_sample[e]

    n_neg_samples = int(
        (epoch - epoch_of_next_negative_sample[e]) / epochs_per_negative_sample[e]
    )
    for _ in range(n_neg_samples):
        state, z = _next_u64(state)
        kneg = int(z % uint64(n_vertices))
        if kneg == j:
            continue
        dist_squared = 0.0
        for d in range(dim):
            diff = embedding[j, d] - embedding[kneg, d]
            dist_squared += diff * diff
        if dist_squared <= 0.0:
            # exactly coincident points carry no repulsion direction; they
            # stay stacked (degenerate corpora keep a single dense cluster)
            continue
        grad_coeff = (2.0 * gamma * b) / (
            (0.001 + dist_squared) * (a * dist_squared ** b + 1.0)
        )
        for d in range(dim):
            grad_d = _clip(grad_coeff * (embedding[j, d] - embedding[kneg, d]))
            embedding[j, d] += grad_d * alpha
    epoch_of_next_negative_sample[e] += (
        n_neg_samples * epochs_per_negative_sample[e]
    )
    return state


@njit(cache=True)
def optimize_layout_sequential(
    embedding, head, tail, epochs_per_sample,
    n_epochs, a, b, gamma, negative_sample_rate, initial_alpha, seed,
):
    n_edges = head.shape[0]
    n_vertices = embedding.shape[0]
    dim = embedding.shape[1]
    epoch_of_next_sample = epochs_per_sample.copy()
    epochs_per_negative_sample = epochs_per_sample / negative_sample_rate
    epoch_of_next_negative_sample = epochs_per_negative_sample.copy()
    state = uint64(seed)
    for epoch in range(n_epochs):
        alpha = initial_alpha * (1.0 - epoch / n_epochs)
        for e in range(n_edges):
            if epoch_of_next_sample[e] <= epoch:
                state = _process_edge(
                    embedding, head, tail, e, epoch, alpha, a, b, gamma,
                    epochs_per_sample, epoch_of_next_sample,
                    epochs_per_negative_sample, epoch_of_next_negative_sample,
                    n_vertices, dim, state,
                )


@njit(cache=True, parallel=True)
def optimize_layout_parallel(
    embedding, head, tail, epochs_per_sample,
    n_epochs, a, b, gamma, negative_sample_rate, initial_alpha, seed,
):
    n_edges = head.shape[0]
    n_vertices = embedding.shape[0]
    dim = embedding.shape[1]
    epoch_of_next_sample = epochs_per_sample.copy()
    epochs_per_negative_sample = epochs_per_sample / negative_sample_rate
    epoch_of_next_negative_sample = epochs_per_negative_sample.copy()
    for epoch in range(n_epochs):
        alpha = initial_alpha * (1.0 - epoch / n_epochs)
        for e in prange(n_edges):
            if epoch_of_next_sample[e] <= epoch:
                state = uint64(seed) ^ (uint64(epoch) * uint64(n_edges) + uint64(e))
                _process_edge(
                    embedding, head, tail, e, epoch, alpha, a, b, gamma,
                    epochs_per_sample, epoch_of_next_sample,
                    epochs_per_negative_sample, epoch_of_next_negative_sample,
                    n_vertices, dim, state,
                )


def run_layout(embedding, head, tail, epochs_per_sample, n_epochs, a, b,
               gamma, negative_sample_rate, initial_alpha, seed, parallel=False):
    kernel = optimize_layout_parallel if parallel else optimize_layout_sequential
    kernel(
        embedding,
        np.ascontiguousarray(head, dtype=np.int64),
        np.ascontiguousarray(tail, dtype=np.int64),
        np.ascontiguousarray(epochs_per_sample, dtype=np.float64),
        int(n_epochs), float(a), float(b), float(gamma),
        int(negative_sample_rate), float(initial_alpha), np.uint64(seed),
    )
    return embedding
