"""Bayesian optimization of the four clustering hyperparameters.

A Gaussian-process surrogate (isotropic Matern-5/2, hyperparameters picked
by marginal likelihood on a fixed log grid) drives expected-improvement
proposals over Halton candidates. The loop itself is sequential: every
proposal conditions on all earlier trials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import stage_rng

__all__ = [
    "PARAM_NAMES",
    "SearchSpace",
    "Trial",
    "GpSurrogate",
    "gp_fit",
    "gp_posterior",
    "expected_improvement",
    "propose_next",
    "optimize",
    "halton_point",
]

PARAM_NAMES = ("n_neighbors", "n_components", "min_cluster_size", "min_samples")
_HALTON_BASES = (2, 3, 5, 7)
FAILED_SCORE = -1.0  # NPMI floor


@dataclass(frozen=True)
class SearchSpace:
    """Inclusive integer bounds for the four pipeline parameters."""

    n_neighbors: tuple[int, int] = (5, 50)
    n_components: tuple[int, int] = (2, 20)
    min_cluster_size: tuple[int, int] = (5, 100)
    min_samples: tuple[int, int] = (1, 100)

    def __post_init__(self):
        for name in PARAM_NAMES:
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: low bound {lo} exceeds high bound {hi}")

    def bounds(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in PARAM_NAMES], dtype=float)

    def clamp(self, params: dict[str, float]) -> dict[str, int]:
        """Round/limit to bounds and enforce min_samples <= min_cluster_size."""
        out = {}
        for name in PARAM_NAMES:
            lo, hi = getattr(self, name)
            out[name] = int(min(max(int(round(params[name])), lo), hi))
        out["min_samples"] = min(out["min_samples"], out["min_cluster_size"])
        return out

    def from_unit(self, u: np.ndarray) -> dict[str, int]:
        b = self.bounds()
        raw = b[:, 0] + np.asarray(u, dtype=float) * (b[:, 1] - b[:, 0])
        return self.clamp(dict(zip(PARAM_NAMES, raw)))

    def to_unit(self, params: dict[str, int]) -> np.ndarray:
        b = self.bounds()
        vals = np.array([params[name] for name in PARAM_NAMES], dtype=float)
        span = np.where(b[:, 1] > b[:, 0], b[:, 1] - b[:, 0], 1.0)
        return np.clip((vals - b[:, 0]) / span, 0.0, 1.0)

    def contains(self, params: dict[str, int]) -> bool:
        return all(
            getattr(self, name)[0] <= params[name] <= getattr(self, name)[1]
            for name in PARAM_NAMES
        )


@dataclass
class Trial:
    index: int
    params: dict[str, int]
    score: float
    failed: bool = False

    def key(self) -> tuple[int, ...]:
        return tuple(self.params[name] for name in PARAM_NAMES)


@dataclass
class GpSurrogate:
    x: np.ndarray  # (t, 4) observed points in the unit cube
    y_raw: np.ndarray  # (t,) original scores
    y_mean: float
    y_std: float
    length_scale: float
    signal_variance: float
    jitter: float
    chol: np.ndarray = field(repr=False)  # lower Cholesky of K
    alpha: np.ndarray = field(repr=False)  # K^-1 y (standardized)

    def standardized(self, value: float) -> float:
        return (value - self.y_mean) / self.y_std


def _matern52(dist: np.ndarray, length_scale: float) -> np.ndarray:
    r = np.sqrt(5.0) * dist / length_scale
    return (1.0 + r + r * r / 3.0) * np.exp(-r)


def gp_fit(trials: list[Trial], space: SearchSpace,
           jitter: float = 1e-6) -> GpSurrogate:
    """Fit the surrogate to finite-scored trials.

    Length scale in [0.05, 2] and signal variance in [0.1, 10] x var(y)
    maximize the marginal likelihood over a fixed 16x16 log grid (scores
    standardized first). If the chosen kernel matrix is not positive
    definite the jitter escalates tenfold, up to 1e-2, before erroring.
    """
    finite = [t for t in trials if math.isfinite(t.score)]
    if len(finite) < 2:
        raise ValueError("need at least 2 trials with finite scores")
    x = np.array([space.to_unit(t.params) for t in finite])
    y_raw = np.array([t.score for t in finite])
    y_mean = float(np.mean(y_raw))
    y_std = float(np.std(y_raw))
    if y_std <= 0:
        y_std = 1.0
    y = (y_raw - y_mean) / y_std
    var_y = float(np.var(y))
    if var_y <= 0:
        var_y = 1.0

    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    n = len(y)
    ls_grid = np.exp(np.linspace(math.log(0.05), math.log(2.0), 16))
    sv_grid = np.exp(np.linspace(math.log(0.1 * var_y), math.log(10.0 * var_y), 16))

    current_jitter = float(jitter)
    while True:
        best = None
        for ls in ls_grid:
            # one eigendecomposition serves the whole signal-variance sweep:
            # K = sv*C + jitter*I shares C's eigenvectors
            evals, evecs = np.linalg.eigh(_matern52(dist, ls))
            proj = evecs.T @ y
            for sv in sv_grid:
                shifted = sv * evals + current_jitter
                if np.min(shifted) <= 0:
                    continue
                log_ml = (
                    -0.5 * float(np.sum(proj * proj / shifted))
                    - 0.5 * float(np.sum(np.log(shifted)))
                    - 0.5 * n * math.log(2.0 * math.pi)
                )
                if best is None or log_ml > best[0]:
                    best = (log_ml, float(ls), float(sv))
        if best is not None:
            _, ls, sv = best
            k = sv * _matern52(dist, ls) + current_jitter * np.eye(n)
            try:
                chol = np.linalg.cholesky(k)
            except np.linalg.LinAlgError:
                best = None
        if best is not None:
            break
        if current_jitter >= 1e-2:
            raise RuntimeError("kernel matrix not positive definite at jitter 1e-2")
        current_jitter = min(current_jitter * 10.0, 1e-2)

    alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, y))
    return GpSurrogate(
        x=x, y_raw=y_raw, y_mean=y_mean, y_std=y_std,
        length_scale=ls, signal_variance=sv,
        jitter=current_jitter, chol=chol, alpha=alpha,
    )


def gp_posterior(gp: GpSurrogate, x: np.ndarray):
    """Posterior (mean, variance) at unit-cube point(s), in score units."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    diff = gp.x[None, :, :] - pts[:, None, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    k_star = gp.signal_variance * _matern52(dist, gp.length_scale)
    mean_std = k_star @ gp.alpha
    v = np.linalg.solve(gp.chol, k_star.T)
    var_std = np.maximum(gp.signal_variance - np.einsum("ij,ij->j", v, v), 0.0)
    mean = mean_std * gp.y_std + gp.y_mean
    var = var_std * gp.y_std**2
    if np.ndim(x) == 1:
        return float(mean[0]), float(var[0])
    return mean, var


def expected_improvement(mean, variance, best: float):
    """EI in maximization form: sigma*(z*Phi(z) + phi(z)), z = (mean-best)/sigma;
    degenerates to max(mean - best, 0) at sigma = 0."""
    mean_arr = np.atleast_1d(np.asarray(mean, dtype=float))
    var_arr = np.atleast_1d(np.asarray(variance, dtype=float))
    sigma = np.sqrt(np.maximum(var_arr, 0.0))
    out = np.maximum(mean_arr - best, 0.0).astype(float)
    pos = sigma > 0
    if np.any(pos):
        z = (mean_arr[pos] - best) / sigma[pos]
        phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        cdf = 0.5 * (1.0 + np.array([math.erf(v / math.sqrt(2.0)) for v in z]))
        out[pos] = sigma[pos] * (z * cdf + phi)
    if np.ndim(mean) == 0 and np.ndim(variance) == 0:
        return float(out[0])
    return out


def halton_point(index: int, dim: int = 4) -> np.ndarray:
    """The index-th Halton point (bases 2, 3, 5, 7); index >= 1."""
    return halton_block(index, 1, dim)[0]


def halton_block(start: int, count: int, dim: int = 4) -> np.ndarray:
    """Halton points for indices start .. start + count - 1 (start >= 1)."""
    indices = np.arange(start, start + count, dtype=np.int64)
    out = np.zeros((count, dim))
    for d in range(dim):
        base = _HALTON_BASES[d]
        f = 1.0
        work = indices.copy()
        value = np.zeros(count)
        while work.max(initial=0) > 0:
            f /= base
            value += f * (work % base)
            work //= base
        out[:, d] = value
    return out


def propose_next(gp: GpSurrogate, space: SearchSpace,
                 rng: np.random.Generator,
                 observed: set[tuple[int, ...]] | None = None,
                 n_candidates: int = 1024,
                 start_index: int = 1) -> dict[str, int]:
    """Best-EI candidate among the next n_candidates Halton points.

    The Halton sequence continues across calls via start_index, so repeated
    proposals sample ever finer positions. Ties keep the earliest candidate;
    candidates rounding onto observed integer points are skipped; if all of
    them repeat, a uniformly random unobserved point is drawn instead.
    """
    if observed is None:
        observed = {
            tuple(space.from_unit(row)[name] for name in PARAM_NAMES)
            for row in gp.x
        }
    cands = halton_block(start_index, n_candidates)
    mean, var = gp_posterior(gp, cands)
    ei = expected_improvement(mean, var, float(np.max(gp.y_raw)))
    order = np.lexsort((np.arange(len(ei)), -ei))
    for idx in order:
        params = space.from_unit(cands[idx])
        if tuple(params[name] for name in PARAM_NAMES) not in observed:
            return params
    for _ in range(100_000):
        params = space.from_unit(rng.random(len(PARAM_NAMES)))
        if tuple(params[name] for name in PARAM_NAMES) not in observed:
            return params
    raise RuntimeError("search space exhausted")


def optimize(objective, space: SearchSpace, budget: int = 150,
             n_init: int = 10, seed: int = 42,
             jitter: float = 1e-6,
             history: list[Trial] | None = None) -> tuple[Trial, list[Trial]]:
    """Quasi-random warmup then EI proposals until the budget is spent.

    A failing objective scores its trial at the NPMI floor (-1) and marks
    it failed; if every trial fails the optimization errors out. Passing an
    existing history resumes the loop after its last trial. Returns the
    best trial and the full history (length == budget).
    """
    if not budget >= n_init >= 2:
        raise ValueError("need budget >= n_init >= 2")
    rng = stage_rng(seed, "hyperopt:propose")
    history = list(history) if history else []
    observed: set[tuple[int, ...]] = {t.key() for t in history}

    def run(params: dict[str, int]) -> Trial:
        index = len(history)
        try:
            score = float(objective(params))
            if not math.isfinite(score):
                raise ValueError(f"objective returned non-finite score {score}")
            trial = Trial(index=index, params=params, score=score)
        except Exception:
            trial = Trial(index=index, params=params, score=FAILED_SCORE, failed=True)
        history.append(trial)
        observed.add(trial.key())
        return trial

    for i in range(len(history), min(n_init, budget)):
        run(space.from_unit(halton_point(i + 1)))
    cursor = n_init + 1
    while len(history) < budget:
        gp = gp_fit(history, space, jitter=jitter)
        proposal = propose_next(gp, space, rng, observed=set(observed),
                                start_index=cursor)
        cursor += 1024
        run(proposal)

    successes = [t for t in history if not t.failed]
    if not successes:
        raise RuntimeError("objective failed on every trial")
    best = max(successes, key=lambda t: (t.score, -t.index))
    return best, history
