"""Monte Carlo engine for replicability experiments.

Work is split into fixed-size chunks of repetitions.  Chunk ``i`` draws
from stream ``i`` of the chunk-splittable generator, so the set of random
draws depends only on (seed, repetitions) and never on the worker count.
Each chunk reduces to small integer count arrays, and those are combined
in chunk order; estimates are therefore reproducible to the byte whether
the run used one thread or many.

The compiled kernel releases the GIL, so threads give real parallelism
when it is available; with the pure kernel the same code runs serially.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .evalues import BayesFactorSpec, null_expectation
from .kernel import (
    CODE_BONFERRONI,
    CODE_E_ARITHMETIC,
    CODE_E_HARMONIC,
    CODE_E_PRODUCT,
    CODE_FISHER,
    CODE_MINIMUM,
    CODE_STOUFFER,
    available_backends,
)
from .models import DEFAULT_SIGMA, STUDIES, EvidencePattern

__all__ = [
    "CHUNK",
    "METHOD_CODES",
    "ExperimentConfig",
    "SimResult",
    "GammaPowerRow",
    "null_kind_for",
    "run_power",
    "relative_power",
    "run_null_ecdf",
    "run_ecdf_curve",
    "gamma_sweep",
]

CHUNK = 1024

METHOD_CODES = {
    "fisher": CODE_FISHER,
    "stouffer": CODE_STOUFFER,
    "minimum": CODE_MINIMUM,
    "bonferroni": CODE_BONFERRONI,
    "e-product": CODE_E_PRODUCT,
    "e-arithmetic": CODE_E_ARITHMETIC,
    "e-harmonic": CODE_E_HARMONIC,
}

_E_CODE_MIN = CODE_E_PRODUCT


def null_kind_for(pattern: EvidencePattern) -> str:
    """Null family backing the e-value pipeline for this pattern.

    A pattern with any strictly negative effect level needs the composite
    null (effects may sit below zero); otherwise the simple null applies.
    """
    return "composite" if any(b < 0.0 for b in pattern.base) else "simple"


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation setting: model, effect pattern, target, methods."""

    model: str
    pattern: EvidencePattern
    gamma: int
    methods: tuple[str, ...]
    alpha: float = 0.05
    repetitions: int = 100_000
    seed: int = 0
    sigma: float = DEFAULT_SIGMA

    def __post_init__(self):
        if self.model not in ("beta", "normal"):
            raise ValueError(f"model must be 'beta' or 'normal', got {self.model!r}")
        if not isinstance(self.pattern, EvidencePattern):
            raise ValueError("pattern must be an EvidencePattern")
        if not isinstance(self.gamma, int) or isinstance(self.gamma, bool):
            raise ValueError(f"gamma must be an integer, got {self.gamma!r}")
        if not 1 <= self.gamma <= STUDIES:
            raise ValueError(f"gamma must be in 1..{STUDIES}, got {self.gamma}")
        if not self.methods:
            raise ValueError("need at least one method")
        for name in self.methods:
            if name not in METHOD_CODES:
                raise ValueError(f"unknown method {name!r}; expected one of {sorted(METHOD_CODES)}")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("duplicate method names")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")

    @property
    def uses_evalues(self) -> bool:
        return any(METHOD_CODES[m] >= _E_CODE_MIN for m in self.methods)

    def bayes_factor_spec(self) -> BayesFactorSpec | None:
        """Bayes-factor setting implied by the pattern, or None if unused."""
        if not self.uses_evalues:
            return None
        return BayesFactorSpec(
            model=self.model,
            strength=self.pattern.strength,
            null_kind=null_kind_for(self.pattern),
            sigma=self.sigma,
        )


@dataclass(frozen=True)
class SimResult:
    """Monte Carlo estimate of one rejection probability."""

    method: str
    estimate: float
    std_error: float
    repetitions: int


@dataclass(frozen=True)
class GammaPowerRow:
    """One (target, method) cell of a replicability sweep."""

    gamma: int
    method: str
    estimate: float
    std_error: float
    relative: float
    repetitions: int


def _binomial_se(estimate: float, n: int) -> float:
    return math.sqrt(estimate * (1.0 - estimate) / n)


def _resolve_backend(backend: str | None):
    table = available_backends()
    if backend is None:
        # prefer the compiled kernel when the build produced one
        return table["fast"] if "fast" in table else table["pure"]
    try:
        return table[backend]
    except KeyError:
        raise ValueError(f"unknown backend {backend!r}; available: {sorted(table)}") from None


def _threshold_counts(config: ExperimentConfig, thresholds: Sequence[float], workers: int, backend: str | None) -> np.ndarray:
    """Count reps with combined p <= t, per method and threshold.

    Returns an int64 array of shape (len(methods), len(thresholds)).
    E-value methods are folded through p = min(1, 1/e) first.
    """
    run = _resolve_backend(backend)
    if workers < 1:
        raise ValueError("workers must be positive")
    thr = np.asarray(thresholds, dtype=np.float64)
    if thr.ndim != 1 or thr.size == 0:
        raise ValueError("need a one-dimensional, non-empty threshold list")
    codes = np.array([METHOD_CODES[m] for m in config.methods], dtype=np.int64)
    e_rows = np.array([c >= _E_CODE_MIN for c in codes], dtype=bool)
    bounds = np.asarray(config.pattern.theta_bounds, dtype=np.float64)
    model_kind = 0 if config.model == "beta" else 1

    spec = config.bayes_factor_spec()
    if spec is None:
        bf_mode, alt_span, null_span, bf_composite, null_mean = 0, 0.0, 0.0, 0, 1.0
    else:
        bf_mode = 1 if config.model == "beta" else 2
        alt_span = spec.alt_span
        null_span = spec.null_span
        bf_composite = 1 if spec.null_kind == "composite" else 0
        null_mean = null_expectation(spec)  # resolved once, before any thread starts

    n_total = config.repetitions
    n_chunks = (n_total + CHUNK - 1) // CHUNK

    def one_chunk(chunk_index: int) -> np.ndarray:
        n_reps = min(CHUNK, n_total - chunk_index * CHUNK)
        out = np.zeros((codes.size, n_reps), dtype=np.float64)
        run(
            config.seed,
            chunk_index,
            n_reps,
            model_kind,
            config.sigma,
            bounds,
            config.gamma,
            codes,
            bf_mode,
            alt_span,
            null_span,
            bf_composite,
            null_mean,
            out,
        )
        if e_rows.any():
            with np.errstate(divide="ignore"):
                out[e_rows] = np.minimum(1.0, 1.0 / out[e_rows])
        return (out[:, None, :] <= thr[None, :, None]).sum(axis=2, dtype=np.int64)

    if workers == 1 or n_chunks == 1:
        parts = [one_chunk(i) for i in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one_chunk, range(n_chunks)))

    total = np.zeros((codes.size, thr.size), dtype=np.int64)
    for part in parts:  # chunk order; exact for integers, kept fixed anyway
        total += part
    return total


def _results_at(config: ExperimentConfig, counts: np.ndarray, column: int) -> list[SimResult]:
    n = config.repetitions
    out = []
    for m, name in enumerate(config.methods):
        est = float(counts[m, column]) / n
        out.append(SimResult(name, est, _binomial_se(est, n), n))
    return out


def run_power(config: ExperimentConfig, workers: int = 1, backend: str | None = None) -> list[SimResult]:
    """Estimate each method's rejection probability at ``config.alpha``."""
    positives = sum(1 for b in config.pattern.base if b > 0.0)
    if positives < config.gamma:
        warnings.warn(
            f"pattern {config.pattern.label!r} has {positives} strictly positive "
            f"effect levels, fewer than gamma={config.gamma}; the target "
            "hypothesis is true and the estimate is a null rejection rate",
            stacklevel=2,
        )
    counts = _threshold_counts(config, [config.alpha], workers, backend)
    return _results_at(config, counts, 0)


def relative_power(results: Sequence[SimResult]) -> list[tuple[str, float]]:
    """Rescale estimates so the best method maps to one."""
    if not results:
        raise ValueError("need at least one result")
    best = max(r.estimate for r in results)
    if best == 0.0:
        warnings.warn("all estimates are zero; relative powers set to zero", stacklevel=2)
        return [(r.method, 0.0) for r in results]
    return [(r.method, r.estimate / best) for r in results]


def weaken_pattern(pattern: EvidencePattern, conservative_count: int) -> EvidencePattern:
    """Turn the first ``conservative_count`` zero levels into -1 levels.

    The pattern must be a spike base: an arbitrary non-negative first
    level followed by zeros.  Replacement runs lowest study index first;
    coordinates are exchangeable, so the placement rule is cosmetic.
    """
    base = pattern.base
    if base[0] < 0.0 or any(b != 0.0 for b in base[1:]):
        raise ValueError("base pattern must be a non-negative first level followed by zeros")
    zero_count = sum(1 for b in base if b == 0.0)
    if not isinstance(conservative_count, int) or isinstance(conservative_count, bool):
        raise ValueError(f"conservative_count must be an integer, got {conservative_count!r}")
    if not 0 <= conservative_count <= zero_count:
        raise ValueError(f"conservative_count must be in 0..{zero_count}, got {conservative_count}")
    levels = list(base)
    replaced = 0
    for i, b in enumerate(levels):
        if replaced == conservative_count:
            break
        if b == 0.0:
            levels[i] = -1.0
            replaced += 1
    return EvidencePattern(
        label=f"{pattern.label}-c{conservative_count}",
        base=tuple(levels),
        strength=pattern.strength,
    )


def run_null_ecdf(
    config: ExperimentConfig,
    conservative_count: int,
    workers: int = 1,
    backend: str | None = None,
) -> list[SimResult]:
    """Ecdf of each method's combined p at alpha, under a weakened null.

    See ``weaken_pattern`` for the base-pattern contract and the zero
    replacement rule.
    """
    modified = weaken_pattern(config.pattern, conservative_count)
    null_config = replace(config, pattern=modified)
    counts = _threshold_counts(null_config, [config.alpha], workers, backend)
    return _results_at(null_config, counts, 0)


def run_ecdf_curve(
    config: ExperimentConfig,
    grid: Sequence[float],
    workers: int = 1,
    backend: str | None = None,
) -> dict[str, tuple[float, ...]]:
    """Empirical P(combined p <= t) per method over a threshold grid."""
    pts = list(grid)
    if not pts:
        raise ValueError("grid must be non-empty")
    if any(not 0.0 <= t <= 1.0 for t in pts):
        raise ValueError("grid points must lie in [0, 1]")
    if any(b > a for a, b in zip(pts[1:], pts)):
        raise ValueError("grid must be sorted ascending")
    counts = _threshold_counts(config, pts, workers, backend)
    n = config.repetitions
    return {
        name: tuple(float(counts[m, j]) / n for j in range(counts.shape[1]))
        for m, name in enumerate(config.methods)
    }


def gamma_sweep(
    config: ExperimentConfig,
    gammas: Sequence[int],
    workers: int = 1,
    backend: str | None = None,
) -> list[GammaPowerRow]:
    """Power at each replicability target, same seed so draws are shared.

    Each target's estimates are also rescaled relative to the best method
    at that target.
    """
    rows = []
    for g in gammas:
        results = run_power(replace(config, gamma=g), workers, backend)
        rel = dict(relative_power(results))
        for r in results:
            rows.append(GammaPowerRow(g, r.method, r.estimate, r.std_error, rel[r.method], r.repetitions))
    return rows
