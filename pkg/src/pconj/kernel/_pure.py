"""Pure-Python Monte Carlo kernel, the portable twin of the compiled one.

``run_chunk`` simulates one work chunk of repetitions and fills a
(methods x repetitions) array with per-repetition outcomes: a combined
p-value for the p-value combiners (codes 0..3) and a combined e-value for
the e-value merges (codes 4..6).

The compiled kernel must produce bit-identical output.  Both follow the
same operation order, use the same scalar routines, and guard the same
corner cases explicitly (no reliance on language-specific behaviour for
log(0), division by zero, or exp overflow), so keep any edit here in
lockstep with ``_fast.pyx``.
"""
from __future__ import annotations

import math

from ..evalues import _bf_beta, _bf_normal
from ..numerics import chi2_sf, std_normal_cdf, std_normal_quantile, std_normal_sf
from ..rng import RngStream

__all__ = ["run_chunk", "BACKEND"]

BACKEND = "pure"

# method codes shared with the compiled kernel and the simulation layer
CODE_FISHER = 0
CODE_STOUFFER = 1
CODE_MINIMUM = 2
CODE_BONFERRONI = 3
CODE_E_PRODUCT = 4
CODE_E_ARITHMETIC = 5
CODE_E_HARMONIC = 6

_STUDIES = 6


def _insertion_sort(values: list[float], n: int) -> None:
    for i in range(1, n):
        key = values[i]
        j = i - 1
        while j >= 0 and values[j] > key:
            values[j + 1] = values[j]
            j -= 1
        values[j + 1] = key


def _fisher_tail(p: list[float], gamma: int, k: int) -> float:
    for i in range(gamma - 1, _STUDIES):
        if p[i] == 0.0:
            return 0.0
    acc = 0.0
    for i in range(gamma - 1, _STUDIES):
        acc += math.log(p[i])
    stat = -2.0 * acc
    return chi2_sf(stat, 2 * k)


def _stouffer_tail(p: list[float], gamma: int, k: int) -> float:
    has_zero = False
    has_one = False
    for i in range(gamma - 1, _STUDIES):
        if p[i] == 0.0:
            has_zero = True
        if p[i] == 1.0:
            has_one = True
    if has_zero and has_one:
        return 1.0  # undefined statistic, resolved as a non-rejection
    if has_zero:
        return 0.0
    acc = 0.0
    for i in range(gamma - 1, _STUDIES):
        acc += std_normal_quantile(p[i])
    z = acc / math.sqrt(k)
    return std_normal_cdf(z)


def _minimum_tail(p: list[float], gamma: int, k: int) -> float:
    m = p[gamma - 1]
    if m >= 1.0:
        return 1.0
    return -math.expm1(k * math.log1p(-m))


def _merge_first(e: list[float], k: int, code: int) -> float:
    if code == CODE_E_PRODUCT:
        for i in range(k):
            if math.isinf(e[i]):
                return math.inf
        for i in range(k):
            if e[i] == 0.0:
                return 0.0
        acc = 1.0
        for i in range(k):
            acc *= e[i]
        return acc
    if code == CODE_E_ARITHMETIC:
        acc = 0.0
        for i in range(k):
            acc += e[i]
        return acc / k
    for i in range(k):
        if e[i] == 0.0:
            return 0.0
    acc = 0.0
    for i in range(k):
        acc += 1.0 / e[i]
    if acc == 0.0:
        return math.inf
    return k / acc


def run_chunk(
    seed: int,
    chunk_index: int,
    n_reps: int,
    model_kind: int,
    sigma: float,
    theta_bounds,
    gamma: int,
    method_codes,
    bf_mode: int,
    bf_alt_span: float,
    bf_null_span: float,
    bf_composite: int,
    bf_null_mean: float,
    out,
) -> None:
    """Simulate ``n_reps`` repetitions of stream ``chunk_index``.

    Args:
        seed, chunk_index: stream address, see RngStream.
        n_reps: repetitions in this chunk.
        model_kind: 0 = beta shaped evidence model, 1 = normal.
        sigma: scale of the normal model (ignored for model_kind 0).
        theta_bounds: 6 per-study effect bounds (already scaled by the
            strength factor).
        gamma: replicability target in 1..6.
        method_codes: method code per output row.
        bf_mode: 0 = no e-values needed, 1 = beta Bayes factor,
            2 = normal Bayes factor.
        bf_alt_span, bf_null_span: prior spans of the Bayes factor.
        bf_composite: 1 for the composite null denominator.
        bf_null_mean: null expectation that adjusts each Bayes factor.
        out: float array of shape (len(method_codes), n_reps); receives
            combined p-values (codes 0..3) or combined e-values (4..6).
    """
    stream = RngStream(seed, chunk_index)
    n_methods = len(method_codes)
    k = _STUDIES - gamma + 1
    need_e = any(code >= CODE_E_PRODUCT for code in method_codes)
    composite = bf_composite != 0
    th = [0.0] * _STUDIES
    p = [0.0] * _STUDIES
    e = [0.0] * _STUDIES
    for rep in range(n_reps):
        for i in range(_STUDIES):
            th[i] = theta_bounds[i] * (1.0 - stream.next_uniform())
        for i in range(_STUDIES):
            u = stream.next_uniform()
            t = th[i]
            if model_kind == 0:
                if t <= 0.0:
                    p[i] = math.pow(u, 1.0 / (1.0 - t))
                else:
                    p[i] = -math.expm1(math.log1p(-u) / (1.0 + t))
            else:
                if t == 0.0:
                    p[i] = 1.0 - u
                else:
                    p[i] = std_normal_sf(t / sigma + std_normal_quantile(u))
        _insertion_sort(p, _STUDIES)
        if need_e:
            for i in range(_STUDIES):
                if bf_mode == 1:
                    bf = _bf_beta(p[i], bf_alt_span, bf_null_span, composite)
                else:
                    bf = _bf_normal(p[i], sigma, bf_alt_span, bf_null_span, composite)
                e[i] = bf / bf_null_mean
            _insertion_sort(e, _STUDIES)
        for m in range(n_methods):
            code = method_codes[m]
            if code == CODE_FISHER:
                val = _fisher_tail(p, gamma, k)
            elif code == CODE_STOUFFER:
                val = _stouffer_tail(p, gamma, k)
            elif code == CODE_MINIMUM:
                val = _minimum_tail(p, gamma, k)
            elif code == CODE_BONFERRONI:
                val = min(1.0, k * p[gamma - 1])
            else:
                val = _merge_first(e, k, code)
            out[m, rep] = val
