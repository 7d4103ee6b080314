"""P-value combiners for the partial conjunction hypothesis.

Given p-values from s studies, the claim under test is "the effect is
present in at least gamma studies".  Its worst-case null keeps the
gamma - 1 smallest p-values aside and combines the k = s - gamma + 1
largest with a classical global-null combiner, which preserves the level
for any dependence-free study set.  gamma = 1 recovers the plain global
null combination.

All combiners return a combined p-value in [0, 1].  Inputs are validated;
0 and 1 entries are legal and handled by taking limits, except for the
sum-of-quantiles combiner where a 0 and a 1 together leave the statistic
undefined (it raises).
"""
from __future__ import annotations

import math
from typing import Sequence

from .numerics import (
    beta_1_n_cdf,
    check_probability,
    chi2_sf,
    std_normal_cdf,
    std_normal_quantile,
)

__all__ = [
    "fisher_g",
    "stouffer_g",
    "minimum_g",
    "bonferroni_g",
    "partial_conjunction_p",
    "P_METHODS",
]


def _selected_tail(pvals: Sequence[float], gamma: int) -> list[float]:
    """Validate inputs and return the k = s - gamma + 1 largest p-values, ascending."""
    s = len(pvals)
    if s < 1:
        raise ValueError("need at least one p-value")
    if not isinstance(gamma, int) or isinstance(gamma, bool):
        raise ValueError(f"gamma must be an integer, got {gamma!r}")
    if not 1 <= gamma <= s:
        raise ValueError(f"gamma must be in 1..{s}, got {gamma}")
    checked = [check_probability(p, f"pvals[{i}]") for i, p in enumerate(pvals)]
    checked.sort()
    return checked[gamma - 1 :]


def fisher_g(pvals: Sequence[float], gamma: int = 1) -> float:
    """Combine via the sum of logs of the k largest p-values.

    The statistic -2 * sum(log p) is chi-square with 2k degrees of freedom
    under the worst-case null.

    Args:
        pvals: per-study p-values.
        gamma: replicability target, 1 <= gamma <= len(pvals).

    Returns:
        Combined p-value for the claim of at least gamma effects.
    """
    sel = _selected_tail(pvals, gamma)
    k = len(sel)
    for v in sel:
        if v == 0.0:
            return 0.0
    acc = 0.0
    for v in sel:
        acc += math.log(v)
    stat = -2.0 * acc
    return chi2_sf(stat, 2 * k)


def stouffer_g(pvals: Sequence[float], gamma: int = 1) -> float:
    """Combine via the sum of normal quantiles of the k largest p-values.

    Raises:
        ValueError: if the selected set contains both a 0 and a 1, which
            makes the sum of quantiles undefined (infinities of both
            signs).
    """
    sel = _selected_tail(pvals, gamma)
    k = len(sel)
    has_zero = any(v == 0.0 for v in sel)
    has_one = any(v == 1.0 for v in sel)
    if has_zero and has_one:
        raise ValueError("combined statistic undefined: selected p-values contain both 0 and 1")
    if has_zero:
        return 0.0
    acc = 0.0
    for v in sel:
        acc += std_normal_quantile(v)
    z = acc / math.sqrt(k)
    return std_normal_cdf(z)


def minimum_g(pvals: Sequence[float], gamma: int = 1) -> float:
    """Combine via the smallest of the k largest p-values.

    That minimum is stochastically Beta(1, k) or larger under the
    worst-case null, so its Beta(1, k) cdf is a valid combined p-value.
    """
    sel = _selected_tail(pvals, gamma)
    return beta_1_n_cdf(sel[0], len(sel))


def bonferroni_g(pvals: Sequence[float], gamma: int = 1) -> float:
    """Union-bound version of minimum_g: min(1, k * min of selected)."""
    sel = _selected_tail(pvals, gamma)
    return min(1.0, len(sel) * sel[0])


P_METHODS: dict[str, object] = {
    "fisher": fisher_g,
    "stouffer": stouffer_g,
    "minimum": minimum_g,
    "bonferroni": bonferroni_g,
}


def partial_conjunction_p(pvals: Sequence[float], gamma: int, method: str = "fisher") -> float:
    """Dispatch to a named p-value combiner.

    Args:
        pvals: per-study p-values.
        gamma: replicability target.
        method: one of "fisher", "stouffer", "minimum", "bonferroni".
    """
    try:
        fn = P_METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(P_METHODS)}") from None
    return fn(pvals, gamma)  # type: ignore[operator]
