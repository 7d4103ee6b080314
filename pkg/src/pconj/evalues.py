"""E-values for single studies and their partial conjunction combination.

The per-study e-value is a Bayes factor: the marginal likelihood of the
observed p-value under an alternative prior, divided by its marginal
likelihood under a null prior.  Two null kinds are supported:

* "simple": the null is the exact uniform p-value (effect 0); the
  denominator is 1 and the Bayes factor already has null expectation 1.
* "composite": the null prior spreads over conservative effects; the
  Bayes factor is then divided by its expectation under the uniform
  boundary null (``null_expectation``) so the adjusted value is a valid
  e-value for every effect the null allows.

Priors follow the simulation study design: the alternative prior is
uniform on (0, 5r] and the composite null prior uniform on [-3r, 0), with
r the global strength factor.  Combination across studies takes the
s - gamma + 1 smallest e-values and merges them with a symmetric rule;
the product rule preserves validity for independent studies, the
arithmetic mean for arbitrary dependence.  The harmonic mean is provided
for diagnostics only, it is not a valid merge.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Sequence

from .models import DEFAULT_SIGMA
from .numerics import (
    QuadratureConfig,
    check_probability,
    integrate,
    std_normal_cdf,
    std_normal_logcdf,
    std_normal_pdf,
    std_normal_quantile,
    std_normal_sf,
)

__all__ = [
    "BayesFactorSpec",
    "bayes_factor",
    "null_expectation",
    "adjusted_e",
    "e_merge",
    "partial_conjunction_e",
    "e_to_p",
    "E_MERGE_RULES",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

ALT_PRIOR_MULT = 5.0  # alternative prior spans (0, 5r]
NULL_PRIOR_MULT = 3.0  # composite null prior spans [-3r, 0)


@dataclass(frozen=True)
class BayesFactorSpec:
    """Configuration of the per-study Bayes factor.

    Attributes:
        model: evidence model, "beta" or "normal".
        strength: global strength factor r > 0; prior spans scale with it.
        null_kind: "simple" or "composite".
        sigma: scale of the normal evidence model (ignored for "beta").
    """

    model: str
    strength: float
    null_kind: str = "simple"
    sigma: float = DEFAULT_SIGMA

    def __post_init__(self) -> None:
        if self.model not in ("beta", "normal"):
            raise ValueError(f"model must be 'beta' or 'normal', got {self.model!r}")
        if self.null_kind not in ("simple", "composite"):
            raise ValueError(f"null_kind must be 'simple' or 'composite', got {self.null_kind!r}")
        if not (self.strength > 0.0) or math.isinf(self.strength):
            raise ValueError(f"strength must be finite and > 0, got {self.strength!r}")
        if not (self.sigma > 0.0) or math.isinf(self.sigma):
            raise ValueError(f"sigma must be finite and > 0, got {self.sigma!r}")

    @property
    def alt_span(self) -> float:
        """Upper end of the alternative prior support."""
        return ALT_PRIOR_MULT * self.strength

    @property
    def null_span(self) -> float:
        """Width of the composite null prior support."""
        return NULL_PRIOR_MULT * self.strength


# ---------------------------------------------------------------------------
# Beta shaped model: closed forms.
# ---------------------------------------------------------------------------


def _growth_integral(w: float, span: float) -> float:
    """Integral of (1+u)*exp(w*u) for u in [0, span], w <= 0.

    Near w = 0 the closed form loses all precision to cancellation, so a
    short Taylor series in w takes over below |w*span| = 0.5.
    """
    if w == -math.inf:
        return 0.0
    x = w * span
    if abs(x) < 0.5:
        total = 0.0
        term = 1.0  # w**k / k!
        span_pow = span  # span**(k+1)
        for k in range(60):
            c = span_pow / (k + 1.0) + span_pow * span / (k + 2.0)
            contrib = term * c
            total += contrib
            if abs(contrib) <= 1e-17 * abs(total):
                break
            term *= w / (k + 1.0)
            span_pow *= span
        return total
    e = math.exp(x)
    return ((1.0 + span) * e - 1.0) / w - (e - 1.0) / (w * w)


def _bf_beta(p: float, alt_span: float, null_span: float, composite: bool) -> float:
    if p >= 1.0:
        return 0.0
    num = _growth_integral(math.log1p(-p), alt_span) / alt_span
    if not composite:
        return num
    if p <= 0.0:
        return math.inf
    den = _growth_integral(math.log(p), null_span) / null_span
    if den == 0.0:
        return math.inf
    return num / den


# ---------------------------------------------------------------------------
# Normal model: interval probabilities of the prior-shifted observation.
# ---------------------------------------------------------------------------


def _interval_prob(lo: float, hi: float) -> float:
    """P(lo < Z <= hi), organised to avoid cancellation on either side."""
    if lo >= 0.0:
        v = std_normal_sf(lo) - std_normal_sf(hi)
    else:
        v = std_normal_cdf(hi) - std_normal_cdf(lo)
    return v if v > 0.0 else 0.0


def _log_interval_prob(lo: float, hi: float) -> float:
    """log P(lo < Z <= hi) for intervals far in the lower tail."""
    la = std_normal_logcdf(lo)
    lb = std_normal_logcdf(hi)
    ed = math.exp(la - lb)
    if ed >= 1.0:
        return -math.inf
    return lb + math.log1p(-ed)


def _bf_normal_from_q(q: float, sigma: float, alt_span: float, null_span: float, composite: bool) -> float:
    # q is the upper tail quantile of the observed p-value
    a = alt_span / sigma
    if composite:
        m = null_span / sigma
        i1 = _interval_prob(-q, a - q)
        i2 = _interval_prob(-m - q, -q)
        if i2 == 0.0:
            return math.inf
        return (null_span / alt_span) * (i1 / i2)
    half_q2 = 0.5 * q * q
    if half_q2 <= 700.0:
        i1 = _interval_prob(-q, a - q)
        return (sigma * _SQRT_2PI / alt_span) * math.exp(half_q2) * i1
    # deep tail: assemble in log domain; only reachable for p below ~8e-305
    log_i1 = _log_interval_prob(-q, a - q)
    lbf = math.log(sigma * _SQRT_2PI / alt_span) + half_q2 + log_i1
    if lbf > 709.0:
        return math.inf
    return math.exp(lbf)


def _bf_normal(p: float, sigma: float, alt_span: float, null_span: float, composite: bool) -> float:
    if p >= 1.0:
        return 0.0
    if p <= 0.0:
        return math.inf
    q = -std_normal_quantile(p)
    return _bf_normal_from_q(q, sigma, alt_span, null_span, composite)


# ---------------------------------------------------------------------------
# Public surface.
# ---------------------------------------------------------------------------


def bayes_factor(p: float, spec: BayesFactorSpec) -> float:
    """Per-study Bayes factor at p-value p under the given spec.

    Returns a value in [0, +inf]; p = 0 maps to +inf except for the
    beta model with a simple null, where the limit is finite.
    """
    p = check_probability(p, "p")
    if spec.model == "beta":
        return _bf_beta(p, spec.alt_span, spec.null_span, spec.null_kind == "composite")
    return _bf_normal(p, spec.sigma, spec.alt_span, spec.null_span, spec.null_kind == "composite")


_E0_CACHE: dict[tuple, float] = {}
_E0_LOCK = threading.Lock()


def null_expectation(spec: BayesFactorSpec) -> float:
    """Expectation of the Bayes factor under the uniform boundary null.

    Exactly 1 for a simple null (the numerator is a density in p).  For
    a composite null it exceeds 1 and is computed once by quadrature,
    then cached per spec.
    """
    if spec.null_kind == "simple":
        return 1.0
    key = (spec.model, spec.strength, spec.sigma if spec.model == "normal" else None)
    hit = _E0_CACHE.get(key)
    if hit is not None:
        return hit
    if spec.model == "beta":
        value = integrate(
            lambda t: _bf_beta(t, spec.alt_span, spec.null_span, True),
            0.0,
            1.0,
        )
    else:
        # substitute t = P(Z > q): smooth integrand, no p = 0 spike
        a = spec.alt_span / spec.sigma

        def integrand(q: float) -> float:
            return _bf_normal_from_q(q, spec.sigma, spec.alt_span, spec.null_span, True) * std_normal_pdf(q)

        value = integrate(integrand, -14.0, a + 14.0, QuadratureConfig(abs_tol=1e-12, rel_tol=1e-10))
    with _E0_LOCK:
        _E0_CACHE[key] = value
    return value


def adjusted_e(p: float, spec: BayesFactorSpec) -> float:
    """Valid per-study e-value: Bayes factor over its worst null mean."""
    return bayes_factor(p, spec) / null_expectation(spec)


def _check_evalues(evalues: Sequence[float]) -> list[float]:
    if len(evalues) < 1:
        raise ValueError("need at least one e-value")
    out = []
    for i, e in enumerate(evalues):
        e = float(e)
        if math.isnan(e) or e < 0.0:
            raise ValueError(f"evalues[{i}] must be >= 0, got {e!r}")
        out.append(e)
    return out


def _merge_product(evalues: list[float]) -> float:
    # an infinite e-value dominates any zero; both at once is a measure
    # zero corner that still needs a deterministic answer
    for e in evalues:
        if math.isinf(e):
            return math.inf
    for e in evalues:
        if e == 0.0:
            return 0.0
    acc = 1.0
    for e in evalues:
        acc *= e
    return acc


def _merge_arithmetic(evalues: list[float]) -> float:
    acc = 0.0
    for e in evalues:
        acc += e
    return acc / len(evalues)


def _merge_harmonic(evalues: list[float]) -> float:
    for e in evalues:
        if e == 0.0:
            return 0.0
    acc = 0.0
    for e in evalues:
        acc += 1.0 / e
    if acc == 0.0:
        return math.inf
    return len(evalues) / acc


E_MERGE_RULES = {
    "product": _merge_product,
    "arithmetic": _merge_arithmetic,
    "harmonic": _merge_harmonic,
}


def e_merge(evalues: Sequence[float], rule: str = "product") -> float:
    """Merge e-values symmetrically.

    Args:
        evalues: non-negative e-values (inf allowed).
        rule: "product" (valid under independence), "arithmetic" (valid
            under any dependence), or "harmonic" (diagnostic only, not a
            valid e-value merge).
    """
    checked = _check_evalues(evalues)
    try:
        fn = E_MERGE_RULES[rule]
    except KeyError:
        raise ValueError(f"unknown merge rule {rule!r}; expected one of {sorted(E_MERGE_RULES)}") from None
    return fn(checked)


def partial_conjunction_e(evalues: Sequence[float], gamma: int, rule: str = "product") -> float:
    """E-value for the claim of at least gamma effects among s studies.

    Discards the gamma - 1 largest e-values and merges the remaining
    s - gamma + 1 smallest, the worst-case null assignment.
    """
    checked = _check_evalues(evalues)
    s = len(checked)
    if not isinstance(gamma, int) or isinstance(gamma, bool):
        raise ValueError(f"gamma must be an integer, got {gamma!r}")
    if not 1 <= gamma <= s:
        raise ValueError(f"gamma must be in 1..{s}, got {gamma}")
    checked.sort()
    selected = checked[: s - gamma + 1]
    try:
        fn = E_MERGE_RULES[rule]
    except KeyError:
        raise ValueError(f"unknown merge rule {rule!r}; expected one of {sorted(E_MERGE_RULES)}") from None
    return fn(selected)


def e_to_p(e: float) -> float:
    """Convert an e-value to a p-value: min(1, 1/e), with 0 and inf limits."""
    e = float(e)
    if math.isnan(e) or e < 0.0:
        raise ValueError(f"e must be >= 0, got {e!r}")
    if e == 0.0:
        return 1.0
    if math.isinf(e):
        return 0.0
    return min(1.0, 1.0 / e)
