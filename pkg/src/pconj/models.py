"""Evidence models and study-strength patterns for the simulation study.

A simulated meta-study has s = 6 component studies.  Each study i gets a
nominal strength level, scaled by a global strength factor r, and its
realised effect is drawn uniformly between 0 and that scaled level (one
uniform is always consumed per study, including for level 0, which keeps
random streams aligned across patterns).  The realised effect then drives
one of two one-sided evidence models for the study p-value:

* beta shaped: density (1-theta) * t**(-theta) for theta <= 0 and
  (1+theta) * (1-t)**theta for theta > 0; theta = 0 is exactly uniform,
  negative theta is a conservative study, positive theta concentrates
  p near zero.
* normal shifted: p = P(Z > theta/sigma + z_u) for a standard normal
  draw z_u; theta = 0 again gives exactly uniform p-values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import check_probability, std_normal_quantile, std_normal_sf
from .rng import RngStream

__all__ = [
    "STUDIES",
    "DEFAULT_SIGMA",
    "CONSERVATIVE_LEVEL",
    "EvidencePattern",
    "pattern_catalog",
    "sample_theta",
    "beta_model_density",
    "beta_model_cdf",
    "beta_model_sample",
    "normal_model_density",
    "normal_model_sample",
    "RngStream",
]

STUDIES = 6

# measurement scale of the normal evidence model, 1/sqrt(50): the scale of
# a mean of 50 unit-variance observations
DEFAULT_SIGMA = 1.0 / math.sqrt(50.0)

# strength level that replaces level 0 in the conservative pattern variants
CONSERVATIVE_LEVEL = -2.0


@dataclass(frozen=True)
class EvidencePattern:
    """Named configuration of per-study strength levels.

    Attributes:
        label: short name, "1".."13" for the main catalog and "1c".."9c"
            for conservative variants.
        base: 6 nominal levels, one per study; multiplied by ``strength``
            to get the upper (or, when negative, lower) bound of each
            study's realised effect.
        strength: global scale factor r > 0.
    """

    label: str
    base: tuple[float, ...]
    strength: float

    def __post_init__(self) -> None:
        if len(self.base) != STUDIES:
            raise ValueError(f"pattern {self.label!r}: need {STUDIES} levels, got {len(self.base)}")
        if not (self.strength > 0.0) or math.isinf(self.strength):
            raise ValueError(f"pattern {self.label!r}: strength must be finite and > 0, got {self.strength!r}")

    @property
    def theta_bounds(self) -> tuple[float, ...]:
        """Per-study effect bounds base[i] * strength."""
        return tuple(b * self.strength for b in self.base)

    @property
    def dispersion(self) -> float:
        """Sum of squared base levels; used to order patterns by spread."""
        return sum(b * b for b in self.base)

    @property
    def null_count(self) -> int:
        """Number of studies with no positive effect (level <= 0)."""
        return sum(1 for b in self.base if b <= 0.0)

    def with_strength(self, strength: float) -> "EvidencePattern":
        return EvidencePattern(self.label, self.base, strength)


_BASE_PATTERNS: tuple[tuple[str, tuple[float, ...]], ...] = (
    ("1", (0.0, 0.0, 0.0, 0.0, 1.0, 5.0)),
    ("2", (0.0, 0.0, 0.0, 0.0, 3.0, 3.0)),
    ("3", (0.0, 0.0, 0.0, 1.0, 1.0, 4.0)),
    ("4", (0.0, 0.0, 0.0, 2.0, 2.0, 2.0)),
    ("5", (0.0, 0.0, 1.0, 1.0, 1.0, 3.0)),
    ("6", (0.0, 0.0, 1.5, 1.5, 1.5, 1.5)),
    ("7", (0.0, 0.5, 0.5, 0.5, 0.5, 4.0)),
    ("8", (0.0, 1.0, 1.0, 1.0, 1.0, 2.0)),
    ("9", (0.0, 1.2, 1.2, 1.2, 1.2, 1.2)),
    ("10", (0.2, 0.2, 0.2, 0.2, 0.2, 5.0)),
    ("11", (0.5, 0.5, 0.5, 0.5, 2.0, 2.0)),
    ("12", (0.5, 0.5, 1.25, 1.25, 1.25, 1.25)),
    ("13", (1.0, 1.0, 1.0, 1.0, 1.0, 1.0)),
)


def pattern_catalog(strength: float = 1.0) -> list[EvidencePattern]:
    """All catalogued patterns at a given strength factor.

    The thirteen main patterns are ordered by decreasing dispersion; each
    pattern with at least one level-0 study also gets a conservative
    variant (label suffix "c") where every 0 is replaced by -2, so those
    studies actively under-reject instead of being exactly uniform.
    """
    out = [EvidencePattern(label, base, strength) for label, base in _BASE_PATTERNS]
    for label, base in _BASE_PATTERNS:
        if any(b == 0.0 for b in base):
            conservative = tuple(CONSERVATIVE_LEVEL if b == 0.0 else b for b in base)
            out.append(EvidencePattern(label + "c", conservative, strength))
    return out


def find_pattern(label: str, strength: float = 1.0) -> EvidencePattern:
    """Look up a catalogued pattern by label."""
    for pat in pattern_catalog(strength):
        if pat.label == label:
            return pat
    raise KeyError(f"unknown pattern label {label!r}")


def sample_theta(pattern: EvidencePattern, stream: RngStream) -> tuple[float, ...]:
    """Draw realised per-study effects for one repetition.

    Study i gets bound_i * (1 - U_i) with U_i uniform, so the effect lies
    in (0, bound] for positive bounds and [bound, 0) for negative ones.
    Exactly one uniform is consumed per study even when the bound is 0.
    """
    bounds = pattern.theta_bounds
    return tuple(b * (1.0 - stream.next_uniform()) for b in bounds)


def beta_model_density(t: float, theta: float) -> float:
    """P-value density of the beta shaped evidence model at effect theta."""
    t = check_probability(t, "t")
    if math.isnan(theta):
        raise ValueError("beta_model_density: theta must not be NaN")
    if theta <= 0.0:
        return (1.0 - theta) * math.pow(t, -theta)
    return (1.0 + theta) * math.pow(1.0 - t, theta)


def beta_model_cdf(t: float, theta: float) -> float:
    """P-value cdf of the beta shaped evidence model."""
    t = check_probability(t, "t")
    if math.isnan(theta):
        raise ValueError("beta_model_cdf: theta must not be NaN")
    if theta <= 0.0:
        return math.pow(t, 1.0 - theta)
    return -math.expm1((1.0 + theta) * math.log1p(-t)) if t < 1.0 else 1.0


def beta_model_sample(theta: float, stream: RngStream) -> float:
    """One p-value draw from the beta shaped model by cdf inversion."""
    u = stream.next_uniform()
    if theta <= 0.0:
        return math.pow(u, 1.0 / (1.0 - theta))
    return -math.expm1(math.log1p(-u) / (1.0 + theta))


def normal_model_density(t: float, theta: float, sigma: float = DEFAULT_SIGMA) -> float:
    """P-value density of the normal evidence model at effect theta.

    Equals the likelihood ratio of the underlying N(theta, sigma^2)
    observation against N(0, sigma^2), expressed in the p-value scale.
    """
    t = check_probability(t, "t")
    if math.isnan(theta):
        raise ValueError("normal_model_density: theta must not be NaN")
    if sigma <= 0.0:
        raise ValueError(f"normal_model_density: sigma must be > 0, got {sigma!r}")
    if theta == 0.0:
        return 1.0
    z = -sigma * std_normal_quantile(t)  # observation with upper tail prob t
    arg = (2.0 * z * theta - theta * theta) / (2.0 * sigma * sigma)
    if arg > 709.0:
        return math.inf
    return math.exp(arg)


def normal_model_sample(theta: float, stream: RngStream, sigma: float = DEFAULT_SIGMA) -> float:
    """One p-value draw from the normal evidence model.

    theta = 0 short-circuits to 1 - U so null studies are exactly uniform
    rather than uniform up to quantile/cdf round trip error.
    """
    if sigma <= 0.0:
        raise ValueError(f"normal_model_sample: sigma must be > 0, got {sigma!r}")
    u = stream.next_uniform()
    if theta == 0.0:
        return 1.0 - u
    return std_normal_sf(theta / sigma + std_normal_quantile(u))
