"""Special functions, distribution functions, and adaptive quadrature.

Everything here is a pure function of its arguments, safe to call from any
number of threads.  Accuracy contracts:

* ``std_normal_cdf``: absolute error <= 1e-12 (rational erf approximations,
  Cody CALERF scheme).
* ``std_normal_quantile``: |cdf(quantile(u)) - u| <= 1e-12 for
  u in [1e-300, 1 - 1e-15] (AS241 PPND16).
* ``chi2_cdf`` / ``chi2_sf``: exact Erlang series for even degrees of
  freedom, absolute error <= 1e-12.
* ``integrate``: global-adaptive Gauss-Kronrod 7-15 with QUADPACK-style
  error estimates; estimated error <= max(abs_tol, rel_tol * |result|).

The compiled Monte Carlo kernel mirrors these routines operation for
operation; any change here must be reflected in ``kernel/_fast.pyx`` to keep
the two backends bit-identical.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

__all__ = [
    "check_probability",
    "erf",
    "erfc",
    "erfcx",
    "std_normal_cdf",
    "std_normal_sf",
    "std_normal_pdf",
    "std_normal_logcdf",
    "std_normal_logsf",
    "std_normal_quantile",
    "chi2_cdf",
    "chi2_sf",
    "beta_1_n_cdf",
    "QuadratureConfig",
    "ConvergenceError",
    "integrate",
]

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_INV_SQRT_PI = 5.6418958354775628695e-1  # 1/sqrt(pi)


def check_probability(value: float, name: str = "value") -> float:
    """Validate that ``value`` is a probability in [0, 1] and return it.

    Raises:
        ValueError: if the value is NaN or outside [0, 1].
    """
    value = float(value)
    if math.isnan(value) or value < 0.0 or value > 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value!r}")
    return value


# ---------------------------------------------------------------------------
# Error function family (Cody's CALERF rational approximations).
# ---------------------------------------------------------------------------

_ERF_A = (
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
)
_ERF_B = (
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
)
_ERF_C = (
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
)
_ERF_D = (
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
)
_ERF_P = (
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
)
_ERF_Q = (
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
)


def _erf_small(x: float) -> float:
    # |x| <= 0.46875
    z = x * x
    xnum = _ERF_A[4] * z
    xden = z
    for i in range(3):
        xnum = (xnum + _ERF_A[i]) * z
        xden = (xden + _ERF_B[i]) * z
    return x * (xnum + _ERF_A[3]) / (xden + _ERF_B[3])


def _erfc_large(y: float, scaled: bool) -> float:
    # y >= 0.46875; returns erfc(y), or exp(y*y)*erfc(y) when scaled.
    if y <= 4.0:
        xnum = _ERF_C[8] * y
        xden = y
        for i in range(7):
            xnum = (xnum + _ERF_C[i]) * y
            xden = (xden + _ERF_D[i]) * y
        result = (xnum + _ERF_C[7]) / (xden + _ERF_D[7])
    else:
        if not scaled and y > 26.6:
            return 0.0  # erfc underflows below the smallest subnormal
        z = 1.0 / (y * y)
        xnum = _ERF_P[5] * z
        xden = z
        for i in range(4):
            xnum = (xnum + _ERF_P[i]) * z
            xden = (xden + _ERF_Q[i]) * z
        result = z * (xnum + _ERF_P[4]) / (xden + _ERF_Q[4])
        result = (_INV_SQRT_PI - result) / y
    if not scaled:
        # exp(-y*y) evaluated as exp(-ysq*ysq)*exp(-(y-ysq)(y+ysq)) with ysq
        # a 1/16 grid point, which keeps the argument of the second exp tiny
        # and the product fully accurate.
        ysq = math.floor(y * 16.0) / 16.0
        delta = (y - ysq) * (y + ysq)
        result = math.exp(-ysq * ysq) * math.exp(-delta) * result
    return result


def erf(x: float) -> float:
    """Error function."""
    if math.isnan(x):
        raise ValueError("erf: NaN input")
    y = abs(x)
    if y <= 0.46875:
        return _erf_small(x)
    if math.isinf(y):
        return 1.0 if x > 0 else -1.0
    result = 1.0 - _erfc_large(y, False)
    return result if x > 0 else -result


def erfc(x: float) -> float:
    """Complementary error function 1 - erf(x)."""
    if math.isnan(x):
        raise ValueError("erfc: NaN input")
    y = abs(x)
    if y <= 0.46875:
        return 1.0 - _erf_small(x)
    if math.isinf(y):
        return 0.0 if x > 0 else 2.0
    if x > 0:
        return _erfc_large(y, False)
    return 2.0 - _erfc_large(y, False)


def erfcx(x: float) -> float:
    """Scaled complementary error function exp(x*x) * erfc(x).

    Stays O(1/x) for large positive x where erfc itself underflows; used for
    normal tail log-probabilities.
    """
    if math.isnan(x):
        raise ValueError("erfcx: NaN input")
    if x >= 0.46875:
        if math.isinf(x):
            return 0.0
        if x > 6.71e7:
            return _INV_SQRT_PI / x
        return _erfc_large(x, True)
    if x > -26.0:
        return math.exp(x * x) * erfc(x)
    return math.inf  # 2*exp(x*x) overflows


# ---------------------------------------------------------------------------
# Standard normal distribution.
# ---------------------------------------------------------------------------


def std_normal_cdf(x: float) -> float:
    """Lower tail probability of the standard normal distribution.

    Args:
        x: evaluation point; +-inf give the limits 1 and 0.

    Returns:
        P(Z <= x) with absolute error <= 1e-12.

    Raises:
        ValueError: for NaN input.
    """
    if math.isnan(x):
        raise ValueError("std_normal_cdf: NaN input")
    return 0.5 * erfc(-x / _SQRT2)


def std_normal_sf(x: float) -> float:
    """Upper tail probability P(Z > x); equals std_normal_cdf(-x) exactly."""
    if math.isnan(x):
        raise ValueError("std_normal_sf: NaN input")
    return 0.5 * erfc(x / _SQRT2)


def std_normal_pdf(x: float) -> float:
    """Density of the standard normal distribution."""
    if math.isnan(x):
        raise ValueError("std_normal_pdf: NaN input")
    return math.exp(-0.5 * x * x) / _SQRT_2PI


def std_normal_logcdf(x: float) -> float:
    """log of std_normal_cdf, accurate far into the lower tail."""
    if math.isnan(x):
        raise ValueError("std_normal_logcdf: NaN input")
    if x > -1.0:
        return math.log(std_normal_cdf(x))
    # cdf(x) = 0.5 * erfcx(-x/sqrt2) * exp(-x*x/2)
    return math.log(0.5 * erfcx(-x / _SQRT2)) - 0.5 * x * x


def std_normal_logsf(x: float) -> float:
    """log of std_normal_sf; mirror of std_normal_logcdf."""
    return std_normal_logcdf(-x)


# AS241 PPND16 coefficients (Wichura).
_PPND_A = (
    3.3871328727963666080e0,
    1.3314166789178437745e2,
    1.9715909503065514427e3,
    1.3731693765509461125e4,
    4.5921953931549871457e4,
    6.7265770927008700853e4,
    3.3430575583588128105e4,
    2.5090809287301226727e3,
)
_PPND_B = (
    4.2313330701600911252e1,
    6.8718700749205790830e2,
    5.3941960214247511077e3,
    2.1213794301586595867e4,
    3.9307895800092710610e4,
    2.8729085735721942674e4,
    5.2264952788528545610e3,
)
_PPND_C = (
    1.42343711074968357734e0,
    4.63033784615654529590e0,
    5.76949722146069140550e0,
    3.64784832476320460504e0,
    1.27045825245236838258e0,
    2.41780725177450611770e-1,
    2.27238449892691845833e-2,
    7.74545014278341407640e-4,
)
_PPND_D = (
    2.05319162663775882187e0,
    1.67638483018380384940e0,
    6.89767334985100004550e-1,
    1.48103976427480074590e-1,
    1.51986665636164571966e-2,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
)
_PPND_E = (
    6.65790464350110377720e0,
    5.46378491116411436990e0,
    1.78482653991729133580e0,
    2.96560571828504891230e-1,
    2.65321895265761230930e-2,
    1.24266094738807843860e-3,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
)
_PPND_F = (
    5.99832206555887937690e-1,
    1.36929880922735805310e-1,
    1.48753612908506148525e-2,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
)


def std_normal_quantile(u: float) -> float:
    """Quantile (inverse cdf) of the standard normal distribution.

    Args:
        u: probability in [0, 1].

    Returns:
        x with std_normal_cdf(x) = u; u = 0 and u = 1 return signed
        infinity so that downstream combiners can take limits.

    Raises:
        ValueError: if u is NaN or outside [0, 1].
    """
    u = check_probability(u, "u")
    if u == 0.0:
        return -math.inf
    if u == 1.0:
        return math.inf
    q = u - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = _PPND_A[7]
        for i in (6, 5, 4, 3, 2, 1, 0):
            num = num * r + _PPND_A[i]
        den = _PPND_B[6]
        for i in (5, 4, 3, 2, 1, 0):
            den = den * r + _PPND_B[i]
        den = den * r + 1.0
        return q * num / den
    r = u if q < 0.0 else 1.0 - u
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r = r - 1.6
        num = _PPND_C[7]
        for i in (6, 5, 4, 3, 2, 1, 0):
            num = num * r + _PPND_C[i]
        den = _PPND_D[6]
        for i in (5, 4, 3, 2, 1, 0):
            den = den * r + _PPND_D[i]
        den = den * r + 1.0
    else:
        r = r - 5.0
        num = _PPND_E[7]
        for i in (6, 5, 4, 3, 2, 1, 0):
            num = num * r + _PPND_E[i]
        den = _PPND_F[6]
        for i in (5, 4, 3, 2, 1, 0):
            den = den * r + _PPND_F[i]
        den = den * r + 1.0
    val = num / den
    return -val if q < 0.0 else val


# ---------------------------------------------------------------------------
# Chi-square with even degrees of freedom (Erlang series).
# ---------------------------------------------------------------------------


def chi2_sf(x: float, dof: int) -> float:
    """Survival function of the chi-square distribution, even dof only.

    For dof = 2k the tail is exactly exp(-x/2) * sum_{j<k} (x/2)^j / j!,
    which this evaluates by direct term recurrence; exp underflows
    gracefully for large x, so no log-domain branch is needed.

    Raises:
        ValueError: for odd or non-positive dof, or x < 0 or NaN.
    """
    if dof <= 0 or dof % 2 != 0:
        raise ValueError(f"chi2_sf: degrees of freedom must be a positive even integer, got {dof}")
    if math.isnan(x) or x < 0.0:
        raise ValueError(f"chi2_sf: x must be >= 0, got {x!r}")
    if math.isinf(x):
        return 0.0
    k = dof // 2
    h = 0.5 * x
    term = 1.0
    total = 1.0
    for j in range(1, k):
        term = term * h / j
        total += term
    return math.exp(-h) * total


def chi2_cdf(x: float, dof: int) -> float:
    """Cdf of the chi-square distribution with even degrees of freedom."""
    return 1.0 - chi2_sf(x, dof)


def beta_1_n_cdf(t: float, n: int) -> float:
    """Cdf of the Beta(1, n) distribution: 1 - (1-t)^n.

    This is the law of the minimum of n iid Uniform[0,1] draws. Evaluated
    as -expm1(n*log1p(-t)) so tiny t keeps full precision.
    """
    t = check_probability(t, "t")
    if n < 1:
        raise ValueError(f"beta_1_n_cdf: n must be a positive integer, got {n}")
    if t >= 1.0:
        return 1.0
    return -math.expm1(n * math.log1p(-t))


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and budget for adaptive integration."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2048

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0.0):
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol!r}")
        if not (self.rel_tol > 0.0):
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol!r}")
        if self.max_subdivisions < 1:
            raise ValueError(f"max_subdivisions must be >= 1, got {self.max_subdivisions!r}")


class ConvergenceError(ArithmeticError):
    """Raised when quadrature cannot meet its tolerance within budget.

    Carries the best estimate and its error bound so callers can decide
    whether the partial answer is still usable.
    """

    def __init__(self, message: str, estimate: float, error_bound: float) -> None:
        super().__init__(f"{message} (estimate={estimate!r}, error_bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


# 15-point Kronrod abscissae (positive half) and weights; the embedded
# 7-point Gauss rule uses abscissae 1, 3, 5 and the midpoint.
_GK_X = (
    0.9914553711208126,
    0.9491079123427585,
    0.8648644233597691,
    0.7415311855993944,
    0.5860872354676911,
    0.4058451513773972,
    0.2077849550078985,
)
_GK_WK = (
    0.022935322010529224,
    0.06309209262997855,
    0.10479001032225018,
    0.14065325971552592,
    0.1690047266392679,
    0.19035057806478542,
    0.20443294007529889,
)
_GK_WK0 = 0.20948214108472782  # midpoint Kronrod weight
_GK_WG = (
    0.12948496616886969,
    0.2797053914892767,
    0.3818300505051189,
)
_GK_WG0 = 0.4179591836734694  # midpoint Gauss weight

_EPMACH = 2.220446049250313e-16


def _gk15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    """One 15-point Kronrod panel on [a, b]: (integral, error estimate).

    All evaluation points are interior, so integrable endpoint
    singularities never get evaluated.
    """
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(center)
    resk = _GK_WK0 * fc
    resg = _GK_WG0 * fc
    resabs = _GK_WK0 * abs(fc)
    fv1 = [0.0] * 7
    fv2 = [0.0] * 7
    for j in range(7):
        dx = half * _GK_X[j]
        f1 = f(center - dx)
        f2 = f(center + dx)
        fv1[j] = f1
        fv2[j] = f2
        fsum = f1 + f2
        resk += _GK_WK[j] * fsum
        resabs += _GK_WK[j] * (abs(f1) + abs(f2))
        if j % 2 == 1:  # Gauss abscissae
            resg += _GK_WG[j // 2] * fsum
    reskh = resk * 0.5
    resasc = _GK_WK0 * abs(fc - reskh)
    for j in range(7):
        resasc += _GK_WK[j] * (abs(fv1[j] - reskh) + abs(fv2[j] - reskh))
    result = resk * half
    resabs *= abs(half)
    resasc *= abs(half)
    err = abs((resk - resg) * half)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > 1e-290:
        err = max(err, 50.0 * _EPMACH * resabs)
    return result, err


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    cfg: QuadratureConfig | None = None,
) -> float:
    """Adaptive quadrature of f over [lo, hi].

    Globally adaptive: the interval with the largest error estimate is
    bisected until the summed error meets max(abs_tol, rel_tol*|result|)
    or the subdivision budget runs out.

    Args:
        f: integrand, finite on (lo, hi); integrable endpoint
           singularities are fine because no endpoint is ever evaluated.
        lo, hi: finite bounds with lo < hi.
        cfg: tolerances; defaults to QuadratureConfig().

    Raises:
        ConvergenceError: budget exhausted before reaching tolerance; the
            exception carries the best estimate and its error bound.
        ValueError: on invalid bounds.
    """
    if cfg is None:
        cfg = QuadratureConfig()
    if math.isnan(lo) or math.isnan(hi) or math.isinf(lo) or math.isinf(hi):
        raise ValueError(f"integrate: bounds must be finite, got [{lo!r}, {hi!r}]")
    if not lo < hi:
        raise ValueError(f"integrate: need lo < hi, got [{lo!r}, {hi!r}]")
    val, err = _gk15(f, lo, hi)
    total = val
    total_err = err
    # heap entries: (-err, insertion counter, a, b, value, err)
    counter = 0
    heap = [(-err, counter, lo, hi, val, err)]
    n_intervals = 1
    while total_err > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        if n_intervals >= cfg.max_subdivisions:
            raise ConvergenceError(
                f"integrate: no convergence within {cfg.max_subdivisions} subdivisions",
                estimate=total,
                error_bound=total_err,
            )
        _, _, a, b, v0, e0 = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if not (a < mid < b):
            raise ConvergenceError(
                "integrate: interval too small to bisect further",
                estimate=total,
                error_bound=total_err,
            )
        v1, e1 = _gk15(f, a, mid)
        v2, e2 = _gk15(f, mid, b)
        total += (v1 + v2) - v0
        total_err += (e1 + e2) - e0
        counter += 1
        heapq.heappush(heap, (-e1, counter, a, mid, v1, e1))
        counter += 1
        heapq.heappush(heap, (-e2, counter, mid, b, v2, e2))
        n_intervals += 1
    return total
