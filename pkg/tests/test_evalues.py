"""Tests for Bayes-factor e-values, null calibration, and e-value merging.

Bayes-factor reference values were computed independently by numerical
integration of the defining prior-marginal ratios (scipy quadrature on
the density-weighted integrands, not the closed forms under test), then
frozen as literals.  Agreement is required at near machine precision.
"""

import math
import threading

import pytest

from pconj.evalues import (
    ALT_PRIOR_MULT,
    E_MERGE_RULES,
    NULL_PRIOR_MULT,
    BayesFactorSpec,
    adjusted_e,
    bayes_factor,
    e_merge,
    e_to_p,
    null_expectation,
    partial_conjunction_e,
)
from pconj.models import DEFAULT_SIGMA, beta_model_sample, normal_model_sample
from pconj.rng import RngStream

S05 = 0.5 * DEFAULT_SIGMA
S15 = 1.5 * DEFAULT_SIGMA
S30 = 3.0 * DEFAULT_SIGMA

BETA_SIMPLE = {
    (1e-08, 1.0): 3.4999998916666675,
    (0.05, 1.0): 2.993058586832144,
    (0.3, 1.0): 1.3031696944672948,
    (0.5, 1.0): 0.6377031842142931,
    (0.9, 1.0): 0.1245756470257963,
    (0.99, 1.0): 0.05286003301390517,
    (1e-08, 5.0): 13.499997791666852,
    (0.05, 5.0): 6.141688418845002,
    (0.3, 5.0): 0.42613708043107157,
    (0.5, 5.0): 0.14096251367910845,
    (0.9, 5.0): 0.024916247156594636,
    (0.99, 5.0): 0.010572006608181181,
}

BETA_COMPOSITE = {
    (0.05, 1.0): 20.17541663776235,
    (0.3, 1.0): 2.7685328056746132,
    (0.5, 1.0): 0.7524387051559548,
    (0.9, 1.0): 0.060013412646355735,
    (0.05, 5.0): 206.9134175459615,
    (0.3, 5.0): 4.204048961469718,
    (0.5, 5.0): 0.6001305787560168,
    (0.9, 5.0): 0.007510832253855357,
}

NORMAL_SIMPLE = {
    (0.05, S05): 2.9233926788919895,
    (0.3, S05): 0.7775832951438214,
    (0.5, S05): 0.49509952585356565,
    (0.9, S05): 0.22774478124118894,
    (0.05, S15): 1.2281561047948646,
    (0.3, S15): 0.26843634153075,
    (0.5, S15): 0.16710855164205607,
    (0.9, S15): 0.0759741314148934,
    (0.05, 1.0): 0.26053125367033986,
    (0.3, 1.0): 0.05694394722411429,
    (0.5, 1.0): 0.03544907701811033,
    (0.9, 1.0): 0.016116547055468708,
}

NORMAL_COMPOSITE = {
    (0.05, S15): 11.40000006264711,
    (0.3, S15): 1.4000011783487818,
    (0.5, S15): 0.6000040772354177,
    (0.9, S15): 0.06671443647992113,
    (0.05, S30): 11.400000000000006,
    (0.3, S30): 1.4000000000000004,
    (0.5, S30): 0.6000000000000001,
    (0.9, S30): 0.06666666666666714,
}

E0_BETA = {1.0: 4.026919346178075, 5.0: 34.673103560300184}
E0_NORMAL = {S15: 18.34060469081334, S30: 69.37752360220674}


def beta_spec(strength, null_kind="simple"):
    return BayesFactorSpec(model="beta", strength=strength, null_kind=null_kind)


def normal_spec(strength, null_kind="simple"):
    return BayesFactorSpec(model="normal", strength=strength, null_kind=null_kind)


class TestBayesFactorOracles:
    def test_beta_simple(self):
        for (p, r), expected in BETA_SIMPLE.items():
            assert bayes_factor(p, beta_spec(r)) == pytest.approx(expected, rel=1e-12)

    def test_beta_composite(self):
        for (p, r), expected in BETA_COMPOSITE.items():
            assert bayes_factor(p, beta_spec(r, "composite")) == pytest.approx(expected, rel=1e-12)

    def test_normal_simple(self):
        for (p, r), expected in NORMAL_SIMPLE.items():
            assert bayes_factor(p, normal_spec(r)) == pytest.approx(expected, rel=1e-12)

    def test_normal_composite(self):
        for (p, r), expected in NORMAL_COMPOSITE.items():
            assert bayes_factor(p, normal_spec(r, "composite")) == pytest.approx(expected, rel=1e-12)

    def test_normal_composite_wide_prior_limit(self):
        # once both prior spans dwarf sigma, the ratio flattens to
        # (alt span mass) / (null span mass) ~ 0.6 * (1 - p) / p
        spec = normal_spec(20.0 * DEFAULT_SIGMA, "composite")
        for p in (0.1, 0.4, 0.8):
            limit = (NULL_PRIOR_MULT / ALT_PRIOR_MULT) * (1.0 - p) / p
            assert bayes_factor(p, spec) == pytest.approx(limit, rel=1e-6)


class TestBayesFactorShape:
    @pytest.mark.parametrize(
        "spec",
        [beta_spec(1.0), beta_spec(5.0, "composite"), normal_spec(S15), normal_spec(S15, "composite")],
        ids=["beta-simple", "beta-composite", "normal-simple", "normal-composite"],
    )
    def test_decreasing_in_p(self, spec):
        grid = [0.001, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999]
        values = [bayes_factor(p, spec) for p in grid]
        for lo, hi in zip(values, values[1:]):
            assert hi < lo

    def test_beta_simple_endpoint_is_finite(self):
        # the alt-prior marginal stays bounded as p -> 0
        assert bayes_factor(0.0, beta_spec(1.0)) == pytest.approx(3.5, rel=1e-12)
        assert bayes_factor(0.0, beta_spec(5.0)) == pytest.approx(13.5, rel=1e-12)

    def test_composite_endpoint_diverges(self):
        assert bayes_factor(0.0, beta_spec(1.0, "composite")) == math.inf
        assert bayes_factor(0.0, normal_spec(S15, "composite")) == math.inf

    def test_p_one_gives_zero(self):
        assert bayes_factor(1.0, beta_spec(1.0)) == 0.0
        assert bayes_factor(1.0, normal_spec(S15, "composite")) == 0.0

    def test_normal_simple_extreme_p_log_path(self):
        # below ~8e-305 the direct exp(q^2/2) overflows; the log-domain
        # branch must hand back a finite, still-decreasing value
        spec = normal_spec(S15)
        a = bayes_factor(1e-308, spec)
        b = bayes_factor(1e-310, spec)
        assert math.isfinite(a) and a > 0.0
        assert math.isfinite(b) and b > a

    def test_growth_series_matches_closed_form_at_crossover(self):
        # |w * span| near 0.5 exercises both evaluation routes; the
        # composite denominator flips route as p crosses exp(-0.5/M)
        spec = beta_spec(1.0, "composite")
        m = NULL_PRIOR_MULT * 1.0
        p_cross = math.exp(-0.5 / m)
        lo = bayes_factor(p_cross * (1.0 - 1e-9), spec)
        hi = bayes_factor(p_cross * (1.0 + 1e-9), spec)
        assert lo == pytest.approx(hi, rel=1e-7)


class TestSpecValidation:
    def test_bad_model(self):
        with pytest.raises(ValueError):
            BayesFactorSpec(model="cauchy", strength=1.0)

    def test_bad_strength(self):
        with pytest.raises(ValueError):
            BayesFactorSpec(model="beta", strength=0.0)
        with pytest.raises(ValueError):
            BayesFactorSpec(model="beta", strength=-1.0)

    def test_bad_null_kind(self):
        with pytest.raises(ValueError):
            BayesFactorSpec(model="beta", strength=1.0, null_kind="point")

    def test_bad_sigma(self):
        with pytest.raises(ValueError):
            BayesFactorSpec(model="normal", strength=1.0, sigma=0.0)

    def test_spans(self):
        spec = beta_spec(2.0)
        assert spec.alt_span == 10.0
        assert spec.null_span == 6.0

    def test_bad_p(self):
        with pytest.raises(ValueError):
            bayes_factor(float("nan"), beta_spec(1.0))


class TestNullExpectation:
    def test_simple_is_exactly_one(self):
        assert null_expectation(beta_spec(1.0)) == 1.0
        assert null_expectation(normal_spec(S15)) == 1.0

    def test_beta_composite_reference(self):
        for r, expected in E0_BETA.items():
            assert null_expectation(beta_spec(r, "composite")) == pytest.approx(expected, rel=1e-9)

    def test_normal_composite_reference(self):
        for r, expected in E0_NORMAL.items():
            assert null_expectation(normal_spec(r, "composite")) == pytest.approx(expected, rel=1e-9)

    def test_at_least_one(self):
        for spec in (beta_spec(0.3, "composite"), normal_spec(S05, "composite")):
            assert null_expectation(spec) >= 1.0

    def test_cached(self):
        spec = normal_spec(S30, "composite")
        first = null_expectation(spec)
        # equal spec objects hit the cache and return the identical float
        assert null_expectation(normal_spec(S30, "composite")) == first


class TestAdjustedE:
    def test_simple_null_passthrough(self):
        spec = beta_spec(1.0)
        assert adjusted_e(0.05, spec) == bayes_factor(0.05, spec)

    def test_composite_divides_by_null_mean(self):
        spec = beta_spec(1.0, "composite")
        e0 = null_expectation(spec)
        assert adjusted_e(0.05, spec) == pytest.approx(bayes_factor(0.05, spec) / e0, rel=1e-14)

    def test_markov_bound_beta_composite(self):
        # adjusted e-values from worst-case-null draws satisfy
        # P(e >= t) <= 1/t; check empirically with slack for noise
        spec = beta_spec(5.0, "composite")
        stream = RngStream(2024, 0)
        n = 20000
        evals = [adjusted_e(beta_model_sample(0.0, stream), spec) for _ in range(n)]
        for t in (2.0, 5.0, 20.0):
            bound = 1.0 / t
            frac = sum(1 for e in evals if e >= t) / n
            se = math.sqrt(bound * (1.0 - bound) / n)
            assert frac <= bound + 3.0 * se, f"t={t}"

    def test_markov_bound_normal_simple(self):
        spec = normal_spec(S15)
        stream = RngStream(77, 0)
        n = 20000
        evals = [adjusted_e(normal_model_sample(0.0, stream), spec) for _ in range(n)]
        for t in (1.5, 4.0, 10.0):
            bound = 1.0 / t
            frac = sum(1 for e in evals if e >= t) / n
            se = math.sqrt(bound * (1.0 - bound) / n)
            assert frac <= bound + 3.0 * se, f"t={t}"

    def test_mean_near_one_beta(self):
        # bounded e-values, so the empirical null mean settles fast
        for null_kind in ("simple", "composite"):
            spec = beta_spec(1.0, null_kind)
            stream = RngStream(5150, 0)
            n = 40000
            acc = 0.0
            acc2 = 0.0
            for _ in range(n):
                e = adjusted_e(beta_model_sample(0.0, stream), spec)
                acc += e
                acc2 += e * e
            mean = acc / n
            se = math.sqrt(max(acc2 / n - mean * mean, 0.0) / n)
            assert abs(mean - 1.0) <= 4.0 * se, null_kind


class TestMerging:
    def test_rules_present(self):
        assert set(E_MERGE_RULES) == {"product", "arithmetic", "harmonic"}

    def test_product(self):
        assert e_merge([2.0, 3.0, 0.5], "product") == pytest.approx(3.0, rel=1e-15)

    def test_arithmetic(self):
        assert e_merge([2.0, 3.0, 0.5, 0.5], "arithmetic") == pytest.approx(1.5, rel=1e-15)

    def test_harmonic(self):
        assert e_merge([1.0, 2.0, 4.0], "harmonic") == pytest.approx(12.0 / 7.0, rel=1e-15)

    def test_product_corner_cases(self):
        assert e_merge([math.inf, 0.0], "product") == math.inf  # infinity scan wins
        assert e_merge([0.0, 5.0], "product") == 0.0
        assert e_merge([math.inf, 2.0], "arithmetic") == math.inf

    def test_harmonic_corner_cases(self):
        assert e_merge([0.0, 3.0], "harmonic") == 0.0
        assert e_merge([math.inf, math.inf], "harmonic") == math.inf

    def test_rejects_negative_or_nan(self):
        with pytest.raises(ValueError):
            e_merge([1.0, -0.5], "product")
        with pytest.raises(ValueError):
            e_merge([float("nan")], "arithmetic")
        with pytest.raises(ValueError):
            e_merge([], "product")

    def test_unknown_rule(self):
        with pytest.raises(ValueError):
            e_merge([1.0], "geometric")


class TestPartialConjunctionE:
    EVALS = [8.0, 0.5, 3.0, 1.0, 12.0, 2.0]

    def test_keeps_smallest(self):
        # gamma=2 keeps the five smallest: 0.5,1,2,3,8
        assert partial_conjunction_e(self.EVALS, 2, "product") == pytest.approx(24.0, rel=1e-12)
        assert partial_conjunction_e(self.EVALS, 2, "arithmetic") == pytest.approx(2.9, rel=1e-12)

    def test_gamma_full_keeps_minimum(self):
        assert partial_conjunction_e(self.EVALS, 6, "product") == 0.5
        assert partial_conjunction_e(self.EVALS, 6, "harmonic") == 0.5

    def test_gamma_one_uses_all(self):
        total = 8.0 * 0.5 * 3.0 * 1.0 * 12.0 * 2.0
        assert partial_conjunction_e(self.EVALS, 1, "product") == pytest.approx(total, rel=1e-12)

    def test_monotone_in_gamma(self):
        # dropping the largest entries can only shrink the product
        prev = math.inf
        for gamma in range(1, 7):
            cur = partial_conjunction_e([2.0, 3.0, 4.0, 5.0, 6.0, 7.0], gamma, "product")
            assert cur <= prev
            prev = cur

    def test_gamma_validation(self):
        with pytest.raises(ValueError):
            partial_conjunction_e(self.EVALS, 0)
        with pytest.raises(ValueError):
            partial_conjunction_e(self.EVALS, 7)


class TestEToP:
    def test_basic(self):
        assert e_to_p(4.0) == 0.25
        assert e_to_p(0.5) == 1.0
        assert e_to_p(1.0) == 1.0

    def test_corners(self):
        assert e_to_p(0.0) == 1.0
        assert e_to_p(math.inf) == 0.0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            e_to_p(-1.0)


class TestCacheThreadSafety:
    def test_concurrent_null_expectation(self):
        spec = BayesFactorSpec(model="beta", strength=2.5, null_kind="composite")
        results = []

        def worker():
            results.append(null_expectation(spec))

        threads = [threading.Thread(target=worker) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(set(results)) == 1
