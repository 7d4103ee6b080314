"""Tests for the p-value combination rules.

Reference values below were computed independently from the defining
formulas (chi-square tail sums, normal quantile sums, order-statistic
distribution) with scipy, then frozen as literals.
"""

import pytest

from pconj.combiners import (
    P_METHODS,
    bonferroni_g,
    fisher_g,
    minimum_g,
    partial_conjunction_p,
    stouffer_g,
)

PV = [0.01, 0.04, 0.1, 0.2, 0.5, 0.8]

# method -> {gamma: combined p}
ORACLE = {
    "fisher": {
        1: 0.01344310576714898,
        2: 0.09696237537393868,
        4: 0.5372304989318291,
    },
    "stouffer": {
        1: 0.01434815938718974,
        2: 0.08754037391494945,
        4: 0.5,  # selected tail [0.2, 0.5, 0.8] is antisymmetric around 1/2
    },
    "minimum": {
        1: 0.058519850599,
        2: 0.18462730240000014,
        4: 0.4879999999999999,
    },
    "bonferroni": {
        1: 0.06,
        2: 0.2,
        4: 0.6000000000000001,
    },
}

FUNCS = {
    "fisher": fisher_g,
    "stouffer": stouffer_g,
    "minimum": minimum_g,
    "bonferroni": bonferroni_g,
}


class TestOracleValues:
    @pytest.mark.parametrize("method", sorted(ORACLE))
    def test_reference_points(self, method):
        for gamma, expected in ORACLE[method].items():
            got = FUNCS[method](PV, gamma)
            assert got == pytest.approx(expected, rel=1e-12), f"gamma={gamma}"

    @pytest.mark.parametrize("method", sorted(FUNCS))
    def test_gamma_equals_count_is_identity(self, method):
        # only the largest p-value survives selection, every rule returns it
        assert FUNCS[method](PV, 6) == pytest.approx(0.8, rel=1e-14)

    @pytest.mark.parametrize("method", sorted(FUNCS))
    def test_input_order_irrelevant(self, method):
        shuffled = [0.5, 0.01, 0.8, 0.1, 0.04, 0.2]
        for gamma in (1, 3, 6):
            assert FUNCS[method](PV, gamma) == FUNCS[method](shuffled, gamma)


class TestRangesAndMonotonicity:
    @pytest.mark.parametrize("method", sorted(FUNCS))
    def test_output_in_unit_interval(self, method):
        grids = [
            [0.001, 0.2, 0.35, 0.5, 0.77, 0.999],
            [0.5] * 6,
            [0.9, 0.91, 0.92, 0.93, 0.94, 0.95],
        ]
        for pv in grids:
            for gamma in range(1, 7):
                out = FUNCS[method](pv, gamma)
                assert 0.0 <= out <= 1.0

    @pytest.mark.parametrize("method", ("fisher", "stouffer", "minimum"))
    def test_increasing_in_gamma_on_reference_grid(self, method):
        # raising the replicability target keeps a harder subset here
        prev = 0.0
        for gamma in range(1, 7):
            cur = FUNCS[method](PV, gamma)
            assert cur >= prev - 1e-15
            prev = cur

    def test_bonferroni_clamp_breaks_monotonicity(self):
        # k*min clamps to 1 at gamma=5 (2 * 0.5), then gamma=6 returns 0.8
        assert bonferroni_g(PV, 5) == 1.0
        assert bonferroni_g(PV, 6) == pytest.approx(0.8, rel=1e-14)

    @pytest.mark.parametrize("method", ("fisher", "stouffer", "minimum"))
    def test_monotone_in_evidence(self, method):
        weak = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7]
        strong = [0.02, 0.03, 0.04, 0.05, 0.06, 0.07]
        for gamma in (1, 2, 4):
            assert FUNCS[method](strong, gamma) < FUNCS[method](weak, gamma)


class TestEdgeCases:
    def test_zero_pvalue_in_tail(self):
        pv = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        assert fisher_g(pv, 2) == 0.0
        assert stouffer_g(pv, 2) == 0.0
        assert minimum_g(pv, 2) == 0.0
        assert bonferroni_g(pv, 2) == 0.0

    def test_all_ones(self):
        pv = [1.0] * 6
        assert fisher_g(pv, 1) == pytest.approx(1.0)
        assert stouffer_g(pv, 1) == pytest.approx(1.0)
        assert minimum_g(pv, 1) == pytest.approx(1.0)
        assert bonferroni_g(pv, 1) == 1.0

    def test_stouffer_zero_and_one_conflict(self):
        pv = [0.0, 0.3, 0.4, 0.5, 0.6, 1.0]
        with pytest.raises(ValueError):
            stouffer_g(pv, 1)
        # fisher resolves the same input in favor of the zero
        assert fisher_g(pv, 1) == 0.0

    def test_one_in_tail_does_not_break_fisher(self):
        pv = [0.01, 0.02, 0.03, 0.04, 0.05, 1.0]
        out = fisher_g(pv, 1)
        assert 0.0 < out < 1.0


class TestValidation:
    def test_gamma_out_of_range(self):
        for gamma in (0, 7, -1):
            with pytest.raises(ValueError):
                fisher_g(PV, gamma)

    def test_gamma_must_be_integer(self):
        with pytest.raises(ValueError):
            fisher_g(PV, 2.0)
        with pytest.raises(ValueError):
            fisher_g(PV, True)

    def test_rejects_out_of_range_probabilities(self):
        with pytest.raises(ValueError):
            fisher_g([0.1, 0.2, 0.3, 0.4, 0.5, 1.2], 1)
        with pytest.raises(ValueError):
            minimum_g([-0.1, 0.2, 0.3, 0.4, 0.5, 0.6], 1)
        with pytest.raises(ValueError):
            stouffer_g([0.1, 0.2, float("nan"), 0.4, 0.5, 0.6], 1)

    def test_empty_input(self):
        with pytest.raises(ValueError):
            fisher_g([], 1)


class TestDispatch:
    def test_known_methods(self):
        assert set(P_METHODS) == {"fisher", "stouffer", "minimum", "bonferroni"}
        for name, func in FUNCS.items():
            assert partial_conjunction_p(PV, 2, method=name) == func(PV, 2)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            partial_conjunction_p(PV, 2, method="tippett")
