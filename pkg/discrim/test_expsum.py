import cmath
import math

import numpy as np
import pytest

from . import expsum
from .expsum import (
    BudgetExceededError,
    ExpSumCtx,
    check_bounds,
    diagonal_free,
    gauss_sum,
    identity_report,
    kloosterman,
    kloosterman_checks,
    make_ctx,
    monotonicity_witness,
    n_count,
    ramanujan_sums,
    row_sum,
    s_j,
    t_j,
    threshold_check,
    unit_phase,
)
from .modarith import DomainError


def _brute_n(ctx):
    modulus = ctx.modulus
    return sum(
        1
        for a in range(1, ctx.X + 1)
        for b in range(1, ctx.X + 1)
        if (ctx.delta4 * (a * a + a * b + b * b) + 1) % modulus == 0
    )


class TestContext:
    def test_make_ctx(self):
        assert make_ctx(1, 5, 2) == ExpSumCtx(delta=1, p=5, r=2, X=50, rho=2)
        assert make_ctx(3, 5, 1) == ExpSumCtx(delta=3, p=5, r=1, X=2, rho=0)
        assert make_ctx(2, 11, 1) == ExpSumCtx(delta=2, p=11, r=1, X=11, rho=1)
        assert make_ctx(1, 29, 1).X == 3 * 29

    def test_rejects_bad_parameters(self):
        for args in [(4, 5, 1), (1, 7, 1), (1, 3, 1), (1, 25, 1), (1, 5, 0)]:
            with pytest.raises(DomainError):
                make_ctx(*args)

    def test_unit_phase(self):
        assert unit_phase(0, 7) == 1
        assert abs(unit_phase(1, 4) - 1j) < 1e-15
        assert abs(unit_phase(10**30 + 1, 4) - 1j) < 1e-15
        with pytest.raises(DomainError):
            unit_phase(1, 0)


class TestGauss:
    @pytest.mark.parametrize("p, j", [(5, 1), (5, 2), (7, 1), (7, 2), (11, 1), (13, 1)])
    def test_closed_matches_direct(self, p, j):
        for c in range(1, p):
            direct = gauss_sum(c, p, j, "direct")
            closed = gauss_sum(c, p, j, "closed")
            assert abs(direct - closed) < 1e-9 * p ** (j / 2)

    def test_magnitude(self):
        assert abs(abs(gauss_sum(3, 13, 1)) - math.sqrt(13)) < 1e-9

    def test_closed_needs_unit(self):
        with pytest.raises(DomainError):
            gauss_sum(5, 5, 1, "closed")

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            gauss_sum(1, 5, 1, "fft")


class TestKloosterman:
    @pytest.mark.parametrize("p, j", [(5, 1), (5, 2), (5, 3), (7, 1), (7, 2)])
    def test_weil_and_vanishing(self, p, j):
        report = kloosterman_checks(p, j)
        assert report.passed, report.to_dict()

    def test_ramanujan_at_zero(self):
        assert abs(kloosterman(0, 5, 1) + 1) < 1e-9
        assert abs(kloosterman(0, 5, 2)) < 1e-9

    def test_real_valued(self):
        # Pairing c with c^-1 u shows K is real.
        assert abs(kloosterman(3, 11, 1).imag) < 1e-9

    @pytest.mark.parametrize("p, j", [(5, 1), (5, 3), (7, 2), (11, 2)])
    def test_ramanujan_sums(self, p, j):
        q = p**j
        sums = ramanujan_sums(p, j)
        for v in range(q):
            direct = sum(
                cmath.exp(2j * math.pi * c * v / q) for c in range(1, q + 1) if c % p
            )
            assert abs(direct - sums[v]) < 1e-8


class TestSums:
    @pytest.mark.parametrize("delta, p", [(1, 5), (2, 5), (3, 11)])
    def test_s_closed_matches_direct_level_one(self, delta, p):
        ctx = make_ctx(delta, p, 1)
        for x in range(1, p + 1):
            for y in range(1, p + 1):
                direct = s_j(x, y, ctx, 1, "direct")
                closed = s_j(x, y, ctx, 1, "closed")
                assert abs(direct - closed) < 1e-9 * p**1.5

    def test_s_closed_matches_direct_at_25(self):
        ctx = make_ctx(1, 5, 1)
        for x, y in [(1, 1), (3, 7), (5, 10), (25, 25), (12, 19), (24, 1)]:
            direct = s_j(x, y, ctx, 2, "direct")
            closed = s_j(x, y, ctx, 2, "closed")
            assert abs(direct - closed) < 1e-9 * 25**1.5

    def test_worked_t1(self):
        ctx = make_ctx(1, 5, 2)
        assert abs(t_j(ctx, 1, "closed_small_j") - 500) < 1e-9
        assert abs(t_j(ctx, 1, "direct") - 500) < 1e-6

    def test_direct_evaluates_phases(self, monkeypatch):
        ctx = make_ctx(1, 5, 2)
        assert abs(t_j(ctx, 1, "direct") - 500) < 1e-6
        monkeypatch.setattr(
            expsum, "_phases", lambda numerators, den: np.zeros(np.shape(numerators), dtype=complex)
        )
        assert abs(t_j(ctx, 1, "direct")) < 1e-9

    @pytest.mark.parametrize("j", [1, 2, 3])
    def test_direct_matches_term_by_term_sum(self, j):
        ctx = make_ctx(2, 5, 2)
        q = ctx.p**j
        expected = sum(
            cmath.exp(2j * math.pi * ((c * (ctx.delta4 * (a * a + a * b + b * b) + 1)) % q) / q)
            for c in range(1, q + 1)
            if c % ctx.p
            for a in range(1, ctx.X + 1)
            for b in range(1, ctx.X + 1)
        )
        direct = t_j(ctx, j, "direct")
        assert abs(direct - expected) < 1e-6 * max(1.0, abs(expected))

    @pytest.mark.parametrize("delta, p, r", [(1, 5, 2), (3, 11, 1)])
    def test_fft_matches_direct(self, delta, p, r):
        ctx = make_ctx(delta, p, r)
        for j in range(1, 2 * r + 1):
            direct = t_j(ctx, j, "direct")
            assert abs(t_j(ctx, j, "fft") - direct) < 1e-6 * max(1.0, abs(direct))

    @pytest.mark.parametrize("delta", [1, 2, 3])
    def test_t_closed_matches_direct(self, delta):
        ctx = make_ctx(delta, 5, 2)
        for j in range(1, ctx.rho + 1):
            assert abs(t_j(ctx, j, "closed_small_j") - t_j(ctx, j, "direct")) < 1e-6

    @pytest.mark.parametrize("delta, p, r", [(1, 5, 1), (2, 5, 2), (1, 11, 1)])
    def test_t_transform_matches_direct(self, delta, p, r):
        ctx = make_ctx(delta, p, r)
        for j in range(1, 2 * r + 1):
            direct = t_j(ctx, j, "direct")
            transformed = t_j(ctx, j, "transform")
            assert abs(direct - transformed) < 1e-6 * max(1.0, abs(direct))

    def test_t_closed_only_for_small_j(self):
        with pytest.raises(DomainError):
            t_j(make_ctx(1, 5, 2), 3, "closed_small_j")

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            s_j(1, 1, make_ctx(1, 5, 2), 2, "direct", budget=100)
        with pytest.raises(BudgetExceededError):
            n_count(make_ctx(1, 11, 2), "brute", budget=1000)


class TestCount:
    @pytest.mark.parametrize("delta", [1, 2, 3])
    @pytest.mark.parametrize("p, r", [(5, 1), (5, 2), (11, 1), (11, 2)])
    def test_expansion_matches_brute(self, delta, p, r):
        ctx = make_ctx(delta, p, r)
        brute = n_count(ctx, "brute")
        expansion = n_count(ctx, "expansion")
        assert round(expansion) == brute
        assert abs(expansion - brute) < 1e-4

    @pytest.mark.parametrize("delta, p, r", [(1, 5, 1), (2, 5, 2), (3, 11, 1)])
    def test_brute_matches_loop(self, delta, p, r):
        ctx = make_ctx(delta, p, r)
        assert n_count(ctx, "brute") == _brute_n(ctx)

    @pytest.mark.parametrize("delta, p, r", [(1, 5, 1), (2, 5, 2), (1, 11, 2)])
    def test_diagonal_free(self, delta, p, r):
        assert diagonal_free(make_ctx(delta, p, r))

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            n_count(make_ctx(1, 5, 1), "sieve")


class TestReports:
    @pytest.mark.parametrize("delta, p, r", [(1, 5, 1), (3, 5, 1), (2, 11, 1), (1, 5, 2)])
    def test_identity_report_passes(self, delta, p, r):
        report = identity_report(make_ctx(delta, p, r))
        assert report.passed, report.to_dict()
        names = [entry["name"] for entry in report.to_dict()]
        assert "count_expansion" in names
        assert "s_1_closed" in names
        assert "t_1_ramanujan" in names

    @pytest.mark.parametrize("delta, p, r, j", [(1, 5, 2, 3), (1, 5, 2, 4), (1, 11, 1, 2), (2, 5, 1, 2)])
    def test_bounds_hold(self, delta, p, r, j):
        report = check_bounds(make_ctx(delta, p, r), j)
        assert report.passed, report.to_dict()
        names = {entry["name"] for entry in report.to_dict()}
        assert {"row_sum", "s_j_max", "t_j_magnitude", "count_deviation"} <= names

    def test_bounds_skip_complete_levels(self):
        report = check_bounds(make_ctx(1, 5, 2), 1)
        names = {entry["name"] for entry in report.to_dict()}
        assert "row_sum" not in names
        assert "kloosterman_max" in names

    def test_row_sum_bound(self):
        for q in [5, 25, 125, 11, 121]:
            for X in [1, q // 3, q // 2, q - 1]:
                assert row_sum(X, q) <= q * (2 + math.log(q))

    def test_report_entry_shape(self):
        entry = kloosterman_checks(5, 1).to_dict()[0]
        assert set(entry) == {"name", "measured", "bound", "pass"}


class TestThresholds:
    def test_monotonicity_witness(self):
        assert monotonicity_witness(680) > 0
        assert abs(monotonicity_witness(680) - 4.7) < 0.1
        assert monotonicity_witness(600) < 0

    def test_p5_cutoff(self):
        assert threshold_check(5, 9).check1
        assert threshold_check(5, 9).relevant_check
        assert not threshold_check(5, 7).check1
        assert threshold_check(5, 1).check2 is None

    def test_large_p_cutoff(self):
        report = threshold_check(11, 1)
        assert not report.check3
        assert not report.relevant_check
        assert report.check2
        assert threshold_check(11, 6).check3

    def test_report_fields(self):
        report = threshold_check(5, 9)
        assert report.q == pytest.approx(math.sqrt(5**9))
        assert report.f_q == pytest.approx(monotonicity_witness(math.sqrt(5**9)))
        assert set(report.to_dict()) == {"p", "r", "check1", "check2", "check3", "q", "f_q"}

    def test_domain(self):
        with pytest.raises(DomainError):
            threshold_check(4, 1)
        with pytest.raises(DomainError):
            threshold_check(5, 0)
