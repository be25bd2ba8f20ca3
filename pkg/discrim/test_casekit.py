import logging
import math
import os

import pytest
from hypothesis import given, settings, strategies as st

from .backends import DictResidueBackend
from .casekit import (
    BRUTE_FORCE,
    Case,
    CaseTag,
    ClassificationError,
    CollisionCertificate,
    ExhaustionError,
    RangeError,
    brute_force_collision,
    classify,
    collide,
    collide_case_i,
    collide_case_ii,
    collide_case_iii,
    collide_case_iv,
    collide_case_v,
    collide_case_vi,
    factorize,
    lift_pair,
    validate_range,
    verify_certificate,
)
from .modarith import DomainError, three_power_exponent


def _valid_moduli(n):
    k = three_power_exponent(n)
    return range(math.isqrt(n) + 1, 3**k)


def _assert_collides(cert):
    modulus = cert.m * cert.m
    assert 1 <= cert.a < cert.b <= cert.n
    assert (cert.a**3 + cert.a) % modulus == (cert.b**3 + cert.b) % modulus
    assert verify_certificate(cert)


class TestFactorize:
    def test_examples(self):
        fm = factorize(44)
        assert fm.factors == ((2, 2), (11, 1))
        assert (fm.delta, fm.p, fm.r) == (4, 11, 1)

        fm = factorize(50)
        assert fm.factors == ((2, 1), (5, 2))
        assert (fm.delta, fm.p, fm.r) == (2, 5, 2)

        fm = factorize(12)
        assert fm.factors == ((2, 2), (3, 1))
        assert fm.p is None

    def test_largest_prime_is_split_off(self):
        fm = factorize(2 * 5 * 7**2)
        assert (fm.delta, fm.p, fm.r) == (10, 7, 2)
        assert fm.exponent(5) == 1
        assert fm.primes() == [2, 5, 7]

    def test_domain(self):
        with pytest.raises(DomainError):
            factorize(1)
        with pytest.raises(DomainError):
            factorize(2**64)

    @given(st.integers(2, 10**9))
    def test_product_is_m(self, m):
        fm = factorize(m)
        assert math.prod(p**e for p, e in fm.factors) == m
        if fm.p is not None:
            assert fm.delta * fm.p**fm.r == m
            assert fm.delta % fm.p


class TestValidateRange:
    def test_examples(self):
        assert validate_range(100, 16).k == 3
        assert validate_range(90, 10).k == 3
        with pytest.raises(RangeError) as e:
            validate_range(100, 10)
        assert e.value.inequality == "sqrt(n) < m"

    def test_upper_bounds(self):
        with pytest.raises(RangeError) as e:
            validate_range(100, 27)
        assert e.value.inequality == "m < 3^k"

    def test_domain(self):
        with pytest.raises(DomainError):
            validate_range(1, 5)


class TestClassify:
    def test_examples(self):
        assert classify(factorize(16)) == CaseTag(Case.II, r=4)
        assert classify(factorize(35)) == CaseTag(Case.V, r=0, s=0, has5=True)
        assert classify(factorize(44)) == CaseTag(Case.VI, delta=4, p=11, r=1)
        assert classify(factorize(12)) == CaseTag(Case.III, r=2, s=1)
        assert classify(factorize(20)) == CaseTag(Case.IV, r=2, s=0)
        assert classify(factorize(15)) == CaseTag(Case.I, delta=3, p=5, r=1)

    def test_case_vi_uses_a_large_full_power(self):
        # 7 is the largest prime but 25 is the power >= 11.
        tag = classify(factorize(2 * 25 * 7))
        assert tag == CaseTag(Case.VI, delta=14, p=5, r=2)

    def test_powers_of_three_have_no_case(self):
        with pytest.raises(ClassificationError):
            classify(factorize(27))

    def test_tag_rendering(self):
        tag = CaseTag(Case.VI, delta=4, p=11, r=1)
        assert str(tag) == "VI(delta=4, p=11, r=1)"
        assert tag.to_dict() == {"case": "VI", "delta": 4, "p": 11, "r": 1}

    def test_total_on_every_valid_modulus(self):
        moduli = set()
        for n in range(2, 5001):
            moduli.update(_valid_moduli(n))
        for m in sorted(moduli):
            assert isinstance(classify(factorize(m)).case, Case)


class TestCertificates:
    def test_verify_examples(self):
        assert verify_certificate(CollisionCertificate(100, 16, 11, 15, 8))
        assert not verify_certificate(CollisionCertificate(100, 16, 11, 15, 7))
        assert verify_certificate(CollisionCertificate(14, 7, 3, 10, 20))

    def test_verify_rejects_out_of_range_pairs(self):
        assert not verify_certificate(CollisionCertificate(14, 16, 11, 15, 8))
        assert not verify_certificate(CollisionCertificate(100, 16, 15, 11, -8))
        assert not verify_certificate(CollisionCertificate(100, 16, "x", 15, 8))

    def test_dict_round_trip(self):
        cert = collide(100, 16)
        assert cert.to_dict() == {
            "n": 100, "m": 16, "a": 11, "b": 15, "quotient": 8, "case": "II"
        }
        restored = CollisionCertificate.from_dict(cert.to_dict())
        assert restored == cert
        assert restored.case_name == "II"

    def test_brute_force(self):
        cert = brute_force_collision(100, 16)
        assert cert.case_used == BRUTE_FORCE
        _assert_collides(cert)
        # gap 3 already works: 3 * 67^2 + 9 * 67 + 10 = 55 * 256.
        assert (cert.a, cert.b) == (67, 70)

    def test_brute_force_exhaustion(self):
        with pytest.raises(ExhaustionError):
            brute_force_collision(9, 3)


class TestCases:
    def test_collide_examples(self):
        cert = collide(100, 16)
        assert (cert.a, cert.b, cert.quotient, cert.case_name) == (11, 15, 8, "II")

        cert = collide(1000, 44)
        assert (cert.a, cert.b, cert.quotient, cert.case_name) == (38, 54, 53, "VI")

    def test_collide_rejects_invalid_ranges(self):
        with pytest.raises(RangeError):
            collide(100, 10)

    def test_case_i(self):
        cert = collide_case_i(150, 1, 13, 1)
        assert (cert.a, cert.b) == (2, 15)
        cert = collide_case_i(90, 2, 5, 1)
        assert (cert.a, cert.b, cert.quotient) == (8, 20, 75)
        _assert_collides(collide_case_i(105, 3, 5, 1))

    def test_case_ii(self):
        cert = collide_case_ii(100, 4)
        assert (cert.a, cert.b) == (11, 15)
        cert = collide_case_ii(70, 3)
        assert (cert.a, cert.b) == (1, 5)
        cert = collide_case_ii(1100, 5)
        assert cert.b - cert.a == 4
        assert 3 <= cert.a + 2 <= 63
        _assert_collides(cert)

    def test_case_iii(self):
        cert = collide_case_iii(100, 2, 1)
        assert (cert.a, cert.b, cert.quotient) == (1, 10, 7)
        cert = collide_case_iii(150, 1, 2)
        assert (cert.a, cert.b) == (1, 82)
        cert = collide_case_iii(400, 2, 2)
        assert cert.b - cert.a == 81
        _assert_collides(cert)

    def test_case_iv(self):
        cert = collide_case_iv(100, 2, 0)
        assert cert.b - cert.a == 25
        assert cert.case_name == "IV"
        _assert_collides(cert)
        _assert_collides(collide_case_iv(1400, 1, 2))
        cert = collide_case_iv(600, 3, 0)
        assert cert.b - cert.a == 25
        _assert_collides(cert)

    def test_case_v(self):
        cert = collide_case_v(14, 0, 0, False)
        assert (cert.a, cert.b, cert.quotient) == (3, 10, 20)
        cert = collide_case_v(100, 1, 0, False)
        assert (cert.a, cert.b, cert.quotient) == (3, 17, 25)
        cert = collide_case_v(400, 0, 0, True)
        assert (cert.a, cert.b) == (3, 178)

    def test_case_vi(self):
        cert = collide_case_vi(1000, 4, 11, 1)
        assert (cert.a, cert.b, cert.quotient) == (38, 54, 53)
        _assert_collides(collide_case_vi(2100, 4, 13, 1))

    def test_lift_pair(self):
        assert lift_pair(1000, 4, 11, 1) == (38, 54)

    def test_under_threshold_still_constructs(self, caplog):
        with caplog.at_level(logging.DEBUG, logger="discrim.casekit"):
            cert = collide_case_vi(730, 4, 11, 1)
        _assert_collides(cert)
        assert not any(r.levelno >= logging.WARNING for r in caplog.records)

    @pytest.mark.parametrize("n", [2, 10, 100, 729, 730, 2000, 6561, 6562, 10000])
    def test_every_modulus_in_band(self, n):
        for m in _valid_moduli(n):
            _assert_collides(collide(n, m))

    @given(st.data())
    @settings(max_examples=300, deadline=None)
    def test_certificates_match_residue_scan(self, data):
        n = data.draw(st.integers(2, 2000))
        moduli = list(_valid_moduli(n))
        if not moduli:
            return
        m = data.draw(st.sampled_from(moduli))
        cert = collide(n, m)
        _assert_collides(cert)
        a, b = DictResidueBackend().first_collision(n, m)
        assert b <= cert.b


_EXHAUSTIVE = pytest.mark.skipif(
    os.environ.get("TEST_EXHAUSTIVE", default="0") != "1",
    reason="Exhaustive range skipped because $TEST_EXHAUSTIVE != 1.",
)


class TestPriorityOverlaps:
    def test_fourteen_is_case_i(self):
        # 14 = 2 * 7 also fits the a = 3, b = 3 + m^2/14 construction.
        assert classify(factorize(14)) == CaseTag(Case.I, delta=2, p=7, r=1)
        cert = collide(100, 14)
        assert cert.case_name == "I"
        _assert_collides(cert)
        assert verify_certificate(CollisionCertificate(100, 14, 3, 17, 25))

    def test_case_vi_prime_power(self):
        fm = factorize(2 * 25 * 7)
        assert [pp.value for pp in fm.prime_powers()] == [2, 25, 7]


class TestExhaustive:
    @_EXHAUSTIVE
    def test_every_modulus_for_every_n_up_to_ten_thousand(self):
        for n in range(2, 10_001):
            for m in _valid_moduli(n):
                _assert_collides(collide(n, m))

    @_EXHAUSTIVE
    @given(st.data())
    @settings(max_examples=1000, deadline=None)
    def test_thousand_random_pairs(self, data):
        n = data.draw(st.integers(2, 10_000))
        moduli = list(_valid_moduli(n))
        if not moduli:
            return
        _assert_collides(collide(n, data.draw(st.sampled_from(moduli))))
