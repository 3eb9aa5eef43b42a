import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpf

from escargot.checks import CoverageError, IdentityError
from escargot.hyperscale import (ONE, GrowthParams, LogMag, build_growth_table, estimate_log10_log_a, k_m_bounds,
                                 k_m_exact, lg, log1m_exp, logmag_add, logmag_div, logmag_mul, logmag_pow,
                                 monotone_growth_report, policy_digits, precision_sufficiency, sign_parity_report,
                                 verify_lemma1, verify_lemma1_internals, window)
from escargot.seqcore import SeqParams, T, build_sequence_table

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


class TestLogMag:
    def test_pow_mul_div(self):
        x = LogMag(mpf("12.5"))
        assert logmag_pow(x, 27).log == 27 * x.log
        assert logmag_mul(x, LogMag(-x.log)) == ONE

    def test_add_examples(self):
        with mp.workdps(40):
            assert abs(logmag_add(ONE, ONE).log - mp.ln2) < mpf(10) ** -38
            assert abs(logmag_add(LogMag(mp.log(3)), ONE).log - mp.log(4)) < mpf(10) ** -38
            big = LogMag(mpf(10) ** 6)
            assert logmag_add(big, ONE, 40) is big

    def test_from_value(self):
        assert LogMag.from_value(1) == ONE
        with pytest.raises(ValueError):
            LogMag.from_value(0)

    @given(finite, finite)
    def test_comparison_is_log_comparison(self, a, b):
        assert (LogMag(a) < LogMag(b)) == (a < b)
        assert (LogMag(a) >= LogMag(b)) == (a >= b)

    @given(finite, st.sampled_from([2, 10, 27, 1331]))
    def test_pow_round_trip(self, a, c):
        with mp.workdps(50):
            x = LogMag(mpf(a))
            y = logmag_pow(logmag_pow(x, c), mpf(1) / c)
            assert abs(y.log - x.log) <= mpf(10) ** -45 * max(1, abs(x.log))

    @settings(max_examples=60)
    @given(st.floats(min_value=-300, max_value=300), st.floats(min_value=-300, max_value=300))
    def test_add_matches_linear(self, a, b):
        with mp.workdps(40):
            got = logmag_add(LogMag(mpf(a)), LogMag(mpf(b)), 40).log
            want = mp.log(mp.exp(mpf(a)) + mp.exp(mpf(b)))
            assert abs(got - want) <= mpf(10) ** -35 * max(1, abs(want))


class TestLog1mExp:
    @settings(max_examples=80)
    @given(st.floats(min_value=-200, max_value=-1e-30))
    def test_against_high_precision_naive(self, d):
        with mp.workdps(40):
            got = log1m_exp(mpf(d), absorb=False)
        with mp.workdps(140):
            want = mp.log(1 - mp.exp(mpf(d)))
        assert abs(got - want) <= mpf(10) ** -36 * abs(want)

    def test_absorption_below_window(self):
        with mp.workdps(30):
            d = -window(30) - 1
            assert log1m_exp(d) == 0
            tiny = log1m_exp(d, absorb=False)
            assert tiny < 0 and abs(tiny + mp.exp(d)) <= abs(tiny) * mpf(10) ** -25

    def test_lg_equal_raises(self):
        with pytest.raises(IdentityError):
            lg(mpf(5), mpf(5))

    def test_lg_is_symmetric_in_ratio(self):
        with mp.workdps(40):
            b, c = mpf(10), mpf(12)
            assert abs(lg(b, c) - mp.log(abs(1 - mp.exp(b - c)))) < mpf(10) ** -35
            assert abs(lg(c, b) - mp.log(abs(1 - mp.exp(c - b)))) < mpf(10) ** -35


class TestParams:
    def test_invalid(self):
        with pytest.raises(ValueError):
            GrowthParams(log10_a3=5)
        with pytest.raises(ValueError):
            GrowthParams(N1=11)
        with pytest.raises(ValueError):
            GrowthParams(n_max=11)

    def test_policy(self):
        assert policy_digits(100.2, 12) == 101 + 30 + 40
        # default params need ~216 digits at n = 41
        assert GrowthParams().digits() == policy_digits(estimate_log10_log_a(100, 41), 41)
        assert 200 < GrowthParams().digits() < 230


@pytest.fixture(scope="module")
def built():
    gp = GrowthParams()
    seq = build_sequence_table(SeqParams(), 42, prec=gp.digits() + 10)
    return gp, seq, build_growth_table(gp, seq)


class TestGrowthTable:
    def test_seed_rule(self, built):
        _, _, tab = built
        with mp.workdps(tab.precision):
            assert tab.log_a[4] == 27 * tab.log_a[3]
            assert logmag_div(tab.a(4), logmag_pow(tab.a(3), 27)).log == 0
            assert float(tab.log_a[3]) == pytest.approx(230.2585, abs=1e-4)

    def test_b_relation(self, built):
        _, _, tab = built
        with mp.workdps(tab.precision):
            for n in (3, 12, 25, 41):
                t = T(n)
                assert tab.log_b[n] == tab.log_a[n] + mp.log(mpf(t) / (t + 2))
                # 2 log(1 - b_n/a_n) = 2 (log 2 - log(T_n + 2))
                lhs = 2 * lg(tab.log_b[n], tab.log_a[n])
                rhs = 2 * (mp.ln2 - mp.log(t + 2))
                assert abs(lhs - rhs) <= mpf(10) ** (10 - tab.precision) * abs(tab.log_a[n])

    def test_coverage(self, built):
        _, _, tab = built
        with pytest.raises(CoverageError):
            tab.a(tab.n_max + 2)
        with pytest.raises(CoverageError):
            tab.b(2)

    def test_monotone_and_parity(self, built):
        _, _, tab = built
        assert monotone_growth_report(tab).passed
        rep = sign_parity_report(tab)
        assert rep.passed and len(rep.rows) == tab.n_max - 12 + 1
        assert all(tab.seed[n] == (n < 12) for n in range(3, 42))

    def test_export(self, built):
        _, _, tab = built
        rows = tab.export()
        assert rows[0]["n"] == 3 and rows[-1]["n"] == 41
        assert all(mpf(r["log_a"]) > 0 for r in rows)

    def test_precision_sufficiency(self, built):
        gp, seq, tab = built
        rep = precision_sufficiency(gp, seq, table=tab)
        assert rep.passed

    def test_precision_sufficiency_flags_low_precision(self, built):
        _, seq, _ = built
        gp = GrowthParams(n_max=20, precision=8)
        rep = precision_sufficiency(gp, seq)
        assert not rep.passed

    def test_sign_assertion(self, built, monkeypatch):
        import escargot.hyperscale as hs

        gp, seq, _ = built
        monkeypatch.setattr(hs, "recursion_step", lambda n, la, lb, s: (la[n] * n**3, -1))
        with pytest.raises(IdentityError):
            hs.build_growth_table(GrowthParams(n_max=14), seq)


class TestSequenceInequalities:
    def test_thresholds_and_examples(self, built):
        _, seq, tab = built
        reps = {r.name: r for r in verify_lemma1(tab, seq)}
        for r in reps.values():
            assert r.threshold is not None and r.threshold <= 14
        row3 = {r.key: r for r in reps["lemma1.aapprox2"].rows}[3]
        assert row3.passed and float(row3.margin) == pytest.approx(230.2585 - math.exp(3), abs=1e-3)
        row3 = {r.key: r for r in reps["lemma1.i1_mu"].rows}[3]
        assert float(row3.margin) == pytest.approx(2 * 230.2585 - math.exp(1.5), abs=1e-3)
        # seed regime: the exponent is exactly n^3, so the margin is the full 2/n slack
        for row in reps["lemma1.aapprox"].rows:
            if row.key < 12:
                assert float(row.margin) == pytest.approx(2 / row.key, rel=1e-12)

    def test_internals(self, built):
        _, seq, tab = built
        reps = {r.name: r for r in verify_lemma1_internals(tab, seq)}
        assert reps["lemma1.kappa"].passed and reps["lemma1.factorisation"].passed
        for name in ("lemma1.k_m", "lemma1.L1", "lemma1.L2", "lemma1.exponent_ratio"):
            assert reps[name].passed, name
        l1 = {r.key: r for r in reps["lemma1.L1"].rows}[12].detail["log_L1"]
        assert -mp.ln2 < l1 < 0

    def test_k_m_rational(self):
        k = k_m_exact(12)
        assert Fraction(1, 8 * 12**6) < k < Fraction(8, 12**6)
        with mp.workdps(50):
            ok, log_k = k_m_bounds(12)
            assert ok
            assert abs(log_k - mp.log(mpf(k.numerator) / k.denominator)) < mpf(10) ** -40

    @settings(max_examples=20)
    @given(st.integers(min_value=5, max_value=30))
    def test_k_m_bounds_agree_with_fraction(self, m):
        k = k_m_exact(m)
        ok, _ = k_m_bounds(m)
        assert ok == (Fraction(1, 8 * m**6) < k < Fraction(8, m**6))
