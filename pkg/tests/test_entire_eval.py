import random

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpc, mpf

from escargot.checks import CoverageError
from escargot.entire_eval import (DiscSpec, LogComplex, ZeroCatalog, build_catalog, check_disc_map, check_I1_I2,
                                  check_symmetry, decompose_I1_I2, eval_f, eval_f_neg_real, i1_offset, max_modulus,
                                  relative_offset)
from escargot.hyperscale import LogMag


def naive_toy(z, log_a3):
    """z (1 + z/a_3)^2 (1 + z/a_3^3)^2 in plain complex arithmetic."""
    a3 = mp.exp(log_a3)
    return z * (1 + z / a3) ** 2 * (1 + z / a3**3) ** 2


class TestToyOracle:
    def test_catalog_shape(self, toy):
        table, cat = toy
        assert [m for _, m in cat.entries] == [2, 2]
        assert cat.next_log is None

    def test_eval_matches_naive_product(self, toy):
        table, cat = toy
        rnd = random.Random(2024)
        worst = mpf(0)
        with mp.workdps(40):
            for _ in range(100):
                r = mpf(10) ** mpf(rnd.uniform(-5, 30))
                z = r * mp.expjpi(mpf(rnd.uniform(-1, 1)))
                got = eval_f(LogComplex.from_complex(z), cat, 40).to_mpc()
                want = naive_toy(z, table.log_a[3])
                worst = max(worst, abs(got - want) / abs(want))
        assert worst < mpf(10) ** -20

    def test_max_modulus_brute_force(self, toy):
        table, cat = toy
        with mp.workdps(40):
            for lr in (5, 12.5, 20, 29.9):
                r = mpf(10) ** lr
                brute = max(abs(naive_toy(r * mp.expjpi(mpf(2 * j) / 720), table.log_a[3])) for j in range(720))
                got = max_modulus(LogMag(mp.log(r)), cat, 40).value()
                assert abs(got - brute) / brute < mpf(10) ** -20

    def test_local_order_at_double_zero(self, toy):
        table, cat = toy
        with mp.workdps(60):
            c = table.log_a[3]
            ratios = []
            for e in (mpf(10) ** -10, mpf(10) ** -20, mpf(10) ** -30):
                v = eval_f_neg_real(LogMag(c + mp.log1p(e)), cat, 60)
                ratios.append(mp.exp(v.mag.log) / e**2)
            assert all(0 < x < mpf(10) ** 40 for x in ratios)
            assert abs(ratios[2] / ratios[1] - 1) < mpf(10) ** -15


class TestExactCases:
    def test_zero(self, ctx):
        assert eval_f(LogComplex.zero(), ctx.catalog).is_zero

    def test_catalog_zeros(self, ctx):
        tab = ctx.table
        with mp.workdps(tab.precision):
            assert eval_f(LogComplex.neg_real(tab.a(3)), ctx.catalog).is_zero
            assert eval_f_neg_real(tab.a(3), ctx.catalog).is_zero
            # a_3^{mu_{3,1}} = a_3^3
            assert eval_f_neg_real(LogMag(3 * tab.log_a[3]), ctx.catalog).is_zero

    def test_small_z_is_identity(self, ctx):
        tab = ctx.table
        with mp.workdps(30):
            z = LogComplex(tab.log_a[3] - 50 * mp.ln10, mpf("0.3"))
            f = eval_f(z, ctx.catalog, 30)
            assert f.log_mod == z.log_mod and f.arg_pi == z.arg_pi

    def test_negative_real_routes_agree(self, ctx):
        tab = ctx.table
        for n in (3, 12, 20):
            prec = tab.digits_for(n + 1)
            with mp.workdps(prec):
                x = tab.b(n)
                direct = eval_f(LogComplex.neg_real(x), ctx.catalog, prec)
                split = eval_f_neg_real(x, ctx.catalog, prec)
                assert split.sign == -1 and direct.arg_pi == 1
                assert abs(direct.log_mod - split.mag.log) <= mpf(10) ** (5 - prec) * abs(split.mag.log)

    def test_sign_below_first_zero(self, ctx):
        with mp.workdps(ctx.precision):
            for frac in ("0.1", "0.5", "0.999"):
                assert eval_f_neg_real(LogMag(ctx.table.log_a[3] * mpf(frac)), ctx.catalog).sign == -1

    def test_coverage_error(self, ctx):
        with mp.workdps(ctx.precision):
            beyond = LogComplex(ctx.table.log_a[ctx.table.n_max + 1], mpf("0.2"))
            with pytest.raises(CoverageError):
                eval_f(beyond, ctx.catalog)
            with pytest.raises(CoverageError):
                build_catalog(ctx.table, ctx.seq, k_max=ctx.table.n_max + 5)


class TestMaxModulus:
    def test_dominates_samples(self, ctx):
        tab = ctx.table
        with mp.workdps(tab.precision):
            prev = None
            for n in range(3, 30):
                for frac in ("1", "1.3"):
                    r = LogMag(tab.log_a[n] * mpf(frac))
                    M = max_modulus(r, ctx.catalog)
                    assert M.log >= eval_f_neg_real(r, ctx.catalog).mag.log if not \
                        eval_f_neg_real(r, ctx.catalog).is_zero else True
                    assert M.log >= r.log
                    for th in ("0.25", "0.6"):
                        assert M.log >= eval_f(LogComplex(r.log, mpf(th)), ctx.catalog).log_mod
                    assert prev is None or M.log >= prev
                    prev = M.log


class TestCatalog:
    def test_levels_and_multiplicities(self, ctx):
        cat, seq, tab = ctx.catalog, ctx.seq, ctx.table
        expected = sum(k - 1 + (1 if seq[k].two_alpha else 0) for k in range(3, tab.n_max + 1))
        assert len(cat) == expected
        assert all(m % 2 == 0 and m > 0 for _, m in cat.entries)
        assert cat.count_below(tab.log_a[3] + 1) == 2

    def test_dump_load_round_trip(self, ctx, tmp_path):
        p = tmp_path / "zeros.txt"
        with mp.workdps(ctx.precision):
            ctx.catalog.dump(p)
            back = ZeroCatalog.load(p)
        assert back.entries == ctx.catalog.entries
        assert back.next_log == ctx.catalog.next_log and back.next_mult == ctx.catalog.next_mult

    def test_rejects_bad_entries(self):
        with pytest.raises(ValueError):
            ZeroCatalog(((mpf(2), 2), (mpf(1), 2)), 3)
        with pytest.raises(ValueError):
            ZeroCatalog(((mpf(1), 3),), 3)

    def test_truncation_soundness(self, ctx):
        tab = ctx.table
        small = ctx.catalog.truncated(20, tab, ctx.seq)
        with mp.workdps(tab.precision):
            z = DiscSpec.of(15, tab).point(mpf(15) ** -15 / 3 * mp.expjpi(mpf("0.7")))
            a = eval_f(z, small)
            b = eval_f(z, ctx.catalog)
            assert a.log_mod == b.log_mod and a.arg_pi == b.arg_pi


class TestGrouping:
    @settings(max_examples=25)
    @given(st.integers(min_value=3, max_value=25), st.floats(min_value=0.2, max_value=3),
           st.floats(min_value=-1, max_value=1))
    def test_order_invariance_and_symmetry(self, ctx, n, scale, th):
        tab = ctx.table
        prec = tab.precision
        with mp.workdps(prec):
            z = LogComplex(tab.log_a[n] * mpf(scale), mpf(th))
            a = eval_f(z, ctx.catalog, prec)
            b = eval_f(z, ctx.catalog, prec, order="descending")
            tol = mpf(10) ** (10 - prec) * max(1, abs(a.log_mod))
            assert abs(a.log_mod - b.log_mod) <= tol
            c = eval_f(z.conj(), ctx.catalog, prec)
            assert c.log_mod == a.log_mod

    def test_symmetry_report(self, ctx):
        with mp.workdps(ctx.precision):
            pts = [LogComplex(ctx.table.log_a[5] * 2, mpf("0.4")), LogComplex.neg_real(ctx.table.b(12)),
                   LogComplex.pos_real(ctx.table.a(7))]
            rep = check_symmetry(pts, ctx.catalog)
        assert rep.passed and len(rep.rows) == 3


class TestDiscs:
    def test_center_split(self, ctx):
        tab = ctx.table
        with mp.workdps(tab.digits_for(13)):
            I1, I2 = decompose_I1_I2(12, 0, tab, ctx.catalog)
            assert I1.log_mod == 0 and I1.arg_pi == 0
            assert I2.log_mod <= 0

    def test_i1_bound_half_radius(self, ctx):
        tab = ctx.table
        for n in (12, 16):
            prec = tab.digits_for(n + 1)
            with mp.workdps(prec):
                w = mpf(n) ** -15 / 2
                I1, I2 = decompose_I1_I2(n, w, tab, ctx.catalog, prec)
                assert i1_offset(I1) < 2 * mpf(n) ** -16
                assert I2.log_mod <= mpf(10) ** (5 - prec)

    def test_split_below_N1_rejected(self, ctx):
        with pytest.raises(ValueError):
            decompose_I1_I2(11, 0, ctx.table, ctx.catalog)

    def test_disc_map_and_i1i2(self, ctx):
        rep = check_disc_map(12, ctx.table, ctx.catalog, samples=64)
        assert rep.passed and len(rep.rows) == 1 + 2 * 64
        assert rep.summary["worst_ratio"] < 1
        rep = check_I1_I2(13, ctx.table, ctx.catalog, samples=16)
        assert rep.passed

    def test_disc_map_needs_samples(self, ctx):
        with pytest.raises(ValueError):
            check_disc_map(12, ctx.table, ctx.catalog, samples=4)

    def test_center_offset_bound(self, ctx):
        tab = ctx.table
        for n in (12, 20):
            prec = tab.digits_for(n + 1)
            with mp.workdps(prec):
                F = eval_f(LogComplex.neg_real(tab.b(n)), ctx.catalog, prec)
                off = abs(relative_offset(F, tab.log_b[n + 1]))
                assert off < 2 * mpf(n) ** -16 + 2 * mp.exp(-mp.exp(mpf(n) / 4))

    def test_shifted_point(self):
        with mp.workdps(40):
            z = LogComplex.shifted(mpf(3), mpc("1e-5", "2e-5")).to_mpc()
            want = -mp.exp(3) * (1 - mpc("1e-5", "2e-5"))
            assert abs(z - want) < mpf(10) ** -35 * abs(want)
