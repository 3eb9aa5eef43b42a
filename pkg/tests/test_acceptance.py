"""One test per acceptance criterion, each printing a single PASS/FAIL line."""

import json
import random
import time

import pytest
from mpmath import mp, mpf

from conftest import ACCEPTANCE_LINES
from escargot import escape as E
from escargot.entire_eval import LogComplex, eval_f, max_modulus
from escargot.harness import cli
from escargot.harness.config import RunConfig
from escargot.harness.pipeline import build_context, search_disc_window
from escargot.harness.report import log_quantities
from escargot.hyperscale import LogMag, verify_lemma1, verify_lemma1_internals
from escargot.seqcore import SeqParams, check_identities


def verdict(number: int, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


@pytest.fixture(scope="module")
def window():
    t0 = time.perf_counter()
    found = search_disc_window((100, 300, 1000), (10, 16), need=3, samples=64, max_prec=200)
    return found, time.perf_counter() - t0


def test_exact_identities():
    t0 = time.perf_counter()
    reps = {r.name: r for r in check_identities((10, 200), SeqParams(10, 60), 60, strict=False)}
    dt = time.perf_counter() - t0
    names = ["seq.alphaeq", "seq.alphadef", "seq.mainidentity", "seq.tau_closed_form"]
    fails = sum(len(reps[n].failures) for n in names)
    covered = all(reps[n].rows[-1].key == 200 for n in names)
    kappa_rows = len(reps["seq.mainidentity"].rows)
    verdict(1, fails == 0 and covered and kappa_rows == 190 and dt < 10,
            f"identities over [10, 200] at 60 digits, {fails} failures, kappa_m = T_m on {kappa_rows} rows, {dt:.2f} s")


def test_lemma1_suite():
    t0 = time.perf_counter()
    ctx = build_context(RunConfig())
    with mp.workdps(ctx.precision):
        main = verify_lemma1(ctx.table, ctx.seq)
        internals = {r.name: r for r in verify_lemma1_internals(ctx.table, ctx.seq)}
    dt = time.perf_counter() - t0
    N1, n_max = 12, 40
    th = {r.name: r.threshold for r in main}
    ok_th = all(v is not None and v <= N1 + 2 for v in th.values())
    ok_int = True
    for name in ("lemma1.k_m", "lemma1.L1", "lemma1.L2"):
        rows = {r.key: r for r in internals[name].rows}
        ok_int &= all(rows[m].passed for m in range(N1, n_max))
    verdict(2, ok_th and ok_int and dt < 60,
            f"thresholds {sorted(set(th.values()))} <= {N1 + 2}, k_m/L1/L2 hold on [{N1}, {n_max - 1}], {dt:.1f} s")


def test_disc_map_suite(window):
    found, dt = window
    ok = found.window is not None and found.window[1] - found.window[0] + 1 >= 3 and dt < 600
    if found.window:
        rows = [r for r in found.tried[-1]["rows"] if found.window[0] <= r["n"] <= found.window[1]]
        ok &= all(r["precision"] <= 200 and r["disc_map"] and r["i1i2"] for r in rows)
        cfg = found.config
        detail = (f"log10_a3={cfg.log10_a3}, N0={cfg.n0}, N1={cfg.n1}: window {list(found.window)}, "
                  f"digits {[r['precision'] for r in rows]}, {dt:.1f} s")
    else:
        detail = f"no configuration gave 3 consecutive verified discs ({dt:.1f} s)"
    verdict(3, ok, detail)


def test_theorem2_suite(ctx):
    tab, cat, step = ctx.table, ctx.catalog, ctx.step
    with mp.workdps(ctx.precision):
        eps = E.check_epsilon_step(step)
        direct, structural, chain = E.check_T2_condition(step, tab, cat, k_max=5, window=(12, tab.n_max - 1))
        radii = E.sample_radii(tab, 6, 12, 30, seed=11)
        eind = E.check_eind(radii, 3, step, cat)
    truncated = sum(1 for r in direct.rows if r.detail["truncated"])
    eind_radii = len({str(r.key).split(":")[0] for r in eind.rows})
    ok = (eps.passed and chain.passed and structural.passed and direct.passed and len(direct.rows) >= 20
          and eind.passed and eind_radii >= 5)
    verdict(4, ok, f"epsilon scan {len(eps.rows)} breakpoints, structural n in [12, {tab.n_max - 1}], "
                   f"T2 direct {len(direct.rows)} radii k<=5 ({truncated} coverage-truncated), "
                   f"eind {eind_radii} radii k<=3")


def test_certificate(window):
    found, _ = window
    assert found.window is not None
    ctx = found.context
    n = found.window[0]
    with mp.workdps(ctx.precision):
        cert = E.fast_escape_certificate(n, 3, ctx.table, ctx.catalog, ctx.step)
    margins = cert.margins
    ok = cert.holds and not cert.truncated and len(margins) == 4 and all(m > 0 for m in margins[1:])
    verdict(5, ok, f"orbit of -b_{n} to depth 3, margins (log) {[mp.nstr(m, 4) for m in margins]}")


def naive_toy(z, log_a3):
    a3 = mp.exp(log_a3)
    return z * (1 + z / a3) ** 2 * (1 + z / a3**3) ** 2


def test_oracle_equivalence(toy):
    table, cat = toy
    rnd = random.Random(99)
    worst_f = worst_m = mpf(0)
    with mp.workdps(40):
        for _ in range(100):
            z = mpf(10) ** mpf(rnd.uniform(-5, 30)) * mp.expjpi(mpf(rnd.uniform(-1, 1)))
            got = eval_f(LogComplex.from_complex(z), cat, 40).to_mpc()
            want = naive_toy(z, table.log_a[3])
            worst_f = max(worst_f, abs(got - want) / abs(want))
        for lr in (1, 8, 15, 22, 29.5):
            r = mpf(10) ** lr
            brute = max(abs(naive_toy(r * mp.expjpi(mpf(2 * j) / 720), table.log_a[3])) for j in range(720))
            got = max_modulus(LogMag(mp.log(r)), cat, 40).value()
            worst_m = max(worst_m, abs(got - brute) / brute)
    ok = worst_f < mpf(10) ** -20 and worst_m < mpf(10) ** -20
    verdict(6, ok, f"eval_f vs naive product worst rel {mp.nstr(worst_f, 3)}, "
                   f"max_modulus vs 720-angle max worst rel {mp.nstr(worst_m, 3)}")


SMALL = ["--n-max", "20", "--samples", "16", "--max-disc-prec", "1000"]


def _run(args, capsys):
    code = cli.main(args)
    capsys.readouterr()
    return code


def test_stability(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(["verify-all", "--out", str(a)] + SMALL, capsys) == 0
    base = json.loads((a / "report.json").read_text())
    P = max(c["precision"] for c in base["checks"])
    assert _run(["verify-all", "--prec", str(2 * P), "--out", str(b)] + SMALL, capsys) == 0
    hi = json.loads((b / "report.json").read_text())
    qa, qb = log_quantities(base), log_quantities(hi)
    same_keys = set(qa) == set(qb)
    worst = mpf(0)
    with mp.workdps(60):
        for k in qa:
            x, y = qa[k], qb.get(k, mpf("nan"))
            scale = max(abs(x), abs(y))
            if scale:
                worst = max(worst, abs(x - y) / scale)
    # byte-identical reruns of every command
    identical = True
    runs = [
        ["seq-check"],
        ["verify-all"] + SMALL,
        ["orbit", "--n", "12", "--depth", "3"] + SMALL,
    ]
    for i, args in enumerate(runs):
        out = tmp_path / f"r{i}"
        snaps = []
        for _ in range(2):
            _run(args + ["--out", str(out)], capsys)
            snaps.append({f.name: f.read_bytes() for f in out.iterdir() if f.name != "timing.json"})
        identical &= snaps[0] == snaps[1]
    img = tmp_path / "img.ppm"
    snaps = []
    for _ in range(2):
        _run(["render", "--region", "b:12:1e15", "--resolution", "8x6", "--steps", "2", "--out", str(img)] + SMALL,
             capsys)
        snaps.append((img.read_bytes(), (tmp_path / "img.ppm.json").read_bytes()))
    identical &= snaps[0] == snaps[1]
    verdict(7, same_keys and worst < mpf(10) ** -10 and identical,
            f"{len(qa)} log-quantities at {P} vs {2 * P} digits, worst rel change {mp.nstr(worst, 3)}; "
            f"reruns byte-identical: {identical}")


def test_growth_order(ctx):
    with mp.workdps(ctx.precision):
        count, _ = E.zero_census(ctx.table, ctx.seq, ctx.catalog)
        radii = [LogMag(ctx.table.log_a[n] * mpf(s)) for n in range(4, 38) for s in ("1", "2", "5")]
        rep = E.growth_order(radii, ctx.catalog)
    sup = rep.summary["sup_logM_over_logr2"]
    ok = count.passed and count.rows[0].key == 10 and mp.isfinite(sup) and sup < 1
    verdict(8, ok, f"zero count = n on [10, {count.rows[-1].key}], sup log M/(log r)^2 = {mp.nstr(sup, 4)} "
                   f"over {len(radii)} radii")
