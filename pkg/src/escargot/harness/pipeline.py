"""Construction and the verification battery behind the CLI commands."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from mpmath import mp, mpf

from .. import escape as esc
from ..checks import DIAGNOSTIC, HARD, THRESHOLD, CheckReport, CoverageError, IdentityError
from ..entire_eval import (DiscSpec, LogComplex, ZeroCatalog, build_catalog, check_disc_map, check_I1_I2,
                           check_symmetry)
from ..hyperscale import (GrowthParams, GrowthTable, build_growth_table, monotone_growth_report,
                          precision_sufficiency, sign_parity_report, verify_lemma1, verify_lemma1_internals)
from ..seqcore import SeqParams, SequenceTable, beta_ratio_trend, build_sequence_table, check_identities
from .config import ConfigError, RunConfig

EXIT_OK, EXIT_IDENTITY, EXIT_CONFIG, EXIT_PRECISION = 0, 2, 3, 4


@dataclass
class Context:
    cfg: RunConfig
    seq: SequenceTable
    table: GrowthTable
    catalog: ZeroCatalog
    step: esc.EpsilonStep

    @property
    def precision(self) -> int:
        return self.table.precision


def growth_params(cfg: RunConfig) -> GrowthParams:
    try:
        return GrowthParams(cfg.log10_a3, cfg.n1, cfg.n_max, cfg.n0, cfg.prec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_sequences(cfg: RunConfig, n_hi: int, digits: int) -> SequenceTable:
    return build_sequence_table(SeqParams(cfg.n0, 60), n_hi, prec=max(60, digits + 10))


def build_context(cfg: RunConfig) -> Context:
    gp = growth_params(cfg)
    seq = build_sequences(cfg, cfg.n_max + 2, gp.digits())
    table = build_growth_table(gp, seq)
    with mp.workdps(table.precision):
        catalog = build_catalog(table, seq)
        step = esc.build_epsilon_step(table)
    return Context(cfg, seq, table, catalog, step)


@dataclass
class VerificationReport:
    command: str
    config: dict
    checks: list[CheckReport] = field(default_factory=list)
    disc_window: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK
    notes: list[str] = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def add(self, reports, seconds: float | None = None, label: str | None = None):
        if isinstance(reports, CheckReport):
            reports = [reports]
        for r in reports:
            self.checks.append(r)
        if seconds is not None and label:
            self.timing[label] = round(seconds, 3)

    @property
    def hard_ok(self) -> bool:
        return all(c.passed for c in self.checks if c.kind == HARD)

    @property
    def thresholds(self) -> dict:
        return {c.name: c.threshold for c in self.sorted_checks() if c.kind == THRESHOLD and c.indexed}

    def sorted_checks(self) -> list[CheckReport]:
        return sorted(self.checks, key=lambda c: c.name)


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


# --------------------------------------------------------------------------
# seq-check


def run_seq_check(cfg: RunConfig) -> VerificationReport:
    prec = cfg.prec or 60
    if prec < 30:
        raise ConfigError(f"identity checks need prec >= 30, got {prec}")
    rep = VerificationReport("seq-check", cfg.as_dict())
    params = SeqParams(cfg.n0, prec)
    with _Timer() as t:
        checks = check_identities((3, cfg.n_max), params, prec, strict=False)
        checks.append(beta_ratio_trend((3, cfg.n_max), params, prec))
    rep.add(checks, t.seconds, "identities")
    if not rep.hard_ok:
        rep.exit_code = EXIT_IDENTITY
    return rep


# --------------------------------------------------------------------------
# verify-all


def disc_scan_range(ctx: Context) -> tuple[int, int]:
    cfg, table = ctx.cfg, ctx.table
    lo = cfg.disc_lo or cfg.n1
    if cfg.disc_hi:
        return lo, min(cfg.disc_hi, table.n_max - 1)
    hi = lo - 1
    for n in range(lo, table.n_max):
        if table.digits_for(n + 1) > cfg.max_disc_prec:
            break
        hi = n
    return lo, hi


def feasible_window(flags: dict[int, bool], min_len: int = 3) -> tuple[int, int] | None:
    """First run of at least ``min_len`` consecutive passing indices."""
    run = []
    for n in sorted(flags):
        if flags[n] and (not run or n == run[-1] + 1):
            run.append(n)
        elif flags[n]:
            run = [n]
        else:
            if len(run) >= min_len:
                break
            run = []
    return (run[0], run[-1]) if len(run) >= min_len else None


def certificate_report(cert: esc.OrbitCertificate) -> CheckReport:
    rep = CheckReport(f"escape.certificate.n{cert.n}", THRESHOLD, precision=cert.precision,
                      n_range=(cert.n, cert.n + len(cert.verdicts) - 1), indexed=False)
    for m, ok in enumerate(cert.verdicts):
        rep.add(m, ok and cert.in_disc[m], margin=cert.iterates[m] - cert.comparator[m],
                disc_ratio=cert.disc_ratio[m], verdict_M=cert.m_verdicts[m] if m < len(cert.m_verdicts) else None)
    rep.summary["holds"] = cert.holds
    rep.summary["truncated"] = cert.truncated
    rep.summary["consistent_with_M"] = cert.consistent_with_M
    if cert.first_failure:
        rep.notes.append(cert.first_failure)
    return rep


def symmetry_samples(ctx: Context, count: int = 24, seed: int = 7) -> list[LogComplex]:
    rnd = random.Random(seed)
    table = ctx.table
    pts = []
    with mp.workdps(table.precision):
        for i in range(count):
            n = rnd.randrange(4, min(table.n_max, 20))
            lm = table.log_a[n] * (1 + mpf(rnd.random()))
            pts.append(LogComplex(lm, mpf(rnd.uniform(-1, 1))))
        pts.append(LogComplex.neg_real(table.b(ctx.cfg.n1)))
        pts.append(DiscSpec.of(ctx.cfg.n1, table).point(mpf(ctx.cfg.n1) ** -15 / 2 * mp.expjpi(mpf(1) / 3)))
    return pts


def ladder(table: GrowthTable, lo: int, hi: int, per: int = 3) -> list:
    """Geometric ladder in log log r between a_lo and a_hi."""
    from ..hyperscale import LogMag

    with mp.workdps(table.precision):
        out = []
        for n in range(lo, hi):
            la, la1 = table.log_a[n], table.log_a[n + 1]
            for j in range(per):
                out.append(LogMag(la * (la1 / la) ** (mpf(j) / per)))
    return out


def run_verify_all(cfg: RunConfig) -> VerificationReport:
    rep = VerificationReport("verify-all", cfg.as_dict())

    seq_rep = run_seq_check(cfg.with_overrides(n_max=cfg.n_max + 1, prec=max(cfg.prec, 60)))
    rep.add(seq_rep.checks, seq_rep.timing.get("identities"), "identities")

    gp = growth_params(cfg)
    with _Timer() as t:
        seq = build_sequences(cfg, cfg.n_max + 2, gp.digits())
        try:
            table = build_growth_table(gp, seq)
            stab = precision_sufficiency(gp, seq, table=table)
        except IdentityError as exc:
            if cfg.prec:
                rep.notes.append(f"growth table unstable at {cfg.prec} digits: {exc}")
                rep.exit_code = EXIT_PRECISION
                return rep
            raise
    rep.add(stab, t.seconds, "growth_table")
    if not stab.passed:
        rep.notes.append("precision insufficient: log a_n moves when digits are added; remaining checks skipped")
        rep.exit_code = EXIT_PRECISION
        return rep

    with mp.workdps(table.precision):
        catalog = build_catalog(table, seq)
        step = esc.build_epsilon_step(table)
    ctx = Context(cfg, seq, table, catalog, step)
    rep.extras["growth_table"] = table.export()
    rep.extras["catalog_size"] = len(catalog)

    with mp.workdps(table.precision):
        rep.add([sign_parity_report(table), monotone_growth_report(table)])
        with _Timer() as t:
            rep.add(verify_lemma1(table, seq) + verify_lemma1_internals(table, seq))
        rep.timing["lemma1"] = round(t.seconds, 3)

        lo, hi = disc_scan_range(ctx)
        flags, precs = {}, {}
        with _Timer() as t:
            for n in range(lo, hi + 1):
                dm = check_disc_map(n, table, catalog, samples=cfg.samples)
                ii = check_I1_I2(n, table, catalog, samples=cfg.samples)
                rep.add([dm, ii])
                flags[n] = dm.passed and ii.passed
                precs[n] = dm.precision
        rep.timing["disc_maps"] = round(t.seconds, 3)
        win = feasible_window(flags)
        rep.disc_window = {
            "scanned": [lo, hi] if hi >= lo else None,
            "passing": [n for n in sorted(flags) if flags[n]],
            "feasible": list(win) if win else None,
            "precision_by_n": {str(n): precs[n] for n in sorted(precs)},
            "samples": cfg.samples,
        }
        if win is None:
            rep.notes.append("no run of 3 consecutive indices with a verified disc map")

        with _Timer() as t:
            rep.add(esc.check_epsilon_step(step, table.precision))
            rep.add(esc.check_eta_growth(step, table, catalog))
            w_lo, w_hi = win if win else (cfg.n1, min(hi, table.n_max - 1))
            rep.add(esc.check_T2_condition(step, table, catalog, cfg.k_max, window=(cfg.n1, table.n_max - 1)))
            eind_hi = max(cfg.n1 + 1, table.n_max - 2 * 3 - 2)
            radii = esc.sample_radii(table, 6, cfg.n1, eind_hi, seed=1)
            rep.add(esc.check_eind(radii, 3, step, catalog, table.precision))
            if win:
                for n in range(w_lo, w_hi + 1):
                    rep.add(esc.check_isinAeq(n, table, catalog))
                depth = min(cfg.depth, table.n_max - w_lo)
                cert = esc.fast_escape_certificate(w_lo, depth, table, catalog, step)
                rep.add(certificate_report(cert))
                rep.extras["certificate"] = cert.to_json()
            rung = ladder(table, 4, table.n_max - 2)
            rep.add(esc.check_M_facts(rung, [1, 1.5, 2], catalog, table.precision))
            rep.add(esc.growth_order(rung, catalog, table.precision))
            rep.add(esc.zero_census(table, seq, catalog))
            rep.add(check_symmetry(symmetry_samples(ctx), catalog, table.precision))
        rep.timing["escape"] = round(t.seconds, 3)

    if not rep.hard_ok:
        rep.exit_code = EXIT_IDENTITY
    return rep


# --------------------------------------------------------------------------
# orbit


def run_orbit(cfg: RunConfig) -> tuple[esc.OrbitCertificate, VerificationReport]:
    ctx = build_context(cfg)
    n = cfg.n or cfg.n1
    rep = VerificationReport("orbit", cfg.as_dict())
    if not (cfg.n1 <= n <= cfg.n_max - 2 * cfg.depth):
        rep.notes.append(f"n={n} lies outside [N1, n_max - 2 depth] = [{cfg.n1}, {cfg.n_max - 2 * cfg.depth}]")
    if n > ctx.table.n_max:
        raise ConfigError(f"n={n} is beyond the table (n_max={ctx.table.n_max})")
    with mp.workdps(ctx.precision):
        cert = esc.fast_escape_certificate(n, cfg.depth, ctx.table, ctx.catalog, ctx.step)
        if cfg.depth >= 1 and n <= ctx.table.n_max - 1:
            try:
                rep.add(esc.check_isinAeq(n, ctx.table, ctx.catalog))
            except CoverageError as exc:
                rep.notes.append(str(exc))
    rep.add(certificate_report(cert))
    rep.extras["certificate"] = cert.to_json()
    return cert, rep


# --------------------------------------------------------------------------
# disc-window search


@dataclass
class WindowSearch:
    config: RunConfig | None
    window: tuple[int, int] | None
    tried: list[dict] = field(default_factory=list)
    context: Context | None = None


def search_disc_window(log10_a3_values=(100, 300, 1000), n0_values=(10, 16), need: int = 3,
                       samples: int = 64, max_prec: int = 200, span: int = 8) -> WindowSearch:
    """First configuration (N1 = N0 + 2) with ``need`` consecutive verified discs at <= max_prec digits.

    A disc n counts as verified when the centre and boundary samples land in
    B_{n+1} and the I1 / I2 bounds hold at the same samples.
    """
    out = WindowSearch(None, None)
    for n0 in n0_values:
        for a3 in log10_a3_values:
            cfg = RunConfig(n0=n0, n1=n0 + 2, log10_a3=a3, n_max=n0 + 2 + span, samples=samples,
                            max_disc_prec=max_prec)
            ctx = build_context(cfg)
            flags, rows = {}, []
            with mp.workdps(ctx.precision):
                for n in range(cfg.n1, cfg.n_max):
                    prec = ctx.table.digits_for(n + 1)
                    if prec > max_prec:
                        break
                    dm = check_disc_map(n, ctx.table, ctx.catalog, samples=samples)
                    ii = check_I1_I2(n, ctx.table, ctx.catalog, samples=samples)
                    flags[n] = dm.passed and ii.passed
                    rows.append({"n": n, "precision": prec, "disc_map": dm.passed, "i1i2": ii.passed,
                                 "worst_ratio": float(dm.summary["worst_ratio"]),
                                 "worst_I1_ratio": float(ii.summary["worst_I1_ratio"])})
                    win = feasible_window(flags, need)
                    if win:
                        break
            out.tried.append({"log10_a3": a3, "n0": n0, "n1": n0 + 2, "rows": rows})
            if win:
                out.config, out.window, out.context = cfg, win, ctx
                return out
    return out
