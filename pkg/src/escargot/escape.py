"""The weighted escape criterion and fast-escape certificates.

epsilon(r) is the step function 1/(16 n^6) on (a_{n-1}(1+d_{n-1}), a_n(1+d_n)]
with d_n = n^-15, eta(r) = epsilon(r) M(r).  Everything here works on the
growth table and the zero catalog and evaluates f only through
:mod:`escargot.entire_eval`.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mp, mpf

from .checks import DIAGNOSTIC, HARD, THRESHOLD, CheckReport, CoverageError, IdentityError, logjson
from .entire_eval import DiscSpec, LogComplex, ZeroCatalog, eval_f_neg_real, max_modulus
from .hyperscale import GrowthTable, LogMag, log1m_exp
from .seqcore import SequenceTable, T


def eps_denominator(n: int) -> int:
    return 16 * n**6


@dataclass(frozen=True)
class EpsilonStep:
    """Breakpoints log(a_n (1 + n^-15)) for n = n_lo..n_hi."""

    n_lo: int
    breakpoints: tuple[mpf, ...]

    @property
    def R0_log(self) -> mpf:
        return self.breakpoints[0]

    @property
    def n_hi(self) -> int:
        return self.n_lo + len(self.breakpoints) - 1

    def values(self) -> list[Fraction]:
        return [Fraction(1, eps_denominator(n)) for n in range(self.n_lo + 1, self.n_hi + 1)]

    def index(self, r: LogMag) -> int:
        """The n with a_{n-1}(1+d_{n-1}) < r <= a_n(1+d_n)."""
        L = r.log
        if L <= self.R0_log:
            raise ValueError(f"r is below R0 (log r = {mp.nstr(L, 10)})")
        i = bisect.bisect_left(self.breakpoints, L)
        if i >= len(self.breakpoints):
            raise CoverageError(f"r beyond the last breakpoint a_{self.n_hi}(1+d)")
        return self.n_lo + i


def build_epsilon_step(table: GrowthTable, n_lo: int = 3) -> EpsilonStep:
    with mp.workdps(table.precision):
        bps = tuple(table.log_a[n] + mp.log1p(mpf(n) ** -15) for n in range(n_lo, table.n_max + 1))
    return EpsilonStep(n_lo, bps)


def epsilon(r: LogMag, step: EpsilonStep) -> mpf:
    return mpf(1) / eps_denominator(step.index(r))


def epsilon_exact(r: LogMag, step: EpsilonStep) -> Fraction:
    return Fraction(1, eps_denominator(step.index(r)))


def log_epsilon(r: LogMag, step: EpsilonStep) -> mpf:
    return -mp.log(eps_denominator(step.index(r)))


def eta(r: LogMag, step: EpsilonStep, catalog: ZeroCatalog, prec: int | None = None) -> LogMag:
    """eta(r) = epsilon(r) M(r)."""
    with mp.workdps(prec or mp.dps):
        return LogMag(log_epsilon(r, step) + max_modulus(r, catalog, prec).log, prec or mp.dps)


@dataclass
class Orbit:
    values: list[LogMag]
    truncated: bool = False
    reason: str = ""

    @property
    def depth(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, i):
        return self.values[i]

    def __len__(self):
        return len(self.values)


def iterate_M(r: LogMag, k: int, catalog: ZeroCatalog, prec: int | None = None) -> Orbit:
    out = [r]
    for _ in range(k):
        try:
            out.append(max_modulus(out[-1], catalog, prec))
        except CoverageError as exc:
            return Orbit(out, True, str(exc))
    return Orbit(out)


def iterate_eta(r: LogMag, k: int, step: EpsilonStep, catalog: ZeroCatalog, prec: int | None = None) -> Orbit:
    out = [r]
    for _ in range(k):
        try:
            out.append(eta(out[-1], step, catalog, prec))
        except CoverageError as exc:
            return Orbit(out, True, str(exc))
    return Orbit(out)


# --------------------------------------------------------------------------
# checks


def check_epsilon_step(step: EpsilonStep, prec: int | None = None) -> CheckReport:
    """Exhaustive breakpoint scan: right-closed intervals, values in (0, 1), strictly decreasing."""
    prec = prec or mp.dps
    rep = CheckReport("escape.epsilon_monotone", HARD, precision=prec, n_range=(step.n_lo + 1, step.n_hi))
    with mp.workdps(prec):
        for i in range(1, len(step.breakpoints)):
            n = step.n_lo + i
            lo, hi = step.breakpoints[i - 1], step.breakpoints[i]
            above = LogMag(lo + abs(lo) * mpf(10) ** (8 - prec))
            v, v_prev = Fraction(1, eps_denominator(n)), Fraction(1, eps_denominator(n - 1))
            ok = step.index(LogMag(hi)) == n and step.index(above) == n and 0 < v < v_prev < 1
            rep.add(n, ok, margin=float(v_prev - v))
    return rep


def sample_radii(table: GrowthTable, count: int, n_lo: int, n_hi: int, seed: int = 0) -> list[LogMag]:
    """Radii with log log r uniform on [log log a_{n_lo}, log log a_{n_hi}], plus a_n and a_n(1+d_n)."""
    rnd = random.Random(seed)
    with mp.workdps(table.precision):
        lo, hi = mp.log(table.log_a[n_lo]), mp.log(table.log_a[n_hi])
        out = []
        for n in range(n_lo + 1, n_hi, max(1, (n_hi - n_lo) // 4)):
            out.append(LogMag(table.log_a[n]))
            out.append(LogMag(table.log_a[n] + mp.log1p(mpf(n) ** -15)))
        while len(out) < count:
            out.append(LogMag(mp.exp(lo + (hi - lo) * mpf(rnd.random()))))
    return out


def check_T2_condition(step: EpsilonStep, table: GrowthTable, catalog: ZeroCatalog, k_max: int = 5,
                       prec: int | None = None, radii: list[LogMag] | None = None,
                       window: tuple[int, int] | None = None) -> list[CheckReport]:
    prec = prec or table.precision
    N1 = table.params.N1
    if radii is None:
        hi = max(N1, table.n_max - 2 * k_max)
        radii = sample_radii(table, 24, 4, hi)
    direct = CheckReport("escape.T2_direct", THRESHOLD, precision=prec, indexed=False)
    chain = CheckReport("escape.T2_chain_end", HARD, precision=0, n_range=(2, 100))
    structural = CheckReport("escape.T2_structural", THRESHOLD, precision=prec)
    with mp.workdps(prec):
        for i, r in enumerate(radii):
            n = step.index(r)
            base = eps_denominator(n)
            orbit = iterate_M(r, k_max, catalog, prec)
            ok, truncated = True, orbit.truncated
            depth, margin, advance = 0, None, 0
            for k in range(1, orbit.depth + 1):
                try:
                    nk = step.index(orbit[k])
                except CoverageError:
                    truncated = True
                    break
                # eps(M^k r) >= eps(r)^{k+1}  <=>  16 nk^6 <= (16 n^6)^{k+1}
                ok &= eps_denominator(nk) <= base ** (k + 1)
                depth, advance = k, nk - n
                m = (k + 1) * mp.log(base) - mp.log(eps_denominator(nk))
                margin = m if margin is None else min(margin, m)
            direct.add(i, ok, margin=margin, n=n, depth=depth, truncated=truncated, index_advance=advance)
        for n in range(2, 101):
            ok = all(16 * (n + 2 * k) ** 6 <= (16 * n**6) ** (k + 1) for k in range(1, 21))
            chain.add(n, ok)

        lo, hi = window or (N1, table.n_max - 1)
        structural.n_range = (lo, hi)
        for n in range(lo, hi + 1):
            la1, la2 = table.log_a[n + 1], table.log_a[n + 2]
            r1 = LogMag(table.log_a[n] + mp.log1p(mpf(n) ** -15))
            r2 = LogMag(mp.ln2 + table.log_b[n])
            m1 = max_modulus(r1, catalog, prec).log
            m2 = max_modulus(r2, catalog, prec).log
            cap = 12 * n**3 * mp.ln2
            steps = [m1 <= m2, m2 - la1 < cap, cap + la1 <= 2 * la1, 2 * la1 <= la2]
            structural.add(n, all(steps), margin=cap - (m2 - la1), ineq=sum(steps),
                           gap_a_n2=(la2 - m1) / la2)
    direct.notes.append("rows flagged truncated reached the end of the epsilon domain or catalog")
    return [direct, structural, chain]


def check_eta_growth(step: EpsilonStep, table: GrowthTable, catalog: ZeroCatalog, depth: int = 3,
                     prec: int | None = None) -> list[CheckReport]:
    """eta(b_n) > b_n per n, and eta^m(b_n) strictly increasing along each orbit."""
    prec = prec or table.precision
    lo, hi = 4, table.n_max
    grow = CheckReport("escape.eta_exceeds_r", THRESHOLD, precision=prec, n_range=(lo, hi))
    mono = CheckReport("escape.eta_orbit_increasing", HARD, precision=prec)
    with mp.workdps(prec):
        for n in range(lo, hi + 1):
            x = table.b(n)
            try:
                e = eta(x, step, catalog, prec)
            except CoverageError:
                grow.notes.append(f"coverage ends before n={n}")
                break
            grow.add(n, e.log > x.log, margin=e.log - x.log)
        first = grow.threshold
        if first is not None:
            for n in range(first, hi + 1):
                orbit = iterate_eta(table.b(n), depth, step, catalog, prec)
                if orbit.depth == 0:
                    break
                steps = [b.log > a.log for a, b in zip(orbit.values, orbit.values[1:])]
                mono.add(n, all(steps), depth=orbit.depth, truncated=orbit.truncated)
    grow.summary["R1_candidate_n"] = first
    return [grow, mono]


def check_eind(radii, k_max: int, step: EpsilonStep, catalog: ZeroCatalog, prec: int | None = None) -> CheckReport:
    """eta^k(r) >= eps(r)^{-k-1} M^k(eps(r) r) for 0 <= k <= k_max."""
    if isinstance(radii, LogMag):
        radii = [radii]
    prec = prec or mp.dps
    rep = CheckReport("escape.eind", THRESHOLD, precision=prec, indexed=False)
    with mp.workdps(prec):
        for i, r in enumerate(radii):
            le = log_epsilon(r, step)
            et = iterate_eta(r, k_max, step, catalog, prec)
            mo = iterate_M(LogMag(r.log + le), k_max, catalog, prec)
            depth = min(et.depth, mo.depth)
            for k in range(0, depth + 1):
                lhs = et[k].log
                rhs = -(k + 1) * le + mo[k].log
                if k == 0:
                    # identity convention: r vs eps^{-1} (eps r) = r
                    rep.add(f"r{i}:k0", lhs >= rhs - abs(lhs) * mpf(10) ** (5 - prec), margin=lhs - rhs)
                else:
                    rep.add(f"r{i}:k{k}", lhs >= rhs, margin=lhs - rhs, strict=lhs - rhs > 0)
            if depth < k_max:
                rep.notes.append(f"radius {i}: coverage-truncated at depth {depth}")
    return rep


def j_split(n: int, x: LogMag, table: GrowthTable, catalog: ZeroCatalog) -> tuple[mpf, mpf, mpf]:
    """log J1, log J2, log J3 of |f(-x)| / f(x) split at the zero a_n."""
    la = table.log_a[n]
    tol_same = abs(la) * mpf(10) ** (-(mp.dps // 2))
    L = x.log
    j1, j2, j3 = [], [], []
    for logc, m in catalog.entries:
        d = logc - L
        if d == 0:
            return None, None, None
        # log |c - x| / (c + x) = log|1 - e^{-|d|}| - log(1 + e^{-|d|})
        e = -abs(d)
        if e < -2 * (mp.dps * mp.ln10):
            continue
        v = log1m_exp(e, absorb=False) - (mp.log1p(mp.exp(e)) if e > -mp.dps * mp.ln10 else mp.exp(e))
        if abs(logc - la) <= tol_same:
            j2.append(m * v)
        elif logc < la:
            j1.append(m * v)
        else:
            j3.append(m * v)
    return mp.fsum(j1), mp.fsum(j2), mp.fsum(j3)


def check_isinAeq(n: int, table: GrowthTable, catalog: ZeroCatalog, prec: int | None = None,
                  omegas=(0, 0.5, -0.5)) -> CheckReport:
    """|f(x')| >= M(x)/(16 n^6) for x' = -x in B_n, via the J1 J2 J3 split.

    Raises IdentityError when J1 J2 J3 disagrees with |f(-x)|/f(x).
    """
    prec = prec or table.digits_for(n + 1)
    rep = CheckReport(f"isinAeq.n{n}", THRESHOLD, precision=prec, n_range=(n, n), indexed=False)
    with mp.workdps(prec):
        delta = mpf(n) ** -15
        for om in omegas:
            x = LogMag(table.log_b[n] + mp.log1p(mpf(om) * delta))
            j1, j2, j3 = j_split(n, x, table, catalog)
            num = eval_f_neg_real(x, catalog, prec)
            den = max_modulus(x, catalog, prec)
            direct = num.mag.log - den.log
            err = abs(direct - (j1 + j2 + j3))
            if err > mpf(10) ** (10 - prec) * max(1, abs(den.log)):
                raise IdentityError(f"J1 J2 J3 != |f(-x)|/M(x) at n={n}, omega={om}: {mp.nstr(err, 5)}")
            bound = -mp.log(eps_denominator(n))
            checks = {
                "J1": j1 >= -mp.ln2,
                "J2": j2 >= -mp.log(4 * mpf(n) ** 6),
                "J3": j3 >= -mp.ln2,
                "product": j1 + j2 + j3 >= bound,
            }
            rep.add(f"omega={om}", all(checks.values()), margin=j1 + j2 + j3 - bound,
                    log_J1=j1, log_J2=j2, log_J3=j3, consistency=err)
            if om == 0:
                exact = -2 * mp.log(T(n) + 1)
                rep.summary["J2_center_error"] = abs(j2 - exact)
    return rep


@dataclass
class OrbitCertificate:
    n: int
    start: LogComplex
    iterates: list[mpf]
    comparator: list[mpf]
    m_comparator: list[mpf] = field(default_factory=list)
    in_disc: list[bool] = field(default_factory=list)
    disc_ratio: list[mpf] = field(default_factory=list)
    verdicts: list[bool] = field(default_factory=list)
    m_verdicts: list[bool] = field(default_factory=list)
    truncated: bool = False
    first_failure: str = ""
    precision: int = 0

    @property
    def holds(self) -> bool:
        return bool(self.verdicts) and all(self.verdicts) and all(self.in_disc)

    @property
    def consistent_with_M(self) -> bool:
        """Certified against eta^m implies certified against M^m(eps(x) x)."""
        return all(m or not v for v, m in zip(self.verdicts, self.m_verdicts))

    @property
    def margins(self) -> list[mpf]:
        return [a - b for a, b in zip(self.iterates, self.comparator)]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "start": {"log_mod": logjson(self.start.log_mod), "arg_over_pi": float(self.start.arg_pi)},
            "precision": self.precision,
            "rows": [
                {
                    "m": m,
                    "log_iterate": logjson(self.iterates[m]),
                    "log_eta_m": logjson(self.comparator[m]),
                    "log_M_m": logjson(self.m_comparator[m]) if m < len(self.m_comparator) else None,
                    "margin": float(self.iterates[m] - self.comparator[m]),
                    "in_disc": self.in_disc[m],
                    "disc_ratio": float(self.disc_ratio[m]),
                    "verdict": self.verdicts[m],
                    "verdict_M": self.m_verdicts[m] if m < len(self.m_verdicts) else None,
                }
                for m in range(len(self.verdicts))
            ],
            "truncated": self.truncated,
            "first_failure": self.first_failure,
            "holds": self.holds,
        }

    def text(self) -> str:
        lines = [f"orbit of -b_{self.n}  (precision {self.precision} digits)",
                 f"{'m':>3} {'log|f^m(x)|':>26} {'log eta^m(b_n)':>26} {'margin':>12} {'disc':>5} verdict"]
        for m in range(len(self.verdicts)):
            lines.append(f"{m:>3} {mp.nstr(self.iterates[m], 20):>26} {mp.nstr(self.comparator[m], 20):>26} "
                         f"{mp.nstr(self.iterates[m] - self.comparator[m], 6):>12} "
                         f"{'yes' if self.in_disc[m] else 'NO':>5} {self.verdicts[m]}")
        if self.truncated:
            lines.append("certificate truncated: " + self.first_failure)
        elif self.first_failure:
            lines.append("first failure: " + self.first_failure)
        lines.append(f"holds through m={len(self.verdicts) - 1}: {self.holds}")
        return "\n".join(lines)


def fast_escape_certificate(n: int, depth: int, table: GrowthTable, catalog: ZeroCatalog, step: EpsilonStep,
                            prec: int | None = None) -> OrbitCertificate:
    """Orbit of -b_n against eta^m(b_n), each iterate checked to lie in B_{n+m}."""
    prec = prec or table.digits_for(min(n + depth + 1, table.n_max + 1))
    with mp.workdps(prec):
        x = table.b(n)
        cert = OrbitCertificate(n, LogComplex.neg_real(x), [], [], precision=prec)
        et = iterate_eta(x, depth, step, catalog, prec)
        le = log_epsilon(x, step)
        mo = iterate_M(LogMag(x.log + le), depth, catalog, prec)
        cert.comparator = [v.log for v in et.values]
        cert.m_comparator = [v.log for v in mo.values]
        cur = x
        for m in range(depth + 1):
            if m >= len(cert.comparator):
                cert.truncated = True
                cert.first_failure = et.reason or "comparator orbit left coverage"
                break
            k = n + m
            if k not in table.log_b:
                cert.truncated = True
                cert.first_failure = f"b_{k} beyond the table"
                break
            ratio = abs(mp.expm1(cur.log - table.log_b[k])) / mpf(k) ** -15
            cert.iterates.append(cur.log)
            cert.in_disc.append(ratio < 1)
            cert.disc_ratio.append(ratio)
            ok = cur.log >= cert.comparator[m]
            cert.verdicts.append(ok)
            if m < len(cert.m_comparator):
                cert.m_verdicts.append(cur.log >= cert.m_comparator[m])
            if not cert.first_failure:
                if ratio >= 1:
                    cert.first_failure = f"iterate {m} left the disc B_{k} (ratio {mp.nstr(ratio, 5)})"
                elif not ok:
                    cert.first_failure = f"|f^{m}| < eta^{m}(b_n) by {mp.nstr(cert.comparator[m] - cur.log, 5)}"
            if m == depth:
                break
            try:
                val = eval_f_neg_real(cur, catalog, prec)
            except CoverageError as exc:
                cert.truncated = True
                cert.first_failure = str(exc)
                break
            if val.is_zero or val.sign != -1:
                cert.first_failure = f"iterate {m + 1} left the negative real axis"
                break
            cur = val.mag
    return cert


def check_M_facts(radii, exponents, catalog: ZeroCatalog, prec: int | None = None,
                  bound: float = 1000) -> list[CheckReport]:
    """log M(r)/log r increasing and unbounded on the ladder; M(r^c) >= M(r)^c."""
    prec = prec or mp.dps
    f17 = CheckReport("escape.M_ratio_growth", DIAGNOSTIC, precision=prec, indexed=False)
    f18 = CheckReport("escape.M_power", THRESHOLD, precision=prec, indexed=False)
    with mp.workdps(prec):
        prev = None
        top = None
        for i, r in enumerate(radii):
            ratio = max_modulus(r, catalog, prec).log / r.log
            f17.add(i, prev is None or ratio > prev, margin=ratio)
            prev = top = ratio
        f17.summary["top_ratio"] = top
        f17.summary["exceeds_bound"] = bool(top is not None and top > bound)
        f17.summary["bound"] = bound
        f17.summary["monotone"] = f17.passed
        for i, r in enumerate(radii):
            for c in exponents:
                rc = LogMag(r.log * c)
                if not catalog.covers(rc.log, prec):
                    continue
                lhs = max_modulus(rc, catalog, prec).log
                rhs = c * max_modulus(r, catalog, prec).log
                tol = abs(rhs) * mpf(10) ** (10 - prec)
                rep_ok = lhs >= rhs - tol if c == 1 else lhs >= rhs
                f18.add(i, rep_ok, margin=(lhs - rhs) / abs(rhs), c=c)
    f17.notes.append("trend check over a finite ladder only")
    return [f17, f18]


def growth_order(radii, catalog: ZeroCatalog, prec: int | None = None) -> CheckReport:
    prec = prec or mp.dps
    rep = CheckReport("escape.growth_order", DIAGNOSTIC, precision=prec, indexed=False)
    with mp.workdps(prec):
        sup_m, sup_n = mpf(0), mpf(0)
        for i, r in enumerate(radii):
            q = max_modulus(r, catalog, prec).log / r.log**2
            zc = mpf(catalog.count_below(r.log)) / r.log
            sup_m, sup_n = max(sup_m, q), max(sup_n, zc)
            rep.add(i, mp.isfinite(q), margin=q, zero_count_ratio=zc)
        rep.summary["sup_logM_over_logr2"] = sup_m
        rep.summary["sup_zero_count_over_logr"] = sup_n
    return rep


def zero_census(table: GrowthTable, seq: SequenceTable, catalog: ZeroCatalog) -> list[CheckReport]:
    """Zeros per annulus [a_n, a_{n+1}) and the spacing of consecutive log-moduli."""
    N0 = seq.params.N0
    hi = min(table.n_max, catalog.n_max)
    count = CheckReport("escape.zero_count", HARD, precision=table.precision, n_range=(N0, hi))
    spacing = CheckReport("escape.zero_spacing", THRESHOLD, precision=table.precision, n_range=(N0, hi))
    with mp.workdps(table.precision):
        logs = catalog.logs
        prev_max = None
        for n in range(N0, hi + 1):
            la, la1 = table.log_a[n], table.log_a[n + 1]
            i0 = bisect.bisect_left(logs, la)
            i1 = bisect.bisect_left(logs, la1)
            count.add(n, i1 - i0 == n, margin=i1 - i0)
            pts = logs[i0:i1] + [la1]
            worst = max(b / a for a, b in zip(pts, pts[1:]))
            cap = seq[n].mu_pows[2] + mpf(2) / n
            spacing.add(n, worst <= cap, margin=cap - worst, max_ratio=worst,
                        decreasing=prev_max is None or worst < prev_max)
            prev_max = worst
    return [count, spacing]
