"""Log-scale numbers and the hyper-exponential sequences a_n, b_n.

a_n outgrows every native (and most arbitrary-precision) float formats
already at n ~ 6, so only ``log a_n`` is ever stored.  ``log a_n`` itself
reaches ~1e140 by n = 40, which is fine for an mpf with an unbounded
exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mp, mpf

from .checks import HARD, THRESHOLD, DIAGNOSTIC, CheckReport, IdentityError, CoverageError
from .seqcore import SequenceTable, T, kappa, two_alpha


# --------------------------------------------------------------------------
# log-domain numbers


@dataclass(frozen=True)
class LogMag:
    """A positive real x stored as log(x)."""

    log: mpf
    prec: int = 0

    def __post_init__(self):
        if not isinstance(self.log, mpf):
            object.__setattr__(self, "log", mpf(self.log))

    def __lt__(self, other):
        return self.log < other.log

    def __le__(self, other):
        return self.log <= other.log

    def __gt__(self, other):
        return self.log > other.log

    def __ge__(self, other):
        return self.log >= other.log

    def __eq__(self, other):
        return isinstance(other, LogMag) and self.log == other.log

    def __hash__(self):
        return hash(self.log)

    def __repr__(self):
        return f"LogMag(log={mp.nstr(self.log, 15)})"

    @classmethod
    def from_value(cls, x) -> "LogMag":
        x = mpf(x)
        if x <= 0:
            raise ValueError("LogMag represents positive reals only")
        return cls(mp.log(x))

    def value(self) -> mpf:
        """Linear-scale value; only sensible for moderate logs."""
        return mp.exp(self.log)


ONE = LogMag(0)


def logmag_mul(x: LogMag, y: LogMag) -> LogMag:
    return LogMag(x.log + y.log, max(x.prec, y.prec))


def logmag_div(x: LogMag, y: LogMag) -> LogMag:
    return LogMag(x.log - y.log, max(x.prec, y.prec))


def logmag_pow(x: LogMag, exponent) -> LogMag:
    return LogMag(x.log * exponent, x.prec)


def window(prec: int | None = None) -> mpf:
    """prec * ln 10: the log-distance beyond which a relative term is below one ulp."""
    return (prec or mp.dps) * mp.ln10


def logmag_add(x: LogMag, y: LogMag, prec: int | None = None) -> LogMag:
    hi, lo = (x, y) if x.log >= y.log else (y, x)
    d = lo.log - hi.log
    if d < -window(prec):
        return hi
    return LogMag(hi.log + mp.log1p(mp.exp(d)), max(x.prec, y.prec))


@dataclass(frozen=True)
class LogReal:
    """A signed real: sign in {-1, 0, 1} times exp(mag.log)."""

    sign: int
    mag: LogMag | None

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(0, None)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0


def log1m_exp(d, absorb: bool = True, prec: int | None = None) -> mpf:
    """log(1 - e^d) for d < 0.

    Below the precision window the result is -e^d to relative working
    precision; with ``absorb`` it is taken as exactly 0.
    """
    if d >= 0:
        raise ValueError("log1m_exp needs d < 0")
    if d < -window(prec):
        return mpf(0) if absorb else -mp.exp(d)
    if d < -mp.ln2:
        return mp.log1p(-mp.exp(d))
    return mp.log(-mp.expm1(d))


def lg(log_b, log_c, absorb: bool = True, prec: int | None = None) -> mpf:
    """log|1 - b/c| for b, c > 0 given by their logs."""
    D = log_b - log_c
    if D == 0:
        raise IdentityError("zero factor: b equals c")
    if D > 0:
        return D + log1m_exp(-D, absorb, prec)
    return log1m_exp(D, absorb, prec)


# --------------------------------------------------------------------------
# growth table


def estimate_log10_log_a(log10_a3: float, n: int) -> float:
    """log10(log a_n) under the seed rule a_{k+1} = a_k^{k^3}; the recursion stays within 2/k of it."""
    v = math.log10(log10_a3 * math.log(10))
    for k in range(3, n):
        v += 3 * math.log10(k)
    return v


def policy_digits(log_log_a_n: float, n: int) -> int:
    """Working digits needed to resolve relative radius n^-15 against log a_n."""
    return math.ceil(log_log_a_n) + 15 * math.ceil(math.log10(n)) + 40


@dataclass(frozen=True)
class GrowthParams:
    log10_a3: float = 100
    N1: int = 12
    n_max: int = 40
    N0: int = 10
    precision: int = 0  # 0: automatic policy at n_max + 1

    def __post_init__(self):
        if self.log10_a3 < 10:
            raise ValueError("log10_a3 must be >= 10")
        if self.N1 < self.N0 + 2:
            raise ValueError(f"N1 must be >= N0 + 2 (N0={self.N0}, N1={self.N1})")
        if self.n_max < self.N1:
            raise ValueError("n_max must be >= N1")

    def digits(self) -> int:
        if self.precision:
            return self.precision
        n = self.n_max + 1
        return policy_digits(estimate_log10_log_a(self.log10_a3, n), n)


@dataclass
class GrowthTable:
    params: GrowthParams
    log_a: dict[int, mpf]
    log_b: dict[int, mpf]
    seed: dict[int, bool]
    precision: int
    sign_audit: dict[int, int] = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return self.params.n_max

    def a(self, n: int) -> LogMag:
        try:
            return LogMag(self.log_a[n], self.precision)
        except KeyError:
            raise CoverageError(f"a_{n} not in table (covers 3..{self.n_max + 1})") from None

    def b(self, n: int) -> LogMag:
        try:
            return LogMag(self.log_b[n], self.precision)
        except KeyError:
            raise CoverageError(f"b_{n} not in table (covers 3..{self.n_max + 1})") from None

    def digits_for(self, n: int) -> int:
        """Policy digits for work at index n (capped by an explicit table precision)."""
        if self.params.precision:
            return self.params.precision
        key = min(n, max(self.log_a))
        ll = float(mp.log10(self.log_a[key]))
        return min(policy_digits(ll, n), self.precision)

    def export(self) -> list[dict]:
        out = []
        for n in sorted(self.log_a):
            out.append({
                "n": n,
                "log_a": mp.nstr(self.log_a[n], 40, strip_zeros=False),
                "log_b": mp.nstr(self.log_b[n], 40, strip_zeros=False),
                "seed_regime": self.seed[n],
            })
        return out


def log_b_from_a(n: int, log_a_n) -> mpf:
    t = T(n)
    return log_a_n + mp.log(mpf(t) / (t + 2))


def level_zeros(k: int, seq: SequenceTable, log_a_k) -> list[tuple[mpf, int, int]]:
    """(log modulus, multiplicity, l) of the zeros at level k; l = -1 marks a_k^{beta_k}."""
    row = seq[k]
    out = [(row.mu_pows[l] * log_a_k, 2, l) for l in range(k - 1)]
    if row.two_alpha > 0:
        out.append((row.beta * log_a_k, row.two_alpha, -1))
    return out


def recursion_step(n: int, log_a: dict, log_b: dict, seq: SequenceTable) -> tuple[mpf, int]:
    """log a_{n+1} from the defining product at n >= N1, plus the product sign."""
    lb = log_b[n]
    Tn, Tn1 = T(n), T(n + 1)
    acc = [mp.log(mpf(Tn1 + 2) / Tn1), lb, 2 * (mp.ln2 - mp.log(Tn + 2))]
    sign = 1
    for k in range(3, n):
        for logc, mult, _ in level_zeros(k, seq, log_a[k]):
            if logc < lb and mult % 2:
                sign = -sign
            acc.append(mult * lg(lb, logc))
    return mp.fsum(acc), sign


def build_growth_table(params: GrowthParams, seq: SequenceTable) -> GrowthTable:
    if seq.n_max < params.n_max:
        raise CoverageError(f"sequence table covers up to {seq.n_max}, need {params.n_max}")
    if seq.params.N0 != params.N0:
        raise ValueError("sequence table and growth params disagree on N0")
    prec = params.digits()
    log_a, log_b, seed, audit = {}, {}, {}, {}
    with mp.workdps(prec):
        log_a[3] = mpf(params.log10_a3) * mp.ln10
        for n in range(3, params.n_max + 1):
            log_b[n] = log_b_from_a(n, log_a[n])
            seed[n] = n < params.N1
            if seed[n]:
                log_a[n + 1] = (n**3) * log_a[n]
            else:
                log_a[n + 1], s = recursion_step(n, log_a, log_b, seq)
                audit[n] = s
                if s != 1:
                    raise IdentityError(f"defining product for a_{n + 1} has sign {s}")
        m = params.n_max + 1
        log_b[m] = log_b_from_a(m, log_a[m])
        seed[m] = m < params.N1
    return GrowthTable(params, log_a, log_b, seed, prec, audit)


# --------------------------------------------------------------------------
# Sequence inequalities and the internals of their proof


def verify_lemma1(table: GrowthTable, seq: SequenceTable, prec: int | None = None) -> list[CheckReport]:
    prec = prec or table.precision
    hi = table.n_max
    names = ["lemma1.aapprox", "lemma1.aapprox2", "lemma1.i1_mu", "lemma1.i1_beta",
             "lemma1.i1y_mu", "lemma1.i1y_beta"]
    reps = {nm: CheckReport(nm, THRESHOLD, precision=prec, n_range=(3, hi)) for nm in names}
    with mp.workdps(prec):
        for n in range(3, hi + 1):
            row = seq[n]
            la, la1 = table.log_a[n], table.log_a[n + 1]
            bound = -mp.exp(mpf(n) / 2)
            lo_e, hi_e = (n**3 - mpf(2) / n) * la, (n**3 + mpf(2) / n) * la
            reps["lemma1.aapprox"].add(n, lo_e <= la1 <= hi_e,
                                       margin=min(la1 - lo_e, hi_e - la1) / la)
            e_n = mp.exp(n)
            reps["lemma1.aapprox2"].add(n, la > e_n, margin=la - e_n)
            v = (1 - row.mu) * la
            reps["lemma1.i1_mu"].add(n, v <= bound, margin=bound - v)
            if row.alpha == 0:
                reps["lemma1.i1_beta"].add(n, True, margin=None, vacuous=True)
                reps["lemma1.i1y_beta"].add(n, True, margin=None, vacuous=True)
            else:
                v = mp.log(row.alpha) + (1 - row.beta) * la
                reps["lemma1.i1_beta"].add(n, v <= bound, margin=bound - v)
                v = mp.log(row.alpha) + row.beta * la - la1
                reps["lemma1.i1y_beta"].add(n, v <= bound, margin=bound - v)
            v = row.mu_pows[n - 2] * la - la1
            reps["lemma1.i1y_mu"].add(n, v <= bound, margin=bound - v)
    return [reps[nm] for nm in names]


def k_m_exact(m: int) -> Fraction:
    """k_m as an exact rational (kappa_m = T_m)."""
    Tm, Tm1 = T(m), T(m + 1)
    return Fraction(Tm1 + 2, Tm1) * Fraction(Tm, Tm + 2) ** Tm * Fraction(2, Tm + 2) ** 2


def k_m_bounds(m: int) -> tuple[bool, mpf]:
    """Exact verdict for m^-6/8 < k_m < 8 m^-6, and log k_m for the margin."""
    Tm, Tm1 = T(m), T(m + 1)
    # k_m = (Tm1+2) Tm^Tm 4 / (Tm1 (Tm+2)^(Tm+2))
    num = (Tm1 + 2) * Tm**Tm * 4
    den = Tm1 * (Tm + 2) ** (Tm + 2)
    m6 = m**6
    ok = den < 8 * m6 * num and m6 * num < 8 * den
    log_k = (mp.log(Tm1 + 2) - mp.log(Tm1) + Tm * (mp.log(Tm) - mp.log(Tm + 2))
             + 2 * (mp.ln2 - mp.log(Tm + 2)))
    return ok, log_k


def lemma1_terms(m: int, table: GrowthTable, seq: SequenceTable) -> dict:
    """log k_m, kappa_m, log L1, log L2 and the exponent ratio of the factorisation of a_{m+1}."""
    N0 = seq.params.N0
    la, lb = table.log_a, table.log_b
    kap = kappa(m, N0)
    _, log_k = k_m_bounds(m)
    terms = []
    for k in range(3, m):
        for logc, mult, _ in level_zeros(k, seq, la[k]):
            if logc >= lb[m]:
                raise IdentityError(f"zero of level {k} exceeds b_{m}")
            terms.append(mult * log1m_exp(logc - lb[m], absorb=False))
    log_L1 = mp.fsum(terms)
    log_L2 = 2 * la[m - 1] + mp.fsum(
        mult * logc for k in range(3, m - 1) for logc, mult, _ in level_zeros(k, seq, la[k])
    )
    # (m-1)^3 tau_{m-1} log a_{m-1}: level m-1 zeros other than a_{m-1} itself
    top = mp.fsum(mult * logc for logc, mult, l in level_zeros(m - 1, seq, la[m - 1]) if l != 0)
    ratio_log = kap * la[m] - top
    return {"kappa": kap, "log_k": log_k, "log_L1": log_L1, "log_L2": log_L2, "ratio_log": ratio_log}


def verify_lemma1_internals(table: GrowthTable, seq: SequenceTable, prec: int | None = None) -> list[CheckReport]:
    prec = prec or table.precision
    N1, hi = table.params.N1, table.n_max
    N0 = seq.params.N0
    rng = (N1, hi)
    kap = CheckReport("lemma1.kappa", HARD, precision=prec, n_range=(max(N1, N0 + 1), hi))
    km = CheckReport("lemma1.k_m", THRESHOLD, precision=prec, n_range=rng)
    L1 = CheckReport("lemma1.L1", THRESHOLD, precision=prec, n_range=rng)
    L2 = CheckReport("lemma1.L2", THRESHOLD, precision=prec, n_range=rng)
    expo = CheckReport("lemma1.exponent_ratio", THRESHOLD, precision=prec, n_range=rng)
    fact = CheckReport("lemma1.factorisation", HARD, precision=prec, n_range=rng)
    with mp.workdps(prec):
        tol = mpf(10) ** (10 - prec)
        for m in range(N1, hi + 1):
            t = lemma1_terms(m, table, seq)
            if m >= N0 + 1:
                kap.add(m, t["kappa"] == T(m), lhs=t["kappa"], rhs=T(m))
            ok, log_k = k_m_bounds(m)
            lm6 = -6 * mp.log(m)
            km.add(m, ok, margin=min(log_k - (lm6 - 3 * mp.ln2), lm6 + 3 * mp.ln2 - log_k), log_k=log_k)
            l1 = t["log_L1"]
            L1.add(m, -mp.ln2 < l1 < 0, margin=min(l1 + mp.ln2, -l1), log_L1=l1)
            l2, cap = t["log_L2"], mpf(32) / m**2 * table.log_a[m]
            L2.add(m, 0 < l2 < cap, margin=min(l2, cap - l2) / table.log_a[m], log_L2=l2)
            r = t["ratio_log"]
            lo_e, hi_e = (m**3 - mpf(1) / m) * table.log_a[m], (m**3 + mpf(1) / m) * table.log_a[m]
            expo.add(m, lo_e <= r <= hi_e, margin=min(r - lo_e, hi_e - r) / table.log_a[m])
            recon = log_k + r + l1 - l2
            err = abs(recon - table.log_a[m + 1])
            fact.add(m, err <= tol * abs(table.log_a[m + 1]), margin=err / abs(table.log_a[m + 1]))
    return [kap, km, L1, L2, expo, fact]


def precision_sufficiency(params: GrowthParams, seq: SequenceTable, extra: int = 20,
                          table: GrowthTable | None = None) -> CheckReport:
    """Rebuild at prec + extra digits; log a_n must move by a relative amount < 1e-10."""
    base = table or build_growth_table(params, seq)
    hi_params = GrowthParams(params.log10_a3, params.N1, params.n_max, params.N0, base.precision + extra)
    other = build_growth_table(hi_params, seq)
    rep = CheckReport("growth.precision_sufficiency", HARD, precision=base.precision,
                      n_range=(3, params.n_max + 1))
    with mp.workdps(other.precision):
        for n in sorted(base.log_a):
            rel = abs(base.log_a[n] - other.log_a[n]) / abs(other.log_a[n])
            rep.add(n, rel < mpf("1e-10"), margin=rel)
    rep.summary["compared_precision"] = other.precision
    return rep


def sign_parity_report(table: GrowthTable) -> CheckReport:
    rep = CheckReport("growth.sign_parity", HARD, precision=table.precision,
                      n_range=(table.params.N1, table.n_max))
    for n in sorted(table.sign_audit):
        rep.add(n, table.sign_audit[n] == 1, margin=table.sign_audit[n])
    return rep


def monotone_growth_report(table: GrowthTable) -> CheckReport:
    rep = CheckReport("growth.monotone", HARD, precision=table.precision, n_range=(3, table.n_max))
    with mp.workdps(table.precision):
        for n in range(3, table.n_max + 1):
            la, la1 = table.log_a[n], table.log_a[n + 1]
            lo = n**3 * la * (1 - mpf(2) / n**4)
            rep.add(n, la1 > lo and la1 > la, margin=(la1 - lo) / la)
    return rep
