"""Integer and real sequences behind the construction.

The integer sequences (2*alpha_n, the closed form of tau_n, T_n) are exact
Python ints.  The real ones (mu_n, sigma_n, beta_n and the definitional
tau_n) are mpmath floats computed at a caller-specified number of decimal
digits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from mpmath import mp, mpf

from .checks import HARD, THRESHOLD, DIAGNOSTIC, CheckReport, IdentityError

DEFAULT_N0 = 10


@dataclass(frozen=True)
class SeqParams:
    N0: int = DEFAULT_N0
    precision_digits: int = 60

    def __post_init__(self):
        if self.N0 < 4 or self.N0 % 2:
            raise ValueError(f"N0 must be an even integer >= 4, got {self.N0}")
        if self.precision_digits < 30:
            raise ValueError(f"precision_digits must be >= 30, got {self.precision_digits}")


def mu(n: int, prec: int = 60) -> mpf:
    """n ** (3/n)."""
    if n < 1:
        raise ValueError("mu is defined for n >= 1")
    return mu_pow(n, 1, prec)


def mu_pow(n: int, l: int, prec: int = 60) -> mpf:
    """mu_n ** l, evaluated as n ** (3l/n) so that l = n gives n**3 exactly."""
    if n < 1:
        raise ValueError("mu is defined for n >= 1")
    with mp.workdps(prec):
        if (3 * l) % n == 0:
            return mpf(n) ** ((3 * l) // n)
        return mp.power(n, mpf(3 * l) / n)


def sigma(n: int, prec: int = 60) -> mpf:
    """Direct sum of mu_{n,l} over l = 1..n-2."""
    if n < 3:
        raise ValueError("sigma is defined for n >= 3")
    with mp.workdps(prec + 5):
        s = mp.fsum(mu_pow(n, l, prec + 5) for l in range(1, n - 1))
    with mp.workdps(prec):
        return +s


def sigma_closed(n: int, prec: int = 60) -> mpf:
    """Geometric-series form mu_n (mu_{n,n-2} - 1) / (mu_n - 1)."""
    if n < 3:
        raise ValueError("sigma is defined for n >= 3")
    with mp.workdps(prec + 5):
        m = mu(n, prec + 5)
        s = m * (mu_pow(n, n - 2, prec + 5) - 1) / (m - 1)
    with mp.workdps(prec):
        return +s


def two_alpha(n: int, N0: int) -> int:
    if n < N0:
        return 0
    if n == N0:
        return N0**3 + 2 * N0**2 + 6 * N0 + 2
    return 3 * n * n + n + (6 if n % 2 == 0 else 4)


def alpha(n: int, params: SeqParams) -> int:
    if n < 3:
        raise ValueError("alpha is used for n >= 3")
    ta = two_alpha(n, params.N0)
    assert ta % 2 == 0
    return ta // 2


def beta(n: int, params: SeqParams, prec: int | None = None) -> mpf:
    prec = prec or params.precision_digits
    if n < 3:
        raise ValueError("beta is used for n >= 3")
    if n < params.N0:
        return mpf(0)
    a = alpha(n, params)
    if a <= 0:
        raise IdentityError(f"alpha_{n} = {a} for n >= N0")
    with mp.workdps(prec + 5):
        s = sigma(n, prec + 5)
        if n % 2 == 0:
            top = mpf(n) ** 4 - s
        else:
            top = mpf(n**3 * (2 * n - 1)) / 2 - s
        b = top / a
    with mp.workdps(prec):
        return +b


def tau_closed(n: int, N0: int) -> int:
    if n < N0:
        raise ValueError(f"tau_n is undefined for n < N0 (n={n}, N0={N0})")
    return 2 * n if n % 2 == 0 else 2 * n - 1


def tau_definitional(n: int, params: SeqParams, prec: int | None = None) -> mpf:
    """(2/n^3)(alpha_n beta_n + sigma_n); meaningful for every n >= 3."""
    prec = prec or params.precision_digits
    with mp.workdps(prec + 5):
        t = 2 * (alpha(n, params) * beta(n, params, prec + 5) + sigma(n, prec + 5)) / mpf(n) ** 3
    with mp.workdps(prec):
        return +t


def tau(n: int, params: SeqParams, prec: int | None = None) -> tuple[mpf, int]:
    """Definitional value and closed-form integer of tau_n, for n >= N0."""
    if n < params.N0:
        raise ValueError(f"tau_n is undefined for n < N0 (n={n}, N0={params.N0})")
    return tau_definitional(n, params, prec), tau_closed(n, params.N0)


def T(n: int) -> int:
    if n < 3:
        raise ValueError("T is used for n >= 3")
    return n**3 + 2 * n - (3 if n % 2 == 0 else 2)


@dataclass
class SequenceRow:
    n: int
    alpha: int
    two_alpha: int
    beta: mpf
    tau: mpf
    tau_closed: int | None
    T: int
    sigma: mpf
    mu: mpf
    mu_pows: list[mpf] = field(repr=False, default_factory=list)


@dataclass
class SequenceTable:
    params: SeqParams
    n_max: int
    rows: dict[int, SequenceRow]

    def __getitem__(self, n: int) -> SequenceRow:
        try:
            return self.rows[n]
        except KeyError:
            raise KeyError(f"sequence table covers n in [3, {self.n_max}], not {n}") from None

    def __contains__(self, n: int) -> bool:
        return n in self.rows


def build_sequence_table(params: SeqParams, n_max: int, prec: int | None = None) -> SequenceTable:
    prec = prec or params.precision_digits
    if n_max < 3:
        raise ValueError("n_max must be >= 3")
    rows = {}
    for n in range(3, n_max + 1):
        pows = [mu_pow(n, l, prec) for l in range(n + 1)]
        rows[n] = SequenceRow(
            n=n,
            alpha=alpha(n, params),
            two_alpha=two_alpha(n, params.N0),
            beta=beta(n, params, prec),
            tau=tau_definitional(n, params, prec),
            tau_closed=tau_closed(n, params.N0) if n >= params.N0 else None,
            T=T(n),
            sigma=sigma(n, prec),
            mu=pows[1],
            mu_pows=pows,
        )
    return SequenceTable(params, n_max, rows)


def kappa(m: int, N0: int) -> int:
    """1 + 2 sum_{k<m} alpha_k + sum_{k<m} 2(k-1): the total exponent of b_m."""
    return 1 + sum(two_alpha(k, N0) for k in range(3, m)) + sum(2 * (k - 1) for k in range(3, m))


def check_identities(n_range: tuple[int, int], params: SeqParams, prec: int | None = None,
                     strict: bool = True) -> list[CheckReport]:
    """Verify the exact sequence identities and report the asymptotic thresholds.

    Exact failures raise :class:`IdentityError` when ``strict`` is true; with
    ``strict=False`` they are only recorded in the reports.
    """
    prec = prec or params.precision_digits
    lo, hi = n_range
    lo = max(lo, 3)
    if hi < lo:
        raise ValueError(f"empty n-range {n_range}")
    N0 = params.N0
    reports = []

    alphaeq = CheckReport("seq.alphaeq", HARD, precision=prec, n_range=(max(lo, N0 + 1), hi))
    alphadef = CheckReport("seq.alphadef", HARD, precision=prec, n_range=(max(lo, N0), hi))
    mainid = CheckReport("seq.mainidentity", HARD, precision=prec, n_range=(max(lo, N0 + 1), hi))
    taucf = CheckReport("seq.tau_closed_form", HARD, precision=prec, n_range=(max(lo, N0), hi))
    sigcf = CheckReport("seq.sigma_closed_form", HARD, precision=prec, n_range=(lo, hi))
    mumono = CheckReport("seq.mu_decreasing", HARD, precision=prec, n_range=(lo, hi))
    muthing = CheckReport("seq.muthing", THRESHOLD, precision=prec, n_range=(lo, hi))
    muineq = CheckReport("seq.muineq", THRESHOLD, precision=prec, n_range=(lo, hi))
    alphabeta = CheckReport("seq.alphabeta_trend", THRESHOLD, precision=prec, n_range=(max(lo, N0 + 1), hi))

    two_sum = sum(two_alpha(k, N0) for k in range(3, lo))
    tol = mpf(10) ** (10 - prec)
    devs = {}
    with mp.workdps(prec):
        mu_prev = mu(lo, prec)
        for n in range(lo, hi + 1):
            ta = two_alpha(n, N0)
            two_sum += ta
            if n > N0:
                rhs = 3 * n * n + n + 3 + tau_closed(n, N0) - tau_closed(n - 1, N0)
                alphaeq.add(n, ta == rhs, lhs=ta, rhs=rhs)
            if n >= N0:
                rhs = n**3 + 2 * n**2 + 4 * n + 2 + tau_closed(n, N0)
                alphadef.add(n, two_sum == rhs, lhs=two_sum, rhs=rhs)
                t_def, t_cl = tau(n, params, prec)
                rel = abs(t_def - t_cl) / t_cl
                taucf.add(n, rel <= tol, margin=rel)
            if n > N0:
                lhs = kappa(n, N0)
                mid = n**3 + tau_closed(n - 1, N0)
                mainid.add(n, lhs == mid == T(n), lhs=lhs, rhs=T(n))
            s_dir, s_cl = sigma(n, prec), sigma_closed(n, prec)
            rel = abs(s_dir - s_cl) / s_dir
            sigcf.add(n, rel <= mpf(10) ** (2 - prec), margin=rel)

            mu_n = mu(n, prec)
            if n > lo:
                mumono.add(n, mu_n < mu_prev, margin=mu_prev - mu_n)
            mu_prev = mu_n

            b = beta(n, params, prec)
            low, high = mu_pow(n, 2, prec), mu_pow(n, n - 3, prec)
            muthing.add(n, low < b < high, margin=min(b - low, high - b), beta=b)

            x = mu_n - 1
            lgn = mp.log(n)
            muineq.add(n, 3 * lgn / n <= x <= 6 * lgn / n, margin=min(x - 3 * lgn / n, 6 * lgn / n - x))

            if n > N0:
                # the +6 / +4 offsets alternate, so compare within one parity class
                dev = abs(mpf(ta) / 2 / (mpf(3) / 2 * n * n) - 1)
                ok = n - 2 not in devs or dev < devs[n - 2]
                alphabeta.add(n, ok, margin=dev)
                devs[n] = dev

    for rep in (alphaeq, alphadef, mainid, taucf, sigcf, mumono, muthing, muineq, alphabeta):
        reports.append(rep)
    if strict:
        for rep in reports:
            if rep.kind == HARD and not rep.passed:
                bad = rep.failures[0]
                raise IdentityError(f"{rep.name} failed at n={bad.key}: {bad.detail or bad.margin}")
    return reports


def beta_ratio_trend(n_range: tuple[int, int], params: SeqParams, prec: int = 60) -> CheckReport:
    """beta_n / (2/3 n^2), which approaches 1 only logarithmically slowly."""
    rep = CheckReport("seq.beta_ratio", DIAGNOSTIC, precision=prec, n_range=n_range)
    with mp.workdps(prec):
        for n in range(max(n_range[0], params.N0), n_range[1] + 1):
            r = beta(n, params, prec) / (mpf(2) / 3 * n * n)
            rep.add(n, True, margin=r)
    return rep
