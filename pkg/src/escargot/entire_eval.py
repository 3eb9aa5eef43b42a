"""Evaluation of the entire function and the disc-mapping checks.

f(z) = z * prod_k (1 + z/c_k)^{m_k} over the negative-real zeros -c_k listed
in a :class:`ZeroCatalog`.  All evaluation happens in log-polar form: a
complex number is (log|z|, arg z / pi), so that the huge products become
sums and the argument of a negative real stays an exact integer multiple of
pi.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from pathlib import Path

from mpmath import mp, mpc, mpf

from .checks import HARD, THRESHOLD, CheckReport, CoverageError, IdentityError
from .hyperscale import GrowthTable, LogMag, LogReal, level_zeros, lg, window
from .seqcore import SequenceTable, T


def _reduce_pi(x) -> mpf:
    """Reduce an angle in units of pi into (-1, 1]."""
    if not isinstance(x, mpf):
        x = mpf(x)
    if -1 < x <= 1:
        return x
    x = x - 2 * mp.floor((x + 1) / 2)
    return mpf(1) if x == -1 else x


@dataclass(frozen=True)
class LogComplex:
    """A complex number as (log modulus, argument / pi), or exact zero."""

    log_mod: mpf | None
    arg_pi: mpf = mpf(0)
    is_zero: bool = False

    def __post_init__(self):
        if not self.is_zero:
            if not isinstance(self.log_mod, mpf):
                object.__setattr__(self, "log_mod", mpf(self.log_mod))
            object.__setattr__(self, "arg_pi", _reduce_pi(self.arg_pi))

    @property
    def arg(self) -> mpf:
        return self.arg_pi * mp.pi

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(None, mpf(0), True)

    @classmethod
    def polar(cls, log_mod, arg) -> "LogComplex":
        return cls(log_mod, mpf(arg) / mp.pi)

    @classmethod
    def from_complex(cls, z) -> "LogComplex":
        z = mpc(z)
        if z == 0:
            return cls.zero()
        if z.imag == 0:
            return cls(mp.log(abs(z.real)), mpf(0) if z.real > 0 else mpf(1))
        return cls(mp.log(abs(z)), mp.arg(z) / mp.pi)

    @classmethod
    def pos_real(cls, r: LogMag) -> "LogComplex":
        return cls(r.log, mpf(0))

    @classmethod
    def neg_real(cls, r: LogMag) -> "LogComplex":
        return cls(r.log, mpf(1))

    @classmethod
    def shifted(cls, log_center, w) -> "LogComplex":
        """z = -c (1 - w) for c = exp(log_center) and a small complex w."""
        w = mpc(w)
        if w == 0:
            return cls(log_center, mpf(1))
        l = mp.log1p(-w)
        return cls(log_center + l.real, 1 + l.imag / mp.pi)

    @property
    def is_real(self) -> bool:
        return not self.is_zero and (self.arg_pi == 0 or self.arg_pi == 1)

    def conj(self) -> "LogComplex":
        if self.is_zero:
            return self
        return LogComplex(self.log_mod, -self.arg_pi)

    def to_mpc(self) -> mpc:
        if self.is_zero:
            return mpc(0)
        return mp.exp(self.log_mod) * mpc(mp.cospi(self.arg_pi), mp.sinpi(self.arg_pi))

    def logmag(self) -> LogMag:
        if self.is_zero:
            raise ValueError("zero has no log-modulus")
        return LogMag(self.log_mod)

    def __repr__(self):
        if self.is_zero:
            return "LogComplex(0)"
        return f"LogComplex(log_mod={mp.nstr(self.log_mod, 15)}, arg/pi={mp.nstr(self.arg_pi, 15)})"


# --------------------------------------------------------------------------
# zero catalog


@dataclass(frozen=True)
class ZeroCatalog:
    """Zeros -c of f as (log c, multiplicity), ascending in log c.

    ``next_log`` is the log-modulus of the smallest omitted zero and
    ``next_mult`` bounds the multiplicity of its level; ``next_log = None``
    means the catalog is the whole (finite) product.
    """

    entries: tuple[tuple[mpf, int], ...]
    n_max: int
    next_log: mpf | None = None
    next_mult: int = 0

    def __post_init__(self):
        logs = [e[0] for e in self.entries]
        if any(b <= a for a, b in zip(logs, logs[1:])):
            raise ValueError("catalog entries must be strictly ascending")
        if any(m <= 0 or m % 2 for _, m in self.entries):
            raise ValueError("multiplicities must be positive even integers")
        object.__setattr__(self, "_logs", logs)

    def __len__(self):
        return len(self.entries)

    @property
    def logs(self) -> list[mpf]:
        return self._logs

    def require(self, log_z, prec: int | None = None):
        """Raise CoverageError unless the omitted zeros are below one ulp at |z|."""
        if self.next_log is None:
            return
        # tail: sum m|z|/c over omitted zeros is below 2 next_mult |z| / c_next,
        # the later levels being hyper-exponentially further out
        slack = self.next_log - log_z - mp.log(2 * self.next_mult)
        if slack <= window(prec):
            raise CoverageError(
                f"insufficient catalog: log|z| = {mp.nstr(log_z, 10)}, first omitted zero has "
                f"log-modulus {mp.nstr(self.next_log, 10)}")

    def covers(self, log_z, prec: int | None = None) -> bool:
        try:
            self.require(log_z, prec)
        except CoverageError:
            return False
        return True

    def truncated(self, k_max: int, table: GrowthTable, seq: SequenceTable, finite: bool = False) -> "ZeroCatalog":
        return build_catalog(table, seq, k_max, finite)

    def count_below(self, log_r, with_multiplicity: bool = True) -> int:
        i = bisect.bisect_left(self._logs, log_r)
        if with_multiplicity:
            return sum(m for _, m in self.entries[:i])
        return i

    def dump(self, path) -> None:
        """Text form; decimals carry guard digits so that load() at the same dps is exact."""
        digits = mp.dps + 5
        lines = ["# escargot zero catalog", f"# n_max {self.n_max}",
                 f"# next_log {'none' if self.next_log is None else mp.nstr(self.next_log, digits, strip_zeros=False)}",
                 f"# next_mult {self.next_mult}"]
        lines += [f"{mp.nstr(c, digits, strip_zeros=False)} {m}" for c, m in self.entries]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "ZeroCatalog":
        entries, n_max, next_log, next_mult = [], 0, None, 0
        for raw in Path(path).read_text().splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "n_max":
                    n_max = int(parts[1])
                elif len(parts) == 2 and parts[0] == "next_log":
                    next_log = None if parts[1] == "none" else mpf(parts[1])
                elif len(parts) == 2 and parts[0] == "next_mult":
                    next_mult = int(parts[1])
                continue
            c, m = line.split()
            entries.append((mpf(c), int(m)))
        return cls(tuple(entries), n_max, next_log, next_mult)


def build_catalog(table: GrowthTable, seq: SequenceTable, k_max: int | None = None,
                  finite: bool = False) -> ZeroCatalog:
    k_max = table.n_max if k_max is None else k_max
    if k_max > min(seq.n_max, table.n_max):
        raise CoverageError(f"catalog up to k={k_max} exceeds table coverage")
    with mp.workdps(table.precision):
        ent = []
        for k in range(3, k_max + 1):
            ent.extend((c, m) for c, m, _ in level_zeros(k, seq, table.log_a[k]))
        ent.sort(key=lambda e: e[0])
        merged = []
        for c, m in ent:
            if merged and merged[-1][0] == c:
                merged[-1] = (c, merged[-1][1] + m)
            else:
                merged.append((c, m))
        if finite:
            return ZeroCatalog(tuple(merged), k_max)
        k = k_max + 1
        next_mult = 2 * k + max(seq.params.N0**3 + 2 * seq.params.N0**2 + 6 * seq.params.N0 + 2, 3 * k * k + k + 6)
        return ZeroCatalog(tuple(merged), k_max, table.log_a[k], next_mult)


# --------------------------------------------------------------------------
# evaluation


def _factor_log(d, th, real: bool):
    """log(1 + e^{d + i pi th}) as (real part, imaginary part / pi)."""
    if real:
        if th == 0:
            return (mp.log1p(mp.exp(d)) if d < 0 else d + mp.log1p(mp.exp(-d))), 0
        if d == 0:
            return None, None
        v = -mp.expm1(d)  # 1 - e^d without cancellation
        return mp.log(abs(v)), (1 if v < 0 else 0)
    if abs(th) > mpf(1) / 2:
        s = th - 1 if th > 0 else th + 1
        v = -mp.expm1(mpc(d, mp.pi * s))
    else:
        v = 1 + mp.exp(d) * mpc(mp.cospi(th), mp.sinpi(th))
    l = mp.log(v)
    return l.real, l.imag / mp.pi


def eval_f(z: LogComplex, catalog: ZeroCatalog, prec: int | None = None,
           order: str = "ascending") -> LogComplex:
    """f(z) in log-polar form.

    Factors are split into three regimes by d = log|z| - log c: far below
    the zero (d < -W) the factor is 1 + z/c and contributes m z/c to a small
    correction; far above (d > W) it is (z/c)^m (1 + c/z)^m; in between it is
    computed directly.  W = prec * ln 10.
    """
    prec = prec or mp.dps
    with mp.workdps(prec):
        if z.is_zero:
            return LogComplex.zero()
        W = window(prec)
        L, th = z.log_mod, z.arg_pi
        catalog.require(L, prec)
        real = z.is_real
        hi = bisect.bisect_right(catalog.logs, L + 2 * W)
        idx = range(hi) if order == "ascending" else range(hi - 1, -1, -1)
        re_acc, pi_acc = [L], [th]
        small = mpc(0)
        for i in idx:
            logc, m = catalog.entries[i]
            d = L - logc
            if d < -W:
                small += m * mp.exp(d) * mpc(mp.cospi(th), mp.sinpi(th))
            elif d > W:
                re_acc.append(m * d)
                pi_acc.append(m * th)
                if d < 2 * W:
                    small += m * mp.exp(-d) * mpc(mp.cospi(th), -mp.sinpi(th))
            else:
                lr, lp = _factor_log(d, th, real)
                if lr is None:
                    return LogComplex.zero()
                re_acc.append(m * lr)
                if lp:
                    pi_acc.append(m * lp)
        if abs(small) >= mpf(10) ** (-prec):
            re_acc.append(small.real)
            pi_acc.append(small.imag / mp.pi)
        if real:
            pi_acc = [p for p in pi_acc if p]
        return LogComplex(mp.fsum(re_acc), _reduce_pi(mp.fsum(pi_acc)) if pi_acc else mpf(0))


def eval_f_neg_real(x: LogMag, catalog: ZeroCatalog, prec: int | None = None) -> LogReal:
    """f(-x) for x > 0 with explicit sign, via real log|1 - x/c| sums."""
    prec = prec or mp.dps
    with mp.workdps(prec):
        L = x.log
        catalog.require(L, prec)
        W = window(prec)
        hi = bisect.bisect_right(catalog.logs, L + W)
        terms = [L]
        sign = -1
        for logc, m in catalog.entries[:hi]:
            if logc == L:
                return LogReal.zero()
            if logc < L and m % 2:
                sign = -sign
            terms.append(m * lg(L, logc, prec=prec))
        return LogReal(sign, LogMag(mp.fsum(terms), prec))


def max_modulus(r: LogMag, catalog: ZeroCatalog, prec: int | None = None) -> LogMag:
    """M(r) = f(r): every Taylor coefficient of f is positive."""
    v = eval_f(LogComplex.pos_real(r), catalog, prec)
    return LogMag(v.log_mod, prec or mp.dps)


# --------------------------------------------------------------------------
# the discs B_n


@dataclass(frozen=True)
class DiscSpec:
    n: int
    center_log: mpf
    delta: mpf

    @classmethod
    def of(cls, n: int, table: GrowthTable) -> "DiscSpec":
        return cls(n, table.log_b[n], mpf(n) ** -15)

    def point(self, w) -> LogComplex:
        return LogComplex.shifted(self.center_log, w)


def relative_offset(F: LogComplex, log_center) -> mpc:
    """q - 1 where q = F / (-c)."""
    if F.is_zero:
        return mpc(-1)
    return mp.expm1(mpc(F.log_mod - log_center, mp.pi * _reduce_pi(F.arg_pi - 1)))


def decompose_I1_I2(n: int, w, table: GrowthTable, catalog: ZeroCatalog, prec: int | None = None,
                    check: bool = True) -> tuple[LogComplex, LogComplex]:
    """f(z) / (-b_{n+1}) = I1 * I2 for z = -b_n + w b_n.

    I1 collects z itself and the zeros up to a_n (in shifted form), I2 the
    zeros beyond a_n.  With ``check`` the product is compared with eval_f.
    """
    if n < table.params.N1:
        raise ValueError(f"the split needs n >= N1 = {table.params.N1}")
    prec = prec or mp.dps
    w = mpc(w)
    with mp.workdps(prec):
        W = window(prec)
        lb, la = table.log_b[n], table.log_a[n]
        tol_same = abs(la) * mpf(10) ** (-(prec // 2))
        t_half = mpf(T(n)) / 2
        log_I1 = mp.log1p(-w) + 2 * mp.log1p(w * t_half)
        log_I2 = mpc(0)
        one_minus_w = 1 - w
        for logc, m in catalog.entries:
            if abs(logc - la) <= tol_same:
                continue
            if logc < la:
                D = logc - lb
                if D >= 0:
                    raise IdentityError(f"zero below a_{n} lies above b_{n}")
                if D < -2 * W:
                    g = mpf(-1)
                else:
                    g = 1 / mp.expm1(D)
                log_I1 += m * mp.log1p(w * g)
            else:
                D = lb - logc
                if D < -2 * W:
                    break
                log_I2 += m * mp.log1p(-one_minus_w * mp.exp(D))
        I1 = LogComplex(log_I1.real, log_I1.imag / mp.pi)
        I2 = LogComplex(log_I2.real, log_I2.imag / mp.pi)
        if check:
            F = eval_f(DiscSpec.of(n, table).point(w), catalog, prec)
            lq = mpc(F.log_mod - table.log_b[n + 1], mp.pi * _reduce_pi(F.arg_pi - 1))
            err = abs(lq - log_I1 - log_I2)
            tol = mpf(10) ** (10 - prec) * max(1, abs(F.log_mod))
            if err > tol:
                raise IdentityError(f"I1*I2 differs from f(z)/(-b_{n+1}) at n={n}: log error {mp.nstr(err, 5)}")
    return I1, I2


def i1_offset(I1: LogComplex) -> mpf:
    """|I1 - 1| from its (small) log."""
    return abs(mp.expm1(mpc(I1.log_mod, mp.pi * I1.arg_pi)))


def check_disc_map(n: int, table: GrowthTable, catalog: ZeroCatalog, samples: int = 64,
                   prec: int | None = None, radii=(0.5, 0.99)) -> CheckReport:
    """Heuristic certificate for f(B_n) inside B_{n+1}: the centre plus boundary circles."""
    if samples < 8:
        raise ValueError("need at least 8 samples per circle")
    prec = prec or table.digits_for(n + 1)
    rep = CheckReport(f"disc_map.n{n}", THRESHOLD, precision=prec, n_range=(n, n), indexed=False)
    with mp.workdps(prec):
        disc = DiscSpec.of(n, table)
        target = DiscSpec.of(n + 1, table)
        pts = [("center", mpc(0))]
        for rho in radii:
            for j in range(samples):
                pts.append((f"r{rho}:{j}", mpf(rho) * disc.delta * mp.expjpi(mpf(2 * j) / samples)))
        worst = mpf(0)
        for label, w in pts:
            F = eval_f(disc.point(w), catalog, prec)
            off = abs(relative_offset(F, target.center_log))
            ratio = off / target.delta
            worst = max(worst, ratio)
            rep.add(label, ratio < 1, margin=ratio)
        rep.summary["worst_ratio"] = worst
        rep.summary["delta_next"] = target.delta
    rep.notes.append("boundary sampling; heuristic, not a proof of inclusion")
    return rep


def check_symmetry(samples, catalog: ZeroCatalog, prec: int | None = None) -> CheckReport:
    prec = prec or mp.dps
    rep = CheckReport("eval.symmetry", HARD, precision=prec, indexed=False)
    with mp.workdps(prec):
        for i, z in enumerate(samples):
            a = eval_f(z, catalog, prec)
            b = eval_f(z.conj(), catalog, prec)
            if a.is_zero or b.is_zero:
                rep.add(i, a.is_zero and b.is_zero, margin=0)
                continue
            scale = max(1, abs(a.log_mod))
            err = max(abs(a.log_mod - b.log_mod), abs(_reduce_pi(a.arg_pi + b.arg_pi)) * mp.pi)
            ok = err <= mpf(10) ** (10 - prec) * scale
            if z.is_real:
                ok = ok and a.is_real
            rep.add(i, ok, margin=err / scale)
    return rep


def check_I1_I2(n: int, table: GrowthTable, catalog: ZeroCatalog, samples: int = 64,
                prec: int | None = None, rho=0.99) -> CheckReport:
    """|I1 - 1| < 2 n^-16 and 1 - 2 exp(-e^{n/4}) <= |I2| <= 1 over the centre and a circle."""
    prec = prec or table.digits_for(n + 1)
    rep = CheckReport(f"i1i2.n{n}", THRESHOLD, precision=prec, n_range=(n, n), indexed=False)
    with mp.workdps(prec):
        delta = mpf(n) ** -15
        i1_cap = 2 * mpf(n) ** -16
        log_i2_floor = mp.log1p(-2 * mp.exp(-mp.exp(mpf(n) / 4)))
        slack = mpf(10) ** (5 - prec)
        pts = [("center", mpc(0))] + [
            (f"r{rho}:{j}", mpf(rho) * delta * mp.expjpi(mpf(2 * j) / samples)) for j in range(samples)
        ]
        worst_i1, worst_i2 = mpf(0), mpf(0)
        for label, w in pts:
            I1, I2 = decompose_I1_I2(n, w, table, catalog, prec)
            off = i1_offset(I1)
            ok = off < i1_cap and log_i2_floor <= I2.log_mod <= slack
            worst_i1 = max(worst_i1, off / i1_cap)
            worst_i2 = min(worst_i2, I2.log_mod)
            rep.add(label, ok, margin=off / i1_cap, log_abs_I2=I2.log_mod)
        rep.summary["worst_I1_ratio"] = worst_i1
        rep.summary["min_log_abs_I2"] = worst_i2
    return rep
