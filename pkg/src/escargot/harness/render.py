"""Escape-speed raster in log-polar coordinates, written as binary PPM (P6).

Each pixel is a start point z = exp(L + i pi A).  Its colour is the number of
consecutive steps m = 1..budget with log|f^m(z)| >= log M^m(R), where R is
eps(r_c) r_c for the modulus r_c at the region centre.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from mpmath import mp, mpf

from .. import escape as esc
from ..checks import CoverageError
from ..entire_eval import LogComplex, eval_f
from ..hyperscale import LogMag
from .config import ConfigError, parse_resolution
from .pipeline import Context

COVERAGE_RGB = (255, 0, 255)


@dataclass(frozen=True)
class Region:
    log_lo: mpf
    log_hi: mpf
    arg_lo: mpf  # in units of pi
    arg_hi: mpf
    spec: str


def parse_region(text: str, ctx: Context) -> Region:
    """``b:N:H`` (box of half-width H * n^-15 around -b_N) or ``L0:L1:A0:A1``."""
    parts = text.split(":")
    table = ctx.table
    with mp.workdps(ctx.precision):
        try:
            if parts[0] == "b" and len(parts) == 3:
                n, h = int(parts[1]), mpf(parts[2])
                if n not in table.log_b:
                    raise ConfigError(f"region index {n} outside the table")
                half = h * mpf(n) ** -15
                c = table.log_b[n]
                return Region(c - half, c + half, 1 - half / mp.pi, 1 + half / mp.pi, text)
            if len(parts) == 4:
                l0, l1, a0, a1 = (mpf(p) for p in parts)
                if not (l0 < l1 and a0 < a1):
                    raise ConfigError("region needs L0 < L1 and A0 < A1")
                return Region(l0, l1, a0, a1, text)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad region {text!r}: {exc}") from None
    raise ConfigError(f"region must be b:N:H or L0:L1:A0:A1, got {text!r}")


def palette(budget: int) -> list[tuple[int, int, int]]:
    """Dark blue (no step kept up) to yellow (all steps kept up)."""
    out = []
    for k in range(budget + 1):
        t = k / budget
        out.append((int(round(20 + 235 * t)), int(round(30 + 200 * t)), int(round(120 * (1 - t)))))
    return out


def escape_steps(z: LogComplex, comparator: list, ctx: Context, prec: int):
    """Steps kept above the comparator, or "zero" / "coverage"."""
    kept = 0
    for m in range(1, len(comparator)):
        try:
            z = eval_f(z, ctx.catalog, prec)
        except CoverageError:
            return "coverage"
        if z.is_zero:
            return "zero"
        if z.log_mod < comparator[m]:
            break
        kept = m
    return kept


def render(ctx: Context, region: Region, resolution: str, budget: int):
    width, height = parse_resolution(resolution)
    table = ctx.table
    prec = ctx.precision
    with mp.workdps(prec):
        lc = (region.log_lo + region.log_hi) / 2
        rc = LogMag(lc)
        R = LogMag(lc + esc.log_epsilon(rc, ctx.step))
        orbit = esc.iterate_M(R, budget, ctx.catalog, prec)
        if orbit.truncated:
            raise ConfigError(f"comparator orbit leaves coverage after {orbit.depth} steps; lower steps")
        comparator = [v.log for v in orbit.values]
        colours = palette(budget)
        counts = {"zero": 0, "coverage": 0, **{str(k): 0 for k in range(budget + 1)}}
        pix = bytearray()
        for j in range(height):
            a = region.arg_hi - (region.arg_hi - region.arg_lo) * (mpf(j) + mpf(1) / 2) / height
            for i in range(width):
                L = region.log_lo + (region.log_hi - region.log_lo) * (mpf(i) + mpf(1) / 2) / width
                res = escape_steps(LogComplex(L, a), comparator, ctx, prec)
                if res == "zero":
                    rgb = colours[0]  # 0 is fixed, so the orbit never escapes
                elif res == "coverage":
                    rgb = COVERAGE_RGB
                else:
                    rgb = colours[res]
                counts[str(res)] += 1
                pix.extend(rgb)
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    meta = {
        "region": {
            "spec": region.spec,
            "log_modulus": [mp.nstr(region.log_lo, 40), mp.nstr(region.log_hi, 40)],
            "arg_over_pi": [mp.nstr(region.arg_lo, 20), mp.nstr(region.arg_hi, 20)],
            "x_axis": "log|z| increasing to the right",
            "y_axis": "arg(z)/pi increasing upward",
        },
        "resolution": [width, height],
        "budget": budget,
        "comparator_log_M_m_R": [mp.nstr(v, 40) for v in comparator],
        "precision": prec,
        "config": ctx.cfg.as_dict(),
        "legend": {
            **{str(k): list(colours[k]) for k in range(budget + 1)},
            "zero": list(colours[0]),
            "coverage": list(COVERAGE_RGB),
        },
        "legend_meaning": "k: consecutive steps with log|f^m(z)| >= log M^m(R); zero: orbit hit a zero of f "
                          "and is drawn as non-escaping (k = 0); "
                          "coverage: orbit left the zero catalog",
        "counts": counts,
    }
    return header + bytes(pix), meta


def write_image(path, data: bytes, meta: dict, dumps) -> tuple[Path, Path]:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(data)
    side = p.with_suffix(p.suffix + ".json")
    side.write_text(dumps(meta))
    return p, side
