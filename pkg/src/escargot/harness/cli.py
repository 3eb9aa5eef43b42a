"""Command line entry point: ``escargot {seq-check,verify-all,orbit,render}``.

Exit codes: 0 success, 2 exact-identity failure, 3 configuration error,
4 precision instability (verify-all).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..checks import CoverageError, IdentityError
from . import pipeline
from .config import ConfigError, read_config_file, resolve
from .pipeline import EXIT_CONFIG, EXIT_IDENTITY, EXIT_OK


def add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value file; flags override its entries")
    p.add_argument("--n0", type=int, help="first index with nonzero alpha (even)")
    p.add_argument("--n1", type=int, help="first index using the defining recursion")
    p.add_argument("--log10-a3", type=float, help="log10 of a_3")
    p.add_argument("--n-max", type=int, help="largest index in the growth table")
    p.add_argument("--prec", type=int, help="working digits (0: automatic policy); ESCARGOT_PREC also sets this")
    p.add_argument("--samples", type=int, help="boundary samples per disc circle")
    p.add_argument("--k-max", type=int, help="iteration depth of the direct escape-weight check")
    p.add_argument("--out", help="output directory (or image path for render)")
    p.add_argument("--disc-lo", type=int, help="first index of the disc-map scan (0: n1)")
    p.add_argument("--disc-hi", type=int, help="last index of the disc-map scan (0: precision cutoff)")
    p.add_argument("--max-disc-prec", type=int, help="digit ceiling for the automatic disc-map scan")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="escargot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("seq-check", help="exact sequence identities and their asymptotic companions")
    add_common(p)
    p = sub.add_parser("verify-all", help="the full verification battery")
    add_common(p)
    p = sub.add_parser("orbit", help="fast-escape certificate for the orbit of -b_n")
    add_common(p)
    p.add_argument("--n", type=int, help="start index (0: n1)")
    p.add_argument("--depth", type=int, help="number of iterates")
    p = sub.add_parser("render", help="escape-speed raster around a disc")
    add_common(p)
    p.add_argument("--region", help="b:N:H or L0:L1:A0:A1 (log|z| and arg/pi ranges)")
    p.add_argument("--resolution", help="WxH")
    p.add_argument("--steps", type=int, help="iteration budget per pixel")
    return parser


_NON_CONFIG = {"command", "config"}


def config_from_args(args) -> "pipeline.RunConfig":
    file_values = read_config_file(args.config) if args.config else {}
    cli = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG and v is not None}
    return resolve(file_values, cli)


def _write(rep, out: str, stem: str = "report") -> None:
    from .report import write_reports

    paths = write_reports(rep, out, stem)
    print(Path(paths["text"]).read_text(), end="")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "seq-check":
            rep = pipeline.run_seq_check(cfg)
            _write(rep, cfg.out)
            return rep.exit_code
        if args.command == "verify-all":
            rep = pipeline.run_verify_all(cfg)
            _write(rep, cfg.out)
            return rep.exit_code
        if args.command == "orbit":
            cert, rep = pipeline.run_orbit(cfg)
            _write(rep, cfg.out, "orbit")
            print(cert.text())
            return EXIT_OK
        if args.command == "render":
            from .render import parse_region, render, write_image
            from .report import dumps

            ctx = pipeline.build_context(cfg)
            region = parse_region(cfg.region or f"b:{cfg.n1}:1", ctx)
            data, meta = render(ctx, region, cfg.resolution, cfg.steps)
            target = Path(cfg.out)
            if target.suffix.lower() != ".ppm":
                target = target / "render.ppm"
            img, side = write_image(target, data, meta, dumps)
            print(f"wrote {img} and {side}")
            return EXIT_OK
    except (ConfigError, OSError, CoverageError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IdentityError as exc:
        print(f"identity failure: {exc}", file=sys.stderr)
        return EXIT_IDENTITY
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
