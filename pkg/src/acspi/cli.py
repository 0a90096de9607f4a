"""``acspi`` command line.

Exit codes: 0 success, 1 failed diagnostics, 2 configuration error,
3 numerical abort.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager

from .config import ConfigError, load_config
from .experiments import (
    convergence_csv,
    run_compare,
    run_convergence,
    run_diagnostics,
    run_oracle,
    run_propagate,
    write_csv,
)
from .propagator import NumericalAbort

EXIT_OK, EXIT_CHECKS_FAILED, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3

log = logging.getLogger("acspi")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acspi", description="Coherent-state path-integral wave-packet propagation.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("propagate", "path-integral time series"),
        ("oracle", "Fock-basis reference time series"),
        ("compare", "both methods plus |Δ<Q>| and a summary line"),
        ("convergence", "error against the oracle versus n_steps, K or grid size"),
        ("diagnostics", "symbol, quadrature and ordering self-checks"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", metavar="PATH", help="CSV destination (default: output.path, else stdout)")
        p.add_argument("--stride", type=int, metavar="INT", help="sample every INT steps")
        p.add_argument("--quiet", action="store_true")
        p.add_argument("--allow-long", action="store_true", help="run configs flagged long_running")
        if name == "convergence":
            p.add_argument("--axis", choices=["n_steps", "K", "grid"], default="n_steps")
    return parser


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = load_config(args.config)
        if args.stride is not None and args.stride < 1:
            raise ConfigError("--stride must be >= 1")
        if cfg.long_running and not args.allow_long:
            raise ConfigError(f"{args.config} is flagged long_running; pass --allow-long to run it")
        out = args.out if args.out is not None else cfg.output.path
        if args.command == "diagnostics":
            checks = run_diagnostics(cfg)
            with _output(out) as fh:
                for check in checks:
                    fh.write(check.line() + "\n")
            return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECKS_FAILED
        if args.command == "propagate":
            result = [run_propagate(cfg, args.stride)]
        elif args.command == "oracle":
            result = [run_oracle(cfg, args.stride)]
        elif args.command == "compare":
            cmp = run_compare(cfg, args.stride)
            result = [cmp.acspi, cmp.fock, cmp.delta]
            print(cmp.summary(), file=sys.stderr)
        else:
            rows = run_convergence(cfg, args.axis, args.stride)
            with _output(out) as fh:
                fh.write(convergence_csv(rows))
            return EXIT_OK
        with _output(out) as fh:
            write_csv(result, fh)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
