"""Command line entry point: ``shortvec <experiment> [options]``.

Exit codes: 0 every verdict passed, 1 some verdict failed, 2 usage or
configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import math
import sys
import time

import numpy as np

from . import limits
from .experiments import EXPERIMENTS, RUNNERS, ConfigError, ExperimentConfig, angle_cdf
from .io import CsvRowWriter, format_value, report_document, summary_lines
from .sampler import DEFAULT_PRIME, SamplerConfig, sample_lattice

log = logging.getLogger("shortvec")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _intervals(text: str) -> tuple[tuple[float, float], ...]:
    """Parse ``a:b,a:b,...``."""
    out = []
    for part in text.split(","):
        try:
            a, b = part.split(":")
            out.append((float(a), float(b)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad interval {part!r}; expected a:b")
    return tuple(out)


def _interval(text: str) -> tuple[float, float]:
    (iv,) = _intervals(text)
    return iv


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, default=30, help="dimension")
    p.add_argument("--N", type=int, default=3, help="number of short vectors / directions")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--prime", type=int, default=DEFAULT_PRIME)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--C", type=_floats, default=(6.0,), help="threshold(s), comma separated")
    p.add_argument("--V", type=float, default=2.0)
    p.add_argument("--phi1", type=float, default=0.0)
    p.add_argument("--phi2", type=float, default=math.pi / 2)
    p.add_argument("--box", type=_intervals, default=((0.0, 1.0), (0.0, 1.0)),
                   help="campbell volume box, e.g. 0:1,0:1")
    p.add_argument("--angle-box", type=_interval, default=None, help="campbell angle window a:b")
    p.add_argument("--lattice-trials", type=int, default=2000, help="campbell lattice-side trials")
    p.add_argument("--allowance", type=float, default=0.05, help="finite-n KS allowance")
    p.add_argument("--corr-tol", type=float, default=0.05)
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--report", default=None, help="also write the JSON report here (csv mode)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--parallelism", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shortvec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in EXPERIMENTS:
        _add_common(sub.add_parser(name, help=f"run the {name} experiment"))
    lc = sub.add_parser("limit-cdf", help="tabulate a closed-form law")
    lc.add_argument("--law", required=True,
                    choices=("poisson-gap", "exp-gap", "half-normal", "normal", "concentration", "angle"))
    lc.add_argument("--N", type=int, default=1)
    lc.add_argument("--n", type=int, default=30, help="dimension (angle law)")
    lc.add_argument("--xmin", type=float, default=0.0)
    lc.add_argument("--xmax", type=float, default=10.0)
    lc.add_argument("--points", type=int, default=101)
    lc.add_argument("--out", default=None)
    sl = sub.add_parser("sample-lattice", help="dump one sampled basis as JSON")
    sl.add_argument("--n", type=int, default=30)
    sl.add_argument("--prime", type=int, default=DEFAULT_PRIME)
    sl.add_argument("--seed", type=int, default=0)
    sl.add_argument("--trial", type=int, default=0)
    sl.add_argument("--out", default=None)
    return parser


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="\n") as fh:
            yield fh


def config_from_args(args) -> ExperimentConfig:
    return ExperimentConfig(
        experiment=args.command, n=args.n, N=args.N, trials=args.trials, prime=args.prime,
        seed=args.seed, C=args.C, V=args.V, phi1=args.phi1, phi2=args.phi2, box=args.box,
        angle_box=args.angle_box, lattice_trials=args.lattice_trials, allowance=args.allowance,
        corr_tol=args.corr_tol, parallelism=args.parallelism, out_path=args.out, format=args.format,
    ).validate()


def _run_experiment(args) -> int:
    cfg = config_from_args(args)
    run, header = RUNNERS[cfg.experiment]
    t0 = time.perf_counter()
    if cfg.format == "csv":
        with _output(cfg.out_path) as fh:
            writer = CsvRowWriter(fh, header(cfg.N))
            reports = run(cfg, writer)
    else:
        reports = run(cfg)
    elapsed = time.perf_counter() - t0
    doc = report_document(cfg.to_dict(), reports, elapsed)
    if cfg.format == "json":
        with _output(cfg.out_path) as fh:
            fh.write(doc)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(doc)
    for line in summary_lines(reports):
        print(line, file=sys.stderr)
    return EXIT_OK if all(r.verdict for r in reports) else EXIT_FAIL


def _limit_cdf(args) -> int:
    laws = {
        "poisson-gap": lambda x: limits.poisson_gap_cdf(args.N, x),
        "exp-gap": limits.exp_gap_cdf,
        "half-normal": limits.half_normal_cdf,
        "normal": limits.normal_cdf,
        "concentration": lambda x: limits.concentration_limit(x) if x > 0 else 0.0,
        "angle": lambda x: float(angle_cdf(args.n, x)),
    }
    if args.points < 2 or args.xmax <= args.xmin:
        raise ConfigError("need points >= 2 and xmax > xmin")
    if args.law in ("poisson-gap", "half-normal") and args.xmin < 0:
        raise ConfigError("this law lives on [0, inf)")
    f = laws[args.law]
    with _output(args.out) as fh:
        w = CsvRowWriter(fh, ["x", "cdf"])
        for x in np.linspace(args.xmin, args.xmax, args.points):
            w([float(x), f(float(x))])
    return EXIT_OK


def _sample_lattice(args) -> int:
    try:
        cfg = SamplerConfig(args.n, args.prime, args.seed, args.trial)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    b = sample_lattice(cfg)
    doc = {"dim": b.dim, "prime": args.prime, "seed": args.seed, "trial": args.trial,
           "det": str(b.det), "scale": format_value(b.scale), "rows": [list(r) for r in b.rows]}
    with _output(args.out) as fh:
        fh.write(json.dumps(doc) + "\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "limit-cdf":
            return _limit_cdf(args)
        if args.command == "sample-lattice":
            return _sample_lattice(args)
        return _run_experiment(args)
    except ConfigError as exc:
        print(f"shortvec: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        log.debug("runtime failure", exc_info=True)
        print(f"shortvec: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
