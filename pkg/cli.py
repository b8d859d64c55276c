"""
Command-line front end.

    khovanov-ribbon kh <pd-file> [--json] [--no-reduce]
    khovanov-ribbon map <movie-file> [--json] [--no-reduce]
    khovanov-ribbon verify <suite|all> [--json] [--seed N] [--random-movies N]

Exit status: 0 when every requested check passes, 1 when a verification
fails, 2 on parse or validation errors (reported as ``file:line: message``).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import List, Optional, Sequence, TextIO

from chain_complex import build_complex, homology
from cobordism import MovieEvaluator, load_movie
from diagram import load_pd
from errors import KhovanovError, ParseError
from verify import SUITES, reports_table, reports_to_json, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2

_configured = False


def configure_logging(level: str = "WARNING") -> None:
    global _configured
    if _configured:
        logging.getLogger().setLevel(level.upper())
        return
    logging.basicConfig(
        level=level.upper(),
        format="%(name)s:%(levelname)s:%(message)s",
        stream=sys.stderr,
    )
    _configured = True


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so ``run`` owns the exit status"""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ParseError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="khovanov-ribbon",
        description="Khovanov homology and ribbon concordance maps over GF(2)",
    )
    parser.add_argument(
        "--log-level", default=None, help="logging level (default from KH_LOG_LEVEL)"
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    kh = sub.add_parser("kh", help="print the bigraded homology table of a PD file")
    kh.add_argument("path")
    map_ = sub.add_parser(
        "map", help="print the induced homology matrix of a movie file"
    )
    map_.add_argument("path")
    ver = sub.add_parser("verify", help="run verification suites")
    ver.add_argument("suite", choices=("all",) + SUITES)
    ver.add_argument("--seed", type=int, default=None)
    ver.add_argument("--random-movies", type=int, default=None)
    ver.add_argument("--corpus", default=None, help="corpus directory")
    for p in (kh, map_, ver):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument(
            "--no-reduce",
            action="store_true",
            help="brute-force homology (oracle mode)",
        )
    return parser


def _diagnostic(err: KhovanovError, path: Optional[str]) -> str:
    if isinstance(err, ParseError) and err.source:
        return str(err)
    line = getattr(err, "line", None)
    where = path or "<input>"
    if line is not None:
        where += f":{line}"
    message = err.message if isinstance(err, ParseError) else str(err)
    return f"{where}: {message}"


def _kh(path: str, use_reduce: bool, as_json: bool, out: TextIO) -> int:
    diagram = load_pd(path)
    hg = homology(build_complex(diagram), use_reduce=use_reduce, oracle=not use_reduce)
    if as_json:
        payload = {
            "diagram": diagram.render(),
            "dims": [{"h": h, "q": q, "dim": n} for (h, q), n in hg.dims.items()],
            "total": hg.total_dim,
            "method": hg.method,
        }
        out.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        out.write(f"{diagram.render()}\n{hg.table()}\ntotal dimension {hg.total_dim}\n")
    return EXIT_OK


def _map(path: str, use_reduce: bool, as_json: bool, out: TextIO) -> int:
    movie = load_movie(path)
    induced = MovieEvaluator(use_reduce=use_reduce).homology_map(movie)
    if as_json:
        payload = {
            "matrix": induced.matrix.tolist(),
            "rank": induced.rank,
            "q_shift": induced.q_shift,
            "source_basis": [list(b) for b in induced.source.basis],
            "target_basis": [list(b) for b in induced.target.basis],
        }
        out.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        table = induced.table()
        out.write(f"{table}\nrank {induced.rank}\nq-shift {induced.q_shift}\n")
    return EXIT_OK


def run(
    argv: Sequence[str], out: Optional[TextIO] = None, err: Optional[TextIO] = None
) -> int:
    """Run one command; returns the exit status"""
    # main imports this module
    from main import load_settings

    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(list(argv))
    except ParseError as e:
        err.write(f"{e}\n")
        return EXIT_INVALID
    try:
        settings = load_settings()
    except ValueError as e:
        err.write(f"{e}\n")
        return EXIT_INVALID
    configure_logging(args.log_level or settings.log_level)
    use_reduce = settings.reduce and not args.no_reduce
    path: Optional[str] = getattr(args, "path", None)
    try:
        if args.command == "kh":
            return _kh(args.path, use_reduce, args.json, out)
        if args.command == "map":
            return _map(args.path, use_reduce, args.json, out)
        reports = run_suite(
            args.suite,
            seed=settings.random_seed if args.seed is None else args.seed,
            random_movies=(
                settings.random_movies
                if args.random_movies is None
                else args.random_movies
            ),
            corpus_dir=args.corpus or settings.corpus_dir,
        )
    except KhovanovError as e:
        err.write(_diagnostic(e, path) + "\n")
        return EXIT_INVALID
    except OSError as e:
        err.write(f"{path or '<input>'}: {e.strerror or e}\n")
        return EXIT_INVALID
    rendered = reports_to_json(reports) if args.json else reports_table(reports)
    out.write(rendered + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)
