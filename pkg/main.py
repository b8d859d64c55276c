#!/usr/bin/env python3
"""
Khovanov homology and ribbon concordance maps over GF(2).

MCP server and console entry point.
"""
import os
import sys
from dataclasses import dataclass
from typing import List, Optional

from mcp.server.fastmcp import FastMCP

import cli
from chain_complex import build_complex, homology
from cobordism import MovieEvaluator, parse_movie
from diagram import parse_pd
from verify import SUITES, reports_table, run_suite

# Initialize FastMCP server
mcp = FastMCP("khovanov-ribbon")

# Configuration
KH_CORPUS_DIR = os.getenv(
    "KH_CORPUS_DIR", os.path.join(os.path.dirname(os.path.abspath(__file__)), "corpus")
)
KH_REDUCE = os.getenv("KH_REDUCE", "1")
KH_RANDOM_SEED = os.getenv("KH_RANDOM_SEED", "20190321")
KH_RANDOM_MOVIES = os.getenv("KH_RANDOM_MOVIES", "100")
KH_LOG_LEVEL = os.getenv("KH_LOG_LEVEL", "WARNING")
KH_MCP_TRANSPORT = os.getenv("KH_MCP_TRANSPORT", "stdio")

TRANSPORTS = ("stdio", "sse", "streamable-http")


@dataclass(frozen=True)
class Settings:
    corpus_dir: str
    reduce: bool
    random_seed: int
    random_movies: int
    log_level: str
    transport: str


def _int_setting(name: str, default: str) -> int:
    raw = os.getenv(name, default)
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None


def load_settings() -> Settings:
    """Read the KH_* environment variables; bad values raise ValueError naming them"""
    reduce = os.getenv("KH_REDUCE", KH_REDUCE)
    if reduce not in ("0", "1"):
        raise ValueError(f"KH_REDUCE must be 0 or 1, got {reduce!r}")
    movies = _int_setting("KH_RANDOM_MOVIES", KH_RANDOM_MOVIES)
    if movies < 0:
        raise ValueError(f"KH_RANDOM_MOVIES must be non-negative, got {movies}")
    level = os.getenv("KH_LOG_LEVEL", KH_LOG_LEVEL).upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        raise ValueError(f"KH_LOG_LEVEL must be a logging level name, got {level!r}")
    transport = os.getenv("KH_MCP_TRANSPORT", KH_MCP_TRANSPORT)
    if transport not in TRANSPORTS:
        raise ValueError(
            f"KH_MCP_TRANSPORT must be one of {', '.join(TRANSPORTS)}, "
            f"got {transport!r}"
        )
    return Settings(
        corpus_dir=os.getenv("KH_CORPUS_DIR", KH_CORPUS_DIR),
        reduce=reduce == "1",
        random_seed=_int_setting("KH_RANDOM_SEED", KH_RANDOM_SEED),
        random_movies=movies,
        log_level=level,
        transport=transport,
    )


@mcp.tool()
async def khovanov_homology(pd_code: str, reduce: bool = True) -> str:
    """
    Compute Khovanov homology over GF(2) of a link given as a PD code.

    Args:
        pd_code (str): e.g. "PD[X(1,4,2,5),X(3,6,4,1),X(5,2,6,3)]", optionally
            followed by "loops=k"
        reduce (bool): use the fast reduction (default) or the brute-force oracle
    """
    try:
        diagram = parse_pd(pd_code)
        hg = homology(build_complex(diagram), use_reduce=reduce, oracle=not reduce)
        output = f"🧮 **Khovanov homology of** `{diagram.render()}`\n\n"
        output += f"```\n{hg.table()}\n```\n"
        output += f"Poincaré polynomial: {hg.poincare_polynomial()}\n"
        output += f"Total dimension: {hg.total_dim} ({hg.method})\n"
        return output
    except Exception as e:
        return f"❌ **Khovanov Homology Error**: {str(e)}"


@mcp.tool()
async def movie_map(movie_text: str) -> str:
    """
    Evaluate the homology map induced by a movie.

    Args:
        movie_text (str): a movie file: "diagram PD[...]" followed by one event per line
    """
    try:
        movie = parse_movie(movie_text, source="<movie>")
        induced = MovieEvaluator(use_reduce=load_settings().reduce).homology_map(movie)
        chi = movie.euler_characteristic
        output = f"🎬 **Movie map** ({len(movie)} events, χ = {chi})\n\n"
        output += f"```\n{induced.table()}\n```\n"
        output += f"Rank: {induced.rank}\nq-shift: {induced.q_shift}\n"
        if induced.is_identity():
            output += "✅ identity\n"
        return output
    except Exception as e:
        return f"❌ **Movie Map Error**: {str(e)}"


@mcp.tool()
async def run_verification(suite: str = "all") -> str:
    """
    Run a verification suite and report pass/fail per check.

    Args:
        suite (str): "all" or one of the suite names listed by list_corpus
    """
    try:
        settings = load_settings()
        reports = run_suite(
            suite, settings.random_seed, settings.random_movies, settings.corpus_dir
        )
        failed = [r for r in reports if not r.passed]
        icon = "✅" if not failed else "❌"
        passed = len(reports) - len(failed)
        output = f"{icon} **Verification {suite}**: "
        output += f"{passed}/{len(reports)} checks passed\n\n"
        output += f"```\n{reports_table(reports)}\n```\n"
        return output
    except Exception as e:
        return f"❌ **Verification Error**: {str(e)}"


@mcp.tool()
async def list_corpus() -> str:
    """List the bundled diagrams, movies, ribbon concordances and suites."""
    try:
        corpus_dir = load_settings().corpus_dir
        output = f"📚 **Corpus** ({corpus_dir})\n\n"
        for name in sorted(os.listdir(corpus_dir)):
            output += f"• {name}\n"
        output += "\n**Suites**: " + ", ".join(SUITES) + "\n"
        return output
    except Exception as e:
        return f"❌ **Corpus Error**: {str(e)}"


def serve(transport: Optional[str] = None) -> None:
    settings = load_settings()
    cli.configure_logging(settings.log_level)
    mcp.run(transport=transport or settings.transport)  # type: ignore[arg-type]


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point: ``serve`` starts the MCP server, the rest goes to the CLI"""
    args = sys.argv[1:] if argv is None else argv
    if not args or args[0] == "serve":
        serve(args[1] if len(args) > 1 else None)
        return 0
    return cli.run(args)


if __name__ == "__main__":
    sys.exit(main())
