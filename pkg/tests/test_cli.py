"""
Tests for the command-line front end: outputs, JSON and exit codes.
"""

import io
import json
import os
import sys

import pytest

# Add the main module to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cli import EXIT_FAILED, EXIT_INVALID, EXIT_OK, build_parser, run

CORPUS = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "corpus"
)


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in (
        "KH_CORPUS_DIR",
        "KH_REDUCE",
        "KH_RANDOM_SEED",
        "KH_RANDOM_MOVIES",
        "KH_LOG_LEVEL",
    ):
        monkeypatch.delenv(name, raising=False)


class TestKh:
    """The kh subcommand."""

    def test_table(self):
        """A PD file prints its table and total dimension."""
        code, out, _ = _run("kh", os.path.join(CORPUS, "trefoil.pd"))
        assert code == EXIT_OK
        assert "total dimension 6" in out

    def test_json(self):
        """--json prints one object with per-bidegree dims."""
        code, out, _ = _run("kh", os.path.join(CORPUS, "hopf.pd"), "--json")
        data = json.loads(out)
        assert code == EXIT_OK
        assert data["total"] == 4
        assert {"h": 2, "q": 6, "dim": 1} in data["dims"]
        assert data["method"] == "reduced"

    def test_no_reduce_uses_oracle(self):
        """--no-reduce switches to the brute-force path."""
        unknot = os.path.join(CORPUS, "unknot.pd")
        _, out, _ = _run("kh", unknot, "--json", "--no-reduce")
        assert json.loads(out)["method"] == "oracle"

    def test_missing_file(self):
        """An unreadable file exits 2 naming the path."""
        code, _, err = _run("kh", "/nonexistent/knot.pd")
        assert code == EXIT_INVALID
        assert err.startswith("/nonexistent/knot.pd: ")

    def test_malformed_pd(self, tmp_path):
        """Syntax errors are reported as file:line: message."""
        path = tmp_path / "bad.pd"
        path.write_text("PD[X(1,2,3)]\n")
        code, _, err = _run("kh", str(path))
        assert code == EXIT_INVALID
        assert err.startswith(f"{path}:1: ")


class TestMap:
    """The map subcommand."""

    def test_tube(self):
        """The tube movie has rank two and no q-shift."""
        code, out, _ = _run("map", os.path.join(CORPUS, "tube.movie"))
        assert code == EXIT_OK
        assert "rank 2" in out
        assert "q-shift 0" in out

    def test_json_matrix(self):
        """--json includes the matrix and both bases."""
        _, out, _ = _run("map", os.path.join(CORPUS, "tube.movie"), "--json")
        data = json.loads(out)
        assert data["matrix"] == [[1, 0], [0, 1]]
        assert len(data["source_basis"]) == len(data["target_basis"]) == 2

    def test_inapplicable_event(self, tmp_path):
        """An event that does not apply names the file, line and frame."""
        path = tmp_path / "bad.movie"
        path.write_text("diagram PD[] loops=1\nbirth\ndeath 9\n")
        code, _, err = _run("map", str(path))
        assert code == EXIT_INVALID
        assert err.startswith(f"{path}:3: frame 1: ")

    def test_unknown_event(self, tmp_path):
        """An unknown keyword is a parse error on its line."""
        path = tmp_path / "bad.movie"
        path.write_text("diagram PD[] loops=1\nwiggle 1\n")
        code, _, err = _run("map", str(path))
        assert code == EXIT_INVALID
        assert err.startswith(f"{path}:2: unknown event")


class TestVerify:
    """The verify subcommand."""

    def test_single_suite(self):
        """A passing suite exits 0 and prints its report."""
        code, out, _ = _run("verify", "alt-decomposition")
        assert code == EXIT_OK
        assert "alt-decomposition" in out
        assert "pass" in out

    def test_json_reports(self):
        """--json prints a list of reports."""
        _, out, _ = _run("verify", "alt-decomposition", "--json")
        reports = json.loads(out)
        assert reports[0]["status"] == "pass"

    def test_failure_exit_code(self, tmp_path):
        """A broken corpus makes the loading suites fail with exit 1 or 2."""
        code, _, _ = _run("verify", "axioms", "--corpus", str(tmp_path))
        assert code in (EXIT_FAILED, EXIT_INVALID)

    def test_unknown_suite(self):
        """Unknown suites are rejected by the parser."""
        code, _, err = _run("verify", "everything")
        assert code == EXIT_INVALID
        assert "invalid choice" in err


class TestConfiguration:
    """Environment settings and argument parsing."""

    def test_invalid_reduce_setting(self, monkeypatch):
        """A bad KH_REDUCE exits 2 naming the variable."""
        monkeypatch.setenv("KH_REDUCE", "maybe")
        code, _, err = _run("kh", os.path.join(CORPUS, "unknot.pd"))
        assert code == EXIT_INVALID
        assert "KH_REDUCE" in err

    def test_reduce_disabled_by_env(self, monkeypatch):
        """KH_REDUCE=0 selects the oracle path."""
        monkeypatch.setenv("KH_REDUCE", "0")
        _, out, _ = _run("kh", os.path.join(CORPUS, "unknot.pd"), "--json")
        assert json.loads(out)["method"] == "oracle"

    def test_parser_requires_a_command(self):
        """No subcommand is a usage error."""
        code, _, _ = _run()
        assert code == EXIT_INVALID

    def test_parser_options(self):
        """verify takes a seed and a random-movie budget."""
        args = build_parser().parse_args(
            ["verify", "degree-law", "--seed", "5", "--random-movies", "3"]
        )
        assert (args.suite, args.seed, args.random_movies) == ("degree-law", 5, 3)
