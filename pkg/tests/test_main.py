"""
Tests for the MCP tools and the environment settings.
"""

import os
import sys

import pytest

# Add the main module to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import main
from main import (
    khovanov_homology,
    list_corpus,
    load_settings,
    movie_map,
    run_verification,
)

CORPUS = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "corpus"
)
TUBE = "diagram PD[] loops=1\nbirth\nsaddle 1@0 2@0\n"


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in (
        "KH_CORPUS_DIR",
        "KH_REDUCE",
        "KH_RANDOM_SEED",
        "KH_RANDOM_MOVIES",
        "KH_LOG_LEVEL",
        "KH_MCP_TRANSPORT",
    ):
        monkeypatch.delenv(name, raising=False)


class TestSettings:
    """KH_* environment variables."""

    def test_defaults(self):
        """Defaults point at the bundled corpus with reduction on."""
        settings = load_settings()
        assert settings.reduce is True
        assert settings.random_seed == 20190321
        assert settings.random_movies == 100
        assert settings.transport == "stdio"
        assert os.path.samefile(settings.corpus_dir, CORPUS)

    def test_overrides(self, monkeypatch):
        """Every setting can be overridden."""
        monkeypatch.setenv("KH_REDUCE", "0")
        monkeypatch.setenv("KH_RANDOM_SEED", "7")
        monkeypatch.setenv("KH_LOG_LEVEL", "debug")
        settings = load_settings()
        values = (settings.reduce, settings.random_seed, settings.log_level)
        assert values == (False, 7, "DEBUG")

    @pytest.mark.parametrize(
        "name,value",
        [
            ("KH_REDUCE", "yes"),
            ("KH_RANDOM_SEED", "abc"),
            ("KH_RANDOM_MOVIES", "-1"),
            ("KH_LOG_LEVEL", "LOUD"),
            ("KH_MCP_TRANSPORT", "carrier-pigeon"),
        ],
    )
    def test_invalid_values(self, monkeypatch, name, value):
        """Bad values raise ValueError naming the variable."""
        monkeypatch.setenv(name, value)
        with pytest.raises(ValueError, match=name):
            load_settings()


class TestTools:
    """Async MCP tools return formatted text and never raise."""

    @pytest.mark.asyncio
    async def test_khovanov_homology(self):
        """The unknot has total dimension two."""
        result = await khovanov_homology("PD[] loops=1")
        assert "Total dimension: 2 (reduced)" in result

    @pytest.mark.asyncio
    async def test_khovanov_homology_oracle(self):
        """reduce=False uses the brute-force path."""
        trefoil = "PD[X(1,4,2,5),X(3,6,4,1),X(5,2,6,3)]"
        result = await khovanov_homology(trefoil, reduce=False)
        assert "Total dimension: 6 (oracle)" in result

    @pytest.mark.asyncio
    async def test_khovanov_homology_error(self):
        """Bad input is reported, not raised."""
        result = await khovanov_homology("not a knot")
        assert result.startswith("❌ **Khovanov Homology Error**")

    @pytest.mark.asyncio
    async def test_movie_map(self):
        """The tube movie is the identity."""
        result = await movie_map(TUBE)
        assert "χ = 0" in result
        assert "✅ identity" in result

    @pytest.mark.asyncio
    async def test_movie_map_error(self):
        """Inapplicable events come back as an error string."""
        result = await movie_map("diagram PD[] loops=1\ndeath 4\n")
        assert result.startswith("❌ **Movie Map Error**")
        assert "frame 0" in result

    @pytest.mark.asyncio
    async def test_run_verification(self):
        """A passing suite is summarised with its check count."""
        result = await run_verification("alt-decomposition")
        summary = "✅ **Verification alt-decomposition**: 1/1 checks passed"
        assert result.startswith(summary)

    @pytest.mark.asyncio
    async def test_run_verification_unknown_suite(self):
        """Unknown suites are reported."""
        result = await run_verification("nope")
        assert result.startswith("❌ **Verification Error**")

    @pytest.mark.asyncio
    async def test_list_corpus(self):
        """The corpus listing names files and suites."""
        result = await list_corpus()
        assert "trefoil.pd" in result
        assert "one_band.ribbon" in result
        assert "neck-passing" in result


class TestEntryPoint:
    """main() dispatches to the CLI for everything but serve."""

    def test_cli_dispatch(self, capsys):
        """A kh command runs through the CLI."""
        code = main.main(["kh", os.path.join(CORPUS, "unknot.pd")])
        assert code == 0
        assert "total dimension 2" in capsys.readouterr().out

    def test_serve_dispatch(self, monkeypatch):
        """serve starts the server with the requested transport."""
        seen = []
        monkeypatch.setattr(
            main.mcp, "run", lambda transport=None: seen.append(transport)
        )
        assert main.main(["serve", "sse"]) == 0
        assert seen == ["sse"]
