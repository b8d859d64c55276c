"""
Khovanov Ribbon

Khovanov homology over GF(2), functorial movie maps for link cobordisms,
and executable checks of ribbon concordance injectivity.
"""

__version__ = "0.1.0"
__description__ = (
    "Khovanov homology and ribbon concordance maps over GF(2), with an MCP server"
)
