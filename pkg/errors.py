"""
Exception hierarchy shared by every layer of the Khovanov engine.
"""
from typing import Optional


class KhovanovError(Exception):
    """Base class for all engine errors"""


class AlgebraError(KhovanovError):
    """Malformed matrices, dimension mismatches or incomplete algebra tables"""


class MatrixIndexError(AlgebraError, IndexError):
    """Entry access outside the matrix shape"""


class ParseError(KhovanovError, ValueError):
    """Syntax error in PD or movie text"""

    def __init__(
        self, message: str, line: Optional[int] = None, source: Optional[str] = None
    ):
        self.message = message
        self.line = line
        self.source = source
        super().__init__(self.location() + message)

    def location(self) -> str:
        if self.source is None and self.line is None:
            return ""
        src = self.source or "<text>"
        return f"{src}:{self.line}: " if self.line is not None else f"{src}: "


class DiagramError(KhovanovError, ValueError):
    """A PD code that parses but is not a valid oriented planar diagram"""


class EventError(KhovanovError):
    """A movie event that cannot be applied to its frame"""

    def __init__(
        self, message: str, frame: Optional[int] = None, line: Optional[int] = None
    ):
        self.reason = message
        self.frame = frame
        self.line = line
        prefix = f"frame {frame}: " if frame is not None else ""
        super().__init__(prefix + message)


class RibbonSpecError(KhovanovError):
    """A ribbon presentation violating the births-then-bands shape"""


class ChainMapError(KhovanovError):
    """A produced map does not commute with the differentials or has the wrong degree"""
