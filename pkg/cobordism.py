"""
Movies of link cobordisms and the chain maps they induce.

A movie is a starting diagram plus a list of elementary events (births,
deaths, saddles, Reidemeister moves, relabellings). Every event applies to
the current frame through ``moves`` and yields a chain map between the
Khovanov complexes of consecutive frames. Reidemeister maps come from
Gaussian cancellation of the local pieces that a move adds, so the same
elimination engine that computes homology produces them.
"""
from __future__ import annotations

import itertools
import logging
import random
import re
from dataclasses import dataclass, field
from typing import (
    Callable,
    ClassVar,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

import moves
from algebra import DEFAULT_ALGEBRA, F2Matrix, FrobeniusAlgebra
from chain_complex import (
    LABEL_INDEX,
    LABEL_NAME,
    ChainComplex,
    Eliminator,
    HomologyGroup,
    KhGenerator,
    build_complex,
    homology,
    xor_into,
)
from diagram import (
    SMOOTHING_PAIRS,
    CircleArrangement,
    LinkDiagram,
    disjoint_union,
    parse_pd,
    render,
    unlink,
)
from errors import (
    ChainMapError,
    DiagramError,
    EventError,
    KhovanovError,
    ParseError,
    RibbonSpecError,
)
from moves import MoveResult, Site

logger = logging.getLogger(__name__)


def _opt(name: str, value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, (tuple, list)):
        return f" {name}=" + ",".join(str(v) for v in value)
    return f" {name}={value}"


# =============================================================================
# Events
# =============================================================================

@dataclass(frozen=True)
class Birth:
    label: Optional[int] = None
    face: Optional[int] = None
    line: Optional[int] = field(default=None, compare=False)
    kind: ClassVar[str] = "birth"

    def apply(self, diagram: LinkDiagram) -> MoveResult:
        return moves.birth(diagram, self.label, self.face)

    def render(self) -> str:
        label = "" if self.label is None else f" {self.label}"
        return f"birth{label}{_opt('face', self.face)}"


@dataclass(frozen=True)
class Death:
    label: int
    line: Optional[int] = field(default=None, compare=False)
    kind: ClassVar[str] = "death"

    def apply(self, diagram: LinkDiagram) -> MoveResult:
        return moves.death(diagram, self.label)

    def render(self) -> str:
        return f"death {self.label}"


@dataclass(frozen=True)
class Saddle:
    first: Site
    second: Site
    face: Optional[int] = None
    new: Optional[int] = None
    line: Optional[int] = field(default=None, compare=False)
    kind: ClassVar[str] = "saddle"

    def apply(self, diagram: LinkDiagram) -> MoveResult:
        return moves.saddle(diagram, self.first, self.second, self.face, self.new)

    def render(self) -> str:
        (a, ta), (b, tb) = self.first, self.second
        options = _opt("face", self.face) + _opt("new", self.new)
        return f"saddle {a}@{ta} {b}@{tb}{options}"


@dataclass(frozen=True)
class R1Plus:
    edge: int
    side: str = "R"
    writhe: int = 1
    new: Optional[Tuple[int, ...]] = None
    at: Optional[int] = None
    line: Optional[int] = field(default=None, compare=False)
    kind: ClassVar[str] = "r1+"

    def apply(self, diagram: LinkDiagram) -> MoveResult:
        return moves.r1_plus(
            diagram, self.edge, self.side, self.writhe, self.new, self.at
        )

    def render(self) -> str:
        sign = "+" if self.writhe > 0 else "-"
        options = _opt("new", self.new) + _opt("at", self.at)
        return f"r1+ {self.edge} {self.side} {sign}{options}"


@dataclass(frozen=True)
class R1Minus:
    crossing: int
    line: Optional[int] = field(default=None, compare=False)
    kind: ClassVar[str] = "r1-"

    def apply(self, diagram: LinkDiagram) -> MoveResult:
        return moves.r1_minus(diagram, self.crossing)

    def render(self) -> str:
        return f"r1- {self.crossing}"


@dataclass(frozen=True)
class R2Plus:
    finger: int
    target: int
    over: int
    face: Optional[int] = None
    sides: Optional[Tuple[bool, bool]] = None
    new: Optional[Tuple[int, ...]] = None
    at: Optional[Tuple[int, int]] = None
    line: Optional[int] = field(default=None, compare=False)
    kind: ClassVar[str] = "r2+"

    def apply(self, diagram: LinkDiagram) -> MoveResult:
        return moves.r2_plus(
            diagram,
            self.finger,
            self.target,
            self.over,
            self.face,
            self.sides,
            self.new,
            self.at,
        )

    def render(self) -> str:
        sides = None
        if self.sides is not None:
            sides = tuple("+" if s else "-" for s in self.sides)
        return (
            f"r2+ {self.finger} {self.target} {self.over}{_opt('face', self.face)}"
            f"{_opt('sides', sides)}{_opt('new', self.new)}{_opt('at', self.at)}"
        )


@dataclass(frozen=True)
class R2Minus:
    c1: int
    c2: int
    face: Optional[int] = None
    line: Optional[int] = field(default=None, compare=False)
    kind: ClassVar[str] = "r2-"

    def apply(self, diagram: LinkDiagram) -> MoveResult:
        return moves.r2_minus(diagram, self.c1, self.c2, self.face)

    def render(self) -> str:
        return f"r2- {self.c1} {self.c2}{_opt('face', self.face)}"


@dataclass(frozen=True)
class R3:
    c1: int
    c2: int
    c3: int
    new: Optional[Tuple[int, int, int]] = None
    at: Optional[Tuple[int, int, int]] = None
    line: Optional[int] = field(default=None, compare=False)
    kind: ClassVar[str] = "r3"

    def apply(self, diagram: LinkDiagram) -> MoveResult:
        return moves.r3(diagram, self.c1, self.c2, self.c3, self.new, self.at)

    def render(self) -> str:
        options = _opt("new", self.new) + _opt("at", self.at)
        return f"r3 {self.c1} {self.c2} {self.c3}{options}"


@dataclass(frozen=True)
class Relabel:
    mapping: Tuple[Tuple[int, int], ...]
    line: Optional[int] = field(default=None, compare=False)
    kind: ClassVar[str] = "relabel"

    def apply(self, diagram: LinkDiagram) -> MoveResult:
        return moves.relabel(diagram, dict(self.mapping))

    def render(self) -> str:
        return "relabel " + ",".join(f"{a}:{b}" for a, b in self.mapping)


Event = Union[Birth, Death, Saddle, R1Plus, R1Minus, R2Plus, R2Minus, R3, Relabel]

ISOTOPY_KINDS = frozenset({"r1+", "r1-", "r2+", "r2-", "r3", "relabel"})


# =============================================================================
# Movie grammar
# =============================================================================

SITE_PATTERN = re.compile(r"^(\d+)@([01])$")
RELABEL_PATTERN = re.compile(r"^(\d+):(\d+)$")

OPTIONS = {
    "birth": {"face"},
    "death": set(),
    "saddle": {"face", "new"},
    "r1+": {"new", "at"},
    "r1-": set(),
    "r2+": {"face", "sides", "new", "at"},
    "r2-": {"face"},
    "r3": {"new", "at"},
    "relabel": set(),
}
ARITY = {
    "birth": (0, 1),
    "death": (1, 1),
    "saddle": (2, 2),
    "r1+": (3, 3),
    "r1-": (1, 1),
    "r2+": (3, 3),
    "r2-": (2, 2),
    "r3": (3, 3),
}


class _Reader:
    """Token conversion with positioned errors"""

    def __init__(self, line: Optional[int], source: Optional[str]):
        self.line = line
        self.source = source

    def fail(self, message: str) -> ParseError:
        return ParseError(message, self.line, self.source)

    def integer(self, token: str, what: str) -> int:
        if not token.isdigit():
            raise self.fail(f"{what} must be a non-negative integer, got {token!r}")
        return int(token)

    def integers(
        self, token: str, what: str, count: Optional[int] = None
    ) -> Tuple[int, ...]:
        values = tuple(self.integer(part, what) for part in token.split(","))
        if count is not None and len(values) != count:
            raise self.fail(f"{what} needs {count} values, got {len(values)}")
        return values

    def site(self, token: str) -> Site:
        match = SITE_PATTERN.match(token)
        if not match:
            raise self.fail(f"saddle site must look like <edge>@<0|1>, got {token!r}")
        return int(match.group(1)), int(match.group(2))

    def sign(self, token: str) -> int:
        if token in ("+", "+1"):
            return 1
        if token in ("-", "-1"):
            return -1
        raise self.fail(f"writhe must be + or -, got {token!r}")


def parse_event(
    text: str, line: Optional[int] = None, source: Optional[str] = None
) -> Event:
    """Parse one event line of the movie grammar"""
    reader = _Reader(line, source)
    tokens = text.split()
    if not tokens:
        raise reader.fail("empty event")
    keyword, args = tokens[0].lower(), tokens[1:]
    if keyword not in OPTIONS:
        raise reader.fail(f"unknown event {tokens[0]!r}")

    if keyword == "relabel":
        pairs = []
        for chunk in ",".join(args).split(","):
            if not chunk:
                continue
            match = RELABEL_PATTERN.match(chunk)
            if not match:
                raise reader.fail(
                    f"relabel entries look like <old>:<new>, got {chunk!r}"
                )
            pairs.append((int(match.group(1)), int(match.group(2))))
        if not pairs:
            raise reader.fail("relabel needs at least one <old>:<new> pair")
        return Relabel(tuple(pairs), line=line)

    positional = [a for a in args if "=" not in a]
    options: Dict[str, str] = {}
    for arg in args:
        if "=" in arg:
            key, value = arg.split("=", 1)
            if key not in OPTIONS[keyword]:
                raise reader.fail(f"{keyword} does not take option {key}=")
            options[key] = value
    low, high = ARITY[keyword]
    if not low <= len(positional) <= high:
        expected = str(low) if low == high else f"{low}-{high}"
        raise reader.fail(
            f"{keyword} takes {expected} arguments, got {len(positional)}"
        )

    face = reader.integer(options["face"], "face") if "face" in options else None
    if keyword == "birth":
        label = reader.integer(positional[0], "label") if positional else None
        return Birth(label, face, line=line)
    if keyword == "death":
        return Death(reader.integer(positional[0], "label"), line=line)
    if keyword == "saddle":
        new = reader.integer(options["new"], "new") if "new" in options else None
        first, second = reader.site(positional[0]), reader.site(positional[1])
        return Saddle(first, second, face, new, line=line)
    if keyword == "r1+":
        side = positional[1].upper()
        if side not in ("L", "R"):
            raise reader.fail(f"kink side must be L or R, got {positional[1]!r}")
        new = reader.integers(options["new"], "new") if "new" in options else None
        at = reader.integer(options["at"], "at") if "at" in options else None
        edge = reader.integer(positional[0], "edge")
        writhe = reader.sign(positional[2])
        return R1Plus(edge, side, writhe, new, at, line=line)
    if keyword == "r1-":
        return R1Minus(reader.integer(positional[0], "crossing"), line=line)
    if keyword == "r2+":
        over = reader.integer(positional[2], "over")
        if over not in (1, 2):
            raise reader.fail(f"over must be 1 or 2, got {over}")
        sides = None
        if "sides" in options:
            parts = options["sides"].split(",")
            if len(parts) != 2 or any(p not in ("+", "-") for p in parts):
                raise reader.fail(f"sides must look like +,- got {options['sides']!r}")
            sides = (parts[0] == "+", parts[1] == "+")
        new = reader.integers(options["new"], "new") if "new" in options else None
        at = reader.integers(options["at"], "at", 2) if "at" in options else None
        return R2Plus(
            reader.integer(positional[0], "edge"),
            reader.integer(positional[1], "edge"),
            over,
            face, sides, new, at, line=line,  # type: ignore[arg-type]
        )
    if keyword == "r2-":
        c1 = reader.integer(positional[0], "crossing")
        c2 = reader.integer(positional[1], "crossing")
        return R2Minus(c1, c2, face, line=line)
    new3 = reader.integers(options["new"], "new", 3) if "new" in options else None
    at3 = reader.integers(options["at"], "at", 3) if "at" in options else None
    c1, c2, c3 = (reader.integer(p, "crossing") for p in positional)
    return R3(c1, c2, c3, new3, at3, line=line)  # type: ignore[arg-type]


def parse_movie(text: str, source: Optional[str] = None) -> "Movie":
    """Parse and validate a movie.

    ``ribbon`` as the first line enables the no-death rule.
    """
    initial: Optional[LinkDiagram] = None
    ribbon = False
    events: List[Event] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        head = content.split(None, 1)[0].lower()
        if initial is None:
            if content.lower() == "ribbon" and not ribbon:
                ribbon = True
                continue
            if head != "diagram":
                raise ParseError(
                    "a movie starts with a 'diagram <PD>' line", number, source
                )
            parts = content.split(None, 1)
            body = parts[1] if len(parts) > 1 else ""
            try:
                initial = parse_pd(body, source=source, line=number)
            except DiagramError as e:
                raise ParseError(str(e), number, source) from e
            continue
        if head == "diagram":
            raise ParseError("only one diagram line is allowed", number, source)
        events.append(parse_event(content, number, source))
    if initial is None:
        raise ParseError("movie has no diagram line", None, source)
    return Movie.build(initial, events, ribbon=ribbon, source=source)


def load_movie(path: str) -> "Movie":
    with open(path, encoding="utf-8") as handle:
        return parse_movie(handle.read(), source=path)


# =============================================================================
# Movies
# =============================================================================

def _pd_line(diagram: LinkDiagram) -> List[str]:
    """PD text for a movie header, plus a relabel line when labels are not canonical"""
    body = ",".join("X({},{},{},{})".format(*tup) for tup in diagram.crossings)
    raw = f"PD[{body}]" + (f" loops={len(diagram.loops)}" if diagram.loops else "")
    try:
        if parse_pd(raw) == diagram:
            return [raw]
    except KhovanovError:
        pass
    canonical = diagram.canonical_labels()
    back = sorted((new, old) for old, new in canonical.items() if new != old)
    lines = [render(diagram)]
    if back:
        lines.append("relabel " + ",".join(f"{a}:{b}" for a, b in back))
    return lines


@dataclass(frozen=True)
class Movie:
    """A validated movie: ``frames[k]`` is the diagram before ``events[k]``"""

    initial: LinkDiagram
    events: Tuple[Event, ...]
    frames: Tuple[LinkDiagram, ...]
    results: Tuple[MoveResult, ...] = field(compare=False)
    ribbon: bool = False
    source: Optional[str] = field(default=None, compare=False)

    @classmethod
    def build(
        cls,
        initial: LinkDiagram,
        events: Iterable[Event],
        ribbon: bool = False,
        source: Optional[str] = None,
    ) -> "Movie":
        frames = [initial]
        results = []
        events = tuple(events)
        for k, event in enumerate(events):
            if ribbon and isinstance(event, Death):
                raise RibbonSpecError(
                    f"frame {k}: a ribbon movie has no deaths (line {event.line})"
                )
            try:
                result = event.apply(frames[-1])
            except EventError as e:
                raise EventError(e.reason, frame=k, line=event.line) from e
            results.append(result)
            frames.append(result.after)
        logger.debug("movie with %d events validated", len(events))
        return cls(initial, events, tuple(frames), tuple(results), ribbon, source)

    @classmethod
    def identity(cls, diagram: LinkDiagram) -> "Movie":
        return cls.build(diagram, ())

    def __len__(self) -> int:
        return len(self.events)

    @property
    def final(self) -> LinkDiagram:
        return self.frames[-1]

    def count(self, kind: str) -> int:
        return sum(1 for e in self.events if e.kind == kind)

    @property
    def euler_characteristic(self) -> int:
        return self.count("birth") + self.count("death") - self.count("saddle")

    @property
    def is_isotopy(self) -> bool:
        return all(e.kind in ISOTOPY_KINDS for e in self.events)

    def then(self, other: "Movie") -> "Movie":
        """Concatenation: this movie followed by ``other``"""
        if other.initial != self.final:
            raise EventError(
                "movies do not compose: the second starts on a different frame"
            )
        return Movie(
            self.initial,
            self.events + other.events,
            self.frames + other.frames[1:],
            self.results + other.results,
            self.ribbon and other.ribbon,
            self.source,
        )

    def render(self) -> str:
        lines = ["ribbon"] if self.ribbon else []
        header = _pd_line(self.initial)
        lines.append("diagram " + header[0])
        lines.extend(header[1:])
        lines.extend(e.render() for e in self.events)
        return "\n".join(lines) + "\n"


def euler_characteristic(movie: Movie) -> int:
    return movie.euler_characteristic


# =============================================================================
# Chain maps
# =============================================================================

@dataclass
class ChainMap:
    """A map of complexes given by the image of every source generator"""

    source: ChainComplex
    target: ChainComplex
    images: List[FrozenSet[int]]
    q_shift: int = 0
    name: str = ""

    def __call__(self, chain: Iterable[int]) -> Set[int]:
        out: Set[int] = set()
        for i in chain:
            xor_into(out, self.images[i])
        return out

    def matrix(self, h: int) -> F2Matrix:
        """Block in homological degree ``h``; columns are the source generators"""
        sources = self.source.indices_at(h)
        targets = self.target.indices_at(h)
        row_of = {t: r for r, t in enumerate(targets)}
        try:
            columns = [[row_of[t] for t in self.images[s]] for s in sources]
        except KeyError as e:
            name = self.name or "map"
            raise ChainMapError(f"{name} leaves homological degree {h}") from e
        return F2Matrix.from_columns(columns, len(targets))

    def nnz(self) -> int:
        return sum(len(img) for img in self.images)

    def check(self) -> "ChainMap":
        """Raise ``ChainMapError`` unless the map commutes with d.

        Every image must also keep h and shift q by the declared amount.
        """
        src, tgt = self.source, self.target
        graded = src.graded and tgt.graded
        label = self.name or "map"
        for i, image in enumerate(self.images):
            gen = src.generators[i]
            for t in image:
                img = tgt.generators[t]
                if img.h != gen.h:
                    raise ChainMapError(
                        f"{label}: {gen} -> {img} changes the homological degree"
                    )
                if graded and img.q - gen.q != self.q_shift:
                    raise ChainMapError(
                        f"{label}: {gen} -> {img} shifts q by {img.q - gen.q}, "
                        f"expected {self.q_shift}"
                    )
            if tgt.apply(image) != self(src.differential[i]):
                raise ChainMapError(f"{label}: d∘f != f∘d on generator {gen}")
        return self

    def compose(self, after: "ChainMap") -> "ChainMap":
        """``after ∘ self``"""
        if after.source.diagram != self.target.diagram:
            raise ChainMapError(
                f"cannot compose {self.name} with {after.name}: frames differ"
            )
        images = [frozenset(after(img)) for img in self.images]
        name = " ; ".join(n for n in (self.name, after.name) if n)
        q_shift = self.q_shift + after.q_shift
        return ChainMap(self.source, after.target, images, q_shift, name)

    @classmethod
    def identity(cls, cx: ChainComplex) -> "ChainMap":
        return cls(cx, cx, [frozenset({i}) for i in range(len(cx))], 0, "id")

    def tensor(
        self,
        other: "ChainMap",
        source: Optional[ChainComplex] = None,
        target: Optional[ChainComplex] = None,
    ) -> "ChainMap":
        """f ⊗ g between complexes of disjoint unions, lexicographic pairs"""
        alg = self.source.algebra
        if source is None:
            union = disjoint_union(self.source.diagram, other.source.diagram)
            source = build_complex(union, alg)
        if target is None:
            union = disjoint_union(self.target.diagram, other.target.diagram)
            target = build_complex(union, alg)
        pair_src = pair_generators(self.source, other.source, source)
        pair_tgt = pair_generators(self.target, other.target, target)
        images: List[FrozenSet[int]] = [frozenset()] * len(source)
        for i, left in enumerate(self.images):
            for j, right in enumerate(other.images):
                images[pair_src(i, j)] = frozenset(
                    pair_tgt(a, b) for a in left for b in right
                )
        name = f"({self.name})⊗({other.name})"
        return ChainMap(source, target, images, self.q_shift + other.q_shift, name)


def pair_generators(
    left: ChainComplex, right: ChainComplex, union: ChainComplex
) -> Callable[[int, int], int]:
    """Index of x ⊗ y in the complex of a disjoint union.

    The union lists the left crossings first and every right label exceeds
    every left label, so its states are concatenations of the factors' states.
    """
    if len(union) != len(left) * len(right):
        raise ChainMapError(
            f"union complex has {len(union)} generators, "
            f"expected {len(left)}×{len(right)}"
        )

    def index(i: int, j: int) -> int:
        a, b = left.generators[i], right.generators[j]
        try:
            return union.by_state[(a.vertex + b.vertex, a.labels + b.labels)]
        except KeyError as e:
            raise ChainMapError(f"no union generator for {a} ⊗ {b}") from e

    return index


def tensor_chain(
    left: Iterable[int], right: Iterable[int], pair: Callable[[int, int], int]
) -> FrozenSet[int]:
    return frozenset(pair(a, b) for a in left for b in right)


# -- elementary maps ----------------------------------------------------------

def _carried(
    source: CircleArrangement,
    target: CircleArrangement,
    skip: Sequence[int],
    rename: Optional[Dict[int, int]] = None,
) -> Dict[int, int]:
    """Source circle -> target circle for circles a move leaves alone"""
    rename = rename or {}
    out = {}
    for i, circle in enumerate(source.circles):
        if i in skip:
            continue
        lab = circle[0]
        out[i] = target.circle_of[rename.get(lab, lab)]
    return out


def _state_index(
    cx: ChainComplex, vertex: Tuple[int, ...], labels: Sequence[int]
) -> int:
    try:
        return cx.by_state[(vertex, tuple(labels))]
    except KeyError as e:
        state = f"{vertex}/{tuple(labels)}"
        raise ChainMapError(f"state {state} is not a generator of the target") from e


def birth_map(
    result: MoveResult, source: ChainComplex, target: ChainComplex
) -> ChainMap:
    """x ↦ x ⊗ 1 on the new circle"""
    [lab] = result.created
    units = sorted(LABEL_INDEX[u] for u in source.algebra.unit)
    images = []
    for g in source.generators:
        src, tgt = source.arrangement(g.vertex), target.arrangement(g.vertex)
        carry = _carried(src, tgt, ())
        base = [0] * len(tgt.circles)
        for i, j in carry.items():
            base[j] = g.labels[i]
        out: Set[int] = set()
        for u in units:
            base[tgt.circle_of[lab]] = u
            xor_into(out, [_state_index(target, g.vertex, base)])
        images.append(frozenset(out))
    return ChainMap(source, target, images, 1, "birth")


def death_map(
    result: MoveResult, source: ChainComplex, target: ChainComplex
) -> ChainMap:
    """The counit on the dying circle"""
    [lab] = result.removed
    alg = source.algebra
    images = []
    for g in source.generators:
        src, tgt = source.arrangement(g.vertex), target.arrangement(g.vertex)
        dying = src.circle_of[lab]
        if not alg.eps(LABEL_NAME[g.labels[dying]]):
            images.append(frozenset())
            continue
        base = [0] * len(tgt.circles)
        for i, j in _carried(src, tgt, (dying,)).items():
            base[j] = g.labels[i]
        images.append(frozenset({_state_index(target, g.vertex, base)}))
    return ChainMap(source, target, images, 1, "death")


def saddle_map(
    result: MoveResult, source: ChainComplex, target: ChainComplex
) -> ChainMap:
    """m where the band joins two circles, Δ where it splits one"""
    a, b = result.sites
    keep_a, keep_b = result.survivors
    alg = source.algebra
    images = []
    for g in source.generators:
        src, tgt = source.arrangement(g.vertex), target.arrangement(g.vertex)
        first, second = src.circle_of[a], src.circle_of[b]
        base = [0] * len(tgt.circles)
        for i, j in _carried(src, tgt, (first, second)).items():
            base[j] = g.labels[i]
        out: Set[int] = set()
        if first != second:
            merged = tgt.circle_of[keep_a]
            product = alg.m(LABEL_NAME[g.labels[first]], LABEL_NAME[g.labels[second]])
            for value in product:
                base[merged] = LABEL_INDEX[value]
                xor_into(out, [_state_index(target, g.vertex, base)])
        else:
            x, y = tgt.circle_of[keep_a], tgt.circle_of[keep_b]
            if x == y:
                raise ChainMapError(
                    f"saddle on {a},{b} neither splits nor merges at vertex {g.vertex}"
                )
            for left, right in alg.delta(LABEL_NAME[g.labels[first]]):
                base[x], base[y] = LABEL_INDEX[left], LABEL_INDEX[right]
                xor_into(out, [_state_index(target, g.vertex, base)])
        images.append(frozenset(out))
    return ChainMap(source, target, images, -1, "saddle")


def relabel_map(
    result: MoveResult, source: ChainComplex, target: ChainComplex
) -> ChainMap:
    """Basis transport along a renaming of edges"""
    images = []
    for g in source.generators:
        src, tgt = source.arrangement(g.vertex), target.arrangement(g.vertex)
        base = [0] * len(tgt.circles)
        for i, j in _carried(src, tgt, (), result.label_map).items():
            base[j] = g.labels[i]
        images.append(frozenset({_state_index(target, g.vertex, base)}))
    return ChainMap(source, target, images, 0, "relabel")


# -- Reidemeister maps --------------------------------------------------------

StateKey = Tuple[Tuple[int, ...], object, FrozenSet[Tuple[FrozenSet[int], int]]]


def _circle_position(
    cx: ChainComplex, gen: KhGenerator, circle: Tuple[int, ...]
) -> int:
    circles = cx.circles_of(gen)
    try:
        return circles.index(circle)
    except ValueError as e:
        raise ChainMapError(f"circle {circle} missing at vertex {gen.vertex}") from e


def _cancel(
    cx: ChainComplex,
    engine: Eliminator,
    sources: List[int],
    targets: Set[int],
    fixed: Sequence[int],
) -> None:
    """Cancel each source against a target differing only at ``fixed`` crossings"""
    gens = cx.generators

    def rest(i: int) -> Tuple[int, ...]:
        v = gens[i].vertex
        return tuple(b for k, b in enumerate(v) if k not in fixed)

    engine.eliminate(
        order=sources, allowed=lambda a, c: c in targets and rest(a) == rest(c)
    )
    left = [i for i in sources if i in engine.d] + [i for i in targets if i in engine.d]
    if left:
        raise ChainMapError(
            f"local cancellation left {len(left)} generators, first {gens[left[0]]}"
        )


def _kink_engine(cx: ChainComplex, crossing: int, loop: int) -> Eliminator:
    """Cancel the small circle of a kink against the other smoothing"""
    gens = cx.generators
    n = len(cx.diagram.crossings)
    circle = (loop,)
    zero = tuple(0 for _ in range(n))
    at_zero = circle in cx.diagram.resolve(zero).circles
    if not at_zero:
        one = zero[:crossing] + (1,) + zero[crossing + 1:]
        if circle not in cx.diagram.resolve(one).circles:
            raise ChainMapError(f"crossing {crossing} does not close off a kink circle")
    engine = Eliminator(cx.differential)
    if at_zero:
        sources = [
            i for i, g in enumerate(gens)
            if g.vertex[crossing] == 0
            and g.labels[_circle_position(cx, g, circle)] == 0
        ]
        targets = {i for i, g in enumerate(gens) if g.vertex[crossing] == 1}
    else:
        sources = [i for i, g in enumerate(gens) if g.vertex[crossing] == 0]
        targets = {
            i for i, g in enumerate(gens)
            if g.vertex[crossing] == 1
            and g.labels[_circle_position(cx, g, circle)] == 1
        }
    _cancel(cx, engine, sources, targets, (crossing,))
    return engine


def _bigon_engine(
    cx: ChainComplex,
    pair: Tuple[int, int],
    internal: FrozenSet[int],
    fixed: Optional[Tuple[int, int]] = None,
) -> Eliminator:
    """Cancel the four-vertex cube of a bigon down to its through-resolution.

    The vertex where the bigon closes off as a circle O is delooped: the
    bottom vertex cancels against O = X and O = 1 cancels against the top.
    With ``fixed = (c, bit)`` only states with that bit at ``c`` take part.
    """
    p, q = pair
    gens = cx.generators
    n = len(cx.diagram.crossings)
    inside = tuple(sorted(internal))
    base = [0] * n
    if fixed is not None:
        base[fixed[0]] = fixed[1]
    closing = None
    for bits in ((1, 0), (0, 1)):
        v = list(base)
        v[p], v[q] = bits
        if inside in cx.diagram.resolve(tuple(v)).circles:
            closing = bits
            break
    if closing is None:
        raise ChainMapError(
            f"crossings {p} and {q} do not close off the circle {inside}"
        )

    def scope(g: KhGenerator) -> bool:
        return fixed is None or g.vertex[fixed[0]] == fixed[1]

    def local(g: KhGenerator) -> Tuple[int, int]:
        return g.vertex[p], g.vertex[q]

    def o_label(g: KhGenerator) -> int:
        return g.labels[_circle_position(cx, g, inside)]

    engine = Eliminator(cx.differential)
    bottom = [i for i, g in enumerate(gens) if scope(g) and local(g) == (0, 0)]
    closed = [
        (i, o_label(g))
        for i, g in enumerate(gens)
        if scope(g) and local(g) == closing
    ]
    o_x = {i for i, lab in closed if lab == 1}
    _cancel(cx, engine, bottom, o_x, pair)
    o_one = [i for i, lab in closed if lab == 0]
    top = {i for i, g in enumerate(gens) if scope(g) and local(g) == (1, 1)}
    _cancel(cx, engine, o_one, top, pair)
    return engine


def _state_key(
    cx: ChainComplex,
    gen: KhGenerator,
    rename: Callable[[int], Optional[int]],
    local: Sequence[int],
    extra: object = None,
    forced: FrozenSet[int] = frozenset(),
) -> StateKey:
    """Vertex away from the move plus every circle's label.

    Circles are named by their persistent edges.

    A circle made only of ``forced`` edges is left out: the cancellation
    already fixed its label.
    """
    parts = []
    for circle, lab in zip(cx.circles_of(gen), gen.labels):
        signature = frozenset(x for x in (rename(e) for e in circle) if x is not None)
        if not signature:
            if forced.issuperset(circle):
                continue
            raise ChainMapError(
                f"surviving state {gen} has a circle made of moved edges only"
            )
        parts.append((signature, lab))
    away = tuple(b for k, b in enumerate(gen.vertex) if k not in local)
    return away, extra, frozenset(parts)


def _match(
    left: ChainComplex,
    left_keys: Dict[int, StateKey],
    right: ChainComplex,
    right_keys: Dict[int, StateKey],
) -> Dict[int, int]:
    """Bijection between two families of states with equal keys and equal bidegrees"""
    by_key: Dict[StateKey, int] = {}
    for j, key in right_keys.items():
        if key in by_key:
            raise ChainMapError(f"two states share the key of {right.generators[j]}")
        by_key[key] = j
    if len(left_keys) != len(by_key):
        raise ChainMapError(f"{len(left_keys)} states cannot match {len(by_key)}")
    phi: Dict[int, int] = {}
    for i, key in left_keys.items():
        j = by_key.get(key)
        if j is None:
            raise ChainMapError(f"state {left.generators[i]} has no counterpart")
        a, b = left.generators[i], right.generators[j]
        if a.h != b.h or (left.graded and right.graded and a.q != b.q):
            raise ChainMapError(f"matched states {a} and {b} differ in bidegree")
        phi[i] = j
    if len(set(phi.values())) != len(phi):
        raise ChainMapError("state matching is not injective")
    return phi


def _check_reduced(
    engine: Eliminator,
    phi: Dict[int, int],
    differential: Callable[[int], Set[int]],
) -> None:
    for z, x in phi.items():
        if {phi[t] for t in engine.d[z]} != differential(x):
            raise ChainMapError("reduced complex differs from the expected complex")


def _small_big_map(
    result: MoveResult, source: ChainComplex, target: ChainComplex
) -> ChainMap:
    """R1 and R2: retract the big complex onto the small one"""
    big, small = (target, source) if result.big_is_after else (source, target)
    if result.kind == "r1":
        engine = _kink_engine(big, result.local[0], next(iter(result.internal)))
    else:
        engine = _bigon_engine(big, (result.local[0], result.local[1]), result.internal)
    label_map = result.label_map
    big_keys = {
        z: _state_key(
            big, big.generators[z], label_map.get, result.local, forced=result.internal
        )
        for z in engine.alive
    }
    small_keys = {
        x: _state_key(small, g, lambda e: e, ())
        for x, g in enumerate(small.generators)
    }
    phi = _match(big, big_keys, small, small_keys)
    _check_reduced(engine, phi, lambda x: set(small.differential[x]))

    if result.big_is_after:
        inverse = {x: z for z, x in phi.items()}
        images = [frozenset(engine.incl[inverse[x]]) for x in range(len(small))]
    else:
        forward = engine.projection()
        images = [
            frozenset(phi[z] for z in forward.get(y, ())) for y in range(len(big))
        ]
    logger.debug(
        "%s map: %d -> %d generators survive",
        result.kind,
        len(big),
        len(engine.alive),
    )
    return ChainMap(source, target, images, 0, result.kind)


def _triangle_engine(
    cx: ChainComplex, triple: Sequence[int], low: int, internal: FrozenSet[int]
) -> Tuple[Eliminator, int]:
    """Cancel the leftover bigon in the smoothing of ``low`` that caps the triangle"""
    face = moves.triangle(cx.diagram, *triple)
    if face is None:
        raise ChainMapError(f"crossings {tuple(triple)} do not bound a triangle")
    s = next(slot for c, slot in face.darts if c == low)
    corner = {(s - 1) % 4, s}
    cap = next(
        bit
        for bit, pairs in SMOOTHING_PAIRS.items()
        if any(set(pr) == corner for pr in pairs)
    )
    p, q = (c for c in triple if c != low)
    return _bigon_engine(cx, (p, q), internal, fixed=(low, cap)), cap


def r3_map(
    result: MoveResult, source: ChainComplex, target: ChainComplex
) -> ChainMap:
    """Both sides cancel to the same five-vertex picture; match them and compose"""
    low_before, low_after = result.bottom
    p, q = (c for c in result.local if c != low_before)
    # with the other smoothing of the low crossing the top strand meets each
    # smoothed arc at the crossing with the other lower strand after the slide
    beside = {
        low_before: low_after,
        p: result.correspondence[q],
        q: result.correspondence[p],
    }
    order = sorted(beside)
    ours, cap = _triangle_engine(source, result.local, low_before, result.internal)
    theirs, cap_after = _triangle_engine(
        target, result.local_after, low_after, result.internal_after
    )
    if cap != cap_after:
        raise ChainMapError(
            "the triangle is capped by different smoothings on the two sides"
        )

    def keys(
        cx: ChainComplex,
        engine: Eliminator,
        low: int,
        internal: FrozenSet[int],
        crossings: List[int],
    ) -> Dict[int, StateKey]:
        out = {}
        for z in engine.alive:
            g = cx.generators[z]
            if g.vertex[low] == cap:
                kind: object = "through"
            else:
                kind = tuple(g.vertex[c] for c in crossings)
            rename = lambda e: None if e in internal else e  # noqa: E731
            out[z] = _state_key(cx, g, rename, result.local, kind)
        return out

    before = keys(source, ours, low_before, result.internal, order)
    after = keys(
        target, theirs, low_after, result.internal_after, [beside[c] for c in order]
    )
    phi = _match(source, before, target, after)
    _check_reduced(ours, phi, lambda x: theirs.d[x])

    forward = ours.projection()
    images = []
    for y in range(len(source)):
        out: Set[int] = set()
        for z in forward.get(y, ()):
            xor_into(out, theirs.incl[phi[z]])
        images.append(frozenset(out))
    return ChainMap(source, target, images, 0, "r3")


def reidemeister_map(
    result: MoveResult, source: ChainComplex, target: ChainComplex
) -> ChainMap:
    if result.kind == "r3":
        return r3_map(result, source, target)
    if result.kind in ("r1", "r2"):
        return _small_big_map(result, source, target)
    raise EventError(f"{result.kind} is not a Reidemeister move")


EVENT_MAPS: Dict[str, Callable[[MoveResult, ChainComplex, ChainComplex], ChainMap]] = {
    "birth": birth_map,
    "death": death_map,
    "saddle": saddle_map,
    "r1": reidemeister_map,
    "r2": reidemeister_map,
    "r3": reidemeister_map,
    "relabel": relabel_map,
}


def event_map(
    result: MoveResult,
    source: ChainComplex,
    target: ChainComplex,
    check: bool = True,
) -> ChainMap:
    """Chain map induced by one applied event between the complexes of its two frames"""
    try:
        builder = EVENT_MAPS[result.kind]
    except KeyError as e:
        raise EventError(f"no chain map for event kind {result.kind}") from e
    f = builder(result, source, target)
    if check:
        f.check()
    return f


# =============================================================================
# Movie maps and induced maps on homology
# =============================================================================

@dataclass
class InducedMap:
    """Matrix of a movie's map between the chosen homology bases"""

    matrix: F2Matrix
    source: HomologyGroup
    target: HomologyGroup
    q_shift: int

    @property
    def rank(self) -> int:
        return self.matrix.rank()

    def is_identity(self) -> bool:
        rows, cols = self.matrix.shape
        return rows == cols and self.matrix == F2Matrix.identity(rows)

    def is_zero(self) -> bool:
        return self.matrix.is_zero()

    def table(self) -> str:
        cols = [f"{h},{q}" for h, q in self.source.basis]
        width = max([5] + [len(c) + 1 for c in cols])
        lines = [" " * 8 + "".join(c.rjust(width) for c in cols)]
        for r, row in enumerate(self.matrix.tolist()):
            h, q = self.target.basis[r]
            cells = "".join(str(v).rjust(width) for v in row)
            lines.append(f"{h},{q}".rjust(7) + " " + cells)
        return "\n".join(lines)


class MovieEvaluator:
    """Computes complexes, homology and event maps, caching them per frame"""

    def __init__(
        self,
        alg: FrobeniusAlgebra = DEFAULT_ALGEBRA,
        use_reduce: bool = True,
        check: bool = True,
    ):
        self.algebra = alg
        self.use_reduce = use_reduce
        self.check = check
        self._complexes: Dict[LinkDiagram, ChainComplex] = {}
        self._homology: Dict[LinkDiagram, HomologyGroup] = {}

    def complex(self, diagram: LinkDiagram) -> ChainComplex:
        cx = self._complexes.get(diagram)
        if cx is None:
            cx = build_complex(diagram, self.algebra, check=self.check)
            self._complexes[diagram] = cx
        return cx

    def homology(self, diagram: LinkDiagram) -> HomologyGroup:
        hg = self._homology.get(diagram)
        if hg is None:
            hg = homology(
                self.complex(diagram),
                use_reduce=self.use_reduce,
                oracle=not self.use_reduce,
            )
            self._homology[diagram] = hg
        return hg

    def event_maps(self, movie: Movie) -> List[ChainMap]:
        maps = []
        for k, result in enumerate(movie.results):
            try:
                before = self.complex(movie.frames[k])
                after = self.complex(movie.frames[k + 1])
                f = event_map(result, before, after, self.check)
            except ChainMapError as e:
                event = movie.events[k].render()
                raise ChainMapError(f"frame {k} ({event}): {e}") from e
            logger.debug("frame %d %s: %d entries", k, result.kind, f.nnz())
            maps.append(f)
        return maps

    def movie_map(self, movie: Movie) -> ChainMap:
        f = ChainMap.identity(self.complex(movie.initial))
        for g in self.event_maps(movie):
            f = f.compose(g)
        if self.check:
            f.check()
        return f

    def induced(self, f: ChainMap) -> F2Matrix:
        return induced_homology_map(
            f, self.homology(f.source.diagram), self.homology(f.target.diagram)
        )

    def homology_map(self, movie: Movie) -> InducedMap:
        """Product of the per-event induced matrices"""
        matrix = F2Matrix.identity(len(self.homology(movie.initial)))
        for f in self.event_maps(movie):
            matrix = self.induced(f) @ matrix
        return InducedMap(
            matrix,
            self.homology(movie.initial),
            self.homology(movie.final),
            movie.euler_characteristic,
        )


def induced_homology_map(
    f: ChainMap,
    source: Optional[HomologyGroup] = None,
    target: Optional[HomologyGroup] = None,
) -> F2Matrix:
    """Columns are the images of the source basis, written in the target basis"""
    source = source if source is not None else homology(f.source)
    target = target if target is not None else homology(f.target)
    columns = []
    for rep in source.representatives:
        coords = target.project(f(rep))
        columns.append([r for r, v in enumerate(coords) if v])
    return F2Matrix.from_columns(columns, len(target))


def movie_map(movie: Movie, alg: FrobeniusAlgebra = DEFAULT_ALGEBRA) -> ChainMap:
    return MovieEvaluator(alg).movie_map(movie)


# =============================================================================
# Reversal
# =============================================================================

def _r2_joins(result: MoveResult) -> List[Tuple[int, int, int]]:
    """(edge before, bigon edge, edge after) for both strands of a removed bigon"""
    big = result.before
    out = []
    for lab in sorted(result.internal):
        (ct, st), (ch, sh) = big.tails[lab], big.heads[lab]
        before = big.crossings[ct][(st + 2) % 4]
        out.append((before, lab, big.crossings[ch][(sh + 2) % 4]))
    return out


def _inverse_candidates(event: Event, result: MoveResult) -> Iterator[Event]:
    """Events on the later frame that might undo ``event``"""
    after = result.after
    if isinstance(event, Birth):
        yield Death(result.created[0])
    elif isinstance(event, Death):
        yield Birth(result.removed[0])
    elif isinstance(event, Saddle):
        a, b = result.sites
        if result.created:
            [lab] = result.created
            for face in moves.saddle_faces(after, a, lab):
                yield Saddle((a, 0), (lab, 0), face)
        elif result.removed:
            keep = result.survivors[0]
            for face in moves.saddle_faces(after, keep, keep):
                yield Saddle((keep, 0), (keep, 1), face, new=result.removed[0])
        else:
            for face in moves.saddle_faces(after, a, b):
                yield Saddle((a, 0), (b, 0), face)
    elif isinstance(event, R1Plus):
        yield R1Minus(result.local[0])
    elif isinstance(event, R1Minus):
        [c] = result.local
        f = next(iter(result.internal))
        tup = result.before.crossings[c]
        s = moves.kink_slot(result.before, c)
        rest = [t for t in range(4) if s is None or t not in (s, (s + 1) % 4)]
        s_in = next(t for t in rest if result.before.is_head_slot(c, t))
        p = tup[s_in]
        q = next(tup[t] for t in rest if t != s_in)
        edge = result.label_map[p]
        new = (f,) if edge in after.loops else (f, q)
        for side, writhe in itertools.product("RL", (1, -1)):
            yield R1Plus(edge, side, writhe, new, c)
    elif isinstance(event, R2Plus):
        c1, c2 = result.local
        for face in after.faces:
            if moves.is_r2_bigon(after, face, c1, c2):
                yield R2Minus(c1, c2, face.index)
    elif isinstance(event, R2Minus):
        joins = _r2_joins(result)
        for first, second in itertools.permutations(joins, 2):
            finger, target = result.label_map[first[0]], result.label_map[second[0]]
            if finger == target:
                continue
            fresh: List[int] = []
            for (_, bigon, out), lab in ((first, finger), (second, target)):
                fresh.extend([bigon] if lab in after.loops else [bigon, out])
            faces: List[Optional[int]] = [
                f.index
                for f in after.faces
                if f.sides_of(finger) and f.sides_of(target)
            ]
            faces.append(None)
            for at in (result.local, result.local[::-1]):
                choices = itertools.product(
                    (1, 2), itertools.product((True, False), repeat=2), faces
                )
                for over, sides, face in choices:
                    yield R2Plus(
                        finger,
                        target,
                        over,
                        face,
                        sides,  # type: ignore[arg-type]
                        tuple(fresh),
                        tuple(at),  # type: ignore[arg-type]
                    )
    elif isinstance(event, R3):
        triple = tuple(result.local_after)
        labels: List[Optional[Tuple[int, ...]]] = []
        if result.internal == result.internal_after:
            labels.append(None)
        labels.extend(itertools.permutations(sorted(result.internal)))
        for new3 in labels:
            for at3 in itertools.permutations(triple):
                yield R3(*triple, new=new3, at=at3)  # type: ignore[arg-type]
    elif isinstance(event, Relabel):
        back = tuple(sorted((v, k) for k, v in result.label_map.items() if k != v))
        yield Relabel(back)


def inverse_event(event: Event, result: MoveResult) -> Event:
    """The event undoing ``event`` on the frame it produced.

    Applying it reproduces the earlier frame exactly.
    """
    for candidate in _inverse_candidates(event, result):
        try:
            trial = candidate.apply(result.after)
        except EventError:
            continue
        if trial.after == result.before:
            return candidate
    raise EventError(f"no event undoes '{event.render()}'")


def reverse(movie: Movie) -> Movie:
    """The upside-down movie: events reversed and dualized, frames reversed"""
    events = []
    for k in range(len(movie.events) - 1, -1, -1):
        try:
            events.append(inverse_event(movie.events[k], movie.results[k]))
        except EventError as e:
            raise EventError(e.reason, frame=k, line=movie.events[k].line) from e
    reversed_movie = Movie.build(movie.final, events)
    if reversed_movie.frames != tuple(reversed(movie.frames)):
        raise EventError("reversed movie does not retrace the original frames")
    return reversed_movie


# =============================================================================
# Disjoint unions of movies
# =============================================================================

def lift_event(
    event: Event, result: MoveResult, label_shift: int, crossing_shift: int
) -> Event:
    """``event`` with every label and crossing index pinned and shifted"""
    lab = lambda x: x + label_shift  # noqa: E731
    cr = lambda c: c + crossing_shift  # noqa: E731
    if isinstance(event, Birth):
        return Birth(lab(result.created[0]))
    if isinstance(event, Death):
        return Death(lab(event.label))
    if isinstance(event, Saddle):
        (a, ta), (b, tb) = event.first, event.second
        new = lab(result.created[0]) if result.created and a == b else None
        return Saddle((lab(a), ta), (lab(b), tb), None, new)
    if isinstance(event, R1Plus):
        created = tuple(lab(x) for x in result.created)
        return R1Plus(
            lab(event.edge), event.side, event.writhe, created, cr(result.local[0])
        )
    if isinstance(event, R1Minus):
        return R1Minus(cr(event.crossing))
    if isinstance(event, R2Plus):
        return R2Plus(
            lab(event.finger), lab(event.target), event.over, None,
            _applied_sides(event, result), tuple(lab(x) for x in result.created),
            (cr(result.local[0]), cr(result.local[1])),
        )
    if isinstance(event, R2Minus):
        return R2Minus(cr(event.c1), cr(event.c2))
    if isinstance(event, R3):
        new3 = None if event.new is None else tuple(lab(x) for x in event.new)
        at3 = None if event.at is None else tuple(cr(c) for c in event.at)
        crossings = (cr(event.c1), cr(event.c2), cr(event.c3))
        return R3(*crossings, new3, at3)  # type: ignore[arg-type]
    return Relabel(tuple((lab(a), lab(b)) for a, b in event.mapping))


def _applied_sides(event: R2Plus, result: MoveResult) -> Tuple[bool, bool]:
    """Recover which sides an R2+ used from the crossing it put first"""
    if event.sides is not None:
        return event.sides
    for sides in itertools.product((True, False), repeat=2):
        try:
            trial = moves.r2_plus(
                result.before,
                event.finger,
                event.target,
                event.over,
                None,
                sides,
                result.created,
                result.local,
            )
        except EventError:
            continue
        if trial.after == result.after:
            return sides
    raise EventError(f"cannot pin the sides of '{event.render()}'")


def disjoint_movie(first: Movie, second: Movie) -> Movie:
    """``first`` ⊔ ``second``: the first acts on the left, the second on the right.

    Right-hand labels are shifted past every label the first movie uses, so
    each frame lists left crossings and labels before right ones.
    """
    label_shift = max(f.max_label for f in first.frames)
    right_start = second.initial.relabeled(
        {x: x + label_shift for x in second.initial.labels}
    )
    initial = LinkDiagram(
        first.initial.crossings + right_start.crossings,
        first.initial.over_in + right_start.over_in,
        tuple(sorted(first.initial.loops + right_start.loops)),
    )
    events: List[Event] = [
        lift_event(e, r, 0, 0) for e, r in zip(first.events, first.results)
    ]
    offset = len(first.final.crossings)
    events += [
        lift_event(e, r, label_shift, offset)
        for e, r in zip(second.events, second.results)
    ]
    return Movie.build(initial, events)


# =============================================================================
# Random diagrams and movies
# =============================================================================

RANDOM_KINDS = ("birth", "death", "saddle", "r1+", "r1-", "r2+", "r2-", "r3")


def random_event(
    rng: random.Random, diagram: LinkDiagram, kinds: Sequence[str] = RANDOM_KINDS
) -> Optional[Event]:
    """A random event of one of ``kinds`` plausible on ``diagram``, or None"""
    labels = diagram.labels
    kinks = [c for c in range(len(diagram)) if moves.kink_slot(diagram, c) is not None]
    options: List[str] = []
    for kind in kinds:
        if kind == "death" and not diagram.loops:
            continue
        if kind in ("saddle", "r1+", "r2+") and not labels:
            continue
        if kind == "r1-" and not kinks:
            continue
        if kind == "r2-" and not any(len(f.darts) == 2 for f in diagram.faces):
            continue
        if kind == "r3" and not any(len(f.darts) == 3 for f in diagram.faces):
            continue
        options.append(kind)
    if not options:
        return None
    kind = rng.choice(options)
    if kind == "birth":
        return Birth()
    if kind == "death":
        return Death(rng.choice(diagram.loops))
    if kind == "saddle":
        a, b = rng.choice(labels), rng.choice(labels)
        return Saddle((a, 0), (b, 1 if a == b else 0))
    if kind == "r1+":
        return R1Plus(rng.choice(labels), rng.choice("LR"), rng.choice((1, -1)))
    if kind == "r1-":
        return R1Minus(rng.choice(kinks))
    if kind == "r2+":
        if len(labels) < 2:
            return None
        a, b = rng.sample(labels, 2)
        return R2Plus(a, b, rng.choice((1, 2)))
    if kind == "r2-":
        face = rng.choice([f for f in diagram.faces if len(f.darts) == 2])
        (c1, _), (c2, _) = face.darts
        return R2Minus(c1, c2)
    face = rng.choice([f for f in diagram.faces if len(f.darts) == 3])
    c1, c2, c3 = (c for c, _ in face.darts)
    return R3(c1, c2, c3)


def random_movie(
    rng: random.Random,
    start: Optional[LinkDiagram] = None,
    max_crossings: int = 4,
    max_events: int = 6,
    kinds: Sequence[str] = RANDOM_KINDS,
    attempts: int = 20,
) -> Movie:
    """A valid movie of at most ``max_events`` random events.

    No frame exceeds ``max_crossings``.
    """
    frame = unlink(1) if start is None else start
    initial = frame
    events: List[Event] = []
    for _ in range(rng.randint(1, max_events)):
        for _ in range(attempts):
            event = random_event(rng, frame, kinds)
            if event is None:
                break
            try:
                result = event.apply(frame)
            except EventError:
                continue
            if len(result.after) > max_crossings:
                continue
            events.append(event)
            frame = result.after
            break
    logger.debug(
        "random movie with %d events ending at %d crossings", len(events), len(frame)
    )
    return Movie.build(initial, events)


def random_diagram(
    rng: random.Random, max_crossings: int = 4, steps: int = 8
) -> LinkDiagram:
    """A diagram grown from the unknot by random births and Reidemeister I/II moves"""
    kinds = ("birth", "r1+", "r2+", "r2-", "r1-")
    movie = random_movie(rng, None, max_crossings, steps, kinds=kinds)
    return movie.final
