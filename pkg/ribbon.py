"""
Ribbon concordances as movies, their reversals and roundtrips, and the
special movies used to check the neck-passing relations and the alternative
decomposition of a saddle followed by its dual.

A ribbon concordance from K1 to K2 is presented as births of free loops,
then for every band an isotopy that routes the band followed by one saddle
that fuses two components. There are no deaths.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import moves
from cobordism import (
    ISOTOPY_KINDS,
    Birth,
    Event,
    Movie,
    R2Minus,
    R2Plus,
    Relabel,
    Saddle,
    parse_movie,
    random_event,
    reverse,
)
from diagram import LinkDiagram, unlink
from errors import EventError, RibbonSpecError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Band:
    """Isotopy events that route a band, then the saddle along it"""

    routing: Tuple[Event, ...]
    saddle: Saddle


@dataclass(frozen=True)
class RibbonConcordanceSpec:
    source: LinkDiagram
    births: Tuple[Birth, ...] = ()
    bands: Tuple[Band, ...] = ()
    tail: Tuple[Event, ...] = ()
    name: str = ""

    def events(self) -> List[Event]:
        out: List[Event] = list(self.births)
        for band in self.bands:
            out.extend(band.routing)
            out.append(band.saddle)
        out.extend(self.tail)
        return out

    @classmethod
    def from_movie(cls, movie: Movie, name: str = "") -> "RibbonConcordanceSpec":
        """Split a movie into births, bands and a trailing isotopy"""
        events = list(movie.events)
        births: List[Birth] = []
        while events and isinstance(events[0], Birth):
            births.append(events.pop(0))  # type: ignore[arg-type]
        bands: List[Band] = []
        routing: List[Event] = []
        for event in events:
            if isinstance(event, Saddle):
                bands.append(Band(tuple(routing), event))
                routing = []
            elif event.kind in ISOTOPY_KINDS:
                routing.append(event)
            else:
                raise RibbonSpecError(
                    f"{event.kind} event on line {event.line} "
                    "cannot appear after the births"
                )
        name = name or (movie.source or "")
        spec = cls(movie.initial, tuple(births), tuple(bands), tuple(routing), name)
        spec.validate()
        return spec

    def validate(self) -> Movie:
        """Build the movie and enforce the ribbon invariants"""
        if len(self.bands) != len(self.births):
            raise RibbonSpecError(
                f"{len(self.births)} births need as many bands, got {len(self.bands)}"
            )
        for band in self.bands:
            stray = [e for e in band.routing if e.kind not in ISOTOPY_KINDS]
            if stray:
                raise RibbonSpecError(
                    f"band routing may only use isotopy events, found {stray[0].kind}"
                )
        if len(self.source.components()) != 1:
            raise RibbonSpecError("the source of a ribbon concordance must be a knot")
        movie = Movie.build(self.source, self.events(), ribbon=True)
        for k, (event, result) in enumerate(zip(movie.events, movie.results)):
            if isinstance(event, Saddle):
                before = len(result.before.components())
                merged = before - len(result.after.components())
                if merged != 1:
                    raise RibbonSpecError(
                        f"frame {k}: band saddle must fuse two components"
                    )
        if len(movie.final.components()) != 1:
            count = len(movie.final.components())
            raise RibbonSpecError(f"final frame has {count} components, expected one")
        return movie

    @property
    def target(self) -> LinkDiagram:
        return self.validate().final


def concordance_movie(spec: RibbonConcordanceSpec) -> Movie:
    movie = spec.validate()
    logger.debug(
        "ribbon movie %s: %d births, %d events", spec.name, len(spec.births), len(movie)
    )
    return movie


def roundtrip_movie(spec: RibbonConcordanceSpec) -> Movie:
    """The concordance followed by its reverse, from the source back to itself"""
    movie = concordance_movie(spec)
    back = reverse(movie)
    return Movie.build(movie.initial, movie.events + back.events)


def parse_ribbon(text: str, source: Optional[str] = None) -> RibbonConcordanceSpec:
    """Parse a ribbon concordance.

    A ``ribbon`` header gives the concordance forwards. A ``ribbon dual``
    header gives it upside down, from the target down to the source with
    deaths allowed, and the concordance is its reverse.
    """
    lines = text.splitlines()
    header = next(
        (k for k, raw in enumerate(lines) if raw.split("#", 1)[0].strip()), None
    )
    words = [] if header is None else lines[header].split("#", 1)[0].lower().split()
    if header is None or words != ["ribbon", "dual"]:
        movie = parse_movie(text, source=source)
        if not movie.ribbon:
            name = source or "ribbon text"
            raise RibbonSpecError(f"{name} lacks the 'ribbon' header")
        return RibbonConcordanceSpec.from_movie(movie, name=source or "")
    # blanked so event line numbers still match the file
    lines[header] = ""
    forward = reverse(parse_movie("\n".join(lines), source=source))
    movie = Movie.build(forward.initial, forward.events, ribbon=True, source=source)
    return RibbonConcordanceSpec.from_movie(movie, name=source or "")


def load_ribbon(path: str) -> RibbonConcordanceSpec:
    with open(path, encoding="utf-8") as handle:
        return parse_ribbon(handle.read(), source=path)


def random_ribbon_spec(
    rng: random.Random,
    bands: int = 1,
    routing: int = 2,
    max_crossings: int = 4,
    attempts: int = 40,
    name: str = "random",
) -> RibbonConcordanceSpec:
    """A ribbon concordance from the unknot grown from seeded random choices"""
    source = unlink(1)
    frame = source
    births = []
    for _ in range(bands):
        birth = Birth()
        frame = birth.apply(frame).after
        births.append(birth)
    built: List[Band] = []
    for _ in range(bands):
        steps: List[Event] = []
        for _ in range(routing):
            for _ in range(attempts):
                event = random_event(rng, frame, ("r1+", "r2+", "r2-", "r1-", "r3"))
                if event is None:
                    break
                try:
                    result = event.apply(frame)
                except EventError:
                    continue
                if len(result.after) <= max_crossings:
                    steps.append(event)
                    frame = result.after
                    break
        band = _fusing_saddle(rng, frame)
        frame = band.apply(frame).after
        built.append(Band(tuple(steps), band))
    return RibbonConcordanceSpec(source, tuple(births), tuple(built), name=name)


def _fusing_saddle(rng: random.Random, frame: LinkDiagram) -> Saddle:
    component = {lab: i for i, comp in enumerate(frame.components()) for lab in comp}
    pairs = [
        (a, b) for a in frame.labels for b in frame.labels
        if a < b and component[a] != component[b] and moves.saddle_faces(frame, a, b)
    ]
    if not pairs:
        raise RibbonSpecError("no band can fuse two components of this frame")
    a, b = rng.choice(pairs)
    return Saddle((a, 0), (b, 0))


# =============================================================================
# Alternative decomposition of a saddle followed by its dual
# =============================================================================

def saddle_pair_movie(diagram: LinkDiagram, first: int, second: int) -> Movie:
    """A saddle between ``first`` and ``second`` followed by the dual saddle"""
    band = Saddle((first, 0), (second, 1 if first == second else 0))
    movie = Movie.build(diagram, [band])
    return Movie.build(diagram, movie.events + reverse(movie).events)


def alt_decomposition_movie(
    diagram: LinkDiagram, first: int, second: int, routing: Sequence[Event] = ()
) -> Movie:
    """Split a loop off ``first``, route it along the band, fuse it into ``second``.

    ``routing`` names isotopy events on the frame holding the split-off loop;
    that loop gets the next free label.
    """
    split = Saddle((first, 0), (first, 1))
    result = split.apply(diagram)
    [loop] = result.created
    events: List[Event] = [split, *routing]
    frame = Movie.build(diagram, events).final
    if loop not in frame.loops:
        raise EventError(f"routing must leave the split-off loop {loop} free")
    events.append(Saddle((second, 0), (loop, 0)))
    return Movie.build(diagram, events)


# =============================================================================
# Neck passing
# =============================================================================

NECK_VARIANTS = ("weak", "full", "strong")


def _go_around(
    frame: LinkDiagram, loop: int, edge: int, over: int
) -> Tuple[List[Event], LinkDiagram, int]:
    """Push ``loop`` across ``edge`` and drop it on the far side.

    Returns the events, the new frame and the loop's new label.
    """
    push = R2Plus(loop, edge, over)
    result = push.apply(frame)
    c1, c2 = result.local
    m1, m2 = sorted(result.internal)
    finger_bigon = min(m1, m2)  # the finger's bigon edge is created first
    target_bigon = max(m1, m2)
    far = next(
        f
        for f in result.after.faces
        if moves.is_r2_bigon(result.after, f, c1, c2)
        and {lab for lab, _ in f.edges} == {loop, target_bigon}
    )
    drop = R2Minus(c1, c2, far.index)
    after = drop.apply(result.after).after
    if finger_bigon not in after.loops:
        raise EventError(f"loop did not come free after passing edge {edge}")
    return [push, drop], after, finger_bigon


def neck_passing_movie(
    variant: str = "full",
    diagram: Optional[LinkDiagram] = None,
    edge: Optional[int] = None,
) -> Movie:
    """The go-around isotopy: a free loop passes under a strand and returns over it.

    The weak and full variants act on the two-component unlink; the strong
    variant adds a free loop to ``diagram`` and routes it around ``edge``.
    """
    if variant not in NECK_VARIANTS:
        raise ValueError(
            f"unknown neck-passing variant {variant!r}; expected one of {NECK_VARIANTS}"
        )
    if variant != "strong" or diagram is None:
        diagram, edge = unlink(1), 1
    if edge is None:
        edge = diagram.edges[0] if diagram.edges else diagram.loops[0]
    if edge not in diagram.labels:
        raise EventError(f"no edge or loop labelled {edge}")
    u = diagram.max_label + 1
    loops = tuple(sorted(diagram.loops + (u,)))
    start = LinkDiagram(diagram.crossings, diagram.over_in, loops)
    first, frame, loop = _go_around(start, u, edge, over=2)
    second, frame, loop = _go_around(frame, loop, edge, over=1)
    events: List[Event] = first + second
    if loop != u:
        events.append(Relabel(((loop, u),)))
    movie = Movie.build(start, events)
    if movie.final != start:
        raise EventError("neck-passing movie does not return to its starting frame")
    return movie


# =============================================================================
# Bundled specs
# =============================================================================

BUNDLED_RIBBONS = ("cylinder", "one_band", "two_band", "square_knot", "stevedore")

# unknot to the corpus square knot and stevedore, both written upside down
_SQUARE_KNOT_DUAL = (
    "ribbon dual\n"
    "diagram PD[X(4,2,5,1),X(2,6,3,5),X(6,4,7,3),"
    "X(7,10,8,11),X(11,8,12,9),X(9,12,10,1)]\n"
    "saddle 4@0 10@0\nr2- 2 3\nr2- 1 2\nr2- 0 1 face=1\ndeath 5\n"
)
_STEVEDORE_DUAL = (
    "ribbon dual\n"
    "diagram PD[X(10,1,11,2),X(2,9,3,10),X(8,3,9,4),X(7,13,8,12),"
    "X(13,7,14,6),X(5,1,6,14),X(11,5,12,4)]\n"
    "saddle 5@0 11@0\nr1- 6\nr2- 2 3\nr2- 1 2\nr2- 0 1 face=0\ndeath 11\n"
)

_BUNDLED_TEXT: Dict[str, str] = {
    "cylinder": "ribbon\ndiagram PD[] loops=1\n",
    "one_band": "ribbon\ndiagram PD[] loops=1\nbirth\nr2+ 2 1 1\nsaddle 1@0 2@0\n",
    "two_band": (
        "ribbon\ndiagram PD[] loops=1\nbirth\nbirth\n"
        "r2+ 2 1 1\nsaddle 1@0 2@0\nr2+ 3 1 1\nsaddle 1@0 3@0\n"
    ),
    "square_knot": _SQUARE_KNOT_DUAL,
    "stevedore": _STEVEDORE_DUAL,
}


def bundled_spec(name: str) -> RibbonConcordanceSpec:
    if name not in _BUNDLED_TEXT:
        raise KeyError(
            f"no bundled ribbon concordance {name!r}; "
            f"expected one of {BUNDLED_RIBBONS}"
        )
    return parse_ribbon(_BUNDLED_TEXT[name], source=name)
