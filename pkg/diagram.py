"""
Oriented planar link diagrams given by PD codes plus crossingless loops.

Each crossing is a 4-tuple of edge labels listed counterclockwise from the
incoming under-strand. ``over_in[c]`` records the slot (1 or 3) where the
over-strand enters crossing ``c``; a crossing is positive when it is slot 1.
Parsed diagrams infer it from consecutive edge numbering, diagrams produced
by movie events carry it explicitly, so labels stay stable along a movie.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from errors import DiagramError, ParseError

logger = logging.getLogger(__name__)

Crossing = Tuple[int, int, int, int]
Slot = Tuple[int, int]

# 0-smoothing is the oriented smoothing of a positive crossing
SMOOTHING_PAIRS = {0: ((0, 3), (1, 2)), 1: ((0, 1), (2, 3))}

PD_PATTERN = re.compile(
    r"^PD\[(?P<body>.*)\]"
    r"(?:loops=(?P<loops>\d+))?"
    r"(?:over=(?P<over>\d+(?:,\d+)*))?$"
)
CROSSING_PATTERN = re.compile(r"X\((\d+),(\d+),(\d+),(\d+)\)")


@dataclass(frozen=True)
class Face:
    """A face of the diagram, as the cyclic list of edge sides bounding it"""

    index: int
    darts: Tuple[Slot, ...]
    edges: Tuple[Tuple[int, bool], ...]

    def sides_of(self, label: int) -> List[bool]:
        """Traversal directions (True = along the orientation) of ``label`` here"""
        return [along for lab, along in self.edges if lab == label]

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class CircleArrangement:
    vertex: Tuple[int, ...]
    circles: Tuple[Tuple[int, ...], ...]

    @cached_property
    def circle_of(self) -> Dict[int, int]:
        return {lab: i for i, circle in enumerate(self.circles) for lab in circle}

    def __len__(self) -> int:
        return len(self.circles)


@dataclass(frozen=True)
class LinkDiagram:
    crossings: Tuple[Crossing, ...] = ()
    over_in: Tuple[int, ...] = ()
    loops: Tuple[int, ...] = ()

    # -- structure -----------------------------------------------------------

    @cached_property
    def slots(self) -> Dict[int, List[Slot]]:
        out: Dict[int, List[Slot]] = {}
        for c, tup in enumerate(self.crossings):
            for s, lab in enumerate(tup):
                out.setdefault(lab, []).append((c, s))
        return out

    @property
    def edges(self) -> List[int]:
        return sorted(self.slots)

    @property
    def labels(self) -> List[int]:
        return sorted(list(self.slots) + list(self.loops))

    @property
    def max_label(self) -> int:
        labels = self.labels
        return labels[-1] if labels else 0

    def __len__(self) -> int:
        return len(self.crossings)

    def is_head_slot(self, c: int, s: int) -> bool:
        return s == 0 or s == self.over_in[c]

    @cached_property
    def heads(self) -> Dict[int, Slot]:
        """Slot where each edge ends (enters a crossing)"""
        return {
            lab: (c, s)
            for lab, occ in self.slots.items()
            for c, s in occ
            if self.is_head_slot(c, s)
        }

    @cached_property
    def tails(self) -> Dict[int, Slot]:
        return {
            lab: (c, s)
            for lab, occ in self.slots.items()
            for c, s in occ
            if not self.is_head_slot(c, s)
        }

    def other_end(self, c: int, s: int) -> Slot:
        occ = self.slots[self.crossings[c][s]]
        return occ[1] if occ[0] == (c, s) else occ[0]

    def next_edge(self, label: int) -> int:
        """Edge following ``label`` along the orientation"""
        if label in self.loops:
            return label
        c, s = self.heads[label]
        return self.crossings[c][(s + 2) % 4]

    def components(self) -> List[Tuple[int, ...]]:
        """Link components as edge sequences in traversal order.

        Each starts at its minimal label.
        """
        seen: set = set()
        out = []
        for lab in self.edges:
            if lab in seen:
                continue
            comp = [lab]
            seen.add(lab)
            nxt = self.next_edge(lab)
            while nxt != lab:
                comp.append(nxt)
                seen.add(nxt)
                nxt = self.next_edge(nxt)
            out.append(tuple(comp))
        out.extend((lab,) for lab in self.loops)
        return sorted(out, key=min)

    def pieces(self) -> List[List[int]]:
        """Crossing indices of each connected 4-valent piece"""
        graph = nx.Graph()
        graph.add_nodes_from(range(len(self.crossings)))
        for occ in self.slots.values():
            graph.add_edge(occ[0][0], occ[1][0])
        return sorted(sorted(comp) for comp in nx.connected_components(graph))

    # -- signs ---------------------------------------------------------------

    @property
    def crossing_signs(self) -> Tuple[int, ...]:
        return tuple(1 if o == 1 else -1 for o in self.over_in)

    def signs(self) -> Tuple[int, int]:
        n_plus = sum(1 for o in self.over_in if o == 1)
        return n_plus, len(self.over_in) - n_plus

    @property
    def n_plus(self) -> int:
        return self.signs()[0]

    @property
    def n_minus(self) -> int:
        return self.signs()[1]

    # -- resolutions ---------------------------------------------------------

    def resolve(self, vertex: Sequence[int]) -> CircleArrangement:
        if len(vertex) != len(self.crossings):
            raise DiagramError(
                f"resolution vertex has length {len(vertex)}, "
                f"diagram has {len(self.crossings)} crossings"
            )
        graph = nx.Graph()
        graph.add_nodes_from(self.slots)
        for bit, tup in zip(vertex, self.crossings):
            for a, b in SMOOTHING_PAIRS[bit]:
                graph.add_edge(tup[a], tup[b])
        circles = [tuple(sorted(comp)) for comp in nx.connected_components(graph)]
        circles.extend((lab,) for lab in self.loops)
        circles.sort(key=lambda circle: circle[0])
        return CircleArrangement(tuple(vertex), tuple(circles))

    # -- faces ---------------------------------------------------------------

    @cached_property
    def faces(self) -> Tuple[Face, ...]:
        seen: set = set()
        cycles: List[List[Slot]] = []
        for c in range(len(self.crossings)):
            for s in range(4):
                if (c, s) in seen:
                    continue
                cycle = []
                dart = (c, s)
                while dart not in seen:
                    seen.add(dart)
                    cycle.append(dart)
                    c2, s2 = self.other_end(*dart)
                    dart = (c2, (s2 + 1) % 4)
                start = cycle.index(min(cycle))
                cycles.append(cycle[start:] + cycle[:start])
        cycles.sort(key=lambda cyc: cyc[0])
        faces = []
        for cyc in cycles:
            edges = tuple(
                (self.crossings[c][s], not self.is_head_slot(c, s)) for c, s in cyc
            )
            faces.append(Face(len(faces), tuple(cyc), edges))
        for lab in self.loops:
            faces.append(Face(len(faces), (), ((lab, True),)))
            faces.append(Face(len(faces), (), ((lab, False),)))
        return tuple(faces)

    def trace_faces(self) -> List[Face]:
        return list(self.faces)

    def faces_of(self, label: int) -> List[Tuple[int, bool]]:
        """(face index, traversed along) for both sides of an edge or loop"""
        return [(f.index, along) for f in self.faces for along in f.sides_of(label)]

    def face(self, index: int) -> Face:
        if not 0 <= index < len(self.faces):
            raise DiagramError(f"no face {index}; diagram has {len(self.faces)} faces")
        return self.faces[index]

    # -- validation ----------------------------------------------------------

    def validate(self) -> "LinkDiagram":
        if len(self.over_in) != len(self.crossings):
            raise DiagramError("orientation data does not match the crossing list")
        for lab, occ in self.slots.items():
            if len(occ) != 2:
                raise DiagramError(
                    f"edge label {lab} appears {len(occ)} times, expected 2"
                )
        if len(set(self.loops)) != len(self.loops) or set(self.loops) & set(self.slots):
            raise DiagramError(
                "loop labels must be distinct and disjoint from edge labels"
            )
        if any(o not in (1, 3) for o in self.over_in):
            raise DiagramError("over-strand must enter at slot 1 or 3")
        if len(self.heads) != len(self.slots) or len(self.tails) != len(self.slots):
            raise DiagramError(
                "inconsistent orientation: some edge lacks a unique head and tail"
            )
        for piece in self.pieces():
            members = set(piece)
            count = sum(1 for f in self.faces if f.darts and f.darts[0][0] in members)
            if count != len(piece) + 2:
                raise DiagramError(
                    f"failed Euler/face validation: {len(piece)} crossings "
                    f"bound {count} faces, "
                    f"expected {len(piece) + 2}"
                )
        return self

    # -- derived diagrams ----------------------------------------------------

    def mirror(self) -> "LinkDiagram":
        crossings = []
        over_in = []
        for (i, j, k, l), o in zip(self.crossings, self.over_in):
            if o == 1:
                crossings.append((j, k, l, i))
                over_in.append(3)
            else:
                crossings.append((l, i, j, k))
                over_in.append(1)
        return LinkDiagram(tuple(crossings), tuple(over_in), self.loops)

    def relabeled(self, mapping: Dict[int, int]) -> "LinkDiagram":
        crossings = tuple(
            tuple(mapping.get(x, x) for x in tup) for tup in self.crossings
        )
        loops = tuple(sorted(mapping.get(x, x) for x in self.loops))
        return LinkDiagram(crossings, self.over_in, loops)  # type: ignore[arg-type]

    def canonical_labels(self) -> Dict[int, int]:
        """Renumbering 1..n along components, free loops last"""
        mapping: Dict[int, int] = {}
        comps = [c for c in self.components() if c[0] not in self.loops]
        for comp in comps:
            for lab in comp:
                mapping[lab] = len(mapping) + 1
        for lab in sorted(self.loops):
            mapping[lab] = len(mapping) + 1
        return mapping

    def canonical(self) -> "LinkDiagram":
        return self.relabeled(self.canonical_labels())

    def render(self) -> str:
        return render(self)

    def __str__(self) -> str:
        return render(self)


def render(diagram: LinkDiagram) -> str:
    """Canonical PD text"""
    canon = diagram.canonical()
    body = ",".join("X({},{},{},{})".format(*tup) for tup in canon.crossings)
    text = f"PD[{body}]"
    if canon.loops:
        text += f" loops={len(canon.loops)}"
    try:
        inferred: Optional[Tuple[int, ...]] = _infer_over_in(canon.crossings)
    except DiagramError:
        inferred = None
    if inferred != canon.over_in:
        # numbering alone is ambiguous here (one-crossing components)
        text += " over=" + ",".join(str(o) for o in canon.over_in)
    return text


def disjoint_union(first: LinkDiagram, second: LinkDiagram) -> LinkDiagram:
    shift = first.max_label
    moved = second.relabeled({lab: lab + shift for lab in second.labels})
    return LinkDiagram(
        first.crossings + moved.crossings,
        first.over_in + moved.over_in,
        tuple(sorted(first.loops + moved.loops)),
    )


def unlink(count: int) -> LinkDiagram:
    return LinkDiagram((), (), tuple(range(1, count + 1)))


# =============================================================================
# Parsing
# =============================================================================

def _infer_over_in(crossings: Sequence[Crossing]) -> Tuple[int, ...]:
    """Read orientation off consecutive edge numbering along each component.

    The over-strand enters at slot 1 exactly when the label at slot 3 follows
    the label at slot 1; otherwise it must enter at slot 3.
    """
    graph = nx.Graph()
    for i, j, k, l in crossings:
        graph.add_edge(i, k)
        graph.add_edge(j, l)
    succ: Dict[int, int] = {}
    for comp in nx.connected_components(graph):
        ordered = sorted(comp)
        for pos, lab in enumerate(ordered):
            succ[lab] = ordered[(pos + 1) % len(ordered)]
    over_in = []
    for index, (i, j, k, l) in enumerate(crossings):
        if succ[i] != k:
            raise DiagramError(
                f"inconsistent orientation numbering at crossing {index}: "
                f"under-strand {i} is not followed by {k}"
            )
        if succ[j] == l:
            over_in.append(1)
        elif succ[l] == j:
            over_in.append(3)
        else:
            raise DiagramError(
                f"inconsistent orientation numbering at crossing {index}: "
                f"over-strand {j},{l} not consecutive"
            )
    return tuple(over_in)


def parse_pd(
    text: str, source: Optional[str] = None, line: Optional[int] = None
) -> LinkDiagram:
    """Parse ``PD[X(a,b,c,d),...] loops=k`` into a validated diagram"""
    compact = re.sub(r"\s+", "", text)
    match = PD_PATTERN.match(compact)
    if not match:
        raise ParseError(f"not a PD code: {text.strip()!r}", line, source)
    body = match.group("body")
    crossings: List[Crossing] = []
    pos = 0
    while pos < len(body):
        if crossings:
            if body[pos] != ",":
                raise ParseError(
                    f"expected ',' at offset {pos} in PD body", line, source
                )
            pos += 1
        cm = CROSSING_PATTERN.match(body, pos)
        if not cm:
            raise ParseError(
                f"malformed crossing at offset {pos} in PD body", line, source
            )
        crossings.append(tuple(int(g) for g in cm.groups()))  # type: ignore[arg-type]
        pos = cm.end()

    counts: Dict[int, int] = {}
    for tup in crossings:
        for lab in tup:
            counts[lab] = counts.get(lab, 0) + 1
    bad = sorted(lab for lab, n in counts.items() if n != 2)
    if bad:
        raise DiagramError(
            f"edge label {bad[0]} appears {counts[bad[0]]} times, expected 2"
        )

    n_loops = int(match.group("loops") or 0)
    start = max(counts, default=0) + 1
    loops = tuple(range(start, start + n_loops))
    if match.group("over"):
        over_in = tuple(int(o) for o in match.group("over").split(","))
        if len(over_in) != len(crossings):
            raise ParseError(
                f"over= lists {len(over_in)} entries for {len(crossings)} crossings",
                line,
                source,
            )
    else:
        over_in = _infer_over_in(crossings)
    diagram = LinkDiagram(tuple(crossings), over_in, loops)
    diagram.validate()
    logger.debug("parsed %d-crossing diagram with %d loops", len(crossings), n_loops)
    return diagram


def load_pd(path: str) -> LinkDiagram:
    with open(path, encoding="utf-8") as handle:
        lines = [ln.split("#", 1)[0].strip() for ln in handle]
    text = " ".join(ln for ln in lines if ln)
    return parse_pd(text, source=path, line=1)


def signs(diagram: LinkDiagram) -> Tuple[int, int]:
    return diagram.signs()


def resolve(diagram: LinkDiagram, vertex: Iterable[int]) -> CircleArrangement:
    return diagram.resolve(tuple(vertex))


def trace_faces(diagram: LinkDiagram) -> List[Face]:
    return diagram.trace_faces()
