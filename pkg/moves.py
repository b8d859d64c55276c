"""
Local moves on link diagrams: births, deaths, saddles, Reidemeister moves.

Each move takes a frame and returns a ``MoveResult`` holding the next frame
and the bookkeeping that the chain-map layer needs. Labels untouched by a
move keep their values. Fresh labels default to the next unused integers
and can be pinned with ``new`` so that reversed movies reproduce their
frames exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import networkx as nx

from diagram import Face, LinkDiagram
from errors import DiagramError, EventError

logger = logging.getLogger(__name__)

Site = Tuple[int, int]
Entry = Tuple[int, bool, int]  # (label, incoming, strand)

# counterclockwise order of compass slots around a crossing
COMPASS = ("S", "E", "N", "W")

# R1 kinks keyed by (side, writhe): slot pattern and over_in
KINKS = {
    ("R", 1): (("e", "f", "f", "g"), 1),
    ("R", -1): (("f", "f", "g", "e"), 3),
    ("L", 1): (("f", "e", "g", "f"), 1),
    ("L", -1): (("e", "g", "f", "f"), 3),
}


@dataclass(frozen=True)
class MoveResult:
    """Outcome of one move.

    For R1 and R2 the "big" diagram is the one carrying the extra crossings;
    ``local`` indexes them there and ``label_map`` sends the big diagram's
    persistent labels to the small diagram's. For R3 ``local`` and
    ``local_after`` index the triangle on either side, ``correspondence``
    pairs the crossings joining the same two strands and ``bottom`` names
    the crossing of the two lower strands before and after the move.
    """

    kind: str
    before: LinkDiagram
    after: LinkDiagram
    created: Tuple[int, ...] = ()
    removed: Tuple[int, ...] = ()
    sites: Tuple[int, ...] = ()
    survivors: Tuple[int, ...] = ()
    big_is_after: bool = False
    local: Tuple[int, ...] = ()
    local_after: Tuple[int, ...] = ()
    label_map: Dict[int, int] = field(default_factory=dict, compare=False)
    internal: FrozenSet[int] = frozenset()
    internal_after: FrozenSet[int] = frozenset()
    correspondence: Dict[int, int] = field(default_factory=dict, compare=False)
    bottom: Tuple[int, ...] = ()

    @property
    def big(self) -> LinkDiagram:
        return self.after if self.big_is_after else self.before

    @property
    def small(self) -> LinkDiagram:
        return self.before if self.big_is_after else self.after


# =============================================================================
# Helpers
# =============================================================================

def _finish(
    crossings: Sequence[Sequence[int]], over_in: Sequence[int], loops: Sequence[int]
) -> LinkDiagram:
    diagram = LinkDiagram(
        tuple(tuple(c) for c in crossings),  # type: ignore[misc]
        tuple(over_in),
        tuple(sorted(loops)),
    )
    try:
        return diagram.validate()
    except DiagramError as e:
        raise EventError(f"move produces an invalid diagram: {e}") from e


def _fresh(
    diagram: LinkDiagram,
    count: int,
    new: Optional[Sequence[int]],
    free: Sequence[int] = (),
) -> List[int]:
    """``count`` unused labels; ``free`` lists labels the move itself releases"""
    taken = set(diagram.labels) - set(free)
    if new is None:
        start = max(taken, default=0) + 1
        return list(range(start, start + count))
    labels = list(new)
    if len(labels) != count:
        raise EventError(f"expected {count} new labels, got {len(labels)}")
    if len(set(labels)) != len(labels) or any(lab < 1 for lab in labels):
        raise EventError(f"new labels must be distinct positive integers: {labels}")
    clash = [lab for lab in labels if lab in taken]
    if clash:
        raise EventError(f"new label {clash[0]} is already in use")
    return labels


def _require_label(diagram: LinkDiagram, label: int) -> None:
    if label not in diagram.slots and label not in diagram.loops:
        raise EventError(f"no edge or loop labelled {label}")


def _require_crossing(diagram: LinkDiagram, c: int) -> None:
    if not 0 <= c < len(diagram.crossings):
        total = len(diagram.crossings)
        raise EventError(f"no crossing {c}; frame has {total} crossings")


def _piece_of(diagram: LinkDiagram, label: int) -> Optional[int]:
    if label in diagram.loops:
        return None
    c = diagram.slots[label][0][0]
    for i, piece in enumerate(diagram.pieces()):
        if c in piece:
            return i
    return None


def _insert(
    crossings: List[List[int]],
    over_in: List[int],
    positions: Sequence[int],
    items: Sequence[Tuple[Tuple[int, ...], int]],
) -> None:
    total = len(crossings) + len(items)
    if len(positions) != len(items):
        raise EventError(
            f"expected {len(items)} crossing positions, got {len(positions)}"
        )
    out_of_range = any(not 0 <= p < total for p in positions)
    if len(set(positions)) != len(positions) or out_of_range:
        raise EventError(
            f"crossing positions {tuple(positions)} out of range for {total} crossings"
        )
    for k in sorted(range(len(items)), key=lambda k: positions[k]):
        crossings.insert(positions[k], list(items[k][0]))
        over_in.insert(positions[k], items[k][1])


def _assemble(ring: Sequence[Entry], over: int) -> Tuple[Tuple[int, ...], int]:
    """Rotate a counterclockwise slot ring so slot 0 is the incoming under-strand"""
    start = next(i for i, (_, inc, strand) in enumerate(ring) if inc and strand != over)
    rot = list(ring[start:]) + list(ring[:start])
    over_in = next(
        i for i, (_, inc, strand) in enumerate(rot) if inc and strand == over
    )
    return tuple(lab for lab, _, _ in rot), over_in


def _splice(
    diagram: LinkDiagram, removed: Set[int], joins: Sequence[Tuple[int, int]]
) -> Tuple[LinkDiagram, Dict[int, int]]:
    """Delete crossings and reconnect strands.

    Each join (p, q) fuses in-edge p with out-edge q.
    """
    graph = nx.Graph()
    for p, q in joins:
        graph.add_edge(p, q)
    starts = {p for p, _ in joins}
    keep = [c for c in range(len(diagram.crossings)) if c not in removed]
    present = {lab for c in keep for lab in diagram.crossings[c]}
    rename: Dict[int, int] = {}
    loops = list(diagram.loops)
    for comp in nx.connected_components(graph):
        rep = min(lab for lab in comp if lab in starts)
        for lab in comp:
            rename[lab] = rep
        if not comp & present:
            loops.append(rep)
    crossings = [[rename.get(lab, lab) for lab in diagram.crossings[c]] for c in keep]
    over_in = [diagram.over_in[c] for c in keep]
    return _finish(crossings, over_in, loops), rename


def _persistent_map(
    before: LinkDiagram, internal: Set[int], rename: Dict[int, int]
) -> Dict[int, int]:
    return {lab: rename.get(lab, lab) for lab in before.labels if lab not in internal}


# =============================================================================
# Births, deaths, saddles
# =============================================================================

def birth(
    diagram: LinkDiagram, label: Optional[int] = None, face: Optional[int] = None
) -> MoveResult:
    if face is not None and diagram.faces and not 0 <= face < len(diagram.faces):
        raise EventError(f"no face {face}; frame has {len(diagram.faces)} faces")
    if face is not None and not diagram.faces and face != 0:
        raise EventError("an empty frame has the single face 0")
    [lab] = _fresh(diagram, 1, None if label is None else [label])
    after = _finish(diagram.crossings, diagram.over_in, diagram.loops + (lab,))
    return MoveResult("birth", diagram, after, created=(lab,))


def death(diagram: LinkDiagram, label: int) -> MoveResult:
    if label not in diagram.loops:
        raise EventError(f"death needs a crossingless loop; {label} is not one")
    loops = [lab for lab in diagram.loops if lab != label]
    after = _finish(diagram.crossings, diagram.over_in, loops)
    return MoveResult("death", diagram, after, removed=(label,))


def saddle_faces(diagram: LinkDiagram, first: int, second: int) -> List[int]:
    """Faces that can hold a band between two edges.

    Edges of one connected piece need a common face they both traverse in
    the same direction; otherwise any face next to either edge will do.
    """
    if first == second:
        return sorted({f for f, _ in diagram.faces_of(first)})
    p1, p2 = _piece_of(diagram, first), _piece_of(diagram, second)
    if p1 is not None and p1 == p2:
        return [
            f.index
            for f in diagram.faces
            if set(f.sides_of(first)) & set(f.sides_of(second))
        ]
    near = {f for f, _ in diagram.faces_of(first)}
    return sorted(near | {f for f, _ in diagram.faces_of(second)})


def saddle(
    diagram: LinkDiagram,
    first: Site,
    second: Site,
    face: Optional[int] = None,
    new: Optional[int] = None,
) -> MoveResult:
    (a, ta), (b, tb) = first, second
    _require_label(diagram, a)
    _require_label(diagram, b)
    if a == b and ta == tb:
        raise EventError(f"saddle sites coincide ({a}@{ta})")
    valid = saddle_faces(diagram, a, b)
    if not valid:
        raise EventError(f"edges {a} and {b} share no face with compatible orientation")
    if face is not None and face not in valid:
        raise EventError(
            f"face {face} cannot hold a saddle between {a} and {b}; "
            f"valid faces: {valid}"
        )

    loops = list(diagram.loops)
    if a == b:
        [lab] = _fresh(diagram, 1, None if new is None else [new])
        after = _finish(diagram.crossings, diagram.over_in, loops + [lab])
        return MoveResult(
            "saddle", diagram, after, created=(lab,), sites=(a, b), survivors=(a, lab)
        )
    if new is not None:
        raise EventError("new= only applies to a saddle that splits off a loop")

    if a in diagram.loops or b in diagram.loops:
        gone = b if b in diagram.loops else a
        keep = a if gone == b else b
        loops.remove(gone)
        after = _finish(diagram.crossings, diagram.over_in, loops)
        return MoveResult(
            "saddle",
            diagram,
            after,
            removed=(gone,),
            sites=(a, b),
            survivors=(keep, keep),
        )

    crossings = [list(tup) for tup in diagram.crossings]
    (ca, sa), (cb, sb) = diagram.heads[a], diagram.heads[b]
    crossings[ca][sa] = b
    crossings[cb][sb] = a
    after = _finish(crossings, diagram.over_in, loops)
    return MoveResult("saddle", diagram, after, sites=(a, b), survivors=(a, b))


# =============================================================================
# Reidemeister I
# =============================================================================

def r1_plus(
    diagram: LinkDiagram,
    edge: int,
    side: str = "R",
    writhe: int = 1,
    new: Optional[Sequence[int]] = None,
    at: Optional[int] = None,
) -> MoveResult:
    """Add a kink on ``edge``, in the face to its right (R) or left (L)"""
    _require_label(diagram, edge)
    side = side.upper()
    if (side, writhe) not in KINKS:
        raise EventError(
            f"kink side must be L or R and writhe ±1, got {side} {writhe}"
        )
    is_loop = edge in diagram.loops
    fresh = _fresh(diagram, 1 if is_loop else 2, new)
    f = fresh[0]
    g = edge if is_loop else fresh[1]

    crossings = [list(tup) for tup in diagram.crossings]
    over_in = list(diagram.over_in)
    if not is_loop:
        c, s = diagram.heads[edge]
        crossings[c][s] = g
    pattern, o = KINKS[(side, writhe)]
    names = {"e": edge, "f": f, "g": g}
    pos = len(crossings) if at is None else at
    _insert(crossings, over_in, [pos], [(tuple(names[k] for k in pattern), o)])
    after = _finish(crossings, over_in, [lab for lab in diagram.loops if lab != edge])

    label_map = {lab: lab for lab in after.labels if lab not in (f, g)}
    label_map[g] = edge
    return MoveResult(
        "r1", diagram, after, created=tuple(fresh), big_is_after=True, local=(pos,),
        label_map=label_map, internal=frozenset({f}),
    )


def kink_slot(diagram: LinkDiagram, crossing: int) -> Optional[int]:
    """Slot s with the same label at s and s+1, if the crossing is a kink.

    On a lone curl both pairs repeat; the larger label is the kink.
    """
    tup = diagram.crossings[crossing]
    found = [s for s in range(4) if tup[s] == tup[(s + 1) % 4]]
    return max(found, key=lambda s: tup[s], default=None)


def r1_minus(diagram: LinkDiagram, crossing: int) -> MoveResult:
    _require_crossing(diagram, crossing)
    s = kink_slot(diagram, crossing)
    if s is None:
        raise EventError(f"crossing {crossing} is not a kink")
    tup = diagram.crossings[crossing]
    f = tup[s]
    rest = [t for t in range(4) if t not in (s, (s + 1) % 4)]
    s_in = next(t for t in rest if diagram.is_head_slot(crossing, t))
    s_out = next(t for t in rest if t != s_in)
    p, q = tup[s_in], tup[s_out]
    after, rename = _splice(diagram, {crossing}, [(p, q)])
    return MoveResult(
        "r1", diagram, after, removed=tuple(sorted({f, q} - {p})), local=(crossing,),
        label_map=_persistent_map(diagram, {f}, rename), internal=frozenset({f}),
    )


# =============================================================================
# Reidemeister II
# =============================================================================

def _pick_side(face: Face, label: int, wanted: Optional[bool]) -> bool:
    available = face.sides_of(label)
    if wanted is not None:
        if wanted not in available:
            how = "along" if wanted else "against"
            raise EventError(
                f"edge {label} is not traversed {how} on face {face.index}"
            )
        return wanted
    return True if True in available else False


def _r2_sides(
    diagram: LinkDiagram,
    e1: int,
    e2: int,
    face: Optional[int],
    sides: Optional[Tuple[Optional[bool], Optional[bool]]],
) -> Tuple[bool, bool]:
    wanted = sides or (None, None)
    if face is not None and not 0 <= face < len(diagram.faces):
        raise EventError(f"no face {face}; frame has {len(diagram.faces)} faces")
    p1, p2 = _piece_of(diagram, e1), _piece_of(diagram, e2)
    if p1 is not None and p1 == p2:
        options = [f for f in diagram.faces if f.sides_of(e1) and f.sides_of(e2)]
        if face is not None:
            options = [f for f in options if f.index == face]
        if not options:
            where = f" on face {face}" if face is not None else ""
            raise EventError(f"edges {e1} and {e2} do not share a face{where}")
        chosen = options[0]
        return _pick_side(chosen, e1, wanted[0]), _pick_side(chosen, e2, wanted[1])
    out = []
    for lab, want in ((e1, wanted[0]), (e2, wanted[1])):
        if face is not None and diagram.faces[face].sides_of(lab):
            out.append(_pick_side(diagram.faces[face], lab, want))
        else:
            out.append(True if want is None else want)
    return out[0], out[1]


def r2_plus(
    diagram: LinkDiagram,
    finger: int,
    target: int,
    over: int,
    face: Optional[int] = None,
    sides: Optional[Tuple[Optional[bool], Optional[bool]]] = None,
    new: Optional[Sequence[int]] = None,
    at: Optional[Sequence[int]] = None,
) -> MoveResult:
    """Push edge ``finger`` across edge ``target``.

    ``over`` is 1 when the finger passes over.

    Picture the shared face with the finger edge on top and the target edge
    at the bottom. The finger dips through the target, creating a left
    crossing P and a right crossing Q joined by the bigon edges m1 (finger)
    and m2 (target).
    """
    e1, e2 = finger, target
    _require_label(diagram, e1)
    _require_label(diagram, e2)
    if e1 == e2:
        raise EventError("a Reidemeister II move needs two distinct edges")
    if over not in (1, 2):
        raise EventError(f"over must be 1 (finger on top) or 2, got {over}")
    along1, along2 = _r2_sides(diagram, e1, e2, face, sides)
    loop1, loop2 = e1 in diagram.loops, e2 in diagram.loops
    fresh = iter(_fresh(diagram, 4 - loop1 - loop2, new))
    m1 = next(fresh)
    n1 = e1 if loop1 else next(fresh)
    m2 = next(fresh)
    n2 = e2 if loop2 else next(fresh)

    crossings = [list(tup) for tup in diagram.crossings]
    over_in = list(diagram.over_in)
    for lab, renamed, is_loop in ((e1, n1, loop1), (e2, n2, loop2)):
        if not is_loop:
            c, s = diagram.heads[lab]
            crossings[c][s] = renamed

    left: Dict[str, Entry] = {}
    right: Dict[str, Entry] = {}
    if along1:  # finger runs east along the top, dips at P first
        left["N"], left["S"] = (e1, True, 1), (m1, False, 1)
        right["S"], right["N"] = (m1, True, 1), (n1, False, 1)
    else:
        right["N"], right["S"] = (e1, True, 1), (m1, False, 1)
        left["S"], left["N"] = (m1, True, 1), (n1, False, 1)
    if along2:  # target runs west along the bottom, meets Q first
        right["E"], right["W"] = (e2, True, 2), (m2, False, 2)
        left["E"], left["W"] = (m2, True, 2), (n2, False, 2)
    else:
        left["W"], left["E"] = (e2, True, 2), (m2, False, 2)
        right["W"], right["E"] = (m2, True, 2), (n2, False, 2)
    built = [_assemble([ring[d] for d in COMPASS], over) for ring in (left, right)]
    positions = tuple(at) if at is not None else (len(crossings), len(crossings) + 1)
    _insert(crossings, over_in, positions, built)
    loops = [lab for lab in diagram.loops if lab not in (e1, e2)]
    after = _finish(crossings, over_in, loops)

    label_map = {lab: lab for lab in after.labels if lab not in (m1, m2)}
    label_map[n1] = e1
    label_map[n2] = e2
    created = tuple(lab for lab in (m1, n1, m2, n2) if lab not in (e1, e2))
    return MoveResult(
        "r2", diagram, after, created=created, big_is_after=True, local=positions,
        label_map=label_map, internal=frozenset({m1, m2}),
    )


def is_r2_bigon(diagram: LinkDiagram, face: Face, c1: int, c2: int) -> bool:
    """Bigon between two crossings, one side over at both ends, the other under"""
    if len(face.darts) != 2 or {face.darts[0][0], face.darts[1][0]} != {c1, c2}:
        return False
    (x, _), (y, _) = face.edges
    if x == y:
        return False
    over = [all(s % 2 == 1 for _, s in diagram.slots[lab]) for lab in (x, y)]
    under = [all(s % 2 == 0 for _, s in diagram.slots[lab]) for lab in (x, y)]
    return (over[0] and under[1]) or (over[1] and under[0])


def r2_minus(
    diagram: LinkDiagram, c1: int, c2: int, face: Optional[int] = None
) -> MoveResult:
    _require_crossing(diagram, c1)
    _require_crossing(diagram, c2)
    if c1 == c2:
        raise EventError("a Reidemeister II move needs two distinct crossings")
    if diagram.crossing_signs[c1] == diagram.crossing_signs[c2]:
        raise EventError(f"crossings {c1} and {c2} have equal signs")
    bigons = [f for f in diagram.faces if is_r2_bigon(diagram, f, c1, c2)]
    if face is not None:
        bigons = [f for f in bigons if f.index == face]
    if not bigons:
        where = f" on face {face}" if face is not None else ""
        raise EventError(
            f"crossings {c1} and {c2} do not bound a Reidemeister II bigon{where}"
        )
    (x, _), (y, _) = bigons[0].edges
    joins = []
    for lab in (x, y):
        (ct, st), (ch, sh) = diagram.tails[lab], diagram.heads[lab]
        joins.append(
            (
                diagram.crossings[ct][(st + 2) % 4],
                diagram.crossings[ch][(sh + 2) % 4],
            )
        )
    after, rename = _splice(diagram, {c1, c2}, joins)
    removed = tuple(sorted(set(diagram.labels) - set(after.labels)))
    return MoveResult(
        "r2", diagram, after, removed=removed, local=(c1, c2),
        label_map=_persistent_map(diagram, {x, y}, rename), internal=frozenset({x, y}),
    )


# =============================================================================
# Reidemeister III
# =============================================================================

def triangle(diagram: LinkDiagram, c1: int, c2: int, c3: int) -> Optional[Face]:
    for f in diagram.faces:
        if len(f.darts) == 3 and {c for c, _ in f.darts} == {c1, c2, c3}:
            return f
    return None


def r3(
    diagram: LinkDiagram,
    c1: int,
    c2: int,
    c3: int,
    new: Optional[Sequence[int]] = None,
    at: Optional[Sequence[int]] = None,
) -> MoveResult:
    """Slide the strand that passes over both others across the opposite crossing.

    The six edges leaving the triangle are listed counterclockwise as
    E0..E5; strand k joins E_k to E_{k+3}. Before the move the crossings
    pair the ends as (E0,E1), (E2,E3), (E4,E5); afterwards as (E1,E2),
    (E3,E4), (E5,E0). ``new`` gives the labels of the three inner edges,
    strand by strand; by default every strand keeps its own.
    """
    triple = (c1, c2, c3)
    for c in triple:
        _require_crossing(diagram, c)
    if len(set(triple)) != 3:
        raise EventError("a Reidemeister III move needs three distinct crossings")
    face = triangle(diagram, *triple)
    if face is None:
        raise EventError(f"crossings {c1}, {c2}, {c3} do not bound a triangular face")

    d0, d1, d2 = face.darts
    ends = []
    for c, s in (d0, d2, d1):
        for t in ((s + 1) % 4, (s + 2) % 4):
            ends.append((c, t))

    ranks: List[int] = []
    inner: List[int] = []
    for k in range(3):
        c, t = ends[k]
        c_far, s_far = diagram.other_end(c, (t + 2) % 4)
        if (c_far, (s_far + 2) % 4) != ends[k + 3]:
            raise EventError("the strands around the triangle do not cross pairwise")
        inner.append(diagram.crossings[c][(t + 2) % 4])
        ranks.append((t % 2) + (s_far % 2))
    if sorted(ranks) != [0, 1, 2]:
        raise EventError("no strand passes over both others")

    labels = _fresh(diagram, 3, new, free=inner) if new is not None else inner
    outside = [
        (diagram.crossings[c][t], diagram.is_head_slot(c, t), k % 3)
        for k, (c, t) in enumerate(ends)
    ]

    def inner_entry(strand: int, external: int) -> Entry:
        return labels[strand], not outside[external][1], strand

    rings = [
        [outside[1], outside[2], inner_entry(1, 1), inner_entry(2, 2)],
        [inner_entry(0, 3), inner_entry(1, 4), outside[3], outside[4]],
        [outside[0], inner_entry(2, 5), inner_entry(0, 0), outside[5]],
    ]
    built = []
    for ring in rings:
        strands = {entry[2] for entry in ring}
        built.append(_assemble(ring, max(strands, key=lambda k: ranks[k])))

    positions = tuple(at) if at is not None else tuple(sorted(triple))
    if sorted(positions) != sorted(triple):
        raise EventError(
            f"R3 positions {positions} must reuse crossings {sorted(triple)}"
        )
    crossings = [list(tup) for tup in diagram.crossings]
    over_in = list(diagram.over_in)
    for pos, (tup, o) in zip(positions, built):
        crossings[pos] = list(tup)
        over_in[pos] = o
    after = _finish(crossings, over_in, diagram.loops)

    # strand pairs meeting at each crossing, before and after
    pairs_before = {d0[0]: {0, 1}, d2[0]: {2, 0}, d1[0]: {1, 2}}
    pairs_after = {positions[0]: {1, 2}, positions[1]: {0, 1}, positions[2]: {0, 2}}
    correspondence = {
        c: next(p for p, strands in pairs_after.items() if strands == pair)
        for c, pair in pairs_before.items()
    }
    top = ranks.index(2)
    low = next(c for c, pair in pairs_before.items() if top not in pair)
    return MoveResult(
        "r3",
        diagram,
        after,
        local=tuple(sorted(triple)),
        local_after=tuple(sorted(triple)),
        label_map={lab: lab for lab in diagram.labels if lab not in inner},
        internal=frozenset(inner), internal_after=frozenset(labels),
        correspondence=correspondence, bottom=(low, correspondence[low]),
    )


def relabel(diagram: LinkDiagram, mapping: Dict[int, int]) -> MoveResult:
    for lab in mapping:
        _require_label(diagram, lab)
    full = {lab: mapping.get(lab, lab) for lab in diagram.labels}
    if len(set(full.values())) != len(full) or any(v < 1 for v in full.values()):
        raise EventError(f"relabel {mapping} is not a bijection onto positive labels")
    after = diagram.relabeled(full)
    try:
        after.validate()
    except DiagramError as e:
        raise EventError(str(e)) from e
    return MoveResult("relabel", diagram, after, label_map=full)
