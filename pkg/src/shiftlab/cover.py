"""The cover of a sofic shift as a labeled graph.

Vertices are the realized pasts; an edge ``q --a--> q'`` records that a
tail with past ``q'`` extends by ``a`` to a tail with past ``q``.  The path
space of this graph is the cover and reading labels is the factor map.
Cover points are eventually periodic edge sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from .past import PastState, analyze, make_state, past_state, stabilization_depth, truncated_past
from .presentation import EvPerPoint, Presentation, Word, find_isomorphism, format_word, trim


@dataclass(frozen=True)
class CoverGraph:
    base: Presentation
    names: tuple[str, ...]
    states: tuple[PastState, ...]
    edges: tuple[tuple[str, str, str], ...]  # (source, target, base label)

    @cached_property
    def index(self) -> dict[str, int]:
        return {q: i for i, q in enumerate(self.names)}

    @cached_property
    def presentation(self) -> Presentation:
        return Presentation(self.base.alphabet, self.names, self.edges, name=f"cover({self.base.name})")

    @cached_property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(f"{s}.{a}.{t}" for s, t, a in self.edges)

    @cached_property
    def factor(self) -> dict[str, str]:
        """Edge id -> base label."""
        return {eid: e[2] for eid, e in zip(self.edge_ids, self.edges)}

    @cached_property
    def edge_of(self) -> dict[str, tuple[str, str, str]]:
        return dict(zip(self.edge_ids, self.edges))

    @cached_property
    def edge_presentation(self) -> Presentation:
        """The cover as an edge shift: one symbol per edge."""
        return Presentation(
            self.edge_ids,
            self.names,
            tuple((s, t, eid) for eid, (s, t, _) in zip(self.edge_ids, self.edges)),
            name=f"cover_edges({self.base.name})",
        )

    @cached_property
    def upd(self) -> dict[tuple[str, str], str]:
        """(label, target) -> source."""
        return {(a, t): s for s, t, a in self.edges}

    def edge_id(self, s: str, a: str, t: str) -> str:
        return f"{s}.{a}.{t}"

    def state_name(self, s: PastState) -> str:
        for n, q in zip(self.names, self.states):
            if q == s:
                return n
        raise KeyError(f"{s} is not a cover vertex")

    def adjacency(self) -> list[list[int]]:
        return self.presentation.adjacency()

    def to_json(self) -> dict:
        depth = stabilization_depth(self.base)
        return {
            "format": "shiftlab/1",
            "alphabet": list(self.base.alphabet),
            "vertices": list(self.names),
            "edges": [{"from": s, "to": t, "label": a} for s, t, a in self.edges],
            "annotations": {
                n: {
                    "vertex_set": sorted(q.vertex_set),
                    "truncated_past": sorted(format_word(w) for w in truncated_past(q, depth)),
                }
                for n, q in zip(self.names, self.states)
            },
        }


@dataclass(frozen=True)
class CoverPoint:
    """A path in the cover, stored as an eventually periodic edge sequence."""

    cover: CoverGraph = field(compare=False, repr=False)
    path: EvPerPoint

    @property
    def base_point(self) -> EvPerPoint:
        return self.path.map_symbols(self.cover.factor.__getitem__)

    def state(self, n: int) -> str:
        return self.cover.edge_of[self.path.symbol(n)][0]

    def states(self, n: int) -> tuple[str, ...]:
        return tuple(self.state(i) for i in range(n))

    def __str__(self) -> str:
        mu = " ".join(self.path.transient)
        al = " ".join(self.path.cycle)
        return f"[{mu} ({al})^∞]"


def build_cover(p: Presentation) -> CoverGraph:
    core = trim(p)
    an = analyze(core)
    names = tuple(f"q{i}" for i in range(len(an.classes)))
    edges = []
    for j, q in enumerate(an.classes):
        for a in core.alphabet:
            T = core.backward(q.vertex_set, a)
            if T:
                i = an.class_index(make_state(core, T))
                edges.append((names[i], names[j], a))
    edges.sort(key=lambda e: (int(e[0][1:]), e[2], int(e[1][1:])))
    return CoverGraph(core, names, tuple(an.classes), tuple(edges))


def factor_image(c: CoverGraph, xt: CoverPoint) -> EvPerPoint:
    return xt.base_point


def shift_cover(c: CoverGraph, xt: CoverPoint, n: int = 1) -> CoverPoint:
    return CoverPoint(c, xt.path.shift(n))


def _upd_word(c: CoverGraph, w: Word, q: str) -> list[str] | None:
    """States q_0..q_|w| with q_|w| = q along the backward update; None if stuck."""
    seq = [q]
    for a in reversed(w):
        s = c.upd.get((a, seq[-1]))
        if s is None:
            return None
        seq.append(s)
    return list(reversed(seq))


def _path(c: CoverGraph, w: Word, states: list[str]) -> tuple[str, ...]:
    return tuple(c.edge_id(states[i], a, states[i + 1]) for i, a in enumerate(w))


def lift_point(c: CoverGraph, x: EvPerPoint) -> set[CoverPoint]:
    """Every eventually periodic cover point over x.

    A lift over ``α^∞`` is a backward orbit of the partial map
    ``F(q) = update(α, q)``; those are exactly the periodic points of F.
    """
    mu, alpha = x.transient, x.cycle

    def F(q):
        seq = _upd_word(c, alpha, q)
        return None if seq is None else seq[0]

    def returns(q):
        r = F(q)
        for _ in range(len(c.names)):
            if r is None or r == q:
                break
            r = F(r)
        return r == q

    periodic = [q for q in c.names if returns(q)]
    lifts = set()
    for r0 in periodic:
        # the periodic chain r0, r1 = F^{-1}(r0), ... back to r0
        chain = [r0]
        while True:
            prev = [r for r in periodic if F(r) == chain[-1]]
            assert len(prev) == 1
            if prev[0] == r0:
                break
            chain.append(prev[0])
        # positions |mu| + k|alpha| carry chain[k]; build one full period
        cyc: list[str] = []
        t = len(chain)
        for k in range(t):
            seq = _upd_word(c, alpha, chain[(k + 1) % t])
            assert seq[0] == chain[k]
            cyc.extend(_path(c, alpha, seq))
        head = _upd_word(c, mu, r0)
        if head is None:
            continue
        lifts.add(CoverPoint(c, EvPerPoint(_path(c, mu, head), tuple(cyc))))
    return lifts


def iota(c: CoverGraph, x: EvPerPoint) -> CoverPoint:
    """The lift whose states are the actual pasts of the tails of x."""
    n = len(x.transient) + len(x.cycle)
    states = [c.state_name(past_state(c.base, x.shift(i))) for i in range(n + 1)]
    w = x.prefix(n)
    edges = _path(c, w, states)
    return CoverPoint(c, EvPerPoint(edges[: len(x.transient)], edges[len(x.transient):]))


def unique_path_vertices(c: CoverGraph) -> set[str]:
    """Vertices from which exactly one infinite path leaves."""
    g = c.presentation
    U = {v for v in g.vertices if g.out_degree[v] == 1}
    changed = True
    while changed:
        changed = False
        for v in list(U):
            t = next(t for s, t, _ in g.edges if s == v)
            if t not in U:
                U.discard(v)
                changed = True
    return U


def is_isolated_cover_point(c: CoverGraph, xt: CoverPoint) -> bool:
    U = unique_path_vertices(c)
    n = len(xt.path.transient) + len(xt.path.cycle)
    return any(xt.state(i) in U for i in range(n + 1))


def cover_isolated_points(c: CoverGraph, max_prefix: int = 0) -> set[CoverPoint]:
    """Isolated cover points that enter the unique-path region within ``max_prefix`` steps.

    Every isolated point is a finite path into that region followed by
    its forced continuation, so ``max_prefix = 0`` lists the roots.
    """
    U = unique_path_vertices(c)
    g = c.presentation
    out_edge = {}
    for s, t, a in g.edges:
        if s in U:
            out_edge[s] = (s, t, a)

    def forced(v):
        seen, path = {}, []
        while v not in seen:
            seen[v] = len(path)
            s, t, a = out_edge[v]
            path.append(c.edge_id(s, a, t))
            v = t
        i = seen[v]
        return tuple(path[:i]), tuple(path[i:])

    found = set()

    def rec(v, prefix):
        if v in U:
            head, cyc = forced(v)
            found.add(CoverPoint(c, EvPerPoint(prefix + head, cyc)))
            return
        if len(prefix) == max_prefix:
            return
        for s, t, a in g.edges:
            if s == v:
                rec(t, prefix + (c.edge_id(s, a, t),))

    for v in g.vertices:
        rec(v, ())
    return found


def graph_isomorphic(
    g1: CoverGraph | Presentation, g2: CoverGraph | Presentation, label_map: Mapping[str, str] | None = None
) -> dict[str, str] | None:
    def unwrap(g):
        return g.presentation if isinstance(g, CoverGraph) else g

    return find_isomorphism(unwrap(g1), unwrap(g2), label_map)
