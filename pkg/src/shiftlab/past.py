"""Predecessor sets, past equivalence and the groupoid classification flags.

The past of a tail ``y`` is stored as the vertex set ``V(y)`` of vertices
that can read ``y``; its predecessor language is the set of labels of
paths ending in ``V(y)``.  Two vertex sets are identified when those
languages agree, which is decided on the minimized backward subset
automaton.

Claims that quantify over every point (singleton classes, condition (I))
are decided with the *relation automaton*: its states are the relations
``R_w = {(v, t) : a path labeled w runs from v to t}``.  Along any point
``y`` the domains ``D(R_w)`` decrease to ``V(y)``.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import networkx as nx

from .presentation import (
    EvPerPoint,
    Presentation,
    Word,
    format_word,
    periodic_points_up_to,
    readable_from,
    trim,
)


def language_id(p: Presentation, S: frozenset[str]) -> tuple:
    """Canonical encoding of the minimized automaton of {μ : μ ends in S}.

    Reading is right to left.  Equal ids iff equal predecessor languages.
    """
    alphabet = p.alphabet
    states, index = [S], {S: 0}
    trans = []
    i = 0
    while i < len(states):
        T = states[i]
        row = []
        for a in alphabet:
            U = p.backward(T, a)
            if U not in index:
                index[U] = len(states)
                states.append(U)
            row.append(index[U])
        trans.append(row)
        i += 1
    # Moore refinement, accepting = nonempty set
    block = [1 if T else 0 for T in states]
    while True:
        sig = [(block[k],) + tuple(block[j] for j in trans[k]) for k in range(len(states))]
        ids: dict = {}
        new = [ids.setdefault(s, len(ids)) for s in sig]
        if len(ids) == len(set(block)):
            break
        block = new
    # renumber blocks by BFS from the start so the encoding is canonical
    order = {block[0]: 0}
    queue = deque([0])
    rows = {}
    while queue:
        k = queue.popleft()
        b = block[k]
        if b in rows:
            continue
        rows[b] = trans[k]
        for j in trans[k]:
            if block[j] not in order:
                order[block[j]] = len(order)
                queue.append(j)
    rep_accept = {block[k]: bool(states[k]) for k in range(len(states))}
    return tuple(
        (rep_accept[b], tuple(order[block[j]] for j in rows[b]))
        for b in sorted(order, key=order.get)
    )


@dataclass(frozen=True)
class PastState:
    """Predecessor language of a tail, carried by a vertex set."""

    presentation: Presentation = field(compare=False, repr=False)
    vertex_set: frozenset[str] = field(compare=False)
    language: tuple = field(repr=False)

    def __repr__(self) -> str:
        return f"PastState({{{','.join(sorted(self.vertex_set))}}})"


def make_state(p: Presentation, S: frozenset[str]) -> PastState:
    return PastState(p, frozenset(S), language_id(p, frozenset(S)))


def past_state(p: Presentation, x: EvPerPoint) -> PastState:
    core = trim(p)
    S = readable_from(core, x)
    if not S:
        raise ValueError(f"{x} is not a point of the shift")
    return make_state(core, S)


def update(s: PastState, a: str) -> PastState | None:
    """Past of ``a·y`` given the past of ``y`` (None if inadmissible)."""
    T = s.presentation.backward(s.vertex_set, a)
    return make_state(s.presentation, T) if T else None


def predecessor_words(s: PastState, l: int) -> set[Word]:
    """Words μ of length l with a path labeled μ ending in the state's vertex set."""
    p = s.presentation
    out: set[Word] = set()

    def rec(S, suffix):
        if len(suffix) == l:
            out.add(suffix)
            return
        for a in p.alphabet:
            T = p.backward(S, a)
            if T:
                rec(T, (a,) + suffix)

    rec(s.vertex_set, ())
    return out


def truncated_past(s: PastState, l: int) -> frozenset[Word]:
    """The union of predecessor sets of lengths 0..l."""
    return frozenset(w for n in range(l + 1) for w in predecessor_words(s, n))


# ---------------------------------------------------------------------------
# the relation automaton and realized pasts


@dataclass
class PastAnalysis:
    presentation: Presentation
    index: dict[str, int]
    start: tuple
    states: list[tuple]
    delta: dict[tuple[tuple, str], tuple]
    domain: dict[tuple, frozenset[str]]
    core_of: dict[frozenset[str], frozenset[tuple]]
    classes: list[PastState]
    class_of_set: dict[frozenset[str], int]
    representative: dict[int, EvPerPoint]
    parent: dict[tuple, tuple[tuple, str] | None]

    def class_index(self, s: PastState) -> int:
        for i, q in enumerate(self.classes):
            if q == s:
                return i
        raise KeyError(f"{s} is not a realized past")

    def successors(self, R) -> Iterator[tuple[str, tuple]]:
        for a in self.presentation.alphabet:
            T = self.delta.get((R, a))
            if T is not None:
                yield a, T

    def word_to(self, R) -> Word:
        w = []
        while self.parent[R] is not None:
            R, a = self.parent[R]
            w.append(a)
        return tuple(reversed(w))


@lru_cache(maxsize=256)
def analyze(p: Presentation) -> PastAnalysis:
    core = trim(p)
    verts = core.vertices
    index = {v: i for i, v in enumerate(verts)}
    start = tuple(frozenset({v}) for v in verts)
    states, delta, parent = [start], {}, {start: None}
    queue = deque([start])
    while queue:
        R = queue.popleft()
        for a in core.alphabet:
            T = tuple(core.forward(row, a) for row in R)
            if not any(T):
                continue
            delta[R, a] = T
            if T not in parent:
                parent[T] = (R, a)
                states.append(T)
                queue.append(T)
    domain = {R: frozenset(verts[i] for i, row in enumerate(R) if row) for R in states}
    groups: dict[frozenset[str], set] = defaultdict(set)
    for R in states:
        groups[domain[R]].add(R)
    core_of = {}
    for S, G in groups.items():
        C = set(G)
        changed = True
        while changed:
            changed = False
            for R in list(C):
                if not any(delta.get((R, a)) in C for a in core.alphabet):
                    C.discard(R)
                    changed = True
        if C:
            core_of[S] = frozenset(C)

    by_lang: dict[tuple, list[frozenset[str]]] = {}
    for S in core_of:
        by_lang.setdefault(language_id(core, S), []).append(S)
    langs = sorted(by_lang)
    classes, class_of_set, representative = [], {}, {}
    for i, L in enumerate(langs):
        sets = sorted(by_lang[L], key=lambda S: (len(S), sorted(S)))
        classes.append(PastState(core, sets[0], L))
        for S in sets:
            class_of_set[S] = i
    if len(classes) > 2 ** len(verts):
        raise AssertionError("more past states than vertex subsets")
    an = PastAnalysis(core, index, start, states, delta, domain, core_of, classes, class_of_set, {}, parent)
    for i, q in enumerate(classes):
        an.representative[i] = _realize(an, q.vertex_set)
    an.representative.update(representative)
    return an


def _realize(an: PastAnalysis, S: frozenset[str]) -> EvPerPoint:
    C = an.core_of[S]
    # shortest entry into C, then walk inside C until a state repeats
    R = min(C, key=lambda R: (len(an.word_to(R)), an.word_to(R)))
    head = an.word_to(R)
    seen, walk = {}, []
    while R not in seen:
        seen[R] = len(walk)
        a, R = next((a, T) for a, T in an.successors(R) if T in C)
        walk.append(a)
    i = seen[R]
    x = EvPerPoint(head + tuple(walk[:i]), tuple(walk[i:]))
    assert readable_from(an.presentation, x) == S
    return x


def realized_pasts(p: Presentation) -> list[PastState]:
    """Language-distinct pasts of actual tails, in canonical order."""
    return list(analyze(p).classes)


def representative_point(p: Presentation, s: PastState) -> EvPerPoint:
    an = analyze(p)
    return an.representative[an.class_index(s)]


def points_with_past(p: Presentation, classes: set[int]) -> tuple[bool, EvPerPoint | None]:
    """Is {y : past(y) in classes} a single point?  Returns (singleton, point).

    The accepted runs of the relation automaton are those that eventually
    stay in the core of a group ``D(R) = S`` with S in one of the classes.
    """
    an = analyze(p)
    target = set()
    for S, C in an.core_of.items():
        if an.class_of_set[S] in classes:
            target |= C
    # W = states that can reach the target
    rev = defaultdict(set)
    for (R, _), T in an.delta.items():
        rev[T].add(R)
    W = set(target)
    queue = deque(target)
    while queue:
        T = queue.popleft()
        for R in rev[T]:
            if R not in W:
                W.add(R)
                queue.append(R)
    if an.start not in W:
        return False, None
    R, seen, path = an.start, {}, []
    while R not in seen:
        seen[R] = len(path)
        nxt = [(a, T) for a, T in an.successors(R) if T in W]
        if len(nxt) != 1:
            return False, None
        a, R = nxt[0]
        path.append(a)
    i = seen[R]
    return True, EvPerPoint(tuple(path[:i]), tuple(path[i:]))


# ---------------------------------------------------------------------------
# l-past partitions and isolation


@dataclass(frozen=True)
class PastBlock:
    states: tuple[PastState, ...]
    representative: EvPerPoint


def _refine(an: PastAnalysis, l: int) -> list[int]:
    """Block labels of realized classes by truncated past of depth l."""
    n = len(an.classes)
    upd = [[None] * len(an.presentation.alphabet) for _ in range(n)]
    for i, q in enumerate(an.classes):
        for k, a in enumerate(an.presentation.alphabet):
            T = an.presentation.backward(q.vertex_set, a)
            if T:
                upd[i][k] = an.class_index(make_state(an.presentation, T))
    block = [0] * n
    for _ in range(l):
        sig = [(block[i],) + tuple(-1 if j is None else block[j] for j in upd[i]) for i in range(n)]
        ids: dict = {}
        new = [ids.setdefault(s, len(ids)) for s in sig]
        if new == block or len(ids) == len(set(block)):
            block = new
            break
        block = new
    return block


def stabilization_depth(p: Presentation) -> int:
    an = analyze(p)
    l = 0
    while len(set(_refine(an, l))) < len(an.classes):
        l += 1
        if l > len(an.classes):
            raise AssertionError("past partition failed to stabilize")
    return l


def l_past_partition(p: Presentation, l: int) -> list[PastBlock]:
    an = analyze(p)
    block = _refine(an, l)
    groups = defaultdict(list)
    for i, b in enumerate(block):
        groups[b].append(i)
    return [
        PastBlock(tuple(an.classes[i] for i in idx), an.representative[idx[0]])
        for _, idx in sorted(groups.items())
    ]


def is_isolated_in_past_equivalence(p: Presentation, x: EvPerPoint) -> tuple[bool, int | None]:
    """(True, least l) if the depth-l past class of x is {x}, else (False, None)."""
    an = analyze(p)
    q = an.class_index(past_state(p, x))
    depth = stabilization_depth(p)
    for l in range(depth + 1):
        block = _refine(an, l)
        members = {i for i, b in enumerate(block) if b == block[q]}
        single, y = points_with_past(p, members)
        if single:
            assert y == x
            return True, l
    return False, None


# ---------------------------------------------------------------------------
# (k, l) classes


@dataclass(frozen=True)
class KlClass:
    k: int
    l: int
    prefix: Word
    truncated_past: frozenset[Word]

    def __post_init__(self):
        if self.k > self.l:
            raise ValueError("need k <= l")


def kl_class(p: Presentation, x: EvPerPoint, k: int, l: int) -> KlClass:
    return KlClass(k, l, x.prefix(k), truncated_past(past_state(p, x.shift(k)), l))


# ---------------------------------------------------------------------------
# classification


@dataclass
class GroupoidFlags:
    principal: bool
    effective: bool
    condition_I: bool
    dense_aperiodic: bool
    witnesses: dict[str, list] = field(default_factory=dict)

    def check_chain(self) -> None:
        assert not self.condition_I or self.effective
        assert not self.effective or self.dense_aperiodic
        assert not self.principal or self.effective

    def to_json(self) -> dict:
        def enc(w):
            return w.to_json() if isinstance(w, EvPerPoint) else w

        return {
            "principal": self.principal,
            "effective": self.effective,
            "condition_I": self.condition_I,
            "dense_aperiodic": self.dense_aperiodic,
            "witnesses": {k: [enc(w) for w in v] for k, v in self.witnesses.items()},
        }


def isolated_points(p: Presentation) -> list[EvPerPoint]:
    """Every point isolated in past equivalence (there are finitely many)."""
    an = analyze(p)
    out = []
    for i in range(len(an.classes)):
        single, y = points_with_past(p, {i})
        if single:
            out.append(y)
    return out


def _dense_aperiodic(p: Presentation) -> tuple[bool, Word | None]:
    dfa = trim(p).follower_dfa
    g = nx.MultiDiGraph()
    g.add_nodes_from(dfa.states)
    for (S, a), T in dfa.delta.items():
        g.add_edge(S, T, label=a)
    rich = set()
    for comp in nx.strongly_connected_components(g):
        inner = sum(1 for u, v in g.subgraph(comp).edges())
        if inner > len(comp):
            rich |= comp
    for S in dfa.states:
        if not any(T in rich for T in nx.descendants(g, S) | {S}):
            w = _word_to(dfa, S)
            return False, w
    return True, None


def _word_to(dfa, target) -> Word:
    parent = {dfa.start: None}
    queue = deque([dfa.start])
    while queue:
        S = queue.popleft()
        if S == target:
            break
        for a in dfa.presentation.alphabet:
            T = dfa.delta.get((S, a))
            if T is not None and T not in parent:
                parent[T] = (S, a)
                queue.append(T)
    w = []
    S = target
    while parent[S] is not None:
        S, a = parent[S]
        w.append(a)
    return tuple(reversed(w))


def classify(p: Presentation) -> GroupoidFlags:
    core = trim(p)
    witnesses: dict[str, list] = {}
    periodic = periodic_points_up_to(core, max(1, len(core.follower_dfa.states)))
    principal = not periodic
    if periodic:
        witnesses["principal"] = [periodic[0]]
    iso = isolated_points(core)
    condition_I = not iso
    iso_periodic = [y for y in iso if y.is_periodic]
    effective = not iso_periodic
    if iso:
        witnesses["condition_I"] = iso
    if iso_periodic:
        witnesses["effective"] = iso_periodic
    dense, w = _dense_aperiodic(core)
    if not dense:
        witnesses["dense_aperiodic"] = [format_word(w)]
    flags = GroupoidFlags(principal, effective, condition_I, dense, witnesses)
    flags.check_chain()
    return flags
