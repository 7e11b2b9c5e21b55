"""Labeled-graph presentations of one-sided sofic shifts.

A presentation is a finite directed graph whose edges carry symbols.  Its
shift space is the set of label sequences of right-infinite paths.  Words
are tuples of symbol strings; eventually periodic points are `EvPerPoint`.
"""

from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

Word = tuple[str, ...]
Edge = tuple[str, str, str]  # (source, target, label)


class EmptyShiftError(ValueError):
    """Raised when a construction would present the empty shift."""


def as_word(w: str | Sequence[str]) -> Word:
    """Coerce a string to a word: space-separated symbols, else one symbol per character."""
    if isinstance(w, str):
        return tuple(w.split()) if " " in w else tuple(w)
    return tuple(w)


def format_word(w: Sequence[str]) -> str:
    if all(len(s) == 1 for s in w):
        return "".join(w)
    return " ".join(w)


# ---------------------------------------------------------------------------
# eventually periodic points


def _primitive_root(cycle: Word) -> Word:
    n = len(cycle)
    for d in range(1, n + 1):
        if n % d == 0 and cycle[:d] * (n // d) == cycle:
            return cycle[:d]
    return cycle


@dataclass(frozen=True, order=True)
class EvPerPoint:
    """The point ``transient · cycle^∞`` in canonical form.

    Canonical form has a primitive cycle and the shortest possible
    transient, so two instances are equal exactly when they denote the
    same sequence.
    """

    transient: Word
    cycle: Word

    def __post_init__(self):
        mu, alpha = tuple(self.transient), _primitive_root(tuple(self.cycle))
        if not alpha:
            raise ValueError("cycle must be nonempty")
        while mu and mu[-1] == alpha[-1]:
            mu = mu[:-1]
            alpha = alpha[-1:] + alpha[:-1]
        object.__setattr__(self, "transient", mu)
        object.__setattr__(self, "cycle", alpha)

    @classmethod
    def parse(cls, text: str) -> "EvPerPoint":
        """Parse ``"1(34)"``, ``"1(34)^∞"`` or, with spaces, ``"a' (b' c')"``."""
        text = text.strip().replace("^∞", "").replace("^inf", "")
        head, _, rest = text.partition("(")
        if not rest.endswith(")"):
            raise ValueError(f"cannot parse point {text!r}")
        body = rest[:-1]
        if " " in text:
            return cls(tuple(head.split()), tuple(body.split()))
        return cls(tuple(head), tuple(body))

    @classmethod
    def periodic(cls, cycle: str | Sequence[str]) -> "EvPerPoint":
        return cls((), as_word(cycle))

    def __str__(self) -> str:
        return f"{format_word(self.transient)}({format_word(self.cycle)})^∞"

    def __repr__(self) -> str:
        return f"EvPerPoint({self})"

    @property
    def is_periodic(self) -> bool:
        return not self.transient

    def symbol(self, i: int) -> str:
        m = len(self.transient)
        if i < m:
            return self.transient[i]
        return self.cycle[(i - m) % len(self.cycle)]

    def prefix(self, n: int) -> Word:
        return tuple(self.symbol(i) for i in range(n))

    def shift(self, n: int = 1) -> "EvPerPoint":
        mu, alpha = self.transient, self.cycle
        if n <= len(mu):
            return EvPerPoint(mu[n:], alpha)
        r = (n - len(mu)) % len(alpha)
        return EvPerPoint((), alpha[r:] + alpha[:r])

    def prepend(self, w: Sequence[str]) -> "EvPerPoint":
        return EvPerPoint(tuple(w) + self.transient, self.cycle)

    def map_symbols(self, fn) -> "EvPerPoint":
        return EvPerPoint(tuple(map(fn, self.transient)), tuple(map(fn, self.cycle)))

    def to_json(self) -> dict:
        return {"transient": format_word(self.transient), "cycle": format_word(self.cycle)}


def shift_point(x: EvPerPoint, n: int = 1) -> EvPerPoint:
    return x.shift(n)


def lp(x: EvPerPoint) -> int:
    """Least eventual period."""
    return len(x.cycle)


def stabilizer(x: EvPerPoint) -> int:
    """Generator ``g`` of the stabilizer subgroup ``g·Z``."""
    return len(x.cycle)


def least_rotation(w: Word) -> Word:
    return min(w[i:] + w[:i] for i in range(len(w)))


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class Presentation:
    alphabet: tuple[str, ...]
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    name: str = field(default="", compare=False)
    minimized: bool = field(default=False, compare=False)

    def __post_init__(self):
        alphabet = tuple(self.alphabet)
        vertices = tuple(self.vertices)
        edges = tuple(tuple(e) for e in self.edges)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", edges)
        if not alphabet:
            raise ValueError("alphabet must be nonempty")
        if len(set(alphabet)) != len(alphabet):
            raise ValueError("duplicate alphabet symbols")
        if len(set(vertices)) != len(vertices):
            raise ValueError("duplicate vertices")
        vs, syms = set(vertices), set(alphabet)
        for s, t, a in edges:
            if s not in vs or t not in vs:
                raise ValueError(f"edge {s}->{t} uses an unknown vertex")
            if a not in syms:
                raise ValueError(f"edge label {a!r} not in alphabet")

    @cached_property
    def succ(self) -> Mapping[tuple[str, str], tuple[str, ...]]:
        out = defaultdict(list)
        for s, t, a in self.edges:
            out[s, a].append(t)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def pred(self) -> Mapping[tuple[str, str], tuple[str, ...]]:
        inc = defaultdict(list)
        for s, t, a in self.edges:
            inc[t, a].append(s)
        return {k: tuple(v) for k, v in inc.items()}

    @cached_property
    def out_degree(self) -> Mapping[str, int]:
        deg = dict.fromkeys(self.vertices, 0)
        for s, _, _ in self.edges:
            deg[s] += 1
        return deg

    @property
    def right_resolving(self) -> bool:
        return all(len(ts) == 1 for ts in self.succ.values())

    @property
    def left_resolving(self) -> bool:
        return all(len(ss) == 1 for ss in self.pred.values())

    @property
    def essential(self) -> bool:
        return all(d > 0 for d in self.out_degree.values())

    @property
    def single_char_symbols(self) -> bool:
        return all(len(a) == 1 for a in self.alphabet)

    def word(self, w: str | Sequence[str]) -> Word:
        if isinstance(w, str) and not self.single_char_symbols:
            return tuple(w.split())
        return as_word(w)

    # set-valued one-step maps
    def forward(self, S: Iterable[str], a: str) -> frozenset[str]:
        return frozenset(t for v in S for t in self.succ.get((v, a), ()))

    def backward(self, S: Iterable[str], a: str) -> frozenset[str]:
        return frozenset(s for v in S for s in self.pred.get((v, a), ()))

    def backward_word(self, S: Iterable[str], w: Sequence[str]) -> frozenset[str]:
        S = frozenset(S)
        for a in reversed(w):
            S = self.backward(S, a)
        return S

    def forward_word(self, S: Iterable[str], w: Sequence[str]) -> frozenset[str]:
        S = frozenset(S)
        for a in w:
            S = self.forward(S, a)
        return S

    def adjacency(self) -> list[list[int]]:
        idx = {v: i for i, v in enumerate(self.vertices)}
        m = [[0] * len(self.vertices) for _ in self.vertices]
        for s, t, _ in self.edges:
            m[idx[s]][idx[t]] += 1
        return m

    def relabel(self, mapping: Mapping[str, str], alphabet: Sequence[str] | None = None) -> "Presentation":
        alphabet = tuple(alphabet) if alphabet is not None else tuple(dict.fromkeys(mapping[a] for a in self.alphabet))
        return Presentation(alphabet, self.vertices, tuple((s, t, mapping[a]) for s, t, a in self.edges), self.name)

    @cached_property
    def core(self) -> "Presentation":
        """Restriction to vertices with an infinite forward path."""
        alive = set(self.vertices)
        changed = True
        while changed:
            changed = False
            for v in list(alive):
                if not any(t in alive for (s, t, _) in self.edges if s == v):
                    alive.discard(v)
                    changed = True
        if len(alive) == len(self.vertices):
            return self
        return Presentation(
            self.alphabet,
            tuple(v for v in self.vertices if v in alive),
            tuple(e for e in self.edges if e[0] in alive and e[1] in alive),
            self.name,
        )

    @cached_property
    def follower_dfa(self) -> "SubsetDFA":
        return SubsetDFA.build(self)

    def __repr__(self) -> str:
        tag = f" {self.name}" if self.name else ""
        return f"<Presentation{tag}: {len(self.vertices)} vertices, {len(self.edges)} edges>"


def trim(p: Presentation) -> Presentation:
    core = p.core
    if not core.vertices:
        raise EmptyShiftError("presentation carries no infinite path: empty shift")
    return core


@dataclass
class SubsetDFA:
    """Forward subset automaton started from every vertex of the core.

    States are nonempty vertex sets; every state has an infinite future,
    so the language of finite paths from `start` is exactly L(X).
    """

    presentation: Presentation
    start: frozenset[str]
    states: list[frozenset[str]]
    delta: dict[tuple[frozenset[str], str], frozenset[str]]

    @classmethod
    def build(cls, p: Presentation) -> "SubsetDFA":
        core = trim(p)
        start = frozenset(core.vertices)
        states, delta = [start], {}
        seen = {start}
        queue = deque([start])
        while queue:
            S = queue.popleft()
            for a in core.alphabet:
                T = core.forward(S, a)
                if not T:
                    continue
                delta[S, a] = T
                if T not in seen:
                    seen.add(T)
                    states.append(T)
                    queue.append(T)
        return cls(core, start, states, delta)

    def run(self, w: Sequence[str], state: frozenset[str] | None = None) -> frozenset[str] | None:
        S = self.start if state is None else state
        for a in w:
            S = self.delta.get((S, a))
            if S is None:
                return None
        return S

    def words(self, n: int, state: frozenset[str] | None = None) -> Iterator[Word]:
        """All admissible words of length n, in alphabet order."""
        alphabet = self.presentation.alphabet

        def rec(S, prefix):
            if len(prefix) == n:
                yield prefix
                return
            for a in alphabet:
                T = self.delta.get((S, a))
                if T is not None:
                    yield from rec(T, prefix + (a,))

        yield from rec(self.start if state is None else state, ())

    def path_to_cycle(self, state: frozenset[str]) -> tuple[Word, Word]:
        """Some (w, c) with c nonempty so that w·c^∞ is read from `state`."""
        alphabet = self.presentation.alphabet
        seen: dict[frozenset[str], int] = {}
        path: list[str] = []
        S = state
        while S not in seen:
            seen[S] = len(path)
            a = next(a for a in alphabet if (S, a) in self.delta)
            path.append(a)
            S = self.delta[S, a]
        i = seen[S]
        return tuple(path[:i]), tuple(path[i:])


def admissible_words(p: Presentation, n: int) -> list[Word]:
    return list(p.follower_dfa.words(n))


def is_admissible(p: Presentation, w: str | Sequence[str]) -> bool:
    return p.follower_dfa.run(p.word(w) if isinstance(w, str) else tuple(w)) is not None


def readable_from(p: Presentation, x: EvPerPoint) -> frozenset[str]:
    """Vertices of ``p`` from which ``x`` can be read."""
    core = p.core
    S = frozenset(core.vertices)
    while True:
        T = core.backward_word(S, x.cycle)
        if T == S:
            break
        S = T
    return core.backward_word(S, x.transient)


def contains(p: Presentation, x: EvPerPoint) -> bool:
    return bool(readable_from(p, x))


def extend_to_point(p: Presentation, w: Sequence[str]) -> EvPerPoint:
    """An eventually periodic point of ``p`` with prefix ``w``."""
    dfa = p.follower_dfa
    S = dfa.run(w)
    if S is None:
        raise ValueError(f"word {format_word(w)} is not admissible")
    u, c = dfa.path_to_cycle(S)
    return EvPerPoint(tuple(w) + u, c)


def periodic_points_up_to(p: Presentation, period_bound: int) -> list[EvPerPoint]:
    """All periodic points with least period at most ``period_bound``."""
    if period_bound < 1:
        raise ValueError("period_bound must be at least 1")
    dfa = p.follower_dfa
    found = []
    for n in range(1, period_bound + 1):
        for w in dfa.words(n):
            if _primitive_root(w) != w:
                continue
            x = EvPerPoint((), w)
            if contains(p, x):
                found.append(x)
    return found


def periodic_orbits_up_to(p: Presentation, period_bound: int) -> list[EvPerPoint]:
    """One representative per periodic orbit: the least rotation."""
    return [x for x in periodic_points_up_to(p, period_bound) if least_rotation(x.cycle) == x.cycle]


def eventually_periodic_points(p: Presentation, max_transient: int, max_period: int) -> list[EvPerPoint]:
    """Canonical points with given transient and period bounds, no duplicates."""
    dfa = p.follower_dfa
    out = set()
    cycles = periodic_points_up_to(p, max_period)
    for m in range(max_transient + 1):
        for mu in dfa.words(m):
            for c in cycles:
                x = EvPerPoint(mu, c.cycle)
                if len(x.transient) == m and contains(p, x):
                    out.add(x)
    return sorted(out, key=lambda x: (len(x.transient), len(x.cycle), x))


# ---------------------------------------------------------------------------
# constructions


def compile_forbidden(alphabet: Sequence[str], forbidden: Iterable[str | Sequence[str]]) -> Presentation:
    """Presentation of the shift of finite type avoiding ``forbidden``.

    Vertices are the last ``M-1`` symbols read (shorter at the start),
    where ``M`` is the longest forbidden length; the result is trimmed
    and minimized.
    """
    alphabet = tuple(alphabet)
    forb = {as_word(w) for w in forbidden}
    if any(len(w) == 0 for w in forb):
        raise ValueError("forbidden words must be nonempty")
    for w in forb:
        if any(a not in alphabet for a in w):
            raise ValueError(f"forbidden word {format_word(w)} leaves the alphabet")
    memory = max((len(w) for w in forb), default=1) - 1

    def clean(w: Word) -> bool:
        return not any(w[i:j] in forb for i in range(len(w)) for j in range(i + 1, len(w) + 1))

    start: Word = ()
    seen, edges = {start}, []
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for a in alphabet:
            if not clean(u + (a,)):
                continue
            t = (u + (a,))[-memory:] if memory else ()
            edges.append((u, t, a))
            if t not in seen:
                seen.add(t)
                queue.append(t)
    name = {w: format_word(w) or "ε" for w in seen}
    p = Presentation(alphabet, tuple(sorted(name.values())), tuple((name[s], name[t], a) for s, t, a in edges))
    return minimize(trim(p))


def determinize(p: Presentation) -> Presentation:
    """Right-resolving presentation of the same shift (identity if already so)."""
    core = trim(p)
    if core.right_resolving:
        return core
    dfa = core.follower_dfa

    def nm(S):
        return "{" + ",".join(sorted(S)) + "}"

    return Presentation(
        core.alphabet,
        tuple(nm(S) for S in dfa.states),
        tuple((nm(S), nm(T), a) for (S, a), T in dfa.delta.items()),
        core.name,
    )


def follower_partition(p: Presentation) -> list[list[str]]:
    """Blocks of follower-equivalent vertices of a right-resolving core."""
    block = dict.fromkeys(p.vertices, 0)
    while True:
        sig = {
            v: (block[v],) + tuple(block[p.succ[v, a][0]] if (v, a) in p.succ else -1 for a in p.alphabet)
            for v in p.vertices
        }
        ids: dict[tuple, int] = {}
        new = {v: ids.setdefault(sig[v], len(ids)) for v in p.vertices}
        if len(ids) == len(set(block.values())):
            break
        block = new
    groups = defaultdict(list)
    for v in p.vertices:
        groups[block[v]].append(v)
    return list(groups.values())


def minimize(p: Presentation) -> Presentation:
    """Merge follower-equivalent vertices of a right-resolving presentation."""
    core = trim(p)
    if not core.right_resolving:
        raise ValueError("minimize expects a right-resolving presentation")
    rep = {}
    for blk in follower_partition(core):
        for v in blk:
            rep[v] = blk[0]
    verts = tuple(v for v in core.vertices if rep[v] == v)
    edges = tuple(sorted({(rep[s], rep[t], a) for s, t, a in core.edges}, key=lambda e: (verts.index(e[0]), e[2])))
    return Presentation(core.alphabet, verts, edges, core.name, minimized=True)


@dataclass(frozen=True)
class SftMatrix:
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.entries)
        object.__setattr__(self, "entries", rows)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        if any(v < 0 for r in rows for v in r):
            raise ValueError("matrix entries must be nonnegative")
        if any(sum(r) == 0 for r in rows):
            raise ValueError("matrix has a zero row")

    @property
    def size(self) -> int:
        return len(self.entries)


def from_matrix(m: SftMatrix | Sequence[Sequence[int]], kind: str = "vertex", names: Sequence[str] | None = None) -> Presentation:
    """Vertex shift (labels = vertices) or edge shift (labels = edges)."""
    if not isinstance(m, SftMatrix):
        m = SftMatrix(tuple(map(tuple, m)))
    n = m.size
    names = tuple(names) if names is not None else tuple(str(i + 1) for i in range(n))
    if kind == "vertex":
        if any(v > 1 for r in m.entries for v in r):
            raise ValueError("vertex shifts need a 0-1 matrix")
        edges = tuple((names[i], names[j], names[i]) for i in range(n) for j in range(n) if m.entries[i][j])
        return Presentation(names, names, edges)
    if kind == "edge":
        edges, labels = [], []
        for i, j in itertools.product(range(n), repeat=2):
            for k in range(m.entries[i][j]):
                lab = f"{names[i]}{names[j]}" + (f"_{k}" if m.entries[i][j] > 1 else "")
                labels.append(lab)
                edges.append((names[i], names[j], lab))
        return Presentation(tuple(labels), names, tuple(edges))
    raise ValueError(f"unknown matrix kind {kind!r}")


def window_graph(p: Presentation, depth: int) -> tuple[Presentation, dict[Edge, Word]]:
    """Presentation of the same shift whose edges know the next ``depth`` symbols.

    A vertex ``v|u`` means "at vertex v, the next depth-1 symbols are u".
    Returns the presentation and a map from each edge to the window
    ``x[0:depth]`` that starts with its label.
    """
    core = trim(p)
    depth = max(depth, 1)
    def readable(v, w):
        return bool(core.forward_word({v}, w))

    verts, edges, window = [], [], {}
    seen = set()

    def vname(v, u):
        return f"{v}|{format_word(u)}"

    queue = deque()
    for v in core.vertices:
        for u in itertools.product(core.alphabet, repeat=depth - 1):
            if readable(v, u):
                seen.add((v, u))
                queue.append((v, u))
    while queue:
        v, u = queue.popleft()
        verts.append(vname(v, u))
        for b in core.alphabet:
            w = u + (b,)
            if not readable(v, w):
                continue
            for t in core.succ.get((v, w[0]), ()):
                u2 = w[1:]
                if not readable(t, u2):
                    continue
                # the target name fixes the last window symbol, so edges never collide
                e = (vname(v, u), vname(t, u2), w[0])
                edges.append(e)
                window[e] = w
                if (t, u2) not in seen:
                    seen.add((t, u2))
                    queue.append((t, u2))
    g = Presentation(core.alphabet, tuple(verts), tuple(edges), core.name)
    return g, window


# ---------------------------------------------------------------------------
# isomorphism


def _signature(g: Presentation, v: str) -> tuple:
    out = sorted((a, t == v) for s, t, a in g.edges if s == v)
    inc = sorted(a for s, t, a in g.edges if t == v)
    return (tuple(out), tuple(inc))


def find_isomorphism(
    g1: Presentation, g2: Presentation, label_map: Mapping[str, str] | None = None
) -> dict[str, str] | None:
    """Label-preserving vertex bijection g1 -> g2, or None.

    ``label_map`` translates g2's labels into g1's alphabet first.  Brute
    force with degree/label signatures for pruning.
    """
    if label_map is not None:
        g2 = Presentation(
            tuple(dict.fromkeys(label_map[a] for a in g2.alphabet)),
            g2.vertices,
            tuple((s, t, label_map[a]) for s, t, a in g2.edges),
        )
    if len(g1.vertices) != len(g2.vertices) or len(g1.edges) != len(g2.edges):
        return None
    sig1 = {v: _signature(g1, v) for v in g1.vertices}
    sig2 = {v: _signature(g2, v) for v in g2.vertices}
    if sorted(sig1.values()) != sorted(sig2.values()):
        return None
    count2 = defaultdict(int)
    for e in g2.edges:
        count2[e] += 1
    count1 = defaultdict(int)
    for e in g1.edges:
        count1[e] += 1
    order = sorted(g1.vertices, key=lambda v: sum(1 for u in g1.vertices if sig1[u] == sig1[v]))
    assign: dict[str, str] = {}
    used: set[str] = set()

    def consistent(v):
        for (s, t, a), c in count1.items():
            if s in assign and t in assign and (s == v or t == v):
                if count2.get((assign[s], assign[t], a), 0) != c:
                    return False
        return True

    def rec(i):
        if i == len(order):
            return True
        v = order[i]
        for w in g2.vertices:
            if w in used or sig2[w] != sig1[v]:
                continue
            assign[v] = w
            used.add(w)
            if consistent(v) and rec(i + 1):
                return True
            del assign[v]
            used.discard(w)
        return False

    if not rec(0):
        return None
    mapped = defaultdict(int)
    for (s, t, a), c in count1.items():
        mapped[assign[s], assign[t], a] += c
    return dict(assign) if mapped == count2 else None


def languages_agree(p: Presentation, q: Presentation, max_len: int) -> bool:
    """Do ``p`` and ``q`` have the same admissible words up to ``max_len``?"""
    for n in range(max_len + 1):
        if set(p.follower_dfa.words(n)) != set(q.follower_dfa.words(n)):
            return False
    return True
