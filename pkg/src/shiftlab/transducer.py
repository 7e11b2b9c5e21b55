"""Deterministic sequential transducers computing continuous shift maps.

A transducer reads a point symbol by symbol and emits a finite word per
step.  Its value on an infinite input is the concatenation of the
emissions, which must be infinite on every point of the domain.
Equality of two transducers over the same domain is decided by a
breadth-first search over (domain state, state, state, lead word).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping, Sequence

from .presentation import EvPerPoint, Presentation, SubsetDFA, Word, format_word, trim

State = Hashable
StepFn = Callable[[State, str], "tuple[State, Word] | None"]

MAX_STATES = 200_000


class TransducerError(ValueError):
    """A transducer is not a well-defined map on its domain."""

    def __init__(self, message: str, witness: Word | None = None):
        super().__init__(message if witness is None else f"{message} (input {format_word(witness) or 'ε'})")
        self.witness = witness


class Transducer:
    def __init__(self, domain: Presentation, start: State, step: StepFn, name: str = "T"):
        self.domain = trim(domain)
        self.start = start
        self._step = step
        self._memo: dict[tuple[State, str], tuple[State, Word] | None] = {}
        self.name = name

    def __repr__(self) -> str:
        return f"Transducer({self.name} on {self.domain.name or 'X'})"

    def step(self, s: State, a: str) -> tuple[State, Word] | None:
        key = (s, a)
        if key not in self._memo:
            r = self._step(s, a)
            self._memo[key] = None if r is None else (r[0], tuple(r[1]))
        return self._memo[key]

    def run(self, w: Sequence[str], s: State | None = None) -> tuple[State, Word] | None:
        s = self.start if s is None else s
        out: list[str] = []
        for a in w:
            r = self.step(s, a)
            if r is None:
                return None
            s, o = r
            out.extend(o)
        return s, tuple(out)

    def __call__(self, x: EvPerPoint, s: State | None = None) -> EvPerPoint:
        return self.apply(x, s)

    def apply(self, x: EvPerPoint, s: State | None = None) -> EvPerPoint:
        r = self.run(x.transient, s)
        if r is None:
            raise TransducerError(f"{self.name} undefined on {x}", x.transient)
        s, head = r
        seen: dict[State, int] = {}
        blocks: list[Word] = []
        while s not in seen:
            seen[s] = len(blocks)
            r = self.run(x.cycle, s)
            if r is None:
                raise TransducerError(f"{self.name} undefined on {x}")
            s, o = r
            blocks.append(o)
        i = seen[s]
        cyc = tuple(a for b in blocks[i:] for a in b)
        if not cyc:
            raise TransducerError(f"{self.name} emits a finite word on {x}")
        return EvPerPoint(head + tuple(a for b in blocks[:i] for a in b), cyc)

    # exploration over the domain language
    def explore(self, max_states: int = MAX_STATES):
        """Reachable (domain state, state) pairs with their transitions.

        Returns a dict mapping each pair to a list of (symbol, pair, output).
        Raises TransducerError when an admissible input has no transition.
        """
        dfa = self.domain.follower_dfa
        start = (dfa.start, self.start)
        graph: dict = {start: []}
        parent: dict = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            S, s = node
            for a in self.domain.alphabet:
                T = dfa.delta.get((S, a))
                if T is None:
                    continue
                r = self.step(s, a)
                if r is None:
                    raise TransducerError(f"{self.name} has no move on an admissible input", _trace(parent, node) + (a,))
                nxt = (T, r[0])
                graph[node].append((a, nxt, r[1]))
                if nxt not in graph:
                    if len(graph) >= max_states:
                        raise TransducerError(f"{self.name} exceeds {max_states} states")
                    graph[nxt] = []
                    parent[nxt] = (node, a)
                    queue.append(nxt)
        return graph

    def state_count(self) -> int:
        return len(self.explore())

    def max_emission(self) -> int:
        return max((len(o) for edges in self.explore().values() for _, _, o in edges), default=0)

    def check_productive(self) -> None:
        """Every infinite input must produce infinite output."""
        graph = self.explore()
        silent = {n: [m for _, m, o in edges if not o] for n, edges in graph.items()}
        # a cycle of silent moves is a fatal stall
        color: dict = {}
        for root in silent:
            if root in color:
                continue
            stack = [(root, iter(silent[root]))]
            color[root] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    color[node] = 2
                    stack.pop()
                elif color.get(nxt) == 1:
                    raise TransducerError(f"{self.name} can stall forever")
                elif nxt not in color:
                    color[nxt] = 1
                    stack.append((nxt, iter(silent[nxt])))

    def check_image(self, codomain: Presentation) -> None:
        """Every emitted word must be admissible in the codomain."""
        cod = trim(codomain).follower_dfa
        dfa = self.domain.follower_dfa
        start = (dfa.start, self.start, cod.start)
        seen = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            S, s, C = node
            for a in self.domain.alphabet:
                T = dfa.delta.get((S, a))
                if T is None:
                    continue
                s2, o = self.step(s, a)
                C2 = cod.run(o, C)
                if C2 is None:
                    raise TransducerError(f"{self.name} emits a word outside the codomain", _trace(seen, node) + (a,))
                nxt = (T, s2, C2)
                if nxt not in seen:
                    seen[nxt] = (node, a)
                    queue.append(nxt)

    def relabel(self, inputs: Mapping[str, str], outputs: Mapping[str, str], domain: Presentation) -> "Transducer":
        """Conjugate by symbol bijections: read inputs' images, emit outputs' images."""
        back = {v: k for k, v in inputs.items()}

        def step(s, a):
            r = self.step(s, back[a])
            return None if r is None else (r[0], tuple(outputs[b] for b in r[1]))

        return Transducer(domain, self.start, step, f"{self.name}'")


def _trace(parent, node) -> Word:
    out = []
    while parent.get(node) is not None:
        node, a = parent[node]
        out.append(a)
    return tuple(reversed(out))


# ---------------------------------------------------------------------------
# combinators


def identity(domain: Presentation) -> Transducer:
    return Transducer(domain, (), lambda s, a: ((), (a,)), "id")


def symbol_map(domain: Presentation, table: Mapping[str, str], name: str = "π") -> Transducer:
    return Transducer(domain, (), lambda s, a: ((), (table[a],)) if a in table else None, name)


def compose(outer: Transducer, inner: Transducer) -> Transducer:
    """outer ∘ inner: feed inner's output into outer."""

    def step(s, a):
        si, so = s
        r = inner.step(si, a)
        if r is None:
            return None
        si, mid = r
        out: list[str] = []
        for b in mid:
            q = outer.step(so, b)
            if q is None:
                return None
            so, o = q
            out.extend(o)
        return (si, so), tuple(out)

    return Transducer(inner.domain, (inner.start, outer.start), step, f"{outer.name}∘{inner.name}")


def drop(t: Transducer, n: int) -> Transducer:
    """σ^n ∘ t."""
    return drop_by(t, lambda w: n, 0, 0)


def drop_by(t: Transducer, amount: Callable[[Word], int], depth: int, skip: int) -> Transducer:
    """x ↦ σ^{amount(x[:depth])}(t(σ^skip x)).

    The first ``max(depth, skip)`` input symbols are buffered; then the
    skipped symbols are discarded and the rest replayed through ``t``.
    """
    lead = max(depth, skip)

    def settle(word: Word):
        r = t.run(word[skip:])
        if r is None:
            return None
        s, out = r
        n = amount(word[:depth])
        return ("run", s, max(n - len(out), 0)), out[n:]

    def step(state, a):
        if state[0] == "buf":
            word = state[1] + (a,)
            if len(word) < lead:
                return ("buf", word), ()
            return settle(word)
        _, s, pending = state
        r = t.step(s, a)
        if r is None:
            return None
        s, out = r
        k = min(pending, len(out))
        return ("run", s, pending - k), out[k:]

    if lead == 0:
        init = settle(())
        if init is None or init[1]:
            raise AssertionError("empty prefix cannot emit")
        start = init[0]
    else:
        start = ("buf", ())
    return Transducer(t.domain, start, step, f"σ^·{t.name}")


# ---------------------------------------------------------------------------
# equality


@dataclass
class EqualityResult:
    verdict: str  # "pass" | "fail" | "unknown"
    witness: Word | None = None
    point: EvPerPoint | None = None
    explored: int = 0
    lead_bound: int = 0
    notes: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.verdict == "pass"


def _counterexample(dfa: SubsetDFA, w: Word) -> EvPerPoint:
    u, c = dfa.path_to_cycle(dfa.run(w))
    return EvPerPoint(w + u, c)


def transducer_equal(
    t1: Transducer, t2: Transducer, lead_bound: int = 64, prefix: Sequence[str] = (), max_states: int = MAX_STATES
) -> EqualityResult:
    """Decide t1(x) = t2(x) for every domain point x (starting with ``prefix``).

    ``fail`` carries an input word after which the outputs already differ;
    ``unknown`` means one side ran ahead by more than ``lead_bound``.
    """
    if t1.domain != t2.domain:
        raise ValueError("transducers have different domains")
    dfa = t1.domain.follower_dfa
    prefix = tuple(prefix)
    S = dfa.run(prefix)
    if S is None:
        raise ValueError(f"prefix {format_word(prefix)} is not admissible")
    r1, r2 = t1.run(prefix), t2.run(prefix)
    if r1 is None or r2 is None:
        raise TransducerError("transducer undefined on the prefix", prefix)

    def reduce(o1: Word, o2: Word):
        n = min(len(o1), len(o2))
        if o1[:n] != o2[:n]:
            return None
        return (1, o1[n:]) if len(o1) > n else (2, o2[n:])

    lead = reduce(r1[1], r2[1])
    if lead is None:
        return EqualityResult("fail", prefix, _counterexample(dfa, prefix), 0, lead_bound)
    start = (S, r1[0], r2[0], lead)
    parent = {start: None}
    queue = deque([start])
    unknown = None
    while queue:
        node = queue.popleft()
        S, s1, s2, (side, pending) = node
        for a in t1.domain.alphabet:
            T = dfa.delta.get((S, a))
            if T is None:
                continue
            q1, q2 = t1.step(s1, a), t2.step(s2, a)
            w = prefix + _trace(parent, node) + (a,)
            if q1 is None or q2 is None:
                raise TransducerError("transducer undefined on an admissible input", w)
            o1, o2 = q1[1], q2[1]
            if side == 1:
                o1 = pending + o1
            else:
                o2 = pending + o2
            nl = reduce(o1, o2)
            if nl is None:
                return EqualityResult("fail", w, _counterexample(dfa, w), len(parent), lead_bound)
            if len(nl[1]) > lead_bound:
                unknown = unknown or w
                continue
            nxt = (T, q1[0], q2[0], nl)
            if nxt not in parent:
                if len(parent) >= max_states:
                    return EqualityResult("unknown", w, None, len(parent), lead_bound, ["state limit reached"])
                parent[nxt] = (node, a)
                queue.append(nxt)
    if unknown is not None:
        return EqualityResult("unknown", unknown, None, len(parent), lead_bound, ["lead exceeded bound"])
    return EqualityResult("pass", None, None, len(parent), lead_bound)
