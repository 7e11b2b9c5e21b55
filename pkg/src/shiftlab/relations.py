"""Maps between shift spaces and exact verification of dynamical relations.

Maps are finite data: sliding block codes, substitutions with
eventually periodic exceptions, or ready-made transducers.  Every
relation is reduced to equalities of transducers, decided exactly; a
second, independent evaluator on eventually periodic points re-checks
every counterexample.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import transducer as td
from .cohomology import CylFunction, positivity
from .cover import CoverGraph, build_cover, lift_point
from .past import past_state, representative_point
from .presentation import (
    EvPerPoint,
    Presentation,
    Word,
    admissible_words,
    eventually_periodic_points,
    extend_to_point,
    format_word,
    lp,
    periodic_points_up_to,
    trim,
    window_graph,
)
from .transducer import Transducer, TransducerError, transducer_equal

LEAD_BOUND = 32
PERIOD_BOUND = 8


# ---------------------------------------------------------------------------
# map specifications


@dataclass(frozen=True)
class Override:
    """An exception ``source ↦ target`` recognised by the isolating ``prefix``."""

    source: EvPerPoint
    target: EvPerPoint
    prefix: Word


@dataclass(frozen=True, eq=False)
class MapSpec:
    kind: str  # "substitution" | "block_map" | "transducer"
    rules: tuple[tuple[Word, Word], ...] = ()
    overrides: tuple[Override, ...] = ()
    window: int = 1
    table: Mapping[Word, str] = field(default_factory=dict)
    machine: Transducer | None = None
    name: str = "h"

    @classmethod
    def substitution(cls, rules, overrides=(), name="h") -> "MapSpec":
        rules = tuple((tuple(a), tuple(b)) for a, b in rules)
        return cls("substitution", rules=rules, overrides=tuple(overrides), name=name)

    @classmethod
    def block_map(cls, window: int, table: Mapping, name="φ") -> "MapSpec":
        return cls("block_map", window=window, table={tuple(k): v for k, v in table.items()}, name=name)

    @classmethod
    def symbols(cls, table: Mapping[str, str], name="φ") -> "MapSpec":
        return cls.block_map(1, {(a,): b for a, b in table.items()}, name)

    @classmethod
    def from_transducer(cls, t: Transducer, name="h̃") -> "MapSpec":
        return cls("transducer", machine=t, name=name)


class MapSpecError(ValueError):
    pass


@dataclass(eq=False)
class ShiftMap:
    """A compiled map ``domain -> codomain``."""

    spec: MapSpec
    domain: Presentation
    codomain: Presentation
    machine: Transducer

    @property
    def name(self) -> str:
        return self.spec.name

    def __call__(self, x: EvPerPoint) -> EvPerPoint:
        return self.machine.apply(x)

    def direct(self, x: EvPerPoint) -> EvPerPoint:
        """Evaluate on a point without the transducer."""
        if self.spec.kind == "block_map":
            return _direct_block(self.spec, x)
        if self.spec.kind == "substitution":
            return _direct_substitution(self.spec, x)
        return self.machine.apply(x)


def _forced_tail(p: Presentation, S) -> EvPerPoint | None:
    """The unique point readable from DFA state S, if there is only one."""
    dfa = p.follower_dfa
    seen: dict = {}
    path: list[str] = []
    while S not in seen:
        seen[S] = len(path)
        moves = [a for a in p.alphabet if (S, a) in dfa.delta]
        if len(moves) != 1:
            return None
        path.append(moves[0])
        S = dfa.delta[S, moves[0]]
    i = seen[S]
    return EvPerPoint(tuple(path[:i]), tuple(path[i:]))


def _substitution_transducer(m: MapSpec, dom: Presentation) -> Transducer:
    sources = {a for a, _ in m.rules}
    if len(sources) != len(m.rules):
        raise MapSpecError("a word is substituted twice")
    image = dict(m.rules)
    for a in dom.alphabet:
        if not any(src[:1] == (a,) for src in sources):
            image.setdefault((a,), (a,))
    blocks = sorted(image, key=len)
    for u, v in itertools.permutations(blocks, 2):
        if v[: len(u)] == u:
            raise MapSpecError(f"ambiguous parse: {format_word(u)} is a prefix of {format_word(v)}")
    prefixes = [o.prefix for o in m.overrides]
    for o in m.overrides:
        if not o.prefix or o.source.prefix(len(o.prefix)) != o.prefix:
            raise MapSpecError(f"exception prefix {format_word(o.prefix)} must start its source {o.source}")

    def step(state, a):
        if state[0] == "ovr":
            _, k, ph = state
            cyc = m.overrides[k].target.cycle
            return ("ovr", k, (ph + 1) % len(cyc)), (cyc[ph],)
        buf = state[1] + (a,)
        out: list[str] = []
        while True:
            for k, pre in enumerate(prefixes):
                if buf == pre:
                    return ("ovr", k, 0), tuple(out) + m.overrides[k].target.transient
            if any(len(pre) > len(buf) and pre[: len(buf)] == buf for pre in prefixes):
                return ("buf", buf), tuple(out)
            b = next((b for b in blocks if buf[: len(b)] == b), None)
            if b is not None:
                out.extend(image[b])
                buf = buf[len(b):]
                if not buf:
                    return ("buf", ()), tuple(out)
                continue
            if any(len(b) > len(buf) and b[: len(buf)] == buf for b in blocks):
                return ("buf", buf), tuple(out)
            return None

    return Transducer(dom, ("buf", ()), step, m.name)


def _check_overrides(m: MapSpec, t: Transducer) -> None:
    """Each exception prefix must isolate its source from every boundary where it is readable."""
    p = t.domain
    dfa = p.follower_dfa
    for (S, s) in t.explore():
        if s != ("buf", ()):
            continue
        for o in m.overrides:
            T = dfa.run(o.prefix, S)
            if T is None:
                continue
            tail = _forced_tail(p, T)
            if tail is None or tail != o.source.shift(len(o.prefix)):
                raise MapSpecError(f"prefix {format_word(o.prefix)} does not isolate {o.source}")


def _block_transducer(m: MapSpec, dom: Presentation) -> Transducer:
    D = m.window
    words = set(admissible_words(dom, D))
    missing = words - set(m.table)
    if missing:
        raise MapSpecError(f"block table misses {sorted(format_word(w) for w in missing)[:5]}")

    def step(buf, a):
        buf = buf + (a,)
        if len(buf) < D:
            return buf, ()
        out = m.table.get(buf)
        return None if out is None else (buf[1:], (out,))

    return Transducer(dom, (), step, m.name)


def compile_map(m: MapSpec, dom: Presentation, cod: Presentation) -> ShiftMap:
    dom, cod = trim(dom), trim(cod)
    if m.kind == "substitution":
        t = _substitution_transducer(m, dom)
        try:
            t.explore()
        except TransducerError as e:
            raise MapSpecError(f"substitution does not parse every point: {e}") from e
        _check_overrides(m, t)
    elif m.kind == "block_map":
        t = _block_transducer(m, dom)
    elif m.kind == "transducer":
        if m.machine is None or m.machine.domain != dom:
            raise MapSpecError("transducer spec over a different domain")
        t = m.machine
    else:
        raise MapSpecError(f"unknown map kind {m.kind!r}")
    t.check_productive()
    try:
        t.check_image(cod)
    except TransducerError as e:
        raise MapSpecError(str(e)) from e
    return ShiftMap(m, dom, cod, t)


def _direct_block(m: MapSpec, x: EvPerPoint) -> EvPerPoint:
    n0, per = len(x.transient), len(x.cycle)
    out = [m.table[x.shift(i).prefix(m.window)] for i in range(n0 + per)]
    return EvPerPoint(tuple(out[:n0]), tuple(out[n0:]))


def _direct_substitution(m: MapSpec, x: EvPerPoint) -> EvPerPoint:
    image = dict(m.rules)
    sources = {a for a, _ in m.rules}
    alphabet = set(x.transient) | set(x.cycle)
    for a in alphabet:
        if not any(src[:1] == (a,) for src in sources):
            image.setdefault((a,), (a,))
    out: list[str] = []
    n = 0
    phases: dict[int, int] = {}
    while True:
        y = x.shift(n)
        hit = next((o for o in m.overrides if o.source == y), None)
        if hit is not None:
            return EvPerPoint(tuple(out) + hit.target.transient, hit.target.cycle)
        if n >= len(x.transient):
            ph = (n - len(x.transient)) % len(x.cycle)
            if ph in phases:
                i = phases[ph]
                return EvPerPoint(tuple(out[:i]), tuple(out[i:]))
            phases[ph] = len(out)
        b = next((b for b in image if y.prefix(len(b)) == b), None)
        if b is None:
            raise MapSpecError(f"no block parses {y}")
        out.extend(image[b])
        n += len(b)


# ---------------------------------------------------------------------------
# cocycles and reports


@dataclass(frozen=True, eq=False)
class CocyclePairSpec:
    k: CylFunction
    l: CylFunction

    def __post_init__(self):
        if self.k.domain != self.l.domain:
            raise ValueError("k and l live on different shifts")
        if min(self.k.values.values()) < 0 or min(self.l.values.values()) < 0:
            raise ValueError("cocycle values must be natural numbers")

    def k_n(self, x: EvPerPoint, n: int) -> int:
        return self.k.birkhoff(x, n)

    def l_n(self, x: EvPerPoint, n: int) -> int:
        return self.l.birkhoff(x, n)

    def difference(self) -> CylFunction:
        return self.l - self.k

    def pulled_back(self, c: CoverGraph) -> "CocyclePairSpec":
        """The pair composed with the factor map of a cover."""
        return CocyclePairSpec(
            CylFunction.from_callable(c, self.k.depth, lambda w: self.k.values[tuple(c.factor[e] for e in w)]),
            CylFunction.from_callable(c, self.l.depth, lambda w: self.l.values[tuple(c.factor[e] for e in w)]),
        )


@dataclass
class VerificationReport:
    verdict: str  # "pass" | "fail" | "unknown"
    checked: list[str] = field(default_factory=list)
    counterexample: dict | None = None
    bounds: dict = field(default_factory=dict)
    details: list[dict] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        return {
            "format": "shiftlab/1",
            "verdict": self.verdict,
            "checked_equations": self.checked,
            "counterexample": self.counterexample,
            "bounds": self.bounds,
            "details": self.details,
        }


@dataclass
class Equation:
    """``side_a(x) = side_b(x)`` for all x, given by transducers and direct evaluators."""

    label: str
    a: Transducer
    b: Transducer
    direct_a: object
    direct_b: object


def _decide(eqs: Sequence[Equation], lead_bound: int) -> VerificationReport:
    rep = VerificationReport("pass", bounds={"lead_bound": lead_bound})
    unknown = None
    for eq in eqs:
        r = transducer_equal(eq.a, eq.b, lead_bound=lead_bound)
        rep.checked.append(eq.label)
        rep.details.append({"equation": eq.label, "verdict": r.verdict, "explored": r.explored})
        if r.verdict == "fail":
            x = r.point
            rep.verdict = "fail"
            rep.counterexample = {
                "equation": eq.label,
                "point": str(x),
                "word": format_word(r.witness),
                "lhs": str(eq.direct_a(x)),
                "rhs": str(eq.direct_b(x)),
            }
            rep.details[-1]["point"] = x
            return rep
        if r.verdict == "unknown":
            unknown = unknown or eq.label
    if unknown is not None:
        rep.verdict = "unknown"
        rep.counterexample = None
        rep.bounds["unresolved"] = unknown
    return rep


def _shifted(h: ShiftMap, amount: CylFunction | int, skip: int) -> tuple[Transducer, object]:
    """x ↦ σ^{amount(x)} h(σ^skip x) as a transducer and a direct evaluator."""
    if isinstance(amount, int):
        n = amount
        t = td.drop_by(h.machine, lambda w: n, 0, skip)
        return t, lambda x: h.direct(x.shift(skip)).shift(n)
    f = amount
    t = td.drop_by(h.machine, lambda w: f.values[w], f.depth, skip)
    return t, lambda x: h.direct(x.shift(skip)).shift(f(x))


def _inverse_equations(h: ShiftMap, h_inv: ShiftMap) -> list[Equation]:
    _check_pair(h, h_inv)
    return [
        Equation("h_inv∘h = id", td.compose(h_inv.machine, h.machine), td.identity(h.domain),
                 lambda x: h_inv.direct(h.direct(x)), lambda x: x),
        Equation("h∘h_inv = id", td.compose(h.machine, h_inv.machine), td.identity(h.codomain),
                 lambda y: h.direct(h_inv.direct(y)), lambda y: y),
    ]


def _check_pair(h: ShiftMap, h_inv: ShiftMap) -> None:
    if h.domain != h_inv.codomain or h.codomain != h_inv.domain:
        raise ValueError("h and h_inv do not run between the same shifts")


def eventual_equations(h: ShiftMap, h_inv: ShiftMap, ell: int) -> list[Equation]:
    eqs = []
    for m, lab in ((h, "h"), (h_inv, "h_inv")):
        a, da = _shifted(m, ell, 1)
        b, db = _shifted(m, ell + 1, 0)
        eqs.append(Equation(f"σ^{ell}({lab}(σx)) = σ^{ell + 1}({lab}(x))", a, b, da, db))
    return eqs + _inverse_equations(h, h_inv)


def verify_eventual_conjugacy(h: ShiftMap, h_inv: ShiftMap, ell: int, lead_bound: int = LEAD_BOUND) -> VerificationReport:
    if ell < 0:
        raise ValueError("ℓ must be natural")
    rep = _decide(eventual_equations(h, h_inv, ell), lead_bound)
    rep.bounds["ell"] = ell
    return rep


def verify_conjugacy(h: ShiftMap, h_inv: ShiftMap, lead_bound: int = LEAD_BOUND) -> VerificationReport:
    return verify_eventual_conjugacy(h, h_inv, 0, lead_bound)


def coe_equations(h: ShiftMap, h_inv: ShiftMap, cx: CocyclePairSpec, cy: CocyclePairSpec) -> list[Equation]:
    if cx.k.domain != h.domain or cy.k.domain != h.codomain:
        raise ValueError("cocycles live on the wrong shifts")
    eqs = []
    for m, c, lab in ((h, cx, "X"), (h_inv, cy, "Y")):
        a, da = _shifted(m, c.l, 0)
        b, db = _shifted(m, c.k, 1)
        eqs.append(Equation(f"σ^l_{lab}(x) {m.name}(x) = σ^k_{lab}(x) {m.name}(σx)", a, b, da, db))
    return eqs + _inverse_equations(h, h_inv)


def verify_coe(
    h: ShiftMap, h_inv: ShiftMap, cx: CocyclePairSpec, cy: CocyclePairSpec, lead_bound: int = LEAD_BOUND
) -> VerificationReport:
    return _decide(coe_equations(h, h_inv, cx, cy), lead_bound)


def verify_preservation(
    h: ShiftMap,
    h_inv: ShiftMap,
    cx: CocyclePairSpec,
    cy: CocyclePairSpec,
    mode: str = "least_period",
    period_bound: int = PERIOD_BOUND,
    scope: str = "periodic",
    max_transient: int = 2,
) -> VerificationReport:
    """Compare lp of images with iterated cocycle differences over one period.

    ``scope="periodic"`` is the definition; ``"eventually_periodic"`` also
    ranges over points ``μα^∞`` with ``p = |α|``.
    """
    if mode not in ("least_period", "stabilizer"):
        raise ValueError(f"unknown mode {mode!r}")
    if period_bound < 1:
        raise ValueError("period bound must be positive")
    rep = VerificationReport("pass", bounds={"period_bound": period_bound, "scope": scope, "mode": mode})
    if scope == "eventually_periodic":
        rep.bounds["max_transient"] = max_transient
    failures = []
    for m, c, side in ((h, cx, "X"), (h_inv, cy, "Y")):
        if scope == "periodic":
            pts = periodic_points_up_to(m.domain, period_bound)
        else:
            pts = eventually_periodic_points(m.domain, max_transient, period_bound)
        for x in pts:
            p = lp(x)
            hx = m(x)
            l_p, k_p = c.l_n(x, p), c.k_n(x, p)
            want = l_p - k_p if mode == "least_period" else abs(l_p - k_p)
            if lp(hx) != want:
                failures.append({"side": side, "point": str(x), "image": str(hx), "lp_point": p,
                                 "lp_image": lp(hx), "l": l_p, "k": k_p, "x": x})
        rep.checked.append(f"lp({m.name}(x)) = {'|' if mode == 'stabilizer' else ''}l^(p) - k^(p){'|' if mode == 'stabilizer' else ''} on {side}")
    if failures:
        rep.verdict = "fail"
        first = failures[0]
        rep.counterexample = {k: v for k, v in first.items() if k != "x"}
        rep.details = failures
    return rep


def verify_positive_coe(cx: CocyclePairSpec, cy: CocyclePairSpec, depth_bound: int = 4) -> VerificationReport:
    rep = VerificationReport("pass", bounds={"depth_bound": depth_bound})
    verdicts = []
    for c, side in ((cx, "X"), (cy, "Y")):
        d = positivity(c.difference(), depth_bound)
        verdicts.append(d.verdict)
        rep.checked.append(f"[l_{side} - k_{side}] positive")
        rep.details.append({"side": side, **d.to_json()})
        if d.verdict == "NO" and rep.counterexample is None:
            rep.counterexample = {"side": side, "orbit": str(d.witness[0]), "sum": d.witness[1]}
    if "NO" in verdicts:
        rep.verdict = "fail"
    elif "UNKNOWN" in verdicts:
        rep.verdict = "unknown"
    return rep


def find_cocycles(h: ShiftMap, depth_bound: int = 3, value_bound: int = 3, lead_bound: int = LEAD_BOUND) -> CocyclePairSpec | None:
    """Least-depth cocycle pair for h found cylinder by cylinder."""
    for d in range(depth_bound + 1):
        k_vals, l_vals = {}, {}
        for w in admissible_words(h.domain, d):
            found = None
            pairs = sorted(itertools.product(range(value_bound + 1), repeat=2), key=lambda kl: (sum(kl), kl))
            for k, l in pairs:
                a = td.drop_by(h.machine, lambda u, l=l: l, 0, 0)
                b = td.drop_by(h.machine, lambda u, k=k: k, 0, 1)
                if transducer_equal(a, b, lead_bound=lead_bound, prefix=w).verdict == "pass":
                    found = (k, l)
                    break
            if found is None:
                break
            k_vals[w], l_vals[w] = found
        else:
            return CocyclePairSpec(CylFunction(h.domain, d, k_vals), CylFunction(h.domain, d, l_vals))
    return None


# ---------------------------------------------------------------------------
# almost injective / almost surjective block codes


def _window_code(phi: ShiftMap):
    if phi.spec.kind != "block_map":
        raise ValueError("a sliding block code is required")
    g, window = window_graph(phi.domain, phi.spec.window)
    edges = [(s, t, a, phi.spec.table[window[(s, t, a)][: phi.spec.window]]) for (s, t, a) in g.edges]
    return g, edges


def _live(nodes, succ):
    """Nodes with an infinite forward path."""
    live = set(nodes)
    changed = True
    while changed:
        changed = False
        for n in list(live):
            if not any(m in live for m, _ in succ.get(n, ())):
                live.discard(n)
                changed = True
    return live


def almost_injective(phi: ShiftMap, ell: int) -> VerificationReport:
    """φ(x) = φ(x') ⟹ σ^ℓ x = σ^ℓ x', via pairs of window-graph paths."""
    g, edges = _window_code(phi)
    out = {}
    for s, t, a, b in edges:
        out.setdefault(s, []).append((t, a, b))
    succ: dict = {}
    starts = [(v, w, 0) for v in g.vertices for w in g.vertices]
    seen = set(starts)
    queue = deque(starts)
    while queue:
        node = queue.popleft()
        v, w, c = node
        for t1, a1, b1 in out.get(v, ()):
            for t2, a2, b2 in out.get(w, ()):
                if b1 != b2:
                    continue
                bad = c == ell and a1 != a2
                nxt = (t1, t2, min(c + 1, ell))
                succ.setdefault(node, []).append((nxt, (a1, a2, bad)))
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    live = _live(seen, succ)
    parent: dict = {n: None for n in starts if n in live}
    queue = deque(parent)
    hit = None
    while queue and hit is None:
        node = queue.popleft()
        for nxt, lab in succ.get(node, ()):
            if nxt not in live:
                continue
            if lab[2]:
                hit = (node, nxt, lab)
                break
            if nxt not in parent:
                parent[nxt] = (node, lab)
                queue.append(nxt)
    rep = VerificationReport("pass", checked=[f"φ(x) = φ(x') ⟹ σ^{ell} x = σ^{ell} x'"], bounds={"ell": ell, "pair_states": len(seen)})
    if hit is None:
        return rep
    node, nxt, lab = hit
    path = []
    while parent[node] is not None:
        node, l2 = parent[node]
        path.append(l2)
    path = list(reversed(path)) + [lab]
    # continue inside the live part until a product state repeats
    cur, idx = nxt, {}
    tail = []
    while cur not in idx:
        idx[cur] = len(tail)
        cur, l2 = next((m, l) for m, l in succ[cur] if m in live)
        tail.append(l2)
    i = idx[cur]
    head = path + tail[:i]
    cyc = tail[i:]
    x = EvPerPoint(tuple(a for a, _, _ in head), tuple(a for a, _, _ in cyc))
    y = EvPerPoint(tuple(b for _, b, _ in head), tuple(b for _, b, _ in cyc))
    rep.verdict = "fail"
    rep.counterexample = {"x": str(x), "x_prime": str(y), "image": str(phi.direct(x)), "points": (x, y)}
    return rep


def _reach_exactly(p: Presentation, ell: int) -> dict[str, Word]:
    """Vertices reachable by a path of length ℓ, with one such path's labels."""
    layer = {v: () for v in p.vertices}
    for _ in range(ell):
        nxt: dict[str, Word] = {}
        for v, w in layer.items():
            for s, t, a in p.edges:
                if s == v and t not in nxt:
                    nxt[t] = w + (a,)
        layer = nxt
    return layer


def almost_surjective(phi: ShiftMap, ell: int) -> VerificationReport:
    """σ^ℓ(Y) ⊆ σ^ℓ(φ(X)), by subset-pair search on the two presentations."""
    g, edges = _window_code(phi)
    img = Presentation(tuple(sorted({b for *_, b in edges})), g.vertices, tuple((s, t, b) for s, t, _, b in edges))
    Y = trim(phi.codomain)
    ry, ri = _reach_exactly(Y, ell), _reach_exactly(img, ell)
    start = (frozenset(ry), frozenset(ri))
    parent = {start: None}
    queue = deque([start])
    rep = VerificationReport("pass", checked=[f"σ^{ell}(Y) ⊆ σ^{ell}(φ(X))"], bounds={"ell": ell})
    while queue:
        node = queue.popleft()
        A, B = node
        for a in Y.alphabet:
            A2 = Y.forward(A, a)
            if not A2:
                continue
            B2 = img.forward(B, a) if a in img.alphabet else frozenset()
            if not B2:
                w = td._trace(parent, node) + (a,)
                v = next(v for v in ry if Y.forward_word({v}, w))
                y = extend_to_point(Y, ry[v] + w)
                rep.verdict = "fail"
                rep.counterexample = {"y": str(y), "word": format_word(w), "point": y}
                return rep
            nxt = (A2, B2)
            if nxt not in parent:
                parent[nxt] = (node, a)
                queue.append(nxt)
    rep.bounds["pair_states"] = len(parent)
    return rep


# ---------------------------------------------------------------------------
# lifting maps to covers


class LiftError(ValueError):
    def __init__(self, message: str, classes=None):
        super().__init__(message)
        self.classes = classes


def lift_map(h: ShiftMap, cx: CoverGraph, cy: CoverGraph, max_lag: int = 3) -> ShiftMap:
    """A map of covers over h, built from past classes of image tails.

    At input position n the lifted state is the past class of
    ``T_{s_n}(x[n, n+C) · z)`` for a representative z of the cover state at
    n + C; the output edges are recovered backward from the next such class.
    """
    errors = []
    for lag in range(max_lag + 1):
        try:
            t = _lift_transducer(h, cx, cy, lag)
            t.explore()
            spec = MapSpec.from_transducer(t, f"{h.name}~")
            return compile_map(spec, cx.edge_presentation, cy.edge_presentation)
        except LiftError as e:
            errors.append(str(e))
    raise LiftError(f"no well-defined lift with lag ≤ {max_lag}: {errors[-1]}")


def _lift_transducer(h: ShiftMap, cx: CoverGraph, cy: CoverGraph, lag: int) -> Transducer:
    T = h.machine
    reps = {q: representative_point(cx.base, st) for q, st in zip(cx.names, cx.states)}
    memo: dict = {}

    def psi(s, w: Word, q: str) -> str:
        key = (s, w, q)
        if key not in memo:
            y = T.apply(reps[q].prepend(w), s)
            memo[key] = cy.state_name(past_state(cy.base, y))
        return memo[key]

    def emit(s, w: Word, q_next: str, q_here: str):
        """Output edges for the symbol w[0] read in state s."""
        s2, chunk = T.step(s, w[0])
        here = psi(s, w[:-1] if lag else (), q_here)
        nxt = psi(s2, w[1:], q_next)
        states = [nxt]
        for b in reversed(chunk):
            src = cy.upd.get((b, states[-1]))
            if src is None:
                raise LiftError(f"image word {format_word(chunk)} leaves the cover", (here, nxt))
            states.append(src)
        states.reverse()
        if states[0] != here:
            raise LiftError(f"classes {states[0]} and {here} disagree at lag {lag}", (states[0], here))
        return s2, tuple(cy.edge_id(states[i], b, states[i + 1]) for i, b in enumerate(chunk))

    def step(state, e):
        s, buf = state
        q, q2, a = cx.edge_of[e]
        buf = buf + ((q, a, q2),)
        if len(buf) <= lag:
            return (s, buf), ()
        # buf holds edges n .. n+lag; the window x[n, n+lag] and states q_{n+lag}, q_{n+lag+1}
        word = tuple(b for _, b, _ in buf)
        s2, out = emit(s, word, buf[-1][2], buf[-1][0])
        return (s2, buf[1:]), out

    return Transducer(cx.edge_presentation, (T.start, ()), step, f"{h.name}~")


@dataclass
class CoverLift:
    forward: ShiftMap
    inverse: ShiftMap
    cover_x: CoverGraph
    cover_y: CoverGraph
    cocycles: tuple[CocyclePairSpec, CocyclePairSpec] | None
    report: VerificationReport


def factor_machine(c: CoverGraph) -> Transducer:
    return td.symbol_map(c.edge_presentation, c.factor, "π")


def lift_to_cover(
    h: ShiftMap,
    h_inv: ShiftMap,
    what: str = "conjugacy",
    ell: int = 0,
    cocycles: tuple[CocyclePairSpec, CocyclePairSpec] | None = None,
    max_lag: int = 3,
    lead_bound: int = LEAD_BOUND,
) -> CoverLift:
    """Lift a verified relation to the covers and re-verify it there."""
    cx, cy = build_cover(h.domain), build_cover(h.codomain)
    ht = lift_map(h, cx, cy, max_lag)
    hit = lift_map(h_inv, cy, cx, max_lag)
    eqs = [
        Equation("π∘h~ = h∘π", td.compose(factor_machine(cy), ht.machine), td.compose(h.machine, factor_machine(cx)),
                 lambda x: ht.direct(x).map_symbols(cy.factor.__getitem__),
                 lambda x: h.direct(x.map_symbols(cx.factor.__getitem__))),
        Equation("π∘h_inv~ = h_inv∘π", td.compose(factor_machine(cx), hit.machine),
                 td.compose(h_inv.machine, factor_machine(cy)),
                 lambda y: hit.direct(y).map_symbols(cx.factor.__getitem__),
                 lambda y: h_inv.direct(y.map_symbols(cy.factor.__getitem__))),
    ]
    lifted = None
    if what == "conjugacy":
        eqs += eventual_equations(ht, hit, 0)
    elif what == "eventual":
        eqs += eventual_equations(ht, hit, ell)
    elif what == "coe":
        if cocycles is None:
            raise ValueError("coe lifting needs the cocycle pairs")
        lifted = (cocycles[0].pulled_back(cx), cocycles[1].pulled_back(cy))
        eqs += coe_equations(ht, hit, *lifted)
    else:
        raise ValueError(f"unknown relation {what!r}")
    rep = _decide(eqs, lead_bound)
    return CoverLift(ht, hit, cx, cy, lifted, rep)


def lifts_intertwine(lift: CoverLift, h: ShiftMap, points: Sequence[EvPerPoint]) -> bool:
    """π(h~(x~)) = h(x) for every lift of the given points."""
    for x in points:
        for xt in lift_point(lift.cover_x, x):
            if lift.forward(xt.path).map_symbols(lift.cover_y.factor.__getitem__) != h(x):
                return False
    return True
