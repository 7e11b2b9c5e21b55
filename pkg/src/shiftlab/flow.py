"""Discrete suspensions, their cochain maps, and flow-equivalence invariants.

A point of the suspension is a pair ``(x, i)`` with ``0 <= i < f(x)``; its
symbolic image reads the levels of ``x_0`` downwards, then those of
``x_1``, and so on.  Points of the stabilized spaces ``X × N`` and
``X_f × N`` are ``(x, j)`` and ``(x, i, k)``.  A stabilized groupoid element
is stored by its two ends and the number of stabilized shift steps after
which they meet; the cocycle value ``κ(ξ)`` sums ``ξ`` along both orbits,
endpoints included.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

from .cohomology import CylFunction
from .cover import build_cover
from .past import GroupoidFlags, classify
from .presentation import (
    EvPerPoint,
    Presentation,
    Word,
    admissible_words,
    extend_to_point,
    format_word,
    trim,
    window_graph,
)
from .relations import (
    LEAD_BOUND,
    MapSpec,
    VerificationReport,
    almost_injective,
    almost_surjective,
    compile_map,
    verify_conjugacy,
)
from .smith import AbelianGroupPresentation, bowen_franks

MAX_ROOF_DEPTH = 4
CHECK_LENGTH = 8

BasePoint = tuple[EvPerPoint, int]  # (x, j) in X × N
SuspPoint = tuple[EvPerPoint, int, int]  # ((x, i), k) in X_f × N
BaseCochain = Callable[[EvPerPoint, int], int]
SuspCochain = Callable[[EvPerPoint, int, int], int]


@dataclass(frozen=True, eq=False)
class RoofFunction:
    f: CylFunction

    def __post_init__(self):
        if self.f.minimum() < 1:
            bad = next(w for w, v in sorted(self.f.values.items()) if v < 1)
            raise ValueError(f"roof must be at least 1, got {self.f.values[bad]} on {format_word(bad) or 'ε'}")

    @classmethod
    def constant(cls, p: Presentation, c: int) -> "RoofFunction":
        return cls(CylFunction.constant(p, c))

    @property
    def domain(self) -> Presentation:
        return self.f.domain

    @property
    def depth(self) -> int:
        return self.f.depth

    @property
    def max_value(self) -> int:
        return max(self.f.values.values())

    def __call__(self, x: EvPerPoint | Word) -> int:
        return self.f(x)


def sigma_f(f: RoofFunction, x: EvPerPoint, i: int) -> tuple[EvPerPoint, int]:
    if i > 0:
        return x, i - 1
    y = x.shift()
    return y, f(y) - 1


def sigma_f_iter(f: RoofFunction, x: EvPerPoint, i: int, n: int) -> tuple[EvPerPoint, int]:
    for _ in range(n):
        x, i = sigma_f(f, x, i)
    return x, i


# ---------------------------------------------------------------------------
# the suspension as a labeled graph


@dataclass(frozen=True, eq=False)
class SuspensionPresentation:
    base: Presentation
    roof: RoofFunction
    presentation: Presentation
    symbols: Mapping[tuple[str, int], str]

    def symbol(self, a: str, level: int) -> str:
        return self.symbols[a, level]

    def _block(self, a: str, top: int) -> list[str]:
        return [self.symbols[a, lv] for lv in range(top, -1, -1)]

    def j(self, x: EvPerPoint, i: int) -> EvPerPoint:
        """Symbolic image of (x, i)."""
        if not 0 <= i < self.roof(x):
            raise ValueError(f"level {i} out of range at {x}")
        n0, p = max(len(x.transient), 1), len(x.cycle)
        head = self._block(x.symbol(0), i)
        for t in range(1, n0):
            y = x.shift(t)
            head += self._block(y.symbol(0), self.roof(y) - 1)
        cyc: list[str] = []
        for t in range(n0, n0 + p):
            y = x.shift(t)
            cyc += self._block(y.symbol(0), self.roof(y) - 1)
        return EvPerPoint(tuple(head), tuple(cyc))

    def j_prefix(self, w: Word, i: int, n: int) -> Word | None:
        """First n symbols of j(x, i) for any x starting with w, if w is long enough."""
        D = self.roof.depth
        out = self._block(w[0], i)
        t = 1
        while len(out) < n:
            if t + D > len(w) or t >= len(w):
                return None
            out += self._block(w[t], self.roof.f.values[w[t : t + D]] - 1)
            t += 1
        return tuple(out[:n])

    def levels_of(self, y: EvPerPoint) -> EvPerPoint:
        """The level sequence of a point written in suspension symbols."""
        back = {s: lv for (a, lv), s in self.symbols.items()}
        return y.map_symbols(lambda s: str(back[s]))

    def to_json(self) -> dict:
        p = self.presentation
        return {
            "format": "shiftlab/1",
            "alphabet": list(p.alphabet),
            "vertices": list(p.vertices),
            "edges": [{"from": s, "to": t, "label": a} for s, t, a in p.edges],
            "embedding": {s: {"symbol": a, "level": lv} for (a, lv), s in sorted(self.symbols.items())},
            "roof": self.roof.f.to_json(),
        }


def suspend(p: Presentation, f: RoofFunction, max_depth: int = MAX_ROOF_DEPTH, check_length: int = CHECK_LENGTH) -> SuspensionPresentation:
    """Expand every edge of the depth-D window graph into a chain of f-many levels."""
    base = trim(p)
    if f.domain != base:
        raise ValueError("roof function lives on a different shift")
    if f.depth > max_depth:
        raise ValueError(f"roof depth {f.depth} exceeds the supported bound {max_depth}")
    g, window = window_graph(base, f.depth)
    symbols = {(a, lv): f"{a}_{lv}" for a in base.alphabet for lv in range(f.max_value)}
    verts = list(g.vertices)
    edges = []
    for n, e in enumerate(g.edges):
        s, t, a = e
        m = f.f.values[window[e][: f.depth]]
        chain = [s] + [f"{s}~{n}.{lv}" for lv in range(m - 1, 0, -1)] + [t]
        verts += chain[1:-1]
        for lv, (u, v) in zip(range(m - 1, -1, -1), zip(chain, chain[1:])):
            edges.append((u, v, symbols[a, lv]))
    used = {a for *_, a in edges}
    symbols = {k: v for k, v in symbols.items() if v in used}
    pres = Presentation(tuple(sorted(used)), tuple(verts), tuple(edges), name=f"{base.name}^f")
    sp = SuspensionPresentation(base, f, trim(pres), symbols)
    if check_length:
        _check_language(sp, check_length)
    return sp


def _check_language(sp: SuspensionPresentation, n: int) -> None:
    want = set()
    for w in admissible_words(sp.base, n + sp.roof.depth):
        for i in range(sp.roof.f.values[w[: sp.roof.depth]]):
            want.add(sp.j_prefix(w, i, n))
    got = set(admissible_words(sp.presentation, n))
    if got != want:
        extra = sorted(format_word(w) for w in got - want)[:3]
        missing = sorted(format_word(w) for w in want - got)[:3]
        raise AssertionError(f"suspension language mismatch: extra {extra}, missing {missing}")


# ---------------------------------------------------------------------------
# cochain maps


def on_suspension(sp: SuspensionPresentation, xi: CylFunction) -> Callable[[EvPerPoint, int], int]:
    """A function on the suspension presentation, read on pairs (x, i)."""
    if xi.domain != sp.presentation:
        raise ValueError("function is not defined on this suspension")
    return lambda x, i: xi(sp.j(x, i))


def iota_star_direct(sp: SuspensionPresentation, xi: Callable[[EvPerPoint, int], int], x: EvPerPoint) -> int:
    total, (y, i) = 0, (x, 0)
    for _ in range(sp.roof(x.shift())):
        total += xi(y, i)
        y, i = sigma_f(sp.roof, y, i)
    return total


def iota_star(sp: SuspensionPresentation, xi: CylFunction) -> CylFunction:
    """Pull back along x ↦ (x, 0), summing over the return time to level 0."""
    ev = on_suspension(sp, xi)
    depth = xi.depth + sp.roof.depth + 1
    return CylFunction.from_callable(sp.base, depth, lambda w: iota_star_direct(sp, ev, extend_to_point(sp.base, w)))


def iota_0_star(zeta: Callable) -> Callable:
    """Restriction of a function on a stabilized space to level 0."""
    return lambda *pt: zeta(*pt, 0)


def psi(f: RoofFunction, x: EvPerPoint, j: int) -> SuspPoint:
    m = f(x)
    return x, j % m, j // m


def psi_inverse(f: RoofFunction, x: EvPerPoint, i: int, k: int) -> BasePoint:
    if not 0 <= i < f(x):
        raise ValueError(f"level {i} out of range at {x}")
    return x, k * f(x) + i


def step_base(x: EvPerPoint, j: int) -> BasePoint:
    return (x, j - 1) if j > 0 else (x.shift(), 0)


def step_susp(f: RoofFunction, x: EvPerPoint, i: int, k: int) -> SuspPoint:
    if k > 0:
        return x, i, k - 1
    y, i2 = sigma_f(f, x, i)
    return y, i2, 0


@dataclass(frozen=True)
class StabElement:
    """Ends ``a``, ``b`` of a stabilized groupoid element meeting after ``ma``, ``mb`` steps."""

    a: tuple
    b: tuple
    ma: int
    mb: int


def _orbit(step, pt, n):
    out = [pt]
    for _ in range(n):
        out.append(step(*out[-1]))
    return out


def _meet(step, g: StabElement):
    ea, eb = _orbit(step, g.a, g.ma)[-1], _orbit(step, g.b, g.mb)[-1]
    if ea != eb:
        raise ValueError(f"ends do not meet: {ea} vs {eb}")
    return ea


def base_element(a: BasePoint, b: BasePoint, ma: int, mb: int) -> StabElement:
    g = StabElement(a, b, ma, mb)
    _meet(step_base, g)
    return g


def susp_element(f: RoofFunction, a: SuspPoint, b: SuspPoint, ma: int, mb: int) -> StabElement:
    g = StabElement(a, b, ma, mb)
    _meet(lambda *p: step_susp(f, *p), g)
    return g


def base_lag(g: StabElement) -> int:
    """The groupoid coordinate: number of σ steps on the left end minus the right."""
    (_, j), (_, i) = g.a, g.b
    return (g.ma - j) - (g.mb - i)


def kappa_base(zeta: BaseCochain, g: StabElement) -> int:
    _meet(step_base, g)
    return sum(zeta(*p) for p in _orbit(step_base, g.a, g.ma)) - sum(zeta(*p) for p in _orbit(step_base, g.b, g.mb))


def kappa_susp(f: RoofFunction, xi: SuspCochain, g: StabElement) -> int:
    step = lambda *p: step_susp(f, *p)  # noqa: E731
    _meet(step, g)
    return sum(xi(*p) for p in _orbit(step, g.a, g.ma)) - sum(xi(*p) for p in _orbit(step, g.b, g.mb))


def _to_level_zero(step, g: StabElement, done) -> StabElement:
    ma, mb = g.ma, g.mb
    e = _orbit(step, g.a, ma)[-1]
    while not done(e):
        e = step(*e)
        ma, mb = ma + 1, mb + 1
    return StabElement(g.a, g.b, ma, mb)


def big_psi(f: RoofFunction, g: StabElement) -> StabElement:
    """The stabilized groupoid map from X × N to X_f × N."""
    g = _to_level_zero(step_base, g, lambda e: e[1] == 0)
    out = []
    for (x, j), m in ((g.a, g.ma), (g.b, g.mb)):
        s = m - j
        x_, i, k = psi(f, x, j)
        level = i + sum(f(x.shift(r)) for r in range(1, s + 1))
        out.append(((x_, i, k), k + level))
    (a, ma), (b, mb) = out
    return susp_element(f, a, b, ma, mb)


def big_psi_inverse(f: RoofFunction, h: StabElement) -> StabElement:
    step = lambda *p: step_susp(f, *p)  # noqa: E731
    h = _to_level_zero(step, h, lambda e: e[1] == 0 and e[2] == 0)
    out = []
    for (x, i, k), m in ((h.a, h.ma), (h.b, h.mb)):
        level, s, y, acc = m - k, 0, x, i
        while acc < level:
            s += 1
            y = y.shift()
            acc += f(y)
        if acc != level:
            raise AssertionError("suspension orbit does not return to level 0 where expected")
        x_, j = psi_inverse(f, x, i, k)
        out.append(((x_, j), s + j))
    (a, ma), (b, mb) = out
    return base_element(a, b, ma, mb)


def psi_star(f: RoofFunction, xi: SuspCochain) -> BaseCochain:
    """Pull back of a function on X_f × N to X × N, compatible with κ through Ψ_f.

    The value at (x, j) is κ(ξ) on the image of the element from (x, j) to its
    stabilized shift, so the intertwining holds on those elements by
    construction and on all others by the cocycle identity.
    """

    def value(x: EvPerPoint, j: int) -> int:
        g = base_element((x, j), (x, j - 1), j, j - 1) if j > 0 else base_element((x, 0), (x.shift(), 0), 1, 0)
        return kappa_susp(f, xi, big_psi(f, g))

    return value


def psi_star_displayed(f: RoofFunction, xi: SuspCochain) -> BaseCochain:
    """The closed-form pullback with the level index k = ⌊j / f(x)⌋ used in both sums.

    It agrees with ``psi_star`` except at (x, j) with j a positive multiple
    of f(x) ≥ 2.
    """

    def orbit_sum(pt: SuspPoint, n: int) -> int:
        return sum(xi(*p) for p in _orbit(lambda *q: step_susp(f, *q), pt, n))

    def value(x: EvPerPoint, j: int) -> int:
        if j == 0:
            return orbit_sum(psi(f, x, 0), f(x.shift()) - 1)
        k = j // f(x)
        return orbit_sum(psi(f, x, j), k + 1) - orbit_sum(psi(f, x, j - 1), k)

    return value


def psi_sharp(f: RoofFunction, zeta: BaseCochain) -> SuspCochain:
    """Push forward of a function on X × N to X_f × N."""

    def value(x: EvPerPoint, i: int, k: int) -> int:
        m = f(x)
        if k >= 1:
            return sum(zeta(x, j) for j in range((k - 1) * m + i + 1, k * m + i + 1))
        if i >= 1:
            return zeta(x, i)
        y = x.shift()
        return zeta(x, 0) - sum(zeta(y, j) for j in range(1, f(y)))

    return value


@dataclass(frozen=True, eq=False)
class CochainMaps:
    suspension: SuspensionPresentation
    iota_star: Callable[[CylFunction], CylFunction]
    psi_star: Callable[[SuspCochain], BaseCochain]
    psi_star_displayed: Callable[[SuspCochain], BaseCochain]
    psi_sharp: Callable[[BaseCochain], SuspCochain]
    big_psi: Callable[[StabElement], StabElement]


def suspension_cochain_maps(p: Presentation, f: RoofFunction) -> CochainMaps:
    sp = suspend(p, f)
    return CochainMaps(
        sp,
        lambda xi: iota_star(sp, xi),
        lambda xi: psi_star(f, xi),
        lambda xi: psi_star_displayed(f, xi),
        lambda zeta: psi_sharp(f, zeta),
        lambda g: big_psi(f, g),
    )


# ---------------------------------------------------------------------------
# invariants


@dataclass
class FlowInvariants:
    cover_adjacency: list[list[int]]
    bowen_franks: AbelianGroupPresentation
    det: int
    flags: GroupoidFlags

    def to_json(self) -> dict:
        return {
            "format": "shiftlab/1",
            "cover_adjacency": self.cover_adjacency,
            "bf_invariant_factors": list(self.bowen_franks.invariant_factors),
            "bf_group": str(self.bowen_franks),
            "det_I_minus_A": self.det,
            "flags": {
                "principal": self.flags.principal,
                "effective": self.flags.effective,
                "condition_I": self.flags.condition_I,
                "dense_aperiodic": self.flags.dense_aperiodic,
            },
        }


def invariant_report(p: Presentation) -> FlowInvariants:
    """Bowen-Franks data of the cover graph; necessary conditions for flow equivalence only."""
    c = build_cover(p)
    adj = c.adjacency()
    bf = bowen_franks(adj)
    return FlowInvariants(adj, bf, bf.determinant, classify(p))


def _signed(d: int) -> str:
    return f"+{d}" if d > 0 else ("0" if d == 0 else f"−{-d}")


def _sign(d: int) -> int:
    return (d > 0) - (d < 0)


@dataclass
class FlowComparison:
    verdict: str  # "distinguishable" | "inconclusive"
    reason: str
    reports: tuple[FlowInvariants, FlowInvariants]
    notes: list[str] = field(default_factory=list)

    def __str__(self) -> str:
        return f"{self.verdict}: {self.reason}"

    def to_json(self) -> dict:
        return {
            "format": "shiftlab/1",
            "verdict": self.verdict,
            "reason": self.reason,
            "reports": [r.to_json() for r in self.reports],
            "notes": self.notes,
        }


def compare_flow_invariants(p1: Presentation, p2: Presentation) -> FlowComparison:
    """Never claims flow equivalence; only reports a certified difference."""
    r1, r2 = invariant_report(p1), invariant_report(p2)
    reasons = []
    if not r1.bowen_franks.isomorphic(r2.bowen_franks):
        reasons.append(f"Bowen-Franks {r1.bowen_franks} vs {r2.bowen_franks}")
    if _sign(r1.det) != _sign(r2.det):
        reasons.append(f"det {_signed(r1.det)} vs {_signed(r2.det)}")
    if not (r1.flags.effective and r2.flags.effective):
        note = "invariants of covers decide nothing unless both groupoids are effective"
        why = "; ".join(reasons) if reasons else "invariants agree"
        return FlowComparison("inconclusive", f"{why} but not both effective", (r1, r2), [note])
    if reasons:
        return FlowComparison("distinguishable", "; ".join(reasons), (r1, r2))
    return FlowComparison("inconclusive", f"Bowen-Franks {r1.bowen_franks} and det signs agree", (r1, r2))


def verify_flow_certificate(
    pX: Presentation,
    pY: Presentation,
    f: RoofFunction,
    g: RoofFunction,
    h: MapSpec,
    h_inv: MapSpec | None = None,
    ell: int = 0,
    lead_bound: int = LEAD_BOUND,
) -> VerificationReport:
    """A conjugacy of suspensions, or an almost bijective block code between them."""
    sx, sy = suspend(pX, f), suspend(pY, g)
    fwd = compile_map(h, sx.presentation, sy.presentation)
    if h_inv is not None:
        inv = compile_map(h_inv, sy.presentation, sx.presentation)
        rep = verify_conjugacy(fwd, inv, lead_bound)
        rep.bounds["route"] = "conjugacy"
        return rep
    inj, sur = almost_injective(fwd, ell), almost_surjective(fwd, ell)
    rep = VerificationReport(
        "pass" if inj and sur else "fail",
        checked=inj.checked + sur.checked,
        counterexample=inj.counterexample or sur.counterexample,
        bounds={"route": "almost bijective", "ell": ell},
    )
    return rep


def identity_spec(sp: SuspensionPresentation) -> MapSpec:
    """The identity block code on a suspension's alphabet."""
    return MapSpec.symbols({a: a for a in sp.presentation.alphabet}, "id")
