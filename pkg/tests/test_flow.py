import itertools

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import SHIFTS
from shiftlab.cohomology import CylFunction
from shiftlab.cover import graph_isomorphic
from shiftlab.flow import (
    RoofFunction,
    base_element,
    base_lag,
    big_psi,
    big_psi_inverse,
    compare_flow_invariants,
    identity_spec,
    invariant_report,
    iota_star,
    kappa_base,
    kappa_susp,
    psi,
    psi_inverse,
    psi_sharp,
    psi_star,
    psi_star_displayed,
    sigma_f,
    step_base,
    suspend,
    verify_flow_certificate,
)
from shiftlab.formats import load_presentation
from shiftlab.presentation import (
    EvPerPoint,
    admissible_words,
    eventually_periodic_points,
    extend_to_point,
    from_matrix,
    lp,
    periodic_orbits_up_to,
    periodic_points_up_to,
)
from shiftlab.relations import MapSpec

P = EvPerPoint.parse
A = [[1, 1], [1, 1]]
A_PRIME = [[1, 1, 0, 0], [1, 1, 1, 0], [0, 1, 1, 1], [0, 0, 1, 1]]


def roofs(p):
    """The constant roofs 1 and 2 and the roof 1 + [x_0 = 1]."""
    out = {"1": RoofFunction.constant(p, 1), "2": RoofFunction.constant(p, 2)}
    if "1" in p.alphabet:
        out["1+[1]"] = RoofFunction(CylFunction.constant(p, 1) + CylFunction.indicator(p, ("1",)))
    return out


def test_roof_must_be_positive(load):
    with pytest.raises(ValueError):
        RoofFunction.constant(load("golden"), 0)


def test_roof_depth_bound(load):
    p = load("full2")
    deep = RoofFunction(CylFunction.constant(p, 1).lift(5))
    with pytest.raises(ValueError):
        suspend(p, deep)


@pytest.mark.parametrize("name", SHIFTS)
def test_unit_roof_gives_the_same_shift(load, name):
    p = load(name)
    sp = suspend(p, RoofFunction.constant(p, 1))
    assert graph_isomorphic(sp.presentation, p, {a: f"{a}_0" for a in p.alphabet}) is not None


@pytest.mark.parametrize("name", ["golden", "full2", "even"])
@pytest.mark.parametrize("roof", ["1", "2", "1+[1]"])
def test_suspension_language_matches_tower_words(load, name, roof):
    p = load(name)
    f = roofs(p)[roof]
    sp = suspend(p, f)
    n = 6
    want = set()
    for w in admissible_words(p, n + 1):
        x = extend_to_point(p, w)
        for i in range(f(x)):
            want.add(tuple(sp.symbol(a, lv) for a, lv in oracles.tower_word(f.f.values, f.depth, x, i, n)))
    assert set(admissible_words(sp.presentation, n)) == want


@pytest.mark.parametrize("name", ["golden", "full2", "even"])
@pytest.mark.parametrize("roof", ["2", "1+[1]"])
def test_suspension_keeps_bowen_franks_and_det_sign(load, name, roof):
    p = load(name)
    base = invariant_report(p)
    susp = invariant_report(suspend(p, roofs(p)[roof]).presentation)
    assert susp.bowen_franks.invariant_factors == base.bowen_franks.invariant_factors
    assert (susp.det > 0) - (susp.det < 0) == (base.det > 0) - (base.det < 0)


def test_golden_double_roof_periodic_counts(load):
    p = load("golden")
    sp = suspend(p, RoofFunction.constant(p, 2))
    base_orbits = periodic_orbits_up_to(p, 5)
    susp_orbits = periodic_orbits_up_to(sp.presentation, 10)
    for n in range(1, 6):
        assert sum(1 for y in susp_orbits if lp(y) == 2 * n) == sum(1 for x in base_orbits if lp(x) == n)
    for n in range(1, 4):
        assert oracles.periodic_orbit_count(sp.presentation, 2 * n) == 2 * oracles.periodic_orbit_count(p, n)
    assert not [y for y in susp_orbits if lp(y) % 2]


@pytest.mark.parametrize("name", ["golden", "even"])
def test_tower_image_is_in_suspension(load, name):
    p = load(name)
    f = roofs(p)["1+[1]"]
    sp = suspend(p, f)
    for x in oracles.sample_points(p, 2, 2):
        for i in range(f(x)):
            y = sp.j(x, i)
            assert oracles.in_shift(sp.presentation, y)
            # σ on the image is σ_f on pairs
            assert sp.j(*sigma_f(f, x, i)) == y.shift(1)


# ---------------------------------------------------------------------------
# the return-sum pullback


def indicator_basis(sp, depth):
    for w in admissible_words(sp.presentation, depth):
        yield CylFunction.indicator(sp.presentation, w)


@pytest.mark.parametrize("name", ["golden", "full2", "even"])
@pytest.mark.parametrize("roof", ["1", "2", "1+[1]"])
def test_return_sum_exhaustive(load, name, roof):
    p = load(name)
    f = roofs(p)[roof]
    sp = suspend(p, f)
    pts = [x for x in eventually_periodic_points(p, 5, 6) if len(x.transient) + len(x.cycle) <= 6]
    for depth in (0, 1, 2):
        for xi in indicator_basis(sp, depth):
            pulled = iota_star(sp, xi)
            for x in pts:
                assert pulled(x) == oracles.return_sum(xi.values, depth, f.f.values, f.depth, sp.symbol, x)


@pytest.mark.parametrize("name", ["golden", "even"])
def test_return_sum_constant_cases(load, name):
    p = load(name)
    f = RoofFunction.constant(p, 2)
    sp = suspend(p, f)
    one = iota_star(sp, CylFunction.constant(sp.presentation, 1))
    assert set(one.values.values()) == {2}
    floor = CylFunction.from_callable(sp.presentation, 1, lambda w: int(w[0].endswith("_0")))
    assert set(iota_star(sp, floor).values.values()) == {1}


@pytest.mark.parametrize("name", ["golden", "even", "full2"])
def test_return_sum_orbit_correspondence(load, name):
    p = load(name)
    f = roofs(p)["1+[1]"]
    sp = suspend(p, f)
    for xi in indicator_basis(sp, 2):
        pulled = iota_star(sp, xi)
        for x in periodic_points_up_to(p, 4):
            n = len(x.cycle)
            height = sum(f(x.shift(t)) for t in range(n))
            assert pulled.birkhoff(x, n) == xi.birkhoff(sp.j(x, 0), height)


# ---------------------------------------------------------------------------
# stabilized cochain maps


def tower_cochain(sp, a: CylFunction, b: CylFunction):
    """A function on X_f × N living on the two lowest copies."""

    def xi(x, i, k):
        if k == 0:
            return a(sp.j(x, i))
        return b(sp.j(x, i)) if k == 1 else 0

    return xi


def base_cochain(c: CylFunction, d: CylFunction):
    def zeta(x, j):
        if j == 0:
            return c(x)
        return d(x) if j <= 2 else 0

    return zeta


def base_elements(p, max_steps=3):
    pts = [(x, j) for x in oracles.sample_points(p, 1, 2) for j in range(3)]
    ends = {}
    for pt in pts:
        e = pt
        for m in range(max_steps + 1):
            ends.setdefault(e, []).append((pt, m))
            e = step_base(*e)
    out = []
    for group in ends.values():
        for (a, ma), (b, mb) in itertools.product(group, repeat=2):
            out.append(base_element(a, b, ma, mb))
    return out


def random_table(data, sp, depth):
    ws = sorted(admissible_words(sp.presentation, depth))
    vals = data.draw(st.lists(st.integers(-3, 3), min_size=len(ws), max_size=len(ws)))
    return CylFunction(sp.presentation, depth, dict(zip(ws, vals)))


def random_base(data, p, depth):
    ws = sorted(admissible_words(p, depth))
    vals = data.draw(st.lists(st.integers(-3, 3), min_size=len(ws), max_size=len(ws)))
    return CylFunction(p, depth, dict(zip(ws, vals)))


@pytest.mark.parametrize("name,roof", [("even", "1+[1]"), ("golden", "2"), ("full2", "1+[1]")])
@settings(max_examples=8)
@given(data=st.data())
def test_pullback_intertwines_kappa(name, roof, data):
    p = load_presentation(name)
    f = roofs(p)[roof]
    sp = suspend(p, f)
    xi = tower_cochain(sp, random_table(data, sp, 2), random_table(data, sp, 1))
    pulled = psi_star(f, xi)
    for g in base_elements(p):
        assert kappa_base(pulled, g) == kappa_susp(f, xi, big_psi(f, g))


@pytest.mark.parametrize("name,roof", [("even", "1+[1]"), ("golden", "2"), ("full2", "1+[1]")])
@settings(max_examples=8)
@given(data=st.data())
def test_pushforward_intertwines_kappa(name, roof, data):
    p = load_presentation(name)
    f = roofs(p)[roof]
    zeta = base_cochain(random_base(data, p, 2), random_base(data, p, 1))
    pushed = psi_sharp(f, zeta)
    for g in base_elements(p):
        assert kappa_susp(f, pushed, big_psi(f, g)) == kappa_base(zeta, g)


@pytest.mark.parametrize("name,roof", [("even", "1+[1]"), ("golden", "2")])
def test_stabilized_map_round_trip(load, name, roof):
    p = load(name)
    f = roofs(p)[roof]
    for g in base_elements(p):
        back = big_psi_inverse(f, big_psi(f, g))
        assert (back.a, back.b) == (g.a, g.b)
        assert back.ma - back.mb == g.ma - g.mb
        assert base_lag(back) == base_lag(g)


@given(st.integers(0, 30))
def test_level_split_is_bijective(j):
    p = load_presentation("golden")
    f = roofs(p)["1+[1]"]
    for x in (P("(0)"), P("1(0)"), P("(10)")):
        x_, i, k = psi(f, x, j)
        assert 0 <= i < f(x)
        assert psi_inverse(f, x_, i, k) == (x, j)


@pytest.mark.parametrize("name", ["even", "golden"])
def test_closed_form_pullback_differs_only_at_level_multiples(load, name):
    p = load(name)
    f = roofs(p)["1+[1]"]
    sp = suspend(p, f)
    a = CylFunction.from_callable(sp.presentation, 2, lambda w: 3 * len(w[0]) + (w[1] > w[0]))
    b = CylFunction.from_callable(sp.presentation, 1, lambda w: 1 + int(w[0][-1]))
    xi = tower_cochain(sp, a, b)
    good, shown = psi_star(f, xi), psi_star_displayed(f, xi)
    predicted, seen = set(), set()
    for x in oracles.sample_points(p, 1, 2):
        for j in range(7):
            if j > 0 and j % f(x) == 0 and f(x) >= 2:
                predicted.add((x, j))
            if good(x, j) != shown(x, j):
                seen.add((x, j))
    assert seen <= predicted
    assert seen


# ---------------------------------------------------------------------------
# invariants and certificates


def test_intro_matrices_are_distinguished():
    r = compare_flow_invariants(from_matrix(A, "edge"), from_matrix(A_PRIME, "edge"))
    assert r.verdict == "distinguishable"
    assert str(r) == "distinguishable: det −1 vs +1"
    assert compare_flow_invariants(from_matrix(A, "edge"), from_matrix(A, "edge")).verdict == "inconclusive"


FROZEN_INVARIANTS = {
    "full2": ((), -1),
    "golden": ((), -1),
    "even": ((0,), 0),
    "odd": ((0,), 0),
    "E": ((0,), 0),
    "fixed_point": ((0,), 0),
}


@pytest.mark.parametrize("name", FROZEN_INVARIANTS)
def test_invariants_frozen(load, name):
    r = invariant_report(load(name))
    assert (r.bowen_franks.invariant_factors, r.det) == FROZEN_INVARIANTS[name]
    assert r.det == oracles.cofactor_det([[int(i == j) - v for j, v in enumerate(row)] for i, row in enumerate(r.cover_adjacency)])


def test_compare_needs_effective_sides(load):
    r = compare_flow_invariants(load("even"), load("golden"))
    assert r.verdict == "inconclusive"
    assert compare_flow_invariants(load("golden"), load("full2")).verdict == "inconclusive"


def test_flow_certificates(load):
    full = load("full2")
    one = RoofFunction.constant(full, 1)
    assert verify_flow_certificate(full, full, one, one, identity_spec(suspend(full, one))).verdict == "pass"
    two = RoofFunction.constant(full, 2)
    sp = suspend(full, two)
    Y = sp.presentation
    relabel = MapSpec.symbols({s: f"{s}_0" for s in Y.alphabet})
    back = MapSpec.symbols({f"{s}_0": s for s in Y.alphabet})
    g = RoofFunction.constant(Y, 1)
    assert verify_flow_certificate(full, Y, two, g, relabel).verdict == "pass"
    assert verify_flow_certificate(full, Y, two, g, relabel, back).verdict == "pass"


def test_flow_certificate_rejects_intro_candidate():
    X, Y = from_matrix(A, "edge"), from_matrix(A_PRIME, "edge")
    one_x, one_y = RoofFunction.constant(X, 1), RoofFunction.constant(Y, 1)
    rep = verify_flow_certificate(X, Y, one_x, one_y, MapSpec.symbols({f"{a}_0": f"{a}_0" for a in X.alphabet}))
    assert rep.verdict == "fail" and rep.counterexample is not None
