import sys
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from shiftlab import formats  # noqa: E402
from shiftlab.presentation import Presentation  # noqa: E402
from shiftlab.relations import compile_map  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SHIFTS = ["even", "odd", "golden", "full2", "E", "F", "Eprime", "Fprime", "fixed_point", "golden_marked"]


@pytest.fixture(scope="session")
def load():
    return formats.load_presentation


@st.composite
def presentations(draw, max_vertices=3, alphabet=("0", "1")):
    """Small labeled graphs in which every vertex has an outgoing edge."""
    n = draw(st.integers(1, max_vertices))
    verts = [f"v{i}" for i in range(n)]
    edges = set()
    for v in verts:
        t = draw(st.sampled_from(verts))
        a = draw(st.sampled_from(alphabet))
        edges.add((v, t, a))
    extra = draw(st.lists(st.tuples(st.sampled_from(verts), st.sampled_from(verts), st.sampled_from(alphabet)), max_size=4))
    edges |= set(extra)
    return Presentation(tuple(alphabet), tuple(verts), tuple(sorted(edges)))


@dataclass
class Example:
    X: Presentation
    Y: Presentation
    h: object
    h_inv: object
    cocycles: tuple | None


CASES = {"ex61": ("Eprime", "Fprime"), "ex62": ("full2", "golden"), "ex63": ("even", "odd"), "ex64": ("E", "F")}


@lru_cache(maxsize=None)
def load_example(name: str) -> Example:
    """A fixture map pair compiled over its shifts, with its cocycle file if there is one."""
    X, Y = (formats.load_presentation(n) for n in CASES[name])
    pair = formats.map_pair_from_json(formats.load_doc(name), X, Y)
    h, hi = compile_map(pair.forward, X, Y), compile_map(pair.inverse, Y, X)
    try:
        cocycles = formats.cocycles_from_json(formats.load_doc(name + "c"), X, Y)
    except formats.FormatError:
        cocycles = None
    return Example(X, Y, h, hi, cocycles)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
