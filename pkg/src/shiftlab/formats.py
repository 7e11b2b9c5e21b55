"""JSON readers and writers for the ``shiftlab/1`` file formats, and fixtures."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .cohomology import CylFunction
from .cover import CoverGraph
from .presentation import (
    EvPerPoint,
    Presentation,
    SftMatrix,
    compile_forbidden,
    format_word,
    from_matrix,
)
from .relations import CocyclePairSpec, MapSpec, Override

FORMAT = "shiftlab/1"


class FormatError(ValueError):
    """Input that does not parse as a shiftlab/1 document."""


def _check(doc: Mapping) -> None:
    if not isinstance(doc, Mapping):
        raise FormatError("document must be a JSON object")
    if doc.get("format", FORMAT) != FORMAT:
        raise FormatError(f"unsupported format {doc.get('format')!r}")


def read_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise FormatError(f"{path}: {e}") from e


def fixture_path(name: str) -> Path:
    p = resources.files("shiftlab") / "fixtures" / f"{name}.json"
    if not p.is_file():
        raise FormatError(f"no fixture named {name!r}")
    return Path(str(p))


def fixture_names() -> list[str]:
    return sorted(p.name[:-5] for p in (resources.files("shiftlab") / "fixtures").iterdir() if p.name.endswith(".json"))


def load_doc(ref: str | Path) -> dict:
    """A fixture name or a file path."""
    path = Path(ref)
    if path.suffix == ".json" and path.exists():
        return read_json(path)
    if path.suffix == ".json":
        return read_json(fixture_path(path.stem))
    return read_json(fixture_path(str(ref)))


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class LoadedShift:
    presentation: Presentation
    factor_labels: Mapping[str, str] | None = None


def presentation_from_json(doc: Mapping) -> Presentation:
    return shift_from_json(doc).presentation


def shift_from_json(doc: Mapping) -> LoadedShift:
    _check(doc)
    name = doc.get("name", "")
    try:
        if "matrix" in doc:
            names = doc.get("names")
            p = from_matrix(doc["matrix"], doc.get("kind", "edge"), names)
            return LoadedShift(Presentation(p.alphabet, p.vertices, p.edges, name=name))
        if "forbidden" in doc:
            p = compile_forbidden(doc["alphabet"], doc["forbidden"])
            return LoadedShift(Presentation(p.alphabet, p.vertices, p.edges, name=name))
        edges = tuple((e["from"], e["to"], e["label"]) for e in doc["edges"])
        p = Presentation(tuple(doc["alphabet"]), tuple(doc["vertices"]), edges, name=name)
    except (KeyError, TypeError) as e:
        raise FormatError(f"malformed presentation: missing {e}") from e
    except ValueError as e:
        raise FormatError(f"invalid presentation: {e}") from e
    return LoadedShift(p, doc.get("factor_labels"))


def presentation_to_json(p: Presentation, factor_labels: Mapping[str, str] | None = None) -> dict:
    doc: dict[str, Any] = {
        "format": FORMAT,
        "name": p.name,
        "alphabet": list(p.alphabet),
        "vertices": list(p.vertices),
        "edges": [{"from": s, "to": t, "label": a} for s, t, a in p.edges],
    }
    if factor_labels is not None:
        doc["factor_labels"] = dict(factor_labels)
    return doc


def load_shift(ref: str | Path) -> LoadedShift:
    return shift_from_json(load_doc(ref))


def load_presentation(ref: str | Path) -> Presentation:
    return load_shift(ref).presentation


def matrix_from_json(doc: Mapping) -> tuple[SftMatrix, str]:
    _check(doc)
    try:
        return SftMatrix(tuple(map(tuple, doc["matrix"]))), doc.get("kind", "edge")
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed matrix: {e}") from e


def cover_to_json(c: CoverGraph) -> dict:
    return c.to_json()


# ---------------------------------------------------------------------------
# functions, points and maps


def point_from_text(p: Presentation, text: str) -> EvPerPoint:
    x = EvPerPoint.parse(text)
    bad = (set(x.transient) | set(x.cycle)) - set(p.alphabet)
    if bad:
        raise FormatError(f"point {text!r} uses unknown symbols {sorted(bad)}")
    return x


def cyl_from_json(doc: Mapping, domain) -> CylFunction:
    """``{"depth", "values"}`` tables or ``{"cylinders", "default"}`` longest-prefix rules."""
    _check(doc)
    try:
        dom = domain.edge_presentation if isinstance(domain, CoverGraph) else domain
        if "values" in doc:
            vals = {dom.word(k): int(v) for k, v in doc["values"].items()}
            return CylFunction(dom, int(doc["depth"]), vals)
        if "constant" in doc:
            return CylFunction.constant(dom, int(doc["constant"]))
        table = doc["cylinders"]
        depth = int(doc.get("depth", max((len(dom.word(k)) for k in table), default=0)))
        return CylFunction.from_cylinders(dom, depth, table, doc.get("default"))
    except (KeyError, TypeError) as e:
        raise FormatError(f"malformed cylinder function: {e}") from e
    except ValueError as e:
        raise FormatError(f"invalid cylinder function: {e}") from e


def cyl_to_json(f: CylFunction) -> dict:
    return f.to_json()


def mapspec_from_json(doc: Mapping, dom: Presentation, cod: Presentation) -> MapSpec:
    _check(doc)
    kind = doc.get("kind")
    name = doc.get("name", "h")
    try:
        if kind == "substitution":
            rules = [(dom.word(a), cod.word(b)) for a, b in doc["rules"]]
            ovs = [
                Override(point_from_text(dom, e["input"]), point_from_text(cod, e["output"]), dom.word(e["prefix"]))
                for e in doc.get("exceptions", [])
            ]
            return MapSpec.substitution(rules, ovs, name)
        if kind == "block_map":
            table = {dom.word(k): v for k, v in doc["table"].items()}
            return MapSpec.block_map(int(doc["window"]), table, name)
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed map spec: {e}") from e
    raise FormatError(f"unknown map kind {kind!r}")


def mapspec_to_json(m: MapSpec) -> dict:
    if m.kind == "substitution":
        return {
            "format": FORMAT,
            "kind": "substitution",
            "name": m.name,
            "rules": [[format_word(a), format_word(b)] for a, b in m.rules],
            "exceptions": [
                {"input": str(o.source).replace("^∞", ""), "output": str(o.target).replace("^∞", ""),
                 "prefix": format_word(o.prefix)}
                for o in m.overrides
            ],
        }
    if m.kind == "block_map":
        return {"format": FORMAT, "kind": "block_map", "name": m.name, "window": m.window,
                "table": {format_word(k): v for k, v in sorted(m.table.items())}}
    raise FormatError("transducer-kind maps have no file form")


@dataclass
class MapPair:
    forward: MapSpec
    inverse: MapSpec | None
    domain: str | None = None
    codomain: str | None = None


def map_pair_from_json(doc: Mapping, dom: Presentation, cod: Presentation) -> MapPair:
    _check(doc)
    if "forward" not in doc:
        return MapPair(mapspec_from_json(doc, dom, cod), None)
    inv = doc.get("inverse")
    return MapPair(
        mapspec_from_json(doc["forward"], dom, cod),
        None if inv is None else mapspec_from_json(inv, cod, dom),
        doc.get("domain"),
        doc.get("codomain"),
    )


def cocycles_from_json(doc: Mapping, dom: Presentation, cod: Presentation) -> tuple[CocyclePairSpec, CocyclePairSpec]:
    _check(doc)
    try:
        cx = CocyclePairSpec(cyl_from_json(doc["k_X"], dom), cyl_from_json(doc["l_X"], dom))
        cy = CocyclePairSpec(cyl_from_json(doc["k_Y"], cod), cyl_from_json(doc["l_Y"], cod))
    except KeyError as e:
        raise FormatError(f"cocycle file lacks {e}") from e
    except ValueError as e:
        raise FormatError(str(e)) from e
    return cx, cy


def cocycles_to_json(cx: CocyclePairSpec, cy: CocyclePairSpec) -> dict:
    return {"format": FORMAT, "k_X": cx.k.to_json(), "l_X": cx.l.to_json(), "k_Y": cy.k.to_json(), "l_Y": cy.l.to_json()}
